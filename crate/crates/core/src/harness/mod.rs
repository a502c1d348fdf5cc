//! Fairness metrics, exact-versus-heuristic comparison, and CSV, JSON and
//! SVG output.

mod svg;

use std::io::Write;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_solver::{solve_exact, SolveConfig, SolveStatus};
use crate::formulation::{search_space_label, EvaluatedSolution, TOLERANCE};
use crate::instance::{compute_distances, Instance};
use crate::reduced_alloc::{heuristic_solve, HeuristicConfig};

pub use svg::render_svg;

/// First line of every CSV report.
pub const CSV_HEADER_COMMENT: &str = "# fairvax-report v1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spread {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub stdev: f64,
    pub spread: f64,
}

impl Spread {
    fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Spread {
                min: 0.0,
                max: 0.0,
                mean: 0.0,
                stdev: 0.0,
                spread: 0.0,
            };
        }
        let n = values.len() as f64;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Spread {
            min,
            max,
            mean,
            stdev: var.sqrt(),
            spread: max - min,
        }
    }
}

/// Efficiency, equity and accessibility summary of one solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FairnessMetrics {
    /// Overall fill-rate.
    pub beta: f64,
    /// Fill-rates of zones with positive demand.
    pub fill: Spread,
    /// Standardized distances to assigned sites.
    pub distance: Spread,
}

/// Zones without demand are left out of the fill-rate statistics.
pub fn fairness_metrics(instance: &Instance, ev: &EvaluatedSolution) -> FairnessMetrics {
    let fill: Vec<f64> = ev
        .beta_j
        .iter()
        .enumerate()
        .filter(|&(j, _)| instance.demand(j) > 0)
        .map(|(_, &b)| b)
        .collect();
    FairnessMetrics {
        beta: ev.beta,
        fill: Spread::of(&fill),
        distance: Spread::of(&ev.d_j),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceSummary {
    pub zones: usize,
    pub sites: usize,
    pub total_demand: u64,
    pub supply: u64,
    pub budget: f64,
    pub theta: f64,
    pub alpha: f64,
}

impl InstanceSummary {
    pub fn new(instance: &Instance) -> Self {
        InstanceSummary {
            zones: instance.num_zones(),
            sites: instance.num_sites(),
            total_demand: instance.total_demand(),
            supply: instance.supply(),
            budget: instance.budget,
            theta: instance.theta,
            alpha: instance.alpha,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub objective: f64,
    /// Open site ids, ascending.
    pub open_sites: Vec<usize>,
    pub total_cost: f64,
    pub fairness: FairnessMetrics,
}

impl MethodSummary {
    fn new(instance: &Instance, ev: &EvaluatedSolution) -> Self {
        MethodSummary {
            objective: ev.objective,
            open_sites: ev.solution.open_sites().iter().map(|&i| instance.sites[i].id).collect(),
            total_cost: ev.total_cost,
            fairness: fairness_metrics(instance, ev),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub instance: InstanceSummary,
    /// `None` when the instance exceeds the exact solver limits.
    pub exact_status: Option<SolveStatus>,
    pub exact: Option<MethodSummary>,
    pub heuristic: MethodSummary,
    pub k: usize,
    pub silhouette: Option<f64>,
    /// Exact minus heuristic objective.
    pub gap_abs: Option<f64>,
    pub gap_rel: Option<f64>,
    pub sites_agree: Option<bool>,
    pub jaccard: Option<f64>,
    pub space_full: String,
    pub space_reduced: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_wall_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heuristic_wall_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CompareConfig {
    pub solve: SolveConfig,
    pub heuristic: HeuristicConfig,
    /// Record wall times. Off by default so outputs are byte-stable.
    pub timings: bool,
}

fn jaccard(a: &[usize], b: &[usize]) -> f64 {
    let inter = a.iter().filter(|x| b.contains(x)).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Runs the heuristic and, when the instance is small enough, the exact
/// solver on another thread.
pub fn compare(instance: &Instance, cfg: &CompareConfig) -> Result<ComparisonReport> {
    instance.ensure_valid()?;
    let within_caps =
        instance.num_zones() <= cfg.solve.max_zones_exact && instance.num_sites() <= cfg.solve.max_sites_exact;
    let dm = compute_distances(instance);
    let (exact, heuristic) = std::thread::scope(|scope| {
        let exact = within_caps.then(|| scope.spawn(|| solve_exact(instance, &dm, &cfg.solve)));
        let heuristic = heuristic_solve(instance, &cfg.heuristic);
        let exact = exact.map(|h| h.join().expect("exact solver thread panicked"));
        (exact, heuristic)
    });
    let heuristic = heuristic?;
    let exact = exact.transpose()?;

    let h = MethodSummary::new(instance, &heuristic.evaluated);
    let e = exact
        .as_ref()
        .and_then(|r| r.best.as_ref())
        .map(|best| MethodSummary::new(instance, best));
    let gap_abs = e.as_ref().map(|e| e.objective - h.objective);
    let gap_rel = e.as_ref().zip(gap_abs).map(|(e, g)| {
        if e.objective.abs() > TOLERANCE {
            g / e.objective.abs()
        } else {
            0.0
        }
    });
    let seconds = |d: Duration| cfg.timings.then_some(d.as_secs_f64());
    Ok(ComparisonReport {
        instance: InstanceSummary::new(instance),
        exact_status: exact.as_ref().map(|r| r.status),
        sites_agree: e.as_ref().map(|e| e.open_sites == h.open_sites),
        jaccard: e.as_ref().map(|e| jaccard(&e.open_sites, &h.open_sites)),
        exact: e,
        k: heuristic.diagnostics.k,
        silhouette: heuristic.diagnostics.silhouette,
        gap_abs,
        gap_rel,
        space_full: search_space_label(instance.num_sites(), instance.num_zones()),
        space_reduced: search_space_label(instance.num_sites(), heuristic.diagnostics.k),
        exact_wall_s: exact.as_ref().and_then(|r| seconds(r.wall_time)),
        heuristic_wall_s: seconds(heuristic.wall_time),
        heuristic: h,
    })
}

const CSV_COLUMNS: [&str; 22] = [
    "zones",
    "sites",
    "supply",
    "budget",
    "theta",
    "alpha",
    "k",
    "silhouette",
    "exact_status",
    "exact_objective",
    "heuristic_objective",
    "gap_abs",
    "gap_rel",
    "sites_agree",
    "jaccard",
    "beta_exact",
    "beta_heuristic",
    "fill_spread_exact",
    "fill_spread_heuristic",
    "distance_spread_exact",
    "distance_spread_heuristic",
    "space_reduced",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_row(r: &ComparisonReport) -> Vec<String> {
    let status = r.exact_status.map(|s| match s {
        SolveStatus::Optimal => "optimal",
        SolveStatus::TimeLimit => "time_limit",
        SolveStatus::Infeasible => "infeasible",
    });
    let e = r.exact.as_ref();
    vec![
        r.instance.zones.to_string(),
        r.instance.sites.to_string(),
        r.instance.supply.to_string(),
        r.instance.budget.to_string(),
        r.instance.theta.to_string(),
        r.instance.alpha.to_string(),
        r.k.to_string(),
        opt(r.silhouette),
        opt(status),
        opt(e.map(|e| e.objective)),
        r.heuristic.objective.to_string(),
        opt(r.gap_abs),
        opt(r.gap_rel),
        opt(r.sites_agree),
        opt(r.jaccard),
        opt(e.map(|e| e.fairness.beta)),
        r.heuristic.fairness.beta.to_string(),
        opt(e.map(|e| e.fairness.fill.spread)),
        r.heuristic.fairness.fill.spread.to_string(),
        opt(e.map(|e| e.fairness.distance.spread)),
        r.heuristic.fairness.distance.spread.to_string(),
        r.space_reduced.clone(),
    ]
}

/// Writes the versioned CSV: a comment line, the column header, then one
/// row per report. Timing columns are appended only when any report has
/// them.
pub fn write_csv<W: Write>(mut out: W, reports: &[ComparisonReport]) -> Result<()> {
    let timed = reports
        .iter()
        .any(|r| r.exact_wall_s.is_some() || r.heuristic_wall_s.is_some());
    writeln!(out, "{CSV_HEADER_COMMENT}").map_err(|e| Error::io("<csv>", e))?;
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = CSV_COLUMNS.to_vec();
    if timed {
        header.extend(["exact_wall_s", "heuristic_wall_s"]);
    }
    w.write_record(&header)?;
    for r in reports {
        let mut row = csv_row(r);
        if timed {
            row.push(opt(r.exact_wall_s));
            row.push(opt(r.heuristic_wall_s));
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn to_json(report: &ComparisonReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes") + "\n"
}

/// Writes `contents` to `path`, creating parent directories.
pub fn write_file(path: impl AsRef<Path>, contents: &[u8]) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}
