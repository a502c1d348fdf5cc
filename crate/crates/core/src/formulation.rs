//! Solutions of the full site-selection / dose-allocation model, their
//! feasibility check and objective.
//!
//! The objective of a feasible solution is
//!
//! ```text
//! beta - sum_j d_j / m - theta * sum_j (beta_hat - beta_j) / m - alpha * sum_j (d_hat - d_j) / m
//! ```
//!
//! where `beta` is the overall fill-rate, `beta_j` the fill-rate of zone `j`,
//! `d_j` the standardized distance from zone `j` to its site and the hatted
//! quantities are the maxima over zones.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::instance::{DistanceMatrix, Instance};

/// Absolute tolerance for objective and budget comparisons.
pub const TOLERANCE: f64 = 1e-9;

/// Site openings, zone assignments and doses (`doses[site][zone]`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub open: Vec<bool>,
    pub assignment: Vec<Option<usize>>,
    pub doses: Vec<Vec<u64>>,
}

impl Solution {
    /// Builds a solution where each zone's doses come from its assigned site.
    pub fn from_zone_doses(open: Vec<bool>, assignment: &[usize], zone_doses: &[u64]) -> Self {
        let n = open.len();
        let m = assignment.len();
        let mut doses = vec![vec![0; m]; n];
        for (j, (&site, &amount)) in assignment.iter().zip(zone_doses).enumerate() {
            doses[site][j] = amount;
        }
        Solution {
            open,
            assignment: assignment.iter().map(|&i| Some(i)).collect(),
            doses,
        }
    }

    pub fn num_open(&self) -> usize {
        self.open.iter().filter(|&&o| o).count()
    }

    pub fn open_sites(&self) -> Vec<usize> {
        (0..self.open.len()).filter(|&i| self.open[i]).collect()
    }

    /// Doses received by each zone, summed over sites.
    pub fn zone_doses(&self) -> Vec<u64> {
        let m = self.assignment.len();
        (0..m).map(|j| self.doses.iter().map(|row| row[j]).sum()).collect()
    }

    pub fn total_doses(&self) -> u64 {
        self.doses.iter().flatten().sum()
    }

    /// Fixed cost of open sites plus unit costs of administered doses.
    pub fn total_cost(&self, instance: &Instance) -> f64 {
        instance
            .sites
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let fixed = if self.open[i] { s.fixed_cost } else { 0.0 };
                fixed + s.unit_cost * self.doses[i].iter().sum::<u64>() as f64
            })
            .sum()
    }

    fn check_dimensions(&self, instance: &Instance) -> Result<()> {
        let (n, m) = (instance.num_sites(), instance.num_zones());
        if self.open.len() != n
            || self.doses.len() != n
            || self.assignment.len() != m
            || self.doses.iter().any(|row| row.len() != m)
        {
            return Err(Error::Dimension(format!("expected {n} sites and {m} zones")));
        }
        if let Some(bad) = self.assignment.iter().flatten().find(|&&i| i >= n) {
            return Err(Error::Dimension(format!("assignment to unknown site index {bad}")));
        }
        Ok(())
    }

    pub fn to_file(&self, instance: &Instance) -> SolutionFile {
        SolutionFile {
            open_sites: self.open_sites().iter().map(|&i| instance.sites[i].id).collect(),
            assignment: Assignment(
                self.assignment
                    .iter()
                    .enumerate()
                    .filter_map(|(j, a)| a.map(|i| (instance.zones[j].id, instance.sites[i].id)))
                    .collect(),
            ),
            doses: self
                .doses
                .iter()
                .enumerate()
                .flat_map(|(i, row)| {
                    row.iter()
                        .enumerate()
                        .filter(|(_, &a)| a > 0)
                        .map(move |(j, &amount)| DoseEntry {
                            site: instance.sites[i].id,
                            zone: instance.zones[j].id,
                            amount,
                        })
                })
                .collect(),
            metrics: None,
        }
    }
}

/// Zone id to site id map, serialized as a JSON object keyed by zone id in
/// ascending order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment(pub Vec<(usize, usize)>);

impl Serialize for Assignment {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (zone, site) in &self.0 {
            map.serialize_entry(&zone.to_string(), site)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Assignment {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct AssignmentVisitor;

        impl<'de> Visitor<'de> for AssignmentVisitor {
            type Value = Assignment;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from zone id to site id")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> std::result::Result<Assignment, A::Error> {
                let mut pairs = BTreeMap::new();
                while let Some((key, site)) = access.next_entry::<String, usize>()? {
                    let zone = key
                        .parse::<usize>()
                        .map_err(|_| serde::de::Error::custom(format!("bad zone id {key:?}")))?;
                    pairs.insert(zone, site);
                }
                Ok(Assignment(pairs.into_iter().collect()))
            }
        }

        deserializer.deserialize_map(AssignmentVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoseEntry {
    pub site: usize,
    pub zone: usize,
    pub amount: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub beta: f64,
    pub beta_j: Vec<f64>,
    pub beta_hat: f64,
    pub d_j: Vec<f64>,
    pub d_hat: f64,
    pub objective: f64,
}

/// On-disk form of a [`Solution`], with ids instead of positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub open_sites: Vec<usize>,
    pub assignment: Assignment,
    pub doses: Vec<DoseEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Metrics>,
}

impl SolutionFile {
    pub fn to_solution(&self, instance: &Instance) -> Result<Solution> {
        let (n, m) = (instance.num_sites(), instance.num_zones());
        let site = |id: usize| {
            instance
                .site_position(id)
                .ok_or_else(|| Error::Dimension(format!("unknown site id {id}")))
        };
        let zone = |id: usize| {
            instance
                .zone_position(id)
                .ok_or_else(|| Error::Dimension(format!("unknown zone id {id}")))
        };
        let mut open = vec![false; n];
        for &id in &self.open_sites {
            open[site(id)?] = true;
        }
        let mut assignment = vec![None; m];
        for &(z, s) in &self.assignment.0 {
            assignment[zone(z)?] = Some(site(s)?);
        }
        let mut doses = vec![vec![0; m]; n];
        for d in &self.doses {
            doses[site(d.site)?][zone(d.zone)?] += d.amount;
        }
        Ok(Solution {
            open,
            assignment,
            doses,
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|source| Error::Parse {
            what: "solution".into(),
            source,
        })
    }
}

/// Which model constraint a [`Violation`] refers to. Indices are positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "constraint", rename_all = "snake_case")]
pub enum ConstraintKind {
    SupplyLimit,
    Budget,
    SiteCapacity { site: usize },
    DoseRequiresAssignment { site: usize, zone: usize },
    AssignedSiteClosed { site: usize, zone: usize },
    SingleAssignment { zone: usize },
    DemandCap { zone: usize },
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintKind::SupplyLimit => write!(f, "total doses exceed supply"),
            ConstraintKind::Budget => write!(f, "total cost exceeds budget"),
            ConstraintKind::SiteCapacity { site } => write!(f, "site {site} over capacity"),
            ConstraintKind::DoseRequiresAssignment { site, zone } => {
                write!(f, "doses from site {site} to unassigned zone {zone}")
            }
            ConstraintKind::AssignedSiteClosed { site, zone } => {
                write!(f, "zone {zone} assigned to closed site {site}")
            }
            ConstraintKind::SingleAssignment { zone } => {
                write!(f, "zone {zone} not assigned to exactly one site")
            }
            ConstraintKind::DemandCap { zone } => write!(f, "zone {zone} receives more than its demand"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    #[serde(flatten)]
    pub kind: ConstraintKind,
    /// How far the left-hand side exceeds its bound.
    pub excess: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
    pub doses_used: u64,
    pub budget_used: f64,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "feasible");
        }
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| format!("{} (by {})", v.kind, v.excess))
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Checks every model constraint and reports all violations.
///
/// Zones may not receive more than their demand; this follows from the
/// fill-rate bound of one.
pub fn check_feasibility(instance: &Instance, _dm: &DistanceMatrix, sol: &Solution) -> Result<FeasibilityReport> {
    sol.check_dimensions(instance)?;
    let (n, m) = (instance.num_sites(), instance.num_zones());
    let mut violations = Vec::new();
    let supply = instance.supply();

    let doses_used = sol.total_doses();
    if doses_used > supply {
        violations.push(Violation {
            kind: ConstraintKind::SupplyLimit,
            excess: (doses_used - supply) as f64,
        });
    }

    let budget_used = sol.total_cost(instance);
    if budget_used > instance.budget + TOLERANCE {
        violations.push(Violation {
            kind: ConstraintKind::Budget,
            excess: budget_used - instance.budget,
        });
    }

    for i in 0..n {
        let load: u64 = sol.doses[i].iter().sum();
        let cap = instance.capacity(i);
        if load > cap {
            violations.push(Violation {
                kind: ConstraintKind::SiteCapacity { site: i },
                excess: (load - cap) as f64,
            });
        }
    }

    for i in 0..n {
        for j in 0..m {
            let linked = if sol.assignment[j] == Some(i) { supply } else { 0 };
            if sol.doses[i][j] > linked {
                violations.push(Violation {
                    kind: ConstraintKind::DoseRequiresAssignment { site: i, zone: j },
                    excess: (sol.doses[i][j] - linked) as f64,
                });
            }
        }
    }

    for (j, a) in sol.assignment.iter().enumerate() {
        if let Some(i) = *a {
            if !sol.open[i] {
                violations.push(Violation {
                    kind: ConstraintKind::AssignedSiteClosed { site: i, zone: j },
                    excess: 1.0,
                });
            }
        }
    }

    for (j, a) in sol.assignment.iter().enumerate() {
        if a.is_none() {
            violations.push(Violation {
                kind: ConstraintKind::SingleAssignment { zone: j },
                excess: 1.0,
            });
        }
    }

    for (j, got) in sol.zone_doses().into_iter().enumerate() {
        let demand = instance.demand(j);
        if got > demand {
            violations.push(Violation {
                kind: ConstraintKind::DemandCap { zone: j },
                excess: (got - demand) as f64,
            });
        }
    }

    Ok(FeasibilityReport {
        violations,
        doses_used,
        budget_used,
    })
}

/// A feasible solution with its derived fill-rates, distances and objective.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatedSolution {
    pub solution: Solution,
    pub beta_j: Vec<f64>,
    pub beta: f64,
    pub beta_hat: f64,
    pub d_j: Vec<f64>,
    pub d_hat: f64,
    pub objective: f64,
    pub total_cost: f64,
}

impl EvaluatedSolution {
    pub fn metrics(&self) -> Metrics {
        Metrics {
            beta: self.beta,
            beta_j: self.beta_j.clone(),
            beta_hat: self.beta_hat,
            d_j: self.d_j.clone(),
            d_hat: self.d_hat,
            objective: self.objective,
        }
    }

    pub fn to_file(&self, instance: &Instance) -> SolutionFile {
        SolutionFile {
            metrics: Some(self.metrics()),
            ..self.solution.to_file(instance)
        }
    }
}

/// Fill-rate of a zone; zones without demand count as fully served.
pub(crate) fn fill_rate(doses: u64, demand: u64) -> f64 {
    if demand == 0 {
        1.0
    } else {
        doses as f64 / demand as f64
    }
}

/// Objective for given per-zone values and auxiliary maxima.
pub(crate) fn objective_terms(
    theta: f64,
    alpha: f64,
    beta: f64,
    beta_j: &[f64],
    beta_hat: f64,
    d_j: &[f64],
    d_hat: f64,
) -> f64 {
    let m = beta_j.len() as f64;
    let dist: f64 = d_j.iter().sum::<f64>() / m;
    let equity: f64 = beta_j.iter().map(|b| theta * (beta_hat - b)).sum::<f64>() / m;
    let access: f64 = d_j.iter().map(|d| alpha * (d_hat - d)).sum::<f64>() / m;
    beta - dist - equity - access
}

fn derived(instance: &Instance, dm: &DistanceMatrix, sol: &Solution) -> (Vec<f64>, f64, Vec<f64>) {
    let zone_doses = sol.zone_doses();
    let beta_j: Vec<f64> = zone_doses
        .iter()
        .enumerate()
        .map(|(j, &y)| fill_rate(y, instance.demand(j)))
        .collect();
    let beta = zone_doses.iter().sum::<u64>() as f64 / instance.total_demand() as f64;
    let d_j: Vec<f64> = sol
        .assignment
        .iter()
        .enumerate()
        .map(|(j, a)| a.map_or(0.0, |i| dm.standardized(i, j)))
        .collect();
    (beta_j, beta, d_j)
}

fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(0.0, f64::max)
}

/// Evaluates a feasible solution under the full objective, fixing the
/// maximum fill-rate and distance at their tight values.
pub fn evaluate(instance: &Instance, dm: &DistanceMatrix, sol: &Solution) -> Result<EvaluatedSolution> {
    let report = check_feasibility(instance, dm, sol)?;
    if !report.is_feasible() {
        return Err(Error::InfeasibleSolution(report));
    }
    let (beta_j, beta, d_j) = derived(instance, dm, sol);
    let beta_hat = max_of(&beta_j);
    let d_hat = max_of(&d_j);
    let objective = objective_terms(instance.theta, instance.alpha, beta, &beta_j, beta_hat, &d_j, d_hat);
    Ok(EvaluatedSolution {
        solution: sol.clone(),
        beta_j,
        beta,
        beta_hat,
        d_j,
        d_hat,
        objective,
        total_cost: report.budget_used,
    })
}

/// Objective with caller-chosen auxiliary maxima. They must satisfy
/// `max_j beta_j <= beta_hat <= 1` and `max_j d_j <= d_hat <= 1`.
pub fn objective_with_aux(
    instance: &Instance,
    dm: &DistanceMatrix,
    sol: &Solution,
    beta_hat: f64,
    d_hat: f64,
) -> Result<f64> {
    let ev = evaluate(instance, dm, sol)?;
    if beta_hat < ev.beta_hat - TOLERANCE || beta_hat > 1.0 + TOLERANCE {
        return Err(Error::InvalidArgument(format!(
            "beta_hat {beta_hat} outside [{}, 1]",
            ev.beta_hat
        )));
    }
    if d_hat < ev.d_hat - TOLERANCE || d_hat > 1.0 + TOLERANCE {
        return Err(Error::InvalidArgument(format!(
            "d_hat {d_hat} outside [{}, 1]",
            ev.d_hat
        )));
    }
    Ok(objective_terms(
        instance.theta,
        instance.alpha,
        ev.beta,
        &ev.beta_j,
        beta_hat,
        &ev.d_j,
        d_hat,
    ))
}

fn cmp_tol(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= TOLERANCE {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

/// Total preference order between evaluated solutions; `Greater` means `a`
/// is preferred.
///
/// Higher objective wins; ties go to fewer open sites, then lower total
/// cost, then the lexicographically smallest list of open site indices,
/// then the smallest assignment vector, and finally the dose vector that
/// fills lower-indexed zones first.
pub fn preference(a: &EvaluatedSolution, b: &EvaluatedSolution) -> Ordering {
    cmp_tol(a.objective, b.objective)
        .then_with(|| b.solution.num_open().cmp(&a.solution.num_open()))
        .then_with(|| cmp_tol(b.total_cost, a.total_cost))
        .then_with(|| b.solution.open_sites().cmp(&a.solution.open_sites()))
        .then_with(|| b.solution.assignment.cmp(&a.solution.assignment))
        .then_with(|| a.solution.zone_doses().cmp(&b.solution.zone_doses()))
}

/// Number of zone-to-site assignment choices, `(2n)^m`.
pub fn search_space_size(n: usize, m: usize) -> BigUint {
    BigUint::from(2 * n as u64).pow(m as u32)
}

/// `(2n)^m` rendered as `"base^exp"`.
pub fn search_space_label(n: usize, m: usize) -> String {
    format!("{}^{}", 2 * n, m)
}
