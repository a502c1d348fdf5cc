//! Cluster-level dose allocation and the full clustering heuristic.
//!
//! Every cluster is served by its chosen site, which is always open. Zones
//! keep their own demand inside the cluster. The model maximizes
//! `sum_j beta_j - theta * sum_j (beta - beta_j)` over member zones, with
//! `beta` the largest fill-rate.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_solver::inner::{AllocationProblem, Group};
use crate::fair_kmeans::{
    instance_points, select_cluster_sites, select_k, silhouette_score, weighted_lloyd, ClusterSiteSelection, Clustering,
};
use crate::formulation::{
    check_feasibility, evaluate, fill_rate, search_space_label, EvaluatedSolution, Solution, TOLERANCE,
};
use crate::instance::{compute_distances, Instance};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedCluster {
    /// Position of the serving site in the instance.
    pub site: usize,
    pub capacity: u64,
    pub fixed_cost: f64,
    pub unit_cost: f64,
    /// Member zone positions, ascending.
    pub zones: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedInstance {
    pub clusters: Vec<ReducedCluster>,
    pub supply: u64,
    pub budget: f64,
    pub theta: f64,
    /// Cluster of each zone.
    pub membership: Vec<usize>,
    /// Demand of each zone.
    pub demands: Vec<u64>,
}

impl ReducedInstance {
    pub fn new(instance: &Instance, clustering: &Clustering, selection: &ClusterSiteSelection) -> Result<Self> {
        if clustering.zone_membership.len() != instance.num_zones() || selection.sites.len() != clustering.k {
            return Err(Error::Dimension(
                "clustering and site selection do not match the instance".into(),
            ));
        }
        let clusters = (0..clustering.k)
            .map(|k| ReducedCluster {
                site: selection.sites[k],
                capacity: selection.capacity[k],
                fixed_cost: selection.fixed_cost[k],
                unit_cost: selection.unit_cost[k],
                zones: (0..instance.num_zones())
                    .filter(|&j| clustering.zone_membership[j] == k)
                    .collect(),
            })
            .collect();
        Ok(ReducedInstance {
            clusters,
            supply: instance.supply(),
            budget: instance.budget,
            theta: instance.theta,
            membership: clustering.zone_membership.clone(),
            demands: (0..instance.num_zones()).map(|j| instance.demand(j)).collect(),
        })
    }

    pub fn fixed_cost(&self) -> f64 {
        self.clusters.iter().map(|c| c.fixed_cost).sum()
    }

    fn problem(&self) -> AllocationProblem {
        let m = self.demands.len() as f64;
        let theta = self.theta;
        let zeros = self.demands.iter().filter(|&&d| d == 0).count() as f64;
        AllocationProblem {
            weights: self
                .demands
                .iter()
                .map(|&d| if d == 0 { 0.0 } else { (1.0 + theta) / d as f64 })
                .collect(),
            constant: (1.0 + theta) * zeros,
            penalty: theta * m,
            demands: self.demands.clone(),
            groups: self
                .clusters
                .iter()
                .map(|c| Group {
                    capacity: c.capacity,
                    unit_cost: c.unit_cost,
                    zones: c.zones.clone(),
                })
                .collect(),
            supply: self.supply,
            budget: self.budget - self.fixed_cost(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedSolution {
    /// Doses per zone, delivered by the zone's cluster site.
    pub y: Vec<u64>,
    pub beta_jk: Vec<f64>,
    pub beta_max: f64,
    pub objective: f64,
    /// Fixed plus variable cost.
    pub cost: f64,
}

/// Exact optimum of the cluster-level model.
pub fn solve_reduced(ri: &ReducedInstance) -> Result<ReducedSolution> {
    let fixed = ri.fixed_cost();
    if fixed > ri.budget + TOLERANCE {
        return Err(Error::ReducedInfeasible(format!(
            "cluster sites cost {fixed} in fixed costs but the budget is {}",
            ri.budget
        )));
    }
    let problem = ri.problem();
    let alloc = problem
        .solve()
        .ok_or_else(|| Error::ReducedInfeasible("no budget left for doses".into()))?;
    let beta_jk: Vec<f64> = alloc
        .doses
        .iter()
        .zip(&ri.demands)
        .map(|(&y, &d)| fill_rate(y, d))
        .collect();
    Ok(ReducedSolution {
        beta_max: beta_jk.iter().copied().fold(0.0, f64::max),
        beta_jk,
        objective: alloc.value,
        cost: fixed + alloc.cost,
        y: alloc.doses,
    })
}

/// Maps a cluster solution back to sites and zones, checked against the
/// full model.
pub fn lift(instance: &Instance, ri: &ReducedInstance, rs: &ReducedSolution) -> Result<Solution> {
    if rs.y.len() != instance.num_zones() || ri.membership.len() != instance.num_zones() {
        return Err(Error::Dimension("reduced solution does not match the instance".into()));
    }
    let mut open = vec![false; instance.num_sites()];
    for c in &ri.clusters {
        open[c.site] = true;
    }
    let assignment: Vec<usize> = ri.membership.iter().map(|&k| ri.clusters[k].site).collect();
    let sol = Solution::from_zone_doses(open, &assignment, &rs.y);
    let report = check_feasibility(instance, &compute_distances(instance), &sol)?;
    if !report.is_feasible() {
        return Err(Error::InfeasibleSolution(report));
    }
    Ok(sol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicConfig {
    pub seed: u64,
    pub k_min: usize,
    pub k_max: usize,
    /// On a fixed-cost overrun, re-cluster with one cluster fewer.
    pub retry_smaller_k: bool,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig {
            seed: 1,
            k_min: 2,
            k_max: 10,
            retry_smaller_k: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeuristicDiagnostics {
    pub k: usize,
    pub silhouette: Option<f64>,
    pub space_full: String,
    pub space_reduced: String,
    pub objective_full_model: f64,
    pub objective_reduced: f64,
    /// Chosen site id per cluster.
    pub chosen_sites: Vec<usize>,
    pub cluster_demand: Vec<u64>,
    pub retries: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicResult {
    pub evaluated: EvaluatedSolution,
    pub clustering: Clustering,
    pub selection: ClusterSiteSelection,
    pub reduced: ReducedSolution,
    pub diagnostics: HeuristicDiagnostics,
    pub wall_time: Duration,
}

/// Clusters, picks one site per cluster, solves the cluster model and
/// evaluates the lifted solution under the full model.
pub fn heuristic_solve(instance: &Instance, cfg: &HeuristicConfig) -> Result<HeuristicResult> {
    let start = Instant::now();
    instance.ensure_valid()?;
    if cfg.k_min > cfg.k_max {
        return Err(Error::InvalidArgument(format!(
            "k range {}..={} is empty",
            cfg.k_min, cfg.k_max
        )));
    }
    let points = instance_points(instance);
    let mut clustering = select_k(&points, cfg.k_min..=cfg.k_max, instance.num_sites(), cfg.seed)?;
    let mut retries = 0;
    let (selection, ri, reduced) = loop {
        let selection = select_cluster_sites(instance, &clustering)?;
        let ri = ReducedInstance::new(instance, &clustering, &selection)?;
        match solve_reduced(&ri) {
            Ok(rs) => break (selection, ri, rs),
            Err(Error::ReducedInfeasible(_)) if cfg.retry_smaller_k && clustering.k > 1 => {
                retries += 1;
                let k = clustering.k - 1;
                clustering = weighted_lloyd(&points, k, cfg.seed)?;
                if k >= 2 {
                    clustering.silhouette = Some(silhouette_score(&points, &clustering)?);
                }
            }
            Err(e) => return Err(e),
        }
    };
    let solution = lift(instance, &ri, &reduced)?;
    let evaluated = evaluate(instance, &compute_distances(instance), &solution)?;
    let n = instance.num_sites();
    let wall_time = start.elapsed();
    let diagnostics = HeuristicDiagnostics {
        k: clustering.k,
        silhouette: clustering.silhouette,
        space_full: search_space_label(n, instance.num_zones()),
        space_reduced: search_space_label(n, clustering.k),
        objective_full_model: evaluated.objective,
        objective_reduced: reduced.objective,
        chosen_sites: selection.sites.iter().map(|&i| instance.sites[i].id).collect(),
        cluster_demand: selection.demand.clone(),
        retries,
        wall_time_s: Some(wall_time.as_secs_f64()),
    };
    Ok(HeuristicResult {
        evaluated,
        clustering,
        selection,
        reduced,
        diagnostics,
        wall_time,
    })
}
