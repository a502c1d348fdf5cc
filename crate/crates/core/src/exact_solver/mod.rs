//! Exact optimizer for the full model at desk scale.
//!
//! The outer search enumerates open-site subsets and, depth-first, zone
//! assignments to open sites. Each complete assignment gets the exact inner
//! allocation from [`inner`]. Two bounds prune the search. The allocation
//! part of the objective is bounded by a pooled relaxation for the subset.
//! The distance part is bounded from the partial assignment. Solutions that
//! leave an open site unused are skipped, since closing that site is never
//! worse and is preferred on ties.

pub(crate) mod inner;
mod oracle;

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formulation::{evaluate, preference, EvaluatedSolution, Solution, TOLERANCE};
use crate::instance::{DistanceMatrix, Instance};
use inner::{AllocationProblem, Group};

pub use oracle::brute_force_oracle;

/// Environment variable overriding [`SolveConfig::time_limit`], in seconds.
pub const TIME_LIMIT_ENV: &str = "FAIRVAX_TIME_LIMIT";

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub max_zones_exact: usize,
    pub max_sites_exact: usize,
    pub time_limit: Duration,
    pub tolerance: f64,
    /// Disable to enumerate every subset and assignment (testing aid).
    pub pruning: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            max_zones_exact: 10,
            max_sites_exact: 6,
            time_limit: Duration::from_secs(60),
            tolerance: TOLERANCE,
            pruning: true,
        }
    }
}

impl SolveConfig {
    /// Default configuration with the time limit taken from
    /// `FAIRVAX_TIME_LIMIT` when set.
    pub fn from_env() -> Result<Self> {
        let mut cfg = SolveConfig::default();
        if let Ok(text) = std::env::var(TIME_LIMIT_ENV) {
            let secs: f64 = text.trim().parse().map_err(|_| {
                Error::InvalidArgument(format!("{TIME_LIMIT_ENV} must be a number of seconds, got {text:?}"))
            })?;
            if !(secs > 0.0 && secs.is_finite()) {
                return Err(Error::InvalidArgument(format!("{TIME_LIMIT_ENV} must be positive")));
            }
            cfg.time_limit = Duration::from_secs_f64(secs);
        }
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        if self.max_zones_exact == 0 || self.max_sites_exact == 0 {
            return Err(Error::InvalidArgument("solver caps must be at least 1".into()));
        }
        if self.time_limit.is_zero() {
            return Err(Error::InvalidArgument("time limit must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    TimeLimit,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    /// Absent only when infeasible, or when the time limit hit before any
    /// solution was found.
    pub best: Option<EvaluatedSolution>,
    pub status: SolveStatus,
    pub nodes_explored: u64,
    pub wall_time: Duration,
}

/// Optimal doses for a fixed assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerAllocation {
    pub zone_doses: Vec<u64>,
    /// `beta + theta/m * sum_j beta_j - theta * max_j beta_j`.
    pub objective_contribution: f64,
    pub variable_cost: f64,
}

/// Allocation problem of the full model for the given site groups.
pub(crate) fn full_model_problem(instance: &Instance, groups: Vec<Group>, remaining_budget: f64) -> AllocationProblem {
    let m = instance.num_zones() as f64;
    let total = instance.total_demand() as f64;
    let theta = instance.theta;
    let demands: Vec<u64> = (0..instance.num_zones()).map(|j| instance.demand(j)).collect();
    let zeros = demands.iter().filter(|&&d| d == 0).count() as f64;
    AllocationProblem {
        weights: demands
            .iter()
            .map(|&d| {
                if d == 0 {
                    0.0
                } else {
                    1.0 / total + theta / (m * d as f64)
                }
            })
            .collect(),
        constant: theta * zeros / m,
        penalty: theta,
        demands,
        groups,
        supply: instance.supply(),
        budget: remaining_budget,
    }
}

fn groups_for(instance: &Instance, open: &[usize], assignment: &[usize]) -> Vec<Group> {
    open.iter()
        .filter_map(|&i| {
            let zones: Vec<usize> = (0..assignment.len()).filter(|&j| assignment[j] == i).collect();
            (!zones.is_empty()).then(|| Group {
                capacity: instance.capacity(i),
                unit_cost: instance.sites[i].unit_cost,
                zones,
            })
        })
        .collect()
}

/// Best integer doses for fixed open sites and assignment.
///
/// `remaining_budget` is the budget left after fixed costs. The
/// distance terms are constant here and are not included.
pub fn solve_inner_allocation(
    instance: &Instance,
    open: &[bool],
    assignment: &[usize],
    remaining_budget: f64,
) -> Result<InnerAllocation> {
    if open.len() != instance.num_sites() || assignment.len() != instance.num_zones() {
        return Err(Error::Dimension("open set or assignment has the wrong length".into()));
    }
    if let Some(j) = (0..assignment.len()).find(|&j| !open.get(assignment[j]).copied().unwrap_or(false)) {
        return Err(Error::InvalidArgument(format!(
            "zone {} assigned to a closed site",
            instance.zones[j].id
        )));
    }
    let open_list: Vec<usize> = (0..open.len()).filter(|&i| open[i]).collect();
    let problem = full_model_problem(instance, groups_for(instance, &open_list, assignment), remaining_budget);
    let alloc = problem
        .solve()
        .ok_or_else(|| Error::InvalidArgument("remaining budget is negative".into()))?;
    Ok(InnerAllocation {
        zone_doses: alloc.doses,
        objective_contribution: alloc.value,
        variable_cost: alloc.cost,
    })
}

struct Search<'a> {
    instance: &'a Instance,
    dm: &'a DistanceMatrix,
    cfg: &'a SolveConfig,
    start: Instant,
    best: Option<EvaluatedSolution>,
    nodes: u64,
    timed_out: bool,
}

/// Per-subset data for the depth-first assignment search.
struct SubsetContext {
    mask_open: Vec<bool>,
    open: Vec<usize>,
    remaining: f64,
    allocation_bound: f64,
    /// Open sites per zone, nearest first.
    choices: Vec<Vec<usize>>,
    suffix_min_sum: Vec<f64>,
    suffix_max_sum: Vec<f64>,
    suffix_min_max: Vec<f64>,
}

impl<'a> Search<'a> {
    fn subset_context(&self, mask: u64) -> SubsetContext {
        let (n, m) = (self.instance.num_sites(), self.instance.num_zones());
        let mask_open: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        let open: Vec<usize> = (0..n).filter(|&i| mask_open[i]).collect();
        let fixed: f64 = open.iter().map(|&i| self.instance.sites[i].fixed_cost).sum();
        let remaining = self.instance.budget - fixed;

        let allocation_bound = if self.cfg.pruning && remaining >= -TOLERANCE {
            let pooled = Group {
                capacity: open.iter().map(|&i| self.instance.capacity(i)).sum(),
                unit_cost: open
                    .iter()
                    .map(|&i| self.instance.sites[i].unit_cost)
                    .fold(f64::INFINITY, f64::min),
                zones: (0..m).collect(),
            };
            full_model_problem(self.instance, vec![pooled], remaining)
                .solve()
                .map_or(f64::INFINITY, |a| a.value)
        } else {
            f64::INFINITY
        };

        let choices: Vec<Vec<usize>> = (0..m)
            .map(|j| {
                let mut c = open.clone();
                c.sort_by(|&a, &b| {
                    self.dm
                        .standardized(a, j)
                        .total_cmp(&self.dm.standardized(b, j))
                        .then(a.cmp(&b))
                });
                c
            })
            .collect();
        let mut suffix_min_sum = vec![0.0; m + 1];
        let mut suffix_max_sum = vec![0.0; m + 1];
        let mut suffix_min_max = vec![0.0f64; m + 1];
        for j in (0..m).rev() {
            let lo = self.dm.standardized(choices[j][0], j);
            let hi = self.dm.standardized(*choices[j].last().unwrap(), j);
            suffix_min_sum[j] = suffix_min_sum[j + 1] + lo;
            suffix_max_sum[j] = suffix_max_sum[j + 1] + hi;
            suffix_min_max[j] = suffix_min_max[j + 1].max(lo);
        }
        SubsetContext {
            mask_open,
            open,
            remaining,
            allocation_bound,
            choices,
            suffix_min_sum,
            suffix_max_sum,
            suffix_min_max,
        }
    }

    /// Upper bound on the distance part of the objective,
    /// `-alpha * d_hat + (alpha - 1) / m * sum_j d_j`.
    fn distance_bound(&self, ctx: &SubsetContext, depth: usize, sum: f64, max: f64) -> f64 {
        let m = self.instance.num_zones() as f64;
        let alpha = self.instance.alpha;
        let slope = (alpha - 1.0) / m;
        let d_hat = max.max(ctx.suffix_min_max[depth]);
        let rest = if slope <= 0.0 {
            ctx.suffix_min_sum[depth]
        } else {
            ctx.suffix_max_sum[depth]
        };
        -alpha * d_hat + slope * (sum + rest)
    }

    fn out_of_time(&mut self) -> bool {
        if !self.timed_out && self.nodes.is_multiple_of(256) && self.start.elapsed() > self.cfg.time_limit {
            self.timed_out = true;
        }
        self.timed_out
    }

    fn dfs(&mut self, ctx: &SubsetContext, assignment: &mut Vec<usize>, used: &mut [u32], sum: f64, max: f64) {
        self.nodes += 1;
        if self.out_of_time() {
            return;
        }
        let m = self.instance.num_zones();
        let depth = assignment.len();
        let pruning = self.cfg.pruning;

        if pruning {
            let unused = ctx.open.iter().filter(|&&i| used[i] == 0).count();
            if unused > m - depth {
                return;
            }
            if let Some(best) = &self.best {
                let bound = ctx.allocation_bound + self.distance_bound(ctx, depth, sum, max);
                if bound < best.objective - self.cfg.tolerance {
                    return;
                }
            }
        }

        if depth == m {
            self.leaf(ctx, assignment);
            return;
        }

        for &i in &ctx.choices[depth] {
            let d = self.dm.standardized(i, depth);
            assignment.push(i);
            used[i] += 1;
            self.dfs(ctx, assignment, used, sum + d, max.max(d));
            used[i] -= 1;
            assignment.pop();
            if self.timed_out {
                return;
            }
        }
    }

    fn leaf(&mut self, ctx: &SubsetContext, assignment: &[usize]) {
        let groups = groups_for(self.instance, &ctx.open, assignment);
        let Some(alloc) = full_model_problem(self.instance, groups, ctx.remaining).solve() else {
            return;
        };
        let sol = Solution::from_zone_doses(ctx.mask_open.clone(), assignment, &alloc.doses);
        let Ok(ev) = evaluate(self.instance, self.dm, &sol) else {
            return;
        };
        let replace = match &self.best {
            None => true,
            Some(b) => preference(&ev, b) == std::cmp::Ordering::Greater,
        };
        if replace {
            self.best = Some(ev);
        }
    }
}

/// Provably optimal solution of the full model, with ties broken by
/// [`preference`].
pub fn solve_exact(instance: &Instance, dm: &DistanceMatrix, cfg: &SolveConfig) -> Result<SolveResult> {
    cfg.check()?;
    instance.ensure_valid()?;
    let (n, m) = (instance.num_sites(), instance.num_zones());
    if m > cfg.max_zones_exact || n > cfg.max_sites_exact {
        return Err(Error::ExceedsCaps {
            zones: m,
            sites: n,
            max_zones: cfg.max_zones_exact,
            max_sites: cfg.max_sites_exact,
        });
    }

    let mut search = Search {
        instance,
        dm,
        cfg,
        start: Instant::now(),
        best: None,
        nodes: 0,
        timed_out: false,
    };

    let mut masks: Vec<u64> = (1..1u64 << n).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    for mask in masks {
        let ctx = search.subset_context(mask);
        if cfg.pruning && ctx.remaining < -TOLERANCE {
            continue;
        }
        let mut assignment = Vec::with_capacity(m);
        let mut used = vec![0u32; n];
        search.dfs(&ctx, &mut assignment, &mut used, 0.0, 0.0);
        if search.timed_out {
            break;
        }
    }

    let status = if search.timed_out {
        SolveStatus::TimeLimit
    } else if search.best.is_none() {
        SolveStatus::Infeasible
    } else {
        SolveStatus::Optimal
    };
    Ok(SolveResult {
        best: search.best,
        status,
        nodes_explored: search.nodes,
        wall_time: search.start.elapsed(),
    })
}

/// Number of nodes a search without any pruning visits: every non-empty
/// subset times every partial assignment to its sites.
pub fn full_enumeration_nodes(n: usize, m: usize) -> u128 {
    (1..1u64 << n)
        .map(|mask| {
            let k = mask.count_ones() as u128;
            (0..=m as u32).map(|d| k.pow(d)).sum::<u128>()
        })
        .sum()
}
