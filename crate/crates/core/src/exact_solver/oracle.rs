use std::cmp::Ordering;
use std::time::Instant;

use super::{SolveResult, SolveStatus};
use crate::error::{Error, Result};
use crate::formulation::{evaluate, preference, EvaluatedSolution, Solution};
use crate::instance::{DistanceMatrix, Instance};

const MAX_ASSIGNMENTS: u128 = 1_000_000;
const MAX_DOSE_VECTORS: u128 = 100_000;

/// Exhaustive reference solver: every open set, every assignment of zones
/// to open sites and every integer dose vector up to demand. Each candidate
/// goes through the model's feasibility check and objective.
pub fn brute_force_oracle(instance: &Instance, dm: &DistanceMatrix) -> Result<SolveResult> {
    instance.ensure_valid()?;
    let start = Instant::now();
    let (n, m) = (instance.num_sites(), instance.num_zones());
    let supply = instance.supply();
    let limits: Vec<u64> = (0..m).map(|j| instance.demand(j).min(supply)).collect();

    let assignments = (2 * n as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    let dose_vectors = limits
        .iter()
        .try_fold(1u128, |acc, &l| acc.checked_mul(l as u128 + 1))
        .unwrap_or(u128::MAX);
    if assignments > MAX_ASSIGNMENTS || dose_vectors > MAX_DOSE_VECTORS {
        return Err(Error::TooLargeForOracle(assignments.saturating_mul(dose_vectors)));
    }

    let mut best: Option<EvaluatedSolution> = None;
    let mut explored = 0u64;
    for mask in 0..1u64 << n {
        let open: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        let mut assignment = vec![0usize; m];
        loop {
            if assignment.iter().all(|&i| open[i]) {
                let mut doses = vec![0u64; m];
                loop {
                    explored += 1;
                    let sol = Solution::from_zone_doses(open.clone(), &assignment, &doses);
                    if let Ok(ev) = evaluate(instance, dm, &sol) {
                        if best.as_ref().is_none_or(|b| preference(&ev, b) == Ordering::Greater) {
                            best = Some(ev);
                        }
                    }
                    if !odometer(&mut doses, |j| limits[j]) {
                        break;
                    }
                }
            }
            if !odometer(&mut assignment, |_| n - 1) {
                break;
            }
        }
    }

    Ok(SolveResult {
        status: if best.is_some() {
            SolveStatus::Optimal
        } else {
            SolveStatus::Infeasible
        },
        best,
        nodes_explored: explored,
        wall_time: start.elapsed(),
    })
}

/// Advances a mixed-radix counter; false once it wraps around.
fn odometer<T>(digits: &mut [T], max: impl Fn(usize) -> T) -> bool
where
    T: Copy + PartialOrd + From<u8> + std::ops::AddAssign,
{
    for (k, digit) in digits.iter_mut().enumerate() {
        if *digit < max(k) {
            *digit += T::from(1);
            return true;
        }
        *digit = T::from(0);
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{compute_distances, Site, Zone};

    fn single(budget: f64) -> Instance {
        Instance {
            supply: 5,
            budget,
            theta: 1.0,
            alpha: 1.0,
            zones: vec![Zone {
                id: 1,
                x: 0.0,
                y: 0.0,
                demand: 5,
            }],
            sites: vec![Site {
                id: 1,
                x: 1.0,
                y: 0.0,
                capacity: 5,
                fixed_cost: 2.0,
                unit_cost: 1.0,
            }],
        }
    }

    #[test]
    fn saturates_single_zone() {
        let inst = single(7.0);
        let res = brute_force_oracle(&inst, &compute_distances(&inst)).unwrap();
        let best = res.best.unwrap();
        assert_eq!(best.solution.zone_doses(), vec![5]);
        assert_eq!(best.beta, 1.0);
    }

    #[test]
    fn unaffordable_is_infeasible() {
        let inst = single(1.0);
        let res = brute_force_oracle(&inst, &compute_distances(&inst)).unwrap();
        assert_eq!(res.status, SolveStatus::Infeasible);
    }

    #[test]
    fn refuses_large_instances() {
        let mut inst = single(7.0);
        for k in 2..=8 {
            inst.zones.push(Zone {
                id: k,
                x: 0.0,
                y: 0.0,
                demand: 5,
            });
        }
        assert!(matches!(
            brute_force_oracle(&inst, &compute_distances(&inst)),
            Err(Error::TooLargeForOracle(_))
        ));
    }
}
