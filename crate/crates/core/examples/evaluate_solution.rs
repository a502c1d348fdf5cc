//! Builds solutions by hand for a two-zone instance, checks feasibility
//! and shows how the objective terms react.

use fairvax::formulation::{check_feasibility, evaluate, Solution};
use fairvax::instance::{compute_distances, Instance};

const INSTANCE: &str = r#"{
  "supply": 20, "budget": 40, "theta": 1, "alpha": 1,
  "zones": [
    {"id": 1, "x": 0, "y": 0, "demand": 10},
    {"id": 2, "x": 10, "y": 0, "demand": 10}
  ],
  "sites": [
    {"id": 1, "x": 0, "y": 1, "capacity": 15, "fixed_cost": 5, "unit_cost": 1},
    {"id": 2, "x": 10, "y": 1, "capacity": 15, "fixed_cost": 5, "unit_cost": 1}
  ]
}"#;

fn main() -> fairvax::Result<()> {
    let inst = Instance::from_json_str(INSTANCE)?;
    let dm = compute_distances(&inst);

    let candidates = [
        (
            "both sites, full demand",
            Solution::from_zone_doses(vec![true, true], &[0, 1], &[10, 10]),
        ),
        (
            "both sites, unequal doses",
            Solution::from_zone_doses(vec![true, true], &[0, 1], &[10, 5]),
        ),
        (
            "one site serves both",
            Solution::from_zone_doses(vec![true, false], &[0, 0], &[8, 7]),
        ),
        (
            "over capacity",
            Solution::from_zone_doses(vec![true, false], &[0, 0], &[10, 10]),
        ),
    ];
    for (label, sol) in &candidates {
        println!("{label}");
        let report = check_feasibility(&inst, &dm, sol)?;
        if !report.is_feasible() {
            for v in &report.violations {
                println!("  violated: {:?} by {}", v.kind, v.excess);
            }
            continue;
        }
        let ev = evaluate(&inst, &dm, sol)?;
        println!(
            "  beta {:.3}  beta_j {:?}  d_j {:?}  cost {:.1}  objective {:.4}",
            ev.beta, ev.beta_j, ev.d_j, ev.total_cost, ev.objective
        );
    }
    Ok(())
}
