//! The clustering heuristic on the 34-zone, 10-site instance that is far
//! beyond exact enumeration.

use fairvax::harness::fairness_metrics;
use fairvax::instance::{generate_clustered, GeneratorConfig};
use fairvax::reduced_alloc::{heuristic_solve, HeuristicConfig};

fn main() -> fairvax::Result<()> {
    let inst = generate_clustered(&GeneratorConfig::default())?;
    let result = heuristic_solve(&inst, &HeuristicConfig::default())?;
    let d = &result.diagnostics;
    println!("clusters {}  silhouette {:.4}", d.k, d.silhouette.unwrap_or(f64::NAN));
    println!("search space {} reduced to {}", d.space_full, d.space_reduced);
    println!(
        "chosen sites {:?}, cluster demand {:?}",
        d.chosen_sites, d.cluster_demand
    );
    println!("cluster model objective {:.4}", d.objective_reduced);
    println!("full model objective    {:.4}", d.objective_full_model);

    let m = fairness_metrics(&inst, &result.evaluated);
    println!(
        "fill-rate {:.3}, zone fill {:.3}..{:.3} (sd {:.4}), distance {:.3}..{:.3}",
        m.beta, m.fill.min, m.fill.max, m.fill.stdev, m.distance.min, m.distance.max
    );
    println!("{}", serde_json::to_string_pretty(d).unwrap());
    Ok(())
}
