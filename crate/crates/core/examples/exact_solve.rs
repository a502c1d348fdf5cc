//! Exact optimum of a small generated instance, cross-checked against
//! exhaustive enumeration.

use fairvax::exact_solver::{brute_force_oracle, solve_exact, SolveConfig};
use fairvax::instance::{compute_distances, generate_clustered, GeneratorConfig};

fn main() -> fairvax::Result<()> {
    let inst = generate_clustered(&GeneratorConfig {
        seed: 3,
        num_clusters: 2,
        zones_per_cluster: vec![3],
        sites: 4,
        ..GeneratorConfig::default()
    })?;
    let dm = compute_distances(&inst);
    let result = solve_exact(&inst, &dm, &SolveConfig::from_env()?)?;
    println!(
        "status {:?}, {} nodes in {:?}",
        result.status, result.nodes_explored, result.wall_time
    );
    let best = result.best.expect("generated instances are feasible");
    println!(
        "open sites {:?}",
        best.solution
            .open_sites()
            .iter()
            .map(|&i| inst.sites[i].id)
            .collect::<Vec<_>>()
    );
    for (j, z) in inst.zones.iter().enumerate() {
        let site = best.solution.assignment[j].map(|i| inst.sites[i].id);
        println!(
            "  zone {} (D={:>2}) -> site {:?}: {:>2} doses, fill {:.3}",
            z.id,
            z.demand,
            site.unwrap(),
            best.solution.zone_doses()[j],
            best.beta_j[j]
        );
    }
    println!("objective {:.6}", best.objective);

    // a tiny variant is small enough for exhaustive enumeration
    let mut tiny = inst.clone();
    tiny.zones.truncate(3);
    for z in &mut tiny.zones {
        z.demand = z.demand.min(5);
    }
    tiny.supply = 9;
    tiny.sites.truncate(2);
    let dm = compute_distances(&tiny);
    let exact = solve_exact(&tiny, &dm, &SolveConfig::default())?
        .best
        .map(|b| b.objective);
    let oracle = brute_force_oracle(&tiny, &dm)?.best.map(|b| b.objective);
    println!("3-zone variant: exact {exact:?}, enumeration {oracle:?}");
    Ok(())
}
