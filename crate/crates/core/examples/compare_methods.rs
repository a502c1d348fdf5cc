//! Exact versus heuristic over a handful of seeds, written as one CSV.

use fairvax::exact_solver::SolveConfig;
use fairvax::harness::{compare, write_csv, CompareConfig};
use fairvax::instance::{generate_clustered, GeneratorConfig};

fn main() -> fairvax::Result<()> {
    let cfg = CompareConfig {
        solve: SolveConfig {
            max_zones_exact: 9,
            ..SolveConfig::from_env()?
        },
        ..CompareConfig::default()
    };
    let mut reports = Vec::new();
    for seed in 1..=6 {
        let inst = generate_clustered(&GeneratorConfig {
            seed,
            num_clusters: 3,
            zones_per_cluster: vec![3],
            sites: 5,
            ..GeneratorConfig::default()
        })?;
        let r = compare(&inst, &cfg)?;
        eprintln!(
            "seed {seed}: gap {:.5}, sites agree {:?}, jaccard {:.2}",
            r.gap_abs.unwrap_or(f64::NAN),
            r.sites_agree,
            r.jaccard.unwrap_or(f64::NAN)
        );
        reports.push(r);
    }
    write_csv(std::io::stdout().lock(), &reports)
}
