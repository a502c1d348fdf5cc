//! Solves the planted 34-zone instance heuristically and renders the
//! zones, sites and assignments as SVG, coloured by cluster.
//!
//! `cargo run --example render_report -- [out.svg]`

use fairvax::harness::{render_svg, write_file};
use fairvax::instance::{generate_clustered, GeneratorConfig};
use fairvax::reduced_alloc::{heuristic_solve, HeuristicConfig};

fn main() -> fairvax::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| std::env::temp_dir().join("fairvax-clusters.svg").display().to_string());
    let inst = generate_clustered(&GeneratorConfig::default())?;
    let result = heuristic_solve(&inst, &HeuristicConfig::default())?;
    let svg = render_svg(
        &inst,
        &result.evaluated.solution,
        Some(&result.clustering.zone_membership),
    );
    write_file(&out, svg.as_bytes())?;
    println!("{} clusters drawn to {out}", result.clustering.k);
    Ok(())
}
