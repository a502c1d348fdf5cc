//! Generates a planted-cluster instance and prints a summary.
//!
//! `cargo run --example generate_instance -- [seed] [out.json]`

use fairvax::instance::{self, generate_clustered, GeneratorConfig};

fn main() -> fairvax::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().map_or(1, |s| s.parse().expect("seed must be an integer"));
    let inst = generate_clustered(&GeneratorConfig {
        seed,
        ..GeneratorConfig::default()
    })?;

    println!("zones {}  sites {}", inst.num_zones(), inst.num_sites());
    println!(
        "total demand {}  supply {}  budget {:.2}",
        inst.total_demand(),
        inst.supply,
        inst.budget
    );
    println!("theta {}  alpha {}", inst.theta, inst.alpha);
    for s in &inst.sites {
        println!(
            "  site {:>2} at ({:>6.2}, {:>6.2})  C={:<4} f={:<7.2} v={:.2}",
            s.id, s.x, s.y, s.capacity, s.fixed_cost, s.unit_cost
        );
    }
    let report = inst.validate();
    println!(
        "validation: {} errors, {} warnings",
        report.errors.len(),
        report.warnings.len()
    );

    if let Some(path) = args.next() {
        instance::save(&inst, &path)?;
        println!("written to {path}");
    }
    Ok(())
}
