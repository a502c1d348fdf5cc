#![allow(dead_code)]

use fairvax::instance::{Instance, Site, Zone};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub struct Bounds {
    pub max_sites: usize,
    pub max_zones: usize,
    pub max_demand: i64,
    pub max_supply: i64,
}

/// Small random instance; budgets range from tight to ample.
pub fn random_instance(rng: &mut ChaCha8Rng, b: &Bounds) -> Instance {
    let n = rng.gen_range(1..=b.max_sites);
    let m = rng.gen_range(1..=b.max_zones);
    let zones: Vec<Zone> = (0..m)
        .map(|j| Zone {
            id: j + 1,
            x: rng.gen_range(0..=20) as f64,
            y: rng.gen_range(0..=20) as f64,
            demand: rng.gen_range(1..=b.max_demand),
        })
        .collect();
    let total: i64 = zones.iter().map(|z| z.demand).sum();
    let sites: Vec<Site> = (0..n)
        .map(|i| Site {
            id: i + 1,
            x: rng.gen_range(0..=20) as f64,
            y: rng.gen_range(0..=20) as f64,
            capacity: rng.gen_range(1..=total.max(2)),
            fixed_cost: rng.gen_range(0..=10) as f64,
            unit_cost: [0.5, 1.0, 1.5, 2.0][rng.gen_range(0..4)],
        })
        .collect();
    let fixed: f64 = sites.iter().map(|s| s.fixed_cost).sum();
    Instance {
        supply: rng.gen_range(0..=b.max_supply),
        budget: (rng.gen_range(0.3..1.2) * (fixed + 2.0 * total as f64)).round(),
        theta: [0.0, 0.5, 1.0, 3.0][rng.gen_range(0..4)],
        alpha: [0.0, 0.5, 1.0][rng.gen_range(0..3)],
        zones,
        sites,
    }
}
