use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Instance, Site, Zone};
use crate::error::{Error, Result};

/// Parameters for [`generate_clustered`].
///
/// Supply and budget are drawn as ratios: `S = ratio * total demand` and
/// `B = ratio * (sum of the k largest fixed costs + max unit cost * S)`, where
/// `k = min(num_clusters, sites)`. A budget ratio of at least 1 therefore
/// lets any `k` sites open and administer the whole supply.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub num_clusters: usize,
    /// One entry per cluster, or a single entry applied to every cluster.
    pub zones_per_cluster: Vec<usize>,
    pub sites: usize,
    /// Radius of each planted cluster.
    pub spread: f64,
    pub demand: (i64, i64),
    pub capacity: (i64, i64),
    pub fixed_cost: (f64, f64),
    pub unit_cost: (f64, f64),
    pub supply_ratio: (f64, f64),
    pub budget_ratio: (f64, f64),
    pub theta: f64,
    pub alpha: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 1,
            num_clusters: 4,
            zones_per_cluster: vec![9, 8, 9, 8],
            sites: 10,
            spread: 5.0,
            demand: (10, 60),
            capacity: (200, 500),
            fixed_cost: (50.0, 150.0),
            unit_cost: (1.0, 3.0),
            supply_ratio: (0.6, 0.9),
            budget_ratio: (1.0, 1.3),
            theta: 1.0,
            alpha: 0.5,
        }
    }
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

fn uniform_f(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..=hi)
    } else {
        lo
    }
}

fn uniform_i(rng: &mut ChaCha8Rng, (lo, hi): (i64, i64)) -> i64 {
    if hi > lo {
        rng.gen_range(lo..=hi)
    } else {
        lo
    }
}

fn point_in_disc(rng: &mut ChaCha8Rng, (cx, cy): (f64, f64), radius: f64) -> (f64, f64) {
    let r = radius * rng.gen::<f64>().sqrt();
    let t = rng.gen_range(0.0..std::f64::consts::TAU);
    (round2(cx + r * t.cos()), round2(cy + r * t.sin()))
}

fn check(cfg: &GeneratorConfig) -> Result<()> {
    let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
    if !(cfg.spread > 0.0 && cfg.spread.is_finite()) {
        return bad("spread must be positive");
    }
    if cfg.num_clusters == 0 || cfg.sites == 0 {
        return bad("cluster and site counts must be at least 1");
    }
    if cfg.zones_per_cluster.is_empty() || cfg.zones_per_cluster.contains(&0) {
        return bad("every cluster needs at least one zone");
    }
    if cfg.zones_per_cluster.len() != 1 && cfg.zones_per_cluster.len() != cfg.num_clusters {
        return bad("zones_per_cluster must have one entry or one per cluster");
    }
    if cfg.demand.0 < 1 || cfg.demand.1 < cfg.demand.0 {
        return bad("demand range must be within [1, ..] and ordered");
    }
    if cfg.capacity.0 < 0 || cfg.capacity.1 < cfg.capacity.0 {
        return bad("capacity range must be non-negative and ordered");
    }
    for (name, (lo, hi)) in [
        ("fixed cost", cfg.fixed_cost),
        ("unit cost", cfg.unit_cost),
        ("supply ratio", cfg.supply_ratio),
        ("budget ratio", cfg.budget_ratio),
    ] {
        if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "{name} range must be non-negative and ordered"
            )));
        }
    }
    if !(cfg.theta >= 0.0 && cfg.alpha >= 0.0) {
        return bad("penalties must be non-negative");
    }
    Ok(())
}

/// Planted-cluster instance generator.
///
/// Cluster centres are at least ten spreads apart. Zones fall uniformly
/// inside the disc of radius `spread` around their centre. The first
/// `min(sites, num_clusters)` sites are anchors within a fifth of a spread of
/// a centre; any remaining sites sit 2.5 to 4 spreads away from a random
/// centre, so every zone's closest site is its cluster's anchor.
pub fn generate_clustered(cfg: &GeneratorConfig) -> Result<Instance> {
    check(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sep = 10.0 * cfg.spread;
    let side = sep * ((cfg.num_clusters as f64).sqrt().ceil() + 1.0) * 1.5;

    let mut centres: Vec<(f64, f64)> = Vec::with_capacity(cfg.num_clusters);
    let mut attempts = 0;
    while centres.len() < cfg.num_clusters {
        let c = (rng.gen_range(0.0..side), rng.gen_range(0.0..side));
        attempts += 1;
        let far = centres.iter().all(|&(x, y)| (x - c.0).hypot(y - c.1) >= sep);
        if far || attempts > 10_000 {
            if !far {
                // fall back to a grid slot for the remaining centres
                let k = centres.len();
                let cols = (cfg.num_clusters as f64).sqrt().ceil() as usize;
                centres.push((sep * (k % cols) as f64 * 1.5, sep * (k / cols) as f64 * 1.5));
            } else {
                centres.push(c);
            }
        }
    }
    let centres: Vec<(f64, f64)> = centres.into_iter().map(|(x, y)| (round2(x), round2(y))).collect();

    let mut zones = Vec::new();
    for (k, &centre) in centres.iter().enumerate() {
        let count = if cfg.zones_per_cluster.len() == 1 {
            cfg.zones_per_cluster[0]
        } else {
            cfg.zones_per_cluster[k]
        };
        for _ in 0..count {
            let (x, y) = point_in_disc(&mut rng, centre, cfg.spread);
            let demand = uniform_i(&mut rng, cfg.demand);
            zones.push(Zone {
                id: zones.len() + 1,
                x,
                y,
                demand,
            });
        }
    }

    let mut sites = Vec::with_capacity(cfg.sites);
    for i in 0..cfg.sites {
        let (x, y) = if i < cfg.num_clusters {
            point_in_disc(&mut rng, centres[i], 0.2 * cfg.spread)
        } else {
            let centre = centres[rng.gen_range(0..cfg.num_clusters)];
            let r = cfg.spread * rng.gen_range(2.5..=4.0);
            let t = rng.gen_range(0.0..std::f64::consts::TAU);
            (round2(centre.0 + r * t.cos()), round2(centre.1 + r * t.sin()))
        };
        sites.push(Site {
            id: i + 1,
            x,
            y,
            capacity: uniform_i(&mut rng, cfg.capacity),
            fixed_cost: round2(uniform_f(&mut rng, cfg.fixed_cost)),
            unit_cost: round2(uniform_f(&mut rng, cfg.unit_cost)),
        });
    }

    let total_demand: i64 = zones.iter().map(|z| z.demand).sum();
    let supply = (uniform_f(&mut rng, cfg.supply_ratio) * total_demand as f64).round() as i64;

    let mut fixed: Vec<f64> = sites.iter().map(|s| s.fixed_cost).collect();
    fixed.sort_by(|a, b| b.total_cmp(a));
    let k = cfg.num_clusters.min(cfg.sites);
    let max_unit = sites.iter().map(|s| s.unit_cost).fold(0.0, f64::max);
    let reference = fixed[..k].iter().sum::<f64>() + max_unit * supply as f64;
    let budget = round2(uniform_f(&mut rng, cfg.budget_ratio) * reference);

    Ok(Instance {
        supply,
        budget,
        theta: cfg.theta,
        alpha: cfg.alpha,
        zones,
        sites,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::validate;

    #[test]
    fn default_config_sizes() {
        let inst = generate_clustered(&GeneratorConfig::default()).unwrap();
        assert_eq!(inst.num_zones(), 34);
        assert_eq!(inst.num_sites(), 10);
        assert!(validate(&inst).is_ok());
    }

    #[test]
    fn deterministic_for_seed() {
        let cfg = GeneratorConfig::default();
        assert_eq!(generate_clustered(&cfg).unwrap(), generate_clustered(&cfg).unwrap());
        let other = GeneratorConfig { seed: 9, ..cfg.clone() };
        assert_ne!(generate_clustered(&cfg).unwrap(), generate_clustered(&other).unwrap());
    }

    #[test]
    fn singleton_instance() {
        let cfg = GeneratorConfig {
            seed: 2,
            num_clusters: 1,
            zones_per_cluster: vec![1],
            sites: 1,
            ..GeneratorConfig::default()
        };
        let inst = generate_clustered(&cfg).unwrap();
        assert_eq!((inst.num_zones(), inst.num_sites()), (1, 1));
        assert!(validate(&inst).is_ok());
    }

    #[test]
    fn rejects_non_positive_spread() {
        let cfg = GeneratorConfig {
            spread: 0.0,
            ..GeneratorConfig::default()
        };
        assert!(matches!(generate_clustered(&cfg), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn anchors_near_centres() {
        let cfg = GeneratorConfig::default();
        let inst = generate_clustered(&cfg).unwrap();
        // every zone's closest site is one of the anchors
        for z in &inst.zones {
            let nearest = (0..inst.num_sites())
                .min_by(|&a, &b| {
                    let da = (z.x - inst.sites[a].x).hypot(z.y - inst.sites[a].y);
                    let db = (z.x - inst.sites[b].x).hypot(z.y - inst.sites[b].y);
                    da.total_cmp(&db)
                })
                .unwrap();
            assert!(nearest < cfg.num_clusters);
        }
    }

    #[test]
    fn generated_instances_validate() {
        for seed in 0..40 {
            let cfg = GeneratorConfig {
                seed,
                num_clusters: 1 + (seed as usize % 5),
                zones_per_cluster: vec![1 + seed as usize % 4],
                sites: 1 + seed as usize % 7,
                ..GeneratorConfig::default()
            };
            let inst = generate_clustered(&cfg).unwrap();
            assert!(validate(&inst).is_ok(), "seed {seed}");
        }
    }
}
