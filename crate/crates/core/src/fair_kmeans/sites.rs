use serde::Serialize;

use super::Clustering;
use crate::error::{Error, Result};
use crate::instance::Instance;

/// Floor applied to standardized score parameters.
pub const SCORE_FLOOR: f64 = 1e-6;

fn min_max(values: impl Iterator<Item = f64> + Clone) -> impl Fn(f64) -> f64 {
    let lo = values.clone().fold(f64::INFINITY, f64::min);
    let hi = values.fold(f64::NEG_INFINITY, f64::max);
    move |v| {
        let s = if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
        s.max(SCORE_FLOOR)
    }
}

/// Per cluster, every site with its score `C / (d * f * v)`, best first.
///
/// Each parameter is min-max standardized across all sites (distances
/// across all site-centroid pairs) and floored at [`SCORE_FLOOR`]. Equal
/// scores keep the lower site index first.
pub fn score_sites(instance: &Instance, clustering: &Clustering) -> Vec<Vec<(usize, f64)>> {
    let sites = &instance.sites;
    let dist: Vec<Vec<f64>> = clustering
        .centroids
        .iter()
        .map(|&(a, b)| sites.iter().map(|s| (s.x - a).hypot(s.y - b)).collect())
        .collect();
    let cap = min_max(sites.iter().map(|s| s.capacity as f64));
    let fixed = min_max(sites.iter().map(|s| s.fixed_cost));
    let unit = min_max(sites.iter().map(|s| s.unit_cost));
    let d = min_max(dist.iter().flatten().copied());

    dist.iter()
        .map(|row| {
            let mut list: Vec<(usize, f64)> = sites
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let score = cap(s.capacity as f64) / (d(row[i]) * fixed(s.fixed_cost) * unit(s.unit_cost));
                    (i, score)
                })
                .collect();
            list.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            list
        })
        .collect()
}

/// Gives each cluster one distinct site. The cluster whose best remaining
/// site scores highest picks next (lower cluster index on ties).
pub fn assign_sites(lists: &[Vec<(usize, f64)>]) -> Result<Vec<usize>> {
    let k = lists.len();
    let mut chosen: Vec<Option<usize>> = vec![None; k];
    let mut taken: Vec<usize> = Vec::new();
    for _ in 0..k {
        let mut best: Option<(usize, usize, f64)> = None;
        for (c, list) in lists.iter().enumerate() {
            if chosen[c].is_some() {
                continue;
            }
            let Some(&(site, score)) = list.iter().find(|(s, _)| !taken.contains(s)) else {
                return Err(Error::InvalidArgument(format!("cluster {c} has no untaken site left")));
            };
            if best.is_none_or(|(_, _, b)| score > b) {
                best = Some((c, site, score));
            }
        }
        let (c, site, _) = best.expect("an unassigned cluster remains");
        chosen[c] = Some(site);
        taken.push(site);
    }
    Ok(chosen.into_iter().map(|s| s.unwrap()).collect())
}

/// One site per cluster with the parameters it passes to its cluster.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSiteSelection {
    /// Site position per cluster.
    pub sites: Vec<usize>,
    pub capacity: Vec<u64>,
    pub fixed_cost: Vec<f64>,
    pub unit_cost: Vec<f64>,
    /// Total member demand per cluster.
    pub demand: Vec<u64>,
}

/// Scores, assigns, then copies site parameters and sums member demand.
pub fn select_cluster_sites(instance: &Instance, clustering: &Clustering) -> Result<ClusterSiteSelection> {
    if clustering.k > instance.num_sites() {
        return Err(Error::InvalidArgument(format!(
            "{} clusters but only {} sites",
            clustering.k,
            instance.num_sites()
        )));
    }
    if clustering.zone_membership.len() != instance.num_zones() {
        return Err(Error::Dimension("clustering does not match the instance zones".into()));
    }
    let sites = assign_sites(&score_sites(instance, clustering))?;
    let mut demand = vec![0u64; clustering.k];
    for (j, &c) in clustering.zone_membership.iter().enumerate() {
        demand[c] += instance.demand(j);
    }
    Ok(ClusterSiteSelection {
        capacity: sites.iter().map(|&i| instance.capacity(i)).collect(),
        fixed_cost: sites.iter().map(|&i| instance.sites[i].fixed_cost).collect(),
        unit_cost: sites.iter().map(|&i| instance.sites[i].unit_cost).collect(),
        sites,
        demand,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{instance_points, select_k, weighted_lloyd};
    use super::*;
    use crate::instance::{generate_clustered, GeneratorConfig};
    use crate::instance::{Site, Zone};
    use proptest::prelude::*;

    fn site(id: usize, x: f64, capacity: i64, fixed_cost: f64, unit_cost: f64) -> Site {
        Site {
            id,
            x,
            y: 0.0,
            capacity,
            fixed_cost,
            unit_cost,
        }
    }

    fn instance(sites: Vec<Site>) -> Instance {
        Instance {
            supply: 10,
            budget: 100.0,
            theta: 1.0,
            alpha: 1.0,
            zones: vec![Zone {
                id: 1,
                x: 0.0,
                y: 0.0,
                demand: 5,
            }],
            sites,
        }
    }

    fn clustering_at(centroids: Vec<(f64, f64)>) -> Clustering {
        Clustering {
            k: centroids.len(),
            labels: vec![0],
            zone_membership: vec![0],
            site_membership: vec![],
            centroids,
            silhouette: None,
            wcss: 0.0,
            wcss_trace: vec![],
        }
    }

    #[test]
    fn midpoint_parameters_score_four() {
        // the middle site standardizes to 0.5 on every parameter
        let inst = instance(vec![
            site(1, 0.0, 0, 0.0, 0.0),
            site(2, 1.0, 1, 1.0, 1.0),
            site(3, 2.0, 2, 2.0, 2.0),
        ]);
        let scores = score_sites(&inst, &clustering_at(vec![(0.0, 0.0)]));
        let mid = scores[0].iter().find(|(i, _)| *i == 1).unwrap().1;
        assert!((mid - 4.0).abs() < 1e-12);
    }

    #[test]
    fn nearer_identical_site_ranks_higher() {
        let inst = instance(vec![site(1, 9.0, 10, 5.0, 1.0), site(2, 0.0, 10, 5.0, 1.0)]);
        let scores = score_sites(&inst, &clustering_at(vec![(0.0, 0.0)]));
        assert_eq!(scores[0][0].0, 1);
        assert!(scores[0][0].1 > scores[0][1].1);
    }

    #[test]
    fn cheapest_site_score_is_finite() {
        let inst = instance(vec![site(1, 3.0, 10, 1.0, 1.0), site(2, 0.0, 20, 9.0, 1.0)]);
        let scores = score_sites(&inst, &clustering_at(vec![(1.0, 0.0)]));
        assert!(scores[0].iter().all(|(_, s)| s.is_finite() && *s > 0.0));
    }

    #[test]
    fn contested_site_goes_to_higher_score() {
        let lists = vec![vec![(3, 9.0), (1, 7.0)], vec![(3, 8.0), (2, 6.0)]];
        assert_eq!(assign_sites(&lists).unwrap(), vec![3, 2]);
    }

    #[test]
    fn single_cluster_takes_top() {
        assert_eq!(assign_sites(&[vec![(4, 2.0), (0, 1.0)]]).unwrap(), vec![4]);
    }

    #[test]
    fn equal_top_scores_favour_lower_cluster() {
        let lists = vec![vec![(0, 5.0), (1, 1.0)], vec![(0, 5.0), (1, 4.0)]];
        assert_eq!(assign_sites(&lists).unwrap(), vec![0, 1]);
    }

    #[test]
    fn too_many_clusters_rejected() {
        let lists = vec![vec![(0, 5.0)], vec![(0, 4.0)]];
        assert!(assign_sites(&lists).is_err());
    }

    #[test]
    fn planted_clusters_pick_anchor_sites() {
        let cfg = GeneratorConfig {
            seed: 11,
            alpha: 0.5,
            capacity: (300, 300),
            fixed_cost: (100.0, 100.0),
            unit_cost: (2.0, 2.0),
            ..GeneratorConfig::default()
        };
        let inst = generate_clustered(&cfg).unwrap();
        let pts = instance_points(&inst);
        let c = select_k(&pts, 2..=8, inst.num_sites(), 3).unwrap();
        assert_eq!(c.k, 4);
        let sel = select_cluster_sites(&inst, &c).unwrap();
        let mut chosen = sel.sites.clone();
        chosen.sort();
        assert_eq!(chosen, vec![0, 1, 2, 3]);
        assert_eq!(sel.demand.iter().sum::<u64>(), inst.total_demand());
        for (k, &i) in sel.sites.iter().enumerate() {
            assert_eq!(sel.capacity[k], inst.capacity(i));
            assert_eq!(sel.fixed_cost[k], inst.sites[i].fixed_cost);
        }
    }

    proptest! {
        #[test]
        fn scoring_order_is_scale_invariant(
            raw in prop::collection::vec((0.0..50.0f64, 1i64..500, 1.0..100.0f64, 0.5..5.0f64), 2..8),
            scale in 1.5..20.0f64,
            seed in any::<u64>(),
        ) {
            let sites: Vec<Site> = raw.iter().enumerate().map(|(i, &(x, c, f, v))| site(i + 1, x, c, f, v)).collect();
            let inst = instance(sites);
            let pts = instance_points(&inst);
            let k = 2.min(pts.len());
            let c = weighted_lloyd(&pts, k, seed).unwrap();
            let base = score_sites(&inst, &c);
            let order = |s: &Vec<Vec<(usize, f64)>>| s.iter().map(|l| l.iter().map(|p| p.0).collect::<Vec<_>>()).collect::<Vec<_>>();

            let mut scaled = inst.clone();
            for s in &mut scaled.sites {
                s.fixed_cost *= scale;
                s.unit_cost *= scale;
            }
            let other = score_sites(&scaled, &c);
            for (a, b) in base.iter().flatten().zip(other.iter().flatten()) {
                prop_assert!((a.1 - b.1).abs() <= 1e-9 * a.1.abs().max(1.0));
            }
            prop_assert_eq!(order(&base), order(&other));
        }

        #[test]
        fn assigned_sites_are_distinct(
            raw in prop::collection::vec((0.0..50.0f64, 1i64..500, 1.0..100.0f64, 0.5..5.0f64), 3..8),
            k in 1usize..4,
            seed in any::<u64>(),
        ) {
            let sites: Vec<Site> = raw.iter().enumerate().map(|(i, &(x, c, f, v))| site(i + 1, x, c, f, v)).collect();
            let inst = instance(sites);
            let pts = instance_points(&inst);
            let c = weighted_lloyd(&pts, k.min(pts.len()), seed).unwrap();
            let lists = score_sites(&inst, &c);
            let chosen = assign_sites(&lists).unwrap();
            let mut sorted = chosen.clone();
            sorted.sort();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), chosen.len());
        }
    }
}
