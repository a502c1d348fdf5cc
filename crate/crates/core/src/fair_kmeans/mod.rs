//! Weighted k-means over zones and candidate sites, silhouette-based choice
//! of the cluster count, and the choice of one distinct site per cluster.

mod silhouette;
mod sites;

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::Instance;

pub use silhouette::silhouette_score;
pub use sites::{assign_sites, score_sites, select_cluster_sites, ClusterSiteSelection, SCORE_FLOOR};

const MAX_ITERATIONS: usize = 300;
const RESTARTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    Zone,
    Site,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPoint {
    pub x: f64,
    pub y: f64,
    pub weight: f64,
    pub kind: PointKind,
    /// Position of the zone or site in the instance.
    pub ref_id: usize,
}

/// Zones weighted by demand followed by sites with weight one.
pub fn instance_points(instance: &Instance) -> Vec<WeightedPoint> {
    let zones = instance.zones.iter().enumerate().map(|(j, z)| WeightedPoint {
        x: z.x,
        y: z.y,
        weight: z.demand.max(0) as f64,
        kind: PointKind::Zone,
        ref_id: j,
    });
    let sites = instance.sites.iter().enumerate().map(|(i, s)| WeightedPoint {
        x: s.x,
        y: s.y,
        weight: 1.0,
        kind: PointKind::Site,
        ref_id: i,
    });
    zones.chain(sites).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub k: usize,
    pub centroids: Vec<(f64, f64)>,
    /// Cluster of each input point.
    pub labels: Vec<usize>,
    /// Cluster of each zone, by zone position.
    pub zone_membership: Vec<usize>,
    /// Cluster of each site, by site position.
    pub site_membership: Vec<usize>,
    /// Mean silhouette; `None` for a single cluster.
    pub silhouette: Option<f64>,
    pub wcss: f64,
    /// Weighted WCSS after every Lloyd iteration of the kept run.
    pub wcss_trace: Vec<f64>,
}

impl Clustering {
    fn from_labels(
        points: &[WeightedPoint],
        k: usize,
        labels: Vec<usize>,
        centroids: Vec<(f64, f64)>,
        trace: Vec<f64>,
    ) -> Self {
        let zones = points.iter().filter(|p| p.kind == PointKind::Zone).count();
        let sites = points.len() - zones;
        let mut zone_membership = vec![0; zones];
        let mut site_membership = vec![0; sites];
        for (p, &l) in points.iter().zip(&labels) {
            match p.kind {
                PointKind::Zone if p.ref_id < zones => zone_membership[p.ref_id] = l,
                PointKind::Site if p.ref_id < sites => site_membership[p.ref_id] = l,
                _ => {}
            }
        }
        Clustering {
            k,
            wcss: trace.last().copied().unwrap_or(0.0),
            centroids,
            labels,
            zone_membership,
            site_membership,
            silhouette: None,
            wcss_trace: trace,
        }
    }

    /// Zone positions in each cluster.
    pub fn zones_by_cluster(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (j, &c) in self.zone_membership.iter().enumerate() {
            out[c].push(j);
        }
        out
    }
}

fn dist2(p: &WeightedPoint, c: (f64, f64)) -> f64 {
    let (dx, dy) = (p.x - c.0, p.y - c.1);
    dx * dx + dy * dy
}

fn nearest(p: &WeightedPoint, centroids: &[(f64, f64)]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, &centre) in centroids.iter().enumerate() {
        let d = dist2(p, centre);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}

fn wcss(points: &[WeightedPoint], labels: &[usize], centroids: &[(f64, f64)]) -> f64 {
    points
        .iter()
        .zip(labels)
        .map(|(p, &l)| p.weight * dist2(p, centroids[l]))
        .sum()
}

/// Weighted k-means++ seeding. Zero-weight points are only drawn when no
/// positive-weight candidate is left.
fn seed_centroids(points: &[WeightedPoint], k: usize, rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut d2 = vec![f64::INFINITY; points.len()];
    while chosen.len() < k {
        let scores: Vec<f64> = points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                if chosen.contains(&i) {
                    0.0
                } else if chosen.is_empty() {
                    p.weight
                } else {
                    p.weight * d2[i]
                }
            })
            .collect();
        let total: f64 = scores.iter().sum();
        let pick = if total > 0.0 && total.is_finite() {
            let mut r = rng.gen::<f64>() * total;
            let mut pick = None;
            for (i, &s) in scores.iter().enumerate() {
                if s > 0.0 {
                    pick = Some(i);
                    if r < s {
                        break;
                    }
                    r -= s;
                }
            }
            pick.expect("positive total has a positive entry")
        } else {
            // farthest unchosen point, lowest index on ties
            (0..points.len())
                .filter(|i| !chosen.contains(i))
                .max_by(|&a, &b| d2[a].total_cmp(&d2[b]).then(b.cmp(&a)))
                .expect("k does not exceed the point count")
        };
        chosen.push(pick);
        let c = (points[pick].x, points[pick].y);
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(dist2(p, c));
        }
    }
    chosen.iter().map(|&i| (points[i].x, points[i].y)).collect()
}

/// Gives each empty cluster the point farthest from its current centroid,
/// taken from a cluster that keeps at least one member.
fn repair_empty(points: &[WeightedPoint], labels: &mut [usize], centroids: &mut [(f64, f64)]) {
    let k = centroids.len();
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = (0..k).find(|&c| counts[c] == 0) else {
            return;
        };
        let donor = (0..points.len())
            .filter(|&i| counts[labels[i]] >= 2)
            .max_by(|&a, &b| {
                dist2(&points[a], centroids[labels[a]])
                    .total_cmp(&dist2(&points[b], centroids[labels[b]]))
                    .then(b.cmp(&a))
            })
            .expect("an empty cluster implies a cluster with two members");
        labels[donor] = empty;
        centroids[empty] = (points[donor].x, points[donor].y);
    }
}

fn update_centroids(points: &[WeightedPoint], labels: &[usize], centroids: &mut [(f64, f64)]) {
    let k = centroids.len();
    let mut acc = vec![(0.0, 0.0, 0.0); k];
    let mut plain = vec![(0.0, 0.0, 0usize); k];
    for (p, &l) in points.iter().zip(labels) {
        acc[l].0 += p.weight * p.x;
        acc[l].1 += p.weight * p.y;
        acc[l].2 += p.weight;
        plain[l].0 += p.x;
        plain[l].1 += p.y;
        plain[l].2 += 1;
    }
    for c in 0..k {
        if acc[c].2 > 0.0 {
            centroids[c] = (acc[c].0 / acc[c].2, acc[c].1 / acc[c].2);
        } else if plain[c].2 > 0 {
            // members carry no weight, so the position does not affect WCSS
            let n = plain[c].2 as f64;
            centroids[c] = (plain[c].0 / n, plain[c].1 / n);
        }
    }
}

/// Labels, centroids and WCSS trace of one Lloyd run.
type Run = (Vec<usize>, Vec<(f64, f64)>, Vec<f64>);

fn lloyd_run(points: &[WeightedPoint], k: usize, rng: &mut ChaCha8Rng) -> Run {
    let mut centroids = seed_centroids(points, k, rng);
    let mut labels: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    for _ in 0..MAX_ITERATIONS {
        let mut next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
        repair_empty(points, &mut next, &mut centroids);
        let stable = next == labels;
        labels = next;
        update_centroids(points, &labels, &mut centroids);
        trace.push(wcss(points, &labels, &centroids));
        if stable {
            break;
        }
    }
    (labels, centroids, trace)
}

/// Lloyd's algorithm with weighted centroid updates.
///
/// Runs several k-means++ seeded restarts from one seeded stream and keeps
/// the lowest final WCSS (earliest restart on ties).
pub fn weighted_lloyd(points: &[WeightedPoint], k: usize, seed: u64) -> Result<Clustering> {
    if k == 0 || k > points.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must be between 1 and the number of points ({})",
            points.len()
        )));
    }
    if points
        .iter()
        .any(|p| p.weight.is_nan() || p.weight < 0.0 || !p.x.is_finite() || !p.y.is_finite())
    {
        return Err(Error::InvalidArgument(
            "points need finite coordinates and non-negative weights".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Run> = None;
    for _ in 0..RESTARTS {
        let run = lloyd_run(points, k, &mut rng);
        let better = best
            .as_ref()
            .is_none_or(|b| run.2.last().unwrap() < b.2.last().unwrap());
        if better {
            best = Some(run);
        }
    }
    let (labels, centroids, trace) = best.unwrap();
    Ok(Clustering::from_labels(points, k, labels, centroids, trace))
}

fn single_cluster(points: &[WeightedPoint], seed: u64) -> Result<Clustering> {
    weighted_lloyd(points, 1, seed)
}

/// Clusters for every `k` in range, keeps the highest silhouette (smallest
/// `k` on ties), then caps the count at `n_sites`.
///
/// The range is clipped to `2..=points - 1`. When nothing is left, or the
/// cap is one, a single cluster is returned without a silhouette.
pub fn select_k(
    points: &[WeightedPoint],
    k_range: RangeInclusive<usize>,
    n_sites: usize,
    seed: u64,
) -> Result<Clustering> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("no points to cluster".into()));
    }
    if n_sites == 0 {
        return Err(Error::InvalidArgument("at least one site is required".into()));
    }
    let lo = (*k_range.start()).max(2);
    let hi = (*k_range.end()).min(points.len().saturating_sub(1));

    let mut best: Option<Clustering> = None;
    for k in lo..=hi {
        let mut c = weighted_lloyd(points, k, seed)?;
        let s = silhouette_score(points, &c)?;
        c.silhouette = Some(s);
        if best.as_ref().is_none_or(|b| s > b.silhouette.unwrap()) {
            best = Some(c);
        }
    }

    let chosen = match best {
        Some(c) if c.k <= n_sites => c,
        Some(_) if n_sites >= 2 => {
            let mut c = weighted_lloyd(points, n_sites, seed)?;
            c.silhouette = Some(silhouette_score(points, &c)?);
            c
        }
        _ => single_cluster(points, seed)?,
    };
    Ok(chosen)
}

/// Clustering summary with instance ids, for JSON output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusteringReport {
    pub k: usize,
    pub centroids: Vec<(f64, f64)>,
    /// `[zone id, cluster]` pairs, clusters numbered from 1.
    pub zone_membership: Vec<(usize, usize)>,
    pub site_membership: Vec<(usize, usize)>,
    pub silhouette: Option<f64>,
    pub wcss: f64,
    /// Chosen site id per cluster.
    pub chosen_sites: Vec<usize>,
}

impl ClusteringReport {
    pub fn new(instance: &Instance, clustering: &Clustering, selection: &ClusterSiteSelection) -> Self {
        ClusteringReport {
            k: clustering.k,
            centroids: clustering.centroids.clone(),
            zone_membership: clustering
                .zone_membership
                .iter()
                .enumerate()
                .map(|(j, &c)| (instance.zones[j].id, c + 1))
                .collect(),
            site_membership: clustering
                .site_membership
                .iter()
                .enumerate()
                .map(|(i, &c)| (instance.sites[i].id, c + 1))
                .collect(),
            silhouette: clustering.silhouette,
            wcss: clustering.wcss,
            chosen_sites: selection.sites.iter().map(|&i| instance.sites[i].id).collect(),
        }
    }
}
