use super::{Clustering, WeightedPoint};
use crate::error::{Error, Result};

fn dist(a: &WeightedPoint, b: &WeightedPoint) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Mean silhouette over all points, unweighted.
///
/// Singleton members score 0, as does a point with `a = b = 0`.
pub fn silhouette_score(points: &[WeightedPoint], clustering: &Clustering) -> Result<f64> {
    if clustering.labels.len() != points.len() {
        return Err(Error::Dimension(format!(
            "{} labels for {} points",
            clustering.labels.len(),
            points.len()
        )));
    }
    if clustering.k < 2 {
        return Err(Error::InvalidArgument("silhouette needs at least two clusters".into()));
    }
    let k = clustering.k;
    let labels = &clustering.labels;
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }

    let mut total = 0.0;
    let mut sums = vec![0.0; k];
    for (i, p) in points.iter().enumerate() {
        let own = labels[i];
        if sizes[own] <= 1 {
            continue;
        }
        sums.iter_mut().for_each(|s| *s = 0.0);
        for (q, &l) in points.iter().zip(labels) {
            sums[l] += dist(p, q);
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        if !b.is_finite() {
            continue;
        }
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / points.len() as f64)
}
