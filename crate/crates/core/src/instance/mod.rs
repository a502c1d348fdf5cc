//! Problem data: demand zones, candidate sites, supply, budget and the two
//! fairness penalties, plus the zone/site distance matrix derived from them.

mod generate;

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generate::{generate_clustered, GeneratorConfig};

/// A population unit with a dose demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub demand: i64,
}

/// A candidate vaccination site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub capacity: i64,
    pub fixed_cost: f64,
    pub unit_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub supply: i64,
    pub budget: f64,
    pub theta: f64,
    pub alpha: f64,
    pub zones: Vec<Zone>,
    pub sites: Vec<Site>,
}

impl Instance {
    pub fn num_zones(&self) -> usize {
        self.zones.len()
    }

    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    /// Demand of zone `j` (by position), clamped at zero.
    pub fn demand(&self, j: usize) -> u64 {
        self.zones[j].demand.max(0) as u64
    }

    pub fn total_demand(&self) -> u64 {
        (0..self.num_zones()).map(|j| self.demand(j)).sum()
    }

    pub fn supply(&self) -> u64 {
        self.supply.max(0) as u64
    }

    pub fn capacity(&self, i: usize) -> u64 {
        self.sites[i].capacity.max(0) as u64
    }

    /// Position of the zone with the given external id.
    pub fn zone_position(&self, id: usize) -> Option<usize> {
        self.zones.iter().position(|z| z.id == id)
    }

    /// Position of the site with the given external id.
    pub fn site_position(&self, id: usize) -> Option<usize> {
        self.sites.iter().position(|s| s.id == id)
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let instance: Instance = serde_json::from_str(text).map_err(|source| Error::Parse {
            what: "instance".into(),
            source,
        })?;
        instance.ensure_valid()?;
        Ok(instance)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub(crate) fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_ok() {
            Ok(())
        } else {
            Err(Error::Validation(report))
        }
    }
}

/// Outcome of [`validate`]. Warnings do not make an instance invalid.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.errors.is_empty() {
            return write!(f, "ok");
        }
        write!(f, "{}", self.errors.join("; "))
    }
}

fn check_ids<'a>(kind: &str, ids: impl Iterator<Item = &'a usize>, count: usize, errors: &mut Vec<String>) {
    let mut seen = BTreeSet::new();
    for &id in ids {
        if !seen.insert(id) {
            errors.push(format!("duplicate {kind} id {id}"));
        }
    }
    if seen.len() == count && !seen.iter().copied().eq(1..=count) {
        errors.push(format!("{kind} ids must be contiguous from 1"));
    }
}

/// Collects every invariant violation of `instance`.
pub fn validate(instance: &Instance) -> ValidationReport {
    let mut errors = Vec::new();
    let mut warnings = Vec::new();

    if instance.zones.is_empty() {
        errors.push("m ≥ 1 required".to_string());
    }
    if instance.sites.is_empty() {
        errors.push("n ≥ 1 required".to_string());
    }

    check_ids(
        "zone",
        instance.zones.iter().map(|z| &z.id),
        instance.zones.len(),
        &mut errors,
    );
    check_ids(
        "site",
        instance.sites.iter().map(|s| &s.id),
        instance.sites.len(),
        &mut errors,
    );

    for z in &instance.zones {
        if !z.x.is_finite() || !z.y.is_finite() {
            errors.push(format!("non-finite coordinates at zone {}", z.id));
        }
        if z.demand < 0 {
            errors.push(format!("negative demand at zone {}", z.id));
        } else if z.demand == 0 {
            warnings.push(format!("zero demand at zone {}", z.id));
        }
    }
    if !instance.zones.is_empty() && instance.zones.iter().all(|z| z.demand <= 0) {
        errors.push("at least one zone must have positive demand".to_string());
    }

    for s in &instance.sites {
        if !s.x.is_finite() || !s.y.is_finite() {
            errors.push(format!("non-finite coordinates at site {}", s.id));
        }
        if s.capacity < 0 {
            errors.push(format!("negative capacity at site {}", s.id));
        }
        if !(s.fixed_cost >= 0.0 && s.fixed_cost.is_finite()) {
            errors.push(format!("invalid fixed cost at site {}", s.id));
        }
        if !(s.unit_cost >= 0.0 && s.unit_cost.is_finite()) {
            errors.push(format!("invalid unit cost at site {}", s.id));
        }
    }

    if instance.supply < 0 {
        errors.push("negative supply".to_string());
    }
    if !(instance.budget >= 0.0 && instance.budget.is_finite()) {
        errors.push("budget must be a non-negative number".to_string());
    }
    if !(instance.theta >= 0.0 && instance.theta.is_finite()) {
        errors.push("theta must be a non-negative number".to_string());
    }
    if !(instance.alpha >= 0.0 && instance.alpha.is_finite()) {
        errors.push("alpha must be a non-negative number".to_string());
    }

    ValidationReport { errors, warnings }
}

/// Demand-weighted zone/site distances and their min-max standardization.
///
/// Both matrices are indexed `[site][zone]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    raw: Vec<Vec<f64>>,
    standardized: Vec<Vec<f64>>,
}

impl DistanceMatrix {
    /// Builds the matrix from raw distances, standardizing over all pairs.
    /// When every raw entry is equal the standardized matrix is all zeros.
    pub fn from_raw(raw: Vec<Vec<f64>>) -> Self {
        let (lo, hi) = raw
            .iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| {
                (lo.min(d), hi.max(d))
            });
        let span = hi - lo;
        let standardized = raw
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&d| if span > 0.0 { (d - lo) / span } else { 0.0 })
                    .collect()
            })
            .collect();
        DistanceMatrix { raw, standardized }
    }

    pub fn raw(&self, site: usize, zone: usize) -> f64 {
        self.raw[site][zone]
    }

    pub fn standardized(&self, site: usize, zone: usize) -> f64 {
        self.standardized[site][zone]
    }

    pub fn raw_rows(&self) -> &[Vec<f64>] {
        &self.raw
    }

    pub fn standardized_rows(&self) -> &[Vec<f64>] {
        &self.standardized
    }

    pub fn num_sites(&self) -> usize {
        self.raw.len()
    }

    pub fn num_zones(&self) -> usize {
        self.raw.first().map_or(0, Vec::len)
    }
}

/// `raw[i][j] = D_j * |zone j - site i|`, standardized to [0, 1] over all pairs.
pub fn compute_distances(instance: &Instance) -> DistanceMatrix {
    let raw = instance
        .sites
        .iter()
        .map(|s| {
            instance
                .zones
                .iter()
                .map(|z| z.demand.max(0) as f64 * (z.x - s.x).hypot(z.y - s.y))
                .collect()
        })
        .collect();
    DistanceMatrix::from_raw(raw)
}

/// Reads and validates an instance file.
pub fn load(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let instance: Instance = serde_json::from_str(&text).map_err(|source| Error::Parse {
        what: path.display().to_string(),
        source,
    })?;
    instance.ensure_valid()?;
    Ok(instance)
}

pub fn save(instance: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = instance.to_json_string();
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}


#[cfg(test)]
mod tests {
    use super::fixtures::symmetric_2x2;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn well_formed_fixture_is_ok() {
        let report = validate(&symmetric_2x2());
        assert!(report.is_ok(), "{report}");
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn negative_demand_is_reported() {
        let mut inst = symmetric_2x2();
        inst.zones[0].demand = -3;
        let report = validate(&inst);
        assert!(report.errors.contains(&"negative demand at zone 1".to_string()));
    }

    #[test]
    fn zero_sites_is_reported() {
        let mut inst = symmetric_2x2();
        inst.sites.clear();
        let report = validate(&inst);
        assert!(report.errors.contains(&"n ≥ 1 required".to_string()));
    }

    #[test]
    fn duplicate_and_gapped_ids() {
        let mut inst = symmetric_2x2();
        inst.zones[1].id = 1;
        assert!(validate(&inst).errors.iter().any(|e| e == "duplicate zone id 1"));
        inst.zones[1].id = 3;
        assert!(validate(&inst)
            .errors
            .iter()
            .any(|e| e == "zone ids must be contiguous from 1"));
    }

    #[test]
    fn zero_demand_zone_is_a_warning() {
        let mut inst = symmetric_2x2();
        inst.zones[1].demand = 0;
        let report = validate(&inst);
        assert!(report.is_ok());
        assert_eq!(report.warnings, vec!["zero demand at zone 2".to_string()]);
    }

    #[test]
    fn pythagorean_raw_distance() {
        let mut inst = symmetric_2x2();
        inst.zones.truncate(1);
        inst.zones[0].demand = 2;
        inst.sites.truncate(1);
        inst.sites[0].x = 3.0;
        inst.sites[0].y = 4.0;
        let dm = compute_distances(&inst);
        assert_eq!(dm.raw(0, 0), 10.0);
    }

    #[test]
    fn standardization_endpoints() {
        let dm = DistanceMatrix::from_raw(vec![vec![10.0, 100.5], vec![100.5, 10.0]]);
        assert_eq!(dm.standardized_rows(), &[vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn degenerate_standardization_is_zero() {
        let dm = DistanceMatrix::from_raw(vec![vec![7.0, 7.0], vec![7.0, 7.0]]);
        assert!(dm.standardized_rows().iter().flatten().all(|&d| d == 0.0));
    }

    #[test]
    fn load_save_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        let inst = symmetric_2x2();
        save(&inst, &path).unwrap();
        assert_eq!(load(&path).unwrap(), inst);
    }

    #[test]
    fn missing_supply_names_the_field() {
        let mut value = serde_json::to_value(symmetric_2x2()).unwrap();
        value.as_object_mut().unwrap().remove("supply");
        let err = Instance::from_json_str(&value.to_string()).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        assert!(err.to_string().contains("supply"), "{err}");
    }

    #[test]
    fn negative_budget_fails_validation() {
        let mut inst = symmetric_2x2();
        inst.budget = -1.0;
        let err = Instance::from_json_str(&serde_json::to_string(&inst).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    fn arb_instance() -> impl Strategy<Value = Instance> {
        (
            prop::collection::vec((-50.0..50.0f64, -50.0..50.0f64, 0i64..20), 1..5),
            prop::collection::vec((-50.0..50.0f64, -50.0..50.0f64), 1..4),
        )
            .prop_map(|(zones, sites)| Instance {
                supply: 10,
                budget: 10.0,
                theta: 1.0,
                alpha: 1.0,
                zones: zones
                    .into_iter()
                    .enumerate()
                    .map(|(k, (x, y, demand))| Zone {
                        id: k + 1,
                        x,
                        y,
                        demand,
                    })
                    .collect(),
                sites: sites
                    .into_iter()
                    .enumerate()
                    .map(|(k, (x, y))| Site {
                        id: k + 1,
                        x,
                        y,
                        capacity: 5,
                        fixed_cost: 1.0,
                        unit_cost: 1.0,
                    })
                    .collect(),
            })
    }

    fn transform(inst: &Instance, f: impl Fn(f64, f64) -> (f64, f64)) -> Instance {
        let mut out = inst.clone();
        for z in &mut out.zones {
            (z.x, z.y) = f(z.x, z.y);
        }
        for s in &mut out.sites {
            (s.x, s.y) = f(s.x, s.y);
        }
        out
    }

    fn assert_close(a: &DistanceMatrix, b: &DistanceMatrix) {
        for (ra, rb) in a.standardized_rows().iter().zip(b.standardized_rows()) {
            for (x, y) in ra.iter().zip(rb) {
                assert!((x - y).abs() < 1e-7, "{x} vs {y}");
            }
        }
    }

    proptest! {
        #[test]
        fn standardized_invariant_under_similarity(
            inst in arb_instance(),
            scale in 0.1..10.0f64,
            angle in 0.0..std::f64::consts::TAU,
            dx in -100.0..100.0f64,
            dy in -100.0..100.0f64,
        ) {
            let base = compute_distances(&inst);
            let (s, c) = angle.sin_cos();
            let moved = transform(&inst, |x, y| {
                (scale * (c * x - s * y) + dx, scale * (s * x + c * y) + dy)
            });
            assert_close(&base, &compute_distances(&moved));
        }

        #[test]
        fn zero_demand_means_zero_raw_distance(inst in arb_instance()) {
            let dm = compute_distances(&inst);
            for (j, z) in inst.zones.iter().enumerate() {
                if z.demand == 0 {
                    for i in 0..inst.num_sites() {
                        prop_assert_eq!(dm.raw(i, j), 0.0);
                    }
                }
            }
            for v in dm.standardized_rows().iter().flatten() {
                prop_assert!((0.0..=1.0).contains(v));
            }
        }
    }
}
