//! Exact integer dose allocation for a fixed grouping of zones.
//!
//! The objective is `sum_j w_j y_j + constant - penalty * max_j y_j / D_j`.
//! The maximum fill-rate at an optimum is one of the finitely many values
//! `p / D_j`. For each such candidate `t`, capping every zone at
//! `floor(t * D_j)` leaves a linear objective. That subproblem is solved by a
//! dynamic program over groups: the state is the number of doses handed out
//! so far, and each state holds the Pareto front of (value, cost) pairs.
//! Inside a group every dose costs the same, so for a given group total the
//! best split fills zones by weight and then by index. Candidates are visited
//! in order of a pooled greedy upper bound, and visiting stops once the bound
//! drops below the incumbent.

use std::cmp::Ordering;

use crate::formulation::TOLERANCE;

/// Zones sharing one site: a dose capacity and a per-dose cost.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Group {
    pub capacity: u64,
    pub unit_cost: f64,
    pub zones: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct AllocationProblem {
    pub demands: Vec<u64>,
    pub weights: Vec<f64>,
    pub penalty: f64,
    pub constant: f64,
    pub groups: Vec<Group>,
    pub supply: u64,
    pub budget: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Allocation {
    pub doses: Vec<u64>,
    pub value: f64,
    pub cost: f64,
}

/// Maximum fill-rate candidate `num / den`.
#[derive(Debug, Clone, Copy)]
struct Ratio {
    num: u64,
    den: u64,
}

impl Ratio {
    fn cap(self, demand: u64) -> u64 {
        (self.num * demand / self.den).min(demand)
    }

    fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    fn cmp(self, other: Ratio) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    value: f64,
    cost: f64,
    prev: u32,
    q: u32,
}

fn cmp_tol(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= TOLERANCE {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

impl AllocationProblem {
    fn fill_rate_max(&self, doses: &[u64]) -> f64 {
        self.demands
            .iter()
            .zip(doses)
            .map(|(&d, &y)| if d == 0 { 1.0 } else { y as f64 / d as f64 })
            .fold(0.0, f64::max)
    }

    /// Objective of a dose vector.
    pub fn objective(&self, doses: &[u64]) -> f64 {
        let linear: f64 = self.weights.iter().zip(doses).map(|(w, &y)| w * y as f64).sum();
        linear + self.constant - self.penalty * self.fill_rate_max(doses)
    }

    fn cost_of(&self, doses: &[u64]) -> f64 {
        self.groups
            .iter()
            .map(|g| g.unit_cost * g.zones.iter().map(|&j| doses[j]).sum::<u64>() as f64)
            .sum()
    }

    fn candidates(&self) -> Vec<Ratio> {
        let has_zero = self.demands.contains(&0);
        if self.penalty == 0.0 || has_zero {
            return vec![Ratio { num: 1, den: 1 }];
        }
        let mut out: Vec<Ratio> = self
            .demands
            .iter()
            .flat_map(|&d| (0..=d).map(move |p| Ratio { num: p, den: d }))
            .collect();
        out.sort_by(|a, b| a.cmp(*b));
        out.dedup_by(|a, b| a.cmp(*b) == Ordering::Equal);
        out
    }

    /// Zones of a group ordered by weight, then index.
    fn fill_order(&self, g: &Group) -> Vec<usize> {
        let mut order = g.zones.clone();
        order.sort_by(|&a, &b| self.weights[b].total_cmp(&self.weights[a]).then(a.cmp(&b)));
        order
    }

    /// Relaxation bound: every dose costs the cheapest group rate.
    fn pooled_bound(&self, caps: &[u64], orders: &[Vec<usize>]) -> f64 {
        let min_cost = self.groups.iter().map(|g| g.unit_cost).fold(f64::INFINITY, f64::min);
        let mut limit = self.supply;
        if min_cost > 0.0 && min_cost.is_finite() {
            let afford = ((self.budget + TOLERANCE) / min_cost).floor().max(0.0);
            if afford < limit as f64 {
                limit = afford as u64;
            }
        }
        let mut items: Vec<(f64, u64, usize)> = Vec::new();
        for (g, order) in self.groups.iter().zip(orders) {
            let mut room = g.capacity;
            for &j in order {
                let take = caps[j].min(room);
                room -= take;
                if take > 0 {
                    items.push((self.weights[j], take, j));
                }
            }
        }
        items.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut value = 0.0;
        for (w, take, _) in items {
            let t = take.min(limit);
            value += w * t as f64;
            limit -= t;
            if limit == 0 {
                break;
            }
        }
        value
    }

    fn distribute(&self, order: &[usize], caps: &[u64], q: u32, doses: &mut [u64]) {
        let mut left = q as u64;
        for &j in order {
            let take = caps[j].min(left);
            doses[j] = take;
            left -= take;
        }
    }

    /// Dose vector of node `idx` in state `s` of layer `g`.
    fn expand(
        &self,
        layers: &[Vec<Vec<Node>>],
        orders: &[Vec<usize>],
        caps: &[u64],
        g: usize,
        s: usize,
        idx: usize,
    ) -> Vec<u64> {
        let mut doses = vec![0u64; self.demands.len()];
        let (mut g, mut s, mut idx) = (g, s, idx);
        loop {
            let node = layers[g][s][idx];
            self.distribute(&orders[g], caps, node.q, &mut doses);
            if g == 0 {
                return doses;
            }
            s -= node.q as usize;
            idx = node.prev as usize;
            g -= 1;
        }
    }

    /// Dose vector of a node of layer `layers.len()` that is not stored yet.
    fn expand_pending(
        &self,
        layers: &[Vec<Vec<Node>>],
        orders: &[Vec<usize>],
        caps: &[u64],
        s: usize,
        node: &Node,
    ) -> Vec<u64> {
        let g = layers.len();
        if g == 0 {
            let mut doses = vec![0u64; self.demands.len()];
            self.distribute(&orders[0], caps, node.q, &mut doses);
            return doses;
        }
        let mut doses = self.expand(layers, orders, caps, g - 1, s - node.q as usize, node.prev as usize);
        self.distribute(&orders[g], caps, node.q, &mut doses);
        doses
    }

    /// Best dose vector under per-zone caps, ordered by value, then cost,
    /// then lower zones filled first.
    fn solve_capped(&self, caps: &[u64], orders: &[Vec<usize>]) -> Allocation {
        let group_max: Vec<u64> = self
            .groups
            .iter()
            .map(|g| g.capacity.min(g.zones.iter().map(|&j| caps[j]).sum()))
            .collect();
        let s_max = self.supply.min(group_max.iter().sum()) as usize;
        if self.groups.is_empty() {
            let doses = vec![0; self.demands.len()];
            return Allocation {
                value: self.objective(&doses),
                cost: 0.0,
                doses,
            };
        }

        // When no allocation can exceed the budget, cost only breaks ties and
        // one node per state suffices.
        let max_cost = self
            .groups
            .iter()
            .zip(&group_max)
            .map(|(g, &q)| g.unit_cost * q as f64)
            .sum::<f64>()
            .min(self.groups.iter().map(|g| g.unit_cost).fold(0.0, f64::max) * s_max as f64);
        let single = max_cost <= self.budget + TOLERANCE;

        let root = vec![vec![Node {
            value: 0.0,
            cost: 0.0,
            prev: 0,
            q: 0,
        }]];
        let mut layers: Vec<Vec<Vec<Node>>> = Vec::with_capacity(self.groups.len());
        for (g, group) in self.groups.iter().enumerate() {
            let q_limit = (group_max[g] as usize).min(s_max);
            let mut gains = Vec::with_capacity(q_limit + 1);
            gains.push(0.0);
            'fill: for &j in &orders[g] {
                for _ in 0..caps[j] {
                    if gains.len() > q_limit {
                        break 'fill;
                    }
                    let last = *gains.last().unwrap();
                    gains.push(last + self.weights[j]);
                }
            }
            let q_max = gains.len() - 1;

            let prev: &[Vec<Node>] = if g == 0 { &root } else { &layers[g - 1] };
            let mut next: Vec<Vec<Node>> = vec![Vec::new(); s_max + 1];
            for (s, bucket) in prev.iter().enumerate() {
                for (idx, node) in bucket.iter().enumerate() {
                    for q in 0..=q_max.min(s_max - s) {
                        let cost = node.cost + group.unit_cost * q as f64;
                        if cost > self.budget + TOLERANCE {
                            break;
                        }
                        next[s + q].push(Node {
                            value: node.value + gains[q],
                            cost,
                            prev: idx as u32,
                            q: q as u32,
                        });
                    }
                }
            }
            for (s, bucket) in next.iter_mut().enumerate() {
                let taken = std::mem::take(bucket);
                *bucket = self.pareto(taken, s, &layers, orders, caps, single);
            }
            layers.push(next);
        }

        let g = layers.len() - 1;
        let last = &layers[g];
        let mut best: Option<(usize, usize)> = None;
        for (s, bucket) in last.iter().enumerate() {
            for (idx, node) in bucket.iter().enumerate() {
                let replace = match best {
                    None => true,
                    Some((bs, bi)) => {
                        let b = &last[bs][bi];
                        cmp_tol(node.value, b.value)
                            .then_with(|| cmp_tol(b.cost, node.cost))
                            .then_with(|| {
                                self.expand(&layers, orders, caps, g, s, idx)
                                    .cmp(&self.expand(&layers, orders, caps, g, bs, bi))
                            })
                            == Ordering::Greater
                    }
                };
                if replace {
                    best = Some((s, idx));
                }
            }
        }
        let (s, idx) = best.expect("the empty allocation is always present");
        let doses = self.expand(&layers, orders, caps, g, s, idx);
        Allocation {
            value: self.objective(&doses),
            cost: self.cost_of(&doses),
            doses,
        }
    }

    /// Keeps the (value up, cost down) front of one state, or only its best
    /// node when `single`. Exact ties keep the dose vector that fills lower
    /// zones first.
    fn pareto(
        &self,
        mut bucket: Vec<Node>,
        s: usize,
        layers: &[Vec<Vec<Node>>],
        orders: &[Vec<usize>],
        caps: &[u64],
        single: bool,
    ) -> Vec<Node> {
        if bucket.len() <= 1 {
            return bucket;
        }
        if single {
            let mut best = bucket[0];
            for c in bucket.into_iter().skip(1) {
                let order = cmp_tol(c.value, best.value)
                    .then_with(|| cmp_tol(best.cost, c.cost))
                    .then_with(|| {
                        self.expand_pending(layers, orders, caps, s, &c)
                            .cmp(&self.expand_pending(layers, orders, caps, s, &best))
                    });
                if order == Ordering::Greater {
                    best = c;
                }
            }
            return vec![best];
        }
        bucket.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.cost.total_cmp(&b.cost)));
        let mut kept: Vec<Node> = Vec::new();
        'outer: for c in bucket {
            for k in kept.iter_mut() {
                if k.value >= c.value - TOLERANCE && k.cost <= c.cost + TOLERANCE {
                    let tie = (k.value - c.value).abs() <= TOLERANCE && (k.cost - c.cost).abs() <= TOLERANCE;
                    if tie
                        && self.expand_pending(layers, orders, caps, s, &c)
                            > self.expand_pending(layers, orders, caps, s, k)
                    {
                        *k = c;
                    }
                    continue 'outer;
                }
            }
            kept.retain(|k| !(k.value <= c.value + TOLERANCE && k.cost >= c.cost - TOLERANCE));
            kept.push(c);
        }
        kept
    }

    /// Exact optimum, or `None` when the budget is already negative.
    pub fn solve(&self) -> Option<Allocation> {
        if self.budget < -TOLERANCE {
            return None;
        }
        let orders: Vec<Vec<usize>> = self.groups.iter().map(|g| self.fill_order(g)).collect();
        let mut scored: Vec<(f64, Ratio, Vec<u64>)> = self
            .candidates()
            .into_iter()
            .map(|t| {
                let caps: Vec<u64> = self.demands.iter().map(|&d| t.cap(d)).collect();
                let bound = self.pooled_bound(&caps, &orders) + self.constant - self.penalty * t.value();
                (bound, t, caps)
            })
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));

        let mut best: Option<Allocation> = None;
        for (bound, _, caps) in scored {
            if let Some(b) = &best {
                if bound < b.value - TOLERANCE {
                    break;
                }
            }
            let cand = self.solve_capped(&caps, &orders);
            let better = match &best {
                None => true,
                Some(b) => {
                    cmp_tol(cand.value, b.value)
                        .then_with(|| cmp_tol(b.cost, cand.cost))
                        .then_with(|| cand.doses.cmp(&b.doses))
                        == Ordering::Greater
                }
            };
            if better {
                best = Some(cand);
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Every integer dose vector within demands, checked against all constraints.
    pub(crate) fn brute_force(p: &AllocationProblem) -> Allocation {
        let m = p.demands.len();
        let mut doses = vec![0u64; m];
        let mut best: Option<Allocation> = None;
        loop {
            let total: u64 = doses.iter().sum();
            let cost = p.cost_of(&doses);
            let within_groups = p
                .groups
                .iter()
                .all(|g| g.zones.iter().map(|&j| doses[j]).sum::<u64>() <= g.capacity);
            let grouped = (0..m).all(|j| doses[j] == 0 || p.groups.iter().any(|g| g.zones.contains(&j)));
            if total <= p.supply && cost <= p.budget + TOLERANCE && within_groups && grouped {
                let cand = Allocation {
                    value: p.objective(&doses),
                    cost,
                    doses: doses.clone(),
                };
                let better = best.as_ref().is_none_or(|b| {
                    cmp_tol(cand.value, b.value)
                        .then_with(|| cmp_tol(b.cost, cand.cost))
                        .then_with(|| cand.doses.cmp(&b.doses))
                        == Ordering::Greater
                });
                if better {
                    best = Some(cand);
                }
            }
            let mut k = 0;
            loop {
                if k == m {
                    return best.unwrap();
                }
                if doses[k] < p.demands[k] {
                    doses[k] += 1;
                    break;
                }
                doses[k] = 0;
                k += 1;
            }
        }
    }

    fn full_model(demands: Vec<u64>, theta: f64, groups: Vec<Group>, supply: u64, budget: f64) -> AllocationProblem {
        let m = demands.len() as f64;
        let total: u64 = demands.iter().sum();
        let zeros = demands.iter().filter(|&&d| d == 0).count() as f64;
        AllocationProblem {
            weights: demands
                .iter()
                .map(|&d| {
                    if d == 0 {
                        0.0
                    } else {
                        1.0 / total as f64 + theta / (m * d as f64)
                    }
                })
                .collect(),
            constant: theta * zeros / m,
            penalty: theta,
            demands,
            groups,
            supply,
            budget,
        }
    }

    fn one_site(cap: u64, zones: Vec<usize>) -> Vec<Group> {
        vec![Group {
            capacity: cap,
            unit_cost: 1.0,
            zones,
        }]
    }

    #[test]
    fn no_penalty_fills_lowest_zone_first() {
        let p = full_model(vec![10, 10], 0.0, one_site(30, vec![0, 1]), 15, 1e9);
        assert_eq!(p.solve().unwrap().doses, vec![10, 5]);
    }

    #[test]
    fn strong_penalty_balances() {
        let p = full_model(vec![10, 10], 10.0, one_site(30, vec![0, 1]), 15, 1e9);
        let got = p.solve().unwrap();
        assert_eq!(got, brute_force(&p));
        // wasting the odd dose beats an imbalance of one
        assert!(got.doses[0].abs_diff(got.doses[1]) <= 1);
    }

    #[test]
    fn zero_budget_gives_nothing() {
        let p = full_model(vec![4, 6], 1.0, one_site(30, vec![0, 1]), 15, 0.0);
        assert_eq!(p.solve().unwrap().doses, vec![0, 0]);
    }

    #[test]
    fn negative_budget_is_none() {
        let p = full_model(vec![4, 6], 1.0, one_site(30, vec![0, 1]), 15, -1.0);
        assert!(p.solve().is_none());
    }

    #[test]
    fn cheaper_group_wins_ties() {
        let groups = vec![
            Group {
                capacity: 10,
                unit_cost: 2.0,
                zones: vec![0],
            },
            Group {
                capacity: 10,
                unit_cost: 1.0,
                zones: vec![1],
            },
        ];
        let p = full_model(vec![5, 5], 0.0, groups, 5, 100.0);
        assert_eq!(p.solve().unwrap().doses, vec![0, 5]);
    }

    use proptest::prelude::*;

    fn arb_problem() -> impl Strategy<Value = AllocationProblem> {
        (
            prop::collection::vec(0u64..6, 1..4),
            prop::sample::select(vec![0.0, 0.5, 1.0, 3.0, 10.0]),
            0u64..12,
            0.0..20.0f64,
            prop::collection::vec((0u64..10, prop::sample::select(vec![0.0, 0.5, 1.0, 2.0])), 1..3),
            any::<u64>(),
        )
            .prop_filter_map(
                "needs a positive demand",
                |(demands, theta, supply, budget, sites, salt)| {
                    if demands.iter().all(|&d| d == 0) {
                        return None;
                    }
                    let k = sites.len();
                    let mut groups: Vec<Group> = sites
                        .into_iter()
                        .map(|(capacity, unit_cost)| Group {
                            capacity,
                            unit_cost,
                            zones: vec![],
                        })
                        .collect();
                    for j in 0..demands.len() {
                        groups[((salt >> (2 * j)) as usize) % k].zones.push(j);
                    }
                    Some(full_model(demands, theta, groups, supply, budget))
                },
            )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn matches_brute_force(p in arb_problem()) {
            let got = p.solve().unwrap();
            let want = brute_force(&p);
            prop_assert!((got.value - want.value).abs() <= TOLERANCE, "{got:?} vs {want:?}");
            prop_assert_eq!(got.doses, want.doses);
        }
    }
}
