//! Random two-group networks, and trust and threshold assignment on them.
//!
//! Generators emit undirected graphs (symmetric arc pairs) with a
//! placeholder trust of 1; [`assign_trust`] sets the real values.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::TrustGraph;
use crate::instance::NodeProfile;
use crate::rng::RngHandle;

/// Labels a uniformly random half of the nodes 0 and the rest 1.
fn random_halves(n: usize, rng: &RngHandle) -> Vec<u32> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng.rng());
    let mut groups = vec![1u32; n];
    for &u in &order[..n / 2] {
        groups[u] = 0;
    }
    groups
}

/// Preferential attachment: a clique on `m + 1` nodes, then each new node
/// links to `m` distinct existing nodes chosen proportionally to degree.
pub fn gen_scale_free(n: usize, m: usize, rng: &RngHandle) -> Result<TrustGraph> {
    if m == 0 || n <= m {
        return Err(Error::param(format!(
            "scale-free generator needs n > m >= 1 (n={n}, m={m})"
        )));
    }
    let mut r = rng.derive("edges").rng();
    let mut edges = Vec::with_capacity(n * m);
    // every edge endpoint once, so a uniform pick is degree-proportional
    let mut ends: Vec<usize> = Vec::with_capacity(2 * n * m);
    for u in 0..=m {
        for w in u + 1..=m {
            edges.push((u, w, 1.0));
            ends.extend([u, w]);
        }
    }
    let mut targets = Vec::with_capacity(m);
    for u in m + 1..n {
        targets.clear();
        while targets.len() < m {
            let w = ends[r.random_range(0..ends.len())];
            if !targets.contains(&w) {
                targets.push(w);
            }
        }
        for &w in &targets {
            edges.push((w, u, 1.0));
            ends.extend([w, u]);
        }
    }
    TrustGraph::from_edges(n, edges, random_halves(n, &rng.derive("groups")))
}

/// Within-group and across-group edge probabilities for an expected mean
/// degree `avg_degree` with two groups of `n/2`.
pub fn random_group_probabilities(n: usize, avg_degree: f64, ratio: f64) -> Result<(f64, f64)> {
    if n < 2 || !n.is_multiple_of(2) || !(avg_degree > 0.0) || !(ratio > 0.0) {
        return Err(Error::param(format!(
            "random-group generator needs even n >= 2 and positive degree and ratio (n={n}, degree={avg_degree}, ratio={ratio})"
        )));
    }
    let h = (n / 2) as f64;
    let p_d = avg_degree / ((h - 1.0) * ratio + h);
    let p_s = ratio * p_d;
    if p_s > 1.0 || p_d > 1.0 {
        return Err(Error::param(format!(
            "edge probabilities exceed 1 (within {p_s}, across {p_d})"
        )));
    }
    Ok((p_s, p_d))
}

/// Indices `< count` hit by independent coins of probability `p`, by
/// geometric skipping.
fn bernoulli_positions<R: Rng>(count: u64, p: f64, r: &mut R, mut hit: impl FnMut(u64)) {
    if p <= 0.0 || count == 0 {
        return;
    }
    if p >= 1.0 {
        (0..count).for_each(hit);
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut pos: u64 = 0;
    loop {
        let u: f64 = r.random();
        let skip = ((1.0 - u).ln() / log_q).floor();
        if skip >= (count - pos) as f64 {
            return;
        }
        pos += skip as u64;
        hit(pos);
        pos += 1;
        if pos >= count {
            return;
        }
    }
}

/// Row and column of linear index `l` in the strict upper triangle of an
/// `h × h` matrix, rows in order.
fn triangle_pair(l: u64, h: u64) -> (u64, u64) {
    // rows 0..i hold i*h - i*(i+1)/2 entries
    let mut lo = 0u64;
    let mut hi = h - 1;
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        let before = mid * h - mid * (mid + 1) / 2;
        if before <= l {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let i = lo;
    let before = i * h - i * (i + 1) / 2;
    (i, i + 1 + (l - before))
}

/// Two groups of `n/2`; each pair is an edge with probability `p_s` within a
/// group and `p_d = p_s / ratio` across, set for expected degree `avg_degree`.
pub fn gen_random_group(n: usize, avg_degree: f64, ratio: f64, rng: &RngHandle) -> Result<TrustGraph> {
    let (p_s, p_d) = random_group_probabilities(n, avg_degree, ratio)?;
    let h = n / 2;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng.derive("groups").rng());
    // positions 0..h are group 0, h..n group 1
    let mut groups = vec![0u32; n];
    for &u in &order[h..] {
        groups[u] = 1;
    }
    let hu = h as u64;
    let tri = hu * (hu - 1) / 2;
    let mut edges = Vec::new();
    for g in 0..2 {
        let mut r = rng.derive(format_args!("within/{g}")).rng();
        bernoulli_positions(tri, p_s, &mut r, |l| {
            let (i, j) = triangle_pair(l, hu);
            edges.push((order[g * h + i as usize], order[g * h + j as usize], 1.0));
        });
    }
    let mut r = rng.derive("across").rng();
    bernoulli_positions(hu * hu, p_d, &mut r, |l| {
        edges.push((order[(l / hu) as usize], order[h + (l % hu) as usize], 1.0));
    });
    TrustGraph::from_edges(n, edges, groups)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeometricParams {
    /// Length scale of `exp(-distance / decay)`.
    pub decay: f64,
    /// Multiplier on the connection weight of same-group pairs.
    pub mix: f64,
    /// Share of nodes in each group.
    pub proportions: Vec<f64>,
    pub avg_degree: f64,
}

impl Default for GeometricParams {
    fn default() -> Self {
        GeometricParams {
            decay: 0.1,
            mix: 2.0,
            proportions: vec![0.3, 0.7],
            avg_degree: 4.0,
        }
    }
}

/// Nodes uniform in the unit square; pair `(i, j)` is an edge with
/// probability `q·w·exp(-d/decay)`, `w = mix` within a group and 1 across,
/// with `q` set so the expected mean degree is `avg_degree`. Quadratic in `n`.
pub fn gen_geometric_group(n: usize, params: &GeometricParams, rng: &RngHandle) -> Result<TrustGraph> {
    let GeometricParams {
        decay,
        mix,
        ref proportions,
        avg_degree,
    } = *params;
    if !(decay > 0.0) || !(mix > 0.0) || !(avg_degree > 0.0) || n < 2 {
        return Err(Error::param(format!(
            "geometric generator needs n >= 2 and positive decay, mix and degree (n={n}, decay={decay}, mix={mix}, degree={avg_degree})"
        )));
    }
    let total: f64 = proportions.iter().sum();
    if proportions.is_empty() || proportions.iter().any(|&p| p < 0.0) || !(total > 0.0) {
        return Err(Error::param(
            "group proportions must be non-negative with a positive sum",
        ));
    }

    let mut r = rng.derive("layout").rng();
    let pos: Vec<(f64, f64)> = (0..n).map(|_| (r.random(), r.random())).collect();
    // largest-remainder split of n into groups, then a random labeling
    let mut sizes: Vec<usize> = proportions
        .iter()
        .map(|p| (p / total * n as f64).floor() as usize)
        .collect();
    let mut rest = n - sizes.iter().sum::<usize>();
    let mut by_rem: Vec<usize> = (0..sizes.len()).collect();
    by_rem.sort_by(|&a, &b| {
        let ra = proportions[a] / total * n as f64 - sizes[a] as f64;
        let rb = proportions[b] / total * n as f64 - sizes[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &g in by_rem.iter().cycle() {
        if rest == 0 {
            break;
        }
        sizes[g] += 1;
        rest -= 1;
    }
    let mut groups: Vec<u32> = sizes
        .iter()
        .enumerate()
        .flat_map(|(g, &s)| std::iter::repeat_n(g as u32, s))
        .collect();
    groups.shuffle(&mut rng.derive("groups").rng());

    let weight = |i: usize, j: usize| {
        let (dx, dy) = (pos[i].0 - pos[j].0, pos[i].1 - pos[j].1);
        let w = (-(dx * dx + dy * dy).sqrt() / decay).exp();
        if groups[i] == groups[j] {
            w * mix
        } else {
            w
        }
    };
    // row sums in parallel, total in a fixed order
    let row_sums: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| (i + 1..n).map(|j| weight(i, j)).sum::<f64>())
        .collect();
    let sum_w: f64 = row_sums.iter().sum();
    let q = avg_degree * n as f64 / (2.0 * sum_w);

    let edge_rng = rng.derive("edges");
    let rows: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut r = edge_rng.derive(i).rng();
            (i + 1..n).filter(|&j| r.random::<f64>() < q * weight(i, j)).collect()
        })
        .collect();
    let edges = rows
        .into_iter()
        .enumerate()
        .flat_map(|(i, row)| row.into_iter().map(move |j| (i, j, 1.0)));
    TrustGraph::from_edges(n, edges, groups)
}

/// How arc trusts are set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrustScenario {
    /// Every arc gets `a`.
    Homogeneous { a: f64 },
    /// Within-group arcs get `a + epsilon`; across-group arcs get the value
    /// that makes the mean exactly `a`.
    GroupVariable { a: f64, epsilon: f64 },
    /// Within-group trust uniform on `within`; across-group trust uniform on
    /// `a_low ± half_width` (clamped to `[0, 1]`), with `a_low` chosen so the
    /// expected mean is `mean`.
    Ranges {
        within: (f64, f64),
        half_width: f64,
        mean: f64,
    },
}

impl TrustScenario {
    pub fn name(&self) -> &'static str {
        match self {
            TrustScenario::Homogeneous { .. } => "homogeneous",
            TrustScenario::GroupVariable { .. } => "group_variable",
            TrustScenario::Ranges { .. } => "ranges",
        }
    }

    pub fn generalized() -> Self {
        TrustScenario::Ranges {
            within: (0.7, 0.8),
            half_width: 0.05,
            mean: 0.7,
        }
    }
}

/// Fraction of arcs whose endpoints share a group.
pub fn within_fraction(graph: &TrustGraph) -> f64 {
    let m = graph.arc_count();
    if m == 0 {
        return 0.0;
    }
    let within = graph
        .arcs()
        .iter()
        .filter(|a| graph.group(a.src.index()) == graph.group(a.dst.index()))
        .count();
    within as f64 / m as f64
}

/// Across-group trust `a_B = (a − f_A·(a+ε)) / (1 − f_A)`.
pub fn across_trust(a: f64, epsilon: f64, f_a: f64) -> Result<f64> {
    let value = (a - f_a * (a + epsilon)) / (1.0 - f_a);
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::UnsolvableTrust {
            value,
            within_fraction: f_a,
        })
    }
}

/// Copy of `graph` with trusts set by `scenario`. On symmetric graphs both
/// arcs of an edge get the same random draw.
pub fn assign_trust(graph: &TrustGraph, scenario: &TrustScenario, rng: &RngHandle) -> Result<TrustGraph> {
    let same = |a: &crate::graph::TrustArc| graph.group(a.src.index()) == graph.group(a.dst.index());
    match *scenario {
        TrustScenario::Homogeneous { a } => Ok(graph.map_trust(|_| a)),
        TrustScenario::GroupVariable { a, epsilon } => {
            if epsilon == 0.0 {
                return Ok(graph.map_trust(|_| a));
            }
            let f_a = within_fraction(graph);
            let a_b = if f_a < 1.0 { across_trust(a, epsilon, f_a)? } else { a };
            let a_a = a + epsilon;
            if !(0.0..=1.0).contains(&a_a) {
                return Err(Error::param(format!("within-group trust {a_a} outside [0, 1]")));
            }
            Ok(graph.map_trust(|arc| if same(arc) { a_a } else { a_b }))
        }
        TrustScenario::Ranges {
            within: (lo, hi),
            half_width,
            mean,
        } => {
            if !(0.0 <= lo && lo <= hi && hi <= 1.0) || half_width < 0.0 {
                return Err(Error::param(format!("bad within-group trust range [{lo}, {hi}]")));
            }
            let f_a = within_fraction(graph);
            let a_low = if f_a < 1.0 {
                across_trust(mean, 0.5 * (lo + hi) - mean, f_a)?
            } else {
                mean
            };
            let mut r = rng.rng();
            let mut draw = |arc: &crate::graph::TrustArc| {
                if same(arc) {
                    r.random_range(lo..=hi)
                } else {
                    r.random_range(a_low - half_width..=a_low + half_width).clamp(0.0, 1.0)
                }
            };
            if graph.is_symmetric() {
                let mut drawn: HashMap<(u32, u32), f64> = HashMap::with_capacity(graph.arc_count() / 2);
                for arc in graph.arcs() {
                    let key = (arc.src.0.min(arc.dst.0), arc.src.0.max(arc.dst.0));
                    drawn.entry(key).or_insert_with(|| draw(arc));
                }
                Ok(graph.map_trust(|arc| drawn[&(arc.src.0.min(arc.dst.0), arc.src.0.max(arc.dst.0))]))
            } else {
                Ok(graph.map_trust(|arc| draw(arc)))
            }
        }
    }
}

/// How node thresholds are set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThresholdSpec {
    Pair {
        t_low: f64,
        t_high: f64,
    },
    /// `t_l ~ U[low]`, `t_h ~ U[high]`, independently per node.
    Range {
        low: (f64, f64),
        high: (f64, f64),
    },
}

impl ThresholdSpec {
    pub fn generalized() -> Self {
        ThresholdSpec::Range {
            low: (0.1, 0.2),
            high: (0.5, 0.6),
        }
    }

    /// Mean `(t_l, t_h)`.
    pub fn means(&self) -> (f64, f64) {
        match *self {
            ThresholdSpec::Pair { t_low, t_high } => (t_low, t_high),
            ThresholdSpec::Range { low, high } => (0.5 * (low.0 + low.1), 0.5 * (high.0 + high.1)),
        }
    }
}

pub fn assign_thresholds(n: usize, spec: &ThresholdSpec, rng: &RngHandle) -> Result<Vec<NodeProfile>> {
    match *spec {
        ThresholdSpec::Pair { t_low, t_high } => {
            if !(t_low <= t_high) {
                return Err(Error::param(format!("t_l {t_low} exceeds t_h {t_high}")));
            }
            Ok(vec![NodeProfile::new(t_low, t_high); n])
        }
        ThresholdSpec::Range { low, high } => {
            if !(low.0 <= low.1 && high.0 <= high.1 && low.1 <= high.0) {
                return Err(Error::param(format!(
                    "threshold ranges [{}, {}] and [{}, {}] are not ordered",
                    low.0, low.1, high.0, high.1
                )));
            }
            let mut r = rng.rng();
            Ok((0..n)
                .map(|_| {
                    let tl = r.random_range(low.0..=low.1);
                    let th = r.random_range(high.0..=high.1);
                    NodeProfile::new(tl, th)
                })
                .collect())
        }
    }
}

/// Summary printed by `generate --stats`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub nodes: usize,
    pub arcs: usize,
    pub mean_degree: f64,
    pub degree_variance: f64,
    /// Fitted power-law exponent of the degree tail (negative), if any.
    pub tail_exponent: Option<f64>,
    pub tail_k_min: Option<usize>,
    pub within_fraction: f64,
    pub across_fraction: f64,
}

/// Discrete power-law fit: for each candidate `k_min`, the approximate MLE
/// `α = 1 + N / Σ ln(k / (k_min − ½))`; keeps the `k_min` whose fitted tail
/// has the smallest Kolmogorov-Smirnov distance to the data. Needs at
/// least 50 tail points. Returns `(α, k_min)`.
pub fn fit_power_law(degrees: &[usize]) -> Option<(f64, usize)> {
    let mut ks: Vec<usize> = degrees.iter().copied().filter(|&k| k > 0).collect();
    ks.sort_unstable();
    let mut candidates: Vec<usize> = ks.clone();
    candidates.dedup();
    let mut best: Option<(f64, f64, usize)> = None;
    for &k_min in &candidates {
        let start = ks.partition_point(|&k| k < k_min);
        let tail = &ks[start..];
        if tail.len() < 50 {
            break;
        }
        let s: f64 = tail.iter().map(|&k| (k as f64 / (k_min as f64 - 0.5)).ln()).sum();
        if s <= 0.0 {
            continue;
        }
        let alpha = 1.0 + tail.len() as f64 / s;
        // continuous-approximation CDF P(K < k) = 1 - ((k - ½)/(k_min - ½))^(1-α)
        let nt = tail.len() as f64;
        let mut d: f64 = 0.0;
        let mut i = 0;
        while i < tail.len() {
            let k = tail[i];
            let mut j = i;
            while j < tail.len() && tail[j] == k {
                j += 1;
            }
            let model = 1.0 - ((k as f64 + 0.5) / (k_min as f64 - 0.5)).powf(1.0 - alpha);
            d = d.max((j as f64 / nt - model).abs());
            i = j;
        }
        if best.is_none_or(|(bd, _, _)| d < bd) {
            best = Some((d, alpha, k_min));
        }
    }
    best.map(|(_, a, k)| (a, k))
}

pub fn graph_stats(graph: &TrustGraph) -> GraphStats {
    let n = graph.node_count();
    let degrees: Vec<usize> = (0..n).map(|u| graph.out_degree(u)).collect();
    let mean = degrees.iter().sum::<usize>() as f64 / n.max(1) as f64;
    let var = degrees.iter().map(|&d| (d as f64 - mean).powi(2)).sum::<f64>() / n.max(1) as f64;
    let fit = fit_power_law(&degrees);
    let within = within_fraction(graph);
    GraphStats {
        nodes: n,
        arcs: graph.arc_count(),
        mean_degree: mean,
        degree_variance: var,
        tail_exponent: fit.map(|(a, _)| -a),
        tail_k_min: fit.map(|(_, k)| k),
        within_fraction: within,
        across_fraction: if graph.arc_count() == 0 { 0.0 } else { 1.0 - within },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::validate_graph;

    #[test]
    fn small_scale_free_is_a_tree() {
        let g = gen_scale_free(4, 1, &RngHandle::new(0)).unwrap();
        assert_eq!(g.arc_count(), 6);
        assert!(validate_graph(&g).is_empty());
        assert_eq!(g.groups().iter().filter(|&&x| x == 0).count(), 2);
    }

    #[test]
    fn triangle_indexing() {
        let h = 5;
        let mut l = 0;
        for i in 0..h {
            for j in i + 1..h {
                assert_eq!(triangle_pair(l, h), (i, j));
                l += 1;
            }
        }
    }

    #[test]
    fn random_group_probabilities_formula() {
        let (p_s, p_d) = random_group_probabilities(10_000, 4.0, 2.0).unwrap();
        assert!((p_s - 2.0 * p_d).abs() < 1e-15);
        assert!((4999.0 * p_s + 5000.0 * p_d - 4.0).abs() < 1e-12);
        assert!(random_group_probabilities(4, 10.0, 2.0).is_err());
        assert!(random_group_probabilities(5, 1.0, 2.0).is_err());
    }

    #[test]
    fn generators_are_valid_and_reproducible() {
        let rng = RngHandle::new(11);
        let a = gen_random_group(400, 4.0, 2.0, &rng).unwrap();
        assert_eq!(a, gen_random_group(400, 4.0, 2.0, &rng).unwrap());
        assert!(validate_graph(&a).is_empty());
        let b = gen_scale_free(300, 2, &rng).unwrap();
        assert_eq!(b, gen_scale_free(300, 2, &rng).unwrap());
        assert!(validate_graph(&b).is_empty());
        let c = gen_geometric_group(300, &GeometricParams::default(), &rng).unwrap();
        assert_eq!(c, gen_geometric_group(300, &GeometricParams::default(), &rng).unwrap());
        assert!(validate_graph(&c).is_empty());
    }

    #[test]
    fn group_variable_closed_form() {
        assert!((across_trust(0.7, 0.05, 0.5).unwrap() - 0.65).abs() < 1e-12);
        assert!(matches!(
            across_trust(0.7, 0.3, 0.9),
            Err(Error::UnsolvableTrust { within_fraction, .. }) if within_fraction == 0.9
        ));
    }

    #[test]
    fn group_variable_mean_is_exact() {
        let g = gen_random_group(1000, 4.0, 2.0, &RngHandle::new(3)).unwrap();
        let t = assign_trust(
            &g,
            &TrustScenario::GroupVariable { a: 0.7, epsilon: 0.05 },
            &RngHandle::new(0),
        )
        .unwrap();
        assert!((t.mean_trust() - 0.7).abs() < 1e-12);
        let h = assign_trust(
            &g,
            &TrustScenario::GroupVariable { a: 0.7, epsilon: 0.0 },
            &RngHandle::new(0),
        )
        .unwrap();
        assert!(h.arcs().iter().all(|a| a.trust == 0.7));
    }

    #[test]
    fn ranges_are_symmetric_per_edge() {
        let g = gen_random_group(500, 4.0, 2.0, &RngHandle::new(3)).unwrap();
        let t = assign_trust(&g, &TrustScenario::generalized(), &RngHandle::new(1)).unwrap();
        assert!(validate_graph(&t).is_empty());
        for a in t.arcs() {
            let back = t.out_arcs(a.dst.index()).find(|&(w, _)| w == a.src.index()).unwrap();
            assert_eq!(back.1, a.trust);
        }
    }

    #[test]
    fn threshold_modes() {
        let p = assign_thresholds(
            5,
            &ThresholdSpec::Pair {
                t_low: 0.15,
                t_high: 0.55,
            },
            &RngHandle::new(0),
        )
        .unwrap();
        assert!(p.iter().all(|x| *x == NodeProfile::new(0.15, 0.55)));
        assert!(assign_thresholds(
            5,
            &ThresholdSpec::Pair {
                t_low: 0.4,
                t_high: 0.4
            },
            &RngHandle::new(0)
        )
        .is_ok());
        assert!(assign_thresholds(
            5,
            &ThresholdSpec::Pair {
                t_low: 0.5,
                t_high: 0.4
            },
            &RngHandle::new(0)
        )
        .is_err());
        let bad = ThresholdSpec::Range {
            low: (0.1, 0.6),
            high: (0.5, 0.6),
        };
        assert!(assign_thresholds(5, &bad, &RngHandle::new(0)).is_err());
    }

    #[test]
    fn power_law_fit_on_exact_tail() {
        // degrees with P(k) ∝ k^-3 for k ≥ 3
        let mut degrees = Vec::new();
        for k in 3..400usize {
            let count = (2.0e6 * (k as f64).powf(-3.0)).round() as usize;
            degrees.extend(std::iter::repeat_n(k, count));
        }
        let (alpha, _) = fit_power_law(&degrees).unwrap();
        assert!((alpha - 3.0).abs() < 0.2, "alpha {alpha}");
    }
}
