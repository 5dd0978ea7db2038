//! `dim`, `d`, `d_*` and `d~` with witnesses.

use serde::{Deserialize, Serialize};

use super::{extend_span, span_bits};
use crate::bitset::Bitset;
use crate::group::GroupSpec;
use crate::set::GSet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionConfig {
    /// Largest `|A|` searched exactly; larger sets get greedy, inexact values.
    pub exact_cap: usize,
    /// Node budget per search.
    pub node_budget: u64,
    /// Largest group over which `d_*` candidates are enumerated.
    pub d_star_group_cap: usize,
    /// Deepest level tried for `d_*`.
    pub d_star_max_m: usize,
}

impl Default for DimensionConfig {
    fn default() -> Self {
        Self { exact_cap: 24, node_budget: 5_000_000, d_star_group_cap: 4096, d_star_max_m: 4 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionValue {
    pub value: usize,
    /// Ranks of the witness subset.
    pub witness: Vec<usize>,
    pub exact: bool,
}

/// `d_*` lies in `[lower, value]`; `exact` iff the two agree by search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DStarValue {
    pub value: usize,
    pub lower: usize,
    pub witness: Vec<usize>,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub size: usize,
    pub dim: DimensionValue,
    pub d: DimensionValue,
    pub d_star: DStarValue,
    pub d_tilde: DimensionValue,
}

impl DimensionReport {
    pub fn all_exact(&self) -> bool {
        self.dim.exact && self.d.exact && self.d_star.exact && self.d_tilde.exact
    }

    /// `d_* <= d <= d~ <= dim`.
    pub fn chain_holds(&self) -> bool {
        self.d_star.value <= self.d.value && self.d.value <= self.d_tilde.value && self.d_tilde.value <= self.dim.value
    }

    /// `2^dim <= (2 dim + 1)^{d_*}`, in logarithms.
    pub fn spanning_bound_holds(&self) -> bool {
        let dim = self.dim.value as f64;
        dim * 2f64.ln() <= self.d_star.value as f64 * (2.0 * dim + 1.0).ln() + 1e-9
    }

    /// Re-checks every witness against `a` from scratch.
    pub fn witnesses_valid(&self, a: &GSet) -> bool {
        let g = a.group();
        let in_a = |w: &[usize]| w.iter().all(|&x| a.contains(x));
        let spans_a = |w: &[usize]| {
            let s = span_bits(g, w);
            a.iter().all(|x| s.get(x))
        };
        let dissociated = |w: &[usize]| {
            GSet::from_ranks(g, w.iter().copied())
                .ok()
                .and_then(|s| super::is_dissociated(&s).ok())
                .is_some_and(|c| c.is_dissociated())
        };
        self.dim.witness.len() == self.dim.value
            && in_a(&self.dim.witness)
            && dissociated(&self.dim.witness)
            && self.d.witness.len() == self.d.value
            && in_a(&self.d.witness)
            && spans_a(&self.d.witness)
            && self.d_tilde.witness.len() == self.d_tilde.value
            && in_a(&self.d_tilde.witness)
            && dissociated(&self.d_tilde.witness)
            && spans_a(&self.d_tilde.witness)
            && self.d_star.witness.len() == self.d_star.value
            && spans_a(&self.d_star.witness)
            && self.d_star.lower <= self.d_star.value
    }
}

pub fn dimension_profile(a: &GSet) -> DimensionReport {
    dimension_profile_with(a, &DimensionConfig::default())
}

pub fn dimension_profile_with(a: &GSet, cfg: &DimensionConfig) -> DimensionReport {
    let g = a.group();
    let cands: Vec<usize> = order_by_relation_degree(a);
    let log2_cap = log2_floor(g.order());
    let mut targets: Vec<usize> = a.iter().filter(|&x| x != g.zero()).collect();
    targets.sort_unstable();
    let mut lower = log3_lower(a.len() + usize::from(!a.contains(g.zero())));
    if g.is_binary() {
        lower = lower.max(binary_rank(a.elements()));
    }

    let exact_search = a.len() <= cfg.exact_cap;
    let (dim_wit, dim_exact) = if exact_search {
        max_dissociated(g, &cands, log2_cap, cfg.node_budget)
    } else {
        (greedy_maximal(g, &cands, &[]), false)
    };
    // A maximum dissociated subset is maximal, so it spans A; a budget-cut one is extended until it does.
    let maximal = greedy_maximal(g, &cands, &dim_wit);
    let dim = DimensionValue { value: dim_wit.len(), witness: sorted(dim_wit), exact: dim_exact };

    let (d, d_tilde) = if exact_search {
        let d = min_spanning(g, &targets, &cands, lower, maximal.len(), false, cfg.node_budget)
            .unwrap_or((maximal.clone(), false));
        let dt = min_spanning(g, &targets, &cands, lower, maximal.len(), true, cfg.node_budget)
            .unwrap_or((maximal.clone(), false));
        (d, dt)
    } else {
        ((maximal.clone(), false), (maximal.clone(), false))
    };
    let d = DimensionValue { value: d.0.len(), witness: sorted(d.0), exact: d.1 };
    let d_tilde = DimensionValue { value: d_tilde.0.len(), witness: sorted(d_tilde.0), exact: d_tilde.1 };

    let d_star = d_star_search(g, &targets, &d, lower, cfg);
    DimensionReport { size: a.len(), dim, d, d_star, d_tilde }
}

/// `dim(A)` alone, without the spanning searches.
pub fn additive_dimension(a: &GSet, cfg: &DimensionConfig) -> DimensionValue {
    let g = a.group();
    let cands = order_by_relation_degree(a);
    let (wit, exact) = if a.len() <= cfg.exact_cap {
        max_dissociated(g, &cands, log2_floor(g.order()), cfg.node_budget)
    } else {
        (greedy_maximal(g, &cands, &[]), false)
    };
    DimensionValue { value: wit.len(), witness: sorted(wit), exact }
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

pub(crate) fn log2_floor(n: usize) -> usize {
    (usize::BITS - 1 - n.leading_zeros()) as usize
}

/// Least `m` with `3^m >= n`.
fn log3_lower(n: usize) -> usize {
    let mut m = 0;
    let mut p = 1usize;
    while p < n {
        p = p.saturating_mul(3);
        m += 1;
    }
    m
}

/// Rank over `F_2` of the ranks read as bit vectors; every span in `F_2^n` lies in the linear span.
fn binary_rank(xs: &[usize]) -> usize {
    let mut basis: Vec<usize> = Vec::new();
    for &x in xs {
        let r = basis.iter().fold(x, |v, &b| v.min(v ^ b));
        if r != 0 {
            basis.push(r);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}

/// Nonzero elements of `a`, most relations first, ties by rank.
fn order_by_relation_degree(a: &GSet) -> Vec<usize> {
    let mut cands: Vec<usize> = a.iter().filter(|&x| x != a.group().zero()).collect();
    let deg = relation_degrees(a, &cands);
    let mut idx: Vec<usize> = (0..cands.len()).collect();
    idx.sort_by_key(|&i| (std::cmp::Reverse(deg[i]), cands[i]));
    cands = idx.into_iter().map(|i| cands[i]).collect();
    cands
}

/// For each candidate, the number of relations `±x ± y (± z) = 0` it takes part in
/// with other candidates.
pub(crate) fn relation_degrees(a: &GSet, cands: &[usize]) -> Vec<u64> {
    let g = a.group();
    let idx_of: std::collections::HashMap<usize, usize> =
        cands.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let mut deg = vec![0u64; cands.len()];
    for i in 0..cands.len() {
        for j in i + 1..cands.len() {
            let (x, y) = (cands[i], cands[j]);
            if g.add(x, y) == g.zero() {
                deg[i] += 1;
                deg[j] += 1;
            }
            let mut thirds = vec![g.add(x, y), g.sub(x, y), g.sub(y, x), g.neg(g.add(x, y))];
            thirds.sort_unstable();
            thirds.dedup();
            for z in thirds {
                // Each triple is seen from all three of its pairs; count it from the pair of smallest indices.
                if let Some(&k) = idx_of.get(&z) {
                    if k > j {
                        deg[i] += 1;
                        deg[j] += 1;
                        deg[k] += 1;
                    }
                }
            }
        }
    }
    deg
}

struct Budget {
    left: u64,
    exhausted: bool,
}

impl Budget {
    fn new(n: u64) -> Self {
        Self { left: n, exhausted: false }
    }

    fn tick(&mut self) -> bool {
        if self.left == 0 {
            self.exhausted = true;
            return false;
        }
        self.left -= 1;
        true
    }
}

/// Extends `start` greedily along `cands` to a maximal dissociated subset.
pub(crate) fn greedy_maximal(g: &GroupSpec, cands: &[usize], start: &[usize]) -> Vec<usize> {
    let mut span = span_bits(g, start);
    let mut out = start.to_vec();
    for &x in cands {
        if !span.get(x) {
            span = extend_span(g, &span, x);
            out.push(x);
        }
    }
    out
}

/// Branch and bound for a largest dissociated subset of `cands`, at most `cap` elements.
fn max_dissociated(g: &GroupSpec, cands: &[usize], cap: usize, budget: u64) -> (Vec<usize>, bool) {
    struct St<'a> {
        g: &'a GroupSpec,
        cands: &'a [usize],
        cap: usize,
        best: Vec<usize>,
        chosen: Vec<usize>,
        budget: Budget,
    }
    fn rec(st: &mut St, idx: usize, span: &Bitset) {
        if !st.budget.tick() {
            return;
        }
        if st.chosen.len() > st.best.len() {
            st.best = st.chosen.clone();
        }
        if st.best.len() >= st.cap {
            return;
        }
        let free: Vec<usize> = (idx..st.cands.len()).filter(|&i| !span.get(st.cands[i])).collect();
        for (k, &i) in free.iter().enumerate() {
            if st.chosen.len() + free.len() - k <= st.best.len() || st.best.len() >= st.cap {
                return;
            }
            let x = st.cands[i];
            st.chosen.push(x);
            let next = extend_span(st.g, span, x);
            rec(st, i + 1, &next);
            st.chosen.pop();
            if st.budget.exhausted {
                return;
            }
        }
    }
    let cap = cap.min(cands.len());
    let mut st = St {
        g,
        cands,
        cap,
        best: greedy_maximal(g, cands, &[]),
        chosen: Vec::new(),
        budget: Budget::new(budget),
    };
    if st.best.len() < cap {
        let span = span_bits(g, &[]);
        rec(&mut st, 0, &span);
    }
    let exact = !st.budget.exhausted;
    (st.best, exact)
}

/// Smallest `S ⊆ cands` with every target in `Span(S)`, trying sizes `lo..=hi`.
///
/// With `dissociated`, `S` must itself be dissociated. Returns `None` when the
/// budget ran out before an answer was certified, and `Some((S, true))` for a
/// proven minimum. Sizes beyond `hi` are not tried.
fn min_spanning(
    g: &GroupSpec,
    targets: &[usize],
    cands: &[usize],
    lo: usize,
    hi: usize,
    dissociated: bool,
    budget: u64,
) -> Option<(Vec<usize>, bool)> {
    let mut b = Budget::new(budget);
    let growth = if g.exponent() <= 2 { 2usize } else { 3 };
    for m in lo..=hi {
        let mut chosen = Vec::with_capacity(m);
        let span = span_bits(g, &[]);
        if cover_rec(g, targets, cands, m, 0, &span, dissociated, growth, &mut chosen, &mut b) {
            return Some((chosen, true));
        }
        if b.exhausted {
            return None;
        }
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn cover_rec(
    g: &GroupSpec,
    targets: &[usize],
    cands: &[usize],
    left: usize,
    start: usize,
    span: &Bitset,
    dissociated: bool,
    growth: usize,
    chosen: &mut Vec<usize>,
    b: &mut Budget,
) -> bool {
    if !b.tick() {
        return false;
    }
    let Some(u) = targets.iter().copied().find(|&t| !span.get(t)) else {
        return true;
    };
    if left == 0 {
        return false;
    }
    let uncovered = targets.iter().filter(|&&t| !span.get(t)).count();
    let have = span.count();
    if uncovered > have.saturating_mul(growth.saturating_pow(left as u32) - 1) {
        return false;
    }
    for i in start..cands.len() {
        let x = cands[i];
        if dissociated && span.get(x) {
            continue;
        }
        // The last pick must reach the first uncovered target: u ∈ S + x or u ∈ S - x.
        if left == 1 && !span.get(g.sub(u, x)) && !span.get(g.add(u, x)) {
            continue;
        }
        let next = extend_span(g, span, x);
        chosen.push(x);
        if cover_rec(g, targets, cands, left - 1, i + 1, &next, dissociated, growth, chosen, b) {
            return true;
        }
        chosen.pop();
        if b.exhausted {
            return false;
        }
    }
    false
}

fn d_star_search(g: &GroupSpec, targets: &[usize], d: &DimensionValue, lower: usize, cfg: &DimensionConfig) -> DStarValue {
    let upper = DStarValue { value: d.value, lower: lower.min(d.value), witness: d.witness.clone(), exact: false };
    if d.value <= lower {
        return DStarValue { exact: true, ..upper };
    }
    if g.order() > cfg.d_star_group_cap {
        return upper;
    }
    // x and -x contribute the same span, so one representative of each pair suffices.
    let reps: Vec<usize> = (1..g.order()).filter(|&x| x <= g.neg(x)).collect();
    let top = (d.value - 1).min(cfg.d_star_max_m);
    let mut b = Budget::new(cfg.node_budget);
    let growth = if g.exponent() <= 2 { 2usize } else { 3 };
    for m in lower..=top {
        let mut chosen = Vec::with_capacity(m);
        let span = span_bits(g, &[]);
        if cover_rec(g, targets, &reps, m, 0, &span, false, growth, &mut chosen, &mut b) {
            return DStarValue { value: m, lower: m, witness: sorted(chosen), exact: true };
        }
        if b.exhausted {
            return DStarValue { lower: m, ..upper };
        }
    }
    if top + 1 == d.value {
        DStarValue { lower: d.value, exact: true, ..upper }
    } else {
        DStarValue { lower: top + 1, ..upper }
    }
}
