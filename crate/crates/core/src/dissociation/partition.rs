//! Peeling dissociated blocks of a fixed size off a set.

use serde::{Deserialize, Serialize};

use super::dimension::{log2_floor, relation_degrees};
use super::{extend_span, span_bits};
use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::set::GSet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionConfig {
    /// Nodes per block search before falling back.
    pub node_budget: u64,
    /// Remainders at most this large are searched to completion when the budget runs out.
    pub exhaustive_cap: usize,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        Self { node_budget: 200_000, exhaustive_cap: 24 }
    }
}

/// How the final "no block of size l remains" claim was established.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certification {
    /// `l` exceeds the nonzero part of the remainder or `log2 |G|`.
    Trivial,
    /// The budgeted search finished without finding a block.
    Search,
    /// The budget ran out and an unbudgeted search over the remainder confirmed it.
    Exhaustive,
    /// The budget ran out on a remainder too large to confirm.
    Heuristic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionResult {
    pub structured: GSet,
    pub blocks: Vec<GSet>,
    pub l: usize,
    pub certification: Certification,
}

impl PartitionResult {
    pub fn is_certified(&self) -> bool {
        self.certification != Certification::Heuristic
    }

    /// Disjointness, cover, block sizes and block dissociativity against `q`.
    pub fn verify(&self, q: &GSet) -> bool {
        let mut seen = self.structured.clone();
        let mut total = self.structured.len();
        for b in &self.blocks {
            let ok = b.len() == self.l
                && super::is_dissociated(b).is_ok_and(|c| c.is_dissociated())
                && seen.intersection(b).is_ok_and(|i| i.is_empty());
            if !ok {
                return false;
            }
            total += b.len();
            seen = seen.union(b).expect("same group");
        }
        total == q.len() && seen == *q
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(Vec<usize>),
    /// Proven absent.
    None,
    /// The node budget ran out first.
    Exhausted,
}

/// Looks for a dissociated subset of `set` of exactly `l` elements.
///
/// Elements with fewer short relations are tried first, so the first descent
/// is the usual greedy growth; backtracking continues until `budget` nodes.
pub fn find_dissociated_subset(set: &GSet, l: usize, budget: Option<u64>) -> SearchOutcome {
    let g = set.group();
    let mut cands: Vec<usize> = set.iter().filter(|&x| x != g.zero()).collect();
    if l == 0 {
        return SearchOutcome::Found(Vec::new());
    }
    if l > cands.len() || l > log2_floor(g.order()) {
        return SearchOutcome::None;
    }
    let deg = relation_degrees(set, &cands);
    let mut idx: Vec<usize> = (0..cands.len()).collect();
    idx.sort_by_key(|&i| (deg[i], cands[i]));
    cands = idx.into_iter().map(|i| cands[i]).collect();

    struct St<'a> {
        g: &'a GroupSpec,
        cands: &'a [usize],
        l: usize,
        chosen: Vec<usize>,
        left: Option<u64>,
        exhausted: bool,
    }
    fn rec(st: &mut St, idx: usize, span: &Bitset) -> bool {
        if let Some(left) = st.left.as_mut() {
            if *left == 0 {
                st.exhausted = true;
                return false;
            }
            *left -= 1;
        }
        if st.chosen.len() == st.l {
            return true;
        }
        let free: Vec<usize> = (idx..st.cands.len()).filter(|&i| !span.get(st.cands[i])).collect();
        let need = st.l - st.chosen.len();
        for (k, &i) in free.iter().enumerate() {
            if free.len() - k < need {
                return false;
            }
            let x = st.cands[i];
            st.chosen.push(x);
            if rec(st, i + 1, &extend_span(st.g, span, x)) {
                return true;
            }
            st.chosen.pop();
            if st.exhausted {
                return false;
            }
        }
        false
    }
    let mut st = St { g, cands: &cands, l, chosen: Vec::new(), left: budget, exhausted: false };
    if rec(&mut st, 0, &span_bits(g, &[])) {
        let mut found = st.chosen;
        found.sort_unstable();
        SearchOutcome::Found(found)
    } else if st.exhausted {
        SearchOutcome::Exhausted
    } else {
        SearchOutcome::None
    }
}

pub fn partition_str_diss(q: &GSet, l: usize) -> Result<PartitionResult> {
    partition_str_diss_with(q, l, &PartitionConfig::default())
}

/// Repeatedly removes dissociated blocks of size `l` until none is left.
pub fn partition_str_diss_with(q: &GSet, l: usize, cfg: &PartitionConfig) -> Result<PartitionResult> {
    if l == 0 {
        return Err(Error::InvalidArgument("block size l must be at least 1".into()));
    }
    let g = q.group();
    let mut rest = q.clone();
    let mut blocks = Vec::new();
    let certification = loop {
        let nonzero = rest.len() - usize::from(rest.contains(g.zero()));
        if l > nonzero || l > log2_floor(g.order()) {
            break Certification::Trivial;
        }
        let outcome = match find_dissociated_subset(&rest, l, Some(cfg.node_budget)) {
            SearchOutcome::Exhausted if rest.len() <= cfg.exhaustive_cap => {
                match find_dissociated_subset(&rest, l, None) {
                    SearchOutcome::None => Err(Certification::Exhaustive),
                    other => Ok(other),
                }
            }
            SearchOutcome::Exhausted => Err(Certification::Heuristic),
            SearchOutcome::None => Err(Certification::Search),
            found => Ok(found),
        };
        match outcome {
            Ok(SearchOutcome::Found(block)) => {
                let block = GSet::from_ranks(g, block)?;
                rest = rest.difference(&block)?;
                blocks.push(block);
            }
            Ok(_) => unreachable!("unbudgeted search always decides"),
            Err(c) => break c,
        }
    };
    Ok(PartitionResult { structured: rest, blocks, l, certification })
}
