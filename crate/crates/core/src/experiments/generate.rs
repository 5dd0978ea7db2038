//! Seeded set generators.

use std::collections::{BTreeMap, HashSet};

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dissociation::{is_dissociated, span_of};
use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::set::GSet;

/// An element given either as an integer (cyclic groups) or as coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElementSpec {
    Int(i64),
    Coords(Vec<usize>),
}

impl ElementSpec {
    pub fn resolve(&self, g: &GroupSpec) -> Result<usize> {
        match self {
            ElementSpec::Int(v) => g.from_integer(*v),
            ElementSpec::Coords(c) => g.rank_of(c),
        }
    }
}

/// `{a_0 + sum a_j x_j : 0 <= x_j < l_j}`, optionally plus a subgroup `H`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProgressionSpec {
    pub base: usize,
    pub steps: Vec<usize>,
    pub lengths: Vec<usize>,
    pub subgroup: Option<GSet>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Progression {
    pub set: GSet,
    /// All `prod l_j` sums are distinct and, with `H`, the sum with `H` is direct.
    pub proper: bool,
}

impl ProgressionSpec {
    pub fn build(&self, g: &GroupSpec) -> Result<Progression> {
        if self.steps.len() != self.lengths.len() || self.steps.is_empty() {
            return Err(Error::InvalidArgument("progression needs one length per step and d >= 1".into()));
        }
        if let Some(&bad) = self.lengths.iter().find(|&&l| l == 0) {
            return Err(Error::InvalidArgument(format!("progression length {bad} must be positive")));
        }
        let h_len = self.subgroup.as_ref().map_or(1, GSet::len);
        let total = self.lengths.iter().try_fold(h_len as u128, |acc, &l| acc.checked_mul(l as u128));
        if total.is_none_or(|t| t > g.order() as u128) {
            return Err(Error::InvalidArgument(format!(
                "progression of {} terms (times |H| = {h_len}) exceeds the group order {}",
                self.lengths.iter().map(|&l| l as u128).product::<u128>(),
                g.order()
            )));
        }
        let mut sums = vec![self.base];
        for (&a, &l) in self.steps.iter().zip(&self.lengths) {
            let mut next = Vec::with_capacity(sums.len() * l);
            for &s in &sums {
                let mut x = s;
                for _ in 0..l {
                    next.push(x);
                    x = g.add(x, a);
                }
            }
            sums = next;
        }
        let q = GSet::from_ranks(g, sums.iter().copied())?;
        let mut proper = q.len() == sums.len();
        let set = match &self.subgroup {
            Some(h) => {
                let qh = q.sumset(h)?;
                proper &= qh.len() == q.len() * h.len();
                qh
            }
            None => q,
        };
        Ok(Progression { set, proper })
    }
}

/// Generator descriptor; serialized as `{"kind": "...", ...}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GenSpec {
    RandomSubset { group: GroupSpec, size: usize },
    ArithmeticProgression { group: GroupSpec, start: ElementSpec, step: ElementSpec, length: usize },
    GeneralizedAp { group: GroupSpec, base: ElementSpec, steps: Vec<ElementSpec>, lengths: Vec<usize> },
    CosetProgression {
        group: GroupSpec,
        base: ElementSpec,
        steps: Vec<ElementSpec>,
        lengths: Vec<usize>,
        /// Generators of `H`.
        subgroup: Vec<ElementSpec>,
    },
    /// A random `k`-dimensional subspace of `F_2^n`.
    Subspace { n: usize, k: usize },
    /// `H ∪ Λ` in `F_2^n` with `dim H = k` and `|Λ| = lambda`.
    SubspacePlusDissociated {
        n: usize,
        k: usize,
        lambda: usize,
        /// Keep `Λ` independent of `H`, so that `Λ ∩ H = ∅`. Otherwise `Λ` is any dissociated set.
        #[serde(default = "yes")]
        independent: bool,
    },
    /// Closed under negation, of exactly `size` elements.
    SymmetricRandom { group: GroupSpec, size: usize },
    /// A random dissociated set, grown greedily outside the current span.
    Dissociated { group: GroupSpec, size: usize },
}

fn yes() -> bool {
    true
}

/// A generated set with any verified side facts.
#[derive(Clone, Debug, PartialEq)]
pub struct Generated {
    pub set: GSet,
    /// Set for progression kinds.
    pub proper: Option<bool>,
    /// Named constituents, e.g. `H` and `Lambda`.
    pub parts: BTreeMap<String, GSet>,
}

impl Generated {
    fn plain(set: GSet) -> Self {
        Self { set, proper: None, parts: BTreeMap::new() }
    }
}

impl GenSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            GenSpec::RandomSubset { .. } => "random-subset",
            GenSpec::ArithmeticProgression { .. } => "arithmetic-progression",
            GenSpec::GeneralizedAp { .. } => "generalized-ap",
            GenSpec::CosetProgression { .. } => "coset-progression",
            GenSpec::Subspace { .. } => "subspace",
            GenSpec::SubspacePlusDissociated { .. } => "subspace-plus-dissociated",
            GenSpec::SymmetricRandom { .. } => "symmetric-random",
            GenSpec::Dissociated { .. } => "dissociated",
        }
    }

    /// The ambient group.
    pub fn group(&self) -> Result<GroupSpec> {
        match self {
            GenSpec::RandomSubset { group, .. }
            | GenSpec::ArithmeticProgression { group, .. }
            | GenSpec::GeneralizedAp { group, .. }
            | GenSpec::CosetProgression { group, .. }
            | GenSpec::SymmetricRandom { group, .. }
            | GenSpec::Dissociated { group, .. } => Ok(group.clone()),
            GenSpec::Subspace { n, .. } | GenSpec::SubspacePlusDissociated { n, .. } => GroupSpec::binary(*n),
        }
    }
}

/// Deterministic in `(spec, seed)`.
pub fn generate(spec: &GenSpec, seed: u64) -> Result<Generated> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = spec.group()?;
    let too_big = |what: &str, size: usize, room: usize| {
        Err(Error::InvalidArgument(format!("{what} of size {size} does not fit (at most {room})")))
    };
    match spec {
        GenSpec::RandomSubset { size, .. } => {
            if *size > g.order() {
                return too_big("random subset", *size, g.order());
            }
            let ranks = index::sample(&mut rng, g.order(), *size).into_vec();
            Ok(Generated::plain(GSet::from_ranks(&g, ranks)?))
        }
        GenSpec::ArithmeticProgression { start, step, length, .. } => {
            let p = ProgressionSpec {
                base: start.resolve(&g)?,
                steps: vec![step.resolve(&g)?],
                lengths: vec![*length],
                subgroup: None,
            };
            progression(&g, &p)
        }
        GenSpec::GeneralizedAp { base, steps, lengths, .. } => {
            let p = ProgressionSpec {
                base: base.resolve(&g)?,
                steps: steps.iter().map(|s| s.resolve(&g)).collect::<Result<_>>()?,
                lengths: lengths.clone(),
                subgroup: None,
            };
            progression(&g, &p)
        }
        GenSpec::CosetProgression { base, steps, lengths, subgroup, .. } => {
            let gens: Vec<usize> = subgroup.iter().map(|s| s.resolve(&g)).collect::<Result<_>>()?;
            let h = GSet::subgroup_generated(&g, &gens)?;
            let p = ProgressionSpec {
                base: base.resolve(&g)?,
                steps: steps.iter().map(|s| s.resolve(&g)).collect::<Result<_>>()?,
                lengths: lengths.clone(),
                subgroup: Some(h.clone()),
            };
            let mut out = progression(&g, &p)?;
            out.parts.insert("H".into(), h);
            Ok(out)
        }
        GenSpec::Subspace { n, k } => {
            if k > n {
                return too_big("subspace dimension", *k, *n);
            }
            let (h, _) = random_subspace(&g, *k, &GSet::from_ranks(&g, [0])?, &mut rng)?;
            Ok(Generated::plain(h))
        }
        GenSpec::SubspacePlusDissociated { n, k, lambda, independent } => {
            let zero = GSet::from_ranks(&g, [0])?;
            let (h, _) = random_subspace(&g, *k, &zero, &mut rng)?;
            let lam = if *independent {
                if k + lambda > *n {
                    return too_big("independent H-basis plus Lambda", k + lambda, *n);
                }
                // Independent modulo H: each new vector avoids the subspace spanned so far.
                let (_, basis) = random_subspace(&g, *lambda, &h, &mut rng)?;
                GSet::from_ranks(&g, basis)?
            } else {
                random_dissociated(&g, *lambda, &mut rng)?
            };
            if !is_dissociated(&lam)?.is_dissociated() {
                return Err(Error::Precondition("generated Lambda is not dissociated".into()));
            }
            let set = h.union(&lam)?;
            let parts = BTreeMap::from([("H".to_string(), h), ("Lambda".to_string(), lam)]);
            Ok(Generated { set, proper: None, parts })
        }
        GenSpec::SymmetricRandom { size, .. } => {
            let mut seen = HashSet::new();
            let (mut singles, mut pairs) = (Vec::new(), Vec::new());
            for x in 0..g.order() {
                if seen.insert(x) {
                    let y = g.neg(x);
                    seen.insert(y);
                    if y == x {
                        singles.push(x);
                    } else {
                        pairs.push([x, y]);
                    }
                }
            }
            singles.shuffle(&mut rng);
            pairs.shuffle(&mut rng);
            // Fewest self-inverse elements with the right parity, more only if the pairs run out.
            let mut s = size % 2;
            while (size - s.min(*size)) / 2 > pairs.len() {
                s += 2;
            }
            if s > singles.len() || s > *size {
                return Err(Error::InvalidArgument(format!(
                    "no symmetric set of size {size} in {g} ({} self-inverse elements, {} pairs)",
                    singles.len(),
                    pairs.len()
                )));
            }
            let mut ranks: Vec<usize> = singles[..s].to_vec();
            ranks.extend(pairs[..(size - s) / 2].iter().flatten());
            Ok(Generated::plain(GSet::from_ranks(&g, ranks)?))
        }
        GenSpec::Dissociated { size, .. } => Ok(Generated::plain(random_dissociated(&g, *size, &mut rng)?)),
    }
}

fn progression(g: &GroupSpec, p: &ProgressionSpec) -> Result<Generated> {
    let built = p.build(g)?;
    Ok(Generated { set: built.set, proper: Some(built.proper), parts: BTreeMap::new() })
}

/// `span(base ∪ basis)` for `count` random vectors independent modulo the subgroup `base`.
fn random_subspace(g: &GroupSpec, count: usize, base: &GSet, rng: &mut ChaCha8Rng) -> Result<(GSet, Vec<usize>)> {
    let mut h = base.clone();
    let mut basis = Vec::with_capacity(count);
    for _ in 0..count {
        if h.len() == g.order() {
            return Err(Error::InvalidArgument("the ambient space has no room for another direction".into()));
        }
        let x = loop {
            let x = rng.gen_range(0..g.order());
            if !h.contains(x) {
                break x;
            }
        };
        basis.push(x);
        h = h.union(&h.translate(x))?;
    }
    Ok((h, basis))
}

fn random_dissociated(g: &GroupSpec, size: usize, rng: &mut ChaCha8Rng) -> Result<GSet> {
    let mut order: Vec<usize> = (0..g.order()).filter(|&x| x != g.zero()).collect();
    order.shuffle(rng);
    let mut chosen: Vec<usize> = Vec::with_capacity(size);
    let mut span = span_of(g, &[]);
    for x in order {
        if chosen.len() == size {
            break;
        }
        if !span.contains(x) {
            chosen.push(x);
            span = span_of(g, &chosen);
        }
    }
    if chosen.len() < size {
        return Err(Error::InvalidArgument(format!(
            "greedy growth stalled at {} dissociated elements, {size} requested",
            chosen.len()
        )));
    }
    GSet::from_ranks(g, chosen)
}
