//! Covering lemmas: Chang, Ruzsa and the Petridis form of Plünnecke.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::bitset::Bitset;
use crate::dissociation::translate_or;
use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::set::GSet;

/// Petridis search is exhaustive up to this many elements.
pub const PETRIDIS_EXHAUSTIVE_CAP: usize = 18;

#[derive(Clone, Debug, PartialEq)]
pub struct CoverResult {
    pub sets: Vec<GSet>,
    /// Every element of `A` lies in the claimed cover.
    pub contained: bool,
    /// The stated size and count bounds hold.
    pub bounds_ok: bool,
    pub components: BTreeMap<String, f64>,
}

/// Greedy packing: elements `s` of `pool`, in rank order, whose translates `s + base` avoid
/// the translates already taken. Returns the chosen elements and the union of translates.
fn pack(pool: &[usize], base: &GSet) -> Vec<usize> {
    let g = base.group();
    let mut used = Bitset::new(g.order());
    let mut chosen = Vec::new();
    for &s in pool {
        if base.iter().all(|b| !used.get(g.add(s, b))) {
            for b in base.iter() {
                used.set(g.add(s, b));
            }
            chosen.push(s);
        }
    }
    chosen
}

/// Sets `S_1, ..., S_l` with `A ⊆ B - B + (S_1 - S_1) + ... + (S_l - S_l)`.
///
/// With `B_0 = B`, step `i` greedily packs the part of `A` outside `B_{i-1} - B_{i-1}`
/// by disjoint translates of `B_{i-1}`; maximality covers that part by
/// `S + B_{i-1} - B_{i-1}`. If `|S| + 1 <= 2K` then `S_i = S ∪ {0}` closes the cover;
/// otherwise `S_i` is `{0}` with the first `floor(2K) - 1` packed elements,
/// `B_i = B_{i-1} + S_i` grows by a factor `|S_i|`, and the step repeats.
/// Checked bounds: `|S_i| <= 2K`, `l <= log2(2KL)`.
pub fn chang_cover(a: &GSet, b: &GSet) -> Result<CoverResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    a.group().check_same(b.group())?;
    let g = a.group();
    let k = a.sumset(a)?.len() as f64 / a.len() as f64;
    let l_ratio = a.sumset(b)?.len() as f64 / b.len() as f64;
    let m = ((2.0 * k).floor() as usize).max(2);
    let zero = GSet::from_ranks(g, [g.zero()])?;
    let mut sets = Vec::new();
    let mut base = b.clone();
    loop {
        let diff = base.difference_set(&base)?;
        let pool: Vec<usize> = a.iter().filter(|&x| !diff.contains(x)).collect();
        if pool.is_empty() {
            break;
        }
        let packed = pack(&pool, &base);
        if packed.len() < m {
            sets.push(GSet::from_ranks(g, packed)?.union(&zero)?);
            break;
        }
        let step = GSet::from_ranks(g, packed.into_iter().take(m - 1))?.union(&zero)?;
        base = base.sumset(&step)?;
        sets.push(step);
    }
    let mut cover = b.difference_set(b)?;
    for s in &sets {
        cover = cover.sumset(&s.difference_set(s)?)?;
    }
    let contained = a.is_subset(&cover);
    let max_size = sets.iter().map(GSet::len).max().unwrap_or(0);
    let count_bound = (2.0 * k * l_ratio).log2();
    let bounds_ok = max_size as f64 <= 2.0 * k && sets.len() as f64 <= count_bound;
    let components = BTreeMap::from([
        ("K".to_string(), k),
        ("L".to_string(), l_ratio),
        ("l".to_string(), sets.len() as f64),
        ("max_size".to_string(), max_size as f64),
        ("log2(2KL)".to_string(), count_bound),
    ]);
    Ok(CoverResult { sets, contained, bounds_ok, components })
}

/// Maximal `S ⊆ A` (greedy, rank order) with disjoint translates `s + P`, so `A ⊆ S + P - P`.
pub fn ruzsa_cover(a: &GSet, p: &GSet) -> Result<CoverResult> {
    if p.is_empty() {
        return Err(Error::EmptySet);
    }
    a.group().check_same(p.group())?;
    let s = GSet::from_ranks(a.group(), pack(a.elements(), p))?;
    let contained = a.is_subset(&s.sumset(&p.difference_set(p)?)?);
    let a_plus_p = a.sumset(p)?.len();
    let bounds_ok = s.len() * p.len() <= a_plus_p;
    let components = BTreeMap::from([
        ("|S|".to_string(), s.len() as f64),
        ("|A+P|/|P|".to_string(), a_plus_p as f64 / p.len() as f64),
    ]);
    Ok(CoverResult { sets: vec![s], contained, bounds_ok, components })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PetridisStrategy {
    /// Exact minimizer of `|X + jB| / |X|`.
    Minimizer,
    /// The minimizer missed the bound; another subset found by exhaustive search satisfies it.
    FallbackSearch,
    /// Local descent from `X = A`; not guaranteed.
    LocalSearch,
    /// Greedy removal for the large-subset variant; not guaranteed.
    GreedyRemoval,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PetridisResult {
    pub x: GSet,
    pub bound_ok: bool,
    pub strategy: PetridisStrategy,
    pub components: BTreeMap<String, f64>,
}

impl PetridisResult {
    pub fn exact(&self) -> bool {
        matches!(self.strategy, PetridisStrategy::Minimizer | PetridisStrategy::FallbackSearch)
    }
}

fn sumset_bits(g: &GroupSpec, xs: impl Iterator<Item = usize>, base: &Bitset) -> Bitset {
    let mut out = Bitset::new(g.order());
    for x in xs {
        translate_or(g, base, x, &mut out);
    }
    out
}

/// `|X + kB|^j |A|^k <= |A + jB|^k |X|^j`, i.e. `|X + kB| <= K^{k/j} |X|`.
fn petridis_holds(xk: usize, x: usize, a: usize, aj: usize, j: usize, k: usize) -> bool {
    let big = |v: usize, e: usize| BigUint::from(v).pow(e as u32);
    big(xk, j) * big(a, k) <= big(aj, k) * big(x, j)
}

/// Nonempty `X ⊆ A` with `|X + kB| <= K^{k/j} |X|`, `K = |A + jB| / |A|`.
///
/// Up to 18 elements the minimizer of `|X + jB| / |X|` is found by exhaustive
/// search and checked; should it miss the bound, the same enumeration looks for any
/// subset meeting it. Larger `A` use local descent from `X = A`.
pub fn petridis_subset(a: &GSet, b: &GSet, j: usize, k: usize) -> Result<PetridisResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    if j == 0 || k <= j {
        return Err(Error::InvalidArgument(format!("need 0 < j < k, got j={j}, k={k}")));
    }
    a.group().check_same(b.group())?;
    let g = a.group();
    let jb = b.k_fold_sumset(j)?;
    let kb = b.k_fold_sumset(k)?;
    let aj = a.sumset(&jb)?.len();
    let big_k = aj as f64 / a.len() as f64;
    let elems = a.elements();
    let (x_el, strategy) = if elems.len() <= PETRIDIS_EXHAUSTIVE_CAP {
        let jbits = jb.bits().clone();
        let kbits = kb.bits().clone();
        // DFS over subsets carrying both sumsets as bitsets.
        let mut best: Option<(usize, usize, Vec<usize>)> = None;
        let mut any_ok: Option<Vec<usize>> = None;
        let mut stack: Vec<usize> = Vec::new();
        #[allow(clippy::too_many_arguments)]
        fn rec(
            g: &GroupSpec,
            elems: &[usize],
            i: usize,
            sj: &Bitset,
            sk: &Bitset,
            jbits: &Bitset,
            kbits: &Bitset,
            stack: &mut Vec<usize>,
            visit: &mut dyn FnMut(&[usize], usize, usize),
        ) {
            for t in i..elems.len() {
                let mut nj = sj.clone();
                translate_or(g, jbits, elems[t], &mut nj);
                let mut nk = sk.clone();
                translate_or(g, kbits, elems[t], &mut nk);
                stack.push(elems[t]);
                visit(stack, nj.count(), nk.count());
                rec(g, elems, t + 1, &nj, &nk, jbits, kbits, stack, visit);
                stack.pop();
            }
        }
        let (na, nj_a) = (a.len(), aj);
        let mut visit = |xs: &[usize], sj: usize, sk: usize| {
            let better = match &best {
                None => true,
                Some((bj, bx, _)) => sj * bx < bj * xs.len(),
            };
            if better {
                best = Some((sj, xs.len(), xs.to_vec()));
            }
            if any_ok.is_none() && petridis_holds(sk, xs.len(), na, nj_a, j, k) {
                any_ok = Some(xs.to_vec());
            }
        };
        let empty = Bitset::new(g.order());
        rec(g, elems, 0, &empty, &empty, &jbits, &kbits, &mut stack, &mut visit);
        let (_, _, min_x) = best.expect("A is nonempty");
        let min_k = sumset_bits(g, min_x.iter().copied(), &kbits).count();
        if petridis_holds(min_k, min_x.len(), na, nj_a, j, k) {
            (min_x, PetridisStrategy::Minimizer)
        } else if let Some(x) = any_ok {
            (x, PetridisStrategy::FallbackSearch)
        } else {
            (min_x, PetridisStrategy::Minimizer)
        }
    } else {
        (local_descent(g, elems, jb.bits()), PetridisStrategy::LocalSearch)
    };
    let x = GSet::from_ranks(g, x_el)?;
    let xj = x.sumset(&jb)?.len();
    let xk = x.sumset(&kb)?.len();
    let bound_ok = petridis_holds(xk, x.len(), a.len(), aj, j, k);
    let components = BTreeMap::from([
        ("K".to_string(), big_k),
        ("|X|".to_string(), x.len() as f64),
        ("|X+jB|".to_string(), xj as f64),
        ("|X+kB|".to_string(), xk as f64),
        ("K^(k/j)|X|".to_string(), big_k.powf(k as f64 / j as f64) * x.len() as f64),
    ]);
    Ok(PetridisResult { x, bound_ok, strategy, components })
}

/// Removes single elements while that lowers `|X + jB| / |X|`.
fn local_descent(g: &GroupSpec, elems: &[usize], jb: &Bitset) -> Vec<usize> {
    let mut x = elems.to_vec();
    loop {
        let cur = sumset_bits(g, x.iter().copied(), jb).count();
        let mut best: Option<(usize, usize)> = None;
        for i in 0..x.len() {
            if x.len() == 1 {
                break;
            }
            let c = sumset_bits(g, x.iter().enumerate().filter(|&(t, _)| t != i).map(|(_, &v)| v), jb).count();
            // c / (|x|-1) < cur / |x|
            if c * x.len() < cur * (x.len() - 1) && best.is_none_or(|(_, bc)| c < bc) {
                best = Some((i, c));
            }
        }
        match best {
            Some((i, _)) => {
                x.remove(i);
            }
            None => return x,
        }
    }
}

/// `X ⊆ A` with `|X| >= (1 - delta)|A|` and `|X + kB| <= (K/delta)^k |X|`, `K = |A + jB|/|A|`.
///
/// Greedy: while the bound fails and the size allows, drop the element whose removal
/// shrinks `X + kB` the most.
pub fn petridis_large_subset(a: &GSet, b: &GSet, j: usize, k: usize, delta: f64) -> Result<PetridisResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    if !(delta > 0.0 && delta < 1.0) || j == 0 || k == 0 {
        return Err(Error::InvalidArgument(format!("need 0 < delta < 1 and j, k >= 1 (delta={delta})")));
    }
    let g = a.group();
    let jb = b.k_fold_sumset(j)?;
    let kb = b.k_fold_sumset(k)?;
    let big_k = a.sumset(&jb)?.len() as f64 / a.len() as f64;
    let factor = (big_k / delta).powi(k as i32);
    let min_size = ((1.0 - delta) * a.len() as f64).ceil() as usize;
    let mut x = a.elements().to_vec();
    let holds = |x: &[usize]| sumset_bits(g, x.iter().copied(), kb.bits()).count() as f64 <= factor * x.len() as f64;
    while !holds(&x) && x.len() > min_size.max(1) {
        let (i, _) = (0..x.len())
            .map(|i| {
                let rest = x.iter().enumerate().filter(|&(t, _)| t != i).map(|(_, &v)| v);
                (i, sumset_bits(g, rest, kb.bits()).count())
            })
            .min_by_key(|&(_, c)| c)
            .expect("nonempty");
        x.remove(i);
    }
    let bound_ok = holds(&x);
    let xs = GSet::from_ranks(g, x)?;
    let components = BTreeMap::from([
        ("K".to_string(), big_k),
        ("delta".to_string(), delta),
        ("|X|".to_string(), xs.len() as f64),
        ("|X+kB|".to_string(), xs.sumset(&kb)?.len() as f64),
        ("(K/delta)^k|X|".to_string(), factor * xs.len() as f64),
    ]);
    Ok(PetridisResult { x: xs, bound_ok, strategy: PetridisStrategy::GreedyRemoval, components })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(n: usize, xs: impl IntoIterator<Item = usize>) -> GSet {
        GSet::from_ranks(&GroupSpec::cyclic(n).unwrap(), xs).unwrap()
    }

    #[test]
    fn chang_examples() {
        let g = GroupSpec::cyclic(30).unwrap();
        let h = GSet::subgroup_generated(&g, &[5]).unwrap();
        let r = chang_cover(&h, &h).unwrap();
        assert!(r.sets.is_empty());
        assert!(r.contained && r.bounds_ok);

        let r = chang_cover(&set(100, 0..10), &set(100, 0..5)).unwrap();
        assert!(r.contained);
        assert!(r.bounds_ok, "{:?}", r.components);
        assert!(r.sets.iter().all(|s| s.len() <= 3));

        let a = set(64, [1, 5, 9, 14, 22, 23, 37, 40, 51, 60]);
        let r = chang_cover(&a, &a).unwrap();
        assert!(r.contained);
        assert!(r.bounds_ok, "{:?}", r.components);
    }

    #[test]
    fn ruzsa_examples() {
        let g = GroupSpec::cyclic(30).unwrap();
        let h = GSet::subgroup_generated(&g, &[3]).unwrap();
        let a = h.union(&h.translate(1)).unwrap().union(&h.translate(2)).unwrap();
        let r = ruzsa_cover(&a, &h).unwrap();
        assert_eq!(r.sets[0].len(), 3);
        let r = ruzsa_cover(&set(100, 0..10), &set(100, 0..3)).unwrap();
        assert!(r.contained && r.bounds_ok);
        assert!(r.sets[0].len() <= 4);
        let r = ruzsa_cover(&set(100, [2, 4]), &set(100, 0..6)).unwrap();
        assert_eq!(r.sets[0].elements(), &[2]);
    }

    #[test]
    fn petridis_examples() {
        let a = set(100, [0, 1]);
        let r = petridis_subset(&a, &a, 1, 2).unwrap();
        assert_eq!(r.x, a);
        assert_eq!(r.components["|X+kB|"], 4.0);
        assert!((r.components["K^(k/j)|X|"] - 4.5).abs() < 1e-12);
        assert!(r.bound_ok);

        let ap = set(100, 0..6);
        let r = petridis_subset(&ap, &ap, 1, 3).unwrap();
        assert!(r.bound_ok && r.exact());

        let g = GroupSpec::cyclic(40).unwrap();
        let h = GSet::subgroup_generated(&g, &[4]).unwrap();
        let a = GSet::from_ranks(&g, [0, 1, 2, 3, 8, 21]).unwrap();
        let r = petridis_subset(&a, &h, 1, 3).unwrap();
        assert!(r.bound_ok);
        assert_eq!(r.components["|X+jB|"], r.components["|X+kB|"]);
        assert!(petridis_subset(&a, &h, 2, 2).is_err());
    }

    #[test]
    fn large_subset_variant() {
        let a = set(200, (0..12).chain([50, 97, 130]));
        let r = petridis_large_subset(&a, &a, 1, 2, 0.5).unwrap();
        assert!(r.x.len() as f64 >= 0.5 * a.len() as f64);
        assert!(r.bound_ok);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn covers_are_sound(n in 5usize..90, xs in prop::collection::vec(any::<u16>(), 1..12), ys in prop::collection::vec(any::<u16>(), 1..6)) {
            let a = set(n, xs.iter().map(|&x| x as usize % n));
            let b = set(n, ys.iter().map(|&x| x as usize % n));
            let c = chang_cover(&a, &b).unwrap();
            prop_assert!(c.contained);
            prop_assert!(c.sets.iter().all(|s| s.len() as f64 <= 2.0 * c.components["K"]));
            let r = ruzsa_cover(&a, &b).unwrap();
            prop_assert!(r.contained && r.bounds_ok);
        }

        #[test]
        fn exhaustive_petridis_always_holds(n in 5usize..60, xs in prop::collection::vec(any::<u16>(), 1..9), ys in prop::collection::vec(any::<u16>(), 1..4), j in 1usize..3) {
            let a = set(n, xs.iter().map(|&x| x as usize % n));
            let b = set(n, ys.iter().map(|&x| x as usize % n));
            let r = petridis_subset(&a, &b, j, j + 1).unwrap();
            prop_assert!(r.exact());
            prop_assert!(r.bound_ok);
            prop_assert!(r.x.is_subset(&a) && !r.x.is_empty());
        }
    }
}
