//! Finite subsets of a group and the sumset machinery built on them.

use std::collections::VecDeque;

use num_rational::Ratio;

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::group::{Counts, GroupElement, GroupSpec};

/// A subset of a finite abelian group: sorted element ranks plus a
/// membership bitset, kept in agreement.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GSet {
    group: GroupSpec,
    elements: Vec<usize>,
    bits: Bitset,
}

impl GSet {
    pub fn empty(group: &GroupSpec) -> Self {
        Self { group: group.clone(), elements: Vec::new(), bits: Bitset::new(group.order()) }
    }

    pub fn full(group: &GroupSpec) -> Self {
        Self::from_bits(group, {
            let mut b = Bitset::new(group.order());
            (0..group.order()).for_each(|x| b.set(x));
            b
        })
    }

    pub fn from_ranks(group: &GroupSpec, ranks: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut bits = Bitset::new(group.order());
        for r in ranks {
            if r >= group.order() {
                return Err(Error::ElementOutOfRange(format!(
                    "rank {r} in a group of order {}",
                    group.order()
                )));
            }
            bits.set(r);
        }
        Ok(Self::from_bits(group, bits))
    }

    pub fn from_elements(group: &GroupSpec, elements: &[GroupElement]) -> Result<Self> {
        let ranks = elements.iter().map(|e| group.rank(e)).collect::<Result<Vec<_>>>()?;
        Self::from_ranks(group, ranks)
    }

    /// Integers reduced into a cyclic group.
    pub fn from_integers(group: &GroupSpec, values: &[i64]) -> Result<Self> {
        let ranks = values.iter().map(|&v| group.from_integer(v)).collect::<Result<Vec<_>>>()?;
        Self::from_ranks(group, ranks)
    }

    pub(crate) fn from_bits(group: &GroupSpec, bits: Bitset) -> Self {
        debug_assert_eq!(bits.len(), group.order());
        let elements = bits.iter_ones().collect();
        Self { group: group.clone(), elements, bits }
    }

    /// The subgroup generated by `gens`.
    pub fn subgroup_generated(group: &GroupSpec, gens: &[usize]) -> Result<Self> {
        let mut bits = Bitset::new(group.order());
        bits.set(0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                if g >= group.order() {
                    return Err(Error::ElementOutOfRange(format!("generator rank {g}")));
                }
                let y = group.add(x, g);
                if bits.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        Ok(Self::from_bits(group, bits))
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub(crate) fn bits(&self) -> &Bitset {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        x < self.group.order() && self.bits.get(x)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.elements.iter().copied()
    }

    pub fn to_group_elements(&self) -> Vec<GroupElement> {
        self.elements.iter().map(|&x| self.group.element(x)).collect()
    }

    pub fn is_subset(&self, other: &GSet) -> bool {
        self.group == other.group && self.elements.iter().all(|&x| other.bits.get(x))
    }

    pub fn is_symmetric(&self) -> bool {
        self.elements.iter().all(|&x| self.bits.get(self.group.neg(x)))
    }

    pub fn union(&self, other: &GSet) -> Result<GSet> {
        self.group.check_same(&other.group)?;
        let mut bits = self.bits.clone();
        bits.or_assign(&other.bits);
        Ok(Self::from_bits(&self.group, bits))
    }

    pub fn intersection(&self, other: &GSet) -> Result<GSet> {
        self.group.check_same(&other.group)?;
        let mut bits = self.bits.clone();
        bits.and_assign(&other.bits);
        Ok(Self::from_bits(&self.group, bits))
    }

    pub fn difference(&self, other: &GSet) -> Result<GSet> {
        self.group.check_same(&other.group)?;
        Ok(self.filter(|x| !other.bits.get(x)))
    }

    pub fn filter(&self, keep: impl Fn(usize) -> bool) -> GSet {
        let mut bits = Bitset::new(self.group.order());
        for &x in self.elements.iter().filter(|&&x| keep(x)) {
            bits.set(x);
        }
        Self::from_bits(&self.group, bits)
    }

    pub fn without(&self, x: usize) -> GSet {
        self.filter(|y| y != x)
    }

    pub fn with(&self, x: usize) -> GSet {
        let mut bits = self.bits.clone();
        bits.set(x);
        Self::from_bits(&self.group, bits)
    }

    pub fn map(&self, f: impl Fn(usize) -> usize) -> GSet {
        let mut bits = Bitset::new(self.group.order());
        for &x in &self.elements {
            bits.set(f(x));
        }
        Self::from_bits(&self.group, bits)
    }

    pub fn translate(&self, t: usize) -> GSet {
        self.map(|x| self.group.add(x, t))
    }

    pub fn negate(&self) -> GSet {
        self.map(|x| self.group.neg(x))
    }

    /// `lambda . A = {lambda a : a in A}`; non-injective multipliers shrink the set.
    pub fn dilate(&self, lambda: i64) -> GSet {
        self.map(|x| self.group.scale(x, lambda))
    }

    /// `A + B`.
    pub fn sumset(&self, other: &GSet) -> Result<GSet> {
        self.group.check_same(&other.group)?;
        let g = &self.group;
        if self.is_empty() || other.is_empty() {
            return Ok(GSet::empty(g));
        }
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        let mut bits = Bitset::new(g.order());
        let words = g.order().div_ceil(64);
        if g.is_cyclic() && large.len() > 2 * words {
            // shift-accumulate whole translates of the larger operand
            for &a in &small.elements {
                large.bits.rotate_or_into(a, &mut bits);
            }
        } else {
            for &a in &small.elements {
                for &b in &large.elements {
                    bits.set(g.add(a, b));
                }
            }
        }
        Ok(Self::from_bits(g, bits))
    }

    /// `A - B`.
    pub fn difference_set(&self, other: &GSet) -> Result<GSet> {
        self.sumset(&other.negate())
    }

    /// `kA` for `k >= 1`.
    pub fn k_fold_sumset(&self, k: usize) -> Result<GSet> {
        if k == 0 {
            return Err(Error::InvalidArgument("k-fold sumset needs k >= 1".into()));
        }
        let mut acc = self.clone();
        for _ in 1..k {
            acc = acc.sumset(self)?;
        }
        Ok(acc)
    }

    /// Representation counts `(A * A)(x)`.
    pub fn self_convolution(&self) -> Counts {
        let c = Counts::indicator(self);
        c.convolve(&c).expect("same group")
    }

    /// Correlation counts `(A o A)(x) = |A ∩ (A - x)|`.
    pub fn self_correlation(&self) -> Counts {
        let c = Counts::indicator(self);
        c.correlate(&c).expect("same group")
    }

    /// `|A + A| / |A|` as an exact rational.
    pub fn doubling_constant(&self) -> Result<Ratio<u64>> {
        if self.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(Ratio::new(self.sumset(self)?.len() as u64, self.len() as u64))
    }
}

/// `m_1 . A_1 + ... + m_k . A_k`, where a negative multiplier dilates by `|m|`
/// and negates.
pub fn signed_combination(terms: &[(i64, &GSet)]) -> Result<GSet> {
    let (first, rest) = terms
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("signed combination needs at least one term".into()))?;
    let mut acc = first.1.dilate(first.0);
    for (m, set) in rest {
        acc = acc.sumset(&set.dilate(*m))?;
    }
    Ok(acc)
}

/// `mA - nA`, with `0A = {0}`.
pub fn m_minus_n(set: &GSet, m: usize, n: usize) -> Result<GSet> {
    let zero = GSet::from_ranks(set.group(), [0])?;
    let mut terms: Vec<(i64, &GSet)> = vec![(1, &zero)];
    terms.extend(std::iter::repeat_n((1, set), m));
    terms.extend(std::iter::repeat_n((-1, set), n));
    signed_combination(&terms)
}

/// The fiber `B ∩ (A - s_1) ∩ ... ∩ (A - s_{k-1})`.
pub fn fiber(a: &GSet, b: &GSet, shifts: &[usize]) -> Result<GSet> {
    a.group.check_same(&b.group)?;
    let g = &a.group;
    Ok(b.filter(|x| shifts.iter().all(|&s| a.bits.get(g.add(x, s)))))
}

/// `{x : (A o A)(x) >= threshold}`.
pub fn popular_differences(a: &GSet, threshold: f64) -> GSet {
    let corr = a.self_correlation();
    let mut bits = Bitset::new(a.group.order());
    for (x, &v) in corr.values().iter().enumerate() {
        if v as f64 >= threshold {
            bits.set(x);
        }
    }
    GSet::from_bits(&a.group, bits)
}

/// `min_{x in A+A} (A * A)(x)` with the smallest-rank point attaining it.
pub fn min_convolution_on_support(a: &GSet) -> Result<(u64, usize)> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let conv = a.self_convolution();
    let (x, v) = conv
        .support()
        .min_by_key(|&(x, v)| (v, x))
        .expect("nonempty set has nonempty sumset");
    Ok((v, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z(n: usize) -> GroupSpec {
        GroupSpec::cyclic(n).unwrap()
    }

    fn set(g: &GroupSpec, xs: &[usize]) -> GSet {
        GSet::from_ranks(g, xs.iter().copied()).unwrap()
    }

    #[test]
    fn bitset_and_elements_agree() {
        let g = z(70);
        let a = set(&g, &[69, 3, 3, 0, 64]);
        assert_eq!(a.elements(), &[0, 3, 64, 69]);
        assert!(a.contains(64) && !a.contains(65));
        assert!(GSet::from_ranks(&g, [70]).is_err());
    }

    #[test]
    fn signed_combination_examples() {
        let g = z(8);
        let a = set(&g, &[0, 1]);
        assert_eq!(signed_combination(&[(1, &a), (1, &a)]).unwrap().elements(), &[0, 1, 2]);
        let h = GSet::subgroup_generated(&g, &[2]).unwrap();
        assert_eq!(signed_combination(&[(1, &h), (1, &h)]).unwrap(), h);
        let g7 = z(7);
        assert_eq!(signed_combination(&[(2, &set(&g7, &[0, 1, 3]))]).unwrap().elements(), &[0, 2, 6]);
        assert!(signed_combination(&[]).is_err());
        assert_eq!(signed_combination(&[(-1, &set(&g7, &[1, 2]))]).unwrap().elements(), &[5, 6]);
    }

    #[test]
    fn doubling_constants() {
        let g = z(100);
        let h = GSet::subgroup_generated(&g, &[25]).unwrap();
        assert_eq!(h.doubling_constant().unwrap(), Ratio::from_integer(1));
        let ap = GSet::from_ranks(&g, 0..10).unwrap();
        assert_eq!(ap.doubling_constant().unwrap(), Ratio::new(19, 10));
        let d = set(&g, &[1, 2, 4, 8]);
        assert_eq!(d.doubling_constant().unwrap(), Ratio::new(10, 4));
        assert!(matches!(GSet::empty(&g).doubling_constant(), Err(Error::EmptySet)));
    }

    #[test]
    fn fibers() {
        let g = z(7);
        let a = set(&g, &[0, 1, 3]);
        assert_eq!(fiber(&a, &a, &[]).unwrap(), a);
        assert_eq!(fiber(&a, &a, &[1]).unwrap().elements(), &[0]);
        let g12 = z(12);
        let h = GSet::subgroup_generated(&g12, &[3]).unwrap();
        assert_eq!(fiber(&h, &h, &[3, 6]).unwrap(), h);
        assert!(fiber(&a, &GSet::empty(&g12), &[]).is_err());
    }

    #[test]
    fn popular_difference_examples() {
        let g = z(4);
        let a = set(&g, &[0, 1]);
        assert_eq!(popular_differences(&a, 1.0).elements(), &[0, 1, 3]);
        assert!(popular_differences(&a, 2.5).is_empty());
        let g12 = z(12);
        let h = GSet::subgroup_generated(&g12, &[4]).unwrap();
        assert_eq!(popular_differences(&h, h.len() as f64), h);
    }

    #[test]
    fn min_convolution_examples() {
        assert_eq!(min_convolution_on_support(&set(&z(8), &[0, 1])).unwrap(), (1, 0));
        assert_eq!(min_convolution_on_support(&set(&z(7), &[0, 1, 3])).unwrap().0, 1);
        let g = z(12);
        let h = GSet::subgroup_generated(&g, &[3]).unwrap();
        assert_eq!(min_convolution_on_support(&h).unwrap().0, 4);
        assert!(min_convolution_on_support(&GSet::empty(&g)).is_err());
    }

    #[test]
    fn m_minus_n_handles_zero_counts() {
        let g = z(50);
        let a = set(&g, &[1, 2]);
        assert_eq!(m_minus_n(&a, 0, 0).unwrap().elements(), &[0]);
        assert_eq!(m_minus_n(&a, 1, 1).unwrap().elements(), &[0, 1, 49]);
    }

    fn random_set() -> impl Strategy<Value = GSet> {
        (2usize..200, prop::collection::vec(any::<u32>(), 1..40)).prop_map(|(n, xs)| {
            let g = GroupSpec::cyclic(n).unwrap();
            GSet::from_ranks(&g, xs.into_iter().map(|x| x as usize % n)).unwrap()
        })
    }

    proptest! {
        #[test]
        fn sumset_paths_agree_and_bounds_hold(a in random_set(), shift in any::<u32>()) {
            let g = a.group().clone();
            let b = a.translate(shift as usize % g.order()).filter(|x| x % 3 != 1);
            let s = a.sumset(&b).unwrap();
            let mut slow = Bitset::new(g.order());
            for &x in a.elements() { for &y in b.elements() { slow.set(g.add(x, y)); } }
            prop_assert_eq!(&GSet::from_bits(&g, slow), &s);
            if !b.is_empty() {
                prop_assert!(s.len() >= a.len().max(b.len()));
                prop_assert!(s.len() <= a.len() * b.len());
            }
            prop_assert_eq!(a.sumset(&set(&g, &[0])).unwrap(), a.clone());
        }

        #[test]
        fn popular_differences_monotone(a in random_set(), t in 0.5f64..10.0) {
            let lo = popular_differences(&a, t);
            let hi = popular_differences(&a, t + 1.0);
            prop_assert!(hi.is_subset(&lo));
        }
    }
}
