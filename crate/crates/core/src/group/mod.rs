//! Finite abelian groups modelled as products of cyclic factors.
//!
//! Elements are addressed by their mixed-radix rank: for factors
//! `n_1, ..., n_d` the element `(c_1, ..., c_d)` has rank
//! `c_1 * (n_2 ... n_d) + ... + c_d`. All dense functions and bitsets in the
//! crate are indexed by rank. When every factor is 2 the rank is a bit
//! vector and addition is XOR.

mod counts;
mod fourier;

pub use counts::Counts;
pub use fourier::{Complex, GFunction};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the group order for dense representations.
pub const DEFAULT_MAX_ORDER: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Layout {
    Cyclic(usize),
    Binary,
    Mixed,
}

/// A finite abelian group `Z_{n_1} x ... x Z_{n_d}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct GroupSpec {
    factors: Vec<usize>,
    strides: Vec<usize>,
    order: usize,
    layout: Layout,
}

/// A group element as a residue vector, one coordinate per cyclic factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement {
    pub coords: Vec<usize>,
}

impl GroupSpec {
    pub fn new(factors: Vec<usize>) -> Result<Self> {
        Self::with_max_order(factors, DEFAULT_MAX_ORDER)
    }

    /// Builds the group, rejecting orders above `cap`.
    pub fn with_max_order(factors: Vec<usize>, cap: usize) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidGroup("at least one cyclic factor is required".into()));
        }
        if let Some(&bad) = factors.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidGroup(format!("cyclic factor {bad} is below 2")));
        }
        let order = factors.iter().try_fold(1u128, |acc, &n| {
            let next = acc * n as u128;
            (next <= u64::MAX as u128).then_some(next)
        });
        let order = match order {
            Some(o) if o <= cap as u128 => o as usize,
            Some(o) => return Err(Error::GroupTooLarge { order: o, cap }),
            None => return Err(Error::GroupTooLarge { order: u128::MAX, cap }),
        };
        let mut strides = vec![1usize; factors.len()];
        for i in (0..factors.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * factors[i + 1];
        }
        let layout = if factors.len() == 1 {
            Layout::Cyclic(factors[0])
        } else if factors.iter().all(|&n| n == 2) {
            Layout::Binary
        } else {
            Layout::Mixed
        };
        Ok(Self { factors, strides, order, layout })
    }

    /// `Z_n`.
    pub fn cyclic(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    /// `F_2^dim`.
    pub fn binary(dim: usize) -> Result<Self> {
        Self::new(vec![2; dim])
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub(crate) fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn is_cyclic(&self) -> bool {
        matches!(self.layout, Layout::Cyclic(_))
    }

    /// True when every factor is 2, i.e. the group is `F_2^d`.
    pub fn is_binary(&self) -> bool {
        matches!(self.layout, Layout::Binary)
            || matches!(self.layout, Layout::Cyclic(2))
    }

    /// Least common multiple of the factors.
    pub fn exponent(&self) -> usize {
        self.factors.iter().fold(1usize, |acc, &n| acc / gcd(acc, n) * n)
    }

    pub fn zero(&self) -> usize {
        0
    }

    pub fn coords(&self, rank: usize) -> Vec<usize> {
        debug_assert!(rank < self.order);
        self.factors
            .iter()
            .zip(&self.strides)
            .map(|(&n, &s)| (rank / s) % n)
            .collect()
    }

    pub fn element(&self, rank: usize) -> GroupElement {
        GroupElement { coords: self.coords(rank) }
    }

    /// Rank of a residue vector; every coordinate must lie in its factor's range.
    pub fn rank(&self, element: &GroupElement) -> Result<usize> {
        self.rank_of(&element.coords)
    }

    pub fn rank_of(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.factors.len() {
            return Err(Error::ElementOutOfRange(format!(
                "{coords:?} has {} coordinates, group has {} factors",
                coords.len(),
                self.factors.len()
            )));
        }
        let mut rank = 0;
        for ((&c, &n), &s) in coords.iter().zip(&self.factors).zip(&self.strides) {
            if c >= n {
                return Err(Error::ElementOutOfRange(format!(
                    "coordinate {c} of {coords:?} is outside [0, {n})"
                )));
            }
            rank += c * s;
        }
        Ok(rank)
    }

    /// Reduces an integer into `Z_n`. Only defined for cyclic groups.
    pub fn from_integer(&self, value: i64) -> Result<usize> {
        match self.layout {
            Layout::Cyclic(n) => Ok(value.rem_euclid(n as i64) as usize),
            _ => Err(Error::InvalidArgument(format!(
                "integer embedding needs a cyclic group, got {self}"
            ))),
        }
    }

    #[inline]
    pub fn add(&self, a: usize, b: usize) -> usize {
        match self.layout {
            Layout::Cyclic(n) => {
                let s = a + b;
                if s >= n {
                    s - n
                } else {
                    s
                }
            }
            Layout::Binary => a ^ b,
            Layout::Mixed => {
                let mut out = 0;
                for (&n, &s) in self.factors.iter().zip(&self.strides) {
                    let d = (a / s) % n + (b / s) % n;
                    out += if d >= n { d - n } else { d } * s;
                }
                out
            }
        }
    }

    #[inline]
    pub fn neg(&self, a: usize) -> usize {
        match self.layout {
            Layout::Cyclic(n) => {
                if a == 0 {
                    0
                } else {
                    n - a
                }
            }
            Layout::Binary => a,
            Layout::Mixed => {
                let mut out = 0;
                for (&n, &s) in self.factors.iter().zip(&self.strides) {
                    let d = (a / s) % n;
                    out += if d == 0 { 0 } else { n - d } * s;
                }
                out
            }
        }
    }

    #[inline]
    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    /// `lambda * a`, for any integer `lambda`.
    pub fn scale(&self, a: usize, lambda: i64) -> usize {
        match self.layout {
            Layout::Cyclic(n) => {
                let l = lambda.rem_euclid(n as i64) as u128;
                ((a as u128 * l) % n as u128) as usize
            }
            Layout::Binary => {
                if lambda.rem_euclid(2) == 1 {
                    a
                } else {
                    0
                }
            }
            Layout::Mixed => {
                let mut out = 0;
                for (&n, &s) in self.factors.iter().zip(&self.strides) {
                    let d = ((a / s) % n) as u128;
                    let l = lambda.rem_euclid(n as i64) as u128;
                    out += ((d * l) % n as u128) as usize * s;
                }
                out
            }
        }
    }

    /// Fractional part of the pairing `xi . x = sum_i xi_i x_i / n_i`.
    pub fn pairing(&self, xi: usize, x: usize) -> f64 {
        let mut acc = 0.0;
        for (&n, &s) in self.factors.iter().zip(&self.strides) {
            let p = ((xi / s) % n) * ((x / s) % n) % n;
            acc += p as f64 / n as f64;
        }
        acc.fract()
    }

    pub fn check_same(&self, other: &GroupSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GroupMismatch)
        }
    }
}

impl TryFrom<Vec<usize>> for GroupSpec {
    type Error = Error;

    fn try_from(factors: Vec<usize>) -> Result<Self> {
        GroupSpec::new(factors)
    }
}

impl From<GroupSpec> for Vec<usize> {
    fn from(g: GroupSpec) -> Self {
        g.factors
    }
}

impl std::fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|n| format!("Z_{n}")).collect();
        write!(f, "{}", parts.join(" x "))
    }
}

pub(crate) fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_factors() {
        assert!(GroupSpec::new(vec![]).is_err());
        assert!(GroupSpec::new(vec![4, 1]).is_err());
        assert!(matches!(
            GroupSpec::new(vec![1 << 9, 1 << 9]),
            Err(Error::GroupTooLarge { .. })
        ));
        assert_eq!(GroupSpec::new(vec![3, 5]).unwrap().order(), 15);
    }

    #[test]
    fn binary_addition_is_xor() {
        let g = GroupSpec::binary(4).unwrap();
        assert!(g.is_binary());
        let a = g.rank_of(&[1, 0, 1, 1]).unwrap();
        let b = g.rank_of(&[1, 1, 0, 1]).unwrap();
        assert_eq!(g.coords(g.add(a, b)), vec![0, 1, 1, 0]);
        assert_eq!(g.neg(a), a);
    }

    #[test]
    fn scaling_with_negative_multiplier() {
        let g = GroupSpec::cyclic(7).unwrap();
        assert_eq!(g.scale(3, -1), 4);
        assert_eq!(g.scale(3, 2), 6);
        let m = GroupSpec::new(vec![4, 6]).unwrap();
        let x = m.rank_of(&[3, 5]).unwrap();
        assert_eq!(m.coords(m.scale(x, -2)), vec![2, 2]);
    }

    fn mixed_group() -> impl Strategy<Value = GroupSpec> {
        prop::collection::vec(2usize..7, 1..4).prop_map(|f| GroupSpec::new(f).unwrap())
    }

    proptest! {
        #[test]
        fn rank_unrank_roundtrip(g in mixed_group(), seed in any::<u64>()) {
            let r = (seed as usize) % g.order();
            prop_assert_eq!(g.rank(&g.element(r)).unwrap(), r);
        }

        #[test]
        fn group_axioms(g in mixed_group(), a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
            let n = g.order();
            let (a, b, c) = (a as usize % n, b as usize % n, c as usize % n);
            prop_assert_eq!(g.add(a, g.neg(a)), g.zero());
            prop_assert_eq!(g.add(a, b), g.add(b, a));
            prop_assert_eq!(g.add(g.add(a, b), c), g.add(a, g.add(b, c)));
            prop_assert_eq!(g.scale(a, 3), g.add(a, g.add(a, a)));
        }
    }
}
