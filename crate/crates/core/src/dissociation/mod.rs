//! Dissociated sets: certificates, spans, the four dimension notions,
//! structured/dissociated partitions and moment checks for dissociated sums.
//!
//! The search routines lean on one fact: `D ∪ {x}` is dissociated iff `D` is
//! dissociated and `x ∉ Span(D)`. Spans are kept as bitsets over the group
//! and extended by `Span(D ∪ {x}) = S ∪ (S + x) ∪ (S − x)`.

mod dimension;
mod partition;

pub use dimension::{
    additive_dimension, dimension_profile, dimension_profile_with, DStarValue, DimensionConfig, DimensionReport,
    DimensionValue,
};
pub use partition::{
    find_dissociated_subset, partition_str_diss, partition_str_diss_with, Certification,
    PartitionConfig, PartitionResult, SearchOutcome,
};

use serde::{Deserialize, Serialize};

use crate::bitset::Bitset;
use crate::energy::t_energy_uniform;
use crate::error::{Error, Result};
use crate::group::{Complex, GFunction, GroupSpec};
use crate::record::InequalityRecord;
use crate::set::GSet;

/// Largest set handed to the meet-in-the-middle test.
pub const DEFAULT_DISSOCIATION_CAP: usize = 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DissociationVerdict {
    Dissociated,
    NotDissociated,
}

/// Verdict plus, on failure, a coefficient vector `eps` in `{-1,0,1}^|S|`
/// (indexed like `S.elements()`) with `sum eps_i s_i = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DissociationCertificate {
    pub verdict: DissociationVerdict,
    pub witness: Option<Vec<i8>>,
}

impl DissociationCertificate {
    pub fn is_dissociated(&self) -> bool {
        self.verdict == DissociationVerdict::Dissociated
    }

    /// Re-evaluates the witness against `set`.
    pub fn witness_is_valid(&self, set: &GSet) -> bool {
        match &self.witness {
            None => self.is_dissociated(),
            Some(eps) => {
                eps.len() == set.len()
                    && eps.iter().any(|&e| e != 0)
                    && eps.iter().all(|&e| (-1..=1).contains(&e))
                    && evaluate(set, eps) == set.group().zero()
            }
        }
    }
}

/// `sum eps_i s_i` over `set.elements()`.
pub fn evaluate(set: &GSet, eps: &[i8]) -> usize {
    let g = set.group();
    set.elements().iter().zip(eps).fold(g.zero(), |acc, (&x, &e)| g.add(acc, g.scale(x, e as i64)))
}

pub fn is_dissociated(set: &GSet) -> Result<DissociationCertificate> {
    is_dissociated_with_cap(set, DEFAULT_DISSOCIATION_CAP)
}

/// Meet-in-the-middle over `{-1,0,1}` patterns split across two halves.
///
/// The first half's signed sums go into a dense table keyed by group rank
/// (one pattern per value); each nonzero pattern of the second half probes for
/// the negation of its sum. A nonzero first-half pattern summing to zero is
/// reported directly. Memory is one `u32` per group element.
pub fn is_dissociated_with_cap(set: &GSet, cap: usize) -> Result<DissociationCertificate> {
    let n = set.len();
    if n > cap {
        return Err(Error::CapExceeded { what: "dissociativity test", size: n as u128, cap: cap as u128 });
    }
    let g = set.group();
    let elems = set.elements();
    if let Some(i) = elems.iter().position(|&x| x == g.zero()) {
        let mut eps = vec![0; n];
        eps[i] = 1;
        return Ok(not_dissociated(eps));
    }
    let h1 = n.div_ceil(2);
    let (left, right) = elems.split_at(h1);
    const EMPTY: u32 = u32::MAX;
    let mut table = vec![EMPTY; g.order()];
    let mut found = None;
    for_each_pattern(g, left, |code, sum| {
        if table[sum] == EMPTY {
            table[sum] = code;
            false
        } else if sum == g.zero() {
            found = Some((code, 0));
            true
        } else {
            false
        }
    });
    if found.is_none() {
        for_each_pattern(g, right, |code, sum| {
            if code != 0 {
                let hit = table[g.neg(sum)];
                if hit != EMPTY {
                    found = Some((hit, code));
                    return true;
                }
            }
            false
        });
    }
    Ok(match found {
        None => DissociationCertificate { verdict: DissociationVerdict::Dissociated, witness: None },
        Some((c1, c2)) => {
            let mut eps = decode(c1, left.len());
            eps.extend(decode(c2, right.len()));
            not_dissociated(eps)
        }
    })
}

fn not_dissociated(eps: Vec<i8>) -> DissociationCertificate {
    DissociationCertificate { verdict: DissociationVerdict::NotDissociated, witness: Some(eps) }
}

/// Base-3 digits, least significant first; digit 2 stands for -1.
fn decode(mut code: u32, len: usize) -> Vec<i8> {
    (0..len)
        .map(|_| {
            let d = code % 3;
            code /= 3;
            [0, 1, -1][d as usize]
        })
        .collect()
}

/// Visits all `3^len` patterns in code order with their sums; stops when `f` returns true.
fn for_each_pattern(g: &GroupSpec, elems: &[usize], mut f: impl FnMut(u32, usize) -> bool) {
    let len = elems.len();
    let neg2: Vec<usize> = elems.iter().map(|&x| g.scale(x, -2)).collect();
    let mut digits = vec![0u8; len];
    let mut sum = g.zero();
    let mut code = 0u32;
    loop {
        if f(code, sum) {
            return;
        }
        let mut i = 0;
        loop {
            if i == len {
                return;
            }
            match digits[i] {
                0 => {
                    digits[i] = 1;
                    sum = g.add(sum, elems[i]);
                    break;
                }
                1 => {
                    digits[i] = 2;
                    sum = g.add(sum, neg2[i]);
                    break;
                }
                _ => {
                    digits[i] = 0;
                    sum = g.add(sum, elems[i]);
                    i += 1;
                }
            }
        }
        code += 1;
    }
}

/// ORs `src + x` into `dst`.
pub(crate) fn translate_or(g: &GroupSpec, src: &Bitset, x: usize, dst: &mut Bitset) {
    if g.is_cyclic() {
        src.rotate_or_into(x, dst);
    } else {
        for y in src.iter_ones() {
            dst.set(g.add(y, x));
        }
    }
}

/// `S ∪ (S + x) ∪ (S − x)`.
pub(crate) fn extend_span(g: &GroupSpec, span: &Bitset, x: usize) -> Bitset {
    let mut out = span.clone();
    translate_or(g, span, x, &mut out);
    let nx = g.neg(x);
    if nx != x {
        translate_or(g, span, nx, &mut out);
    }
    out
}

pub(crate) fn span_bits(g: &GroupSpec, elems: &[usize]) -> Bitset {
    let mut span = Bitset::new(g.order());
    span.set(g.zero());
    for &x in elems {
        span = extend_span(g, &span, x);
    }
    span
}

/// `Span(S) = { sum eps_j s_j : eps_j in {-1,0,1} }`, built incrementally
/// in `O(|S| N / 64)` word operations.
pub fn span(set: &GSet) -> GSet {
    span_of(set.group(), set.elements())
}

pub fn span_of(g: &GroupSpec, elems: &[usize]) -> GSet {
    GSet::from_bits(g, span_bits(g, elems))
}

/// `(1/N) sum_x |sum_n a_n e(-n x)|^p` against `(C p)^{p/2} (sum |a_n|^2)^{p/2}`.
///
/// `coeffs` is indexed like `lambda.elements()`. The record also carries the
/// smallest `C` for which the bound would hold on this input (`c_min`).
pub fn rudin_moment_check(lambda: &GSet, coeffs: &[Complex], p: f64, c: f64) -> Result<InequalityRecord> {
    if coeffs.len() != lambda.len() {
        return Err(Error::InvalidArgument(format!(
            "{} coefficients for a set of size {}",
            coeffs.len(),
            lambda.len()
        )));
    }
    if p.is_nan() || p < 2.0 {
        return Err(Error::InvalidArgument(format!("moment exponent must be >= 2, got {p}")));
    }
    let cert = is_dissociated(lambda)?;
    if !cert.is_dissociated() {
        return Err(Error::Precondition("Rudin moment check needs a dissociated set".into()));
    }
    let g = lambda.group();
    let mut f = vec![Complex::new(0.0, 0.0); g.order()];
    for (&x, &a) in lambda.elements().iter().zip(coeffs) {
        f[x] += a;
    }
    let hat = GFunction::from_values(g, f)?.fourier_transform();
    let lhs = hat.lp_sum(p) / g.order() as f64;
    let l2: f64 = coeffs.iter().map(|a| a.norm_sqr()).sum();
    let rhs = (c * p).powf(p / 2.0) * l2.powf(p / 2.0);
    let c_min = if l2 == 0.0 { 0.0 } else { lhs.powf(2.0 / p) / l2 / p };
    Ok(InequalityRecord::bound("rudin-moment", lhs, rhs)
        .with("p", p)
        .with("C", c)
        .with("c_min", c_min)
        .with("l2", l2)
        .with("size", lambda.len() as f64))
}

/// `T_s(X ∪ D) <= C^s s^s |D|^s + 2^{2s} |X|^{2s-1}` for dissociated `D`.
///
/// Records `c_min`, the least `C` making the bound hold (0 when the `X` term
/// alone suffices, infinite when `D` is empty and it does not).
pub fn dissociated_union_check(x: &GSet, d: &GSet, s: usize, c: f64) -> Result<InequalityRecord> {
    if s < 1 {
        return Err(Error::InvalidArgument("T_s needs s >= 1".into()));
    }
    if !is_dissociated(d)?.is_dissociated() {
        return Err(Error::Precondition("the D part must be dissociated".into()));
    }
    let m = x.union(d)?;
    let lhs = t_energy_uniform(&m, s)? as f64;
    let si = s as i32;
    let (dn, xn, sf) = (d.len() as f64, x.len() as f64, s as f64);
    let x_term = 4f64.powi(si) * xn.powi(2 * si - 1);
    let d_unit = sf.powi(si) * dn.powi(si);
    let rhs = c.powi(si) * d_unit + x_term;
    let c_min = if lhs <= x_term {
        0.0
    } else if d_unit == 0.0 {
        f64::INFINITY
    } else {
        ((lhs - x_term) / d_unit).powf(1.0 / sf)
    };
    Ok(InequalityRecord::bound("dissociated-union-energy", lhs, rhs)
        .with("s", sf)
        .with("C", c)
        .with("c_min", c_min)
        .with("|D|", dn)
        .with("|X|", xn))
}
