//! Energy functionals: `E(A,B)`, `E_k`, `T_k`, `sigma_k`, the
//! distinct-representation counts behind `T*_s`, and the `q` function.
//!
//! Each integer functional has three routes: exact convolution counting (the
//! default), the Fourier power-sum form snapped to an integer, and a direct
//! tuple enumeration used as an oracle on small inputs.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Counts, GFunction, GroupSpec};
use crate::set::GSet;

/// Default number of tuple visits allowed for brute-force counts.
pub const DEFAULT_TUPLE_BUDGET: u128 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Direct,
    Fourier,
    Oracle,
}

/// `E(A,B) = sum_x (A o A)(x) (B o B)(x)`.
pub fn energy(a: &GSet, b: &GSet) -> Result<u64> {
    a.group().check_same(b.group())?;
    a.self_correlation().dot(&b.self_correlation())
}

/// `(1/N) sum_xi |A^(xi)|^2 |B^(xi)|^2`, snapped.
pub fn energy_fourier(a: &GSet, b: &GSet) -> Result<u64> {
    a.group().check_same(b.group())?;
    let ha = GFunction::indicator(a).fourier_transform();
    let hb = GFunction::indicator(b).fourier_transform();
    let n = a.group().order() as f64;
    let total: f64 = ha
        .values()
        .iter()
        .zip(hb.values())
        .map(|(x, y)| x.norm_sqr() * y.norm_sqr())
        .sum();
    GFunction::snap_scalar((total / n).into())
}

/// Counts quadruples `a1 + b1 = a2 + b2` directly.
pub fn energy_oracle(a: &GSet, b: &GSet) -> Result<u64> {
    a.group().check_same(b.group())?;
    let g = a.group();
    let mut count = 0;
    for &a1 in a.elements() {
        for &a2 in a.elements() {
            for &b1 in b.elements() {
                if b.contains(g.sub(g.add(a1, b1), a2)) {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

/// `E_k(A,B) = sum_x (A o A)(x) (B o B)(x)^{k-1}` for real `k >= 1`.
pub fn higher_energy(a: &GSet, b: &GSet, k: f64) -> Result<f64> {
    if k.is_nan() || k < 1.0 {
        return Err(Error::InvalidArgument(format!("higher energy needs k >= 1, got {k}")));
    }
    a.group().check_same(b.group())?;
    let ca = a.self_correlation();
    let cb = b.self_correlation();
    Ok(ca
        .values()
        .iter()
        .zip(cb.values())
        .filter(|(&x, _)| x != 0)
        .map(|(&x, &y)| x as f64 * (y as f64).powf(k - 1.0))
        .sum())
}

/// Integer-order `E_k(A,B)`, exact.
pub fn higher_energy_exact(a: &GSet, b: &GSet, k: u32) -> Result<u64> {
    if k == 0 {
        return Err(Error::InvalidArgument("higher energy needs k >= 1".into()));
    }
    a.group().check_same(b.group())?;
    let ca = a.self_correlation();
    let cb = b.self_correlation();
    Ok(ca.values().iter().zip(cb.values()).map(|(&x, &y)| x * y.pow(k - 1)).sum())
}

/// `E_k(A) = sum_x (A o A)(x)^k`.
pub fn e_k(a: &GSet, k: u32) -> Result<u64> {
    higher_energy_exact(a, a, k)
}

fn fold_convolution(sets: &[&GSet]) -> Result<Counts> {
    let mut acc = Counts::indicator(sets[0]);
    for s in &sets[1..] {
        acc = acc.convolve(&Counts::indicator(s))?;
    }
    Ok(acc)
}

/// `T_k(A_1, ..., A_{2k})`: solutions of `a_1 + ... + a_k = a_{k+1} + ... + a_{2k}`.
pub fn t_energy(sets: &[&GSet]) -> Result<u64> {
    if sets.is_empty() || !sets.len().is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "T_k needs an even, nonzero number of sets, got {}",
            sets.len()
        )));
    }
    let g = sets[0].group();
    for s in sets {
        g.check_same(s.group())?;
    }
    let k = sets.len() / 2;
    fold_convolution(&sets[..k])?.dot(&fold_convolution(&sets[k..])?)
}

/// `T_k(A)`.
pub fn t_energy_uniform(a: &GSet, k: usize) -> Result<u64> {
    if k == 0 {
        return Err(Error::InvalidArgument("T_k needs k >= 1".into()));
    }
    Ok(Counts::indicator(a).k_fold(k)?.sum_squares())
}

/// `T_k(A) = (1/N) sum_xi |A^(xi)|^{2k}`, snapped.
pub fn t_energy_fourier(a: &GSet, k: usize) -> Result<u64> {
    if k == 0 {
        return Err(Error::InvalidArgument("T_k needs k >= 1".into()));
    }
    let hat = GFunction::indicator(a).fourier_transform();
    let n = a.group().order() as f64;
    let total: f64 = hat.values().iter().map(|v| v.norm_sqr().powi(k as i32)).sum();
    GFunction::snap_scalar((total / n).into())
}

/// Tuple-enumeration oracle for `T_k(A)`: tallies every ordered k-tuple sum.
pub fn t_energy_oracle(a: &GSet, k: usize, budget: u128) -> Result<u64> {
    check_budget(a.len(), k, budget)?;
    let g = a.group();
    let mut tally: HashMap<usize, u64> = HashMap::new();
    for_each_tuple(a.elements(), k, &mut |t| {
        let s = t.iter().fold(0, |acc, &x| g.add(acc, x));
        *tally.entry(s).or_default() += 1;
    });
    Ok(tally.values().map(|v| v * v).sum())
}

/// `sigma_k(A) = (A *_k A)(0)`.
pub fn sigma_k(a: &GSet, k: usize) -> Result<u64> {
    Ok(Counts::indicator(a).k_fold(k)?.get(0))
}

pub fn sigma_k_fourier(a: &GSet, k: usize) -> Result<u64> {
    let v = GFunction::indicator(a).k_fold_convolve(k)?.value(0);
    GFunction::snap_scalar(v)
}

fn check_budget(n: usize, s: usize, budget: u128) -> Result<()> {
    let visits = (n as u128).checked_pow(s as u32).unwrap_or(u128::MAX);
    if visits > budget {
        return Err(Error::CapExceeded { what: "tuple enumeration", size: visits, cap: budget });
    }
    Ok(())
}

fn for_each_tuple(elems: &[usize], k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(elems: &[usize], k: usize, buf: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if buf.len() == k {
            f(buf);
            return;
        }
        for &x in elems {
            buf.push(x);
            rec(elems, k, buf, f);
            buf.pop();
        }
    }
    rec(elems, k, &mut Vec::with_capacity(k), f);
}

/// `(A ~*_s A)(x)`: ordered s-tuples of pairwise distinct elements summing to `x`.
pub fn distinct_rep_function(a: &GSet, s: usize, budget: u128) -> Result<Counts> {
    if s == 0 {
        return Err(Error::InvalidArgument("distinct representations need s >= 1".into()));
    }
    check_budget(a.len(), s, budget)?;
    let g = a.group();
    let elems = a.elements();
    let mut out = vec![0u64; g.order()];
    fn rec(
        g: &GroupSpec,
        elems: &[usize],
        left: usize,
        used: &mut Vec<bool>,
        sum: usize,
        out: &mut [u64],
    ) {
        if left == 0 {
            out[sum] += 1;
            return;
        }
        for (i, &x) in elems.iter().enumerate() {
            if !used[i] {
                used[i] = true;
                rec(g, elems, left - 1, used, g.add(sum, x), out);
                used[i] = false;
            }
        }
    }
    rec(g, elems, s, &mut vec![false; elems.len()], 0, &mut out);
    Counts::from_values(g, out)
}

/// `T*_s(A)`: additive 2s-tuples whose 2s entries are pairwise distinct.
///
/// Counted over pairs of disjoint s-subsets with equal sums, times `(s!)^2`
/// orderings.
pub fn t_star(a: &GSet, s: usize, budget: u128) -> Result<u64> {
    if s == 0 {
        return Err(Error::InvalidArgument("T*_s needs s >= 1".into()));
    }
    if a.len() < 2 * s {
        return Ok(0);
    }
    check_budget(a.len(), s, budget)?;
    if a.len() > 64 {
        return Err(Error::CapExceeded { what: "T*_s set size", size: a.len() as u128, cap: 64 });
    }
    let g = a.group();
    let elems = a.elements();
    let mut by_sum: HashMap<usize, Vec<u64>> = HashMap::new();
    fn rec(
        g: &GroupSpec,
        elems: &[usize],
        start: usize,
        left: usize,
        mask: u64,
        sum: usize,
        by_sum: &mut HashMap<usize, Vec<u64>>,
    ) {
        if left == 0 {
            by_sum.entry(sum).or_default().push(mask);
            return;
        }
        for i in start..=elems.len() - left {
            rec(g, elems, i + 1, left - 1, mask | 1 << i, g.add(sum, elems[i]), by_sum);
        }
    }
    rec(g, elems, 0, s, 0, 0, &mut by_sum);
    let mut set_pairs = 0u64;
    for masks in by_sum.values() {
        for (i, &m1) in masks.iter().enumerate() {
            for &m2 in &masks[i + 1..] {
                if m1 & m2 == 0 {
                    set_pairs += 2;
                }
            }
        }
    }
    let fact: u64 = (1..=s as u64).product();
    Ok(set_pairs * fact * fact)
}

/// `q(x)`: representations `x = 2 a_1 + a_2 + ... + a_{s-1}` with all `a_i` in `A`.
pub fn q_function(a: &GSet, s: usize) -> Result<Counts> {
    if s < 3 {
        return Err(Error::InvalidArgument(format!("q function needs s >= 3, got {s}")));
    }
    let ind = Counts::indicator(a);
    let mut acc = ind.dilate(2);
    for _ in 0..s - 2 {
        acc = acc.convolve(&ind)?;
    }
    Ok(acc)
}

/// `(1/N) sum_alpha |A^(2 alpha)|^2 |A^(alpha)|^{2s-4}`.
pub fn q_fourier_sum(a: &GSet, s: usize) -> Result<f64> {
    if s < 3 {
        return Err(Error::InvalidArgument(format!("q function needs s >= 3, got {s}")));
    }
    let hat = GFunction::indicator(a).fourier_transform();
    let doubled = hat.compose_scale(2);
    let n = a.group().order() as f64;
    Ok(hat
        .values()
        .iter()
        .zip(doubled.values())
        .map(|(h, d)| d.norm_sqr() * h.norm_sqr().powi(s as i32 - 2))
        .sum::<f64>()
        / n)
}

/// A named quantity in an [`EnergyReport`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Exact(u64),
    Real(f64),
}

impl Quantity {
    pub fn as_f64(self) -> f64 {
        match self {
            Quantity::Exact(v) => v as f64,
            Quantity::Real(v) => v,
        }
    }
}

/// Energies of a single set. Keys name the functional they instantiate
/// (`E`, `E_3`, `T_2`, `sigma_4`, ...); derived scalars use `K`, `c_l`,
/// `kappa_3`, `kappa_4` and `M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub size: usize,
    pub group_order: usize,
    pub backend: Backend,
    pub quantities: BTreeMap<String, Quantity>,
}

impl EnergyReport {
    /// Computes `E`, `E_3`, `E_4`, `T_2..T_4`, `sigma_2..sigma_4` and the derived
    /// scalars. `epsilon` selects the real exponent `E_{3+eps}` used for `M`.
    pub fn compute(a: &GSet, epsilon: f64) -> Result<Self> {
        let mut q = BTreeMap::new();
        let n = a.len() as f64;
        let e2 = energy(a, a)?;
        q.insert("E".into(), Quantity::Exact(e2));
        q.insert("E_3".into(), Quantity::Exact(e_k(a, 3)?));
        q.insert("E_4".into(), Quantity::Exact(e_k(a, 4)?));
        for k in 2..=4 {
            q.insert(format!("T_{k}"), Quantity::Exact(t_energy_uniform(a, k)?));
            q.insert(format!("sigma_{k}"), Quantity::Exact(sigma_k(a, k)?));
        }
        if !a.is_empty() {
            let k_energy = n.powi(3) / e2 as f64;
            q.insert("K".into(), Quantity::Real(k_energy));
            for l in 2..=4 {
                let t = q[&format!("T_{l}")].as_f64();
                q.insert(format!("c_{l}"), Quantity::Real(t / n.powi(2 * l - 1)));
            }
            q.insert("kappa_3".into(), Quantity::Real(q["E_3"].as_f64() / n.powi(4)));
            q.insert("kappa_4".into(), Quantity::Real(q["E_4"].as_f64() / n.powi(5)));
            // E_{3+eps} = M |A|^{4+eps} / K^{2+eps}
            let e3eps = higher_energy(a, a, 3.0 + epsilon)?;
            let m = e3eps * k_energy.powf(2.0 + epsilon) / n.powf(4.0 + epsilon);
            q.insert("E_3+eps".into(), Quantity::Real(e3eps));
            q.insert("epsilon".into(), Quantity::Real(epsilon));
            q.insert("M".into(), Quantity::Real(m));
        }
        Ok(Self { size: a.len(), group_order: a.group().order(), backend: Backend::Direct, quantities: q })
    }
}
