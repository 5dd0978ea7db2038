//! Dense complex functions on a group, with the Fourier transform
//! `f^(xi) = sum_x f(x) e(-xi . x)` and the convolution operators.
//!
//! Two transform routes are provided: [`GFunction::fourier_naive`] evaluates
//! the defining sum directly in `O(N^2)` and serves as the reference, while
//! [`GFunction::fourier_transform`] runs a Walsh-Hadamard butterfly for
//! `F_2^d` and one FFT per cyclic axis otherwise.

use std::f64::consts::TAU;

use rustfft::FftPlanner;

use super::GroupSpec;
use crate::error::{Error, Result};
use crate::set::GSet;

pub type Complex = rustfft::num_complex::Complex64;

/// Largest tolerated distance from an integer when snapping counts.
pub const SNAP_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct GFunction {
    group: GroupSpec,
    values: Vec<Complex>,
}

#[derive(Clone, Copy)]
enum Direction {
    Forward,
    Inverse,
}

impl GFunction {
    pub fn zeros(group: &GroupSpec) -> Self {
        Self { group: group.clone(), values: vec![Complex::new(0.0, 0.0); group.order()] }
    }

    pub fn from_values(group: &GroupSpec, values: Vec<Complex>) -> Result<Self> {
        if values.len() != group.order() {
            return Err(Error::InvalidArgument(format!(
                "{} values supplied for a group of order {}",
                values.len(),
                group.order()
            )));
        }
        Ok(Self { group: group.clone(), values })
    }

    pub fn from_real(group: &GroupSpec, values: &[f64]) -> Result<Self> {
        Self::from_values(group, values.iter().map(|&v| Complex::new(v, 0.0)).collect())
    }

    /// The characteristic function of `set`.
    pub fn indicator(set: &GSet) -> Self {
        let mut f = Self::zeros(set.group());
        for &x in set.elements() {
            f.values[x] = Complex::new(1.0, 0.0);
        }
        f
    }

    pub fn delta(group: &GroupSpec, x: usize) -> Self {
        let mut f = Self::zeros(group);
        f.values[x] = Complex::new(1.0, 0.0);
        f
    }

    pub fn constant(group: &GroupSpec, c: Complex) -> Self {
        Self { group: group.clone(), values: vec![c; group.order()] }
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn values(&self) -> &[Complex] {
        &self.values
    }

    pub fn value(&self, x: usize) -> Complex {
        self.values[x]
    }

    pub fn map(&self, f: impl Fn(Complex) -> Complex) -> Self {
        Self { group: self.group.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    /// `x -> f(-x)`.
    pub fn reflect(&self) -> Self {
        let mut out = Self::zeros(&self.group);
        for (x, &v) in self.values.iter().enumerate() {
            out.values[self.group.neg(x)] = v;
        }
        out
    }

    /// `x -> f(lambda x)`.
    pub fn compose_scale(&self, lambda: i64) -> Self {
        let values = (0..self.group.order())
            .map(|x| self.values[self.group.scale(x, lambda)])
            .collect();
        Self { group: self.group.clone(), values }
    }

    pub fn pointwise_mul(&self, other: &GFunction) -> Result<Self> {
        self.group.check_same(&other.group)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(Self { group: self.group.clone(), values })
    }

    /// `sum_x |f(x)|^2`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    /// `sum_x |f(x)|^p`.
    pub fn lp_sum(&self, p: f64) -> f64 {
        self.values.iter().map(|v| v.norm().powf(p)).sum()
    }

    pub fn max_abs_diff(&self, other: &GFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn fourier_transform(&self) -> Self {
        self.transform(Direction::Forward)
    }

    /// `f(x) = (1/N) sum_xi f^(xi) e(xi . x)`.
    pub fn inverse_fourier(&self) -> Self {
        let mut out = self.transform(Direction::Inverse);
        let n = self.group.order() as f64;
        for v in &mut out.values {
            *v /= n;
        }
        out
    }

    /// Reference transform evaluating the defining sum directly.
    pub fn fourier_naive(&self) -> Self {
        self.naive(-1.0)
    }

    pub fn inverse_naive(&self) -> Self {
        let mut out = self.naive(1.0);
        let n = self.group.order() as f64;
        for v in &mut out.values {
            *v /= n;
        }
        out
    }

    fn naive(&self, sign: f64) -> Self {
        let g = &self.group;
        let values = (0..g.order())
            .map(|xi| {
                self.values
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| v.re != 0.0 || v.im != 0.0)
                    .map(|(x, &v)| v * Complex::from_polar(1.0, sign * TAU * g.pairing(xi, x)))
                    .sum()
            })
            .collect();
        Self { group: g.clone(), values }
    }

    fn transform(&self, direction: Direction) -> Self {
        let mut values = self.values.clone();
        if self.group.is_binary() {
            walsh_hadamard(&mut values);
        } else {
            let mut planner = FftPlanner::<f64>::new();
            let n_total = self.group.order();
            for (&n, &stride) in self.group.factors().iter().zip(self.group.strides()) {
                let fft = match direction {
                    Direction::Forward => planner.plan_fft_forward(n),
                    Direction::Inverse => planner.plan_fft_inverse(n),
                };
                let block = n * stride;
                let mut line = vec![Complex::new(0.0, 0.0); n];
                for base in (0..n_total).step_by(block) {
                    for inner in 0..stride {
                        for (j, slot) in line.iter_mut().enumerate() {
                            *slot = values[base + inner + j * stride];
                        }
                        fft.process(&mut line);
                        for (j, &v) in line.iter().enumerate() {
                            values[base + inner + j * stride] = v;
                        }
                    }
                }
            }
        }
        Self { group: self.group.clone(), values }
    }

    /// `(f * g)(x) = sum_y f(y) g(x - y)`, computed through the transform.
    pub fn convolve(&self, other: &GFunction) -> Result<Self> {
        let prod = self.fourier_transform().pointwise_mul(&other.fourier_transform())?;
        Ok(prod.inverse_fourier())
    }

    /// `(f o g)(x) = sum_y f(y) g(y + x)`, using `(f o g)^ = conj((conj f)^) g^`.
    pub fn correlate(&self, other: &GFunction) -> Result<Self> {
        let left = self.conj().fourier_transform().conj();
        let prod = left.pointwise_mul(&other.fourier_transform())?;
        Ok(prod.inverse_fourier())
    }

    /// `f *_k f`: `k = 1` is `f` itself.
    pub fn k_fold_convolve(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("k-fold convolution needs k >= 1".into()));
        }
        let hat = self.fourier_transform();
        let powered = hat.map(|v| v.powu(k as u32));
        Ok(powered.inverse_fourier())
    }

    /// Direct `O(N * |supp f|)` convolution.
    pub fn convolve_direct(&self, other: &GFunction) -> Result<Self> {
        self.group.check_same(&other.group)?;
        let g = &self.group;
        let mut out = Self::zeros(g);
        for (y, &fy) in self.values.iter().enumerate() {
            if fy == Complex::new(0.0, 0.0) {
                continue;
            }
            for (z, &gz) in other.values.iter().enumerate() {
                out.values[g.add(y, z)] += fy * gz;
            }
        }
        Ok(out)
    }

    /// Direct `O(N * |supp f|)` correlation.
    pub fn correlate_direct(&self, other: &GFunction) -> Result<Self> {
        self.group.check_same(&other.group)?;
        let g = &self.group;
        let mut out = Self::zeros(g);
        for (y, &fy) in self.values.iter().enumerate() {
            if fy == Complex::new(0.0, 0.0) {
                continue;
            }
            for (z, &gz) in other.values.iter().enumerate() {
                out.values[g.sub(z, y)] += fy * gz;
            }
        }
        Ok(out)
    }

    /// Rounds every value to a nonnegative integer, failing when a value is
    /// further than [`SNAP_TOLERANCE`] from one.
    pub fn snap_counts(&self) -> Result<Vec<u64>> {
        self.values
            .iter()
            .enumerate()
            .map(|(rank, v)| snap(v.re, v.im).map_err(|residual| Error::NotIntegral { rank, residual }))
            .collect()
    }

    /// Snaps a single complex value to a nonnegative integer.
    pub fn snap_scalar(value: Complex) -> Result<u64> {
        snap(value.re, value.im).map_err(|residual| Error::NotIntegral { rank: 0, residual })
    }
}

fn snap(re: f64, im: f64) -> std::result::Result<u64, f64> {
    let rounded = re.round();
    let residual = (re - rounded).abs().max(im.abs());
    if residual < SNAP_TOLERANCE.max(re.abs() * 1e-12) && rounded >= 0.0 {
        Ok(rounded as u64)
    } else {
        Err(residual)
    }
}

fn walsh_hadamard(values: &mut [Complex]) {
    let n = values.len();
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (values[i], values[i + h]);
                values[i] = a + b;
                values[i + h] = a - b;
            }
        }
        h *= 2;
    }
}
