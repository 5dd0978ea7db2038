//! Exact integer counting functions.
//!
//! Convolutions of indicator functions count representations, so they are
//! kept as `u64` arrays and combined by enumerating supports. This is the
//! exact backend; the transform route in [`super::GFunction`] cross-checks it.

use super::{GFunction, GroupSpec};
use crate::error::{Error, Result};
use crate::set::GSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counts {
    group: GroupSpec,
    values: Vec<u64>,
}

impl Counts {
    pub fn zeros(group: &GroupSpec) -> Self {
        Self { group: group.clone(), values: vec![0; group.order()] }
    }

    pub fn from_values(group: &GroupSpec, values: Vec<u64>) -> Result<Self> {
        if values.len() != group.order() {
            return Err(Error::InvalidArgument(format!(
                "{} counts supplied for a group of order {}",
                values.len(),
                group.order()
            )));
        }
        Ok(Self { group: group.clone(), values })
    }

    pub fn indicator(set: &GSet) -> Self {
        let mut c = Self::zeros(set.group());
        for &x in set.elements() {
            c.values[x] = 1;
        }
        c
    }

    pub fn delta(group: &GroupSpec, x: usize) -> Self {
        let mut c = Self::zeros(group);
        c.values[x] = 1;
        c
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn get(&self, x: usize) -> u64 {
        self.values[x]
    }

    pub fn support(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.values.iter().enumerate().filter(|(_, &v)| v != 0).map(|(x, &v)| (x, v))
    }

    pub fn support_size(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0).count()
    }

    pub fn total(&self) -> u64 {
        self.values.iter().sum()
    }

    pub fn sum_squares(&self) -> u64 {
        self.values.iter().map(|&v| v * v).sum()
    }

    /// `sum_x self(x) other(x)`.
    pub fn dot(&self, other: &Counts) -> Result<u64> {
        self.group.check_same(&other.group)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum())
    }

    pub fn convolve(&self, other: &Counts) -> Result<Counts> {
        self.group.check_same(&other.group)?;
        let g = &self.group;
        let right: Vec<(usize, u64)> = other.support().collect();
        let mut out = Counts::zeros(g);
        for (y, a) in self.support() {
            for &(z, b) in &right {
                out.values[g.add(y, z)] += a * b;
            }
        }
        Ok(out)
    }

    /// `(f o g)(x) = sum_y f(y) g(y + x)`.
    pub fn correlate(&self, other: &Counts) -> Result<Counts> {
        self.group.check_same(&other.group)?;
        let g = &self.group;
        let right: Vec<(usize, u64)> = other.support().collect();
        let mut out = Counts::zeros(g);
        for (y, a) in self.support() {
            for &(z, b) in &right {
                out.values[g.sub(z, y)] += a * b;
            }
        }
        Ok(out)
    }

    /// `self *_k self`.
    pub fn k_fold(&self, k: usize) -> Result<Counts> {
        if k == 0 {
            return Err(Error::InvalidArgument("k-fold convolution needs k >= 1".into()));
        }
        let mut acc = self.clone();
        for _ in 1..k {
            acc = acc.convolve(self)?;
        }
        Ok(acc)
    }

    /// Push-forward along `x -> lambda x`: counts how many preimages land on each point.
    pub fn dilate(&self, lambda: i64) -> Counts {
        let mut out = Counts::zeros(&self.group);
        for (x, v) in self.support() {
            out.values[self.group.scale(x, lambda)] += v;
        }
        out
    }

    pub fn to_gfunction(&self) -> GFunction {
        let values = self.values.iter().map(|&v| super::Complex::new(v as f64, 0.0)).collect();
        GFunction::from_values(&self.group, values).expect("lengths agree")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_and_transform_routes_agree() {
        let g = GroupSpec::cyclic(10).unwrap();
        let a = GSet::from_ranks(&g, [0, 1, 2, 7]).unwrap();
        let c = Counts::indicator(&a);
        let f = GFunction::indicator(&a);
        assert_eq!(c.convolve(&c).unwrap().values(), f.convolve(&f).unwrap().snap_counts().unwrap());
        assert_eq!(c.correlate(&c).unwrap().values(), f.correlate(&f).unwrap().snap_counts().unwrap());
        assert_eq!(c.k_fold(3).unwrap().values(), f.k_fold_convolve(3).unwrap().snap_counts().unwrap());
        assert_eq!(c.k_fold(3).unwrap().total(), 64);
    }

    #[test]
    fn dilation_keeps_multiplicity() {
        let g = GroupSpec::cyclic(8).unwrap();
        let c = Counts::indicator(&GSet::from_ranks(&g, [0, 4]).unwrap());
        let d = c.dilate(2);
        assert_eq!(d.get(0), 2);
        assert_eq!(d.total(), 2);
    }
}
