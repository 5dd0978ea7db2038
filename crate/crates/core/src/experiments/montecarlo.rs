//! Sampling experiment for the dimension of random d-element draws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dissociation::{additive_dimension, span_of, DimensionConfig};
use crate::error::{Error, Result};
use crate::set::GSet;

/// 97.5% standard normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Per-trial generator: the root seed with the trial index as stream.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Wilson score interval at 95%.
pub fn wilson_interval(hits: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (p, n) = (hits as f64 / n as f64, n as f64);
    let z2 = Z95 * Z95;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    let lo = if hits == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if hits as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub l: usize,
    /// Empirical `P(dim(sample) <= d - l)`.
    pub p: f64,
    pub lo: f64,
    pub hi: f64,
}

/// `A' = Span(W) ∩ A` for a maximal dissociated `W` of one sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpanWitness {
    pub trial: u64,
    pub w: Vec<usize>,
    pub subset: Vec<usize>,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub d: usize,
    pub sigma: f64,
    pub trials: u64,
    pub seed: u64,
    /// `tail[l]` for `l = 0..=d`; non-increasing by construction.
    pub tail: Vec<TailPoint>,
    /// Same tail for `distinct(sample) - dim(sample)`, i.e. deficiency beyond repeated draws.
    pub tail_beyond_repeats: Vec<TailPoint>,
    /// Trials whose sample dimension came from an inexact search.
    pub inexact_trials: u64,
    /// Trials whose witness satisfies `|A'| >= sigma dim(A')` with `dim(A')` exact.
    pub hits: u64,
    /// Largest hit, ties to the earliest trial.
    pub best: Option<SpanWitness>,
}

struct Trial {
    deficiency: usize,
    beyond: usize,
    exact: bool,
    hit: Option<SpanWitness>,
}

fn run_trial(a: &GSet, d: usize, sigma: f64, seed: u64, t: u64, cfg: &DimensionConfig) -> Trial {
    let g = a.group();
    let mut rng = trial_rng(seed, t);
    let draws: Vec<usize> = (0..d).map(|_| a.elements()[rng.gen_range(0..a.len())]).collect();
    let sample = GSet::from_ranks(g, draws.iter().copied()).expect("draws lie in the group");
    let dim = additive_dimension(&sample, cfg);
    // Maximal dissociated subset of the draws, in draw order.
    let mut w: Vec<usize> = Vec::new();
    let mut span = span_of(g, &[]);
    for &x in &draws {
        if !span.contains(x) {
            w.push(x);
            span = span_of(g, &w);
        }
    }
    let inside = a.intersection(&span).expect("same group");
    let inside_dim = additive_dimension(&inside, cfg);
    let hit = (inside_dim.exact && inside.len() as f64 >= sigma * inside_dim.value as f64).then(|| SpanWitness {
        trial: t,
        w,
        subset: inside.elements().to_vec(),
        dim: inside_dim.value,
    });
    Trial { deficiency: d - dim.value, beyond: sample.len() - dim.value, exact: dim.exact, hit }
}

fn tail_of(values: impl Iterator<Item = usize>, d: usize, trials: u64) -> Vec<TailPoint> {
    let mut hist = vec![0u64; d + 1];
    for v in values {
        hist[v.min(d)] += 1;
    }
    let mut cum = 0u64;
    let mut tail: Vec<TailPoint> = (0..=d)
        .rev()
        .map(|l| {
            cum += hist[l];
            let (lo, hi) = wilson_interval(cum, trials);
            TailPoint { l, p: cum as f64 / trials as f64, lo, hi }
        })
        .collect();
    tail.reverse();
    tail
}

/// Draws `d` elements of `A` uniformly with replacement, `trials` times.
///
/// Trials run in parallel; trial `t` uses stream `t` of the root seed, and the
/// results are merged in trial order, so the report depends only on the inputs.
pub fn concentration_mc(a: &GSet, d: usize, sigma: f64, trials: u64, seed: u64) -> Result<ConcentrationReport> {
    concentration_mc_with(a, d, sigma, trials, seed, &DimensionConfig::default())
}

pub fn concentration_mc_with(
    a: &GSet,
    d: usize,
    sigma: f64,
    trials: u64,
    seed: u64,
    cfg: &DimensionConfig,
) -> Result<ConcentrationReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    if d == 0 || d > cfg.exact_cap {
        return Err(Error::InvalidArgument(format!("sample size d = {d} must be in 1..={}", cfg.exact_cap)));
    }
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::InvalidArgument(format!("sigma must be finite and nonnegative, got {sigma}")));
    }
    let results: Vec<Trial> = (0..trials).into_par_iter().map(|t| run_trial(a, d, sigma, seed, t, cfg)).collect();
    let tail = tail_of(results.iter().map(|r| r.deficiency), d, trials);
    let tail_beyond_repeats = tail_of(results.iter().map(|r| r.beyond), d, trials);
    let inexact_trials = results.iter().filter(|r| !r.exact).count() as u64;
    let hits = results.iter().filter(|r| r.hit.is_some()).count() as u64;
    let best = results
        .into_iter()
        .filter_map(|r| r.hit)
        .fold(None, |best: Option<SpanWitness>, h| match best {
            Some(b) if b.subset.len() >= h.subset.len() => Some(b),
            _ => Some(h),
        });
    Ok(ConcentrationReport { d, sigma, trials, seed, tail, tail_beyond_repeats, inexact_trials, hits, best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::generate::{generate, GenSpec};
    use crate::group::GroupSpec;

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
        let (lo, hi) = wilson_interval(50, 100);
        assert!(lo < 0.5 && hi > 0.5 && (0.5 - lo - (hi - 0.5)).abs() < 1e-12);
        assert_eq!(wilson_interval(100, 100).1, 1.0);
    }

    #[test]
    fn dissociated_samples_lose_nothing_beyond_repeats() {
        let a = generate(&GenSpec::Dissociated { group: GroupSpec::cyclic(4096).unwrap(), size: 8 }, 1).unwrap().set;
        let r = concentration_mc(&a, 6, 1.0, 300, 4).unwrap();
        assert_eq!(r.tail_beyond_repeats[0].p, 1.0);
        assert!(r.tail_beyond_repeats[1..].iter().all(|t| t.p == 0.0));
        // Repeats do occur with 6 draws from 8 elements.
        assert!(r.tail[1].p > 0.0);
    }

    #[test]
    fn subspace_sample_is_deficient() {
        let a = generate(&GenSpec::Subspace { n: 8, k: 5 }, 2).unwrap().set;
        let r = concentration_mc(&a, 8, 1.0, 200, 5).unwrap();
        assert_eq!(r.tail[3].p, 1.0);
        assert!(r.tail.windows(2).all(|w| w[1].p <= w[0].p));
        assert!(r.hits > 0);
    }

    #[test]
    fn deterministic_and_validated() {
        let a = GSet::from_ranks(&GroupSpec::cyclic(64).unwrap(), [1, 3, 9, 10, 20, 33, 40]).unwrap();
        let r1 = concentration_mc(&a, 4, 2.0, 64, 11).unwrap();
        let r2 = concentration_mc(&a, 4, 2.0, 64, 11).unwrap();
        assert_eq!(r1, r2);
        assert!(concentration_mc(&a, 4, 2.0, 0, 11).is_err());
        assert!(concentration_mc(&a, 0, 2.0, 3, 11).is_err());
    }
}
