//! Constructive pipelines that chain the extractors, plus growth measurements.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::montecarlo::concentration_mc_with;
use crate::dissociation::{additive_dimension, DimensionConfig, DimensionValue};
use crate::energy::{e_k, energy, higher_energy, t_energy_uniform};
use crate::error::{Error, Result};
use crate::extract::{extract_energy_subset, extract_tk_subset, ExtractorConfig};
use crate::group::Counts;
use crate::record::InequalityRecord;
use crate::set::{fiber, popular_differences, signed_combination, GSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub extractor: ExtractorConfig,
    pub dimension: DimensionConfig,
    /// Most shift vectors enumerated when scanning fibers.
    pub fiber_cap: usize,
    pub trials: u64,
    pub seed: u64,
    /// Run hypothesis-gated pipelines even when the hypothesis fails.
    pub force: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            extractor: ExtractorConfig::default(),
            dimension: DimensionConfig::default(),
            fiber_cap: 1 << 20,
            trials: 400,
            seed: 0,
            force: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmallDimVariant {
    /// Hypothesis on `E(A)`.
    Energy,
    /// Hypothesis on `E_{3/2}(A)`.
    E32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub branch: &'static str,
    pub subset: GSet,
    pub dim: DimensionValue,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineResult {
    pub subset: GSet,
    pub dim: DimensionValue,
    /// Branch that produced `subset`.
    pub chosen: &'static str,
    pub candidates: Vec<Candidate>,
    /// Degenerate input; `subset` is the input itself.
    pub trivial: bool,
    /// Hypothesis not met and not forced.
    pub skipped: Option<String>,
    pub components: BTreeMap<String, f64>,
}

impl PipelineResult {
    fn passthrough(a: &GSet, cfg: &PipelineConfig, components: BTreeMap<String, f64>) -> Self {
        let dim = additive_dimension(a, &cfg.dimension);
        Self {
            subset: a.clone(),
            dim,
            chosen: "input",
            candidates: Vec::new(),
            trivial: true,
            skipped: None,
            components,
        }
    }

    fn pick(mut candidates: Vec<Candidate>, components: BTreeMap<String, f64>) -> Self {
        candidates.retain(|c| !c.subset.is_empty());
        let best = candidates
            .iter()
            .min_by_key(|c| (c.dim.value, std::cmp::Reverse(c.subset.len())))
            .expect("at least one nonempty candidate")
            .clone();
        Self {
            subset: best.subset,
            dim: best.dim,
            chosen: best.branch,
            candidates,
            trivial: false,
            skipped: None,
            components,
        }
    }
}

fn candidate(branch: &'static str, subset: GSet, cfg: &PipelineConfig) -> Candidate {
    let dim = additive_dimension(&subset, &cfg.dimension);
    Candidate { branch, subset, dim }
}

/// Distinct nonempty fibers `A ∩ (A - s_1) ∩ ... ∩ (A - s_depth)` over shifts in `(A - A)^depth`.
pub fn distinct_fibers(a: &GSet, depth: usize, cap: usize) -> Result<Vec<GSet>> {
    let diffs = a.difference_set(a)?;
    let d = diffs.elements();
    let count = (d.len() as u128).checked_pow(depth as u32).unwrap_or(u128::MAX);
    if count > cap as u128 {
        return Err(Error::CapExceeded { what: "fiber shift vectors", size: count, cap: cap as u128 });
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut idx = vec![0usize; depth];
    loop {
        let shifts: Vec<usize> = idx.iter().map(|&i| d[i]).collect();
        let f = fiber(a, a, &shifts)?;
        if !f.is_empty() && seen.insert(f.elements().to_vec()) {
            out.push(f);
        }
        // odometer over (A - A)^depth
        let mut pos = 0;
        loop {
            if pos == depth {
                return Ok(out);
            }
            idx[pos] += 1;
            if idx[pos] < d.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

fn best_fiber(a: &GSet, fibers: &[GSet], min_size: f64) -> Result<Option<GSet>> {
    let mut best: Option<(f64, &GSet)> = None;
    for f in fibers.iter().filter(|f| f.len() as f64 >= min_size) {
        let score = energy(a, f)? as f64 / (f.len() as f64).powi(2);
        if best.is_none_or(|(s, _)| score > s) {
            best = Some((score, f));
        }
    }
    Ok(best.map(|(_, f)| f.clone()))
}

/// Subset of `A` of small dimension, built along the two branches of the proof
/// and returning the one with the smaller measured dimension.
///
/// Energy variant: `P = {x : (A o A)(x) >= |A| / 2K}`, `P'` from the energy
/// extractor on `(P, P)`, then `B = A ∩ (P' + x)` for `x` maximizing `(P' o A)(x)`;
/// the fiber branch extracts from the best `A_s` or `A_t` as the proof's case
/// split selects. The `E_{3/2}` variant pairs fibers `A_s, A_t` and, as second
/// branch, runs the `T_4` extractor on `A`.
pub fn small_dim_pipeline(a: &GSet, variant: SmallDimVariant, cfg: &PipelineConfig) -> Result<PipelineResult> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = a.len() as f64;
    let e = energy(a, a)?;
    let mut c = BTreeMap::from([("E".to_string(), e as f64), ("|A|".to_string(), n)]);
    if e as f64 <= n * n {
        return Ok(PipelineResult::passthrough(a, cfg, c));
    }
    let e3 = e_k(a, 3)? as f64;
    let e4 = e_k(a, 4)? as f64;
    let (kappa3, kappa4) = (e3 / n.powi(4), e4 / n.powi(5));
    c.insert("kappa_3".into(), kappa3);
    c.insert("kappa_4".into(), kappa4);
    match variant {
        SmallDimVariant::Energy => {
            let k = n.powi(3) / e as f64;
            // E_4 = M |A|^5 / K^3
            let m = e4 * k.powi(3) / n.powi(5);
            c.insert("K".into(), k);
            c.insert("M".into(), m);
            let p = popular_differences(a, n / (2.0 * k));
            let p_prime = extract_energy_subset(&p, &p, &cfg.extractor)?.subset;
            let corr = Counts::indicator(&p_prime).correlate(&Counts::indicator(a))?;
            let (x, hits) =
                corr.values().iter().enumerate().max_by_key(|&(x, &v)| (v, std::cmp::Reverse(x))).expect("nonempty");
            c.insert("|P|".into(), p.len() as f64);
            c.insert("|P'|".into(), p_prime.len() as f64);
            c.insert("(P' o A)(x)".into(), *hits as f64);
            let b1 = a.intersection(&p_prime.translate(x))?;
            let mut cands = vec![candidate("popular-differences", b1, cfg)];

            let singles = distinct_fibers(a, 1, cfg.fiber_cap)?;
            let doubles = distinct_fibers(a, 2, cfg.fiber_cap)?;
            let a_t = best_fiber(a, &singles, kappa3 * n / 2.0)?;
            let a_s = best_fiber(a, &doubles, kappa4 * n / 2.0)?;
            let prefer_s = kappa4 / kappa3 >= m.sqrt() / k;
            c.insert("prefer_s".into(), f64::from(u8::from(prefer_s)));
            let chosen = if prefer_s { a_s.or(a_t) } else { a_t.or(a_s) };
            if let Some(f) = chosen {
                c.insert("|fiber|".into(), f.len() as f64);
                let b2 = extract_energy_subset(a, &f, &cfg.extractor)?.subset;
                cands.push(candidate("fiber", b2, cfg));
            }
            Ok(PipelineResult::pick(cands, c))
        }
        SmallDimVariant::E32 => {
            let e32 = higher_energy(a, a, 1.5)?;
            let k = (n.powf(2.5) / e32).powi(2);
            let t4 = t_energy_uniform(a, 4)? as f64;
            let m = t4 * k.powi(3) / n.powi(7);
            c.insert("E_1.5".into(), e32);
            c.insert("K".into(), k);
            c.insert("M".into(), m);
            let singles = distinct_fibers(a, 1, cfg.fiber_cap)?;
            let big: Vec<&GSet> = singles.iter().filter(|f| f.len() as f64 >= kappa4 * n / 4.0).collect();
            let mut best: Option<(f64, &GSet, &GSet)> = None;
            for (i, s) in big.iter().enumerate() {
                for t in &big[i..] {
                    let score = energy(s, t)? as f64 / (s.len() as f64 * t.len() as f64).powf(1.5);
                    if best.is_none_or(|(b, _, _)| score > b) {
                        best = Some((score, s, t));
                    }
                }
            }
            let mut cands = Vec::new();
            if let Some((_, s, t)) = best {
                // Cauchy-Schwarz: one of the two has large self-energy.
                let ratio = |f: &GSet| Ok::<_, Error>(energy(f, f)? as f64 / (f.len() as f64).powi(3));
                let x = if ratio(s)? >= ratio(t)? { s } else { t };
                c.insert("|fiber|".into(), x.len() as f64);
                let b1 = extract_energy_subset(x, x, &cfg.extractor)?.subset;
                cands.push(candidate("fiber-pair", b1, cfg));
            }
            let b2 = extract_tk_subset(a, 4, &cfg.extractor)?.subset;
            cands.push(candidate("t4-extractor", b2, cfg));
            Ok(PipelineResult::pick(cands, c))
        }
    }
}

/// Largest `s` used by the sampling pipeline, fixed by the `T*_s` budget.
pub const S_CAP: usize = 4;

/// Sampling pipeline for a large set of small dimension under a `T_k` hypothesis.
///
/// `s = min(floor(log |A|), 4)`, `d ~ |A| T_s^{-1/2s} log^{3/2} |A|`, `sigma ~ |A| / d^2`;
/// the resulting `A'` is the largest span witness found by [`concentration_mc_with`].
pub fn better_tk_pipeline(a: &GSet, k: usize, cfg: &PipelineConfig) -> Result<PipelineResult> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k must be at least 2, got {k}")));
    }
    let n = a.len() as f64;
    let log_n = n.log2();
    let tk = t_energy_uniform(a, k)? as f64;
    let c_val = tk / n.powi(2 * k as i32 - 1);
    let s_raw = log_n.floor().max(1.0) as usize;
    let s = s_raw.min(S_CAP);
    let mut c = BTreeMap::from([
        ("c".to_string(), c_val),
        ("k".to_string(), k as f64),
        ("s".to_string(), s as f64),
        ("s_uncapped".to_string(), s_raw as f64),
        ("s_cap".to_string(), S_CAP as f64),
    ]);
    let threshold = 10f64.powi(k as i32) * n.powi(k as i32) * log_n.powi(2 * k as i32);
    c.insert("hypothesis_rhs".into(), threshold);
    let hypothesis = k < s_raw && tk >= threshold;
    if !hypothesis && !cfg.force {
        let mut r = PipelineResult::passthrough(a, cfg, c);
        r.trivial = false;
        r.skipped = Some(format!(
            "needs 2 <= k < floor(log|A|) and T_k >= 10^k |A|^k log^(2k) |A| (T_k = {tk}, rhs = {threshold:.3e})"
        ));
        return Ok(r);
    }
    let ts = t_energy_uniform(a, s)? as f64;
    let d_real = n * ts.powf(-1.0 / (2 * s) as f64) * log_n.powf(1.5);
    let d = (d_real.round() as usize).clamp(1, a.len().min(cfg.dimension.exact_cap));
    let sigma = n / (d * d) as f64;
    c.insert("d_real".into(), d_real);
    c.insert("d".into(), d as f64);
    c.insert("sigma".into(), sigma);
    let mc = concentration_mc_with(a, d, sigma, cfg.trials, cfg.seed, &cfg.dimension)?;
    c.insert("hits".into(), mc.hits as f64);
    let ck = c_val.powf(1.0 / (k - 1) as f64);
    c.insert("size_target".into(), ck * n / log_n.powi(3) * (ck * n).log2());
    c.insert("dim_target".into(), c_val.powf(-1.0 / (2 * (k - 1)) as f64) * log_n.powf(1.5));
    match mc.best {
        Some(w) => {
            let subset = GSet::from_ranks(a.group(), w.subset)?;
            let cand = candidate("span-witness", subset, cfg);
            Ok(PipelineResult::pick(vec![cand], c))
        }
        None => {
            let mut r = PipelineResult::passthrough(a, cfg, c);
            r.trivial = false;
            r.chosen = "no-witness";
            Ok(r)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DilateReport {
    pub lambdas: Vec<i64>,
    pub size: usize,
    pub combination_size: usize,
    /// `|A + A| / |A|`.
    pub k_sum: f64,
    /// `max(|A + A|, |A - A|) / |A|`.
    pub k_pm: f64,
    pub record: InequalityRecord,
}

/// `|lambda_1 A + ... + lambda_k A|` against both exponent forms.
///
/// The record's ratio is `log2(|sum| / |A|) / (log^8 K (k + log sum |lambda_i|))`;
/// the quotient for the other form, `log_K(|sum| / |A|) / sum log(1 + |lambda_i|)`,
/// is component `bukh_ratio`.
pub fn dilate_growth_measure(a: &GSet, lambdas: &[i64]) -> Result<DilateReport> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    if lambdas.is_empty() || lambdas.contains(&0) {
        return Err(Error::InvalidArgument("need a nonempty list of nonzero dilations".into()));
    }
    let terms: Vec<(i64, &GSet)> = lambdas.iter().map(|&l| (l, a)).collect();
    let comb = signed_combination(&terms)?;
    let n = a.len() as f64;
    let k_sum = a.sumset(a)?.len() as f64 / n;
    let k_pm = (a.sumset(a)?.len().max(a.difference_set(a)?.len())) as f64 / n;
    let growth = (comb.len() as f64 / n).log2();
    let abs_sum: f64 = lambdas.iter().map(|l| l.unsigned_abs() as f64).sum();
    let sanders_arg = k_sum.log2().powi(8) * (lambdas.len() as f64 + abs_sum.log2());
    let bukh_arg: f64 = lambdas.iter().map(|l| (1.0 + l.unsigned_abs() as f64).log2()).sum();
    let bukh_ratio = if k_pm > 1.0 { growth / k_pm.log2() / bukh_arg } else { 0.0 };
    let record = InequalityRecord::ratio_only("sums-of-dilates", growth, sanders_arg)
        .with("|sum|", comb.len() as f64)
        .with("|A|", n)
        .with("K", k_sum)
        .with("K_pm", k_pm)
        .with("bukh_exponent", bukh_arg)
        .with("bukh_ratio", bukh_ratio);
    Ok(DilateReport {
        lambdas: lambdas.to_vec(),
        size: a.len(),
        combination_size: comb.len(),
        k_sum,
        k_pm,
        record,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::generate::{generate, GenSpec};
    use crate::group::GroupSpec;

    #[test]
    fn subgroup_pipeline_returns_subgroup() {
        let g = GroupSpec::binary(5).unwrap();
        let h = GSet::subgroup_generated(&g, &[1, 2, 4]).unwrap();
        let cfg = PipelineConfig::default();
        let r = small_dim_pipeline(&h, SmallDimVariant::Energy, &cfg).unwrap();
        assert_eq!(r.components["K"], 1.0);
        assert_eq!(r.subset, h);
        assert_eq!(r.dim.value, 3);
        let r = small_dim_pipeline(&h, SmallDimVariant::E32, &cfg).unwrap();
        assert_eq!(r.subset, h);
    }

    #[test]
    fn subspace_plus_dissociated_recovers_subspace() {
        let spec = GenSpec::SubspacePlusDissociated { n: 8, k: 3, lambda: 4, independent: true };
        let out = generate(&spec, 6).unwrap();
        let h = &out.parts["H"];
        let cfg = PipelineConfig::default();
        let r = small_dim_pipeline(&out.set, SmallDimVariant::Energy, &cfg).unwrap();
        assert!(r.subset.is_subset(&out.set));
        assert!(r.subset.intersection(h).unwrap().len() * 2 >= h.len());
        assert!(r.dim.value <= 3 + 1);
        assert!(r.candidates.iter().all(|c| c.subset.is_subset(&out.set) && !c.subset.is_empty()));
    }

    #[test]
    fn random_pipeline_postconditions() {
        let a = generate(&GenSpec::RandomSubset { group: GroupSpec::cyclic(128).unwrap(), size: 14 }, 3).unwrap().set;
        let cfg = PipelineConfig::default();
        for v in [SmallDimVariant::Energy, SmallDimVariant::E32] {
            let r = small_dim_pipeline(&a, v, &cfg).unwrap();
            assert!(!r.subset.is_empty() && r.subset.is_subset(&a));
            assert!(r.components.contains_key("M"));
        }
    }

    #[test]
    fn singleton_is_degenerate() {
        let a = GSet::from_ranks(&GroupSpec::cyclic(9).unwrap(), [4]).unwrap();
        let r = small_dim_pipeline(&a, SmallDimVariant::Energy, &PipelineConfig::default()).unwrap();
        assert!(r.trivial);
        assert_eq!(r.subset, a);
    }

    #[test]
    fn better_tk_examples() {
        let g = GroupSpec::binary(6).unwrap();
        let h = GSet::subgroup_generated(&g, &[1, 2, 4, 8]).unwrap();
        let cfg = PipelineConfig { force: true, trials: 50, ..PipelineConfig::default() };
        let r = better_tk_pipeline(&h, 2, &cfg).unwrap();
        assert_eq!(r.components["c"], 1.0);
        assert_eq!(r.subset, h);
        assert_eq!(r.dim.value, 4);

        let spec = GenSpec::SubspacePlusDissociated { n: 8, k: 4, lambda: 4, independent: true };
        let out = generate(&spec, 2).unwrap();
        let r = better_tk_pipeline(&out.set, 2, &cfg).unwrap();
        let inside = r.subset.intersection(&out.parts["H"]).unwrap().len();
        assert!(inside * 2 > r.subset.len(), "{inside} of {}", r.subset.len());

        let a = generate(&GenSpec::RandomSubset { group: GroupSpec::cyclic(1024).unwrap(), size: 12 }, 1).unwrap().set;
        let r = better_tk_pipeline(&a, 2, &PipelineConfig::default()).unwrap();
        assert!(r.skipped.is_some());
        assert_eq!(r.components["s_cap"], 4.0);
    }

    #[test]
    fn dilate_examples() {
        let g = GroupSpec::cyclic(1000).unwrap();
        let a = GSet::from_ranks(&g, 0..10).unwrap();
        assert_eq!(dilate_growth_measure(&a, &[1, 2]).unwrap().combination_size, 28);
        assert_eq!(dilate_growth_measure(&a, &[1, -1]).unwrap().combination_size, 19);
        let z = GroupSpec::cyclic(45).unwrap();
        let h = GSet::subgroup_generated(&z, &[5]).unwrap();
        assert_eq!(dilate_growth_measure(&h, &[1, 2, -4]).unwrap().combination_size, h.len());
        assert!(dilate_growth_measure(&a, &[1, 0]).is_err());
    }

    #[test]
    fn fibers_are_distinct_and_nonempty() {
        let a = GSet::from_ranks(&GroupSpec::cyclic(20).unwrap(), [0, 1, 2, 3, 7]).unwrap();
        let f1 = distinct_fibers(&a, 1, 1 << 10).unwrap();
        assert!(f1.iter().all(|f| !f.is_empty() && f.is_subset(&a)));
        assert!(f1.contains(&a));
        assert!(distinct_fibers(&a, 3, 10).is_err());
    }
}
