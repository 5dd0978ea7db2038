//! Families of generated sets run through identity and inequality checks.

use num_bigint::BigUint;
use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{generate, GenSpec, Generated};
use super::montecarlo::{concentration_mc_with, trial_rng};
use super::pipelines::{better_tk_pipeline, dilate_growth_measure, small_dim_pipeline, PipelineConfig, SmallDimVariant, S_CAP};
use crate::dissociation::{
    additive_dimension, dissociated_union_check, partition_str_diss_with, rudin_moment_check, Certification,
    DimensionConfig, PartitionConfig,
};
use crate::energy::{
    distinct_rep_function, e_k, energy, energy_fourier, higher_energy, q_fourier_sum, q_function, sigma_k,
    t_energy_fourier, t_energy_uniform, t_star, DEFAULT_TUPLE_BUDGET,
};
use crate::error::{Error, Result};
use crate::extract::{
    chang_cover, extract_energy_subset, extract_tk_subset, petridis_large_subset, petridis_subset, ruzsa_cover,
    select_disjoint_tuples, ExtractorConfig,
};
use crate::group::{Complex, Counts, GFunction, GroupSpec};
use crate::record::{InequalityRecord, Provenance};
use crate::set::{fiber, m_minus_n, min_convolution_on_support, popular_differences, GSet};

/// A seeded family: `count` sets drawn from one generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub generator: GenSpec,
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for FamilySpec {
    fn default() -> Self {
        Self {
            generator: GenSpec::RandomSubset { group: GroupSpec::cyclic(64).expect("valid"), size: 10 },
            count: 20,
            seed: 0,
        }
    }
}

impl FamilySpec {
    /// Seed of member `i`: the first word of stream `i` of the root seed.
    pub fn member_seed(&self, i: usize) -> u64 {
        trial_rng(self.seed, i as u64).next_u64()
    }

    pub fn members(&self) -> Result<Vec<Member>> {
        (0..self.count)
            .map(|i| {
                let seed = self.member_seed(i);
                Ok(Member { index: i, seed, generated: generate(&self.generator, seed)? })
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Member {
    pub index: usize,
    pub seed: u64,
    pub generated: Generated,
}

impl Member {
    pub fn set(&self) -> &GSet {
        &self.generated.set
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatteryConfig {
    pub epsilon: f64,
    /// Overrides the extractor step constant when set.
    pub eta: Option<f64>,
    pub rudin_c: f64,
    pub rudin_p: Vec<f64>,
    pub union_c: f64,
    pub union_s: Vec<usize>,
    pub fiber_pairs: Vec<(usize, usize)>,
    pub t_levels: Vec<usize>,
    pub sumset_k: usize,
    pub tk_k: usize,
    pub lambdas: Vec<i64>,
    pub partition_l: Vec<usize>,
    pub mc_trials: u64,
    pub force: bool,
    pub tuple_budget: u128,
    pub fiber_cap: usize,
    pub dimension: DimensionConfig,
    pub partition: PartitionConfig,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            eta: None,
            rudin_c: 16.0,
            rudin_p: vec![2.0, 4.0, 6.0],
            union_c: 16.0,
            union_s: vec![2, 3],
            fiber_pairs: vec![(1, 1), (2, 1), (2, 2)],
            t_levels: vec![2, 3],
            sumset_k: 3,
            tk_k: 2,
            lambdas: vec![1, 2],
            partition_l: vec![2, 3],
            mc_trials: 200,
            force: false,
            tuple_budget: DEFAULT_TUPLE_BUDGET,
            fiber_cap: 1 << 20,
            dimension: DimensionConfig::default(),
            partition: PartitionConfig::default(),
        }
    }
}

impl BatteryConfig {
    pub fn extractor(&self) -> Result<ExtractorConfig> {
        let mut cfg = ExtractorConfig::new(self.epsilon)?;
        cfg.partition = self.partition.clone();
        match self.eta {
            Some(eta) => cfg.with_eta(eta),
            None => Ok(cfg),
        }
    }

    pub fn pipeline(&self, seed: u64) -> Result<PipelineConfig> {
        Ok(PipelineConfig {
            extractor: self.extractor()?,
            dimension: self.dimension.clone(),
            fiber_cap: self.fiber_cap,
            trials: self.mc_trials,
            seed,
            force: self.force,
        })
    }
}

/// One entry of the check registry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TheoremInfo {
    pub id: &'static str,
    /// Short alternative name accepted on the command line.
    pub alias: Option<&'static str>,
    /// Whether the check asserts an exact statement; otherwise it reports ratios.
    pub exact: bool,
    pub summary: &'static str,
}

macro_rules! theorems {
    ($(($id:literal, $alias:expr, $exact:literal, $summary:literal)),* $(,)?) => {
        pub const THEOREMS: &[TheoremInfo] = &[$(TheoremInfo { id: $id, alias: $alias, exact: $exact, summary: $summary }),*];
    };
}

theorems![
    ("energy-convolution", None, true, "E(A,B) = sum (A*B)^2 = sum (A o B)^2 = sum (A o A)(B o B)"),
    ("energy-fourier", None, true, "E(A,B) and T_k(A) from Fourier moments"),
    ("parseval", None, true, "sum |f|^2 = (1/N) sum |f^|^2 for f = A*B"),
    ("symmetric-sigma", None, true, "sigma_2(A) = |A| and sigma_2k(A) = T_k(A) for symmetric A"),
    ("rudin-moment", Some("lemma-3.1"), true, "moments of dissociated sums with constant C"),
    ("str-diss-partition", Some("lemma-3.2"), true, "structured/dissociated partition contract"),
    ("chang-cover", Some("lemma-3.3"), true, "A inside B - B + sum (S_i - S_i)"),
    ("plunnecke-petridis", Some("lemma-3.4"), true, "|X + kB| <= K^(k/j)|X| and |mA - nA| <= K^(m+n)|A|"),
    ("fiber-energy", Some("lemma-3.5"), true, "sum_{s,t} E(A_s, A_t) = E_{k+l}(A)"),
    ("popular-differences", Some("thm-3.6"), false, "|P| and E(P) for popular differences"),
    ("t-vs-e3", Some("thm-3.7"), true, "(|A|^8 / 8E_3)^l <= T_l(A) |A - A|^(2l+1)"),
    ("e4-vs-t4", Some("thm-3.8"), false, "E_4 against |A|^5 / MK"),
    ("ruzsa-cover", None, true, "A inside S + P - P with |S| <= |A + P| / |P|"),
    ("dim-doubling", Some("thm-4.2"), false, "dim(A) against K log|A|"),
    ("dim-large-sumset", Some("thm-4.3"), false, "dim(A') against 2^k K^eps log|kA|"),
    ("energy-extractor", Some("thm-5.1"), true, "E(A, B_*) >= E(A, B) / 4"),
    ("small-dim-energy", Some("thm-5.2"), false, "small-dimensional B from E(A)"),
    ("tk-extractor", Some("prop-5.5"), true, "T_k(A,..,A_*,A_*) >= T_k(A) / 32"),
    ("small-dim-e32", Some("thm-5.6"), false, "small-dimensional B from E_{3/2}(A)"),
    ("small-dim-e3", Some("thm-5.7"), false, "small-dimensional A_* from E_3(A)"),
    ("min-convolution", Some("thm-6.1"), false, "min of A*A on its support"),
    ("sums-of-dilates", Some("thm-6.2"), false, "growth of lambda_1 A + ... + lambda_k A"),
    ("t-star-components", Some("lemma-7.1"), true, "component inequalities for T*_s"),
    ("tuple-dimension", Some("lemma-7.2"), true, "dim(A) <= |A| - r from disjointly owned tuples"),
    ("dissociated-union-energy", Some("lemma-7.3"), true, "T_s(X u D) <= C^s s^s |D|^s + 4^s |X|^(2s-1)"),
    ("concentration", Some("prop-7.4"), false, "dimension deficiency of random samples"),
    ("better-tk", Some("cor-7.5"), false, "sampling pipeline under the T_k hypothesis"),
];

/// Looks a check up by id or alias.
pub fn resolve_theorem(name: &str) -> Option<&'static TheoremInfo> {
    THEOREMS.iter().find(|t| t.id == name || t.alias == Some(name))
}

/// Expands `"all"` and resolves aliases, rejecting unknown names.
pub fn resolve_ids(names: &[&str]) -> Result<Vec<&'static TheoremInfo>> {
    let mut out = Vec::new();
    for &name in names {
        if name == "all" {
            out.extend(THEOREMS.iter());
        } else {
            out.push(resolve_theorem(name).ok_or_else(|| Error::InvalidArgument(format!("unknown theorem id `{name}`")))?);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckError {
    pub theorem: String,
    pub member: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct BatteryOutcome {
    pub records: Vec<InequalityRecord>,
    pub errors: Vec<CheckError>,
}

impl BatteryOutcome {
    /// No pipeline errored and every exact record holds.
    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.records.iter().all(InequalityRecord::acceptable)
    }
}

/// Runs every named check on every member of `family`.
///
/// Work is spread over (check, member) pairs; records come back ordered by check,
/// then member, then emission order within the check.
pub fn bound_battery(family: &FamilySpec, ids: &[&str], cfg: &BatteryConfig) -> Result<BatteryOutcome> {
    let checks = resolve_ids(ids)?;
    cfg.extractor()?;
    let members = family.members()?;
    let descriptor = serde_json::to_string(&family.generator)?;
    let config = serde_json::to_value(cfg)?;
    let jobs: Vec<(&TheoremInfo, &Member)> = checks.iter().flat_map(|&t| members.iter().map(move |m| (t, m))).collect();
    let results: Vec<Result<Vec<InequalityRecord>>> = jobs.par_iter().map(|(t, m)| run_check(t.id, m, cfg)).collect();
    let mut out = BatteryOutcome::default();
    for ((t, m), res) in jobs.iter().zip(results) {
        match res {
            Ok(records) => out.records.extend(records.into_iter().map(|r| {
                r.with("member", m.index as f64).with_provenance(Provenance {
                    set: descriptor.clone(),
                    seed: Some(m.seed),
                    config: config.clone(),
                })
            })),
            Err(e) => out.errors.push(CheckError { theorem: t.id.to_string(), member: m.index, message: e.to_string() }),
        }
    }
    Ok(out)
}

/// Runs one check on one member.
pub fn run_check(id: &str, m: &Member, cfg: &BatteryConfig) -> Result<Vec<InequalityRecord>> {
    let a = m.set();
    if a.is_empty() {
        return Ok(vec![InequalityRecord::skipped(id, "empty set")]);
    }
    match id {
        "energy-convolution" => energy_convolution(a),
        "energy-fourier" => energy_fourier_check(a),
        "parseval" => parseval(a),
        "symmetric-sigma" => symmetric_sigma(a),
        "rudin-moment" => rudin(m, cfg),
        "str-diss-partition" => partition_check(a, cfg),
        "chang-cover" => chang(a),
        "plunnecke-petridis" => plunnecke(a),
        "fiber-energy" => fiber_energy(a, cfg),
        "popular-differences" => popular(a, cfg),
        "t-vs-e3" => t_vs_e3(a, cfg),
        "e4-vs-t4" => e4_vs_t4(a),
        "ruzsa-cover" => ruzsa(a),
        "dim-doubling" => dim_doubling(a, cfg),
        "dim-large-sumset" => dim_large_sumset(a, cfg),
        "energy-extractor" => energy_extractor(a, cfg),
        "small-dim-energy" => small_dim(a, SmallDimVariant::Energy, m, cfg),
        "tk-extractor" => tk_extractor(a, cfg),
        "small-dim-e32" => small_dim(a, SmallDimVariant::E32, m, cfg),
        "small-dim-e3" => small_dim_e3(a, cfg),
        "min-convolution" => min_convolution(a),
        "sums-of-dilates" => Ok(vec![dilate_growth_measure(a, &cfg.lambdas)?.record]),
        "t-star-components" => t_star_components(a, cfg),
        "tuple-dimension" => tuple_dimension(a, cfg),
        "dissociated-union-energy" => union_energy(a, cfg),
        "concentration" => concentration(m, cfg),
        "better-tk" => better_tk(m, cfg),
        other => Err(Error::InvalidArgument(format!("unknown theorem id `{other}`"))),
    }
}

fn exact_eq(theorem: &str, lhs: u64, rhs: u64) -> InequalityRecord {
    InequalityRecord::checked(theorem, lhs as f64, rhs as f64, lhs == rhs)
}

fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

/// A second operand for two-set identities.
fn partner(a: &GSet) -> Result<GSet> {
    a.dilate(2).union(&a.translate(1))
}

fn energy_convolution(a: &GSet) -> Result<Vec<InequalityRecord>> {
    let b = partner(a)?;
    let (ia, ib) = (Counts::indicator(a), Counts::indicator(&b));
    let e = energy(a, &b)?;
    let conv = ia.convolve(&ib)?.sum_squares();
    let corr = ia.correlate(&ib)?.sum_squares();
    Ok(vec![
        exact_eq("energy-convolution/sum-conv-sq", conv, e).with("|B|", b.len() as f64),
        exact_eq("energy-convolution/sum-corr-sq", corr, e).with("|B|", b.len() as f64),
    ])
}

fn energy_fourier_check(a: &GSet) -> Result<Vec<InequalityRecord>> {
    let b = partner(a)?;
    let mut out = vec![exact_eq("energy-fourier/E", energy_fourier(a, &b)?, energy(a, &b)?)];
    for k in 2..=3 {
        out.push(exact_eq(&format!("energy-fourier/T_{k}"), t_energy_fourier(a, k)?, t_energy_uniform(a, k)?));
    }
    Ok(out)
}

fn parseval(a: &GSet) -> Result<Vec<InequalityRecord>> {
    let conv = Counts::indicator(a).convolve(&Counts::indicator(&partner(a)?))?;
    let lhs = conv.sum_squares();
    let hat = conv.to_gfunction().fourier_transform();
    let side = hat.l2_norm_sq() / a.group().order() as f64;
    let snapped = GFunction::snap_scalar(Complex::new(side, 0.0))?;
    Ok(vec![exact_eq("parseval", lhs, snapped).with("fourier_side", side)])
}

fn symmetric_sigma(a: &GSet) -> Result<Vec<InequalityRecord>> {
    let s = a.union(&a.negate())?;
    let mut out = vec![exact_eq("symmetric-sigma/2", sigma_k(&s, 2)?, s.len() as u64)];
    for k in 2..=3 {
        out.push(exact_eq(&format!("symmetric-sigma/{}", 2 * k), sigma_k(&s, 2 * k)?, t_energy_uniform(&s, k)?));
    }
    Ok(out.into_iter().map(|r| r.with("|S|", s.len() as f64)).collect())
}

fn dissociated_part(a: &GSet, cfg: &BatteryConfig) -> Result<(GSet, bool)> {
    let dim = additive_dimension(a, &cfg.dimension);
    Ok((GSet::from_ranks(a.group(), dim.witness)?, dim.exact))
}

fn rudin(m: &Member, cfg: &BatteryConfig) -> Result<Vec<InequalityRecord>> {
    let (d, _) = dissociated_part(m.set(), cfg)?;
    if d.is_empty() {
        return Ok(vec![InequalityRecord::skipped("rudin-moment", "no nonzero element")]);
    }
    let mut rng = trial_rng(m.seed, 1);
    let coeffs: Vec<Complex> =
        (0..d.len()).map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    cfg.rudin_p.iter().map(|&p| rudin_moment_check(&d, &coeffs, p, cfg.rudin_c)).collect()
}

fn union_energy(a: &GSet, cfg: &BatteryConfig) -> Result<Vec<InequalityRecord>> {
    let (d, _) = dissociated_part(a, cfg)?;
    let x = a.difference(&d)?;
    cfg.union_s.iter().map(|&s| dissociated_union_check(&x, &d, s, cfg.union_c)).collect()
}

fn partition_check(a: &GSet, cfg: &BatteryConfig) -> Result<Vec<InequalityRecord>> {
    let mut out = Vec::new();
    let n = a.len() as f64;
    for &l in &cfg.partition_l {
        let part = partition_str_diss_with(a, l, &cfg.partition)?;
        let id = format!("str-diss-partition/l={l}");
        if part.certification == Certification::Heuristic {
            out.push(InequalityRecord::skipped(&id, "remainder too large to certify"));
            continue;
        }
        let covered = (part.blocks.len() * l + part.structured.len()) as f64;
        out.push(InequalityRecord::checked(&id, covered, n, part.verify(a)).with("blocks", part.blocks.len() as f64));
        let p = 2.0 + n.log2();
        let mut diss = GSet::empty(a.group());
        for b in &part.blocks {
            diss = diss.union(b)?;
        }
        let moment = (GFunction::indicator(&diss).fourier_transform().lp_sum(p) / a.group().order() as f64).powf(1.0 / p);
        out.push(
            InequalityRecord::ratio_only(&format!("str-diss-partition/moment-l={l}"), moment, (p / l as f64).sqrt() * n)
                .with("p", p),
        );
    }
    Ok(out)
}

fn chang(a: &GSet) -> Result<Vec<InequalityRecord>> {
    let r = chang_cover(a, a)?;
    let c = &r.components;
    let max_ok = c["max_size"] <= 2.0 * c["K"];
    let count_ok = c["l"] <= c["log2(2KL)"];
    let mut recs = vec![
        InequalityRecord::checked("chang-cover/containment", f64::from(u8::from(!r.contained)), 0.0, r.contained),
        InequalityRecord::checked("chang-cover/size", c["max_size"], 2.0 * c["K"], max_ok),
        InequalityRecord::checked("chang-cover/count", c["l"], c["log2(2KL)"], count_ok),
    ];
    for rec in &mut recs {
        rec.components.extend(c.iter().map(|(k, v)| (k.clone(), *v)));
    }
    Ok(recs)
}

fn ruzsa(a: &GSet) -> Result<Vec<InequalityRecord>> {
    let r = ruzsa_cover(a, a)?;
    let c = &r.components;
    Ok(vec![
        InequalityRecord::checked("ruzsa-cover/containment", f64::from(u8::from(!r.contained)), 0.0, r.contained),
        InequalityRecord::checked("ruzsa-cover/count", c["|S|"], c["|A+P|/|P|"], r.bounds_ok),
    ])
}

fn plunnecke(a: &GSet) -> Result<Vec<InequalityRecord>> {
    let mut out = Vec::new();
    for (j, k) in [(1, 2), (2, 3)] {
        let r = petridis_subset(a, a, j, k)?;
        let id = format!("plunnecke-petridis/j={j},k={k}");
        let (lhs, rhs) = (r.components["|X+kB|"], r.components["K^(k/j)|X|"]);
        let mut rec = if r.exact() {
            InequalityRecord::checked(&id, lhs, rhs, r.bound_ok)
        } else {
            InequalityRecord::ratio_only(&id, lhs, rhs)
        };
        rec.components.extend(r.components.clone());
        out.push(rec);
    }
    let n = a.len() as u64;
    let doubled = a.sumset(a)?.len() as u64;
    for (m, k) in [(1, 1), (2, 1), (2, 2), (3, 0)] {
        let size = m_minus_n(a, m, k)?.len() as u64;
        let e = (m + k) as u32;
        // |mA - nA| <= (|A+A| / |A|)^(m+n) |A|
        let holds = big(size) * big(n).pow(e - 1) <= big(doubled).pow(e);
        let rhs = (doubled as f64 / n as f64).powi(e as i32) * n as f64;
        out.push(InequalityRecord::checked(&format!("plunnecke-petridis/{m}A-{k}A"), size as f64, rhs, holds));
    }
    Ok(out)
}

/// Every fiber `A_s` with `s` in `(A - A)^depth`, repeats included; other shifts give empty fibers.
fn all_fibers(a: &GSet, depth: usize, cap: usize) -> Result<Vec<GSet>> {
    let diffs = a.difference_set(a)?;
    let d = diffs.elements();
    let count = (d.len() as u128).checked_pow(depth as u32).unwrap_or(u128::MAX);
    if count > cap as u128 {
        return Err(Error::CapExceeded { what: "fiber shift vectors", size: count, cap: cap as u128 });
    }
    let mut shifts: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..depth {
        shifts = shifts.into_iter().flat_map(|s| d.iter().map(move |&x| [s.clone(), vec![x]].concat())).collect();
    }
    shifts.iter().map(|s| fiber(a, a, s)).collect()
}

fn fiber_energy(a: &GSet, cfg: &BatteryConfig) -> Result<Vec<InequalityRecord>> {
    let mut out = Vec::new();
    for &(k, l) in &cfg.fiber_pairs {
        if k == 0 || l == 0 {
            return Err(Error::InvalidArgument(format!("fiber pair ({k}, {l}) needs k, l >= 1")));
        }
        let corr = |depth| -> Result<Vec<Counts>> {
            Ok(all_fibers(a, depth, cfg.fiber_cap)?.iter().map(GSet::self_correlation).collect())
        };
        let (fs, ft) = (corr(k - 1)?, corr(l - 1)?);
        let mut lhs: u128 = 0;
        for x in &fs {
            for y in &ft {
                lhs += x.dot(y)? as u128;
            }
        }
        let rhs = e_k(a, (k + l) as u32)?;
        out.push(
            InequalityRecord::checked(&format!("fiber-energy/k={k},l={l}"), lhs as f64, rhs as f64, lhs == rhs as u128)
                .with("k", k as f64)
                .with("l", l as f64),
        );
    }
    Ok(out)
}

fn t_vs_e3(a: &GSet, cfg: &BatteryConfig) -> Result<Vec<InequalityRecord>> {
    let n = a.len() as u64;
    let e3 = e_k(a, 3)?;
    let diff = a.difference_set(a)?.len() as u64;
    let mut out = Vec::new();
    for &l in &cfg.t_levels {
        if l < 2 {
            return Err(Error::InvalidArgument(format!("level l = {l} must be at least 2")));
        }
        let tl = t_energy_uniform(a, l)?;
        let li = l as u32;
        let holds = big(n).pow(8 * li) <= big(8).pow(li) * big(e3).pow(li) * big(tl) * big(diff).pow(2 * li + 1);
        let lhs = ((n as f64).powi(8) / (8.0 * e3 as f64)).powi(l as i32);
        let rhs = tl as f64 * (diff as f64).powi(2 * l as i32 + 1);
        out.push(
            InequalityRecord::checked(&format!("t-vs-e3/l={l}"), lhs, rhs, holds)
                .with("E_3", e3 as f64)
                .with("T_l", tl as f64)
                .with("|A-A|", diff as f64),
        );
    }
    Ok(out)
}

fn popular(a: &GSet, cfg: &BatteryConfig) -> Result<Vec<InequalityRecord>> {
    let eps = cfg.epsilon;
    if !(eps > 0.0 && eps <= 1.0) {
        return Ok(vec![InequalityRecord::skipped("popular-differences", format!("needs eps in (0, 1], got {eps}"))]);
    }
    let n = a.len() as f64;
    let k = n.powi(3) / energy(a, a)? as f64;
    let m = higher_energy(a, a, 3.0 + eps)? * k.powf(2.0 + eps) / n.powf(4.0 + eps);
    let p = popular_differences(a, n / (2.0 * k));
    let beta = (3.0 + 4.0 * eps) / (eps * (1.0 + eps));
    let pn = p.len() as f64;
    let ep = energy(&p, &p)? as f64;
    let tag = |r: InequalityRecord| r.with("K", k).with("M", m).with("epsilon", eps).with("beta", beta);
    Ok(vec![
        tag(InequalityRecord::ratio_only("popular-differences/size", pn, k * n / m.powf(2.0 / (1.0 + eps)))),
        tag(InequalityRecord::ratio_only("popular-differences/energy", ep, m.powf(-beta) * pn.powi(3))),
    ])
}

fn e4_vs_t4(a: &GSet) -> Result<Vec<InequalityRecord>> {
    let n = a.len() as f64;
    // E_s = |A|^{s+1} / K^{s-1} at s = 3/2
    let k = (n.powf(2.5) / higher_energy(a, a, 1.5)?).powi(2);
    let m = t_energy_uniform(a, 4)? as f64 * k.powi(3) / n.powi(7);
    let e4 = e_k(a, 4)? as f64;
    Ok(vec![InequalityRecord::ratio_only("e4-vs-t4", e4, n.powi(5) / (m * k)).with("K", k).with("M", m).with("s", 1.5)])
}

fn dim_doubling(a: &GSet, cfg: &BatteryConfig) -> Result<Vec<InequalityRecord>> {
    let n = a.len() as f64;
    if a.len() < 2 {
        return Ok(vec![InequalityRecord::skipped("dim-doubling", "needs |A| >= 2")]);
    }
    let dim = additive_dimension(a, &cfg.dimension);
    let k = a.sumset(a)?.len() as f64 / n;
    let tag = |r: InequalityRecord| r.with("K", k).with("dim_exact", f64::from(u8::from(dim.exact)));
    let mut out = vec![tag(InequalityRecord::ratio_only("dim-doubling", dim.value as f64, k * n.log2()))];
    if a.len() > 2 {
        let rhs = n.log2() + k * k.log2().powi(8) * n.log2().log2();
        out.push(tag(InequalityRecord::ratio_only("dim-doubling/loglog", dim.value as f64, rhs)));
    }
    Ok(out)
}

fn dim_large_sumset(a: &GSet, cfg: &BatteryConfig) -> Result<Vec<InequalityRecord>> {
    let k_fold = cfg.sumset_k;
    if k_fold < 3 {
        return Err(Error::InvalidArgument(format!("sumset_k must be at least 3, got {k_fold}")));
    }
    let n = a.len() as f64;
    let k = a.sumset(a)?.len() as f64 / n;
    if k <= 1.0 + 1e-12 {
        return Ok(vec![InequalityRecord::skipped("dim-large-sumset", "K = 1, no growth")]);
    }
    let ka = a.k_fold_sumset(k_fold)?.len() as f64;
    // least eps with |kA| >= K^{k - eps} |A|
    let eps = (k_fold as f64 - (ka / n).ln() / k.ln()).max(0.0);
    let x = petridis_large_subset(a, a, 1, k_fold, 0.5)?;
    let dim = additive_dimension(&x.x, &cfg.dimension);
    let rhs = 2f64.powi(k_fold as i32) * k.powf(eps) * ka.log2();
    Ok(vec![InequalityRecord::ratio_only("dim-large-sumset", dim.value as f64, rhs)
        .with("K", k)
        .with("epsilon", eps)
        .with("|X|", x.x.len() as f64)
        .with("bound_ok", f64::from(u8::from(x.bound_ok)))])
}

fn energy_extractor(a: &GSet, cfg: &BatteryConfig) -> Result<Vec<InequalityRecord>> {
    let r = extract_energy_subset(a, a, &cfg.extractor()?)?;
    let recount = if r.subset.is_empty() { 0 } else { energy_fourier(a, &r.subset)? };
    let holds = r.postcondition_ok && 4 * recount as u128 >= r.before as u128;
    Ok(vec![InequalityRecord::checked("energy-extractor", recount as f64, r.before / 4.0, holds)
        .with("steps", r.trace.len() as f64)
        .with("|B_*|", r.subset.len() as f64)
        .with("trivial", f64::from(u8::from(r.trivial())))])
}

fn tk_extractor(a: &GSet, cfg: &BatteryConfig) -> Result<Vec<InequalityRecord>> {
    let ext = cfg.extractor()?;
    let mut out = Vec::new();
    for k in 2..=3 {
        let r = extract_tk_subset(a, k, &ext)?;
        out.push(
            InequalityRecord::checked(&format!("tk-extractor/k={k}"), r.after, r.before / 32.0, r.postcondition_ok)
                .with("|A_*|", r.subset.len() as f64),
        );
        if let Some(l) = r.dim_bound {
            let dim = additive_dimension(&r.subset, &cfg.dimension);
            if dim.exact {
                out.push(InequalityRecord::checked(
                    &format!("tk-extractor/dim-k={k}"),
                    dim.value as f64,
                    l as f64 - 1.0,
                    dim.value < l,
                ));
            }
        }
    }
    Ok(out)
}

fn small_dim(a: &GSet, variant: SmallDimVariant, m: &Member, cfg: &BatteryConfig) -> Result<Vec<InequalityRecord>> {
    let id = match variant {
        SmallDimVariant::Energy => "small-dim-energy",
        SmallDimVariant::E32 => "small-dim-e32",
    };
    let r = small_dim_pipeline(a, variant, &cfg.pipeline(m.seed)?)?;
    if r.trivial {
        return Ok(vec![InequalityRecord::skipped(id, "degenerate energy")]);
    }
    let n = a.len() as f64;
    let k = r.components["K"];
    let (dim_rhs, size_rhs) = match variant {
        SmallDimVariant::Energy => (k.powf(7.0 / 8.0) * n.log2(), n / k.powf(25.0 / 8.0)),
        SmallDimVariant::E32 => (k.powf(0.75) * n.log2(), n / (k * k)),
    };
    let ok = !r.subset.is_empty() && r.subset.is_subset(a);
    let tag = |mut rec: InequalityRecord| {
        rec.components.extend(r.components.clone());
        rec.with("dim_exact", f64::from(u8::from(r.dim.exact)))
    };
    Ok(vec![
        InequalityRecord::checked(&format!("{id}/subset"), f64::from(u8::from(!ok)), 0.0, ok),
        tag(InequalityRecord::ratio_only(&format!("{id}/dim"), r.dim.value as f64, dim_rhs)),
        tag(InequalityRecord::ratio_only(&format!("{id}/size"), r.subset.len() as f64, size_rhs)),
    ])
}

fn small_dim_e3(a: &GSet, cfg: &BatteryConfig) -> Result<Vec<InequalityRecord>> {
    let n = a.len() as f64;
    let k = a.difference_set(a)?.len() as f64 / n;
    let m = e_k(a, 3)? as f64 * k * k / n.powi(4);
    // l ~ log K, kept in 2..=4
    let l = (k.log2().round() as usize).clamp(2, 4);
    let r = extract_tk_subset(a, l, &cfg.extractor()?)?;
    let dim = additive_dimension(&r.subset, &cfg.dimension);
    let rhs = m * (n.log2() + k.log2() * m.log2());
    let tag = |rec: InequalityRecord| rec.with("K", k).with("M", m).with("l", l as f64);
    Ok(vec![
        tag(InequalityRecord::ratio_only("small-dim-e3/dim", dim.value as f64, rhs)),
        tag(InequalityRecord::ratio_only("small-dim-e3/size", r.subset.len() as f64, n / m.sqrt())),
    ])
}

fn min_convolution(a: &GSet) -> Result<Vec<InequalityRecord>> {
    let (v, x) = min_convolution_on_support(a)?;
    let n = a.len() as f64;
    Ok(vec![InequalityRecord::ratio_only("min-convolution", v as f64 / n, (-n.log2().powf(0.25)).exp())
        .with("min", v as f64)
        .with("at", x as f64)
        .with("K", n / v as f64)])
}

fn t_star_components(a: &GSet, cfg: &BatteryConfig) -> Result<Vec<InequalityRecord>> {
    let n = a.len();
    let s_raw = n.max(1).ilog2() as usize;
    let s = s_raw.clamp(3, S_CAP);
    let visits = (n as u128).checked_pow(s as u32).unwrap_or(u128::MAX);
    let id = |part: &str| format!("t-star-components/{part}");
    if visits > cfg.tuple_budget {
        return Ok(vec![InequalityRecord::skipped(&id("all"), format!("|A|^s = {visits} exceeds the tuple budget"))]);
    }
    let tag = |r: InequalityRecord| r.with("s", s as f64).with("s_uncapped", s_raw as f64).with("s_cap", S_CAP as f64);
    let tilde = distinct_rep_function(a, s, cfg.tuple_budget)?;
    let ts = t_star(a, s, cfg.tuple_budget)?;
    let t_s = t_energy_uniform(a, s)?;
    let t_prev = t_energy_uniform(a, s - 1)?;
    let s2 = (s * s) as u128;
    let cross = tilde.sum_squares() as u128 - ts as u128;
    let cross_rhs = s2 * n as u128 * t_prev as u128;
    let full = Counts::indicator(a).k_fold(s)?;
    let q = q_function(a, s)?;
    let violations = (0..a.group().order())
        .filter(|&x| (full.get(x) - tilde.get(x)) as u128 > s2 * q.get(x) as u128)
        .count();
    let q_sq = q.sum_squares();
    let q_hat = GFunction::snap_scalar(Complex::new(q_fourier_sum(a, s)?, 0.0))?;
    let mut out = vec![
        tag(InequalityRecord::checked(&id("cross-collisions"), cross as f64, cross_rhs as f64, cross <= cross_rhs)),
        tag(InequalityRecord::checked(&id("repeated-entries"), violations as f64, 0.0, violations == 0)),
        tag(exact_eq(&id("q-fourier"), q_sq, q_hat)),
    ];
    let threshold = 10f64.powi(s as i32) * (s as f64).powi(2 * s as i32) * (n as f64).powi(s as i32);
    out.push(if t_s as f64 >= threshold {
        tag(InequalityRecord::ratio_only(&id("half"), ts as f64, t_s as f64 / 2.0))
    } else {
        tag(InequalityRecord::skipped(&id("half"), format!("T_s = {t_s} below 10^s s^2s |A|^s = {threshold:.3e}")))
    });
    Ok(out)
}

/// Additive quadruples `x_1 + x_2 = x_3 + x_4` with distinct entries, one per unordered pair of pairs.
fn distinct_quadruples(a: &GSet) -> Vec<Vec<usize>> {
    let g = a.group();
    let e = a.elements();
    let mut by_sum: std::collections::BTreeMap<usize, Vec<(usize, usize)>> = Default::default();
    for i in 0..e.len() {
        for j in i + 1..e.len() {
            by_sum.entry(g.add(e[i], e[j])).or_default().push((e[i], e[j]));
        }
    }
    let mut out = Vec::new();
    for pairs in by_sum.values() {
        for (i, &(x1, x2)) in pairs.iter().enumerate() {
            for &(x3, x4) in &pairs[i + 1..] {
                if x3 != x1 && x3 != x2 && x4 != x1 && x4 != x2 {
                    out.push(vec![x1, x2, x3, x4]);
                }
            }
        }
    }
    out
}

fn tuple_dimension(a: &GSet, cfg: &BatteryConfig) -> Result<Vec<InequalityRecord>> {
    if a.len() > cfg.dimension.exact_cap {
        return Ok(vec![InequalityRecord::skipped("tuple-dimension", "set above the exact dimension cap")]);
    }
    let tuples = distinct_quadruples(a);
    let sel = select_disjoint_tuples(a, &tuples)?;
    let dim = additive_dimension(a, &cfg.dimension);
    let rhs = (a.len() - sel.r()) as f64;
    let rec = if dim.exact {
        InequalityRecord::checked("tuple-dimension", dim.value as f64, rhs, dim.value + sel.r() <= a.len())
    } else {
        InequalityRecord::skipped("tuple-dimension", "dimension search inexact")
    };
    Ok(vec![rec
        .with("r", sel.r() as f64)
        .with("target", sel.target as f64)
        .with("involved", sel.involved as f64)
        .with("tuples", tuples.len() as f64)])
}

fn concentration(m: &Member, cfg: &BatteryConfig) -> Result<Vec<InequalityRecord>> {
    let a = m.set();
    let d = ((a.len() as f64).sqrt().floor() as usize).clamp(1, cfg.dimension.exact_cap);
    let r = concentration_mc_with(a, d, 1.0, cfg.mc_trials, m.seed, &cfg.dimension)?;
    let p1 = r.tail.get(1).map_or(0.0, |t| t.p);
    Ok(vec![InequalityRecord::ratio_only("concentration", p1, 1.0)
        .with("d", d as f64)
        .with("sigma", 1.0)
        .with("hits", r.hits as f64)
        .with("beyond_repeats_p1", r.tail_beyond_repeats.get(1).map_or(0.0, |t| t.p))
        .with("trials", r.trials as f64)])
}

fn better_tk(m: &Member, cfg: &BatteryConfig) -> Result<Vec<InequalityRecord>> {
    let r = better_tk_pipeline(m.set(), cfg.tk_k, &cfg.pipeline(m.seed)?)?;
    let with_all = |mut rec: InequalityRecord| {
        rec.components.extend(r.components.clone());
        rec
    };
    if let Some(reason) = &r.skipped {
        return Ok(vec![with_all(InequalityRecord::skipped("better-tk", reason.clone()))]);
    }
    Ok(vec![
        with_all(InequalityRecord::ratio_only("better-tk/dim", r.dim.value as f64, r.components["dim_target"])),
        with_all(InequalityRecord::ratio_only("better-tk/size", r.subset.len() as f64, r.components["size_target"])),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn family(generator: GenSpec, count: usize) -> FamilySpec {
        FamilySpec { generator, count, seed: 17 }
    }

    #[test]
    fn registry_resolves_ids_and_aliases() {
        assert_eq!(resolve_theorem("lemma-3.5").unwrap().id, "fiber-energy");
        assert_eq!(resolve_theorem("t-vs-e3").unwrap().alias, Some("thm-3.7"));
        assert!(resolve_theorem("nope").is_none());
        assert_eq!(resolve_ids(&["all"]).unwrap().len(), THEOREMS.len());
        assert!(resolve_ids(&["all", "nope"]).is_err());
        let ids: std::collections::HashSet<_> = THEOREMS.iter().map(|t| t.id).collect();
        assert_eq!(ids.len(), THEOREMS.len());
    }

    #[test]
    fn every_check_runs_on_a_small_family() {
        let fam = family(GenSpec::RandomSubset { group: GroupSpec::cyclic(32).unwrap(), size: 7 }, 3);
        let cfg = BatteryConfig { mc_trials: 20, ..BatteryConfig::default() };
        let out = bound_battery(&fam, &["all"], &cfg).unwrap();
        assert!(out.errors.is_empty(), "{:?}", out.errors);
        let bad: Vec<_> = out.records.iter().filter(|r| !r.acceptable()).collect();
        assert!(bad.is_empty(), "{bad:#?}");
        for t in THEOREMS {
            assert!(out.records.iter().any(|r| r.theorem.starts_with(t.id)), "{} emitted nothing", t.id);
        }
        assert!(out.records.iter().all(|r| r.provenance.seed.is_some()));
    }

    #[test]
    fn exact_checks_on_structured_families() {
        let cfg = BatteryConfig { mc_trials: 20, ..BatteryConfig::default() };
        let exact: Vec<&str> = THEOREMS.iter().filter(|t| t.exact).map(|t| t.id).collect();
        for gen in [
            GenSpec::Subspace { n: 5, k: 3 },
            GenSpec::SubspacePlusDissociated { n: 7, k: 2, lambda: 3, independent: true },
            GenSpec::SymmetricRandom { group: GroupSpec::cyclic(40).unwrap(), size: 9 },
            GenSpec::ArithmeticProgression {
                group: GroupSpec::cyclic(101).unwrap(),
                start: super::super::generate::ElementSpec::Int(3),
                step: super::super::generate::ElementSpec::Int(7),
                length: 9,
            },
        ] {
            let out = bound_battery(&family(gen.clone(), 2), &exact, &cfg).unwrap();
            assert!(out.passed(), "{gen:?}: {:?} {:#?}", out.errors, out.records.iter().filter(|r| !r.acceptable()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn fiber_identity_on_small_sets() {
        let fam = family(GenSpec::RandomSubset { group: GroupSpec::cyclic(32).unwrap(), size: 8 }, 5);
        let out = bound_battery(&fam, &["lemma-3.5"], &BatteryConfig::default()).unwrap();
        assert_eq!(out.records.len(), 15);
        assert!(out.records.iter().all(|r| r.holds() && r.lhs == r.rhs));
    }

    #[test]
    fn battery_is_deterministic() {
        let fam = family(GenSpec::RandomSubset { group: GroupSpec::cyclic(64).unwrap(), size: 9 }, 4);
        let cfg = BatteryConfig { mc_trials: 16, ..BatteryConfig::default() };
        let ids = ["thm-3.7", "concentration", "thm-4.2"];
        let a = bound_battery(&fam, &ids, &cfg).unwrap();
        let b = bound_battery(&fam, &ids, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.records.iter().filter(|r| r.theorem.starts_with("dim-doubling")).all(|r| !r.exact_statement));
    }

    #[test]
    fn config_round_trips() {
        let cfg = BatteryConfig { eta: Some(2.0), ..BatteryConfig::default() };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<BatteryConfig>(&text).unwrap(), cfg);
        let partial: BatteryConfig = serde_json::from_str(r#"{"rudin_c": 8.0}"#).unwrap();
        assert_eq!(partial.rudin_c, 8.0);
        assert!(serde_json::from_str::<BatteryConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
