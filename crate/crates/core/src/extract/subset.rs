//! Energy-preserving extraction of low-dimensional subsets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ExtractorConfig;
use crate::dissociation::{partition_str_diss_with, Certification};
use crate::energy::{energy, t_energy, t_energy_uniform};
use crate::error::{Error, Result};
use crate::set::GSet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractionStep {
    pub j: usize,
    /// Real step parameter before rounding up.
    pub l_real: f64,
    pub l: usize,
    pub beta: f64,
    pub blocks: usize,
    pub size: usize,
    pub certification: Certification,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// `beta_j >= beta_{j-1} / 2`.
    BetaRule,
    /// The hard step cap fired before the beta rule.
    StepCap,
    /// No peeling was possible; the input is returned unchanged.
    Trivial,
    /// A single partition (no iteration).
    SinglePass,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtractionResult {
    pub subset: GSet,
    pub trace: Vec<ExtractionStep>,
    pub before: f64,
    pub after: f64,
    pub postcondition_ok: bool,
    pub stop: StopReason,
    /// `dim(subset) < dim_bound`, certified by the final partition when it is not heuristic.
    pub dim_bound: Option<usize>,
    pub components: BTreeMap<String, f64>,
}

impl ExtractionResult {
    pub fn trivial(&self) -> bool {
        self.stop == StopReason::Trivial
    }
}

/// Iterated peeling of `B` keeping `E(A, B_*) >= E(A, B) / 4`.
///
/// Step `j` partitions `B_{j-1}` with block size
/// `l_j = eta^{-1} K log K beta_{j-1}^2 j^{1+eps} log |A|`, rounded up, and
/// stops once `beta_j >= beta_{j-1} / 2`. At most `min(max_steps, ceil(log K) + 1)`
/// steps run. For `K < 2` the input is returned as is.
pub fn extract_energy_subset(a: &GSet, b: &GSet, cfg: &ExtractorConfig) -> Result<ExtractionResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let e = energy(a, b)?;
    if e == 0 {
        return Err(Error::Precondition("E(A,B) = 0".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let k = na * nb * nb / e as f64;
    let mut components = BTreeMap::from([
        ("K".to_string(), k),
        ("eta".to_string(), cfg.eta),
        ("epsilon".to_string(), cfg.epsilon),
        ("p".to_string(), cfg.moment(a.len())),
    ]);
    if k < 2.0 {
        components.insert("l_1".into(), cfg.eta.recip() * k * k.log2().max(0.0) * na.log2());
        return Ok(ExtractionResult {
            subset: b.clone(),
            trace: Vec::new(),
            before: e as f64,
            after: e as f64,
            postcondition_ok: true,
            stop: StopReason::Trivial,
            dim_bound: None,
            components,
        });
    }
    let cap = cfg.max_steps.min(k.log2().ceil() as usize + 1).max(1);
    let mut current = b.clone();
    let mut beta_prev = 1.0;
    let mut trace = Vec::new();
    let mut stop = StopReason::StepCap;
    for j in 1..=cap {
        let jf = j as f64;
        let l_real = cfg.eta.recip() * k * k.log2() * beta_prev * beta_prev * jf.powf(1.0 + cfg.epsilon) * na.log2();
        let l = (l_real.ceil() as usize).max(1);
        let part = partition_str_diss_with(&current, l, &cfg.partition)?;
        let beta = part.structured.len() as f64 / nb;
        trace.push(ExtractionStep {
            j,
            l_real,
            l,
            beta,
            blocks: part.blocks.len(),
            size: part.structured.len(),
            certification: part.certification,
        });
        current = part.structured;
        if beta >= beta_prev / 2.0 {
            stop = StopReason::BetaRule;
            break;
        }
        beta_prev = beta;
    }
    let after = if current.is_empty() { 0 } else { energy(a, &current)? };
    let last = trace.last().expect("at least one step");
    let dim_bound = (last.certification != Certification::Heuristic).then_some(last.l);
    Ok(ExtractionResult {
        subset: current,
        stop,
        dim_bound,
        before: e as f64,
        after: after as f64,
        postcondition_ok: 4 * after >= e,
        trace,
        components,
    })
}

/// Single partition of `A` at `l = eta^{-1} c^{-1} c_{k-1} log(c^{-1} |A|)`.
///
/// The mixed count places `A_*` once on each side, i.e. it is
/// `(1/N) sum |A^|^{2k-2} |A_*^|^2`, and is required to be at least `T_k(A) / 32`.
/// When `l < 2` or `l > |A|` the input is returned unchanged.
pub fn extract_tk_subset(a: &GSet, k: usize, cfg: &ExtractorConfig) -> Result<ExtractionResult> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("T_k extraction needs k >= 2, got {k}")));
    }
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = a.len() as f64;
    let tk = t_energy_uniform(a, k)?;
    let tk1 = t_energy_uniform(a, k - 1)?;
    let c = tk as f64 / n.powi(2 * k as i32 - 1);
    let c_prev = tk1 as f64 / n.powi(2 * k as i32 - 3);
    let l_real = cfg.eta.recip() * c.recip() * c_prev * (n / c).log2();
    let l = (l_real.ceil() as usize).max(1);
    let mut components = BTreeMap::from([
        ("c".to_string(), c),
        (format!("c_{}", k - 1), c_prev),
        ("eta".to_string(), cfg.eta),
        ("p".to_string(), 2.0 + (n / c).log2()),
        ("l".to_string(), l_real),
    ]);
    // Below 2 every nonzero singleton is a block and nothing structured survives.
    let (subset, stop, step) = if l > a.len() || l_real < 2.0 {
        (a.clone(), StopReason::Trivial, None)
    } else {
        let part = partition_str_diss_with(a, l, &cfg.partition)?;
        let step = ExtractionStep {
            j: 1,
            l_real,
            l,
            beta: part.structured.len() as f64 / n,
            blocks: part.blocks.len(),
            size: part.structured.len(),
            certification: part.certification,
        };
        (part.structured, StopReason::SinglePass, Some(step))
    };
    let mixed = if subset.is_empty() {
        0
    } else {
        let mut sets: Vec<&GSet> = vec![a; k - 1];
        sets.push(&subset);
        sets.extend(std::iter::repeat_n(a, k - 1));
        sets.push(&subset);
        t_energy(&sets)?
    };
    components.insert(
        "size_ratio".into(),
        subset.len() as f64 / (c.powf(1.0 / (2 * k - 1) as f64) * n),
    );
    let dim_bound = match &step {
        Some(s) if s.certification != Certification::Heuristic => Some(l),
        Some(_) => None,
        None => (l > a.len()).then_some(l),
    };
    Ok(ExtractionResult {
        subset,
        trace: step.into_iter().collect(),
        before: tk as f64,
        after: mixed as f64,
        postcondition_ok: 32 * mixed >= tk,
        stop,
        dim_bound,
        components,
    })
}
