//! File formats and report emission: set documents, run configuration,
//! versioned JSON reports and CSV record batteries.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dissociation::{dimension_profile_with, DimensionConfig, DimensionReport, PartitionConfig};
use crate::energy::EnergyReport;
use crate::error::{Error, Result};
use crate::experiments::BatteryConfig;
use crate::extract::{
    chang_cover, extract_energy_subset, extract_tk_subset, petridis_subset, ruzsa_cover, ExtractorConfig,
};
use crate::group::GroupSpec;
use crate::record::{float, InequalityRecord, Provenance, Verdict};
use crate::set::{min_convolution_on_support, GSet};

/// Bumped whenever a report field changes meaning or disappears.
pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Deserializes JSON, reporting failures with the path of the offending field.
pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            Error::Parse(inner.to_string())
        } else {
            Error::Parse(format!("{path}: {inner}"))
        }
    })
}

/// `{"group": [n_1, ..., n_d], "elements": [[c_1, ..., c_d], ...], "label": "..."}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetDocument {
    pub group: Vec<usize>,
    pub elements: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl SetDocument {
    /// Elements are listed in rank order.
    pub fn from_set(a: &GSet, label: Option<String>) -> Self {
        let g = a.group();
        Self { group: g.factors().to_vec(), elements: a.iter().map(|x| g.coords(x)).collect(), label }
    }

    pub fn parse(text: &str) -> Result<Self> {
        from_json(text)
    }

    /// Validates the document and builds the set, refusing groups above `max_order`.
    pub fn to_set(&self, max_order: usize) -> Result<GSet> {
        for (i, &n) in self.group.iter().enumerate() {
            if n < 2 {
                return Err(Error::Parse(format!("group[{i}]: cyclic factor {n} is below 2")));
            }
        }
        let g = match GroupSpec::with_max_order(self.group.clone(), max_order) {
            Err(Error::InvalidGroup(m)) => return Err(Error::Parse(format!("group: {m}"))),
            other => other?,
        };
        let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, e) in self.elements.iter().enumerate() {
            if e.len() != self.group.len() {
                return Err(Error::Parse(format!(
                    "elements[{i}]: expected {} coordinates, got {}",
                    self.group.len(),
                    e.len()
                )));
            }
            if let Some((j, (&c, &n))) = e.iter().zip(&self.group).enumerate().find(|(_, (&c, &n))| c >= n) {
                return Err(Error::Parse(format!("elements[{i}][{j}]: coordinate {c} is outside 0..{n}")));
            }
            let rank = g.rank_of(e)?;
            if let Some(first) = seen.insert(rank, i) {
                return Err(Error::Parse(format!("elements[{i}]: duplicates elements[{first}]")));
            }
        }
        GSet::from_ranks(&g, seen.into_keys())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    /// JSON report on stdout.
    #[default]
    Json,
    /// Aligned text table on stdout (files are still JSON or CSV).
    Table,
}

/// Everything that can change a result, serialized into every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub max_group_order: usize,
    pub exact_dim_cap: usize,
    pub tuple_budget: u128,
    pub node_budget: u64,
    pub fiber_cap: usize,
    pub epsilon: f64,
    /// Overrides the extractor step constant.
    pub eta: Option<f64>,
    pub rudin_c: f64,
    pub union_c: f64,
    pub mc_trials: u64,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        let battery = BatteryConfig::default();
        Self {
            seed: 0,
            max_group_order: crate::group::DEFAULT_MAX_ORDER,
            exact_dim_cap: battery.dimension.exact_cap,
            tuple_budget: battery.tuple_budget,
            node_budget: battery.dimension.node_budget,
            fiber_cap: battery.fiber_cap,
            epsilon: battery.epsilon,
            eta: None,
            rudin_c: battery.rudin_c,
            union_c: battery.union_c,
            mc_trials: battery.mc_trials,
            format: OutputFormat::Json,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = from_json(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let caps = [
            ("max_group_order", self.max_group_order as u128),
            ("exact_dim_cap", self.exact_dim_cap as u128),
            ("tuple_budget", self.tuple_budget),
            ("node_budget", self.node_budget as u128),
            ("fiber_cap", self.fiber_cap as u128),
            ("mc_trials", self.mc_trials as u128),
        ];
        if let Some((name, _)) = caps.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Parse(format!("{name}: must be positive")));
        }
        for (name, v) in [("epsilon", self.epsilon), ("rudin_c", self.rudin_c), ("union_c", self.union_c)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parse(format!("{name}: must be positive and finite, got {v}")));
            }
        }
        if let Some(eta) = self.eta.filter(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(Error::Parse(format!("eta: must be positive and finite, got {eta}")));
        }
        Ok(())
    }

    pub fn dimension(&self) -> DimensionConfig {
        DimensionConfig { exact_cap: self.exact_dim_cap, node_budget: self.node_budget, ..DimensionConfig::default() }
    }

    pub fn extractor(&self) -> Result<ExtractorConfig> {
        let cfg = ExtractorConfig::new(self.epsilon)?;
        match self.eta {
            Some(eta) => cfg.with_eta(eta),
            None => Ok(cfg),
        }
    }

    pub fn battery(&self) -> BatteryConfig {
        BatteryConfig {
            epsilon: self.epsilon,
            eta: self.eta,
            rudin_c: self.rudin_c,
            union_c: self.union_c,
            mc_trials: self.mc_trials,
            tuple_budget: self.tuple_budget,
            fiber_cap: self.fiber_cap,
            dimension: self.dimension(),
            partition: PartitionConfig::default(),
            ..BatteryConfig::default()
        }
    }
}

/// The envelope of every JSON report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    pub schema_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub config: RunConfig,
    pub result: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(command: &str, config: &RunConfig, result: T) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: "addlab".into(),
            tool_version: TOOL_VERSION.into(),
            command: command.into(),
            config: config.clone(),
            result,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinConvolution {
    pub value: u64,
    pub at: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeResult {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub group: Vec<usize>,
    pub size: usize,
    /// `|A + A| / |A|`.
    #[serde(with = "float")]
    pub doubling: f64,
    pub sumset_size: usize,
    pub difference_size: usize,
    pub energies: EnergyReport,
    pub dimension: DimensionReport,
    pub min_convolution: MinConvolution,
    /// One entry per value whose search hit a cap; empty when everything is exact.
    pub flags: Vec<String>,
}

impl AnalyzeResult {
    pub fn capped(&self) -> bool {
        !self.flags.is_empty()
    }

    pub fn table(&self) -> String {
        let mut rows: Vec<(String, String)> = vec![
            ("group".into(), format!("{:?}", self.group)),
            ("|A|".into(), self.size.to_string()),
            ("|A+A|".into(), self.sumset_size.to_string()),
            ("|A-A|".into(), self.difference_size.to_string()),
            ("|A+A|/|A|".into(), format!("{:.6}", self.doubling)),
        ];
        for (k, v) in &self.energies.quantities {
            rows.push((k.clone(), match v {
                crate::energy::Quantity::Exact(x) => x.to_string(),
                crate::energy::Quantity::Real(x) => format!("{x:.6}"),
            }));
        }
        let d = &self.dimension;
        let mark = |exact: bool| if exact { "" } else { " (inexact)" };
        rows.push(("dim".into(), format!("{}{}", d.dim.value, mark(d.dim.exact))));
        rows.push(("d".into(), format!("{}{}", d.d.value, mark(d.d.exact))));
        rows.push(("d_tilde".into(), format!("{}{}", d.d_tilde.value, mark(d.d_tilde.exact))));
        let star = if d.d_star.exact {
            d.d_star.value.to_string()
        } else {
            format!("[{}, {}] (inexact)", d.d_star.lower, d.d_star.value)
        };
        rows.push(("d_star".into(), star));
        rows.push(("min (A*A) on support".into(), format!("{} at {:?}", self.min_convolution.value, self.min_convolution.at)));
        for f in &self.flags {
            rows.push(("flag".into(), f.clone()));
        }
        table(&rows)
    }
}

/// Two-column table, left column padded to its widest entry.
pub fn table(rows: &[(String, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    rows.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
}

pub fn analyze(a: &GSet, label: Option<String>, cfg: &RunConfig) -> Result<AnalyzeResult> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let g = a.group();
    let sumset_size = a.sumset(a)?.len();
    let energies = EnergyReport::compute(a, cfg.epsilon)?;
    let dimension = dimension_profile_with(a, &cfg.dimension());
    let (value, at) = min_convolution_on_support(a)?;
    let mut flags = Vec::new();
    for (name, exact) in [
        ("dim", dimension.dim.exact),
        ("d", dimension.d.exact),
        ("d_tilde", dimension.d_tilde.exact),
        ("d_star", dimension.d_star.exact),
    ] {
        if !exact {
            flags.push(format!("{name}: search cap reached, value is a bound"));
        }
    }
    Ok(AnalyzeResult {
        label,
        group: g.factors().to_vec(),
        size: a.len(),
        doubling: sumset_size as f64 / a.len() as f64,
        sumset_size,
        difference_size: a.difference_set(a)?.len(),
        energies,
        dimension,
        min_convolution: MinConvolution { value, at: g.coords(at) },
        flags,
    })
}

pub const EXTRACT_ALGORITHMS: &[&str] = &["energy-subset", "tk-subset", "chang-cover", "ruzsa-cover", "petridis"];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExtractParams {
    /// The second operand (`B` or `P`); defaults to `A`.
    pub with: Option<GSet>,
    pub k: Option<usize>,
    pub j: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractOutput {
    pub algorithm: String,
    /// The extracted subset, when the algorithm returns one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset: Option<SetDocument>,
    /// Cover constituents, when the algorithm returns several sets.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sets: Vec<SetDocument>,
    pub trace: serde_json::Value,
    pub postcondition: bool,
    /// Whether the algorithm guarantees its postcondition on this input.
    pub guaranteed: bool,
    #[serde(with = "float::map")]
    pub components: BTreeMap<String, f64>,
}

pub fn run_extract(algorithm: &str, a: &GSet, params: &ExtractParams, cfg: &RunConfig) -> Result<ExtractOutput> {
    let other = params.with.as_ref().unwrap_or(a);
    let doc = |s: &GSet| SetDocument::from_set(s, None);
    let out = |subset, sets, trace, postcondition, guaranteed, components| ExtractOutput {
        algorithm: algorithm.to_string(),
        subset,
        sets,
        trace,
        postcondition,
        guaranteed,
        components,
    };
    match algorithm {
        "energy-subset" | "tk-subset" => {
            let ext = cfg.extractor()?;
            let r = if algorithm == "energy-subset" {
                extract_energy_subset(a, other, &ext)?
            } else {
                extract_tk_subset(a, params.k.unwrap_or(2), &ext)?
            };
            let mut c = r.components.clone();
            c.insert("before".into(), r.before);
            c.insert("after".into(), r.after);
            if let Some(l) = r.dim_bound {
                c.insert("dim_bound".into(), l as f64);
            }
            let trace = serde_json::json!({ "steps": r.trace, "stop": r.stop });
            Ok(out(Some(doc(&r.subset)), vec![], trace, r.postcondition_ok, true, c))
        }
        "chang-cover" | "ruzsa-cover" => {
            let r = if algorithm == "chang-cover" { chang_cover(a, other)? } else { ruzsa_cover(a, other)? };
            let mut c = r.components.clone();
            c.insert("contained".into(), f64::from(u8::from(r.contained)));
            c.insert("bounds_ok".into(), f64::from(u8::from(r.bounds_ok)));
            let sizes: Vec<usize> = r.sets.iter().map(GSet::len).collect();
            let trace = serde_json::json!({ "set_sizes": sizes });
            Ok(out(None, r.sets.iter().map(doc).collect(), trace, r.contained && r.bounds_ok, true, c))
        }
        "petridis" => {
            let (j, k) = (params.j.unwrap_or(1), params.k.unwrap_or(2));
            let r = petridis_subset(a, other, j, k)?;
            let trace = serde_json::json!({ "strategy": r.strategy });
            Ok(out(Some(doc(&r.x)), vec![], trace, r.bound_ok, r.exact(), r.components.clone()))
        }
        other => Err(Error::InvalidArgument(format!(
            "unknown algorithm `{other}`; expected one of {}",
            EXTRACT_ALGORITHMS.join(", ")
        ))),
    }
}

const CSV_HEADER: [&str; 12] =
    ["index", "theorem", "verdict", "reason", "exact_statement", "lhs", "rhs", "ratio", "components", "set", "seed", "config"];

#[derive(Serialize, Deserialize)]
struct Components(#[serde(with = "float::map")] BTreeMap<String, f64>);

/// One row per record. Floats use the shortest text that parses back to the same value.
pub fn records_to_csv(records: &[InequalityRecord]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for (i, r) in records.iter().enumerate() {
        let (verdict, reason) = match &r.verdict {
            Verdict::Holds => ("holds", ""),
            Verdict::Fails => ("fails", ""),
            Verdict::RatioOnly => ("ratio-only", ""),
            Verdict::Skipped { reason } => ("skipped", reason.as_str()),
        };
        w.write_record([
            i.to_string(),
            r.theorem.clone(),
            verdict.to_string(),
            reason.to_string(),
            r.exact_statement.to_string(),
            r.lhs.to_string(),
            r.rhs.to_string(),
            r.ratio.to_string(),
            serde_json::to_string(&Components(r.components.clone()))?,
            r.provenance.set.clone(),
            r.provenance.seed.map(|s| s.to_string()).unwrap_or_default(),
            serde_json::to_string(&r.provenance.config)?,
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

pub fn records_from_csv(text: &str) -> Result<Vec<InequalityRecord>> {
    let mut rd = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = rd.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Parse(format!("unexpected CSV header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let num = |s: &str, col: &str, row: usize| {
        s.parse::<f64>().map_err(|e| Error::Parse(format!("row {row}, {col}: {e}")))
    };
    let mut out = Vec::new();
    for (row, rec) in rd.records().enumerate() {
        let rec = rec?;
        let verdict = match &rec[2] {
            "holds" => Verdict::Holds,
            "fails" => Verdict::Fails,
            "ratio-only" => Verdict::RatioOnly,
            "skipped" => Verdict::Skipped { reason: rec[3].to_string() },
            v => return Err(Error::Parse(format!("row {row}, verdict: unknown value `{v}`"))),
        };
        let exact_statement =
            rec[4].parse::<bool>().map_err(|e| Error::Parse(format!("row {row}, exact_statement: {e}")))?;
        let seed = match &rec[10] {
            "" => None,
            s => Some(s.parse::<u64>().map_err(|e| Error::Parse(format!("row {row}, seed: {e}")))?),
        };
        out.push(InequalityRecord {
            theorem: rec[1].to_string(),
            lhs: num(&rec[5], "lhs", row)?,
            rhs: num(&rec[6], "rhs", row)?,
            ratio: num(&rec[7], "ratio", row)?,
            components: from_json::<Components>(&rec[8])?.0,
            verdict,
            exact_statement,
            provenance: Provenance { set: rec[9].to_string(), seed, config: from_json(&rec[11])? },
        });
    }
    Ok(out)
}

/// Writes through a temporary file in the target directory, then renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(text: &str) -> Result<GSet> {
        SetDocument::parse(text)?.to_set(1 << 16)
    }

    #[test]
    fn document_round_trip() {
        let g = GroupSpec::new(vec![4, 6]).unwrap();
        let a = GSet::from_ranks(&g, [0, 5, 7, 23]).unwrap();
        let text = SetDocument::from_set(&a, Some("x".into())).to_json().unwrap();
        assert_eq!(doc(&text).unwrap(), a);
        assert!(text.ends_with("}\n") && !text.contains('\r'));
    }

    #[test]
    fn document_errors_name_the_field() {
        let msg = |t: &str| doc(t).unwrap_err().to_string();
        assert!(msg(r#"{"elements": []}"#).contains("group"));
        assert!(msg(r#"{"group": [5], "elements": [[1], ["x"]]}"#).contains("elements[1][0]"));
        assert!(msg(r#"{"group": [5, 3], "elements": [[1, 3]]}"#).contains("elements[0][1]"));
        assert!(msg(r#"{"group": [5], "elements": [[1], [2, 0]]}"#).contains("elements[1]"));
        assert!(msg(r#"{"group": [5], "elements": [[1], [1]]}"#).contains("duplicates elements[0]"));
        assert!(msg(r#"{"group": [1], "elements": []}"#).contains("group[0]"));
        assert!(msg(r#"{"group": [5], "elements": [], "extra": 1}"#).contains("extra"));
        assert!(matches!(doc(r#"{"group": [1000, 1000], "elements": []}"#), Err(Error::GroupTooLarge { .. })));
    }

    #[test]
    fn config_validation() {
        assert_eq!(RunConfig::parse("{}").unwrap(), RunConfig::default());
        let c = RunConfig::parse(r#"{"seed": 4, "format": "table"}"#).unwrap();
        assert_eq!((c.seed, c.format), (4, OutputFormat::Table));
        assert!(RunConfig::parse(r#"{"exact_dim_cap": 0}"#).unwrap_err().to_string().contains("exact_dim_cap"));
        assert!(RunConfig::parse(r#"{"epsilon": -1}"#).unwrap_err().to_string().contains("epsilon"));
        assert!(RunConfig::parse(r#"{"seed": "x"}"#).unwrap_err().to_string().contains("seed"));
    }

    #[test]
    fn analyze_subgroup() {
        let g = GroupSpec::binary(4).unwrap();
        let h = GSet::subgroup_generated(&g, &[1, 2, 4]).unwrap();
        let r = analyze(&h, None, &RunConfig::default()).unwrap();
        assert_eq!(r.doubling, 1.0);
        assert_eq!(r.energies.quantities["E"].as_f64(), 512.0);
        assert_eq!(r.energies.quantities["E_4"], crate::energy::Quantity::Exact(8u64.pow(5)));
        assert_eq!(r.dimension.dim.value, 3);
        assert!(!r.capped());
        assert!(r.table().contains("dim"));
    }

    #[test]
    fn csv_round_trip() {
        let recs = vec![
            InequalityRecord::checked("a/b", 1.0 / 3.0, 2.0, true).with("x,y", 0.1).with("c", f64::INFINITY),
            InequalityRecord::skipped("c", "needs \"more\", really").with_provenance(Provenance {
                set: r#"{"kind":"x"}"#.into(),
                seed: Some(u64::MAX),
                config: serde_json::json!({"a": [1, 2]}),
            }),
            InequalityRecord::ratio_only("d", 1e-300, 3e300),
        ];
        let text = records_to_csv(&recs).unwrap();
        let back = records_from_csv(&text).unwrap();
        assert_eq!(records_to_csv(&back).unwrap(), text);
        assert_eq!(back[0].lhs, 1.0 / 3.0);
        assert_eq!(back[1].verdict, recs[1].verdict);
        assert!(!text.contains('\r'));
    }

    #[test]
    fn extract_outputs() {
        let g = GroupSpec::cyclic(64).unwrap();
        let a = GSet::from_ranks(&g, [1, 2, 3, 5, 8, 13, 21, 34]).unwrap();
        let cfg = RunConfig::default();
        for alg in EXTRACT_ALGORITHMS {
            let r = run_extract(alg, &a, &ExtractParams::default(), &cfg).unwrap();
            assert!(r.postcondition, "{alg}");
            if let Some(s) = &r.subset {
                assert!(s.to_set(1 << 16).unwrap().is_subset(&a));
            }
        }
        assert!(run_extract("nope", &a, &ExtractParams::default(), &cfg).is_err());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
