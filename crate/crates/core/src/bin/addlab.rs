use std::io::Write as _;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use addlab::experiments::{bound_battery, generate, resolve_ids, FamilySpec, GenSpec, THEOREMS};
use addlab::report::{
    analyze, from_json, records_to_csv, run_extract, table, write_atomic, ExtractParams, OutputFormat, Report,
    RunConfig, SetDocument, EXTRACT_ALGORITHMS,
};
use addlab::{Error, GSet, Result};

#[derive(Parser)]
#[command(name = "addlab", version, about = "Energies, dissociated sets and additive dimension over finite abelian groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (JSON); missing fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// What to print on stdout.
    #[arg(long, value_parser = parse_format)]
    format: Option<OutputFormat>,
}

#[derive(Subcommand)]
enum Command {
    /// Energies, dimension profile and minimum convolution of one set.
    Analyze {
        set: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run identity and inequality checks over a seeded family; writes CSV.
    Verify {
        /// Check ids or aliases, or `all`.
        #[arg(required = true)]
        ids: Vec<String>,
        /// Family descriptor (JSON); defaults to 20 random 10-subsets of Z_64.
        #[arg(long)]
        family: Option<PathBuf>,
        /// Overrides the family size.
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run an extraction or covering algorithm on a set.
    Extract {
        /// One of energy-subset, tk-subset, chang-cover, ruzsa-cover, petridis.
        algorithm: String,
        set: PathBuf,
        /// Second operand (B or P); defaults to the set itself.
        #[arg(long)]
        with: Option<PathBuf>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        j: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the extracted subset as a set document.
        #[arg(long)]
        subset_out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Generate a set document.
    Gen {
        /// random-subset, arithmetic-progression, generalized-ap, coset-progression,
        /// subspace, subspace-plus-dissociated, symmetric-random or dissociated.
        kind: String,
        #[command(flatten)]
        params: GenParams,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        label: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// List check ids and aliases.
    Theorems,
}

#[derive(Args)]
struct GenParams {
    /// Cyclic factor orders, comma separated.
    #[arg(long, value_delimiter = ',')]
    group: Option<Vec<usize>>,
    #[arg(long)]
    size: Option<usize>,
    /// Start (or base) element: an integer or comma-separated coordinates.
    #[arg(long, alias = "base", allow_hyphen_values = true)]
    start: Option<String>,
    /// Step element; repeat for several steps.
    #[arg(long, allow_hyphen_values = true)]
    step: Vec<String>,
    /// Length; repeat for several steps.
    #[arg(long)]
    length: Vec<usize>,
    /// Subgroup generator; repeat for several.
    #[arg(long, allow_hyphen_values = true)]
    subgroup: Vec<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    lambda: Option<usize>,
    /// Let the dissociated part meet the subspace.
    #[arg(long)]
    dependent: bool,
}

fn parse_format(s: &str) -> std::result::Result<OutputFormat, String> {
    match s {
        "json" => Ok(OutputFormat::Json),
        "table" => Ok(OutputFormat::Table),
        _ => Err(format!("expected json or table, got `{s}`")),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::parse(&read(p)?).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(f) = common.format {
        cfg.format = f;
    }
    Ok(cfg)
}

fn load_set(path: &Path, cfg: &RunConfig) -> Result<(GSet, Option<String>)> {
    let tag = |e: Error| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    };
    let doc = SetDocument::parse(&read(path)?).map_err(tag)?;
    let set = doc.to_set(cfg.max_group_order).map_err(tag)?;
    Ok((set, doc.label))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn element(s: &str) -> Result<Value> {
    if let Ok(v) = s.parse::<i64>() {
        return Ok(json!(v));
    }
    let coords: std::result::Result<Vec<usize>, _> = s.split(',').map(|c| c.trim().parse::<usize>()).collect();
    coords.map(|c| json!(c)).map_err(|_| Error::Parse(format!("`{s}` is neither an integer nor coordinates")))
}

fn gen_spec(kind: &str, p: &GenParams) -> Result<GenSpec> {
    let mut m = Map::new();
    m.insert("kind".into(), json!(kind));
    let missing = |flag: &str| Error::Parse(format!("{kind}: missing --{flag}"));
    let one = |v: &[String], flag: &str| -> Result<Value> {
        match v {
            [x] => element(x),
            _ => Err(Error::Parse(format!("{kind}: expected exactly one --{flag}"))),
        }
    };
    let group = || p.group.clone().map(|g| json!(g)).ok_or_else(|| missing("group"));
    let start = || p.start.as_deref().map(element).transpose()?.ok_or_else(|| missing("start"));
    let steps = || p.step.iter().map(|s| element(s)).collect::<Result<Vec<_>>>();
    match kind {
        "random-subset" | "symmetric-random" | "dissociated" => {
            m.insert("group".into(), group()?);
            m.insert("size".into(), json!(p.size.ok_or_else(|| missing("size"))?));
        }
        "arithmetic-progression" => {
            m.insert("group".into(), group()?);
            m.insert("start".into(), start()?);
            m.insert("step".into(), one(&p.step, "step")?);
            let length = match p.length[..] {
                [l] => l,
                _ => return Err(Error::Parse(format!("{kind}: expected exactly one --length"))),
            };
            m.insert("length".into(), json!(length));
        }
        "generalized-ap" | "coset-progression" => {
            m.insert("group".into(), group()?);
            m.insert("base".into(), start()?);
            m.insert("steps".into(), json!(steps()?));
            m.insert("lengths".into(), json!(p.length));
            if kind == "coset-progression" {
                let gens = p.subgroup.iter().map(|s| element(s)).collect::<Result<Vec<_>>>()?;
                m.insert("subgroup".into(), json!(gens));
            }
        }
        "subspace" | "subspace-plus-dissociated" => {
            m.insert("n".into(), json!(p.n.ok_or_else(|| missing("n"))?));
            m.insert("k".into(), json!(p.k.ok_or_else(|| missing("k"))?));
            if kind == "subspace-plus-dissociated" {
                m.insert("lambda".into(), json!(p.lambda.ok_or_else(|| missing("lambda"))?));
                m.insert("independent".into(), json!(!p.dependent));
            }
        }
        other => return Err(Error::Parse(format!("unknown generator kind `{other}`"))),
    }
    from_json(&Value::Object(m).to_string())
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Analyze { set, out, common } => {
            let cfg = load_config(&common)?;
            let (a, label) = load_set(&set, &cfg)?;
            let result = analyze(&a, label, &cfg)?;
            let capped = result.capped();
            let table_text = result.table();
            let report = Report::new("analyze", &cfg, result).to_json()?;
            if let Some(p) = &out {
                write_atomic(p, report.as_bytes())?;
            }
            match cfg.format {
                OutputFormat::Table => emit(None, &table_text)?,
                OutputFormat::Json if out.is_none() => emit(None, &report)?,
                OutputFormat::Json => {}
            }
            if capped {
                eprintln!("addlab: some searches hit their caps; see `flags` in the report");
            }
            Ok(if capped { 3 } else { 0 })
        }
        Command::Verify { ids, family, count, out, common } => {
            let cfg = load_config(&common)?;
            let names: Vec<&str> = ids.iter().map(String::as_str).collect();
            resolve_ids(&names)?;
            let mut fam = match &family {
                Some(p) => from_json::<FamilySpec>(&read(p)?)
                    .map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?,
                None => FamilySpec::default(),
            };
            if let Some(c) = count {
                fam.count = c;
            }
            if family.is_none() || common.seed.is_some() {
                fam.seed = cfg.seed;
            }
            let order = fam.generator.group()?.order();
            if order > cfg.max_group_order {
                return Err(Error::GroupTooLarge { order: order as u128, cap: cfg.max_group_order });
            }
            let outcome = bound_battery(&fam, &names, &cfg.battery())?;
            emit(out.as_deref(), &records_to_csv(&outcome.records)?)?;
            let count_of = |f: &dyn Fn(&addlab::record::InequalityRecord) -> bool| {
                outcome.records.iter().filter(|r| f(r)).count().to_string()
            };
            let rows = vec![
                ("records".to_string(), outcome.records.len().to_string()),
                ("holds".to_string(), count_of(&|r| r.holds())),
                ("exact failures".to_string(), count_of(&|r| !r.acceptable())),
                ("ratio only".to_string(), count_of(&|r| r.verdict == addlab::record::Verdict::RatioOnly)),
                ("skipped".to_string(), count_of(&|r| matches!(r.verdict, addlab::record::Verdict::Skipped { .. }))),
                ("pipeline errors".to_string(), outcome.errors.len().to_string()),
            ];
            eprint!("{}", table(&rows));
            for e in &outcome.errors {
                eprintln!("error: {} on member {}: {}", e.theorem, e.member, e.message);
            }
            Ok(if outcome.records.iter().any(|r| !r.acceptable()) {
                4
            } else if !outcome.errors.is_empty() {
                3
            } else {
                0
            })
        }
        Command::Extract { algorithm, set, with, epsilon, eta, k, j, out, subset_out, common } => {
            let mut cfg = load_config(&common)?;
            if let Some(e) = epsilon {
                cfg.epsilon = e;
            }
            if eta.is_some() {
                cfg.eta = eta;
            }
            cfg.validate()?;
            if !EXTRACT_ALGORITHMS.contains(&algorithm.as_str()) {
                return Err(Error::InvalidArgument(format!(
                    "unknown algorithm `{algorithm}`; expected one of {}",
                    EXTRACT_ALGORITHMS.join(", ")
                )));
            }
            let (a, _) = load_set(&set, &cfg)?;
            let other = with.as_deref().map(|p| load_set(p, &cfg)).transpose()?.map(|(s, _)| s);
            let result = run_extract(&algorithm, &a, &ExtractParams { with: other, k, j }, &cfg)?;
            if let (Some(p), Some(doc)) = (&subset_out, &result.subset) {
                write_atomic(p, doc.to_json()?.as_bytes())?;
            }
            let code = match (result.postcondition, result.guaranteed) {
                (true, _) => 0,
                (false, false) => 3,
                (false, true) => 4,
            };
            let summary = table(&[
                ("algorithm".into(), algorithm.clone()),
                ("postcondition".into(), result.postcondition.to_string()),
                ("guaranteed".into(), result.guaranteed.to_string()),
                ("subset size".into(), result.subset.as_ref().map_or("-".into(), |d| d.elements.len().to_string())),
                ("cover sets".into(), result.sets.len().to_string()),
            ]);
            let report = Report::new("extract", &cfg, result).to_json()?;
            if let Some(p) = &out {
                write_atomic(p, report.as_bytes())?;
            }
            match cfg.format {
                OutputFormat::Table => emit(None, &summary)?,
                OutputFormat::Json if out.is_none() => emit(None, &report)?,
                OutputFormat::Json => {}
            }
            Ok(code)
        }
        Command::Gen { kind, params, seed, label, out } => {
            let spec = gen_spec(&kind, &params)?;
            let generated = generate(&spec, seed)?;
            let label = label.unwrap_or_else(|| format!("{kind} seed={seed}"));
            write_atomic(&out, SetDocument::from_set(&generated.set, Some(label)).to_json()?.as_bytes())?;
            Ok(0)
        }
        Command::Theorems => {
            let rows: Vec<(String, String)> = THEOREMS
                .iter()
                .map(|t| {
                    let kind = if t.exact { "exact" } else { "ratio" };
                    (t.id.to_string(), format!("{:<10} {:<6} {}", t.alias.unwrap_or("-"), kind, t.summary))
                })
                .collect();
            emit(None, &table(&rows))?;
            Ok(0)
        }
    }
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("ADDLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Parse(format!("ADDLAB_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidArgument(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    panic::set_hook(Box::new(|info| eprintln!("addlab: internal error: {info}")));
    let outcome = panic::catch_unwind(AssertUnwindSafe(|| init_threads().and_then(|()| run(cli))));
    match outcome {
        Ok(Ok(code)) => ExitCode::from(code),
        Ok(Err(e)) => {
            eprintln!("addlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => ExitCode::from(4),
    }
}
