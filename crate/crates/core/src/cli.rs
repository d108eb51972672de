//! The `frobevo` command line.
//!
//! Exit status: 0 on success (including a refuted conjecture, which is a
//! normal report), 1 on domain errors, 2 on usage errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::dataset::{materialize, Dataset, TupleFamily};
use crate::evolve::{promote_run, repair_constant, run, GaConfig, MutationScheme};
use crate::expr::EvalMode;
use crate::grammar::{parse_bnf, Grammar, FROBENIUS_BNF};
use crate::mapper::{trace_mapping, Chromosome, MappingLimits};
use crate::oracle::{dp_bound, frobenius, frobenius_bruteforce, GenTuple};
use crate::verify::{builtin, builtin_conjectures, verify_with, Conjecture, OracleKind, DEFAULT_K_HI};

pub const SEED_ENV: &str = "FROBEVO_SEED";
const MANIFEST: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(name = "frobevo", version, about = "Grammatical evolution of Frobenius-number formulas")]
struct Cli {
    /// Output format for stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Frobenius number of a coprime tuple.
    Frobenius {
        #[arg(required = true, num_args = 2.., allow_negative_numbers = true)]
        generators: Vec<i64>,
        /// Also run the brute-force oracle and require agreement.
        #[arg(long)]
        check: bool,
    },
    /// Materialize a tuple family into a CSV dataset.
    Dataset {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the derivation of a chromosome.
    Trace {
        /// Grammar file (default: the shipped expression grammar).
        #[arg(long)]
        grammar: Option<PathBuf>,
        /// Comma-separated codons, e.g. 120,44,42,96,189,64.
        #[arg(long)]
        codons: String,
        #[arg(long)]
        max_wraps: Option<usize>,
        #[arg(long)]
        max_expansions: Option<usize>,
    },
    /// Run the genetic algorithm on a dataset.
    Evolve {
        #[arg(long)]
        grammar: Option<PathBuf>,
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        ga: GaArgs,
        /// Directory for run.json and the manifest.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Check a conjecture against the oracle.
    Verify {
        /// A shipped conjecture by name (see --list).
        #[arg(long, conflicts_with_all = ["family", "formula"])]
        conjecture: Option<String>,
        #[arg(long, requires = "formula")]
        family: Option<String>,
        #[arg(long, requires = "family")]
        formula: Option<String>,
        #[arg(long)]
        from: Option<i64>,
        #[arg(long)]
        to: Option<i64>,
        #[arg(long, value_enum, default_value_t = OracleArg::Apery)]
        oracle: OracleArg,
        /// List shipped conjectures and exit.
        #[arg(long)]
        list: bool,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Dataset, evolution, promotion and verification in one go.
    Pipeline {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        grammar: Option<PathBuf>,
        #[command(flatten)]
        ga: GaArgs,
        /// Try adding a constant in -3..=3 to the promoted formula.
        #[arg(long)]
        repair: bool,
        /// Last parameter of the verification sweep (default: start + 200).
        #[arg(long)]
        verify_to: Option<i64>,
        #[arg(long, default_value = "frobevo-out")]
        out_dir: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleArg {
    Apery,
    BruteForce,
}

#[derive(Debug, Args)]
struct FamilyArgs {
    /// Comma-separated generator expressions, e.g. "x,x+3,2*x+1,2*x+7".
    #[arg(long)]
    family: String,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    start: i64,
    #[arg(long, default_value_t = 40)]
    count: usize,
    /// Keep non-coprime members (the oracle then rejects them).
    #[arg(long)]
    no_filter: bool,
}

#[derive(Debug, Args, Serialize)]
struct GaArgs {
    /// key=value config file; flags override it.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// RNG seed (default: FROBEVO_SEED, else 42).
    #[arg(long)]
    seed: Option<u64>,
    /// Population size [500].
    #[arg(long)]
    pop: Option<usize>,
    /// Generations [100].
    #[arg(long)]
    gens: Option<usize>,
    /// Crossover probability [0.9].
    #[arg(long)]
    pc: Option<f64>,
    /// Mutation probability [0.1].
    #[arg(long)]
    pm: Option<f64>,
    /// Chromosome length in codons [100].
    #[arg(long)]
    len: Option<usize>,
    /// Tournament size [3].
    #[arg(long)]
    tournament: Option<usize>,
    /// Elite individuals copied unchanged [1].
    #[arg(long)]
    elitism: Option<usize>,
    /// rational | floor-div [rational].
    #[arg(long)]
    eval_mode: Option<EvalMode>,
    /// per-codon | per-offspring [per-codon].
    #[arg(long)]
    mutation: Option<MutationScheme>,
    #[arg(long)]
    max_wraps: Option<usize>,
    #[arg(long)]
    max_expansions: Option<usize>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Domain(String),
}

impl CliError {
    fn domain(e: impl std::fmt::Display) -> Self {
        CliError::Domain(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

/// Written next to every output.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    /// Input path -> SHA-256 of its contents.
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    fn new(subcommand: &str, config: serde_json::Value, seed: Option<u64>) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            config,
            seed,
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    fn input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs
            .insert(path.display().to_string(), hex::encode(Sha256::digest(bytes)));
    }

    fn write(&self, path: &Path) -> CliResult<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(path, text + "\n").map_err(|e| CliError::domain(format!("{}: {e}", path.display())))
    }
}

fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::domain(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::domain(format!("{}: {e}", path.display())))
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::domain(format!("{}: {e}", dir.display())))
}

/// Loads a grammar file, or the shipped grammar when no path is given.
fn load_grammar(path: Option<&Path>, manifest: Option<&mut RunManifest>) -> CliResult<Grammar> {
    let source = match path {
        Some(p) => {
            let bytes = read_file(p)?;
            if let Some(m) = manifest {
                m.input(p, &bytes);
            }
            String::from_utf8(bytes)
                .map_err(|_| CliError::domain(format!("{}: not UTF-8", p.display())))?
        }
        None => FROBENIUS_BNF.to_string(),
    };
    parse_bnf(&source).map_err(CliError::domain)
}

/// Parses the key=value config format: one pair per line, `#` comments.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value", i + 1))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn apply_config_value(cfg: &mut GaConfig, key: &str, value: &str) -> Result<(), String> {
    fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
        v.parse().map_err(|_| format!("config `{key}`: cannot parse `{v}`"))
    }
    match key {
        "seed" => cfg.seed = num(key, value)?,
        "pop" => cfg.population_size = num(key, value)?,
        "gens" => cfg.generations = num(key, value)?,
        "pc" => cfg.crossover_prob = num(key, value)?,
        "pm" => cfg.mutation_prob = num(key, value)?,
        "len" => cfg.chromosome_len = num(key, value)?,
        "tournament" => cfg.tournament_size = num(key, value)?,
        "elitism" => cfg.elitism = num(key, value)?,
        "eval-mode" => cfg.eval_mode = value.parse()?,
        "mutation" => cfg.mutation = value.parse()?,
        "max-wraps" => cfg.limits.max_wraps = num(key, value)?,
        "max-expansions" => cfg.limits.max_expansions = num(key, value)?,
        other => return Err(format!("unknown config key `{other}`")),
    }
    Ok(())
}

/// Defaults, then the config file, then flags. The seed falls back to
/// `FROBEVO_SEED` when neither flag nor file sets it.
fn resolve_ga_config(args: &GaArgs, manifest: &mut RunManifest) -> CliResult<GaConfig> {
    let mut cfg = GaConfig::default();
    let mut seed_set = false;
    if let Some(path) = &args.config {
        let bytes = read_file(path)?;
        manifest.input(path, &bytes);
        let text = String::from_utf8_lossy(&bytes);
        let pairs = parse_config_file(&text).map_err(CliError::Usage)?;
        for (k, v) in &pairs {
            apply_config_value(&mut cfg, k, v).map_err(CliError::Usage)?;
        }
        seed_set = pairs.contains_key("seed");
    }
    if !seed_set && args.seed.is_none() {
        if let Ok(v) = std::env::var(SEED_ENV) {
            cfg.seed = v
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{SEED_ENV}=`{v}` is not a u64")))?;
        }
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.pop {
        cfg.population_size = v;
    }
    if let Some(v) = args.gens {
        cfg.generations = v;
    }
    if let Some(v) = args.pc {
        cfg.crossover_prob = v;
    }
    if let Some(v) = args.pm {
        cfg.mutation_prob = v;
    }
    if let Some(v) = args.len {
        cfg.chromosome_len = v;
    }
    if let Some(v) = args.tournament {
        cfg.tournament_size = v;
    }
    if let Some(v) = args.elitism {
        cfg.elitism = v;
    }
    if let Some(v) = args.eval_mode {
        cfg.eval_mode = v;
    }
    if let Some(v) = args.mutation {
        cfg.mutation = v;
    }
    if let Some(v) = args.max_wraps {
        cfg.limits.max_wraps = v;
    }
    if let Some(v) = args.max_expansions {
        cfg.limits.max_expansions = v;
    }
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn build_family(args: &FamilyArgs) -> CliResult<TupleFamily> {
    Ok(TupleFamily::parse(&args.family, args.start, args.count)
        .map_err(|e| CliError::Usage(e.to_string()))?
        .with_filter(!args.no_filter))
}

struct Ctx {
    format: Format,
    out: Vec<u8>,
}

impl Ctx {
    fn emit(&mut self, text: &str, json: &str) -> CliResult<()> {
        let body = match self.format {
            Format::Text => text,
            Format::Json => json,
        };
        let body = body.trim_end_matches('\n');
        writeln!(self.out, "{body}").map_err(CliError::domain)
    }
}

fn cmd_frobenius(ctx: &mut Ctx, generators: &[i64], check: bool) -> CliResult<()> {
    let t = GenTuple::new(generators.to_vec()).map_err(CliError::domain)?;
    let g = frobenius(&t).map_err(CliError::domain)?;
    let brute = if check {
        let b = frobenius_bruteforce(&t, dp_bound(&t).map_err(CliError::domain)?)
            .map_err(CliError::domain)?;
        if b != g {
            return Err(CliError::Domain(format!(
                "oracle disagreement on {t}: apery {g}, brute force {b}"
            )));
        }
        Some(b)
    } else {
        None
    };
    let text = match brute {
        Some(_) => format!("{g}\ncheck: brute force agrees"),
        None => g.to_string(),
    };
    let js = json!({ "tuple": t, "frobenius": g, "checked": check }).to_string();
    ctx.emit(&text, &js)
}

fn manifest_path_for(file: &Path) -> PathBuf {
    let mut name = file.file_name().map(OsString::from).unwrap_or_default();
    name.push(".manifest.json");
    file.with_file_name(name)
}

fn cmd_dataset(ctx: &mut Ctx, args: &FamilyArgs, out: Option<&Path>) -> CliResult<()> {
    let family = build_family(args)?;
    let data = materialize(&family).map_err(CliError::domain)?;
    let csv = data.to_csv_string();
    if let Some(path) = out {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            ensure_dir(parent)?;
        }
        write_file(path, &csv)?;
        let mut m = RunManifest::new(
            "dataset",
            json!({ "family": args.family, "start": args.start, "count": args.count,
                    "coprimality_filter": !args.no_filter }),
            None,
        );
        m.outputs.push(path.display().to_string());
        m.write(&manifest_path_for(path))?;
    }
    let text = match out {
        Some(p) => format!("{} rows written to {}", data.len(), p.display()),
        None => csv.clone(),
    };
    let js = serde_json::to_string_pretty(&json!({
        "family": family.to_string(),
        "rows": data.rows,
        "id": data.id(),
    }))
    .expect("json");
    ctx.emit(&text, &js)
}

fn cmd_trace(
    ctx: &mut Ctx,
    grammar: Option<&Path>,
    codons: &str,
    max_wraps: Option<usize>,
    max_expansions: Option<usize>,
) -> CliResult<()> {
    let g = load_grammar(grammar, None)?;
    let c = Chromosome::parse_csv(codons).map_err(CliError::Usage)?;
    let mut limits = MappingLimits::default();
    if let Some(w) = max_wraps {
        limits.max_wraps = w;
    }
    if let Some(e) = max_expansions {
        limits.max_expansions = e;
    }
    let trace = trace_mapping(&c, &g, limits);
    let js = serde_json::to_string_pretty(&trace).expect("json");
    ctx.emit(&trace.to_string(), &js)
}

fn cmd_evolve(
    ctx: &mut Ctx,
    grammar: Option<&Path>,
    data_path: &Path,
    ga: &GaArgs,
    out_dir: Option<&Path>,
) -> CliResult<()> {
    let mut manifest = RunManifest::new("evolve", json!(null), None);
    let cfg = resolve_ga_config(ga, &mut manifest)?;
    let g = load_grammar(grammar, Some(&mut manifest))?;
    let bytes = read_file(data_path)?;
    manifest.input(data_path, &bytes);
    let data = Dataset::from_csv_reader(bytes.as_slice()).map_err(CliError::domain)?;
    manifest.config = json!({ "ga": cfg, "grammar": grammar.map(|p| p.display().to_string()) });
    manifest.seed = Some(cfg.seed);

    let result = run(&cfg, &g, &data).map_err(CliError::domain)?;
    let js = result.to_json();
    if let Some(dir) = out_dir {
        ensure_dir(dir)?;
        let run_path = dir.join("run.json");
        write_file(&run_path, &(js.clone() + "\n"))?;
        manifest.outputs.push("run.json".into());
        manifest.write(&dir.join(MANIFEST))?;
    }
    ctx.emit(&result.summary(), &js)
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    ctx: &mut Ctx,
    conjecture: Option<&str>,
    family: Option<&str>,
    formula: Option<&str>,
    from: Option<i64>,
    to: Option<i64>,
    oracle: OracleArg,
    out_dir: Option<&Path>,
) -> CliResult<()> {
    let c: Conjecture = match (conjecture, family, formula) {
        (Some(name), _, _) => builtin(name).map_err(|e| CliError::Usage(e.to_string()))?,
        (None, Some(fam), Some(f)) => {
            Conjecture::parse("custom", fam, f, from.unwrap_or(1)).map_err(|e| CliError::Usage(e.to_string()))?
        }
        _ => {
            return Err(CliError::Usage(
                "verify needs --conjecture NAME or both --family and --formula".into(),
            ))
        }
    };
    let lo = from.unwrap_or(c.k_min);
    let hi = to.unwrap_or(DEFAULT_K_HI);
    let kind = match oracle {
        OracleArg::Apery => OracleKind::Apery,
        OracleArg::BruteForce => OracleKind::BruteForce,
    };
    let report = verify_with(&c, lo, hi, kind).map_err(CliError::domain)?;
    let js = report.to_json();
    if let Some(dir) = out_dir {
        ensure_dir(dir)?;
        write_file(&dir.join("report.json"), &(js.clone() + "\n"))?;
        let mut m = RunManifest::new(
            "verify",
            json!({ "conjecture": c.name, "family": c.family.to_string(),
                    "formula": c.formula_text(), "from": lo, "to": hi, "oracle": kind }),
            None,
        );
        m.outputs.push("report.json".into());
        m.write(&dir.join(MANIFEST))?;
    }
    ctx.emit(&report.to_string(), &js)
}

fn cmd_list(ctx: &mut Ctx) -> CliResult<()> {
    let all = builtin_conjectures();
    let mut text = String::new();
    for c in &all {
        text.push_str(&format!(
            "{:<18} k >= {:<3} g{} = {}\n",
            c.name,
            c.k_min,
            c.family,
            c.formula_text()
        ));
    }
    let js: Vec<_> = all
        .iter()
        .map(|c| json!({ "name": c.name, "k_min": c.k_min, "family": c.family.to_string(),
                         "formula": c.formula_text() }))
        .collect();
    ctx.emit(&text, &serde_json::to_string_pretty(&js).expect("json"))
}

fn cmd_pipeline(
    ctx: &mut Ctx,
    fam: &FamilyArgs,
    grammar: Option<&Path>,
    ga: &GaArgs,
    repair: bool,
    verify_to: Option<i64>,
    out_dir: &Path,
) -> CliResult<()> {
    let mut manifest = RunManifest::new("pipeline", json!(null), None);
    let cfg = resolve_ga_config(ga, &mut manifest)?;
    let g = load_grammar(grammar, Some(&mut manifest))?;
    let family = build_family(fam)?;
    let hi = verify_to.unwrap_or(fam.start.saturating_add(DEFAULT_K_HI));
    manifest.config = json!({
        "family": fam.family, "start": fam.start, "count": fam.count,
        "coprimality_filter": !fam.no_filter, "ga": cfg, "repair": repair,
        "verify_to": hi, "grammar": grammar.map(|p| p.display().to_string()),
    });
    manifest.seed = Some(cfg.seed);
    ensure_dir(out_dir)?;

    let data = materialize(&family).map_err(CliError::domain)?;
    write_file(&out_dir.join("dataset.csv"), &data.to_csv_string())?;

    let result = run(&cfg, &g, &data).map_err(CliError::domain)?;
    write_file(&out_dir.join("run.json"), &(result.to_json() + "\n"))?;

    let mut promoted = promote_run(&result, &data).map_err(CliError::domain)?;
    if repair {
        promoted = repair_constant(&promoted, &data);
    }
    let promoted_js = serde_json::to_string_pretty(&promoted).expect("json");
    write_file(&out_dir.join("conjecture.json"), &(promoted_js + "\n"))?;

    let conjecture = Conjecture {
        name: "evolved".into(),
        family: family.clone(),
        formula: promoted.formula.clone(),
        k_min: fam.start,
    };
    let report = verify_with(&conjecture, fam.start, hi, OracleKind::Apery).map_err(CliError::domain)?;
    let report_js = report.to_json();
    write_file(&out_dir.join("report.json"), &(report_js.clone() + "\n"))?;

    manifest.outputs = ["dataset.csv", "run.json", "conjecture.json", "report.json"]
        .map(String::from)
        .to_vec();
    manifest.write(&out_dir.join(MANIFEST))?;

    let text = format!(
        "{}promoted: {}\n{}outputs in {}",
        result.summary(),
        promoted.formula.render(&family.var),
        report,
        out_dir.display()
    );
    let js = serde_json::to_string_pretty(&json!({
        "best_fitness": result.best.fitness,
        "promoted": promoted.formula.render(&family.var),
        "verdict": report.verdict,
        "out_dir": out_dir.display().to_string(),
    }))
    .expect("json");
    ctx.emit(&text, &js)
}

fn execute(cli: Cli, ctx: &mut Ctx) -> CliResult<()> {
    match &cli.command {
        Command::Frobenius { generators, check } => cmd_frobenius(ctx, generators, *check),
        Command::Dataset { family, out } => cmd_dataset(ctx, family, out.as_deref()),
        Command::Trace {
            grammar,
            codons,
            max_wraps,
            max_expansions,
        } => cmd_trace(ctx, grammar.as_deref(), codons, *max_wraps, *max_expansions),
        Command::Evolve {
            grammar,
            data,
            ga,
            out_dir,
        } => cmd_evolve(ctx, grammar.as_deref(), data, ga, out_dir.as_deref()),
        Command::Verify { list: true, .. } => cmd_list(ctx),
        Command::Verify {
            conjecture,
            family,
            formula,
            from,
            to,
            oracle,
            out_dir,
            ..
        } => cmd_verify(
            ctx,
            conjecture.as_deref(),
            family.as_deref(),
            formula.as_deref(),
            *from,
            *to,
            *oracle,
            out_dir.as_deref(),
        ),
        Command::Pipeline {
            family,
            grammar,
            ga,
            repair,
            verify_to,
            out_dir,
        } => cmd_pipeline(ctx, family, grammar.as_deref(), ga, *repair, *verify_to, out_dir),
    }
}

/// Runs one invocation and returns its exit status.
pub fn dispatch<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{rendered}")
            } else {
                write!(err, "{rendered}")
            };
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker pool: {e}");
            return 1;
        }
    };
    let mut ctx = Ctx {
        format: cli.format,
        out: Vec::new(),
    };
    let result = pool.install(|| execute(cli, &mut ctx));
    if out.write_all(&ctx.out).and_then(|_| out.flush()).is_err() {
        return 1;
    }
    match result {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}\n\nUsage: frobevo <frobenius|dataset|evolve|trace|verify|pipeline> [OPTIONS]");
            2
        }
        Err(CliError::Domain(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}
