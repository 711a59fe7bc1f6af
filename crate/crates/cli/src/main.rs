//! `zetalab` command-line front end.
//!
//! Every subcommand resolves its parameters as defaults < `--config` TOML
//! table < flags, runs, writes its data files and a `<out>.manifest.json`
//! next to the main output, and prints the results as JSON on stdout.
//! `replay` reruns a manifest's effective configuration.

mod commands;
mod params;

use clap::{Parser, Subcommand};
use params::*;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Map, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const TOOL: &str = "zetalab";

#[derive(Parser)]
#[command(name = "zetalab", version, about = "Value distribution of log ζ: sampling, densities, a-values")]
struct Cli {
    /// TOML file; the table named after the subcommand supplies parameters.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sieve primes, report ψ(σ).
    Primes(PrimesArgs),
    /// Sample log ζ(σ + it) over [T, 2T].
    ZetaSample(ZetaSampleArgs),
    /// Sample the random model log ζ(σ, X).
    McSample(McSampleArgs),
    /// Tabulate the characteristic function of the random model.
    CharfnTable(CharfnTableArgs),
    /// Invert the characteristic function into a density grid.
    Density(DensityArgs),
    /// Polynomial expansion of the density near σ = 1/2.
    Expansion(ExpansionArgs),
    /// Count solutions of ζ(s) = a in a rectangle.
    Count(CountArgs),
    /// Mean of log|ζ − a| on a vertical line, or Littlewood's lemma on a rectangle.
    Littlewood(LittlewoodArgs),
    /// Rectangle discrepancy between ζ samples and the model density.
    Discrepancy(DiscrepancyArgs),
    /// Empirical vs model characteristic function.
    CharfnCompare(CharfnCompareArgs),
    /// Box probabilities of the normalized log ζ near the critical line.
    CltBox(CltBoxArgs),
    /// Moment and tail bounds for the random Dirichlet polynomial.
    MomentCheck(MomentCheckArgs),
    /// Rerun the configuration recorded in a manifest.
    Replay {
        manifest: PathBuf,
        /// Override the output path.
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(zetalab::Error),
}

impl From<zetalab::Error> for CliError {
    fn from(e: zetalab::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn category(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Core(e) => e.category(),
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self.category() {
            "usage" => 2,
            "domain" => 3,
            "precision" => 4,
            "refused" => 5,
            "boundary" => 6,
            "numerical" => 7,
            "experiment" => 8,
            "format" => 9,
            "io" => 10,
            "table" => 11,
            _ => 1,
        }
    }
}

/// Commands whose output depends on a seed; it must be given explicitly.
fn needs_seed(name: &str, merged: &Map<String, Value>) -> bool {
    match name {
        "zeta-sample" | "mc-sample" | "discrepancy" | "charfn-compare" | "moment-check" => true,
        "clt-box" => merged.get("mc_samples").and_then(Value::as_u64).unwrap_or(0) > 0,
        _ => false,
    }
}

fn to_object<T: Serialize>(x: &T) -> Map<String, Value> {
    match serde_json::to_value(x) {
        Ok(Value::Object(m)) => m,
        _ => Map::new(),
    }
}

fn toml_table(config: Option<&Path>, name: &str) -> Result<Map<String, Value>, CliError> {
    let Some(path) = config else { return Ok(Map::new()) };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let doc: toml::Table =
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
    let snake = name.replace('-', "_");
    let section = doc.get(name).or_else(|| doc.get(&snake));
    match section {
        None => Ok(Map::new()),
        Some(toml::Value::Table(t)) => match serde_json::to_value(t) {
            Ok(Value::Object(m)) => Ok(m),
            _ => Err(CliError::Usage(format!("config section [{name}] is not a table"))),
        },
        Some(_) => Err(CliError::Usage(format!("config entry '{name}' is not a table"))),
    }
}

fn resolve<P: DeserializeOwned>(name: &str, merged: Map<String, Value>) -> Result<P, CliError> {
    if needs_seed(name, &merged) && !merged.contains_key("seed") {
        return Err(CliError::Usage(format!("{name} is stochastic: give --seed or set seed in the config")));
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Usage(format!("{name}: {e}")))
}

fn merge<A: Serialize>(name: &str, flags: &A, config: Option<&Path>) -> Result<Map<String, Value>, CliError> {
    let mut merged = toml_table(config, name)?;
    merged.extend(to_object(flags));
    Ok(merged)
}

fn run_with<P, F>(name: &str, merged: Map<String, Value>, f: F) -> Result<(Value, commands::Outcome, String), CliError>
where
    P: DeserializeOwned + Serialize + Default,
    F: FnOnce(&P) -> Result<commands::Outcome, CliError>,
{
    let p: P = resolve(name, merged)?;
    let effective = serde_json::to_value(&p).map_err(|e| CliError::Usage(e.to_string()))?;
    let out = effective.get("out").and_then(Value::as_str).unwrap_or_default().to_string();
    let outcome = f(&p)?;
    Ok((effective, outcome, out))
}

/// Runs subcommand `name` on a merged (not yet defaulted) parameter object.
fn execute(name: &str, merged: Map<String, Value>) -> Result<(Value, commands::Outcome, String), CliError> {
    match name {
        "primes" => run_with::<PrimesParams, _>(name, merged, commands::primes),
        "zeta-sample" => run_with::<ZetaSampleParams, _>(name, merged, commands::zeta_sample),
        "mc-sample" => run_with::<McSampleParams, _>(name, merged, commands::mc_sample),
        "charfn-table" => run_with::<CharfnTableParams, _>(name, merged, commands::charfn_table),
        "density" => run_with::<DensityParams, _>(name, merged, commands::density),
        "expansion" => run_with::<ExpansionParams, _>(name, merged, commands::expansion),
        "count" => run_with::<CountParams, _>(name, merged, commands::count),
        "littlewood" => run_with::<LittlewoodParams, _>(name, merged, commands::littlewood),
        "discrepancy" => run_with::<DiscrepancyParams, _>(name, merged, commands::discrepancy),
        "charfn-compare" => run_with::<CharfnCompareParams, _>(name, merged, commands::charfn_compare),
        "clt-box" => run_with::<CltBoxParams, _>(name, merged, commands::clt_box),
        "moment-check" => run_with::<MomentCheckParams, _>(name, merged, commands::moment_check),
        other => Err(CliError::Usage(format!("unknown command '{other}'"))),
    }
}

fn now_unix() -> f64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

fn write_manifest(
    name: &str,
    effective: &Value,
    outcome: &commands::Outcome,
    out: &str,
    threads: usize,
    started: f64,
) -> Result<PathBuf, CliError> {
    let path = commands::sibling(Path::new(out), "manifest.json");
    let manifest = json!({
        "tool": TOOL,
        "version": env!("CARGO_PKG_VERSION"),
        "command": name,
        "config": effective,
        "results": outcome.results,
        "files": outcome.files,
        "threads": threads,
        "started_unix": started,
        "finished_unix": now_unix(),
    });
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Usage(e.to_string()))?;
    std::fs::write(&path, text + "\n").map_err(zetalab::Error::from)?;
    Ok(path)
}

fn read_manifest(path: &Path) -> Result<(String, Map<String, Value>), CliError> {
    let text = std::fs::read_to_string(path).map_err(zetalab::Error::from)?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Core(zetalab::Error::Format(format!("{}: {e}", path.display()))))?;
    let bad = || CliError::Core(zetalab::Error::Format(format!("{} is not a {TOOL} manifest", path.display())));
    if v.get("tool").and_then(Value::as_str) != Some(TOOL) {
        return Err(bad());
    }
    let name = v.get("command").and_then(Value::as_str).ok_or_else(bad)?.to_string();
    let config = v.get("config").and_then(Value::as_object).ok_or_else(bad)?.clone();
    Ok((name, config))
}

fn dispatch(cli: Cli) -> Result<Value, CliError> {
    let threads = match cli.threads {
        Some(n) if n > 0 => {
            // fails only if a pool already exists, which cannot happen here
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            n
        }
        Some(_) => return Err(CliError::Usage("--threads must be positive".into())),
        None => rayon::current_num_threads(),
    };
    let config = cli.config.as_deref();
    let (name, merged) = match &cli.command {
        Command::Primes(a) => ("primes", merge("primes", a, config)?),
        Command::ZetaSample(a) => ("zeta-sample", merge("zeta-sample", a, config)?),
        Command::McSample(a) => ("mc-sample", merge("mc-sample", a, config)?),
        Command::CharfnTable(a) => ("charfn-table", merge("charfn-table", a, config)?),
        Command::Density(a) => ("density", merge("density", a, config)?),
        Command::Expansion(a) => ("expansion", merge("expansion", a, config)?),
        Command::Count(a) => ("count", merge("count", a, config)?),
        Command::Littlewood(a) => ("littlewood", merge("littlewood", a, config)?),
        Command::Discrepancy(a) => ("discrepancy", merge("discrepancy", a, config)?),
        Command::CharfnCompare(a) => ("charfn-compare", merge("charfn-compare", a, config)?),
        Command::CltBox(a) => ("clt-box", merge("clt-box", a, config)?),
        Command::MomentCheck(a) => ("moment-check", merge("moment-check", a, config)?),
        Command::Replay { manifest, out } => {
            let (name, mut merged) = read_manifest(manifest)?;
            if let Some(out) = out {
                merged.insert("out".into(), Value::String(out.clone()));
            }
            let name: &'static str = Box::leak(name.into_boxed_str());
            (name, merged)
        }
    };
    let started = now_unix();
    let (effective, outcome, out) = execute(name, merged)?;
    let manifest = write_manifest(name, &effective, &outcome, &out, threads, started)?;
    Ok(json!({
        "command": name,
        "results": outcome.results,
        "files": outcome.files,
        "manifest": manifest,
    }))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match dispatch(cli) {
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let report = json!({ "error": { "category": e.category(), "message": e.message() } });
            eprintln!("{report}");
            ExitCode::from(e.exit_code())
        }
    }
}
