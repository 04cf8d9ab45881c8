//! `risfocus`: scenario generation, codebook construction, evaluation and aggregation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use risfocus_core::codebook::CodebookFile;
use risfocus_core::eval::{self, aggregate_csv, entries_csv, grid_text, FamilyPoint};
use risfocus_core::{build_codebook, reference_scenario, Codebook, Method, Provenance, Scenario, DEFAULT_TOL};

#[derive(Parser)]
#[command(name = "risfocus", version, about = "Inter-RIS signal-focusing codebooks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scenario files.
    #[command(subcommand)]
    Scenario(ScenarioCmd),
    /// Codebook files.
    #[command(subcommand)]
    Codebook(CodebookCmd),
    /// Gain and leakage maps for one codeword.
    #[command(subcommand)]
    Evaluate(EvaluateCmd),
    /// Scenario-family averages over seeds.
    Aggregate(AggregateArgs),
}

#[derive(Subcommand)]
enum ScenarioCmd {
    /// Generate a seeded scenario.
    Gen(GenArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Use the four-RIS reference layout.
    #[arg(long, required = true)]
    paper: bool,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 7)]
    nx: usize,
    #[arg(long, default_value_t = 7)]
    nz: usize,
    /// NLoS azimuth half-width in degrees.
    #[arg(long, default_value_t = 10.0)]
    delta_a_deg: f64,
    #[arg(long, default_value = "scenario.json")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum CodebookCmd {
    /// Build the codebook of one source RIS.
    Build(BuildArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Linear,
    Opt,
    Both,
}

impl MethodArg {
    fn methods(self) -> Vec<Method> {
        match self {
            MethodArg::Linear => vec![Method::Linear],
            MethodArg::Opt => vec![Method::Opt],
            MethodArg::Both => Method::ALL.to_vec(),
        }
    }
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    source: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    method: MethodArg,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    sdr_tol: f64,
    #[arg(long, default_value = "codebook.json")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum EvaluateCmd {
    /// Intended gains towards the focus RIS.
    Gains(EvalArgs),
    /// Leakage towards other RISs.
    Leakage(EvalArgs),
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    codebook: PathBuf,
    #[arg(long)]
    source: usize,
    #[arg(long)]
    focus: usize,
    /// Leak RIS (leakage only); every non-focus RIS when omitted.
    #[arg(long)]
    leak: Option<usize>,
    /// Restrict to one method of the codebook file.
    #[arg(long)]
    method: Option<Method>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct AggregateArgs {
    /// Seed range `a..b` (inclusive) or list `a,b,c`.
    #[arg(long)]
    seeds: String,
    /// Panel sizes, e.g. `7x7,10x10`.
    #[arg(long, default_value = "7x7,10x10")]
    sizes: String,
    /// NLoS half-widths in degrees, e.g. `10,20`.
    #[arg(long, default_value = "10,20")]
    delta_a_deg: String,
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    method: MethodArg,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    sdr_tol: f64,
    #[arg(long, default_value = "aggregate.csv")]
    out: PathBuf,
}

fn command_line() -> String {
    let mut args = std::env::args();
    args.next();
    std::iter::once("risfocus".to_string()).chain(args).collect::<Vec<_>>().join(" ")
}

/// Writes via a sibling temporary file and rename so readers never see partial output.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let name = path.file_name().context("output path has no file name")?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_scenario(path: &Path) -> Result<Scenario> {
    Scenario::from_json(&read(path)?).with_context(|| format!("loading scenario {}", path.display()))
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        bail!("--sdr-tol must be positive, got {tol}");
    }
    Ok(())
}

fn scenario_gen(a: &GenArgs) -> Result<()> {
    if !a.paper {
        bail!("only the --paper layout is available");
    }
    let s = reference_scenario(a.seed, (a.nx, a.nz), a.delta_a_deg.to_radians())?;
    let prov = Provenance::new(command_line(), Some(a.seed));
    write_atomic(&a.out, &s.to_json(Some(&prov))?)
}

fn codebook_build(a: &BuildArgs) -> Result<()> {
    check_tol(a.sdr_tol)?;
    let s = load_scenario(&a.scenario)?;
    let books = a
        .method
        .methods()
        .into_iter()
        .map(|m| {
            build_codebook(&s, a.source, m, a.sdr_tol)
                .with_context(|| format!("building {m} codebook for RIS {} (seed {})", a.source, s.seed))
        })
        .collect::<Result<Vec<_>>>()?;
    let prov = Provenance::new(command_line(), Some(s.seed));
    write_atomic(&a.out, &CodebookFile::new(&books, Some(&prov))?.to_json()?)
}

fn evaluate(a: &EvalArgs, leakage: bool) -> Result<()> {
    let s = load_scenario(&a.scenario)?;
    let books: Vec<Codebook> = CodebookFile::from_json(&read(&a.codebook)?)
        .and_then(|f| f.into_codebooks(&s))
        .with_context(|| format!("loading codebook {}", a.codebook.display()))?;
    if let Some(book) = books.first() {
        if book.source != a.source {
            bail!("codebook is for RIS {}, not --source {}", book.source, a.source);
        }
    }
    let books: Vec<&Codebook> = books.iter().filter(|b| a.method.is_none_or(|m| m == b.method)).collect();
    if books.is_empty() {
        bail!("codebook file has no {} codebook", a.method.map_or("".into(), |m| m.to_string()));
    }
    if !leakage && a.leak.is_some() {
        bail!("--leak applies to `evaluate leakage` only");
    }
    let leaks: Vec<usize> = match a.leak {
        Some(k) => vec![k],
        None => s.ris_ids().filter(|&k| k != a.source && k != a.focus).collect(),
    };
    let prov = Provenance::new(command_line(), Some(s.seed));
    for book in books {
        let cw = book.codeword(a.focus)?;
        let m = book.method;
        if leakage {
            for &k in &leaks {
                let r = eval::leakage(&s, cw, a.source, a.focus, k, m)?;
                let stem = format!("leakage_s{}_f{}_l{}_{}", a.source, a.focus, k, m);
                let label = format!("source={} focus={} leak={} method={m}", a.source, a.focus, k);
                write_outputs(&a.out_dir, &stem, &entries_csv(&r.records(s.seed), Some(&prov))?, &grid_text(&r.entries, &label, Some(&prov)))?;
                println!("{stem}: max {:.6e} mean {:.6e}", r.max_leak, r.mean());
            }
        } else {
            let g = eval::gain_map(&s, cw, a.source, a.focus, m)?;
            let stem = format!("gains_s{}_f{}_{}", a.source, a.focus, m);
            let label = format!("source={} focus={} method={m}", a.source, a.focus);
            write_outputs(&a.out_dir, &stem, &entries_csv(&g.records(s.seed), Some(&prov))?, &grid_text(&g.entries, &label, Some(&prov)))?;
            println!("{stem}: min {:.6e} mean {:.6e} max {:.6e}", g.min(), g.mean(), g.max());
        }
    }
    Ok(())
}

fn write_outputs(dir: &Path, stem: &str, csv: &str, grid: &str) -> Result<()> {
    write_atomic(&dir.join(format!("{stem}.csv")), csv)?;
    write_atomic(&dir.join(format!("{stem}.grid.txt")), grid)
}

fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let seeds: Vec<u64> = if let Some((a, b)) = text.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
        if b < a {
            bail!("empty seed range {text}");
        }
        (a..=b).collect()
    } else {
        text.split(',').map(|s| s.trim().parse()).collect::<Result<_, _>>()?
    };
    if seeds.is_empty() {
        bail!("no seeds given");
    }
    Ok(seeds)
}

fn parse_sizes(text: &str) -> Result<Vec<(usize, usize)>> {
    text.split(',')
        .map(|s| {
            let (x, z) = s.trim().split_once('x').with_context(|| format!("size {s:?} is not NXxNZ"))?;
            Ok((x.parse()?, z.parse()?))
        })
        .collect()
}

fn aggregate(a: &AggregateArgs) -> Result<()> {
    check_tol(a.sdr_tol)?;
    let seeds = parse_seeds(&a.seeds).context("--seeds")?;
    let sizes = parse_sizes(&a.sizes).context("--sizes")?;
    let spreads: Vec<f64> = a
        .delta_a_deg
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .context("--delta-a-deg")?;
    let points: Vec<FamilyPoint> = spreads
        .iter()
        .flat_map(|&d| sizes.iter().map(move |&(nx, nz)| FamilyPoint { nx, nz, spread: d.to_radians() }))
        .collect();
    let report = eval::aggregate(&points, &a.method.methods(), &seeds, a.sdr_tol)?;
    let prov = Provenance::new(command_line(), None);
    write_atomic(&a.out, &aggregate_csv(&report, Some(&prov))?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Scenario(ScenarioCmd::Gen(a)) => scenario_gen(&a),
        Command::Codebook(CodebookCmd::Build(a)) => codebook_build(&a),
        Command::Evaluate(EvaluateCmd::Gains(a)) => evaluate(&a, false),
        Command::Evaluate(EvaluateCmd::Leakage(a)) => evaluate(&a, true),
        Command::Aggregate(a) => aggregate(&a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
