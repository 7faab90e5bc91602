use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Deserialize;

use ftg::harness::{self, Algorithm, ProblemSpec};
use ftg::lsp::{self, LspAlgorithm, LspConfig, LspProblem};

#[derive(Parser)]
#[command(name = "ftg", version, about = "Fourier Tree Growing experiments")]
struct Cli {
    /// TOML file whose keys preload any flag of the chosen subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Seeded sweep over benchmark problems and algorithms.
    Run(RunArgs),
    /// Aggregate run records into the statistics table.
    Aggregate(AggregateArgs),
    /// FTG against the best GP baseline per problem and tolerance.
    Heatmap(HeatmapArgs),
    /// Large-scale polynomial experiment.
    Lsp(LspArgs),
}

#[derive(Args, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunArgs {
    /// Comma-separated problem names or `all`.
    #[arg(long)]
    problems: Option<String>,
    /// Comma-separated subset of ftg, gp11, gp1l, canonical, or `all`.
    #[arg(long)]
    algorithms: Option<String>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AggregateArgs {
    /// Directory holding `records.json`, or the file itself.
    #[arg(long = "in")]
    #[serde(rename = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeatmapArgs {
    /// Statistics CSV.
    #[arg(long = "in")]
    #[serde(rename = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct LspArgs {
    #[arg(long)]
    degree: Option<usize>,
    /// ftg, gp1l or canonical.
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

macro_rules! merge {
    ($cli:expr, $file:expr, $($field:ident),+) => {
        $( if $cli.$field.is_none() { $cli.$field = $file.$field; } )+
    };
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    run: RunArgs,
    #[serde(default)]
    aggregate: AggregateArgs,
    #[serde(default)]
    heatmap: HeatmapArgs,
    #[serde(default)]
    lsp: LspArgs,
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile> {
    let Some(path) = path else { return Ok(ConfigFile::default()) };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn select_problems(list: &str) -> Result<Vec<ProblemSpec>> {
    if list == "all" {
        return Ok(harness::load_problems());
    }
    list.split(',').map(|n| Ok(harness::find_problem(n.trim())?)).collect()
}

fn select_algorithms(list: &str) -> Result<Vec<Algorithm>> {
    if list == "all" {
        return Ok(Algorithm::ALL.to_vec());
    }
    list.split(',').map(|n| Ok(n.trim().parse()?)).collect()
}

fn run(args: RunArgs) -> Result<()> {
    let problems = select_problems(args.problems.as_deref().unwrap_or("all"))?;
    let algorithms = select_algorithms(args.algorithms.as_deref().unwrap_or("all"))?;
    let out = args.out.unwrap_or_else(|| PathBuf::from("results"));
    let records = harness::run_sweep(
        &problems,
        &algorithms,
        args.runs.unwrap_or(100),
        args.budget.unwrap_or(100_000),
        args.seed.unwrap_or(0),
        &harness::tolerance_grid(),
    );
    harness::save_sweep(&records, &out)?;
    eprintln!("{} runs written to {}", records.len(), out.display());
    Ok(())
}

fn aggregate(args: AggregateArgs) -> Result<()> {
    let Some(input) = args.input else { bail!("--in is required") };
    let path = if input.is_dir() { input.join("records.json") } else { input };
    let records = harness::read_records_json(File::open(&path).with_context(|| format!("opening {}", path.display()))?)?;
    if records.is_empty() {
        bail!("no records in {}", path.display());
    }
    let stats = harness::aggregate(&records);
    match args.out {
        Some(out) => harness::write_stats_csv(&stats, File::create(out)?)?,
        None => harness::write_stats_csv(&stats, std::io::stdout())?,
    }
    Ok(())
}

fn heatmap(args: HeatmapArgs) -> Result<()> {
    let Some(input) = args.input else { bail!("--in is required") };
    let stats = harness::read_stats_csv(File::open(&input).with_context(|| format!("opening {}", input.display()))?)?;
    let cells = harness::heatmap_delta(&stats);
    match args.out {
        Some(out) => harness::write_heatmap_csv(&cells, File::create(out)?)?,
        None => harness::write_heatmap_csv(&cells, std::io::stdout())?,
    }
    Ok(())
}

fn lsp_cmd(args: LspArgs) -> Result<()> {
    let degree = args.degree.unwrap_or(10);
    let algorithm: LspAlgorithm = args.algo.as_deref().unwrap_or("ftg").parse().map_err(anyhow::Error::msg)?;
    let runs = args.runs.unwrap_or(20);
    let seed = args.seed.unwrap_or(0);
    let config = LspConfig { budget: args.budget.unwrap_or(100_000), ..LspConfig::default() };
    let problem = LspProblem::<f64>::geometric(degree);
    let traces: Vec<_> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = harness::algorithm_rng(harness::derive_seed(seed, degree, r));
            lsp::run_lsp_experiment(algorithm, &problem, &config, &mut rng)
        })
        .collect();
    let out = args.out.unwrap_or_else(|| PathBuf::from("lsp"));
    lsp::save_outputs(&traces, degree, &out)?;
    eprintln!("{runs} traces written to {}", out.display());
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let file = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Run(mut a) => {
            merge!(a, file.run, problems, algorithms, runs, budget, seed, out);
            run(a)
        }
        Command::Aggregate(mut a) => {
            merge!(a, file.aggregate, input, out);
            aggregate(a)
        }
        Command::Heatmap(mut a) => {
            merge!(a, file.heatmap, input, out);
            heatmap(a)
        }
        Command::Lsp(mut a) => {
            merge!(a, file.lsp, degree, algo, runs, budget, seed, out);
            lsp_cmd(a)
        }
    }
}
