use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use fragretro::engine::{run, EngineConfig};
use fragretro::fragmenter::{fragment, FragmentationMode, ModeRegistry, RuleTable};
use fragretro::molgraph::{parse_smiles, Molecule};
use fragretro::screen::FpParams;
use fragretro::stock::{build_stock, load_cache, save_cache, Stock};
use fragretro::synth;

use fragretro_cli::{
    parallel_csv, render_fragments, render_retro, scaling_csv, screening_csv, seconds,
    ParallelRow, ScalingRow, ScreeningRow,
};

/// Environment variable naming a directory with `brics_like.rules` and
/// `rbrics_like.rules` to use instead of the embedded tables.
const RULES_DIR_ENV: &str = "FRAGRETRO_RULES_DIR";

#[derive(Parser)]
#[command(name = "fragretro", about = "Fragment-based retrosynthesis over a building-block stock")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Building-block stock management.
    Stock {
        #[command(subcommand)]
        cmd: StockCmd,
    },
    /// Decompose a molecule and print its fragment graph as JSON.
    Fragment {
        #[arg(long)]
        smiles: String,
        #[command(flatten)]
        mode: ModeArgs,
    },
    /// Run the staged fragment-combination search and print the result as JSON.
    ///
    /// Exits 0 when solved, 2 when the search terminates unsolved, 1 on error.
    Retro {
        #[arg(long)]
        smiles: String,
        /// Stock cache file produced by `stock build`.
        #[arg(long)]
        stock: PathBuf,
        #[command(flatten)]
        mode: ModeArgs,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Cap on enumerated solutions; the output is flagged truncated when hit.
        #[arg(long, default_value_t = fragretro::engine::DEFAULT_SOLUTION_CAP)]
        max_solutions: usize,
        /// Disable the fingerprint pre-screen (results must not change).
        #[arg(long)]
        no_screening: bool,
        /// Stop matching a combination at its first stock hit instead of
        /// collecting all matching building blocks.
        #[arg(long)]
        first_hit: bool,
        /// Emit every matched building-block id instead of a capped sample.
        #[arg(long)]
        full_matches: bool,
    },
    /// Timing harnesses; all emit CSV on stdout.
    Bench {
        #[command(subcommand)]
        cmd: BenchCmd,
    },
}

#[derive(Subcommand)]
enum StockCmd {
    /// Parse a SMILES list and write a fingerprinted stock cache.
    Build {
        /// Input file: one `SMILES[\tlabel]` per line, `#` comments.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Fingerprint width in bits (positive multiple of 64).
        #[arg(long, default_value_t = FpParams::default().nbits)]
        nbits: u32,
        /// Longest hashed path, in bonds.
        #[arg(long, default_value_t = FpParams::default().path_max)]
        path_max: u32,
    },
}

#[derive(Args)]
struct ModeArgs {
    /// Fragmentation mode name.
    #[arg(long, default_value = "brics_like")]
    mode: String,
    /// Replace the selected mode's cleavage-rule table with this file.
    #[arg(long)]
    rules: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BenchCmd {
    /// Combinations evaluated and wall time across a ladder of chain
    /// targets of growing fragment count.
    Scaling {
        #[arg(long)]
        stock: PathBuf,
        /// Target SMILES file (one per line); defaults to a built-in
        /// oligomer ladder.
        #[arg(long)]
        targets: Option<PathBuf>,
        #[command(flatten)]
        mode: ModeArgs,
    },
    /// Same workload under different worker counts.
    Parallel {
        #[arg(long)]
        stock: PathBuf,
        #[arg(long)]
        targets: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        workers_list: Vec<usize>,
        #[command(flatten)]
        mode: ModeArgs,
    },
    /// Per-target wall time and match-call counts with the fingerprint
    /// screen on versus off.
    Screening {
        #[arg(long)]
        stock: PathBuf,
        #[arg(long)]
        targets: Option<PathBuf>,
        #[command(flatten)]
        mode: ModeArgs,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

/// Builds the mode registry, honoring `FRAGRETRO_RULES_DIR` for both
/// tables and letting `--rules` override just the selected mode.
fn build_registry(mode: &ModeArgs) -> Result<ModeRegistry> {
    let mut brics = None;
    let mut rbrics = None;
    if let Some(dir) = std::env::var_os(RULES_DIR_ENV) {
        let dir = PathBuf::from(dir);
        brics = Some(
            RuleTable::load(&dir.join("brics_like.rules"))
                .with_context(|| format!("{RULES_DIR_ENV} brics_like.rules"))?,
        );
        rbrics = Some(
            RuleTable::load(&dir.join("rbrics_like.rules"))
                .with_context(|| format!("{RULES_DIR_ENV} rbrics_like.rules"))?,
        );
    }
    if let Some(path) = &mode.rules {
        let table = RuleTable::load(path).with_context(|| format!("--rules {}", path.display()))?;
        match mode.mode.as_str() {
            "brics_like" => brics = Some(table),
            "rbrics_like" => rbrics = Some(table),
            other => bail!("--rules given for unknown mode {other:?}"),
        }
    }
    Ok(ModeRegistry::with_tables(brics, rbrics))
}

fn load_targets(path: Option<&PathBuf>, default: impl FnOnce() -> Vec<String>) -> Result<Vec<Molecule>> {
    let lines = match path {
        Some(p) => std::fs::read_to_string(p)
            .with_context(|| format!("reading targets {}", p.display()))?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(String::from)
            .collect(),
        None => default(),
    };
    lines
        .iter()
        .map(|s| parse_smiles(s).with_context(|| format!("target {s:?}")))
        .collect()
}

fn stitched_defaults() -> Vec<String> {
    let mut rng = synth::rng(1405);
    (4..=9).map(|units| synth::stitched_target_smiles(&mut rng, units)).collect()
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Stock { cmd: StockCmd::Build { input, out, nbits, path_max } } => {
            let params = FpParams { nbits, path_max };
            let started = Instant::now();
            let (stock, report) = build_stock(&input, &params)
                .with_context(|| format!("building stock from {}", input.display()))?;
            save_cache(&stock, &out).with_context(|| format!("writing {}", out.display()))?;
            println!("entries: {}", stock.len());
            println!("parse_failures: {}", report.failed);
            println!("elapsed_s: {}", seconds(started.elapsed()));
            Ok(0)
        }
        Cmd::Fragment { smiles, mode } => {
            let registry = build_registry(&mode)?;
            let m = registry.get(&mode.mode)?;
            let target = parse_smiles(&smiles)?;
            let decomp = fragment(&target, m);
            println!("{}", serde_json::to_string_pretty(&render_fragments(&decomp))?);
            Ok(0)
        }
        Cmd::Retro {
            smiles,
            stock,
            mode,
            workers,
            max_solutions,
            no_screening,
            first_hit,
            full_matches,
        } => {
            let registry = build_registry(&mode)?;
            let m = registry.get(&mode.mode)?;
            let target = parse_smiles(&smiles)?;
            let stock = load_cache(&stock, None)
                .with_context(|| format!("loading stock {}", stock.display()))?;
            let config = EngineConfig {
                match_all: !first_hit,
                max_solutions,
                workers,
                screening: !no_screening,
                ..EngineConfig::default()
            };
            let result = run(&target, &stock, m, &config)?;
            println!("{}", serde_json::to_string_pretty(&render_retro(&result, full_matches))?);
            Ok(if result.solved { 0 } else { 2 })
        }
        Cmd::Bench { cmd } => bench(cmd),
    }
}

fn timed_run(
    target: &Molecule,
    stock: &Stock,
    mode: &dyn FragmentationMode,
    config: &EngineConfig,
) -> Result<(fragretro::engine::RetroResult, Duration)> {
    let started = Instant::now();
    let result = run(target, stock, mode, config)?;
    Ok((result, started.elapsed()))
}

fn bench(cmd: BenchCmd) -> Result<u8> {
    match cmd {
        BenchCmd::Scaling { stock, targets, mode } => {
            let registry = build_registry(&mode)?;
            let m = registry.get(&mode.mode)?;
            let stock = load_cache(&stock, None)?;
            let targets = load_targets(targets.as_ref(), || {
                (2..=30).map(synth::oligomer_smiles).collect()
            })?;
            let mut rows = Vec::new();
            for target in &targets {
                let (result, elapsed) = timed_run(target, &stock, m, &EngineConfig::default())?;
                rows.push(ScalingRow {
                    heavy_atoms: target.heavy_atom_count(),
                    fragments: result.stats[0].effective,
                    combinations_evaluated: result.combinations_evaluated(),
                    elapsed,
                });
            }
            print!("{}", scaling_csv(&rows));
            Ok(0)
        }
        BenchCmd::Parallel { stock, targets, workers_list, mode } => {
            if workers_list.is_empty() || workers_list.contains(&0) {
                bail!("--workers-list needs positive worker counts");
            }
            let registry = build_registry(&mode)?;
            let m = registry.get(&mode.mode)?;
            let stock = load_cache(&stock, None)?;
            let targets = load_targets(targets.as_ref(), stitched_defaults)?;
            let mut rows: Vec<ParallelRow> = Vec::new();
            let mut base = None;
            for &workers in &workers_list {
                let config = EngineConfig { workers, ..EngineConfig::default() };
                let mut elapsed = Duration::ZERO;
                for target in &targets {
                    elapsed += timed_run(target, &stock, m, &config)?.1;
                }
                let base = *base.get_or_insert(elapsed);
                rows.push(ParallelRow {
                    workers,
                    elapsed,
                    speedup: base.as_secs_f64() / elapsed.as_secs_f64(),
                });
            }
            print!("{}", parallel_csv(&rows));
            Ok(0)
        }
        BenchCmd::Screening { stock, targets, mode } => {
            let registry = build_registry(&mode)?;
            let m = registry.get(&mode.mode)?;
            let stock = load_cache(&stock, None)?;
            let targets = load_targets(targets.as_ref(), stitched_defaults)?;
            let mut rows = Vec::new();
            for target in &targets {
                let on = EngineConfig::default();
                let off = EngineConfig { screening: false, ..on };
                let (res_on, elapsed_on) = timed_run(target, &stock, m, &on)?;
                let (res_off, elapsed_off) = timed_run(target, &stock, m, &off)?;
                rows.push(ScreeningRow {
                    target: fragretro::molgraph::write_smiles(target),
                    elapsed_on,
                    elapsed_off,
                    match_calls_on: res_on.total_match_calls(),
                    match_calls_off: res_off.total_match_calls(),
                });
            }
            print!("{}", screening_csv(&rows));
            Ok(0)
        }
    }
}
