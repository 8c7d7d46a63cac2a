use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use sgim_core::env::ArmEnv;
use sgim_core::experiment::run::{default_benchmark, default_demos};
use sgim_core::experiment::stats::{median, sign_test_less};
use sgim_core::experiment::{export, run_batch, run_strategy, ExperimentConfig, Fixtures, RunLog, Strategy};
use sgim_core::teacher::save_demos;

#[derive(Parser)]
#[command(name = "sgim", version, about = "Goal-babbling experiments on a simulated fishing arm")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one strategy with one seed.
    Run {
        /// random, demos, sagg or sgim.
        #[arg(long)]
        strategy: Strategy,
        /// TOML experiment file; built-in defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the benchmark point set.
    BenchBuild {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "benchmark.txt")]
        out: PathBuf,
    },
    /// Build the teacher's demonstration set.
    DemoBuild {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "demos.txt")]
        out: PathBuf,
    },
    /// Run several strategies over a seed range, in parallel.
    Batch {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Seed range: `a..b` (b excluded) or `a..=b`. Defaults to the
        /// config's seed list.
        #[arg(long, value_parser = parse_seeds)]
        seeds: Option<Range<u64>>,
        /// Comma-separated strategies; all four by default.
        #[arg(long, value_delimiter = ',')]
        strategies: Vec<Strategy>,
        #[arg(long)]
        out: PathBuf,
        /// Also write per-run event logs and memory dumps.
        #[arg(long)]
        per_run: bool,
    },
    /// Print the default configuration as TOML.
    DefaultConfig,
}

fn parse_seeds(s: &str) -> std::result::Result<Range<u64>, String> {
    let (a, b, inclusive) = if let Some((a, b)) = s.split_once("..=") {
        (a, b, true)
    } else if let Some((a, b)) = s.split_once("..") {
        (a, b, false)
    } else {
        return Err(format!("expected a..b or a..=b, got '{s}'"));
    };
    let a: u64 = a.trim().parse().map_err(|e| format!("bad start: {e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("bad end: {e}"))?;
    let end = if inclusive { b + 1 } else { b };
    if end <= a {
        return Err(format!("empty seed range '{s}'"));
    }
    Ok(a..end)
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(ExperimentConfig::default()),
    }
}

fn write_fixtures(dir: &Path, fx: &Fixtures) -> Result<()> {
    fx.benchmark.save(&dir.join("benchmark.txt"))?;
    save_demos(&fx.demos, &dir.join("demos.txt"))?;
    Ok(())
}

fn write_run_files(dir: &Path, run: &RunLog) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    export::write_events(&dir.join("events.csv"), run)?;
    run.memory.dump(&dir.join("memory.txt"))?;
    Ok(())
}

fn summary(runs: &[RunLog], strategies: &[Strategy]) -> String {
    let finals = |st: Strategy| -> Vec<f64> {
        runs.iter()
            .filter(|r| r.strategy == st)
            .map(RunLog::final_error)
            .collect()
    };
    let mut out = String::new();
    for &st in strategies {
        out += &format!("median final error {}: {}\n", st, median(&finals(st)));
    }
    let pairs = [
        (Strategy::SgimD, Strategy::SaggRiac),
        (Strategy::SaggRiac, Strategy::RandomExplore),
        (Strategy::SgimD, Strategy::DemosOnly),
    ];
    for (a, b) in pairs {
        if strategies.contains(&a) && strategies.contains(&b) {
            let t = sign_test_less(&finals(a), &finals(b));
            out += &format!(
                "sign test {a} < {b}: {}/{} wins, p = {}\n",
                t.wins, t.pairs, t.p_value
            );
        }
    }
    out
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            strategy,
            config,
            seed,
            out,
        } => {
            let cfg = load_config(config.as_deref())?;
            let fx = Fixtures::prepare(&cfg)?;
            let run = run_strategy(strategy, &cfg, &fx, seed)?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let runs = std::slice::from_ref(&run);
            export::write_errors(&out.join("errors.csv"), runs)?;
            export::write_coverage(&out.join("coverage.csv"), runs)?;
            export::write_regions(&out.join("regions.txt"), runs)?;
            write_fixtures(&out, &fx)?;
            write_run_files(&out, &run)?;
            println!(
                "{} seed {}: {} movements, final mean error {}",
                strategy,
                seed,
                run.movements,
                run.final_error()
            );
        }
        Command::BenchBuild { config, out } => {
            let cfg = load_config(config.as_deref())?;
            let env = ArmEnv::new(cfg.env.clone())?;
            let b = default_benchmark(&env, &cfg);
            b.save(&out)?;
            println!("{} benchmark points written to {}", b.points.len(), out.display());
        }
        Command::DemoBuild { config, out } => {
            let cfg = load_config(config.as_deref())?;
            let env = ArmEnv::new(cfg.env.clone())?;
            let demos = default_demos(&env, &cfg);
            save_demos(&demos, &out)?;
            println!("{} demonstrations written to {}", demos.len(), out.display());
        }
        Command::Batch {
            config,
            seeds,
            strategies,
            out,
            per_run,
        } => {
            let cfg = load_config(config.as_deref())?;
            let seeds: Vec<u64> = match seeds {
                Some(r) => r.collect(),
                None => cfg.seeds.clone(),
            };
            if seeds.is_empty() {
                bail!("no seeds to run");
            }
            let strategies = if strategies.is_empty() {
                Strategy::ALL.to_vec()
            } else {
                strategies
            };
            let fx = Fixtures::prepare(&cfg)?;
            let runs = run_batch(&strategies, &seeds, &cfg, &fx)?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            export::write_errors(&out.join("errors.csv"), &runs)?;
            export::write_coverage(&out.join("coverage.csv"), &runs)?;
            export::write_regions(&out.join("regions.txt"), &runs)?;
            write_fixtures(&out, &fx)?;
            if per_run {
                for r in &runs {
                    write_run_files(&out.join("runs").join(format!("{}-{}", r.strategy, r.seed)), r)?;
                }
            }
            let text = summary(&runs, &strategies);
            fs::write(out.join("summary.txt"), &text)?;
            print!("{text}");
        }
        Command::DefaultConfig => print!("{}", ExperimentConfig::default().to_toml_string()),
    }
    Ok(())
}
