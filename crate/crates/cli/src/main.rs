use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use cascade_core::harness::{
    corruption_sweep, delta_sweep, run_experiment, summary_to_csv, table_summary, RunRecord,
};
use cascade_core::ExperimentSpec;
use clap::{Args, Parser, Subcommand};

/// Cascading-bandit simulations under click corruption.
#[derive(Parser)]
#[command(name = "cascade", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Replace the spec's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Replace the spec's trial count.
    #[arg(long)]
    trials: Option<u64>,
}

impl Overrides {
    fn apply(&self, spec: &mut ExperimentSpec) {
        if let Some(seed) = self.seed {
            spec.environment.seed = seed;
        }
        if let Some(trials) = self.trials {
            spec.trials = trials;
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment spec and write the regret CSV.
    Run {
        spec: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Output CSV; defaults to the spec's `output`, else stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a spec (and any data files it names) without running it.
    Validate { spec: PathBuf },
    /// Re-run a spec on two-level gap instances, one CSV per gap.
    SweepDelta {
        spec: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.2, 0.4])]
        deltas: Vec<f64>,
        /// Attraction probability of the non-optimal items.
        #[arg(long, default_value_t = 0.1)]
        suboptimal: f64,
        /// Output directory.
        #[arg(long, alias = "out-dir")]
        out: PathBuf,
    },
    /// Re-run a spec under several Periodic(t1, t2) attacks.
    SweepCorruption {
        spec: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Comma-separated `t1:t2` pairs.
        #[arg(long, value_delimiter = ',', default_values_t = ["5000:95000".to_string(), "20000:80000".to_string(), "50000:50000".to_string()])]
        levels: Vec<String>,
        /// Output directory.
        #[arg(long, alias = "out-dir")]
        out: PathBuf,
    },
    /// Summarize run CSVs into mean final regret per policy and mechanism.
    Table {
        /// `mechanism=path.csv`, repeatable; column order follows the flags.
        #[arg(long = "in", required = true)]
        inputs: Vec<String>,
        /// Output CSV; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &Path, overrides: Option<&Overrides>) -> Result<ExperimentSpec> {
    let mut spec =
        ExperimentSpec::load(path).with_context(|| format!("loading spec {}", path.display()))?;
    if let Some(o) = overrides {
        o.apply(&mut spec);
        spec.validate()
            .with_context(|| format!("spec {} after overrides", path.display()))?;
    }
    Ok(spec)
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn report(label: &str, rec: &RunRecord) {
    for p in rec.policies() {
        eprintln!("{label}{p}: mean final regret {:.1}", rec.mean_final_regret(p));
    }
}

fn run_sweep(specs: Vec<(String, ExperimentSpec)>, out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut records = Vec::new();
    for (name, spec) in specs {
        let rec = run_experiment(&spec)?;
        let path = out.join(format!("{name}.csv"));
        rec.write_csv(&path)?;
        report(&format!("[{name}] "), &rec);
        records.push((name, rec));
    }
    write_or_print(
        Some(&out.join("summary.csv")),
        &summary_to_csv(&table_summary(&records)),
    )
}

fn parse_level(s: &str) -> Result<(u64, u64)> {
    let Some((a, b)) = s.split_once(':') else {
        bail!("level {s:?} is not of the form t1:t2");
    };
    Ok((
        a.trim().parse().with_context(|| format!("bad t1 in {s:?}"))?,
        b.trim().parse().with_context(|| format!("bad t2 in {s:?}"))?,
    ))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            spec,
            overrides,
            out,
        } => {
            let s = load(&spec, Some(&overrides))?;
            let rec = run_experiment(&s)?;
            report("", &rec);
            let out = out.or_else(|| s.output.clone());
            write_or_print(out.as_deref(), &rec.to_csv())
        }
        Command::Validate { spec } => {
            let s = load(&spec, None)?;
            // surfaces unreadable or malformed data files
            let trial = s.trial(0)?;
            println!(
                "ok: L={} K={} T={} trials={} policies={} scheduled corruption={} (model weights {}..{})",
                s.environment.items,
                s.environment.positions,
                s.environment.horizon,
                s.trials,
                s.policies.len(),
                s.scheduled_corruption(),
                trial.model.weights().iter().cloned().fold(f64::INFINITY, f64::min),
                trial.model.weights().iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            );
            Ok(())
        }
        Command::SweepDelta {
            spec,
            overrides,
            deltas,
            suboptimal,
            out,
        } => {
            let s = load(&spec, Some(&overrides))?;
            let specs = delta_sweep(&s, &deltas, suboptimal)
                .into_iter()
                .map(|(d, s)| (format!("delta_{d}"), s))
                .collect::<Vec<_>>();
            for (name, s) in &specs {
                s.validate().with_context(|| name.clone())?;
            }
            run_sweep(specs, &out)
        }
        Command::SweepCorruption {
            spec,
            overrides,
            levels,
            out,
        } => {
            let s = load(&spec, Some(&overrides))?;
            let levels = levels
                .iter()
                .map(|l| parse_level(l))
                .collect::<Result<Vec<_>>>()?;
            let specs = corruption_sweep(&s, &levels)
                .into_iter()
                .zip(&levels)
                .map(|(s, (t1, t2))| (format!("periodic_{t1}_{t2}"), s))
                .collect::<Vec<_>>();
            for (name, s) in &specs {
                s.validate().with_context(|| name.clone())?;
            }
            run_sweep(specs, &out)
        }
        Command::Table { inputs, out } => {
            let mut records = Vec::new();
            for arg in &inputs {
                let Some((mechanism, path)) = arg.split_once('=') else {
                    bail!("--in {arg:?} is not of the form mechanism=path.csv");
                };
                if mechanism.is_empty() || mechanism.contains(',') {
                    bail!("bad mechanism name {mechanism:?}");
                }
                records.push((mechanism.to_string(), RunRecord::load_csv(Path::new(path))?));
            }
            write_or_print(out.as_deref(), &summary_to_csv(&table_summary(&records)))
        }
    }
}

/// The error chain on one line; causes already spelled out by the message
/// above them are skipped.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::FAILURE
        }
    }
}
