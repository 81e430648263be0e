//! Seeded experiments: environment x adversary x policies x trials, with
//! cumulative-regret snapshots written as CSV.
//!
//! Seeding: trial `i` derives one seed from the spec seed; the attraction
//! model and the feedback stream of that trial come from it, so every policy
//! in the trial faces the same model and the same draw sequence. Each policy
//! additionally owns a stream keyed by `seed ^ hash(label, trial)` for its
//! internal coin flips.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{Adversary, AttackMode, CorruptionLedger, CorruptionSchedule};
use crate::environment::{Environment, EnvironmentConfig, FeedbackMatrix, ModelSource};
use crate::error::{CascadeError, Result};
use crate::model::{
    expected_reward, optimal_list, optimal_value, regret_increment, AttractionModel, RecList,
    RegretMode, RoundFeedback,
};
use crate::policy::{Policy, PolicyConfig, PolicyDecision};
use crate::rng;

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "CB_THREADS";

pub const CSV_HEADER: &str = "policy,trial,t,cum_regret,corruption_used";
pub const SUMMARY_HEADER: &str = "policy,mechanism,mean_final_regret,stderr";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AdversaryConfig {
    #[serde(default)]
    pub schedule: CorruptionSchedule,
    #[serde(default)]
    pub attack: AttackMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hard_cap: Option<u64>,
}

fn one() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub environment: EnvironmentConfig,
    #[serde(default)]
    pub adversary: AdversaryConfig,
    pub policies: Vec<PolicyConfig>,
    #[serde(default = "one")]
    pub trials: u64,
    #[serde(default)]
    pub regret_mode: RegretMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Snapshot stride; defaults to `max(1, T / 1000)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_every: Option<u64>,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CascadeError::io(path, e))?;
        let mut spec = Self::from_json(&text)?;
        spec.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(spec)
    }

    /// Makes relative data and output paths relative to the spec file's
    /// directory.
    fn resolve_paths(&mut self, base: &Path) {
        if let Some(out) = self.output.as_mut().filter(|p| p.is_relative()) {
            *out = base.join(&*out);
        }
        match &mut self.environment.source {
            ModelSource::WeightFile { path } | ModelSource::FeedbackMatrix { path, .. }
                if path.is_relative() =>
            {
                *path = base.join(&*path);
            }
            _ => {}
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.environment.validate()?;
        self.adversary.schedule.validate()?;
        if self.policies.is_empty() {
            return Err(CascadeError::config("at least one policy is required"));
        }
        let mut labels = HashSet::new();
        for p in &self.policies {
            p.validate()?;
            let label = p.display_label();
            if label.is_empty() || label.contains([',', '\n', '"']) {
                return Err(CascadeError::config(format!("bad policy label {label:?}")));
            }
            if !labels.insert(label) {
                return Err(CascadeError::config(format!("duplicate policy label {label:?}")));
            }
        }
        if self.trials == 0 {
            return Err(CascadeError::config("trials must be at least 1"));
        }
        if self.log_every == Some(0) {
            return Err(CascadeError::config("log_every must be at least 1"));
        }
        Ok(())
    }

    pub fn log_every(&self) -> u64 {
        self.log_every
            .unwrap_or((self.environment.horizon / 1000).max(1))
    }

    /// Corruption level handed to known-`C` policies without an explicit one.
    pub fn scheduled_corruption(&self) -> u64 {
        let active = self
            .adversary
            .schedule
            .active_rounds(self.environment.horizon);
        match self.adversary.hard_cap {
            Some(cap) => active.min(cap),
            None => active,
        }
    }

    /// Materializes trial `trial`: its model and seeds.
    pub fn trial(&self, trial: u64) -> Result<Trial> {
        let seed = rng::trial_seed(self.environment.seed, trial);
        let cfg = EnvironmentConfig {
            seed,
            ..self.environment.clone()
        };
        let (model, users) = cfg.build()?;
        Ok(Trial {
            index: trial,
            seed,
            base_seed: self.environment.seed,
            model,
            users,
            positions: self.environment.positions,
            horizon: self.environment.horizon,
            regret_mode: self.regret_mode,
            log_every: self.log_every(),
            adversary: self.adversary.clone(),
            scheduled_corruption: self.scheduled_corruption(),
        })
    }
}

/// One trial's fixed ingredients, shared by every policy that runs in it.
#[derive(Clone, Debug)]
pub struct Trial {
    pub index: u64,
    pub seed: u64,
    pub base_seed: u64,
    pub model: AttractionModel,
    pub users: Option<FeedbackMatrix>,
    pub positions: usize,
    pub horizon: u64,
    pub regret_mode: RegretMode,
    pub log_every: u64,
    pub adversary: AdversaryConfig,
    pub scheduled_corruption: u64,
}

/// What an instrumentation observer sees each round. Policies never get
/// this; they only receive `decision`'s corrupted click.
#[derive(Debug)]
pub struct RoundEvent<'a> {
    pub round: u64,
    pub decision: &'a PolicyDecision,
    pub feedback: &'a RoundFeedback,
    pub magnitude: u8,
    pub regret: f64,
}

#[derive(Clone, Debug)]
pub struct TrialOutcome {
    /// `(t, cumulative regret, corruption used)`, starting at `t = 0`.
    pub snapshots: Vec<(u64, f64, u64)>,
    pub ledger: CorruptionLedger,
    pub final_regret: f64,
}

impl Trial {
    pub fn build_policy(&self, cfg: &PolicyConfig) -> Result<Box<dyn Policy>> {
        let seed = rng::policy_seed(self.base_seed, cfg.display_label(), self.index);
        cfg.build(
            self.model.len(),
            self.positions,
            self.horizon,
            self.scheduled_corruption,
            rng::stream(seed, rng::POLICY_STREAM),
        )
    }

    pub fn environment(&self) -> Result<Environment> {
        let mut env = Environment::new(
            self.model.clone(),
            rng::stream(self.seed, rng::FEEDBACK_STREAM),
        );
        if let Some(users) = &self.users {
            env = env.with_users(users.clone())?;
        }
        if self.regret_mode == RegretMode::Realized {
            env = env.track_optimal(optimal_list(&self.model, self.positions)?);
        }
        Ok(env)
    }

    pub fn adversary(&self) -> Adversary {
        Adversary::targeting(&self.model, self.adversary.schedule.clone())
            .with_mode(self.adversary.attack)
            .with_hard_cap(self.adversary.hard_cap)
    }

    pub fn run(&self, policy: &mut dyn Policy) -> Result<TrialOutcome> {
        self.run_observed(policy, |_| {})
    }

    /// Runs the policy for the full horizon. Round `t` (1-based) is attacked
    /// according to the schedule's zero-based index `t - 1`.
    pub fn run_observed(
        &self,
        policy: &mut dyn Policy,
        mut observer: impl FnMut(&RoundEvent),
    ) -> Result<TrialOutcome> {
        let mut env = self.environment()?;
        let mut adversary = self.adversary();
        let best = optimal_value(&self.model, self.positions)?;
        let mut cum = 0.0;
        let mut snapshots = vec![(0, 0.0, 0)];
        for t in 1..=self.horizon {
            let decision = policy.select(t)?;
            check_list(&decision.list, self.positions)?;
            let fb = env.sample_round(&decision.list);
            let fb = adversary.corrupt(t - 1, &decision.list, fb);
            policy.observe(&decision, fb.corrupted_click_index());
            let regret = match self.regret_mode {
                RegretMode::Expected => best - expected_reward(&decision.list, &self.model)?,
                RegretMode::Realized => regret_increment(
                    &decision.list,
                    &fb,
                    &self.model,
                    self.positions,
                    RegretMode::Realized,
                )?,
            };
            cum += regret;
            observer(&RoundEvent {
                round: t,
                decision: &decision,
                feedback: &fb,
                magnitude: fb.corruption_magnitude(),
                regret,
            });
            if t % self.log_every == 0 || t == self.horizon {
                snapshots.push((t, cum, adversary.ledger().total_used()));
            }
        }
        Ok(TrialOutcome {
            snapshots,
            ledger: adversary.ledger().clone(),
            final_regret: cum,
        })
    }
}

fn check_list(list: &RecList, positions: usize) -> Result<()> {
    if list.len() != positions {
        return Err(CascadeError::ContractViolation(format!(
            "policy proposed {} items for K = {positions}",
            list.len()
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotRow {
    pub policy: String,
    pub trial: u64,
    pub t: u64,
    pub cum_regret: f64,
    pub corruption_used: u64,
}

/// All snapshot rows of an experiment, ordered by (policy in spec order,
/// trial, t).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunRecord {
    pub rows: Vec<SnapshotRow>,
}

impl RunRecord {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * 32 + 64);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.policy, r.trial, r.t, r.cum_regret, r.corruption_used
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CascadeError::io(dir, e))?;
        }
        fs::write(path, self.to_csv()).map_err(|e| CascadeError::io(path, e))
    }

    pub fn parse_csv(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, message: String| CascadeError::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == CSV_HEADER => {}
            _ => return Err(err(1, format!("expected header {CSV_HEADER:?}"))),
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(err(i + 1, format!("expected 5 fields, got {}", f.len())));
            }
            let bad = |what: &str| err(i + 1, format!("bad {what} field"));
            rows.push(SnapshotRow {
                policy: f[0].to_string(),
                trial: f[1].parse().map_err(|_| bad("trial"))?,
                t: f[2].parse().map_err(|_| bad("t"))?,
                cum_regret: f[3].parse().map_err(|_| bad("cum_regret"))?,
                corruption_used: f[4].parse().map_err(|_| bad("corruption_used"))?,
            });
        }
        Ok(Self { rows })
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CascadeError::io(path, e))?;
        Self::parse_csv(&text, path)
    }

    /// Policies in first-appearance order.
    pub fn policies(&self) -> Vec<&str> {
        let mut seen: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !seen.contains(&r.policy.as_str()) {
                seen.push(&r.policy);
            }
        }
        seen
    }

    /// Last snapshot of every (policy, trial).
    pub fn final_rows(&self) -> Vec<&SnapshotRow> {
        let mut out: Vec<&SnapshotRow> = Vec::new();
        for r in &self.rows {
            match out.last_mut() {
                Some(last) if last.policy == r.policy && last.trial == r.trial => {
                    if r.t >= last.t {
                        *last = r;
                    }
                }
                _ => out.push(r),
            }
        }
        out
    }

    pub fn final_regrets(&self, policy: &str) -> Vec<f64> {
        self.final_rows()
            .into_iter()
            .filter(|r| r.policy == policy)
            .map(|r| r.cum_regret)
            .collect()
    }

    pub fn mean_final_regret(&self, policy: &str) -> f64 {
        mean_stderr(&self.final_regrets(policy)).0
    }

    /// Mean over trials of the cumulative regret at round `t`, if every
    /// trial has a snapshot there.
    pub fn mean_regret_at(&self, policy: &str, t: u64) -> Option<f64> {
        let v: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.policy == policy && r.t == t)
            .map(|r| r.cum_regret)
            .collect();
        (!v.is_empty()).then(|| mean_stderr(&v).0)
    }
}

/// Worker count from `CB_THREADS`, else the machine's parallelism.
pub fn threads_from_env() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunRecord> {
    run_experiment_with_threads(spec, threads_from_env())
}

/// Runs every (policy, trial) pair on a pool of `threads` workers. Output
/// order does not depend on the thread count.
pub fn run_experiment_with_threads(spec: &ExperimentSpec, threads: usize) -> Result<RunRecord> {
    spec.validate()?;
    let trials = (0..spec.trials)
        .map(|i| spec.trial(i))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..spec.policies.len())
        .flat_map(|p| (0..trials.len()).map(move |t| (p, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| CascadeError::config(format!("thread pool: {e}")))?;
    let results: Vec<Result<Vec<SnapshotRow>>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(p, t)| {
                let cfg = &spec.policies[p];
                let trial = &trials[t];
                let mut policy = trial.build_policy(cfg)?;
                let outcome = trial.run(policy.as_mut())?;
                Ok(outcome
                    .snapshots
                    .into_iter()
                    .map(|(round, cum, used)| SnapshotRow {
                        policy: cfg.display_label().to_string(),
                        trial: trial.index,
                        t: round,
                        cum_regret: cum,
                        corruption_used: used,
                    })
                    .collect())
            })
            .collect()
    });
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(RunRecord { rows })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub policy: String,
    pub mechanism: String,
    pub mean_final_regret: f64,
    pub stderr: f64,
}

/// Mean and standard error (sample standard deviation / sqrt n; 0 for n = 1).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Mean final cumulative regret per (policy, mechanism), rows grouped by
/// policy in first-appearance order, mechanisms in input order.
pub fn table_summary(records: &[(String, RunRecord)]) -> Vec<SummaryRow> {
    let mut policies: Vec<String> = Vec::new();
    for (_, rec) in records {
        for p in rec.policies() {
            if !policies.iter().any(|q| q == p) {
                policies.push(p.to_string());
            }
        }
    }
    let mut out = Vec::new();
    for policy in &policies {
        for (mechanism, rec) in records {
            let finals = rec.final_regrets(policy);
            if finals.is_empty() {
                continue;
            }
            let (mean, se) = mean_stderr(&finals);
            out.push(SummaryRow {
                policy: policy.clone(),
                mechanism: mechanism.clone(),
                mean_final_regret: mean,
                stderr: se,
            });
        }
    }
    out
}

pub fn summary_to_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.policy, r.mechanism, r.mean_final_regret, r.stderr
        );
    }
    out
}

/// Two-level gap instances: optimal items at `suboptimal + delta`.
pub fn delta_sweep(spec: &ExperimentSpec, deltas: &[f64], suboptimal: f64) -> Vec<(f64, ExperimentSpec)> {
    deltas
        .iter()
        .map(|&delta| {
            let mut s = spec.clone();
            s.environment.source = ModelSource::Gap {
                optimal: suboptimal + delta,
                suboptimal,
            };
            s.name = Some(format!("delta_{delta}"));
            (delta, s)
        })
        .collect()
}

/// Periodic schedules `(t1, t2)`.
pub fn corruption_sweep(spec: &ExperimentSpec, levels: &[(u64, u64)]) -> Vec<ExperimentSpec> {
    levels
        .iter()
        .map(|&(t1, t2)| {
            let mut s = spec.clone();
            s.adversary.schedule = CorruptionSchedule::Periodic { t1, t2 };
            s.name = Some(format!("periodic_{t1}_{t2}"));
            s
        })
        .collect()
}
