//! Decision algorithms behind one [`Policy`] interface.
//!
//! A policy only ever sees the round number and the (possibly corrupted)
//! click index of the lists it proposed. It never sees weights or true
//! feedback.

mod elimination;
mod radius;
mod rba;
mod simple;
mod stats;
mod ucb;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use elimination::{layer_count, sample_layer, CascadeRac, CascadeRkc, EliminationEvent, Pbe};
pub use radius::{radius_fast, radius_layer, radius_slow, ConfidenceRadius};
pub use rba::RankedBandits;
pub use simple::{FixedList, UniformRandom};
pub use stats::{pbe_eliminate, pbe_select, pbe_update, InstanceStats};
pub use ucb::{bernoulli_kl, kl_ucb_budget, kl_ucb_index, ucb_index, CascadeUcb, UcbRule};

use crate::error::{CascadeError, Result};
use crate::model::RecList;
use crate::rng::SimRng;

/// Which elimination instance produced a decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InstanceLabel {
    /// The only instance of plain PBE.
    Plain,
    Fast,
    Slow,
    /// 1-based layer of the agnostic algorithm.
    Layer(u32),
}

impl fmt::Display for InstanceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceLabel::Plain => f.write_str("plain"),
            InstanceLabel::Fast => f.write_str("F"),
            InstanceLabel::Slow => f.write_str("S"),
            InstanceLabel::Layer(l) => write!(f, "layer{l}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolicyDecision {
    pub list: RecList,
    pub instance: Option<InstanceLabel>,
}

impl PolicyDecision {
    pub fn single(list: RecList) -> Self {
        Self {
            list,
            instance: None,
        }
    }
}

pub trait Policy: Send {
    fn label(&self) -> &str;

    fn set_label(&mut self, label: String);

    /// Proposes the list for 1-based round `round`.
    fn select(&mut self, round: u64) -> Result<PolicyDecision>;

    /// Receives the observed click for the decision just made: `None` means
    /// no click. Positions after the click carry no information.
    fn observe(&mut self, decision: &PolicyDecision, click: Option<usize>);

    /// Eliminations so far, for elimination-based policies.
    fn elimination_log(&self) -> &[EliminationEvent] {
        &[]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Pbe,
    /// Known corruption level.
    Rkc,
    /// Agnostic corruption level.
    Rac,
    Ucb1,
    Ucbv,
    Klucb,
    Rba,
    Uniform,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::Pbe,
        Algorithm::Rkc,
        Algorithm::Rac,
        Algorithm::Ucb1,
        Algorithm::Ucbv,
        Algorithm::Klucb,
        Algorithm::Rba,
        Algorithm::Uniform,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::Pbe => "pbe",
            Algorithm::Rkc => "rkc",
            Algorithm::Rac => "rac",
            Algorithm::Ucb1 => "ucb1",
            Algorithm::Ucbv => "ucbv",
            Algorithm::Klucb => "klucb",
            Algorithm::Rba => "rba",
            Algorithm::Uniform => "uniform",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = CascadeError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Algorithm::ALL
            .into_iter()
            .find(|a| a.tag() == s)
            .ok_or_else(|| CascadeError::config(format!("unknown algorithm {s:?}")))
    }
}

fn default_delta() -> f64 {
    0.01
}

/// Policy entry of an experiment spec. `L`, `K` and `T` come from the
/// environment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub algorithm: Algorithm,
    /// Display and seeding label; defaults to the algorithm tag.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Known corruption level for `rkc`; defaults to the number of rounds
    /// the schedule attacks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corruption: Option<f64>,
}

impl PolicyConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            label: None,
            delta: default_delta(),
            corruption: None,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_corruption(mut self, c: f64) -> Self {
        self.corruption = Some(c);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn display_label(&self) -> &str {
        self.label.as_deref().unwrap_or(self.algorithm.tag())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(CascadeError::config(format!(
                "{}: delta = {} must lie in (0, 1)",
                self.display_label(),
                self.delta
            )));
        }
        if let Some(c) = self.corruption {
            if !c.is_finite() || c < 0.0 {
                return Err(CascadeError::config(format!(
                    "{}: corruption level {c} must be a non-negative number",
                    self.display_label()
                )));
            }
        }
        Ok(())
    }

    /// `scheduled_corruption` is used when no explicit level is configured.
    pub fn build(
        &self,
        items: usize,
        positions: usize,
        horizon: u64,
        scheduled_corruption: u64,
        rng: SimRng,
    ) -> Result<Box<dyn Policy>> {
        self.validate()?;
        if positions == 0 || positions >= items {
            return Err(CascadeError::config(format!(
                "need 0 < K < L, got K = {positions}, L = {items}"
            )));
        }
        let mut policy: Box<dyn Policy> = match self.algorithm {
            Algorithm::Pbe => Box::new(Pbe::new(items, positions, horizon, self.delta)),
            Algorithm::Rkc => Box::new(CascadeRkc::new(
                items,
                positions,
                horizon,
                self.delta,
                self.corruption.unwrap_or(scheduled_corruption as f64),
                rng,
            )),
            Algorithm::Rac => Box::new(CascadeRac::new(items, positions, horizon, self.delta, rng)),
            Algorithm::Ucb1 => Box::new(CascadeUcb::new(UcbRule::Ucb1, items, positions)),
            Algorithm::Ucbv => Box::new(CascadeUcb::new(UcbRule::UcbV, items, positions)),
            Algorithm::Klucb => Box::new(CascadeUcb::new(UcbRule::KlUcb, items, positions)),
            Algorithm::Rba => Box::new(RankedBandits::new(items, positions)),
            Algorithm::Uniform => Box::new(UniformRandom::new(items, positions, rng)),
        };
        policy.set_label(self.display_label().to_string());
        Ok(policy)
    }
}
