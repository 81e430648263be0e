//! Adaptive click-suppression attacker with exact budget accounting.
//!
//! The attacker sees the shown list and the full true indicator vector of
//! the round, never the policy's internals. When its schedule is active it
//! zeroes the clicked indicator unless the click landed on the target item
//! (the least attractive one). Corruption only ever turns 1s into 0s.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{CascadeError, Result};
use crate::model::{AttractionModel, ItemId, RecList, RoundFeedback};

/// Which rounds the attacker is allowed to touch. Round indices are
/// zero-based.
#[derive(Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorruptionSchedule {
    /// Corrupt `t1` rounds, leave `t2` intact, repeat.
    Periodic { t1: u64, t2: u64 },
    /// Corrupt the first `t_attack` rounds only.
    Early { t_attack: u64 },
    #[default]
    None,
    #[serde(skip)]
    Custom(Arc<dyn Fn(u64) -> bool + Send + Sync>),
}

impl fmt::Debug for CorruptionSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Periodic { t1, t2 } => write!(f, "Periodic({t1}, {t2})"),
            Self::Early { t_attack } => write!(f, "Early({t_attack})"),
            Self::None => f.write_str("None"),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl PartialEq for CorruptionSchedule {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Self::Periodic { t1, t2 }, Self::Periodic { t1: u1, t2: u2 }) => t1 == u1 && t2 == u2,
            (Self::Early { t_attack: a }, Self::Early { t_attack: b }) => a == b,
            (Self::None, Self::None) => true,
            (Self::Custom(a), Self::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl CorruptionSchedule {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Periodic { t1: 0, t2: 0 } => {
                Err(CascadeError::config("periodic schedule with t1 + t2 = 0"))
            }
            _ => Ok(()),
        }
    }

    /// Short label used in summaries ("periodic", "early", ...).
    pub fn mechanism(&self) -> &'static str {
        match self {
            Self::Periodic { .. } => "periodic",
            Self::Early { .. } => "early",
            Self::None => "none",
            Self::Custom(_) => "custom",
        }
    }

    /// Number of active rounds in `[0, horizon)`: the corruption level handed
    /// to policies that need a known `C`.
    pub fn active_rounds(&self, horizon: u64) -> u64 {
        match self {
            Self::Periodic { t1, t2 } => {
                let period = t1 + t2;
                if period == 0 {
                    return 0;
                }
                (horizon / period) * t1 + (horizon % period).min(*t1)
            }
            Self::Early { t_attack } => (*t_attack).min(horizon),
            Self::None => 0,
            Self::Custom(p) => (0..horizon).filter(|&t| p(t)).count() as u64,
        }
    }
}

pub fn schedule_active(schedule: &CorruptionSchedule, t: u64) -> bool {
    match schedule {
        CorruptionSchedule::Periodic { t1, t2 } => {
            let period = t1 + t2;
            period > 0 && t % period < *t1
        }
        CorruptionSchedule::Early { t_attack } => t < *t_attack,
        CorruptionSchedule::None => false,
        CorruptionSchedule::Custom(p) => p(t),
    }
}

/// Argmin of the weights, ties to the smallest index.
pub fn pick_target(model: &AttractionModel) -> ItemId {
    let w = model.weights();
    let mut best = 0;
    for (i, &x) in w.iter().enumerate().skip(1) {
        if x < w[best] {
            best = i;
        }
    }
    ItemId(best)
}

/// How many clicks one active round may suppress.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackMode {
    /// Zero the first click only.
    #[default]
    Single,
    /// Keep zeroing the next non-target click until none remains.
    Chain,
}

/// Per-round corruption magnitudes and their running total.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CorruptionLedger {
    per_round: Vec<u8>,
    total_used: u64,
}

impl CorruptionLedger {
    pub fn record(&mut self, magnitude: u8) {
        debug_assert!(magnitude <= 1);
        self.per_round.push(magnitude);
        self.total_used += u64::from(magnitude);
    }

    pub fn per_round(&self) -> &[u8] {
        &self.per_round
    }

    pub fn total_used(&self) -> u64 {
        self.total_used
    }
}

#[derive(Clone, Debug)]
pub struct Adversary {
    target: ItemId,
    schedule: CorruptionSchedule,
    mode: AttackMode,
    hard_cap: Option<u64>,
    ledger: CorruptionLedger,
}

impl Adversary {
    pub fn new(target: ItemId, schedule: CorruptionSchedule) -> Self {
        Self {
            target,
            schedule,
            mode: AttackMode::Single,
            hard_cap: None,
            ledger: CorruptionLedger::default(),
        }
    }

    /// Targets the least attractive item of `model`.
    pub fn targeting(model: &AttractionModel, schedule: CorruptionSchedule) -> Self {
        Self::new(pick_target(model), schedule)
    }

    pub fn with_mode(mut self, mode: AttackMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_hard_cap(mut self, cap: Option<u64>) -> Self {
        self.hard_cap = cap;
        self
    }

    pub fn target(&self) -> ItemId {
        self.target
    }

    pub fn schedule(&self) -> &CorruptionSchedule {
        &self.schedule
    }

    pub fn ledger(&self) -> &CorruptionLedger {
        &self.ledger
    }

    fn budget_left(&self) -> bool {
        self.hard_cap.is_none_or(|cap| self.ledger.total_used < cap)
    }

    /// Applies the attack for round `t` and books its magnitude.
    pub fn corrupt(&mut self, t: u64, list: &RecList, mut fb: RoundFeedback) -> RoundFeedback {
        debug_assert_eq!(fb.attractions(), fb.corrupted_attractions());
        if schedule_active(&self.schedule, t) && self.budget_left() {
            while let Some(pos) = fb.corrupted_click_index() {
                if list.items()[pos] == self.target {
                    break;
                }
                fb.suppress(pos);
                if self.mode == AttackMode::Single {
                    break;
                }
            }
        }
        self.ledger.record(fb.corruption_magnitude());
        fb
    }
}
