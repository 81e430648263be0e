//! UCB-style cascading baselines. Each round every item gets an upper
//! confidence index and the `K` largest are shown in decreasing order.
//!
//! Indices, with `t` the 1-based round and `n` the item's plays:
//! - UCB1: `mean + sqrt(1.5 log t / n)`
//! - UCB-V: `mean + sqrt(2 mean (1 - mean) log t / n) + 3 log t / n`
//! - KL-UCB: `max { q >= mean : n kl(mean, q) <= log t + 3 log log t }`
//!
//! Unplayed items have an infinite index.

use crate::error::Result;
use crate::model::{ItemId, RecList};

use super::stats::{pbe_update, InstanceStats};
use super::{Policy, PolicyDecision};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UcbRule {
    Ucb1,
    UcbV,
    KlUcb,
}

impl UcbRule {
    fn default_label(self) -> &'static str {
        match self {
            UcbRule::Ucb1 => "ucb1",
            UcbRule::UcbV => "ucbv",
            UcbRule::KlUcb => "klucb",
        }
    }
}

/// Bernoulli KL divergence `kl(p, q)`.
pub fn bernoulli_kl(p: f64, q: f64) -> f64 {
    let term = |x: f64, y: f64| if x == 0.0 { 0.0 } else { x * (x / y).ln() };
    term(p, q) + term(1.0 - p, 1.0 - q)
}

/// Largest `q` in `[mean, 1]` with `plays * kl(mean, q) <= budget`, by
/// bisection to `1e-9`.
pub fn kl_ucb_index(mean: f64, plays: u64, budget: f64) -> f64 {
    if plays == 0 {
        return f64::INFINITY;
    }
    let n = plays as f64;
    if n * bernoulli_kl(mean, 1.0) <= budget {
        return 1.0;
    }
    let (mut lo, mut hi) = (mean, 1.0);
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if n * bernoulli_kl(mean, mid) <= budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `log t + 3 log log t`, with `log log t` floored at 0.
pub fn kl_ucb_budget(round: u64) -> f64 {
    let log_t = (round.max(1) as f64).ln();
    let log_log = if log_t > 1.0 { log_t.ln() } else { 0.0 };
    log_t + 3.0 * log_log
}

pub fn ucb_index(rule: UcbRule, mean: f64, plays: u64, round: u64) -> f64 {
    if plays == 0 {
        return f64::INFINITY;
    }
    let n = plays as f64;
    let log_t = (round.max(1) as f64).ln();
    match rule {
        UcbRule::Ucb1 => mean + (1.5 * log_t / n).sqrt(),
        UcbRule::UcbV => mean + (2.0 * mean * (1.0 - mean) * log_t / n).sqrt() + 3.0 * log_t / n,
        UcbRule::KlUcb => kl_ucb_index(mean, plays, kl_ucb_budget(round)),
    }
}

/// Top-`k` indices in decreasing order, ties to the smaller item.
pub(crate) fn top_k(scores: &[f64], k: usize) -> Vec<ItemId> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    let cmp = |a: &usize, b: &usize| scores[*b].total_cmp(&scores[*a]).then(a.cmp(b));
    if k < order.len() {
        order.select_nth_unstable_by(k, cmp);
        order.truncate(k);
    }
    order.sort_unstable_by(cmp);
    order.into_iter().map(ItemId).collect()
}

#[derive(Clone, Debug)]
pub struct CascadeUcb {
    label: String,
    rule: UcbRule,
    stats: InstanceStats,
    positions: usize,
    scores: Vec<f64>,
}

impl CascadeUcb {
    pub fn new(rule: UcbRule, items: usize, positions: usize) -> Self {
        Self {
            label: rule.default_label().into(),
            rule,
            stats: InstanceStats::new(items, positions),
            positions,
            scores: vec![0.0; items],
        }
    }

    pub fn stats(&self) -> &InstanceStats {
        &self.stats
    }
}

impl Policy for CascadeUcb {
    fn label(&self) -> &str {
        &self.label
    }

    fn set_label(&mut self, label: String) {
        self.label = label;
    }

    fn select(&mut self, round: u64) -> Result<PolicyDecision> {
        for (i, s) in self.scores.iter_mut().enumerate() {
            let item = ItemId(i);
            *s = ucb_index(self.rule, self.stats.mean(item), self.stats.plays(item), round);
        }
        let list = RecList::new(top_k(&self.scores, self.positions), self.stats.items())?;
        Ok(PolicyDecision::single(list))
    }

    fn observe(&mut self, decision: &PolicyDecision, click: Option<usize>) {
        pbe_update(&mut self.stats, &decision.list, click, false);
    }
}
