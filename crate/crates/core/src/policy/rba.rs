//! Ranked bandits: one UCB1 learner over all items per rank.
//!
//! Rank `k`'s learner proposes its best item. If a higher rank already took
//! it, the slot is filled with the learner's least-played unchosen item and
//! the learner is charged reward 0 for its proposal. Otherwise it receives
//! `1{click == k}`. Base index: `mean + sqrt(2 log t / n)`.

use crate::error::Result;
use crate::model::{ItemId, RecList};

use super::stats::InstanceStats;
use super::ucb::top_k;
use super::{Policy, PolicyDecision};

#[derive(Clone, Debug)]
pub struct RankedBandits {
    label: String,
    learners: Vec<InstanceStats>,
    /// Per rank: the learner's own proposal, and whether it was displaced.
    proposals: Vec<(ItemId, bool)>,
    scores: Vec<f64>,
}

impl RankedBandits {
    pub fn new(items: usize, positions: usize) -> Self {
        Self {
            label: "rba".into(),
            learners: vec![InstanceStats::new(items, 1); positions],
            proposals: Vec::with_capacity(positions),
            scores: vec![0.0; items],
        }
    }

    pub fn learner(&self, rank: usize) -> &InstanceStats {
        &self.learners[rank]
    }
}

fn ucb1(stats: &InstanceStats, item: ItemId, log_t: f64) -> f64 {
    match stats.plays(item) {
        0 => f64::INFINITY,
        n => stats.mean(item) + (2.0 * log_t / n as f64).sqrt(),
    }
}

impl Policy for RankedBandits {
    fn label(&self) -> &str {
        &self.label
    }

    fn set_label(&mut self, label: String) {
        self.label = label;
    }

    fn select(&mut self, round: u64) -> Result<PolicyDecision> {
        let log_t = (round.max(1) as f64).ln();
        let items = self.scores.len();
        let mut shown: Vec<ItemId> = Vec::with_capacity(self.learners.len());
        self.proposals.clear();
        for learner in &self.learners {
            for (i, s) in self.scores.iter_mut().enumerate() {
                *s = ucb1(learner, ItemId(i), log_t);
            }
            let proposal = top_k(&self.scores, 1)[0];
            if shown.contains(&proposal) {
                let filler = learner
                    .least_played_available(0, &shown)
                    .expect("K < L leaves an unchosen item");
                shown.push(filler);
                self.proposals.push((proposal, true));
            } else {
                shown.push(proposal);
                self.proposals.push((proposal, false));
            }
        }
        Ok(PolicyDecision::single(RecList::new(shown, items)?))
    }

    fn observe(&mut self, _decision: &PolicyDecision, click: Option<usize>) {
        for (rank, (learner, &(proposal, displaced))) in
            self.learners.iter_mut().zip(&self.proposals).enumerate()
        {
            learner.record(proposal, !displaced && click == Some(rank));
        }
    }
}
