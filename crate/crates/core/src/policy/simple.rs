//! Reference policies used by tests and as sanity baselines.

use rand::seq::index::sample;

use crate::error::Result;
use crate::model::{ItemId, RecList};
use crate::rng::SimRng;

use super::{Policy, PolicyDecision};

/// A uniformly random `K`-subset in random order every round.
#[derive(Clone, Debug)]
pub struct UniformRandom {
    label: String,
    items: usize,
    positions: usize,
    rng: SimRng,
}

impl UniformRandom {
    pub fn new(items: usize, positions: usize, rng: SimRng) -> Self {
        Self {
            label: "uniform".into(),
            items,
            positions,
            rng,
        }
    }
}

impl Policy for UniformRandom {
    fn label(&self) -> &str {
        &self.label
    }

    fn set_label(&mut self, label: String) {
        self.label = label;
    }

    fn select(&mut self, _round: u64) -> Result<PolicyDecision> {
        let picked = sample(&mut self.rng, self.items, self.positions)
            .into_iter()
            .map(ItemId)
            .collect();
        Ok(PolicyDecision::single(RecList::new(picked, self.items)?))
    }

    fn observe(&mut self, _decision: &PolicyDecision, _click: Option<usize>) {}
}

/// Always shows the same list.
#[derive(Clone, Debug)]
pub struct FixedList {
    label: String,
    list: RecList,
}

impl FixedList {
    pub fn new(list: RecList) -> Self {
        Self {
            label: "fixed".into(),
            list,
        }
    }
}

impl Policy for FixedList {
    fn label(&self) -> &str {
        &self.label
    }

    fn set_label(&mut self, label: String) {
        self.label = label;
    }

    fn select(&mut self, _round: u64) -> Result<PolicyDecision> {
        Ok(PolicyDecision::single(self.list.clone()))
    }

    fn observe(&mut self, _decision: &PolicyDecision, _click: Option<usize>) {}
}
