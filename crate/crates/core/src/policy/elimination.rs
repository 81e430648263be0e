//! Position-based elimination and its multi-instance robust variants.

use rand::Rng;

use crate::error::{CascadeError, Result};
use crate::model::{ItemId, RecList};
use crate::rng::SimRng;

use super::radius::ConfidenceRadius;
use super::stats::{pbe_eliminate, pbe_select, pbe_update, InstanceStats};
use super::{InstanceLabel, Policy, PolicyDecision};

/// An item leaving a position's active set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EliminationEvent {
    pub round: u64,
    pub instance: InstanceLabel,
    /// Zero-based position.
    pub position: usize,
    pub item: ItemId,
    /// Plays of the item in the eliminating instance at that moment.
    pub plays: u64,
}

fn record_events(
    log: &mut Vec<EliminationEvent>,
    stats: &InstanceStats,
    round: u64,
    instance: InstanceLabel,
    found: &[(usize, ItemId)],
) {
    log.extend(found.iter().map(|&(position, item)| EliminationEvent {
        round,
        instance,
        position,
        item,
        plays: stats.plays(item),
    }));
}

/// Single-instance position-based elimination with the fast radius.
#[derive(Clone, Debug)]
pub struct Pbe {
    label: String,
    stats: InstanceStats,
    radius: ConfidenceRadius,
    round: u64,
    log: Vec<EliminationEvent>,
}

impl Pbe {
    pub fn new(items: usize, positions: usize, horizon: u64, delta: f64) -> Self {
        Self {
            label: "pbe".into(),
            stats: InstanceStats::new(items, positions),
            radius: ConfidenceRadius::fast(items, horizon, delta),
            round: 0,
            log: Vec::new(),
        }
    }

    pub fn stats(&self) -> &InstanceStats {
        &self.stats
    }
}

impl Policy for Pbe {
    fn label(&self) -> &str {
        &self.label
    }

    fn set_label(&mut self, label: String) {
        self.label = label;
    }

    fn select(&mut self, round: u64) -> Result<PolicyDecision> {
        self.round = round;
        Ok(PolicyDecision::single(pbe_select(&self.stats, self.stats.positions())?))
    }

    fn observe(&mut self, decision: &PolicyDecision, click: Option<usize>) {
        pbe_update(&mut self.stats, &decision.list, click, false);
        let found = pbe_eliminate(&mut self.stats, &self.radius);
        record_events(&mut self.log, &self.stats, self.round, InstanceLabel::Plain, &found);
    }

    fn elimination_log(&self) -> &[EliminationEvent] {
        &self.log
    }
}

/// Fill one position from `stats[primary]`, falling back to the
/// least-played item of the first instance in `fallbacks` with a
/// non-empty candidate set.
fn pick_with_fallback(
    instances: &[InstanceStats],
    primary: usize,
    fallbacks: impl IntoIterator<Item = usize>,
    position: usize,
    chosen: &[ItemId],
) -> Result<ItemId> {
    if let Some(item) = instances[primary].least_played_available(position, chosen) {
        return Ok(item);
    }
    for other in fallbacks {
        if let Some(item) = instances[other].least_played_available(position, chosen) {
            log::debug!("position {position}: instance {primary} exhausted, fell back to {other}");
            return Ok(item);
        }
    }
    Err(CascadeError::PolicyExhausted { position })
}

const FAST: usize = 0;
const SLOW: usize = 1;

/// Two elimination instances for a known corruption level `C`: the slow one
/// is run with probability `1/C` and uses a radius widened by an additive
/// log term; its eliminations are copied into the fast instance.
#[derive(Clone, Debug)]
pub struct CascadeRkc {
    label: String,
    positions: usize,
    corruption: f64,
    instances: [InstanceStats; 2],
    radii: [ConfidenceRadius; 2],
    rng: SimRng,
    round: u64,
    log: Vec<EliminationEvent>,
}

impl CascadeRkc {
    /// `corruption` below 1 is clamped to 1.
    pub fn new(
        items: usize,
        positions: usize,
        horizon: u64,
        delta: f64,
        corruption: f64,
        rng: SimRng,
    ) -> Self {
        let corruption = if corruption < 1.0 {
            log::warn!("known corruption level {corruption} clamped to 1");
            1.0
        } else {
            corruption
        };
        Self {
            label: "rkc".into(),
            positions,
            corruption,
            instances: [
                InstanceStats::new(items, positions),
                InstanceStats::new(items, positions),
            ],
            radii: [
                ConfidenceRadius::fast(items, horizon, delta),
                ConfidenceRadius::slow(items, horizon, delta),
            ],
            rng,
            round: 0,
            log: Vec::new(),
        }
    }

    pub fn corruption(&self) -> f64 {
        self.corruption
    }

    pub fn fast(&self) -> &InstanceStats {
        &self.instances[FAST]
    }

    pub fn slow(&self) -> &InstanceStats {
        &self.instances[SLOW]
    }

    fn index(label: InstanceLabel) -> usize {
        match label {
            InstanceLabel::Slow => SLOW,
            _ => FAST,
        }
    }
}

impl Policy for CascadeRkc {
    fn label(&self) -> &str {
        &self.label
    }

    fn set_label(&mut self, label: String) {
        self.label = label;
    }

    fn select(&mut self, round: u64) -> Result<PolicyDecision> {
        self.round = round;
        let label = if self.rng.random::<f64>() < 1.0 / self.corruption {
            InstanceLabel::Slow
        } else {
            InstanceLabel::Fast
        };
        let ell = Self::index(label);
        let mut chosen = Vec::with_capacity(self.positions);
        for position in 0..self.positions {
            let item = pick_with_fallback(&self.instances, ell, [SLOW], position, &chosen)?;
            chosen.push(item);
        }
        Ok(PolicyDecision {
            list: RecList::new(chosen, self.instances[FAST].items())?,
            instance: Some(label),
        })
    }

    fn observe(&mut self, decision: &PolicyDecision, click: Option<usize>) {
        let label = decision.instance.unwrap_or(InstanceLabel::Fast);
        let ell = Self::index(label);
        pbe_update(&mut self.instances[ell], &decision.list, click, true);
        let found = pbe_eliminate(&mut self.instances[ell], &self.radii[ell]);
        record_events(&mut self.log, &self.instances[ell], self.round, label, &found);
        if ell == SLOW {
            for &(position, item) in &found {
                self.instances[FAST].eliminate(position, item);
            }
        }
    }

    fn elimination_log(&self) -> &[EliminationEvent] {
        &self.log
    }
}

/// Number of layers for horizon `T`: `ceil(log2 T)`, at least one.
pub fn layer_count(horizon: u64) -> u32 {
    (horizon.max(2) - 1).ilog2() + 1
}

/// Layer `l` (1-based) with probability `2^-l`; residual mass to layer 1.
pub fn sample_layer(u: f64, layers: u32) -> u32 {
    let mut acc = 0.0;
    let mut p = 1.0;
    for layer in 1..=layers {
        p *= 0.5;
        acc += p;
        if u < acc {
            return layer;
        }
    }
    1
}

/// `ceil(log2 T)` elimination layers for an unknown corruption level. An
/// elimination in layer `l` propagates to every layer below it.
#[derive(Clone, Debug)]
pub struct CascadeRac {
    label: String,
    positions: usize,
    layers: Vec<InstanceStats>,
    radius: ConfidenceRadius,
    rng: SimRng,
    round: u64,
    log: Vec<EliminationEvent>,
}

impl CascadeRac {
    pub fn new(items: usize, positions: usize, horizon: u64, delta: f64, rng: SimRng) -> Self {
        let n = layer_count(horizon) as usize;
        Self {
            label: "rac".into(),
            positions,
            layers: vec![InstanceStats::new(items, positions); n],
            radius: ConfidenceRadius::layer(items, horizon, delta),
            rng,
            round: 0,
            log: Vec::new(),
        }
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    /// Statistics of layer `layer` (1-based).
    pub fn layer(&self, layer: u32) -> &InstanceStats {
        &self.layers[layer as usize - 1]
    }
}

impl Policy for CascadeRac {
    fn label(&self) -> &str {
        &self.label
    }

    fn set_label(&mut self, label: String) {
        self.label = label;
    }

    fn select(&mut self, round: u64) -> Result<PolicyDecision> {
        self.round = round;
        let layer = sample_layer(self.rng.random::<f64>(), self.layers.len() as u32);
        let ell = layer as usize - 1;
        let mut chosen = Vec::with_capacity(self.positions);
        for position in 0..self.positions {
            let item = pick_with_fallback(&self.layers, ell, 0..self.layers.len(), position, &chosen)?;
            chosen.push(item);
        }
        Ok(PolicyDecision {
            list: RecList::new(chosen, self.layers[0].items())?,
            instance: Some(InstanceLabel::Layer(layer)),
        })
    }

    fn observe(&mut self, decision: &PolicyDecision, click: Option<usize>) {
        let layer = match decision.instance {
            Some(InstanceLabel::Layer(l)) => l,
            _ => 1,
        };
        let ell = layer as usize - 1;
        pbe_update(&mut self.layers[ell], &decision.list, click, true);
        let found = pbe_eliminate(&mut self.layers[ell], &self.radius);
        record_events(
            &mut self.log,
            &self.layers[ell],
            self.round,
            InstanceLabel::Layer(layer),
            &found,
        );
        for lower in &mut self.layers[..ell] {
            for &(position, item) in &found {
                lower.eliminate(position, item);
            }
        }
    }

    fn elimination_log(&self) -> &[EliminationEvent] {
        &self.log
    }
}
