//! Confidence radii of the elimination instances. All logs are natural.

/// `sqrt(log(8LT/delta) / plays)`; the fast / plain instance.
pub fn radius_fast(plays: u64, items: usize, horizon: u64, delta: f64) -> f64 {
    ConfidenceRadius::fast(items, horizon, delta).at(plays)
}

/// `sqrt(log(8LT/delta) / plays) + 2 log(8LT/delta) / plays`; the slow instance.
pub fn radius_slow(plays: u64, items: usize, horizon: u64, delta: f64) -> f64 {
    ConfidenceRadius::slow(items, horizon, delta).at(plays)
}

/// `sqrt(log(4LT log T/delta) / plays) + log(4LT log T/delta) / plays`; every
/// layer of the agnostic algorithm. `log T` is floored at 1.
pub fn radius_layer(plays: u64, items: usize, horizon: u64, delta: f64) -> f64 {
    ConfidenceRadius::layer(items, horizon, delta).at(plays)
}

/// A radius rule with its log term precomputed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConfidenceRadius {
    log_term: f64,
    /// Coefficient of the additive `log_term / plays` part.
    linear: f64,
}

impl ConfidenceRadius {
    pub fn fast(items: usize, horizon: u64, delta: f64) -> Self {
        Self {
            log_term: (8.0 * items as f64 * horizon as f64 / delta).ln(),
            linear: 0.0,
        }
    }

    pub fn slow(items: usize, horizon: u64, delta: f64) -> Self {
        Self {
            log_term: (8.0 * items as f64 * horizon as f64 / delta).ln(),
            linear: 2.0,
        }
    }

    pub fn layer(items: usize, horizon: u64, delta: f64) -> Self {
        let log_t = (horizon as f64).ln().max(1.0);
        Self {
            log_term: (4.0 * items as f64 * horizon as f64 * log_t / delta).ln(),
            linear: 1.0,
        }
    }

    pub fn log_term(&self) -> f64 {
        self.log_term
    }

    /// Radius after `plays` observations; infinite before the first one.
    pub fn at(&self, plays: u64) -> f64 {
        if plays == 0 {
            return f64::INFINITY;
        }
        let n = plays as f64;
        (self.log_term / n).sqrt() + self.linear * self.log_term / n
    }
}
