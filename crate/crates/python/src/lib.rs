//! Python bindings: models, feedback sampling, the adversary, single policies
//! driven step by step, and whole experiments from a JSON spec.

use cascade_core::adversary::{AttackMode, CorruptionSchedule};
use cascade_core::harness::{run_experiment, run_experiment_with_threads};
use cascade_core::policy::{radius_fast, radius_layer, radius_slow};
use cascade_core::{rng, CascadeError, ExperimentSpec, PolicyConfig, PolicyDecision, RecList};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: CascadeError) -> PyErr {
    match e {
        CascadeError::Io { .. } | CascadeError::PolicyExhausted { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn schedule(kind: &str, t1: u64, t2: u64, t_attack: u64) -> PyResult<CorruptionSchedule> {
    let s = match kind.to_ascii_lowercase().as_str() {
        "periodic" => CorruptionSchedule::Periodic { t1, t2 },
        "early" => CorruptionSchedule::Early { t_attack },
        "none" => CorruptionSchedule::None,
        other => return Err(PyValueError::new_err(format!("unknown schedule {other:?}"))),
    };
    s.validate().map_err(err)?;
    Ok(s)
}

/// Hidden attraction probabilities of the ground items.
#[pyclass(name = "AttractionModel", frozen)]
struct PyModel {
    inner: cascade_core::AttractionModel,
}

impl PyModel {
    fn list(&self, items: Vec<usize>) -> PyResult<RecList> {
        RecList::from_indices(&items, self.inner.weights().len()).map_err(err)
    }
}

#[pymethods]
impl PyModel {
    #[new]
    fn new(weights: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: cascade_core::AttractionModel::new(weights).map_err(err)?,
        })
    }

    /// Uniform weights on (low, high), reproducible from `seed`.
    #[staticmethod]
    #[pyo3(signature = (items, seed, low=0.0, high=0.5))]
    fn synthetic(items: usize, seed: u64, low: f64, high: f64) -> PyResult<Self> {
        let cfg = cascade_core::EnvironmentConfig {
            items,
            positions: 1,
            horizon: 1,
            seed,
            source: cascade_core::ModelSource::Synthetic { low, high },
        };
        Ok(Self {
            inner: cascade_core::generate_synthetic_model(&cfg).map_err(err)?,
        })
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.weights().len()
    }

    fn expected_reward(&self, items: Vec<usize>) -> PyResult<f64> {
        cascade_core::expected_reward(&self.list(items)?, &self.inner).map_err(err)
    }

    fn optimal_value(&self, k: usize) -> PyResult<f64> {
        cascade_core::optimal_value(&self.inner, k).map_err(err)
    }

    fn optimal_list(&self, k: usize) -> PyResult<Vec<usize>> {
        let list = cascade_core::optimal_list(&self.inner, k).map_err(err)?;
        Ok(list.items().iter().map(|i| i.0).collect())
    }

    /// Item the targeted attack never suppresses (lowest weight).
    fn target(&self) -> usize {
        cascade_core::pick_target(&self.inner).0
    }

    fn __repr__(&self) -> String {
        format!("AttractionModel(L={})", self.inner.weights().len())
    }
}

/// Cascade feedback sampler, optionally with the targeted click-suppression
/// attack applied on top.
#[pyclass(name = "Environment")]
struct PyEnvironment {
    env: cascade_core::Environment,
    adversary: cascade_core::Adversary,
    items: usize,
}

#[pymethods]
impl PyEnvironment {
    #[new]
    #[pyo3(signature = (model, seed, schedule_kind="none", t1=0, t2=0, t_attack=0, chain=false))]
    fn new(
        model: &PyModel,
        seed: u64,
        schedule_kind: &str,
        t1: u64,
        t2: u64,
        t_attack: u64,
        chain: bool,
    ) -> PyResult<Self> {
        let sched = schedule(schedule_kind, t1, t2, t_attack)?;
        let mode = if chain {
            AttackMode::Chain
        } else {
            AttackMode::Single
        };
        Ok(Self {
            env: cascade_core::Environment::new(
                model.inner.clone(),
                rng::stream(seed, rng::FEEDBACK_STREAM),
            ),
            adversary: cascade_core::Adversary::targeting(&model.inner, sched).with_mode(mode),
            items: model.inner.weights().len(),
        })
    }

    /// Draws one round for `items` at 0-based schedule round `t`.
    ///
    /// Returns (attractions, click, corrupted_attractions, corrupted_click);
    /// clicks are 0-based positions or None.
    #[allow(clippy::type_complexity)]
    fn step(
        &mut self,
        t: u64,
        items: Vec<usize>,
    ) -> PyResult<(Vec<bool>, Option<usize>, Vec<bool>, Option<usize>)> {
        let list = RecList::from_indices(&items, self.items).map_err(err)?;
        let fb = self.env.sample_round(&list);
        let fb = self.adversary.corrupt(t, &list, fb);
        Ok((
            fb.attractions().to_vec(),
            fb.click_index(),
            fb.corrupted_attractions().to_vec(),
            fb.corrupted_click_index(),
        ))
    }

    /// Corrupted rounds so far.
    #[getter]
    fn corruption_used(&self) -> u64 {
        self.adversary.ledger().total_used()
    }
}

/// One bandit policy, driven with `select` then `observe` each round.
#[pyclass(name = "Policy", unsendable)]
struct PyPolicy {
    inner: Box<dyn cascade_core::Policy>,
    pending: Option<PolicyDecision>,
    round: u64,
}

#[pymethods]
impl PyPolicy {
    #[new]
    #[pyo3(signature = (algorithm, items, positions, horizon, seed=0, delta=0.01, corruption=None))]
    fn new(
        algorithm: &str,
        items: usize,
        positions: usize,
        horizon: u64,
        seed: u64,
        delta: f64,
        corruption: Option<f64>,
    ) -> PyResult<Self> {
        let mut cfg = PolicyConfig::new(algorithm.parse().map_err(err)?).with_delta(delta);
        if let Some(c) = corruption {
            cfg = cfg.with_corruption(c);
        }
        let inner = cfg
            .build(items, positions, horizon, 0, rng::stream(seed, rng::POLICY_STREAM))
            .map_err(err)?;
        Ok(Self {
            inner,
            pending: None,
            round: 0,
        })
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label().to_string()
    }

    /// Returns (items, instance) for the next round; instance is "F", "S",
    /// "layerN", "plain" or None.
    fn select(&mut self) -> PyResult<(Vec<usize>, Option<String>)> {
        if self.pending.is_some() {
            return Err(PyRuntimeError::new_err("observe() the previous list first"));
        }
        self.round += 1;
        let d = self.inner.select(self.round).map_err(err)?;
        let out = (
            d.list.items().iter().map(|i| i.0).collect(),
            d.instance.map(|l| l.to_string()),
        );
        self.pending = Some(d);
        Ok(out)
    }

    /// Feeds back the (possibly corrupted) 0-based click position, or None.
    #[pyo3(signature = (click=None))]
    fn observe(&mut self, click: Option<usize>) -> PyResult<()> {
        let d = self
            .pending
            .take()
            .ok_or_else(|| PyRuntimeError::new_err("select() before observe()"))?;
        if click.is_some_and(|c| c >= d.list.items().len()) {
            self.pending = Some(d);
            return Err(PyValueError::new_err("click position outside the list"));
        }
        self.inner.observe(&d, click);
        Ok(())
    }

    /// (round, instance, 0-based position, item, plays) per elimination.
    fn eliminations(&self) -> Vec<(u64, String, usize, usize, u64)> {
        self.inner
            .elimination_log()
            .iter()
            .map(|e| (e.round, e.instance.to_string(), e.position, e.item.0, e.plays))
            .collect()
    }
}

#[pyfunction]
fn expected_reward(weights: Vec<f64>, items: Vec<usize>) -> PyResult<f64> {
    PyModel::new(weights)?.expected_reward(items)
}

#[pyfunction]
fn optimal_value(weights: Vec<f64>, k: usize) -> PyResult<f64> {
    PyModel::new(weights)?.optimal_value(k)
}

#[pyfunction]
#[pyo3(name = "radius_fast")]
fn py_radius_fast(plays: u64, items: usize, horizon: u64, delta: f64) -> f64 {
    radius_fast(plays, items, horizon, delta)
}

#[pyfunction]
#[pyo3(name = "radius_slow")]
fn py_radius_slow(plays: u64, items: usize, horizon: u64, delta: f64) -> f64 {
    radius_slow(plays, items, horizon, delta)
}

#[pyfunction]
#[pyo3(name = "radius_layer")]
fn py_radius_layer(plays: u64, items: usize, horizon: u64, delta: f64) -> f64 {
    radius_layer(plays, items, horizon, delta)
}

/// Whether 0-based round `t` is attacked.
#[pyfunction]
#[pyo3(signature = (kind, t, t1=0, t2=0, t_attack=0))]
fn schedule_active(kind: &str, t: u64, t1: u64, t2: u64, t_attack: u64) -> PyResult<bool> {
    Ok(cascade_core::schedule_active(&schedule(kind, t1, t2, t_attack)?, t))
}

/// Validates a JSON experiment spec; raises ValueError on problems.
#[pyfunction]
fn validate_spec(spec_json: &str) -> PyResult<()> {
    ExperimentSpec::from_json(spec_json).map(|_| ()).map_err(err)
}

/// Runs a JSON experiment spec and returns the regret CSV text. The GIL is
/// released while the simulation runs.
#[pyfunction]
#[pyo3(signature = (spec_json, threads=None))]
fn run_experiment_json(py: Python<'_>, spec_json: &str, threads: Option<usize>) -> PyResult<String> {
    let spec = ExperimentSpec::from_json(spec_json).map_err(err)?;
    let rec = py
        .detach(|| match threads {
            Some(n) => run_experiment_with_threads(&spec, n),
            None => run_experiment(&spec),
        })
        .map_err(err)?;
    Ok(rec.to_csv())
}

#[pymodule]
pub fn cascade_bandits(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyEnvironment>()?;
    m.add_class::<PyPolicy>()?;
    m.add_function(wrap_pyfunction!(expected_reward, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_value, m)?)?;
    m.add_function(wrap_pyfunction!(py_radius_fast, m)?)?;
    m.add_function(wrap_pyfunction!(py_radius_slow, m)?)?;
    m.add_function(wrap_pyfunction!(py_radius_layer, m)?)?;
    m.add_function(wrap_pyfunction!(schedule_active, m)?)?;
    m.add_function(wrap_pyfunction!(validate_spec, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment_json, m)?)?;
    m.add("CSV_HEADER", cascade_core::harness::CSV_HEADER)?;
    Ok(())
}
