//! Stochastic cascade feedback from synthetic or dataset-derived models.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CascadeError, Result};
use crate::model::{AttractionModel, RecList, RoundFeedback};
use crate::rng::{self, SimRng};

/// Where the attraction model of a run comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSource {
    /// i.i.d. uniform weights on the open interval `(low, high)`.
    Synthetic { low: f64, high: f64 },
    /// `K` items at `optimal`, the rest at `suboptimal`; the optimal items
    /// sit at seeded random indices.
    Gap { optimal: f64, suboptimal: f64 },
    /// Inline weights.
    Weights { values: Vec<f64> },
    /// Pre-learned click-model weights (see [`load_weight_file`]).
    WeightFile { path: PathBuf },
    /// Binary user x item matrix (see [`load_feedback_matrix`]).
    FeedbackMatrix {
        path: PathBuf,
        #[serde(default)]
        mode: FeedbackMode,
    },
}

/// How a feedback matrix turns into per-round attraction indicators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackMode {
    /// Independent Bernoulli draws with the matrix column means.
    #[default]
    ColumnMean,
    /// A uniformly random user row supplies the indicators.
    MatrixUser,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentConfig {
    /// `L`
    pub items: usize,
    /// `K`
    pub positions: usize,
    /// `T`
    pub horizon: u64,
    pub seed: u64,
    pub source: ModelSource,
}

impl EnvironmentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.positions == 0 || self.positions >= self.items {
            return Err(CascadeError::config(format!(
                "need 0 < K < L, got K = {} and L = {}",
                self.positions, self.items
            )));
        }
        if self.horizon == 0 {
            return Err(CascadeError::config("horizon must be at least 1"));
        }
        match &self.source {
            ModelSource::Synthetic { low, high } => {
                if !(0.0..=1.0).contains(low) || !(0.0..=1.0).contains(high) || low >= high {
                    return Err(CascadeError::config(format!(
                        "synthetic interval ({low}, {high}) must be a non-empty subinterval of [0, 1]"
                    )));
                }
            }
            ModelSource::Gap {
                optimal,
                suboptimal,
            } => {
                if !(0.0..=1.0).contains(optimal) || !(0.0..=1.0).contains(suboptimal) {
                    return Err(CascadeError::config("gap weights must lie in [0, 1]"));
                }
                if optimal <= suboptimal {
                    return Err(CascadeError::config(format!(
                        "optimal weight {optimal} must exceed sub-optimal weight {suboptimal}"
                    )));
                }
            }
            ModelSource::Weights { values } => {
                if values.len() != self.items {
                    return Err(CascadeError::config(format!(
                        "{} inline weights for L = {}",
                        values.len(),
                        self.items
                    )));
                }
            }
            ModelSource::WeightFile { .. } | ModelSource::FeedbackMatrix { .. } => {}
        }
        Ok(())
    }

    /// Builds the attraction model (and the user matrix in matrix-user mode)
    /// using `self.seed` for any randomness.
    pub fn build(&self) -> Result<(AttractionModel, Option<FeedbackMatrix>)> {
        self.validate()?;
        let (model, users) = match &self.source {
            ModelSource::Synthetic { .. } => (generate_synthetic_model(self)?, None),
            ModelSource::Gap {
                optimal,
                suboptimal,
            } => {
                let mut weights = vec![*suboptimal; self.items];
                let mut order: Vec<usize> = (0..self.items).collect();
                order.shuffle(&mut rng::stream(self.seed, rng::MODEL_STREAM));
                for &i in &order[..self.positions] {
                    weights[i] = *optimal;
                }
                (AttractionModel::new(weights)?, None)
            }
            ModelSource::Weights { values } => (AttractionModel::new(values.clone())?, None),
            ModelSource::WeightFile { path } => (load_weight_file(path)?, None),
            ModelSource::FeedbackMatrix { path, mode } => {
                let matrix = load_feedback_matrix(path)?;
                let model = model_from_matrix(&matrix)?;
                let users = (*mode == FeedbackMode::MatrixUser).then_some(matrix);
                (model, users)
            }
        };
        if model.len() != self.items {
            return Err(CascadeError::config(format!(
                "model has {} items but the config says L = {}",
                model.len(),
                self.items
            )));
        }
        Ok((model, users))
    }
}

/// `L` i.i.d. draws, uniform on the open interval `(low, high)`.
pub fn generate_synthetic_model(cfg: &EnvironmentConfig) -> Result<AttractionModel> {
    let ModelSource::Synthetic { low, high } = cfg.source else {
        return Err(CascadeError::config("model source is not synthetic"));
    };
    if low.is_nan() || high.is_nan() || low >= high {
        return Err(CascadeError::config(format!(
            "degenerate interval ({low}, {high})"
        )));
    }
    let mut rng = rng::stream(cfg.seed, rng::MODEL_STREAM);
    let weights = (0..cfg.items)
        .map(|_| loop {
            let w = rng.random_range(low..high);
            if w > low {
                break w;
            }
        })
        .collect();
    AttractionModel::new(weights)
}

/// Dense binary user x item matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeedbackMatrix {
    users: usize,
    items: usize,
    entries: Vec<u8>,
}

impl FeedbackMatrix {
    pub fn from_rows(rows: Vec<Vec<u8>>) -> Result<Self> {
        let users = rows.len();
        let items = rows.first().map_or(0, Vec::len);
        if users == 0 || items == 0 {
            return Err(CascadeError::config("feedback matrix must be non-empty"));
        }
        let mut entries = Vec::with_capacity(users * items);
        for (u, row) in rows.into_iter().enumerate() {
            if row.len() != items {
                return Err(CascadeError::config(format!(
                    "row {u} has {} entries, expected {items}",
                    row.len()
                )));
            }
            if row.iter().any(|&x| x > 1) {
                return Err(CascadeError::config(format!("row {u} is not binary")));
            }
            entries.extend(row);
        }
        Ok(Self {
            users,
            items,
            entries,
        })
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn row(&self, user: usize) -> &[u8] {
        &self.entries[user * self.items..(user + 1) * self.items]
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut sums = vec![0u64; self.items];
        for u in 0..self.users {
            for (s, &x) in sums.iter_mut().zip(self.row(u)) {
                *s += u64::from(x);
            }
        }
        sums.into_iter()
            .map(|s| s as f64 / self.users as f64)
            .collect()
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> CascadeError {
    CascadeError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Parses `U,L` followed by `U` rows of `L` comma-separated 0/1 values.
pub fn parse_feedback_matrix(text: &str, path: &Path) -> Result<FeedbackMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty feedback matrix file"))?;
    let dims: Vec<&str> = header.split(',').map(str::trim).collect();
    let parse_dim = |s: &str| {
        s.parse::<usize>()
            .ok()
            .filter(|&v| v > 0)
            .ok_or_else(|| parse_err(path, hline, format!("bad dimension {s:?} in header")))
    };
    if dims.len() != 2 {
        return Err(parse_err(path, hline, "header must be \"U,L\""));
    }
    let users = parse_dim(dims[0])?;
    let items = parse_dim(dims[1])?;
    let mut rows = Vec::with_capacity(users);
    for (line, text) in lines {
        if rows.len() == users {
            return Err(parse_err(path, line, format!("more than {users} user rows")));
        }
        let row = text
            .split(',')
            .map(|cell| match cell.trim() {
                "0" => Ok(0u8),
                "1" => Ok(1u8),
                other => Err(parse_err(path, line, format!("non-binary entry {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        if row.len() != items {
            return Err(parse_err(
                path,
                line,
                format!("row has {} entries, expected {items}", row.len()),
            ));
        }
        rows.push(row);
    }
    if rows.len() != users {
        return Err(parse_err(
            path,
            text.lines().count().max(1),
            format!("expected {users} user rows, found {}", rows.len()),
        ));
    }
    FeedbackMatrix::from_rows(rows)
}

pub fn load_feedback_matrix(path: &Path) -> Result<FeedbackMatrix> {
    let text = fs::read_to_string(path).map_err(|e| CascadeError::io(path, e))?;
    parse_feedback_matrix(&text, path)
}

/// Parses `L` followed by `L` decimal probabilities, one per line.
pub fn parse_weight_file(text: &str, path: &Path) -> Result<AttractionModel> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty weight file"))?;
    let count: usize = header
        .parse()
        .map_err(|_| parse_err(path, hline, format!("bad item count {header:?}")))?;
    let mut weights = Vec::with_capacity(count);
    for (line, text) in lines {
        let w: f64 = text
            .parse()
            .map_err(|_| parse_err(path, line, format!("bad probability {text:?}")))?;
        if !(0.0..=1.0).contains(&w) {
            return Err(parse_err(path, line, format!("probability {w} outside [0, 1]")));
        }
        weights.push(w);
    }
    if weights.len() != count {
        return Err(parse_err(
            path,
            text.lines().count().max(1),
            format!("expected {count} weights, found {}", weights.len()),
        ));
    }
    AttractionModel::new(weights)
}

pub fn load_weight_file(path: &Path) -> Result<AttractionModel> {
    let text = fs::read_to_string(path).map_err(|e| CascadeError::io(path, e))?;
    parse_weight_file(&text, path)
}

/// Per-item attraction = column mean.
pub fn model_from_matrix(m: &FeedbackMatrix) -> Result<AttractionModel> {
    AttractionModel::new(m.column_means())
}

/// One round of independent Bernoulli attraction draws for `list`.
pub fn sample_round<R: Rng + ?Sized>(
    model: &AttractionModel,
    list: &RecList,
    rng: &mut R,
) -> RoundFeedback {
    let attractions = list
        .items()
        .iter()
        .map(|&a| rng.random::<f64>() < model.weights()[a.index()])
        .collect();
    RoundFeedback::new(attractions)
}

/// Feedback generator owned by one run.
///
/// Positions after the click are still drawn: the attacker sees the full
/// indicator vector of the shown list.
#[derive(Clone, Debug)]
pub struct Environment {
    model: AttractionModel,
    users: Option<FeedbackMatrix>,
    optimal: Option<RecList>,
    rng: SimRng,
}

impl Environment {
    pub fn new(model: AttractionModel, rng: SimRng) -> Self {
        Self {
            model,
            users: None,
            optimal: None,
            rng,
        }
    }

    /// Matrix-user mode: each round a random row supplies the indicators.
    pub fn with_users(mut self, users: FeedbackMatrix) -> Result<Self> {
        if users.items() != self.model.len() {
            return Err(CascadeError::config("user matrix does not match the model"));
        }
        self.users = Some(users);
        Ok(self)
    }

    /// Also realize the optimal list's indicators each round, from the
    /// same per-item draws as the shown list.
    pub fn track_optimal(mut self, optimal: RecList) -> Self {
        self.optimal = Some(optimal);
        self
    }

    pub fn model(&self) -> &AttractionModel {
        &self.model
    }

    pub fn sample_round(&mut self, list: &RecList) -> RoundFeedback {
        match &self.users {
            None => {
                let fb = sample_round(&self.model, list, &mut self.rng);
                match &self.optimal {
                    None => fb,
                    Some(opt) => {
                        let drawn = fb.attractions().to_vec();
                        let optimal = opt
                            .items()
                            .iter()
                            .map(|&a| match list.items().iter().position(|&b| b == a) {
                                Some(p) => drawn[p],
                                None => self.rng.random::<f64>() < self.model.weights()[a.index()],
                            })
                            .collect();
                        fb.with_optimal(optimal)
                    }
                }
            }
            Some(users) => {
                let row = users.row(self.rng.random_range(0..users.users()));
                let pick = |l: &RecList| l.items().iter().map(|a| row[a.index()] == 1).collect();
                let fb = RoundFeedback::new(pick(list));
                match &self.optimal {
                    None => fb,
                    Some(opt) => fb.with_optimal(pick(opt)),
                }
            }
        }
    }
}
