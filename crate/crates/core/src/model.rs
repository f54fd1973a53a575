//! The realizable planted model.
//!
//! Features are i.i.d. `N(0, I_d)` rows and labels are exact ReLU responses
//! `y_i = max(0, <x_i, w*>)` of a hidden planted vector `w*`. Row `i` of a
//! dataset is generated from stream `i` of the dataset seed, so regenerating
//! any row (or the whole matrix, in parallel) is bitwise reproducible.

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{standard_normal_vec, stream_rng, STREAM_PLANTED};

/// Dense weight vector in `R^d`; houses planted vectors and solver iterates.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(pub Array1<f64>);

impl WeightVector {
    /// Validating constructor: requires `d >= 1` and finite entries.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidSpec("weight vector must have d >= 1".into()));
        }
        if let Some(i) = entries.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidSpec(format!("non-finite entry at index {i}")));
        }
        Ok(WeightVector(Array1::from_vec(entries)))
    }

    pub fn zeros(d: usize) -> Self {
        WeightVector(Array1::zeros(d))
    }

    pub fn d(&self) -> usize {
        self.0.len()
    }

    pub fn norm_l2(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn norm_l1(&self) -> f64 {
        self.0.iter().map(|x| x.abs()).sum()
    }

    /// Number of exactly nonzero entries.
    pub fn nnz(&self) -> usize {
        self.0.iter().filter(|&&x| x != 0.0).count()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Support of the vector (indices of exactly nonzero entries).
    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Structural prior of a planted vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Structure {
    Dense,
    /// Exactly `s` nonzero entries on a uniformly random support.
    Sparse(usize),
}

/// Recipe for a planted weight vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantedSpec {
    pub d: usize,
    pub structure: Structure,
    /// Target Euclidean norm of the planted vector.
    pub norm: f64,
    pub seed: u64,
}

/// Draws the planted vector described by `spec`.
///
/// Sparse supports are sampled uniformly at random, nonzero entries are
/// standard normal, and the result is rescaled to the requested l2 norm.
/// Deterministic given `spec.seed` (stream [`STREAM_PLANTED`]).
pub fn make_planted(spec: &PlantedSpec) -> Result<WeightVector> {
    if spec.d == 0 {
        return Err(Error::InvalidSpec("d must be >= 1".into()));
    }
    if !spec.norm.is_finite() || spec.norm <= 0.0 {
        return Err(Error::InvalidSpec(format!(
            "target norm must be positive and finite, got {}",
            spec.norm
        )));
    }
    let mut rng = stream_rng(spec.seed, STREAM_PLANTED);
    let mut entries = vec![0.0; spec.d];
    match spec.structure {
        Structure::Dense => {
            entries = standard_normal_vec(&mut rng, spec.d);
        }
        Structure::Sparse(s) => {
            if s == 0 || s > spec.d {
                return Err(Error::InvalidSpec(format!(
                    "sparsity s = {s} must satisfy 1 <= s <= d = {}",
                    spec.d
                )));
            }
            let mut support: Vec<usize> = rand::seq::index::sample(&mut rng, spec.d, s).into_vec();
            support.sort_unstable();
            let values = standard_normal_vec(&mut rng, s);
            for (&i, &v) in support.iter().zip(values.iter()) {
                entries[i] = v;
            }
        }
    }
    let norm: f64 = entries.iter().map(|x| x * x).sum::<f64>().sqrt();
    // A zero draw has probability zero but would make rescaling undefined.
    if norm == 0.0 {
        return Err(Error::InvalidSpec("degenerate zero draw".into()));
    }
    let scale = spec.norm / norm;
    for e in &mut entries {
        *e *= scale;
    }
    WeightVector::new(entries)
}

/// Feature matrix plus exact ReLU labels of a planted vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Row-major features; row `i` is the sample `x_i`.
    pub features: Array2<f64>,
    /// Labels, all `>= 0`.
    pub labels: Array1<f64>,
    pub seed: u64,
}

fn relu(z: f64) -> f64 {
    z.max(0.0)
}

/// The single dot-product path used for label generation and realizability
/// checks, so the two agree bitwise.
pub(crate) fn row_response(row: ArrayView1<'_, f64>, w: &Array1<f64>) -> f64 {
    row.dot(w)
}

/// i.i.d. standard normal `n x d` matrix; row `i` comes from stream `i` of
/// `seed`, generated in parallel.
pub fn gaussian_matrix(n: usize, d: usize, seed: u64) -> Array2<f64> {
    let mut data = vec![0.0f64; n * d];
    data.par_chunks_mut(d).enumerate().for_each(|(i, chunk)| {
        let mut rng = stream_rng(seed, i as u64);
        for slot in chunk.iter_mut() {
            *slot = rng.sample(rand_distr::StandardNormal);
        }
    });
    Array2::from_shape_vec((n, d), data).expect("shape matches construction")
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn d(&self) -> usize {
        self.features.ncols()
    }

    /// Assembles a dataset from raw parts, enforcing label nonnegativity.
    pub fn from_parts(features: Array2<f64>, labels: Array1<f64>, seed: u64) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} feature rows vs {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if features.nrows() == 0 || features.ncols() == 0 {
            return Err(Error::InvalidSpec("dataset must have n >= 1 and d >= 1".into()));
        }
        if let Some(i) = labels.iter().position(|&y| !y.is_finite() || y < 0.0) {
            return Err(Error::InvalidSpec(format!(
                "label {i} is negative or non-finite"
            )));
        }
        if features.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSpec("non-finite feature entry".into()));
        }
        Ok(Dataset { features, labels, seed })
    }

    /// Generates `n` Gaussian samples labeled by `w_star`.
    pub fn generate(w_star: &WeightVector, n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpec("n must be >= 1".into()));
        }
        if !w_star.is_finite() {
            return Err(Error::InvalidSpec("w* must be finite".into()));
        }
        let features = gaussian_matrix(n, w_star.d(), seed);
        let labels = Array1::from_iter(
            (0..n).map(|i| relu(row_response(features.row(i), &w_star.0))),
        );
        Ok(Dataset { features, labels, seed })
    }

    /// Index of the first label that does not regenerate bitwise from
    /// `w_star`, if any.
    pub fn realizability_defect(&self, w_star: &WeightVector) -> Option<usize> {
        if w_star.d() != self.d() {
            return Some(0);
        }
        (0..self.n()).find(|&i| {
            relu(row_response(self.features.row(i), &w_star.0)) != self.labels[i]
        })
    }

    pub fn to_json(&self, w_star: Option<&WeightVector>) -> DatasetJson {
        DatasetJson {
            d: self.d(),
            n: self.n(),
            seed: self.seed,
            w_star: w_star.map(|w| w.0.to_vec()),
            features: self
                .features
                .rows()
                .into_iter()
                .map(|r| r.to_vec())
                .collect(),
            labels: self.labels.to_vec(),
        }
    }
}

/// On-disk form of a dataset: one JSON object with doubles in shortest
/// round-trip decimal form (serde_json's default float formatting).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetJson {
    pub d: usize,
    pub n: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_star: Option<Vec<f64>>,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
}

impl DatasetJson {
    pub fn into_dataset(self) -> Result<(Dataset, Option<WeightVector>)> {
        if self.features.len() != self.n || self.labels.len() != self.n {
            return Err(Error::Config(format!(
                "field mismatch: n = {} but {} feature rows, {} labels",
                self.n,
                self.features.len(),
                self.labels.len()
            )));
        }
        if let Some(i) = self.features.iter().position(|row| row.len() != self.d) {
            return Err(Error::Config(format!(
                "feature row {i} has length {} but d = {}",
                self.features[i].len(),
                self.d
            )));
        }
        let flat: Vec<f64> = self.features.into_iter().flatten().collect();
        let features = Array2::from_shape_vec((self.n, self.d), flat)
            .map_err(|e| Error::Config(e.to_string()))?;
        let labels = Array1::from_vec(self.labels);
        let w_star = match self.w_star {
            Some(w) => {
                if w.len() != self.d {
                    return Err(Error::Config(format!(
                        "w_star has length {} but d = {}",
                        w.len(),
                        self.d
                    )));
                }
                Some(WeightVector::new(w)?)
            }
            None => None,
        };
        Ok((Dataset::from_parts(features, labels, self.seed)?, w_star))
    }
}
