//! Oblivious loss-sequence generators.
//!
//! Every generator materializes the full `T × n` loss matrix up front as a
//! pure function of its configuration, which enforces obliviousness by
//! construction and makes best-arm-in-hindsight accounting exact. The kinds
//! stress different aspects of scale-freeness: magnitude (`Rescaled`),
//! sparsity (`SparseHeavy`), sign (`SignMixed`) and drift
//! (`DriftingBestArm`).

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Shape of the generated sequence.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum AdversaryKind {
    /// Independent entries uniform on `[0, 1]`.
    BoundedUniform,
    /// Bernoulli losses; arm 0 has mean `(1-gap)/2`, the rest `(1+gap)/2`.
    BernoulliGap { gap: f64 },
    /// Each round exactly `active` coordinates equal `±magnitude`, rest 0.
    SparseHeavy { active: usize, magnitude: f64 },
    /// Independent entries uniform on `[-magnitude, magnitude]`.
    SignMixed { magnitude: f64 },
    /// The cheapest arm rotates every `period` rounds; cheap arm draws from
    /// `[0, 1/2)`, the rest from `[1/2, 1)`.
    DriftingBestArm { period: usize },
    /// Exactly `factor ×` the matrix the inner kind generates.
    Rescaled {
        factor: f64,
        inner: Box<AdversaryKind>,
    },
}

/// Full description of a loss sequence: kind, dimensions and seed.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AdversaryConfig {
    pub kind: AdversaryKind,
    pub arms: usize,
    pub horizon: usize,
    pub seed: u64,
}

/// Materialized `horizon × arms` loss matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LossMatrix {
    arms: usize,
    data: Vec<f64>,
}

impl LossMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let arms = rows.first().map(|r| r.len()).unwrap_or(0);
        if arms == 0 {
            return Err(Error::InvalidParameter(
                "loss matrix needs at least one round and one arm".into(),
            ));
        }
        let mut data = Vec::with_capacity(rows.len() * arms);
        for (t, row) in rows.iter().enumerate() {
            if row.len() != arms {
                return Err(Error::InvalidParameter(format!(
                    "row {t} has {} entries, expected {arms}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { arms, data })
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn horizon(&self) -> usize {
        self.data.len() / self.arms
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.arms..(t + 1) * self.arms]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.arms)
    }

    /// Index of the best fixed arm in hindsight (lowest total loss, ties
    /// broken toward the lowest index).
    pub fn best_arm(&self) -> usize {
        let totals = self.arm_totals();
        let mut best = 0;
        for (i, &v) in totals.iter().enumerate() {
            if v < totals[best] {
                best = i;
            }
        }
        best
    }

    pub fn arm_totals(&self) -> Vec<f64> {
        let mut totals = vec![0.0; self.arms];
        for row in self.rows() {
            for (t, &l) in totals.iter_mut().zip(row.iter()) {
                *t += l;
            }
        }
        totals
    }

    /// Write as CSV: header row of arm indices, then one row per round.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io_err = |source: csv::Error| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut writer = csv::Writer::from_path(path).map_err(io_err)?;
        let header: Vec<String> = (0..self.arms).map(|i| i.to_string()).collect();
        writer.write_record(&header).map_err(io_err)?;
        for row in self.rows() {
            let record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writer.write_record(&record).map_err(io_err)?;
        }
        writer.flush().map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(())
    }

    /// Read a matrix previously written by [`LossMatrix::write_csv`].
    pub fn read_csv(path: &Path) -> Result<Self> {
        let csv_err = |source: csv::Error| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
        let arms = reader.headers().map_err(csv_err)?.len();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(csv_err)?;
            let row: std::result::Result<Vec<f64>, _> =
                record.iter().map(|f| f.parse::<f64>()).collect();
            let row = row.map_err(|e| {
                Error::InvalidParameter(format!("bad float in {}: {e}", path.display()))
            })?;
            rows.push(row);
        }
        if rows.is_empty() || arms == 0 {
            return Err(Error::InvalidParameter(format!(
                "{} contains no loss rows",
                path.display()
            )));
        }
        Self::from_rows(rows)
    }
}

/// Norm statistics of a loss sequence, as used by the regret bounds.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LossNorms {
    /// `max_t ‖l_t‖_∞`.
    pub linf: f64,
    /// `Σ_t ‖l_t‖₁`.
    pub l1: f64,
    /// `Σ_t ‖l_t‖₂²`.
    pub l2: f64,
    /// `‖Σ_t l_t‖_∞`.
    pub sinf: f64,
}

/// Compute `(L∞, L₁, L₂, S∞)` for a loss matrix.
pub fn norms(matrix: &LossMatrix) -> LossNorms {
    let mut linf = 0.0f64;
    let mut l1 = 0.0;
    let mut l2 = 0.0;
    let mut sums = vec![0.0; matrix.arms()];
    for row in matrix.rows() {
        for (i, &v) in row.iter().enumerate() {
            linf = linf.max(v.abs());
            l1 += v.abs();
            l2 += v * v;
            sums[i] += v;
        }
    }
    let sinf = sums.iter().fold(0.0f64, |m, &s| m.max(s.abs()));
    LossNorms { linf, l1, l2, sinf }
}

fn validate(config: &AdversaryConfig) -> Result<()> {
    if config.arms == 0 {
        return Err(Error::InvalidParameter("arms must be positive".into()));
    }
    if config.horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be positive".into()));
    }
    validate_kind(&config.kind, config.arms)
}

fn validate_kind(kind: &AdversaryKind, arms: usize) -> Result<()> {
    match kind {
        AdversaryKind::BoundedUniform => Ok(()),
        AdversaryKind::BernoulliGap { gap } => {
            if !(0.0..=1.0).contains(gap) {
                return Err(Error::InvalidParameter(format!(
                    "gap = {gap} must lie in [0, 1]"
                )));
            }
            Ok(())
        }
        AdversaryKind::SparseHeavy { active, magnitude } => {
            if *active == 0 || *active > arms {
                return Err(Error::InvalidParameter(format!(
                    "active = {active} must lie in 1..={arms}"
                )));
            }
            if !(magnitude.is_finite() && *magnitude > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "magnitude = {magnitude} must be positive"
                )));
            }
            Ok(())
        }
        AdversaryKind::SignMixed { magnitude } => {
            if !(magnitude.is_finite() && *magnitude > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "magnitude = {magnitude} must be positive"
                )));
            }
            Ok(())
        }
        AdversaryKind::DriftingBestArm { period } => {
            if *period == 0 {
                return Err(Error::InvalidParameter("period must be positive".into()));
            }
            Ok(())
        }
        AdversaryKind::Rescaled { factor, inner } => {
            if !(factor.is_finite() && *factor != 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "rescale factor = {factor} must be finite and nonzero"
                )));
            }
            validate_kind(inner, arms)
        }
    }
}

fn generate_kind(kind: &AdversaryKind, arms: usize, horizon: usize, seed: u64) -> LossMatrix {
    if let AdversaryKind::Rescaled { factor, inner } = kind {
        let mut matrix = generate_kind(inner, arms, horizon, seed);
        for v in &mut matrix.data {
            *v *= factor;
        }
        return matrix;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(arms * horizon);
    match kind {
        AdversaryKind::BoundedUniform => {
            for _ in 0..arms * horizon {
                data.push(rng.random::<f64>());
            }
        }
        AdversaryKind::BernoulliGap { gap } => {
            let p_best = (1.0 - gap) / 2.0;
            let p_rest = (1.0 + gap) / 2.0;
            for _ in 0..horizon {
                for i in 0..arms {
                    let p = if i == 0 { p_best } else { p_rest };
                    data.push(if rng.random::<f64>() < p { 1.0 } else { 0.0 });
                }
            }
        }
        AdversaryKind::SparseHeavy { active, magnitude } => {
            for _ in 0..horizon {
                let start = data.len();
                data.resize(start + arms, 0.0);
                // Sample `active` distinct coordinates.
                let mut chosen = Vec::with_capacity(*active);
                while chosen.len() < *active {
                    let i = rng.random_range(0..arms);
                    if !chosen.contains(&i) {
                        chosen.push(i);
                    }
                }
                for i in chosen {
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    data[start + i] = sign * magnitude;
                }
            }
        }
        AdversaryKind::SignMixed { magnitude } => {
            for _ in 0..arms * horizon {
                data.push(rng.random_range(-magnitude..*magnitude));
            }
        }
        AdversaryKind::DriftingBestArm { period } => {
            for t in 0..horizon {
                let cheap = (t / period) % arms;
                for i in 0..arms {
                    let u = rng.random::<f64>();
                    data.push(if i == cheap { 0.5 * u } else { 0.5 + 0.5 * u });
                }
            }
        }
        AdversaryKind::Rescaled { .. } => unreachable!("handled above"),
    }
    LossMatrix { arms, data }
}

/// Materialize the loss sequence described by `config`.
///
/// Deterministic: the output is a pure function of the configuration.
pub fn generate(config: &AdversaryConfig) -> Result<LossMatrix> {
    validate(config)?;
    Ok(generate_kind(
        &config.kind,
        config.arms,
        config.horizon,
        config.seed,
    ))
}
