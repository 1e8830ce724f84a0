use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::stable_sum;

/// Normalization tolerance for probability vectors and measures.
pub const WEIGHT_TOL: f64 = 1e-12;

/// Single-time distribution of a path measure over cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Marginal {
    masses: Vec<f64>,
}

impl Marginal {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidWeights("empty marginal".into()));
        }
        if masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::InvalidWeights(
                "marginal masses must be finite and nonnegative".into(),
            ));
        }
        let total = stable_sum(masses.clone());
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidWeights(format!(
                "marginal masses sum to {total}, expected 1"
            )));
        }
        Ok(Self { masses })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            masses: vec![1.0 / n as f64; n],
        }
    }

    pub(crate) fn from_raw(masses: Vec<f64>) -> Self {
        Self { masses }
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn mass_of(&self, cells: impl IntoIterator<Item = usize>) -> f64 {
        stable_sum(
            cells
                .into_iter()
                .filter_map(|c| self.masses.get(c).copied())
                .collect(),
        )
    }

    /// Total-variation distance `½ Σ |μ(c) − ν(c)|`.
    pub fn tv_distance(&self, other: &Marginal) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        0.5 * stable_sum(
            self.masses
                .iter()
                .zip(&other.masses)
                .map(|(a, b)| (a - b).abs())
                .collect(),
        )
    }
}

/// A real function on cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawObservable")]
pub struct Observable {
    values: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObservable {
    values: Vec<f64>,
}

impl TryFrom<RawObservable> for Observable {
    type Error = Error;

    fn try_from(raw: RawObservable) -> Result<Self> {
        Self::new(raw.values)
    }
}

impl Observable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidObservable("no values".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidObservable("non-finite value".into()));
        }
        Ok(Self { values })
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self { values: vec![c; n] }
    }

    pub fn indicator(n: usize, cells: impl IntoIterator<Item = usize>) -> Self {
        let mut values = vec![0.0; n];
        for c in cells {
            if c < n {
                values[c] = 1.0;
            }
        }
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn at(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| *v >= 0.0)
    }

    /// `∫ f dμ`.
    pub fn integrate(&self, mu: &Marginal) -> f64 {
        stable_sum(
            self.values
                .iter()
                .zip(mu.masses())
                .map(|(f, m)| f * m)
                .collect(),
        )
    }

    /// `‖f‖_{L¹(μ)}`.
    pub fn l1_norm(&self, mu: &Marginal) -> f64 {
        stable_sum(
            self.values
                .iter()
                .zip(mu.masses())
                .map(|(f, m)| f.abs() * m)
                .collect(),
        )
    }

    /// `a·self + b·other`, cellwise.
    pub fn affine(&self, a: f64, other: &Observable, b: f64) -> Observable {
        Observable {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.values.len() == n {
            Ok(())
        } else {
            Err(Error::InvalidObservable(format!(
                "observable has {} values for {n} cells",
                self.values.len()
            )))
        }
    }
}
