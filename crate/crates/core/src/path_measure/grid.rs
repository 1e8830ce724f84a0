use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the time axis is closed off.
///
/// `Window` paths live on `[0, T]` and carry `N + 1` samples. `Periodic` paths
/// live on a time circle of length `T` and carry `N` samples, so shifts act as
/// exact rotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridMode {
    Window,
    Periodic,
}

impl GridMode {
    pub fn name(self) -> &'static str {
        match self {
            GridMode::Window => "window",
            GridMode::Periodic => "periodic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct TimeGrid {
    horizon: f64,
    n_steps: usize,
    mode: GridMode,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    horizon: f64,
    n_steps: usize,
    mode: GridMode,
}

impl TryFrom<RawGrid> for TimeGrid {
    type Error = Error;

    fn try_from(raw: RawGrid) -> Result<Self> {
        Self::new(raw.horizon, raw.n_steps, raw.mode)
    }
}

impl TimeGrid {
    pub fn new(horizon: f64, n_steps: usize, mode: GridMode) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        if n_steps == 0 {
            return Err(Error::InvalidGrid("n_steps must be positive".into()));
        }
        Ok(Self {
            horizon,
            n_steps,
            mode,
        })
    }

    pub fn window(horizon: f64, n_steps: usize) -> Result<Self> {
        Self::new(horizon, n_steps, GridMode::Window)
    }

    pub fn periodic(horizon: f64, n_steps: usize) -> Result<Self> {
        Self::new(horizon, n_steps, GridMode::Periodic)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn mode(&self) -> GridMode {
        self.mode
    }

    pub fn is_periodic(&self) -> bool {
        self.mode == GridMode::Periodic
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    /// Number of samples stored per path.
    pub fn path_len(&self) -> usize {
        match self.mode {
            GridMode::Window => self.n_steps + 1,
            GridMode::Periodic => self.n_steps,
        }
    }

    pub fn last_index(&self) -> usize {
        self.path_len() - 1
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    pub(crate) fn require_periodic(&self) -> Result<()> {
        if self.is_periodic() {
            Ok(())
        } else {
            Err(Error::Mode {
                expected: "periodic",
            })
        }
    }

    pub(crate) fn require_window(&self) -> Result<()> {
        if self.is_periodic() {
            Err(Error::Mode { expected: "window" })
        } else {
            Ok(())
        }
    }

    pub(crate) fn check_index(&self, k: usize) -> Result<()> {
        if k > self.last_index() {
            Err(Error::IndexOutOfRange {
                index: k,
                last: self.last_index(),
            })
        } else {
            Ok(())
        }
    }
}
