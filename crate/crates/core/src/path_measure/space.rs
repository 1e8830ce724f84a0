use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Circle,
    Torus2d,
}

/// Uniform grid discretization of the circle or the flat 2-torus.
///
/// Cells are indexed `0..len()`. On the torus, cell `row * n_cells + col`
/// sits at grid position `(row, col)`. Distances are geodesic distances
/// between cell centers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace")]
pub struct StateSpace {
    kind: SpaceKind,
    n_cells: usize,
    circumference: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpace {
    kind: SpaceKind,
    n_cells: usize,
    #[serde(default = "two_pi")]
    circumference: f64,
}

fn two_pi() -> f64 {
    2.0 * PI
}

impl TryFrom<RawSpace> for StateSpace {
    type Error = Error;

    fn try_from(raw: RawSpace) -> Result<Self> {
        Self::new(raw.kind, raw.n_cells, raw.circumference)
    }
}

impl StateSpace {
    pub fn new(kind: SpaceKind, n_cells: usize, circumference: f64) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::InvalidSpace("n_cells must be positive".into()));
        }
        if !(circumference.is_finite() && circumference > 0.0) {
            return Err(Error::InvalidSpace(format!(
                "circumference must be positive and finite, got {circumference}"
            )));
        }
        Ok(Self {
            kind,
            n_cells,
            circumference,
        })
    }

    /// Circle of circumference 2π split into `n_cells` arcs.
    pub fn circle(n_cells: usize) -> Result<Self> {
        Self::new(SpaceKind::Circle, n_cells, 2.0 * PI)
    }

    /// Flat torus with `n_cells` cells per side, side length 2π.
    pub fn torus(n_cells: usize) -> Result<Self> {
        Self::new(SpaceKind::Torus2d, n_cells, 2.0 * PI)
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    /// Cells per dimension.
    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn circumference(&self) -> f64 {
        self.circumference
    }

    /// Total number of cells.
    pub fn len(&self) -> usize {
        match self.kind {
            SpaceKind::Circle => self.n_cells,
            SpaceKind::Torus2d => self.n_cells * self.n_cells,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_width(&self) -> f64 {
        self.circumference / self.n_cells as f64
    }

    pub fn cell_volume(&self) -> f64 {
        match self.kind {
            SpaceKind::Circle => self.cell_width(),
            SpaceKind::Torus2d => self.cell_width() * self.cell_width(),
        }
    }

    pub fn total_volume(&self) -> f64 {
        match self.kind {
            SpaceKind::Circle => self.circumference,
            SpaceKind::Torus2d => self.circumference * self.circumference,
        }
    }

    pub fn contains(&self, cell: usize) -> bool {
        cell < self.len()
    }

    /// Signed shortest displacement from `i` to `j` along one periodic axis,
    /// in cells. Antipodal ties resolve to the positive direction.
    pub(crate) fn axis_displacement(&self, i: usize, j: usize) -> i64 {
        let n = self.n_cells as i64;
        let mut d = (j as i64 - i as i64).rem_euclid(n);
        if 2 * d > n {
            d -= n;
        }
        d
    }

    /// Per-axis signed displacements in cells (one entry on the circle, two
    /// on the torus).
    pub fn displacement(&self, i: usize, j: usize) -> Vec<i64> {
        match self.kind {
            SpaceKind::Circle => vec![self.axis_displacement(i, j)],
            SpaceKind::Torus2d => {
                let n = self.n_cells;
                vec![
                    self.axis_displacement(i / n, j / n),
                    self.axis_displacement(i % n, j % n),
                ]
            }
        }
    }

    /// Squared geodesic distance in cell units (an integer).
    pub fn steps_sq(&self, i: usize, j: usize) -> u64 {
        self.displacement(i, j)
            .into_iter()
            .map(|d| (d * d) as u64)
            .sum()
    }

    pub fn distance_sq(&self, i: usize, j: usize) -> f64 {
        let w = self.cell_width();
        self.steps_sq(i, j) as f64 * w * w
    }

    pub fn geodesic_distance(&self, i: usize, j: usize) -> f64 {
        self.distance_sq(i, j).sqrt()
    }

    /// Moves `cell` by `steps` cells along the circle (or along the column
    /// axis `axis = 1` / row axis `axis = 0` on the torus).
    pub fn offset(&self, cell: usize, axis: usize, steps: i64) -> usize {
        let n = self.n_cells as i64;
        match self.kind {
            SpaceKind::Circle => (cell as i64 + steps).rem_euclid(n) as usize,
            SpaceKind::Torus2d => {
                let (mut r, mut c) = ((cell / self.n_cells) as i64, (cell % self.n_cells) as i64);
                if axis == 0 {
                    r = (r + steps).rem_euclid(n);
                } else {
                    c = (c + steps).rem_euclid(n);
                }
                (r * n + c) as usize
            }
        }
    }
}
