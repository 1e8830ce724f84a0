use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::event::PathEvent;
use super::grid::TimeGrid;
use super::space::StateSpace;
use super::values::{Marginal, WEIGHT_TOL};
use crate::error::{Error, Result};
use crate::par::{self, stable_sum};

/// Cell sequence sampled on a time grid.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DiscretePath(Vec<usize>);

impl DiscretePath {
    pub fn new(cells: Vec<usize>) -> Self {
        Self(cells)
    }

    pub fn cells(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn at(&self, k: usize) -> usize {
        self.0[k]
    }

    pub fn into_cells(self) -> Vec<usize> {
        self.0
    }

    /// `Γ^s`: the sequence rotated left by `s` (periodic grids).
    pub fn rotated(&self, s: usize) -> DiscretePath {
        let mut v = self.0.clone();
        if !v.is_empty() {
            let len = v.len();
            v.rotate_left(s % len);
        }
        DiscretePath(v)
    }

    pub fn is_constant(&self) -> bool {
        self.0.windows(2).all(|w| w[0] == w[1])
    }
}

impl From<Vec<usize>> for DiscretePath {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub cells: DiscretePath,
    pub weight: f64,
}

/// Finitely supported probability measure on discrete paths.
///
/// Always held in canonical form: atoms sorted lexicographically by cell
/// sequence, duplicates merged, zero weights dropped. Merged weights are
/// accumulated with [`stable_sum`], so the canonical form depends only on the
/// multiset of contributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure", into = "RawMeasure")]
pub struct PathMeasure {
    space: StateSpace,
    grid: TimeGrid,
    atoms: Vec<Atom>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeasure {
    space: StateSpace,
    grid: TimeGrid,
    atoms: Vec<Atom>,
}

impl TryFrom<RawMeasure> for PathMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        PathMeasure::new(
            raw.space,
            raw.grid,
            raw.atoms
                .into_iter()
                .map(|a| (a.cells.into_cells(), a.weight)),
        )
    }
}

impl From<PathMeasure> for RawMeasure {
    fn from(q: PathMeasure) -> Self {
        RawMeasure {
            space: q.space,
            grid: q.grid,
            atoms: q.atoms,
        }
    }
}

/// Outcome of an incompressibility check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncompressibilityReport {
    pub max_tv_deviation: f64,
    pub worst_time: usize,
    pub pass: bool,
}

impl PathMeasure {
    /// Builds a measure from `(cells, weight)` pairs and canonicalizes it.
    pub fn new(
        space: StateSpace,
        grid: TimeGrid,
        atoms: impl IntoIterator<Item = (Vec<usize>, f64)>,
    ) -> Result<Self> {
        let len = grid.path_len();
        let mut merged: BTreeMap<Vec<usize>, Vec<f64>> = BTreeMap::new();
        for (cells, weight) in atoms {
            if !(weight.is_finite() && weight >= 0.0) {
                return Err(Error::InvalidWeights(format!(
                    "weight {weight} is not finite and nonnegative"
                )));
            }
            if cells.len() != len {
                return Err(Error::InvalidPath(format!(
                    "path has {} samples, grid expects {len}",
                    cells.len()
                )));
            }
            if let Some(c) = cells.iter().find(|&&c| !space.contains(c)) {
                return Err(Error::InvalidPath(format!(
                    "cell {c} outside a space of {} cells",
                    space.len()
                )));
            }
            if weight > 0.0 {
                merged.entry(cells).or_default().push(weight);
            }
        }
        let atoms: Vec<Atom> = merged
            .into_iter()
            .map(|(cells, ws)| Atom {
                cells: DiscretePath(cells),
                weight: stable_sum(ws),
            })
            .collect();
        if atoms.is_empty() {
            return Err(Error::InvalidWeights("measure has no mass".into()));
        }
        let total = stable_sum(atoms.iter().map(|a| a.weight).collect());
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { space, grid, atoms })
    }

    /// Point mass on a single path.
    pub fn dirac(space: StateSpace, grid: TimeGrid, cells: Vec<usize>) -> Result<Self> {
        Self::new(space, grid, [(cells, 1.0)])
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        stable_sum(self.atoms.iter().map(|a| a.weight).collect())
    }

    pub fn weight_of(&self, cells: &[usize]) -> f64 {
        self.atoms
            .binary_search_by(|a| a.cells.cells().cmp(cells))
            .map(|i| self.atoms[i].weight)
            .unwrap_or(0.0)
    }

    fn same_frame(&self, other: &PathMeasure) -> bool {
        self.space == other.space && self.grid == other.grid
    }

    /// Distribution of `z(t_k)`.
    pub fn marginal_at(&self, k: usize) -> Result<Marginal> {
        self.grid.check_index(k)?;
        let mut per_cell: Vec<Vec<f64>> = vec![Vec::new(); self.space.len()];
        for a in &self.atoms {
            per_cell[a.cells.at(k)].push(a.weight);
        }
        Ok(Marginal::from_raw(
            per_cell.into_iter().map(stable_sum).collect(),
        ))
    }

    /// Marginals at every grid index.
    pub fn marginals(&self) -> Vec<Marginal> {
        par::map_range(self.grid.path_len(), |k| {
            self.marginal_at(k).expect("index on grid")
        })
    }

    /// Largest total-variation distance between the time-`k` marginal and the
    /// time-0 marginal over all grid indices.
    pub fn check_incompressible(&self, tol: f64) -> IncompressibilityReport {
        let marginals = self.marginals();
        let base = &marginals[0];
        let mut worst = (0.0, 0usize);
        for (k, m) in marginals.iter().enumerate().skip(1) {
            let d = m.tv_distance(base);
            if d > worst.0 {
                worst = (d, k);
            }
        }
        IncompressibilityReport {
            max_tv_deviation: worst.0,
            worst_time: worst.1,
            pass: worst.0 <= tol,
        }
    }

    pub fn is_incompressible(&self, tol: f64) -> bool {
        self.check_incompressible(tol).pass
    }

    /// Pushforward under `Γ^s`: every atom rotated left by `s` samples.
    /// Negative `s` shifts backwards. Periodic grids only.
    pub fn shift(&self, s: i64) -> Result<PathMeasure> {
        self.grid.require_periodic()?;
        let n = self.grid.path_len() as i64;
        let s = s.rem_euclid(n) as usize;
        let mut atoms: Vec<Atom> = self
            .atoms
            .iter()
            .map(|a| Atom {
                cells: a.cells.rotated(s),
                weight: a.weight,
            })
            .collect();
        atoms.sort_by(|a, b| a.cells.cmp(&b.cells));
        Ok(PathMeasure {
            space: self.space,
            grid: self.grid,
            atoms,
        })
    }

    /// `q(Φ)`.
    pub fn event_mass(&self, event: &PathEvent) -> Result<f64> {
        event.validate(&self.grid)?;
        Ok(stable_sum(
            self.atoms
                .iter()
                .filter(|a| event.contains(a.cells.cells()))
                .map(|a| a.weight)
                .collect(),
        ))
    }

    /// `q(· | Φ)`: atoms restricted to `Φ`, renormalized by `q(Φ)`.
    pub fn condition(&self, event: &PathEvent) -> Result<PathMeasure> {
        let mass = self.event_mass(event)?;
        if mass <= 0.0 {
            return Err(Error::ZeroMass);
        }
        PathMeasure::new(
            self.space,
            self.grid,
            self.atoms
                .iter()
                .filter(|a| event.contains(a.cells.cells()))
                .map(|a| (a.cells.cells().to_vec(), a.weight / mass)),
        )
    }

    /// Same support and weights within `tol` on every atom.
    pub fn approx_eq(&self, other: &PathMeasure, tol: f64) -> bool {
        self.same_frame(other)
            && self.atoms.len() == other.atoms.len()
            && self
                .atoms
                .iter()
                .zip(&other.atoms)
                .all(|(a, b)| a.cells == b.cells && (a.weight - b.weight).abs() <= tol)
    }

    /// Largest weight discrepancy against another measure on the union of
    /// supports.
    pub fn max_weight_gap(&self, other: &PathMeasure) -> f64 {
        let mut gap: f64 = 0.0;
        for a in &self.atoms {
            gap = gap.max((a.weight - other.weight_of(a.cells.cells())).abs());
        }
        for b in &other.atoms {
            gap = gap.max((b.weight - self.weight_of(b.cells.cells())).abs());
        }
        gap
    }
}

/// Convex combination `Σ λᵢ qᵢ` of measures on a common space and grid.
pub fn mix(measures: &[PathMeasure], weights: &[f64]) -> Result<PathMeasure> {
    if measures.is_empty() || measures.len() != weights.len() {
        return Err(Error::InvalidWeights(format!(
            "{} measures with {} weights",
            measures.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidWeights(
            "mixture weights must be nonnegative".into(),
        ));
    }
    let total = stable_sum(weights.to_vec());
    if (total - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::InvalidWeights(format!(
            "mixture weights sum to {total}, expected 1"
        )));
    }
    let first = &measures[0];
    if measures.iter().any(|m| !m.same_frame(first)) {
        return Err(Error::Mismatch);
    }
    let atoms = measures
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > 0.0)
        .flat_map(|(m, &w)| {
            m.atoms
                .iter()
                .map(move |a| (a.cells.cells().to_vec(), w * a.weight))
        });
    PathMeasure::new(first.space, first.grid, atoms)
}
