use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::grid::TimeGrid;
use crate::error::{Error, Result};

/// One cylinder constraint: the path sits in `cells` at grid index `time`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CylinderConstraint {
    pub time: usize,
    pub cells: BTreeSet<usize>,
}

/// A path event: a deterministic predicate on discrete paths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PathEvent {
    /// Intersection of cylinder constraints. No constraints means every path.
    Cylinder(Vec<CylinderConstraint>),
    /// An explicit set of paths.
    Paths(BTreeSet<Vec<usize>>),
    Complement(Box<PathEvent>),
}

impl PathEvent {
    pub fn everything() -> Self {
        PathEvent::Cylinder(Vec::new())
    }

    pub fn nothing() -> Self {
        PathEvent::Paths(BTreeSet::new())
    }

    /// `{z : z(t_k) ∈ cells}`.
    pub fn at_time(time: usize, cells: impl IntoIterator<Item = usize>) -> Self {
        PathEvent::Cylinder(vec![CylinderConstraint {
            time,
            cells: cells.into_iter().collect(),
        }])
    }

    /// `{z : z(0) ∈ cells}`.
    pub fn starts_in(cells: impl IntoIterator<Item = usize>) -> Self {
        Self::at_time(0, cells)
    }

    pub fn paths(paths: impl IntoIterator<Item = Vec<usize>>) -> Self {
        PathEvent::Paths(paths.into_iter().collect())
    }

    pub fn complement(self) -> Self {
        match self {
            PathEvent::Complement(inner) => *inner,
            other => PathEvent::Complement(Box::new(other)),
        }
    }

    pub fn contains(&self, path: &[usize]) -> bool {
        match self {
            PathEvent::Cylinder(constraints) => constraints.iter().all(|c| {
                path.get(c.time)
                    .map(|cell| c.cells.contains(cell))
                    .unwrap_or(false)
            }),
            PathEvent::Paths(set) => set.contains(path),
            PathEvent::Complement(inner) => !inner.contains(path),
        }
    }

    /// Checks that every cylinder time exists on `grid`, so that evaluation
    /// is total.
    pub fn validate(&self, grid: &TimeGrid) -> Result<()> {
        match self {
            PathEvent::Cylinder(constraints) => {
                for c in constraints {
                    grid.check_index(c.time)?;
                }
                Ok(())
            }
            PathEvent::Paths(set) => {
                if let Some(p) = set.iter().find(|p| p.len() != grid.path_len()) {
                    return Err(Error::InvalidEvent(format!(
                        "path of length {} on a grid with {} samples",
                        p.len(),
                        grid.path_len()
                    )));
                }
                Ok(())
            }
            PathEvent::Complement(inner) => inner.validate(grid),
        }
    }

    /// The preimage `Γ^{-s}Φ = {z : Γ^s z ∈ Φ}`, where `Γ^s` shifts a path
    /// left by `s` samples.
    ///
    /// Periodic grids accept any `s` (taken modulo `N`). Window grids accept
    /// only cylinder events, and only when every shifted time stays on the
    /// grid.
    pub fn shift_preimage(&self, s: usize, grid: &TimeGrid) -> Result<PathEvent> {
        match self {
            PathEvent::Cylinder(constraints) => {
                let mut out = Vec::with_capacity(constraints.len());
                for c in constraints {
                    let time = if grid.is_periodic() {
                        (c.time + s) % grid.path_len()
                    } else {
                        let t = c.time + s;
                        grid.check_index(t)?;
                        t
                    };
                    out.push(CylinderConstraint {
                        time,
                        cells: c.cells.clone(),
                    });
                }
                Ok(PathEvent::Cylinder(out))
            }
            PathEvent::Paths(set) => {
                grid.require_periodic()?;
                let len = grid.path_len();
                let s = s % len;
                Ok(PathEvent::Paths(
                    set.iter()
                        .map(|p| {
                            let mut q = p.clone();
                            q.rotate_right(s);
                            q
                        })
                        .collect(),
                ))
            }
            PathEvent::Complement(inner) => Ok(inner.shift_preimage(s, grid)?.complement()),
        }
    }

    /// The image `Γ^s Φ`; defined on periodic grids only.
    pub fn shift_image(&self, s: usize, grid: &TimeGrid) -> Result<PathEvent> {
        grid.require_periodic()?;
        let n = grid.path_len();
        self.shift_preimage((n - s % n) % n, grid)
    }
}
