//! Builders for the canonical flows.
//!
//! - [`from_classical_flow`]: the measure carried by a deterministic cell flow
//!   started from a marginal it preserves.
//! - [`stopping_rotation`]: on the circle, every point rotates at unit speed
//!   for a quarter turn and then stops. Its marginal is uniform at all times
//!   even though no path ever returns to its starting cell.
//! - [`krylov_bogolioubov_average`]: the Cesàro average of the first `n`
//!   shifts of a periodic measure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::stable_sum;
use crate::path_measure::{
    mix, GridMode, Marginal, PathMeasure, SpaceKind, StateSpace, TimeGrid, WEIGHT_TOL,
};

/// How a classical flow moves cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowRule {
    /// A time-homogeneous map applied once per grid step.
    StepMap(Vec<usize>),
    /// Positions sampled at grid indices: `schedule[k][c]` is where the
    /// particle started at `c` sits at index `k`. Row 0 must be the identity.
    Schedule(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteClassicalFlow {
    space: StateSpace,
    rule: FlowRule,
}

impl DiscreteClassicalFlow {
    pub fn new(space: StateSpace, rule: FlowRule) -> Result<Self> {
        let n = space.len();
        let check_map = |m: &[usize]| -> Result<()> {
            if m.len() != n {
                return Err(Error::InvalidPath(format!(
                    "cell map has {} entries for {n} cells",
                    m.len()
                )));
            }
            if let Some(c) = m.iter().find(|&&c| c >= n) {
                return Err(Error::InvalidPath(format!("cell map targets cell {c}")));
            }
            Ok(())
        };
        match &rule {
            FlowRule::StepMap(m) => check_map(m)?,
            FlowRule::Schedule(rows) => {
                if rows.is_empty() {
                    return Err(Error::InvalidPath("empty schedule".into()));
                }
                for row in rows {
                    check_map(row)?;
                }
                if rows[0].iter().enumerate().any(|(c, &p)| c != p) {
                    return Err(Error::InvalidPath(
                        "schedule must start at the identity".into(),
                    ));
                }
            }
        }
        Ok(Self { space, rule })
    }

    pub fn step_map(space: StateSpace, map: Vec<usize>) -> Result<Self> {
        Self::new(space, FlowRule::StepMap(map))
    }

    pub fn identity(space: StateSpace) -> Self {
        Self {
            space,
            rule: FlowRule::StepMap((0..space.len()).collect()),
        }
    }

    /// Rigid rotation by `cells` per step (along the column axis on the torus).
    pub fn rotation(space: StateSpace, cells: i64) -> Self {
        let map = (0..space.len())
            .map(|c| space.offset(c, 1, cells))
            .collect();
        Self {
            space,
            rule: FlowRule::StepMap(map),
        }
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn rule(&self) -> &FlowRule {
        &self.rule
    }

    /// Every map the flow uses is a bijection on cells.
    pub fn is_invertible(&self) -> bool {
        let bij = |m: &[usize]| {
            let mut seen = vec![false; m.len()];
            m.iter().all(|&c| !std::mem::replace(&mut seen[c], true))
        };
        match &self.rule {
            FlowRule::StepMap(m) => bij(m),
            FlowRule::Schedule(rows) => rows.iter().all(|r| bij(r)),
        }
    }

    /// Position at grid index `k` of the particle started at `cell`.
    pub fn position(&self, cell: usize, k: usize) -> Result<usize> {
        match &self.rule {
            FlowRule::StepMap(m) => Ok((0..k).fold(cell, |c, _| m[c])),
            FlowRule::Schedule(rows) => {
                rows.get(k).map(|r| r[cell]).ok_or(Error::IndexOutOfRange {
                    index: k,
                    last: rows.len() - 1,
                })
            }
        }
    }

    /// Largest total-variation distance between `μ` and its pushforward under
    /// the flow's maps.
    pub fn preservation_defect(&self, mu: &Marginal) -> f64 {
        let push = |m: &[usize]| {
            let mut per_cell = vec![Vec::new(); mu.len()];
            for (c, &target) in m.iter().enumerate() {
                per_cell[target].push(mu.masses()[c]);
            }
            let pushed: Vec<f64> = per_cell.into_iter().map(stable_sum).collect();
            0.5 * stable_sum(
                pushed
                    .iter()
                    .zip(mu.masses())
                    .map(|(a, b)| (a - b).abs())
                    .collect(),
            )
        };
        match &self.rule {
            FlowRule::StepMap(m) => push(m),
            FlowRule::Schedule(rows) => rows.iter().map(|r| push(r)).fold(0.0, f64::max),
        }
    }
}

/// Measure induced by a classical flow: one atom per cell `c` with `μ(c) > 0`,
/// weight `μ(c)`, following the flow from `c`.
pub fn from_classical_flow(
    flow: &DiscreteClassicalFlow,
    mu: &Marginal,
    grid: TimeGrid,
) -> Result<PathMeasure> {
    let space = flow.space;
    if mu.len() != space.len() {
        return Err(Error::InvalidWeights(format!(
            "marginal has {} cells, space has {}",
            mu.len(),
            space.len()
        )));
    }
    let deviation = flow.preservation_defect(mu);
    if deviation > WEIGHT_TOL {
        return Err(Error::NotMeasurePreserving { deviation });
    }
    if let FlowRule::Schedule(rows) = &flow.rule {
        if rows.len() < grid.path_len() {
            return Err(Error::InvalidGrid(format!(
                "schedule covers {} grid indices, grid has {}",
                rows.len(),
                grid.path_len()
            )));
        }
    }
    let len = grid.path_len();
    let mut atoms = Vec::with_capacity(space.len());
    for (c, &w) in mu.masses().iter().enumerate() {
        if w > 0.0 {
            let path = (0..len)
                .map(|k| flow.position(c, k))
                .collect::<Result<Vec<_>>>()?;
            atoms.push((path, w));
        }
    }
    PathMeasure::new(space, grid, atoms)
}

/// Number of whole cells travelled after moving a distance `dist` from a
/// cell center, snapping to the containing cell with boundary points going
/// to the lower cell.
pub(crate) fn snapped_offset(dist: f64, cell_width: f64) -> i64 {
    let u = 0.5 + dist / cell_width;
    let r = u.round();
    if (u - r).abs() <= 1e-9 * u.abs().max(1.0) {
        r as i64 - 1
    } else {
        u.floor() as i64
    }
}

/// Arc length after which the stopping rotation freezes (a quarter turn).
pub fn stopping_time(space: &StateSpace) -> f64 {
    space.circumference() / 4.0
}

/// Uniform mixture over starting cells of the rotation that runs at unit
/// speed until a quarter turn and then stops.
///
/// Each atom starts at a cell center `x`; at grid time `t` it sits in the
/// cell containing `x + min(t, C/4)`, with `C` the circumference. All atoms
/// move by the same number of cells at every grid time, so the marginal is
/// uniform throughout.
pub fn stopping_rotation(space: StateSpace, grid: TimeGrid) -> Result<PathMeasure> {
    if space.kind() != SpaceKind::Circle {
        return Err(Error::InvalidSpace(
            "stopping rotation is defined on the circle".into(),
        ));
    }
    grid.require_window()?;
    let stop = stopping_time(&space);
    if grid.horizon() <= stop {
        return Err(Error::HorizonTooShort {
            horizon: grid.horizon(),
            required: stop,
        });
    }
    let n = space.len();
    let offsets: Vec<i64> = (0..grid.path_len())
        .map(|k| snapped_offset(grid.time(k).min(stop), space.cell_width()))
        .collect();
    let w = 1.0 / n as f64;
    let atoms = (0..n).map(|x| (offsets.iter().map(|&o| space.offset(x, 1, o)).collect(), w));
    PathMeasure::new(space, grid, atoms)
}

/// First grid index at which the stopping rotation is frozen.
pub fn stopping_index(space: &StateSpace, grid: &TimeGrid) -> usize {
    let r = stopping_time(space) / grid.dt();
    let c = r.ceil();
    if (r - r.round()).abs() <= 1e-9 * r.max(1.0) {
        r.round() as usize
    } else {
        c as usize
    }
}

/// `(1/n) Σ_{s<n} (Γ_s)^♯ ω` on a periodic grid, `1 ≤ n ≤ N`.
pub fn krylov_bogolioubov_average(omega: &PathMeasure, n: usize) -> Result<PathMeasure> {
    omega.grid().require_periodic()?;
    let big_n = omega.grid().n_steps();
    if n == 0 || n > big_n {
        return Err(Error::Precondition(format!(
            "averaging length {n} must lie in 1..={big_n}"
        )));
    }
    let shifted = (0..n)
        .map(|s| omega.shift(s as i64))
        .collect::<Result<Vec<_>>>()?;
    mix(&shifted, &vec![1.0 / n as f64; n])
}

/// Uniform measure over the `N` rotations of a periodic path.
pub fn orbit_measure(space: StateSpace, grid: TimeGrid, cells: Vec<usize>) -> Result<PathMeasure> {
    if grid.mode() != GridMode::Periodic {
        return Err(Error::Mode {
            expected: "periodic",
        });
    }
    let omega = PathMeasure::dirac(space, grid, cells)?;
    krylov_bogolioubov_average(&omega, grid.n_steps())
}
