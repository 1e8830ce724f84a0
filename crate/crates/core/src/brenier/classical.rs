use serde::{Deserialize, Serialize};

use super::{eta_from_map, kinetic_energy};
use crate::error::{Error, Result};
use crate::path_measure::{Observable, PathMeasure, StateSpace, TimeGrid};

/// How antipodal ties were resolved and what the interpolation costs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpolationBranch {
    /// `+1` or `−1`: direction taken by displacements of exactly half a turn.
    pub tie_direction: i8,
    pub energy: f64,
    /// Every intermediate position map is a bijection, so the interpolated
    /// measure is incompressible.
    pub incompressible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Realization {
    /// Constant-speed geodesic interpolation, rounded to cells.
    Geodesic,
    /// Every particle waits at its start and jumps to `h(x)` in the last step.
    HoldThenJump,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalFlowEnergy {
    /// Kinetic energy of `measure`.
    pub value: f64,
    pub realization: Realization,
    /// One branch, or two when some displacement is antipodal.
    pub branches: Vec<InterpolationBranch>,
    /// The incompressible measure realizing `h` whose energy is `value`.
    pub measure: PathMeasure,
}

/// `round(d·k/N)` with halves rounded up.
fn interpolated_offset(d: i64, k: usize, n_steps: usize) -> i64 {
    let (k, n) = (k as i64, n_steps as i64);
    (2 * d * k + n).div_euclid(2 * n)
}

fn geodesic_paths(h: &[usize], space: &StateSpace, grid: &TimeGrid, tie: i64) -> Vec<Vec<usize>> {
    let half = space.n_cells() as i64;
    h.iter()
        .enumerate()
        .map(|(x, &y)| {
            let disp: Vec<i64> = space
                .displacement(x, y)
                .into_iter()
                .map(|d| {
                    if 2 * d.abs() == half {
                        tie * d.abs()
                    } else {
                        d
                    }
                })
                .collect();
            (0..grid.path_len())
                .map(|k| {
                    disp.iter().enumerate().fold(x, |c, (axis, &d)| {
                        // On the torus the first entry is the row axis.
                        let axis = if disp.len() == 1 { 1 } else { axis };
                        space.offset(c, axis, interpolated_offset(d, k, grid.n_steps()))
                    })
                })
                .collect()
        })
        .collect()
}

fn has_antipodal(h: &[usize], space: &StateSpace) -> bool {
    let half = space.n_cells() as i64;
    h.iter()
        .enumerate()
        .any(|(x, &y)| space.displacement(x, y).iter().any(|d| 2 * d.abs() == half))
}

fn positions_bijective(paths: &[Vec<usize>], n: usize) -> bool {
    let len = paths.first().map_or(0, |p| p.len());
    (0..len).all(|k| {
        let mut seen = vec![false; n];
        paths
            .iter()
            .all(|p| !std::mem::replace(&mut seen[p[k]], true))
    })
}

/// Energy of a deterministic flow carrying each cell `x` to `h(x)` over the
/// window grid, with uniform starting mass.
///
/// Particles follow constant-speed geodesics rounded to cells. When rounding
/// makes two particles share a cell at some time the interpolation is not
/// incompressible; the energy then falls back to the hold-then-jump flow,
/// which is always a valid classical flow for `h`. Either way the returned
/// measure is feasible for the minimum-action problem with coupling `η_h`.
pub fn classical_flow_energy(
    h: &[usize],
    space: StateSpace,
    grid: TimeGrid,
) -> Result<ClassicalFlowEnergy> {
    grid.require_window()?;
    eta_from_map(h, &space)?;
    let n = space.len();
    let w = 1.0 / n as f64;
    let ones = Observable::constant(n, 1.0);
    let build =
        |paths: Vec<Vec<usize>>| PathMeasure::new(space, grid, paths.into_iter().map(|p| (p, w)));

    let ties: &[i64] = if has_antipodal(h, &space) {
        &[1, -1]
    } else {
        &[1]
    };
    let mut branches = Vec::new();
    let mut best: Option<(f64, PathMeasure)> = None;
    for &tie in ties {
        let paths = geodesic_paths(h, &space, &grid, tie);
        let incompressible = positions_bijective(&paths, n);
        let q = build(paths)?;
        let energy = kinetic_energy(&q, &ones)?;
        branches.push(InterpolationBranch {
            tie_direction: tie as i8,
            energy,
            incompressible,
        });
        if incompressible && best.as_ref().map_or(true, |(e, _)| energy < *e) {
            best = Some((energy, q));
        }
    }
    let (realization, (value, measure)) = match best {
        Some(b) => (Realization::Geodesic, b),
        None => {
            let last = grid.last_index();
            let paths = (0..n)
                .map(|x| {
                    (0..=last)
                        .map(|k| if k == last { h[x] } else { x })
                        .collect()
                })
                .collect();
            let q = build(paths)?;
            (Realization::HoldThenJump, (kinetic_energy(&q, &ones)?, q))
        }
    };
    if !measure.is_incompressible(1e-12) {
        return Err(Error::Precondition(
            "classical realization is not incompressible".into(),
        ));
    }
    Ok(ClassicalFlowEnergy {
        value,
        realization,
        branches,
        measure,
    })
}
