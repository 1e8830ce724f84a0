//! Hands gifkit problems to the exact-rational oracle.

use gifkit_core::brenier::ActionProblem;
use gifkit_core::SpaceKind;
use gifkit_oracle::{float_coupling, to_f64, Geometry, Instance, Q};

/// Oracle work grows quickly with the number of enumerated paths, and much
/// faster once costs stop being integer multiples of one kinetic unit.
pub const KINETIC_PATH_LIMIT: u128 = 4096;
pub const GENERAL_PATH_LIMIT: u128 = 512;

/// The oracle's view of `problem`, with the coupling given exactly.
pub fn instance(problem: &ActionProblem, eta: Vec<Vec<Q>>) -> Instance {
    let space = problem.space;
    Instance {
        geometry: match space.kind() {
            SpaceKind::Circle => Geometry::Circle,
            SpaceKind::Torus2d => Geometry::Torus,
        },
        side: space.n_cells(),
        circumference: space.circumference(),
        horizon: problem.grid.horizon(),
        n_steps: problem.grid.n_steps(),
        eta,
        rho: problem.rho.as_ref().map(|r| r.values().to_vec()),
        potential: problem
            .potential
            .iter()
            .map(|u| u.values().to_vec())
            .collect(),
    }
}

/// Whether the oracle is cheap enough to run on `problem`.
pub fn oracle_feasible(problem: &ActionProblem) -> bool {
    let limit = if problem.rho.is_none() && problem.potential.is_empty() {
        KINETIC_PATH_LIMIT
    } else {
        GENERAL_PATH_LIMIT
    };
    problem.path_count().is_some_and(|c| c <= limit)
}

/// Exact optimum for the coupling read back from the problem's floats.
pub fn oracle_value(problem: &ActionProblem) -> Option<f64> {
    let inst = instance(problem, float_coupling(problem.eta.coupling()));
    inst.optimum().map(|v| to_f64(&v))
}

/// `|a − b| / |b|`, or the absolute gap when `b` is zero.
pub fn rel_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if b == 0.0 {
        d
    } else {
        d / b.abs()
    }
}
