//! Discrete minimum-action problem with a prescribed endpoint coupling.
//!
//! Paths are cell sequences on a window grid. The action of a path is
//!
//! ```text
//! ρ(z₀) · ( Σ_k d(z_k, z_{k+1})² / (2 dt)  −  Σ_{k<N} U_k(z_k) dt )
//! ```
//!
//! and the problem asks for the path measure of least mean action whose
//! marginals stay at the coupling's row marginal and whose `(z₀, z_N)` law is
//! the coupling `η`. With every path enumerated this is a finite LP.

mod classical;
pub mod lp;

pub use classical::{classical_flow_energy, ClassicalFlowEnergy, InterpolationBranch, Realization};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, stable_sum};
use crate::path_measure::{Observable, PathMeasure, StateSpace, TimeGrid};
use lp::EqualityRow;

/// Tolerance on the row and column sums of a coupling.
pub const COUPLING_TOL: f64 = 1e-9;

/// Doubly stochastic coupling `η` on cells × cells: every row and column sums
/// to `1/n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfiguration")]
pub struct FinalConfiguration {
    coupling: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfiguration {
    coupling: Vec<Vec<f64>>,
}

impl TryFrom<RawConfiguration> for FinalConfiguration {
    type Error = Error;

    fn try_from(raw: RawConfiguration) -> Result<Self> {
        Self::new(raw.coupling)
    }
}

impl FinalConfiguration {
    pub fn new(coupling: Vec<Vec<f64>>) -> Result<Self> {
        let n = coupling.len();
        if n == 0 || coupling.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidCoupling(
                "coupling must be a nonempty square matrix".into(),
            ));
        }
        if coupling
            .iter()
            .flatten()
            .any(|v| !v.is_finite() || *v < 0.0)
        {
            return Err(Error::InvalidCoupling(
                "entries must be finite and nonnegative".into(),
            ));
        }
        let target = 1.0 / n as f64;
        for i in 0..n {
            let row = stable_sum(coupling[i].clone());
            let col = stable_sum(coupling.iter().map(|r| r[i]).collect());
            if (row - target).abs() > COUPLING_TOL || (col - target).abs() > COUPLING_TOL {
                return Err(Error::InvalidCoupling(format!(
                    "row/column {i} sums to {row}/{col}, expected {target}"
                )));
            }
        }
        Ok(Self { coupling })
    }

    pub fn identity(n: usize) -> Self {
        let w = 1.0 / n as f64;
        Self {
            coupling: (0..n)
                .map(|i| (0..n).map(|j| if i == j { w } else { 0.0 }).collect())
                .collect(),
        }
    }

    /// The product of the uniform marginals.
    pub fn independent(n: usize) -> Self {
        let w = 1.0 / (n * n) as f64;
        Self {
            coupling: vec![vec![w; n]; n],
        }
    }

    pub fn n(&self) -> usize {
        self.coupling.len()
    }

    pub fn coupling(&self) -> &[Vec<f64>] {
        &self.coupling
    }

    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.coupling[x][y]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.coupling
            .iter()
            .map(|r| stable_sum(r.clone()))
            .collect()
    }

    /// `(1 − λ)·self + λ·other`.
    pub fn blend(&self, other: &FinalConfiguration, lambda: f64) -> Result<Self> {
        if other.n() != self.n() {
            return Err(Error::Mismatch);
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidWeights(format!(
                "blend weight {lambda} outside [0, 1]"
            )));
        }
        Self::new(
            self.coupling
                .iter()
                .zip(&other.coupling)
                .map(|(a, b)| {
                    a.iter()
                        .zip(b)
                        .map(|(x, y)| (1.0 - lambda) * x + lambda * y)
                        .collect()
                })
                .collect(),
        )
    }

    /// No mass off the diagonal.
    pub fn is_diagonal(&self) -> bool {
        (0..self.n()).all(|i| (0..self.n()).all(|j| i == j || self.coupling[i][j] == 0.0))
    }
}

/// `η_h(x, y) = [y = h(x)] / n` for a bijection `h` on the cells of `space`.
pub fn eta_from_map(h: &[usize], space: &StateSpace) -> Result<FinalConfiguration> {
    let n = space.len();
    if h.len() != n {
        return Err(Error::NotBijective(format!(
            "map has {} entries for {n} cells",
            h.len()
        )));
    }
    let mut seen = vec![false; n];
    for &y in h {
        if y >= n {
            return Err(Error::NotBijective(format!("target {y} is not a cell")));
        }
        if std::mem::replace(&mut seen[y], true) {
            return Err(Error::NotBijective(format!("cell {y} is hit twice")));
        }
    }
    let w = 1.0 / n as f64;
    let mut coupling = vec![vec![0.0; n]; n];
    for (x, &y) in h.iter().enumerate() {
        coupling[x][y] = w;
    }
    Ok(FinalConfiguration { coupling })
}

/// The discrete minimum-action problem.
///
/// `potential` holds no entry (`U ≡ 0`), one entry (the same `U` at every
/// time) or one entry per grid step `k = 0..N−1`. `rho` defaults to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProblem")]
pub struct ActionProblem {
    pub space: StateSpace,
    pub grid: TimeGrid,
    pub eta: FinalConfiguration,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub potential: Vec<Observable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Observable>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    space: StateSpace,
    grid: TimeGrid,
    eta: FinalConfiguration,
    #[serde(default)]
    potential: Vec<Observable>,
    #[serde(default)]
    rho: Option<Observable>,
}

impl TryFrom<RawProblem> for ActionProblem {
    type Error = Error;

    fn try_from(raw: RawProblem) -> Result<Self> {
        let problem = ActionProblem {
            space: raw.space,
            grid: raw.grid,
            eta: raw.eta,
            potential: raw.potential,
            rho: raw.rho,
        };
        problem.validate()?;
        Ok(problem)
    }
}

impl ActionProblem {
    pub fn new(space: StateSpace, grid: TimeGrid, eta: FinalConfiguration) -> Result<Self> {
        let problem = Self {
            space,
            grid,
            eta,
            potential: Vec::new(),
            rho: None,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn with_potential(mut self, potential: Vec<Observable>) -> Result<Self> {
        self.potential = potential;
        self.validate()?;
        Ok(self)
    }

    pub fn with_rho(mut self, rho: Observable) -> Result<Self> {
        self.rho = Some(rho);
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        self.grid.require_window()?;
        let n = self.space.len();
        if self.eta.n() != n {
            return Err(Error::InvalidCoupling(format!(
                "coupling is {0}×{0}, space has {n} cells",
                self.eta.n()
            )));
        }
        let steps = self.grid.n_steps();
        if !(self.potential.len() <= 1 || self.potential.len() == steps) {
            return Err(Error::InvalidObservable(format!(
                "potential needs 0, 1 or {steps} entries, got {}",
                self.potential.len()
            )));
        }
        for u in &self.potential {
            u.check_len(n)?;
        }
        if let Some(rho) = &self.rho {
            rho.check_len(n)?;
            if !rho.is_nonnegative() {
                return Err(Error::InvalidObservable(
                    "density must be nonnegative".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn rho_at(&self, cell: usize) -> f64 {
        self.rho.as_ref().map_or(1.0, |r| r.at(cell))
    }

    pub fn potential_at(&self, k: usize, cell: usize) -> f64 {
        match self.potential.len() {
            0 => 0.0,
            1 => self.potential[0].at(cell),
            _ => self.potential[k].at(cell),
        }
    }

    /// Action of a single path of length `N + 1`.
    pub fn path_action(&self, path: &[usize]) -> f64 {
        let dt = self.grid.dt();
        let kinetic: f64 = path
            .windows(2)
            .map(|w| self.space.distance_sq(w[0], w[1]) / (2.0 * dt))
            .sum();
        let potential: f64 = path[..path.len() - 1]
            .iter()
            .enumerate()
            .map(|(k, &c)| self.potential_at(k, c) * dt)
            .sum();
        self.rho_at(path[0]) * (kinetic - potential)
    }

    /// `n^(N+1)`, or `None` on overflow.
    pub fn path_count(&self) -> Option<u128> {
        (self.space.len() as u128).checked_pow(self.grid.path_len() as u32)
    }
}

fn path_kinetic(space: &StateSpace, dt: f64, path: &[usize]) -> f64 {
    path.windows(2)
        .map(|w| space.distance_sq(w[0], w[1]) / (2.0 * dt))
        .sum()
}

/// `Σ w ρ(z₀) Σ_k d(z_k, z_{k+1})² / (2 dt)` over a window-grid measure.
pub fn kinetic_energy(q: &PathMeasure, rho: &Observable) -> Result<f64> {
    q.grid().require_window()?;
    rho.check_len(q.space().len())?;
    let dt = q.grid().dt();
    Ok(stable_sum(par::map(q.atoms(), |a| {
        a.weight * rho.at(a.cells.at(0)) * path_kinetic(q.space(), dt, a.cells.cells())
    })))
}

/// Mean path action of `q` under `problem`.
pub fn action(q: &PathMeasure, problem: &ActionProblem) -> Result<f64> {
    if q.space() != &problem.space || q.grid() != &problem.grid {
        return Err(Error::Mismatch);
    }
    Ok(stable_sum(par::map(q.atoms(), |a| {
        a.weight * problem.path_action(a.cells.cells())
    })))
}

/// Total-variation distance between the `(z₀, z_N)` law of `q` and `η`.
pub fn coupling_tv(q: &PathMeasure, eta: &FinalConfiguration) -> Result<f64> {
    let n = q.space().len();
    if eta.n() != n {
        return Err(Error::Mismatch);
    }
    let last = q.grid().last_index();
    let mut pair: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for a in q.atoms() {
        pair.entry((a.cells.at(0), a.cells.at(last)))
            .or_default()
            .push(a.weight);
    }
    let mut gaps = Vec::with_capacity(n * n);
    for x in 0..n {
        for y in 0..n {
            let mass = pair.remove(&(x, y)).map_or(0.0, stable_sum);
            gaps.push((mass - eta.at(x, y)).abs());
        }
    }
    Ok(0.5 * stable_sum(gaps))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Largest number of enumerated paths.
    pub enumeration_cap: u128,
    /// Residual tolerance and relative optimality slack.
    pub tol: f64,
    /// Re-solve under small objective perturbations to look for a second
    /// optimal vertex.
    pub probe_degeneracy: bool,
    /// A feasible measure whose action bounds the optimum.
    #[serde(default)]
    pub warm_start: Option<PathMeasure>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            enumeration_cap: 1_000_000,
            tol: 1e-9,
            probe_degeneracy: true,
            warm_start: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// Largest TV distance of a marginal from the time-0 marginal.
    pub incompressibility_tv: f64,
    /// TV distance of the endpoint law from `η`.
    pub coupling_tv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Action of the returned measure.
    pub value: f64,
    /// Objective value reported by the LP backend.
    pub lp_objective: f64,
    pub residuals: Residuals,
    pub degenerate: bool,
    pub paths_enumerated: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warm_start_action: Option<f64>,
    /// Relative gap to an independent optimum, when one was computed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_gap: Option<f64>,
    pub measure: PathMeasure,
}

/// Path with lexicographic rank `index` among all `n^len` cell sequences.
pub fn path_at(index: u128, n: usize, len: usize) -> Vec<usize> {
    let mut cells = vec![0; len];
    let mut rest = index;
    for slot in cells.iter_mut().rev() {
        *slot = (rest % n as u128) as usize;
        rest /= n as u128;
    }
    cells
}

/// Every path on the problem's grid, in lexicographic order.
pub fn enumerate_paths(problem: &ActionProblem, cap: u128) -> Result<Vec<Vec<usize>>> {
    let count = problem.path_count().unwrap_or(u128::MAX);
    if count > cap {
        return Err(Error::EnumerationCap { paths: count, cap });
    }
    let (n, len) = (problem.space.len(), problem.grid.path_len());
    Ok(par::map_range(count as usize, |i| {
        path_at(i as u128, n, len)
    }))
}

/// Equality rows of the LP over `paths`: the marginal at every interior time
/// equals the coupling's row marginal, and the endpoint law equals `η`.
pub fn constraint_rows(problem: &ActionProblem, paths: &[Vec<usize>]) -> Vec<EqualityRow> {
    let n = problem.space.len();
    let last = problem.grid.last_index();
    let mu = problem.eta.row_sums();
    let mut rows: Vec<EqualityRow> = Vec::with_capacity((last.saturating_sub(1) + n) * n);
    for _ in 1..last {
        for &m in &mu {
            rows.push(EqualityRow {
                terms: Vec::new(),
                rhs: m,
            });
        }
    }
    let pair_base = rows.len();
    for x in 0..n {
        for y in 0..n {
            rows.push(EqualityRow {
                terms: Vec::new(),
                rhs: problem.eta.at(x, y),
            });
        }
    }
    for (j, p) in paths.iter().enumerate() {
        for k in 1..last {
            rows[(k - 1) * n + p[k]].terms.push((j, 1.0));
        }
        rows[pair_base + p[0] * n + p[last]].terms.push((j, 1.0));
    }
    rows
}

fn probe_direction(len: usize) -> Vec<f64> {
    // SplitMix64 stream; any fixed generic direction will do.
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    (0..len)
        .map(|_| {
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect()
}

/// Builds a measure from LP weights: negative noise is clipped, weights
/// below `floor` dropped and the rest renormalized.
fn measure_from_weights(
    problem: &ActionProblem,
    paths: &[Vec<usize>],
    x: &[f64],
    floor: f64,
) -> Result<PathMeasure> {
    let kept: Vec<(Vec<usize>, f64)> = paths
        .iter()
        .zip(x)
        .filter(|(_, &w)| w > floor)
        .map(|(p, &w)| (p.clone(), w))
        .collect();
    let total = stable_sum(kept.iter().map(|(_, w)| *w).collect());
    if !(total > 0.0) {
        return Err(Error::Solver("LP returned no mass".into()));
    }
    PathMeasure::new(
        problem.space,
        problem.grid,
        kept.into_iter().map(|(p, w)| (p, w / total)),
    )
}

/// Solves the enumerated LP and certifies the result.
pub fn solve_min_action(problem: &ActionProblem, options: &SolveOptions) -> Result<SolveReport> {
    let paths = enumerate_paths(problem, options.enumeration_cap)?;
    let costs = par::map(&paths, |p| problem.path_action(p));
    let rows = constraint_rows(problem, &paths);
    let (x, lp_objective) = lp::minimize(&costs, &rows)?;
    let measure = measure_from_weights(problem, &paths, &x, 1e-14)?;
    let value = action(&measure, problem)?;
    let residuals = Residuals {
        incompressibility_tv: measure.check_incompressible(0.0).max_tv_deviation,
        coupling_tv: coupling_tv(&measure, &problem.eta)?,
    };
    let slack = options.tol * value.abs().max(1.0);

    let mut degenerate = false;
    if options.probe_degeneracy && paths.len() > 1 {
        let scale = costs.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        let dir = probe_direction(costs.len());
        for sign in [1.0, -1.0] {
            let perturbed: Vec<f64> = costs
                .iter()
                .zip(&dir)
                .map(|(c, r)| c + sign * 1e-7 * scale * r)
                .collect();
            let Ok((y, _)) = lp::minimize(&perturbed, &rows) else {
                continue;
            };
            let true_cost = stable_sum(costs.iter().zip(&y).map(|(c, w)| c * w).collect());
            let moved = x.iter().zip(&y).any(|(a, b)| (a - b).abs() > 1e-7);
            if moved && (true_cost - lp_objective).abs() <= slack {
                degenerate = true;
                break;
            }
        }
    }

    let warm_start_action = match &options.warm_start {
        None => None,
        Some(w) => {
            let inc = w.check_incompressible(options.tol);
            let tv = coupling_tv(w, &problem.eta)?;
            if !inc.pass || tv > options.tol {
                return Err(Error::Precondition(format!(
                    "warm start is infeasible (incompressibility {:e}, coupling {tv:e})",
                    inc.max_tv_deviation
                )));
            }
            let a = action(w, problem)?;
            if value > a + slack {
                return Err(Error::Solver(format!(
                    "optimum {value} exceeds the warm start's action {a}"
                )));
            }
            Some(a)
        }
    };

    Ok(SolveReport {
        status: SolveStatus::Optimal,
        value,
        lp_objective,
        residuals,
        degenerate,
        paths_enumerated: paths.len() as u64,
        warm_start_action,
        oracle_gap: None,
        measure,
    })
}
