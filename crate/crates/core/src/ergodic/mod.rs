//! Running time averages along paths and the diagnostics built on them.
//!
//! Averages use the left-endpoint rule on the grid: the horizon-`k` average of
//! `f` along `z` is `(1/k) Σ_{j<k} f(z_j)`, for `k = 1..=N`. The maximal
//! function is the largest of these `N` averages.

mod vitali;

pub use vitali::{
    pairwise_disjoint, tripled_cover_holds, uncovered_probes, union_components, vitali_select,
    Interval,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, stable_sum};
use crate::path_measure::{DiscretePath, Observable, PathMeasure, TimeGrid, WEIGHT_TOL};

/// Slack allowed on inequality checks for floating-point accumulation.
pub const INEQUALITY_SLACK: f64 = 1e-12;

fn check_observable(q: &PathMeasure, f: &Observable) -> Result<()> {
    f.check_len(q.space().len())
}

/// Horizon-`k` running averages `A_1, …, A_N` of `f` along `path`.
pub fn average_profile(path: &DiscretePath, f: &Observable, grid: &TimeGrid) -> Vec<f64> {
    let n = grid.n_steps();
    let mut out = Vec::with_capacity(n);
    let mut acc = 0.0;
    for (j, &c) in path.cells().iter().take(n).enumerate() {
        acc += f.at(c);
        out.push(acc / (j + 1) as f64);
    }
    out
}

/// `A_k(f)(z) = (1/k) Σ_{j<k} f(z_j)`, `1 ≤ k ≤ N`.
pub fn ergodic_average(
    path: &DiscretePath,
    f: &Observable,
    k: usize,
    grid: &TimeGrid,
) -> Result<f64> {
    if k == 0 || k > grid.n_steps() {
        return Err(Error::IndexOutOfRange {
            index: k,
            last: grid.n_steps(),
        });
    }
    let mut acc = 0.0;
    for &c in &path.cells()[..k] {
        acc += f.at(c);
    }
    Ok(acc / k as f64)
}

/// `f*(z) = max_{1≤k≤N} A_k(f)(z)`.
pub fn maximal_function(path: &DiscretePath, f: &Observable, grid: &TimeGrid) -> f64 {
    average_profile(path, f, grid)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Running averages for every atom of a measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageProfile {
    /// `per_atom[i][k - 1] = A_k` for atom `i` in canonical order.
    pub per_atom: Vec<Vec<f64>>,
}

impl AverageProfile {
    pub fn compute(q: &PathMeasure, f: &Observable) -> Result<Self> {
        check_observable(q, f)?;
        let grid = *q.grid();
        Ok(Self {
            per_atom: par::map(q.atoms(), |a| average_profile(&a.cells, f, &grid)),
        })
    }

    pub fn maximal(&self) -> Vec<f64> {
        self.per_atom
            .iter()
            .map(|p| p.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect()
    }
}

/// `q(E_α)` with `E_α = {f* > α}`; needs `f ≥ 0` and `α > 0`.
pub fn maximal_level_mass(q: &PathMeasure, f: &Observable, alpha: f64) -> Result<f64> {
    check_observable(q, f)?;
    if !f.is_nonnegative() {
        return Err(Error::Precondition("observable must be nonnegative".into()));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Precondition(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let maxima = AverageProfile::compute(q, f)?.maximal();
    Ok(level_mass(q, &maxima, alpha))
}

fn level_mass(q: &PathMeasure, maxima: &[f64], alpha: f64) -> f64 {
    stable_sum(
        q.atoms()
            .iter()
            .zip(maxima)
            .filter(|(_, &m)| m > alpha)
            .map(|(a, _)| a.weight)
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaximalRow {
    pub alpha: f64,
    /// `α · q(E_α)`.
    pub lhs: f64,
    /// `‖f‖₁`, the bound as stated with constant one.
    pub bound1: f64,
    /// `3‖f‖₁`, the bound the covering argument yields.
    pub bound3: f64,
    pub pass1: bool,
    pub pass3: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalInequalityReport {
    pub l1_norm: f64,
    pub rows: Vec<MaximalRow>,
}

impl MaximalInequalityReport {
    pub fn all_pass3(&self) -> bool {
        self.rows.iter().all(|r| r.pass3)
    }

    pub fn pass1_count(&self) -> usize {
        self.rows.iter().filter(|r| r.pass1).count()
    }
}

/// Evaluates `α q(E_α)` against `‖f‖₁` and `3‖f‖₁` for each `α`, with the
/// norm taken against the time-0 marginal.
pub fn check_maximal_inequality(
    q: &PathMeasure,
    f: &Observable,
    alphas: &[f64],
) -> Result<MaximalInequalityReport> {
    check_observable(q, f)?;
    let inc = q.check_incompressible(WEIGHT_TOL);
    if !inc.pass {
        return Err(Error::NotIncompressible {
            deviation: inc.max_tv_deviation,
        });
    }
    if !f.is_nonnegative() {
        return Err(Error::Precondition("observable must be nonnegative".into()));
    }
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(Error::Precondition(format!(
            "alpha must be positive, got {a}"
        )));
    }
    let l1 = f.l1_norm(&q.marginal_at(0)?);
    let maxima = AverageProfile::compute(q, f)?.maximal();
    let rows = alphas
        .iter()
        .map(|&alpha| {
            let lhs = alpha * level_mass(q, &maxima, alpha);
            MaximalRow {
                alpha,
                lhs,
                bound1: l1,
                bound3: 3.0 * l1,
                pass1: lhs <= l1 + INEQUALITY_SLACK,
                pass3: lhs <= 3.0 * l1 + INEQUALITY_SLACK,
            }
        })
        .collect();
    Ok(MaximalInequalityReport { l1_norm: l1, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointwiseOptions {
    /// Smallest accepted number of grid steps.
    pub min_steps: usize,
    /// First horizon of the tail window; defaults to `⌈N/2⌉`.
    pub tail_start: Option<usize>,
}

impl Default for PointwiseOptions {
    fn default() -> Self {
        Self {
            min_steps: 4,
            tail_start: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseLimitReport {
    /// Limit estimate `Φ(z) ≈ A_N(z)` per atom.
    pub limits: Vec<f64>,
    /// `∫ Φ dq`.
    pub limit_integral: f64,
    /// `∫ f dμ` against the time-0 marginal.
    pub space_integral: f64,
    pub integral_check: f64,
    pub tail_start: usize,
    /// `max_{k ≥ tail_start} |A_k − A_N|` per atom.
    pub tail_oscillation: Vec<f64>,
}

/// Estimates the pointwise limit of the running averages at horizon `N`,
/// with the integral identity `∫ Φ dq = ∫ f dμ` and per-atom tail
/// oscillation as convergence evidence.
pub fn pointwise_limit(
    q: &PathMeasure,
    f: &Observable,
    options: PointwiseOptions,
) -> Result<PointwiseLimitReport> {
    let n = q.grid().n_steps();
    if n < options.min_steps {
        return Err(Error::Precondition(format!(
            "grid has {n} steps, at least {} required",
            options.min_steps
        )));
    }
    let tail_start = options.tail_start.unwrap_or(n.div_ceil(2)).clamp(1, n);
    let profile = AverageProfile::compute(q, f)?;
    let limits: Vec<f64> = profile.per_atom.iter().map(|p| p[n - 1]).collect();
    let tail_oscillation = profile
        .per_atom
        .iter()
        .map(|p| {
            p[tail_start - 1..]
                .iter()
                .map(|a| (a - p[n - 1]).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let limit_integral = stable_sum(
        q.atoms()
            .iter()
            .zip(&limits)
            .map(|(a, l)| a.weight * l)
            .collect(),
    );
    let space_integral = f.integrate(&q.marginal_at(0)?);
    Ok(PointwiseLimitReport {
        integral_check: (limit_integral - space_integral).abs(),
        limits,
        limit_integral,
        space_integral,
        tail_start,
        tail_oscillation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyReport {
    pub horizons: Vec<usize>,
    /// Horizons in time units, `k · dt`.
    pub times: Vec<f64>,
    /// `deltas[i][j] = ‖A_{k_i} − A_{k_j}‖_{L¹(q)}`.
    pub deltas: Vec<Vec<f64>>,
    /// `tail_diameters[i] = max_{j, j' ≥ i} deltas[j][j']`.
    pub tail_diameters: Vec<f64>,
    /// First position from which consecutive deltas `deltas[i][i+1]` never
    /// increase.
    pub monotone_from: usize,
}

/// Pairwise `L¹(q)` distances between running averages at the given
/// horizons (sorted ascending and deduplicated).
pub fn l1_convergence_diagnostic(
    q: &PathMeasure,
    f: &Observable,
    horizons: &[usize],
) -> Result<CauchyReport> {
    let n = q.grid().n_steps();
    let mut hs = horizons.to_vec();
    hs.sort_unstable();
    hs.dedup();
    if let Some(&k) = hs.iter().find(|&&k| k == 0 || k > n) {
        return Err(Error::IndexOutOfRange { index: k, last: n });
    }
    let profile = AverageProfile::compute(q, f)?;
    let m = hs.len();
    let deltas: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    stable_sum(
                        q.atoms()
                            .iter()
                            .zip(&profile.per_atom)
                            .map(|(a, p)| a.weight * (p[hs[i] - 1] - p[hs[j] - 1]).abs())
                            .collect(),
                    )
                })
                .collect()
        })
        .collect();
    let mut tail_diameters = vec![0.0; m];
    let mut running: f64 = 0.0;
    for i in (0..m).rev() {
        for j in i..m {
            running = running.max(deltas[i][j]);
        }
        tail_diameters[i] = running;
    }
    let adjacent: Vec<f64> = (1..m).map(|i| deltas[i - 1][i]).collect();
    let mut monotone_from = adjacent.len().saturating_sub(1);
    while monotone_from > 0 && adjacent[monotone_from - 1] >= adjacent[monotone_from] {
        monotone_from -= 1;
    }
    let dt = q.grid().dt();
    Ok(CauchyReport {
        times: hs.iter().map(|&k| k as f64 * dt).collect(),
        horizons: hs,
        deltas,
        tail_diameters,
        monotone_from,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceOptions {
    /// Earliest return time counted as pointwise recurrence.
    pub t_min: f64,
    /// Largest shift scanned for a weak witness; defaults to the whole grid.
    pub max_shift: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceReport {
    /// `q(Φ)` for `Φ = {z(0) ∈ E}`.
    pub event_mass: f64,
    /// Smallest shift `s ≥ 1` with `q(Φ ∩ Γ^{-s}Φ) > 0`.
    pub weak_witness: Option<usize>,
    pub witness_mass: f64,
    pub scanned_shifts: usize,
    /// Mass of atoms starting in `E` that are back in `E` at some grid time
    /// `t ≥ t_min`.
    pub pointwise_recurrent_mass: f64,
    pub first_return_index: usize,
}

/// Weak (set-level) and pointwise (path-level) recurrence of `{z(0) ∈ E}`.
pub fn recurrence_report(
    q: &PathMeasure,
    cells: &[usize],
    options: RecurrenceOptions,
) -> Result<RecurrenceReport> {
    let n = q.space().len();
    let mut in_set = vec![false; n];
    for &c in cells {
        if c >= n {
            return Err(Error::InvalidEvent(format!("cell {c} outside the space")));
        }
        in_set[c] = true;
    }
    let starters: Vec<_> = q.atoms().iter().filter(|a| in_set[a.cells.at(0)]).collect();
    let event_mass = stable_sum(starters.iter().map(|a| a.weight).collect());
    if event_mass <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let grid = q.grid();
    let last = grid.last_index();
    let shift_limit = if grid.is_periodic() {
        last
    } else {
        grid.n_steps()
    };
    let max_shift = options
        .max_shift
        .map_or(shift_limit, |m| m.min(shift_limit));
    let overlap = |s: usize| {
        stable_sum(
            starters
                .iter()
                .filter(|a| in_set[a.cells.at(s)])
                .map(|a| a.weight)
                .collect(),
        )
    };
    let weak_witness = par::find_first(max_shift, |i| overlap(i + 1) > 0.0).map(|i| i + 1);
    let witness_mass = weak_witness.map_or(0.0, overlap);

    let dt = grid.dt();
    let ratio = options.t_min / dt;
    let first_return_index = if (ratio - ratio.round()).abs() <= 1e-9 * ratio.abs().max(1.0) {
        ratio.round() as usize
    } else {
        ratio.ceil().max(0.0) as usize
    }
    .max(1);
    let pointwise_recurrent_mass = stable_sum(
        starters
            .iter()
            .filter(|a| {
                a.cells
                    .cells()
                    .get(first_return_index..)
                    .is_some_and(|tail| tail.iter().any(|&c| in_set[c]))
            })
            .map(|a| a.weight)
            .collect(),
    );
    Ok(RecurrenceReport {
        event_mass,
        weak_witness,
        witness_mass,
        scanned_shifts: max_shift,
        pointwise_recurrent_mass,
        first_return_index,
    })
}
