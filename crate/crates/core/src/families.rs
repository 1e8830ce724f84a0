//! Seeded random generators for test measures, observables and couplings.
//!
//! All generators draw from a caller-supplied RNG; [`rng`] is the seeded
//! ChaCha stream used by the property suites so runs replay bit for bit.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constructors::{from_classical_flow, orbit_measure, DiscreteClassicalFlow, FlowRule};
use crate::error::Result;
use crate::path_measure::{mix, Marginal, Observable, PathMeasure, StateSpace, TimeGrid};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_bijection<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut h: Vec<usize> = (0..n).collect();
    h.shuffle(rng);
    h
}

/// A uniformly random single `n`-cycle.
pub fn random_cycle<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<usize> {
    let order = random_bijection(rng, n);
    let mut h = vec![0; n];
    for i in 0..n {
        h[order[i]] = order[(i + 1) % n];
    }
    h
}

/// A cell map that sends two distinct cells to the same target. Needs `n ≥ 2`.
pub fn random_non_bijection<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<usize> {
    assert!(n >= 2, "a non-injective map needs two cells");
    let mut h = random_bijection(rng, n);
    let a = rng.random_range(0..n);
    let b = (a + rng.random_range(1..n)) % n;
    h[b] = h[a];
    h
}

/// `k` positive weights summing to 1.
pub fn random_weights<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| 0.1 + rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// A marginal that is constant on random blocks of cells, with the block
/// label of each cell. Permutations within blocks preserve it.
pub fn random_block_marginal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (Marginal, Vec<usize>) {
    let n_blocks = rng.random_range(1..=n.min(3));
    let mut labels: Vec<usize> = (0..n).map(|c| c % n_blocks).collect();
    labels.shuffle(rng);
    let block_mass = random_weights(rng, n_blocks);
    let sizes: Vec<usize> = (0..n_blocks)
        .map(|b| labels.iter().filter(|&&l| l == b).count())
        .collect();
    let masses = labels
        .iter()
        .map(|&b| block_mass[b] / sizes[b] as f64)
        .collect();
    (
        Marginal::new(masses).expect("block masses are normalized"),
        labels,
    )
}

/// A random bijection that maps every block onto itself.
pub fn random_block_permutation<R: Rng + ?Sized>(rng: &mut R, labels: &[usize]) -> Vec<usize> {
    let n = labels.len();
    let mut h = vec![0; n];
    let n_blocks = labels.iter().max().map_or(0, |m| m + 1);
    for b in 0..n_blocks {
        let members: Vec<usize> = (0..n).filter(|&c| labels[c] == b).collect();
        let mut image = members.clone();
        image.shuffle(rng);
        for (c, t) in members.into_iter().zip(image) {
            h[c] = t;
        }
    }
    h
}

/// A time-inhomogeneous flow composing an independent block-preserving
/// permutation at every step.
pub fn random_schedule_flow<R: Rng + ?Sized>(
    rng: &mut R,
    space: StateSpace,
    path_len: usize,
    labels: &[usize],
) -> DiscreteClassicalFlow {
    let n = space.len();
    let mut rows = vec![(0..n).collect::<Vec<_>>()];
    for _ in 1..path_len {
        let step = random_block_permutation(rng, labels);
        let prev = rows.last().expect("schedule is nonempty");
        rows.push(prev.iter().map(|&c| step[c]).collect());
    }
    DiscreteClassicalFlow::new(space, FlowRule::Schedule(rows)).expect("rows are cell maps")
}

/// Mixture of `components` random schedule flows, each started from its own
/// block marginal. Every component is incompressible, hence so is the mix.
pub fn random_incompressible<R: Rng + ?Sized>(
    rng: &mut R,
    space: StateSpace,
    grid: TimeGrid,
    components: usize,
) -> Result<PathMeasure> {
    let parts = (0..components.max(1))
        .map(|_| {
            let (mu, labels) = random_block_marginal(rng, space.len());
            let flow = random_schedule_flow(rng, space, grid.path_len(), &labels);
            from_classical_flow(&flow, &mu, grid)
        })
        .collect::<Result<Vec<_>>>()?;
    let weights = random_weights(rng, parts.len());
    mix(&parts, &weights)
}

/// Uniform starting mass pushed along a non-injective step map. The
/// marginal at index 1 loses a cell, so the result is never incompressible.
pub fn perturbed_flow_measure<R: Rng + ?Sized>(
    rng: &mut R,
    space: StateSpace,
    grid: TimeGrid,
) -> Result<PathMeasure> {
    let n = space.len();
    let map = random_non_bijection(rng, n);
    let w = 1.0 / n as f64;
    let atoms = (0..n).map(|c| {
        let mut path = vec![c];
        for _ in 1..grid.path_len() {
            path.push(map[*path.last().expect("path is nonempty")]);
        }
        (path, w)
    });
    PathMeasure::new(space, grid, atoms)
}

/// A measure on `atoms` uniformly random paths with random weights.
pub fn random_path_measure<R: Rng + ?Sized>(
    rng: &mut R,
    space: StateSpace,
    grid: TimeGrid,
    atoms: usize,
) -> Result<PathMeasure> {
    let n = space.len();
    let weights = random_weights(rng, atoms.max(1));
    let atoms: Vec<(Vec<usize>, f64)> = weights
        .into_iter()
        .map(|w| {
            (
                (0..grid.path_len())
                    .map(|_| rng.random_range(0..n))
                    .collect(),
                w,
            )
        })
        .collect();
    PathMeasure::new(space, grid, atoms)
}

/// Nonnegative observables cycling through four shapes: a single-cell
/// indicator, an arc indicator, uniform random values and a sparse random
/// profile.
pub fn random_nonnegative_observables<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    count: usize,
) -> Vec<Observable> {
    (0..count)
        .map(|i| match i % 4 {
            0 => Observable::indicator(n, [rng.random_range(0..n)]),
            1 => {
                let start = rng.random_range(0..n);
                let width = rng.random_range(1..=n);
                Observable::indicator(n, (0..width).map(|j| (start + j) % n))
            }
            2 => Observable::new((0..n).map(|_| rng.random::<f64>() * 3.0).collect())
                .expect("finite values"),
            _ => Observable::new(
                (0..n)
                    .map(|_| {
                        if rng.random_bool(0.3) {
                            rng.random::<f64>() * 10.0
                        } else {
                            0.0
                        }
                    })
                    .collect(),
            )
            .expect("finite values"),
        })
        .collect()
}

/// A doubly stochastic coupling matrix (rows and columns summing to `1/n`)
/// as a random convex combination of permutation matrices.
pub fn random_coupling<R: Rng + ?Sized>(rng: &mut R, n: usize, terms: usize) -> Vec<Vec<f64>> {
    let weights = random_weights(rng, terms.max(1));
    let mut eta = vec![vec![0.0; n]; n];
    for w in weights {
        let h = random_bijection(rng, n);
        for (x, &y) in h.iter().enumerate() {
            eta[x][y] += w / n as f64;
        }
    }
    eta
}

/// Shapes in the seeded family used by the structure checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureKind {
    /// Uniform start pushed along a single `n`-cycle.
    TransitiveCycle,
    /// Uniform start pushed along an arbitrary permutation.
    RandomBijection,
    /// Mixture of two transitive cycles.
    CycleMix,
    /// Mixture of block-preserving schedule flows.
    BlockMixture,
    /// All rotations of one path that follows a cycle.
    OrbitMeasure,
}

impl StructureKind {
    pub const ALL: [StructureKind; 5] = [
        StructureKind::TransitiveCycle,
        StructureKind::RandomBijection,
        StructureKind::CycleMix,
        StructureKind::BlockMixture,
        StructureKind::OrbitMeasure,
    ];
}

/// Member `index` of the structure family: `n = 3 + index % 4` cells on a
/// periodic grid with `2n` steps, kind cycling through [`StructureKind::ALL`].
/// Every member is incompressible.
pub fn structure_family_member<R: Rng + ?Sized>(
    rng: &mut R,
    index: usize,
) -> Result<(StructureKind, PathMeasure)> {
    let n = 3 + index % 4;
    let kind = StructureKind::ALL[index % StructureKind::ALL.len()];
    let space = StateSpace::circle(n)?;
    let grid = TimeGrid::periodic(2.0 * n as f64, 2 * n)?;
    let uniform = Marginal::uniform(n);
    let along = |h: Vec<usize>| {
        from_classical_flow(&DiscreteClassicalFlow::step_map(space, h)?, &uniform, grid)
    };
    let q = match kind {
        StructureKind::TransitiveCycle => along(random_cycle(rng, n))?,
        StructureKind::RandomBijection => along(random_bijection(rng, n))?,
        StructureKind::CycleMix => {
            let parts = [along(random_cycle(rng, n))?, along(random_cycle(rng, n))?];
            let w = random_weights(rng, 2);
            mix(&parts, &w)?
        }
        StructureKind::BlockMixture => random_incompressible(rng, space, grid, 2)?,
        StructureKind::OrbitMeasure => {
            let h = random_cycle(rng, n);
            let mut path = vec![rng.random_range(0..n)];
            for _ in 1..grid.path_len() {
                path.push(h[*path.last().expect("path is nonempty")]);
            }
            orbit_measure(space, grid, path)?
        }
    };
    Ok((kind, q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_draws() {
        let a = random_bijection(&mut rng(7), 8);
        let b = random_bijection(&mut rng(7), 8);
        assert_eq!(a, b);
    }

    #[test]
    fn cycles_are_transitive() {
        let mut r = rng(1);
        for n in 1..9 {
            let h = random_cycle(&mut r, n);
            let mut c = 0;
            for step in 1..=n {
                c = h[c];
                assert_eq!(c == 0, step == n);
            }
        }
    }

    #[test]
    fn non_bijection_collides() {
        let mut r = rng(2);
        for _ in 0..50 {
            let h = random_non_bijection(&mut r, 5);
            let distinct: std::collections::BTreeSet<_> = h.iter().collect();
            assert_eq!(distinct.len(), 4);
        }
    }

    #[test]
    fn generated_measures_have_expected_incompressibility() {
        let mut r = rng(3);
        let space = StateSpace::circle(6).unwrap();
        let grid = TimeGrid::window(1.0, 5).unwrap();
        for _ in 0..20 {
            let q = random_incompressible(&mut r, space, grid, 3).unwrap();
            assert!(q.is_incompressible(1e-12));
            let p = perturbed_flow_measure(&mut r, space, grid).unwrap();
            assert!(!p.is_incompressible(1e-12));
        }
    }

    #[test]
    fn coupling_is_doubly_stochastic() {
        let eta = random_coupling(&mut rng(4), 5, 3);
        for i in 0..5 {
            let row: f64 = eta[i].iter().sum();
            let col: f64 = eta.iter().map(|r| r[i]).sum();
            assert!((row - 0.2).abs() < 1e-12 && (col - 0.2).abs() < 1e-12);
        }
    }
}
