//! Reference computations for cross-checking gifkit.
//!
//! Nothing here shares code with `gifkit-core`: distances, path enumeration,
//! action and the linear program are re-derived from their definitions, and
//! the program is solved in exact rational arithmetic.

pub mod brute;
pub mod simplex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

pub use simplex::{solve, EqualityLp, LpOutcome, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    Circle,
    Torus,
}

/// A minimum-action instance with an exact coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub geometry: Geometry,
    /// Cells per axis.
    pub side: usize,
    pub circumference: f64,
    pub horizon: f64,
    pub n_steps: usize,
    /// Endpoint law; interior marginals are pinned to its row sums.
    pub eta: Vec<Vec<Q>>,
    /// Density at the starting cell; `None` means 1.
    pub rho: Option<Vec<f64>>,
    /// Empty, a single static potential, or one per step `0..N`.
    pub potential: Vec<Vec<f64>>,
}

pub fn exact(v: f64) -> Q {
    BigRational::from_float(v).expect("finite input")
}

pub fn to_f64(v: &Q) -> f64 {
    v.to_f64().expect("representable")
}

impl Instance {
    pub fn cells(&self) -> usize {
        match self.geometry {
            Geometry::Circle => self.side,
            Geometry::Torus => self.side * self.side,
        }
    }

    /// Squared lattice distance in cells, wrapping on every axis.
    pub fn steps_sq(&self, i: usize, j: usize) -> u64 {
        let s = self.side;
        let wrap = |a: usize, b: usize| {
            let d = a.abs_diff(b);
            let d = d.min(s - d) as u64;
            d * d
        };
        match self.geometry {
            Geometry::Circle => wrap(i, j),
            Geometry::Torus => wrap(i / s, j / s) + wrap(i % s, j % s),
        }
    }

    fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    fn width(&self) -> f64 {
        self.circumference / self.side as f64
    }

    fn potential(&self, k: usize, c: usize) -> f64 {
        match self.potential.len() {
            0 => 0.0,
            1 => self.potential[0][c],
            _ => self.potential[k][c],
        }
    }

    fn rho(&self, c: usize) -> f64 {
        self.rho.as_ref().map_or(1.0, |r| r[c])
    }

    /// Action of one path in floating point, summing kinetic terms in
    /// integer cell units first.
    pub fn path_action(&self, path: &[usize]) -> f64 {
        let s2: u64 = path.windows(2).map(|w| self.steps_sq(w[0], w[1])).sum();
        let u: f64 = (0..self.n_steps).map(|k| self.potential(k, path[k])).sum();
        let w = self.width();
        self.rho(path[0]) * (s2 as f64 * w * w / (2.0 * self.dt()) - u * self.dt())
    }

    /// Exact action of one path given the floating-point problem data.
    pub fn exact_path_action(&self, path: &[usize]) -> Q {
        let s2: u64 = path.windows(2).map(|w| self.steps_sq(w[0], w[1])).sum();
        let w = exact(self.width());
        let dt = exact(self.dt());
        let two = Q::from_integer(BigInt::from(2));
        let kinetic = Q::from_integer(BigInt::from(s2)) * &w * &w / (two * &dt);
        let mut u = Q::zero();
        for k in 0..self.n_steps {
            u += exact(self.potential(k, path[k]));
        }
        exact(self.rho(path[0])) * (kinetic - u * dt)
    }

    /// Every path in lexicographic order, by odometer.
    pub fn paths(&self) -> Vec<Vec<usize>> {
        let n = self.cells();
        let len = self.n_steps + 1;
        let mut out = Vec::new();
        let mut p = vec![0usize; len];
        loop {
            out.push(p.clone());
            let mut i = len;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                p[i] += 1;
                if p[i] < n {
                    break;
                }
                p[i] = 0;
            }
        }
    }

    pub fn eta_f64(&self) -> Vec<Vec<f64>> {
        self.eta
            .iter()
            .map(|r| r.iter().map(to_f64).collect())
            .collect()
    }

    /// Paths as columns; rows fix the marginal at interior times to the row
    /// sums of `η` and the endpoint law to `η`.
    pub fn lp(&self) -> (Vec<Vec<usize>>, EqualityLp) {
        let n = self.cells();
        let paths = self.paths();
        let eta = &self.eta;
        assert!(
            eta.len() == n && eta.iter().all(|r| r.len() == n),
            "coupling size"
        );
        let mu: Vec<Q> = eta.iter().map(|r| r.iter().sum()).collect();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for k in 1..self.n_steps {
            for c in 0..n {
                a.push(
                    paths
                        .iter()
                        .map(|p| {
                            if p[k] == c {
                                Q::from_integer(1.into())
                            } else {
                                Q::zero()
                            }
                        })
                        .collect(),
                );
                b.push(mu[c].clone());
            }
        }
        for x in 0..n {
            for y in 0..n {
                a.push(
                    paths
                        .iter()
                        .map(|p| {
                            if p[0] == x && p[self.n_steps] == y {
                                Q::from_integer(1.into())
                            } else {
                                Q::zero()
                            }
                        })
                        .collect(),
                );
                b.push(eta[x][y].clone());
            }
        }
        let c = paths.iter().map(|p| self.exact_path_action(p)).collect();
        (paths, EqualityLp { a, b, c })
    }

    /// Without density or potential every path costs its integer squared
    /// step count times `w²/(2 dt)`.
    fn kinetic_scale(&self) -> Option<Q> {
        (self.rho.is_none() && self.potential.is_empty()).then(|| {
            let w = exact(self.width());
            let two = Q::from_integer(BigInt::from(2));
            &w * &w / (two * exact(self.dt()))
        })
    }

    /// Exact optimum by the rational simplex. Pure kinetic problems are
    /// solved with integer costs and rescaled, which keeps the tableau small.
    pub fn optimum(&self) -> Option<Q> {
        let (paths, mut lp) = self.lp();
        let scale = self.kinetic_scale();
        if scale.is_some() {
            lp.c = paths
                .iter()
                .map(|p| {
                    let s2: u64 = p.windows(2).map(|w| self.steps_sq(w[0], w[1])).sum();
                    Q::from_integer(BigInt::from(s2))
                })
                .collect();
        }
        match solve(&lp) {
            LpOutcome::Optimal { value, .. } => Some(scale.map_or(value.clone(), |s| value * s)),
            _ => None,
        }
    }

    /// Exact optimum by enumerating every basis.
    pub fn brute_optimum(&self, max_subsets: u64) -> Option<Q> {
        brute::basic_solution_minimum(&self.lp().1, max_subsets).map(|(_, v)| v)
    }
}

/// `counts / (n·S)` for a count matrix whose rows and columns all sum to
/// the same integer `S`. Panics on unequal line sums.
pub fn counts_coupling(counts: &[Vec<u64>]) -> Vec<Vec<Q>> {
    let n = counts.len();
    let s: u64 = counts[0].iter().sum();
    for i in 0..n {
        let row: u64 = counts[i].iter().sum();
        let col: u64 = counts.iter().map(|r| r[i]).sum();
        assert!(row == s && col == s, "unequal line sums");
    }
    let denom = BigInt::from(n as u64 * s);
    counts
        .iter()
        .map(|r| {
            r.iter()
                .map(|&c| Q::new(BigInt::from(c), denom.clone()))
                .collect()
        })
        .collect()
}

/// The coupling of a permutation `h`: mass `1/n` on each `(x, h(x))`.
pub fn permutation_coupling(h: &[usize]) -> Vec<Vec<Q>> {
    let n = h.len();
    let mut m = vec![vec![0; n]; n];
    for (x, &y) in h.iter().enumerate() {
        m[x][y] = 1;
    }
    counts_coupling(&m)
}

/// Exact values of a floating-point coupling.
pub fn float_coupling(eta: &[Vec<f64>]) -> Vec<Vec<Q>> {
    eta.iter()
        .map(|r| r.iter().map(|&v| exact(v)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circle(side: usize, horizon: f64, n_steps: usize, h: &[usize]) -> Instance {
        Instance {
            geometry: Geometry::Circle,
            side,
            circumference: 2.0 * PI,
            horizon,
            n_steps,
            eta: permutation_coupling(h),
            rho: None,
            potential: Vec::new(),
        }
    }

    #[test]
    fn hand_computed_kinetic_energy() {
        let inst = circle(4, 1.0, 2, &[0, 1, 2, 3]);
        let a = inst.path_action(&[0, 1, 2]);
        assert!((a - PI * PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn odometer_covers_everything() {
        let inst = circle(3, 1.0, 2, &[0, 1, 2]);
        let paths = inst.paths();
        assert_eq!(paths.len(), 27);
        assert!(paths.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn swap_on_two_cells() {
        let inst = circle(2, 1.0, 1, &[1, 0]);
        let simplex = inst.optimum().unwrap();
        let brute = inst.brute_optimum(1000).unwrap();
        assert_eq!(simplex, brute);
        // Every particle crosses one cell of width π in one step of length 1.
        assert!((to_f64(&simplex) - PI * PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn torus_distances() {
        let inst = Instance {
            geometry: Geometry::Torus,
            side: 4,
            ..circle(4, 1.0, 1, &(0..16).collect::<Vec<_>>())
        };
        assert_eq!(inst.steps_sq(0, 5), 2);
        assert_eq!(inst.steps_sq(0, 15), 2);
        assert_eq!(inst.steps_sq(0, 10), 8);
    }
}
