//! Two-phase revised simplex over exact rationals.
//!
//! Entering columns follow Dantzig's rule until a run of degenerate pivots,
//! then Bland's rule for the rest of the phase, which cannot cycle. The
//! solve first runs on `i128` fractions with checked arithmetic and repeats
//! on arbitrary-precision rationals if anything overflows.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, ToPrimitive, Zero};

pub type Q = BigRational;

type Small = Ratio<i128>;

/// Minimize `c·x` subject to `A x = b`, `x ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualityLp {
    pub a: Vec<Vec<Q>>,
    pub b: Vec<Q>,
    pub c: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<Q>, value: Q },
    Infeasible,
    Unbounded,
}

/// Exact field arithmetic; `None` signals overflow.
trait Field: Clone + Ord + Zero + One {
    fn fadd(&self, o: &Self) -> Option<Self>;
    fn fsub(&self, o: &Self) -> Option<Self>;
    fn fmul(&self, o: &Self) -> Option<Self>;
    fn fdiv(&self, o: &Self) -> Option<Self>;
    fn fneg(&self) -> Self;
    fn is_neg(&self) -> bool {
        *self < Self::zero()
    }
    fn is_pos(&self) -> bool {
        *self > Self::zero()
    }
}

impl Field for Q {
    fn fadd(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn fsub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn fmul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn fdiv(&self, o: &Self) -> Option<Self> {
        Some(self / o)
    }
    fn fneg(&self) -> Self {
        -self.clone()
    }
}

impl Field for Small {
    fn fadd(&self, o: &Self) -> Option<Self> {
        self.checked_add(o)
    }
    fn fsub(&self, o: &Self) -> Option<Self> {
        self.checked_sub(o)
    }
    fn fmul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(o)
    }
    fn fdiv(&self, o: &Self) -> Option<Self> {
        self.checked_div(o)
    }
    fn fneg(&self) -> Self {
        -*self
    }
}

fn to_small(v: &Q) -> Option<Small> {
    Some(Small::new(v.numer().to_i128()?, v.denom().to_i128()?))
}

fn from_small(v: &Small) -> Q {
    Q::new(BigInt::from(*v.numer()), BigInt::from(*v.denom()))
}

/// Revised simplex state: an explicit basis inverse over sparse columns.
struct Revised<'a, T> {
    cols: &'a [Vec<(usize, T)>],
    binv: Vec<Vec<T>>,
    xb: Vec<T>,
    basis: Vec<usize>,
}

impl<T: Field> Revised<'_, T> {
    /// `(B⁻¹ a_j)_r`.
    fn entry(&self, r: usize, j: usize) -> Option<T> {
        let row = &self.binv[r];
        let mut acc = T::zero();
        for (i, v) in &self.cols[j] {
            if !row[*i].is_zero() {
                acc = acc.fadd(&row[*i].fmul(v)?)?;
            }
        }
        Some(acc)
    }

    /// `B⁻¹ a_j`.
    fn column(&self, j: usize) -> Option<Vec<T>> {
        (0..self.binv.len()).map(|r| self.entry(r, j)).collect()
    }

    fn pivot(&mut self, r: usize, j: usize, u: &[T]) -> Option<()> {
        let p = u[r].clone();
        for v in self.binv[r].iter_mut() {
            if !v.is_zero() {
                *v = v.fdiv(&p)?;
            }
        }
        self.xb[r] = self.xb[r].fdiv(&p)?;
        let pivot_row = self.binv[r].clone();
        let pivot_x = self.xb[r].clone();
        for i in 0..self.binv.len() {
            if i == r || u[i].is_zero() {
                continue;
            }
            for (v, pv) in self.binv[i].iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v = v.fsub(&u[i].fmul(pv)?)?;
                }
            }
            self.xb[i] = self.xb[i].fsub(&u[i].fmul(&pivot_x)?)?;
        }
        self.basis[r] = j;
        Some(())
    }

    /// Minimizes `cost` over columns `< allowed`. `Some(false)` means
    /// unbounded.
    fn optimize(&mut self, cost: &[T], allowed: usize) -> Option<bool> {
        const DEGENERATE_RUN: usize = 50;
        let m = self.basis.len();
        let mut bland = false;
        let mut stalled = 0;
        loop {
            // Simplex multipliers y = c_B B⁻¹.
            let mut y = vec![T::zero(); m];
            for (k, &bj) in self.basis.iter().enumerate() {
                if !cost[bj].is_zero() {
                    for (yi, v) in y.iter_mut().zip(&self.binv[k]) {
                        if !v.is_zero() {
                            *yi = yi.fadd(&cost[bj].fmul(v)?)?;
                        }
                    }
                }
            }
            let mut entering: Option<(usize, T)> = None;
            for j in 0..allowed {
                let mut d = cost[j].clone();
                for (i, v) in &self.cols[j] {
                    if !y[*i].is_zero() {
                        d = d.fsub(&y[*i].fmul(v)?)?;
                    }
                }
                if d.is_neg() {
                    if bland {
                        entering = Some((j, d));
                        break;
                    }
                    if entering.as_ref().map_or(true, |(_, best)| d < *best) {
                        entering = Some((j, d));
                    }
                }
            }
            let Some((j, _)) = entering else {
                return Some(true);
            };
            let u = self.column(j)?;
            let mut best: Option<(usize, T)> = None;
            for i in 0..m {
                if u[i].is_pos() {
                    let ratio = self.xb[i].fdiv(&u[i])?;
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => {
                            ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                        }
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            let Some((r, step)) = best else {
                return Some(false);
            };
            if step.is_zero() {
                stalled += 1;
                bland |= stalled >= DEGENERATE_RUN;
            } else {
                stalled = 0;
            }
            self.pivot(r, j, &u)?;
        }
    }
}

enum Outcome<T> {
    Optimal(Vec<T>),
    Infeasible,
    Unbounded,
}

fn run<T: Field>(a: &[Vec<T>], b: &[T], c: &[T]) -> Option<Outcome<T>> {
    let m = a.len();
    let n = c.len();
    // Rows with negative right-hand side are negated; artificial column
    // n + i is the unit vector of row i.
    let flip: Vec<bool> = b.iter().map(|v| v.is_neg()).collect();
    let mut cols: Vec<Vec<(usize, T)>> = vec![Vec::new(); n + m];
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if !v.is_zero() {
                cols[j].push((i, if flip[i] { v.fneg() } else { v.clone() }));
            }
        }
        cols[n + i].push((i, T::one()));
    }
    let mut state = Revised {
        cols: &cols,
        binv: (0..m)
            .map(|i| {
                (0..m)
                    .map(|k| if k == i { T::one() } else { T::zero() })
                    .collect()
            })
            .collect(),
        xb: b
            .iter()
            .map(|v| if v.is_neg() { v.fneg() } else { v.clone() })
            .collect(),
        basis: (n..n + m).collect(),
    };

    let phase1: Vec<T> = (0..n + m)
        .map(|j| if j < n { T::zero() } else { T::one() })
        .collect();
    state.optimize(&phase1, n + m)?;
    if state
        .basis
        .iter()
        .zip(&state.xb)
        .any(|(&bj, x)| bj >= n && !x.is_zero())
    {
        return Some(Outcome::Infeasible);
    }

    // Drive zero artificials out where possible; the rest sit on redundant
    // rows, where no column can ever move them.
    for r in 0..m {
        if state.basis[r] >= n {
            let mut hit = None;
            for j in 0..n {
                if !state.entry(r, j)?.is_zero() {
                    hit = Some(j);
                    break;
                }
            }
            if let Some(j) = hit {
                let u = state.column(j)?;
                state.pivot(r, j, &u)?;
            }
        }
    }

    let phase2: Vec<T> = c.iter().cloned().chain((0..m).map(|_| T::zero())).collect();
    if !state.optimize(&phase2, n)? {
        return Some(Outcome::Unbounded);
    }
    let mut x = vec![T::zero(); n];
    for (&bj, v) in state.basis.iter().zip(&state.xb) {
        if bj < n {
            x[bj] = v.clone();
        }
    }
    Some(Outcome::Optimal(x))
}

fn small_lp(lp: &EqualityLp) -> Option<(Vec<Vec<Small>>, Vec<Small>, Vec<Small>)> {
    let a =
        lp.a.iter()
            .map(|r| r.iter().map(to_small).collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()?;
    let b = lp.b.iter().map(to_small).collect::<Option<Vec<_>>>()?;
    let c = lp.c.iter().map(to_small).collect::<Option<Vec<_>>>()?;
    Some((a, b, c))
}

pub fn solve(lp: &EqualityLp) -> LpOutcome {
    let m = lp.a.len();
    let n = lp.c.len();
    assert!(
        lp.a.iter().all(|r| r.len() == n) && lp.b.len() == m,
        "shape mismatch"
    );
    let fast = small_lp(lp)
        .and_then(|(a, b, c)| run(&a, &b, &c))
        .map(|o| match o {
            Outcome::Optimal(x) => Outcome::Optimal(x.iter().map(from_small).collect()),
            Outcome::Infeasible => Outcome::Infeasible,
            Outcome::Unbounded => Outcome::Unbounded,
        });
    let outcome = match fast {
        Some(o) => o,
        None => run(&lp.a, &lp.b, &lp.c).expect("big rationals do not overflow"),
    };
    match outcome {
        Outcome::Optimal(x) => {
            let value = x.iter().zip(&lp.c).map(|(a, b)| a * b).sum();
            LpOutcome::Optimal { x, value }
        }
        Outcome::Infeasible => LpOutcome::Infeasible,
        Outcome::Unbounded => LpOutcome::Unbounded,
    }
}

/// The same solve, forced onto arbitrary-precision rationals.
pub fn solve_big(lp: &EqualityLp) -> LpOutcome {
    match run(&lp.a, &lp.b, &lp.c).expect("big rationals do not overflow") {
        Outcome::Optimal(x) => {
            let value = x.iter().zip(&lp.c).map(|(a, b)| a * b).sum();
            LpOutcome::Optimal { x, value }
        }
        Outcome::Infeasible => LpOutcome::Infeasible,
        Outcome::Unbounded => LpOutcome::Unbounded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n.into(), d.into())
    }

    #[test]
    fn small_transport() {
        // x00 + x01 = 1/2, x10 + x11 = 1/2, x00 + x10 = 1/2, with costs
        // (0, 1, 1, 0): optimum 0 on the diagonal.
        let lp = EqualityLp {
            a: vec![
                vec![q(1, 1), q(1, 1), q(0, 1), q(0, 1)],
                vec![q(0, 1), q(0, 1), q(1, 1), q(1, 1)],
                vec![q(1, 1), q(0, 1), q(1, 1), q(0, 1)],
                vec![q(0, 1), q(1, 1), q(0, 1), q(1, 1)],
            ],
            b: vec![q(1, 2); 4],
            c: vec![q(0, 1), q(1, 1), q(1, 1), q(0, 1)],
        };
        match solve(&lp) {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, q(0, 1));
                assert_eq!(x, vec![q(1, 2), q(0, 1), q(0, 1), q(1, 2)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let infeasible = EqualityLp {
            a: vec![vec![q(1, 1)], vec![q(1, 1)]],
            b: vec![q(1, 1), q(2, 1)],
            c: vec![q(1, 1)],
        };
        assert_eq!(solve(&infeasible), LpOutcome::Infeasible);
        let unbounded = EqualityLp {
            a: vec![vec![q(1, 1), q(-1, 1)]],
            b: vec![q(0, 1)],
            c: vec![q(-1, 1), q(0, 1)],
        };
        assert_eq!(solve(&unbounded), LpOutcome::Unbounded);
    }

    #[test]
    fn negative_rhs_rows_are_flipped() {
        let lp = EqualityLp {
            a: vec![vec![q(-1, 1), q(-1, 1)]],
            b: vec![q(-3, 1)],
            c: vec![q(2, 1), q(1, 1)],
        };
        match solve(&lp) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, q(3, 1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn small_and_big_fields_agree() {
        // Transport between three sources and three sinks with mixed costs.
        let mut a = Vec::new();
        for i in 0..3 {
            a.push(
                (0..9)
                    .map(|j| if j / 3 == i { q(1, 1) } else { q(0, 1) })
                    .collect(),
            );
            a.push(
                (0..9)
                    .map(|j| if j % 3 == i { q(1, 1) } else { q(0, 1) })
                    .collect(),
            );
        }
        let lp = EqualityLp {
            a,
            b: vec![q(1, 3), q(1, 2), q(1, 3), q(1, 4), q(1, 3), q(1, 4)],
            c: (0..9).map(|j| q((j * 7 % 5) as i64, 3)).collect(),
        };
        assert_eq!(solve(&lp), solve_big(&lp));
        assert!(matches!(solve(&lp), LpOutcome::Optimal { .. }));
    }
}
