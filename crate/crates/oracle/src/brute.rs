//! Optimum by enumerating every basic solution.

use num_traits::{One, Signed, Zero};

use crate::simplex::{EqualityLp, Q};

/// Gaussian elimination; returns the reduced matrix and its pivot columns.
fn row_reduce(mut m: Vec<Vec<Q>>, cols: usize) -> (Vec<Vec<Q>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Q::one() / &m[r][c];
        for v in m[r].iter_mut() {
            *v = &*v * &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v = &*v - &f * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    (m, pivots)
}

pub fn rank(a: &[Vec<Q>]) -> usize {
    let cols = a.first().map_or(0, |r| r.len());
    row_reduce(a.to_vec(), cols).1.len()
}

/// Unique solution of `A_S x = b` restricted to `columns`, if there is one.
fn solve_on(lp: &EqualityLp, columns: &[usize]) -> Option<Vec<Q>> {
    let k = columns.len();
    let aug: Vec<Vec<Q>> =
        lp.a.iter()
            .zip(&lp.b)
            .map(|(row, b)| {
                columns
                    .iter()
                    .map(|&j| row[j].clone())
                    .chain([b.clone()])
                    .collect()
            })
            .collect();
    let (red, pivots) = row_reduce(aug, k + 1);
    if pivots.len() != k || pivots.last() == Some(&k) {
        return None;
    }
    Some((0..k).map(|i| red[i][k].clone()).collect())
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Minimum of `c·x` over every basic feasible solution, with the minimizer.
/// `None` when the program is infeasible. Panics above `max_subsets`
/// candidate bases.
pub fn basic_solution_minimum(lp: &EqualityLp, max_subsets: u64) -> Option<(Vec<Q>, Q)> {
    let n = lp.c.len();
    let r = rank(&lp.a);
    let mut subsets: u64 = 1;
    for i in 0..r as u64 {
        subsets = subsets * (n as u64 - i) / (i + 1);
        assert!(subsets <= max_subsets, "too many candidate bases");
    }
    let mut idx: Vec<usize> = (0..r).collect();
    let mut best: Option<(Vec<Q>, Q)> = None;
    loop {
        if let Some(xs) = solve_on(lp, &idx) {
            if xs.iter().all(|v| !v.is_negative()) {
                let mut x = vec![Q::zero(); n];
                for (&j, v) in idx.iter().zip(xs) {
                    x[j] = v;
                }
                let value: Q = x.iter().zip(&lp.c).map(|(a, b)| a * b).sum();
                if best.as_ref().map_or(true, |(_, v)| value < *v) {
                    best = Some((x, value));
                }
            }
        }
        if r == 0 || !next_combination(&mut idx, n) {
            break;
        }
    }
    best
}
