//! Narrow interface to the LP backend: minimize `c·x` subject to sparse
//! equality rows and `x ≥ 0`.

use minilp::{ComparisonOp, OptimizationDirection, Problem};

use crate::error::{Error, Result};

/// One equality row: sparse `(column, coefficient)` terms and right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualityRow {
    pub terms: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// Returns the primal solution and the backend's objective value.
pub fn minimize(costs: &[f64], rows: &[EqualityRow]) -> Result<(Vec<f64>, f64)> {
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = costs
        .iter()
        .map(|&c| problem.add_var(c, (0.0, f64::INFINITY)))
        .collect();
    for row in rows {
        if let Some(&(col, _)) = row.terms.iter().find(|(col, _)| *col >= vars.len()) {
            return Err(Error::Solver(format!("row references column {col}")));
        }
        problem.add_constraint(
            row.terms.iter().map(|&(col, a)| (vars[col], a)),
            ComparisonOp::Eq,
            row.rhs,
        );
    }
    let solution = problem.solve().map_err(|e| match e {
        minilp::Error::Infeasible => Error::Infeasible,
        minilp::Error::Unbounded => Error::Solver("objective is unbounded".into()),
    })?;
    let x = vars.iter().map(|&v| *solution.var_value(v)).collect();
    Ok((x, solution.objective()))
}
