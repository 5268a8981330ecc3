//! Dense simplex for small covering programs
//!
//! ```text
//! minimize  c·x   subject to  A x >= b,  x >= 0,   with c >= 0.
//! ```
//!
//! The tableau is built for the dual `max b·y, Aᵀy <= c, y >= 0`, whose slack
//! basis is feasible because `c >= 0`. Entering and leaving variables follow
//! Bland's rule. The primal solution is read off the reduced costs of the dual
//! slack columns.

use crate::error::{Error, Result};

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CoveringSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Dual multipliers, one per row.
    pub y: Vec<f64>,
    pub dual_objective: f64,
    pub pivots: usize,
}

/// One `>=` row: sparse 0/1 coefficients on the listed variables.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverRow {
    pub vars: Vec<usize>,
    pub rhs: f64,
}

pub fn solve_covering(costs: &[f64], rows: &[CoverRow]) -> Result<CoveringSolution> {
    let nv = costs.len();
    let nr = rows.len();
    if costs.iter().any(|&c| !(c >= 0.0 && c.is_finite())) {
        return Err(Error::invalid("covering costs must be finite and nonnegative"));
    }
    for r in rows {
        if !r.rhs.is_finite() || r.vars.iter().any(|&v| v >= nv) {
            return Err(Error::invalid("covering row out of range or non-finite"));
        }
        if r.rhs > 0.0 && r.vars.is_empty() {
            return Err(Error::invalid("row with positive rhs and no variables is infeasible"));
        }
    }
    // Tableau rows are the nv dual constraints; columns are nr dual variables,
    // nv slacks and the right-hand side.
    let width = nr + nv + 1;
    let rhs_col = nr + nv;
    let mut t = vec![0.0; nv * width];
    for (j, r) in rows.iter().enumerate() {
        for &v in &r.vars {
            t[v * width + j] += 1.0;
        }
    }
    for i in 0..nv {
        t[i * width + nr + i] = 1.0;
        t[i * width + rhs_col] = costs[i];
    }
    let mut profit: Vec<f64> = rows.iter().map(|r| r.rhs).chain(std::iter::repeat(0.0).take(nv)).collect();
    let mut basis: Vec<usize> = (nr..nr + nv).collect();
    let scale = rows.iter().map(|r| r.rhs.abs()).fold(1.0, f64::max);
    let mut value = 0.0;
    let mut pivots = 0usize;
    let max_pivots = 50 * (nr + nv + 10) * (nv + 1);
    loop {
        let Some(enter) = (0..nr + nv).find(|&j| profit[j] > TOL * scale) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..nv {
            let a = t[i * width + enter];
            if a > TOL {
                let ratio = t[i * width + rhs_col] / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - TOL || (ratio <= lr + TOL && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        let Some((row, _)) = leave else {
            return Err(Error::invalid("covering program is infeasible (dual unbounded)"));
        };
        let piv = t[row * width + enter];
        for c in 0..width {
            t[row * width + c] /= piv;
        }
        for i in 0..nv {
            if i != row {
                let f = t[i * width + enter];
                if f != 0.0 {
                    for c in 0..width {
                        t[i * width + c] -= f * t[row * width + c];
                    }
                }
            }
        }
        let f = profit[enter];
        for c in 0..nr + nv {
            profit[c] -= f * t[row * width + c];
        }
        value += f * t[row * width + rhs_col];
        basis[row] = enter;
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::invalid("simplex exceeded its pivot limit"));
        }
    }
    let x: Vec<f64> = (0..nv).map(|i| (-profit[nr + i]).max(0.0)).collect();
    let mut y = vec![0.0; nr];
    for (i, &b) in basis.iter().enumerate() {
        if b < nr {
            y[b] = t[i * width + rhs_col];
        }
    }
    let objective = costs.iter().zip(&x).map(|(c, x)| c * x).sum();
    Ok(CoveringSolution {
        x,
        objective,
        y,
        dual_objective: value,
        pivots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(vars: &[usize], rhs: f64) -> CoverRow {
        CoverRow {
            vars: vars.to_vec(),
            rhs,
        }
    }

    #[test]
    fn single_row() {
        let s = solve_covering(&[1.0, 1.0, 1.0], &[row(&[0], 2.5)]).unwrap();
        assert_eq!(s.x, vec![2.5, 0.0, 0.0]);
        assert_eq!(s.objective, 2.5);
        assert_eq!(s.dual_objective, 2.5);
    }

    #[test]
    fn negative_rhs_is_slack() {
        let s = solve_covering(&[1.0, 1.0], &[row(&[0], -3.0), row(&[1], -1.0)]).unwrap();
        assert_eq!(s.x, vec![0.0, 0.0]);
        assert_eq!(s.objective, 0.0);
    }

    #[test]
    fn small_cover() {
        // x0 + x1 >= 2, x1 + x2 >= 2, x0 + x2 >= 2: optimum 3 at (1,1,1).
        let rows = [row(&[0, 1], 2.0), row(&[1, 2], 2.0), row(&[0, 2], 2.0)];
        let s = solve_covering(&[1.0; 3], &rows).unwrap();
        assert!((s.objective - 3.0).abs() < 1e-12);
        assert!((s.dual_objective - 3.0).abs() < 1e-12);
        for r in &rows {
            let lhs: f64 = r.vars.iter().map(|&v| s.x[v]).sum();
            assert!(lhs >= r.rhs - 1e-9);
        }
    }

    #[test]
    fn weighted_costs() {
        // min 3x0 + x1 s.t. x0 + x1 >= 1, x0 >= 0.5
        let s = solve_covering(&[3.0, 1.0], &[row(&[0, 1], 1.0), row(&[0], 0.5)]).unwrap();
        assert!((s.objective - 2.0).abs() < 1e-12);
        assert!((s.x[0] - 0.5).abs() < 1e-12 && (s.x[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn infeasible_empty_row() {
        assert!(solve_covering(&[1.0], &[row(&[], 1.0)]).is_err());
    }
}
