//! A small dense two-phase simplex over exact rationals with Bland's rule.
//!
//! Problem sizes here are tiny (tens of variables and constraints), so a
//! dense tableau with `BigRational` entries gives exact optimal bases and
//! certificates with no numerical questions. Bland's rule guarantees
//! termination.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintOp {
    Le,
    Ge,
    Eq,
}

/// Minimize `objective . x` subject to the constraints and `x >= 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<BigRational>,
    pub constraints: Vec<(Vec<BigRational>, ConstraintOp, BigRational)>,
}

#[derive(Clone, Debug)]
pub enum LpOutcome {
    Optimal {
        x: Vec<BigRational>,
        objective: BigRational,
    },
    Infeasible,
    Unbounded,
}

struct Tableau {
    // rows[r] = coefficients over all columns, then RHS last
    rows: Vec<Vec<BigRational>>,
    cost: Vec<BigRational>, // reduced-cost row, RHS last holds -objective
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let pivot = self.rows[row][col].clone();
        debug_assert!(!pivot.is_zero());
        for v in &mut self.rows[row] {
            *v /= &pivot;
        }
        for r in 0..self.rows.len() {
            if r == row {
                continue;
            }
            let factor = self.rows[r][col].clone();
            if factor.is_zero() {
                continue;
            }
            for c in 0..=self.cols {
                let delta = &self.rows[row][c] * &factor;
                self.rows[r][c] -= delta;
            }
        }
        let factor = self.cost[col].clone();
        if !factor.is_zero() {
            for c in 0..=self.cols {
                let delta = &self.rows[row][c] * &factor;
                self.cost[c] -= delta;
            }
        }
        self.basis[row] = col;
    }

    /// Bland's rule: entering column is the lowest-index negative reduced
    /// cost; leaving row is the lowest-index argmin of the ratio test.
    fn run(&mut self) -> Result<()> {
        loop {
            let entering = (0..self.cols).find(|&c| self.cost[c].is_negative());
            let Some(col) = entering else {
                return Ok(());
            };
            let mut leaving: Option<(usize, BigRational)> = None;
            for r in 0..self.rows.len() {
                if self.rows[r][col].is_positive() {
                    let ratio = &self.rows[r][self.cols] / &self.rows[r][col];
                    let better = match &leaving {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < *lratio
                                || (ratio == *lratio && self.basis[r] < self.basis[*lr])
                        }
                    };
                    if better {
                        leaving = Some((r, ratio));
                    }
                }
            }
            let Some((row, _)) = leaving else {
                return Err(Error::Unbounded);
            };
            self.pivot(row, col);
        }
    }
}

/// Solves the program exactly. Equality and `>=` rows get artificial
/// variables driven out by a phase-1 objective.
pub fn solve(lp: &LinearProgram) -> Result<LpOutcome> {
    let n = lp.num_vars;
    assert_eq!(lp.objective.len(), n);
    let m = lp.constraints.len();

    // normalize to non-negative RHS
    let mut rows_in: Vec<(Vec<BigRational>, ConstraintOp, BigRational)> = Vec::with_capacity(m);
    for (coeffs, op, rhs) in &lp.constraints {
        assert_eq!(coeffs.len(), n);
        if rhs.is_negative() {
            let flipped_op = match op {
                ConstraintOp::Le => ConstraintOp::Ge,
                ConstraintOp::Ge => ConstraintOp::Le,
                ConstraintOp::Eq => ConstraintOp::Eq,
            };
            rows_in.push((
                coeffs.iter().map(|c| -c).collect(),
                flipped_op,
                -rhs,
            ));
        } else {
            rows_in.push((coeffs.clone(), *op, rhs.clone()));
        }
    }

    let slack_count = rows_in
        .iter()
        .filter(|(_, op, _)| *op != ConstraintOp::Eq)
        .count();
    let artificial_count = rows_in
        .iter()
        .filter(|(_, op, _)| *op != ConstraintOp::Le)
        .count();
    let cols = n + slack_count + artificial_count;

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut slack_at = n;
    let mut art_at = n + slack_count;
    let mut artificial_cols = Vec::new();
    for (coeffs, op, rhs) in &rows_in {
        let mut row = vec![BigRational::zero(); cols + 1];
        row[..n].clone_from_slice(coeffs);
        row[cols] = rhs.clone();
        match op {
            ConstraintOp::Le => {
                row[slack_at] = BigRational::one();
                basis.push(slack_at);
                slack_at += 1;
            }
            ConstraintOp::Ge => {
                row[slack_at] = -BigRational::one();
                slack_at += 1;
                row[art_at] = BigRational::one();
                basis.push(art_at);
                artificial_cols.push(art_at);
                art_at += 1;
            }
            ConstraintOp::Eq => {
                row[art_at] = BigRational::one();
                basis.push(art_at);
                artificial_cols.push(art_at);
                art_at += 1;
            }
        }
        rows.push(row);
    }

    // phase 1: minimize the sum of artificials
    if !artificial_cols.is_empty() {
        let mut cost = vec![BigRational::zero(); cols + 1];
        for &c in &artificial_cols {
            cost[c] = BigRational::one();
        }
        // price out the basic artificials
        for (r, &b) in basis.iter().enumerate() {
            if artificial_cols.contains(&b) {
                for c in 0..=cols {
                    let delta = rows[r][c].clone();
                    cost[c] -= delta;
                }
            }
        }
        let mut t = Tableau {
            rows,
            cost,
            basis,
            cols,
        };
        t.run()?;
        if t.cost[cols].is_negative() {
            // phase-1 objective is -cost[rhs]; positive optimum = infeasible
            return Ok(LpOutcome::Infeasible);
        }
        // drive any artificial still basic at zero out of the basis
        for r in 0..t.rows.len() {
            if artificial_cols.contains(&t.basis[r]) {
                let pivot_col = (0..n + slack_count).find(|&c| !t.rows[r][c].is_zero());
                if let Some(col) = pivot_col {
                    t.pivot(r, col);
                }
            }
        }
        rows = t.rows;
        basis = t.basis;
        // drop artificial columns by zeroing them out of play
        for row in &mut rows {
            for &c in &artificial_cols {
                row[c] = BigRational::zero();
            }
        }
    }

    // phase 2: original objective
    let mut cost = vec![BigRational::zero(); cols + 1];
    cost[..n].clone_from_slice(&lp.objective);
    for (r, &b) in basis.iter().enumerate() {
        if !cost[b].is_zero() {
            let factor = cost[b].clone();
            for c in 0..=cols {
                let delta = &rows[r][c] * &factor;
                cost[c] -= delta;
            }
        }
    }
    let mut t = Tableau {
        rows,
        cost,
        basis,
        cols,
    };
    match t.run() {
        Ok(()) => {}
        Err(Error::Unbounded) => return Ok(LpOutcome::Unbounded),
        Err(e) => return Err(e),
    }
    let mut x = vec![BigRational::zero(); n];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rows[r][t.cols].clone();
        }
    }
    let objective = lp
        .objective
        .iter()
        .zip(&x)
        .map(|(c, v)| c * v)
        .sum();
    Ok(LpOutcome::Optimal { x, objective })
}

/// Exact convex-hull membership: is `target` a convex combination of
/// `points`? All data is exact (f64 inputs should be rationalized first).
pub fn hull_contains(points: &[Vec<BigRational>], target: &[BigRational]) -> Result<bool> {
    if points.is_empty() {
        return Ok(false);
    }
    let dim = target.len();
    let k = points.len();
    let mut constraints = Vec::new();
    for d in 0..dim {
        let coeffs: Vec<BigRational> = points.iter().map(|p| p[d].clone()).collect();
        constraints.push((coeffs, ConstraintOp::Eq, target[d].clone()));
    }
    constraints.push((
        vec![BigRational::one(); k],
        ConstraintOp::Eq,
        BigRational::one(),
    ));
    let lp = LinearProgram {
        num_vars: k,
        objective: vec![BigRational::zero(); k],
        constraints,
    };
    Ok(matches!(solve(&lp)?, LpOutcome::Optimal { .. }))
}

/// Exact rational from an f64 (every finite f64 is a dyadic rational).
pub fn rational_from_f64(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite float")
}
