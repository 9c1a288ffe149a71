//! Dense two-phase simplex for the small linear programs in [`crate::flows`].
//!
//! Every solution is checked after the fact: primal feasibility, dual
//! feasibility (from the final reduced costs) and the duality gap. A solve
//! that does not pass those checks is reported as
//! [`LpError::Numerical`] together with the residuals.

use serde::Serialize;
use thiserror::Error;

/// Primal feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-9;
/// Dual feasibility / optimality tolerance.
pub const OPT_TOL: f64 = 1e-8;

const PIVOT_TOL: f64 = 1e-11;
const DEGENERATE_SWITCH: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex did not converge within {0} pivots")]
    IterationLimit(usize),
    #[error("numerical failure: residuals {0:?}")]
    Numerical(Residuals),
}

#[derive(Debug, Clone)]
struct Constraint {
    coeffs: Vec<(usize, f64)>,
    rel: Relation,
    rhs: f64,
}

/// `maximize c^T x  subject to  A x (<=|=|>=) b,  x >= 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
    /// One dual value per constraint, in insertion order.
    pub duals: Vec<f64>,
    pub residuals: Residuals,
    pub pivots: usize,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram { num_vars, objective: vec![0.0; num_vars], constraints: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn set_objective(&mut self, var: usize, coef: f64) {
        self.objective[var] = coef;
    }

    /// Adds `sum coeffs (rel) rhs`. Repeated variables are summed.
    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, rel: Relation, rhs: f64) -> usize {
        debug_assert!(coeffs.iter().all(|&(v, _)| v < self.num_vars));
        self.constraints.push(Constraint { coeffs, rel, rhs });
        self.constraints.len() - 1
    }

    pub fn maximize(&self) -> Result<LpSolution, LpError> {
        let mut t = Tableau::build(self);
        let limit = 50_000 + 20 * (t.rows + t.cols);

        if t.has_artificials() {
            let phase1: Vec<f64> = (0..t.cols).map(|j| if t.is_artificial(j) { -1.0 } else { 0.0 }).collect();
            t.set_objective(&phase1);
            t.run(limit, true)?;
            let infeasibility = -t.objective_value(&phase1);
            let scale = self.constraints.iter().fold(1.0f64, |m, c| m.max(c.rhs.abs()));
            if infeasibility > FEAS_TOL * scale {
                return Err(LpError::Infeasible);
            }
            t.drive_out_artificials();
        }

        let mut phase2 = vec![0.0; t.cols];
        phase2[..self.num_vars].copy_from_slice(&self.objective);
        t.set_objective(&phase2);
        t.run(limit, false)?;

        let mut x = vec![0.0; self.num_vars];
        for (i, &b) in t.basis.iter().enumerate() {
            if b < self.num_vars {
                x[b] = t.rhs(i).max(0.0);
            }
        }
        let duals: Vec<f64> = (0..t.rows).map(|i| t.row_sign[i] * t.reduced[t.unit_col[i]]).collect();
        let objective = self.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        let residuals = self.residuals(&x, &duals, objective);
        let scale = 1.0 + objective.abs();
        if residuals.primal > FEAS_TOL * 1e3 * scale
            || residuals.dual > OPT_TOL * 1e2
            || residuals.gap > OPT_TOL * 1e2 * scale
        {
            return Err(LpError::Numerical(residuals));
        }
        Ok(LpSolution { objective, x, duals, residuals, pivots: t.pivots })
    }

    /// Primal violation, dual violation and duality gap of a candidate pair.
    pub fn residuals(&self, x: &[f64], y: &[f64], objective: f64) -> Residuals {
        let mut primal = x.iter().fold(0.0f64, |m, &v| m.max(-v));
        let mut dual = 0.0f64;
        let mut aty = vec![0.0; self.num_vars];
        let mut dual_obj = 0.0;
        for (c, &yi) in self.constraints.iter().zip(y) {
            let lhs: f64 = c.coeffs.iter().map(|&(v, a)| a * x[v]).sum();
            let viol = match c.rel {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            primal = primal.max(viol);
            dual = dual.max(match c.rel {
                Relation::Le => -yi,
                Relation::Ge => yi,
                Relation::Eq => 0.0,
            });
            for &(v, a) in &c.coeffs {
                aty[v] += a * yi;
            }
            dual_obj += c.rhs * yi;
        }
        for (j, &cj) in self.objective.iter().enumerate() {
            dual = dual.max(cj - aty[j]);
        }
        Residuals { primal: primal.max(0.0), dual: dual.max(0.0), gap: (objective - dual_obj).abs() }
    }
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `rows x (cols + 1)`, rhs in the last column.
    data: Vec<f64>,
    reduced: Vec<f64>,
    basis: Vec<usize>,
    first_artificial: usize,
    unit_col: Vec<usize>,
    row_sign: Vec<f64>,
    pivots: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let rows = lp.constraints.len();
        let n = lp.num_vars;
        let n_slack = lp.constraints.iter().filter(|c| c.rel != Relation::Eq).count();
        // An artificial goes on every row that does not start with a usable slack.
        let needs_art: Vec<bool> = lp
            .constraints
            .iter()
            .map(|c| {
                let flipped = c.rhs < 0.0;
                match c.rel {
                    Relation::Eq => true,
                    Relation::Le => flipped,
                    Relation::Ge => !flipped,
                }
            })
            .collect();
        let n_art = needs_art.iter().filter(|&&b| b).count();
        let first_artificial = n + n_slack;
        let cols = n + n_slack + n_art;
        let width = cols + 1;
        let mut data = vec![0.0; rows * width];
        let mut basis = vec![0; rows];
        let mut unit_col = vec![0; rows];
        let mut row_sign = vec![1.0; rows];
        let (mut next_slack, mut next_art) = (n, first_artificial);
        for (i, c) in lp.constraints.iter().enumerate() {
            let sign = if c.rhs < 0.0 { -1.0 } else { 1.0 };
            row_sign[i] = sign;
            let row = &mut data[i * width..(i + 1) * width];
            for &(v, a) in &c.coeffs {
                row[v] += sign * a;
            }
            row[cols] = sign * c.rhs;
            if c.rel != Relation::Eq {
                // slack enters with +1 for <= and -1 for >=, before the flip
                let s = if c.rel == Relation::Le { 1.0 } else { -1.0 } * sign;
                row[next_slack] = s;
                if !needs_art[i] {
                    basis[i] = next_slack;
                    unit_col[i] = next_slack;
                }
                next_slack += 1;
            }
            if needs_art[i] {
                row[next_art] = 1.0;
                basis[i] = next_art;
                unit_col[i] = next_art;
                next_art += 1;
            }
        }
        Tableau {
            rows,
            cols,
            data,
            reduced: vec![0.0; cols],
            basis,
            first_artificial,
            unit_col,
            row_sign,
            pivots: 0,
        }
    }

    fn width(&self) -> usize {
        self.cols + 1
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width() + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.cols)
    }

    fn has_artificials(&self) -> bool {
        self.first_artificial < self.cols
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.first_artificial
    }

    /// Reduced costs `d_j = c_B B^-1 A_j - c_j` for objective `c`.
    fn set_objective(&mut self, c: &[f64]) {
        let w = self.width();
        let mut d: Vec<f64> = c.iter().map(|&v| -v).collect();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = c[b];
            if cb != 0.0 {
                let row = &self.data[i * w..i * w + self.cols];
                for (dj, &a) in d.iter_mut().zip(row) {
                    *dj += cb * a;
                }
            }
        }
        self.reduced = d;
    }

    fn objective_value(&self, c: &[f64]) -> f64 {
        self.basis.iter().enumerate().map(|(i, &b)| c[b] * self.rhs(i)).sum()
    }

    fn run(&mut self, limit: usize, allow_artificial: bool) -> Result<(), LpError> {
        let mut degenerate_streak = 0;
        let mut bland = false;
        for _ in 0..limit {
            let Some(enter) = self.entering(bland, allow_artificial) else {
                return Ok(());
            };
            let Some(leave) = self.leaving(enter) else {
                return Err(LpError::Unbounded);
            };
            if self.rhs(leave).abs() <= PIVOT_TOL {
                degenerate_streak += 1;
                if degenerate_streak >= DEGENERATE_SWITCH {
                    bland = true;
                }
            } else {
                degenerate_streak = 0;
            }
            self.pivot(leave, enter);
        }
        Err(LpError::IterationLimit(limit))
    }

    fn entering(&self, bland: bool, allow_artificial: bool) -> Option<usize> {
        let limit = if allow_artificial { self.cols } else { self.first_artificial };
        let mut best: Option<(usize, f64)> = None;
        for j in 0..limit {
            let d = self.reduced[j];
            if d < -OPT_TOL * 1e-1 {
                if bland {
                    return Some(j);
                }
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((j, d));
                }
            }
        }
        best.map(|(j, _)| j)
    }

    /// Minimum ratio; ties go to the smallest basic variable index.
    fn leaving(&self, enter: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.rows {
            let a = self.at(i, enter);
            if a > PIVOT_TOL {
                let ratio = self.rhs(i).max(0.0) / a;
                match best {
                    None => best = Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - 1e-12
                            || ((ratio - br).abs() <= 1e-12 && self.basis[i] < self.basis[bi])
                        {
                            best = Some((i, ratio));
                        }
                    }
                }
            }
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width();
        let p = self.at(r, c);
        {
            let row = &mut self.data[r * w..(r + 1) * w];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[c] = 1.0;
        }
        let pivot_row: Vec<f64> = self.data[r * w..(r + 1) * w].to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.data[i * w + c];
            if f.abs() > 0.0 {
                let row = &mut self.data[i * w..(i + 1) * w];
                for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        let f = self.reduced[c];
        if f != 0.0 {
            for (d, &pv) in self.reduced.iter_mut().zip(&pivot_row[..self.cols]) {
                *d -= f * pv;
            }
            self.reduced[c] = 0.0;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// After phase one, swaps zero-valued artificials out of the basis where a
    /// structural column can replace them. Rows with no such column are
    /// redundant and keep their artificial at zero.
    fn drive_out_artificials(&mut self) {
        for i in 0..self.rows {
            if !self.is_artificial(self.basis[i]) {
                continue;
            }
            let candidate = (0..self.first_artificial)
                .filter(|&j| self.at(i, j).abs() > 1e-9)
                .max_by(|&a, &b| self.at(i, a).abs().total_cmp(&self.at(i, b).abs()).then(b.cmp(&a)));
            if let Some(j) = candidate {
                self.pivot(i, j);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn textbook_max() {
        // max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, 3.0);
        lp.set_objective(1, 5.0);
        lp.add_constraint(vec![(0, 1.0)], Relation::Le, 4.0);
        lp.add_constraint(vec![(1, 2.0)], Relation::Le, 12.0);
        lp.add_constraint(vec![(0, 3.0), (1, 2.0)], Relation::Le, 18.0);
        let s = lp.maximize().unwrap();
        assert_abs_diff_eq!(s.objective, 36.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[0], 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[1], 6.0, epsilon = 1e-9);
        // shadow prices of the textbook example
        assert_abs_diff_eq!(s.duals[0], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.duals[1], 1.5, epsilon = 1e-9);
        assert_abs_diff_eq!(s.duals[2], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn equality_and_ge_rows() {
        // max x + y st x + y = 1, x >= 0.25, y - x >= -2
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, 1.0);
        lp.set_objective(1, 1.0);
        lp.add_constraint(vec![(0, 1.0), (1, 1.0)], Relation::Eq, 1.0);
        lp.add_constraint(vec![(0, 1.0)], Relation::Ge, 0.25);
        lp.add_constraint(vec![(1, 1.0), (0, -1.0)], Relation::Ge, -2.0);
        let s = lp.maximize().unwrap();
        assert_abs_diff_eq!(s.objective, 1.0, epsilon = 1e-9);
        assert!(s.x[0] >= 0.25 - 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.add_constraint(vec![(0, 1.0)], Relation::Le, 1.0);
        lp.add_constraint(vec![(0, 1.0)], Relation::Ge, 2.0);
        assert_eq!(lp.maximize().unwrap_err(), LpError::Infeasible);

        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, 1.0);
        lp.add_constraint(vec![(0, 1.0), (1, -1.0)], Relation::Le, 1.0);
        assert_eq!(lp.maximize().unwrap_err(), LpError::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        // x + y = 1 stated twice
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, 2.0);
        lp.set_objective(1, 1.0);
        lp.add_constraint(vec![(0, 1.0), (1, 1.0)], Relation::Eq, 1.0);
        lp.add_constraint(vec![(0, 1.0), (1, 1.0)], Relation::Eq, 1.0);
        let s = lp.maximize().unwrap();
        assert_abs_diff_eq!(s.objective, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Beale's cycling example (cycles under textbook Dantzig without safeguards).
        let mut lp = LinearProgram::new(4);
        for (j, c) in [0.75, -150.0, 0.02, -6.0].into_iter().enumerate() {
            lp.set_objective(j, c);
        }
        lp.add_constraint(vec![(0, 0.25), (1, -60.0), (2, -0.04), (3, 9.0)], Relation::Le, 0.0);
        lp.add_constraint(vec![(0, 0.5), (1, -90.0), (2, -0.02), (3, 3.0)], Relation::Le, 0.0);
        lp.add_constraint(vec![(2, 1.0)], Relation::Le, 1.0);
        let s = lp.maximize().unwrap();
        assert_abs_diff_eq!(s.objective, 0.05, epsilon = 1e-9);
    }
}
