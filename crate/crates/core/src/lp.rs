//! Dense two-phase simplex for small linear programs.
//!
//! Problems are stated as
//!
//! ```text
//! minimize    c x
//! subject to  A_eq x  = b_eq
//!             a_k x  <= beta_k      for every inequality row k
//!             lo_j   <= x_j <= hi_j (either side may be infinite)
//! ```
//!
//! and are rewritten internally into `A y = b, y >= 0` by shifting, mirroring
//! or splitting each variable and adding one slack per inequality. Pivoting
//! follows Bland's rule, so degenerate problems terminate.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub eq_matrix: Vec<Vec<f64>>,
    pub eq_rhs: Vec<f64>,
    pub ineq_rows: Vec<(Vec<f64>, f64)>,
    /// `(lower, upper)`, infinite for a missing side.
    pub variable_bounds: Vec<(f64, f64)>,
    pub variable_names: Vec<String>,
}

impl LpProblem {
    /// Free variables, zero objective, no constraints.
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        let variable_names: Vec<String> = names.into_iter().map(Into::into).collect();
        let n = variable_names.len();
        LpProblem {
            objective: vec![0.0; n],
            eq_matrix: Vec::new(),
            eq_rhs: Vec::new(),
            ineq_rows: Vec::new(),
            variable_bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); n],
            variable_names,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.variable_names.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variable_names.iter().position(|n| n == name)
    }

    pub fn with_objective(mut self, objective: Vec<f64>) -> Self {
        self.objective = objective;
        self
    }

    pub fn add_equality(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.eq_matrix.push(row);
        self.eq_rhs.push(rhs);
        self
    }

    pub fn add_inequality(&mut self, row: Vec<f64>, bound: f64) -> &mut Self {
        self.ineq_rows.push((row, bound));
        self
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> &mut Self {
        self.variable_bounds[var] = (lower, upper);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        let check = |len: usize| {
            if len == n {
                Ok(())
            } else {
                Err(Error::DimensionMismatch { expected: n, actual: len })
            }
        };
        check(self.objective.len())?;
        check(self.variable_bounds.len())?;
        if self.eq_rhs.len() != self.eq_matrix.len() {
            return Err(Error::DimensionMismatch {
                expected: self.eq_matrix.len(),
                actual: self.eq_rhs.len(),
            });
        }
        for row in &self.eq_matrix {
            check(row.len())?;
        }
        for (row, _) in &self.ineq_rows {
            check(row.len())?;
        }
        for (j, &(lo, hi)) in self.variable_bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::InvalidParameter {
                    name: "variable_bounds",
                    reason: format!("`{}` has bounds [{lo}, {hi}]", self.variable_names[j]),
                });
            }
        }
        let finite = self.objective.iter().all(|v| v.is_finite())
            && self.eq_rhs.iter().all(|v| v.is_finite())
            && self.eq_matrix.iter().flatten().all(|v| v.is_finite())
            && self
                .ineq_rows
                .iter()
                .all(|(r, b)| b.is_finite() && r.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(Error::InvalidParameter {
                name: "problem",
                reason: "non-finite coefficient".into(),
            });
        }
        Ok(())
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        crate::statics::dot(&self.objective, x)
    }

    /// Largest violation of any equality, inequality or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (row, &b) in self.eq_matrix.iter().zip(&self.eq_rhs) {
            worst = worst.max((crate::statics::dot(row, x) - b).abs());
        }
        for (row, b) in &self.ineq_rows {
            worst = worst.max(crate::statics::dot(row, x) - b);
        }
        for (&v, &(lo, hi)) in x.iter().zip(&self.variable_bounds) {
            worst = worst.max(lo - v).max(v - hi);
        }
        worst
    }
}

/// Replaces the cost of each named variable `v` by a unit cost on a new
/// variable `t_v >= |v|`, so the lifted problem minimizes `sum |v|` plus
/// whatever linear cost the other variables carry.
///
/// The new variables are appended after the originals, named `abs(<v>)`.
pub fn linearize_abs<S: AsRef<str>>(problem: &LpProblem, abs_variables: &[S]) -> Result<LpProblem> {
    let mut indices = Vec::with_capacity(abs_variables.len());
    for name in abs_variables {
        let name = name.as_ref();
        let idx = problem
            .index_of(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
        indices.push(idx);
    }

    let n = problem.num_vars();
    let lifted_n = n + indices.len();
    let widen = |row: &Vec<f64>| {
        let mut r = row.clone();
        r.resize(lifted_n, 0.0);
        r
    };

    let mut lifted = LpProblem {
        objective: widen(&problem.objective),
        eq_matrix: problem.eq_matrix.iter().map(widen).collect(),
        eq_rhs: problem.eq_rhs.clone(),
        ineq_rows: problem.ineq_rows.iter().map(|(r, b)| (widen(r), *b)).collect(),
        variable_bounds: problem.variable_bounds.clone(),
        variable_names: problem.variable_names.clone(),
    };

    for (k, &v) in indices.iter().enumerate() {
        let t = n + k;
        lifted.objective[v] = 0.0;
        lifted.objective[t] = 1.0;
        lifted.variable_bounds.push((0.0, f64::INFINITY));
        lifted
            .variable_names
            .push(format!("abs({})", problem.variable_names[v]));
        for sign in [1.0, -1.0] {
            let mut row = vec![0.0; lifted_n];
            row[v] = sign;
            row[t] = -1.0;
            lifted.ineq_rows.push((row, 0.0));
        }
    }
    Ok(lifted)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Empty unless `status` is `Optimal`.
    pub values: Vec<f64>,
    /// `NaN` when infeasible, `-inf` when unbounded.
    pub objective_value: f64,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Smallest pivot element the solver will divide by.
    pub pivot_tolerance: f64,
    /// Phase-one objective below which the problem counts as feasible,
    /// relative to `max(1, |b|_inf)`.
    pub feasibility_tolerance: f64,
    /// Reduced costs above `-optimality_tolerance` count as non-negative.
    pub optimality_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            pivot_tolerance: 1e-12,
            feasibility_tolerance: 1e-9,
            optimality_tolerance: 1e-11,
            max_iterations: 50_000,
        }
    }
}

/// How an original variable is expressed in non-negative standard-form
/// columns: `x = offset + sum(sign * y_col)`.
#[derive(Debug, Clone)]
struct VarMap {
    offset: f64,
    columns: Vec<(usize, f64)>,
}

/// Holds the working tableau; one solve at a time.
#[derive(Debug)]
pub struct Simplex {
    options: SolverOptions,
    rows: Vec<Vec<f64>>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    /// Columns that may enter the basis.
    allowed: Vec<bool>,
    iterations: usize,
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

impl Simplex {
    pub fn new(options: SolverOptions) -> Self {
        Simplex {
            options,
            rows: Vec::new(),
            cost: Vec::new(),
            basis: Vec::new(),
            allowed: Vec::new(),
            iterations: 0,
        }
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    pub fn solve(&mut self, problem: &LpProblem) -> Result<LpSolution> {
        problem.validate()?;
        self.iterations = 0;

        let (var_maps, num_structural) = standard_columns(problem);
        let n = problem.num_vars();

        // Build `A y (+ slack) = b` row by row.
        let mut std_rows: Vec<(Vec<f64>, f64, Option<usize>)> = Vec::new();
        let mut num_slack = 0;
        let lift = |row: &[f64], rhs: f64| {
            let mut out = vec![0.0; num_structural];
            let mut b = rhs;
            for (j, &a) in row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                b -= a * var_maps[j].offset;
                for &(col, sign) in &var_maps[j].columns {
                    out[col] += a * sign;
                }
            }
            (out, b)
        };
        for (row, &rhs) in problem.eq_matrix.iter().zip(&problem.eq_rhs) {
            let (r, b) = lift(row, rhs);
            std_rows.push((r, b, None));
        }
        for (row, bound) in &problem.ineq_rows {
            let (r, b) = lift(row, *bound);
            std_rows.push((r, b, Some(num_slack)));
            num_slack += 1;
        }
        for (j, &(lo, hi)) in problem.variable_bounds.iter().enumerate() {
            if lo.is_finite() && hi.is_finite() {
                let mut r = vec![0.0; num_structural];
                r[var_maps[j].columns[0].0] = 1.0;
                std_rows.push((r, hi - lo, Some(num_slack)));
                num_slack += 1;
            }
        }

        let m = std_rows.len();
        let num_real = num_structural + num_slack;
        let width = num_real + m + 1;
        let rhs_col = width - 1;
        let b_scale = std_rows.iter().fold(1.0f64, |s, (_, b, _)| s.max(b.abs()));

        self.rows = Vec::with_capacity(m);
        self.basis = Vec::with_capacity(m);
        for (i, (coeffs, b, slack)) in std_rows.into_iter().enumerate() {
            let mut row = vec![0.0; width];
            row[..num_structural].copy_from_slice(&coeffs);
            if let Some(s) = slack {
                row[num_structural + s] = 1.0;
            }
            row[rhs_col] = b;
            if b < 0.0 {
                row.iter_mut().for_each(|v| *v = -*v);
            }
            row[num_real + i] = 1.0;
            self.rows.push(row);
            self.basis.push(num_real + i);
        }

        // Phase one: minimize the sum of artificials.
        self.allowed = (0..width - 1).map(|j| j < num_real).collect();
        self.cost = vec![0.0; width];
        for row in &self.rows {
            for j in 0..num_real {
                self.cost[j] -= row[j];
            }
            self.cost[rhs_col] -= row[rhs_col];
        }
        self.run_phase()?;
        let infeasibility = -self.cost[rhs_col];
        if infeasibility > self.options.feasibility_tolerance * b_scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                values: Vec::new(),
                objective_value: f64::NAN,
                iterations: self.iterations,
            });
        }
        self.drive_out_artificials(num_real);

        // Phase two on the original cost.
        let mut std_cost = vec![0.0; width];
        for (j, map) in var_maps.iter().enumerate() {
            for &(col, sign) in &map.columns {
                std_cost[col] += problem.objective[j] * sign;
            }
        }
        self.cost = std_cost;
        for i in 0..self.rows.len() {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..width {
                    self.cost[j] -= cb * self.rows[i][j];
                }
            }
        }
        if let PhaseOutcome::Unbounded = self.run_phase()? {
            return Ok(LpSolution {
                status: LpStatus::Unbounded,
                values: Vec::new(),
                objective_value: f64::NEG_INFINITY,
                iterations: self.iterations,
            });
        }

        let mut y = vec![0.0; num_real];
        for (i, &bv) in self.basis.iter().enumerate() {
            if bv < num_real {
                y[bv] = self.rows[i][rhs_col];
            }
        }
        let values: Vec<f64> = (0..n)
            .map(|j| {
                var_maps[j].offset
                    + var_maps[j]
                        .columns
                        .iter()
                        .map(|&(c, s)| s * y[c])
                        .sum::<f64>()
            })
            .collect();
        let objective_value = problem.objective_at(&values);

        let violation = problem.max_violation(&values);
        if violation > 1e3 * self.options.feasibility_tolerance * b_scale {
            return Err(Error::NumericalBreakdown(format!(
                "final vertex violates constraints by {violation:e}"
            )));
        }

        Ok(LpSolution {
            status: LpStatus::Optimal,
            values,
            objective_value,
            iterations: self.iterations,
        })
    }

    fn run_phase(&mut self) -> Result<PhaseOutcome> {
        let rhs_col = self.cost.len() - 1;
        loop {
            // Bland: lowest-index column with a negative reduced cost.
            let entering = (0..rhs_col)
                .find(|&j| self.allowed[j] && self.cost[j] < -self.options.optimality_tolerance);
            let Some(entering) = entering else {
                return Ok(PhaseOutcome::Optimal);
            };

            let mut leaving: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[entering];
                if a <= self.options.pivot_tolerance {
                    continue;
                }
                let ratio = row[rhs_col] / a;
                leaving = match leaving {
                    None => Some((i, ratio)),
                    Some((best, best_ratio)) => {
                        let tie = (ratio - best_ratio).abs() <= 1e-12 * (1.0 + best_ratio.abs());
                        if ratio < best_ratio && !tie
                            || tie && self.basis[i] < self.basis[best]
                        {
                            Some((i, ratio.min(best_ratio)))
                        } else {
                            Some((best, best_ratio))
                        }
                    }
                };
            }
            let Some((pivot_row, _)) = leaving else {
                return Ok(PhaseOutcome::Unbounded);
            };

            self.iterations += 1;
            if self.iterations > self.options.max_iterations {
                return Err(Error::NumericalBreakdown(format!(
                    "iteration limit {} reached",
                    self.options.max_iterations
                )));
            }
            self.pivot(pivot_row, entering);
        }
    }

    fn pivot(&mut self, pivot_row: usize, col: usize) {
        let p = self.rows[pivot_row][col];
        for v in self.rows[pivot_row].iter_mut() {
            *v /= p;
        }
        self.rows[pivot_row][col] = 1.0;
        let pivot = self.rows[pivot_row].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == pivot_row {
                continue;
            }
            let f = row[col];
            if f != 0.0 {
                for (v, &pv) in row.iter_mut().zip(&pivot) {
                    *v -= f * pv;
                }
                row[col] = 0.0;
            }
        }
        let f = self.cost[col];
        if f != 0.0 {
            for (v, &pv) in self.cost.iter_mut().zip(&pivot) {
                *v -= f * pv;
            }
            self.cost[col] = 0.0;
        }
        self.basis[pivot_row] = col;
    }

    /// After phase one every artificial still basic sits at zero. Pivot it
    /// out on any real column, or drop the row when none exists (the row
    /// is a linear combination of the others).
    fn drive_out_artificials(&mut self, num_real: usize) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] < num_real {
                i += 1;
                continue;
            }
            let col = (0..num_real)
                .filter(|&j| !self.basis.contains(&j))
                .max_by(|&a, &b| self.rows[i][a].abs().total_cmp(&self.rows[i][b].abs()))
                .filter(|&j| self.rows[i][j].abs() > self.options.pivot_tolerance.max(1e-9));
            match col {
                Some(j) => {
                    self.pivot(i, j);
                    i += 1;
                }
                None => {
                    self.rows.remove(i);
                    self.basis.remove(i);
                }
            }
        }
        for j in num_real..self.allowed.len() {
            self.allowed[j] = false;
        }
    }
}

fn standard_columns(problem: &LpProblem) -> (Vec<VarMap>, usize) {
    let mut next = 0;
    let maps = problem
        .variable_bounds
        .iter()
        .map(|&(lo, hi)| {
            let mut take = || {
                next += 1;
                next - 1
            };
            match (lo.is_finite(), hi.is_finite()) {
                (true, _) => VarMap { offset: lo, columns: vec![(take(), 1.0)] },
                (false, true) => VarMap { offset: hi, columns: vec![(take(), -1.0)] },
                (false, false) => VarMap {
                    offset: 0.0,
                    columns: vec![(take(), 1.0), (take(), -1.0)],
                },
            }
        })
        .collect();
    (maps, next)
}

/// Solves with default [`SolverOptions`].
pub fn solve_lp(problem: &LpProblem) -> Result<LpSolution> {
    Simplex::new(SolverOptions::default()).solve(problem)
}
