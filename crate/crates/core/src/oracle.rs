//! Brute-force check of the LP optimum.
//!
//! Every solution of `A x = b` is `x_p + V c` with `V` an orthonormal basis
//! of the null space of `A`. With seven independent balances over ten
//! unknowns `c` is three-dimensional, small enough to enumerate on a grid
//! and test only the inequalities at each point.

use rayon::prelude::*;
use serde::Serialize;
use std::time::Instant;

use crate::design::{build_model, solve_model};
use crate::error::{Error, Result};
use crate::statics::{dot, EqualitySystem, InequalitySet, PipeScenario, RobotParams, TORQUE_INDICES};

/// Rank and consistency threshold.
pub const ELIMINATION_TOLERANCE: f64 = 1e-10;
/// Largest null-space dimension the grid search accepts.
pub const MAX_SEARCH_DIMENSION: usize = 4;
/// Slack below zero still counted as satisfying an inequality.
pub const GRID_FEASIBILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffineBasis {
    pub particular_solution: Vec<f64>,
    /// Orthonormal.
    pub basis_vectors: Vec<Vec<f64>>,
    pub dimension: usize,
}

impl AffineBasis {
    pub fn num_vars(&self) -> usize {
        self.particular_solution.len()
    }

    /// `x_p + V c`
    pub fn point(&self, coefficients: &[f64]) -> Vec<f64> {
        let mut x = self.particular_solution.clone();
        for (v, &c) in self.basis_vectors.iter().zip(coefficients) {
            for (xi, vi) in x.iter_mut().zip(v) {
                *xi += c * vi;
            }
        }
        x
    }

    /// `V^T (x - x_p)`; exact for points on the affine set.
    pub fn coefficients_of(&self, x: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = x
            .iter()
            .zip(&self.particular_solution)
            .map(|(a, b)| a - b)
            .collect();
        self.basis_vectors.iter().map(|v| dot(v, &d)).collect()
    }

    /// Same affine set, origin moved to `x_p + V c`.
    pub fn recentered(&self, coefficients: &[f64]) -> AffineBasis {
        AffineBasis {
            particular_solution: self.point(coefficients),
            basis_vectors: self.basis_vectors.clone(),
            dimension: self.dimension,
        }
    }
}

pub fn parametrize_solution_space(system: &EqualitySystem) -> Result<AffineBasis> {
    parametrize_rows(&system.matrix_rows(), &system.rhs)
}

/// Gauss-Jordan elimination with partial pivoting, then Gram-Schmidt on the
/// null-space vectors. The particular solution is projected onto the row
/// space, which makes it the minimum-norm solution.
pub fn parametrize_rows(matrix: &[Vec<f64>], rhs: &[f64]) -> Result<AffineBasis> {
    if matrix.len() != rhs.len() {
        return Err(Error::DimensionMismatch { expected: matrix.len(), actual: rhs.len() });
    }
    let n = matrix.first().map_or(0, Vec::len);
    if let Some(bad) = matrix.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, actual: bad.len() });
    }

    let mut a: Vec<Vec<f64>> = matrix
        .iter()
        .zip(rhs)
        .map(|(r, &b)| {
            let mut row = r.clone();
            row.push(b);
            row
        })
        .collect();
    let m = a.len();
    let scale = matrix.iter().flatten().fold(1.0f64, |s, v| s.max(v.abs()));
    let tol = ELIMINATION_TOLERANCE * scale;

    let mut pivot_cols = Vec::new();
    let mut row = 0;
    for col in 0..n {
        if row == m {
            break;
        }
        let (best, mag) = (row..m)
            .map(|i| (i, a[i][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("non-empty range");
        if mag <= tol {
            continue;
        }
        a.swap(row, best);
        let p = a[row][col];
        a[row].iter_mut().for_each(|v| *v /= p);
        let pivot = a[row].clone();
        for (i, r) in a.iter_mut().enumerate() {
            if i != row && r[col] != 0.0 {
                let f = r[col];
                r.iter_mut().zip(&pivot).for_each(|(v, pv)| *v -= f * pv);
            }
        }
        pivot_cols.push(col);
        row += 1;
    }
    let rank = row;

    let rhs_scale = rhs.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    let leftover = a[rank..].iter().fold(0.0f64, |s, r| s.max(r[n].abs()));
    if leftover > ELIMINATION_TOLERANCE * rhs_scale {
        return Err(Error::InconsistentSystem { residual: leftover, tolerance: ELIMINATION_TOLERANCE });
    }

    let mut particular = vec![0.0; n];
    for (r, &c) in pivot_cols.iter().enumerate() {
        particular[c] = a[r][n];
    }

    let free: Vec<usize> = (0..n).filter(|c| !pivot_cols.contains(c)).collect();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(free.len());
    for &f in &free {
        let mut v = vec![0.0; n];
        v[f] = 1.0;
        for (r, &c) in pivot_cols.iter().enumerate() {
            v[c] = -a[r][f];
        }
        // Two passes of modified Gram-Schmidt.
        for _ in 0..2 {
            for u in &basis {
                let p = dot(&v, u);
                v.iter_mut().zip(u).for_each(|(vi, ui)| *vi -= p * ui);
            }
        }
        let norm = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|vi| *vi /= norm);
        basis.push(v);
    }

    for u in &basis {
        let p = dot(&particular, u);
        particular.iter_mut().zip(u).for_each(|(xi, ui)| *xi -= p * ui);
    }

    let residual = matrix
        .iter()
        .zip(rhs)
        .fold(0.0f64, |s, (r, &b)| s.max((dot(r, &particular) - b).abs()));
    if residual > ELIMINATION_TOLERANCE * rhs_scale {
        return Err(Error::InconsistentSystem { residual, tolerance: ELIMINATION_TOLERANCE });
    }

    Ok(AffineBasis {
        particular_solution: particular,
        dimension: basis.len(),
        basis_vectors: basis,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    /// Smallest `sum |tau|` over feasible grid points; an upper bound on the
    /// true optimum.
    pub best_objective: f64,
    pub best_point: Vec<f64>,
    pub best_coefficients: Vec<f64>,
    pub feasible_points: usize,
    pub evaluated_points: usize,
    pub half_width: f64,
    pub points_per_axis: usize,
    pub grid_step: f64,
    /// Largest change of `sum |tau|` across one grid cell.
    pub lipschitz_bound: f64,
}

/// Evaluates `sum |x_j|, j in torque_index` at every point of the cube
/// `[-half_width, half_width]^dim` around the particular solution.
pub fn grid_search_optimum(
    basis: &AffineBasis,
    ineqs: &InequalitySet,
    torque_index: &[usize],
    half_width: f64,
    points_per_axis: usize,
) -> Result<OracleResult> {
    let dim = basis.dimension;
    if dim > MAX_SEARCH_DIMENSION {
        return Err(Error::InvalidParameter {
            name: "basis",
            reason: format!("null-space dimension {dim} exceeds {MAX_SEARCH_DIMENSION}"),
        });
    }
    if points_per_axis < 11 || points_per_axis.is_multiple_of(2) {
        return Err(Error::InvalidParameter {
            name: "points_per_axis",
            reason: format!("must be odd and >= 11, got {points_per_axis}"),
        });
    }
    if !(half_width.is_finite() && half_width > 0.0) {
        return Err(Error::InvalidParameter {
            name: "half_width",
            reason: format!("must be finite and > 0, got {half_width}"),
        });
    }
    let n = basis.num_vars();
    if let Some(&bad) = torque_index.iter().find(|&&j| j >= n) {
        return Err(Error::DimensionMismatch { expected: n, actual: bad + 1 });
    }

    // Everything in coefficient space: slack_k(c) = s0_k - g_k . c and
    // tau_j(c) = tau0_j + h_j . c
    let xp = &basis.particular_solution;
    let v = &basis.basis_vectors;
    let slack0: Vec<f64> = ineqs
        .rows
        .iter()
        .map(|r| r.bound - dot(&r.coefficients, xp))
        .collect();
    let slack_grad: Vec<Vec<f64>> = ineqs
        .rows
        .iter()
        .map(|r| v.iter().map(|vk| dot(&r.coefficients, vk)).collect())
        .collect();
    let tau0: Vec<f64> = torque_index.iter().map(|&j| xp[j]).collect();
    let tau_grad: Vec<Vec<f64>> = torque_index
        .iter()
        .map(|&j| v.iter().map(|vk| vk[j]).collect())
        .collect();

    let step = 2.0 * half_width / (points_per_axis - 1) as f64;
    let axis: Vec<f64> = (0..points_per_axis)
        .map(|i| -half_width + step * i as f64)
        .collect();
    // Odd count: the middle sample is exactly the particular solution.
    let mid = points_per_axis / 2;
    let total = points_per_axis.pow(dim as u32);
    let inner = if dim == 0 { 1 } else { total / points_per_axis };
    let outer = if dim == 0 { 1 } else { points_per_axis };

    let evaluate = |flat: usize, c: &mut [f64]| -> Option<f64> {
        let mut rest = flat;
        for ck in c.iter_mut().rev() {
            let i = rest % points_per_axis;
            rest /= points_per_axis;
            *ck = if i == mid { 0.0 } else { axis[i] };
        }
        for (s0, g) in slack0.iter().zip(&slack_grad) {
            if s0 - dot(g, c) < -GRID_FEASIBILITY_TOLERANCE {
                return None;
            }
        }
        Some(
            tau0.iter()
                .zip(&tau_grad)
                .map(|(t, h)| (t + dot(h, c)).abs())
                .sum(),
        )
    };

    // (objective, flat index, feasible count)
    let (best, best_flat, feasible) = (0..outer)
        .into_par_iter()
        .map(|o| {
            let mut c = vec![0.0; dim];
            let mut best = (f64::INFINITY, usize::MAX, 0usize);
            for flat in o * inner..(o + 1) * inner {
                if let Some(obj) = evaluate(flat, &mut c) {
                    best.2 += 1;
                    if obj < best.0 {
                        best.0 = obj;
                        best.1 = flat;
                    }
                }
            }
            best
        })
        .reduce(
            || (f64::INFINITY, usize::MAX, 0),
            |a, b| {
                let keep_a = a.0 < b.0 || (a.0 == b.0 && a.1 <= b.1);
                let (o, f) = if keep_a { (a.0, a.1) } else { (b.0, b.1) };
                (o, f, a.2 + b.2)
            },
        );

    if feasible == 0 {
        return Err(Error::NoFeasiblePoint { evaluated: total });
    }
    let mut coeffs = vec![0.0; dim];
    evaluate(best_flat, &mut coeffs);

    let lipschitz_bound = step * tau_grad.iter().flatten().map(|g| g.abs()).sum::<f64>();

    Ok(OracleResult {
        best_objective: best,
        best_point: basis.point(&coeffs),
        best_coefficients: coeffs,
        feasible_points: feasible,
        evaluated_points: total,
        half_width,
        points_per_axis,
        grid_step: step,
        lipschitz_bound,
    })
}

/// Repeated grid search, each level re-centred on the previous best point
/// with the box shrunk by `shrink`. Each grid contains its centre, so the
/// best objective never increases from one level to the next.
pub fn refine_search(
    basis: &AffineBasis,
    ineqs: &InequalitySet,
    torque_index: &[usize],
    half_width: f64,
    points_per_axis: usize,
    levels: usize,
    shrink: f64,
) -> Result<Vec<OracleResult>> {
    if levels == 0 || !(shrink > 0.0 && shrink < 1.0) {
        return Err(Error::InvalidParameter {
            name: "refinement",
            reason: format!("need levels >= 1 and 0 < shrink < 1, got {levels}, {shrink}"),
        });
    }
    let mut out: Vec<OracleResult> = Vec::with_capacity(levels);
    let mut centre = basis.clone();
    let mut hw = half_width;
    for _ in 0..levels {
        let r = grid_search_optimum(&centre, ineqs, torque_index, hw, points_per_axis)?;
        centre = centre.recentered(&r.best_coefficients);
        hw *= shrink;
        out.push(r);
    }
    Ok(out)
}

/// Oracle settings used by the CLI and the acceptance checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleSettings {
    pub points_per_axis: usize,
    /// First box half-width as a multiple of `|c_lp|`, the LP optimum's
    /// coefficient vector.
    pub box_factor: f64,
    pub levels: usize,
    pub shrink: f64,
    /// Relative part of the agreement tolerance.
    pub relative_tolerance: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            points_per_axis: 101,
            box_factor: 5.0,
            levels: 3,
            shrink: 0.1,
            relative_tolerance: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleComparison {
    pub lp_objective: f64,
    pub oracle_objective: f64,
    pub null_space_dimension: usize,
    /// `relative_tolerance * lp + lipschitz_bound` of the last level.
    pub tolerance: f64,
    pub lipschitz_bound: f64,
    pub agree: bool,
    /// The grid found a point cheaper than the LP by more than 1e-6.
    pub oracle_beats_lp: bool,
    pub levels: Vec<OracleResult>,
    pub elapsed_seconds: f64,
}

/// Solves the scenario with the LP, then searches the same feasible set by
/// enumeration and compares the two objectives.
pub fn compare_with_lp(
    params: &RobotParams,
    scenario: &PipeScenario,
    settings: &OracleSettings,
) -> Result<OracleComparison> {
    let start = Instant::now();
    let model = build_model(params, scenario)?;
    let lp = solve_model(&model, scenario)?;
    let basis = parametrize_solution_space(&model.equalities)?;
    let c_lp = basis.coefficients_of(&lp.state_vector());
    let magnitude = dot(&c_lp, &c_lp).sqrt().max(1e-6);
    let levels = refine_search(
        &basis,
        &model.inequalities,
        &TORQUE_INDICES,
        settings.box_factor * magnitude,
        settings.points_per_axis,
        settings.levels,
        settings.shrink,
    )?;
    let last = levels.last().expect("at least one level");
    let tolerance = settings.relative_tolerance * lp.objective + last.lipschitz_bound;
    let gap = last.best_objective - lp.objective;
    Ok(OracleComparison {
        lp_objective: lp.objective,
        oracle_objective: last.best_objective,
        null_space_dimension: basis.dimension,
        tolerance,
        lipschitz_bound: last.lipschitz_bound,
        agree: gap.abs() <= tolerance,
        oracle_beats_lp: gap < -1e-6,
        elapsed_seconds: 0.0,
        levels,
    })
    .map(|mut c| {
        c.elapsed_seconds = start.elapsed().as_secs_f64();
        c
    })
}
