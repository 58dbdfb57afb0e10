//! End-to-end design workflows built on the statics model and the LP solver.

use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::lp::{linearize_abs, solve_lp, LpProblem, LpStatus};
use crate::statics::{
    assemble_equalities, assemble_inequalities, check_state, posture_from_geometry, variant_differences, CoefficientDiff, EqualitySystem, EquationVariant,
    InequalitySet, PipeScenario, Posture, ResidualReport, RobotParams, NUM_VARS, TORQUE_INDICES,
    VARIABLE_NAMES,
};

/// Optimal joint moments and the contact forces that go with them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StaticSolution {
    /// N, positive upward.
    pub friction_forces: [f64; 3],
    /// N
    pub normal_forces: [f64; 3],
    /// N m, `J1..J4`.
    pub joint_torques: [f64; 4],
    /// N m, `sum |tau_j|`.
    pub objective: f64,
    pub posture: Posture,
    pub scenario_echo: PipeScenario,
    pub lp_iterations: usize,
}

impl StaticSolution {
    /// Variables in [`VARIABLE_NAMES`] order.
    pub fn state_vector(&self) -> [f64; NUM_VARS] {
        let mut x = [0.0; NUM_VARS];
        x[..3].copy_from_slice(&self.friction_forces);
        x[3..6].copy_from_slice(&self.normal_forces);
        x[6..].copy_from_slice(&self.joint_torques);
        x
    }

    pub fn from_state(
        x: &[f64; NUM_VARS],
        posture: Posture,
        scenario: PipeScenario,
        lp_iterations: usize,
    ) -> Self {
        let mut s = StaticSolution {
            friction_forces: [x[0], x[1], x[2]],
            normal_forces: [x[3], x[4], x[5]],
            joint_torques: [x[6], x[7], x[8], x[9]],
            objective: 0.0,
            posture,
            scenario_echo: scenario,
            lp_iterations,
        };
        s.objective = s.joint_torques.iter().map(|t| t.abs()).sum();
        s
    }
}

/// Everything the LP needs for one scenario.
#[derive(Debug, Clone)]
pub struct ModelInstance {
    pub posture: Posture,
    pub equalities: EqualitySystem,
    pub inequalities: InequalitySet,
}

pub fn build_model(params: &RobotParams, scenario: &PipeScenario) -> Result<ModelInstance> {
    let posture = posture_from_geometry(params, scenario)?;
    Ok(ModelInstance {
        posture,
        equalities: assemble_equalities(params, scenario, &posture),
        inequalities: assemble_inequalities(params, scenario),
    })
}

/// The constrained problem over the ten model variables, before lifting.
pub fn model_lp(model: &ModelInstance) -> LpProblem {
    let mut lp = LpProblem::new(VARIABLE_NAMES);
    for (row, &b) in model.equalities.matrix.iter().zip(&model.equalities.rhs) {
        lp.add_equality(row.to_vec(), b);
    }
    for row in &model.inequalities.rows {
        lp.add_inequality(row.coefficients.to_vec(), row.bound);
    }
    lp
}

/// Minimizes `sum |tau_j|` subject to equilibrium, no-slip and drive limits.
pub fn optimize_torques(params: &RobotParams, scenario: &PipeScenario) -> Result<StaticSolution> {
    let model = build_model(params, scenario)?;
    solve_model(&model, scenario)
}

pub fn solve_model(model: &ModelInstance, scenario: &PipeScenario) -> Result<StaticSolution> {
    let torque_names: Vec<&str> = TORQUE_INDICES.iter().map(|&i| VARIABLE_NAMES[i]).collect();
    let lifted = linearize_abs(&model_lp(model), &torque_names)?;
    let lp = solve_lp(&lifted)?;
    match lp.status {
        LpStatus::Optimal => {
            let x: [f64; NUM_VARS] = lp.values[..NUM_VARS]
                .try_into()
                .expect("lifted LP keeps the model variables first");
            Ok(StaticSolution::from_state(
                &x,
                model.posture,
                *scenario,
                lp.iterations,
            ))
        }
        LpStatus::Infeasible => Err(Error::NoStaticEquilibrium {
            pipe_diameter: scenario.pipe_diameter,
            friction_coefficient: scenario.friction_coefficient,
        }),
        // sum |tau| >= 0, so this only happens on a broken model.
        LpStatus::Unbounded => Err(Error::Unbounded),
    }
}

/// Re-checks a solution against the model that produced it.
pub fn verify_solution(
    solution: &StaticSolution,
    params: &RobotParams,
    tol: f64,
) -> Result<ResidualReport> {
    let model = build_model(params, &solution.scenario_echo)?;
    check_state(
        &solution.state_vector(),
        &model.equalities,
        &model.inequalities,
        tol,
    )
}

/// Joint-angle convention used to turn moments into stiffness.
pub const JOINT_ANGLE_MAPPING: [&str; 4] = [
    "J1: theta1 - 90 deg (link 1 against the axis of module 1)",
    "J2: theta1 (link 1 inclination)",
    "J3: theta2 (link 2 inclination)",
    "J4: 90 deg - theta2 (link 2 against the axis of module 3)",
];

/// Current joint angles in degrees, `J1..J4`, for a straight-pipe posture.
pub fn joint_angles_deg(posture: &Posture) -> [f64; 4] {
    [
        (posture.theta1 - FRAC_PI_2).to_degrees(),
        posture.theta1.to_degrees(),
        posture.theta2.to_degrees(),
        (FRAC_PI_2 - posture.theta2).to_degrees(),
    ]
}

/// Prototype moments, N m.
pub const REFERENCE_TORQUES: [f64; 4] = [0.2359, 0.3683, 0.2760, 0.1310];
/// Prototype stiffness, N m/deg.
pub const REFERENCE_STIFFNESS: [f64; 4] = [0.0096, 0.0056, 0.0042, 0.0053];

/// Spring deflections (deg) implied by the prototype moments and stiffness,
/// `tau_j / k_j`. Derived values, not measured preloads.
pub fn reference_deflections_deg() -> [f64; 4] {
    std::array::from_fn(|j| REFERENCE_TORQUES[j] / REFERENCE_STIFFNESS[j])
}

/// Rest angles that give [`reference_deflections_deg`] at `posture`.
pub fn default_rest_angles_deg(posture: &Posture) -> [f64; 4] {
    let current = joint_angles_deg(posture);
    let defl = reference_deflections_deg();
    std::array::from_fn(|j| current[j] - defl[j])
}

pub const MIN_DEFLECTION_DEG: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StiffnessDesign {
    /// N m/deg
    pub stiffness: [f64; 4],
    /// deg
    pub rest_angles: [f64; 4],
    /// deg, current minus rest.
    pub deflections: [f64; 4],
    pub torques: [f64; 4],
    pub joint_angle_mapping: [&'static str; 4],
}

impl StiffnessDesign {
    /// `k_j * deflection_j`, which reproduces the torques.
    pub fn spring_torques(&self) -> [f64; 4] {
        std::array::from_fn(|j| self.stiffness[j] * self.deflections[j])
    }
}

/// Linear torsion springs: `k_j = tau_j / (theta_j - theta_j_rest)`.
pub fn stiffness_from_torques(
    solution: &StaticSolution,
    rest_angles_deg: [f64; 4],
) -> Result<StiffnessDesign> {
    stiffness_from_parts(
        solution.joint_torques,
        joint_angles_deg(&solution.posture),
        rest_angles_deg,
    )
}

/// Same as [`stiffness_from_torques`] with the joint angles given directly.
pub fn stiffness_from_parts(
    torques: [f64; 4],
    joint_angles_deg: [f64; 4],
    rest_angles_deg: [f64; 4],
) -> Result<StiffnessDesign> {
    let deflections: [f64; 4] = std::array::from_fn(|j| joint_angles_deg[j] - rest_angles_deg[j]);
    for (j, &d) in deflections.iter().enumerate() {
        // Written so that NaN is rejected too.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(d.abs() > MIN_DEFLECTION_DEG) {
            return Err(Error::ZeroDeflection { joint: j + 1, deflection_deg: d });
        }
    }
    Ok(StiffnessDesign {
        stiffness: std::array::from_fn(|j| torques[j] / deflections[j]),
        rest_angles: rest_angles_deg,
        deflections,
        torques,
        joint_angle_mapping: JOINT_ANGLE_MAPPING,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModuleMargin {
    /// `mu N_i - |F_i|`, N.
    pub slip_margin: f64,
    /// `2 tau_max / (d/2) - |F_i|`, N.
    pub motor_margin: f64,
    /// `|F_i| / (mu N_i)`; infinite when `mu N_i` is zero and `F_i` is not.
    pub friction_utilization: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginReport {
    pub modules: [ModuleMargin; 3],
    pub min_slip_margin: f64,
    pub min_motor_margin: f64,
}

pub fn climb_margin(
    solution: &StaticSolution,
    params: &RobotParams,
    scenario: &PipeScenario,
) -> MarginReport {
    let mu = scenario.friction_coefficient;
    let bound = params.motor_traction_bound();
    let modules: [ModuleMargin; 3] = std::array::from_fn(|i| {
        let f = solution.friction_forces[i].abs();
        let cap = mu * solution.normal_forces[i];
        let utilization = if cap > 0.0 {
            f / cap
        } else if f == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        ModuleMargin {
            slip_margin: cap - f,
            motor_margin: bound - f,
            friction_utilization: utilization,
        }
    });
    MarginReport {
        min_slip_margin: modules.iter().map(|m| m.slip_margin).fold(f64::INFINITY, f64::min),
        min_motor_margin: modules.iter().map(|m| m.motor_margin).fold(f64::INFINITY, f64::min),
        modules,
    }
}

/// Evenly spaced samples `[start, end]` with `count` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepAxis {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl SweepAxis {
    pub fn new(start: f64, end: f64, count: usize) -> Self {
        SweepAxis { start, end, count }
    }

    pub fn validate(&self, name: &'static str) -> Result<()> {
        let bad = |reason: String| Err(Error::InvalidParameter { name, reason });
        if self.count < 2 {
            return bad(format!("needs at least 2 points, got {}", self.count));
        }
        if !(self.start.is_finite() && self.end.is_finite()) || self.start < 0.0 || self.end <= self.start {
            return bad(format!("invalid interval [{}, {}]", self.start, self.end));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.end - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.end
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CellStatus {
    Feasible,
    Infeasible,
    GeometryInfeasible,
}

impl CellStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CellStatus::Feasible => "Feasible",
            CellStatus::Infeasible => "Infeasible",
            CellStatus::GeometryInfeasible => "GeometryInfeasible",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepCell {
    pub status: CellStatus,
    pub objective: Option<f64>,
    pub min_slip_margin: Option<f64>,
}

/// Row-major over `d_axis`, then `mu_axis`: `cells[i * mu_axis.len() + j]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityMap {
    pub d_axis: Vec<f64>,
    pub mu_axis: Vec<f64>,
    pub cells: Vec<SweepCell>,
}

impl FeasibilityMap {
    pub fn cell(&self, d_index: usize, mu_index: usize) -> &SweepCell {
        &self.cells[d_index * self.mu_axis.len() + mu_index]
    }

    /// `(D, mu, cell)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64, &SweepCell)> + '_ {
        self.cells.iter().enumerate().map(move |(k, c)| {
            let n = self.mu_axis.len();
            (self.d_axis[k / n], self.mu_axis[k % n], c)
        })
    }

    /// Index of the `D` sample nearest to `d`.
    pub fn nearest_d(&self, d: f64) -> usize {
        nearest(&self.d_axis, d)
    }

    pub fn nearest_mu(&self, mu: f64) -> usize {
        nearest(&self.mu_axis, mu)
    }
}

fn nearest(axis: &[f64], v: f64) -> usize {
    axis.iter()
        .enumerate()
        .min_by(|a, b| (a.1 - v).abs().total_cmp(&(b.1 - v).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Solves every `(D, mu)` cell independently. `template` supplies the
/// variant and constraint flags; its diameter and friction are replaced.
pub fn feasibility_sweep(
    params: &RobotParams,
    d_range: SweepAxis,
    mu_range: SweepAxis,
    template: &PipeScenario,
) -> Result<FeasibilityMap> {
    params.validate()?;
    d_range.validate("d_range")?;
    mu_range.validate("mu_range")?;
    let d_axis = d_range.values();
    let mu_axis = mu_range.values();

    let cells = (0..d_axis.len() * mu_axis.len())
        .into_par_iter()
        .map(|k| {
            let scenario = template
                .with_diameter(d_axis[k / mu_axis.len()])
                .with_friction(mu_axis[k % mu_axis.len()]);
            sweep_cell(params, &scenario)
        })
        .collect();

    Ok(FeasibilityMap { d_axis, mu_axis, cells })
}

fn sweep_cell(params: &RobotParams, scenario: &PipeScenario) -> SweepCell {
    match optimize_torques(params, scenario) {
        Ok(sol) => SweepCell {
            status: CellStatus::Feasible,
            objective: Some(sol.objective),
            min_slip_margin: Some(climb_margin(&sol, params, scenario).min_slip_margin),
        },
        Err(Error::GeometryInfeasible { .. }) => SweepCell {
            status: CellStatus::GeometryInfeasible,
            objective: None,
            min_slip_margin: None,
        },
        Err(_) => SweepCell {
            status: CellStatus::Infeasible,
            objective: None,
            min_slip_margin: None,
        },
    }
}

/// Both equation variants solved side by side for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantReport {
    pub posture: Posture,
    pub coefficient_diffs: Vec<CoefficientDiff>,
    pub outcomes: Vec<VariantOutcome>,
    /// N m, `objective(SymmetryCorrected) - objective(AsPrinted)` when both solve.
    pub objective_difference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantOutcome {
    pub variant: EquationVariant,
    pub solution: Option<StaticSolution>,
    pub error: Option<String>,
    /// `(tau_j - reference_j) / reference_j` against [`REFERENCE_TORQUES`].
    pub relative_errors: Option<[f64; 4]>,
    pub max_relative_error: Option<f64>,
}

pub fn variant_report(params: &RobotParams, scenario: &PipeScenario) -> Result<VariantReport> {
    let posture = posture_from_geometry(params, scenario)?;
    let outcomes: Vec<VariantOutcome> = EquationVariant::ALL
        .iter()
        .map(|&variant| match optimize_torques(params, &scenario.with_variant(variant)) {
            Ok(sol) => {
                let rel: [f64; 4] = std::array::from_fn(|j| {
                    (sol.joint_torques[j] - REFERENCE_TORQUES[j]) / REFERENCE_TORQUES[j]
                });
                let max = rel.iter().fold(0.0f64, |m, r| m.max(r.abs()));
                VariantOutcome {
                    variant,
                    solution: Some(sol),
                    error: None,
                    relative_errors: Some(rel),
                    max_relative_error: Some(max),
                }
            }
            Err(e) => VariantOutcome {
                variant,
                solution: None,
                error: Some(e.to_string()),
                relative_errors: None,
                max_relative_error: None,
            },
        })
        .collect();
    let objective_difference = match (&outcomes[0].solution, &outcomes[1].solution) {
        (Some(a), Some(b)) => Some(b.objective - a.objective),
        _ => None,
    };
    Ok(VariantReport {
        posture,
        coefficient_diffs: variant_differences(params, scenario, &posture),
        outcomes,
        objective_difference,
    })
}
