//! Planar quasi-static model of the three-module crawler in a straight pipe.
//!
//! The chain is `module 1 - J1 - link 1 - J2 - module 2 - J3 - link 2 - J4 -
//! module 3`. Unknowns are the three traction (friction) forces, the three
//! wall normal forces and the four joint moments, always stored in the order
//! of [`VARIABLE_NAMES`].
//!
//! Sign conventions: traction forces are positive upward (they carry the
//! weight), `N1` and `N3` press one wall and `N2` the opposite one.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const NUM_VARS: usize = 10;
pub const NUM_EQUALITIES: usize = 7;

pub const VARIABLE_NAMES: [&str; NUM_VARS] = [
    "F1", "F2", "F3", "N1", "N2", "N3", "tau1", "tau2", "tau3", "tau4",
];

pub const ROW_LABELS: [&str; NUM_EQUALITIES] = [
    "sum_fx", "sum_fy", "M_J1", "M_J2", "M_J3", "M_J4a", "M_J4b",
];

/// Column of the traction force of module `i` (0-based).
pub const fn friction_index(i: usize) -> usize {
    i
}

/// Column of the normal force of module `i` (0-based).
pub const fn normal_index(i: usize) -> usize {
    3 + i
}

/// Column of the moment at joint `j` (0-based, so `J1` is 0).
pub const fn torque_index(j: usize) -> usize {
    6 + j
}

pub const TORQUE_INDICES: [usize; 4] = [6, 7, 8, 9];

const GEOMETRY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotParams {
    /// kg, per module.
    pub module_mass: f64,
    /// kg, per link.
    pub link_mass: f64,
    /// m, `l1, l2, l3`.
    pub module_lengths: [f64; 3],
    /// m, outer diameter of a crawler module.
    pub module_diameter: f64,
    /// m, `L1, L2`.
    pub link_lengths: [f64; 2],
    /// N m, saturation torque of one driving motor.
    pub motor_torque_max: f64,
    /// m/s^2
    pub gravity: f64,
}

impl RobotParams {
    /// Prototype design parameters.
    pub const fn table_i() -> Self {
        RobotParams {
            module_mass: 0.150,
            link_mass: 0.020,
            module_lengths: [0.14, 0.14, 0.14],
            module_diameter: 0.050,
            link_lengths: [0.060, 0.060],
            motor_torque_max: 1.0,
            gravity: 9.81,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("module_mass", self.module_mass)?;
        positive("link_mass", self.link_mass)?;
        for &l in &self.module_lengths {
            positive("module_lengths", l)?;
        }
        positive("module_diameter", self.module_diameter)?;
        for &l in &self.link_lengths {
            positive("link_lengths", l)?;
        }
        positive("motor_torque_max", self.motor_torque_max)?;
        positive("gravity", self.gravity)
    }

    pub fn module_weight(&self) -> f64 {
        self.module_mass * self.gravity
    }

    pub fn link_weight(&self) -> f64 {
        self.link_mass * self.gravity
    }

    /// Weight the three traction forces must carry in a vertical pipe.
    pub fn total_weight(&self) -> f64 {
        3.0 * self.module_weight() + 2.0 * self.link_weight()
    }

    /// Largest traction force one module's drive can transmit:
    /// two motors acting at the module radius.
    pub fn motor_traction_bound(&self) -> f64 {
        2.0 * self.motor_torque_max / (self.module_diameter / 2.0)
    }

    /// Copy with both masses multiplied by `factor`.
    pub fn with_scaled_masses(&self, factor: f64) -> Self {
        RobotParams {
            module_mass: self.module_mass * factor,
            link_mass: self.link_mass * factor,
            ..*self
        }
    }
}

impl Default for RobotParams {
    fn default() -> Self {
        Self::table_i()
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite and > 0, got {value}"),
        })
    }
}

/// Which transcription of the J3/J4 moment balances to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationVariant {
    /// Literal transcription, including `N1 l1 - N1 l2/2` in the J3 balance.
    #[default]
    AsPrinted,
    /// J3 balance uses `N1 l1 - N2 l2/2`. The J4 balances are kept literal.
    SymmetryCorrected,
}

impl EquationVariant {
    pub const ALL: [EquationVariant; 2] =
        [EquationVariant::AsPrinted, EquationVariant::SymmetryCorrected];

    pub fn as_str(self) -> &'static str {
        match self {
            EquationVariant::AsPrinted => "as_printed",
            EquationVariant::SymmetryCorrected => "symmetry_corrected",
        }
    }
}

impl std::str::FromStr for EquationVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "as_printed" | "as-printed" | "AsPrinted" => Ok(EquationVariant::AsPrinted),
            "symmetry_corrected" | "symmetry-corrected" | "SymmetryCorrected" => {
                Ok(EquationVariant::SymmetryCorrected)
            }
            other => Err(format!(
                "unknown equation variant `{other}` (expected as_printed or symmetry_corrected)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrictionSidedness {
    /// `F_i <= mu N_i` only.
    OneSidedAsPrinted,
    /// `|F_i| <= mu N_i`.
    #[default]
    TwoSidedPhysical,
}

impl FrictionSidedness {
    pub fn as_str(self) -> &'static str {
        match self {
            FrictionSidedness::OneSidedAsPrinted => "one_sided_as_printed",
            FrictionSidedness::TwoSidedPhysical => "two_sided_physical",
        }
    }
}

impl std::str::FromStr for FrictionSidedness {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "one_sided_as_printed" | "one_sided" => Ok(FrictionSidedness::OneSidedAsPrinted),
            "two_sided_physical" | "two_sided" => Ok(FrictionSidedness::TwoSidedPhysical),
            other => Err(format!(
                "unknown friction sidedness `{other}` (expected one_sided_as_printed or two_sided_physical)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipeScenario {
    /// m, inner diameter.
    pub pipe_diameter: f64,
    pub friction_coefficient: f64,
    pub equation_variant: EquationVariant,
    pub friction_sidedness: FrictionSidedness,
    /// Walls push, never pull.
    pub normals_nonnegative: bool,
    /// Include the per-module drive traction bound.
    pub motor_limit: bool,
}

impl PipeScenario {
    pub fn new(pipe_diameter: f64, friction_coefficient: f64) -> Self {
        PipeScenario {
            pipe_diameter,
            friction_coefficient,
            equation_variant: EquationVariant::default(),
            friction_sidedness: FrictionSidedness::default(),
            normals_nonnegative: true,
            motor_limit: true,
        }
    }

    pub fn with_variant(mut self, variant: EquationVariant) -> Self {
        self.equation_variant = variant;
        self
    }

    pub fn with_friction(mut self, mu: f64) -> Self {
        self.friction_coefficient = mu;
        self
    }

    pub fn with_diameter(mut self, diameter: f64) -> Self {
        self.pipe_diameter = diameter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        positive("pipe_diameter", self.pipe_diameter)?;
        if !(self.friction_coefficient.is_finite() && self.friction_coefficient >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "friction_coefficient",
                reason: format!("must be finite and >= 0, got {}", self.friction_coefficient),
            });
        }
        Ok(())
    }
}

/// Link inclinations from the horizontal, radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Posture {
    pub theta1: f64,
    pub theta2: f64,
}

impl Posture {
    pub fn theta1_deg(&self) -> f64 {
        self.theta1.to_degrees()
    }

    pub fn theta2_deg(&self) -> f64 {
        self.theta2.to_degrees()
    }
}

/// Straight-pipe posture: both links span the clearance `D - d`.
pub fn posture_from_geometry(params: &RobotParams, scenario: &PipeScenario) -> Result<Posture> {
    params.validate()?;
    scenario.validate()?;
    let clearance = scenario.pipe_diameter - params.module_diameter;
    let mut cosines = [0.0; 2];
    for (k, (&link, cos)) in params.link_lengths.iter().zip(cosines.iter_mut()).enumerate() {
        let ratio = clearance / link;
        if !(-GEOMETRY_SLACK..=1.0 + GEOMETRY_SLACK).contains(&ratio) {
            return Err(Error::GeometryInfeasible { link: k + 1, ratio });
        }
        *cos = ratio.clamp(0.0, 1.0);
    }
    Ok(Posture {
        theta1: PI - cosines[0].acos(),
        theta2: cosines[1].acos(),
    })
}

/// One coefficient that differs between the two equation variants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Substitution {
    pub row: &'static str,
    pub as_printed: &'static str,
    pub corrected: &'static str,
}

const J3_SUBSTITUTION: Substitution = Substitution {
    row: "M_J3",
    as_printed: "N1*l2/2",
    corrected: "N2*l2/2",
};

#[derive(Debug, Clone, PartialEq)]
pub struct EqualitySystem {
    pub matrix: [[f64; NUM_VARS]; NUM_EQUALITIES],
    pub rhs: [f64; NUM_EQUALITIES],
    pub variant: EquationVariant,
    /// Terms replaced relative to the literal transcription. Empty for `AsPrinted`.
    pub substitutions: Vec<Substitution>,
}

impl EqualitySystem {
    pub fn variable_index(&self) -> &'static [&'static str; NUM_VARS] {
        &VARIABLE_NAMES
    }

    pub fn row_labels(&self) -> &'static [&'static str; NUM_EQUALITIES] {
        &ROW_LABELS
    }

    /// `A x - b`, row by row.
    pub fn residuals(&self, x: &[f64; NUM_VARS]) -> [f64; NUM_EQUALITIES] {
        let mut out = [0.0; NUM_EQUALITIES];
        for (r, row) in self.matrix.iter().enumerate() {
            out[r] = dot(row, x) - self.rhs[r];
        }
        out
    }

    pub fn matrix_rows(&self) -> Vec<Vec<f64>> {
        self.matrix.iter().map(|r| r.to_vec()).collect()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Force and moment balances of the chain as `A x = b`.
pub fn assemble_equalities(
    params: &RobotParams,
    scenario: &PipeScenario,
    posture: &Posture,
) -> EqualitySystem {
    let [l1, l2, l3] = params.module_lengths;
    let [link1, link2] = params.link_lengths;
    let r = params.module_diameter / 2.0;
    let wm = params.module_weight();
    let wl = params.link_weight();
    let (s1, c1) = posture.theta1.sin_cos();
    let (s2, c2) = posture.theta2.sin_cos();

    let (f1, f2, f3) = (friction_index(0), friction_index(1), friction_index(2));
    let (n1, n2, n3) = (normal_index(0), normal_index(1), normal_index(2));
    let [t1, t2, t3, t4] = TORQUE_INDICES;

    let mut a = [[0.0; NUM_VARS]; NUM_EQUALITIES];
    let mut b = [0.0; NUM_EQUALITIES];

    // sum fx: N1 - N2 + N3 = 0
    a[0][n1] = 1.0;
    a[0][n2] = -1.0;
    a[0][n3] = 1.0;

    // sum fy: F1 + F2 + F3 = 3 wm + 2 wl
    a[1][f1] = 1.0;
    a[1][f2] = 1.0;
    a[1][f3] = 1.0;
    b[1] = params.total_weight();

    // J1: F1 d/2 + N1 l1/2 - tau1 = 0
    a[2][f1] = r;
    a[2][n1] = l1 / 2.0;
    a[2][t1] = -1.0;

    // J2: F1 L1 c1 + N1 L1 s1 - wm L1 c1 - wl L1/2 c1 + tau1 - tau2 = 0
    a[3][f1] = link1 * c1;
    a[3][n1] = link1 * s1;
    a[3][t1] = 1.0;
    a[3][t2] = -1.0;
    b[3] = (wm + wl / 2.0) * link1 * c1;

    // J3: -F2 d/2 + N1 l1 - N?(l2/2) + tau2 - tau3 = 0
    a[4][f2] = -r;
    a[4][n1] = l1;
    let substitutions = match scenario.equation_variant {
        EquationVariant::AsPrinted => {
            a[4][n1] -= l2 / 2.0;
            Vec::new()
        }
        EquationVariant::SymmetryCorrected => {
            a[4][n2] -= l2 / 2.0;
            vec![J3_SUBSTITUTION]
        }
    };
    a[4][t2] = 1.0;
    a[4][t3] = -1.0;

    // J4a: -F1 L2 c2 + N1 L2 s2 - F2 L2 c2 - N2 L2 s2
    //      + (2 wm + wl) L2 c2 + wl L2/2 c2 + tau3 - tau4 = 0
    a[5][f1] = -link2 * c2;
    a[5][n1] = link2 * s2;
    a[5][f2] = -link2 * c2;
    a[5][n2] = -link2 * s2;
    a[5][t3] = 1.0;
    a[5][t4] = -1.0;
    b[5] = -(2.0 * wm + wl) * link2 * c2 - wl * link2 / 2.0 * c2;

    // J4b: N3 l3/2 - F3 d/2 - tau4 = 0
    a[6][n3] = l3 / 2.0;
    a[6][f3] = -r;
    a[6][t4] = -1.0;

    EqualitySystem {
        matrix: a,
        rhs: b,
        variant: scenario.equation_variant,
        substitutions,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InequalityKind {
    /// `sign * F_i - mu N_i <= 0`
    NoSlip { module: usize, sign: i8 },
    /// `sign * F_i <= 2 tau_max / (d/2)`
    Motor { module: usize, sign: i8 },
    /// `-N_i <= 0`
    NormalNonnegative { module: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityRow {
    pub coefficients: [f64; NUM_VARS],
    pub bound: f64,
    pub label: String,
    pub kind: InequalityKind,
}

impl InequalityRow {
    /// `bound - a x`; negative means violated.
    pub fn slack(&self, x: &[f64; NUM_VARS]) -> f64 {
        self.bound - dot(&self.coefficients, x)
    }
}

/// Rows of `a x <= bound`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InequalitySet {
    pub rows: Vec<InequalityRow>,
}

impl InequalitySet {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn slacks(&self, x: &[f64; NUM_VARS]) -> Vec<f64> {
        self.rows.iter().map(|r| r.slack(x)).collect()
    }

    pub fn is_satisfied(&self, x: &[f64; NUM_VARS], tol: f64) -> bool {
        self.rows.iter().all(|r| r.slack(x) >= -tol)
    }
}

/// No-slip, drive-traction and wall-contact constraints.
pub fn assemble_inequalities(params: &RobotParams, scenario: &PipeScenario) -> InequalitySet {
    let mu = scenario.friction_coefficient;
    let signs: &[i8] = match scenario.friction_sidedness {
        FrictionSidedness::OneSidedAsPrinted => &[1],
        FrictionSidedness::TwoSidedPhysical => &[1, -1],
    };
    let mut rows = Vec::new();

    for module in 0..3 {
        for &sign in signs {
            let mut c = [0.0; NUM_VARS];
            c[friction_index(module)] = f64::from(sign);
            c[normal_index(module)] = -mu;
            let lhs = if sign > 0 { "F" } else { "-F" };
            rows.push(InequalityRow {
                coefficients: c,
                bound: 0.0,
                label: format!("no_slip: {lhs}{m} <= mu*N{m}", m = module + 1),
                kind: InequalityKind::NoSlip { module, sign },
            });
        }
    }

    if scenario.motor_limit {
        let bound = params.motor_traction_bound();
        for module in 0..3 {
            for sign in [1i8, -1] {
                let mut c = [0.0; NUM_VARS];
                c[friction_index(module)] = f64::from(sign);
                let lhs = if sign > 0 { "F" } else { "-F" };
                rows.push(InequalityRow {
                    coefficients: c,
                    bound,
                    label: format!("motor: {lhs}{} <= 2*tau_max/(d/2)", module + 1),
                    kind: InequalityKind::Motor { module, sign },
                });
            }
        }
    }

    if scenario.normals_nonnegative {
        for module in 0..3 {
            let mut c = [0.0; NUM_VARS];
            c[normal_index(module)] = -1.0;
            rows.push(InequalityRow {
                coefficients: c,
                bound: 0.0,
                label: format!("contact: N{} >= 0", module + 1),
                kind: InequalityKind::NormalNonnegative { module },
            });
        }
    }

    InequalitySet { rows }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub equality_residuals: Vec<(String, f64)>,
    /// `||A x - b||_inf`
    pub max_equality_residual: f64,
    pub inequality_slacks: Vec<(String, f64)>,
    pub min_inequality_slack: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ResidualReport {
    /// Equality row with the largest absolute residual.
    pub fn worst_equality(&self) -> Option<&(String, f64)> {
        self.equality_residuals
            .iter()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
    }
}

pub fn check_state(
    state: &[f64],
    system: &EqualitySystem,
    ineqs: &InequalitySet,
    tol: f64,
) -> Result<ResidualReport> {
    let x: &[f64; NUM_VARS] = state.try_into().map_err(|_| Error::DimensionMismatch {
        expected: NUM_VARS,
        actual: state.len(),
    })?;
    let eq = system.residuals(x);
    let max_eq = eq.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let slacks = ineqs.slacks(x);
    let min_slack = slacks.iter().copied().fold(f64::INFINITY, f64::min);
    let pass = max_eq <= tol && slacks.iter().all(|&s| s >= -tol);
    Ok(ResidualReport {
        equality_residuals: ROW_LABELS
            .iter()
            .zip(eq)
            .map(|(l, r)| (l.to_string(), r))
            .collect(),
        max_equality_residual: max_eq,
        inequality_slacks: ineqs
            .rows
            .iter()
            .zip(slacks)
            .map(|(row, s)| (row.label.clone(), s))
            .collect(),
        min_inequality_slack: min_slack,
        tolerance: tol,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientDiff {
    pub row: &'static str,
    pub variable: &'static str,
    pub as_printed: f64,
    pub symmetry_corrected: f64,
}

/// Every matrix/rhs entry where the two variants disagree.
pub fn variant_differences(
    params: &RobotParams,
    scenario: &PipeScenario,
    posture: &Posture,
) -> Vec<CoefficientDiff> {
    let printed = assemble_equalities(
        params,
        &scenario.with_variant(EquationVariant::AsPrinted),
        posture,
    );
    let corrected = assemble_equalities(
        params,
        &scenario.with_variant(EquationVariant::SymmetryCorrected),
        posture,
    );
    let mut diffs = Vec::new();
    for r in 0..NUM_EQUALITIES {
        for c in 0..NUM_VARS {
            let (p, q) = (printed.matrix[r][c], corrected.matrix[r][c]);
            if p != q {
                diffs.push(CoefficientDiff {
                    row: ROW_LABELS[r],
                    variable: VARIABLE_NAMES[c],
                    as_printed: p,
                    symmetry_corrected: q,
                });
            }
        }
        if printed.rhs[r] != corrected.rhs[r] {
            diffs.push(CoefficientDiff {
                row: ROW_LABELS[r],
                variable: "rhs",
                as_printed: printed.rhs[r],
                symmetry_corrected: corrected.rhs[r],
            });
        }
    }
    diffs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_i_at(d: f64) -> (RobotParams, PipeScenario) {
        (RobotParams::table_i(), PipeScenario::new(d, 0.7))
    }

    #[test]
    fn posture_at_75mm_is_115_65() {
        let (p, s) = table_i_at(0.075);
        let posture = posture_from_geometry(&p, &s).unwrap();
        assert!((posture.theta1_deg() - 115.0).abs() < 1.0);
        assert!((posture.theta2_deg() - 65.0).abs() < 1.0);
    }

    #[test]
    fn posture_at_zero_clearance_is_square() {
        let (p, s) = table_i_at(0.050);
        let posture = posture_from_geometry(&p, &s).unwrap();
        assert!((posture.theta1_deg() - 90.0).abs() < 1e-12);
        assert!((posture.theta2_deg() - 90.0).abs() < 1e-12);
    }

    #[test]
    fn posture_at_full_reach_is_straight() {
        let (p, s) = table_i_at(0.110);
        let posture = posture_from_geometry(&p, &s).unwrap();
        assert!((posture.theta1_deg() - 180.0).abs() < 1e-5);
        assert!(posture.theta2_deg().abs() < 1e-5);
    }

    #[test]
    fn posture_rejects_out_of_reach() {
        let (p, s) = table_i_at(0.045);
        assert!(matches!(
            posture_from_geometry(&p, &s),
            Err(Error::GeometryInfeasible { link: 1, .. })
        ));
        let (p, s) = table_i_at(0.12);
        assert!(matches!(
            posture_from_geometry(&p, &s),
            Err(Error::GeometryInfeasible { .. })
        ));
        let mut p = RobotParams::table_i();
        p.link_lengths[1] = 0.02;
        let s = PipeScenario::new(0.075, 0.7);
        assert!(matches!(
            posture_from_geometry(&p, &s),
            Err(Error::GeometryInfeasible { link: 2, .. })
        ));
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = RobotParams::table_i();
        p.module_mass = 0.0;
        assert!(matches!(p.validate(), Err(Error::InvalidParameter { name: "module_mass", .. })));
        let s = PipeScenario::new(0.075, -0.1);
        assert!(s.validate().is_err());
    }

    #[test]
    fn force_rows_match_transcription() {
        let (p, s) = table_i_at(0.075);
        let posture = posture_from_geometry(&p, &s).unwrap();
        for variant in EquationVariant::ALL {
            let sys = assemble_equalities(&p, &s.with_variant(variant), &posture);
            assert_eq!(sys.matrix[0], [0.0, 0.0, 0.0, 1.0, -1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
            assert_eq!(sys.rhs[0], 0.0);
            // (3 * 0.15 + 2 * 0.02) * 9.81
            assert!((sys.rhs[1] - 4.8069).abs() < 1e-12);
            assert_eq!(
                sys.matrix[2],
                [0.025, 0.0, 0.0, 0.07, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0]
            );
            assert_eq!(sys.rhs[2], 0.0);
        }
    }

    #[test]
    fn variants_differ_only_in_j3_row() {
        let (p, s) = table_i_at(0.075);
        let posture = posture_from_geometry(&p, &s).unwrap();
        let diffs = variant_differences(&p, &s, &posture);
        assert_eq!(diffs.len(), 2);
        assert!(diffs.iter().all(|d| d.row == "M_J3"));
        let printed = assemble_equalities(&p, &s, &posture);
        assert!(printed.substitutions.is_empty());
        let corrected =
            assemble_equalities(&p, &s.with_variant(EquationVariant::SymmetryCorrected), &posture);
        assert_eq!(corrected.substitutions, vec![J3_SUBSTITUTION]);
    }

    #[test]
    fn inequality_counts_and_bounds() {
        let p = RobotParams::table_i();
        let s = PipeScenario::new(0.075, 0.7);
        let set = assemble_inequalities(&p, &s);
        assert_eq!(set.len(), 15);
        assert!((p.motor_traction_bound() - 80.0).abs() < 1e-12);
        let motor: Vec<_> = set
            .rows
            .iter()
            .filter(|r| matches!(r.kind, InequalityKind::Motor { .. }))
            .collect();
        assert_eq!(motor.len(), 6);
        assert!(motor.iter().all(|r| (r.bound - 80.0).abs() < 1e-12));

        let mut one = s;
        one.friction_sidedness = FrictionSidedness::OneSidedAsPrinted;
        one.normals_nonnegative = false;
        one.motor_limit = false;
        assert_eq!(assemble_inequalities(&p, &one).len(), 3);
    }

    #[test]
    fn zero_friction_pins_traction_to_zero() {
        let p = RobotParams::table_i();
        let set = assemble_inequalities(&p, &PipeScenario::new(0.075, 0.0));
        let mut x = [0.0; NUM_VARS];
        x[normal_index(1)] = 5.0;
        assert!(set.is_satisfied(&x, 0.0));
        x[friction_index(1)] = 1e-3;
        assert!(!set.is_satisfied(&x, 1e-6));
        x[friction_index(1)] = -1e-3;
        assert!(!set.is_satisfied(&x, 1e-6));
    }

    #[test]
    fn zero_state_fails_on_weight_row() {
        let (p, s) = table_i_at(0.075);
        let posture = posture_from_geometry(&p, &s).unwrap();
        let sys = assemble_equalities(&p, &s, &posture);
        let set = assemble_inequalities(&p, &s);
        let report = check_state(&[0.0; NUM_VARS], &sys, &set, 1e-8).unwrap();
        assert!(!report.pass);
        let (label, r) = report.worst_equality().unwrap();
        assert_eq!(label, "sum_fy");
        assert!((r.abs() - 4.8069).abs() < 1e-12);
        assert!((report.max_equality_residual - 4.8069).abs() < 1e-12);
    }

    #[test]
    fn check_state_dimension_mismatch() {
        let (p, s) = table_i_at(0.075);
        let posture = posture_from_geometry(&p, &s).unwrap();
        let sys = assemble_equalities(&p, &s, &posture);
        let set = assemble_inequalities(&p, &s);
        assert_eq!(
            check_state(&[0.0; 9], &sys, &set, 1e-8),
            Err(Error::DimensionMismatch { expected: 10, actual: 9 })
        );
    }
}
