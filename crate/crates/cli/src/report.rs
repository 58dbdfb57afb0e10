//! Output documents and their JSON / CSV / table renderings.

use std::fmt::Write as _;

use omnicrawl::design::{FeasibilityMap, MarginReport, StaticSolution, StiffnessDesign, VariantReport};
use omnicrawl::oracle::OracleComparison;
use omnicrawl::statics::{EquationVariant, ResidualReport, NUM_VARS};
use serde::{Deserialize, Serialize};

use crate::config::ScenarioSection;

pub const SWEEP_CSV_HEADER: &str = "D_m,mu,status,objective_Nm,min_slip_margin_N";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostureDeg {
    pub theta1: f64,
    pub theta2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Forces {
    #[serde(rename = "F")]
    pub friction: [f64; 3],
    #[serde(rename = "N")]
    pub normal: [f64; 3],
}

/// Solution file written by `solve --format json` and read back by `check`.
/// Only `forces_N` and `torques_Nm` are needed on input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub posture_deg: Option<PostureDeg>,
    #[serde(rename = "forces_N")]
    pub forces: Forces,
    #[serde(rename = "torques_Nm")]
    pub torques: [f64; 4],
    #[serde(rename = "objective_Nm", default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margins: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<EquationVariant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioSection>,
}

impl SolutionFile {
    pub fn new(solution: &StaticSolution, margins: &MarginReport) -> Self {
        SolutionFile {
            posture_deg: Some(PostureDeg {
                theta1: solution.posture.theta1_deg(),
                theta2: solution.posture.theta2_deg(),
            }),
            forces: Forces {
                friction: solution.friction_forces,
                normal: solution.normal_forces,
            },
            torques: solution.joint_torques,
            objective: Some(solution.objective),
            margins: Some(serde_json::to_value(margins).expect("margins serialize")),
            variant: Some(solution.scenario_echo.equation_variant),
            scenario: Some(ScenarioSection::from(&solution.scenario_echo)),
        }
    }

    pub fn state_vector(&self) -> [f64; NUM_VARS] {
        let mut x = [0.0; NUM_VARS];
        x[..3].copy_from_slice(&self.forces.friction);
        x[3..6].copy_from_slice(&self.forces.normal);
        x[6..].copy_from_slice(&self.torques);
        x
    }
}

/// A state is either a solution file or a bare array of the ten unknowns.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum StateInput {
    Solution(Box<SolutionFile>),
    Vector(Vec<f64>),
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn f4(v: f64) -> String {
    format!("{v:.4}")
}

/// Header row from the field names of `T`; `None` becomes an empty field.
fn write_csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("csv row");
    }
    String::from_utf8(w.into_inner().expect("csv flush")).expect("utf-8")
}

pub fn solution_table(solution: &StaticSolution, margins: &MarginReport) -> String {
    let mut out = String::new();
    let s = &solution.scenario_echo;
    let _ = writeln!(
        out,
        "D = {} m, mu = {}, variant = {}",
        s.pipe_diameter,
        s.friction_coefficient,
        s.equation_variant.as_str()
    );
    let _ = writeln!(
        out,
        "theta1 = {} deg, theta2 = {} deg",
        f4(solution.posture.theta1_deg()),
        f4(solution.posture.theta2_deg())
    );
    let _ = writeln!(out, "{:<8}{:>12}{:>12}{:>12}{:>12}", "module", "F [N]", "N [N]", "slip [N]", "motor [N]");
    for i in 0..3 {
        let m = &margins.modules[i];
        let _ = writeln!(
            out,
            "{:<8}{:>12}{:>12}{:>12}{:>12}",
            i + 1,
            f4(solution.friction_forces[i]),
            f4(solution.normal_forces[i]),
            f4(m.slip_margin),
            f4(m.motor_margin)
        );
    }
    let _ = writeln!(out, "{:<8}{:>12}", "joint", "tau [N m]");
    for (j, t) in solution.joint_torques.iter().enumerate() {
        let _ = writeln!(out, "{:<8}{:>12}", format!("J{}", j + 1), f4(*t));
    }
    let _ = writeln!(out, "sum |tau| = {} N m", f4(solution.objective));
    out
}

#[derive(Serialize)]
struct SolutionRow {
    theta1_deg: f64,
    theta2_deg: f64,
    #[serde(rename = "F1_N")]
    f1: f64,
    #[serde(rename = "F2_N")]
    f2: f64,
    #[serde(rename = "F3_N")]
    f3: f64,
    #[serde(rename = "N1_N")]
    n1: f64,
    #[serde(rename = "N2_N")]
    n2: f64,
    #[serde(rename = "N3_N")]
    n3: f64,
    #[serde(rename = "tau1_Nm")]
    tau1: f64,
    #[serde(rename = "tau2_Nm")]
    tau2: f64,
    #[serde(rename = "tau3_Nm")]
    tau3: f64,
    #[serde(rename = "tau4_Nm")]
    tau4: f64,
    #[serde(rename = "objective_Nm")]
    objective: f64,
}

pub fn solution_csv(solution: &StaticSolution) -> String {
    let [f1, f2, f3] = solution.friction_forces;
    let [n1, n2, n3] = solution.normal_forces;
    let [tau1, tau2, tau3, tau4] = solution.joint_torques;
    write_csv([SolutionRow {
        theta1_deg: solution.posture.theta1_deg(),
        theta2_deg: solution.posture.theta2_deg(),
        f1,
        f2,
        f3,
        n1,
        n2,
        n3,
        tau1,
        tau2,
        tau3,
        tau4,
        objective: solution.objective,
    }])
}

pub fn stiffness_table(design: &StiffnessDesign) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<6}{:>12}{:>12}{:>14}{:>16}",
        "joint", "tau [N m]", "rest [deg]", "defl. [deg]", "k [N m/deg]"
    );
    for j in 0..4 {
        let _ = writeln!(
            out,
            "{:<6}{:>12}{:>12}{:>14}{:>16}",
            format!("J{}", j + 1),
            f4(design.torques[j]),
            f4(design.rest_angles[j]),
            f4(design.deflections[j]),
            f4(design.stiffness[j])
        );
    }
    for line in design.joint_angle_mapping {
        let _ = writeln!(out, "  {line}");
    }
    out
}

#[derive(Serialize)]
struct StiffnessRow {
    joint: String,
    #[serde(rename = "torque_Nm")]
    torque: f64,
    rest_angle_deg: f64,
    deflection_deg: f64,
    #[serde(rename = "stiffness_Nm_per_deg")]
    stiffness: f64,
}

pub fn stiffness_csv(design: &StiffnessDesign) -> String {
    write_csv((0..4).map(|j| StiffnessRow {
        joint: format!("J{}", j + 1),
        torque: design.torques[j],
        rest_angle_deg: design.rest_angles[j],
        deflection_deg: design.deflections[j],
        stiffness: design.stiffness[j],
    }))
}

#[derive(Debug, Serialize)]
struct SweepRow {
    #[serde(rename = "D_m")]
    d: f64,
    mu: f64,
    status: &'static str,
    #[serde(rename = "objective_Nm")]
    objective: Option<f64>,
    #[serde(rename = "min_slip_margin_N")]
    min_slip_margin: Option<f64>,
}

fn sweep_rows(map: &FeasibilityMap) -> impl Iterator<Item = SweepRow> + '_ {
    map.iter().map(|(d, mu, c)| SweepRow {
        d,
        mu,
        status: c.status.as_str(),
        objective: c.objective,
        min_slip_margin: c.min_slip_margin,
    })
}

pub fn sweep_csv(map: &FeasibilityMap) -> String {
    write_csv(sweep_rows(map))
}

pub fn sweep_json(map: &FeasibilityMap) -> String {
    let rows: Vec<SweepRow> = sweep_rows(map).collect();
    to_json(&serde_json::json!({
        "D_m": map.d_axis,
        "mu": map.mu_axis,
        "cells": rows,
    }))
}

pub fn sweep_table(map: &FeasibilityMap) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:>8}{:>8}  {:<20}{:>14}{:>18}", "D [m]", "mu", "status", "sum|tau| [N m]", "min slip [N]");
    let dash = || "-".to_string();
    for r in sweep_rows(map) {
        let _ = writeln!(
            out,
            "{:>8}{:>8}  {:<20}{:>14}{:>18}",
            f4(r.d),
            f4(r.mu),
            r.status,
            r.objective.map(f4).unwrap_or_else(dash),
            r.min_slip_margin.map(f4).unwrap_or_else(dash)
        );
    }
    let feasible = map.cells.iter().filter(|c| c.objective.is_some()).count();
    let _ = writeln!(out, "{feasible} of {} cells feasible", map.cells.len());
    out
}

pub fn check_table(report: &ResidualReport) -> String {
    let mut out = String::new();
    let w = report
        .equality_residuals
        .iter()
        .chain(&report.inequality_slacks)
        .map(|(l, _)| l.len())
        .max()
        .unwrap_or(0)
        + 2;
    let _ = writeln!(out, "{:<w$}{:>12}", "equation", "residual");
    for (label, r) in &report.equality_residuals {
        let flag = if r.abs() > report.tolerance { "  VIOLATED" } else { "" };
        let _ = writeln!(out, "{label:<w$}{:>12}{flag}", f4(*r));
    }
    let _ = writeln!(out, "{:<w$}{:>12}", "inequality", "slack");
    for (label, s) in &report.inequality_slacks {
        let flag = if *s < -report.tolerance { "  VIOLATED" } else { "" };
        let _ = writeln!(out, "{label:<w$}{:>12}{flag}", f4(*s));
    }
    let _ = writeln!(
        out,
        "max |residual| = {:e}, min slack = {:e}, tolerance = {:e}",
        report.max_equality_residual, report.min_inequality_slack, report.tolerance
    );
    if let (false, Some((label, r))) = (report.pass, report.worst_equality()) {
        if r.abs() > report.tolerance {
            let _ = writeln!(out, "worst equation: {label} off by {} N", f4(*r));
        }
    }
    let _ = writeln!(out, "{}", if report.pass { "PASS" } else { "FAIL" });
    out
}

#[derive(Serialize)]
struct CheckRow<'a> {
    kind: &'static str,
    label: &'a str,
    value: f64,
}

pub fn check_csv(report: &ResidualReport) -> String {
    let eq = report.equality_residuals.iter().map(|(l, v)| CheckRow { kind: "residual", label: l, value: *v });
    let ineq = report.inequality_slacks.iter().map(|(l, v)| CheckRow { kind: "slack", label: l, value: *v });
    write_csv(eq.chain(ineq))
}

pub fn oracle_table(c: &OracleComparison) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "null-space dimension = {}", c.null_space_dimension);
    let _ = writeln!(out, "{:<7}{:>14}{:>14}{:>16}{:>14}", "level", "half-width", "feasible", "best [N m]", "lipschitz");
    for (k, l) in c.levels.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:<7}{:>14.6}{:>14}{:>16.6}{:>14.6}",
            k,
            l.half_width,
            l.feasible_points,
            l.best_objective,
            l.lipschitz_bound
        );
    }
    let _ = writeln!(out, "LP      sum |tau| = {:.6} N m", c.lp_objective);
    let _ = writeln!(out, "oracle  sum |tau| = {:.6} N m", c.oracle_objective);
    let _ = writeln!(
        out,
        "gap = {:.6}, tolerance = {:.6}, {:.2} s",
        c.oracle_objective - c.lp_objective,
        c.tolerance,
        c.elapsed_seconds
    );
    if c.oracle_beats_lp {
        let _ = writeln!(out, "grid point cheaper than the LP optimum");
    }
    let _ = writeln!(out, "{}", if c.agree { "AGREE" } else { "DISAGREE" });
    out
}

#[derive(Serialize)]
struct OracleRow {
    #[serde(rename = "lp_objective_Nm")]
    lp: f64,
    #[serde(rename = "oracle_objective_Nm")]
    oracle: f64,
    #[serde(rename = "tolerance_Nm")]
    tolerance: f64,
    null_space_dimension: usize,
    agree: bool,
}

pub fn oracle_csv(c: &OracleComparison) -> String {
    write_csv([OracleRow {
        lp: c.lp_objective,
        oracle: c.oracle_objective,
        tolerance: c.tolerance,
        null_space_dimension: c.null_space_dimension,
        agree: c.agree,
    }])
}

pub fn variants_table(r: &VariantReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "theta1 = {} deg, theta2 = {} deg",
        f4(r.posture.theta1.to_degrees()),
        f4(r.posture.theta2.to_degrees())
    );
    let _ = writeln!(out, "coefficients that differ:");
    for d in &r.coefficient_diffs {
        let _ = writeln!(
            out,
            "  {} / {}: as_printed {} vs symmetry_corrected {}",
            d.row,
            d.variable,
            f4(d.as_printed),
            f4(d.symmetry_corrected)
        );
    }
    let reference = omnicrawl::design::REFERENCE_TORQUES;
    let _ = writeln!(
        out,
        "{:<20}{:>10}{:>10}{:>10}{:>10}{:>12}{:>12}",
        "", "tau1", "tau2", "tau3", "tau4", "sum|tau|", "max rel err"
    );
    let _ = writeln!(
        out,
        "{:<20}{:>10}{:>10}{:>10}{:>10}{:>12}",
        "reference",
        f4(reference[0]),
        f4(reference[1]),
        f4(reference[2]),
        f4(reference[3]),
        f4(reference.iter().sum())
    );
    for o in &r.outcomes {
        match (&o.solution, o.max_relative_error) {
            (Some(s), Some(e)) => {
                let t = s.joint_torques;
                let _ = writeln!(
                    out,
                    "{:<20}{:>10}{:>10}{:>10}{:>10}{:>12}{:>11.1}%",
                    o.variant.as_str(),
                    f4(t[0]),
                    f4(t[1]),
                    f4(t[2]),
                    f4(t[3]),
                    f4(s.objective),
                    100.0 * e
                );
            }
            _ => {
                let _ = writeln!(
                    out,
                    "{:<20}{}",
                    o.variant.as_str(),
                    o.error.as_deref().unwrap_or("no solution")
                );
            }
        }
    }
    if let Some(d) = r.objective_difference {
        let _ = writeln!(out, "objective difference (corrected - printed) = {} N m", f4(d));
    }
    out
}

#[derive(Serialize)]
struct VariantRow {
    variant: &'static str,
    #[serde(rename = "tau1_Nm")]
    tau1: Option<f64>,
    #[serde(rename = "tau2_Nm")]
    tau2: Option<f64>,
    #[serde(rename = "tau3_Nm")]
    tau3: Option<f64>,
    #[serde(rename = "tau4_Nm")]
    tau4: Option<f64>,
    #[serde(rename = "objective_Nm")]
    objective: Option<f64>,
    max_relative_error: Option<f64>,
}

pub fn variants_csv(r: &VariantReport) -> String {
    write_csv(r.outcomes.iter().map(|o| {
        let t = o.solution.as_ref().map(|s| s.joint_torques);
        VariantRow {
            variant: o.variant.as_str(),
            tau1: t.map(|t| t[0]),
            tau2: t.map(|t| t[1]),
            tau3: t.map(|t| t[2]),
            tau4: t.map(|t| t[3]),
            objective: o.solution.as_ref().map(|s| s.objective),
            max_relative_error: o.max_relative_error,
        }
    }))
}
