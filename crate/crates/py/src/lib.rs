//! Python module `omnicrawl`.
//!
//! Angles cross the boundary in degrees. Results other than the solution
//! object come back as plain dicts and lists.

use omnicrawl::design::{self, SweepAxis};
use omnicrawl::oracle::{self, OracleSettings};
use omnicrawl::statics::{self, EquationVariant, FrictionSidedness};
use omnicrawl::Error;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(omnicrawl, OmnicrawlError, PyException, "Base class for model outcome errors.");
create_exception!(omnicrawl, NoStaticEquilibrium, OmnicrawlError, "The robot cannot hold itself in this pipe.");
create_exception!(omnicrawl, GeometryInfeasible, OmnicrawlError, "The links cannot span the pipe.");
create_exception!(omnicrawl, ZeroDeflection, PyValueError, "A spring rest angle equals the current joint angle.");

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::NoStaticEquilibrium { .. } => NoStaticEquilibrium::new_err(msg),
        Error::GeometryInfeasible { .. } => GeometryInfeasible::new_err(msg),
        Error::ZeroDeflection { .. } => ZeroDeflection::new_err(msg),
        Error::InvalidParameter { .. } | Error::DimensionMismatch { .. } | Error::UnknownVariable(_) => {
            PyValueError::new_err(msg)
        }
        _ => OmnicrawlError::new_err(msg),
    }
}

fn parse<T: std::str::FromStr<Err = String>>(s: &str) -> PyResult<T> {
    s.parse().map_err(PyValueError::new_err)
}

/// Robot design parameters (SI units). Defaults are the prototype's.
#[pyclass(name = "RobotParams", module = "omnicrawl", from_py_object)]
#[derive(Clone)]
pub struct PyRobotParams {
    inner: statics::RobotParams,
}

#[pymethods]
impl PyRobotParams {
    #[new]
    #[pyo3(signature = (
        module_mass = 0.150,
        link_mass = 0.020,
        module_lengths = [0.14, 0.14, 0.14],
        module_diameter = 0.050,
        link_lengths = [0.060, 0.060],
        motor_torque_max = 1.0,
        gravity = 9.81,
    ))]
    fn new(
        module_mass: f64,
        link_mass: f64,
        module_lengths: [f64; 3],
        module_diameter: f64,
        link_lengths: [f64; 2],
        motor_torque_max: f64,
        gravity: f64,
    ) -> PyResult<Self> {
        let inner = statics::RobotParams {
            module_mass,
            link_mass,
            module_lengths,
            module_diameter,
            link_lengths,
            motor_torque_max,
            gravity,
        };
        inner.validate().map_err(to_py)?;
        Ok(PyRobotParams { inner })
    }

    #[staticmethod]
    fn table_i() -> Self {
        PyRobotParams { inner: statics::RobotParams::table_i() }
    }

    #[getter]
    fn module_mass(&self) -> f64 {
        self.inner.module_mass
    }
    #[getter]
    fn link_mass(&self) -> f64 {
        self.inner.link_mass
    }
    #[getter]
    fn module_lengths(&self) -> [f64; 3] {
        self.inner.module_lengths
    }
    #[getter]
    fn module_diameter(&self) -> f64 {
        self.inner.module_diameter
    }
    #[getter]
    fn link_lengths(&self) -> [f64; 2] {
        self.inner.link_lengths
    }
    #[getter]
    fn motor_torque_max(&self) -> f64 {
        self.inner.motor_torque_max
    }
    #[getter]
    fn gravity(&self) -> f64 {
        self.inner.gravity
    }

    /// N
    fn total_weight(&self) -> f64 {
        self.inner.total_weight()
    }

    /// N, largest traction one module's motors can deliver.
    fn motor_traction_bound(&self) -> f64 {
        self.inner.motor_traction_bound()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

#[pyclass(name = "PipeScenario", module = "omnicrawl", from_py_object)]
#[derive(Clone)]
pub struct PyPipeScenario {
    inner: statics::PipeScenario,
}

#[pymethods]
impl PyPipeScenario {
    #[new]
    #[pyo3(signature = (
        pipe_diameter = 0.075,
        friction_coefficient = 0.7,
        equation_variant = "as_printed",
        friction_sidedness = "two_sided_physical",
        normals_nonnegative = true,
        motor_limit = true,
    ))]
    fn new(
        pipe_diameter: f64,
        friction_coefficient: f64,
        equation_variant: &str,
        friction_sidedness: &str,
        normals_nonnegative: bool,
        motor_limit: bool,
    ) -> PyResult<Self> {
        let inner = statics::PipeScenario {
            pipe_diameter,
            friction_coefficient,
            equation_variant: parse::<EquationVariant>(equation_variant)?,
            friction_sidedness: parse::<FrictionSidedness>(friction_sidedness)?,
            normals_nonnegative,
            motor_limit,
        };
        inner.validate().map_err(to_py)?;
        Ok(PyPipeScenario { inner })
    }

    #[getter]
    fn pipe_diameter(&self) -> f64 {
        self.inner.pipe_diameter
    }
    #[getter]
    fn friction_coefficient(&self) -> f64 {
        self.inner.friction_coefficient
    }
    #[getter]
    fn equation_variant(&self) -> &'static str {
        self.inner.equation_variant.as_str()
    }
    #[getter]
    fn friction_sidedness(&self) -> &'static str {
        self.inner.friction_sidedness.as_str()
    }
    #[getter]
    fn normals_nonnegative(&self) -> bool {
        self.inner.normals_nonnegative
    }
    #[getter]
    fn motor_limit(&self) -> bool {
        self.inner.motor_limit
    }

    /// Copy with a different equation variant.
    fn with_variant(&self, variant: &str) -> PyResult<Self> {
        Ok(PyPipeScenario { inner: self.inner.with_variant(parse(variant)?) })
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

#[pyclass(name = "StaticSolution", module = "omnicrawl", frozen, skip_from_py_object)]
pub struct PyStaticSolution {
    inner: design::StaticSolution,
}

#[pymethods]
impl PyStaticSolution {
    /// N
    #[getter]
    fn friction_forces(&self) -> [f64; 3] {
        self.inner.friction_forces
    }
    /// N
    #[getter]
    fn normal_forces(&self) -> [f64; 3] {
        self.inner.normal_forces
    }
    /// N m, J1..J4.
    #[getter]
    fn joint_torques(&self) -> [f64; 4] {
        self.inner.joint_torques
    }
    /// N m, sum of |tau|.
    #[getter]
    fn objective(&self) -> f64 {
        self.inner.objective
    }
    #[getter]
    fn theta1_deg(&self) -> f64 {
        self.inner.posture.theta1_deg()
    }
    #[getter]
    fn theta2_deg(&self) -> f64 {
        self.inner.posture.theta2_deg()
    }
    #[getter]
    fn scenario(&self) -> PyPipeScenario {
        PyPipeScenario { inner: self.inner.scenario_echo }
    }

    /// `[F1, F2, F3, N1, N2, N3, tau1, tau2, tau3, tau4]`
    fn state_vector(&self) -> [f64; statics::NUM_VARS] {
        self.inner.state_vector()
    }

    fn __repr__(&self) -> String {
        format!(
            "StaticSolution(joint_torques={:?}, objective={})",
            self.inner.joint_torques, self.inner.objective
        )
    }
}

/// Link inclinations `(theta1, theta2)` in degrees.
#[pyfunction]
fn posture(params: &PyRobotParams, scenario: &PyPipeScenario) -> PyResult<(f64, f64)> {
    let p = statics::posture_from_geometry(&params.inner, &scenario.inner).map_err(to_py)?;
    Ok((p.theta1_deg(), p.theta2_deg()))
}

/// Minimal `sum |tau_j|` that holds the robot still.
#[pyfunction]
fn optimize_torques(params: &PyRobotParams, scenario: &PyPipeScenario) -> PyResult<PyStaticSolution> {
    let inner = design::optimize_torques(&params.inner, &scenario.inner).map_err(to_py)?;
    Ok(PyStaticSolution { inner })
}

#[pyfunction]
fn climb_margin<'py>(
    py: Python<'py>,
    solution: &PyStaticSolution,
    params: &PyRobotParams,
) -> PyResult<Bound<'py, PyDict>> {
    let m = design::climb_margin(&solution.inner, &params.inner, &solution.inner.scenario_echo);
    let d = PyDict::new(py);
    d.set_item("slip_margin", m.modules.iter().map(|x| x.slip_margin).collect::<Vec<_>>())?;
    d.set_item("motor_margin", m.modules.iter().map(|x| x.motor_margin).collect::<Vec<_>>())?;
    d.set_item(
        "friction_utilization",
        m.modules.iter().map(|x| x.friction_utilization).collect::<Vec<_>>(),
    )?;
    d.set_item("min_slip_margin", m.min_slip_margin)?;
    d.set_item("min_motor_margin", m.min_motor_margin)?;
    Ok(d)
}

/// Spring stiffness (N m/deg) for the given moments. Rest angles default to
/// the ones that reproduce the prototype springs.
#[pyfunction]
#[pyo3(signature = (torques, params, scenario, rest_angles = None))]
fn stiffness<'py>(
    py: Python<'py>,
    torques: [f64; 4],
    params: &PyRobotParams,
    scenario: &PyPipeScenario,
    rest_angles: Option<[f64; 4]>,
) -> PyResult<Bound<'py, PyDict>> {
    let posture = statics::posture_from_geometry(&params.inner, &scenario.inner).map_err(to_py)?;
    let rest = rest_angles.unwrap_or_else(|| design::default_rest_angles_deg(&posture));
    let s = design::stiffness_from_parts(torques, design::joint_angles_deg(&posture), rest)
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("stiffness", s.stiffness)?;
    d.set_item("rest_angles", s.rest_angles)?;
    d.set_item("deflections", s.deflections)?;
    d.set_item("torques", s.torques)?;
    Ok(d)
}

/// `(D, mu, status, objective, min_slip_margin)`; the last two are `None`
/// off the feasible set.
type SweepRow = (f64, f64, &'static str, Option<f64>, Option<f64>);

/// One row per `(D, mu)` cell, D-major.
#[pyfunction]
#[pyo3(signature = (params, d_range, mu_range, scenario = None))]
fn feasibility_sweep(
    py: Python<'_>,
    params: &PyRobotParams,
    d_range: (f64, f64, usize),
    mu_range: (f64, f64, usize),
    scenario: Option<&PyPipeScenario>,
) -> PyResult<Vec<SweepRow>> {
    let template = scenario.map(|s| s.inner).unwrap_or(statics::PipeScenario::new(0.075, 0.7));
    let d = SweepAxis::new(d_range.0, d_range.1, d_range.2);
    let mu = SweepAxis::new(mu_range.0, mu_range.1, mu_range.2);
    let params = params.inner;
    let map = py
        .detach(|| design::feasibility_sweep(&params, d, mu, &template))
        .map_err(to_py)?;
    Ok(map
        .iter()
        .map(|(d, mu, c)| (d, mu, c.status.as_str(), c.objective, c.min_slip_margin))
        .collect())
}

/// Residuals of `state` (ten unknowns) against the model.
#[pyfunction]
#[pyo3(signature = (state, params, scenario, tolerance = 1e-8))]
fn check_state<'py>(
    py: Python<'py>,
    state: Vec<f64>,
    params: &PyRobotParams,
    scenario: &PyPipeScenario,
    tolerance: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let model = design::build_model(&params.inner, &scenario.inner).map_err(to_py)?;
    let r = statics::check_state(&state, &model.equalities, &model.inequalities, tolerance)
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("equality_residuals", r.equality_residuals)?;
    d.set_item("inequality_slacks", r.inequality_slacks)?;
    d.set_item("max_equality_residual", r.max_equality_residual)?;
    d.set_item("min_inequality_slack", r.min_inequality_slack)?;
    d.set_item("pass", r.pass)?;
    Ok(d)
}

/// LP optimum against a brute-force grid over the equilibrium set.
#[pyfunction]
#[pyo3(signature = (params, scenario, points_per_axis = 101, levels = 3))]
fn compare_with_lp<'py>(
    py: Python<'py>,
    params: &PyRobotParams,
    scenario: &PyPipeScenario,
    points_per_axis: usize,
    levels: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let settings = OracleSettings {
        points_per_axis,
        levels,
        ..OracleSettings::default()
    };
    let (p, s) = (params.inner, scenario.inner);
    let c = py
        .detach(|| oracle::compare_with_lp(&p, &s, &settings))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("lp_objective", c.lp_objective)?;
    d.set_item("oracle_objective", c.oracle_objective)?;
    d.set_item("tolerance", c.tolerance)?;
    d.set_item("null_space_dimension", c.null_space_dimension)?;
    d.set_item("agree", c.agree)?;
    d.set_item("elapsed_seconds", c.elapsed_seconds)?;
    Ok(d)
}

/// Torques under each equation variant, keyed by variant name; `None` when
/// that variant has no equilibrium.
#[pyfunction]
fn variant_report<'py>(
    py: Python<'py>,
    params: &PyRobotParams,
    scenario: &PyPipeScenario,
) -> PyResult<Bound<'py, PyDict>> {
    let r = design::variant_report(&params.inner, &scenario.inner).map_err(to_py)?;
    let d = PyDict::new(py);
    for o in r.outcomes {
        d.set_item(o.variant.as_str(), o.solution.map(|s| s.joint_torques))?;
    }
    Ok(d)
}

#[pymodule]
#[pyo3(name = "omnicrawl")]
fn omnicrawl_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add_class::<PyRobotParams>()?;
    m.add_class::<PyPipeScenario>()?;
    m.add_class::<PyStaticSolution>()?;
    m.add_function(wrap_pyfunction!(posture, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_torques, m)?)?;
    m.add_function(wrap_pyfunction!(climb_margin, m)?)?;
    m.add_function(wrap_pyfunction!(stiffness, m)?)?;
    m.add_function(wrap_pyfunction!(feasibility_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(check_state, m)?)?;
    m.add_function(wrap_pyfunction!(compare_with_lp, m)?)?;
    m.add_function(wrap_pyfunction!(variant_report, m)?)?;
    m.add("OmnicrawlError", py.get_type::<OmnicrawlError>())?;
    m.add("NoStaticEquilibrium", py.get_type::<NoStaticEquilibrium>())?;
    m.add("GeometryInfeasible", py.get_type::<GeometryInfeasible>())?;
    m.add("ZeroDeflection", py.get_type::<ZeroDeflection>())?;
    Ok(())
}
