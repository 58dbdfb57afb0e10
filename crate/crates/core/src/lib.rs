//! Quasi-static joint-moment optimization for a three-module wall-press
//! in-pipe crawler.
//!
//! - [`statics`]: robot parameters, straight-pipe posture and the balance
//!   and contact constraints.
//! - [`lp`]: dense two-phase simplex with absolute-value lifting.
//! - [`design`]: optimal moments, spring stiffness, margins and
//!   diameter/friction sweeps.
//! - [`oracle`]: grid enumeration over the equilibrium null space, used to
//!   cross-check the LP.

pub mod design;
pub mod error;
pub mod lp;
pub mod oracle;
pub mod statics;

pub use design::{
    climb_margin, feasibility_sweep, optimize_torques, stiffness_from_torques, FeasibilityMap,
    MarginReport, StaticSolution, StiffnessDesign, SweepAxis,
};
pub use error::{Error, Result};
pub use lp::{linearize_abs, solve_lp, LpProblem, LpSolution, LpStatus};
pub use oracle::{grid_search_optimum, parametrize_solution_space, AffineBasis, OracleResult};
pub use statics::{
    assemble_equalities, assemble_inequalities, check_state, posture_from_geometry,
    EqualitySystem, EquationVariant, FrictionSidedness, InequalitySet, PipeScenario, Posture,
    ResidualReport, RobotParams,
};
