//! Command-line front end for the `omnicrawl` statics toolkit.
//!
//! Exit codes: 0 success, 1 the model says no (no equilibrium, failed check,
//! oracle disagreement), 2 bad input.

pub mod config;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use omnicrawl::design::{
    build_model, climb_margin, default_rest_angles_deg, feasibility_sweep, joint_angles_deg,
    optimize_torques, stiffness_from_parts, variant_report, SweepAxis,
};
use omnicrawl::oracle::{compare_with_lp, OracleSettings};
use omnicrawl::statics::{
    check_state, posture_from_geometry, EquationVariant, FrictionSidedness, PipeScenario,
    RobotParams, NUM_VARS,
};

use crate::config::{parse_four, parse_range, OutputFormat, RunConfig};
use crate::report::{SolutionFile, StateInput};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Default `check` tolerance on residuals and slacks.
pub const CHECK_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "omnicrawl", version, about = "Minimal joint moments, spring stiffness and feasibility maps for a three-module wall-press pipe crawler")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML run configuration; built-in prototype parameters when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true)]
    pub variant: Option<EquationVariant>,
    #[arg(long, global = true)]
    pub friction_sidedness: Option<FrictionSidedness>,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Pipe inner diameter, m.
    #[arg(long)]
    pub d: Option<f64>,
    /// Wall friction coefficient.
    #[arg(long)]
    pub mu: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal joint moments, contact forces and margins.
    Solve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Torsion-spring stiffness from optimal (or given) moments.
    Stiffness {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Spring rest angles J1..J4 in degrees, comma separated.
        #[arg(long, value_parser = parse_four)]
        rest_angles: Option<[f64; 4]>,
        /// Use these moments J1..J4 (N m) instead of solving.
        #[arg(long, value_parser = parse_four)]
        torques: Option<[f64; 4]>,
    },
    /// Feasibility map over pipe diameter and friction coefficient.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Diameter range, start:end:count (m).
        #[arg(long, value_parser = parse_range)]
        d: Option<SweepAxis>,
        /// Friction range, start:end:count.
        #[arg(long, value_parser = parse_range)]
        mu: Option<SweepAxis>,
    },
    /// Residuals of a user-supplied state against the model.
    Check {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// JSON solution file, or a bare array of the ten unknowns.
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = CHECK_TOLERANCE)]
        tolerance: f64,
    },
    /// Compare the LP optimum with an exhaustive grid over the equilibrium set.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Grid points per null-space axis (odd).
        #[arg(long, default_value_t = OracleSettings::default().points_per_axis)]
        points_per_axis: usize,
        /// Zoom levels.
        #[arg(long, default_value_t = OracleSettings::default().levels)]
        levels: usize,
    },
    /// Both equation variants side by side.
    Variants {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Solve { common, .. }
            | Command::Stiffness { common, .. }
            | Command::Sweep { common, .. }
            | Command::Check { common, .. }
            | Command::Oracle { common, .. }
            | Command::Variants { common, .. } => common,
        }
    }

    fn default_format(&self) -> OutputFormat {
        match self {
            Command::Sweep { .. } => OutputFormat::Csv,
            _ => OutputFormat::Table,
        }
    }
}

/// What a subcommand produced: the rendered report and whether the model
/// outcome counts as success.
struct Outcome {
    text: String,
    ok: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, ok: true }
    }
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            let code = exit_code_for(&e);
            match e.downcast_ref::<omnicrawl::Error>() {
                Some(core) => eprintln!("{}: {core}", core.kind()),
                None => eprintln!("error: {e:#}"),
            }
            code
        }
    }
}

fn exit_code_for(e: &anyhow::Error) -> i32 {
    use omnicrawl::Error as E;
    match e.downcast_ref::<E>() {
        Some(
            E::NoStaticEquilibrium { .. }
            | E::GeometryInfeasible { .. }
            | E::NumericalBreakdown(_)
            | E::NoFeasiblePoint { .. }
            | E::Unbounded,
        ) => EXIT_INFEASIBLE,
        _ => EXIT_INPUT,
    }
}

fn execute(command: &Command) -> anyhow::Result<i32> {
    let common = command.common();
    let cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::table_i(),
    };
    let format = common
        .format
        .or(cfg.output.format)
        .unwrap_or_else(|| command.default_format());
    let params = cfg.robot_params();
    let outcome = match command {
        Command::Solve { scenario, .. } => {
            let s = scenario_for(&cfg, common, scenario);
            solve(&params, &s, format)?
        }
        Command::Stiffness {
            scenario,
            rest_angles,
            torques,
            ..
        } => {
            let s = scenario_for(&cfg, common, scenario);
            let rest = rest_angles.or(cfg.stiffness.as_ref().map(|st| st.rest_angles_deg));
            stiffness(&params, &s, rest, *torques, format)?
        }
        Command::Sweep { d, mu, .. } => {
            let template = scenario_for(&cfg, common, &ScenarioArgs { d: None, mu: None });
            let from_cfg = cfg.sweep.as_ref();
            let d = d
                .or(from_cfg.map(|s| s.d_m.into()))
                .unwrap_or(SweepAxis::new(0.065, 0.10, 50));
            let mu = mu
                .or(from_cfg.map(|s| s.mu.into()))
                .unwrap_or(SweepAxis::new(0.3, 0.9, 50));
            sweep(&params, d, mu, &template, format)?
        }
        Command::Check {
            scenario,
            state,
            tolerance,
            ..
        } => check(&params, &cfg, common, scenario, state, *tolerance, format)?,
        Command::Oracle {
            scenario,
            points_per_axis,
            levels,
            ..
        } => {
            let s = scenario_for(&cfg, common, scenario);
            let settings = OracleSettings {
                points_per_axis: *points_per_axis,
                levels: *levels,
                ..OracleSettings::default()
            };
            oracle(&params, &s, &settings, format)?
        }
        Command::Variants { scenario, .. } => {
            let s = scenario_for(&cfg, common, scenario);
            let r = variant_report(&params, &s)?;
            Outcome::ok(match format {
                OutputFormat::Json => report::to_json(&r),
                OutputFormat::Csv => report::variants_csv(&r),
                OutputFormat::Table => report::variants_table(&r),
            })
        }
    };
    let path = common.output.as_deref().or(cfg.output.path.as_deref());
    emit(&outcome.text, path)?;
    Ok(if outcome.ok { EXIT_OK } else { EXIT_INFEASIBLE })
}

fn scenario_for(cfg: &RunConfig, common: &Common, args: &ScenarioArgs) -> PipeScenario {
    let mut s = cfg.pipe_scenario();
    if let Some(d) = args.d {
        s.pipe_diameter = d;
    }
    if let Some(mu) = args.mu {
        s.friction_coefficient = mu;
    }
    if let Some(v) = common.variant {
        s.equation_variant = v;
    }
    if let Some(f) = common.friction_sidedness {
        s.friction_sidedness = f;
    }
    s
}

fn emit(text: &str, path: Option<&Path>) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
                // Reader went away (`| head`); not our failure.
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => Ok(r?),
            }
        }
    }
}

fn solve(params: &RobotParams, s: &PipeScenario, format: OutputFormat) -> anyhow::Result<Outcome> {
    let sol = optimize_torques(params, s)?;
    let margins = climb_margin(&sol, params, s);
    Ok(Outcome::ok(match format {
        OutputFormat::Json => report::to_json(&SolutionFile::new(&sol, &margins)),
        OutputFormat::Csv => report::solution_csv(&sol),
        OutputFormat::Table => report::solution_table(&sol, &margins),
    }))
}

fn stiffness(
    params: &RobotParams,
    s: &PipeScenario,
    rest: Option<[f64; 4]>,
    torques: Option<[f64; 4]>,
    format: OutputFormat,
) -> anyhow::Result<Outcome> {
    let posture = posture_from_geometry(params, s)?;
    let torques = match torques {
        Some(t) => t,
        None => optimize_torques(params, s)?.joint_torques,
    };
    let rest = rest.unwrap_or_else(|| default_rest_angles_deg(&posture));
    let design = stiffness_from_parts(torques, joint_angles_deg(&posture), rest)?;
    Ok(Outcome::ok(match format {
        OutputFormat::Json => report::to_json(&design),
        OutputFormat::Csv => report::stiffness_csv(&design),
        OutputFormat::Table => report::stiffness_table(&design),
    }))
}

fn sweep(
    params: &RobotParams,
    d: SweepAxis,
    mu: SweepAxis,
    template: &PipeScenario,
    format: OutputFormat,
) -> anyhow::Result<Outcome> {
    let map = feasibility_sweep(params, d, mu, template)?;
    Ok(Outcome::ok(match format {
        OutputFormat::Json => report::sweep_json(&map),
        OutputFormat::Csv => report::sweep_csv(&map),
        OutputFormat::Table => report::sweep_table(&map),
    }))
}

fn check(
    params: &RobotParams,
    cfg: &RunConfig,
    common: &Common,
    args: &ScenarioArgs,
    state_path: &Path,
    tolerance: f64,
    format: OutputFormat,
) -> anyhow::Result<Outcome> {
    let text = std::fs::read_to_string(state_path)
        .with_context(|| format!("reading state {}", state_path.display()))?;
    let input: StateInput = serde_json::from_str(&text)
        .with_context(|| format!("{}: not a solution file or an array of {NUM_VARS} numbers", state_path.display()))?;

    // Scenario: config, then the one recorded in the state file, then flags.
    let mut base = cfg.clone();
    let state = match input {
        StateInput::Solution(file) => {
            if let Some(sc) = &file.scenario {
                base.scenario = sc.clone();
            } else if let Some(v) = file.variant {
                base.scenario.equation_variant = v;
            }
            file.state_vector().to_vec()
        }
        StateInput::Vector(v) => v,
    };
    if state.len() != NUM_VARS {
        bail!("state has {} values, expected {NUM_VARS}", state.len());
    }
    let scenario = scenario_for(&base, common, args);
    let model = build_model(params, &scenario)?;
    let r = check_state(&state, &model.equalities, &model.inequalities, tolerance)?;
    Ok(Outcome {
        text: match format {
            OutputFormat::Json => report::to_json(&r),
            OutputFormat::Csv => report::check_csv(&r),
            OutputFormat::Table => report::check_table(&r),
        },
        ok: r.pass,
    })
}

fn oracle(
    params: &RobotParams,
    s: &PipeScenario,
    settings: &OracleSettings,
    format: OutputFormat,
) -> anyhow::Result<Outcome> {
    let c = compare_with_lp(params, s, settings)?;
    let ok = c.agree;
    Ok(Outcome {
        text: match format {
            OutputFormat::Json => report::to_json(&c),
            OutputFormat::Csv => report::oracle_csv(&c),
            OutputFormat::Table => report::oracle_table(&c),
        },
        ok,
    })
}
