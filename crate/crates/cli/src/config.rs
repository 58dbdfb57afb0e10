//! Run configuration file (TOML). Every section rejects unknown keys.
//!
//! ```toml
//! [robot]
//! module_mass_kg = 0.150
//! link_mass_kg = 0.020
//! module_lengths_m = [0.14, 0.14, 0.14]
//! module_diameter_m = 0.050
//! link_lengths_m = [0.060, 0.060]
//! motor_torque_max_nm = 1.0
//! gravity_m_s2 = 9.81            # optional
//!
//! [scenario]
//! pipe_diameter_m = 0.075
//! friction_coefficient = 0.7
//! equation_variant = "as_printed"            # optional
//! friction_sidedness = "two_sided_physical"  # optional
//! normals_nonnegative = true                 # optional
//! motor_limit = true                         # optional
//!
//! [sweep]                        # optional
//! d_m = { start = 0.065, end = 0.10, count = 50 }
//! mu = { start = 0.3, end = 0.9, count = 50 }
//!
//! [stiffness]                    # optional
//! rest_angles_deg = [0.0514, 48.8565, -0.3386, -0.0927]
//!
//! [output]                       # optional
//! format = "table"               # json | csv | table
//! path = "solution.json"
//! ```

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use omnicrawl::design::SweepAxis;
use omnicrawl::statics::{EquationVariant, FrictionSidedness, PipeScenario, RobotParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSection {
    pub module_mass_kg: f64,
    pub link_mass_kg: f64,
    pub module_lengths_m: [f64; 3],
    pub module_diameter_m: f64,
    pub link_lengths_m: [f64; 2],
    pub motor_torque_max_nm: f64,
    #[serde(default = "default_gravity")]
    pub gravity_m_s2: f64,
}

fn default_gravity() -> f64 {
    9.81
}

fn yes() -> bool {
    true
}

impl From<&RobotSection> for RobotParams {
    fn from(r: &RobotSection) -> Self {
        RobotParams {
            module_mass: r.module_mass_kg,
            link_mass: r.link_mass_kg,
            module_lengths: r.module_lengths_m,
            module_diameter: r.module_diameter_m,
            link_lengths: r.link_lengths_m,
            motor_torque_max: r.motor_torque_max_nm,
            gravity: r.gravity_m_s2,
        }
    }
}

impl From<&RobotParams> for RobotSection {
    fn from(p: &RobotParams) -> Self {
        RobotSection {
            module_mass_kg: p.module_mass,
            link_mass_kg: p.link_mass,
            module_lengths_m: p.module_lengths,
            module_diameter_m: p.module_diameter,
            link_lengths_m: p.link_lengths,
            motor_torque_max_nm: p.motor_torque_max,
            gravity_m_s2: p.gravity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub pipe_diameter_m: f64,
    pub friction_coefficient: f64,
    #[serde(default)]
    pub equation_variant: EquationVariant,
    #[serde(default)]
    pub friction_sidedness: FrictionSidedness,
    #[serde(default = "yes")]
    pub normals_nonnegative: bool,
    #[serde(default = "yes")]
    pub motor_limit: bool,
}

impl From<&ScenarioSection> for PipeScenario {
    fn from(s: &ScenarioSection) -> Self {
        PipeScenario {
            pipe_diameter: s.pipe_diameter_m,
            friction_coefficient: s.friction_coefficient,
            equation_variant: s.equation_variant,
            friction_sidedness: s.friction_sidedness,
            normals_nonnegative: s.normals_nonnegative,
            motor_limit: s.motor_limit,
        }
    }
}

impl From<&PipeScenario> for ScenarioSection {
    fn from(s: &PipeScenario) -> Self {
        ScenarioSection {
            pipe_diameter_m: s.pipe_diameter,
            friction_coefficient: s.friction_coefficient,
            equation_variant: s.equation_variant,
            friction_sidedness: s.friction_sidedness,
            normals_nonnegative: s.normals_nonnegative,
            motor_limit: s.motor_limit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSection {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl From<RangeSection> for SweepAxis {
    fn from(r: RangeSection) -> Self {
        SweepAxis::new(r.start, r.end, r.count)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub d_m: RangeSection,
    pub mu: RangeSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StiffnessSection {
    pub rest_angles_deg: [f64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    #[default]
    Table,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub format: Option<OutputFormat>,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub robot: RobotSection,
    pub scenario: ScenarioSection,
    pub sweep: Option<SweepSection>,
    pub stiffness: Option<StiffnessSection>,
    #[serde(default)]
    pub output: OutputSection,
}

impl RunConfig {
    /// Prototype parameters in a 75 mm pipe at mu = 0.7.
    pub fn table_i() -> Self {
        RunConfig {
            robot: RobotSection::from(&RobotParams::table_i()),
            scenario: ScenarioSection::from(&PipeScenario::new(0.075, 0.7)),
            sweep: None,
            stiffness: None,
            output: OutputSection::default(),
        }
    }

    pub fn parse(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
    }

    pub fn robot_params(&self) -> RobotParams {
        RobotParams::from(&self.robot)
    }

    pub fn pipe_scenario(&self) -> PipeScenario {
        PipeScenario::from(&self.scenario)
    }
}

/// `start:end:count`
pub fn parse_range(text: &str) -> std::result::Result<SweepAxis, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, end, count] = parts.as_slice() else {
        return Err(format!("expected start:end:count, got `{text}`"));
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
    let count = count
        .trim()
        .parse::<usize>()
        .map_err(|e| format!("`{count}`: {e}"))?;
    Ok(SweepAxis::new(num(start)?, num(end)?, count))
}

/// Comma-separated list of exactly four numbers.
pub fn parse_four(text: &str) -> std::result::Result<[f64; 4], String> {
    let values: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    values
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected 4 comma-separated values, got {}", v.len()))
}
