//! JSON configuration schema and its conversion to [`ExperimentConfig`].
//!
//! Parsing is strict: unknown keys are rejected and every error names the
//! offending field with its dotted JSON path. All machine interfaces take
//! SI units; millibars are accepted only through the dedicated
//! `pressure_mbar` string field ("1e-17 mbar"), converted at parse time.

use serde::Deserialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::quantities::{
    self, Body, ComparisonMode, Environment, ExperimentConfig, MassMode, NoiseModel, Oscillator,
    PairGeometry, Protocol, RateMode, CODATA,
};
use crate::sweep::{Axis, AxisScale};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    body: BodySchema,
    geometry: GeometrySchema,
    environment: EnvironmentSchema,
    #[serde(default)]
    oscillator: Option<OscillatorSchema>,
    protocol: ProtocolName,
    #[serde(default)]
    modes: ModesSchema,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BodySchema {
    radius_m: f64,
    density_kg_m3: f64,
    #[serde(default = "worst_case_chi")]
    chi_re: f64,
    #[serde(default = "worst_case_chi")]
    chi_im: f64,
    temp_internal_K: f64,
}

fn worst_case_chi() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometrySchema {
    #[serde(default)]
    alpha: Option<f64>,
    #[serde(default)]
    distance_m: Option<f64>,
    delta_x_m: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvironmentSchema {
    #[serde(default)]
    pressure_Pa: Option<f64>,
    #[serde(default)]
    pressure_mbar: Option<String>,
    temp_K: f64,
    #[serde(default)]
    gas: GasSchema,
    #[serde(default)]
    pos_noise: Option<PosNoiseSchema>,
    #[serde(default)]
    freq_noise: Option<FreqNoiseSchema>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(untagged)]
enum GasSchema {
    #[default]
    #[serde(skip)]
    Default,
    Named(String),
    Custom {
        mass_kg: f64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PosNoiseSchema {
    asd_m_per_sqrthz: f64,
    ref_freq_hz: f64,
    /// ASD power-law exponent; position noise falls as 1/omega^2 by default.
    #[serde(default = "default_pos_scaling")]
    scaling: f64,
}

fn default_pos_scaling() -> f64 {
    2.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FreqNoiseSchema {
    asd_per_sqrthz: f64,
    ref_freq_hz: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OscillatorSchema {
    #[serde(default)]
    freq_hz: Option<f64>,
    #[serde(default)]
    omega0_rad_s: Option<f64>,
    gamma_hz: f64,
    nbar: f64,
    #[serde(default)]
    eta: Option<f64>,
}

#[derive(Debug, Deserialize)]
enum ProtocolName {
    #[serde(rename = "csign")]
    Csign,
    #[serde(rename = "oscillator")]
    Oscillator,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModesSchema {
    #[serde(default)]
    mass: ModeName,
    #[serde(default)]
    rate: ModeName,
    #[serde(default)]
    comparison: ComparisonName,
}

#[derive(Debug, Default, Deserialize, PartialEq)]
enum ModeName {
    #[default]
    #[serde(rename = "paper")]
    Paper,
    #[serde(rename = "exact")]
    Exact,
}

#[derive(Debug, Default, Deserialize, PartialEq)]
enum ComparisonName {
    #[default]
    #[serde(rename = "paper")]
    Paper,
    #[serde(rename = "aggregate")]
    Aggregate,
}

/// Parses "<number> mbar" strictly.
fn parse_mbar(s: &str) -> Result<f64> {
    let stripped = s
        .strip_suffix(" mbar")
        .ok_or_else(|| Error::config("environment.pressure_mbar", "expected \"<value> mbar\""))?;
    let v: f64 = stripped.trim().parse().map_err(|e| {
        Error::config("environment.pressure_mbar", format!("bad number: {e}"))
    })?;
    Ok(quantities::pascal_from_mbar(v))
}

impl ConfigFile {
    /// Validates and converts the parsed schema into domain types.
    pub fn into_experiment(self) -> Result<ExperimentConfig> {
        let body = Body::new(
            self.body.radius_m,
            self.body.density_kg_m3,
            self.body.chi_re,
            self.body.chi_im,
            self.body.temp_internal_K,
        )?;

        let geometry = match (self.geometry.alpha, self.geometry.distance_m) {
            (Some(alpha), None) => PairGeometry::from_alpha(alpha, self.geometry.delta_x_m)?,
            (None, Some(d)) => PairGeometry::from_distance(d, body.radius(), self.geometry.delta_x_m)?,
            (Some(_), Some(_)) => {
                return Err(Error::config(
                    "geometry",
                    "give exactly one of alpha and distance_m, not both",
                ))
            }
            (None, None) => {
                return Err(Error::config("geometry", "one of alpha or distance_m is required"))
            }
        };

        let pressure = match (self.environment.pressure_Pa, &self.environment.pressure_mbar) {
            (Some(p), None) => p,
            (None, Some(s)) => parse_mbar(s)?,
            (Some(_), Some(_)) => {
                return Err(Error::config(
                    "environment",
                    "give exactly one of pressure_Pa and pressure_mbar, not both",
                ))
            }
            (None, None) => {
                return Err(Error::config(
                    "environment",
                    "one of pressure_Pa or pressure_mbar is required",
                ))
            }
        };

        let gas_mass = match self.environment.gas {
            GasSchema::Default => CODATA.m_h2,
            GasSchema::Named(ref name) if name == "H2" => CODATA.m_h2,
            GasSchema::Named(ref name) => {
                return Err(Error::config(
                    "environment.gas",
                    format!("unknown gas \"{name}\"; use \"H2\" or {{\"mass_kg\": ...}}"),
                ))
            }
            GasSchema::Custom { mass_kg } => mass_kg,
        };

        let two_pi = 2.0 * std::f64::consts::PI;
        let pos_noise = match self.environment.pos_noise {
            Some(n) => NoiseModel::new(
                n.asd_m_per_sqrthz * n.asd_m_per_sqrthz,
                two_pi * n.ref_freq_hz,
                n.scaling,
            )?,
            None => NoiseModel::silent(),
        };
        let freq_noise = match self.environment.freq_noise {
            Some(n) => NoiseModel::new(
                n.asd_per_sqrthz * n.asd_per_sqrthz,
                two_pi * n.ref_freq_hz,
                0.0,
            )?,
            None => NoiseModel::silent(),
        };
        let environment =
            Environment::new(pressure, self.environment.temp_K, gas_mass, pos_noise, freq_noise)?;

        let mass_mode = match self.modes.mass {
            ModeName::Paper => MassMode::PaperApprox,
            ModeName::Exact => MassMode::ExactSphere,
        };
        let rate_mode = match self.modes.rate {
            ModeName::Paper => RateMode::PaperApprox,
            ModeName::Exact => RateMode::Exact,
        };
        let comparison = match self.modes.comparison {
            ComparisonName::Paper => ComparisonMode::PaperComparison,
            ComparisonName::Aggregate => ComparisonMode::Aggregate,
        };

        let oscillator = match self.oscillator {
            None => None,
            Some(o) => {
                let omega0 = match (o.freq_hz, o.omega0_rad_s) {
                    (Some(f), None) => two_pi * f,
                    (None, Some(w)) => w,
                    (Some(_), Some(_)) => {
                        return Err(Error::config(
                            "oscillator",
                            "give exactly one of freq_hz and omega0_rad_s, not both",
                        ))
                    }
                    (None, None) => {
                        return Err(Error::config(
                            "oscillator",
                            "one of freq_hz or omega0_rad_s is required",
                        ))
                    }
                };
                let eta = match o.eta {
                    Some(e) => e,
                    None => {
                        // wavepacket expansion implied by the configured
                        // delocalization: eta = delta_x / sigma_0
                        let m = quantities::mass(&body, mass_mode);
                        let sigma0 = quantities::ground_state_size(&CODATA, m, omega0)?;
                        (geometry.delta_x() / sigma0).max(1.0)
                    }
                };
                Some(Oscillator::new(omega0, o.gamma_hz, o.nbar, eta)?)
            }
        };

        let protocol = match self.protocol {
            ProtocolName::Csign => Protocol::CsignPhase,
            ProtocolName::Oscillator => Protocol::CoupledOscillators,
        };

        ExperimentConfig::new(
            body,
            geometry,
            environment,
            oscillator,
            protocol,
            mass_mode,
            rate_mode,
            comparison,
        )
    }
}

/// Parses a configuration document, reporting the JSON path on any schema
/// violation.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let mut de = serde_json::Deserializer::from_str(text);
    let file: ConfigFile = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        Error::config(e.path().to_string(), e.inner().to_string())
    })?;
    file.into_experiment()
}

/// Reads and parses a configuration file.
pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text)
}

/// Serializes a configuration back into the schema JSON. Round-trips through
/// [`parse_config_str`] to the same configuration.
pub fn to_config_json(config: &ExperimentConfig) -> serde_json::Value {
    let two_pi = 2.0 * std::f64::consts::PI;
    let body = config.body();
    let env = config.environment();
    let mut doc = json!({
        "body": {
            "radius_m": body.radius(),
            "density_kg_m3": body.density(),
            "chi_re": body.chi_re(),
            "chi_im": body.chi_im(),
            "temp_internal_K": body.temp_internal(),
        },
        "geometry": {
            "alpha": config.geometry().alpha(),
            "delta_x_m": config.geometry().delta_x(),
        },
        "environment": {
            "pressure_Pa": env.pressure(),
            "temp_K": env.temperature(),
            "gas": { "mass_kg": env.gas_mass() },
            "pos_noise": {
                "asd_m_per_sqrthz": env.pos_noise().amplitude().sqrt(),
                "ref_freq_hz": env.pos_noise().ref_omega() / two_pi,
                "scaling": env.pos_noise().scaling_exponent(),
            },
            "freq_noise": {
                "asd_per_sqrthz": env.freq_noise().amplitude().sqrt(),
                "ref_freq_hz": env.freq_noise().ref_omega() / two_pi,
            },
        },
        "protocol": match config.protocol() {
            Protocol::CsignPhase => "csign",
            Protocol::CoupledOscillators => "oscillator",
        },
        "modes": {
            "mass": match config.mass_mode() { MassMode::PaperApprox => "paper", MassMode::ExactSphere => "exact" },
            "rate": match config.rate_mode() { RateMode::PaperApprox => "paper", RateMode::Exact => "exact" },
            "comparison": match config.comparison() { ComparisonMode::PaperComparison => "paper", ComparisonMode::Aggregate => "aggregate" },
        },
    });
    if let Some(osc) = config.oscillator() {
        doc["oscillator"] = json!({
            "omega0_rad_s": osc.omega0(),
            "gamma_hz": osc.gamma(),
            "nbar": osc.nbar(),
            "eta": osc.eta(),
        });
    }
    doc
}

// ---------------------------------------------------------------------------
// sweep specification schema
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpecFile {
    axis1: AxisSchema,
    axis2: AxisSchema,
    #[serde(default)]
    outputs: Option<Vec<OutputKind>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AxisSchema {
    unknown: String,
    min: f64,
    max: f64,
    points: usize,
    #[serde(default = "default_scale")]
    scale: AxisScale,
}

fn default_scale() -> AxisScale {
    AxisScale::Log
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum OutputKind {
    #[serde(rename = "grid_csv")]
    GridCsv,
    #[serde(rename = "frontier_csv")]
    FrontierCsv,
    #[serde(rename = "svg")]
    Svg,
}

impl OutputKind {
    pub const ALL: [OutputKind; 3] = [OutputKind::GridCsv, OutputKind::FrontierCsv, OutputKind::Svg];
}

impl SweepSpecFile {
    pub fn axes(&self) -> Result<(Axis, Axis)> {
        let parse_axis = |a: &AxisSchema, which: &str| -> Result<Axis> {
            let unknown = a
                .unknown
                .parse()
                .map_err(|_| Error::config(format!("{which}.unknown"), format!("unknown parameter \"{}\"", a.unknown)))?;
            Axis::new(unknown, a.min, a.max, a.points, a.scale)
        };
        Ok((parse_axis(&self.axis1, "axis1")?, parse_axis(&self.axis2, "axis2")?))
    }

    pub fn outputs(&self) -> Vec<OutputKind> {
        self.outputs.clone().unwrap_or_else(|| OutputKind::ALL.to_vec())
    }
}

/// Parses a sweep specification document.
pub fn parse_sweep_spec_str(text: &str) -> Result<SweepSpecFile> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de)
        .map_err(|e| Error::config(e.path().to_string(), e.inner().to_string()))
}

pub fn load_sweep_spec(path: &std::path::Path) -> Result<SweepSpecFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sweep_spec_str(&text)
}
