//! Run configuration: TOML schema, defaults and validation.
//!
//! Every key is optional except `command`, which can also be given on the
//! command line. Unknown keys are rejected. Defaults depend on the command:
//! the open-loop commands use the comparison airframe at 10 ms, the
//! closed-loop commands the default airframe at 1 ms.

use std::path::PathBuf;

use rotordyn::control::{default_ki_grid, YawProfile};
use rotordyn::dynamics::{hover_thrust_coeff, Model, HOVER_SPEED};
use rotordyn::lab::{Partials, RotorSchedule};
use rotordyn::{Compensator, EulerSequence, Gains, HelixSpec, Method, QuadParams, Vec3};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("missing `command` (one of simulate, compare, verify, oracle, track, sweep)")]
    MissingCommand,
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}

impl From<rotordyn::Error> for ConfigError {
    fn from(e: rotordyn::Error) -> Self {
        match e {
            rotordyn::Error::InvalidParameter { name, reason } => invalid(name, reason),
            other => invalid("params", other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Integrate one model and write its trajectory.
    Simulate,
    /// RMSE of both Euler-Lagrange models against Newton-Euler.
    Compare,
    /// Residuals of the kinematic identities over random states.
    Verify,
    /// RMSE of all three models against a refined-step reference.
    Oracle,
    /// Closed-loop helix tracking; writes the attitude error.
    Track,
    /// Integral-gain sweep for both compensators.
    Sweep,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Compare => "compare",
            Command::Verify => "verify",
            Command::Oracle => "oracle",
            Command::Track => "track",
            Command::Sweep => "sweep",
        }
    }

    fn closed_loop(&self) -> bool {
        matches!(self, Command::Track | Command::Sweep)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Ne,
    El,
    Rel,
}

impl From<ModelName> for Model {
    fn from(m: ModelName) -> Self {
        match m {
            ModelName::Ne => Model::NewtonEuler,
            ModelName::El => Model::LiteratureLagrange,
            ModelName::Rel => Model::RevisedLagrange,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Airframe {
    Default,
    Comparison,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputPreset {
    /// `u = [475.9 + 0.1 sin t, 476.2 + 0.1 sin t, 476, 476.1]` rad/s
    Benchmark,
    /// All rotors at the hover speed.
    Hover,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompensatorName {
    ElLit,
    Rel,
}

impl From<CompensatorName> for Compensator {
    fn from(c: CompensatorName) -> Self {
        match c {
            CompensatorName::ElLit => Compensator::Literature,
            CompensatorName::Rel => Compensator::Revised,
        }
    }
}

impl From<Compensator> for CompensatorName {
    fn from(c: Compensator) -> Self {
        match c {
            Compensator::Literature => CompensatorName::ElLit,
            Compensator::Revised => CompensatorName::Rel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartialsName {
    Analytic,
    Fd,
}

/// A gain given as one number for all axes or as a 3-vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Triple {
    Scalar(f64),
    Vector([f64; 3]),
}

impl Triple {
    fn to_vec3(self) -> Vec3 {
        match self {
            Triple::Scalar(x) => Vec3::repeat(x),
            Triple::Vector(v) => Vec3::from(v),
        }
    }

    fn from_vec3(v: &Vec3) -> Self {
        if v[0] == v[1] && v[1] == v[2] {
            Triple::Scalar(v[0])
        } else {
            Triple::Vector([v[0], v[1], v[2]])
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum YawSetting {
    Fixed(f64),
    Named(YawName),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum YawName {
    Tangent,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub airframe: Option<Airframe>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inertia: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gravity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arm_length: Option<f64>,
    /// Overrides the hover-derived thrust coefficient.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thrust_coeff: Option<f64>,
    /// Derives the thrust coefficient so that this speed hovers.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hover_speed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drag_coeff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rotor_inertia: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gyro: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequence: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<InputPreset>,
    /// `Ω_i(t) = base_i + amplitude_i sin(frequency_i t + phase_i)`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequency: Option<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase: Option<[f64; 4]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pos_kp: Option<Triple>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pos_ki: Option<Triple>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pos_kd: Option<Triple>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub att_kp: Option<Triple>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub att_ki: Option<Triple>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub att_kd: Option<Triple>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HelixSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub climb: Option<f64>,
    /// Heading in rad, or `"tangent"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub yaw: Option<YawSetting>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compensator: Option<CompensatorName>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compensators: Option<Vec<CompensatorName>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ki: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partials: Option<PartialsName>,
}

/// The file as written by the user.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integrator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<InputSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gains: Option<GainsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub helix: Option<HelixSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub track: Option<TrackSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySection>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub command: Option<Command>,
    pub dt: Option<f64>,
    pub duration: Option<f64>,
    pub integrator: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifySettings {
    pub samples: usize,
    pub tolerance: f64,
    pub partials: Partials,
}

/// Fully resolved and validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub model: Model,
    pub dt: f64,
    pub duration: f64,
    pub method: Method,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub params: QuadParams,
    pub input: RotorSchedule,
    pub gains: Gains,
    pub helix: HelixSpec,
    pub compensator: Compensator,
    pub sweep_compensators: Vec<Compensator>,
    pub ki_grid: Vec<f64>,
    pub verify: VerifySettings,
}

/// Parses and validates a configuration with no command-line overrides.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_with(text, &Overrides::default())
}

pub fn parse_config_with(text: &str, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let mut file: ConfigFile = toml::from_str(text)?;
    file.command = overrides.command.or(file.command);
    file.dt = overrides.dt.or(file.dt);
    file.duration = overrides.duration.or(file.duration);
    file.integrator = overrides.integrator.clone().or(file.integrator);
    file.seed = overrides.seed.or(file.seed);
    file.out = overrides.out.clone().or(file.out);
    RunConfig::resolve(file)
}

fn positive(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(field, format!("must be finite and > 0, got {v}")))
    }
}

impl RunConfig {
    pub fn resolve(file: ConfigFile) -> Result<Self, ConfigError> {
        let command = file.command.ok_or(ConfigError::MissingCommand)?;
        let closed = command.closed_loop();

        let dt = positive("dt", file.dt.unwrap_or(if closed { 1e-3 } else { 1e-2 }))?;
        let duration = positive("duration", file.duration.unwrap_or(60.0))?;
        if dt > duration {
            return Err(invalid("dt", format!("{dt} exceeds duration {duration}")));
        }
        let method = match &file.integrator {
            Some(s) => s.parse::<Method>()?,
            None => Method::Rk4,
        };

        let p = file.params.unwrap_or_default();
        let airframe = p.airframe.unwrap_or(if closed {
            Airframe::Default
        } else {
            Airframe::Comparison
        });
        let mut params = match airframe {
            Airframe::Default => QuadParams::default(),
            Airframe::Comparison => QuadParams::comparison_airframe(),
        };
        if let Some(v) = p.mass {
            params.mass = v;
        }
        if let Some(v) = p.inertia {
            params.inertia = Vec3::from(v);
        }
        if let Some(v) = p.gravity {
            params.gravity = v;
        }
        if let Some(v) = p.arm_length {
            params.arm_length = v;
        }
        if let Some(v) = p.drag_coeff {
            params.drag_coeff = v;
        }
        if let Some(v) = p.rotor_inertia {
            params.rotor_inertia = v;
        }
        if let Some(v) = p.gyro {
            params.gyro_enabled = v;
        }
        if let Some(s) = &p.sequence {
            params.sequence = s
                .parse::<EulerSequence>()
                .map_err(|e| invalid("params.sequence", e.to_string()))?;
        }
        match (p.thrust_coeff, p.hover_speed) {
            (Some(_), Some(_)) => {
                return Err(invalid(
                    "params.thrust_coeff",
                    "give either thrust_coeff or hover_speed, not both",
                ));
            }
            (Some(k), None) => params.thrust_coeff = k,
            (None, Some(speed)) => {
                positive("params.hover_speed", speed)?;
                params.thrust_coeff = hover_thrust_coeff(params.mass, params.gravity, speed);
            }
            // Keep the default hover speed when mass or gravity changed.
            (None, None) => {
                params.thrust_coeff = hover_thrust_coeff(params.mass, params.gravity, HOVER_SPEED)
            }
        }
        params.validate().map_err(|e| match e {
            rotordyn::Error::InvalidParameter { name, reason } => {
                invalid(format!("params.{name}"), reason)
            }
            other => other.into(),
        })?;

        let inp = file.input.unwrap_or_default();
        let mut input = match inp.preset.unwrap_or(InputPreset::Benchmark) {
            InputPreset::Benchmark => RotorSchedule::benchmark(),
            InputPreset::Hover => RotorSchedule::constant([params.hover_speed(); 4]),
        };
        for (name, src, dst) in [
            ("input.base", inp.base, &mut input.base),
            ("input.amplitude", inp.amplitude, &mut input.amplitude),
            ("input.frequency", inp.frequency, &mut input.frequency),
            ("input.phase", inp.phase, &mut input.phase),
        ] {
            if let Some(v) = src {
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(invalid(name, "entries must be finite"));
                }
                *dst = v;
            }
        }
        if input
            .base
            .iter()
            .zip(&input.amplitude)
            .any(|(b, a)| b - a.abs() < 0.0)
        {
            return Err(invalid(
                "input.base",
                "rotor speeds must stay >= 0 (base >= |amplitude|)",
            ));
        }

        let g = file.gains.unwrap_or_default();
        let mut gains = Gains::default();
        for (name, src, dst) in [
            ("gains.pos_kp", g.pos_kp, &mut gains.pos_kp),
            ("gains.pos_ki", g.pos_ki, &mut gains.pos_ki),
            ("gains.pos_kd", g.pos_kd, &mut gains.pos_kd),
            ("gains.att_kp", g.att_kp, &mut gains.att_kp),
            ("gains.att_ki", g.att_ki, &mut gains.att_ki),
            ("gains.att_kd", g.att_kd, &mut gains.att_kd),
        ] {
            if let Some(t) = src {
                let v = t.to_vec3();
                if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    return Err(invalid(name, "gains must be finite and >= 0"));
                }
                *dst = v;
            }
        }

        let h = file.helix.unwrap_or_default();
        let mut helix = HelixSpec {
            duration,
            ..HelixSpec::default()
        };
        if let Some(r) = h.radius {
            helix.radius = positive("helix.radius", r)?;
        }
        if let Some(w) = h.rate {
            helix.rate = w;
        }
        if let Some(c) = h.climb {
            helix.climb = c;
        }
        if let Some(y) = h.yaw {
            helix.yaw = match y {
                YawSetting::Fixed(psi) => YawProfile::Constant(psi),
                YawSetting::Named(YawName::Tangent) => YawProfile::Tangent,
            };
        }
        helix.validate().map_err(|e| match e {
            rotordyn::Error::InvalidParameter { name, reason } => {
                invalid(format!("helix.{name}"), reason)
            }
            other => other.into(),
        })?;

        let compensator = file
            .track
            .and_then(|t| t.compensator)
            .map(Compensator::from)
            .unwrap_or(Compensator::Revised);

        let sw = file.sweep.unwrap_or_default();
        let sweep_compensators: Vec<Compensator> = match sw.compensators {
            Some(list) if list.is_empty() => {
                return Err(invalid("sweep.compensators", "list is empty"))
            }
            Some(list) => list.into_iter().map(Compensator::from).collect(),
            None => Compensator::BOTH.to_vec(),
        };
        let ki_grid = match sw.ki {
            Some(k) if k.is_empty() => return Err(invalid("sweep.ki", "grid is empty")),
            Some(k) => {
                if k.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    return Err(invalid("sweep.ki", "gains must be finite and >= 0"));
                }
                k
            }
            None => default_ki_grid(),
        };

        let v = file.verify.unwrap_or_default();
        let samples = v.samples.unwrap_or(1000);
        if samples == 0 {
            return Err(invalid("verify.samples", "must be > 0"));
        }
        let verify = VerifySettings {
            samples,
            tolerance: positive("verify.tolerance", v.tolerance.unwrap_or(1e-9))?,
            partials: match v.partials.unwrap_or(PartialsName::Analytic) {
                PartialsName::Analytic => Partials::Analytic,
                PartialsName::Fd => Partials::FiniteDifference,
            },
        };

        Ok(Self {
            command,
            model: file
                .model
                .map(Model::from)
                .unwrap_or(Model::RevisedLagrange),
            dt,
            duration,
            method,
            seed: file.seed.unwrap_or(0),
            out: file.out,
            params,
            input,
            gains,
            helix,
            compensator,
            sweep_compensators,
            ki_grid,
            verify,
        })
    }

    /// Effective configuration as TOML: every value that influences this
    /// command, with defaults filled in. Re-parsing it reproduces `self`.
    pub fn effective_toml(&self) -> String {
        let p = &self.params;
        let mut file = ConfigFile {
            command: Some(self.command),
            seed: Some(self.seed),
            params: Some(ParamsSection {
                airframe: None,
                mass: Some(p.mass),
                inertia: Some([p.inertia[0], p.inertia[1], p.inertia[2]]),
                gravity: Some(p.gravity),
                arm_length: Some(p.arm_length),
                thrust_coeff: Some(p.thrust_coeff),
                hover_speed: None,
                drag_coeff: Some(p.drag_coeff),
                rotor_inertia: Some(p.rotor_inertia),
                gyro: Some(p.gyro_enabled),
                sequence: Some(p.sequence.to_string()),
            }),
            ..Default::default()
        };
        let timing = |f: &mut ConfigFile| {
            f.dt = Some(self.dt);
            f.duration = Some(self.duration);
            f.integrator = Some(self.method.as_str().to_string());
        };
        match self.command {
            Command::Simulate | Command::Compare | Command::Oracle => {
                timing(&mut file);
                if self.command == Command::Simulate {
                    file.model = Some(match self.model {
                        Model::NewtonEuler => ModelName::Ne,
                        Model::LiteratureLagrange => ModelName::El,
                        Model::RevisedLagrange => ModelName::Rel,
                    });
                }
                file.input = Some(InputSection {
                    preset: None,
                    base: Some(self.input.base),
                    amplitude: Some(self.input.amplitude),
                    frequency: Some(self.input.frequency),
                    phase: Some(self.input.phase),
                });
            }
            Command::Track | Command::Sweep => {
                file.dt = Some(self.dt);
                file.duration = Some(self.duration);
                let g = &self.gains;
                file.gains = Some(GainsSection {
                    pos_kp: Some(Triple::from_vec3(&g.pos_kp)),
                    pos_ki: Some(Triple::from_vec3(&g.pos_ki)),
                    pos_kd: Some(Triple::from_vec3(&g.pos_kd)),
                    att_kp: Some(Triple::from_vec3(&g.att_kp)),
                    att_ki: Some(Triple::from_vec3(&g.att_ki)),
                    att_kd: Some(Triple::from_vec3(&g.att_kd)),
                });
                file.helix = Some(HelixSection {
                    radius: Some(self.helix.radius),
                    rate: Some(self.helix.rate),
                    climb: Some(self.helix.climb),
                    yaw: Some(match self.helix.yaw {
                        YawProfile::Constant(psi) => YawSetting::Fixed(psi),
                        YawProfile::Tangent => YawSetting::Named(YawName::Tangent),
                    }),
                });
                if self.command == Command::Track {
                    file.track = Some(TrackSection {
                        compensator: Some(self.compensator.into()),
                    });
                } else {
                    file.sweep = Some(SweepSection {
                        compensators: Some(
                            self.sweep_compensators
                                .iter()
                                .map(|c| (*c).into())
                                .collect(),
                        ),
                        ki: Some(self.ki_grid.clone()),
                    });
                }
            }
            Command::Verify => {
                file.verify = Some(VerifySection {
                    samples: Some(self.verify.samples),
                    tolerance: Some(self.verify.tolerance),
                    partials: Some(match self.verify.partials {
                        Partials::Analytic => PartialsName::Analytic,
                        Partials::FiniteDifference => PartialsName::Fd,
                    }),
                });
            }
        }
        toml::to_string(&file).expect("config sections serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_requires_command() {
        assert!(matches!(parse_config(""), Err(ConfigError::MissingCommand)));
    }

    #[test]
    fn command_alone_gives_defaults() {
        let c = parse_config("command = \"compare\"").unwrap();
        assert_eq!(c.dt, 0.01);
        assert_eq!(c.duration, 60.0);
        assert_eq!(c.method, Method::Rk4);
        assert_eq!(c.params, QuadParams::comparison_airframe());
        assert_eq!(c.input, RotorSchedule::benchmark());

        let t = parse_config("command = \"track\"").unwrap();
        assert_eq!(t.dt, 1e-3);
        assert_eq!(t.params, QuadParams::default());
        assert_eq!(t.gains, Gains::default());
        assert_eq!(t.compensator, Compensator::Revised);
    }

    #[test]
    fn negative_dt_names_field() {
        let err = parse_config("command = \"simulate\"\ndt = -0.01").unwrap_err();
        assert!(err.to_string().contains("`dt`"), "{err}");
    }

    #[test]
    fn nested_validation_names_field() {
        let err = parse_config("command = \"simulate\"\n[params]\nmass = 0.0").unwrap_err();
        assert!(err.to_string().contains("params.mass"), "{err}");
        let err = parse_config("command = \"sweep\"\n[sweep]\nki = []").unwrap_err();
        assert!(err.to_string().contains("sweep.ki"), "{err}");
        let err = parse_config("command = \"track\"\n[helix]\nradius = -1.0").unwrap_err();
        assert!(err.to_string().contains("helix.radius"), "{err}");
    }

    #[test]
    fn unknown_keys_rejected_with_line() {
        let err = parse_config("command = \"compare\"\n\n[params]\nmas = 1.0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("mas"), "{msg}");
        assert!(msg.contains("line 4"), "{msg}");
        assert!(parse_config("command = \"fly\"").is_err());
    }

    #[test]
    fn benchmark_preset_selects_comparison_input() {
        let c = parse_config("command = \"compare\"\n[input]\npreset = \"benchmark\"").unwrap();
        let u = c.input.at(0.0);
        assert_eq!(u.0.as_slice(), &[475.9, 476.2, 476.0, 476.1]);
        let t = 1.2_f64;
        let u = c.input.at(t);
        assert!((u.0[0] - (475.9 + 0.1 * t.sin())).abs() < 1e-12);
        assert!((u.0[1] - (476.2 + 0.1 * t.sin())).abs() < 1e-12);
        assert_eq!(u.0[3], 476.1);
    }

    #[test]
    fn overrides_take_precedence() {
        let o = Overrides {
            dt: Some(0.001),
            integrator: Some("euler".into()),
            seed: Some(7),
            ..Default::default()
        };
        let c = parse_config_with("command = \"compare\"\ndt = 0.01\nseed = 3", &o).unwrap();
        assert_eq!((c.dt, c.method, c.seed), (0.001, Method::Euler, 7));
        let c = parse_config_with(
            "",
            &Overrides {
                command: Some(Command::Verify),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(c.command, Command::Verify);
    }

    #[test]
    fn gains_accept_scalars_and_vectors() {
        let c =
            parse_config("command = \"track\"\n[gains]\natt_ki = 100.0\natt_kp = [1.0, 2.0, 3.0]")
                .unwrap();
        assert_eq!(c.gains.att_ki, Vec3::repeat(100.0));
        assert_eq!(c.gains.att_kp, Vec3::new(1.0, 2.0, 3.0));
        assert!(parse_config("command = \"track\"\n[gains]\natt_kd = -1.0").is_err());
    }

    #[test]
    fn effective_config_round_trips() {
        for text in [
            "command = \"simulate\"\nmodel = \"ne\"\n[params]\nmass = 0.5\n[input]\npreset = \"hover\"",
            "command = \"compare\"\nintegrator = \"euler\"",
            "command = \"oracle\"\ndt = 0.001",
            "command = \"verify\"\nseed = 11\n[verify]\npartials = \"fd\"\ntolerance = 1e-5",
            "command = \"track\"\n[helix]\nyaw = \"tangent\"\n[track]\ncompensator = \"el_lit\"",
            "command = \"sweep\"\n[sweep]\nki = [0.0, 8000.0]\ncompensators = [\"rel\"]",
        ] {
            let c = parse_config(text).unwrap();
            let echo = c.effective_toml();
            let again = parse_config(&echo).unwrap_or_else(|e| panic!("{e}\n{echo}"));
            assert_eq!(c, again, "{echo}");
        }
    }

    #[test]
    fn sequence_and_hover_speed() {
        let c = parse_config(
            "command = \"simulate\"\n[params]\nsequence = \"3-1-3\"\nhover_speed = 500.0",
        )
        .unwrap();
        assert_eq!(c.params.sequence, EulerSequence::new(3, 1, 3).unwrap());
        assert!((c.params.hover_speed() - 500.0).abs() < 1e-9);
        assert!(parse_config("command = \"simulate\"\n[params]\nsequence = \"3-3-1\"").is_err());
        assert!(parse_config(
            "command = \"simulate\"\n[params]\nthrust_coeff = 1e-5\nhover_speed = 500.0"
        )
        .is_err());
    }
}
