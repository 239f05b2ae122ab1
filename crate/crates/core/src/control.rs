//! Feedback-linearization PID control on the Newton-Euler plant.
//!
//! The attitude loop computes a desired Euler-angle acceleration
//! `ν = η̈_ref + K_p e + K_i ∫e + K_d ė` with `e = η_ref − η`, then inverts one
//! of the Euler-Lagrange models to obtain the body torque:
//!
//! - literature compensation: `M = J_R ν + C η̇`
//! - revised compensation:    `M = W⁻ᵀ(J_R ν + C η̇)`
//!
//! On the Newton-Euler plant only the revised law cancels the dynamics
//! exactly. The outer position loop is a cascaded PID that extracts thrust and
//! roll/pitch references from the commanded acceleration; it is the same for
//! both compensators.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use rayon::prelude::*;

use crate::dynamics::{
    coriolis_from_map, Actuation, BodyState, GenState, Model, QuadParams, Wrench,
};
use crate::error::{Error, Result};
use crate::integrator::{sample_count, step_rk4, Outcome, Sample, Trajectory};
use crate::kinematics::{elem_rotation, EulerAngles, RateMap, Vec3};

/// Attitude error magnitude that classifies a run as diverged.
pub const DIVERGENCE_ERROR: f64 = FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Compensator {
    Literature,
    Revised,
}

impl Compensator {
    pub const BOTH: [Compensator; 2] = [Compensator::Literature, Compensator::Revised];

    pub fn label(&self) -> &'static str {
        match self {
            Compensator::Literature => "el_lit",
            Compensator::Revised => "rel",
        }
    }
}

impl fmt::Display for Compensator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Compensator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "el_lit" | "el" | "literature" => Ok(Compensator::Literature),
            "rel" | "revised" => Ok(Compensator::Revised),
            other => Err(Error::param(
                "compensator",
                format!("unknown compensator `{other}` (el_lit|rel)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains {
    pub pos_kp: Vec3,
    pub pos_ki: Vec3,
    pub pos_kd: Vec3,
    pub att_kp: Vec3,
    pub att_ki: Vec3,
    pub att_kd: Vec3,
}

/// Attitude gains place the ideal error-dynamics limit `K_i < K_d K_p` at
/// 19.5e3; outer-loop coupling lowers the observed threshold on the helix.
impl Default for Gains {
    fn default() -> Self {
        Self {
            pos_kp: Vec3::repeat(2.0),
            pos_ki: Vec3::repeat(0.1),
            pos_kd: Vec3::repeat(2.5),
            att_kp: Vec3::repeat(1300.0),
            att_ki: Vec3::repeat(8.0e3),
            att_kd: Vec3::repeat(15.0),
        }
    }
}

impl Gains {
    pub fn with_att_ki(mut self, ki: f64) -> Self {
        self.att_ki = Vec3::repeat(ki);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            ("pos_kp", self.pos_kp),
            ("pos_ki", self.pos_ki),
            ("pos_kd", self.pos_kd),
            ("att_kp", self.att_kp),
            ("att_ki", self.att_ki),
            ("att_kd", self.att_kd),
        ];
        for (name, g) in all {
            if g.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(Error::param(name, "gains must be finite and >= 0"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum YawProfile {
    /// Fixed heading, rad.
    Constant(f64),
    /// Heading along the horizontal velocity of the helix.
    Tangent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HelixSpec {
    pub radius: f64,
    /// rad/s
    pub rate: f64,
    /// m/s
    pub climb: f64,
    pub yaw: YawProfile,
    pub duration: f64,
}

impl Default for HelixSpec {
    fn default() -> Self {
        Self {
            radius: 1.0,
            rate: 0.5,
            climb: 0.1,
            yaw: YawProfile::Constant(0.0),
            duration: 60.0,
        }
    }
}

impl HelixSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::param("radius", "must be > 0"));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::param("duration", "must be > 0"));
        }
        if !self.rate.is_finite() || !self.climb.is_finite() {
            return Err(Error::param("rate", "rate and climb must be finite"));
        }
        Ok(())
    }
}

/// Position reference with exact derivatives and heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionRef {
    pub p: Vec3,
    pub v: Vec3,
    pub a: Vec3,
    pub psi: f64,
}

impl PositionRef {
    pub fn hold(p: Vec3, psi: f64) -> Self {
        Self {
            p,
            v: Vec3::zeros(),
            a: Vec3::zeros(),
            psi,
        }
    }
}

/// `p = (r cos ωt, r sin ωt, c t)`.
pub fn helix_reference(t: f64, helix: &HelixSpec) -> PositionRef {
    let (r, w, c) = (helix.radius, helix.rate, helix.climb);
    let (s, co) = (w * t).sin_cos();
    let psi = match helix.yaw {
        YawProfile::Constant(psi) => psi,
        YawProfile::Tangent => w * t + FRAC_PI_2.copysign(w),
    };
    PositionRef {
        p: Vec3::new(r * co, r * s, c * t),
        v: Vec3::new(-r * w * s, r * w * co, c),
        a: Vec3::new(-r * w * w * co, -r * w * w * s, 0.0),
        psi,
    }
}

/// Euler-angle reference and its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AttitudeRef {
    pub eta: Vec3,
    pub eta_dot: Vec3,
    pub eta_ddot: Vec3,
}

/// Desired `η̈` of the PID law.
pub fn desired_acceleration(
    s: &GenState,
    reference: &AttitudeRef,
    integral: &Vec3,
    gains: &Gains,
) -> Vec3 {
    let e = reference.eta - s.eta.to_vec();
    let e_dot = reference.eta_dot - s.eta_dot;
    reference.eta_ddot
        + gains.att_kp.component_mul(&e)
        + gains.att_ki.component_mul(integral)
        + gains.att_kd.component_mul(&e_dot)
}

/// Inverts the chosen Euler-Lagrange model for the torque producing `ν`.
pub fn compensate(comp: Compensator, s: &GenState, nu: &Vec3, params: &QuadParams) -> Result<Vec3> {
    let map = RateMap::new(&s.eta, params.sequence);
    let inv = map.inverse()?;
    let j = params.inertia_matrix();
    let jr = map.w.transpose() * j * map.w;
    let c = coriolis_from_map(&map, &s.eta_dot, &j);
    let generalized = jr * nu + c * s.eta_dot;
    Ok(match comp {
        Compensator::Literature => generalized,
        Compensator::Revised => inv.transpose() * generalized,
    })
}

/// Feedback-linearizing PID torque command.
pub fn attitude_fl_pid(
    comp: Compensator,
    s: &GenState,
    reference: &AttitudeRef,
    integral: &Vec3,
    gains: &Gains,
    params: &QuadParams,
) -> Result<Vec3> {
    let nu = desired_acceleration(s, reference, integral, gains);
    compensate(comp, s, &nu, params)
}

/// Default tilt bound for the outer loop, rad.
pub const DEFAULT_TILT_LIMIT: f64 = std::f64::consts::FRAC_PI_3;

/// Thrust and Euler-angle references for a commanded inertial acceleration.
///
/// `T = m‖a + g e₃‖`; roll/pitch align body `z` with `a + g e₃` for the given
/// heading (321: positive pitch tilts thrust toward `+x` at zero yaw).
pub fn thrust_and_attitude(
    a_cmd: &Vec3,
    psi: f64,
    params: &QuadParams,
    tilt_limit: f64,
) -> Result<(f64, EulerAngles)> {
    let f = a_cmd + Vec3::z() * params.gravity;
    let norm = f.norm();
    if f[2].is_nan() || f[2] <= 0.0 || !norm.is_finite() {
        return Err(Error::InfeasibleAttitude {
            tilt: if norm > 0.0 {
                (f[2] / norm).acos()
            } else {
                FRAC_PI_2
            },
            limit: tilt_limit,
        });
    }
    let tilt = (f[2] / norm).acos();
    if tilt > tilt_limit {
        return Err(Error::InfeasibleAttitude {
            tilt,
            limit: tilt_limit,
        });
    }
    // Undo the heading, then R₂(θ)R₁(φ)e₃ = (cφ sθ, −sφ, cφ cθ).
    let local = elem_rotation(3, -psi) * f;
    let phi = (-local[1]).atan2((local[0] * local[0] + local[2] * local[2]).sqrt());
    let theta = local[0].atan2(local[2]);
    Ok((params.mass * norm, EulerAngles::new(phi, theta, psi)))
}

/// Cascaded position PID: returns `(T, η_ref)`.
pub fn position_outer_loop(
    s: &GenState,
    reference: &PositionRef,
    integral: &Vec3,
    gains: &Gains,
    params: &QuadParams,
    tilt_limit: f64,
) -> Result<(f64, EulerAngles)> {
    let a_cmd = reference.a
        + gains.pos_kp.component_mul(&(reference.p - s.p))
        + gains.pos_ki.component_mul(integral)
        + gains.pos_kd.component_mul(&(reference.v - s.p_dot));
    thrust_and_attitude(&a_cmd, reference.psi, params, tilt_limit)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingResult {
    pub compensator: Compensator,
    pub trajectory: Trajectory<GenState>,
    /// `η_ref − η` at every recorded sample.
    pub errors: Vec<Sample<Vec3>>,
    pub max_error: f64,
    pub diverged: bool,
}

impl TrackingResult {
    /// Largest `|e_η|` component at or after `t0`.
    pub fn max_error_after(&self, t0: f64) -> f64 {
        self.errors
            .iter()
            .filter(|s| s.t >= t0)
            .map(|s| s.state.amax())
            .fold(0.0, f64::max)
    }
}

/// Closed loop on the Newton-Euler plant with a zero-order-hold controller.
///
/// `reference(t, state)` yields the attitude reference plus the thrust to
/// apply; the attitude integrator is advanced with `e·dt` after each sample.
fn run_closed_loop<R>(
    comp: Compensator,
    initial: &GenState,
    mut reference: R,
    gains: &Gains,
    params: &QuadParams,
    dt: f64,
    duration: f64,
) -> Result<TrackingResult>
where
    R: FnMut(f64, &GenState) -> Result<(f64, AttitudeRef)>,
{
    params.validate()?;
    gains.validate()?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::param("dt", format!("must be > 0, got {dt}")));
    }
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::param(
            "duration",
            format!("must be > 0, got {duration}"),
        ));
    }
    let n = sample_count(duration, dt);
    let plant = Model::NewtonEuler;
    let mut x = plant.initial_state(initial, params);
    let mut integral = Vec3::zeros();
    let mut samples = Vec::with_capacity(n);
    let mut errors = Vec::with_capacity(n);
    let mut max_error: f64 = 0.0;
    let mut outcome = Outcome::Completed;

    for i in 0..n {
        let t = i as f64 * dt;
        let step = (|| -> Result<Option<Wrench>> {
            let s = BodyState::from_vector(&x).to_generalized(params.sequence)?;
            let (thrust, att) = reference(t, &s)?;
            let e = att.eta - s.eta.to_vec();
            samples.push(Sample { t, state: s });
            errors.push(Sample { t, state: e });
            max_error = max_error.max(e.amax());
            if !e.iter().all(|v| v.is_finite()) || e.amax() > DIVERGENCE_ERROR {
                return Ok(None);
            }
            let torque = attitude_fl_pid(comp, &s, &att, &integral, gains, params)?;
            integral += e * dt;
            Ok(Some(Wrench { thrust, torque }))
        })();
        let wrench = match step {
            Ok(Some(w)) => w,
            Ok(None) => {
                outcome = Outcome::Diverged {
                    t,
                    reason: "attitude error exceeded pi/2".into(),
                };
                break;
            }
            Err(e) => {
                outcome = Outcome::Diverged {
                    t,
                    reason: e.to_string(),
                };
                break;
            }
        };
        if i + 1 == n {
            break;
        }
        let input = Actuation::Wrench(wrench);
        match step_rk4(&|_t, xx| plant.derivative(xx, &input, params), &x, t, dt) {
            Ok(next)
                if next
                    .iter()
                    .all(|v| v.is_finite() && v.abs() <= crate::integrator::DIVERGENCE_LIMIT) =>
            {
                x = next
            }
            Ok(_) => {
                outcome = Outcome::Diverged {
                    t: t + dt,
                    reason: "state left the finite range".into(),
                };
                break;
            }
            Err(e) => {
                outcome = Outcome::Diverged {
                    t: t + dt,
                    reason: e.to_string(),
                };
                break;
            }
        }
    }
    let diverged = outcome.is_diverged();
    Ok(TrackingResult {
        compensator: comp,
        trajectory: Trajectory {
            dt,
            samples,
            outcome,
        },
        errors,
        max_error,
        diverged,
    })
}

/// Helix tracking from the helix start point and velocity. Attitude-reference
/// derivatives are not fed forward (the outer loop output is treated as a
/// setpoint).
pub fn run_tracking(
    comp: Compensator,
    helix: &HelixSpec,
    gains: &Gains,
    params: &QuadParams,
    dt: f64,
) -> Result<TrackingResult> {
    helix.validate()?;
    let start = helix_reference(0.0, helix);
    let initial = GenState {
        p: start.p,
        eta: EulerAngles::new(0.0, 0.0, start.psi),
        p_dot: start.v,
        eta_dot: Vec3::zeros(),
    };
    let mut pos_integral = Vec3::zeros();
    let reference = |t: f64, s: &GenState| -> Result<(f64, AttitudeRef)> {
        let r = helix_reference(t, helix);
        let (thrust, eta) =
            position_outer_loop(s, &r, &pos_integral, gains, params, DEFAULT_TILT_LIMIT)?;
        pos_integral += (r.p - s.p) * dt;
        Ok((
            thrust,
            AttitudeRef {
                eta: eta.to_vec(),
                ..Default::default()
            },
        ))
    };
    run_closed_loop(comp, &initial, reference, gains, params, dt, helix.duration)
}

/// Attitude-only tracking of an analytic reference; thrust is held at `mg`.
pub fn run_attitude_tracking<F>(
    comp: Compensator,
    reference: F,
    initial: &GenState,
    gains: &Gains,
    params: &QuadParams,
    dt: f64,
    duration: f64,
) -> Result<TrackingResult>
where
    F: Fn(f64) -> AttitudeRef,
{
    let thrust = params.mass * params.gravity;
    run_closed_loop(
        comp,
        initial,
        |t, _| Ok((thrust, reference(t))),
        gains,
        params,
        dt,
        duration,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub compensator: Compensator,
    pub ki: f64,
    pub stable: bool,
    pub max_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub cells: Vec<SweepCell>,
}

impl SweepReport {
    /// Smallest integral gain at which `comp` diverged.
    pub fn min_destabilizing(&self, comp: Compensator) -> Option<f64> {
        self.cells
            .iter()
            .filter(|c| c.compensator == comp && !c.stable)
            .map(|c| c.ki)
            .min_by(f64::total_cmp)
    }

    pub fn stable_set(&self, comp: Compensator) -> Vec<f64> {
        self.cells
            .iter()
            .filter(|c| c.compensator == comp && c.stable)
            .map(|c| c.ki)
            .collect()
    }

    pub fn cell(&self, comp: Compensator, ki: f64) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.compensator == comp && c.ki == ki)
    }
}

/// Integral-gain grid containing 8e3, 15.5e3 and 16e3.
pub fn default_ki_grid() -> Vec<f64> {
    let mut grid = vec![0.0, 1e3, 4e3, 8e3, 12e3, 14e3, 15e3];
    grid.extend((0..=8).map(|i| 15.25e3 + 250.0 * i as f64));
    grid.extend([18e3, 20e3]);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Runs every `(compensator, Ki)` cell; cells execute in parallel and
/// are reported in grid order.
pub fn gain_sweep(
    compensators: &[Compensator],
    ki_grid: &[f64],
    base: &Gains,
    helix: &HelixSpec,
    params: &QuadParams,
    dt: f64,
) -> Result<SweepReport> {
    if ki_grid.is_empty() || compensators.is_empty() {
        return Err(Error::param("ki_grid", "sweep grid must be nonempty"));
    }
    let jobs: Vec<(Compensator, f64)> = compensators
        .iter()
        .flat_map(|c| ki_grid.iter().map(move |k| (*c, *k)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(comp, ki)| {
            let r = run_tracking(comp, helix, &base.with_att_ki(ki), params, dt)?;
            Ok(SweepCell {
                compensator: comp,
                ki,
                stable: !r.diverged,
                max_error: r.max_error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport { cells })
}
