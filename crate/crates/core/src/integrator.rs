//! Fixed-step explicit integration and uniformly sampled trajectories.

use std::fmt;
use std::str::FromStr;

use nalgebra::SVector;

use crate::dynamics::{Actuation, GenState, Model, QuadParams, RotorSpeeds};
use crate::error::{Error, Result};

/// Any state component above this magnitude counts as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Method {
    Euler,
    #[default]
    Rk4,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Euler => "euler",
            Method::Rk4 => "rk4",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euler" => Ok(Method::Euler),
            "rk4" => Ok(Method::Rk4),
            other => Err(Error::param(
                "integrator",
                format!("unknown method `{other}` (euler|rk4)"),
            )),
        }
    }
}

pub fn step_euler<const N: usize, F>(
    f: &F,
    s: &SVector<f64, N>,
    t: f64,
    dt: f64,
) -> Result<SVector<f64, N>>
where
    F: Fn(f64, &SVector<f64, N>) -> Result<SVector<f64, N>>,
{
    Ok(s + f(t, s)? * dt)
}

pub fn step_rk4<const N: usize, F>(
    f: &F,
    s: &SVector<f64, N>,
    t: f64,
    dt: f64,
) -> Result<SVector<f64, N>>
where
    F: Fn(f64, &SVector<f64, N>) -> Result<SVector<f64, N>>,
{
    let half = 0.5 * dt;
    let k1 = f(t, s)?;
    let k2 = f(t + half, &(s + k1 * half))?;
    let k3 = f(t + half, &(s + k2 * half))?;
    let k4 = f(t + dt, &(s + k3 * dt))?;
    Ok(s + (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0))
}

pub fn step<const N: usize, F>(
    method: Method,
    f: &F,
    s: &SVector<f64, N>,
    t: f64,
    dt: f64,
) -> Result<SVector<f64, N>>
where
    F: Fn(f64, &SVector<f64, N>) -> Result<SVector<f64, N>>,
{
    match method {
        Method::Euler => step_euler(f, s, t, dt),
        Method::Rk4 => step_rk4(f, s, t, dt),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Completed,
    /// The run stopped before `t_final`; samples up to `t` are valid.
    Diverged {
        t: f64,
        reason: String,
    },
}

impl Outcome {
    pub fn is_diverged(&self) -> bool {
        matches!(self, Outcome::Diverged { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<S> {
    pub t: f64,
    pub state: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S = GenState> {
    pub dt: f64,
    pub samples: Vec<Sample<S>>,
    pub outcome: Outcome,
}

impl<S> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> Option<&Sample<S>> {
        self.samples.last()
    }

    pub fn states(&self) -> impl Iterator<Item = &S> {
        self.samples.iter().map(|s| &s.state)
    }
}

/// Number of grid points `floor(t_final/dt) + 1`, tolerant of `t_final/dt`
/// landing a hair below an integer.
pub fn sample_count(t_final: f64, dt: f64) -> usize {
    let ratio = t_final / dt;
    let steps = (ratio + ratio.abs() * 1e-12).floor();
    steps as usize + 1
}

fn validate_grid(t_final: f64, dt: f64) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::param("dt", format!("must be > 0, got {dt}")));
    }
    if !(t_final.is_finite() && t_final > 0.0) {
        return Err(Error::param(
            "duration",
            format!("must be > 0, got {t_final}"),
        ));
    }
    Ok(())
}

fn diverged<const N: usize>(x: &SVector<f64, N>) -> bool {
    x.iter()
        .any(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT)
}

/// Integrates `f` on the grid `t_i = i·dt`, recording every step.
///
/// Non-finite or oversized states and derivative errors end the run with
/// [`Outcome::Diverged`]; only an invalid grid is an `Err`.
pub fn simulate<const N: usize, F>(
    f: F,
    s0: SVector<f64, N>,
    t_final: f64,
    dt: f64,
    method: Method,
) -> Result<Trajectory<SVector<f64, N>>>
where
    F: Fn(f64, &SVector<f64, N>) -> Result<SVector<f64, N>>,
{
    simulate_observed(f, |x| Ok(*x), s0, t_final, dt, method)
}

/// As [`simulate`], storing `observe(x)` instead of the raw state.
pub fn simulate_observed<const N: usize, S, F, O>(
    f: F,
    observe: O,
    s0: SVector<f64, N>,
    t_final: f64,
    dt: f64,
    method: Method,
) -> Result<Trajectory<S>>
where
    F: Fn(f64, &SVector<f64, N>) -> Result<SVector<f64, N>>,
    O: Fn(&SVector<f64, N>) -> Result<S>,
{
    validate_grid(t_final, dt)?;
    let n = sample_count(t_final, dt);
    let mut samples = Vec::with_capacity(n);
    let mut outcome = Outcome::Completed;
    let mut x = s0;
    for i in 0..n {
        let t = i as f64 * dt;
        if diverged(&x) {
            outcome = Outcome::Diverged {
                t,
                reason: "state left the finite range".into(),
            };
            break;
        }
        match observe(&x) {
            Ok(s) => samples.push(Sample { t, state: s }),
            Err(e) => {
                outcome = Outcome::Diverged {
                    t,
                    reason: e.to_string(),
                };
                break;
            }
        }
        if i + 1 == n {
            break;
        }
        match step(method, &f, &x, t, dt) {
            Ok(next) => x = next,
            Err(e) => {
                outcome = Outcome::Diverged {
                    t: (i + 1) as f64 * dt,
                    reason: e.to_string(),
                };
                break;
            }
        }
    }
    Ok(Trajectory {
        dt,
        samples,
        outcome,
    })
}

/// Open-loop simulation of one quadrotor model under a rotor-speed schedule,
/// recorded in generalized coordinates.
pub fn simulate_model<U>(
    model: Model,
    params: &QuadParams,
    input: U,
    s0: &GenState,
    t_final: f64,
    dt: f64,
    method: Method,
) -> Result<Trajectory<GenState>>
where
    U: Fn(f64) -> RotorSpeeds,
{
    params.validate()?;
    let x0 = model.initial_state(s0, params);
    simulate_observed(
        |t, x| model.derivative(x, &Actuation::Rotors(input(t)), params),
        |x| model.generalized(x, params),
        x0,
        t_final,
        dt,
        method,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::HOVER_SPEED;
    use approx::assert_relative_eq;
    use nalgebra::{Vector1, Vector2};

    type V1 = Vector1<f64>;

    #[test]
    fn euler_examples() {
        let zero = |_t: f64, _x: &V1| Ok(V1::zeros());
        assert_eq!(
            step_euler(&zero, &V1::new(3.0), 0.0, 0.1).unwrap(),
            V1::new(3.0)
        );
        let growth = |_t: f64, x: &V1| Ok(*x);
        assert_relative_eq!(
            step_euler(&growth, &V1::new(1.0), 0.0, 0.1).unwrap()[0],
            1.1
        );

        // ẋ = v, v̇ = −x from (1, 0), dt = 0.1: (1 + 0.1·0, 0 − 0.1·1)
        let osc = |_t: f64, s: &Vector2<f64>| Ok(Vector2::new(s[1], -s[0]));
        let next = step_euler(&osc, &Vector2::new(1.0, 0.0), 0.0, 0.1).unwrap();
        assert_eq!(next, Vector2::new(1.0, -0.1));
    }

    #[test]
    fn rk4_examples() {
        let zero = |_t: f64, _x: &V1| Ok(V1::zeros());
        assert_eq!(
            step_rk4(&zero, &V1::new(3.0), 0.0, 0.1).unwrap(),
            V1::new(3.0)
        );
        let growth = |_t: f64, x: &V1| Ok(*x);
        // Taylor polynomial of e^0.1 through the fourth-order term.
        let taylor: f64 = 1.0 + 0.1 + 0.01 / 2.0 + 0.001 / 6.0 + 0.0001 / 24.0;
        let got = step_rk4(&growth, &V1::new(1.0), 0.0, 0.1).unwrap()[0];
        assert_relative_eq!(got, taylor, epsilon = 1e-15);
        assert!((got - 1.10517083).abs() < 1e-8);
    }

    #[test]
    fn rk4_global_error_is_fourth_order() {
        let growth = |_t: f64, x: &V1| Ok(*x);
        let err = |dt: f64| {
            let tr = simulate(growth, V1::new(1.0), 1.0, dt, Method::Rk4).unwrap();
            (tr.last().unwrap().state[0] - std::f64::consts::E).abs()
        };
        let ratio = err(0.02) / err(0.01);
        assert!((ratio - 16.0).abs() < 0.5, "ratio {ratio}");
    }

    #[test]
    fn grid_is_index_times_dt() {
        let tr = simulate(
            |_t, _x: &V1| Ok(V1::zeros()),
            V1::new(0.0),
            60.0,
            0.01,
            Method::Euler,
        )
        .unwrap();
        assert_eq!(tr.len(), 6001);
        for (i, s) in tr.samples.iter().enumerate() {
            assert_eq!(s.t, i as f64 * 0.01);
        }
        assert_eq!(sample_count(1.0, 0.3), 4);
        assert_eq!(sample_count(0.3, 0.1), 4);
    }

    #[test]
    fn invalid_grid_is_rejected() {
        let f = |_t: f64, _x: &V1| Ok(V1::zeros());
        assert!(simulate(f, V1::zeros(), 1.0, -0.01, Method::Rk4).is_err());
        assert!(simulate(f, V1::zeros(), 0.0, 0.01, Method::Rk4).is_err());
    }

    #[test]
    fn blow_up_is_marked_diverged() {
        let f = |_t: f64, x: &V1| Ok(V1::new(x[0] * x[0]));
        let tr = simulate(f, V1::new(1.0), 5.0, 0.01, Method::Rk4).unwrap();
        assert!(tr.outcome.is_diverged());
        assert!(tr.len() < sample_count(5.0, 0.01));
        assert!(tr.states().all(|x| x[0].is_finite()));
    }

    #[test]
    fn zero_input_without_gravity_is_constant() {
        let params = QuadParams {
            gravity: 0.0,
            ..QuadParams::default()
        };
        let tr = simulate_model(
            Model::NewtonEuler,
            &params,
            |_| RotorSpeeds::uniform(0.0),
            &GenState::default(),
            1.0,
            0.01,
            Method::Rk4,
        )
        .unwrap();
        assert!(tr
            .states()
            .all(|s| s.to_vector() == GenState::default().to_vector()));
    }

    #[test]
    fn hover_holds_for_sixty_seconds() {
        let params = QuadParams::default();
        for model in Model::ALL {
            let tr = simulate_model(
                model,
                &params,
                |_| RotorSpeeds::uniform(HOVER_SPEED),
                &GenState::default(),
                60.0,
                0.01,
                Method::Rk4,
            )
            .unwrap();
            assert_eq!(tr.outcome, Outcome::Completed);
            let last = tr.last().unwrap().state;
            assert!(
                last.p.amax() < 1e-9 && last.eta.to_vec().amax() < 1e-9,
                "{model:?}"
            );
        }
    }

    #[test]
    fn singular_attitude_ends_the_run() {
        let params = QuadParams::default();
        let s0 = GenState {
            eta: crate::kinematics::EulerAngles::new(0.0, std::f64::consts::FRAC_PI_2, 0.0),
            ..Default::default()
        };
        let tr = simulate_model(
            Model::RevisedLagrange,
            &params,
            |_| RotorSpeeds::uniform(HOVER_SPEED),
            &s0,
            1.0,
            0.01,
            Method::Rk4,
        )
        .unwrap();
        assert!(tr.outcome.is_diverged());
    }
}
