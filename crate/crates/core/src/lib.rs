//! # rotordyn
//!
//! Rigid-body quadrotor dynamics in three formulations that share one
//! parameter set and one set of comparison coordinates:
//!
//! - Newton-Euler in body-frame velocities (`v`, `ω`),
//! - the Euler-Lagrange model commonly found in the literature, where the
//!   body torque `M` enters the Euler-angle equations directly,
//! - the revised Euler-Lagrange model, where the generalized torque is `WᵀM`.
//!
//! ## Modules
//!
//! - [`kinematics`]: elementary rotations, `S(·)`, the body-rate map `W(η)`
//!   and its inverse, analytic partials and the `Σ(W⁻¹)` blocks
//! - [`dynamics`]: mixer, gyroscopic torque, `J_R`, Coriolis matrix and the
//!   three state-derivative functions
//! - [`integrator`]: fixed-step Euler / RK4 and trajectory recording
//! - [`lab`]: identity checks, residuals of the equivalence argument and the
//!   open-loop RMSE experiments
//! - [`control`]: feedback-linearization PID on a helix and the integral-gain
//!   sweep

pub mod control;
pub mod dynamics;
pub mod error;
pub mod integrator;
pub mod kinematics;
pub mod lab;

pub use control::{Compensator, Gains, HelixSpec, TrackingResult};
pub use dynamics::{BodyState, GenState, QuadParams, RotorSpeeds, Wrench};
pub use error::{Error, Result};
pub use integrator::{Method, Outcome, Trajectory};
pub use kinematics::{EulerAngles, EulerSequence, Mat3, Vec3};
pub use lab::{CoordGroup, RelationReport, RmseTable};
