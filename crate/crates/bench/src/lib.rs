//! Shared fixtures for the criterion benches.

use rotordyn::lab::ComparisonConfig;
use rotordyn::{EulerAngles, GenState, Vec3};

/// A tilted, rotating state away from the gimbal singularity.
pub fn generic_state() -> GenState {
    GenState {
        p: Vec3::new(1.0, -2.0, 3.0),
        eta: EulerAngles::new(0.3, 0.4, 0.5),
        p_dot: Vec3::new(0.5, 0.1, -0.2),
        eta_dot: Vec3::new(0.1, -0.2, 0.3),
    }
}

/// The open-loop comparison shortened to `seconds`.
pub fn short_comparison(seconds: f64) -> ComparisonConfig {
    ComparisonConfig {
        duration: seconds,
        ..ComparisonConfig::default()
    }
}
