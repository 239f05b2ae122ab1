//! Euler-angle attitude kinematics.
//!
//! Conventions: `R(η)` maps body-frame vectors to the inertial frame. For a
//! sequence `(a, b, c)` (default `3-2-1`) the attitude is
//! `R = R_a(ψ) R_b(θ) R_c(φ)` and the body angular velocity is
//! `ω = W(η) η̇` with
//!
//! ```text
//! W(η) = [ e_c,  R_c(-φ) e_b,  R_c(-φ) R_b(-θ) e_a ]
//! ```
//!
//! i.e. each Euler rate is transported into the body frame through the
//! rotations that follow it. All partial derivatives are closed form:
//! `d/dα R_i(α) = S(e_i) R_i(α)`.

use std::fmt;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Default bound on `|det W|` below which `W⁻¹` is refused.
pub const SINGULARITY_TOLERANCE: f64 = 1e-6;

/// Euler angles `η = [φ, θ, ψ]` in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EulerAngles {
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
}

impl EulerAngles {
    pub const fn new(phi: f64, theta: f64, psi: f64) -> Self {
        Self { phi, theta, psi }
    }

    pub fn from_vec(v: &Vec3) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn to_vec(self) -> Vec3 {
        Vec3::new(self.phi, self.theta, self.psi)
    }

    pub fn is_finite(&self) -> bool {
        self.phi.is_finite() && self.theta.is_finite() && self.psi.is_finite()
    }
}

impl From<Vec3> for EulerAngles {
    fn from(v: Vec3) -> Self {
        Self::from_vec(&v)
    }
}

/// Ordered rotation axes, written in the order they are applied going from
/// the inertial frame to the body frame (`321`: yaw, pitch, roll).
///
/// The first axis carries `ψ`, the second `θ`, the third `φ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EulerSequence([u8; 3]);

impl EulerSequence {
    pub const ZYX: EulerSequence = EulerSequence([3, 2, 1]);

    pub fn new(first: u8, second: u8, third: u8) -> Result<Self> {
        let axes = [first, second, third];
        let in_range = axes.iter().all(|a| (1..=3).contains(a));
        if !in_range || first == second || second == third {
            return Err(Error::InvalidSequence(axes));
        }
        Ok(Self(axes))
    }

    pub fn axes(&self) -> [u8; 3] {
        self.0
    }

    fn psi_axis(&self) -> u8 {
        self.0[0]
    }

    fn theta_axis(&self) -> u8 {
        self.0[1]
    }

    fn phi_axis(&self) -> u8 {
        self.0[2]
    }
}

impl Default for EulerSequence {
    fn default() -> Self {
        Self::ZYX
    }
}

impl fmt::Display for EulerSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.0[0], self.0[1], self.0[2])
    }
}

impl std::str::FromStr for EulerSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let digits: Vec<u8> = s
            .bytes()
            .filter(|b| !matches!(b, b'-' | b' '))
            .map(|b| b.wrapping_sub(b'0'))
            .collect();
        match digits.as_slice() {
            &[a, b, c] => Self::new(a, b, c),
            _ => Err(Error::InvalidSequence([0, 0, 0])),
        }
    }
}

/// Unit vector along axis 1, 2 or 3.
pub fn unit(axis: u8) -> Vec3 {
    match axis {
        1 => Vec3::x(),
        2 => Vec3::y(),
        3 => Vec3::z(),
        _ => panic!("axis index {axis} outside 1..=3"),
    }
}

/// `S(a)` with `S(a) b = a × b`.
pub fn skew(a: &Vec3) -> Mat3 {
    Mat3::new(
        0.0, -a[2], a[1], //
        a[2], 0.0, -a[0], //
        -a[1], a[0], 0.0,
    )
}

/// Active rotation by `angle` about body axis `axis` (1 = x, 2 = y, 3 = z).
pub fn elem_rotation(axis: u8, angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    match axis {
        1 => Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c),
        2 => Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c),
        3 => Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
        _ => panic!("axis index {axis} outside 1..=3"),
    }
}

/// Body-to-inertial rotation `R(η)`.
pub fn rotation(eta: &EulerAngles, seq: EulerSequence) -> Mat3 {
    elem_rotation(seq.psi_axis(), eta.psi)
        * elem_rotation(seq.theta_axis(), eta.theta)
        * elem_rotation(seq.phi_axis(), eta.phi)
}

/// `W(η)` together with its partials `∂W/∂φ, ∂W/∂θ, ∂W/∂ψ`, evaluated once
/// and reused by everything that needs derivatives of the body-rate map.
#[derive(Debug, Clone, Copy)]
pub struct RateMap {
    pub w: Mat3,
    pub dw: [Mat3; 3],
}

impl RateMap {
    pub fn new(eta: &EulerAngles, seq: EulerSequence) -> Self {
        let (a, b, c) = (seq.psi_axis(), seq.theta_axis(), seq.phi_axis());
        let (ea, eb, ec) = (unit(a), unit(b), unit(c));
        let rc = elem_rotation(c, -eta.phi);
        let rb = elem_rotation(b, -eta.theta);
        let sc = skew(&ec);
        let sb = skew(&eb);

        let col_theta = rc * eb;
        let col_psi = rc * rb * ea;
        let w = Mat3::from_columns(&[ec, col_theta, col_psi]);

        // d/dφ R_c(-φ) = -S(e_c) R_c(-φ), likewise for θ.
        let d_phi = Mat3::from_columns(&[Vec3::zeros(), -sc * col_theta, -sc * col_psi]);
        let d_theta = Mat3::from_columns(&[Vec3::zeros(), Vec3::zeros(), -(rc * sb * rb * ea)]);
        Self {
            w,
            dw: [d_phi, d_theta, Mat3::zeros()],
        }
    }

    /// `Ẇ = Σ_k (∂W/∂η_k) η̇_k`.
    pub fn w_dot(&self, eta_dot: &Vec3) -> Mat3 {
        self.dw[0] * eta_dot[0] + self.dw[1] * eta_dot[1] + self.dw[2] * eta_dot[2]
    }

    /// `∂(W η̇)/∂η`: column `j` is `(∂W/∂η_j) η̇`.
    pub fn omega_partial_eta(&self, eta_dot: &Vec3) -> Mat3 {
        Mat3::from_columns(&[
            self.dw[0] * eta_dot,
            self.dw[1] * eta_dot,
            self.dw[2] * eta_dot,
        ])
    }

    pub fn det(&self) -> f64 {
        self.w.determinant()
    }

    pub fn inverse(&self) -> Result<Mat3> {
        let det = self.det();
        if det.abs() <= SINGULARITY_TOLERANCE || !det.is_finite() {
            return Err(Error::SingularConfiguration {
                det,
                tolerance: SINGULARITY_TOLERANCE,
            });
        }
        self.w.try_inverse().ok_or(Error::SingularConfiguration {
            det,
            tolerance: SINGULARITY_TOLERANCE,
        })
    }

    /// `∂W⁻¹/∂η_k = -W⁻¹ (∂W/∂η_k) W⁻¹`.
    pub fn inverse_partials(&self) -> Result<(Mat3, [Mat3; 3])> {
        let inv = self.inverse()?;
        let d = self.dw.map(|dk| -inv * dk * inv);
        Ok((inv, d))
    }
}

pub fn w_matrix(eta: &EulerAngles, seq: EulerSequence) -> Mat3 {
    RateMap::new(eta, seq).w
}

/// `W⁻¹(η)`, refusing configurations with `|det W| <= 1e-6`.
pub fn w_inverse(eta: &EulerAngles, seq: EulerSequence) -> Result<Mat3> {
    RateMap::new(eta, seq).inverse()
}

pub fn w_dot(eta: &EulerAngles, eta_dot: &Vec3, seq: EulerSequence) -> Mat3 {
    RateMap::new(eta, seq).w_dot(eta_dot)
}

/// Jacobian of row `i` of `W⁻¹` with respect to `η`: entry `(r, j)` is
/// `∂(W⁻¹)_{i r} / ∂η_j`.
pub fn inverse_row_jacobian(d_inv: &[Mat3; 3], row: usize) -> Mat3 {
    Mat3::from_fn(|r, j| d_inv[j][(row, r)])
}

/// The three 3×3 blocks of `Σ(W⁻¹)`:
/// `(∂w_iᵀ/∂η) W⁻¹ − ((∂w_iᵀ/∂η) W⁻¹)ᵀ`, with `w_i` row `i` of `W⁻¹`.
pub fn sigma_w_inv(eta: &EulerAngles, seq: EulerSequence) -> Result<[Mat3; 3]> {
    let (inv, d_inv) = RateMap::new(eta, seq).inverse_partials()?;
    Ok(sigma_blocks(&inv, &d_inv))
}

pub(crate) fn sigma_blocks(inv: &Mat3, d_inv: &[Mat3; 3]) -> [Mat3; 3] {
    [0, 1, 2].map(|i| {
        let a = inverse_row_jacobian(d_inv, i) * inv;
        a - a.transpose()
    })
}
