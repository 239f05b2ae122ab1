//! Quadrotor models over a shared parameter set.
//!
//! Rotor layout ("plus"): rotor 1 on `+x`, rotor 2 on `−y`, rotor 3 on `−x`,
//! rotor 4 on `+y`. Rotors 1 and 3 spin about `+z`, rotors 2 and 4 about
//! `−z`, so the reaction torque on the airframe is
//! `b(−Ω₁² + Ω₂² − Ω₃² + Ω₄²)` and the rotor momentum is
//! `Jr(Ω₁ − Ω₂ + Ω₃ − Ω₄) e₃`.
//!
//! State vectors are 12-long: Newton-Euler `[p, η, v, ω]`, Euler-Lagrange
//! `[p, η, ṗ, η̇]`.

use nalgebra::{SVector, Vector4};

use crate::error::{Error, Result};
use crate::kinematics::{rotation, skew, EulerAngles, EulerSequence, Mat3, RateMap, Vec3};

pub type StateVec = SVector<f64, 12>;

/// Rotor speed at which the default parameters hover.
pub const HOVER_SPEED: f64 = 476.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadParams {
    /// kg
    pub mass: f64,
    /// Diagonal of the body inertia, kg·m².
    pub inertia: Vec3,
    /// m/s²
    pub gravity: f64,
    /// m
    pub arm_length: f64,
    /// N·s²/rad²
    pub thrust_coeff: f64,
    /// N·m·s²/rad²
    pub drag_coeff: f64,
    /// kg·m²
    pub rotor_inertia: f64,
    pub gyro_enabled: bool,
    pub sequence: EulerSequence,
}

impl Default for QuadParams {
    fn default() -> Self {
        let mass = 0.468;
        let gravity = 9.81;
        Self {
            mass,
            inertia: Vec3::new(4.856e-3, 4.856e-3, 8.801e-3),
            gravity,
            arm_length: 0.225,
            thrust_coeff: hover_thrust_coeff(mass, gravity, HOVER_SPEED),
            drag_coeff: 1.14e-7,
            rotor_inertia: 3.357e-5,
            gyro_enabled: true,
            sequence: EulerSequence::ZYX,
        }
    }
}

/// `k` such that four rotors at `speed` carry the weight.
pub fn hover_thrust_coeff(mass: f64, gravity: f64, speed: f64) -> f64 {
    mass * gravity / (4.0 * speed * speed)
}

impl QuadParams {
    /// Parameters used by the open-loop model-comparison experiments.
    ///
    /// The comparison input leaves a net roll torque of about 1e-4 N·m. With
    /// the default inertia the pitch excursion comes within |cos θ| = 0.05 of
    /// the singularity; doubling the inertia keeps |cos θ| above 0.1 for the
    /// full 60 s while the attitude still varies strongly.
    pub fn comparison_airframe() -> Self {
        Self {
            inertia: Vec3::new(4.856e-3, 4.856e-3, 8.801e-3) * 2.0,
            ..Self::default()
        }
    }

    pub fn with_hover_speed(mut self, speed: f64) -> Self {
        self.thrust_coeff = hover_thrust_coeff(self.mass, self.gravity, speed);
        self
    }

    pub fn hover_speed(&self) -> f64 {
        (self.mass * self.gravity / (4.0 * self.thrust_coeff)).sqrt()
    }

    pub fn inertia_matrix(&self) -> Mat3 {
        Mat3::from_diagonal(&self.inertia)
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(
                    name,
                    format!("must be finite and > 0, got {v}"),
                ))
            }
        }
        positive("mass", self.mass)?;
        positive("inertia.x", self.inertia[0])?;
        positive("inertia.y", self.inertia[1])?;
        positive("inertia.z", self.inertia[2])?;
        positive("thrust_coeff", self.thrust_coeff)?;
        positive("drag_coeff", self.drag_coeff)?;
        positive("arm_length", self.arm_length)?;
        if !self.gravity.is_finite() || self.gravity < 0.0 {
            return Err(Error::param("gravity", "must be finite and >= 0"));
        }
        if !self.rotor_inertia.is_finite() || self.rotor_inertia < 0.0 {
            return Err(Error::param("rotor_inertia", "must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Four rotor angular velocities, rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorSpeeds(pub Vector4<f64>);

impl RotorSpeeds {
    pub fn new(o1: f64, o2: f64, o3: f64, o4: f64) -> Self {
        Self(Vector4::new(o1, o2, o3, o4))
    }

    pub fn uniform(speed: f64) -> Self {
        Self::new(speed, speed, speed, speed)
    }

    /// `−Ω₁ + Ω₂ − Ω₃ + Ω₄`
    pub fn relative_speed(&self) -> f64 {
        let o = &self.0;
        -o[0] + o[1] - o[2] + o[3]
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.iter().all(|o| o.is_finite() && *o >= 0.0) {
            Ok(())
        } else {
            Err(Error::param(
                "rotor_speeds",
                "each speed must be finite and >= 0",
            ))
        }
    }
}

/// Total thrust along body `z` and body torque.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Wrench {
    pub thrust: f64,
    pub torque: Vec3,
}

pub fn mixer(u: &RotorSpeeds, params: &QuadParams) -> Wrench {
    let sq = u.0.component_mul(&u.0);
    let lk = params.arm_length * params.thrust_coeff;
    Wrench {
        thrust: params.thrust_coeff * sq.sum(),
        torque: Vec3::new(
            lk * (sq[3] - sq[1]),
            lk * (sq[2] - sq[0]),
            params.drag_coeff * (-sq[0] + sq[1] - sq[2] + sq[3]),
        ),
    }
}

/// Rotor gyroscopic torque `Jr (ω × e₃)(−Ω₁ + Ω₂ − Ω₃ + Ω₄)`.
pub fn gyro_torque(omega: &Vec3, u: &RotorSpeeds, params: &QuadParams) -> Vec3 {
    if !params.gyro_enabled || params.rotor_inertia == 0.0 {
        return Vec3::zeros();
    }
    omega.cross(&Vec3::z()) * (params.rotor_inertia * u.relative_speed())
}

/// `J_R = Wᵀ J W`.
pub fn rotated_inertia(eta: &EulerAngles, params: &QuadParams) -> Mat3 {
    let map = RateMap::new(eta, params.sequence);
    map.w.transpose() * params.inertia_matrix() * map.w
}

/// `∂J_R/∂η_j = (∂W/∂η_j)ᵀ J W + Wᵀ J (∂W/∂η_j)`.
fn rotated_inertia_partials(map: &RateMap, j: &Mat3) -> [Mat3; 3] {
    map.dw.map(|dk| {
        let half = map.w.transpose() * j * dk;
        half + half.transpose()
    })
}

pub(crate) fn coriolis_from_map(map: &RateMap, eta_dot: &Vec3, j: &Mat3) -> Mat3 {
    let d_jr = rotated_inertia_partials(map, j);
    let jr_dot = d_jr[0] * eta_dot[0] + d_jr[1] * eta_dot[1] + d_jr[2] * eta_dot[2];
    // g(i, k) = ∂(J_R η̇)_i / ∂η_k; the energy gradient is gᵀ η̇.
    let g = Mat3::from_columns(&[d_jr[0] * eta_dot, d_jr[1] * eta_dot, d_jr[2] * eta_dot]);
    jr_dot - g.transpose() * 0.5
}

/// Coriolis/centrifugal matrix with
/// `C η̇ = J̇_R η̇ − ½ ∂(η̇ᵀ J_R η̇)/∂η`.
pub fn coriolis_matrix(eta: &EulerAngles, eta_dot: &Vec3, params: &QuadParams) -> Mat3 {
    let map = RateMap::new(eta, params.sequence);
    coriolis_from_map(&map, eta_dot, &params.inertia_matrix())
}

/// Pose plus body-frame velocities.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyState {
    pub p: Vec3,
    pub eta: EulerAngles,
    pub v: Vec3,
    pub omega: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyRates {
    pub p_dot: Vec3,
    pub eta_dot: Vec3,
    pub v_dot: Vec3,
    pub omega_dot: Vec3,
}

/// Generalized coordinates `(p, η)` and their rates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GenState {
    pub p: Vec3,
    pub eta: EulerAngles,
    pub p_dot: Vec3,
    pub eta_dot: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GenRates {
    pub p_dot: Vec3,
    pub eta_dot: Vec3,
    pub p_ddot: Vec3,
    pub eta_ddot: Vec3,
}

fn pack(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> StateVec {
    let mut x = StateVec::zeros();
    x.fixed_rows_mut::<3>(0).copy_from(a);
    x.fixed_rows_mut::<3>(3).copy_from(b);
    x.fixed_rows_mut::<3>(6).copy_from(c);
    x.fixed_rows_mut::<3>(9).copy_from(d);
    x
}

fn unpack(x: &StateVec) -> [Vec3; 4] {
    [0, 3, 6, 9].map(|i| x.fixed_rows::<3>(i).into_owned())
}

impl BodyState {
    pub fn to_vector(&self) -> StateVec {
        pack(&self.p, &self.eta.to_vec(), &self.v, &self.omega)
    }

    pub fn from_vector(x: &StateVec) -> Self {
        let [p, eta, v, omega] = unpack(x);
        Self {
            p,
            eta: eta.into(),
            v,
            omega,
        }
    }

    /// `ṗ = R v`, `η̇ = W⁻¹ ω`.
    pub fn to_generalized(&self, seq: EulerSequence) -> Result<GenState> {
        let inv = RateMap::new(&self.eta, seq).inverse()?;
        Ok(GenState {
            p: self.p,
            eta: self.eta,
            p_dot: rotation(&self.eta, seq) * self.v,
            eta_dot: inv * self.omega,
        })
    }
}

impl BodyRates {
    pub fn to_vector(&self) -> StateVec {
        pack(&self.p_dot, &self.eta_dot, &self.v_dot, &self.omega_dot)
    }
}

impl GenState {
    pub fn to_vector(&self) -> StateVec {
        pack(&self.p, &self.eta.to_vec(), &self.p_dot, &self.eta_dot)
    }

    pub fn from_vector(x: &StateVec) -> Self {
        let [p, eta, p_dot, eta_dot] = unpack(x);
        Self {
            p,
            eta: eta.into(),
            p_dot,
            eta_dot,
        }
    }

    /// `v = Rᵀ ṗ`, `ω = W η̇`.
    pub fn to_body(&self, seq: EulerSequence) -> BodyState {
        BodyState {
            p: self.p,
            eta: self.eta,
            v: rotation(&self.eta, seq).transpose() * self.p_dot,
            omega: RateMap::new(&self.eta, seq).w * self.eta_dot,
        }
    }

    pub fn omega(&self, seq: EulerSequence) -> Vec3 {
        RateMap::new(&self.eta, seq).w * self.eta_dot
    }
}

impl GenRates {
    pub fn to_vector(&self) -> StateVec {
        pack(&self.p_dot, &self.eta_dot, &self.p_ddot, &self.eta_ddot)
    }
}

/// Newton-Euler with an explicit wrench; `torque` is the total body torque.
pub fn ne_derivative_wrench(
    s: &BodyState,
    wrench: &Wrench,
    params: &QuadParams,
) -> Result<BodyRates> {
    let seq = params.sequence;
    let map = RateMap::new(&s.eta, seq);
    let inv = map.inverse()?;
    let r = rotation(&s.eta, seq);
    let j = params.inertia;
    let jw = s.omega.component_mul(&j);
    let omega_dot = (wrench.torque - s.omega.cross(&jw)).component_div(&j);
    let v_dot = Vec3::z() * (wrench.thrust / params.mass)
        - s.omega.cross(&s.v)
        - r.transpose() * Vec3::z() * params.gravity;
    Ok(BodyRates {
        p_dot: r * s.v,
        eta_dot: inv * s.omega,
        v_dot,
        omega_dot,
    })
}

/// `Jω̇ = M + τ_g − ω × Jω`, `v̇ = T/m e₃ − ω × v − g Rᵀ e₃`.
pub fn ne_derivative(s: &BodyState, u: &RotorSpeeds, params: &QuadParams) -> Result<BodyRates> {
    let mut wrench = mixer(u, params);
    wrench.torque += gyro_torque(&s.omega, u, params);
    ne_derivative_wrench(s, &wrench, params)
}

/// Which generalized torque enters the Euler-angle equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lagrange {
    /// `J_R η̈ + C η̇ = M`
    Literature,
    /// `J_R η̈ + C η̇ = Wᵀ M`
    Revised,
}

/// Euler-Lagrange derivative with an explicit wrench.
pub fn lagrange_derivative_wrench(
    s: &GenState,
    wrench: &Wrench,
    form: Lagrange,
    params: &QuadParams,
) -> Result<GenRates> {
    let seq = params.sequence;
    let map = RateMap::new(&s.eta, seq);
    // Refuse near-singular J_R = WᵀJW the same way W⁻¹ is refused.
    map.inverse()?;
    let j = params.inertia_matrix();
    let jr = map.w.transpose() * j * map.w;
    let c = coriolis_from_map(&map, &s.eta_dot, &j);
    let generalized = match form {
        Lagrange::Literature => wrench.torque,
        Lagrange::Revised => map.w.transpose() * wrench.torque,
    };
    let rhs = generalized - c * s.eta_dot;
    let eta_ddot = jr
        .cholesky()
        .map(|ch| ch.solve(&rhs))
        .ok_or(Error::SingularConfiguration {
            det: map.det(),
            tolerance: crate::kinematics::SINGULARITY_TOLERANCE,
        })?;
    let p_ddot = rotation(&s.eta, seq) * Vec3::z() * (wrench.thrust / params.mass)
        - Vec3::z() * params.gravity;
    Ok(GenRates {
        p_dot: s.p_dot,
        eta_dot: s.eta_dot,
        p_ddot,
        eta_ddot,
    })
}

fn lagrange_rotor_wrench(s: &GenState, u: &RotorSpeeds, params: &QuadParams) -> Wrench {
    let mut wrench = mixer(u, params);
    if params.gyro_enabled {
        wrench.torque += gyro_torque(&s.omega(params.sequence), u, params);
    }
    wrench
}

/// Literature model: `η̈ = J_R⁻¹(M + τ_g − C η̇)`,
/// `p̈ = T/m R e₃ − g e₃`.
pub fn el_lit_derivative(s: &GenState, u: &RotorSpeeds, params: &QuadParams) -> Result<GenRates> {
    let wrench = lagrange_rotor_wrench(s, u, params);
    lagrange_derivative_wrench(s, &wrench, Lagrange::Literature, params)
}

/// Revised model: `η̈ = J_R⁻¹(Wᵀ(M + τ_g) − C η̇)`.
pub fn rel_derivative(s: &GenState, u: &RotorSpeeds, params: &QuadParams) -> Result<GenRates> {
    let wrench = lagrange_rotor_wrench(s, u, params);
    lagrange_derivative_wrench(s, &wrench, Lagrange::Revised, params)
}

/// Solves `M = J W η̈ + (J Ẇ + S(W η̇) J W) η̇` for `η̈`.
pub fn ne_attitude_in_eta(s: &GenState, torque: &Vec3, params: &QuadParams) -> Result<Vec3> {
    let map = RateMap::new(&s.eta, params.sequence);
    let inv = map.inverse()?;
    let j = params.inertia_matrix();
    let omega = map.w * s.eta_dot;
    let bias = (j * map.w_dot(&s.eta_dot) + skew(&omega) * j * map.w) * s.eta_dot;
    let j_inv = Mat3::from_diagonal(&params.inertia.map(|x| 1.0 / x));
    Ok(inv * (j_inv * (torque - bias)))
}

/// The three formulations behind one state-vector interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    NewtonEuler,
    LiteratureLagrange,
    RevisedLagrange,
}

/// What drives the model: rotor speeds (mixer plus gyroscopic torque) or a
/// wrench applied directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Actuation {
    Rotors(RotorSpeeds),
    Wrench(Wrench),
}

impl Model {
    pub const ALL: [Model; 3] = [
        Model::NewtonEuler,
        Model::LiteratureLagrange,
        Model::RevisedLagrange,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Model::NewtonEuler => "N-E",
            Model::LiteratureLagrange => "E-L",
            Model::RevisedLagrange => "r-E-L",
        }
    }

    /// State vector for this model from generalized coordinates.
    pub fn initial_state(&self, s: &GenState, params: &QuadParams) -> StateVec {
        match self {
            Model::NewtonEuler => s.to_body(params.sequence).to_vector(),
            _ => s.to_vector(),
        }
    }

    pub fn generalized(&self, x: &StateVec, params: &QuadParams) -> Result<GenState> {
        match self {
            Model::NewtonEuler => BodyState::from_vector(x).to_generalized(params.sequence),
            _ => Ok(GenState::from_vector(x)),
        }
    }

    pub fn derivative(
        &self,
        x: &StateVec,
        input: &Actuation,
        params: &QuadParams,
    ) -> Result<StateVec> {
        match (self, input) {
            (Model::NewtonEuler, Actuation::Rotors(u)) => {
                Ok(ne_derivative(&BodyState::from_vector(x), u, params)?.to_vector())
            }
            (Model::NewtonEuler, Actuation::Wrench(w)) => {
                Ok(ne_derivative_wrench(&BodyState::from_vector(x), w, params)?.to_vector())
            }
            (Model::LiteratureLagrange, Actuation::Rotors(u)) => {
                Ok(el_lit_derivative(&GenState::from_vector(x), u, params)?.to_vector())
            }
            (Model::RevisedLagrange, Actuation::Rotors(u)) => {
                Ok(rel_derivative(&GenState::from_vector(x), u, params)?.to_vector())
            }
            (Model::LiteratureLagrange, Actuation::Wrench(w)) => Ok(lagrange_derivative_wrench(
                &GenState::from_vector(x),
                w,
                Lagrange::Literature,
                params,
            )?
            .to_vector()),
            (Model::RevisedLagrange, Actuation::Wrench(w)) => Ok(lagrange_derivative_wrench(
                &GenState::from_vector(x),
                w,
                Lagrange::Revised,
                params,
            )?
            .to_vector()),
        }
    }
}
