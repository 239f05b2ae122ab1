//! Numerical checks of the identities behind the revised model and the
//! open-loop model-comparison experiments.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{
    lagrange_derivative_wrench, Actuation, GenState, Lagrange, Model, QuadParams, RotorSpeeds,
    StateVec, Wrench,
};
use crate::error::{Error, Result};
use crate::integrator::{
    sample_count, simulate_model, step_rk4, Method, Outcome, Sample, Trajectory, DIVERGENCE_LIMIT,
};
use crate::kinematics::{
    inverse_row_jacobian, sigma_blocks, skew, w_inverse, w_matrix, EulerAngles, EulerSequence,
    Mat3, RateMap, Vec3,
};

/// Sampled states keep `|θ|` below this bound.
pub const THETA_BOUND: f64 = 1.3;
/// Central-difference step for the finite-difference variants.
pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Partials {
    Analytic,
    FiniteDifference,
}

impl fmt::Display for Partials {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Partials::Analytic => "analytic",
            Partials::FiniteDifference => "finite-difference",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationResidual {
    pub index: u8,
    pub name: &'static str,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationReport {
    pub seed: u64,
    pub n_samples: usize,
    pub partials: Partials,
    pub theta_bound: f64,
    pub relations: Vec<RelationResidual>,
}

impl RelationReport {
    pub fn all_passed(&self) -> bool {
        self.relations.iter().all(|r| r.passed)
    }

    pub fn max_residual(&self) -> f64 {
        self.relations
            .iter()
            .map(|r| r.max_residual)
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for RelationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "relation check: {} samples, seed {}, |theta| < {}, {} partials",
            self.n_samples, self.seed, self.theta_bound, self.partials
        )?;
        for r in &self.relations {
            writeln!(
                f,
                "  R{} {:<50} max residual {:>10.3e}  tol {:.1e}  {}",
                r.index,
                r.name,
                r.max_residual,
                r.tolerance,
                if r.passed { "PASS" } else { "FAIL" }
            )?;
        }
        write!(
            f,
            "overall: {}",
            if self.all_passed() { "PASS" } else { "FAIL" }
        )
    }
}

const RELATION_NAMES: [&str; 7] = [
    "Sigma(W^-1) blocks = S(rows of W^-1)",
    "dW^-1/dt = stacked omega^T (dw_i/deta W^-1)^T",
    "W^-1 d(omega)/d(eta_dot) = I",
    "(dW^-1/deta) omega = B d(omega)/d(eta_dot)",
    "d(W^-1 omega)/deta chain rule",
    "d/dt(domega/deta_dot) = domega/deta - S(omega) W",
    "(domega/deta_dot)^T = W^T",
];

/// Derivative quantities needed by the relations at one `(η, η̇)`.
struct Partial {
    w: Mat3,
    inv: Mat3,
    d_inv: [Mat3; 3],
    w_dot: Mat3,
    inv_dot: Mat3,
    omega_eta: Mat3,
    omega_rate: Mat3,
}

fn shifted(eta: &EulerAngles, dir: &Vec3, h: f64) -> EulerAngles {
    EulerAngles::from_vec(&(eta.to_vec() + dir * h))
}

fn partials(eta: &EulerAngles, rate: &Vec3, seq: EulerSequence, mode: Partials) -> Result<Partial> {
    let map = RateMap::new(eta, seq);
    let w = map.w;
    match mode {
        Partials::Analytic => {
            let (inv, d_inv) = map.inverse_partials()?;
            let w_dot = map.w_dot(rate);
            // ω is linear in η̇, so unit-rate differences are exact.
            let omega_rate = Mat3::from_fn(|i, j| {
                let mut e = *rate;
                e[j] += 1.0;
                (w * e - w * rate)[i]
            });
            Ok(Partial {
                w,
                inv,
                d_inv,
                w_dot,
                inv_dot: -inv * w_dot * inv,
                omega_eta: map.omega_partial_eta(rate),
                omega_rate,
            })
        }
        Partials::FiniteDifference => {
            let h = FD_STEP;
            let inv = map.inverse()?;
            let mut d_inv = [Mat3::zeros(); 3];
            let mut omega_eta = Mat3::zeros();
            for j in 0..3 {
                let mut e = Vec3::zeros();
                e[j] = 1.0;
                let (p, m) = (shifted(eta, &e, h), shifted(eta, &e, -h));
                d_inv[j] = (w_inverse(&p, seq)? - w_inverse(&m, seq)?) / (2.0 * h);
                let col = (w_matrix(&p, seq) * rate - w_matrix(&m, seq) * rate) / (2.0 * h);
                omega_eta.set_column(j, &col);
            }
            let (p, m) = (shifted(eta, rate, h), shifted(eta, rate, -h));
            let w_dot = (w_matrix(&p, seq) - w_matrix(&m, seq)) / (2.0 * h);
            let inv_dot = (w_inverse(&p, seq)? - w_inverse(&m, seq)?) / (2.0 * h);
            let omega_rate = Mat3::from_fn(|i, j| {
                let mut e = Vec3::zeros();
                e[j] = h;
                ((w * (rate + e) - w * (rate - e)) / (2.0 * h))[i]
            });
            Ok(Partial {
                w,
                inv,
                d_inv,
                w_dot,
                inv_dot,
                omega_eta,
                omega_rate,
            })
        }
    }
}

/// Residual of each relation at one `(η, η̇)`, max-abs entrywise.
pub fn relation_residuals(
    eta: &EulerAngles,
    rate: &Vec3,
    seq: EulerSequence,
    mode: Partials,
) -> Result<[f64; 7]> {
    let p = partials(eta, rate, seq, mode)?;
    let omega = p.w * rate;
    let jac = [0, 1, 2].map(|i| inverse_row_jacobian(&p.d_inv, i));

    let sigma = sigma_blocks(&p.inv, &p.d_inv);
    let r1 = (0..3)
        .map(|i| {
            let row: Vec3 = p.inv.row(i).transpose();
            (sigma[i] - skew(&row)).amax()
        })
        .fold(0.0, f64::max);

    let stacked = Mat3::from_fn(|i, k| (jac[i] * p.inv * omega)[k]);
    let r2 = (p.inv_dot - stacked).amax();

    let r3 = (p.inv * p.omega_rate - Mat3::identity()).amax();

    let lhs4 = Mat3::from_columns(&[p.d_inv[0] * omega, p.d_inv[1] * omega, p.d_inv[2] * omega]);
    let b = Mat3::from_fn(|i, k| (omega.transpose() * jac[i] * p.inv)[k]);
    let r4 = (lhs4 - b * p.omega_rate).amax();

    let lhs5 = p.inv * p.omega_eta + lhs4;
    let rhs5 = p.inv_dot * p.omega_rate + p.inv * p.w_dot;
    let r5 = (lhs5 - rhs5).amax();

    let r6 = (p.w_dot - (p.omega_eta - skew(&omega) * p.omega_rate)).amax();

    let r7 = (p.omega_rate.transpose() - p.w.transpose()).amax();

    Ok([r1, r2, r3, r4, r5, r6, r7])
}

pub fn sample_state(rng: &mut ChaCha8Rng) -> (EulerAngles, Vec3) {
    use std::f64::consts::PI;
    let eta = EulerAngles::new(
        rng.random_range(-PI..PI),
        rng.random_range(-THETA_BOUND..THETA_BOUND),
        rng.random_range(-PI..PI),
    );
    let rate = Vec3::new(
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
    );
    (eta, rate)
}

/// Evaluates Relations 1–7 at `n_samples` seeded random states.
pub fn check_relations(
    n_samples: usize,
    seed: u64,
    tol: f64,
    mode: Partials,
) -> Result<RelationReport> {
    check_relations_with(n_samples, seed, tol, mode, EulerSequence::ZYX)
}

pub fn check_relations_with(
    n_samples: usize,
    seed: u64,
    tol: f64,
    mode: Partials,
    seq: EulerSequence,
) -> Result<RelationReport> {
    if n_samples == 0 {
        return Err(Error::param("samples", "must be > 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 7];
    for _ in 0..n_samples {
        let (eta, rate) = sample_state(&mut rng);
        // A singular sample is only possible for sequences whose singularity
        // lies inside the sampled band; it counts as an outright failure.
        let res = relation_residuals(&eta, &rate, seq, mode).unwrap_or([f64::INFINITY; 7]);
        for (w, r) in worst.iter_mut().zip(res) {
            *w = w.max(if r.is_nan() { f64::INFINITY } else { r });
        }
    }
    let relations = worst
        .iter()
        .enumerate()
        .map(|(i, &r)| RelationResidual {
            index: i as u8 + 1,
            name: RELATION_NAMES[i],
            max_residual: r,
            tolerance: tol,
            passed: r < tol,
        })
        .collect();
    Ok(RelationReport {
        seed,
        n_samples,
        partials: mode,
        theta_bound: THETA_BOUND,
        relations,
    })
}

/// Both sides of the Lagrange-to-Newton-Euler argument at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProofChainReport {
    /// `d/dt[(∂ω/∂η̇)ᵀJω] − (∂ω/∂η)ᵀJω − WᵀM` with revised accelerations.
    pub lagrange: f64,
    /// `WᵀS(ω)Jω + WᵀJω̇ − WᵀM`.
    pub reduced: f64,
    /// `Jω̇ + S(ω)Jω − M` with revised accelerations.
    pub newton_euler: f64,
    /// `Jω̇ + S(ω)Jω − M` with literature accelerations.
    pub literature_newton_euler: f64,
    /// Normaliser used for the relative residuals above.
    pub scale: f64,
}

impl ProofChainReport {
    pub fn max_revised(&self) -> f64 {
        self.lagrange.max(self.reduced).max(self.newton_euler)
    }
}

/// All residuals are relative to `‖M‖ + ‖ω‖‖Jω‖`.
pub fn check_proof_chain(
    state: &GenState,
    torque: &Vec3,
    params: &QuadParams,
) -> Result<ProofChainReport> {
    let seq = params.sequence;
    let map = RateMap::new(&state.eta, seq);
    map.inverse()?;
    let j = params.inertia_matrix();
    let w = map.w;
    let w_dot = map.w_dot(&state.eta_dot);
    let omega = w * state.eta_dot;
    let jw = j * omega;
    let wrench = Wrench {
        thrust: 0.0,
        torque: *torque,
    };
    let rev = lagrange_derivative_wrench(state, &wrench, Lagrange::Revised, params)?;
    let lit = lagrange_derivative_wrench(state, &wrench, Lagrange::Literature, params)?;
    let omega_dot = |eta_ddot: &Vec3| w_dot * state.eta_dot + w * eta_ddot;

    let scale = torque.norm() + omega.norm() * jw.norm() + f64::MIN_POSITIVE;
    let wd = omega_dot(&rev.eta_ddot);
    let generalized = w.transpose() * torque;

    let lagrange = w_dot.transpose() * jw + w.transpose() * j * wd
        - map.omega_partial_eta(&state.eta_dot).transpose() * jw
        - generalized;
    let reduced = w.transpose() * skew(&omega) * jw + w.transpose() * j * wd - generalized;
    let ne = |wd: Vec3| j * wd + omega.cross(&jw) - torque;

    Ok(ProofChainReport {
        lagrange: lagrange.norm() / scale,
        reduced: reduced.norm() / scale,
        newton_euler: ne(wd).norm() / scale,
        literature_newton_euler: ne(omega_dot(&lit.eta_ddot)).norm() / scale,
        scale,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoordGroup {
    P,
    Eta,
    PDot,
    EtaDot,
}

impl CoordGroup {
    pub const ALL: [CoordGroup; 4] = [
        CoordGroup::P,
        CoordGroup::Eta,
        CoordGroup::PDot,
        CoordGroup::EtaDot,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CoordGroup::P => "p",
            CoordGroup::Eta => "eta",
            CoordGroup::PDot => "pdot",
            CoordGroup::EtaDot => "etadot",
        }
    }

    pub fn extract(&self, s: &GenState) -> Vec3 {
        match self {
            CoordGroup::P => s.p,
            CoordGroup::Eta => s.eta.to_vec(),
            CoordGroup::PDot => s.p_dot,
            CoordGroup::EtaDot => s.eta_dot,
        }
    }
}

/// Pooled RMSE over the three components of `group` and all samples.
pub fn rmse(a: &Trajectory<GenState>, b: &Trajectory<GenState>, group: CoordGroup) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::TrajectoryMismatch(format!(
            "lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.dt != b.dt {
        return Err(Error::TrajectoryMismatch(format!(
            "dt {} and {}",
            a.dt, b.dt
        )));
    }
    if a.is_empty() {
        return Err(Error::TrajectoryMismatch("empty trajectories".into()));
    }
    Ok(rmse_prefix(a, b, group, a.len()))
}

fn rmse_prefix(
    a: &Trajectory<GenState>,
    b: &Trajectory<GenState>,
    group: CoordGroup,
    n: usize,
) -> f64 {
    let sum: f64 = a.samples[..n]
        .iter()
        .zip(&b.samples[..n])
        .map(|(x, y)| (group.extract(&x.state) - group.extract(&y.state)).norm_squared())
        .sum();
    (sum / (3 * n) as f64).sqrt()
}

/// Rotor-speed schedule `Ωᵢ(t) = baseᵢ + amplitudeᵢ sin(frequencyᵢ t + phaseᵢ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorSchedule {
    pub base: [f64; 4],
    pub amplitude: [f64; 4],
    pub frequency: [f64; 4],
    pub phase: [f64; 4],
}

impl RotorSchedule {
    /// `u = [475.9 + 0.1 sin t, 476.2 + 0.1 sin t, 476, 476.1]`.
    pub fn benchmark() -> Self {
        Self {
            base: [475.9, 476.2, 476.0, 476.1],
            amplitude: [0.1, 0.1, 0.0, 0.0],
            frequency: [1.0, 1.0, 0.0, 0.0],
            phase: [0.0; 4],
        }
    }

    pub fn constant(speeds: [f64; 4]) -> Self {
        Self {
            base: speeds,
            amplitude: [0.0; 4],
            frequency: [0.0; 4],
            phase: [0.0; 4],
        }
    }

    pub fn at(&self, t: f64) -> RotorSpeeds {
        let o = |i: usize| {
            self.base[i] + self.amplitude[i] * (self.frequency[i] * t + self.phase[i]).sin()
        };
        RotorSpeeds::new(o(0), o(1), o(2), o(3))
    }
}

impl Default for RotorSchedule {
    fn default() -> Self {
        Self::benchmark()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonConfig {
    pub params: QuadParams,
    pub dt: f64,
    pub duration: f64,
    pub method: Method,
    pub input: RotorSchedule,
    pub initial: GenState,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        Self {
            params: QuadParams::comparison_airframe(),
            dt: 0.01,
            duration: 60.0,
            method: Method::Rk4,
            input: RotorSchedule::benchmark(),
            initial: GenState::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmseColumn {
    pub label: String,
    /// Indexed like [`CoordGroup::ALL`].
    pub values: [f64; 4],
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmseTable {
    pub title: String,
    pub reference: String,
    pub dt: f64,
    pub duration: f64,
    pub method: Method,
    pub columns: Vec<RmseColumn>,
}

impl RmseTable {
    pub fn value(&self, label: &str, group: CoordGroup) -> Option<f64> {
        let idx = CoordGroup::ALL.iter().position(|g| *g == group)?;
        self.columns
            .iter()
            .find(|c| c.label == label)
            .map(|c| c.values[idx])
    }

    pub fn column(&self, label: &str) -> Option<&RmseColumn> {
        self.columns.iter().find(|c| c.label == label)
    }
}

impl fmt::Display for RmseTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.title)?;
        writeln!(
            f,
            "reference: {}; dt = {} s; duration = {} s; integrator = {}",
            self.reference, self.dt, self.duration, self.method
        )?;
        write!(f, "{:<10}", "")?;
        for c in &self.columns {
            write!(f, " {:>14}", c.label)?;
        }
        writeln!(f)?;
        for (i, g) in CoordGroup::ALL.iter().enumerate() {
            write!(f, "RMSE_{:<5}", g.name())?;
            for c in &self.columns {
                write!(f, " {:>14.6e}", c.values[i])?;
            }
            writeln!(f)?;
        }
        for c in &self.columns {
            if let Some(note) = &c.note {
                writeln!(f, "note [{}]: {}", c.label, note)?;
            }
        }
        Ok(())
    }
}

fn column(label: &str, a: &Trajectory<GenState>, reference: &Trajectory<GenState>) -> RmseColumn {
    let n = a.len().min(reference.len());
    let mut notes = Vec::new();
    for (name, tr) in [(label, a), ("reference", reference)] {
        if let Outcome::Diverged { t, reason } = &tr.outcome {
            notes.push(format!("{name} diverged at t = {t} s ({reason})"));
        }
    }
    if n != reference.len() || n != a.len() {
        notes.push(format!("RMSE over the first {n} common samples"));
    }
    let values = if n == 0 {
        [f64::NAN; 4]
    } else {
        CoordGroup::ALL.map(|g| rmse_prefix(a, reference, g, n))
    };
    RmseColumn {
        label: label.to_string(),
        values,
        note: if notes.is_empty() {
            None
        } else {
            Some(notes.join("; "))
        },
    }
}

fn run_open_loop(model: Model, cfg: &ComparisonConfig) -> Result<Trajectory<GenState>> {
    let input = cfg.input;
    simulate_model(
        model,
        &cfg.params,
        |t| input.at(t),
        &cfg.initial,
        cfg.duration,
        cfg.dt,
        cfg.method,
    )
}

/// Simulates all three models and returns all of them, in `Model::ALL` order.
pub fn simulate_all(cfg: &ComparisonConfig) -> Result<[Trajectory<GenState>; 3]> {
    let (ne, (lit, rev)) = rayon::join(
        || run_open_loop(Model::NewtonEuler, cfg),
        || {
            rayon::join(
                || run_open_loop(Model::LiteratureLagrange, cfg),
                || run_open_loop(Model::RevisedLagrange, cfg),
            )
        },
    );
    Ok([ne?, lit?, rev?])
}

/// RMSE of the literature and revised Euler-Lagrange models against
/// Newton-Euler under the same rotor schedule.
pub fn run_model_comparison(cfg: &ComparisonConfig) -> Result<RmseTable> {
    let [ne, lit, rev] = simulate_all(cfg)?;
    Ok(RmseTable {
        title: format!(
            "Comparison with the Newton-Euler model ({} ms)",
            cfg.dt * 1e3
        ),
        reference: "N-E".into(),
        dt: cfg.dt,
        duration: cfg.duration,
        method: cfg.method,
        columns: vec![column("E-L", &lit, &ne), column("r-E-L", &rev, &ne)],
    })
}

/// Sub-steps of the reference integration per output step.
pub const REFERENCE_REFINEMENT: usize = 100;

/// Newton-Euler integrated with RK4 at `dt / 100`, sampled on the `dt` grid.
pub fn reference_trajectory(cfg: &ComparisonConfig) -> Result<Trajectory<GenState>> {
    let params = cfg.params;
    params.validate()?;
    let input = cfg.input;
    let model = Model::NewtonEuler;
    let fine = cfg.dt / REFERENCE_REFINEMENT as f64;
    let f = |t: f64, x: &StateVec| model.derivative(x, &Actuation::Rotors(input.at(t)), &params);
    // The fine grid is indexed globally so sample i lands exactly on i·dt.
    let advance = |i: usize, x: &StateVec| -> Result<StateVec> {
        let mut x = *x;
        for k in 0..REFERENCE_REFINEMENT {
            let t = (i * REFERENCE_REFINEMENT + k) as f64 * fine;
            x = step_rk4(&f, &x, t, fine)?;
        }
        Ok(x)
    };
    let n = sample_count(cfg.duration, cfg.dt);
    let mut x = model.initial_state(&cfg.initial, &params);
    let mut samples = Vec::with_capacity(n);
    let mut outcome = Outcome::Completed;
    for i in 0..n {
        let t = i as f64 * cfg.dt;
        let obs = if x
            .iter()
            .all(|v| v.is_finite() && v.abs() <= DIVERGENCE_LIMIT)
        {
            model.generalized(&x, &params)
        } else {
            Err(Error::TrajectoryMismatch(
                "reference state left the finite range".into(),
            ))
        };
        match obs {
            Ok(state) => samples.push(Sample { t, state }),
            Err(e) => {
                outcome = Outcome::Diverged {
                    t,
                    reason: e.to_string(),
                };
                break;
            }
        }
        if i + 1 < n {
            match advance(i, &x) {
                Ok(next) => x = next,
                Err(e) => {
                    outcome = Outcome::Diverged {
                        t: t + cfg.dt,
                        reason: e.to_string(),
                    };
                    break;
                }
            }
        }
    }
    Ok(Trajectory {
        dt: cfg.dt,
        samples,
        outcome,
    })
}

/// RMSE of all three models (at `cfg.dt`) against the refined reference,
/// which stands in for an independent multibody engine.
pub fn run_oracle_comparison(cfg: &ComparisonConfig) -> Result<RmseTable> {
    let (reference, models) = rayon::join(|| reference_trajectory(cfg), || simulate_all(cfg));
    let reference = reference?;
    let [ne, lit, rev] = models?;
    Ok(RmseTable {
        title: format!(
            "Comparison with the refined reference ({} ms)",
            cfg.dt * 1e3
        ),
        reference: format!(
            "N-E, RK4 at dt/{REFERENCE_REFINEMENT} (substitute for a multibody simulator)"
        ),
        dt: cfg.dt,
        duration: cfg.duration,
        method: cfg.method,
        columns: vec![
            column("N-E", &ne, &reference),
            column("E-L", &lit, &reference),
            column("r-E-L", &rev, &reference),
        ],
    })
}
