//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Tolerances and runtime limits are fixed
//! here and must not be relaxed.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotordyn::control::{default_ki_grid, gain_sweep};
use rotordyn::dynamics::{Actuation, Model};
use rotordyn::integrator::step_rk4;
use rotordyn::kinematics::rotation;
use rotordyn::lab::{
    check_proof_chain, check_relations, run_model_comparison, run_oracle_comparison, sample_state,
    ComparisonConfig, CoordGroup, Partials, RmseTable,
};
use rotordyn::{
    BodyState, Compensator, EulerAngles, Gains, GenState, HelixSpec, QuadParams, Vec3, Wrench,
};

struct Verdict {
    id: u8,
    title: &'static str,
    checks: Vec<(bool, String)>,
    elapsed: Duration,
    limit: Option<Duration>,
}

impl Verdict {
    fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.0) && self.limit.is_none_or(|l| self.elapsed < l)
    }
}

fn timed(
    id: u8,
    title: &'static str,
    limit: Option<f64>,
    f: impl FnOnce() -> Vec<(bool, String)>,
) -> Verdict {
    let start = Instant::now();
    let checks = f();
    Verdict {
        id,
        title,
        checks,
        elapsed: start.elapsed(),
        limit: limit.map(Duration::from_secs_f64),
    }
}

fn check(ok: bool, detail: String) -> (bool, String) {
    (ok, detail)
}

fn relations() -> Vec<(bool, String)> {
    let report =
        check_relations(1000, 20_240_601, 1e-9, Partials::Analytic).expect("relation sampling");
    report
        .relations
        .iter()
        .map(|r| {
            check(
                r.max_residual < 1e-9,
                format!("R{} max {:.2e} < 1e-9", r.index, r.max_residual),
            )
        })
        .collect()
}

fn proof_chain() -> Vec<(bool, String)> {
    let params = QuadParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (eta, eta_dot) = sample_state(&mut rng);
        let torque = Vec3::new(
            rng.random_range(-0.05..0.05),
            rng.random_range(-0.05..0.05),
            rng.random_range(-0.05..0.05),
        );
        let s = GenState {
            eta,
            eta_dot,
            ..Default::default()
        };
        let r = check_proof_chain(&s, &torque, &params).expect("sampled states are regular");
        worst = worst.max(r.newton_euler);
    }
    let exhibit = GenState {
        eta: EulerAngles::new(0.3, 0.4, 0.5),
        eta_dot: Vec3::new(0.1, -0.2, 0.3),
        ..Default::default()
    };
    let lit = check_proof_chain(&exhibit, &Vec3::new(0.01, -0.02, 0.005), &params)
        .unwrap()
        .literature_newton_euler;
    vec![
        check(
            worst < 1e-9,
            format!("r-E-L N-E residual max {worst:.2e} < 1e-9 (1000 states)"),
        ),
        check(
            lit > 1e-3,
            format!("literature E-L residual {lit:.2e} > 1e-3 at exhibit state"),
        ),
    ]
}

fn comparison_cfg(dt: f64) -> ComparisonConfig {
    ComparisonConfig {
        dt,
        ..ComparisonConfig::default()
    }
}

fn table_pattern() -> Vec<(bool, String)> {
    let coarse = run_model_comparison(&comparison_cfg(0.01)).unwrap();
    let fine = run_model_comparison(&comparison_cfg(0.001)).unwrap();
    let mut out = Vec::new();
    for g in CoordGroup::ALL {
        let (r10, e10) = (
            coarse.value("r-E-L", g).unwrap(),
            coarse.value("E-L", g).unwrap(),
        );
        let (r1, e1) = (
            fine.value("r-E-L", g).unwrap(),
            fine.value("E-L", g).unwrap(),
        );
        let ratio = r10 / e10;
        let drop = r10 / r1;
        let change = (e1 - e10).abs() / e10;
        out.push(check(
            ratio <= 1e-3,
            format!("{}: r-E-L/E-L {ratio:.1e} <= 1e-3", g.name()),
        ));
        out.push(check(
            drop >= 100.0,
            format!("{}: r-E-L drop {drop:.0}x >= 100", g.name()),
        ));
        out.push(check(
            change < 0.1,
            format!("{}: E-L change {:.2}% < 10%", g.name(), 100.0 * change),
        ));
    }
    out
}

fn oracle_pattern() -> Vec<(bool, String)> {
    let mut out = Vec::new();
    for dt in [0.01, 0.001] {
        let t: RmseTable = run_oracle_comparison(&comparison_cfg(dt)).unwrap();
        for g in CoordGroup::ALL {
            let ne = t.value("N-E", g).unwrap();
            let rel = t.value("r-E-L", g).unwrap();
            let el = t.value("E-L", g).unwrap();
            let spread = ne.max(rel) / ne.min(rel);
            let gap = el / ne.max(rel);
            let ms = dt * 1e3;
            out.push(check(
                spread <= 2.0,
                format!("{ms} ms {}: N-E/r-E-L spread {spread:.2} <= 2", g.name()),
            ));
            out.push(check(
                gap >= 1e3,
                format!("{ms} ms {}: E-L gap {gap:.1e} >= 1e3", g.name()),
            ));
        }
    }
    out
}

fn invariants(params: &QuadParams, body: &BodyState) -> (f64, f64) {
    let j = params.inertia_matrix();
    let e = 0.5 * body.omega.dot(&(j * body.omega));
    let h = (rotation(&body.eta, params.sequence) * j * body.omega).norm();
    (e, h)
}

fn conservation() -> Vec<(bool, String)> {
    let params = QuadParams {
        gravity: 0.0,
        ..QuadParams::default()
    };
    let start = BodyState {
        eta: EulerAngles::new(0.2, -0.3, 0.4),
        omega: Vec3::new(0.4, -0.3, 2.0),
        ..Default::default()
    };
    let input = Actuation::Wrench(Wrench::default());
    let (dt, n) = (1e-3, 10_000);
    let mut out = Vec::new();
    for model in [Model::NewtonEuler, Model::RevisedLagrange] {
        let g0 = start.to_generalized(params.sequence).unwrap();
        let mut x = model.initial_state(&g0, &params);
        let (e0, h0) = invariants(&params, &start);
        let (mut de, mut dh): (f64, f64) = (0.0, 0.0);
        for i in 0..n {
            x = step_rk4(
                &|_t, s| model.derivative(s, &input, &params),
                &x,
                i as f64 * dt,
                dt,
            )
            .unwrap();
            let body = model
                .generalized(&x, &params)
                .unwrap()
                .to_body(params.sequence);
            let (e, h) = invariants(&params, &body);
            de = de.max(((e - e0) / e0).abs());
            dh = dh.max(((h - h0) / h0).abs());
        }
        out.push(check(
            de < 1e-6,
            format!("{} energy drift {de:.1e} < 1e-6", model.label()),
        ));
        out.push(check(
            dh < 1e-6,
            format!("{} momentum drift {dh:.1e} < 1e-6", model.label()),
        ));
    }
    out
}

fn gain_sweep_pattern() -> Vec<(bool, String)> {
    let grid = default_ki_grid();
    let report = gain_sweep(
        &Compensator::BOTH,
        &grid,
        &Gains::default(),
        &HelixSpec::default(),
        &QuadParams::default(),
        1e-3,
    )
    .unwrap();
    let mut out = Vec::new();
    let has = [8e3, 15.5e3, 16e3].iter().all(|k| grid.contains(k));
    out.push(check(has, "grid contains 8e3, 15.5e3, 16e3".into()));
    let lit = report.min_destabilizing(Compensator::Literature);
    let rel = report.min_destabilizing(Compensator::Revised);
    let ordered = match (lit, rel) {
        (Some(a), Some(b)) => a < b,
        (Some(_), None) => true,
        _ => false,
    };
    out.push(check(
        ordered,
        format!("min destabilizing Ki: el_lit {lit:?} < rel {rel:?}"),
    ));
    for comp in Compensator::BOTH {
        for ki in [0.0, 8e3] {
            let low = report.cell(comp, ki).unwrap();
            out.push(check(
                low.stable && low.max_error < 0.1,
                format!(
                    "{comp} at Ki = {ki}: max |e_eta| {:.4} < 0.1",
                    low.max_error
                ),
            ));
        }
    }
    let rel_stable = report.stable_set(Compensator::Revised);
    let subset = report
        .stable_set(Compensator::Literature)
        .iter()
        .all(|k| rel_stable.contains(k));
    out.push(check(
        subset,
        "el_lit stable set is a subset of rel stable set".into(),
    ));
    out
}

fn run_cli(dir: &Path, args: &[&str], threads: &str) -> Vec<u8> {
    let status = Command::new(env!("CARGO_BIN_EXE_rotordyn"))
        .args(args)
        .current_dir(dir)
        .env("ROTORDYN_THREADS", threads)
        .output()
        .expect("spawn rotordyn");
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    std::fs::read(dir.join("out.csv")).unwrap()
}

fn determinism() -> Vec<(bool, String)> {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&str, &[&str]); 4] = [
        (
            "simulate",
            &["simulate", "--duration", "5", "--out", "out.csv"],
        ),
        (
            "compare",
            &["compare", "--duration", "5", "--out", "out.csv"],
        ),
        ("verify", &["verify", "--seed", "9", "--out", "out.csv"]),
        ("sweep", &["sweep", "--duration", "3", "--out", "out.csv"]),
    ];
    cases
        .iter()
        .map(|(name, args)| {
            let a = run_cli(dir.path(), args, "1");
            let b = run_cli(dir.path(), args, "4");
            check(
                !a.is_empty() && a == b,
                format!("{name}: {} bytes identical", a.len()),
            )
        })
        .collect()
}

fn main() {
    let verdicts = [
        timed(1, "relation suite", Some(5.0), relations),
        timed(2, "equivalence proof check", None, proof_chain),
        timed(3, "model comparison pattern", Some(30.0), table_pattern),
        timed(4, "refined-reference pattern", None, oracle_pattern),
        timed(5, "conservation", None, conservation),
        timed(6, "gain sweep pattern", Some(60.0), gain_sweep_pattern),
        timed(7, "determinism", None, determinism),
    ];
    let mut all = true;
    for v in &verdicts {
        for (ok, detail) in &v.checks {
            println!("    [{}] {detail}", if *ok { "ok" } else { "FAIL" });
        }
        let limit = v
            .limit
            .map(|l| format!(" (limit {}s)", l.as_secs()))
            .unwrap_or_default();
        println!(
            "criterion {} {}: {} in {:.2}s{limit}",
            v.id,
            v.title,
            if v.passed() { "PASS" } else { "FAIL" },
            v.elapsed.as_secs_f64()
        );
        all &= v.passed();
    }
    if !all {
        std::process::exit(1);
    }
}
