//! CSV writers. Numbers use Rust's shortest round-trip formatting, so files
//! are locale-independent and identical across runs.

use std::fmt::Write as _;

use rotordyn::control::SweepReport;
use rotordyn::lab::CoordGroup;
use rotordyn::{GenState, RelationReport, RmseTable, TrackingResult, Trajectory};

pub const TRAJECTORY_HEADER: &str = "t,x,y,z,phi,theta,psi,xd,yd,zd,phid,thetad,psid";

/// Plain decimal for moderate magnitudes, exponent form otherwise.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn row(out: &mut String, values: impl IntoIterator<Item = f64>) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(',');
        }
        first = false;
        out.push_str(&num(v));
    }
    out.push('\n');
}

pub fn trajectory_csv(traj: &Trajectory<GenState>) -> String {
    let mut out = String::with_capacity(160 * (traj.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for s in &traj.samples {
        let g = &s.state;
        let eta = g.eta.to_vec();
        row(
            &mut out,
            std::iter::once(s.t)
                .chain(g.p.iter().copied())
                .chain(eta.iter().copied())
                .chain(g.p_dot.iter().copied())
                .chain(g.eta_dot.iter().copied()),
        );
    }
    out
}

/// One row per coordinate group, one column per compared model.
pub fn rmse_csv(table: &RmseTable) -> String {
    let mut out = String::from("group");
    for c in &table.columns {
        out.push(',');
        out.push_str(&c.label);
    }
    out.push('\n');
    for (i, g) in CoordGroup::ALL.iter().enumerate() {
        out.push_str(g.name());
        for c in &table.columns {
            out.push(',');
            out.push_str(&num(c.values[i]));
        }
        out.push('\n');
    }
    out
}

pub fn tracking_csv(result: &TrackingResult) -> String {
    let mut out = String::from("t,e_phi,e_theta,e_psi\n");
    for s in &result.errors {
        row(&mut out, [s.t, s.state[0], s.state[1], s.state[2]]);
    }
    out
}

pub fn sweep_csv(report: &SweepReport) -> String {
    let mut out = String::from("compensator,ki,stable,max_err\n");
    for c in &report.cells {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            c.compensator,
            num(c.ki),
            c.stable,
            num(c.max_error)
        );
    }
    out
}

pub fn relations_csv(report: &RelationReport) -> String {
    let mut out = String::from("relation,name,max_residual,tolerance,passed\n");
    for r in &report.relations {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.index,
            r.name,
            num(r.max_residual),
            num(r.tolerance),
            r.passed
        );
    }
    out
}
