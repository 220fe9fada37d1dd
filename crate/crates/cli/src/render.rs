//! Plain-text and JSON rendering for command output.

use std::fmt::Write;

use serde_json::{json, Value};

use orbifold_morse::flowlab::{BasinCensus, FlowLab, TerminalStatus};
use orbifold_morse::morse_poly::InertiaSectorDatum;
use orbifold_morse::{Certificate, CriticalPoint, InequalityReport, Trajectory};

pub fn critical_table(points: &[CriticalPoint]) -> String {
    let width = points.iter().map(|p| p.label().len()).max().unwrap_or(5).max(5);
    let mut out = String::new();
    writeln!(out, "{:<width$}  {:>12}  {:>5}  {:>7}  {:>5}  orientable", "point", "value", "index", "coindex", "|G|")
        .unwrap();
    for p in points {
        writeln!(
            out,
            "{:<width$}  {:>12.6}  {:>5}  {:>7}  {:>5}  {}",
            p.label(),
            p.value(),
            p.index_dim(),
            p.coindex_dim(),
            p.stabilizer().order(),
            if p.orientable() { "yes" } else { "no" }
        )
        .unwrap();
    }
    writeln!(out, "{} critical orbit(s)", points.len()).unwrap();
    out
}

pub fn certificate_text(cert: &Certificate, representable: bool) -> String {
    let s = &cert.stats;
    let mut out = String::new();
    writeln!(out, "seeds: {} (converged {}, singular {}, diverged {})", s.seeds, s.converged, s.singular, s.diverged)
        .unwrap();
    writeln!(out, "critical points upstairs: {}", cert.upstairs).unwrap();
    match cert.min_separation {
        Some(d) => writeln!(out, "minimum orbit separation: {d:.6}").unwrap(),
        None => writeln!(out, "minimum orbit separation: n/a").unwrap(),
    }
    writeln!(out, "representable: {}", if representable { "yes" } else { "no" }).unwrap();
    out
}

pub fn certificate_json(cert: &Certificate, representable: bool) -> Value {
    let s = &cert.stats;
    json!({
        "seeds": s.seeds,
        "converged": s.converged,
        "singular": s.singular,
        "diverged": s.diverged,
        "upstairs": cert.upstairs,
        "min_separation": cert.min_separation,
        "representable": representable,
    })
}

pub fn sector_table(sectors: &[InertiaSectorDatum]) -> String {
    let width = sectors.iter().map(|s| s.label.len()).max().unwrap_or(5).max(5);
    let mut out = String::new();
    writeln!(
        out,
        "{:<width$}  {:>5}  {:>5}  {:>5}  {:>9}  {:>11}  {:>5}  orientable",
        "point", "class", "size", "order", "ind_fixed", "coind_fixed", "age"
    )
    .unwrap();
    for s in sectors {
        let age = s.age.map(|a| a.to_string()).unwrap_or_else(|| "-".into());
        writeln!(
            out,
            "{:<width$}  {:>5}  {:>5}  {:>5}  {:>9}  {:>11}  {:>5}  {}",
            s.label,
            s.class,
            s.class_size,
            s.element_order,
            s.ind_fixed_dim,
            s.coind_fixed_dim,
            age,
            if s.orientable { "yes" } else { "no" }
        )
        .unwrap();
    }
    writeln!(out, "{} sector(s)", sectors.len()).unwrap();
    out
}

pub fn report_text(report: &InequalityReport) -> String {
    let mut out = String::new();
    writeln!(out, "M(t) = {}", report.morse).unwrap();
    writeln!(out, "P(t) = {}", report.poincare).unwrap();
    match &report.remainder {
        Some(r) => writeln!(out, "R(t) = {r}").unwrap(),
        None => writeln!(out, "R(t) = none").unwrap(),
    }
    writeln!(out, "euler check: {}", if report.euler_check { "ok" } else { "failed" }).unwrap();
    writeln!(out, "consistent: {}", if report.consistent { "yes" } else { "no" }).unwrap();
    if let Some(reason) = &report.reason {
        writeln!(out, "reason: {reason}").unwrap();
    }
    out
}

pub fn betti_text(dims: &[u64]) -> String {
    let mut out = String::new();
    for (k, b) in dims.iter().enumerate() {
        writeln!(out, "b{k} = {b}").unwrap();
    }
    out
}

fn status_json(lab: &FlowLab<'_, f64>, status: &TerminalStatus) -> Value {
    match status {
        TerminalStatus::Converged(k) => json!({"converged": label_of(lab, *k)}),
        TerminalStatus::MaxTimeReached => json!("max_time_reached"),
        TerminalStatus::LeftDomain => json!("left_domain"),
    }
}

fn label_of(lab: &FlowLab<'_, f64>, k: usize) -> String {
    orbifold_morse::critical::point_label(&lab.representatives()[k])
}

pub fn trajectory_json(lab: &FlowLab<'_, f64>, traj: &Trajectory) -> Value {
    let states: Vec<Vec<f64>> = traj.states.iter().map(|s| s.iter().copied().collect()).collect();
    json!({
        "times": traj.times,
        "states": states,
        "f_values": traj.f_values,
        "terminal_status": status_json(lab, &traj.terminal_status),
    })
}

pub fn trajectory_text(lab: &FlowLab<'_, f64>, traj: &Trajectory) -> String {
    let mut out = String::new();
    writeln!(out, "{:>14}  {:>14}  state", "t", "f").unwrap();
    for ((t, f), x) in traj.times.iter().zip(&traj.f_values).zip(&traj.states) {
        let coords: Vec<String> = x.iter().map(|v| format!("{v:.9}")).collect();
        writeln!(out, "{t:>14.6}  {f:>14.9}  {}", coords.join(" ")).unwrap();
    }
    let status = match &traj.terminal_status {
        TerminalStatus::Converged(k) => format!("converged to {}", label_of(lab, *k)),
        TerminalStatus::MaxTimeReached => "reached t_max".into(),
        TerminalStatus::LeftDomain => "left the domain".into(),
    };
    writeln!(out, "status: {status}").unwrap();
    out
}

pub fn census_json(lab: &FlowLab<'_, f64>, census: &BasinCensus) -> Value {
    let hits: Vec<Value> =
        census.hits.iter().enumerate().map(|(k, n)| json!({"point": label_of(lab, k), "hits": n})).collect();
    json!({
        "hits": hits,
        "converged": census.converged(),
        "max_time_reached": census.max_time,
        "left_domain": census.left_domain,
        "failed": census.failed,
        "total": census.total(),
    })
}

pub fn census_text(lab: &FlowLab<'_, f64>, census: &BasinCensus) -> String {
    let mut out = String::new();
    for (k, n) in census.hits.iter().enumerate() {
        writeln!(out, "{}  {n}", label_of(lab, k)).unwrap();
    }
    writeln!(
        out,
        "converged {} / {} (max time {}, left domain {}, failed {})",
        census.converged(),
        census.total(),
        census.max_time,
        census.left_domain,
        census.failed
    )
    .unwrap();
    out
}
