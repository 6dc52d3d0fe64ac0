//! Text formats: profile CSV, constraint reports, key-value summaries.

use std::fmt::Write as _;

use matterwave::classical::Distinguishability;
use matterwave::poisson::{ProfileKind, RadialProfile};
use matterwave::report::ConstraintReport;

/// Nine significant digits in scientific notation.
pub fn number(x: f64) -> String {
    format!("{x:.8e}")
}

/// Profile as CSV: `#` comment lines (units first, then metadata), the
/// header `u,w`, one row per grid node, LF line endings.
pub fn profile_csv(profile: &RadialProfile) -> String {
    let m = &profile.meta;
    let mut s = String::new();
    s.push_str("# u: screen radius in units of the obstacle radius R; w: intensity relative to the obstacle-free density\n");
    let kind = match m.kind {
        ProfileKind::Quantum if m.interaction => "quantum",
        ProfileKind::Quantum => "ideal",
        ProfileKind::Classical => "classical",
    };
    let _ = writeln!(
        s,
        "# model = {kind}; k = {}; ell = {}; beta = {}; eta = {}; source_averaged = {}; velocity_nodes = {}",
        number(m.params.k),
        number(m.params.ell),
        number(m.params.beta),
        number(m.capture_eta),
        m.source_averaged,
        m.velocity_nodes
    );
    if let Some(d) = m.setup_digest {
        let _ = writeln!(s, "# setup digest = {d:016x}");
    }
    if let Some(a) = m.origin_coefficient {
        let _ = writeln!(
            s,
            "# w diverges as A/u on the axis with A = {}; a u = 0 row repeats the first nonzero node",
            number(a)
        );
    }
    if !m.caustics.is_empty() {
        let list: Vec<String> = m.caustics.iter().map(|&c| number(c)).collect();
        let _ = writeln!(s, "# caustics at u = {}", list.join(" "));
    }
    s.push_str("u,w\n");
    for (u, w) in profile.u.iter().zip(&profile.w) {
        let _ = writeln!(s, "{},{}", number(*u), number(*w));
    }
    s
}

/// Human-readable report, one line per constraint.
pub fn report_text(title: &str, reports: &[ConstraintReport]) -> String {
    let mut s = format!("{title}\n");
    for r in reports {
        let _ = writeln!(s, "{r}");
    }
    let failed = reports.iter().filter(|r| !r.satisfied).count();
    let _ = writeln!(
        s,
        "{} of {} constraints satisfied",
        reports.len() - failed,
        reports.len()
    );
    s
}

fn quote(text: &str) -> String {
    format!("\"{}\"", text.replace('"', "'"))
}

/// Machine-readable report: `<name>.<field> = value` lines mirroring the
/// constraint fields, in the config syntax.
pub fn report_kv(reports: &[ConstraintReport]) -> String {
    let mut s = String::new();
    for r in reports {
        let _ = writeln!(s, "{}.value = {}", r.name, number(r.value));
        let _ = writeln!(s, "{}.bound = {}", r.name, number(r.bound));
        let _ = writeln!(s, "{}.direction = {}", r.name, quote(r.direction.symbol()));
        let _ = writeln!(s, "{}.satisfied = {}", r.name, r.satisfied);
        let _ = writeln!(s, "{}.note = {}", r.name, quote(&r.note));
    }
    s
}

pub fn distinguishability_kv(
    d: &Distinguishability,
    quantum: &RadialProfile,
    classical: &RadialProfile,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "quantum.w0 = {}", number(quantum.center()));
    let _ = writeln!(s, "classical.w0 = {}", number(classical.center()));
    let _ = writeln!(s, "spot_ratio = {}", number(d.spot_ratio));
    let _ = writeln!(s, "l1_distance = {}", number(d.l1_distance));
    s
}
