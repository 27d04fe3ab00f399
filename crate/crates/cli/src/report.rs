//! Text report of a designed sequence.

use std::fmt::Write;

use ctqd_core::design::assemble::differences;

use crate::source::Designed;

/// Four decimals, without a sign on values that round to zero.
fn num(x: f64) -> f64 {
    if x.abs() < 5e-5 {
        0.0
    } else {
        x
    }
}

fn list(xs: &[f64]) -> String {
    if xs.is_empty() {
        return "-".into();
    }
    xs.iter().map(|&x| format!("{:.4}", num(x))).collect::<Vec<_>>().join(" ")
}

/// Phase report: the step at each level followed by the per-pair phases,
/// one line per pair, with a blank line between blocks so the plateaus
/// stand out.
pub fn design_report(d: &Designed) -> String {
    let mut s = String::new();
    let ch = &d.characterization;
    let seq = &d.sequence;
    let spec = &d.spec;
    let _ = writeln!(s, "{}: {} pairs, level-3 mode {}, seed {}", d.name, seq.len(), spec.level3_mode.as_str(), spec.seed);
    let _ = writeln!(s, "target: alpha {:.4}, chi {:.4}, P_f {:.4}", spec.target.alpha, num(spec.target.chi), spec.target.p_f());
    let _ = writeln!(
        s,
        "base pair: {} shape, theta_s {:.4}, theta_p {:.4}; |r| {:.4}, alpha {:.4}, gamma {:.4}",
        d.pair.shape.kind(),
        num(d.pair.theta_s),
        num(d.pair.theta_p),
        ch.r.norm(),
        num(ch.alpha),
        num(ch.gamma)
    );
    if let Some(h) = &seq.hierarchy {
        let _ = writeln!(s, "level 1: theta_21 = pi - 2 alpha = {:.4} (alpha = {:.4})", num(h.theta_21), h.alpha);
        let _ = writeln!(s, "level 2: offsets {}; differences {}", list(&h.level2_offsets), list(&differences(&h.level2_offsets)));
        let _ = writeln!(s, "level 3: offsets {}; differences {}", list(&h.level3_offsets), list(&differences(&h.level3_offsets)));
    }
    let _ = writeln!(s, "{:>5} {:>9} {:>9} {:>9} {:>9} {:>9}", "pair", "theta_s", "theta_p", "level1", "level2", "level3");
    let per_block = spec.n1 * spec.n2;
    for (i, p) in seq.pairs.iter().enumerate() {
        if i > 0 && i % per_block == 0 {
            s.push('\n');
        }
        let rec = seq.provenance.get(i);
        let part = |f: fn(&ctqd_core::PhaseRecord) -> f64| rec.map_or(f64::NAN, f);
        let _ = writeln!(
            s,
            "{:>5} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            i + 1,
            num(p.theta_s),
            num(p.theta_p),
            num(part(|r| r.level1)),
            num(part(|r| r.level2)),
            num(part(|r| r.level3))
        );
    }
    s
}
