use std::fmt::Write;

use lieb_towers::spectra::SpectrumRecord;
use lieb_towers::HalfInt;

fn opt(v: Option<HalfInt>) -> String {
    v.map_or_else(|| "-".to_string(), |h| h.to_string())
}

pub fn spectrum_table(records: &[SpectrumRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# {:>20} {:>4} {:>4} {:>5} {:>5} {:>5} {:>5} {:>7}",
        "energy", "N_up", "N_dn", "s", "m", "j", "m_j", "cluster"
    );
    for r in records {
        let _ = writeln!(
            out,
            "  {:>20.12} {:>4} {:>4} {:>5} {:>5} {:>5} {:>5} {:>7}",
            r.energy,
            r.sector.n_up,
            r.sector.n_down,
            r.s.to_string(),
            r.m.to_string(),
            opt(r.j),
            r.m_j.to_string(),
            r.degeneracy_cluster
        );
    }
    out
}

/// One `PASS`/`FAIL` line per named check.
pub fn check_lines(checks: impl IntoIterator<Item = (String, bool, String)>) -> String {
    let mut out = String::new();
    for (name, pass, summary) in checks {
        let _ = writeln!(
            out,
            "{} {name}: {summary}",
            if pass { "PASS" } else { "FAIL" }
        );
    }
    out
}

pub fn half(v: Option<HalfInt>) -> String {
    opt(v)
}
