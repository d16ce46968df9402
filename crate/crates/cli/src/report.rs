//! Deterministic text and JSON rendering; numbers carry 12 significant digits.

use std::fmt::Write as _;

use oqw_core::classify::{Drift, Verdict};
use oqw_core::linalg::{r, ComplexMatrix};
use serde_json::{json, Value};

/// `x` rounded to 12 significant digits, with `-0` folded into `0`.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    let y: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if y == 0.0 {
        0.0
    } else {
        y
    }
}

/// Shortest decimal form of [`round12`].
pub fn fmt12(x: f64) -> String {
    let y = round12(x);
    if y == 0.0 || (1e-4..1e12).contains(&y.abs()) {
        format!("{y}")
    } else {
        format!("{y:e}")
    }
}

/// Entries of unit columns below this are printed as zero.
const BASIS_ZERO: f64 = 1e-12;

/// Columns of `basis` with the phase fixed so the largest entry is real and positive.
pub fn canonical_columns(basis: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..basis.ncols())
        .map(|j| {
            let col = basis.column(j);
            let mut pivot = 0;
            for i in 1..col.len() {
                if col[i].norm() > col[pivot].norm() + 1e-12 {
                    pivot = i;
                }
            }
            let phase = if col[pivot].norm() > 0.0 {
                col[pivot].conj() / r(col[pivot].norm())
            } else {
                r(1.0)
            };
            col.iter()
                .map(|z| {
                    let w = z * phase;
                    let snap = |x: f64| if x.abs() < BASIS_ZERO { 0.0 } else { round12(x) };
                    [snap(w.re), snap(w.im)]
                })
                .collect()
        })
        .collect()
}

fn drift_json(drift: &Drift) -> Value {
    match drift {
        Drift::Scalar(m) => json!(round12(*m)),
        Drift::Vector(v) => json!([round12(v.m1), round12(v.m2)]),
    }
}

fn drift_text(drift: &Drift) -> String {
    match drift {
        Drift::Scalar(m) => fmt12(*m),
        Drift::Vector(v) => format!("({}, {})", fmt12(v.m1), fmt12(v.m2)),
    }
}

pub fn verdict_json(verdict: &Verdict) -> Value {
    let enclosures: Vec<Value> = verdict
        .enclosures
        .iter()
        .map(|e| {
            json!({
                "rank": e.rank,
                "m": drift_json(&e.drift),
                "recurrent": e.recurrent,
            })
        })
        .collect();
    json!({
        "kind": verdict.kind.name(),
        "criterion": verdict.criterion.name(),
        "enclosures": enclosures,
        "transient_rank": verdict.transient_rank(),
        "transient_basis": canonical_columns(&verdict.transient_basis()),
    })
}

fn complex_text(z: [f64; 2]) -> String {
    let [re, im] = z;
    if im == 0.0 {
        fmt12(re)
    } else if re == 0.0 {
        format!("{}i", fmt12(im))
    } else if im < 0.0 {
        format!("{}-{}i", fmt12(re), fmt12(-im))
    } else {
        format!("{}+{}i", fmt12(re), fmt12(im))
    }
}

pub fn verdict_text(verdict: &Verdict) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "kind: {}", verdict.kind);
    let _ = writeln!(out, "criterion: {}", verdict.criterion);
    let _ = writeln!(out, "enclosures:");
    let _ = writeln!(out, "  {:>3}  {:>4}  {:<40}  recurrent", "#", "rank", "m");
    for e in &verdict.enclosures {
        let _ = writeln!(
            out,
            "  {:>3}  {:>4}  {:<40}  {}",
            e.label,
            e.rank,
            drift_text(&e.drift),
            if e.recurrent { "yes" } else { "no" }
        );
    }
    let _ = writeln!(out, "transient_rank: {}", verdict.transient_rank());
    let _ = writeln!(out, "transient_basis:");
    for col in canonical_columns(&verdict.transient_basis()) {
        let entries: Vec<String> = col.into_iter().map(complex_text).collect();
        let _ = writeln!(out, "  [{}]", entries.join(", "));
    }
    out
}
