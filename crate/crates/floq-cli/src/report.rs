//! Text, CSV and JSON rendering of command reports.
//!
//! CSV values use 17-significant-digit scientific notation so identical runs
//! produce byte-identical, exactly round-trippable files.

use num_complex::Complex64;

use crate::commands::{
    format_complex, AnalyzeReport, ComplexValue, FloquetReport, ReduceReport,
    ReducedCoefficients, SolveReport, VerifyReport,
};

fn f(v: f64) -> String {
    format!("{v:.16e}")
}

fn complex_of(v: ComplexValue) -> Complex64 {
    Complex64::new(v.re, v.im)
}

pub fn analyze_text(r: &AnalyzeReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "structure constants ({}): alpha = {}, beta = {}\n",
        r.constants_source, r.alpha, r.beta
    ));
    if let (Some(res), Some(tol)) = (r.fit_residual, r.fit_threshold) {
        out.push_str(&format!(
            "fit residual: {res:.3e} (threshold {tol:.3e})\n"
        ));
    }
    out.push_str(&format!("base time t0 = {}\n", r.t0));
    out.push_str(&format!(
        "discriminant gamma^2 = {} (branch: {}",
        r.gamma_sq, r.branch
    ));
    if let Some(g) = r.gamma {
        out.push_str(&format!(", gamma = {g}"));
    }
    if let Some(w) = r.omega {
        out.push_str(&format!(", omega = {w}"));
    }
    out.push_str(")\n");
    out.push_str(&format!(
        "commutation residual |AD - DA|: {:.3e}\n",
        r.commutation_residual
    ));
    out.push_str(&format!(
        "derivative commutation residual: {:.3e}\n",
        r.derivative_commutation_residual
    ));
    out.push_str(&format!("asymptotics: {}\n", r.asymptotics));
    out
}

pub fn solve_csv(r: &SolveReport) -> String {
    let mut out = String::new();
    if r.verified {
        out.push_str("t,x1,x2,oracle_x1,oracle_x2,abs_dx1,abs_dx2\n");
    } else {
        out.push_str("t,x1,x2\n");
    }
    for row in &r.samples {
        if r.verified {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                f(row.t),
                f(row.x1),
                f(row.x2),
                f(row.oracle_x1.unwrap()),
                f(row.oracle_x2.unwrap()),
                f(row.abs_dx1.unwrap()),
                f(row.abs_dx2.unwrap()),
            ));
        } else {
            out.push_str(&format!("{},{},{}\n", f(row.t), f(row.x1), f(row.x2)));
        }
    }
    out
}

pub fn floquet_text(r: &FloquetReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("period T = {}\n", r.period));
    out.push_str(&format!(
        "averaged matrix B = [[{}, {}], [{}, {}]]\n",
        r.averaged[0][0], r.averaged[0][1], r.averaged[1][0], r.averaged[1][1]
    ));
    out.push_str(&format!(
        "exponents (averages):   {},  {}\n",
        format_complex(complex_of(r.exponents[0])),
        format_complex(complex_of(r.exponents[1]))
    ));
    out.push_str(&format!(
        "multipliers:            {},  {}\n",
        format_complex(complex_of(r.multipliers[0])),
        format_complex(complex_of(r.multipliers[1]))
    ));
    out.push_str(&format!(
        "exponents (monodromy):  {},  {}\n",
        format_complex(complex_of(r.exponents_monodromy[0])),
        format_complex(complex_of(r.exponents_monodromy[1]))
    ));
    out.push_str(&format!(
        "multipliers (monodromy): {},  {}\n",
        format_complex(complex_of(r.multipliers_monodromy[0])),
        format_complex(complex_of(r.multipliers_monodromy[1]))
    ));
    out.push_str(&format!(
        "pipeline deviation: {:.3e}\n",
        r.pipeline_deviation
    ));
    out.push_str(&format!(
        "trace identities: averaged trace = {}, exponent-sum residual {:.3e}, multiplier-product residual {:.3e}\n",
        r.average_trace, r.exponent_sum_residual, r.multiplier_product_residual
    ));
    if r.strip_reduced {
        out.push_str("note: imaginary parts were reduced modulo 2*pi/T into (-pi/T, pi/T]\n");
    }
    if r.defective {
        out.push_str("note: the averaged matrix is defective (single eigenvector)\n");
    }
    if let Some(dev) = r.periodicity_deviation {
        out.push_str(&format!(
            "coefficient periodicity probe deviation: {dev:.3e}\n"
        ));
    }
    if let Some(note) = &r.alpha_zero_note {
        out.push_str(&format!(
            "alpha = 0 case: uniform formula gives {}, {}; the simplified pair (avg11 + (beta/2) avg12, avg11) would be {}, {}\n",
            format_complex(complex_of(note.uniform[0])),
            format_complex(complex_of(note.uniform[1])),
            format_complex(complex_of(note.simplified[0])),
            format_complex(complex_of(note.simplified[1])),
        ));
    }
    out.push_str(&format!("stability: {}\n", r.stability));
    out
}

pub fn reduce_text(r: &ReduceReport) -> String {
    let mut out = String::new();
    match &r.coefficients {
        ReducedCoefficients::Constant { equation, p, q } => {
            out.push_str(&format!("second-order form: {equation}\n"));
            out.push_str(&format!("p = {p}, q = {q}\n"));
        }
        ReducedCoefficients::Table { rows } => {
            out.push_str("time-varying coefficients (x'' + p(t) x' + q(t) x = 0):\n");
            out.push_str("t,p,q\n");
            for row in rows {
                out.push_str(&format!("{},{},{}\n", f(row[0]), f(row[1]), f(row[2])));
            }
        }
    }
    if let Some(rt) = &r.round_trip {
        out.push_str(&format!(
            "round-trip check: max |x1 deviation| = {:.3e} (tolerance {:.1e}) -> {}\n",
            rt.max_deviation,
            rt.tolerance,
            if rt.passed { "pass" } else { "FAIL" }
        ));
    }
    out
}

pub fn verify_text(r: &VerifyReport) -> String {
    let mut out = String::new();
    for c in &r.checks {
        out.push_str(&format!(
            "{:<4} {:<45} {:>12.3e}  (threshold {:.1e})\n",
            if c.passed { "ok" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        ));
    }
    if let Some(note) = &r.alpha_zero_note {
        out.push_str(&format!(
            "alpha = 0 case: uniform formula gives {}, {}; simplified pair would be {}, {}\n",
            format_complex(complex_of(note.uniform[0])),
            format_complex(complex_of(note.uniform[1])),
            format_complex(complex_of(note.simplified[0])),
            format_complex(complex_of(note.simplified[1])),
        ));
    }
    out.push_str(if r.all_passed {
        "verification: all checks passed\n"
    } else {
        "verification: FAILED\n"
    });
    out
}

pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize cleanly")
}
