//! Plain-text emitters: trace and concentration CSVs, run summaries.
//!
//! Numbers are printed with 12 significant digits in `%.12g` style, `.` as
//! the decimal separator and `\n` line endings, independent of locale.

use std::fmt::Write;

use crate::basis::ConcentrationMap;
use crate::design::DesignReport;
use crate::dynamics::SimulationTrace;

/// Formats `x` like C's `%.12g`.
pub fn fmt_g12(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        format!(
            "{}e{}{:02}",
            trim_zeros(mantissa),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    } else {
        trim_zeros(&format!("{:.*}", (DIGITS - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `t,u1..un,v,v_desired,e`, one row per trace sample.
pub fn trace_csv(trace: &SimulationTrace) -> String {
    let mut out = String::from("t");
    for i in 1..=trace.dims() {
        write!(out, ",u{i}").unwrap();
    }
    out.push_str(",v,v_desired,e\n");
    for row in &trace.rows {
        out.push_str(&fmt_g12(row.t));
        for x in &row.u {
            out.push(',');
            out.push_str(&fmt_g12(*x));
        }
        for x in [row.v, row.v_desired, row.e] {
            out.push(',');
            out.push_str(&fmt_g12(x));
        }
        out.push('\n');
    }
    out
}

/// `segment,sign,k1..kn,C` for every nonzero concentration. Segments are
/// numbered from 1 in schedule order.
pub fn concentrations_csv(maps: &[ConcentrationMap], dims: usize) -> String {
    let mut out = String::from("segment,sign");
    for i in 1..=dims {
        write!(out, ",k{i}").unwrap();
    }
    out.push_str(",C\n");
    for (j, map) in maps.iter().enumerate() {
        for (ba, c) in map.iter() {
            write!(out, "{},{}", j + 1, ba.sign).unwrap();
            for k in ba.cell.indices() {
                write!(out, ",{k}").unwrap();
            }
            writeln!(out, ",{}", fmt_g12(c)).unwrap();
        }
    }
    out
}

/// Human-readable run summary. MAE is also shown as a percentage of a unit
/// full scale.
pub fn run_summary(trace: &SimulationTrace, mae: f64) -> String {
    let mut out = String::new();
    let meta = &trace.meta;
    writeln!(out, "rows = {}", trace.rows.len()).unwrap();
    writeln!(out, "dt = {}", fmt_g12(meta.dt)).unwrap();
    writeln!(out, "clearance = {}", fmt_g12(meta.clearance)).unwrap();
    writeln!(out, "alpha = {}", fmt_g12(meta.alpha)).unwrap();
    let counts: Vec<String> = meta.counts.iter().map(|q| q.to_string()).collect();
    writeln!(out, "q = {}", counts.join(",")).unwrap();
    writeln!(out, "mae = {}", fmt_g12(mae)).unwrap();
    writeln!(out, "mae_percent_of_unit = {}", fmt_g12(100.0 * mae)).unwrap();
    writeln!(out, "max_abs_e = {}", fmt_g12(trace.max_abs_error())).unwrap();
    writeln!(out, "went_negative = {}", meta.went_negative).unwrap();
    out
}

/// Design summary. `coarser` is a measured grid that also meets epsilon,
/// when one was searched for.
pub fn design_summary(
    report: &DesignReport,
    grad_norms: &[f64],
    estimated: bool,
    coarser: Option<&(Vec<usize>, f64)>,
) -> String {
    let join_f = |xs: &[f64]| xs.iter().map(|x| fmt_g12(*x)).collect::<Vec<_>>().join(",");
    let join_q = |xs: &[usize]| {
        xs.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    let sol = &report.solution;
    let mut out = String::new();
    writeln!(out, "epsilon = {}", fmt_g12(report.epsilon)).unwrap();
    writeln!(
        out,
        "grad_norms = {}{}",
        join_f(grad_norms),
        if estimated {
            " (sampled lower estimate)"
        } else {
            ""
        }
    )
    .unwrap();
    writeln!(out, "q = {}", join_q(&sol.q)).unwrap();
    writeln!(out, "h = {}", join_f(&sol.h)).unwrap();
    writeln!(out, "n_types = {}", sol.n_types).unwrap();
    writeln!(out, "bound_value = {}", fmt_g12(sol.bound_value)).unwrap();
    writeln!(
        out,
        "measured_sup_error = {}",
        fmt_g12(report.measured_sup_error)
    )
    .unwrap();
    writeln!(
        out,
        "verified = {}",
        if report.pass { "pass" } else { "FAIL" }
    )
    .unwrap();
    if let Some((q, err)) = coarser {
        let n: u64 = 2 * q.iter().map(|&k| k as u64).product::<u64>();
        writeln!(
            out,
            "measured_coarsest_q = {} (n_types = {n}, measured_sup_error = {})",
            join_q(q),
            fmt_g12(*err)
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{BaType, Cell, Sign};
    use crate::dynamics::{TraceMeta, TraceRow};

    #[test]
    fn g12_formatting() {
        assert_eq!(fmt_g12(0.0), "0");
        assert_eq!(fmt_g12(-0.0), "0");
        assert_eq!(fmt_g12(1.0), "1");
        assert_eq!(fmt_g12(0.0625), "0.0625");
        assert_eq!(fmt_g12(600.0), "600");
        assert_eq!(fmt_g12(0.1 + 0.2), "0.3");
        assert_eq!(fmt_g12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_g12(-2.5e-7), "-2.5e-07");
        assert_eq!(fmt_g12(1.5e15), "1.5e+15");
        assert_eq!(fmt_g12(0.00012345), "0.00012345");
        assert_eq!(fmt_g12(9.9999999999999e11), "1e+12");
        assert_eq!(fmt_g12((-5.0f64).exp()), "0.00673794699909");
    }

    fn tiny_trace() -> SimulationTrace {
        SimulationTrace {
            rows: vec![TraceRow {
                t: 0.0,
                u: vec![0.25],
                v: 0.0,
                v_desired: 0.0625,
                e: 0.0625,
            }],
            meta: TraceMeta {
                dt: 0.01,
                clearance: 1.0,
                alpha: 1.0,
                counts: vec![10],
                bounds: vec![(0.0, 1.0)],
                went_negative: false,
            },
        }
    }

    #[test]
    fn one_row_trace() {
        assert_eq!(
            trace_csv(&tiny_trace()),
            "t,u1,v,v_desired,e\n0,0.25,0,0.0625,0.0625\n"
        );
    }

    #[test]
    fn concentration_rows_are_sparse() {
        let mut a = ConcentrationMap::new();
        a.set(BaType::new(Sign::Plus, Cell::new(vec![2, 1])), 0.5)
            .unwrap();
        a.set(BaType::new(Sign::Minus, Cell::new(vec![1, 2])), 0.25)
            .unwrap();
        a.set(BaType::new(Sign::Plus, Cell::new(vec![1, 1])), 0.0)
            .unwrap();
        let csv = concentrations_csv(&[a, ConcentrationMap::new()], 2);
        assert_eq!(csv, "segment,sign,k1,k2,C\n1,-1,1,2,0.25\n1,+1,2,1,0.5\n");
    }

    #[test]
    fn summary_mentions_mae() {
        let s = run_summary(&tiny_trace(), 0.0026);
        assert!(s.contains("mae = 0.0026\n"));
        assert!(s.contains("mae_percent_of_unit = 0.26\n"));
    }
}
