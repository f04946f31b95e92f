//! CSV and Markdown renderings of studies and field dumps.

use std::fmt::Write as _;

use super::config::Norms;
use crate::analysis::{column_eoc, ConvergenceRow, FieldErrors, Quantity};
use crate::optctl::{OcpSolution, OcpSystem};
use crate::problems::ErrorMode;

/// C-style `%.4e`: four decimals and an at-least-two-digit signed exponent.
pub fn sci(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.4e}");
    let (mantissa, exp) = s.split_once('e').unwrap_or((&s, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn order(o: Option<f64>) -> String {
    o.map(|v| format!("{v:.2}")).unwrap_or_default()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Norm {
    L2,
    H1,
}

impl Norm {
    fn tag(self) -> &'static str {
        match self {
            Norm::L2 => "l2",
            Norm::H1 => "h1",
        }
    }

    fn value(self, e: &FieldErrors, mode: ErrorMode) -> f64 {
        match self {
            Norm::L2 => e.l2(mode),
            Norm::H1 => e.h1(mode),
        }
    }
}

fn columns() -> impl Iterator<Item = (Norm, Quantity)> {
    [Norm::L2, Norm::H1].into_iter().flat_map(|n| Quantity::ALL.into_iter().map(move |q| (n, q)))
}

pub fn study_csv(rows: &[ConvergenceRow], mode: ErrorMode) -> String {
    let mut out = String::from("N,h,dofs,iterations,converged");
    for (norm, q) in columns() {
        let _ = write!(out, ",{}_{},{}_{}_eoc", q.name(), norm.tag(), q.name(), norm.tag());
    }
    out.push_str(",status\n");
    let eocs: Vec<Vec<Option<f64>>> =
        columns().map(|(norm, q)| column_eoc(rows, |r| norm.value(r.errors.get(q), mode))).collect();
    for (i, r) in rows.iter().enumerate() {
        let _ = write!(out, "{},{},{},{},{}", r.n, sci(r.h), r.dofs, r.iterations, r.converged);
        for (c, (norm, q)) in columns().enumerate() {
            if r.failure.is_some() {
                out.push_str(",,");
            } else {
                let _ = write!(out, ",{},{}", sci(norm.value(r.errors.get(q), mode)), order(eocs[c][i]));
            }
        }
        let status = match (&r.failure, r.converged) {
            (Some(msg), _) => format!("failed: {}", msg.replace(',', ";")),
            (None, false) => "not converged".to_string(),
            (None, true) => "ok".to_string(),
        };
        let _ = writeln!(out, ",{status}");
    }
    out
}

fn markdown_table(rows: &[ConvergenceRow], mode: ErrorMode, norm: Norm) -> String {
    let label = |q: Quantity| {
        let core = match norm {
            Norm::L2 => format!("‖{0}-{0}_h‖₀", q.name()),
            Norm::H1 => format!("|{0}-{0}_h|₁", q.name()),
        };
        match mode {
            ErrorMode::Relative => format!("{core} (rel)"),
            ErrorMode::Absolute => core,
        }
    };
    let mut out = String::from("| N |");
    for q in Quantity::ALL {
        let _ = write!(out, " {} | order |", label(q));
    }
    out.push_str("\n|---|");
    out.push_str(&"---|---|".repeat(Quantity::ALL.len()));
    out.push('\n');
    let eocs: Vec<Vec<Option<f64>>> =
        Quantity::ALL.iter().map(|&q| column_eoc(rows, |r| norm.value(r.errors.get(q), mode))).collect();
    for (i, r) in rows.iter().enumerate() {
        let _ = write!(out, "| {} |", r.n);
        for (c, &q) in Quantity::ALL.iter().enumerate() {
            if r.ok() {
                let _ = write!(out, " {} | {} |", sci(norm.value(r.errors.get(q), mode)), order(eocs[c][i]));
            } else {
                out.push_str(" failed | |");
            }
        }
        out.push('\n');
    }
    out
}

pub fn study_markdown(title: &str, rows: &[ConvergenceRow], mode: ErrorMode, norms: Norms) -> String {
    let mut out = format!("## {title}\n\n");
    if matches!(norms, Norms::L2 | Norms::Both) {
        out.push_str("### L2 errors\n\n");
        out.push_str(&markdown_table(rows, mode, Norm::L2));
        out.push('\n');
    }
    if matches!(norms, Norms::H1 | Norms::Both) {
        out.push_str("### H1-seminorm errors\n\n");
        out.push_str(&markdown_table(rows, mode, Norm::H1));
        out.push('\n');
    }
    out
}

/// Discrete and exact fields at every volume quadrature point, with active-set flags.
pub fn field_dump_csv(system: &OcpSystem, sol: &OcpSolution) -> String {
    let (space, spec) = (&system.space, &system.spec);
    let mut out = String::from("element,side,x,y,y_h,p_h,u_h,y,p,u,active_h,active\n");
    for q in &system.quad.points {
        let (e, s, x) = (q.element, q.side, q.point);
        let yh = sol.y.eval_unchecked(space, e, s, x).0;
        let ph = sol.p.eval_unchecked(space, e, s, x).0;
        let uh = sol.control.eval(space, e, s, x).0;
        let (y, p, u) = (spec.y.value(s, x), spec.p.value(s, x), spec.u.value(s, x));
        let active_h = spec.bounds.is_active(-ph / spec.nu);
        let active = spec.bounds.is_active(-p / spec.nu);
        let _ = writeln!(
            out,
            "{e},{},{},{},{},{},{},{},{},{},{},{}",
            s.label(),
            sci(x.x),
            sci(x.y),
            sci(yh),
            sci(ph),
            sci(uh),
            sci(y),
            sci(p),
            sci(u),
            u8::from(active_h),
            u8::from(active)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::SolutionErrors;

    #[test]
    fn sci_matches_printf() {
        assert_eq!(sci(2.378e-3), "2.3780e-03");
        assert_eq!(sci(0.0), "0.0000e+00");
        assert_eq!(sci(-123456.0), "-1.2346e+05");
        assert_eq!(sci(1e-100), "1.0000e-100");
    }

    fn row(n: usize, e: f64) -> ConvergenceRow {
        let f = FieldErrors { l2: e, h1: e.sqrt(), exact_l2: 1.0, exact_h1: 1.0 };
        ConvergenceRow {
            n,
            h: 1.0 / n as f64,
            dofs: n * n,
            errors: SolutionErrors { u: f, y: f, p: f },
            iterations: 1,
            converged: true,
            failure: None,
        }
    }

    #[test]
    fn csv_has_orders_from_second_row() {
        let rows = [row(16, 4e-2), row(32, 1e-2)];
        let csv = study_csv(&rows, ErrorMode::Relative);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("N,h,dofs,iterations,converged,u_l2,u_l2_eoc"));
        assert!(lines[1].contains("4.0000e-02,,"));
        assert!(lines[2].contains("1.0000e-02,2.00"));
        assert!(lines[2].contains("1.0000e-01,1.00"));
    }

    #[test]
    fn failed_row_is_marked() {
        let mut bad = row(32, 1.0);
        bad.failure = Some("solver breakdown, sorry".into());
        let rows = [row(16, 4e-2), bad];
        assert!(study_csv(&rows, ErrorMode::Absolute)
            .lines()
            .nth(2)
            .unwrap()
            .ends_with("failed: solver breakdown; sorry"));
        assert!(study_markdown("t", &rows, ErrorMode::Absolute, Norms::L2).contains("| 32 | failed |"));
    }
}
