//! Broken error norms against exact solutions and convergence orders.

use crate::assembly::{NitscheParams, DATA_DEGREE, SEGMENT_POINTS};
use crate::error::Result;
use crate::geometry::{segment_rule, triangle_rule, Side};
use crate::linalg::SolverKind;
use crate::mesh::Point;
use crate::optctl::{FixedPointOptions, ImplicitControl, OcpSolution, OcpSystem};
use crate::problems::{ErrorMode, ExactField, ProblemSpec};
use crate::space::{FeFunction, Space};

/// Anything that can be evaluated side-wise on an element: discrete functions and the implicit control.
pub trait PiecewiseField {
    fn eval(&self, space: &Space, element: usize, side: Side, x: Point) -> (f64, [f64; 2]);
}

impl PiecewiseField for FeFunction {
    fn eval(&self, space: &Space, element: usize, side: Side, x: Point) -> (f64, [f64; 2]) {
        self.eval_unchecked(space, element, side, x)
    }
}

impl PiecewiseField for ImplicitControl {
    fn eval(&self, space: &Space, element: usize, side: Side, x: Point) -> (f64, [f64; 2]) {
        ImplicitControl::eval(self, space, element, side, x)
    }
}

/// The exact field itself, for zero-error checks.
impl PiecewiseField for ExactField {
    fn eval(&self, _: &Space, _: usize, side: Side, x: Point) -> (f64, [f64; 2]) {
        let j = self.jet(side, x);
        (j.v, j.g)
    }
}

/// Error and exact-solution norms of one field.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FieldErrors {
    pub l2: f64,
    pub h1: f64,
    pub exact_l2: f64,
    pub exact_h1: f64,
}

impl FieldErrors {
    pub fn l2(&self, mode: ErrorMode) -> f64 {
        match mode {
            ErrorMode::Absolute => self.l2,
            ErrorMode::Relative => self.l2 / self.exact_l2,
        }
    }

    pub fn h1(&self, mode: ErrorMode) -> f64 {
        match mode {
            ErrorMode::Absolute => self.h1,
            ErrorMode::Relative => self.h1 / self.exact_h1,
        }
    }
}

/// Broken L2 and H1-seminorm errors over the cut sub-cells with a rule of `degree`.
pub fn field_errors(
    space: &Space,
    approx: &impl PiecewiseField,
    exact: &ExactField,
    degree: usize,
) -> Result<FieldErrors> {
    let rule = triangle_rule(degree)?;
    let mut acc = [0.0; 4];
    for e in 0..space.mesh.num_triangles() {
        let cut = space.geometry.cut(e);
        for &side in cut.sides() {
            for (x, w) in cut.side_quadrature(side, &rule) {
                let (v, g) = approx.eval(space, e, side, x);
                let j = exact.jet(side, x);
                let (dv, dg) = (v - j.v, [g[0] - j.g[0], g[1] - j.g[1]]);
                acc[0] += w * dv * dv;
                acc[1] += w * (dg[0] * dg[0] + dg[1] * dg[1]);
                acc[2] += w * j.v * j.v;
                acc[3] += w * (j.g[0] * j.g[0] + j.g[1] * j.g[1]);
            }
        }
    }
    let [l2, h1, exact_l2, exact_h1] = acc.map(f64::sqrt);
    Ok(FieldErrors { l2, h1, exact_l2, exact_h1 })
}

pub fn broken_l2_error(space: &Space, approx: &impl PiecewiseField, exact: &ExactField) -> Result<f64> {
    Ok(field_errors(space, approx, exact, DATA_DEGREE)?.l2)
}

pub fn broken_h1_semi_error(space: &Space, approx: &impl PiecewiseField, exact: &ExactField) -> Result<f64> {
    Ok(field_errors(space, approx, exact, DATA_DEGREE)?.h1)
}

/// Error in the mesh-dependent norm
/// `|||v|||^2 = |v|_1^2 + sum h_T ||{d_n v}||^2_{Gamma_T} + sum h_T^{-1} ||[v]||^2_{Gamma_T}`.
pub fn triple_norm_error(space: &Space, approx: &impl PiecewiseField, exact: &ExactField) -> Result<f64> {
    let h1 = field_errors(space, approx, exact, DATA_DEGREE)?.h1;
    let seg = segment_rule(SEGMENT_POINTS)?;
    let mut interface = 0.0;
    for e in space.geometry.cut_elements() {
        let cut = space.geometry.cut(e);
        let Some(s) = cut.segment else { continue };
        let n = [-s.normal[0], -s.normal[1]];
        let h_t = space.mesh.diameter(e);
        for (x, w) in seg.on_segment(s.a, s.b) {
            let trace = |side: Side| {
                let (v, g) = approx.eval(space, e, side, x);
                let j = exact.jet(side, x);
                (v - j.v, (g[0] - j.g[0]) * n[0] + (g[1] - j.g[1]) * n[1])
            };
            let (v1, d1) = trace(Side::One);
            let (v2, d2) = trace(Side::Two);
            let avg = cut.k[0] * d1 + cut.k[1] * d2;
            interface += w * (h_t * avg * avg + (v1 - v2) * (v1 - v2) / h_t);
        }
    }
    Ok((h1 * h1 + interface).sqrt())
}

/// Orders `log(e_{i-1} / e_i) / log(h_{i-1} / h_i)`; `None` for the first entry and for non-positive errors.
pub fn eoc(errors: &[f64], hs: &[f64]) -> Vec<Option<f64>> {
    assert_eq!(errors.len(), hs.len());
    (0..errors.len())
        .map(|i| {
            if i == 0 {
                return None;
            }
            let (e0, e1, h0, h1) = (errors[i - 1], errors[i], hs[i - 1], hs[i]);
            (e0 > 0.0 && e1 > 0.0 && h0 > 0.0 && h1 > 0.0 && h0 != h1).then(|| (e0 / e1).ln() / (h0 / h1).ln())
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    U,
    Y,
    P,
}

impl Quantity {
    pub const ALL: [Quantity; 3] = [Quantity::U, Quantity::Y, Quantity::P];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::U => "u",
            Quantity::Y => "y",
            Quantity::P => "p",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SolutionErrors {
    pub u: FieldErrors,
    pub y: FieldErrors,
    pub p: FieldErrors,
}

impl SolutionErrors {
    pub fn get(&self, q: Quantity) -> &FieldErrors {
        match q {
            Quantity::U => &self.u,
            Quantity::Y => &self.y,
            Quantity::P => &self.p,
        }
    }
}

pub fn solution_errors(system: &OcpSystem, sol: &OcpSolution, degree: usize) -> Result<SolutionErrors> {
    let (s, spec) = (&system.space, &system.spec);
    Ok(SolutionErrors {
        u: field_errors(s, &sol.control, &spec.u, degree)?,
        y: field_errors(s, &sol.y, &spec.y, degree)?,
        p: field_errors(s, &sol.p, &spec.p, degree)?,
    })
}

/// One mesh of a convergence study.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub dofs: usize,
    pub errors: SolutionErrors,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the solve failed; the errors are then meaningless.
    pub failure: Option<String>,
}

impl ConvergenceRow {
    pub fn ok(&self) -> bool {
        self.failure.is_none() && self.converged
    }
}

/// Solves `spec` on one mesh and measures the errors.
pub fn study_row(spec: &ProblemSpec, n: usize, solver: SolverKind, opts: FixedPointOptions) -> Result<ConvergenceRow> {
    NitscheParams::new(spec.ctilde)?;
    let system = OcpSystem::new(spec, n, solver)?;
    let sol = system.solve(opts)?;
    let errors = solution_errors(&system, &sol, DATA_DEGREE)?;
    Ok(ConvergenceRow {
        n,
        h: system.space.mesh.h(),
        dofs: system.num_free(),
        errors,
        iterations: sol.iterations,
        converged: sol.converged,
        failure: None,
    })
}

/// Runs every mesh of a study; a failed mesh yields a marked row and the rest still run.
pub fn convergence_study(
    spec: &ProblemSpec,
    ns: &[usize],
    solver: SolverKind,
    opts: FixedPointOptions,
) -> Vec<ConvergenceRow> {
    ns.iter()
        .map(|&n| {
            study_row(spec, n, solver, opts).unwrap_or_else(|e| ConvergenceRow {
                n,
                h: spec.domain.width().hypot(spec.domain.height()) / n as f64,
                dofs: 0,
                errors: SolutionErrors::default(),
                iterations: 0,
                converged: false,
                failure: Some(e.to_string()),
            })
        })
        .collect()
}

/// Orders of one column of a study.
pub fn column_eoc(rows: &[ConvergenceRow], value: impl Fn(&ConvergenceRow) -> f64) -> Vec<Option<f64>> {
    let errs: Vec<f64> = rows.iter().map(|r| if r.ok() { value(r) } else { f64::NAN }).collect();
    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    eoc(&errs, &hs).into_iter().map(|o| o.filter(|v| v.is_finite())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{InterfaceGeometry, LevelSet};
    use crate::mesh::{Mesh, Rect};
    use crate::problems::Jet;

    fn space(ls: LevelSet, n: usize) -> Space {
        let mesh = Mesh::uniform(Rect::unit_square(), n).unwrap();
        let geo = InterfaceGeometry::build(&mesh, ls).unwrap();
        Space::new(mesh, geo)
    }

    #[test]
    fn eoc_examples() {
        let h = [0.1, 0.05];
        assert!((eoc(&[1e-2, 2.5e-3], &h)[1].unwrap() - 2.0).abs() < 1e-12);
        assert!((eoc(&[1e-1, 5e-2], &h)[1].unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(eoc(&[3.0, 3.0], &h)[1], Some(0.0));
        assert_eq!(eoc(&[1.0, 0.0], &h), vec![None, None]);
        assert_eq!(eoc(&[1.0], &[0.1]), vec![None]);
    }

    #[test]
    fn exact_against_itself_is_zero() {
        let s = space(LevelSet::circle(0.5, 0.5, 0.3), 8);
        let f = ExactField::new(|side, x| match side {
            Side::One => (Jet::x(x.x) * Jet::y(x.y)).sin(),
            Side::Two => Jet::x(x.x).powi(2),
        });
        let e = field_errors(&s, &f, &f, 4).unwrap();
        assert_eq!((e.l2, e.h1), (0.0, 0.0));
        assert_eq!(triple_norm_error(&s, &f, &f).unwrap(), 0.0);
    }

    #[test]
    fn zero_against_constant_and_linear() {
        let s = space(LevelSet::graph(-0.3, 0.6), 8);
        let zero = s.zero_function();
        let one = ExactField::new(|_, _| Jet::constant(1.0));
        assert!((broken_l2_error(&s, &zero, &one).unwrap() - 1.0).abs() < 1e-13);
        let x1 = ExactField::new(|_, x| Jet::x(x.x));
        assert!((broken_h1_semi_error(&s, &zero, &x1).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn pure_jump_has_positive_triple_norm_terms() {
        let s = space(LevelSet::graph(0.2, 0.45), 6);
        let dof = (0..s.mesh.num_vertices())
            .find_map(|v| s.dofs.enriched_dof(v).map(|(d, _)| d).filter(|&d| s.dofs.is_free(d)))
            .unwrap();
        let mut f = s.zero_function();
        f.coeffs[dof] = 1.0;
        let zero = ExactField::new(|_, _| Jet::constant(0.0));
        let h1 = broken_h1_semi_error(&s, &f, &zero).unwrap();
        let triple = triple_norm_error(&s, &f, &zero).unwrap();
        assert!(h1 > 0.0);
        assert!(triple > h1);
    }

    #[test]
    fn relative_mode_divides_by_exact_norm() {
        let e = FieldErrors { l2: 2.0, h1: 3.0, exact_l2: 4.0, exact_h1: 6.0 };
        assert_eq!(e.l2(ErrorMode::Relative), 0.5);
        assert_eq!(e.h1(ErrorMode::Absolute), 3.0);
    }
}
