//! Named property checks shared by the `props` subcommand and the test suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::{
    assemble_interface_load, assemble_mass, assemble_stiffness, p1_reference, Coefficients, NitscheParams,
};
use crate::error::Result;
use crate::geometry::{InterfaceGeometry, LevelSet, Side};
use crate::linalg::{dense_spd_check, EnvelopeCholesky};
use crate::mesh::{Mesh, Point, Rect};
use crate::optctl::{project_control, ControlBounds};
use crate::problems::{verify_manufactured, ProblemSpec};
use crate::space::{FeFunction, Space};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckLine {
    fn new(name: impl Into<String>, passed: bool, detail: String) -> Self {
        Self { name: name.into(), passed, detail }
    }
}

fn space(domain: Rect, n: usize, ls: LevelSet) -> Result<Space> {
    let mesh = Mesh::uniform(domain, n)?;
    let geo = InterfaceGeometry::build(&mesh, ls)?;
    Ok(Space::new(mesh, geo))
}

/// Uncut assembly against the textbook P1 matrices, entrywise.
pub fn uncut_equivalence(domain: Rect, n: usize) -> Result<CheckLine> {
    let s = space(domain, n, LevelSet::Constant(-1.0))?;
    let coeffs = Coefficients::new(1.0, 1.0)?;
    let a = assemble_stiffness(&s, &coeffs, &NitscheParams::new(1.0)?)?.full;
    let m = assemble_mass(&s)?.full;
    let oracle = p1_reference(&s.mesh)?;
    let mut worst = 0.0f64;
    let nv = s.mesh.num_vertices();
    for u in 0..nv {
        for v in 0..nv {
            let (i, j) = (s.dofs.standard_dof(u), s.dofs.standard_dof(v));
            worst = worst
                .max((a.get(i, j) - oracle.stiffness.get(u, v)).abs())
                .max((m.get(i, j) - oracle.mass.get(u, v)).abs());
        }
    }
    Ok(CheckLine::new(
        format!("uncut P1 equivalence (N={n})"),
        worst <= 1e-13,
        format!("max entry difference {worst:.3e}"),
    ))
}

/// `k_1 + k_2 = 1` and sub-cell areas adding up on every cut element.
pub fn cut_geometry(spec: &ProblemSpec, n: usize) -> Result<CheckLine> {
    let mesh = Mesh::uniform(spec.domain, n)?;
    let geo = InterfaceGeometry::build(&mesh, spec.levelset)?;
    let (mut k_err, mut area_err, mut count) = (0.0f64, 0.0f64, 0);
    for e in geo.cut_elements() {
        let c = geo.cut(e);
        count += 1;
        k_err = k_err.max((c.k[0] + c.k[1] - 1.0).abs());
        let (a1, a2) = (c.side_area(Side::One), c.side_area(Side::Two));
        area_err = area_err
            .max((a1 + a2 - c.area).abs() / c.area)
            .max((a1 / c.area - c.k[0]).abs())
            .max((a2 / c.area - c.k[1]).abs());
    }
    Ok(CheckLine::new(
        format!("cut weights and areas (N={n})"),
        count > 0 && k_err <= 1e-14 && area_err <= 1e-12,
        format!("{count} cut elements, |k1+k2-1| <= {k_err:.1e}, area mismatch <= {area_err:.1e}"),
    ))
}

pub fn symmetry(spec: &ProblemSpec, n: usize) -> Result<CheckLine> {
    let s = space(spec.domain, n, spec.levelset)?;
    let a = assemble_stiffness(&s, &spec.coeffs, &NitscheParams::new(spec.ctilde)?)?;
    let asym = a.full.relative_asymmetry();
    Ok(CheckLine::new(format!("stiffness symmetry (N={n})"), asym <= 1e-12, format!("relative asymmetry {asym:.3e}")))
}

/// Dense Cholesky of the free stiffness block with the problem's penalty constant.
pub fn coercivity(spec: &ProblemSpec, n: usize) -> Result<CheckLine> {
    let s = space(spec.domain, n, spec.levelset)?;
    let a = assemble_stiffness(&s, &spec.coeffs, &NitscheParams::new(spec.ctilde)?)?;
    let def = dense_spd_check(&a.free)?;
    Ok(CheckLine::new(
        format!("coercivity, dense SPD check (N={n}, C={})", spec.ctilde),
        def.is_positive_definite(),
        format!("{def:?}"),
    ))
}

/// Max nodal error of the discrete solution for a piecewise-linear exact solution.
pub fn patch_error(levelset: LevelSet, n: usize) -> Result<f64> {
    let s = space(Rect::unit_square(), n, levelset)?;
    let coeffs = Coefficients::new(1.0, 2.0)?;
    let a = assemble_stiffness(&s, &coeffs, &NitscheParams::new(10.0)?)?;
    let origin = Point::default();
    let grad_phi = levelset.gradient(origin);
    let normal = levelset.exact_normal(origin).unwrap_or([0.0, 0.0]);
    // y_1 = 2 x + 0.3 y + 0.1, y_2 = y_1 + 1.5 phi: continuous, constant flux jump.
    let y = |side: Side, q: Point| {
        let y1 = 2.0 * q.x + 0.3 * q.y + 0.1;
        match side {
            Side::One => y1,
            Side::Two => y1 + 1.5 * levelset.value(q),
        }
    };
    let g1 = [2.0, 0.3];
    let g2 = [g1[0] + 1.5 * grad_phi[0], g1[1] + 1.5 * grad_phi[1]];
    let g = coeffs.alpha[0] * (g1[0] * normal[0] + g1[1] * normal[1])
        - coeffs.alpha[1] * (g2[0] * normal[0] + g2[1] * normal[1]);

    let mut exact = s.zero_function();
    for v in 0..s.mesh.num_vertices() {
        let p = s.mesh.vertex(v);
        let home = s.geometry.vertex_side(v).unwrap_or(Side::One);
        exact.coeffs[s.dofs.standard_dof(v)] = y(home, p);
        if let Some((dof, home)) = s.dofs.enriched_dof(v) {
            exact.coeffs[dof] = y(home.other(), p) - y(home, p);
        }
    }
    let nf = s.dofs.num_free();
    let lift = FeFunction::from_parts(&vec![0.0; nf], exact.constrained(&s.dofs));
    let b = assemble_interface_load(&s, |_| g)?;
    let rhs: Vec<f64> = b[..nf].iter().zip(a.apply_free_rows(&lift.coeffs, nf)).map(|(b, a)| b - a).collect();
    let x = EnvelopeCholesky::factor(&a.free)?.solve(&rhs);
    Ok(x.iter().zip(exact.free(&s.dofs)).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max))
}

pub fn patch_reproduction() -> Result<CheckLine> {
    let mut worst = 0.0f64;
    for ls in [LevelSet::Line { a: 1.0, b: 0.0, c: -0.5 }, LevelSet::graph(0.3, 0.41)] {
        for n in [7, 8, 16] {
            worst = worst.max(patch_error(ls, n)?);
        }
    }
    Ok(CheckLine::new("piecewise-linear patch reproduction", worst <= 1e-10, format!("max nodal error {worst:.3e}")))
}

/// Idempotence and bound satisfaction of the control projection on random inputs.
pub fn projection(count: usize, seed: u64) -> CheckLine {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..count {
        let a: f64 = rng.gen_range(-5.0..5.0);
        let b: f64 = rng.gen_range(-5.0..5.0);
        let bounds = ControlBounds { lower: a.min(b), upper: a.max(b) };
        let nu = 10f64.powf(rng.gen_range(-4.0..2.0));
        let p = rng.gen_range(-10.0..10.0);
        let u = project_control(p, nu, &bounds);
        let again = project_control(-nu * u, nu, &bounds);
        if !(u >= bounds.lower && u <= bounds.upper && bounds.clamp(u) == u && (again - u).abs() <= 1e-15 * u.abs()) {
            failures += 1;
        }
    }
    CheckLine::new(
        "control projection idempotence and bounds",
        failures == 0,
        format!("{failures} failures in {count} random inputs"),
    )
}

pub fn manufactured(spec: &ProblemSpec, samples: usize, seed: u64) -> Vec<CheckLine> {
    verify_manufactured(spec, samples, seed)
        .checks
        .into_iter()
        .map(|c| {
            CheckLine::new(
                format!("manufactured data: {}", c.check),
                c.passed(),
                format!("worst scaled residual {:.3e} over {} samples", c.worst, c.samples),
            )
        })
        .collect()
}

/// The full property suite for one problem.
pub fn run_props(
    spec: &ProblemSpec,
    n_small: usize,
    n_geometry: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<CheckLine>> {
    let mut out = vec![
        uncut_equivalence(spec.domain, 8)?,
        cut_geometry(spec, n_geometry)?,
        symmetry(spec, n_small)?,
        coercivity(spec, n_small)?,
        patch_reproduction()?,
        projection(1000, seed),
    ];
    out.extend(manufactured(spec, samples, seed));
    Ok(out)
}
