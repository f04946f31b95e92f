//! Benchmark problems with known optimal triples `(y, p, u)`.
//!
//! The data `f`, `y_d` and `g` are derived from the exact triple:
//! `f = -div(alpha grad y) - u`, `y_d = y + div(alpha grad p)` on each side and
//! `g = alpha_1 d_n y_1 - alpha_2 d_n y_2` on the interface, with `n` the exact
//! unit normal pointing into subdomain two. [`verify_manufactured`] re-checks
//! these identities by finite differences.

mod jet;

pub use jet::Jet;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::Coefficients;
use crate::error::{Error, Result};
use crate::geometry::{LevelSet, Side};
use crate::mesh::{Point, Rect};
use crate::optctl::ControlBounds;

pub type SideFn = Arc<dyn Fn(Side, Point) -> f64 + Send + Sync>;
pub type InterfaceFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
type JetFn = Arc<dyn Fn(Side, Point) -> Jet + Send + Sync>;

/// A piecewise smooth exact field, evaluated with the formula of the requested side.
#[derive(Clone)]
pub struct ExactField {
    jet: JetFn,
}

impl ExactField {
    pub fn new(f: impl Fn(Side, Point) -> Jet + Send + Sync + 'static) -> Self {
        Self { jet: Arc::new(f) }
    }

    pub fn jet(&self, side: Side, p: Point) -> Jet {
        (self.jet)(side, p)
    }

    pub fn value(&self, side: Side, p: Point) -> f64 {
        self.jet(side, p).v
    }

    pub fn gradient(&self, side: Side, p: Point) -> [f64; 2] {
        self.jet(side, p).g
    }
}

impl fmt::Debug for ExactField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ExactField")
    }
}

/// Whether reported errors are divided by the norm of the exact solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorMode {
    Absolute,
    Relative,
}

/// Physical and discretization parameters of a benchmark.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExampleParams {
    pub alpha: [f64; 2],
    pub nu: f64,
    pub ctilde: f64,
    pub bounds: ControlBounds,
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub domain: Rect,
    pub levelset: LevelSet,
    pub coeffs: Coefficients,
    pub nu: f64,
    pub bounds: ControlBounds,
    pub ctilde: f64,
    pub error_mode: ErrorMode,
    pub y: ExactField,
    pub p: ExactField,
    pub u: ExactField,
    pub f: SideFn,
    pub y_d: SideFn,
    pub g: InterfaceFn,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("levelset", &self.levelset)
            .field("coeffs", &self.coeffs)
            .field("nu", &self.nu)
            .field("bounds", &self.bounds)
            .field("ctilde", &self.ctilde)
            .field("error_mode", &self.error_mode)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    /// Builds a problem from its exact triple and derives `f`, `y_d` and `g`.
    #[allow(clippy::too_many_arguments)]
    pub fn manufactured(
        name: impl Into<String>,
        domain: Rect,
        levelset: LevelSet,
        params: ExampleParams,
        error_mode: ErrorMode,
        y: ExactField,
        p: ExactField,
        u: ExactField,
    ) -> Result<Self> {
        let coeffs = Coefficients::new(params.alpha[0], params.alpha[1])?;
        if !(params.nu > 0.0) || !params.nu.is_finite() {
            return Err(Error::InvalidArgument(format!("regularization must be positive, got {}", params.nu)));
        }
        if !(params.ctilde > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "stabilization constant must be positive, got {}",
                params.ctilde
            )));
        }
        let alpha = params.alpha;

        let (yf, uf) = (y.clone(), u.clone());
        let f: SideFn = Arc::new(move |s, x| -alpha[s.index()] * yf.jet(s, x).lap - uf.value(s, x));
        let (yf, pf) = (y.clone(), p.clone());
        let y_d: SideFn = Arc::new(move |s, x| yf.value(s, x) + alpha[s.index()] * pf.jet(s, x).lap);
        let yf = y.clone();
        let g: InterfaceFn = Arc::new(move |x| match levelset.exact_normal(x) {
            Some(n) => {
                let flux = |s: Side| {
                    let gr = yf.gradient(s, x);
                    alpha[s.index()] * (gr[0] * n[0] + gr[1] * n[1])
                };
                flux(Side::One) - flux(Side::Two)
            }
            None => 0.0,
        });

        Ok(Self {
            name: name.into(),
            domain,
            levelset,
            coeffs,
            nu: params.nu,
            bounds: params.bounds,
            ctilde: params.ctilde,
            error_mode,
            y,
            p,
            u,
            f,
            y_d,
            g,
        })
    }

    /// Same data with the right side `f` replaced, for fault injection.
    pub fn with_source(mut self, f: impl Fn(Side, Point) -> f64 + Send + Sync + 'static) -> Self {
        self.f = Arc::new(f);
        self
    }
}

/// Default parameters of the three benchmarks.
pub fn example_params(id: u8) -> Result<ExampleParams> {
    let unbounded = ControlBounds::unbounded();
    Ok(match id {
        1 => ExampleParams { alpha: [1.0, 100.0], nu: 0.01, ctilde: 10.0, bounds: unbounded },
        2 => ExampleParams { alpha: [1.0, 10.0], nu: 0.01, ctilde: 1000.0, bounds: unbounded },
        3 => ExampleParams { alpha: [1.0, 1000.0], nu: 1.0, ctilde: 5.0, bounds: ControlBounds::new(-0.5, 0.5)? },
        _ => return Err(Error::InvalidArgument(format!("unknown example {id}, expected 1, 2 or 3"))),
    })
}

/// Builds benchmark `id` with its default parameters.
pub fn make_example(id: u8) -> Result<ProblemSpec> {
    make_example_with(id, example_params(id)?)
}

/// Builds benchmark `id` with overridden parameters; the exact triple follows `params`.
pub fn make_example_with(id: u8, params: ExampleParams) -> Result<ProblemSpec> {
    let [a1, a2] = params.alpha;
    let nu = params.nu;
    match id {
        1 => {
            let k = -(3f64.sqrt()) / 3.0;
            let b = (6.0 + 6f64.sqrt() - 2.0 * 3f64.sqrt()) / 6.0;
            let s = move |x: Point| Jet::y(x.y) - Jet::x(x.x) * k - b;
            let y = ExactField::new(move |side, x| {
                let c = (Jet::x(x.x) * Jet::y(x.y)).cos();
                match side {
                    Side::One => s(x) * c * (0.5 / a1) + s(x).powi(3),
                    Side::Two => s(x) * c * (0.5 / a2),
                }
            });
            let u_jet = move |side: Side, x: Point| {
                let (x1, x2) = (Jet::x(x.x), Jet::y(x.y));
                let bubble = x1 * (x1 - 1.0) * x2 * (x2 - 1.0) * (x1 * x2).sin();
                let scale = match side {
                    Side::One => a2,
                    Side::Two => a1,
                };
                s(x) * bubble * scale
            };
            let u = ExactField::new(u_jet);
            let p = ExactField::new(move |side, x| u_jet(side, x) * (-nu));
            ProblemSpec::manufactured(
                "example 1: segment interface, unconstrained",
                Rect::unit_square(),
                LevelSet::graph(k, b),
                params,
                ErrorMode::Relative,
                y,
                p,
                u,
            )
        }
        2 | 3 => {
            let r = if id == 2 { 0.5 } else { 3f64.sqrt() / 4.0 };
            let r3 = r * r * r;
            let rho2 = move |x: Point| Jet::x(x.x).powi(2) + Jet::y(x.y).powi(2);
            let alpha = params.alpha;
            let phi = move |side: Side, x: Point| {
                let (x1, x2) = (Jet::x(x.x), Jet::y(x.y));
                (rho2(x) - r * r) * (x1.powi(2) - 1.0) * (x2.powi(2) - 1.0) * (5.0 / alpha[side.index()])
            };
            let y = ExactField::new(move |side, x| {
                let rc = Jet::radius_cubed(x.x, x.y);
                match side {
                    Side::One if id == 3 => {
                        rc * (1.0 / a1) - (rho2(x) - r * r) * (Jet::x(x.x) * Jet::y(x.y)).sin() * 10.0
                    }
                    Side::One => rc * (1.0 / a1),
                    Side::Two => rc * (1.0 / a2) + (1.0 / a1 - 1.0 / a2) * r3,
                }
            });
            let p = ExactField::new(move |side, x| phi(side, x) * (-nu));
            let bounds = params.bounds;
            let u = ExactField::new(move |side, x| {
                let j = phi(side, x);
                let v = bounds.clamp(j.v);
                if v == j.v {
                    j
                } else {
                    Jet::constant(v)
                }
            });
            let (name, mode) = if id == 2 {
                ("example 2: circle interface, unconstrained", ErrorMode::Absolute)
            } else {
                ("example 3: circle interface, box-constrained control", ErrorMode::Relative)
            };
            ProblemSpec::manufactured(
                name,
                Rect::new(-1.0, -1.0, 1.0, 1.0),
                LevelSet::circle(0.0, 0.0, r),
                params,
                mode,
                y,
                p,
                u,
            )
        }
        _ => Err(Error::InvalidArgument(format!("unknown example {id}, expected 1, 2 or 3"))),
    }
}

/// Finite-difference step of the manufactured-data oracle.
pub const FD_STEP: f64 = 1e-5;
/// Relative tolerance of the manufactured-data oracle.
pub const FD_TOLERANCE: f64 = 1e-5;

/// Outcome of one named check: the worst scaled residual and where it occurred.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub check: &'static str,
    pub samples: usize,
    pub worst: f64,
    pub at: Point,
    pub side: Side,
    pub tolerance: f64,
}

impl CheckOutcome {
    fn new(check: &'static str, tolerance: f64) -> Self {
        Self { check, samples: 0, worst: 0.0, at: Point::default(), side: Side::One, tolerance }
    }

    fn record(&mut self, residual: f64, scale: f64, at: Point, side: Side) {
        let r = residual.abs() / scale.max(1.0);
        self.samples += 1;
        if !(r <= self.worst) {
            self.worst = r;
            self.at = at;
            self.side = side;
        }
    }

    pub fn passed(&self) -> bool {
        self.worst <= self.tolerance
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckOutcome::passed)
    }

    /// The first failing check as an error.
    pub fn into_result(self) -> Result<Self> {
        match self.checks.iter().find(|c| !c.passed()) {
            Some(c) => Err(Error::CheckFailed {
                check: c.check,
                residual: c.worst,
                x: c.at.x,
                y: c.at.y,
                side: c.side.label(),
            }),
            None => Ok(self),
        }
    }
}

/// Central-difference gradient of a scalar function.
fn fd_gradient(f: impl Fn(Point) -> f64, x: Point) -> [f64; 2] {
    let h = FD_STEP;
    [
        (f(Point::new(x.x + h, x.y)) - f(Point::new(x.x - h, x.y))) / (2.0 * h),
        (f(Point::new(x.x, x.y + h)) - f(Point::new(x.x, x.y - h))) / (2.0 * h),
    ]
}

/// Laplacian as the central-difference divergence of a gradient field.
fn fd_divergence(g: impl Fn(Point) -> [f64; 2], x: Point) -> f64 {
    let h = FD_STEP;
    (g(Point::new(x.x + h, x.y))[0] - g(Point::new(x.x - h, x.y))[0]) / (2.0 * h)
        + (g(Point::new(x.x, x.y + h))[1] - g(Point::new(x.x, x.y - h))[1]) / (2.0 * h)
}

fn random_point_on_side(spec: &ProblemSpec, side: Side, rng: &mut ChaCha8Rng) -> Option<Point> {
    let d = spec.domain;
    (0..10_000).find_map(|_| {
        let x = Point::new(rng.gen_range(d.x0..d.x1), rng.gen_range(d.y0..d.y1));
        (Side::of_value(spec.levelset.value(x)) == Some(side)).then_some(x)
    })
}

/// A random point of the exact interface inside the domain.
fn random_point_on_interface(spec: &ProblemSpec, rng: &mut ChaCha8Rng) -> Option<Point> {
    let d = spec.domain;
    let inside = |x: Point| x.x >= d.x0 && x.x <= d.x1 && x.y >= d.y0 && x.y <= d.y1;
    (0..10_000).find_map(|_| {
        let x = match spec.levelset {
            LevelSet::Line { a, b, c } => {
                let q = Point::new(rng.gen_range(d.x0..d.x1), rng.gen_range(d.y0..d.y1));
                let t = (a * q.x + b * q.y + c) / (a * a + b * b);
                Point::new(q.x - t * a, q.y - t * b)
            }
            LevelSet::Circle { cx, cy, r } => {
                let t = rng.gen_range(0.0..std::f64::consts::TAU);
                Point::new(cx + r * t.cos(), cy + r * t.sin())
            }
            LevelSet::Constant(_) => return None,
        };
        inside(x).then_some(x)
    })
}

/// Checks the derived data of `spec` against its exact triple at random points.
///
/// Derivatives come from central differences of the values, so the oracle is
/// independent of the closed-form derivatives used to build the data. Residuals
/// are scaled by the largest term of each identity (at least one).
pub fn verify_manufactured(spec: &ProblemSpec, samples: usize, seed: u64) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = CheckOutcome::new("state equation -div(alpha grad y) = f + u", FD_TOLERANCE);
    let mut adjoint = CheckOutcome::new("adjoint equation -div(alpha grad p) = y - y_d", FD_TOLERANCE);
    let mut jump = CheckOutcome::new("state jump [y] = 0", FD_TOLERANCE);
    let mut flux = CheckOutcome::new("flux jump [alpha d_n y] = g", FD_TOLERANCE);
    let mut adj_jump = CheckOutcome::new("adjoint jump [p] = 0", FD_TOLERANCE);
    let mut adj_flux = CheckOutcome::new("adjoint flux jump [alpha d_n p] = 0", FD_TOLERANCE);
    let mut projection = CheckOutcome::new("projection u = P(-p / nu)", 1e-12);
    let mut gradients = CheckOutcome::new("gradients of y, p, u", FD_TOLERANCE);

    for side in Side::BOTH {
        let alpha = spec.coeffs.on(side);
        for _ in 0..samples {
            let Some(x) = random_point_on_side(spec, side, &mut rng) else { break };
            let yv = |q: Point| spec.y.value(side, q);
            let pv = |q: Point| spec.p.value(side, q);
            let uv = spec.u.value(side, x);

            for field in [&spec.y, &spec.p] {
                let fd = fd_gradient(|q| field.value(side, q), x);
                let g = field.gradient(side, x);
                for i in 0..2 {
                    gradients.record(fd[i] - g[i], g[i].abs(), x, side);
                }
            }
            // The clamped control has kinks; compare only away from them.
            let uh = 10.0 * FD_STEP;
            let smooth = [(uh, 0.0), (-uh, 0.0), (0.0, uh), (0.0, -uh)].iter().all(|&(dx, dy)| {
                spec.bounds.is_active(-spec.p.value(side, Point::new(x.x + dx, x.y + dy)) / spec.nu)
                    == spec.bounds.is_active(-pv(x) / spec.nu)
            });
            if smooth {
                let fd = fd_gradient(|q| spec.u.value(side, q), x);
                let g = spec.u.gradient(side, x);
                for i in 0..2 {
                    gradients.record(fd[i] - g[i], g[i].abs(), x, side);
                }
            }

            let lap_y = fd_divergence(|q| spec.y.gradient(side, q), x);
            let f = (spec.f)(side, x);
            state.record(-alpha * lap_y - f - uv, (alpha * lap_y).abs().max(f.abs()).max(uv.abs()), x, side);

            let lap_p = fd_divergence(|q| spec.p.gradient(side, q), x);
            let (y, yd) = (yv(x), (spec.y_d)(side, x));
            adjoint.record(-alpha * lap_p - (y - yd), (alpha * lap_p).abs().max(y.abs()).max(yd.abs()), x, side);

            let target = crate::optctl::project_control(pv(x), spec.nu, &spec.bounds);
            projection.record(uv - target, uv.abs(), x, side);
        }
    }

    for _ in 0..samples {
        let Some(x) = random_point_on_interface(spec, &mut rng) else { break };
        let n = spec.levelset.exact_normal(x).unwrap_or([0.0, 0.0]);
        let dn = |field: &ExactField, s: Side| {
            let g = fd_gradient(|q| field.value(s, q), x);
            spec.coeffs.on(s) * (g[0] * n[0] + g[1] * n[1])
        };
        for (field, jump_check, flux_check, g) in
            [(&spec.y, &mut jump, &mut flux, (spec.g)(x)), (&spec.p, &mut adj_jump, &mut adj_flux, 0.0)]
        {
            let (v1, v2) = (field.value(Side::One, x), field.value(Side::Two, x));
            jump_check.record(v1 - v2, v1.abs().max(v2.abs()), x, Side::One);
            let (q1, q2) = (dn(field, Side::One), dn(field, Side::Two));
            flux_check.record(q1 - q2 - g, q1.abs().max(q2.abs()).max(g.abs()), x, Side::One);
        }
    }

    VerifyReport { checks: vec![state, adjoint, jump, flux, adj_jump, adj_flux, projection, gradients] }
}
