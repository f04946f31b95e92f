//! Discrete optimality system: state, adjoint and the implicitly discretized control.

use crate::assembly::{
    assemble_interface_load, assemble_mass, assemble_sampled_load, assemble_stiffness, BlockMatrix, NitscheParams,
    VolumeQuadrature, DATA_DEGREE,
};
use crate::error::{Error, Result};
use crate::geometry::{InterfaceGeometry, Side};
use crate::linalg::{dot, norm2, pcg_operator, SolverKind, SpdSolver};
use crate::mesh::{Mesh, Point};
use crate::problems::ProblemSpec;
use crate::space::{FeFunction, Space};

/// Box constraints `lower <= u <= upper`; infinite values switch a side off.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlBounds {
    pub lower: f64,
    pub upper: f64,
}

impl ControlBounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(Error::InvalidArgument(format!("inconsistent control bounds [{lower}, {upper}]")));
        }
        Ok(Self { lower, upper })
    }

    pub const fn unbounded() -> Self {
        Self { lower: f64::NEG_INFINITY, upper: f64::INFINITY }
    }

    pub fn is_unbounded(&self) -> bool {
        self.lower == f64::NEG_INFINITY && self.upper == f64::INFINITY
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.max(self.lower).min(self.upper)
    }

    pub fn is_active(&self, v: f64) -> bool {
        v <= self.lower || v >= self.upper
    }
}

/// `min(upper, max(lower, -p / nu))`.
pub fn project_control(p: f64, nu: f64, bounds: &ControlBounds) -> f64 {
    bounds.clamp(-p / nu)
}

/// The control `u_h = P(-p_h / nu)`, defined pointwise through the discrete co-state.
#[derive(Clone, Debug)]
pub struct ImplicitControl {
    pub p: FeFunction,
    pub nu: f64,
    pub bounds: ControlBounds,
}

impl ImplicitControl {
    pub fn new(p: FeFunction, nu: f64, bounds: ControlBounds) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::InvalidArgument(format!("regularization must be positive, got {nu}")));
        }
        Ok(Self { p, nu, bounds })
    }

    /// Control value and gradient; the gradient vanishes where a bound is active.
    pub fn eval(&self, space: &Space, element: usize, side: Side, x: Point) -> (f64, [f64; 2]) {
        let (p, gp) = self.p.eval_unchecked(space, element, side, x);
        let raw = -p / self.nu;
        let u = self.bounds.clamp(raw);
        if u == raw {
            (u, [-gp[0] / self.nu, -gp[1] / self.nu])
        } else {
            (u, [0.0, 0.0])
        }
    }

    /// Values at the points of `quad`.
    pub fn sample(&self, space: &Space, quad: &VolumeQuadrature) -> Vec<f64> {
        quad.points.iter().map(|q| self.eval(space, q.element, q.side, q.point).0).collect()
    }
}

/// Settings of the projection fixed-point iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPointOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Blending `u <- (1 - theta) u + theta P(-p / nu)`; one is the plain iteration.
    pub theta: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 100, theta: 1.0 }
    }
}

impl FixedPointOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iter == 0 || !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "fixed point needs tol > 0, max_iter >= 1 and theta in (0, 1], got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct OcpSolution {
    pub y: FeFunction,
    pub p: FeFunction,
    pub control: ImplicitControl,
    pub iterations: usize,
    pub converged: bool,
    /// Discrete L2 norm of the last control update (zero for the direct solve).
    pub control_change: f64,
    /// Relative residuals of the state and adjoint equations.
    pub residuals: [f64; 2],
}

/// Relative block residual bound for the monolithic solve.
pub const BLOCK_RESIDUAL_TOL: f64 = 1e-10;

/// The assembled discrete optimality system of a problem on one mesh.
pub struct OcpSystem {
    pub spec: ProblemSpec,
    pub space: Space,
    pub stiffness: BlockMatrix,
    pub mass: BlockMatrix,
    pub quad: VolumeQuadrature,
    solver: SpdSolver,
    /// Constrained coefficients of the state (Dirichlet data).
    lift: Vec<f64>,
    /// Free rows of `(f, v) + (k_2 g, v_1) + (k_1 g, v_2) - a_h(lift, v)`.
    state_base: Vec<f64>,
    /// Free rows of `(lift - y_d, v)`.
    adjoint_base: Vec<f64>,
}

impl OcpSystem {
    pub fn new(spec: &ProblemSpec, n: usize, solver: SolverKind) -> Result<Self> {
        let mesh = Mesh::uniform(spec.domain, n)?;
        let geometry = InterfaceGeometry::build(&mesh, spec.levelset)?;
        let space = Space::new(mesh, geometry);
        let params = NitscheParams::new(spec.ctilde)?;
        let stiffness = assemble_stiffness(&space, &spec.coeffs, &params)?;
        let mass = assemble_mass(&space)?;
        let quad = VolumeQuadrature::new(&space, DATA_DEGREE)?;
        let nf = space.dofs.num_free();

        let lift = dirichlet_lift(&space, spec);
        let lifted = FeFunction::from_parts(&vec![0.0; nf], &lift);

        let f = quad.sample("source", |s, x| (spec.f)(s, x))?;
        let mut state_base = assemble_sampled_load(&space, &quad, &f);
        let gi = assemble_interface_load(&space, |x| (spec.g)(x))?;
        for (b, g) in state_base.iter_mut().zip(&gi) {
            *b += g;
        }
        state_base.truncate(nf);
        for (b, a) in state_base.iter_mut().zip(stiffness.apply_free_rows(&lifted.coeffs, nf)) {
            *b -= a;
        }

        let yd = quad.sample("desired state", |s, x| (spec.y_d)(s, x))?;
        let d = assemble_sampled_load(&space, &quad, &yd);
        let adjoint_base: Vec<f64> =
            mass.apply_free_rows(&lifted.coeffs, nf).iter().zip(&d).map(|(m, d)| m - d).collect();

        let solver = SpdSolver::new(&stiffness.free, solver)?;
        Ok(Self { spec: spec.clone(), space, stiffness, mass, quad, solver, lift, state_base, adjoint_base })
    }

    pub fn num_free(&self) -> usize {
        self.space.dofs.num_free()
    }

    fn state_rhs(&self, control: &[f64]) -> Vec<f64> {
        let nf = self.num_free();
        let bu = assemble_sampled_load(&self.space, &self.quad, control);
        self.state_base.iter().zip(&bu[..nf]).map(|(a, b)| a + b).collect()
    }

    fn adjoint_rhs(&self, y: &FeFunction) -> Vec<f64> {
        let nf = self.num_free();
        let my = self.mass.free.mul_vec(&y.coeffs[..nf]);
        my.iter().zip(&self.adjoint_base).map(|(a, b)| a + b).collect()
    }

    /// Solves `a_h(y_h, v) = (u + f, v) + (k_2 g, v_1) + (k_1 g, v_2)` for a control sampled on `quad`.
    pub fn solve_state(&self, control: &[f64]) -> Result<FeFunction> {
        if control.len() != self.quad.len() {
            return Err(Error::InvalidArgument(format!(
                "control has {} samples, quadrature has {} points",
                control.len(),
                self.quad.len()
            )));
        }
        let y = self.solver.solve(&self.state_rhs(control))?;
        Ok(FeFunction::from_parts(&y, &self.lift))
    }

    /// Solves `a_h(v, p_h) = (y_h - y_d, v)` with homogeneous boundary values.
    pub fn solve_adjoint(&self, y: &FeFunction) -> Result<FeFunction> {
        let p = self.solver.solve(&self.adjoint_rhs(y))?;
        Ok(FeFunction::from_parts(&p, &vec![0.0; self.lift.len()]))
    }

    fn relative_residual(&self, x: &[f64], b: &[f64]) -> f64 {
        let ax = self.stiffness.free.mul_vec(x);
        let r: Vec<f64> = ax.iter().zip(b).map(|(a, b)| a - b).collect();
        norm2(&r) / norm2(b).max(f64::MIN_POSITIVE)
    }

    fn residuals(&self, y: &FeFunction, p: &FeFunction, control: &[f64]) -> [f64; 2] {
        let nf = self.num_free();
        [
            self.relative_residual(&y.coeffs[..nf], &self.state_rhs(control)),
            self.relative_residual(&p.coeffs[..nf], &self.adjoint_rhs(y)),
        ]
    }

    fn control_of(&self, p: FeFunction) -> Result<ImplicitControl> {
        ImplicitControl::new(p, self.spec.nu, self.spec.bounds)
    }

    /// Solves the linear optimality system of the unconstrained problem.
    ///
    /// With `u_h = -p_h / nu` the system reads `A y + M p / nu = b`,
    /// `A p - M y = c`. Eliminating `p` gives the SPD reduced operator
    /// `A + M A^{-1} M / nu`, solved by CG preconditioned with `A^{-1}`.
    pub fn solve_unconstrained(&self) -> Result<OcpSolution> {
        if !self.spec.bounds.is_unbounded() {
            return Err(Error::InvalidArgument("control bounds are active; use the fixed-point solver".into()));
        }
        let nu = self.spec.nu;
        let m = &self.mass.free;
        let a = &self.stiffness.free;
        let b = &self.state_base;
        let c = &self.adjoint_base;
        let inner = |v: &[f64]| self.solver.solve(v);
        let failure = std::cell::RefCell::new(None);
        let solve_or_record = |v: &[f64]| match inner(v) {
            Ok(x) => x,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                vec![0.0; v.len()]
            }
        };

        let ainv_c = inner(c)?;
        let m_ainv_c = m.mul_vec(&ainv_c);
        let rhs: Vec<f64> = b.iter().zip(&m_ainv_c).map(|(b, x)| b - x / nu).collect();
        let apply = |x: &[f64], out: &mut [f64]| {
            let ax = a.mul_vec(x);
            let z = solve_or_record(&m.mul_vec(x));
            let mz = m.mul_vec(&z);
            for ((o, ax), mz) in out.iter_mut().zip(ax).zip(mz) {
                *o = ax + mz / nu;
            }
        };
        let precondition = |r: &[f64], z: &mut [f64]| z.copy_from_slice(&solve_or_record(r));
        let stats = pcg_operator(apply, precondition, &rhs, None, 1e-13, 200)?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }

        let nf = self.num_free();
        let y = FeFunction::from_parts(&stats.x, &self.lift);
        let p = self.solve_adjoint(&y)?;

        // Block residuals of the monolithic system.
        let ay = a.mul_vec(&y.coeffs[..nf]);
        let mp = m.mul_vec(&p.coeffs[..nf]);
        let r1: Vec<f64> = ay.iter().zip(&mp).zip(b).map(|((ay, mp), b)| ay + mp / nu - b).collect();
        let ap = a.mul_vec(&p.coeffs[..nf]);
        let my = m.mul_vec(&y.coeffs[..nf]);
        let r2: Vec<f64> = ap.iter().zip(&my).zip(c).map(|((ap, my), c)| ap - my - c).collect();
        let scale1 = norm2(b).max(norm2(&ay));
        let scale2 = norm2(c).max(norm2(&ap));
        let residuals = [norm2(&r1) / scale1.max(f64::MIN_POSITIVE), norm2(&r2) / scale2.max(f64::MIN_POSITIVE)];
        if residuals.iter().any(|r| !(*r <= BLOCK_RESIDUAL_TOL)) {
            return Err(Error::NonConvergence {
                iterations: stats.iterations,
                residual: residuals[0].max(residuals[1]),
                best: stats.x,
            });
        }
        let control = self.control_of(p.clone())?;
        Ok(OcpSolution { y, p, control, iterations: stats.iterations, converged: true, control_change: 0.0, residuals })
    }

    /// Projection fixed point: state, adjoint, then `u <- P(-p / nu)` until the update is below `tol`.
    ///
    /// `u_init` holds control values at the points of [`OcpSystem::quad`]; `None` starts from zero.
    pub fn solve_fixed_point(&self, u_init: Option<&[f64]>, opts: FixedPointOptions) -> Result<OcpSolution> {
        opts.validate()?;
        let mut u = match u_init {
            Some(u) if u.len() == self.quad.len() => u.to_vec(),
            Some(u) => {
                return Err(Error::InvalidArgument(format!(
                    "initial control has {} samples, quadrature has {} points",
                    u.len(),
                    self.quad.len()
                )))
            }
            None => vec![0.0; self.quad.len()],
        };
        let mut i = 0;
        loop {
            let y = self.solve_state(&u)?;
            let p = self.solve_adjoint(&y)?;
            let control = self.control_of(p.clone())?;
            let projected = control.sample(&self.space, &self.quad);
            let next: Vec<f64> =
                u.iter().zip(&projected).map(|(old, new)| (1.0 - opts.theta) * old + opts.theta * new).collect();
            let diff: Vec<f64> = next.iter().zip(&u).map(|(a, b)| a - b).collect();
            let change = self.quad.l2_norm(&diff);
            i += 1;
            let converged = change < opts.tol;
            if converged || i >= opts.max_iter || !change.is_finite() {
                let residuals = self.residuals(&y, &p, &u);
                return Ok(OcpSolution { y, p, control, iterations: i, converged, control_change: change, residuals });
            }
            u = next;
        }
    }

    /// Runs the direct solve for unbounded controls and the fixed point otherwise.
    pub fn solve(&self, opts: FixedPointOptions) -> Result<OcpSolution> {
        if self.spec.bounds.is_unbounded() {
            self.solve_unconstrained()
        } else {
            self.solve_fixed_point(None, opts)
        }
    }

    /// Discrete L2 inner product of two sampled fields.
    pub fn sampled_dot(&self, a: &[f64], b: &[f64]) -> f64 {
        let w: Vec<f64> = self.quad.points.iter().zip(a).map(|(q, a)| q.weight * a).collect();
        dot(&w, b)
    }
}

/// Constrained coefficients reproducing the exact state at boundary vertices.
///
/// The standard dof carries the value of the vertex's own side, the enriched
/// dof the jump to the other side.
fn dirichlet_lift(space: &Space, spec: &ProblemSpec) -> Vec<f64> {
    let nf = space.dofs.num_free();
    let mut lift = vec![0.0; space.dofs.num_all() - nf];
    for v in 0..space.mesh.num_vertices() {
        if !space.mesh.is_boundary(v) {
            continue;
        }
        let x = space.mesh.vertex(v);
        let home = space.geometry.vertex_side(v).unwrap_or_else(|| spec.levelset.side(x));
        let own = spec.y.value(home, x);
        lift[space.dofs.standard_dof(v) - nf] = own;
        if let Some((dof, home)) = space.dofs.enriched_dof(v) {
            lift[dof - nf] = spec.y.value(home.other(), x) - spec.y.value(home, x);
        }
    }
    lift
}
