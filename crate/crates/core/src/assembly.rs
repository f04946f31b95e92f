//! Nitsche-XFEM stiffness, extended mass matrix and load vectors.
//!
//! The bilinear form is
//!
//! ```text
//! a_h(w, v) = (alpha grad w, grad v)_{Omega_1 u Omega_2}
//!           - ({alpha d_n w}, [v])_Gamma - ({alpha d_n v}, [w])_Gamma
//!           + lambda ([w], [v])_Gamma
//! ```
//!
//! with `[v] = v_1 - v_2`, `{q} = k_1 q_1 + k_2 q_2`, `n` the unit normal of the
//! interface segment pointing into subdomain two and
//! `lambda|_T = C h_T^{-1} max(alpha_1, alpha_2)`. Interface data enter the load as
//! `(k_2 g, v_1)_Gamma + (k_1 g, v_2)_Gamma`.

use crate::error::{Error, Result};
use crate::geometry::{segment_rule, triangle_rule, QuadRule, Side};
use crate::linalg::CsrMatrix;
use crate::mesh::Point;
use crate::space::Space;

/// Diffusion coefficients of the two subdomains.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coefficients {
    pub alpha: [f64; 2],
}

impl Coefficients {
    pub fn new(alpha1: f64, alpha2: f64) -> Result<Self> {
        if !(alpha1 > 0.0 && alpha2 > 0.0) {
            return Err(Error::InvalidArgument(format!("coefficients must be positive, got {alpha1}, {alpha2}")));
        }
        Ok(Self { alpha: [alpha1, alpha2] })
    }

    pub fn on(&self, side: Side) -> f64 {
        self.alpha[side.index()]
    }

    pub fn max(&self) -> f64 {
        self.alpha[0].max(self.alpha[1])
    }
}

/// Nitsche penalty scaling `C` in `lambda|_T = C h_T^{-1} max(alpha)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NitscheParams {
    pub ctilde: f64,
}

impl NitscheParams {
    pub fn new(ctilde: f64) -> Result<Self> {
        if !(ctilde > 0.0) {
            return Err(Error::InvalidArgument(format!("stabilization constant must be positive, got {ctilde}")));
        }
        Ok(Self { ctilde })
    }

    pub fn penalty(&self, coeffs: &Coefficients, h_t: f64) -> f64 {
        self.ctilde * coeffs.max() / h_t
    }
}

/// Quadrature degree for mass-type products of P1 functions.
pub const MASS_DEGREE: usize = 2;
/// Quadrature degree for data terms and error integrals.
pub const DATA_DEGREE: usize = 4;
/// Gauss points on each interface segment.
pub const SEGMENT_POINTS: usize = 3;

/// A matrix over all dofs together with its free/free and free/constrained blocks.
#[derive(Clone, Debug)]
pub struct BlockMatrix {
    pub full: CsrMatrix,
    pub free: CsrMatrix,
    pub coupling: CsrMatrix,
}

impl BlockMatrix {
    fn from_triplets(space: &Space, triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        let nf = space.dofs.num_free();
        let nall = space.dofs.num_all();
        let mut ff = Vec::with_capacity(triplets.len());
        let mut fc = Vec::new();
        for &(i, j, v) in &triplets {
            if i < nf {
                if j < nf {
                    ff.push((i, j, v));
                } else {
                    fc.push((i, j - nf, v));
                }
            }
        }
        Ok(Self {
            full: CsrMatrix::from_triplets(nall, nall, triplets)?,
            free: CsrMatrix::from_triplets(nf, nf, ff)?,
            coupling: CsrMatrix::from_triplets(nf, nall - nf, fc)?,
        })
    }

    /// Free rows of `M u` for a function `u` over all dofs.
    pub fn apply_free_rows(&self, all: &[f64], nf: usize) -> Vec<f64> {
        let mut y = self.free.mul_vec(&all[..nf]);
        let yc = self.coupling.mul_vec(&all[nf..]);
        for (a, b) in y.iter_mut().zip(yc) {
            *a += b;
        }
        y
    }
}

/// Basis function of the element-local union of both sides' active lists.
#[derive(Clone, Copy, Debug)]
struct UnionDof {
    dof: usize,
    local: usize,
    on: [bool; 2],
}

fn union_dofs(space: &Space, e: usize) -> Vec<UnionDof> {
    let mut out: Vec<UnionDof> = Vec::with_capacity(6);
    for side in Side::BOTH {
        for ld in space.dofs.active(e, side) {
            match out.iter_mut().find(|u| u.dof == ld.dof) {
                Some(u) => u.on[side.index()] = true,
                None => {
                    let mut on = [false; 2];
                    on[side.index()] = true;
                    out.push(UnionDof { dof: ld.dof, local: ld.local, on });
                }
            }
        }
    }
    out
}

fn ind(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn ensure_nonempty(space: &Space) -> Result<()> {
    if space.dofs.num_free() == 0 {
        return Err(Error::InvalidArgument("dof map has no free dofs".into()));
    }
    Ok(())
}

/// Assembles the Nitsche-XFEM stiffness matrix of `a_h`.
pub fn assemble_stiffness(space: &Space, coeffs: &Coefficients, params: &NitscheParams) -> Result<BlockMatrix> {
    ensure_nonempty(space)?;
    let seg_rule = segment_rule(SEGMENT_POINTS)?;
    let mut triplets = Vec::with_capacity(space.mesh.num_triangles() * 9);
    for e in 0..space.mesh.num_triangles() {
        let cut = space.geometry.cut(e);
        let grads = space.hat_gradients(e);
        let dofs = union_dofs(space, e);
        let nd = dofs.len();
        let mut local = vec![0.0; nd * nd];

        for &side in cut.sides() {
            let scale = coeffs.on(side) * cut.side_area(side);
            let s = side.index();
            for (a, da) in dofs.iter().enumerate().filter(|(_, d)| d.on[s]) {
                let ga = grads[da.local];
                for (b, db) in dofs.iter().enumerate().filter(|(_, d)| d.on[s]) {
                    let gb = grads[db.local];
                    local[a * nd + b] += scale * (ga[0] * gb[0] + ga[1] * gb[1]);
                }
            }
        }

        if let Some(seg) = cut.segment {
            let n = [-seg.normal[0], -seg.normal[1]];
            let [k1, k2] = cut.k;
            let [a1, a2] = coeffs.alpha;
            let lambda = params.penalty(coeffs, space.mesh.diameter(e));
            let flux: Vec<f64> = dofs
                .iter()
                .map(|d| {
                    let w = k1 * a1 * ind(d.on[0]) + k2 * a2 * ind(d.on[1]);
                    w * (grads[d.local][0] * n[0] + grads[d.local][1] * n[1])
                })
                .collect();
            let jump_sign: Vec<f64> = dofs.iter().map(|d| ind(d.on[0]) - ind(d.on[1])).collect();
            for (x, w) in seg_rule.on_segment(seg.a, seg.b) {
                let lam = space.barycentric(e, x);
                let jump: Vec<f64> = dofs.iter().zip(&jump_sign).map(|(d, s)| s * lam[d.local]).collect();
                for a in 0..nd {
                    for b in 0..nd {
                        local[a * nd + b] += w * (-flux[b] * jump[a] - flux[a] * jump[b] + lambda * jump[a] * jump[b]);
                    }
                }
            }
        }

        for (a, da) in dofs.iter().enumerate() {
            for (b, db) in dofs.iter().enumerate() {
                let v = local[a * nd + b];
                if v != 0.0 {
                    triplets.push((da.dof, db.dof, v));
                }
            }
        }
    }
    BlockMatrix::from_triplets(space, triplets)
}

/// Assembles the mass matrix of the extended space on the cut sub-cells.
pub fn assemble_mass(space: &Space) -> Result<BlockMatrix> {
    ensure_nonempty(space)?;
    let rule = triangle_rule(MASS_DEGREE)?;
    let mut triplets = Vec::with_capacity(space.mesh.num_triangles() * 9);
    for e in 0..space.mesh.num_triangles() {
        let cut = space.geometry.cut(e);
        for &side in cut.sides() {
            let active = space.dofs.active(e, side);
            for (x, w) in cut.side_quadrature(side, &rule) {
                let lam = space.barycentric(e, x);
                for a in active {
                    for b in active {
                        triplets.push((a.dof, b.dof, w * lam[a.local] * lam[b.local]));
                    }
                }
            }
        }
    }
    BlockMatrix::from_triplets(space, triplets)
}

#[derive(Clone, Copy, Debug)]
pub struct QuadPoint {
    pub element: usize,
    pub side: Side,
    pub point: Point,
    pub weight: f64,
}

/// All volume quadrature points of the mesh on the cut sub-cells.
///
/// Sampled fields (data, controls) are stored as one value per point.
#[derive(Clone, Debug)]
pub struct VolumeQuadrature {
    pub degree: usize,
    pub points: Vec<QuadPoint>,
}

impl VolumeQuadrature {
    pub fn new(space: &Space, degree: usize) -> Result<Self> {
        let rule = triangle_rule(degree)?;
        let mut points = Vec::new();
        for e in 0..space.mesh.num_triangles() {
            let cut = space.geometry.cut(e);
            for &side in cut.sides() {
                points.extend(cut.side_quadrature(side, &rule).map(|(point, weight)| QuadPoint {
                    element: e,
                    side,
                    point,
                    weight,
                }));
            }
        }
        Ok(Self { degree, points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Samples `f(side, x)` at every point, rejecting non-finite values.
    pub fn sample(&self, what: &'static str, f: impl Fn(Side, Point) -> f64) -> Result<Vec<f64>> {
        self.points
            .iter()
            .map(|q| {
                let v = f(q.side, q.point);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::DataEvaluation { what, x: q.point.x, y: q.point.y })
                }
            })
            .collect()
    }

    /// Discrete L2 norm `sqrt(sum w v^2)` of a sampled field.
    pub fn l2_norm(&self, values: &[f64]) -> f64 {
        self.points.iter().zip(values).map(|(q, v)| q.weight * v * v).sum::<f64>().sqrt()
    }
}

/// Load vector `(s, v)` over all dofs for a field sampled on `quad`.
pub fn assemble_sampled_load(space: &Space, quad: &VolumeQuadrature, values: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), quad.len());
    let mut b = vec![0.0; space.dofs.num_all()];
    for (q, &v) in quad.points.iter().zip(values) {
        if v == 0.0 {
            continue;
        }
        let lam = space.barycentric(q.element, q.point);
        let side = space.effective_side(q.element, q.side);
        for ld in space.dofs.active(q.element, side) {
            b[ld.dof] += q.weight * v * lam[ld.local];
        }
    }
    b
}

/// Interface load `(k_2 g, v_1)_Gamma + (k_1 g, v_2)_Gamma` over all dofs.
pub fn assemble_interface_load(space: &Space, g: impl Fn(Point) -> f64) -> Result<Vec<f64>> {
    let rule = segment_rule(SEGMENT_POINTS)?;
    let mut b = vec![0.0; space.dofs.num_all()];
    for e in space.geometry.cut_elements() {
        let cut = space.geometry.cut(e);
        let [k1, k2] = cut.k;
        let dofs = union_dofs(space, e);
        for (x, w) in cut.segment_quadrature(&rule) {
            let gv = g(x);
            if !gv.is_finite() {
                return Err(Error::DataEvaluation { what: "interface flux jump", x: x.x, y: x.y });
            }
            let lam = space.barycentric(e, x);
            for d in &dofs {
                let weight = k2 * ind(d.on[0]) + k1 * ind(d.on[1]);
                b[d.dof] += w * gv * weight * lam[d.local];
            }
        }
    }
    // Discrete functions are continuous across fitted edges, so k_1 + k_2 = 1 collapses the weights.
    for edge in space.geometry.fitted_edges() {
        for (x, w) in rule.on_segment(edge.a, edge.b) {
            let gv = g(x);
            if !gv.is_finite() {
                return Err(Error::DataEvaluation { what: "interface flux jump", x: x.x, y: x.y });
            }
            let lam = space.barycentric(edge.element, x);
            for ld in space.dofs.active(edge.element, Side::One) {
                b[ld.dof] += w * gv * lam[ld.local];
            }
        }
    }
    Ok(b)
}

/// Right side `(f + u, v) + (k_2 g, v_1)_Gamma + (k_1 g, v_2)_Gamma` over all dofs.
///
/// `volume` is `f + u` sampled on `quad`.
pub fn assemble_load(
    space: &Space,
    quad: &VolumeQuadrature,
    volume: &[f64],
    g: impl Fn(Point) -> f64,
) -> Result<Vec<f64>> {
    let mut b = assemble_sampled_load(space, quad, volume);
    let bi = assemble_interface_load(space, g)?;
    for (x, y) in b.iter_mut().zip(bi) {
        *x += y;
    }
    Ok(b)
}

/// Direct quadrature evaluation of `a_h(w, v)` for two functions over all dofs.
///
/// Independent of the assembled matrix; used to cross-check it.
pub fn eval_bilinear_form(
    space: &Space,
    coeffs: &Coefficients,
    params: &NitscheParams,
    w: &crate::space::FeFunction,
    v: &crate::space::FeFunction,
) -> Result<f64> {
    let vol_rule = triangle_rule(MASS_DEGREE)?;
    let seg: QuadRule = segment_rule(SEGMENT_POINTS)?;
    let mut total = 0.0;
    for e in 0..space.mesh.num_triangles() {
        let cut = space.geometry.cut(e);
        for &side in cut.sides() {
            for (x, wt) in cut.side_quadrature(side, &vol_rule) {
                let (_, gw) = w.eval_unchecked(space, e, side, x);
                let (_, gv) = v.eval_unchecked(space, e, side, x);
                total += wt * coeffs.on(side) * (gw[0] * gv[0] + gw[1] * gv[1]);
            }
        }
        if let Some(s) = cut.segment {
            let n = [-s.normal[0], -s.normal[1]];
            let lambda = params.penalty(coeffs, space.mesh.diameter(e));
            for (x, wt) in seg.on_segment(s.a, s.b) {
                let trace = |f: &crate::space::FeFunction| {
                    let (v1, g1) = f.eval_unchecked(space, e, Side::One, x);
                    let (v2, g2) = f.eval_unchecked(space, e, Side::Two, x);
                    let avg = cut.k[0] * coeffs.alpha[0] * (g1[0] * n[0] + g1[1] * n[1])
                        + cut.k[1] * coeffs.alpha[1] * (g2[0] * n[0] + g2[1] * n[1]);
                    (v1 - v2, avg)
                };
                let (jw, fw) = trace(w);
                let (jv, fv) = trace(v);
                total += wt * (-fw * jv - fv * jw + lambda * jw * jv);
            }
        }
    }
    Ok(total)
}

/// Standard P1 Laplace stiffness, mass and unit load over vertex numbering.
///
/// Built from the element coordinate matrix alone, without cut information,
/// as a reference for the uncut case.
#[derive(Clone, Debug)]
pub struct ReferenceP1 {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    pub unit_load: Vec<f64>,
}

pub fn p1_reference(mesh: &crate::mesh::Mesh) -> Result<ReferenceP1> {
    let nv = mesh.num_vertices();
    let mut k = Vec::with_capacity(9 * mesh.num_triangles());
    let mut m = Vec::with_capacity(9 * mesh.num_triangles());
    let mut unit_load = vec![0.0; nv];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let p = mesh.triangle_points(t);
        let det = (p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y);
        let area = 0.5 * det.abs();
        // grad lambda_i = (y_j - y_k, x_k - x_j) / det for cyclic (i, j, k)
        let g: [[f64; 2]; 3] = std::array::from_fn(|i| {
            let (j, l) = ((i + 1) % 3, (i + 2) % 3);
            [(p[j].y - p[l].y) / det, (p[l].x - p[j].x) / det]
        });
        for a in 0..3 {
            unit_load[tri[a]] += area / 3.0;
            for b in 0..3 {
                k.push((tri[a], tri[b], area * (g[a][0] * g[b][0] + g[a][1] * g[b][1])));
                m.push((tri[a], tri[b], area / 12.0 * if a == b { 2.0 } else { 1.0 }));
            }
        }
    }
    Ok(ReferenceP1 {
        stiffness: CsrMatrix::from_triplets(nv, nv, k)?,
        mass: CsrMatrix::from_triplets(nv, nv, m)?,
        unit_load,
    })
}
