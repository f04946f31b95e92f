//! The extended P1 space: standard hats plus cut-enriched hats around the interface.
//!
//! A vertex `P` of a cut element that lies strictly on side `m` carries an extra
//! basis function equal to its hat on the other side of the interface and zero on
//! side `m`. Boundary vertices carry no free unknowns: their standard and
//! enriched hats become constrained dofs, which only carry Dirichlet data.

use crate::error::{Error, Result};
use crate::geometry::{ElementClass, InterfaceGeometry, Side};
use crate::mesh::{Mesh, Point};

/// An active basis function on an element side: global dof id and local vertex index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalDof {
    pub dof: usize,
    pub local: usize,
}

#[derive(Clone, Debug)]
pub struct DofMap {
    standard: Vec<usize>,
    enriched: Vec<Option<(usize, Side)>>,
    num_standard: usize,
    num_free: usize,
    num_constrained: usize,
    /// `active[e][side]`; the list of an absent side is empty.
    active: Vec<[Vec<LocalDof>; 2]>,
}

impl DofMap {
    /// Numbers interior standard dofs first, then interior enriched dofs, both in
    /// vertex order. Boundary standard and enriched dofs follow as constrained
    /// ids `>= num_free()`.
    pub fn build(mesh: &Mesh, geometry: &InterfaceGeometry) -> Self {
        let nv = mesh.num_vertices();
        let mut standard = vec![usize::MAX; nv];
        let mut next = 0;
        for v in 0..nv {
            if !mesh.is_boundary(v) {
                standard[v] = next;
                next += 1;
            }
        }
        let num_standard = next;
        let mut num_free = next;

        let mut on_cut = vec![false; nv];
        for e in geometry.cut_elements() {
            for &v in &mesh.triangles()[e] {
                on_cut[v] = true;
            }
        }
        let mut enriched = vec![None; nv];
        for boundary_pass in [false, true] {
            if boundary_pass {
                for v in 0..nv {
                    if mesh.is_boundary(v) {
                        standard[v] = next;
                        next += 1;
                    }
                }
            }
            for v in 0..nv {
                if on_cut[v] && mesh.is_boundary(v) == boundary_pass {
                    if let Some(home) = geometry.vertex_side(v) {
                        enriched[v] = Some((next, home));
                        next += 1;
                    }
                }
            }
            if !boundary_pass {
                num_free = next;
            }
        }
        let num_constrained = next - num_free;

        let active = mesh
            .triangles()
            .iter()
            .enumerate()
            .map(|(e, tri)| {
                let mut lists: [Vec<LocalDof>; 2] = [Vec::new(), Vec::new()];
                for &side in geometry.cut(e).sides() {
                    let list = &mut lists[side.index()];
                    for (local, &v) in tri.iter().enumerate() {
                        list.push(LocalDof { dof: standard[v], local });
                    }
                    for (local, &v) in tri.iter().enumerate() {
                        if let Some((dof, home)) = enriched[v] {
                            if home != side {
                                list.push(LocalDof { dof, local });
                            }
                        }
                    }
                }
                lists
            })
            .collect();

        Self { standard, enriched, num_standard, num_free, num_constrained, active }
    }

    /// Number of unknowns of the discrete problem.
    pub fn num_free(&self) -> usize {
        self.num_free
    }

    /// Free plus constrained (boundary) dofs; the length of an [`FeFunction`].
    pub fn num_all(&self) -> usize {
        self.num_free + self.num_constrained
    }

    pub fn num_constrained(&self) -> usize {
        self.num_constrained
    }

    pub fn num_standard(&self) -> usize {
        self.num_standard
    }

    /// Free enriched dofs.
    pub fn num_enriched(&self) -> usize {
        self.num_free - self.num_standard
    }

    pub fn is_free(&self, dof: usize) -> bool {
        dof < self.num_free
    }

    /// Standard dof of vertex `v` (constrained for boundary vertices).
    pub fn standard_dof(&self, v: usize) -> usize {
        self.standard[v]
    }

    /// Enriched dof of vertex `v` and the side on which it vanishes. Boundary
    /// vertices report a constrained id.
    pub fn enriched_dof(&self, v: usize) -> Option<(usize, Side)> {
        self.enriched[v]
    }

    pub fn active(&self, element: usize, side: Side) -> &[LocalDof] {
        &self.active[element][side.index()]
    }
}

/// Mesh, interface geometry and dof numbering bundled together.
#[derive(Clone, Debug)]
pub struct Space {
    pub mesh: Mesh,
    pub geometry: InterfaceGeometry,
    pub dofs: DofMap,
    /// Constant gradients of the three vertex hats of every element.
    hat_gradients: Vec<[[f64; 2]; 3]>,
}

impl Space {
    pub fn new(mesh: Mesh, geometry: InterfaceGeometry) -> Self {
        let dofs = DofMap::build(&mesh, &geometry);
        let hat_gradients = (0..mesh.num_triangles())
            .map(|e| {
                let [a, b, c] = mesh.triangle_points(e);
                let two_area = 2.0 * mesh.area(e);
                [
                    [(b.y - c.y) / two_area, (c.x - b.x) / two_area],
                    [(c.y - a.y) / two_area, (a.x - c.x) / two_area],
                    [(a.y - b.y) / two_area, (b.x - a.x) / two_area],
                ]
            })
            .collect();
        Self { mesh, geometry, dofs, hat_gradients }
    }

    pub fn hat_gradients(&self, element: usize) -> &[[f64; 2]; 3] {
        &self.hat_gradients[element]
    }

    /// Barycentric coordinates of `p` in `element`.
    pub fn barycentric(&self, element: usize, p: Point) -> [f64; 3] {
        let a = self.mesh.triangle_points(element)[0];
        let g = &self.hat_gradients[element];
        let l1 = g[1][0] * (p.x - a.x) + g[1][1] * (p.y - a.y);
        let l2 = g[2][0] * (p.x - a.x) + g[2][1] * (p.y - a.y);
        [1.0 - l1 - l2, l1, l2]
    }

    /// Side used to evaluate on `element`; uncut elements ignore the request.
    pub fn effective_side(&self, element: usize, side: Side) -> Side {
        match self.geometry.cut(element).class {
            ElementClass::Inside(s) => s,
            ElementClass::Cut => side,
        }
    }

    pub fn zero_function(&self) -> FeFunction {
        FeFunction { coeffs: vec![0.0; self.dofs.num_all()] }
    }
}

/// A discrete function in the extended space: one coefficient per dof (free and constrained).
#[derive(Clone, Debug, PartialEq)]
pub struct FeFunction {
    pub coeffs: Vec<f64>,
}

impl FeFunction {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    /// Builds a function from free values with the given constrained (boundary) values.
    pub fn from_parts(free: &[f64], constrained: &[f64]) -> Self {
        let mut coeffs = Vec::with_capacity(free.len() + constrained.len());
        coeffs.extend_from_slice(free);
        coeffs.extend_from_slice(constrained);
        Self { coeffs }
    }

    pub fn free<'a>(&'a self, dofs: &DofMap) -> &'a [f64] {
        &self.coeffs[..dofs.num_free()]
    }

    pub fn constrained<'a>(&'a self, dofs: &DofMap) -> &'a [f64] {
        &self.coeffs[dofs.num_free()..]
    }

    /// Value and gradient at `p` on `side` of `element`, without a containment check.
    pub fn eval_unchecked(&self, space: &Space, element: usize, side: Side, p: Point) -> (f64, [f64; 2]) {
        let side = space.effective_side(element, side);
        let lam = space.barycentric(element, p);
        let g = space.hat_gradients(element);
        let mut value = 0.0;
        let mut grad = [0.0; 2];
        for ld in space.dofs.active(element, side) {
            let c = self.coeffs[ld.dof];
            value += c * lam[ld.local];
            grad[0] += c * g[ld.local][0];
            grad[1] += c * g[ld.local][1];
        }
        (value, grad)
    }
}

/// Evaluates `fefun` at `p` on `side` of `element`.
pub fn eval_fe(space: &Space, fefun: &FeFunction, element: usize, side: Side, p: Point) -> Result<(f64, [f64; 2])> {
    if element >= space.mesh.num_triangles() {
        return Err(Error::InvalidArgument(format!("element {element} out of range")));
    }
    if fefun.coeffs.len() != space.dofs.num_all() {
        return Err(Error::InvalidArgument(format!(
            "coefficient vector has length {}, expected {}",
            fefun.coeffs.len(),
            space.dofs.num_all()
        )));
    }
    let lam = space.barycentric(element, p);
    if lam.iter().any(|&l| l < -1e-10) {
        return Err(Error::InvalidArgument(format!("point ({}, {}) is outside element {element}", p.x, p.y)));
    }
    Ok(fefun.eval_unchecked(space, element, side, p))
}
