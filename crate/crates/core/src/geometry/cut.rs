//! Element classification and cut-element decomposition.
//!
//! The interface inside a triangle is the zero set of the linear interpolant of
//! the vertex level-set values, i.e. the straight segment between the two edge
//! crossings.

use super::levelset::{LevelSet, Side};
use super::quadrature::QuadRule;
use crate::error::{Error, Result};
use crate::mesh::{signed_area, Mesh, Point};

/// Relative threshold below which a vertex level-set value is snapped to zero.
pub const SNAP_TOLERANCE: f64 = 1e-12;
/// Area fraction below which a cut is dropped in favour of the dominant side.
pub const SMALL_CUT_FRACTION: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementClass {
    Inside(Side),
    Cut,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubTriangle {
    pub side: Side,
    pub points: [Point; 3],
    pub area: f64,
}

/// The straight interface piece `Gamma_{T,h}` of a cut element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterfaceSegment {
    pub a: Point,
    pub b: Point,
    pub length: f64,
    /// Unit normal pointing into subdomain one.
    pub normal: [f64; 2],
}

impl InterfaceSegment {
    pub fn midpoint(&self) -> Point {
        self.a.lerp(self.b, 0.5)
    }
}

#[derive(Clone, Debug)]
pub struct CutInfo {
    pub class: ElementClass,
    /// Integration cells; a single whole-triangle cell for uncut elements.
    pub cells: Vec<SubTriangle>,
    /// Area fractions `|T_m| / |T|`.
    pub k: [f64; 2],
    pub segment: Option<InterfaceSegment>,
    pub area: f64,
}

impl CutInfo {
    fn inside(side: Side, points: [Point; 3]) -> Self {
        let area = signed_area(points[0], points[1], points[2]);
        let mut k = [0.0; 2];
        k[side.index()] = 1.0;
        Self {
            class: ElementClass::Inside(side),
            cells: vec![SubTriangle { side, points, area }],
            k,
            segment: None,
            area,
        }
    }

    pub fn is_cut(&self) -> bool {
        self.class == ElementClass::Cut
    }

    /// Sides present in the element.
    pub fn sides(&self) -> &'static [Side] {
        match self.class {
            ElementClass::Inside(Side::One) => &[Side::One],
            ElementClass::Inside(Side::Two) => &[Side::Two],
            ElementClass::Cut => &Side::BOTH,
        }
    }

    /// Sum of the cell areas on `side`.
    pub fn side_area(&self, side: Side) -> f64 {
        self.cells.iter().filter(|c| c.side == side).map(|c| c.area).sum()
    }

    /// Volume quadrature points and weights on `side`.
    pub fn side_quadrature<'a>(&'a self, side: Side, rule: &'a QuadRule) -> impl Iterator<Item = (Point, f64)> + 'a {
        self.cells.iter().filter(move |c| c.side == side).flat_map(move |c| rule.on_triangle(&c.points, c.area))
    }

    /// Quadrature on the interface segment; empty for uncut elements.
    pub fn segment_quadrature<'a>(&'a self, rule: &'a QuadRule) -> impl Iterator<Item = (Point, f64)> + 'a {
        self.segment.iter().flat_map(move |s| rule.on_segment(s.a, s.b))
    }
}

/// Classifies a triangle from its (snapped) vertex level-set values.
pub fn classify_element(phi: [f64; 3]) -> ElementClass {
    let neg = phi.iter().any(|&v| v < 0.0);
    let pos = phi.iter().any(|&v| v > 0.0);
    match (neg, pos) {
        (true, true) => ElementClass::Cut,
        (false, true) => ElementClass::Inside(Side::Two),
        _ => ElementClass::Inside(Side::One),
    }
}

/// Splits a triangle along the zero line of the linear interpolant of `phi`.
///
/// Returns an uncut record when the values do not change sign or when one side
/// would be thinner than [`SMALL_CUT_FRACTION`].
pub fn decompose_cut_element(element: usize, points: [Point; 3], phi: [f64; 3]) -> Result<CutInfo> {
    if let ElementClass::Inside(side) = classify_element(phi) {
        return Ok(CutInfo::inside(side, points));
    }
    let area = signed_area(points[0], points[1], points[2]);

    let mut poly: [Vec<Point>; 2] = [Vec::with_capacity(4), Vec::with_capacity(4)];
    let mut crossings: Vec<Point> = Vec::with_capacity(2);
    for i in 0..3 {
        let j = (i + 1) % 3;
        let (pi, di, dj) = (points[i], phi[i], phi[j]);
        if di <= 0.0 {
            poly[0].push(pi);
        }
        if di >= 0.0 {
            poly[1].push(pi);
        }
        if di == 0.0 {
            crossings.push(pi);
        }
        if di * dj < 0.0 {
            let x = pi.lerp(points[j], di / (di - dj));
            poly[0].push(x);
            poly[1].push(x);
            crossings.push(x);
        }
    }
    if crossings.len() != 2 {
        return Err(Error::Geometry {
            element,
            reason: format!("expected 2 interface crossings, found {}", crossings.len()),
        });
    }

    let mut cells = Vec::with_capacity(3);
    for side in Side::BOTH {
        let p = &poly[side.index()];
        for t in 1..p.len().saturating_sub(1) {
            let tri = [p[0], p[t], p[t + 1]];
            let a = signed_area(tri[0], tri[1], tri[2]);
            if a > 0.0 {
                cells.push(SubTriangle { side, points: tri, area: a });
            }
        }
    }
    let a1: f64 = cells.iter().filter(|c| c.side == Side::One).map(|c| c.area).sum();
    let a2: f64 = cells.iter().filter(|c| c.side == Side::Two).map(|c| c.area).sum();
    let k1 = a1 / (a1 + a2);
    let k = [k1, 1.0 - k1];
    if k[0] < SMALL_CUT_FRACTION {
        return Ok(CutInfo::inside(Side::Two, points));
    }
    if k[1] < SMALL_CUT_FRACTION {
        return Ok(CutInfo::inside(Side::One, points));
    }

    // Gradient of the linear interpolant; the segment is its zero line.
    let two_area = 2.0 * area;
    let (p0, p1, p2) = (points[0], points[1], points[2]);
    let gx = (phi[0] * (p1.y - p2.y) + phi[1] * (p2.y - p0.y) + phi[2] * (p0.y - p1.y)) / two_area;
    let gy = (phi[0] * (p2.x - p1.x) + phi[1] * (p0.x - p2.x) + phi[2] * (p1.x - p0.x)) / two_area;
    let glen = gx.hypot(gy);
    let (a, b) = (crossings[0], crossings[1]);
    let length = a.dist(b);
    if length == 0.0 || glen == 0.0 {
        return Err(Error::Geometry { element, reason: "zero-length interface segment".into() });
    }

    Ok(CutInfo {
        class: ElementClass::Cut,
        cells,
        k,
        segment: Some(InterfaceSegment { a, b, length, normal: [-gx / glen, -gy / glen] }),
        area,
    })
}

/// Unit normal of the element's interface segment, pointing into subdomain one.
pub fn interface_normal(element: usize, cut: &CutInfo) -> Result<[f64; 2]> {
    match cut.segment {
        Some(s) if s.length > 0.0 => Ok(s.normal),
        _ => Err(Error::Geometry { element, reason: "element has no interface segment".into() }),
    }
}

/// Snapped vertex values and per-element cut records for a whole mesh.
#[derive(Clone, Debug)]
pub struct InterfaceGeometry {
    levelset: LevelSet,
    vertex_phi: Vec<f64>,
    cuts: Vec<CutInfo>,
    fitted: Vec<FittedEdge>,
}

/// A mesh edge lying on the interface and separating the two sides.
///
/// No element is cut there, but interface data still act along the edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FittedEdge {
    /// The adjacent element on side one.
    pub element: usize,
    pub a: Point,
    pub b: Point,
}

impl InterfaceGeometry {
    pub fn build(mesh: &Mesh, levelset: LevelSet) -> Result<Self> {
        let h = mesh.h();
        let vertex_phi: Vec<f64> = mesh
            .vertices()
            .iter()
            .map(|&p| {
                let v = levelset.value(p);
                let [gx, gy] = levelset.gradient(p);
                let scale = gx.hypot(gy).max(f64::MIN_POSITIVE);
                if v.abs() < SNAP_TOLERANCE * h * scale {
                    0.0
                } else {
                    v
                }
            })
            .collect();
        let cuts = mesh
            .triangles()
            .iter()
            .enumerate()
            .map(|(e, t)| decompose_cut_element(e, mesh.triangle_points(e), t.map(|v| vertex_phi[v])))
            .collect::<Result<Vec<_>>>()?;
        let fitted = fitted_edges(mesh, &vertex_phi);
        Ok(Self { levelset, vertex_phi, cuts, fitted })
    }

    pub fn levelset(&self) -> &LevelSet {
        &self.levelset
    }

    /// Snapped level-set value at vertex `v`.
    pub fn vertex_phi(&self, v: usize) -> f64 {
        self.vertex_phi[v]
    }

    /// Side of vertex `v`, or `None` when it lies on the interface.
    pub fn vertex_side(&self, v: usize) -> Option<Side> {
        Side::of_value(self.vertex_phi[v])
    }

    pub fn cut(&self, e: usize) -> &CutInfo {
        &self.cuts[e]
    }

    pub fn cuts(&self) -> &[CutInfo] {
        &self.cuts
    }

    pub fn cut_elements(&self) -> impl Iterator<Item = usize> + '_ {
        self.cuts.iter().enumerate().filter(|(_, c)| c.is_cut()).map(|(e, _)| e)
    }

    pub fn fitted_edges(&self) -> &[FittedEdge] {
        &self.fitted
    }

    /// Total length of the polygonal interface, fitted edges included.
    pub fn interface_length(&self) -> f64 {
        let cut: f64 = self.cuts.iter().filter_map(|c| c.segment).map(|s| s.length).sum();
        cut + self.fitted.iter().map(|f| f.a.dist(f.b)).sum::<f64>()
    }

    /// Total area of side-one cells.
    pub fn side_one_area(&self) -> f64 {
        self.cuts.iter().map(|c| c.side_area(Side::One)).sum()
    }
}

fn fitted_edges(mesh: &Mesh, phi: &[f64]) -> Vec<FittedEdge> {
    // Opposite-vertex sign and element for each interior edge with both ends on the interface.
    let mut seen: std::collections::BTreeMap<(usize, usize), (usize, f64)> = Default::default();
    let mut out = Vec::new();
    for (e, tri) in mesh.triangles().iter().enumerate() {
        for i in 0..3 {
            let (u, v, w) = (tri[i], tri[(i + 1) % 3], tri[(i + 2) % 3]);
            if phi[u] != 0.0 || phi[v] != 0.0 || phi[w] == 0.0 {
                continue;
            }
            let key = (u.min(v), u.max(v));
            match seen.remove(&key) {
                None => {
                    seen.insert(key, (e, phi[w]));
                }
                Some((other, other_phi)) if other_phi * phi[w] < 0.0 => {
                    let element = if phi[w] < 0.0 { e } else { other };
                    out.push(FittedEdge { element, a: mesh.vertex(key.0), b: mesh.vertex(key.1) });
                }
                Some(_) => {}
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::quadrature::{segment_rule, triangle_rule};
    use crate::mesh::Rect;

    fn reference() -> [Point; 3] {
        [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)]
    }

    fn phi_at(ls: &LevelSet, pts: [Point; 3]) -> [f64; 3] {
        pts.map(|p| ls.value(p))
    }

    #[test]
    fn classification() {
        assert_eq!(classify_element([-1.0, -1.0, -1.0]), ElementClass::Inside(Side::One));
        assert_eq!(classify_element([2.0, 1.0, 3.0]), ElementClass::Inside(Side::Two));
        assert_eq!(classify_element([-1.0, 1.0, 1.0]), ElementClass::Cut);
        assert_eq!(classify_element([0.0, 1.0, 1.0]), ElementClass::Inside(Side::Two));
        assert_eq!(classify_element([0.0, -1.0, 0.0]), ElementClass::Inside(Side::One));
    }

    #[test]
    fn vertical_cut_of_reference_triangle() {
        let ls = LevelSet::Line { a: 1.0, b: 0.0, c: -0.5 };
        let pts = reference();
        let cut = decompose_cut_element(0, pts, phi_at(&ls, pts)).unwrap();
        assert!(cut.is_cut());
        let seg = cut.segment.unwrap();
        let mut ends = [seg.a, seg.b];
        ends.sort_by(|p, q| p.y.partial_cmp(&q.y).unwrap());
        assert!(ends[0].dist(Point::new(0.5, 0.0)) < 1e-15);
        assert!(ends[1].dist(Point::new(0.5, 0.5)) < 1e-15);
        assert!((cut.side_area(Side::Two) - 0.125).abs() < 1e-15);
        assert!((cut.k[1] - 0.25).abs() < 1e-15);
        assert!((cut.k[0] - 0.75).abs() < 1e-15);
        assert!((seg.length - 0.5).abs() < 1e-15);
        assert_eq!(interface_normal(0, &cut).unwrap(), [-1.0, 0.0]);
    }

    #[test]
    fn horizontal_cut_normal() {
        let ls = LevelSet::Line { a: 0.0, b: 1.0, c: -0.3 };
        let pts = reference();
        let cut = decompose_cut_element(0, pts, phi_at(&ls, pts)).unwrap();
        let n = interface_normal(0, &cut).unwrap();
        assert!((n[0]).abs() < 1e-15 && (n[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn cut_through_vertex_is_reclassified() {
        // phi = y - x vanishes at the origin and has opposite signs at the other
        // two vertices: the interface runs through vertex 0 and the opposite edge.
        let ls = LevelSet::Line { a: -1.0, b: 1.0, c: 0.0 };
        let pts = reference();
        let cut = decompose_cut_element(0, pts, phi_at(&ls, pts)).unwrap();
        assert!(cut.is_cut());
        assert_eq!(cut.cells.len(), 2);
        assert!((cut.k[0] - 0.5).abs() < 1e-15);

        // A zero vertex with uniform sign elsewhere is uncut.
        let cut = decompose_cut_element(0, pts, [0.0, 1.0, 2.0]).unwrap();
        assert_eq!(cut.class, ElementClass::Inside(Side::Two));
        assert!(cut.segment.is_none());
    }

    #[test]
    fn small_cut_is_dropped() {
        let pts = reference();
        let cut = decompose_cut_element(0, pts, [-1e-7, 1.0, 1.0]).unwrap();
        assert_eq!(cut.class, ElementClass::Inside(Side::Two));
    }

    #[test]
    fn missing_segment_is_an_error() {
        let pts = reference();
        let cut = decompose_cut_element(0, pts, [1.0, 1.0, 1.0]).unwrap();
        assert!(interface_normal(0, &cut).is_err());
    }

    #[test]
    fn quadrature_weights_match_cell_areas() {
        let ls = LevelSet::Line { a: 1.0, b: 0.0, c: -0.5 };
        let pts = reference();
        let cut = decompose_cut_element(0, pts, phi_at(&ls, pts)).unwrap();
        let rule = triangle_rule(2).unwrap();
        let w2: f64 = cut.side_quadrature(Side::Two, &rule).map(|(_, w)| w).sum();
        assert!((w2 - 0.125).abs() < 1e-15);
        let seg: f64 = cut.segment_quadrature(&segment_rule(3).unwrap()).map(|(_, w)| w).sum();
        assert!((seg - 0.5).abs() < 1e-15);

        let uncut = decompose_cut_element(0, pts, [-1.0; 3]).unwrap();
        let w: f64 = uncut.side_quadrature(Side::One, &rule).map(|(_, w)| w).sum();
        assert_eq!(uncut.side_quadrature(Side::One, &rule).count(), 3);
        assert!((w - 0.5).abs() < 1e-15);
    }

    #[test]
    fn relabeling_invariance() {
        let ls = LevelSet::circle(0.1, 0.2, 0.45);
        let pts = [Point::new(0.2, 0.5), Point::new(0.7, 0.4), Point::new(0.3, 0.9)];
        let base = decompose_cut_element(0, pts, phi_at(&ls, pts)).unwrap();
        for rot in 1..3 {
            let p = [pts[rot % 3], pts[(rot + 1) % 3], pts[(rot + 2) % 3]];
            let c = decompose_cut_element(0, p, phi_at(&ls, p)).unwrap();
            for side in Side::BOTH {
                assert!((c.side_area(side) - base.side_area(side)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn partition_of_domain_by_quadrature() {
        let mesh = Mesh::uniform(Rect::new(-1.0, -1.0, 1.0, 1.0), 16).unwrap();
        let geo = InterfaceGeometry::build(&mesh, LevelSet::circle(0.0, 0.0, 0.5)).unwrap();
        let rule = triangle_rule(4).unwrap();
        let mut total = 0.0;
        for c in geo.cuts() {
            for &side in c.sides() {
                total += c.side_quadrature(side, &rule).map(|(_, w)| w).sum::<f64>();
            }
        }
        assert!((total - 4.0).abs() < 1e-12);
    }

    #[test]
    fn snapped_vertices_on_circle() {
        // (0.5, 0) is a grid vertex for N = 16 on [-1,1]^2 and lies on the circle.
        let mesh = Mesh::uniform(Rect::new(-1.0, -1.0, 1.0, 1.0), 16).unwrap();
        let geo = InterfaceGeometry::build(&mesh, LevelSet::circle(0.0, 0.0, 0.5)).unwrap();
        let v = (0..mesh.num_vertices()).find(|&v| mesh.vertex(v).dist(Point::new(0.5, 0.0)) < 1e-14).unwrap();
        assert_eq!(geo.vertex_side(v), None);
        for c in geo.cut_elements().map(|e| geo.cut(e)) {
            assert!((c.k[0] + c.k[1] - 1.0).abs() < 1e-14);
            assert!(c.k[0] > 0.0 && c.k[1] > 0.0);
            assert!(c.cells.iter().all(|s| s.area > 0.0));
        }
    }

    #[test]
    fn grid_aligned_interface_is_fitted() {
        let mesh = Mesh::uniform(crate::mesh::Rect::unit_square(), 4).unwrap();
        let geo = InterfaceGeometry::build(&mesh, LevelSet::Line { a: 1.0, b: 0.0, c: -0.5 }).unwrap();
        assert_eq!(geo.cut_elements().count(), 0);
        // Boundary edges are not interface edges; the four interior ones are.
        assert_eq!(geo.fitted_edges().len(), 4);
        assert!((geo.interface_length() - 1.0).abs() < 1e-15);
        for f in geo.fitted_edges() {
            assert_eq!(geo.cut(f.element).class, ElementClass::Inside(Side::One));
        }
    }
}
