//! Uniform triangulations of axis-aligned rectangles.
//!
//! Each grid cell is split along its lower-left to upper-right diagonal, so the
//! mesh never depends on where the interface runs.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn sub(self, other: Point) -> [f64; 2] {
        [self.x - other.x, self.y - other.y]
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(self.x + t * (other.x - self.x), self.y + t * (other.y - self.y))
    }
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub const fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub const fn unit_square() -> Self {
        Self::new(0.0, 0.0, 1.0, 1.0)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
}

/// Signed area of the triangle `(a, b, c)`, positive when counterclockwise.
pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

#[derive(Clone, Debug)]
pub struct Mesh {
    domain: Rect,
    n: usize,
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    diameters: Vec<f64>,
    h: f64,
}

impl Mesh {
    /// Builds the `n x n` uniform mesh of `domain` with `2 n^2` triangles.
    pub fn uniform(domain: Rect, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("mesh subdivision count must be at least 1".into()));
        }
        let (w, hgt) = (domain.width(), domain.height());
        if !(w.is_finite() && hgt.is_finite()) || w <= 0.0 || hgt <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "degenerate rectangle [{}, {}] x [{}, {}]",
                domain.x0, domain.x1, domain.y0, domain.y1
            )));
        }

        let stride = n + 1;
        let mut vertices = Vec::with_capacity(stride * stride);
        let mut boundary = Vec::with_capacity(stride * stride);
        for j in 0..=n {
            // Exact endpoints so that boundary coordinates are not perturbed.
            let y = if j == n { domain.y1 } else { domain.y0 + hgt * j as f64 / n as f64 };
            for i in 0..=n {
                let x = if i == n { domain.x1 } else { domain.x0 + w * i as f64 / n as f64 };
                vertices.push(Point::new(x, y));
                boundary.push(i == 0 || j == 0 || i == n || j == n);
            }
        }

        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let v00 = j * stride + i;
                let v10 = v00 + 1;
                let v01 = v00 + stride;
                let v11 = v01 + 1;
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }

        let diameters: Vec<f64> = triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|v| vertices[v]);
                a.dist(b).max(b.dist(c)).max(c.dist(a))
            })
            .collect();
        let h = diameters.iter().copied().fold(0.0, f64::max);

        Ok(Self { domain, n, vertices, triangles, boundary, diameters, h })
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    /// Subdivisions per side.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> Point {
        self.vertices[v]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        signed_area(a, b, c)
    }

    /// Diameter `h_T` of triangle `t`.
    pub fn diameter(&self, t: usize) -> f64 {
        self.diameters[t]
    }

    /// Global mesh size `h = max h_T`.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Index of the triangle containing `p`, if any.
    pub fn locate(&self, p: Point) -> Option<usize> {
        let d = self.domain;
        let fx = (p.x - d.x0) / d.width() * self.n as f64;
        let fy = (p.y - d.y0) / d.height() * self.n as f64;
        if !(fx >= -1e-12 && fy >= -1e-12 && fx <= self.n as f64 + 1e-12 && fy <= self.n as f64 + 1e-12) {
            return None;
        }
        let i = (fx.floor().max(0.0) as usize).min(self.n - 1);
        let j = (fy.floor().max(0.0) as usize).min(self.n - 1);
        let (lx, ly) = (fx - i as f64, fy - j as f64);
        let cell = 2 * (j * self.n + i);
        Some(if ly <= lx { cell } else { cell + 1 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_unit_square() {
        let m = Mesh::uniform(Rect::unit_square(), 1).unwrap();
        assert_eq!(m.num_vertices(), 4);
        assert_eq!(m.num_triangles(), 2);
        let total: f64 = (0..2).map(|t| m.area(t)).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn counts_and_mesh_size() {
        let m = Mesh::uniform(Rect::unit_square(), 8).unwrap();
        assert_eq!(m.num_vertices(), 81);
        assert_eq!(m.num_triangles(), 128);
        let m4 = Mesh::uniform(Rect::unit_square(), 4).unwrap();
        assert!((m4.h() - 2f64.sqrt() / 4.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(Mesh::uniform(Rect::unit_square(), 0), Err(Error::InvalidArgument(_))));
        assert!(Mesh::uniform(Rect::new(0.0, 0.0, 0.0, 1.0), 4).is_err());
        assert!(Mesh::uniform(Rect::new(0.0, 1.0, 1.0, 0.5), 4).is_err());
    }

    #[test]
    fn areas_tile_domain() {
        let dom = Rect::new(-1.0, -1.0, 1.0, 1.0);
        for n in 1..=256 {
            let m = Mesh::uniform(dom, n).unwrap();
            // Neumaier summation keeps the summation error itself out of the check.
            let (mut total, mut comp) = (0.0f64, 0.0f64);
            for t in 0..m.num_triangles() {
                let a = m.area(t);
                assert!(a > 0.0);
                let s = total + a;
                comp += if total.abs() >= a.abs() { (total - s) + a } else { (a - s) + total };
                total = s;
            }
            total += comp;
            assert!((total - dom.area()).abs() <= 1e-12 * dom.area(), "n={n}");
        }
    }

    #[test]
    fn interior_valence_is_six() {
        let m = Mesh::uniform(Rect::unit_square(), 7).unwrap();
        let mut valence = vec![0usize; m.num_vertices()];
        for t in m.triangles() {
            for &v in t {
                valence[v] += 1;
            }
        }
        for v in 0..m.num_vertices() {
            if !m.is_boundary(v) {
                assert_eq!(valence[v], 6);
            }
        }
        assert_eq!((0..m.num_vertices()).filter(|&v| m.is_boundary(v)).count(), 4 * 7);
    }

    #[test]
    fn locate_finds_containing_triangle() {
        let m = Mesh::uniform(Rect::new(-1.0, -1.0, 1.0, 1.0), 5).unwrap();
        for &(x, y) in &[(0.13, -0.77), (-0.99, 0.99), (0.5, 0.5), (1.0, 1.0)] {
            let p = Point::new(x, y);
            let t = m.locate(p).unwrap();
            let [a, b, c] = m.triangle_points(t);
            let eps = -1e-14;
            assert!(signed_area(a, b, p) >= eps && signed_area(b, c, p) >= eps && signed_area(c, a, p) >= eps);
        }
        assert!(m.locate(Point::new(2.0, 0.0)).is_none());
    }
}
