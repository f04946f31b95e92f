//! Symmetric triangle rules and Gauss-Legendre segment rules.

use crate::error::{Error, Result};
use crate::mesh::Point;

/// Quadrature rule in barycentric (triangle) or unit-interval (segment) coordinates.
/// Weights are normalized to sum to one and get scaled by the cell measure.
#[derive(Clone, Debug)]
pub struct QuadRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Maps the rule onto triangle `tri` with area `area`.
    pub fn on_triangle(&self, tri: &[Point; 3], area: f64) -> impl Iterator<Item = (Point, f64)> + '_ {
        let tri = *tri;
        self.points.iter().zip(&self.weights).map(move |(b, &w)| {
            let x = b[0] * tri[0].x + b[1] * tri[1].x + b[2] * tri[2].x;
            let y = b[0] * tri[0].y + b[1] * tri[1].y + b[2] * tri[2].y;
            (Point::new(x, y), w * area)
        })
    }

    /// Maps a segment rule onto `[a, b]`.
    pub fn on_segment(&self, a: Point, b: Point) -> impl Iterator<Item = (Point, f64)> + '_ {
        let len = a.dist(b);
        self.points.iter().zip(&self.weights).map(move |(t, &w)| (a.lerp(b, t[0]), w * len))
    }
}

fn push_orbit3(rule: &mut QuadRule, a: f64, w: f64) {
    let b = 1.0 - 2.0 * a;
    for p in [[b, a, a], [a, b, a], [a, a, b]] {
        rule.points.push(p);
        rule.weights.push(w);
    }
}

fn push_orbit6(rule: &mut QuadRule, a: f64, b: f64, w: f64) {
    let c = 1.0 - a - b;
    for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
        rule.points.push(p);
        rule.weights.push(w);
    }
}

/// Triangle rule exact for polynomials of total degree `degree` (2, 4 or 6).
pub fn triangle_rule(degree: usize) -> Result<QuadRule> {
    let mut rule = QuadRule { points: Vec::new(), weights: Vec::new(), degree };
    match degree {
        2 => push_orbit3(&mut rule, 1.0 / 6.0, 1.0 / 3.0),
        4 => {
            push_orbit3(&mut rule, 0.445_948_490_915_964_886_318, 0.223_381_589_678_011_465_963);
            push_orbit3(&mut rule, 0.091_576_213_509_770_743_460, 0.109_951_743_655_321_867_637);
        }
        6 => {
            push_orbit3(&mut rule, 0.249_286_745_170_910_421_292, 0.116_786_275_726_379_366_030);
            push_orbit3(&mut rule, 0.063_089_014_491_502_228_340, 0.050_844_906_370_206_816_921);
            push_orbit6(
                &mut rule,
                0.053_145_049_844_816_947_353,
                0.310_352_451_033_784_405_416,
                0.082_851_075_618_373_575_194,
            );
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "unsupported triangle quadrature degree {degree} (expected 2, 4 or 6)"
            )))
        }
    }
    Ok(rule)
}

/// Gauss-Legendre rule with `points` nodes (2 or 3) on the unit interval.
pub fn segment_rule(points: usize) -> Result<QuadRule> {
    let (nodes, weights): (Vec<f64>, Vec<f64>) = match points {
        2 => {
            let d = 0.5 / 3f64.sqrt();
            (vec![0.5 - d, 0.5 + d], vec![0.5, 0.5])
        }
        3 => {
            let d = 0.5 * (0.6f64).sqrt();
            (vec![0.5 - d, 0.5, 0.5 + d], vec![5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0])
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "unsupported segment rule with {points} points (expected 2 or 3)"
            )))
        }
    };
    Ok(QuadRule { points: nodes.into_iter().map(|t| [t, 0.0, 0.0]).collect(), weights, degree: 2 * points - 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    // Exact integral of x^i y^j over the reference triangle: i! j! / (i + j + 2)!
    fn monomial_integral(i: u32, j: u32) -> f64 {
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        fact(i) * fact(j) / fact(i + j + 2)
    }

    #[test]
    fn triangle_rules_are_exact() {
        let tri = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        for degree in [2, 4, 6] {
            let rule = triangle_rule(degree).unwrap();
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for i in 0..=degree as u32 {
                for j in 0..=(degree as u32 - i) {
                    let q: f64 =
                        rule.on_triangle(&tri, 0.5).map(|(p, w)| w * p.x.powi(i as i32) * p.y.powi(j as i32)).sum();
                    assert!((q - monomial_integral(i, j)).abs() < 1e-13, "deg {degree}: x^{i} y^{j}");
                }
            }
        }
    }

    #[test]
    fn segment_rules_are_exact() {
        for n in [2, 3] {
            let rule = segment_rule(n).unwrap();
            for k in 0..(2 * n as i32) {
                let q: f64 =
                    rule.on_segment(Point::new(0.0, 0.0), Point::new(2.0, 0.0)).map(|(p, w)| w * p.x.powi(k)).sum();
                let exact = 2f64.powi(k + 1) / (k + 1) as f64;
                assert!((q - exact).abs() < 1e-13 * exact.max(1.0));
            }
        }
    }

    #[test]
    fn unsupported_degrees() {
        assert!(triangle_rule(3).is_err());
        assert!(segment_rule(5).is_err());
    }
}
