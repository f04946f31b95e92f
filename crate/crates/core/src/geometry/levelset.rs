use crate::mesh::Point;

/// Subdomain label. `One` is where the level set is negative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    One,
    Two,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::One, Side::Two];

    pub fn index(self) -> usize {
        match self {
            Side::One => 0,
            Side::Two => 1,
        }
    }

    pub fn label(self) -> u8 {
        match self {
            Side::One => 1,
            Side::Two => 2,
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::One => Side::Two,
            Side::Two => Side::One,
        }
    }

    pub fn of_value(phi: f64) -> Option<Side> {
        if phi < 0.0 {
            Some(Side::One)
        } else if phi > 0.0 {
            Some(Side::Two)
        } else {
            None
        }
    }
}

/// Implicit interface description. `phi < 0` is subdomain one, `phi > 0` subdomain two.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LevelSet {
    /// `phi = a x + b y + c`.
    Line { a: f64, b: f64, c: f64 },
    /// `phi = (x - cx)^2 + (y - cy)^2 - r^2`.
    Circle { cx: f64, cy: f64, r: f64 },
    /// Spatially constant level set; a negative value means no interface in the domain.
    Constant(f64),
}

impl LevelSet {
    /// The line `y = k x + b` with subdomain one below it (`phi = y - k x - b`).
    pub fn graph(k: f64, b: f64) -> Self {
        LevelSet::Line { a: -k, b: 1.0, c: -b }
    }

    pub fn circle(cx: f64, cy: f64, r: f64) -> Self {
        LevelSet::Circle { cx, cy, r }
    }

    pub fn value(&self, p: Point) -> f64 {
        match *self {
            LevelSet::Line { a, b, c } => a * p.x + b * p.y + c,
            LevelSet::Circle { cx, cy, r } => {
                let (dx, dy) = (p.x - cx, p.y - cy);
                dx * dx + dy * dy - r * r
            }
            LevelSet::Constant(c) => c,
        }
    }

    pub fn gradient(&self, p: Point) -> [f64; 2] {
        match *self {
            LevelSet::Line { a, b, .. } => [a, b],
            LevelSet::Circle { cx, cy, .. } => [2.0 * (p.x - cx), 2.0 * (p.y - cy)],
            LevelSet::Constant(_) => [0.0, 0.0],
        }
    }

    pub fn side(&self, p: Point) -> Side {
        if self.value(p) < 0.0 {
            Side::One
        } else {
            Side::Two
        }
    }

    /// Unit normal of the exact interface through `p`, pointing into subdomain two.
    pub fn exact_normal(&self, p: Point) -> Option<[f64; 2]> {
        let [gx, gy] = self.gradient(p);
        let len = gx.hypot(gy);
        (len > 0.0).then(|| [gx / len, gy / len])
    }

    /// Length of the exact interface inside `domain`, when it has a closed form.
    pub fn circle_perimeter(&self) -> Option<f64> {
        match *self {
            LevelSet::Circle { r, .. } => Some(2.0 * std::f64::consts::PI * r),
            _ => None,
        }
    }
}
