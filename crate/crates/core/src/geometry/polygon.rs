//! Convex polygons and oriented squares in the plane.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};

pub type Point = Vector2<f64>;

#[inline]
pub fn cross(a: &Point, b: &Point) -> f64 {
    a.x * b.y - a.y * b.x
}

pub fn rotation(angle: f64) -> Matrix2<f64> {
    let (s, c) = angle.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point,
    pub max: Point,
}

impl Aabb {
    pub fn of(points: &[Point]) -> Self {
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min = min.inf(p);
            max = max.sup(p);
        }
        Self { min, max }
    }

    pub fn overlaps(&self, other: &Aabb, eps: f64) -> bool {
        self.min.x <= other.max.x + eps
            && other.min.x <= self.max.x + eps
            && self.min.y <= other.max.y + eps
            && other.min.y <= self.max.y + eps
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
}

fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    (0..n).map(|i| cross(&v[i], &v[(i + 1) % n])).sum::<f64>() * 0.5
}

/// A convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl ConvexPolygon {
    /// Validates finiteness, vertex count and orientation. Clockwise input is
    /// reversed; zero-area input is rejected.
    pub fn new(mut vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::Input(format!("polygon has {} vertices", vertices.len())));
        }
        if vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::Input("polygon has non-finite vertices".into()));
        }
        let a = signed_area(&vertices);
        if a == 0.0 || !a.is_finite() {
            return Err(Error::Input("polygon has zero area".into()));
        }
        if a < 0.0 {
            vertices.reverse();
        }
        Ok(Self { vertices })
    }

    pub(crate) fn from_ccw(vertices: Vec<Point>) -> Self {
        debug_assert!(vertices.len() >= 3);
        Self { vertices }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> Point {
        let v = &self.vertices;
        let n = v.len();
        let mut c = Point::zeros();
        let mut a2 = 0.0;
        for i in 0..n {
            let (p, q) = (v[i], v[(i + 1) % n]);
            let w = cross(&p, &q);
            c += (p + q) * w;
            a2 += w;
        }
        c / (3.0 * a2)
    }

    pub fn bbox(&self) -> Aabb {
        Aabb::of(&self.vertices)
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, p) in self.vertices.iter().enumerate() {
            for q in &self.vertices[i + 1..] {
                d = d.max((p - q).norm());
            }
        }
        d
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Fan triangulation from the first vertex.
    pub fn triangles(&self) -> impl Iterator<Item = [Point; 3]> + '_ {
        let v0 = self.vertices[0];
        self.vertices.windows(2).skip(1).map(move |w| [v0, w[0], w[1]])
    }

    /// True when `p` lies inside or within `eps` of the boundary.
    pub fn contains(&self, p: &Point, eps: f64) -> bool {
        self.edges().all(|(a, b)| {
            let e = b - a;
            let len = e.norm();
            len == 0.0 || cross(&e, &(p - a)) >= -eps * len
        })
    }

    pub fn map(&self, f: impl Fn(&Point) -> Point) -> Self {
        Self::new(self.vertices.iter().map(f).collect()).expect("affine image of a polygon")
    }

    /// Image under `x -> m x + t` for `det m > 0`. Orientation is preserved,
    /// so no re-validation happens and slivers survive the map.
    pub fn transform(&self, m: &Matrix2<f64>, t: &Point) -> Self {
        debug_assert!(m.determinant() > 0.0);
        Self::from_ccw(self.vertices.iter().map(|p| m * p + t).collect())
    }

    /// Keeps the part with `normal . x <= offset`.
    pub fn clip_halfplane(&self, normal: &Point, offset: f64) -> Option<Self> {
        let mut out = Vec::with_capacity(self.vertices.len() + 1);
        let n = self.vertices.len();
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % n];
            let sp = normal.dot(&p) - offset;
            let sq = normal.dot(&q) - offset;
            if sp <= 0.0 {
                out.push(p);
            }
            if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
                let t = sp / (sp - sq);
                out.push(p + (q - p) * t);
            }
        }
        Self::cleaned(out)
    }

    /// Intersection with another convex polygon (Sutherland-Hodgman).
    pub fn intersect(&self, other: &Self) -> Option<Self> {
        if !self.bbox().overlaps(&other.bbox(), 0.0) {
            return None;
        }
        let mut cur = self.clone();
        for (a, b) in other.edges() {
            let e = b - a;
            let len = e.norm();
            if len == 0.0 {
                continue;
            }
            // inside = left of the edge: cross(e, x - a) >= 0  <=>  n.x <= n.a with n = (e.y, -e.x)
            let normal = Point::new(e.y, -e.x) / len;
            cur = cur.clip_halfplane(&normal, normal.dot(&a))?;
        }
        Some(cur)
    }

    fn cleaned(mut pts: Vec<Point>) -> Option<Self> {
        let scale = pts.iter().fold(0.0f64, |m, p| m.max(p.x.abs()).max(p.y.abs())).max(1e-300);
        let tol = 1e-14 * scale;
        pts.dedup_by(|a, b| (*a - *b).norm() <= tol);
        while pts.len() > 1 && (pts[0] - pts[pts.len() - 1]).norm() <= tol {
            pts.pop();
        }
        if pts.len() < 3 {
            return None;
        }
        let a = signed_area(&pts);
        if a <= 1e-28 * scale * scale {
            return None;
        }
        Some(Self { vertices: pts })
    }
}

/// A square with center, side length and rotation angle (radians, CCW).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedSquare {
    pub center: Point,
    pub side: f64,
    pub angle: f64,
}

impl OrientedSquare {
    pub fn new(center: Point, side: f64, angle: f64) -> Result<Self> {
        if !(side > 0.0 && side.is_finite()) || !center.x.is_finite() || !center.y.is_finite() || !angle.is_finite() {
            return Err(Error::Input(format!("invalid square (side {side})")));
        }
        Ok(Self { center, side, angle })
    }

    /// `[0,1]^2`.
    pub fn unit() -> Self {
        Self {
            center: Point::new(0.5, 0.5),
            side: 1.0,
            angle: 0.0,
        }
    }

    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    pub fn rotation(&self) -> Matrix2<f64> {
        rotation(self.angle)
    }

    /// Maps unit-square coordinates `y in [0,1]^2` into the square.
    pub fn from_unit(&self, y: &Point) -> Point {
        self.center + self.rotation() * ((y - Point::new(0.5, 0.5)) * self.side)
    }

    pub fn to_unit(&self, x: &Point) -> Point {
        self.rotation().transpose() * (x - self.center) / self.side + Point::new(0.5, 0.5)
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            self.from_unit(&Point::new(0.0, 0.0)),
            self.from_unit(&Point::new(1.0, 0.0)),
            self.from_unit(&Point::new(1.0, 1.0)),
            self.from_unit(&Point::new(0.0, 1.0)),
        ]
    }

    pub fn polygon(&self) -> ConvexPolygon {
        ConvexPolygon::from_ccw(self.corners().to_vec())
    }
}
