//! Gauss rules on triangles (collapsed tensor-product Gauss-Legendre).

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::legendre::GaussLegendre;

use crate::geometry::polygon::cross;
use crate::geometry::{ConvexPolygon, Point};

/// Nodes `(u, v)` in the reference triangle `(0,0),(1,0),(0,1)` with weights
/// summing to ½.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub nodes: Vec<(Point, f64)>,
}

impl TriangleRule {
    /// Exact for polynomials of total degree `<= 2 order - 2`.
    pub fn new(order: usize) -> Self {
        Self::anisotropic(order, order)
    }

    /// `radial` points from the first vertex towards the opposite edge and
    /// `across` points parallel to that edge.
    pub fn anisotropic(radial: usize, across: usize) -> Self {
        let gl = |k: usize| GaussLegendre::new(NonZeroUsize::new(k.max(1)).unwrap());
        let (ga, gb) = (gl(radial), gl(across));
        let (pa, pb) = (ga.as_node_weight_pairs(), gb.as_node_weight_pairs());
        let mut nodes = Vec::with_capacity(pa.len() * pb.len());
        for &(a, wa) in pa {
            let s = 0.5 * (a + 1.0);
            for &(b, wb) in pb {
                let t = 0.5 * (b + 1.0);
                // (s, t) in the unit square -> (s (1 - t), s t), jacobian s
                nodes.push((Point::new(s * (1.0 - t), s * t), 0.25 * wa * wb * s));
            }
        }
        Self { nodes }
    }

    pub fn cached(order: usize) -> Arc<Self> {
        Self::cached_anisotropic(order, order)
    }

    pub fn cached_anisotropic(radial: usize, across: usize) -> Arc<Self> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<TriangleRule>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut map = cache.lock().unwrap();
        map.entry((radial, across))
            .or_insert_with(|| Arc::new(Self::anisotropic(radial, across)))
            .clone()
    }

    /// Integral over the triangle `t` of a vector-valued integrand of
    /// length `out.len()`, accumulated into `out`.
    pub fn integrate_into(&self, t: &[Point; 3], out: &mut [f64], f: &mut impl FnMut(&Point, &mut [f64])) {
        let e1 = t[1] - t[0];
        let e2 = t[2] - t[0];
        let jac = (e1.x * e2.y - e1.y * e2.x).abs();
        let mut buf = vec![0.0; out.len()];
        for (uv, w) in &self.nodes {
            let x = t[0] + e1 * uv.x + e2 * uv.y;
            buf.iter_mut().for_each(|b| *b = 0.0);
            f(&x, &mut buf);
            for (o, b) in out.iter_mut().zip(&buf) {
                *o += w * jac * b;
            }
        }
    }
}

/// Order-`order` quadrature that saves points on thin triangles: the
/// collapse vertex is put opposite the shortest edge and the number of
/// points across is scaled by the ratio of shortest to longest edge (at
/// least 2).
#[derive(Debug, Clone)]
pub struct ThinRules {
    order: usize,
    /// `by_across[k]` has `k` points across.
    by_across: Vec<Arc<TriangleRule>>,
}

impl ThinRules {
    pub fn new(order: usize) -> Self {
        let order = order.max(1);
        let by_across = (0..=order)
            .map(|k| TriangleRule::cached_anisotropic(order, k.max(1)))
            .collect();
        Self { order, by_across }
    }

    pub fn integrate_into(&self, t: &[Point; 3], out: &mut [f64], f: &mut impl FnMut(&Point, &mut [f64])) {
        let lens = [(t[1] - t[2]).norm(), (t[2] - t[0]).norm(), (t[0] - t[1]).norm()];
        let k = (0..3).min_by(|&i, &j| lens[i].total_cmp(&lens[j])).unwrap();
        let longest = lens.iter().copied().fold(0.0, f64::max);
        let ratio = if longest > 0.0 { lens[k] / longest } else { 1.0 };
        let across = ((self.order as f64 * ratio).ceil() as usize).clamp(2.min(self.order), self.order);
        let rotated = [t[k], t[(k + 1) % 3], t[(k + 2) % 3]];
        self.by_across[across].integrate_into(&rotated, out, f);
    }
}

/// Splits the fan triangles of `poly` into pieces of diameter at most
/// `max_diam` (longest-edge bisection).
pub fn fine_triangles(poly: &ConvexPolygon, max_diam: f64) -> Vec<[Point; 3]> {
    refine_triangles(poly, |_| Some(max_diam))
}

/// Longest-edge bisection of the fan triangles of `poly` with a size
/// function: `size(t)` is the largest diameter allowed for `t`, or `None` to
/// drop `t` altogether. Bisecting the longest edge makes thin triangles cost
/// pieces in proportion to their length rather than to its square.
pub fn refine_triangles(poly: &ConvexPolygon, size: impl Fn(&[Point; 3]) -> Option<f64>) -> Vec<[Point; 3]> {
    let mut out = Vec::new();
    let mut stack: Vec<[Point; 3]> = poly.triangles().collect();
    while let Some(t) = stack.pop() {
        let Some(max_diam) = size(&t) else { continue };
        let lens = [(t[0] - t[1]).norm(), (t[1] - t[2]).norm(), (t[2] - t[0]).norm()];
        let k = (0..3).max_by(|&i, &j| lens[i].total_cmp(&lens[j])).unwrap();
        if lens[k] <= max_diam {
            out.push(t);
            continue;
        }
        let (p, q, r) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
        let m = (p + q) * 0.5;
        stack.extend([[p, m, r], [m, q, r]]);
    }
    out
}

/// Euclidean distance from `x` to the closed triangle `t`.
pub fn triangle_distance(t: &[Point; 3], x: &Point) -> f64 {
    let sides = [cross(&(t[1] - t[0]), &(x - t[0])), cross(&(t[2] - t[1]), &(x - t[1])), cross(&(t[0] - t[2]), &(x - t[2]))];
    if sides.iter().all(|&c| c >= 0.0) || sides.iter().all(|&c| c <= 0.0) {
        return 0.0;
    }
    (0..3)
        .map(|i| {
            let (a, b) = (t[i], t[(i + 1) % 3]);
            let e = b - a;
            let u = ((x - a).dot(&e) / e.norm_squared().max(f64::MIN_POSITIVE)).clamp(0.0, 1.0);
            (a + e * u - x).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn monomials_on_the_reference_triangle() {
        // int x^p y^q over the reference triangle = p! q! / (p + q + 2)!
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        let rule = TriangleRule::new(4);
        let t = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        for p in 0..4 {
            for q in 0..(4 - p) {
                let mut out = [0.0];
                rule.integrate_into(&t, &mut out, &mut |x, o| o[0] = x.x.powi(p as i32) * x.y.powi(q as i32));
                assert_abs_diff_eq!(out[0], fact(p) * fact(q) / fact(p + q + 2), epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn subdivision_preserves_area() {
        let sq = ConvexPolygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap();
        let tris = fine_triangles(&sq, 0.3);
        let area: f64 = tris
            .iter()
            .map(|t| 0.5 * ((t[1] - t[0]).x * (t[2] - t[0]).y - (t[1] - t[0]).y * (t[2] - t[0]).x).abs())
            .sum();
        assert_abs_diff_eq!(area, 1.0, epsilon = 1e-14);
        assert!(tris.len() >= 16);
    }

    #[test]
    fn thin_rules_on_a_sliver() {
        // int x^2 y over the triangle (0,0), (1,0), (1,1e-3) = h^2 / 10 with h = 1e-3
        let t = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1e-3)];
        let mut out = [0.0];
        ThinRules::new(8).integrate_into(&t, &mut out, &mut |x, o| o[0] = x.x * x.x * x.y);
        assert_abs_diff_eq!(out[0], 1e-6 / 10.0, epsilon = 1e-20);
        assert!(triangle_distance(&t, &Point::new(0.5, 0.0002)) == 0.0);
        assert_abs_diff_eq!(triangle_distance(&t, &Point::new(-3.0, -4.0)), 5.0, epsilon = 1e-15);
    }
}
