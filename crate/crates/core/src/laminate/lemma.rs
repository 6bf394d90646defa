//! The explicit two-state laminate with boundary layers.
//!
//! In the lamination frame the unit square is cut into `n` vertical strips.
//! Each strip carries value `a` on a left trapezoid and `b` on a right one,
//! separated by the line `x1 = x0 + lambda/n`. Near the top and bottom edges
//! four thin triangles carry `+c_n` and `-c_n`; their slanted sides are the
//! only interfaces whose normal is not the lamination normal, and `c_n` is
//! chosen so that those jumps are compatible too. Outside the square the
//! field vanishes.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::field::{Cell, PiecewiseConstantField};
use crate::geometry::polygon::{ConvexPolygon, OrientedSquare, Point};
use crate::linalg::{canonical_sign, singular_values};
use crate::operator::{cone_contains, rotate_operator, v_lambda, Operator, DEFAULT_TOL_CONE};

/// Tolerance for the exact algebraic identities the construction relies on.
pub const LEMMA_TOL: f64 = 1e-10;

fn check_planar(op: &Operator) -> Result<usize> {
    if op.n_space() != 2 {
        return Err(Error::Precondition(format!(
            "construction needs N = 2, operator has N = {}",
            op.n_space()
        )));
    }
    if op.d_state() != 2 * op.m_eq() {
        return Err(Error::OperatorHypothesis(format!(
            "construction needs d = 2m, operator has d = {}, m = {}",
            op.d_state(),
            op.m_eq()
        )));
    }
    Ok(op.m_eq())
}

/// Solves `A2 c = 0`, `(A1 + A2) c = (A1 + A2) a` and returns `c / sqrt(n)`.
pub fn solve_cn(op: &Operator, a: &DVector<f64>, n: usize) -> Result<DVector<f64>> {
    let m = check_planar(op)?;
    if a.len() != op.d_state() {
        return Err(Error::Dimension(format!("a has length {}, expected {}", a.len(), op.d_state())));
    }
    if n == 0 {
        return Err(Error::Input("n must be >= 1".into()));
    }
    let (a1, a2) = (op.matrix(0), op.matrix(1));
    let defect = (a1 * a).norm();
    if defect > LEMMA_TOL * (1.0 + a.norm()) {
        return Err(Error::RotateFirst(defect));
    }
    let sum = a1 + a2;
    let mut m1 = DMatrix::zeros(2 * m, 2 * m);
    m1.view_mut((0, 0), (m, 2 * m)).copy_from(a2);
    m1.view_mut((m, 0), (m, 2 * m)).copy_from(&sum);
    let s = singular_values(&m1);
    if s[2 * m - 1] <= 1e-12 * s[0].max(1.0) {
        return Err(Error::OperatorHypothesis(
            "matrix [A2; A1 + A2] is singular (d = 2m / rank hypothesis fails)".into(),
        ));
    }
    let mut rhs = DVector::zeros(2 * m);
    rhs.rows_mut(m, m).copy_from(&(&sum * a));
    let c1 = m1
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::OperatorHypothesis("matrix [A2; A1 + A2] is singular".into()))?;
    Ok(c1 / (n as f64).sqrt())
}

/// The pattern together with the data it was built from.
#[derive(Debug, Clone)]
pub struct LemmaPattern {
    pub field: PiecewiseConstantField,
    /// Boundary-layer value; the field takes `+c_n` and `-c_n` near the top and bottom.
    pub c_n: DVector<f64>,
    /// Unit lamination normal `w`; the strips are orthogonal to it.
    pub normal: Point,
    pub n: usize,
}

impl LemmaPattern {
    /// Angle of the pattern's domain square (the angle of `w`).
    pub fn angle(&self) -> f64 {
        self.field.domain.angle
    }
}

/// Pattern on the unit square with values `a`, `b`, `+-c_n` and exterior 0.
///
/// Requires `vol_lambda * a + (1 - vol_lambda) * b = 0` and `b - a` in the
/// cone; the strips are oriented along a frequency in `V_{b-a}`.
pub fn lemma1_pattern(op: &Operator, a: &DVector<f64>, b: &DVector<f64>, vol_lambda: f64, n: usize) -> Result<LemmaPattern> {
    check_planar(op)?;
    let d = op.d_state();
    if a.len() != d || b.len() != d {
        return Err(Error::Dimension(format!("states must have length {d}")));
    }
    if !(0.0..=1.0).contains(&vol_lambda) {
        return Err(Error::Input(format!("volume fraction {vol_lambda} not in [0,1]")));
    }
    if n < 2 {
        return Err(Error::Input("n must be >= 2".into()));
    }
    let stacked = {
        let (a1, a2) = (op.matrix(0), op.matrix(1));
        let mut s = DMatrix::zeros(2 * op.m_eq(), d);
        s.view_mut((0, 0), (op.m_eq(), d)).copy_from(a1);
        s.view_mut((op.m_eq(), 0), (op.m_eq(), d)).copy_from(a2);
        s
    };
    let sv = singular_values(&stacked);
    if sv.len() < d || sv[d - 1] <= 1e-12 * sv[0].max(1.0) {
        return Err(Error::OperatorHypothesis("A1 and A2 have a common null vector".into()));
    }
    let scale = 1.0 + a.norm() + b.norm();
    let bary = a * vol_lambda + b * (1.0 - vol_lambda);
    if bary.norm() > LEMMA_TOL * scale {
        return Err(Error::Precondition(format!(
            "barycenter of a and b is {:.3e} away from 0",
            bary.norm()
        )));
    }
    let jump = b - a;
    let unit = OrientedSquare::unit();
    if jump.norm() <= LEMMA_TOL * scale || vol_lambda == 0.0 || vol_lambda == 1.0 {
        let value = if vol_lambda == 0.0 { b.clone() } else { a.clone() };
        let field = PiecewiseConstantField {
            domain: unit,
            exterior_value: DVector::zeros(d),
            cells: vec![Cell::new(unit.polygon(), value)],
        };
        return Ok(LemmaPattern {
            field,
            c_n: DVector::zeros(d),
            normal: Point::new(1.0, 0.0),
            n,
        });
    }
    if !cone_contains(op, &jump, DEFAULT_TOL_CONE)?.member {
        return Err(Error::Precondition("b - a is not in the characteristic cone".into()));
    }
    let basis = v_lambda(op, &jump, DEFAULT_TOL_CONE)?;
    let w = canonical_sign(basis.v_basis[0].clone());
    let normal = Point::new(w[0], w[1]).normalize();
    let r = DMatrix::from_row_slice(2, 2, &[normal.x, -normal.y, normal.y, normal.x]);
    let rotated = rotate_operator(op, &r)?;
    let c_n = solve_cn(&rotated, a, n)?;

    let h = vol_lambda / (n as f64).sqrt();
    if h > 0.5 {
        return Err(Error::Precondition(format!(
            "n = {n} too small for volume fraction {vol_lambda}: boundary layers overlap (need n >= 4 lambda^2)"
        )));
    }
    let domain = OrientedSquare {
        center: Point::new(0.5, 0.5),
        side: 1.0,
        angle: normal.y.atan2(normal.x),
    };
    let cells = strip_cells(n, vol_lambda, h, a, b, &c_n)
        .into_iter()
        .map(|(verts, value)| {
            let poly = ConvexPolygon::new(verts.iter().map(|y| domain.from_unit(y)).collect())
                .expect("strip cells have positive area");
            Cell::new(poly, value)
        })
        .collect();
    let field = PiecewiseConstantField {
        domain,
        exterior_value: DVector::zeros(d),
        cells,
    };
    Ok(LemmaPattern { field, c_n, normal, n })
}

/// The six cells of each strip in lamination-frame coordinates.
fn strip_cells(
    n: usize,
    lambda: f64,
    h: f64,
    a: &DVector<f64>,
    b: &DVector<f64>,
    c: &DVector<f64>,
) -> Vec<(Vec<Point>, DVector<f64>)> {
    let p = Point::new;
    let nf = n as f64;
    let minus_c = -c;
    let mut out = Vec::with_capacity(6 * n);
    for k in 0..n {
        let x0 = k as f64 / nf;
        let xm = (k as f64 + lambda) / nf;
        let x1 = (k + 1) as f64 / nf;
        out.push((vec![p(x0, 0.0), p(xm, h), p(xm, 1.0 - h), p(x0, 1.0)], a.clone()));
        out.push((vec![p(x0, 0.0), p(xm, 0.0), p(xm, h)], minus_c.clone()));
        out.push((vec![p(x0, 1.0), p(xm, 1.0 - h), p(xm, 1.0)], c.clone()));
        out.push((vec![p(xm, h), p(x1, 0.0), p(x1, 1.0), p(xm, 1.0 - h)], b.clone()));
        out.push((vec![p(xm, 0.0), p(x1, 0.0), p(xm, h)], minus_c.clone()));
        out.push((vec![p(xm, 1.0 - h), p(x1, 1.0), p(xm, 1.0)], c.clone()));
    }
    out
}

/// Field-only form of [`lemma1_pattern`].
pub fn lemma1_construct(op: &Operator, a: &DVector<f64>, b: &DVector<f64>, vol_lambda: f64, n: usize) -> Result<PiecewiseConstantField> {
    lemma1_pattern(op, a, b, vol_lambda, n).map(|p| p.field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::interfaces::interfaces;
    use crate::operator::builtin;
    use approx::assert_abs_diff_eq;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn cn_for_div2() {
        let op = builtin("div2").unwrap();
        let c1 = solve_cn(&op, &v(&[0.0, 1.0]), 1).unwrap();
        assert_abs_diff_eq!((c1 - v(&[1.0, 0.0])).norm(), 0.0, epsilon = 1e-14);
        let c100 = solve_cn(&op, &v(&[0.0, 1.0]), 100).unwrap();
        assert_abs_diff_eq!((c100 - v(&[0.1, 0.0])).norm(), 0.0, epsilon = 1e-14);
        assert_eq!(solve_cn(&op, &v(&[0.0, 0.0]), 7).unwrap(), v(&[0.0, 0.0]));
    }

    #[test]
    fn cn_for_curl() {
        let op = builtin("curl2-m1").unwrap();
        let c1 = solve_cn(&op, &v(&[1.0, 0.0]), 1).unwrap();
        assert_abs_diff_eq!((c1 - v(&[0.0, -1.0])).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn cn_requires_a_in_kernel() {
        let op = builtin("div2").unwrap();
        assert!(matches!(solve_cn(&op, &v(&[1.0, 0.0]), 4), Err(Error::RotateFirst(_))));
        let m3 = builtin("maxwell3").unwrap();
        assert!(solve_cn(&m3, &DVector::zeros(6), 4).is_err());
    }

    #[test]
    fn div2_pattern_areas() {
        let op = builtin("div2").unwrap();
        for (n, fa) in [(4usize, 0.375), (100, 0.475)] {
            let p = lemma1_pattern(&op, &v(&[0.0, 1.0]), &v(&[0.0, -1.0]), 0.5, n).unwrap();
            let f = p.field.area_fractions(&[v(&[0.0, 1.0]), v(&[0.0, -1.0])], 1e-12);
            assert_abs_diff_eq!(f[0], fa, epsilon = 1e-12);
            assert_abs_diff_eq!(f[1], fa, epsilon = 1e-12);
            assert_abs_diff_eq!(p.c_n.norm(), 1.0 / (n as f64).sqrt(), epsilon = 1e-14);
            assert_abs_diff_eq!(p.field.mean_value().norm(), 0.0, epsilon = 1e-14);
            assert_eq!(p.field.cells.len(), 6 * n);
        }
    }

    #[test]
    fn interface_count_matches_construction() {
        let op = builtin("div2").unwrap();
        let p = lemma1_pattern(&op, &v(&[0.0, 1.0]), &v(&[0.0, -1.0]), 0.5, 4).unwrap();
        assert_eq!(interfaces(&p.field).len(), 12 * 4 + 1);
    }

    #[test]
    fn degenerate_inputs() {
        let op = builtin("div2").unwrap();
        let z = v(&[0.0, 0.0]);
        let f = lemma1_construct(&op, &z, &z, 0.5, 4).unwrap();
        assert_eq!(f.cells.len(), 1);
        assert_eq!(f.cells[0].value, z);
        assert!(lemma1_construct(&op, &v(&[0.0, 1.0]), &v(&[0.0, 1.0]), 0.5, 4).is_err());
        let sys = builtin("sys4").unwrap();
        // (1,0,0,0) - (-1,0,0,0) = (2,0,0,0) is in the cone; (1,1,1,1) is not.
        assert!(lemma1_construct(&sys, &v(&[1.0, 0.0, 0.0, 0.0]), &v(&[-1.0, 0.0, 0.0, 0.0]), 0.5, 4).is_ok());
        assert!(matches!(
            lemma1_construct(&sys, &v(&[0.5, 0.5, 0.5, 0.5]), &v(&[-0.5, -0.5, -0.5, -0.5]), 0.5, 4),
            Err(Error::Precondition(_))
        ));
    }
}
