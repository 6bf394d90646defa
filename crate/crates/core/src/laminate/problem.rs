//! Differential inclusion problems: an operator, a target set given by level
//! sets or by finitely many points, a boundary datum and a domain.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::polygon::OrientedSquare;
use crate::operator::{ConeBasis, Operator};

/// Step for central-difference gradients of level sets.
pub const FD_STEP: f64 = 1e-5;
/// Floor on the gradient norm in the distance proxy.
pub const GRAD_FLOOR: f64 = 1e-6;

pub type LevelFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;

/// A continuous function whose zero set is (part of) the target set.
#[derive(Clone)]
pub enum LevelSet {
    /// `|x - center|^2 - radius^2`, in any dimension.
    Sphere { center: DVector<f64>, radius: f64 },
    /// `(normal . x - offset)^2 - half_width^2`: the slab of the given half width.
    AffineBand { normal: DVector<f64>, offset: f64, half_width: f64 },
    /// `x^T q x + linear . x + constant`.
    Quadratic { q: DMatrix<f64>, linear: DVector<f64>, constant: f64 },
    Custom { name: String, f: LevelFn },
}

impl fmt::Debug for LevelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Sphere { center, radius } => write!(f, "Sphere({:?}, {radius})", center.as_slice()),
            Self::AffineBand { normal, offset, half_width } => {
                write!(f, "AffineBand({:?}, {offset}, {half_width})", normal.as_slice())
            }
            Self::Quadratic { constant, .. } => write!(f, "Quadratic(.., {constant})"),
            Self::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl LevelSet {
    pub fn circle(radius: f64) -> Self {
        Self::Sphere {
            center: DVector::zeros(2),
            radius,
        }
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        match self {
            Self::Sphere { center, radius } => (x - center).norm_squared() - radius * radius,
            Self::AffineBand { normal, offset, half_width } => {
                let s = normal.dot(x) - offset;
                s * s - half_width * half_width
            }
            Self::Quadratic { q, linear, constant } => (x.transpose() * q * x)[0] + linear.dot(x) + constant,
            Self::Custom { f, .. } => f(x),
        }
    }

    /// Dimension the level set expects, when it is fixed by its data.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::Sphere { center, .. } => Some(center.len()),
            Self::AffineBand { normal, .. } => Some(normal.len()),
            Self::Quadratic { linear, .. } => Some(linear.len()),
            Self::Custom { .. } => None,
        }
    }
}

/// Central-difference gradient.
pub fn fd_gradient(f: impl Fn(&DVector<f64>) -> f64, x: &DVector<f64>, h: f64) -> DVector<f64> {
    let mut y = x.clone();
    DVector::from_fn(x.len(), |i, _| {
        let xi = y[i];
        y[i] = xi + h;
        let up = f(&y);
        y[i] = xi - h;
        let down = f(&y);
        y[i] = xi;
        (up - down) / (2.0 * h)
    })
}

#[derive(Debug, Clone)]
pub enum Target {
    /// `E = {F_1 = 0} cap ... cap {F_I = 0}`, handled through `max_i F_i`.
    LevelSets(Vec<LevelSet>),
    /// A finite set `E`.
    Points(Vec<DVector<f64>>),
}

#[derive(Debug, Clone)]
pub struct InclusionProblem {
    pub op: Operator,
    pub target: Target,
    pub xi: DVector<f64>,
    pub domain: OrientedSquare,
    /// `|F| <= tol_zero` counts as being on `E`.
    pub tol_zero: f64,
}

pub const DEFAULT_TOL_ZERO: f64 = 1e-6;

impl InclusionProblem {
    pub fn new(op: Operator, target: Target, xi: DVector<f64>, domain: OrientedSquare, tol_zero: f64) -> Result<Self> {
        let d = op.d_state();
        if xi.len() != d {
            return Err(Error::Dimension(format!("xi has length {}, operator has d = {d}", xi.len())));
        }
        match &target {
            Target::LevelSets(ls) => {
                if ls.is_empty() {
                    return Err(Error::Input("no level sets given".into()));
                }
                if let Some(bad) = ls.iter().filter_map(LevelSet::dim).find(|&k| k != d) {
                    return Err(Error::Dimension(format!("level set has dimension {bad}, expected {d}")));
                }
            }
            Target::Points(p) => {
                if p.is_empty() {
                    return Err(Error::Input("E is empty".into()));
                }
                if p.iter().any(|e| e.len() != d) {
                    return Err(Error::Dimension(format!("points of E must have length {d}")));
                }
            }
        }
        if !(tol_zero >= 0.0) {
            return Err(Error::Input("tol_zero must be non-negative".into()));
        }
        Ok(Self {
            op,
            target,
            xi,
            domain,
            tol_zero,
        })
    }

    /// Unit disk level set `|u|^2 - 1` under `div2` with `u = xi` outside
    /// the unit square.
    pub fn circle(op: Operator, xi: DVector<f64>) -> Result<Self> {
        Self::new(
            op,
            Target::LevelSets(vec![LevelSet::circle(1.0)]),
            xi,
            OrientedSquare::unit(),
            DEFAULT_TOL_ZERO,
        )
    }

    /// Governing function `max_i F_i`; for point targets, the distance to `E`.
    pub fn f(&self, x: &DVector<f64>) -> f64 {
        match &self.target {
            Target::LevelSets(ls) => ls.iter().map(|l| l.eval(x)).fold(f64::NEG_INFINITY, f64::max),
            Target::Points(p) => point_distance(p, x),
        }
    }

    /// Distance to `E`: exact for point sets, `|F| / max(|grad F|, floor)` for
    /// level sets.
    pub fn dist_proxy(&self, x: &DVector<f64>) -> f64 {
        match &self.target {
            Target::Points(p) => point_distance(p, x),
            Target::LevelSets(_) => {
                let v = self.f(x);
                if v.abs() <= self.tol_zero {
                    return 0.0;
                }
                let g = fd_gradient(|y| self.f(y), x, FD_STEP).norm();
                v.abs() / g.max(GRAD_FLOOR)
            }
        }
    }

    /// True when `x` counts as a point of `E`.
    pub fn on_target(&self, x: &DVector<f64>) -> bool {
        match &self.target {
            Target::LevelSets(_) => self.f(x).abs() <= self.tol_zero,
            Target::Points(p) => point_distance(p, x) <= self.tol_zero,
        }
    }

    /// True when `x` lies strictly inside the sublevel set.
    pub fn strictly_inside(&self, x: &DVector<f64>) -> bool {
        matches!(self.target, Target::LevelSets(_)) && self.f(x) < -self.tol_zero
    }
}

pub fn point_distance(points: &[DVector<f64>], x: &DVector<f64>) -> f64 {
    points.iter().map(|p| (p - x).norm()).fold(f64::INFINITY, f64::min)
}

/// One lamination split `xi = eta a + (1 - eta) b` along a cone direction.
#[derive(Debug, Clone)]
pub struct LaminateStep {
    pub a: DVector<f64>,
    pub b: DVector<f64>,
    /// Volume fraction of `a`.
    pub vol_lambda: f64,
    pub direction: ConeBasis,
    pub t1: f64,
    pub t2: f64,
    pub eta: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::builtin;
    use approx::assert_abs_diff_eq;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn circle_distance_proxy() {
        let p = InclusionProblem::circle(builtin("div2").unwrap(), v(&[0.5, 0.0])).unwrap();
        assert_abs_diff_eq!(p.f(&p.xi), -0.75, epsilon = 1e-15);
        // |F| / |grad F| = 0.75 / 1
        assert_abs_diff_eq!(p.dist_proxy(&p.xi), 0.75, epsilon = 1e-8);
        assert_eq!(p.dist_proxy(&v(&[1.0, 0.0])), 0.0);
        assert!(p.on_target(&v(&[0.0, 1.0])));
        assert!(p.strictly_inside(&p.xi));
    }

    #[test]
    fn band_and_quadratic_agree() {
        let band = LevelSet::AffineBand {
            normal: v(&[1.0, 0.0]),
            offset: 0.0,
            half_width: 1.0,
        };
        let quad = LevelSet::Quadratic {
            q: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            linear: v(&[0.0, 0.0]),
            constant: -1.0,
        };
        for x in [v(&[0.3, 2.0]), v(&[-1.5, 0.1])] {
            assert_abs_diff_eq!(band.eval(&x), quad.eval(&x), epsilon = 1e-15);
        }
    }

    #[test]
    fn point_target_distance_is_exact() {
        let p = InclusionProblem::new(
            builtin("div2").unwrap(),
            Target::Points(vec![v(&[1.0, 0.0]), v(&[-1.0, 0.0])]),
            v(&[0.2, 0.0]),
            OrientedSquare::unit(),
            1e-9,
        )
        .unwrap();
        assert_abs_diff_eq!(p.dist_proxy(&v(&[0.2, 0.0])), 0.8, epsilon = 1e-15);
        assert!(p.on_target(&v(&[-1.0, 0.0])));
    }

    #[test]
    fn dimension_checks() {
        let op = builtin("div2").unwrap();
        assert!(InclusionProblem::circle(op.clone(), v(&[0.0, 0.0, 0.0])).is_err());
        let bad = Target::LevelSets(vec![LevelSet::Sphere {
            center: v(&[0.0, 0.0, 0.0]),
            radius: 1.0,
        }]);
        assert!(InclusionProblem::new(op, bad, v(&[0.0, 0.0]), OrientedSquare::unit(), 0.0).is_err());
    }
}
