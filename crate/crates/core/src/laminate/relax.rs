//! One relaxation step: split a sublevel point along the widest cone chord
//! and realise the split by a lemma pattern.

use nalgebra::DVector;

use super::lemma::{lemma1_pattern, LemmaPattern};
use super::problem::{InclusionProblem, LaminateStep, Target};
use super::roots::find_roots_along_cone;
use crate::error::{Error, Result};
use crate::geometry::field::PiecewiseConstantField;
use crate::operator::{cone_sample, ConeBasis, DEFAULT_TOL_CONE};

pub const DEFAULT_BRACKET_GROWTH: f64 = 2.0;
/// Largest `n` tried while doubling towards interiority.
pub const N_LIMIT: usize = 1 << 20;

/// Direction set and root-finding settings shared by all steps of a solve.
#[derive(Debug, Clone)]
pub struct Relaxer {
    pub directions: Vec<ConeBasis>,
    pub bracket_growth: f64,
}

/// A realised split: the pattern is centred at 0 (exterior value 0) and is
/// used by shifting it by `xi`.
#[derive(Debug, Clone)]
pub struct Plan {
    pub step: LaminateStep,
    pub pattern: LemmaPattern,
}

impl Relaxer {
    pub fn new(problem: &InclusionProblem, dir_count: usize, seed: u64) -> Result<Self> {
        Ok(Self {
            directions: cone_sample(&problem.op, dir_count, seed, DEFAULT_TOL_CONE)?,
            bracket_growth: DEFAULT_BRACKET_GROWTH,
        })
    }

    /// Widest chord of the sublevel set through `xi` among the sampled
    /// directions; ties go to the earlier direction.
    pub fn split(&self, problem: &InclusionProblem, xi: &DVector<f64>) -> Result<LaminateStep> {
        if !matches!(problem.target, Target::LevelSets(_)) {
            return Err(Error::Precondition("relaxation steps need a level-set target".into()));
        }
        let fx = problem.f(xi);
        if !(fx < -problem.tol_zero) {
            return Err(Error::Precondition(format!(
                "F(xi) = {fx:.3e} is not below -tol_zero = {:.3e}",
                -problem.tol_zero
            )));
        }
        let tol_root = problem.tol_zero.max(1e-9);
        let mut best: Option<(f64, f64, &ConeBasis)> = None;
        for dir in &self.directions {
            let Ok((t1, t2)) = find_roots_along_cone(|x| problem.f(x), xi, &dir.lambda, self.bracket_growth, tol_root) else {
                continue;
            };
            if best.is_none_or(|(b1, b2, _)| t2 - t1 > b2 - b1) {
                best = Some((t1, t2, dir));
            }
        }
        let (mut t1, mut t2, dir) = best.ok_or(Error::NotInterior)?;
        let mut lam = &dir.lambda / dir.lambda.norm();
        // The boundary layer occupies eta / sqrt(n) of the square, so the
        // state with the smaller volume fraction plays the role of `a`.
        if t2 / (t2 - t1) > 0.5 {
            lam.neg_mut();
            (t1, t2) = (-t2, -t1);
        }
        let eta = t2 / (t2 - t1);
        Ok(LaminateStep {
            a: xi + &lam * t1,
            b: xi + &lam * t2,
            vol_lambda: eta,
            direction: ConeBasis {
                lambda: lam.clone(),
                ..dir.clone()
            },
            t1,
            t2,
            eta,
        })
    }

    /// Builds the pattern for `step` at `xi`, doubling `n` until the
    /// boundary-layer values `xi +- c_n` are strictly inside the sublevel set.
    pub fn realize(&self, problem: &InclusionProblem, xi: &DVector<f64>, step: LaminateStep, n: usize) -> Result<Plan> {
        let a = &step.a - xi;
        let b = &step.b - xi;
        let mut n = n.max(2);
        while (n as f64) < 4.0 * step.eta * step.eta {
            n *= 2;
        }
        loop {
            let pattern = lemma1_pattern(&problem.op, &a, &b, step.eta, n)?;
            let plus = xi + &pattern.c_n;
            let minus = xi - &pattern.c_n;
            if problem.strictly_inside(&plus) && problem.strictly_inside(&minus) {
                return Ok(Plan { step, pattern });
            }
            if n >= N_LIMIT {
                return Err(Error::NotInterior);
            }
            n *= 2;
        }
    }

    pub fn plan(&self, problem: &InclusionProblem, xi: &DVector<f64>, n: usize) -> Result<Plan> {
        let step = self.split(problem, xi)?;
        self.realize(problem, xi, step, n)
    }
}

/// Samples `dir_count` cone directions from `seed`, splits `xi` along the
/// widest one and returns the pattern on the unit square shifted by `xi`.
pub fn relaxation_step(
    problem: &InclusionProblem,
    xi: &DVector<f64>,
    n: usize,
    dir_count: usize,
    seed: u64,
) -> Result<(PiecewiseConstantField, LaminateStep)> {
    let relaxer = Relaxer::new(problem, dir_count, seed)?;
    let plan = relaxer.plan(problem, xi, n)?;
    Ok((plan.pattern.field.shifted(xi), plan.step))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{builtin, Operator};
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn circle() -> InclusionProblem {
        InclusionProblem::circle(builtin("div2").unwrap(), v(&[0.5, 0.0])).unwrap()
    }

    fn fixed(op: &Operator, dir: DVector<f64>) -> Relaxer {
        Relaxer {
            directions: vec![crate::operator::v_lambda(op, &dir, DEFAULT_TOL_CONE).unwrap()],
            bracket_growth: 2.0,
        }
    }

    #[test]
    fn circle_split_along_x() {
        let p = circle();
        let r = fixed(&p.op, v(&[1.0, 0.0]));
        let plan = r.plan(&p, &p.xi, 4).unwrap();
        let s = &plan.step;
        assert_abs_diff_eq!((&s.a - v(&[-1.0, 0.0])).norm(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!((&s.b - v(&[1.0, 0.0])).norm(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(s.eta, 0.25, epsilon = 1e-10);
        let bary = &s.a * s.eta + &s.b * (1.0 - s.eta);
        assert_abs_diff_eq!((bary - &p.xi).norm(), 0.0, epsilon = 1e-10);
        // c_1 = (0, 1.5) for a' = (-1.5, 0); n = 4 keeps xi +- c_n inside.
        assert_eq!(plan.pattern.n, 4);
        assert_abs_diff_eq!((&plan.pattern.c_n.abs() - v(&[0.0, 0.75])).norm(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn doubling_until_interior() {
        // Near the boundary the boundary layer has to shrink before xi +- c_n
        // is inside.
        let p = InclusionProblem::circle(builtin("div2").unwrap(), v(&[0.9, 0.0])).unwrap();
        let r = fixed(&p.op, v(&[1.0, 0.0]));
        let plan = r.plan(&p, &p.xi, 2).unwrap();
        let c = &plan.pattern.c_n;
        assert!(p.strictly_inside(&(&p.xi + c)));
        assert!(p.strictly_inside(&(&p.xi - c)));
    }

    #[test]
    fn on_target_is_a_precondition_error() {
        let p = circle();
        let r = Relaxer::new(&p, 4, 1).unwrap();
        assert!(matches!(r.split(&p, &v(&[1.0, 0.0])), Err(Error::Precondition(_))));
    }

    #[test]
    fn centred_split_is_symmetric() {
        let p = InclusionProblem::circle(builtin("div2").unwrap(), v(&[0.0, 0.0])).unwrap();
        let (field, step) = relaxation_step(&p, &p.xi, 4, 8, 3).unwrap();
        assert_abs_diff_eq!(step.eta, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!((&step.a + &step.b).norm(), 0.0, epsilon = 1e-10);
        assert_eq!(field.exterior_value, p.xi);
    }

    #[test]
    fn no_admissible_direction() {
        // Band |x1| <= 1 is not coercive along x2 only.
        let band = InclusionProblem::new(
            builtin("div2").unwrap(),
            Target::LevelSets(vec![super::super::problem::LevelSet::Quadratic {
                q: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
                linear: v(&[0.0, 0.0]),
                constant: -1.0,
            }]),
            v(&[0.0, 0.0]),
            crate::geometry::polygon::OrientedSquare::unit(),
            1e-9,
        )
        .unwrap();
        let r = fixed(&band.op, v(&[0.0, 1.0]));
        assert!(matches!(r.split(&band, &band.xi), Err(Error::NotInterior)));
    }
}
