//! Zeros of a level-set function along a line through a sublevel point.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// First probe distance from `xi` on each side.
const FIRST_STEP: f64 = 1e-2;
/// Bracket expansions before coercivity is declared violated.
const MAX_EXPANSIONS: usize = 200;
/// Bisection stops once the bracket is this short (absolute in `t`).
const T_TOL: f64 = 1e-12;

/// Finds `t1 < 0 < t2` with `F(xi + t direction) < 0` on `(t1, t2)` and
/// `F = 0` at both ends, by geometric bracket expansion and bisection.
pub fn find_roots_along_cone<F>(f: F, xi: &DVector<f64>, direction: &DVector<f64>, bracket_growth: f64, tol_root: f64) -> Result<(f64, f64)>
where
    F: Fn(&DVector<f64>) -> f64,
{
    if xi.len() != direction.len() {
        return Err(Error::Dimension("xi and direction differ in length".into()));
    }
    if !(bracket_growth > 1.0) {
        return Err(Error::Input(format!("bracket growth {bracket_growth} must exceed 1")));
    }
    let dn = direction.norm();
    if dn == 0.0 {
        return Err(Error::Input("direction is zero".into()));
    }
    let dir = direction / dn;
    let f0 = f(xi);
    if !(f0 < 0.0) {
        return Err(Error::Precondition(format!("F(xi) = {f0} is not negative")));
    }
    let g = |t: f64| f(&(xi + &dir * t));
    let t1 = root_on_side(&g, -1.0, bracket_growth, tol_root)?;
    let t2 = root_on_side(&g, 1.0, bracket_growth, tol_root)?;
    Ok((t1 / dn, t2 / dn))
}

fn root_on_side(g: &impl Fn(f64) -> f64, sign: f64, growth: f64, tol_root: f64) -> Result<f64> {
    let mut inner = 0.0;
    let mut step = FIRST_STEP;
    let mut outer = None;
    for _ in 0..MAX_EXPANSIONS {
        let t = sign * step;
        let v = g(t);
        if v.is_nan() {
            return Err(Error::Input(format!("F is NaN at t = {t}")));
        }
        if v >= 0.0 {
            outer = Some(t);
            break;
        }
        inner = t;
        step *= growth;
    }
    let Some(mut hi) = outer else {
        return Err(Error::CoercivityViolated(step));
    };
    let mut lo = inner;
    while (hi - lo).abs() > T_TOL * (1.0 + lo.abs()) {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Report whichever end is closer to the zero set.
    let t = if g(hi).abs() <= g(lo).abs() { hi } else { lo };
    let residual = g(t).abs();
    if residual > tol_root {
        return Err(Error::Precondition(format!(
            "F has no zero near t = {t} (|F| = {residual:.3e}); is it continuous?"
        )));
    }
    Ok(t)
}
