//! Membership in `Lambda_i co E` with an explicit lamination witness.
//!
//! Depth 0 is proximity to `E`. Depth 1 is tested exactly against every cone
//! segment between points of `E`. Deeper levels search lines through the
//! query: directions towards the points of `E` first, then sampled cone
//! directions; along each line the candidate parameters are the points of
//! `E` on it, its crossings with depth-1 segments, then a uniform grid.

use std::cell::Cell as Counter;

use nalgebra::{DMatrix, DVector};

use super::{check_points, HullParams};
use crate::error::Result;
use crate::operator::{cone_contains, cone_sample, Operator};

/// How a point is obtained from `E` by repeated cone splits. Every node
/// stores the exact point it certifies; children of a split lie on one
/// cone line through it.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// `value` is within the merge radius of `E[target]`.
    Point { value: DVector<f64>, target: usize },
    /// `value = eta * a.value + (1 - eta) * b.value`.
    Split {
        value: DVector<f64>,
        eta: f64,
        a: Box<Witness>,
        b: Box<Witness>,
    },
}

impl Witness {
    pub fn value(&self) -> &DVector<f64> {
        match self {
            Self::Point { value, .. } | Self::Split { value, .. } => value,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Self::Point { .. } => 0,
            Self::Split { a, b, .. } => 1 + a.depth().max(b.depth()),
        }
    }

    /// Leaves with their total volume fractions.
    pub fn leaves(&self) -> Vec<(usize, DVector<f64>, f64)> {
        let mut out = Vec::new();
        self.collect_leaves(1.0, &mut out);
        out
    }

    fn collect_leaves(&self, weight: f64, out: &mut Vec<(usize, DVector<f64>, f64)>) {
        match self {
            Self::Point { value, target } => out.push((*target, value.clone(), weight)),
            Self::Split { eta, a, b, .. } => {
                a.collect_leaves(weight * eta, out);
                b.collect_leaves(weight * (1.0 - eta), out);
            }
        }
    }
}

struct Search<'a> {
    e: &'a [DVector<f64>],
    eps: f64,
    lo: DVector<f64>,
    hi: DVector<f64>,
    /// Cone segments between points of `E`.
    segments: Vec<(usize, usize)>,
    sampled: Vec<DVector<f64>>,
    op: &'a Operator,
    params: &'a HullParams,
}

impl Search<'_> {
    fn in_box(&self, x: &DVector<f64>) -> bool {
        x.iter()
            .enumerate()
            .all(|(i, &v)| v >= self.lo[i] - self.eps && v <= self.hi[i] + self.eps)
    }

    fn nearest(&self, x: &DVector<f64>) -> Option<usize> {
        self.e
            .iter()
            .enumerate()
            .map(|(i, p)| (i, (p - x).norm()))
            .filter(|(_, d)| *d <= self.eps)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }

    fn member(&self, x: &DVector<f64>, depth: usize, evals: &Counter<usize>) -> Option<Witness> {
        let used = evals.get() + 1;
        evals.set(used);
        if used > self.params.max_evals || !self.in_box(x) {
            return None;
        }
        if let Some(target) = self.nearest(x) {
            return Some(Witness::Point { value: x.clone(), target });
        }
        if depth == 0 {
            return None;
        }
        if let Some(w) = self.on_segment(x) {
            return Some(w);
        }
        if depth == 1 {
            return None;
        }
        for dir in self.directions(x) {
            if let Some(w) = self.along(x, &dir, depth, evals) {
                return Some(w);
            }
        }
        None
    }

    /// Shallow witnesses are much cheaper to find, so depths are tried in
    /// increasing order under one shared budget.
    fn deepening(&self, x: &DVector<f64>, depth: usize) -> Option<Witness> {
        let evals = Counter::new(0);
        (0..=depth).find_map(|k| self.member(x, k, &evals))
    }

    fn on_segment(&self, x: &DVector<f64>) -> Option<Witness> {
        for &(i, j) in &self.segments {
            let (e, f) = (&self.e[i], &self.e[j]);
            let d = f - e;
            let s = ((x - e).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
            if (x - (e + &d * s)).norm() <= self.eps {
                let a = x - &d * s;
                let b = x + &d * (1.0 - s);
                return Some(Witness::Split {
                    value: x.clone(),
                    eta: 1.0 - s,
                    a: Box::new(Witness::Point { value: a, target: i }),
                    b: Box::new(Witness::Point { value: b, target: j }),
                });
            }
        }
        None
    }

    fn directions(&self, x: &DVector<f64>) -> Vec<DVector<f64>> {
        let mut out: Vec<DVector<f64>> = Vec::new();
        for p in self.e {
            let d = p - x;
            let n = d.norm();
            if n > self.eps && cone_contains(self.op, &d, self.params.tol_cone).is_ok_and(|m| m.member) {
                out.push(d / n);
            }
        }
        out.extend(self.sampled.iter().cloned());
        out
    }

    /// Parameter range keeping `x + t dir` inside the bounding box of `E`.
    fn t_range(&self, x: &DVector<f64>, dir: &DVector<f64>) -> (f64, f64) {
        let (mut tmin, mut tmax) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..x.len() {
            if dir[i].abs() < 1e-15 {
                continue;
            }
            let t0 = (self.lo[i] - self.eps - x[i]) / dir[i];
            let t1 = (self.hi[i] + self.eps - x[i]) / dir[i];
            tmin = tmin.max(t0.min(t1));
            tmax = tmax.min(t0.max(t1));
        }
        (tmin, tmax)
    }

    fn candidates(&self, x: &DVector<f64>, dir: &DVector<f64>, tmin: f64, tmax: f64) -> Vec<f64> {
        let mut exact = Vec::new();
        for p in self.e {
            let t = (p - x).dot(dir);
            if (x + dir * t - p).norm() <= self.eps {
                exact.push(t);
            }
        }
        for &(i, j) in &self.segments {
            if let Some(t) = line_crossing(x, dir, &self.e[i], &self.e[j], self.eps) {
                exact.push(t);
            }
        }
        let k = self.params.t_search.max(1);
        let mut grid = Vec::with_capacity(2 * k);
        for s in 1..=k {
            let f = s as f64 / k as f64;
            grid.push(tmin * f);
            grid.push(tmax * f);
        }
        exact.extend(grid);
        exact.retain(|t| t.abs() > self.eps && *t >= tmin && *t <= tmax);
        exact
    }

    fn along(&self, x: &DVector<f64>, dir: &DVector<f64>, depth: usize, evals: &Counter<usize>) -> Option<Witness> {
        let (tmin, tmax) = self.t_range(x, dir);
        if !(tmin < 0.0 && tmax > 0.0) {
            return None;
        }
        let cands = self.candidates(x, dir, tmin, tmax);
        let side = |neg: bool| {
            cands
                .iter()
                .filter(|t| (**t < 0.0) == neg)
                .find_map(|&t| self.member(&(x + dir * t), depth - 1, evals).map(|w| (t, w)))
        };
        let (t1, a) = side(true)?;
        let (t2, b) = side(false)?;
        Some(Witness::Split {
            value: x.clone(),
            eta: t2 / (t2 - t1),
            a: Box::new(a),
            b: Box::new(b),
        })
    }
}

/// Parameter `t` where `x + t dir` meets the segment `[e, f]` within `eps`.
fn line_crossing(x: &DVector<f64>, dir: &DVector<f64>, e: &DVector<f64>, f: &DVector<f64>, eps: f64) -> Option<f64> {
    let d = x.len();
    let seg = f - e;
    let mut m = DMatrix::zeros(d, 2);
    m.set_column(0, dir);
    m.set_column(1, &(-&seg));
    let rhs = e - x;
    let svd = m.clone().svd(true, true);
    let s = svd.singular_values;
    if s[1] <= 1e-12 * s[0].max(1e-300) {
        return None;
    }
    let sol = m.svd(true, true).solve(&rhs, 1e-14).ok()?;
    let (t, u) = (sol[0], sol[1]);
    if !(-1e-12..=1.0 + 1e-12).contains(&u) {
        return None;
    }
    let gap = (x + dir * t - (e + &seg * u)).norm();
    (gap <= eps).then_some(t)
}

fn search<'a>(e: &'a [DVector<f64>], op: &'a Operator, params: &'a HullParams) -> Result<Search<'a>> {
    check_points(e, op)?;
    let eps = params.resolved_eps(e);
    let d = op.d_state();
    let lo = DVector::from_fn(d, |i, _| e.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min));
    let hi = DVector::from_fn(d, |i, _| e.iter().map(|p| p[i]).fold(f64::NEG_INFINITY, f64::max));
    let mut segments = Vec::new();
    for i in 0..e.len() {
        for j in i + 1..e.len() {
            let diff = &e[j] - &e[i];
            if diff.norm() > eps && cone_contains(op, &diff, params.tol_cone)?.member {
                segments.push((i, j));
            }
        }
    }
    let sampled = if params.dir_count > 0 {
        cone_sample(op, params.dir_count, params.seed, params.tol_cone)?
            .into_iter()
            .map(|b| &b.lambda / b.lambda.norm())
            .collect()
    } else {
        Vec::new()
    };
    Ok(Search {
        e,
        eps,
        lo,
        hi,
        segments,
        sampled,
        op,
        params,
    })
}

/// A lamination witness for `xi` in `Lambda_depth co E`, if the search finds one.
pub fn hull_witness(xi: &DVector<f64>, e: &[DVector<f64>], op: &Operator, depth: usize, params: &HullParams) -> Result<Option<Witness>> {
    let s = search(e, op, params)?;
    if xi.len() != op.d_state() {
        return Err(crate::error::Error::Dimension(format!("xi has length {}", xi.len())));
    }
    Ok(s.deepening(xi, depth))
}

pub fn hull_member(xi: &DVector<f64>, e: &[DVector<f64>], op: &Operator, depth: usize, params: &HullParams) -> Result<bool> {
    hull_witness(xi, e, op, depth, params).map(|w| w.is_some())
}

/// Batch form that samples directions once.
pub fn hull_member_many(xs: &[DVector<f64>], e: &[DVector<f64>], op: &Operator, depth: usize, params: &HullParams) -> Result<Vec<bool>> {
    let s = search(e, op, params)?;
    Ok(crate::par::map(xs, |x| s.deepening(x, depth).is_some()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::builtin;
    use approx::assert_abs_diff_eq;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn triangle() -> Vec<DVector<f64>> {
        vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0])]
    }

    #[test]
    fn points_of_e_are_members() {
        let op = builtin("div2").unwrap();
        for depth in 0..4 {
            assert!(hull_member(&v(&[1.0, 0.0]), &triangle(), &op, depth, &HullParams::default()).unwrap());
        }
    }

    #[test]
    fn triangle_examples() {
        let op = builtin("div2").unwrap();
        let p = HullParams::default();
        let w = hull_witness(&v(&[0.3, 0.3]), &triangle(), &op, 2, &p).unwrap().unwrap();
        assert!(w.depth() <= 2);
        // leaves reproduce the point as a convex combination
        let mut mean = DVector::zeros(2);
        let mut total = 0.0;
        for (_, value, weight) in w.leaves() {
            mean += value * weight;
            total += weight;
        }
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!((mean - v(&[0.3, 0.3])).norm(), 0.0, epsilon = 1e-12);
        assert!(!hull_member(&v(&[0.6, 0.6]), &triangle(), &op, 4, &p).unwrap());
    }

    #[test]
    fn non_cone_pair_has_no_interior() {
        let op = builtin("sys4").unwrap();
        let e = vec![v(&[0.0, 0.0, 0.0, 0.0]), v(&[1.0, 1.0, 1.0, 1.0])];
        let mid = v(&[0.5, 0.5, 0.5, 0.5]);
        assert!(!hull_member(&mid, &e, &op, 3, &HullParams::default()).unwrap());
    }

    #[test]
    fn crossing_of_lines() {
        let t = line_crossing(&v(&[0.0, 0.5]), &v(&[1.0, 0.0]), &v(&[1.0, 0.0]), &v(&[1.0, 1.0]), 1e-12);
        assert_abs_diff_eq!(t.unwrap(), 1.0, epsilon = 1e-14);
        assert!(line_crossing(&v(&[0.0, 2.0]), &v(&[1.0, 0.0]), &v(&[1.0, 0.0]), &v(&[1.0, 1.0]), 1e-12).is_none());
    }
}
