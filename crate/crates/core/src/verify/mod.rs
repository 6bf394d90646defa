//! Numerical certificates for piecewise-constant fields: jump conditions,
//! distributional residuals, weak-* moment gaps, distance and energy
//! integrals.

mod quad;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::polygon::Aabb;
use crate::geometry::{interfaces, ConvexPolygon, Interface, OrientedSquare, PiecewiseConstantField, Point};
use crate::hull::{hull_member, HullParams};
use crate::laminate::{InclusionProblem, Target};
use crate::operator::Operator;
use crate::par;

pub use quad::{fine_triangles, refine_triangles, triangle_distance, ThinRules, TriangleRule};

pub const DEFAULT_QUAD_ORDER: usize = 8;
/// Order doubling is only flagged above this absolute change.
pub const DOUBLING_FLOOR: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TestFunction {
    /// `exp(1 - 1/(1 - |x-c|^2/r^2))` inside the ball; `component` restricts
    /// the residual to one equation (all when `None`).
    Bump {
        center: [f64; 2],
        radius: f64,
        component: Option<usize>,
    },
    /// `x1^p x2^q`.
    Monomial { exponents: [u32; 2] },
}

impl TestFunction {
    pub fn bump(center: Point, radius: f64) -> Self {
        Self::Bump {
            center: [center.x, center.y],
            radius,
            component: None,
        }
    }

    pub fn monomial(p: u32, q: u32) -> Self {
        Self::Monomial { exponents: [p, q] }
    }

    /// `{1, x1, x2, x1 x2}`.
    pub fn moment_family() -> Vec<Self> {
        vec![Self::monomial(0, 0), Self::monomial(1, 0), Self::monomial(0, 1), Self::monomial(1, 1)]
    }

    pub fn value(&self, x: &Point) -> f64 {
        match *self {
            Self::Bump { center, radius, .. } => {
                let s = (x - Point::from(center)).norm_squared() / (radius * radius);
                if s >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - s)).exp()
                }
            }
            Self::Monomial { exponents: [p, q] } => x.x.powi(p as i32) * x.y.powi(q as i32),
        }
    }

    pub fn gradient(&self, x: &Point) -> Point {
        match *self {
            Self::Bump { center, radius, .. } => {
                let dx = x - Point::from(center);
                let r2 = radius * radius;
                let s = dx.norm_squared() / r2;
                if s >= 1.0 {
                    return Point::zeros();
                }
                let phi = (1.0 - 1.0 / (1.0 - s)).exp();
                dx * (-2.0 * phi / (r2 * (1.0 - s) * (1.0 - s)))
            }
            Self::Monomial { exponents: [p, q] } => {
                let dp = if p == 0 { 0.0 } else { p as f64 * x.x.powi(p as i32 - 1) * x.y.powi(q as i32) };
                let dq = if q == 0 { 0.0 } else { q as f64 * x.x.powi(p as i32) * x.y.powi(q as i32 - 1) };
                Point::new(dp, dq)
            }
        }
    }

    pub fn support(&self) -> Option<Aabb> {
        match *self {
            Self::Bump { center, radius, .. } => {
                let c = Point::from(center);
                let r = Point::new(radius, radius);
                Some(Aabb { min: c - r, max: c + r })
            }
            Self::Monomial { .. } => None,
        }
    }
}

/// `count` bumps with radii in `[0.08, 0.25]·side`, supported strictly
/// inside `domain`.
pub fn seeded_bumps(domain: &OrientedSquare, count: usize, seed: u64) -> Vec<TestFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r = rng.random_range(0.08..0.25);
            let margin = r * 1.02;
            let y = Point::new(rng.random_range(margin..1.0 - margin), rng.random_range(margin..1.0 - margin));
            TestFunction::bump(domain.from_unit(&y), r * domain.side)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct JumpReport {
    pub max_violation: f64,
    pub interface_count: usize,
    /// Interfaces above the tolerance, as `(start, end, violation)`.
    pub offending: Vec<([f64; 2], [f64; 2], f64)>,
    pub passed: bool,
}

/// `max |A(nu)(u+ - u-)|` over all interfaces, domain boundary included.
pub fn check_jumps(field: &PiecewiseConstantField, op: &Operator, tol: f64) -> Result<JumpReport> {
    check_dims(field, op)?;
    let list = interfaces(field);
    let violations = par::map(&list, |it: &Interface| {
        let jump = it.value_plus(field) - it.value_minus(field);
        (op.jump_matrix(&jump) * nalgebra::DVector::from_column_slice(&[it.normal.x, it.normal.y])).norm()
    });
    let max_violation = violations.iter().copied().fold(0.0, f64::max);
    let offending = list
        .iter()
        .zip(&violations)
        .filter(|(_, &v)| v > tol)
        .map(|(it, &v)| ([it.start.x, it.start.y], [it.end.x, it.end.y], v))
        .collect();
    Ok(JumpReport {
        max_violation,
        interface_count: list.len(),
        offending,
        passed: max_violation <= tol,
    })
}

fn check_dims(field: &PiecewiseConstantField, op: &Operator) -> Result<()> {
    if op.n_space() != 2 {
        return Err(Error::Dimension("fields live in the plane; operator must have N = 2".into()));
    }
    if field.dim() != op.d_state() {
        return Err(Error::Dimension(format!("field values have length {}, operator expects {}", field.dim(), op.d_state())));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    /// Residuals at the doubled order.
    pub max_residual: f64,
    pub per_test: Vec<f64>,
    /// Largest change between the base and the doubled order.
    pub doubling_estimate: f64,
    pub order_too_low: bool,
    pub quad_order: usize,
}

/// Largest piece for quadrature of a bump gradient over `t`: a third of
/// the radius where the bump is tame (`s <= RIM_S` on all of `t`), a
/// seventh near the rim where its derivatives grow; pieces missing the
/// support are dropped.
fn bump_piece_size(test: &TestFunction, t: &[Point; 3]) -> Option<f64> {
    let TestFunction::Bump { center, radius, .. } = *test else {
        return Some(f64::INFINITY);
    };
    let c = Point::new(center[0], center[1]);
    if triangle_distance(t, &c) >= radius {
        return None;
    }
    let s_far = t.iter().map(|v| (v - c).norm_squared()).fold(0.0, f64::max) / (radius * radius);
    Some(if s_far <= RIM_S { radius / RIM_SPLIT[0] } else { radius / RIM_SPLIT[1] })
}

const RIM_S: f64 = 0.5;
const RIM_SPLIT: [f64; 2] = [3.0, 7.0];

/// `int_cell grad(phi)` for one cell at orders `q` and `2q`.
fn cell_gradient_integrals(poly: &ConvexPolygon, test: &TestFunction, support: &Aabb, rules: &[ThinRules; 2]) -> [[f64; 2]; 2] {
    let b = poly.bbox();
    if !b.overlaps(support, 0.0) {
        return [[0.0; 2]; 2];
    }
    let corners = [
        support.min,
        Point::new(support.max.x, support.min.y),
        support.max,
        Point::new(support.min.x, support.max.y),
    ];
    if corners.iter().all(|c| poly.contains(c, 0.0)) {
        // whole support inside the cell: the integral of a gradient vanishes
        return [[0.0; 2]; 2];
    }
    let square = ConvexPolygon::new(corners.to_vec()).expect("bump box");
    let Some(clip) = poly.intersect(&square) else {
        return [[0.0; 2]; 2];
    };
    let mut out = [[0.0; 2]; 2];
    for t in refine_triangles(&clip, |t| bump_piece_size(test, t)) {
        for (k, rule) in rules.iter().enumerate() {
            rule.integrate_into(&t, &mut out[k], &mut |x, o| {
                let g = test.gradient(x);
                o[0] = g.x;
                o[1] = g.y;
            });
        }
    }
    out
}

/// `max |<A u, phi>|` with `<A u, phi> = - sum_i int (A_i u) d_i phi`, over
/// bump tests and equation components.
pub fn weak_residual(field: &PiecewiseConstantField, op: &Operator, tests: &[TestFunction], quad_order: usize) -> Result<ResidualReport> {
    check_dims(field, op)?;
    let rules = [ThinRules::new(quad_order), ThinRules::new(2 * quad_order.max(1))];
    let m = op.m_eq();
    let mut per_test = Vec::with_capacity(tests.len());
    let mut doubling: f64 = 0.0;
    for test in tests {
        let TestFunction::Bump { component, .. } = *test else {
            return Err(Error::Input("weak_residual takes bump tests".into()));
        };
        if let Some(k) = component {
            if k >= m {
                return Err(Error::Input(format!("component {k} out of range for m = {m}")));
            }
        }
        let support = test.support().unwrap();
        let grads = par::map(&field.cells, |c| cell_gradient_integrals(&c.polygon, test, &support, &rules));
        let mut res = [DVector::<f64>::zeros(m), DVector::<f64>::zeros(m)];
        for (c, g) in field.cells.iter().zip(&grads) {
            for k in 0..2 {
                if g[k] == [0.0, 0.0] {
                    continue;
                }
                for i in 0..2 {
                    res[k] -= op.matrix(i) * &c.value * g[k][i];
                }
            }
        }
        let pick = |v: &DVector<f64>| match component {
            Some(k) => v[k].abs(),
            None => v.amax(),
        };
        let r = pick(&res[1]);
        doubling = doubling.max(pick(&(&res[1] - &res[0])));
        per_test.push(r);
    }
    let max_residual = per_test.iter().copied().fold(0.0, f64::max);
    Ok(ResidualReport {
        max_residual,
        per_test,
        doubling_estimate: doubling,
        order_too_low: doubling > DOUBLING_FLOOR && doubling > 0.1 * max_residual,
        quad_order,
    })
}

/// `int_cell g` for every cell.
fn cell_moments(field: &PiecewiseConstantField, test: &TestFunction) -> Vec<f64> {
    let order = match *test {
        TestFunction::Monomial { exponents: [p, q] } => (p + q) as usize / 2 + 2,
        _ => 2 * DEFAULT_QUAD_ORDER,
    };
    let rule = TriangleRule::cached(order);
    par::map(&field.cells, |c| {
        let mut out = [0.0];
        for t in c.polygon.triangles() {
            rule.integrate_into(&t, &mut out, &mut |x, o| o[0] = test.value(x));
        }
        out[0]
    })
}

/// For each field, `max over tests and components |int (u - xi) g|`.
pub fn weak_star_gap(fields: &[PiecewiseConstantField], xi: &DVector<f64>, tests: &[TestFunction]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(fields.len());
    for f in fields {
        if f.dim() != xi.len() {
            return Err(Error::Dimension("xi and field values differ in length".into()));
        }
        if let Some(first) = fields.first() {
            if f.domain != first.domain {
                return Err(Error::Input("weak_star_gap needs a common domain".into()));
            }
        }
        let mut gap: f64 = 0.0;
        for t in tests {
            let moments = cell_moments(f, t);
            let mut acc = DVector::<f64>::zeros(xi.len());
            for (c, w) in f.cells.iter().zip(moments) {
                acc += (&c.value - xi) * w;
            }
            gap = gap.max(acc.amax());
        }
        out.push(gap);
    }
    Ok(out)
}

/// `sum area(cell) dist(value, E)`: exact for point targets, the problem's
/// distance proxy for level sets.
pub fn dist_integral(field: &PiecewiseConstantField, problem: &InclusionProblem) -> f64 {
    let parts = par::map(&field.cells, |c| c.polygon.area() * problem.dist_proxy(&c.value));
    parts.iter().sum()
}

pub fn energy(field: &PiecewiseConstantField, f: impl Fn(&DVector<f64>) -> f64 + Sync) -> f64 {
    let parts = par::map(&field.cells, |c| c.polygon.area() * f(&c.value));
    parts.iter().sum()
}

#[derive(Debug, Clone, Serialize)]
pub struct LscReport {
    pub energies: Vec<f64>,
    /// `area(domain) F(xi)`.
    pub baseline: f64,
    pub tail_min: f64,
    pub passed: bool,
}

/// Checks `min over the second half of the sequence of energy >= baseline - tol`.
pub fn lsc_smoke(
    fields: &[PiecewiseConstantField],
    f: impl Fn(&DVector<f64>) -> f64 + Sync,
    xi: &DVector<f64>,
    tol: f64,
) -> Result<LscReport> {
    let Some(first) = fields.first() else {
        return Err(Error::Input("empty field sequence".into()));
    };
    let baseline = first.domain_area() * f(xi);
    let energies: Vec<f64> = fields.iter().map(|u| energy(u, &f)).collect();
    let tail_min = energies[energies.len() / 2..].iter().copied().fold(f64::INFINITY, f64::min);
    Ok(LscReport {
        passed: tail_min >= baseline - tol,
        energies,
        baseline,
        tail_min,
    })
}

/// L1 distance between two fields on the same domain (cell overlay with a
/// bucket grid).
pub fn l1_distance(a: &PiecewiseConstantField, b: &PiecewiseConstantField) -> Result<f64> {
    if a.domain != b.domain || a.dim() != b.dim() {
        return Err(Error::Input("l1_distance needs fields on the same domain and state space".into()));
    }
    let boxes: Vec<Aabb> = b.cells.iter().map(|c| c.polygon.bbox()).collect();
    let world = Aabb::of(&a.domain.corners());
    let g = ((b.cells.len() as f64).sqrt().ceil() as usize).clamp(1, 2048);
    let (w, h) = (world.width() / g as f64, world.height() / g as f64);
    let cell_range = |bb: &Aabb| {
        let ix = |x: f64| (((x - world.min.x) / w).floor().max(0.0) as usize).min(g - 1);
        let iy = |y: f64| (((y - world.min.y) / h).floor().max(0.0) as usize).min(g - 1);
        (ix(bb.min.x), ix(bb.max.x), iy(bb.min.y), iy(bb.max.y))
    };
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); g * g];
    for (j, bb) in boxes.iter().enumerate() {
        let (x0, x1, y0, y1) = cell_range(bb);
        for ix in x0..=x1 {
            for iy in y0..=y1 {
                buckets[iy * g + ix].push(j);
            }
        }
    }
    let parts = par::map(&a.cells, |ca| {
        let bb = ca.polygon.bbox();
        let (x0, x1, y0, y1) = cell_range(&bb);
        let mut cand: Vec<usize> = Vec::new();
        for ix in x0..=x1 {
            for iy in y0..=y1 {
                cand.extend(&buckets[iy * g + ix]);
            }
        }
        cand.sort_unstable();
        cand.dedup();
        let mut acc = 0.0;
        for j in cand {
            let cb = &b.cells[j];
            let diff = (&ca.value - &cb.value).norm();
            if diff == 0.0 || !bb.overlaps(&boxes[j], 0.0) {
                continue;
            }
            if let Some(p) = ca.polygon.intersect(&cb.polygon) {
                acc += p.area() * diff;
            }
        }
        acc
    });
    Ok(parts.iter().sum())
}

#[derive(Debug, Clone)]
pub struct CertificateOptions {
    pub moment_tests: Vec<TestFunction>,
    /// Slack for the monotonicity checks.
    pub trend_slack: f64,
    pub tol_exterior: f64,
    pub tol_jump: f64,
    pub tol_residual: f64,
    pub bump_count: usize,
    pub seed: u64,
    pub quad_order: usize,
    /// Depth and parameters of the hull membership fallback (point targets).
    pub hull_depth: usize,
    pub hull: HullParams,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        Self {
            moment_tests: TestFunction::moment_family(),
            trend_slack: 1e-10,
            tol_exterior: 1e-12,
            tol_jump: 1e-9,
            tol_residual: 1e-6,
            bump_count: 20,
            seed: 0,
            quad_order: DEFAULT_QUAD_ORDER,
            hull_depth: 4,
            hull: HullParams::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Condition {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub conditions: Vec<Condition>,
    pub gaps: Vec<f64>,
    pub dists: Vec<f64>,
    pub max_jump: f64,
    pub max_residual: f64,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.conditions.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }
}

fn non_increasing(xs: &[f64], slack: f64) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0] + slack)
}

/// The relaxation conditions on a finite sequence: moment gaps decrease,
/// the exterior datum is `xi`, every field is A-free, every value lies in
/// `E` or is certified interior, and the distance integral decreases.
pub fn relaxation_certificate(
    fields: &[PiecewiseConstantField],
    problem: &InclusionProblem,
    xi: &DVector<f64>,
    options: &CertificateOptions,
) -> Result<CertificateReport> {
    if fields.is_empty() {
        return Err(Error::Input("empty field sequence".into()));
    }
    let slack = options.trend_slack;
    let gaps = weak_star_gap(fields, xi, &options.moment_tests)?;
    let mut conditions = vec![Condition {
        name: "weak_star_gap_decreasing",
        passed: non_increasing(&gaps, slack),
        detail: format!("gaps {gaps:?}"),
    }];

    let bad_exterior: Vec<usize> = fields
        .iter()
        .enumerate()
        .filter(|(_, f)| (&f.exterior_value - xi).amax() > options.tol_exterior)
        .map(|(i, _)| i)
        .collect();
    conditions.push(Condition {
        name: "exterior_datum",
        passed: bad_exterior.is_empty(),
        detail: if bad_exterior.is_empty() {
            "exterior value equals xi for every field".into()
        } else {
            format!("fields {bad_exterior:?} have a different exterior value")
        },
    });

    let mut max_jump: f64 = 0.0;
    let mut max_residual: f64 = 0.0;
    let mut low_order = false;
    for f in fields {
        max_jump = max_jump.max(check_jumps(f, &problem.op, options.tol_jump)?.max_violation);
        let bumps = seeded_bumps(&f.domain, options.bump_count, options.seed);
        let r = weak_residual(f, &problem.op, &bumps, options.quad_order)?;
        max_residual = max_residual.max(r.max_residual);
        low_order |= r.order_too_low;
    }
    conditions.push(Condition {
        name: "a_free",
        passed: max_jump <= options.tol_jump && max_residual <= options.tol_residual,
        detail: format!(
            "max jump {max_jump:.3e} (tol {:.1e}), max residual {max_residual:.3e} (tol {:.1e}){}",
            options.tol_jump,
            options.tol_residual,
            if low_order { ", quadrature order flagged low" } else { "" }
        ),
    });

    let mut outside = 0usize;
    let mut checked = 0usize;
    for f in fields {
        let values: Vec<DVector<f64>> = f.value_histogram().into_iter().map(|(v, _)| v).collect();
        checked += values.len();
        let ok = par::map(&values, |v| {
            if problem.on_target(v) || problem.strictly_inside(v) {
                return Ok(true);
            }
            match &problem.target {
                Target::Points(e) => hull_member(v, e, &problem.op, options.hull_depth, &options.hull),
                Target::LevelSets(_) => Ok(false),
            }
        });
        for r in ok {
            if !r? {
                outside += 1;
            }
        }
    }
    conditions.push(Condition {
        name: "values_admissible",
        passed: outside == 0,
        detail: format!("{outside} of {checked} distinct values neither in E nor certified interior"),
    });

    let dists: Vec<f64> = fields.iter().map(|f| dist_integral(f, problem)).collect();
    let first = dists[0];
    let last = *dists.last().unwrap();
    conditions.push(Condition {
        name: "dist_trend",
        passed: non_increasing(&dists, slack) && (dists.len() == 1 || last < first || first <= slack),
        detail: format!("dist integrals {dists:?}"),
    });

    Ok(CertificateReport {
        conditions,
        gaps,
        dists,
        max_jump,
        max_residual,
    })
}
