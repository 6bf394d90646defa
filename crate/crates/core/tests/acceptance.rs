//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//! Reference values come from the closed-form oracles below, never from
//! the library routines under test.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use alam::envelope::{lambda_envelope, GridFunction};
use alam::geometry::{OrientedSquare, PiecewiseConstantField};
use alam::hull::{hull_iterate, hull_member_many, star_shaped_shrink, HullParams};
use alam::laminate::{
    lemma1_pattern, relaxation_sequence, solve_multi_level, solve_one_level, InclusionProblem, MultiLevelOptions, Schedule, Target,
};
use alam::operator::{builtin, cone_contains};
use alam::verify::{
    check_jumps, dist_integral, l1_distance, lsc_smoke, relaxation_certificate, seeded_bumps, weak_residual, weak_star_gap,
    CertificateOptions, TestFunction, DEFAULT_QUAD_ORDER,
};

struct Verdict {
    passed: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Verdict);

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn v(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}

fn gaussian(rng: &mut ChaCha8Rng, d: usize) -> DVector<f64> {
    DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn secs(t: Duration) -> f64 {
    t.as_secs_f64()
}

fn cone_algebra() -> Verdict {
    const TOL: f64 = 1e-9;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut disagree = 0;
    let mut on_cone = 0;
    let mut total = 0;
    for name in ["div2", "curl2-m1", "sys4"] {
        let op = builtin(name).unwrap();
        for k in 0..1000 {
            let lambda = match name {
                // every direction is a rank-one row a * nu for N = 2, m = 1
                "div2" | "curl2-m1" => gaussian(&mut rng, 2),
                _ if k % 2 == 0 => {
                    // lambda_1 lambda_3 + lambda_2 lambda_4 = 0 by construction
                    let (a, b, c): (f64, f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal));
                    let (l1, l2) = (a, b);
                    let l4 = c;
                    v(&[l1, l2, -l2 * l4 / l1, l4])
                }
                _ => gaussian(&mut rng, 4),
            };
            let expected = match name {
                "sys4" => {
                    let q = lambda[0] * lambda[2] + lambda[1] * lambda[3];
                    q.abs() <= TOL * lambda.norm_squared()
                }
                _ => true,
            };
            on_cone += usize::from(expected);
            total += 1;
            if cone_contains(&op, &lambda, TOL).unwrap().member != expected {
                disagree += 1;
            }
        }
    }
    let t = start.elapsed();
    verdict(
        disagree == 0 && t < Duration::from_secs(1),
        format!("{disagree} disagreements on {total} directions ({on_cone} in the cone), {:.3}s", secs(t)),
    )
}

const LEMMA_NS: [usize; 4] = [4, 16, 64, 256];

fn lemma_fields() -> Vec<(usize, PiecewiseConstantField, f64)> {
    let op = builtin("div2").unwrap();
    LEMMA_NS
        .iter()
        .map(|&n| {
            let p = lemma1_pattern(&op, &v(&[0.0, 1.0]), &v(&[0.0, -1.0]), 0.5, n).unwrap();
            (n, p.field, p.c_n.norm())
        })
        .collect()
}

fn lemma_exactness() -> Verdict {
    let start = Instant::now();
    let op = builtin("div2").unwrap();
    let lambda: f64 = 0.5;
    let (a, b) = (v(&[0.0, 1.0]), v(&[0.0, -1.0]));
    let mut ok = true;
    let mut worst_frac: f64 = 0.0;
    let mut scaled = Vec::new();
    let mut worst_jump: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    let mut worst_mean: f64 = 0.0;
    for (n, field, cn) in lemma_fields() {
        let root = (n as f64).sqrt();
        let want_a = lambda - lambda * lambda / root;
        let want_b = (1.0 - lambda) - lambda * (1.0 - lambda) / root;
        let area_of = |target: &DVector<f64>| -> f64 {
            field.cells.iter().filter(|c| (&c.value - target).norm() < 1e-12).map(|c| c.polygon.area()).sum()
        };
        worst_frac = worst_frac.max((area_of(&a) - want_a).abs()).max((area_of(&b) - want_b).abs());
        scaled.push(cn * root);
        worst_jump = worst_jump.max(check_jumps(&field, &op, 1e-9).unwrap().max_violation);
        let bumps = seeded_bumps(&field.domain, 20, 3);
        worst_res = worst_res.max(weak_residual(&field, &op, &bumps, DEFAULT_QUAD_ORDER).unwrap().max_residual);
        let mean = field
            .cells
            .iter()
            .fold(DVector::zeros(2), |s: DVector<f64>, c| s + &c.value * c.polygon.area())
            / field.domain_area();
        worst_mean = worst_mean.max(mean.norm());
    }
    let spread = scaled.iter().map(|s| (s - scaled[0]).abs()).fold(0.0, f64::max);
    ok &= worst_frac <= 1e-8 && spread <= 1e-10 && worst_jump <= 1e-9 && worst_res <= 1e-6 && worst_mean <= 1e-10;
    let t = start.elapsed();
    verdict(
        ok && t < Duration::from_secs(5),
        format!(
            "fraction error {worst_frac:.1e}, |c_n| sqrt(n) spread {spread:.1e}, jump {worst_jump:.1e}, residual {worst_res:.1e}, mean {worst_mean:.1e}, {:.2}s",
            secs(t)
        ),
    )
}

fn weak_star_trend() -> Verdict {
    let fields: Vec<_> = lemma_fields().into_iter().map(|(_, f, _)| f).collect();
    let tests = vec![
        TestFunction::monomial(0, 0),
        TestFunction::monomial(1, 0),
        TestFunction::monomial(0, 1),
        TestFunction::monomial(1, 1),
    ];
    let gaps = weak_star_gap(&fields, &v(&[0.0, 0.0]), &tests).unwrap();
    let monotone = gaps.windows(2).all(|w| w[1] <= w[0]);
    let last = *gaps.last().unwrap();
    verdict(monotone && last <= 0.25 * gaps[0], format!("gaps {:?}", gaps.iter().map(|g| format!("{g:.3e}")).collect::<Vec<_>>()))
}

fn circle_problem() -> InclusionProblem {
    InclusionProblem::circle(builtin("div2").unwrap(), v(&[0.5, 0.0])).unwrap()
}

const FLAGSHIP_TOLS: [f64; 3] = [0.05, 0.045, 0.04];
const FLAGSHIP_LEVELS: usize = 8;

fn flagship() -> Verdict {
    let start = Instant::now();
    let problem = circle_problem();
    let xi = problem.xi.clone();
    let solve = |seed: u64| {
        let schedule = Schedule { seed, ..Default::default() };
        relaxation_sequence(&problem, FLAGSHIP_LEVELS, &FLAGSHIP_TOLS, &schedule).unwrap()
    };
    let seq0 = solve(0);
    let field = &seq0[0].field;
    let dist = dist_integral(field, &problem);
    let max_norm = field.cells.iter().map(|c| c.value.norm()).fold(0.0, f64::max);
    let exterior = (&field.exterior_value - &xi).amax();
    let fields: Vec<_> = seq0.iter().map(|s| s.field.clone()).collect();
    let cert = relaxation_certificate(&fields, &problem, &xi, &CertificateOptions::default()).unwrap();
    let other = solve_one_level(&problem, FLAGSHIP_LEVELS, FLAGSHIP_TOLS[0], &Schedule { seed: 1, ..Default::default() }).unwrap();
    let l1 = l1_distance(field, &other.field).unwrap();
    let t = start.elapsed();
    let ok = dist <= 0.05 && max_norm <= 1.0 + 1e-9 && exterior == 0.0 && cert.passed() && l1 >= 0.1 && t < Duration::from_secs(60);
    verdict(
        ok,
        format!(
            "dist {dist:.4}, max |u| - 1 = {:.1e}, exterior offset {exterior:.1e}, certificate failures {:?}, L1(seed 0, seed 1) {l1:.3}, {} cells, {:.1}s",
            max_norm - 1.0,
            cert.failed(),
            field.cells.len(),
            secs(t)
        ),
    )
}

/// Exact membership in the triangle with vertices `t`, and distance to its boundary.
fn triangle_oracle(t: &[[f64; 2]; 3], p: &[f64; 2]) -> (bool, f64) {
    let mut inside = true;
    let mut dist = f64::INFINITY;
    for i in 0..3 {
        let (a, b) = (t[i], t[(i + 1) % 3]);
        let e = [b[0] - a[0], b[1] - a[1]];
        let w = [p[0] - a[0], p[1] - a[1]];
        let area = t[(i + 2) % 3];
        let side = e[0] * w[1] - e[1] * w[0];
        let other = e[0] * (area[1] - a[1]) - e[1] * (area[0] - a[0]);
        inside &= side * other >= 0.0;
        let len2 = e[0] * e[0] + e[1] * e[1];
        let s = ((w[0] * e[0] + w[1] * e[1]) / len2).clamp(0.0, 1.0);
        dist = dist.min(((w[0] - s * e[0]).powi(2) + (w[1] - s * e[1]).powi(2)).sqrt());
    }
    (inside, dist)
}

fn one_sided(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    a.iter().map(|p| b.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
}

fn hull_vs_convex_hull() -> Verdict {
    let op = builtin("div2").unwrap();
    let tri = [[0.0, 0.0], [1.0, 0.0], [0.3, 0.8]];
    let e: Vec<_> = tri.iter().map(|p| v(p)).collect();
    // A coarse merge radius keeps the depth-3 cloud small; it is a sixth of
    // the tolerance band. Membership queries use the default radius.
    let params = HullParams::default();
    let coarse = HullParams {
        dedup_eps: Some(0.02),
        ..Default::default()
    };
    let band = 2.0 / params.t_grid as f64;
    let cloud = hull_iterate(&e, &op, 3, &coarse).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let samples: Vec<_> = (0..2000)
        .map(|_| {
            let (mut s, mut t): (f64, f64) = (rng.random(), rng.random());
            if s + t > 1.0 {
                (s, t) = (1.0 - s, 1.0 - t);
            }
            &e[0] * (1.0 - s - t) + &e[1] * s + &e[2] * t
        })
        .collect();
    let haus = one_sided(&cloud.points, &samples).max(one_sided(&samples, &cloud.points));
    let queries: Vec<[f64; 2]> = (0..500).map(|_| [rng.random_range(-0.2..1.2), rng.random_range(-0.2..1.0)]).collect();
    let qv: Vec<_> = queries.iter().map(|q| v(q)).collect();
    let answers = hull_member_many(&qv, &e, &op, 3, &params).unwrap();
    let mut wrong = 0;
    let mut outside_band = 0;
    for (q, got) in queries.iter().zip(answers) {
        let (inside, d) = triangle_oracle(&tri, q);
        if got != inside {
            wrong += 1;
            if d > band {
                outside_band += 1;
            }
        }
    }
    let ok = haus <= band && wrong as f64 <= 0.01 * queries.len() as f64 && outside_band == 0;
    verdict(
        ok,
        format!(
            "{} cloud points, Hausdorff {haus:.4} (band {band:.4}), {wrong}/500 membership disagreements, {outside_band} outside the band",
            cloud.points.len()
        ),
    )
}

/// Lower convex hull of `(s_i, h_i)` evaluated at `x` (1-D convexification).
fn convexify_1d(s: &[f64], h: &[f64]) -> impl Fn(f64) -> f64 {
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for (&x, &y) in s.iter().zip(h) {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            if (b.0 - a.0) * (y - a.1) - (b.1 - a.1) * (x - a.0) <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((x, y));
    }
    move |x: f64| {
        let i = hull.partition_point(|p| p.0 <= x).clamp(1, hull.len() - 1);
        let (a, b) = (hull[i - 1], hull[i]);
        a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
    }
}

fn envelope_vs_convexification() -> Verdict {
    let start = Instant::now();
    let op = builtin("div2").unwrap();
    let well = |r2: f64| (r2 - 1.0) * (r2 - 1.0);
    let f = GridFunction::from_fn(vec![-2.0, -2.0], vec![2.0, 2.0], vec![129, 129], |x| well(x.norm_squared())).unwrap();
    let res = lambda_envelope(&f, &op, 200, 8, 1e-6).unwrap();
    let rmax = 8f64.sqrt();
    let s: Vec<f64> = (0..=20_000).map(|i| -rmax + 2.0 * rmax * i as f64 / 20_000.0).collect();
    let h: Vec<f64> = s.iter().map(|r| well(r * r)).collect();
    let conv = convexify_1d(&s, &h);
    let sup = (0..res.grid.len()).map(|i| (res.grid.values[i] - conv(res.grid.node(i).norm())).abs()).fold(0.0, f64::max);
    let worst_increase = res.sweeps.iter().map(|s| s.max_increase).fold(f64::NEG_INFINITY, f64::max);
    let t = start.elapsed();
    verdict(
        sup <= 0.05 && worst_increase <= 0.0,
        format!(
            "sup error {sup:.2e} after {} sweeps (converged {}), largest pointwise increase {worst_increase:.1e}, {:.1}s",
            res.sweeps.len(),
            res.converged,
            secs(t)
        ),
    )
}

fn multi_level() -> Verdict {
    let start = Instant::now();
    let op = builtin("div2").unwrap();
    let e = vec![v(&[-1.0, 0.0]), v(&[1.0, 0.0])];
    let xi0 = v(&[0.0, 0.0]);
    let params = HullParams::default();
    let cloud = hull_iterate(&e, &op, 1, &params).unwrap();
    let problem = InclusionProblem::new(op.clone(), Target::Points(e.clone()), v(&[0.3, 0.0]), OrientedSquare::unit(), 1e-9).unwrap();
    let sol = solve_multi_level(&problem, &cloud, &xi0, 40, 0.05, &MultiLevelOptions::default()).unwrap();
    let dist = dist_integral(&sol.field, &problem);
    let mut worst_shrink: f64 = 0.0;
    let mut shrink_ok = true;
    for delta in [0.5, 0.25, 0.1] {
        let shrunk = star_shaped_shrink(&e, &xi0, delta).unwrap();
        let direct = hull_iterate(&shrunk, &op, 2, &params).unwrap();
        let base = hull_iterate(&e, &op, 2, &params).unwrap();
        let mapped: Vec<_> = base.points.iter().map(|p| &xi0 * delta + p * (1.0 - delta)).collect();
        let h = one_sided(&direct.points, &mapped).max(one_sided(&mapped, &direct.points));
        worst_shrink = worst_shrink.max(h);
        shrink_ok &= h <= direct.dedup_eps;
    }
    verdict(
        sol.converged && dist <= 0.05 && shrink_ok,
        format!(
            "dist {dist:.4} after {} stages, shrink identity Hausdorff {worst_shrink:.1e}, {:.2}s",
            sol.stages.len(),
            secs(start.elapsed())
        ),
    )
}

fn lsc_smoke_test() -> Verdict {
    let problem = circle_problem();
    let schedule = Schedule {
        keep_history: true,
        ..Default::default()
    };
    let sol = solve_one_level(&problem, FLAGSHIP_LEVELS, FLAGSHIP_TOLS[0], &schedule).unwrap();
    let f = |u: &DVector<f64>| u.norm_squared() - 1.0;
    let report = lsc_smoke(&sol.history, f, &problem.xi, 1e-6).unwrap();
    let bounded = report.energies.iter().all(|&e| e >= report.baseline - 1e-6);
    let toward_zero = report.energies.windows(2).all(|w| w[1].abs() <= w[0].abs() + 1e-12);
    let last = *report.energies.last().unwrap();
    verdict(
        bounded && toward_zero && last.abs() < report.baseline.abs(),
        format!(
            "baseline {:.4}, energies {:?}",
            report.baseline,
            report.energies.iter().map(|e| format!("{e:.4}")).collect::<Vec<_>>()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("cone algebra", cone_algebra),
        ("lemma exactness", lemma_exactness),
        ("weak-* trend", weak_star_trend),
        ("flagship circle inclusion", flagship),
        ("hull vs convex hull", hull_vs_convex_hull),
        ("envelope vs convexification", envelope_vs_convexification),
        ("multi-level with shrink", multi_level),
        ("lsc smoke", lsc_smoke_test),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let r = run();
        failed += usize::from(!r.passed);
        println!("[{}] {} {name}: {}", if r.passed { "PASS" } else { "FAIL" }, i + 1, r.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
