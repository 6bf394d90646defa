//! Multi-level solver for finite targets: at stage `k` values are split
//! along lamination chains towards the shrunken set
//! `E_k = delta_k xi0 + (1 - delta_k) E`, one split per refinement level.

use std::collections::HashMap;
use std::sync::Mutex;

use nalgebra::DVector;

use super::lemma::{lemma1_pattern, LemmaPattern};
use super::problem::{point_distance, InclusionProblem, Target};
use super::solver::{refine_levels, Refiner, Schedule};
use crate::error::{Error, Result};
use crate::geometry::PiecewiseConstantField;
use crate::hull::{hull_member, hull_witness, star_shaped_check, star_shaped_shrink, HullCloud, HullParams, Witness};
use crate::operator::Operator;

#[derive(Debug, Clone)]
pub struct MultiLevelOptions {
    /// `delta_k` for stages `k = 1, 2, ...`; `1/k` when empty.
    pub deltas: Vec<f64>,
    pub hull: HullParams,
    pub star_samples: usize,
    pub star_t_count: usize,
    /// Refinement levels per stage.
    pub levels: usize,
    /// Level schedule, rescaled per stage by [`stage_schedule`](Self::stage_schedule).
    pub schedule: Schedule,
}

impl Default for MultiLevelOptions {
    fn default() -> Self {
        Self {
            deltas: Vec::new(),
            hull: HullParams::default(),
            star_samples: 64,
            star_t_count: 16,
            levels: 4,
            schedule: Schedule::default(),
        }
    }
}

impl MultiLevelOptions {
    pub fn delta(&self, stage: usize) -> f64 {
        self.deltas.get(stage - 1).copied().unwrap_or(1.0 / stage as f64)
    }

    /// Stage schedule: `n_scale` and `n_cap` are both multiplied by
    /// `ceil(1/delta^2)` so that boundary layers shrink with the target.
    pub fn stage_schedule(&self, delta: f64) -> Schedule {
        let k = (1.0 / (delta * delta)).ceil() as usize;
        Schedule {
            n_scale: self.schedule.n_scale.saturating_mul(k),
            n_cap: self.schedule.n_cap.saturating_mul(k),
            ..self.schedule.clone()
        }
    }
}

#[derive(Debug, Clone)]
pub struct StageRecord {
    pub stage: usize,
    pub delta: f64,
    /// `n` of the first level.
    pub n: usize,
    /// Depth of the chain for the datum; `None` when the datum is not in
    /// the hull of the shrunken set.
    pub chain_depth: Option<usize>,
    pub levels: usize,
    pub cells: usize,
    pub dist_integral: f64,
}

#[derive(Debug, Clone)]
pub struct MultiLevelSolution {
    pub field: PiecewiseConstantField,
    pub stages: Vec<StageRecord>,
    pub converged: bool,
}

/// Distance to `E` averaged over the leaves of a value's chain into the
/// shrunken set (plain distance when there is no chain), memoized.
struct Outlook<'a> {
    op: &'a Operator,
    e: &'a [DVector<f64>],
    shrunk: &'a [DVector<f64>],
    depth: usize,
    hull: &'a HullParams,
    memo: Mutex<HashMap<Vec<u64>, f64>>,
}

impl<'a> Outlook<'a> {
    fn new(op: &'a Operator, e: &'a [DVector<f64>], shrunk: &'a [DVector<f64>], depth: usize, hull: &'a HullParams) -> Self {
        Self {
            op,
            e,
            shrunk,
            depth,
            hull,
            memo: Mutex::new(HashMap::new()),
        }
    }

    fn get(&self, v: &DVector<f64>) -> f64 {
        let key: Vec<u64> = v.iter().map(|x| x.to_bits()).collect();
        if let Some(&d) = self.memo.lock().unwrap().get(&key) {
            return d;
        }
        let d = match hull_witness(v, self.shrunk, self.op, self.depth, self.hull) {
            Ok(Some(w)) => w.leaves().iter().map(|(_, leaf, wt)| wt * point_distance(self.e, leaf)).sum(),
            _ => point_distance(self.e, v),
        };
        self.memo.lock().unwrap().insert(key, d);
        d
    }
}

/// Lemma pattern for the first split of the chain of `v` (exterior 0).
fn first_split(op: &Operator, v: &DVector<f64>, shrunk: &[DVector<f64>], depth: usize, hull: &HullParams, n: usize) -> Option<LemmaPattern> {
    let Ok(Some(Witness::Split { eta, a, b, .. })) = hull_witness(v, shrunk, op, depth, hull) else {
        return None;
    };
    lemma1_pattern(op, &(a.value() - v), &(b.value() - v), eta, n).ok()
}

/// Requires a point target, a hull cloud of `E` that is star-shaped about
/// `xi0`, and `xi` in the computed hull. Each stage restarts from the
/// constant datum and refines, level by level, every value along the first
/// split of its chain into `E_k`, measuring the exact distance to `E`. The
/// first stage within `dist_tol` is returned (the best one otherwise, with
/// `converged = false`).
pub fn solve_multi_level(
    problem: &InclusionProblem,
    cloud: &HullCloud,
    xi0: &DVector<f64>,
    max_levels: usize,
    dist_tol: f64,
    opts: &MultiLevelOptions,
) -> Result<MultiLevelSolution> {
    let Target::Points(e) = &problem.target else {
        return Err(Error::Precondition("solve_multi_level needs a finite target set".into()));
    };
    let xi = &problem.xi;
    if xi0.len() != xi.len() || cloud.dim() != xi.len() {
        return Err(Error::Dimension("xi0, cloud and datum dimensions differ".into()));
    }
    let star = star_shaped_check(cloud, xi0, opts.star_samples, opts.star_t_count, None);
    if !star.passed {
        return Err(Error::NotStarShaped { failures: star.failures });
    }
    if !problem.on_target(xi) && !hull_member(xi, e, &problem.op, cloud.depth, &opts.hull)? {
        return Err(Error::OutsideHull);
    }
    let constant = PiecewiseConstantField::constant(problem.domain, xi.clone());
    let mut field = constant.clone();
    let mut dist = point_distance(e, xi) * constant.domain_area();
    let mut stages = Vec::new();
    if dist <= dist_tol {
        return Ok(MultiLevelSolution {
            field,
            stages,
            converged: true,
        });
    }
    for stage in 1..=max_levels {
        let delta = opts.delta(stage);
        let shrunk = star_shaped_shrink(e, xi0, delta)?;
        let schedule = opts.stage_schedule(delta);
        let chain = hull_witness(xi, &shrunk, &problem.op, cloud.depth, &opts.hull)?.map(|w| w.depth());
        let mut record = StageRecord {
            stage,
            delta,
            n: schedule.n_at(1),
            chain_depth: chain,
            levels: 0,
            cells: field.cells.len(),
            dist_integral: dist,
        };
        if chain.is_some() {
            let outlook = Outlook::new(&problem.op, e, &shrunk, cloud.depth, &opts.hull);
            let refiner = Refiner {
                dist: |v: &DVector<f64>| point_distance(e, v),
                outlook: |v: &DVector<f64>| outlook.get(v),
                active: |_: &DVector<f64>| true,
                plan: |v: &DVector<f64>, n: usize| first_split(&problem.op, v, &shrunk, cloud.depth, &opts.hull, n),
            };
            let sol = refine_levels(constant.clone(), &refiner, opts.levels, dist_tol, &schedule)?;
            record.levels = sol.report.levels.len();
            if sol.report.final_dist < dist {
                dist = sol.report.final_dist;
                field = sol.field;
            }
            record.cells = field.cells.len();
            record.dist_integral = dist;
        }
        stages.push(record);
        if dist <= dist_tol {
            return Ok(MultiLevelSolution {
                field,
                stages,
                converged: true,
            });
        }
    }
    Ok(MultiLevelSolution {
        field,
        stages,
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::OrientedSquare;
    use crate::hull::hull_iterate;
    use crate::operator::builtin;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn setup(e: Vec<DVector<f64>>, xi: DVector<f64>, depth: usize) -> (InclusionProblem, HullCloud) {
        let op = builtin("div2").unwrap();
        let params = HullParams {
            t_grid: 9,
            ..Default::default()
        };
        let cloud = hull_iterate(&e, &op, depth, &params).unwrap();
        let p = InclusionProblem::new(op, Target::Points(e), xi, OrientedSquare::unit(), 1e-9).unwrap();
        (p, cloud)
    }

    #[test]
    fn single_point_gives_constant_field() {
        let (p, cloud) = setup(vec![v(&[0.2, 0.1])], v(&[0.2, 0.1]), 1);
        let s = solve_multi_level(&p, &cloud, &v(&[0.2, 0.1]), 5, 0.01, &MultiLevelOptions::default()).unwrap();
        assert!(s.converged);
        assert_eq!(s.field.cells.len(), 1);
    }

    #[test]
    fn two_points_converge() {
        let (p, cloud) = setup(vec![v(&[-1.0, 0.0]), v(&[1.0, 0.0])], v(&[0.3, 0.0]), 1);
        let s = solve_multi_level(&p, &cloud, &v(&[0.0, 0.0]), 40, 0.05, &MultiLevelOptions::default()).unwrap();
        assert!(s.converged, "{:?}", s.stages);
        assert!(s.stages[0].chain_depth.is_none());
        s.field.check_disjoint(1e-9).unwrap();
    }

    #[test]
    fn outside_and_not_star_shaped() {
        let (p, cloud) = setup(vec![v(&[-1.0, 0.0]), v(&[1.0, 0.0])], v(&[0.0, 0.5]), 1);
        let r = solve_multi_level(&p, &cloud, &v(&[0.0, 0.0]), 5, 0.05, &MultiLevelOptions::default());
        assert!(matches!(r, Err(Error::OutsideHull)));
        let (p, cloud) = setup(vec![v(&[-1.0, 0.0]), v(&[1.0, 0.0])], v(&[0.3, 0.0]), 1);
        let r = solve_multi_level(&p, &cloud, &v(&[0.0, 1.0]), 5, 0.05, &MultiLevelOptions::default());
        assert!(matches!(r, Err(Error::NotStarShaped { .. })));
    }
}
