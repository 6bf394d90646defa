//! Recursive refinement for problems with one governing level set.
//!
//! Every level covers the cells whose value is still strictly inside the
//! sublevel set by squares aligned with that value's lamination frame and
//! pastes a shifted, rescaled lemma pattern into each square. What the cover
//! misses keeps its old value.

use std::collections::HashMap;

use nalgebra::DVector;

use super::lemma::LemmaPattern;
use super::problem::{InclusionProblem, Target};
use super::relax::{Plan, Relaxer};
use crate::error::{Error, Result};
use crate::geometry::cover::vitali_cover;
use crate::geometry::field::{Cell, PiecewiseConstantField};
use crate::geometry::placement::place_pattern;
use crate::geometry::polygon::ConvexPolygon;
use crate::par;

#[derive(Debug, Clone)]
pub struct Schedule {
    pub dir_count: usize,
    pub seed: u64,
    /// Level `k` uses `n = n_scale * 4^k` (capped), doubled further if the
    /// boundary layer is not yet inside the sublevel set.
    pub n_scale: usize,
    pub n_cap: usize,
    /// Smallest cover square, relative to the diameter of the covered cell.
    pub min_side_rel: f64,
    /// Cells smaller than this fraction of the domain are left alone.
    pub min_cell_area_rel: f64,
    pub max_cells: usize,
    /// Refine cells in order of decreasing distance contribution and stop
    /// as soon as the integral is below `GREEDY_MARGIN * dist_tol`. When false
    /// every admissible cell is refined at every level.
    pub greedy: bool,
    pub keep_history: bool,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            dir_count: 8,
            seed: 0,
            n_scale: 1,
            n_cap: 64,
            min_side_rel: 1.0 / 64.0,
            min_cell_area_rel: 1e-12,
            max_cells: 2_000_000,
            greedy: true,
            keep_history: false,
        }
    }
}

impl Schedule {
    pub fn n_at(&self, level: usize) -> usize {
        let pow = 4usize.saturating_pow(level as u32);
        self.n_scale.saturating_mul(pow).clamp(2, self.n_cap.max(2))
    }
}

/// Uncovered fraction allowed at level `k`: `2^-(k+2)`.
pub fn leftover_budget(level: usize) -> f64 {
    0.5f64.powi(level as i32 + 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    AlreadyOnTarget,
    Converged,
    MaxLevels,
    CellBudget,
    /// No cell could be refined any further.
    Stalled,
}

#[derive(Debug, Clone)]
pub struct LevelRecord {
    pub level: usize,
    pub n: usize,
    pub refined_cells: usize,
    pub cells: usize,
    pub dist_integral: f64,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub initial_dist: f64,
    pub final_dist: f64,
    pub levels: Vec<LevelRecord>,
    pub stop: StopReason,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub field: PiecewiseConstantField,
    pub report: SolveReport,
    /// Field after each level, starting with the constant datum (only with
    /// `keep_history`).
    pub history: Vec<PiecewiseConstantField>,
}

fn value_key(v: &DVector<f64>) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

/// `integral of dist(u, E)` over the domain, with the problem's distance proxy.
pub fn field_dist(problem: &InclusionProblem, field: &PiecewiseConstantField) -> f64 {
    par::map(&field.cells, |c| c.polygon.area() * problem.dist_proxy(&c.value)).iter().sum()
}

/// Covers `polygon` by squares aligned with the pattern and pastes the
/// pattern shifted by `value` into each. Returns `None` when the cover is empty.
pub(crate) fn refine_cell(
    polygon: &ConvexPolygon,
    value: &DVector<f64>,
    pattern: &LemmaPattern,
    target_fraction: f64,
    min_side_rel: f64,
) -> Result<Option<Vec<Cell>>> {
    let min_side = min_side_rel * polygon.diameter();
    let cover = vitali_cover(polygon, pattern.angle(), target_fraction, min_side)?;
    if cover.squares.is_empty() {
        return Ok(None);
    }
    let mut cells = Vec::with_capacity(cover.squares.len() * pattern.field.cells.len() + cover.remainder.len());
    for sq in &cover.squares {
        cells.extend(place_pattern(&pattern.field, sq, value, value)?);
    }
    cells.extend(cover.remainder.into_iter().map(|p| Cell::new(p, value.clone())));
    Ok(Some(cells))
}

const CHUNK: usize = 32;
/// Greedy refinement aims slightly below the tolerance.
pub const GREEDY_MARGIN: f64 = 0.9;

pub fn solve_one_level(problem: &InclusionProblem, max_levels: usize, dist_tol: f64, schedule: &Schedule) -> Result<Solution> {
    if !matches!(problem.target, Target::LevelSets(_)) {
        return Err(Error::Precondition("solve_one_level needs a level-set target".into()));
    }
    let xi = &problem.xi;
    let fx = problem.f(xi);
    if fx > problem.tol_zero {
        return Err(Error::Precondition(format!("F(xi) = {fx:.3e} > 0: xi is outside the sublevel set")));
    }
    let field = PiecewiseConstantField::constant(problem.domain, xi.clone());
    if problem.on_target(xi) {
        let dist = field_dist(problem, &field);
        let history = if schedule.keep_history { vec![field.clone()] } else { Vec::new() };
        return Ok(Solution {
            field,
            report: SolveReport {
                initial_dist: dist,
                final_dist: dist,
                levels: Vec::new(),
                stop: StopReason::AlreadyOnTarget,
            },
            history,
        });
    }
    let relaxer = Relaxer::new(problem, schedule.dir_count, schedule.seed)?;
    let refiner = Refiner {
        dist: |v: &DVector<f64>| problem.dist_proxy(v),
        outlook: |v: &DVector<f64>| problem.dist_proxy(v),
        active: |v: &DVector<f64>| problem.strictly_inside(v),
        plan: |v: &DVector<f64>, n: usize| relaxer.plan(problem, v, n).ok().map(|p: Plan| p.pattern),
    };
    refine_levels(field, &refiner, max_levels, dist_tol, schedule)
}

/// What the level loop needs to know about a problem: the distance density,
/// the distance a pattern value is expected to reach after later levels
/// (used by the no-worse guard), which values may be refined, and the pattern
/// (exterior 0, to be shifted by the value) that replaces a value at a
/// given `n`.
pub struct Refiner<D, O, A, P> {
    pub dist: D,
    pub outlook: O,
    pub active: A,
    pub plan: P,
}

/// Level loop shared by the solvers. Level `k` refines active cells with
/// patterns at `n = schedule.n_at(k)`, covering each cell up to
/// `leftover_budget(k)`; greedy mode handles cells by decreasing distance
/// contribution and stops below `GREEDY_MARGIN * dist_tol`. A refinement is
/// kept only if it does not increase the cell's contribution.
pub fn refine_levels<D, O, A, P>(
    mut field: PiecewiseConstantField,
    refiner: &Refiner<D, O, A, P>,
    max_levels: usize,
    dist_tol: f64,
    schedule: &Schedule,
) -> Result<Solution>
where
    D: Fn(&DVector<f64>) -> f64 + Sync,
    O: Fn(&DVector<f64>) -> f64 + Sync,
    A: Fn(&DVector<f64>) -> bool + Sync,
    P: Fn(&DVector<f64>, usize) -> Option<LemmaPattern> + Sync,
{
    let dist_of = |f: &PiecewiseConstantField| -> f64 { par::map(&f.cells, |c| c.polygon.area() * (refiner.dist)(&c.value)).iter().sum() };
    let mut dist = dist_of(&field);
    let mut report = SolveReport {
        initial_dist: dist,
        final_dist: dist,
        levels: Vec::new(),
        stop: StopReason::MaxLevels,
    };
    let mut history = Vec::new();
    if schedule.keep_history {
        history.push(field.clone());
    }
    let min_area = schedule.min_cell_area_rel * field.domain_area();

    for level in 1..=max_levels {
        if dist <= dist_tol {
            report.stop = StopReason::Converged;
            break;
        }
        let n = schedule.n_at(level);
        let contrib = par::map(&field.cells, |c| {
            let a = c.polygon.area();
            let d = a * (refiner.dist)(&c.value);
            (d, a >= min_area && d > 0.0 && (refiner.active)(&c.value))
        });
        let mut order: Vec<usize> = (0..field.cells.len()).filter(|&i| contrib[i].1).collect();
        order.sort_by(|&i, &j| contrib[j].0.total_cmp(&contrib[i].0));
        // One plan per distinct value.
        let mut keys: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut uniq: Vec<DVector<f64>> = Vec::new();
        for &i in &order {
            let v = &field.cells[i].value;
            keys.entry(value_key(v)).or_insert_with(|| {
                uniq.push(v.clone());
                uniq.len() - 1
            });
        }
        let plans: Vec<Option<(LemmaPattern, f64)>> = par::map(&uniq, |v| {
            let pattern = (refiner.plan)(v, n)?;
            // mean distance density of the shifted pattern
            let density = pattern
                .field
                .cells
                .iter()
                .map(|c| c.polygon.area() * (refiner.outlook)(&(&c.value + v)))
                .sum::<f64>()
                / pattern.field.domain_area();
            Some((pattern, density))
        });

        let target = 1.0 - leftover_budget(level);
        let mut replacements: HashMap<usize, Vec<Cell>> = HashMap::new();
        let mut cell_count = field.cells.len();
        let mut budget_hit = false;
        let mut running: f64 = contrib.iter().map(|c| c.0).sum();
        for chunk in order.chunks(CHUNK) {
            if schedule.greedy && running <= GREEDY_MARGIN * dist_tol {
                break;
            }
            let results = par::map(chunk, |&i| -> Result<Option<(Vec<Cell>, f64)>> {
                let cell = &field.cells[i];
                let Some((pattern, density)) = &plans[keys[&value_key(&cell.value)]] else {
                    return Ok(None);
                };
                let Some(cells) = refine_cell(&cell.polygon, &cell.value, pattern, target, schedule.min_side_rel)? else {
                    return Ok(None);
                };
                let square_area: f64 = cells
                    .iter()
                    .filter(|c| c.value != cell.value)
                    .map(|c| c.polygon.area())
                    .sum();
                let before = contrib[i].0;
                let rest = cell.polygon.area() - square_area;
                let after = density * square_area + rest.max(0.0) * (refiner.dist)(&cell.value);
                Ok((after <= before).then_some((cells, after)))
            });
            for (&i, r) in chunk.iter().zip(results) {
                if schedule.greedy && running <= GREEDY_MARGIN * dist_tol {
                    break;
                }
                if let Some((cells, after)) = r? {
                    if cell_count + cells.len() - 1 > schedule.max_cells {
                        budget_hit = true;
                        break;
                    }
                    cell_count += cells.len() - 1;
                    running -= contrib[i].0 - after;
                    replacements.insert(i, cells);
                }
            }
            if budget_hit {
                break;
            }
        }

        let refined = replacements.len();
        if refined > 0 {
            let mut cells = Vec::with_capacity(cell_count);
            for (i, c) in field.cells.into_iter().enumerate() {
                match replacements.remove(&i) {
                    Some(new) => cells.extend(new),
                    None => cells.push(c),
                }
            }
            field.cells = cells;
            dist = dist_of(&field);
        }
        report.levels.push(LevelRecord {
            level,
            n,
            refined_cells: refined,
            cells: field.cells.len(),
            dist_integral: dist,
        });
        if schedule.keep_history && refined > 0 {
            history.push(field.clone());
        }
        if budget_hit {
            report.stop = StopReason::CellBudget;
            break;
        }
        if refined == 0 {
            report.stop = StopReason::Stalled;
            break;
        }
        if dist <= dist_tol {
            report.stop = StopReason::Converged;
            break;
        }
    }
    report.final_dist = dist;
    if report.stop == StopReason::MaxLevels && dist <= dist_tol {
        report.stop = StopReason::Converged;
    }
    Ok(Solution { field, report, history })
}

/// Runs `solve_one_level` once per entry of `dist_tols`, run `j` starting
/// from `n = n_scale * 4^(j+1)`: the first-level oscillation shrinks along
/// the sequence while the distance tolerance tightens.
pub fn relaxation_sequence(problem: &InclusionProblem, max_levels: usize, dist_tols: &[f64], schedule: &Schedule) -> Result<Vec<Solution>> {
    dist_tols
        .iter()
        .enumerate()
        .map(|(j, &tol)| {
            let s = Schedule {
                n_scale: schedule.n_scale.saturating_mul(4usize.saturating_pow(j as u32)),
                ..schedule.clone()
            };
            solve_one_level(problem, max_levels, tol, &s)
        })
        .collect()
}
