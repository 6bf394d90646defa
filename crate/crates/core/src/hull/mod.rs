//! Laminate convex hulls of finite sets: point clouds built by iterated
//! splitting along cone segments, witness-producing membership queries and
//! star-shapedness checks. The Lambda-convex envelope of grid functions lives
//! in [`crate::envelope`].

mod index;
mod member;
mod star;

pub use index::PointIndex;
pub use member::{hull_member, hull_member_many, hull_witness, Witness};
pub use star::{star_shaped_check, star_shaped_shrink, StarReport};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::operator::{cone_contains, Operator, DEFAULT_TOL_CONE};
use crate::par;

#[derive(Debug, Clone, PartialEq)]
pub struct HullParams {
    /// Points per admissible segment, endpoints included.
    pub t_grid: usize,
    /// Merge radius; `None` means `1e-3 * diam(E)`.
    pub dedup_eps: Option<f64>,
    pub tol_cone: f64,
    /// Cloud size cap for `hull_iterate`.
    pub max_points: usize,
    /// Sampled cone directions for membership queries (on top of the
    /// directions towards the points of `E`).
    pub dir_count: usize,
    /// Grid points per side of a membership line search.
    pub t_search: usize,
    pub seed: u64,
    /// Node budget of one membership query; exhausting it answers `false`.
    pub max_evals: usize,
}

impl Default for HullParams {
    fn default() -> Self {
        Self {
            t_grid: 17,
            dedup_eps: None,
            tol_cone: DEFAULT_TOL_CONE,
            max_points: 200_000,
            dir_count: 8,
            t_search: 16,
            seed: 0,
            max_evals: 50_000,
        }
    }
}

impl HullParams {
    pub fn resolved_eps(&self, e: &[DVector<f64>]) -> f64 {
        self.dedup_eps.unwrap_or_else(|| 1e-3 * diameter(e))
    }
}

/// Length of the bounding-box diagonal, a cheap upper bound for the
/// diameter of large clouds.
pub fn extent(points: &[DVector<f64>]) -> f64 {
    let Some(first) = points.first() else {
        return 0.0;
    };
    let mut lo = first.clone();
    let mut hi = first.clone();
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (hi - lo).norm()
}

pub fn diameter(points: &[DVector<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            d = d.max((p - q).norm());
        }
    }
    d
}

#[derive(Debug, Clone, PartialEq)]
pub struct HullCloud {
    pub points: Vec<DVector<f64>>,
    pub depth: usize,
    pub op_name: String,
    pub t_grid: usize,
    pub dedup_eps: f64,
    pub tol_cone: f64,
}

impl HullCloud {
    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, DVector::len)
    }
}

fn check_points(e: &[DVector<f64>], op: &Operator) -> Result<()> {
    if e.is_empty() {
        return Err(Error::Input("E is empty".into()));
    }
    if let Some(p) = e.iter().find(|p| p.len() != op.d_state()) {
        return Err(Error::Dimension(format!("point of length {}, operator has d = {}", p.len(), op.d_state())));
    }
    if e.iter().any(|p| p.iter().any(|x| !x.is_finite())) {
        return Err(Error::Input("E has non-finite coordinates".into()));
    }
    Ok(())
}

/// `depth` rounds of: for every pair of cloud points joined by a cone
/// segment, add the `t_grid` grid points of the segment; drop points closer
/// than `dedup_eps` to ones already present. Pairs of points that were both
/// present one round earlier have been expanded already and are skipped.
pub fn hull_iterate(e: &[DVector<f64>], op: &Operator, depth: usize, params: &HullParams) -> Result<HullCloud> {
    check_points(e, op)?;
    if params.t_grid < 2 {
        return Err(Error::Input("t_grid must be >= 2".into()));
    }
    let eps = params.resolved_eps(e);
    let mut index = PointIndex::new(eps);
    for p in e {
        index.force_insert(p.clone());
    }
    let steps: Vec<f64> = (1..params.t_grid - 1).map(|k| k as f64 / (params.t_grid - 1) as f64).collect();
    let mut fresh_from = 0;
    for _ in 0..depth {
        let snapshot = index.len();
        let pts = index.points();
        let per_point: Vec<Result<Vec<DVector<f64>>>> = par::map_range(snapshot - fresh_from, |off| {
            let j = fresh_from + off;
            let b = &pts[j];
            let mut out = Vec::new();
            for a in &pts[..j] {
                let diff = b - a;
                if diff.norm() <= eps || !cone_contains(op, &diff, params.tol_cone)?.member {
                    continue;
                }
                for &t in &steps {
                    let p = a + &diff * t;
                    if !index.is_duplicate(&p) {
                        out.push(p);
                    }
                }
            }
            Ok(out)
        });
        for batch in per_point {
            for p in batch? {
                index.insert(p);
                if index.len() > params.max_points {
                    return Err(Error::CloudTooLarge {
                        cap: params.max_points,
                        size: index.len(),
                    });
                }
            }
        }
        if index.len() == snapshot {
            break;
        }
        fresh_from = snapshot;
    }
    Ok(HullCloud {
        points: index.into_points(),
        depth,
        op_name: op.name().unwrap_or("custom").to_string(),
        t_grid: params.t_grid,
        dedup_eps: eps,
        tol_cone: params.tol_cone,
    })
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    let one_sided = |x: &[DVector<f64>], y: &[DVector<f64>]| {
        par::map(x, |p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .into_iter()
            .fold(0.0, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}
