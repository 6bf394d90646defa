//! Shrinking towards a centre and star-shapedness of point clouds.

use nalgebra::DVector;

use super::{HullCloud, PointIndex};
use crate::error::{Error, Result};
use crate::par;

/// `{delta * xi0 + (1 - delta) * e : e in E}`.
pub fn star_shaped_shrink(e: &[DVector<f64>], xi0: &DVector<f64>, delta: f64) -> Result<Vec<DVector<f64>>> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Input(format!("delta = {delta} not in (0, 1]")));
    }
    if let Some(p) = e.iter().find(|p| p.len() != xi0.len()) {
        return Err(Error::Dimension(format!("point of length {}, xi0 has {}", p.len(), xi0.len())));
    }
    Ok(e.iter().map(|p| xi0 * delta + p * (1.0 - delta)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StarReport {
    pub passed: bool,
    /// False when `xi0` itself has no cloud point within `interior_eps`.
    pub center_inside: bool,
    pub segments_checked: usize,
    pub failures: usize,
    /// Worst gap between a segment point and the cloud.
    pub max_gap: f64,
    pub interior_eps: f64,
}

/// Checks that segments from `xi0` to `samples` cloud points stay within
/// `interior_eps` of the cloud at `t_count` equally spaced parameters.
/// `interior_eps = None` uses the segment spacing `extent / (t_grid - 1)`.
pub fn star_shaped_check(cloud: &HullCloud, xi0: &DVector<f64>, samples: usize, t_count: usize, interior_eps: Option<f64>) -> StarReport {
    let pts = &cloud.points;
    let eps = interior_eps.unwrap_or_else(|| super::extent(pts) / (cloud.t_grid.max(2) - 1) as f64);
    let radius = eps.max(1e-300);
    let mut index = PointIndex::new(radius);
    for p in pts {
        index.force_insert(p.clone());
    }
    let gap = |x: &DVector<f64>| -> f64 {
        if index.near(x, radius).is_some() {
            0.0
        } else {
            index.nearest_distance(x)
        }
    };
    let center_gap = gap(xi0);
    let stride = (pts.len() / samples.max(1)).max(1);
    let chosen: Vec<&DVector<f64>> = pts.iter().step_by(stride).take(samples.max(1)).collect();
    let t_count = t_count.max(1);
    let gaps = par::map(&chosen, |p| {
        (1..=t_count)
            .map(|k| {
                let t = k as f64 / t_count as f64;
                gap(&(xi0 * t + *p * (1.0 - t)))
            })
            .fold(0.0, f64::max)
    });
    let failures = gaps.iter().filter(|g| **g > 0.0).count();
    let center_inside = center_gap == 0.0;
    StarReport {
        passed: center_inside && failures == 0,
        center_inside,
        segments_checked: chosen.len(),
        failures,
        max_gap: gaps.into_iter().fold(center_gap, f64::max),
        interior_eps: eps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hull::{hull_iterate, HullParams};
    use crate::operator::builtin;
    use approx::assert_abs_diff_eq;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn shrink_formula() {
        let out = star_shaped_shrink(&[v(&[1.0, 0.0])], &v(&[0.0, 0.0]), 0.25).unwrap();
        assert_abs_diff_eq!((&out[0] - v(&[0.75, 0.0])).norm(), 0.0, epsilon = 1e-15);
        let all = star_shaped_shrink(&[v(&[1.0, 2.0]), v(&[3.0, 4.0])], &v(&[5.0, 5.0]), 1.0).unwrap();
        assert!(all.iter().all(|p| *p == v(&[5.0, 5.0])));
        assert!(star_shaped_shrink(&[v(&[1.0, 0.0])], &v(&[0.0, 0.0]), 0.0).is_err());
    }

    #[test]
    fn convex_cloud_is_star_shaped() {
        let op = builtin("div2").unwrap();
        let e = vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0])];
        let p = HullParams {
            dedup_eps: Some(0.02),
            ..Default::default()
        };
        let cloud = hull_iterate(&e, &op, 3, &p).unwrap();
        let r = star_shaped_check(&cloud, &v(&[1.0 / 3.0, 1.0 / 3.0]), 100, 10, None);
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn annulus_fails_about_its_hole() {
        let mut pts = Vec::new();
        for i in 0..40 {
            for r in [0.8, 0.9, 1.0] {
                let a = i as f64 * std::f64::consts::TAU / 40.0;
                pts.push(v(&[r * a.cos(), r * a.sin()]));
            }
        }
        let cloud = HullCloud {
            points: pts,
            depth: 0,
            op_name: "div2".into(),
            t_grid: 17,
            dedup_eps: 1e-3,
            tol_cone: 1e-9,
        };
        let r = star_shaped_check(&cloud, &v(&[0.0, 0.0]), 40, 10, Some(0.2));
        assert!(!r.passed);
        assert!(!r.center_inside);
    }

    #[test]
    fn single_point_cloud() {
        let cloud = HullCloud {
            points: vec![v(&[0.5, 0.5])],
            depth: 0,
            op_name: "div2".into(),
            t_grid: 17,
            dedup_eps: 1e-3,
            tol_cone: 1e-9,
        };
        assert!(star_shaped_check(&cloud, &v(&[0.5, 0.5]), 1, 10, None).passed);
    }
}
