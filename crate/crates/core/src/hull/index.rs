//! Uniform hash grid for near-duplicate detection in any dimension.

use std::collections::HashMap;

use nalgebra::DVector;

#[derive(Debug, Clone)]
pub struct PointIndex {
    eps: f64,
    cells: HashMap<Vec<i64>, Vec<usize>>,
    points: Vec<DVector<f64>>,
}

impl PointIndex {
    /// Points closer than `eps` count as duplicates. `eps = 0` only merges
    /// exact duplicates.
    pub fn new(eps: f64) -> Self {
        Self {
            eps,
            cells: HashMap::new(),
            points: Vec::new(),
        }
    }

    fn size(&self) -> f64 {
        self.eps.max(1e-9)
    }

    fn key(&self, p: &DVector<f64>) -> Vec<i64> {
        let s = self.size();
        p.iter().map(|x| (x / s).floor() as i64).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn into_points(self) -> Vec<DVector<f64>> {
        self.points
    }

    /// Index of a stored point within `radius` of `p` (radius at most the
    /// grid size), if any.
    pub fn near(&self, p: &DVector<f64>, radius: f64) -> Option<usize> {
        let base = self.key(p);
        let d = base.len();
        let mut offset = vec![-1i64; d];
        loop {
            let key: Vec<i64> = base.iter().zip(&offset).map(|(b, o)| b.saturating_add(*o)).collect();
            if let Some(ids) = self.cells.get(&key) {
                for &i in ids {
                    let dist = (&self.points[i] - p).norm();
                    if dist < radius || (radius == 0.0 && dist == 0.0) {
                        return Some(i);
                    }
                }
            }
            // odometer over {-1,0,1}^d
            let mut k = 0;
            while k < d {
                offset[k] += 1;
                if offset[k] <= 1 {
                    break;
                }
                offset[k] = -1;
                k += 1;
            }
            if k == d {
                return None;
            }
        }
    }

    pub fn is_duplicate(&self, p: &DVector<f64>) -> bool {
        self.near(p, self.eps).is_some()
    }

    /// Inserts `p` unless it duplicates a stored point; returns whether it
    /// was inserted.
    pub fn insert(&mut self, p: DVector<f64>) -> bool {
        if self.is_duplicate(&p) {
            return false;
        }
        self.force_insert(p);
        true
    }

    /// Inserts without the duplicate test.
    pub fn force_insert(&mut self, p: DVector<f64>) {
        let key = self.key(&p);
        self.cells.entry(key).or_default().push(self.points.len());
        self.points.push(p);
    }

    /// Distance from `p` to the nearest stored point (linear scan).
    pub fn nearest_distance(&self, p: &DVector<f64>) -> f64 {
        self.points.iter().map(|q| (q - p).norm()).fold(f64::INFINITY, f64::min)
    }
}
