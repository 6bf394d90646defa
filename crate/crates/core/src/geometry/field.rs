//! Piecewise-constant planar fields: convex cells with constant values inside
//! an oriented square domain, and a constant value outside it.

use nalgebra::DVector;

use super::polygon::{ConvexPolygon, OrientedSquare, Point};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub polygon: ConvexPolygon,
    pub value: DVector<f64>,
}

impl Cell {
    pub fn new(polygon: ConvexPolygon, value: DVector<f64>) -> Self {
        Self { polygon, value }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstantField {
    pub domain: OrientedSquare,
    pub exterior_value: DVector<f64>,
    pub cells: Vec<Cell>,
}

/// Relative tolerance on `sum of cell areas = domain area`.
pub const AREA_SUM_TOL: f64 = 1e-8;

impl PiecewiseConstantField {
    /// Builds a field and checks the cheap invariants (finite values, common
    /// dimension, cell areas summing to the domain area). Pairwise
    /// disjointness is quadratic and lives in [`check_disjoint`](Self::check_disjoint).
    pub fn new(domain: OrientedSquare, exterior_value: DVector<f64>, cells: Vec<Cell>) -> Result<Self> {
        let f = Self {
            domain,
            exterior_value,
            cells,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn constant(domain: OrientedSquare, value: DVector<f64>) -> Self {
        Self {
            domain,
            exterior_value: value.clone(),
            cells: vec![Cell::new(domain.polygon(), value)],
        }
    }

    pub fn dim(&self) -> usize {
        self.exterior_value.len()
    }

    pub fn domain_area(&self) -> f64 {
        self.domain.area()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if self.exterior_value.iter().any(|x| !x.is_finite()) {
            return Err(Error::Input("exterior value is not finite".into()));
        }
        let mut total = 0.0;
        for (i, c) in self.cells.iter().enumerate() {
            if c.value.len() != d {
                return Err(Error::Dimension(format!(
                    "cell {i} has value of length {}, expected {d}",
                    c.value.len()
                )));
            }
            if c.value.iter().any(|x| !x.is_finite()) {
                return Err(Error::Input(format!("cell {i} has a non-finite value")));
            }
            let a = c.polygon.area();
            if a <= 0.0 {
                return Err(Error::Input(format!("cell {i} has non-positive area")));
            }
            total += a;
        }
        let area = self.domain_area();
        if (total - area).abs() > AREA_SUM_TOL * area {
            return Err(Error::Input(format!(
                "cell areas sum to {total}, domain area is {area}"
            )));
        }
        Ok(())
    }

    /// Quadratic check that cell interiors are disjoint: every pairwise
    /// intersection area is at most `tol * area(domain)`.
    pub fn check_disjoint(&self, tol: f64) -> Result<()> {
        let limit = tol * self.domain_area();
        let boxes: Vec<_> = self.cells.iter().map(|c| c.polygon.bbox()).collect();
        let mut order: Vec<usize> = (0..self.cells.len()).collect();
        order.sort_by(|&i, &j| boxes[i].min.x.total_cmp(&boxes[j].min.x));
        for (k, &i) in order.iter().enumerate() {
            for &j in &order[k + 1..] {
                if boxes[j].min.x >= boxes[i].max.x {
                    break;
                }
                if let Some(p) = self.cells[i].polygon.intersect(&self.cells[j].polygon) {
                    if p.area() > limit {
                        return Err(Error::Input(format!(
                            "cells {i} and {j} overlap with area {:.3e}",
                            p.area()
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Value at a point (exterior value outside every cell).
    pub fn value_at(&self, x: &Point) -> &DVector<f64> {
        self.cells
            .iter()
            .find(|c| c.polygon.contains(x, 0.0))
            .map_or(&self.exterior_value, |c| &c.value)
    }

    /// Area-weighted average of the cell values over the domain.
    pub fn mean_value(&self) -> DVector<f64> {
        let mut acc = DVector::zeros(self.dim());
        for c in &self.cells {
            acc.axpy(c.polygon.area(), &c.value, 1.0);
        }
        acc / self.domain_area()
    }

    /// For each target, the fraction of the domain where the field is within
    /// `eps` of it.
    pub fn area_fractions(&self, targets: &[DVector<f64>], eps: f64) -> Vec<f64> {
        let area = self.domain_area();
        targets
            .iter()
            .map(|t| {
                self.cells
                    .iter()
                    .filter(|c| (&c.value - t).norm() <= eps)
                    .map(|c| c.polygon.area())
                    .sum::<f64>()
                    / area
            })
            .collect()
    }

    /// Distinct values (exact equality) with their area fractions, in order
    /// of first appearance.
    pub fn value_histogram(&self) -> Vec<(DVector<f64>, f64)> {
        let area = self.domain_area();
        let mut out: Vec<(DVector<f64>, f64)> = Vec::new();
        let mut index = std::collections::HashMap::<Vec<u64>, usize>::new();
        for c in &self.cells {
            let key: Vec<u64> = c.value.iter().map(|x| x.to_bits()).collect();
            let a = c.polygon.area() / area;
            match index.get(&key) {
                Some(&k) => out[k].1 += a,
                None => {
                    index.insert(key, out.len());
                    out.push((c.value.clone(), a));
                }
            }
        }
        out
    }

    pub fn shifted(mut self, shift: &DVector<f64>) -> Self {
        self.exterior_value += shift;
        for c in &mut self.cells {
            c.value += shift;
        }
        self
    }
}

/// Free function form of [`PiecewiseConstantField::area_fractions`].
pub fn area_fractions(field: &PiecewiseConstantField, targets: &[DVector<f64>], eps: f64) -> Vec<f64> {
    field.area_fractions(targets, eps)
}

pub fn mean_value(field: &PiecewiseConstantField) -> DVector<f64> {
    field.mean_value()
}
