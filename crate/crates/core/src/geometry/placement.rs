//! Affine placement of a pattern field into a target square.

use nalgebra::DVector;

use super::field::{Cell, PiecewiseConstantField};
use super::polygon::{rotation, OrientedSquare};
use crate::error::{Error, Result};

/// Relative tolerance for the patch-boundary value check.
pub const PATCH_TOL: f64 = 1e-10;

/// Maps the pattern's domain onto `square` (rotation, scaling, translation)
/// and adds `shift` to every value. The pattern's exterior value plus the
/// shift has to equal the ambient value, otherwise gluing would create an
/// incompatible jump along the square's boundary.
///
/// Rotations other than multiples of pi do not preserve the constraint in
/// general, so callers align the square with the pattern's frame.
pub fn place_pattern(
    pattern: &PiecewiseConstantField,
    square: &OrientedSquare,
    ambient: &DVector<f64>,
    shift: &DVector<f64>,
) -> Result<Vec<Cell>> {
    if shift.len() != pattern.dim() || ambient.len() != pattern.dim() {
        return Err(Error::Dimension(format!(
            "pattern values have dimension {}, shift {}, ambient {}",
            pattern.dim(),
            shift.len(),
            ambient.len()
        )));
    }
    let gap = (&pattern.exterior_value + shift - ambient).norm();
    if gap > PATCH_TOL * (1.0 + ambient.norm()) {
        return Err(Error::PatchMismatch { gap });
    }
    let from = &pattern.domain;
    let m = rotation(square.angle - from.angle) * (square.side / from.side);
    Ok(pattern
        .cells
        .iter()
        .map(|c| Cell::new(c.polygon.transform(&m, &(square.center - m * from.center)), &c.value + shift))
        .collect())
}
