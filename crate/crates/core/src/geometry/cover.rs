//! Greedy dyadic covering of a convex polygon by disjoint rotated squares.

use super::polygon::{rotation, ConvexPolygon, OrientedSquare, Point};
use crate::error::{Error, Result};

/// Squares inside `parent` plus the convex leftover pieces. The squares and
/// the remainder together partition the parent.
#[derive(Debug, Clone)]
pub struct SquareCover {
    pub parent: ConvexPolygon,
    pub squares: Vec<OrientedSquare>,
    pub remainder: Vec<ConvexPolygon>,
    pub covered_fraction: f64,
    /// Set when `min_side` was reached before the target fraction.
    pub best_effort: bool,
}

const INSIDE_EPS: f64 = 1e-12;

pub fn vitali_cover(parent: &ConvexPolygon, angle: f64, target_fraction: f64, min_side: f64) -> Result<SquareCover> {
    if !(target_fraction > 0.0 && target_fraction < 1.0) {
        return Err(Error::Input(format!("target fraction {target_fraction} not in (0,1)")));
    }
    if !(min_side > 0.0) {
        return Err(Error::Input(format!("min_side {min_side} must be positive")));
    }
    // Work in the frame where the squares are axis aligned.
    let back = rotation(-angle);
    let fwd = rotation(angle);
    let local = parent.transform(&back, &Point::zeros());
    let bbox = local.bbox();
    let parent_area = local.area();
    let scale = local.diameter();
    let eps = INSIDE_EPS * scale.max(1.0);

    let mut side = bbox.width().max(bbox.height());
    let mut frontier = vec![bbox.min];
    let mut squares = Vec::new();
    let mut covered = 0.0;
    loop {
        let mut boundary: Vec<(Point, ConvexPolygon)> = Vec::new();
        for corner in &frontier {
            let node = axis_square(*corner, side);
            let inside = node.vertices().iter().all(|v| local.contains(v, eps));
            if inside {
                covered += side * side;
                let center = fwd * (corner + Point::new(0.5 * side, 0.5 * side));
                squares.push(OrientedSquare { center, side, angle });
            } else if let Some(piece) = node.intersect(&local) {
                boundary.push((*corner, piece));
            }
        }
        let half = 0.5 * side;
        let done = covered >= target_fraction * parent_area;
        if done || half < min_side {
            let remainder = boundary.into_iter().map(|(_, piece)| piece.transform(&fwd, &Point::zeros())).collect();
            return Ok(SquareCover {
                parent: parent.clone(),
                squares,
                remainder,
                covered_fraction: covered / parent_area,
                best_effort: !done,
            });
        }
        frontier = boundary
            .iter()
            .flat_map(|(c, _)| {
                [
                    *c,
                    c + Point::new(half, 0.0),
                    c + Point::new(0.0, half),
                    c + Point::new(half, half),
                ]
            })
            .collect();
        side = half;
    }
}

fn axis_square(corner: Point, side: f64) -> ConvexPolygon {
    ConvexPolygon::new(vec![
        corner,
        corner + Point::new(side, 0.0),
        corner + Point::new(side, side),
        corner + Point::new(0.0, side),
    ])
    .expect("positive side")
}
