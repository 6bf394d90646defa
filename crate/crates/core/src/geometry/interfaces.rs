//! Enumeration of the jump set of a piecewise-constant field.
//!
//! Edges are grouped by supporting line (normal angle, then offset), each
//! line is split at every edge endpoint, and every elementary piece is
//! attributed to the cell on each side. Pieces with no cell on a side face
//! the exterior value. Consecutive pieces with the same pair of neighbours
//! are merged, so T-junctions are handled without any mesh conformity.

use std::f64::consts::PI;

use nalgebra::DVector;

use super::field::PiecewiseConstantField;
use super::polygon::Point;

/// Segments shorter than this are dropped.
pub const MIN_SEGMENT: f64 = 1e-12;

const ANGLE_TOL: f64 = 1e-9;
const OFFSET_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Cell(usize),
    Exterior,
}

/// A maximal straight piece of the jump set with unit normal `normal`
/// pointing from the `minus` side to the `plus` side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interface {
    pub start: Point,
    pub end: Point,
    pub normal: Point,
    pub plus: Side,
    pub minus: Side,
}

impl Interface {
    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }

    pub fn flipped(&self) -> Self {
        Self {
            start: self.end,
            end: self.start,
            normal: -self.normal,
            plus: self.minus,
            minus: self.plus,
        }
    }

    pub fn value(field: &PiecewiseConstantField, side: Side) -> &DVector<f64> {
        match side {
            Side::Cell(i) => &field.cells[i].value,
            Side::Exterior => &field.exterior_value,
        }
    }

    pub fn value_plus<'a>(&self, field: &'a PiecewiseConstantField) -> &'a DVector<f64> {
        Self::value(field, self.plus)
    }

    pub fn value_minus<'a>(&self, field: &'a PiecewiseConstantField) -> &'a DVector<f64> {
        Self::value(field, self.minus)
    }

    pub fn is_boundary(&self) -> bool {
        self.plus == Side::Exterior || self.minus == Side::Exterior
    }
}

struct Edge {
    cell: usize,
    angle: f64,
    normal: Point,
    a: Point,
    b: Point,
    /// True when the cell lies on the `+normal` side.
    cell_on_plus: bool,
}

/// Every interface of the field, including the pieces of cell boundaries that
/// face the exterior.
pub fn interfaces(field: &PiecewiseConstantField) -> Vec<Interface> {
    let scale = field.domain.side.max(1e-300);
    let mut edges = Vec::new();
    for (ci, cell) in field.cells.iter().enumerate() {
        for (a, b) in cell.polygon.edges() {
            let e = b - a;
            let len = e.norm();
            if len < MIN_SEGMENT {
                continue;
            }
            // Outward normal of a CCW polygon is to the right of the edge.
            let outward = Point::new(e.y, -e.x) / len;
            let mut angle = outward.y.atan2(outward.x);
            let mut flip = false;
            if angle < -ANGLE_TOL {
                angle += PI;
                flip = true;
            } else if angle < 0.0 {
                angle = 0.0;
            }
            if angle >= PI - ANGLE_TOL {
                angle -= PI;
                flip = !flip;
            }
            let normal = if flip { -outward } else { outward };
            edges.push(Edge {
                cell: ci,
                angle,
                normal,
                a,
                b,
                // outward == normal means the cell is behind the normal.
                cell_on_plus: flip,
            });
        }
    }
    edges.sort_by(|x, y| x.angle.total_cmp(&y.angle));

    let mut out = Vec::new();
    let mut start = 0;
    while start < edges.len() {
        let mut end = start + 1;
        while end < edges.len() && edges[end].angle - edges[end - 1].angle <= ANGLE_TOL {
            end += 1;
        }
        process_direction(&edges[start..end], scale, &mut out);
        start = end;
    }
    out
}

fn process_direction(group: &[Edge], scale: f64, out: &mut Vec<Interface>) {
    let normal = group[0].normal;
    let mut keyed: Vec<(f64, &Edge)> = group.iter().map(|e| (normal.dot(&((e.a + e.b) * 0.5)), e)).collect();
    keyed.sort_by(|x, y| x.0.total_cmp(&y.0));
    let tol = OFFSET_TOL * scale;
    let mut start = 0;
    while start < keyed.len() {
        let mut end = start + 1;
        while end < keyed.len() && keyed[end].0 - keyed[end - 1].0 <= tol {
            end += 1;
        }
        let offset = keyed[start..end].iter().map(|k| k.0).sum::<f64>() / (end - start) as f64;
        let line: Vec<&Edge> = keyed[start..end].iter().map(|k| k.1).collect();
        process_line(&line, normal, offset, scale, out);
        start = end;
    }
}

fn process_line(line: &[&Edge], normal: Point, offset: f64, scale: f64, out: &mut Vec<Interface>) {
    let tangent = Point::new(-normal.y, normal.x);
    let tol = OFFSET_TOL * scale;
    let spans: Vec<(f64, f64, &Edge)> = line
        .iter()
        .map(|e| {
            let sa = tangent.dot(&e.a);
            let sb = tangent.dot(&e.b);
            (sa.min(sb), sa.max(sb), *e)
        })
        .collect();

    let mut cuts: Vec<f64> = spans.iter().flat_map(|s| [s.0, s.1]).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= tol);
    if cuts.len() < 2 {
        return;
    }
    let locate = |s: f64| -> usize {
        let i = cuts.partition_point(|&c| c < s - tol);
        i.min(cuts.len() - 1)
    };

    let slots = cuts.len() - 1;
    let mut plus = vec![None; slots];
    let mut minus = vec![None; slots];
    for (lo, hi, e) in &spans {
        let (i0, i1) = (locate(*lo), locate(*hi));
        let target = if e.cell_on_plus { &mut plus } else { &mut minus };
        for slot in target.iter_mut().take(i1).skip(i0) {
            if slot.is_none() {
                *slot = Some(e.cell);
            }
        }
    }

    let side = |s: Option<usize>| s.map_or(Side::Exterior, Side::Cell);
    let point = |s: f64| tangent * s + normal * offset;
    let mut k = 0;
    while k < slots {
        if plus[k].is_none() && minus[k].is_none() {
            k += 1;
            continue;
        }
        let key = (plus[k], minus[k]);
        let mut j = k + 1;
        while j < slots && (plus[j], minus[j]) == key {
            j += 1;
        }
        let (s0, s1) = (cuts[k], cuts[j]);
        if s1 - s0 >= MIN_SEGMENT {
            out.push(Interface {
                start: point(s0),
                end: point(s1),
                normal,
                plus: side(key.0),
                minus: side(key.1),
            });
        }
        k = j;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::field::Cell;
    use crate::geometry::polygon::{ConvexPolygon, OrientedSquare};
    use approx::assert_abs_diff_eq;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> ConvexPolygon {
        ConvexPolygon::new(vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
        .unwrap()
    }

    #[test]
    fn two_halves_have_one_inner_interface() {
        let f = PiecewiseConstantField::new(
            OrientedSquare::unit(),
            v(&[0.0]),
            vec![
                Cell::new(rect(0.0, 0.0, 0.5, 1.0), v(&[1.0])),
                Cell::new(rect(0.5, 0.0, 1.0, 1.0), v(&[2.0])),
            ],
        )
        .unwrap();
        let ifs = interfaces(&f);
        let inner: Vec<_> = ifs.iter().filter(|i| !i.is_boundary()).collect();
        assert_eq!(inner.len(), 1);
        let i = inner[0];
        assert_abs_diff_eq!(i.normal.x.abs(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(i.length(), 1.0, epsilon = 1e-15);
        // plus side is the one the normal points into
        let expected_plus = if i.normal.x > 0.0 { 1 } else { 0 };
        assert_eq!(i.plus, Side::Cell(expected_plus));
        let boundary_len: f64 = ifs.iter().filter(|i| i.is_boundary()).map(Interface::length).sum();
        assert_abs_diff_eq!(boundary_len, 4.0, epsilon = 1e-14);
    }

    #[test]
    fn constant_field_has_only_boundary_interfaces() {
        let f = PiecewiseConstantField::constant(OrientedSquare::new(Point::new(1.0, 2.0), 2.0, 0.3).unwrap(), v(&[1.0]));
        let ifs = interfaces(&f);
        assert_eq!(ifs.len(), 4);
        assert!(ifs.iter().all(Interface::is_boundary));
    }

    #[test]
    fn t_junctions_are_split() {
        // left half against two right quarters
        let f = PiecewiseConstantField::new(
            OrientedSquare::unit(),
            v(&[0.0]),
            vec![
                Cell::new(rect(0.0, 0.0, 0.5, 1.0), v(&[1.0])),
                Cell::new(rect(0.5, 0.0, 1.0, 0.5), v(&[2.0])),
                Cell::new(rect(0.5, 0.5, 1.0, 1.0), v(&[3.0])),
            ],
        )
        .unwrap();
        let ifs = interfaces(&f);
        let inner: Vec<_> = ifs.iter().filter(|i| !i.is_boundary()).collect();
        assert_eq!(inner.len(), 3);
        let total: f64 = inner.iter().map(|i| i.length()).sum();
        assert_abs_diff_eq!(total, 1.5, epsilon = 1e-14);
    }

    #[test]
    fn flipping_swaps_sides() {
        let f = PiecewiseConstantField::constant(OrientedSquare::unit(), v(&[1.0]));
        for i in interfaces(&f) {
            let j = i.flipped();
            assert_eq!(j.normal, -i.normal);
            assert_eq!(j.value_plus(&f), i.value_minus(&f));
            assert_eq!(j.flipped(), i);
        }
    }
}
