//! SVG rendering of piecewise-constant fields.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::geometry::{PiecewiseConstantField, Point};

/// Colormap stops, blue through white to red, interpolated linearly.
const STOPS: [[f64; 3]; 3] = [[49.0, 54.0, 149.0], [247.0, 247.0, 247.0], [165.0, 0.0, 38.0]];

const CANVAS: f64 = 512.0;

fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (t.floor() as usize).min(STOPS.len() - 2);
    let s = t - i as f64;
    let c: Vec<u8> = (0..3)
        .map(|k| (STOPS[i][k] + s * (STOPS[i + 1][k] - STOPS[i][k])).round() as u8)
        .collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Fixed-precision coordinate so output bytes do not depend on float noise
/// below the rendering resolution.
fn num(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn path(points: &[Point], to_canvas: &impl Fn(&Point) -> Point) -> String {
    let mut d = String::new();
    for (i, p) in points.iter().enumerate() {
        let q = to_canvas(p);
        let _ = write!(d, "{}{},{} ", if i == 0 { "M" } else { "L" }, num(q.x), num(q.y));
    }
    d.push('Z');
    d
}

/// One filled path per cell, coloured by value component `component` over
/// the range of that component among the cells; the domain boundary is
/// stroked on top.
pub fn export_svg(field: &PiecewiseConstantField, component: usize) -> Result<String> {
    if field.cells.is_empty() {
        return Err(Error::Input("field has no cells".into()));
    }
    if component >= field.dim() {
        return Err(Error::Input(format!("component {component} out of range for values of length {}", field.dim())));
    }
    let (lo, hi) = field
        .cells
        .iter()
        .map(|c| c.value[component])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let corners = field.domain.corners();
    let min = corners.iter().fold(Point::new(f64::INFINITY, f64::INFINITY), |m, p| m.inf(p));
    let max = corners.iter().fold(Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY), |m, p| m.sup(p));
    let scale = CANVAS / (max - min).max();
    let margin = 8.0;
    let to_canvas = |p: &Point| Point::new(margin + (p.x - min.x) * scale, margin + (max.y - p.y) * scale);
    let w = (max.x - min.x) * scale + 2.0 * margin;
    let h = (max.y - min.y) * scale + 2.0 * margin;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{1}" viewBox="0 0 {0} {1}">"#,
        num(w),
        num(h)
    );
    let _ = writeln!(out, r#"<g stroke="none" data-component="{component}" data-min="{lo}" data-max="{hi}">"#);
    for c in &field.cells {
        let v = c.value[component];
        let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
        let _ = writeln!(out, r#"<path d="{}" fill="{}"/>"#, path(c.polygon.vertices(), &to_canvas), color(t));
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(
        out,
        r#"<path d="{}" fill="none" stroke="black" stroke-width="1.5"/>"#,
        path(&corners, &to_canvas)
    );
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::OrientedSquare;
    use crate::laminate::lemma1_construct;
    use crate::operator::builtin;
    use nalgebra::DVector;

    fn filled(svg: &str) -> usize {
        svg.matches("<path").count() - 1
    }

    #[test]
    fn constant_field_is_one_square() {
        let f = PiecewiseConstantField::constant(OrientedSquare::unit(), DVector::from_column_slice(&[0.3, 0.0]));
        let svg = export_svg(&f, 0).unwrap();
        assert_eq!(filled(&svg), 1);
        assert!(svg.contains("#f7f7f7"));
    }

    #[test]
    fn lemma_pattern_regions() {
        let op = builtin("div2").unwrap();
        let a = DVector::from_column_slice(&[0.0, 1.0]);
        let f = lemma1_construct(&op, &a, &-&a, 0.5, 4).unwrap();
        let svg = export_svg(&f, 1).unwrap();
        assert_eq!(filled(&svg), 24);
        assert_eq!(svg, export_svg(&f, 1).unwrap());
    }

    #[test]
    fn bad_inputs() {
        let mut f = PiecewiseConstantField::constant(OrientedSquare::unit(), DVector::from_column_slice(&[0.3, 0.0]));
        assert!(export_svg(&f, 2).is_err());
        f.cells.clear();
        assert!(export_svg(&f, 0).is_err());
    }

    #[test]
    fn colormap_ends() {
        assert_eq!(color(0.0), "#313695");
        assert_eq!(color(1.0), "#a50026");
        assert_eq!(color(0.5), "#f7f7f7");
    }
}
