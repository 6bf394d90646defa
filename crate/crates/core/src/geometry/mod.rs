//! Planar piecewise-constant fields and the polygon machinery behind them.

pub mod cover;
pub mod field;
pub mod interfaces;
pub mod placement;
pub mod polygon;

pub use cover::{vitali_cover, SquareCover};
pub use field::{Cell, PiecewiseConstantField};
pub use interfaces::{interfaces, Interface, Side};
pub use placement::place_pattern;
pub use polygon::{ConvexPolygon, OrientedSquare, Point};
