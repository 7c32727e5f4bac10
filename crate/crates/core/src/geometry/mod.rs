//! Polygonal domains, dyadic cubes and Whitney covers.

mod cover;
mod cube;
mod point;
mod polygon;
mod validate;

pub use cover::{build_cover, computation_box, root_scale_for, Side, WhitneyCover, DEFAULT_C_W, EXTERIOR_BOX_FACTOR};
pub use cube::{long_distance, DyadicCube};
pub use point::{point_segment_distance, segment_rect_distance, segments_intersect, Point, Rect};
pub use polygon::{clip_polygon_to_rect, polygon_moments, shoelace_area, Domain, RectClass};
pub use validate::{overlap_50q_at_centers, superposition_bound, validate_cover, ValidationReport, Violation};
