//! Interface representation, cut-cell decomposition and quadrature.

mod cut;
mod levelset;
mod quadrature;

pub use cut::{
    classify_element, decompose_cut_element, interface_normal, CutInfo, ElementClass, FittedEdge, InterfaceGeometry,
    InterfaceSegment, SubTriangle, SMALL_CUT_FRACTION, SNAP_TOLERANCE,
};
pub use levelset::{LevelSet, Side};
pub use quadrature::{segment_rule, triangle_rule, QuadRule};
