//! Hyperbolic-surface laboratory: builds compact genus-g surfaces from regular
//! 4g-gon identifications, enumerates primitive closed geodesics, counts
//! geometric intersection numbers of closed geodesics and geodesic arcs, and
//! runs the statistics experiments (pair means, tail fractions, equidistribution,
//! Huber counts) behind the `gclab` CLI.

pub mod census;
pub mod error;
pub mod flow;
pub mod harness;
pub mod hyp;
pub mod intersect;
pub mod surface;
mod trace;

pub use census::{enumerate_census, huber_ratio, Census, ClosedGeodesic};
pub use error::Error;
pub use flow::{occupation_fraction, sample_liouville, trace_arc, ArcTrace, PhaseBox, UnitTangent};
pub use hyp::{
    boundary_linked, dist, segment_cross, BoundaryPair, CrossOutcome, Crossing, CurvatureScale,
    DiskPoint, IsoClass, Isometry, Segment,
};
pub use intersect::{
    arc_t_count, chord_crossings, intersection_number, self_intersection, CrossingReport,
};
pub use surface::{build_surface, GroupWord, Letter, SurfaceModel};

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
