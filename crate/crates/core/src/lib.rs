//! k-means clustering of planar line segments and bounded-complexity
//! polylines under the squared Hausdorff distance.
//!
//! The pipeline reduces the input to a small weighted coreset by
//! sensitivity sampling (discrete D² seeding -> per-item sensitivity upper
//! bounds -> importance sampling), runs a continuous alternating optimizer
//! on the coreset, evaluates every candidate on the full input, and keeps
//! the best across independent repetitions. A brute-force grid oracle and
//! the closed-form perpendicular-cross benchmark are included for
//! certification.

pub mod coreset;
pub mod error;
pub mod frechet;
pub mod geometry;
pub mod io;
pub mod objective;
pub mod optimizer;
pub mod pipeline;
pub mod polyline;
mod rng;
pub mod seeding;
pub mod space;

pub use error::{Error, Result};
pub use geometry::{
    candidate_family, classify_point, hausdorff_segments, hausdorff_segments_sq,
    point_segment_distance, point_segment_distance_sq, CandidateFamily, Point, RegionLabel,
    Segment, DEFAULT_TOL,
};
pub use objective::{
    assign, cost, cost_of_assignment, embed_centers, extract_centers, Assignment, Weighted,
    WeightedPolyline, WeightedSegment,
};
pub use optimizer::{
    certify, grid_brute_force, local_search, ClusteringResult, GridSpec, OptimizerConfig,
};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineResult};
pub use polyline::{
    hausdorff_polylines, hausdorff_polylines_maxmin, hausdorff_polylines_sq, Polyline,
    PolylineSpace,
};
pub use space::{SegmentSpace, ShapeSpace};
