//! Coarse geometry on finite metric spaces.

pub mod asdim;
pub mod covers;
pub mod docs;
pub mod error;
pub mod filler;
pub mod fixtures;
pub mod metric_space;
pub mod oracle;
pub mod real;
pub mod property_a;
pub mod pu_maps;
pub(crate) mod scan;
pub mod simplicial;
pub mod skeleton_push;
pub mod tol;

pub use covers::{brick_cover, greedy_cover, BrickCover, Cover, CoverStats, GreedyOutcome};
pub use error::{Error, Result};
pub use metric_space::{FiniteMetricSpace, PointSet, SpaceFormat};
pub use simplicial::{l1_dist, nerve, Complex, SimplexPoint, Vertex};
pub use pu_maps::{
    barycentric_map, check_barycentric_bound, check_delta_pu, check_lipschitz, check_variation,
    lebesgue_lower_bound, map_lebesgue, pullback_partition, star_preimage_cover, variation_to_lipschitz,
    LipschitzReport, PUMap, PairWitness, PointMap, VariationReport,
};
pub use filler::{build_filler, find_schedule, FillerResult, FillerSchedule};
pub use skeleton_push::{push_to_skeleton, tail_mass, PushResult};
pub use property_a::{ball_family, build_cx, cx_partition, property_a_to_pu, symdiff_ratio, PropertyAInput, SetFamily};
pub use asdim::{
    certify_from_cover, certify_from_map, estimate_upper_bound, exhaustive_lower_bound, theorem_b_pipeline,
    AsdimCertificate,
};
