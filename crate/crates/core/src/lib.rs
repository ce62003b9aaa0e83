//! Low-weight, bounded-degree geometric t-spanners and k-vertex
//! fault-tolerant t-spanners for point sets in `R^d`.
//!
//! The construction pipeline is: compressed split tree -> well-separated
//! pair decomposition -> bounded-separated pair decomposition -> greedy
//! processing of pairs by edge-distance with crossing-edge suppression.
//! The [`verify`] module holds independent brute-force oracles (stretch
//! factor, fault-set checks, vertex-disjoint path counts, Euclidean MST)
//! that certify the claimed properties at desk scale.

pub mod error;
pub mod geometry;
pub mod pair_decomp;
pub mod params;
pub mod spanner;
pub mod split_tree;
pub mod verify;
pub mod vfts;

pub use error::{Error, Result};
pub use geometry::{
    angle_between, box_distance, box_size, build_frame, cone_contains, general_cone_direction,
    AABox, Cone, ConeFrame, Point,
};
pub use pair_decomp::{
    build_wspd, derive_bspd, find_equal_size_floating_box, neighbor_sets, BspdPair, WspdPair,
};
pub use params::{choose_parameters, verify_inequalities, SpannerParams};
pub use spanner::{build_spanner, SpannerGraph};
pub use split_tree::{assign_representatives, build_tree, child_tight_virtual, CompressedSplitTree};
pub use verify::{
    emst_weight, full_report, stretch_factor, verify_vfts, vertex_disjoint_path_count,
    VerificationReport,
};
pub use vfts::build_vfts;
