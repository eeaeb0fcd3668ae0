//! Coverage-path and viewpoint planning on triangle meshes.
//!
//! The pipeline segments a surface into area-uniform, low-curvature clusters
//! (constrained centroidal Voronoi tessellation with a combined distance/normal
//! energy), computes a near-optimal geodesic tour over the cluster generators,
//! and turns the tour waypoints into occlusion-corrected standoff rays with
//! validity-checked pose candidates. A metrics module scores the result
//! (coverage, overlap, area uniformity, unreachable faces).
//!
//! Modules follow the pipeline order:
//!
//! - [`mesh`] — indexed triangle meshes, loading/validation, ray queries
//! - [`ccvt`] — energy-based segmentation via Lloyd iteration
//! - [`geodesic`] — surface shortest paths and the generator graph
//! - [`tour`] — 3-opt tour over generators and coverage-path extraction
//! - [`viewpoint`] — candidate rays, self-occlusion correction, config tour
//! - [`metrics`] — coverage/overlap/RSD/unreachable-face reporting
//! - [`shapes`] — procedural meshes used by examples, tests, and benchmarks

pub mod ccvt;
pub mod geodesic;
pub mod json;
pub mod mesh;
pub mod metrics;
pub mod shapes;
pub mod tour;
pub mod viewpoint;

pub use mesh::{Ray, TriangleMesh};

/// Guide chapters compiled as doctests so the book and the crate cannot drift.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/meshes.md")]
    pub mod meshes {}
    #[doc = include_str!("../../../book/src/segmentation.md")]
    pub mod segmentation {}
    #[doc = include_str!("../../../book/src/geodesics.md")]
    pub mod geodesics {}
    #[doc = include_str!("../../../book/src/tour.md")]
    pub mod tour {}
    #[doc = include_str!("../../../book/src/viewpoints.md")]
    pub mod viewpoints {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    pub mod metrics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
