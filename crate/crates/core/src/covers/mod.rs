//! Sparse neighborhood covers from decompositions, and the cover-based
//! minimum spanning tree.

pub mod cover;
pub mod mst;

pub use cover::{cover_from_decomposition, CoverOutput};
pub use mst::{
    cover_mst, kruskal_oracle, mst_radius, mst_radius_apsp, mst_radius_exhaustive, prim_oracle,
    EdgeClass, MstConfig, MstResult,
};
