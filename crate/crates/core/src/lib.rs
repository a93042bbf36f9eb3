//! First passage percolation on the augmented Delaunay graph of the
//! available-space point process.
//!
//! The pipeline is:
//!
//! 1. [`pointproc`] samples a space-time Poisson process and keeps each point
//!    that is the first to appear in some unit ball, stopping once the window
//!    is saturated.
//! 2. [`geom`] triangulates the accepted set, builds the Voronoi cells and adds
//!    augmentation edges between cells that are closer than `delta_g`.
//! 3. [`fpp`] attaches i.i.d. speeds to the edges and computes passage times,
//!    geodesics and block passage times.
//! 4. [`scaling`] and [`experiments`] turn replicas into fluctuation, wandering
//!    and straightness statistics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dilation;
pub mod error;
pub mod experiments;
pub mod fpp;
pub mod geom;
pub mod point;
pub mod pointproc;
pub mod scaling;
pub mod seed;
pub mod spatial;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use fpp::{GeodesicResult, GridMap, PassageTime, SpeedDistribution, SpeedField};
pub use geom::{AcceptedGraph, EdgeKind, Triangulation, VoronoiCell};
pub use point::{Point, Rect};
pub use pointproc::{AcceptedSet, SpaceTimeSample, Window};
pub use scaling::{PowerlikeEnvelope, PowerlikeParams, SigmaCurve, StraightnessSpec};
pub use seed::SeedChain;

/// Symmetric tolerance applied to squared distances in the exact
/// candidate-point tests. Boundary cases have probability zero, so this only
/// absorbs floating-point noise.
pub const TAU_GEO: f64 = 1e-9;
