//! Simulation engine for anisotropic and crystalline curvature flow of
//! immersed closed planar curves.
//!
//! The crate is organized around six pieces:
//!
//! * [`anisotropy`] — norms with their polars, support-angle functions,
//!   Wulff shapes, duality maps and mollification-based regularization;
//! * [`curve`] — sampled parametric curves with cached frames, adapted
//!   crystalline polygons, Cahn-Hoffman fields, Wulff offsets and local
//!   RW-condition certificates;
//! * [`smooth_flow`] — explicit time stepping of u_t = ψ(θ)κν with runtime
//!   monitors for the curvature bound, length element and blow-up rate;
//! * [`crystal_flow`] — the facet ODE system for adapted polygons with
//!   facet-removal and extinction events;
//! * [`morphology`] — Minkowski erosion/dilation/opening with convex
//!   structuring bodies and the two-sided curve smoothing pipeline;
//! * [`parallel`] — data-parallel helpers (rayon behind the `parallel`
//!   feature, sequential fallback otherwise).

pub mod anisotropy;
pub mod crystal_flow;
pub mod curve;
pub mod error;
pub mod geometry;
pub mod parallel;
pub mod smooth_flow;

pub use error::{Error, Result};
