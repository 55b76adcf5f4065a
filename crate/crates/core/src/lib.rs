//! Optimal constrained quantization of uniform probability measures carried
//! on planar curves.
//!
//! A measure lives on a *support* curve (a segment or a circular arc) and the
//! codebook points are restricted to a *constraint* curve. The crate provides
//!
//! - [`geometry`]: curves, parametrizations and uniform measures,
//! - [`distortion`]: Voronoi partitions of the support and the squared-error
//!   distortion integral,
//! - [`closed_form`]: known optimal codebooks for a handful of families,
//! - [`solver`]: a multi-start numerical optimizer over constraint parameters,
//! - [`asymptotics`]: limit, dimension and coefficient estimates for error
//!   sequences.

pub mod asymptotics;
pub mod closed_form;
pub mod distortion;
mod error;
pub mod geometry;
pub mod quadrature;
pub mod solver;

pub use asymptotics::{AsymptoticsReport, ErrorSequence, VInfinitySource};
pub use closed_form::{ClosedForm, Family, FamilyId, SegmentLineFamily, ThresholdReport};
pub use distortion::{Codebook, DistortionReport, Partition};
pub use error::{Error, Result};
pub use geometry::{Curve, Point, UniformMeasure};
pub use solver::{SolveResult, SolverConfig, Window};
