//! Minimal constraint strengths for the parity (LHZ) encoding of Ising
//! optimization problems.
//!
//! The crate computes exact logical spectra and defect-restricted minima for
//! small instances, the homogeneous optimum together with its lower and upper
//! bound families, the inhomogeneous linear program, closed-form limits,
//! extreme-value models of spin-glass ground states, a dual-certified MaxCut
//! SDP bound, and an ensemble harness for scaling studies.

pub mod bounds;
pub mod analytic;
pub mod error;
pub mod evt;
pub mod harness;
pub mod instances;
pub mod parity;
pub mod rng;
pub mod sdp;
pub mod simplex;
pub mod solver;
pub mod special;

pub use bounds::{BoundsReport, ConstraintAssignment, KRange, OmegaFamily};
pub use error::{Error, Result};
pub use instances::{DistributionSpec, Graph, GraphSpec, IsingInstance};
pub use parity::{DefectProfile, ParityLayout, PhysicalState, Plaquette, Site};
pub use solver::{Limits, SpectrumSummary};
