//! Discretized incidence machinery for Furstenberg-type sets of affine k-planes.
//!
//! Planes of the horizontal family are handled through their codes, see
//! [`affine::PlaneCode`]. Everything downstream (nets, packings, greedy
//! selection, the incidence experiment) works in the max-norm code metric.

pub mod affine;
pub mod error;
pub mod experiment;
pub mod feasibility;
pub mod greedy;
pub mod net_measure;
pub mod rng;
pub mod separated_nets;
pub mod simplex;

pub use error::{Error, Result};
