//! End-to-end discretized experiments and the closed-form bound tables.

pub mod bounds;
pub mod generators;
pub mod incidence;
pub mod verify;

pub use bounds::{bounds_csv, bounds_table, dimension_bound, s_grid, BoundsRow};
pub use generators::{gen_sharp_flat, gen_sharp_product, PlaneFamily, SharpSet};
pub use incidence::{build_incidence, generate, ExperimentConfig, Generator, IncidenceReport};
pub use verify::{build_tuple_nets, verify_lower_chain, verify_upper_chain, TupleNet};
