//! Lost-in-space star identification.
//!
//! This crate holds everything that does not touch a filesystem: spherical
//! geometry and TRIAD attitude estimation, triangle features, the indexed
//! feature catalogs, six identification methods sharing one framework, the
//! synthetic image generator and the statistics used by the benchmark.
//!
//! The crate is `no_std` and only needs `alloc`. The `std` feature adds
//! `std::error::Error` plumbing through `thiserror`.
//!
//! All public angles are in degrees.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod catalog;
pub mod error;
pub mod features;
pub mod geometry;
pub mod identify;
pub mod stats;
pub mod synth;

pub use catalog::{
    AccessCounter, CatalogParams, CatalogStar, CatalogStore, FeatureKind, FeatureTable, Interval, PairEntry, PermEntry, SourceFormat,
    TrioEntry,
};
pub use error::Error;
pub use features::TrioFeatures;
pub use geometry::{RotationMatrix, UnitVector3, Vector3};
pub use identify::{identify, Bijection, IdentificationResult, Method, MethodConfig, Outcome};
pub use synth::{NoiseSpec, StarLabel, SyntheticImage};

/// Field-of-view constraint applied to every pair and trio in the catalogs.
pub const DEFAULT_PSI_MAX: f64 = 20.0;

/// Default magnitude cutoff for the bright star set.
pub const DEFAULT_MAGNITUDE_CUTOFF: f64 = 6.0;
