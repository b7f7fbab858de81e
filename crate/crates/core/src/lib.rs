//! Coded caching for combinatorial multi-access networks with per-user
//! private caches.
//!
//! A server holding `N` files serves `K = C(lambda, r)` users over a
//! broadcast link. Every user reads a distinct `r`-subset of `lambda`
//! shared access caches and additionally owns a private cache. This crate
//! builds the uncoded placement for both cache types, generates the XOR
//! delivery schedule, verifies decodability symbolically and bit-exactly,
//! and evaluates the achievable rate together with the MAN, CMACC,
//! cut-set, and index-coding bounds it is compared against.
//!
//! The main entry points are:
//!
//! * [`model::SystemParams`] — parameter set with derived replication
//!   factors and subpacketization,
//! * [`placement::placement`] — access- and private-cache contents,
//! * [`delivery::build_transmissions`] — the delivery schedule,
//! * [`decode::verify_all`] / [`decode::bitlevel_roundtrip`] — decoding
//!   checks,
//! * [`bounds::bounds_report`] — all rate and bound values for one
//!   parameter point.

pub mod bounds;
pub mod combinatorics;
pub mod decode;
pub mod delivery;
mod error;
pub mod model;
pub mod placement;
pub mod rational;

pub use bounds::BoundsReport;
pub use combinatorics::IndexSet;
pub use decode::VerificationReport;
pub use delivery::{Term, Transmission};
pub use error::{Error, Result};
pub use model::{DemandVector, SystemParams, UserId};
pub use placement::{MiniSubfileId, PlacementMap, Tag};
pub use rational::Rat;
