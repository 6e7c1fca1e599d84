//! Pricing-functional calculus for European options.
//!
//! The terminal law of the underlying under the discounted risk-neutral
//! measure is represented as a Stieltjes measure `dF` ([`measure`]). From it
//! the crate builds put and call price curves ([`curves`]), recovers `F`
//! back from put prices ([`reconstruct`]), prices convex and piecewise
//! difference-of-convex payoffs from the call curve alone
//! ([`replication`]), and reconstructs put prices from L²-approximations of
//! log-return densities ([`returns`]). [`oracle`] is an independent
//! brute-force pricer used for verification.

pub mod cli;
pub mod curves;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod measure;
pub mod oracle;
pub mod portfolio;
pub mod quad;
pub mod reconstruct;
pub mod replication;
pub mod returns;
pub mod special;

pub use curves::{PriceCurve, Role, TailPolicy};
pub use error::{Error, Result};
pub use measure::{Atom, Density, Interval, Measure, StieltjesMeasure, Table};
pub use portfolio::{OptionKind, Portfolio};
pub use replication::{DcPayoff, PiecewiseDcPayoff};
