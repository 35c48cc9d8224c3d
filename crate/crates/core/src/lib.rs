//! Growth rates of cocycles of matrices and curve moves over shifts of finite type.
//!
//! The library is organized around one pipeline: a subshift supplies symbol
//! sequences, a cocycle assigns a group element to each symbol, and the growth
//! of marked curves under the running products yields drift estimates, joint
//! spectral radius brackets, and pressure curves.
//!
//! Modules:
//! - [`symbolic`]: transition systems, finite and cyclic words, Markov chains,
//!   the shift metric, and return-time search.
//! - [`cocycle`]: the target contract (compose / invert / act on curves),
//!   markings, displacement, and translation lengths.
//! - [`matrix`]: exact rational matrices acting on vectors.
//! - [`lamination`]: integral curve coordinates on triangulated surfaces with
//!   flip and relabel moves, including the punctured-torus model.
//! - [`algorithms`]: drift estimation, JSR brackets, optimal orbits, and
//!   pressure / zero-temperature scans.
//! - [`oracle`]: cross-checks and invariant suites shared by tests and the CLI.
//!
//! All growth-relevant arithmetic is exact (big integers and rationals);
//! floating point enters only through logarithms of exact quantities, which
//! keeps every result reproducible bit for bit across runs and thread counts.

pub mod algorithms;
pub mod cocycle;
pub mod error;
pub mod lamination;
pub mod matrix;
pub mod numeric;
pub mod oracle;
pub mod symbolic;

pub use error::{Error, Result};

// The exact-arithmetic types appearing in public signatures.
pub use num_bigint::BigInt;
pub use num_rational::BigRational;
