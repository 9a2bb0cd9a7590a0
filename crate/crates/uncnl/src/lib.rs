//! Entropic uncertainty meets CHSH nonlocality, numerically.
//!
//! `uncnl` computes overlap and entropy quantities for small
//! finite-dimensional quantum systems and verifies the exact relation
//! between the effective overlap of two binary measurements and the
//! CHSH value their setup can reach:
//!
//! * dense complex linear algebra with a self-contained Hermitian
//!   eigensolver ([`linalg`]),
//! * states, POVMs, projective measurements, Neumark dilation and
//!   seeded random instance generators ([`quantum`]),
//! * a small dense semidefinite-program solver with certificate
//!   checking ([`sdp`]),
//! * von Neumann, min- and max-entropies and uncertainty-relation
//!   verifiers ([`entropy`]),
//! * Maassen-Uffink overlap, Jordan block decomposition and effective
//!   overlap upper bounds ([`overlap`]),
//! * CHSH values, Gram matrices, Tsirelson realizations via Clifford
//!   generators and the beta_max(gamma) SDP family ([`nonlocality`]),
//! * a statistical certification workflow for BB84-type entangled
//!   sources tested by an untrusted CHSH device ([`certify`]).
//!
//! Every randomized routine takes an explicit 64-bit seed and is
//! bit-reproducible. The `examples/` directory has one runnable
//! program per capability; the `uncnl` binary exposes the same
//! functionality as batch subcommands.
//!
//! ```
//! // A CHSH score at Tsirelson's bound pins the overlap to 1/2
//! // and certifies one full bit of uncertainty.
//! let beta = 2.0 * std::f64::consts::SQRT_2;
//! let c = uncnl::nonlocality::overlap_bound_from_beta(beta).unwrap();
//! let q = uncnl::nonlocality::di_uncertainty_bound(beta).unwrap();
//! assert!((c - 0.5).abs() < 1e-12 && (q - 1.0).abs() < 1e-12);
//! ```

// Indexed loops over matrix entries are the house style here.
#![allow(clippy::needless_range_loop)]

pub mod certify;
pub mod entropy;
mod error;
pub mod io;
pub mod linalg;
pub mod nonlocality;
pub mod overlap;
pub mod quantum;
pub mod sdp;
pub mod suites;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, EigenDecomposition};
pub use quantum::{BinaryPovm, CqState, DensityOperator, Observable, ProjectiveMeasurement};

/// Default slack tolerance for pass/fail verdicts in reports.
///
/// Report-level only; internal numerics use their own tolerances.
pub const DEFAULT_PASS_TOL: f64 = 1e-7;
