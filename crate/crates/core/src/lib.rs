//! Entropic non-contextuality inequality for a four-level system.
//!
//! Five dichotomic observables `X_i = 2|v_i><v_i| - I` are built from unit
//! vectors that are orthogonal to their cyclic neighbours, so each adjacent
//! pair `(X_i, X_{i+1})` commutes and never yields the joint outcome
//! `(+1, +1)`. Any non-contextual model assigns a global joint distribution to
//! all five outcomes, and its Shannon entropies then satisfy
//!
//! ```text
//! M = H(X5 X1) - H(X1 X2) - H(X2 X3) - H(X3 X4) - H(X4 X5)
//!     + H(X2) + H(X3) + H(X4) <= 0
//! ```
//!
//! The crate evaluates `M` for quantum states ([`inequality`]), checks the
//! classical bound and the absence of a joint extension ([`oracle`]), and
//! scans or optimizes the two built-in state families ([`explore`]).

pub mod entropy;
pub mod error;
pub mod explore;
pub mod inequality;
pub mod model;
pub mod oracle;
mod simplex;

pub use error::{Error, Result};
pub use explore::{optimize, scan, ExportFormat, OptimizeResult, ScanGrid, ScanResult};
pub use inequality::{estimate_m_sampled, evaluate_m, InequalityReport};
pub use model::{
    build_observables, default_observables, make_state, normalize, CyclicObservableSet, FamilyKind,
    StateFamily, StateVector, Vec4,
};
pub use oracle::{check_joint_extension, classical_m, FeasibilityVerdict, JointDistribution5};

/// Number of observables in the cycle.
pub const CYCLE_LEN: usize = 5;

/// Hilbert-space dimension.
pub const DIM: usize = 4;
