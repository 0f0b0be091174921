//! Exact symbolic engine for Drinfeld-Sokolov reduction on matrix loop algebras.
//!
//! The crate is organized bottom-up:
//!
//! - [`rational`]: exact rational scalars (`Rat`), parsing and rendering.
//! - [`poly`]: differential polynomials in jet variables `x_i^(n)` with the
//!   formal derivation `d/dt`.
//! - [`grading`]: gradings on the loop algebra (principal, homogeneous,
//!   matrix-only) and the two Birkhoff-type splittings.
//! - [`matrix`]: windowed Laurent matrices over differential polynomials.
//! - [`linalg`]: exact linear algebra over the rationals used by the graded
//!   decompositions.
//! - [`lie`]: concrete `sl_n` data, the Heisenberg catalog (principal,
//!   homogeneous, nonsmooth-sl2), strong regularity and the kernel/image
//!   splitting.
//! - [`gauge`]: the Drinfeld-Sokolov gauge (abelianization), the canonical
//!   oper form, the Miura map and infinitesimal gauge projection.
//! - [`hierarchy`]: generation of mKdV/KdV/generalized flows as differential
//!   polynomials, with exact zero-curvature and commutativity certificates.
//!
//! All symbolic computation is exact: coefficients are arbitrary-precision
//! rationals and no floating point appears anywhere in this crate.
//!
//! With the default `parallel` feature the heavy inner loops (large
//! polynomial products, prolongations, multi-flow derivation) run on rayon;
//! `--no-default-features` selects the sequential fallbacks. The `*_seq`
//! entry points remain available either way so benchmarks can compare both.

pub mod grading;
pub mod linalg;
pub mod matrix;
pub mod par;
pub mod poly;
pub mod rational;

pub mod gauge;
pub mod hierarchy;
pub mod lie;

pub use grading::{GradingKind, GradingSpec, SplittingKind};
pub use matrix::{LoopMatrix, Window};
pub use poly::{DiffPoly, DiffRing, JetFactor, Monomial};
pub use rational::Rat;

pub use gauge::{canonical_oper_form, ds_reduce, infinitesimal_gauge_project, miura_map};
pub use gauge::{Connection, DsGaugeResult, TruncationPolicy};
pub use hierarchy::{
    flow_commutator, generate_flow_generalized, generate_flow_kdv, generate_flow_mkdv,
    oper_to_scalar_operator, FlowEquation, HierarchyKind, KdvMethod,
};
pub use lie::{
    is_strongly_regular, kernel_image_split, make_sln, HeisenbergKind, HeisenbergSpec,
    SimpleLieData, TransversalSpace,
};

/// Errors shared by the symbolic modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("grading mismatch between operands")]
    GradingMismatch,
    #[error("window underflow: operation needs z-powers below the validity window ({0})")]
    WindowUnderflow(String),
    #[error("element is not homogeneous: degrees {0:?}")]
    NotHomogeneous(Vec<i64>),
    #[error("singular graded splitting at degree {degree}: {reason}")]
    SingularSplit { degree: i64, reason: String },
    #[error("rank {0} is too small, need n >= 2")]
    RankTooSmall(usize),
    #[error("flow index {m} is not in the index set of {algebra}")]
    InvalidFlowIndex { m: i64, algebra: String },
    #[error("element is not strongly regular for this Heisenberg")]
    NotStronglyRegular,
    #[error("transversality check failed: {0}")]
    TransversalityFailed(String),
    #[error("input is not valued in the expected subalgebra: {0}")]
    NotInSubalgebra(String),
    #[error("the two KdV derivations disagree: {0}")]
    MethodDisagreement(String),
    #[error("ring mismatch between flows")]
    RingMismatch,
    #[error("zero-curvature certificate failed after retries: {0}")]
    CertificateFailed(String),
    #[error("gauge re-substitution identity failed at degree {0}")]
    Resubstitution(i64),
}

pub type Result<T> = std::result::Result<T, Error>;
