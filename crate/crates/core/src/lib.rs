//! Bivariate means and the Gauss iteration of mean-type mappings.
//!
//! A mean-type mapping `(M, N)` sends `(x, y)` to `(M(x, y), N(x, y))`. Its
//! iterates `(Mₙ, Nₙ)` squeeze the pair between monotone envelopes; when the
//! gap closes, the common limit `K(x, y)` is an invariant mean, i.e.
//! `K(M(x, y), N(x, y)) = K(x, y)`. This crate computes those iterates and
//! limits, classifies the one-sided strictness of means, checks diagonal,
//! weak and c-contractivity on samples, and provides independent oracles
//! (quadrature for the arithmetic-geometric mean, bisection for
//! complementary means) to cross-check the iteration.
//!
//! ```
//! use gauss_means::{gauss_limit, MeanSpec, MeanTypeMapping};
//!
//! let ah = MeanTypeMapping::new(MeanSpec::arithmetic(), MeanSpec::harmonic()).unwrap();
//! let r = gauss_limit(&ah, 2.0, 8.0, 1e-12, 100).unwrap();
//! assert!((r.value.unwrap() - 4.0).abs() < 1e-12);
//! ```

pub mod classify;
pub mod contractivity;
pub mod error;
pub mod interval;
pub mod invariant;
pub mod iteration;
pub mod mean;
pub mod sample;

pub use classify::{
    check_internality, check_strict, check_symmetry, classify_strictness, Claim, FnMean, OneSided,
    Probe, ProbePlan, SampleVerdict, StrictnessReport, StrictnessVerdict,
};
pub use contractivity::{
    c_contraction_index, c_contraction_on, diag_contractive_at, diagonal_contractivity_on,
    lemma_equivalence_check, prop1_applies, prop2_applies, weak_contractivity_index,
    weak_contractivity_on, ContractivityKind, ContractivityVerdict, LemmaReport, LemmaRow,
    NoContraction, PropositionOutcome, WeakIndex, DEFAULT_WEAK_BUDGET,
};
pub use error::{MeanError, Result};
pub use interval::Interval;
pub use invariant::{
    agm_oracle, complementary_value, invariance_residual, invariant_mean_value, ComplementaryMean,
    ComputedInvariantMean, Residual, DEFAULT_QUAD_POINTS,
};
pub use iteration::{
    extremal_invariant_estimates, gauss_limit, in_diagonal_basin, iterate, orbit, BasinVerdict,
    ExtremalEstimate, Iterated, LimitResult, LimitStatus, MeanPair, MeanTypeMapping, Orbit,
    DEFAULT_EXTREMAL_STEPS, DEFAULT_MAX_ITER, DEFAULT_TAIL, DEFAULT_TOL,
};
pub use mean::{Mean, MeanKind, MeanSpec, TableMean};
pub use sample::Region;
