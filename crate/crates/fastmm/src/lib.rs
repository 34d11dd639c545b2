//! Exact representation, error analysis, optimization and execution of fast
//! bilinear matrix-multiplication algorithms.
//!
//! The crate is organised around the HM representation `(L, R, P)` of a
//! bilinear scheme ([`hmrep::HMRep`]) with exact coefficients in a real
//! quadratic field ([`coeff::Coefficient`]):
//!
//! * [`schemes`] — registry of bundled schemes and an SMS loader;
//! * [`norms`] and [`bounds`] — growth factors, amplification factors and
//!   closed-form forward-error bounds;
//! * [`isotropy`] and [`orbit`] — the isotropy action and a derivative-free
//!   descent minimizing the γ₂ growth factor along orbits;
//! * [`slp`] — straight-line programs for the linear maps `L`, `R`, `P`
//!   with common-subexpression, kernel and transposition passes;
//! * [`sparsify`] — alternative-basis factorizations with sparse cores;
//! * [`exec`] — recursive execution in double precision;
//! * [`bench`] — input generators, a double-double reference product and
//!   the accuracy benchmark harness.

pub mod bench;
pub mod bounds;
pub mod coeff;
pub mod error;
pub mod exec;
pub mod hmrep;
pub mod isotropy;
pub mod matrix;
pub mod norms;
pub mod optim;
pub mod orbit;
pub mod schemes;
pub mod sms;
pub mod slp;
pub mod sparsify;

pub use bench::{gen_matrix, reference_mm, run_bench, BenchConfig, BenchOutcome, BenchPlan, BenchRecord, Dist};
pub use bounds::{error_bound, BoundReport};
pub use coeff::Coefficient;
pub use error::{Error, Result};
pub use exec::{altbasis_mm, classical_mm, recursive_mm, AltPlan, CompiledScheme, RecursionPlan};
pub use hmrep::{apply_bilinear, validate_matmul, HMRep, ValidationReport};
pub use matrix::{CoeffMatrix, Matrix};
pub use norms::{gamma2, growth_factor, NormId};
pub use schemes::{load_scheme, SchemeId};
pub use slp::{best_of, Slp, SlpOptions};
