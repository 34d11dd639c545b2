//! Shared fixtures for the criterion benchmarks in `benches/`.
//!
//! The benchmarks time the library's building blocks — SLP synthesis, the
//! recursive executor and the double-double reference — on fixed inputs.
//! They are developer tooling: accuracy, not speed, is what the library
//! measures, and nothing here is tuned for performance.

use fastmm::{gen_matrix, load_scheme, CompiledScheme, Dist, HMRep, Matrix, RecursionPlan, SchemeId, SlpOptions};
use std::sync::Arc;

/// A pair of `n × n` uniform matrices with a fixed seed.
pub fn square_pair(n: usize) -> (Matrix, Matrix) {
    (gen_matrix(Dist::Uniform11, n, n, 1), gen_matrix(Dist::Uniform11, n, n, 2))
}

/// A bundled scheme.
pub fn scheme(id: SchemeId) -> HMRep {
    load_scheme(&id).expect("bundled schemes load")
}

/// `levels` levels of a bundled scheme, compiled with the default options.
pub fn uniform_plan(id: SchemeId, levels: usize) -> RecursionPlan {
    let h = scheme(id);
    let c = CompiledScheme::new(&h, &SlpOptions::for_rank(h.rank())).expect("bundled schemes compile");
    RecursionPlan::uniform(Arc::new(c), levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        let (a, b) = square_pair(8);
        assert_eq!((a.rows(), b.cols()), (8, 8));
        assert_eq!(uniform_plan(SchemeId::Strassen, 2).levels().len(), 2);
    }
}
