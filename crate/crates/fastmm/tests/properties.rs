//! Property-based checks across module boundaries: isotropy orbits,
//! straight-line program synthesis and transposition, the SMS and program
//! text formats, and the recursive executor.

use std::sync::Arc;

use proptest::prelude::*;

use fastmm::coeff::Coefficient;
use fastmm::exec::{classical_mm, recursive_mm, CompiledScheme, RecursionPlan};
use fastmm::isotropy::{act, iwasawa, IwasawaPoint};
use fastmm::slp::{best_of, check_equivalence, transpose_slp};
use fastmm::sms::{parse_sms, write_sms};
use fastmm::{gen_matrix, load_scheme, reference_mm, validate_matmul, CoeffMatrix, Dist, Matrix, SchemeId, Slp, SlpOptions};

/// Small integer matrices with every row and column nonzero.
fn dense_int_matrix() -> impl Strategy<Value = CoeffMatrix> {
    (1usize..=5, 1usize..=5).prop_flat_map(|(r, c)| {
        proptest::collection::vec(-2i64..=2, r * c).prop_filter_map("zero row or column", move |v| {
            let row_ok = (0..r).all(|i| (0..c).any(|j| v[i * c + j] != 0));
            let col_ok = (0..c).all(|j| (0..r).any(|i| v[i * c + j] != 0));
            (row_ok && col_ok).then(|| {
                CoeffMatrix::from_vec(r, c, v.iter().map(|&x| Coefficient::from_int(x)).collect()).unwrap()
            })
        })
    })
}

/// Small rational matrices, zeros allowed.
fn rational_matrix() -> impl Strategy<Value = CoeffMatrix> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(r, c)| {
        proptest::collection::vec((-6i64..=6, 1i64..=5), r * c).prop_map(move |v| {
            CoeffMatrix::from_vec(r, c, v.into_iter().map(|(p, q)| Coefficient::from_frac(p, q)).collect()).unwrap()
        })
    })
}

fn strassen() -> Arc<CompiledScheme> {
    Arc::new(CompiledScheme::new(&load_scheme(&SchemeId::Strassen).unwrap(), &SlpOptions::default()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn orbit_points_keep_strassen_valid(x in proptest::collection::vec(-0.6f64..0.6, 6)) {
        let h = load_scheme(&SchemeId::Strassen).unwrap();
        prop_assert_eq!(x.len(), IwasawaPoint::param_count(h.dims()));
        let g = iwasawa(&IwasawaPoint::from_log_coords(h.dims(), &x)).unwrap();
        let moved = act(&g, &h).unwrap();
        prop_assert!(validate_matmul(&moved).valid);
        let back = act(&g.inverse().unwrap(), &moved).unwrap();
        prop_assert!(back.lf().max_abs_diff(h.lf()) < 1e-9);
        prop_assert!(back.pf().max_abs_diff(h.pf()) < 1e-9);
    }

    #[test]
    fn synthesized_programs_realize_their_matrix(m in dense_int_matrix()) {
        let s = best_of(&m, &SlpOptions::default());
        prop_assert!(s.realizes(&m));
        prop_assert!(check_equivalence(&s, &m, 20, 5));
        prop_assert!(s.counts().adds <= m.nnz() - m.nonempty_rows());
    }

    #[test]
    fn transposition_identity_holds(m in dense_int_matrix()) {
        let s = best_of(&m, &SlpOptions::default());
        let t = transpose_slp(&s).unwrap();
        prop_assert!(t.realizes(&m.transpose()));
        let delta = t.counts().adds as i64 - s.counts().adds as i64;
        prop_assert_eq!(delta, s.n_out as i64 - s.n_in as i64);
        let tt = transpose_slp(&t).unwrap();
        prop_assert_eq!(tt.counts(), s.counts());
    }

    #[test]
    fn program_text_round_trips(m in rational_matrix()) {
        let s = best_of(&m, &SlpOptions::default());
        let back = Slp::parse(&s.to_text()).unwrap();
        prop_assert_eq!(back.to_matrix(), s.to_matrix());
        prop_assert_eq!(back.counts(), s.counts());
    }

    #[test]
    fn sms_round_trips(m in rational_matrix()) {
        let text = write_sms(&m, false).unwrap();
        prop_assert_eq!(parse_sms(&text).unwrap(), m);
    }

    #[test]
    fn recursion_matches_classical(
        (bm, bk, bn) in (1usize..=3, 1usize..=3, 1usize..=3),
        ell in 1usize..=3,
        seed in any::<u64>(),
    ) {
        let f = 1 << ell;
        let a = gen_matrix(Dist::Normal01, bm * f, bk * f, seed);
        let b = gen_matrix(Dist::Uniform11, bk * f, bn * f, seed ^ 1);
        let c = recursive_mm(&RecursionPlan::uniform(strassen(), ell), &a, &b).unwrap();
        let want = classical_mm(&a, &b).unwrap();
        prop_assert!(c.max_abs_diff(&want) <= 1e-12 * (bk * f) as f64 * 16.0);
    }

    #[test]
    fn reference_is_exact_on_small_integers(seed in any::<u64>(), n in 1usize..=12) {
        let round = |m: Matrix| Matrix::from_fn(m.rows(), m.cols(), |i, j| (m.row(i)[j] * 100.0).round());
        let a = round(gen_matrix(Dist::Uniform11, n, n, seed));
        let b = round(gen_matrix(Dist::Uniform11, n, n, seed ^ 2));
        let r = reference_mm(&a, &b).unwrap();
        prop_assert_eq!(r.max_abs_error(&classical_mm(&a, &b).unwrap()).unwrap(), 0.0);
    }
}
