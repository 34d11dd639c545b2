//! Closed-form forward-error bounds for recursive bilinear algorithms.
//!
//! A recursive algorithm that applies a scheme of growth factor `γ` for `ℓ`
//! levels above a classical `k₀`-dimensional base case satisfies
//!
//! ```text
//! ‖Ĉ − C‖_p ≤ E⁽ℓ⁾ ‖A‖_q ‖B‖_q ε + O(ε²),
//! E⁽ℓ⁾ = γ^ℓ ( E⁽⁰⁾ + Q₀ A⁽⁰⁾ Σ_{i<ℓ} (A/γ)^i ),
//! ```
//!
//! where `A` is the amplification factor of a genuine matrix product and
//! `A⁽⁰⁾`, `E⁽⁰⁾` describe the base case.  For matrix-multiplication
//! schemes `A < γ` and the geometric sum closes, giving
//! `E⁽ℓ⁾ = γ^ℓ (E⁽⁰⁾ + A⁽⁰⁾ Q₀ γ/(γ−A)) − A⁽⁰⁾ Q₀ γ A^ℓ/(γ−A)`; the first
//! bracket is the *leading coefficient* of `(K/k₀)^{log_k γ}`.  For a
//! general bilinear map the amplification is `γ` itself and the bound picks
//! up a logarithmic factor: `E⁽ℓ⁾ = γ^ℓ (E⁽⁰⁾ + ℓ Q₀ γ⁽⁰⁾)`.
//!
//! All bounds are in units of the unit roundoff `ε`; the negative trailing
//! terms are kept in [`BoundReport::e_ell`].

use crate::error::{Error, Result};
use crate::hmrep::{validate_matmul, HMRep};
use crate::norms::{growth_factor, map_norm, q0, NormId};
use crate::sparsify::CoBTriple;

/// The unit roundoff `ε` multiplying every bound, taken as the double
/// precision machine epsilon `2⁻⁵²` (twice the round-to-nearest roundoff,
/// so bounds stated with it are conservative).
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON;

/// Relative tolerance under which `γ` and `A` are considered equal (the
/// conventional algorithm in the max-norm has `γ = A = k` exactly).
const TIE_TOL: f64 = 1e-12;

/// Whether a scheme is analysed as a matrix product or as a general
/// bilinear map.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TensorKind {
    /// A validated matrix-multiplication scheme.
    MatMul,
    /// Any other bilinear map (e.g. a sparse alternative-basis core).
    General,
}

/// Error analysis of one scheme for one choice of norms.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    /// Output norm.
    pub p: NormId,
    /// Input norm.
    pub q: NormId,
    /// Recursion depth `ℓ`.
    pub ell: u32,
    /// Base-case inner dimension `k₀`.
    pub k0: usize,
    /// Inner dimension `k` of the scheme (the logarithm base).
    pub k: usize,
    /// Growth factor `γ_{p,q}`.
    pub gamma: f64,
    /// Amplification factor `A_{p,q}`.
    pub amp: f64,
    /// Base-case amplification `A⁽⁰⁾_{p,q}`.
    pub amp0: f64,
    /// Base-case error factor `E⁽⁰⁾`.
    pub e0: f64,
    /// Sparsity constant (for alternative-basis bounds, the sum
    /// `Q₀ + Q_φ + Q_ψ + Q_{νᵀ}`).
    pub q0: usize,
    /// Error factor `E⁽ℓ⁾` including the negative trailing terms.
    pub e_ell: f64,
    /// `log_k γ`.
    pub exponent: f64,
    /// Coefficient of `(K/k₀)^{log_k γ}` in the closed form, when the
    /// geometric sum closes (`γ > A`); `None` otherwise.
    pub leading_coeff: Option<f64>,
    /// How the scheme was analysed.
    pub kind: TensorKind,
}

/// Amplification factor `A_{p,q}` of one level: for matrix products
/// `(∞,∞) ↦ k`, `(2,2) ↦ 1`, `(∞,2) ↦ 1`, `(2,∞) ↦ k^{3/2}`; for a general
/// bilinear map the growth factor itself.
pub fn amplification(p: NormId, q: NormId, k: usize, is_mm: bool, gamma: f64) -> f64 {
    if !is_mm {
        return gamma;
    }
    let k = k as f64;
    match (p, q) {
        (NormId::Max, NormId::Max) => k,
        (NormId::Two, NormId::Max) => k.powf(1.5),
        (_, NormId::Two) => 1.0,
        // The 1-norm is only ever used as a dual; treat it like the max-norm
        // input case, which is the conservative choice.
        (_, NormId::One) | (NormId::One, _) => k.powf(1.5),
    }
}

/// Base-case constants `(E⁽⁰⁾, A⁽⁰⁾)` of the classical `k₀`-dimensional
/// product: `(k₀², k₀)`, `(k₀, 1)`, `(k₀, 1)`, `(k₀^{5/2}, k₀^{3/2})` for
/// `(∞,∞), (2,2), (∞,2), (2,∞)`.
pub fn base_case(p: NormId, q: NormId, k0: usize) -> (f64, f64) {
    let k0 = k0 as f64;
    match (p, q) {
        (NormId::Max, NormId::Max) => (k0 * k0, k0),
        (_, NormId::Two) => (k0, 1.0),
        _ => (k0.powf(2.5), k0.powf(1.5)),
    }
}

/// Growth factor of the conventional `⟨k₀,k₀,k₀⟩` scheme in closed form:
/// every product has unit weight and each of the `k₀²` outputs sums `k₀`
/// of them, so `γ = ‖(k₀, …, k₀)‖_p` independently of `q`.
pub fn conventional_growth(p: NormId, k0: usize) -> f64 {
    let k = k0 as f64;
    match p {
        NormId::Max => k,
        NormId::Two => k * k,
        NormId::One => k * k * k,
    }
}

/// Error bound of `ℓ` recursive levels of `h` above a classical base case
/// of inner dimension `k0`.  The scheme is validated to decide between the
/// matrix-product and general-tensor forms.
pub fn error_bound(h: &HMRep, p: NormId, q: NormId, ell: u32, k0: usize) -> Result<BoundReport> {
    let kind = if validate_matmul(h).valid { TensorKind::MatMul } else { TensorKind::General };
    error_bound_as(h, kind, p, q, ell, k0)
}

/// [`error_bound`] with the tensor kind supplied by the caller.
///
/// Fails with [`Error::NonConforming`] when a matrix-product scheme has
/// `γ < A`, which no valid scheme can have.
pub fn error_bound_as(h: &HMRep, kind: TensorKind, p: NormId, q: NormId, ell: u32, k0: usize) -> Result<BoundReport> {
    if k0 == 0 {
        return Err(Error::InvalidArgument("base-case dimension k0 must be positive".into()));
    }
    let gamma = growth_factor(h, p, q);
    let k = h.dims().1;
    let q0v = q0(h);
    let (e0, amp0) = base_case(p, q, k0);
    let mut report = BoundReport {
        p,
        q,
        ell,
        k0,
        k,
        gamma,
        amp: 0.0,
        amp0,
        e0,
        q0: q0v,
        e_ell: 0.0,
        exponent: log_base(gamma, k),
        leading_coeff: None,
        kind,
    };
    match kind {
        TensorKind::MatMul => {
            let amp = amplification(p, q, k, true, gamma);
            report.amp = amp;
            if gamma < amp * (1.0 - TIE_TOL) {
                return Err(Error::NonConforming(format!(
                    "{}: growth factor {gamma} is below the amplification factor {amp} in ({p},{q})",
                    h.name
                )));
            }
            let qf = q0v as f64;
            let g_l = gamma.powi(ell as i32);
            if (gamma - amp).abs() <= TIE_TOL * amp {
                report.e_ell = g_l * (e0 + qf * amp0 * ell as f64);
            } else {
                let q_amp = qf * gamma / (gamma - amp);
                report.e_ell = g_l * (e0 + amp0 * q_amp) - amp0 * q_amp * amp.powi(ell as i32);
                report.leading_coeff = Some(e0 + amp0 * q_amp);
            }
        }
        TensorKind::General => {
            let gamma_base = conventional_growth(p, k0);
            report.amp = gamma;
            report.amp0 = gamma_base;
            report.e_ell = gamma.powi(ell as i32) * (e0 + ell as f64 * q0v as f64 * gamma_base);
        }
    }
    Ok(report)
}

/// Error bound of a schedule that applies a different matrix-product
/// scheme at each level (outermost first) above a classical base case.
///
/// Unrolls the recurrence `t_i = γ_i (t_{i−1} + A⁽⁰⁾ (Π_{j<i} A_j) Q₀⁽ⁱ⁾)`
/// from the innermost level outwards, which reduces to the closed
/// forms when every level uses the same scheme.
pub fn error_bound_plan(levels: &[&HMRep], p: NormId, q: NormId, k0: usize) -> Result<f64> {
    let (e0, amp0) = base_case(p, q, k0);
    let mut t = e0;
    let mut amp_inner = 1.0;
    for h in levels.iter().rev() {
        let gamma = growth_factor(h, p, q);
        let amp = amplification(p, q, h.dims().1, true, gamma);
        t = gamma * (t + amp0 * amp_inner * q0(h) as f64);
        amp_inner *= amp;
    }
    Ok(t)
}

/// Growth factor and error bound of an alternative-basis algorithm: the
/// sparse core `cob` (a general bilinear map) wrapped by its changes of
/// basis.
///
/// `γ(mmab) = γ(core) · ‖φ‖_q ‖ψ‖_q ‖ν‖_p`, with the map norms of
/// [`map_norm`] and `ν` the matrix with `P = νᵀ·P_s`; the error factor is
/// `γ(mmab)^ℓ (E⁽⁰⁾ + ℓ γ⁽⁰⁾ (Q₀ + Q_φ + Q_ψ + Q_{νᵀ}))`.
pub fn altbasis_bound(cob: &CoBTriple, p: NormId, q: NormId, ell: u32, k0: usize) -> Result<BoundReport> {
    cob.check_invertible()?;
    let core = cob.core()?;
    let base = error_bound_as(&core, TensorKind::General, p, q, ell, k0)?;
    let (phi, psi, nu) = (cob.phi.to_f64(), cob.psi.to_f64(), cob.nu.to_f64());
    let gamma = base.gamma * map_norm(&phi, q) * map_norm(&psi, q) * map_norm(&nu, p);
    let q_total = base.q0 + max_row_weight(&cob.phi) + max_row_weight(&cob.psi) + max_row_weight(&cob.nu.transpose());
    let (e0, _) = base_case(p, q, k0);
    let e_ell = gamma.powi(ell as i32) * (e0 + ell as f64 * base.amp0 * q_total as f64);
    Ok(BoundReport {
        gamma,
        amp: gamma,
        q0: q_total,
        e_ell,
        exponent: log_base(gamma, base.k),
        leading_coeff: None,
        ..base
    })
}

fn max_row_weight(m: &crate::matrix::CoeffMatrix) -> usize {
    (0..m.rows()).map(|i| m.row_nnz(i)).max().unwrap_or(0)
}

fn log_base(x: f64, base: usize) -> f64 {
    if base <= 1 {
        f64::NAN
    } else {
        x.ln() / (base as f64).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::{conventional, load_scheme, SchemeId};

    fn scheme(id: SchemeId) -> HMRep {
        load_scheme(&id).unwrap()
    }

    #[test]
    fn amplification_examples() {
        assert_eq!(amplification(NormId::Max, NormId::Max, 2, true, 0.0), 2.0);
        assert!((amplification(NormId::Two, NormId::Max, 2, true, 0.0) - 2.828).abs() < 1e-3);
        assert_eq!(amplification(NormId::Two, NormId::Two, 9, true, 0.0), 1.0);
        assert_eq!(amplification(NormId::Two, NormId::Two, 9, false, 7.5), 7.5);
    }

    #[test]
    fn strassen_leading_coefficient() {
        let r = error_bound(&scheme(SchemeId::Strassen), NormId::Max, NormId::Max, 5, 1).unwrap();
        assert!((r.leading_coeff.unwrap() - 10.60).abs() < 0.01);
        assert!((r.exponent - 3.59).abs() < 0.01);
        assert_eq!(r.q0, 8);
    }

    #[test]
    fn winograd_leading_coefficient() {
        let r = error_bound(&scheme(SchemeId::Winograd), NormId::Max, NormId::Max, 5, 1).unwrap();
        assert!((r.leading_coeff.unwrap() - 12.25).abs() < 0.01);
        assert!((r.exponent - 4.17).abs() < 0.01);
    }

    #[test]
    fn level_zero_is_base_case() {
        for (p, q) in NormId::table_pairs() {
            let r = error_bound(&scheme(SchemeId::Strassen), p, q, 0, 4).unwrap();
            assert_eq!(r.e_ell, r.e0);
        }
        let c = error_bound(&scheme(SchemeId::Conventional(2, 2, 2)), NormId::Max, NormId::Max, 0, 16).unwrap();
        assert_eq!(c.e_ell, 256.0);
    }

    #[test]
    fn closed_form_matches_recurrence() {
        let s = scheme(SchemeId::Winograd);
        for (p, q) in NormId::table_pairs() {
            for ell in 0..6 {
                let r = error_bound(&s, p, q, ell, 3).unwrap();
                let levels = vec![&s; ell as usize];
                let t = error_bound_plan(&levels, p, q, 3).unwrap();
                assert!((r.e_ell - t).abs() <= 1e-9 * t, "({p},{q}) ell={ell}: {} vs {t}", r.e_ell);
                assert!(r.e_ell >= r.e0);
            }
        }
    }

    #[test]
    fn conventional_ties_gamma_and_amplification() {
        let c = scheme(SchemeId::Conventional(2, 2, 2));
        let r = error_bound(&c, NormId::Max, NormId::Max, 3, 1).unwrap();
        assert!(r.leading_coeff.is_none());
        // Recurrence value: 2³ (1 + 4·1·3).
        assert!((r.e_ell - 8.0 * 13.0).abs() < 1e-12);
    }

    #[test]
    fn conventional_growth_closed_form() {
        for k in 1..=3 {
            let c = conventional(k, k, k);
            for p in [NormId::Max, NormId::Two, NormId::One] {
                for q in [NormId::Max, NormId::Two] {
                    assert!((growth_factor(&c, p, q) - conventional_growth(p, k)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn general_tensor_form() {
        let core = scheme(SchemeId::AltBasisCore);
        let r = error_bound(&core, NormId::Max, NormId::Max, 2, 1).unwrap();
        assert_eq!(r.kind, TensorKind::General);
        assert!((r.e_ell - r.gamma.powi(2) * (1.0 + 2.0 * r.q0 as f64)).abs() < 1e-9);
    }

    #[test]
    fn amplification_below_growth_for_bundled() {
        for id in SchemeId::bundled_matmul() {
            let h = scheme(id.clone());
            for (p, q) in NormId::table_pairs() {
                let g = growth_factor(&h, p, q);
                let a = amplification(p, q, h.dims().1, true, g);
                // The conventional algorithm attains equality in the max-norm.
                assert!(a <= g * (1.0 + 1e-12), "{id} ({p},{q}): A={a} γ={g}");
            }
        }
    }
}
