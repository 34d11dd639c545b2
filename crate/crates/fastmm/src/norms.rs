//! Vector norms, growth factors and sparsity constants of HM
//! representations.
//!
//! For a bilinear scheme `(L, R, P)` the growth factor with respect to an
//! output norm `p` and an input norm `q` is
//!
//! ```text
//! γ_{p,q} = ‖ ( Σᵢ ‖Lᵢ‖_{q*} ‖Rᵢ‖_{q*} |p_{j,i}| )_j ‖_p
//! ```
//!
//! where `Lᵢ`, `Rᵢ` are rows and `q*` is the dual norm of `q`.  Its smooth
//! relaxation `γ₂ = Σᵢ ‖Lᵢ‖₂ ‖Rᵢ‖₂ ‖P_{·,i}‖₂` is the objective minimized
//! along isotropy orbits.  Norms are evaluated in double precision on the
//! float projection; Hamming weights always use the exact coefficients when
//! they are available, so "zero" means exactly zero.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::hmrep::HMRep;
use crate::matrix::Matrix;

/// The vector norms used by the error analysis.
///
/// [`NormId::One`] only appears as the dual of [`NormId::Max`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NormId {
    /// The 1-norm (sum of absolute values).
    One,
    /// The Euclidean norm.
    Two,
    /// The max-norm (largest absolute value).
    Max,
}

impl NormId {
    /// The dual norm: `One ↔ Max`, `Two ↦ Two`.
    pub fn dual(self) -> NormId {
        match self {
            NormId::One => NormId::Max,
            NormId::Two => NormId::Two,
            NormId::Max => NormId::One,
        }
    }

    /// Short label used in reports (`1`, `2`, `inf`).
    pub fn label(self) -> &'static str {
        match self {
            NormId::One => "1",
            NormId::Two => "2",
            NormId::Max => "inf",
        }
    }

    /// The four `(p, q)` pairs of the error analysis, in table order
    /// `(∞,∞), (2,2), (∞,2), (2,∞)`.
    pub fn table_pairs() -> [(NormId, NormId); 4] {
        [
            (NormId::Max, NormId::Max),
            (NormId::Two, NormId::Two),
            (NormId::Max, NormId::Two),
            (NormId::Two, NormId::Max),
        ]
    }
}

impl fmt::Display for NormId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for NormId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "one" => Ok(NormId::One),
            "2" | "two" => Ok(NormId::Two),
            "inf" | "infinity" | "max" | "∞" => Ok(NormId::Max),
            other => Err(Error::InvalidArgument(format!("unknown norm '{other}' (expected 1, 2 or inf)"))),
        }
    }
}

/// `‖v‖_p` in double precision.
pub fn vector_norm(v: &[f64], p: NormId) -> f64 {
    match p {
        NormId::One => v.iter().map(|x| x.abs()).sum(),
        NormId::Two => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        NormId::Max => v.iter().fold(0.0, |m, x| m.max(x.abs())),
    }
}

/// Number of non-zero entries of a float vector.
pub fn hamming_weight(v: &[f64]) -> usize {
    v.iter().filter(|x| **x != 0.0).count()
}

/// Growth factor `γ_{p,q}` of a bilinear scheme.
pub fn growth_factor(h: &HMRep, p: NormId, q: NormId) -> f64 {
    let qs = q.dual();
    let (l, r, pm) = (h.lf(), h.rf(), h.pf());
    let weights: Vec<f64> =
        (0..h.rank()).map(|i| vector_norm(l.row(i), qs) * vector_norm(r.row(i), qs)).collect();
    let sums: Vec<f64> = (0..pm.rows())
        .map(|j| pm.row(j).iter().zip(&weights).map(|(pji, w)| pji.abs() * w).sum())
        .collect();
    vector_norm(&sums, p)
}

/// The relaxed growth factor `γ₂ = Σᵢ ‖Lᵢ‖₂ ‖Rᵢ‖₂ ‖P_{·,i}‖₂`.
pub fn gamma2(h: &HMRep) -> f64 {
    gamma2_of(h.lf(), h.rf(), h.pf())
}

/// [`gamma2`] on raw matrices `L`, `R`, `P` (with `P` of shape `mn × r`).
pub fn gamma2_of(l: &Matrix, r: &Matrix, p: &Matrix) -> f64 {
    (0..l.rows())
        .map(|i| {
            let pc: f64 = (0..p.rows()).map(|j| p[(j, i)] * p[(j, i)]).sum::<f64>().sqrt();
            vector_norm(l.row(i), NormId::Two) * vector_norm(r.row(i), NormId::Two) * pc
        })
        .sum()
}

/// The sparsity constant
/// `Q₀ = max_j ( ‖P_j‖₀ + max_{i : p_{j,i} ≠ 0} (‖Lᵢ‖₀ + ‖Rᵢ‖₀) )`.
pub fn q0(h: &HMRep) -> usize {
    let lr: Vec<usize> = (0..h.rank()).map(|i| h.l_row_weight(i) + h.r_row_weight(i)).collect();
    let (m, _, n) = h.dims();
    (0..m * n)
        .map(|j| {
            let inner = (0..h.rank()).filter(|&i| h.p_nonzero(j, i)).map(|i| lr[i]).max().unwrap_or(0);
            h.p_row_weight(j) + inner
        })
        .max()
        .unwrap_or(0)
}

/// Generalized row norm `‖M‖_{2,s} = (Σ_rows ‖row‖₂^s)^{1/s}`.
///
/// Negative `s` gives a generalized (power) mean of the row norms, which
/// is what the lower-bound diagnostics use.  `s = 0` is rejected.
pub fn l2s_norm(m: &Matrix, s: f64) -> f64 {
    assert!(s != 0.0, "the (2,s) norm is undefined for s = 0");
    (0..m.rows()).map(|i| vector_norm(m.row(i), NormId::Two).powf(s)).sum::<f64>().powf(1.0 / s)
}

/// The three norm quantities compared for every scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormTable {
    /// `γ₂`.
    pub gamma2: f64,
    /// `‖L‖_{2,3}·‖R‖_{2,3}·‖Pᵀ‖_{2,3}`.
    pub l23_product: f64,
    /// `‖L‖_F·‖R‖_F·‖P‖_F`.
    pub frobenius_product: f64,
}

/// γ₂ together with its two upper bounds (Hölder and Frobenius).
///
/// For every scheme `gamma2 ≤ l23_product ≤ frobenius_product`.
pub fn norm_table(h: &HMRep) -> NormTable {
    let pt = h.pf().transpose();
    NormTable {
        gamma2: gamma2(h),
        l23_product: l2s_norm(h.lf(), 3.0) * l2s_norm(h.rf(), 3.0) * l2s_norm(&pt, 3.0),
        frobenius_product: h.lf().frobenius() * h.rf().frobenius() * h.pf().frobenius(),
    }
}

/// Operator-style norm of a linear map `A` as used for a change of basis:
/// the `p`-norm of the vector of dual-`p` norms of the rows of `A`.
///
/// For `p = ∞` this is the usual induced max-norm (largest absolute row
/// sum); for `p = 2` it bounds `‖A x‖₂ ≤ ‖A‖·‖x‖₂` by Cauchy–Schwarz.
pub fn map_norm(a: &Matrix, p: NormId) -> f64 {
    let rows: Vec<f64> = (0..a.rows()).map(|i| vector_norm(a.row(i), p.dual())).collect();
    vector_norm(&rows, p)
}
