//! The isotropy action on HM representations.
//!
//! A triple `g = (U, V, W)` of invertible matrices (`m×m`, `k×k`, `n×n`)
//! maps a matrix-multiplication scheme to another one of the same rank:
//!
//! ```text
//! L ↦ L·(U⁻¹ ⊗ Vᵀ),   R ↦ R·(V⁻¹ ⊗ Wᵀ),   P ↦ (U ⊗ W⁻ᵀ)·P
//! ```
//!
//! The transformed scheme computes `U·β(U⁻¹AV, V⁻¹BW)·W⁻¹ = AB`; with the
//! row-major vectorization `vec(XAY) = (X ⊗ Yᵀ)·vec(A)`, which fixes the
//! order of the Kronecker factors.  Only the upper-triangular Iwasawa part of each
//! factor affects `γ₂` — orthogonal factors leave it unchanged — so the
//! orbit search is parametrized by [`IwasawaPoint`]s: each factor is
//! `H_s(ρ)·P_s(ξ)` with `H_s = diag(ρ₁,…,ρ_{s−1}, 1/Πρᵢ)` and `P_s` unit
//! upper triangular.

use crate::error::{Error, Result};
use crate::hmrep::HMRep;
use crate::matrix::Matrix;

/// Smallest acceptable `|det|` of a factor before normalization.
const SINGULAR_TOL: f64 = 1e-12;

/// An isotropy `(U, V, W)`, each factor normalized to `|det| = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Isotropy {
    u: Matrix,
    v: Matrix,
    w: Matrix,
}

fn normalize(a: Matrix, name: &str) -> Result<Matrix> {
    if a.rows() != a.cols() || a.rows() == 0 {
        return Err(Error::Dimension(format!("isotropy factor {name} must be square and non-empty")));
    }
    let det = a.determinant();
    if !det.is_finite() || det.abs() < SINGULAR_TOL {
        return Err(Error::Singular(format!("isotropy factor {name} is singular (det = {det:e})")));
    }
    let s = det.abs().powf(-1.0 / a.rows() as f64);
    Ok(if (s - 1.0).abs() < 1e-15 { a } else { a.scale(s) })
}

impl Isotropy {
    /// Builds an isotropy, rescaling each factor to unit `|det|`.
    pub fn new(u: Matrix, v: Matrix, w: Matrix) -> Result<Self> {
        Ok(Isotropy { u: normalize(u, "U")?, v: normalize(v, "V")?, w: normalize(w, "W")? })
    }

    /// The identity isotropy for `⟨m,k,n⟩`.
    pub fn identity(m: usize, k: usize, n: usize) -> Self {
        Isotropy { u: Matrix::identity(m), v: Matrix::identity(k), w: Matrix::identity(n) }
    }

    /// The factors `(U, V, W)`.
    pub fn factors(&self) -> (&Matrix, &Matrix, &Matrix) {
        (&self.u, &self.v, &self.w)
    }

    /// Dimensions `(m, k, n)` acted upon.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.u.rows(), self.v.rows(), self.w.rows())
    }

    /// True when every factor is exactly the identity.
    pub fn is_identity(&self) -> bool {
        let (m, k, n) = self.dims();
        self.u == Matrix::identity(m) && self.v == Matrix::identity(k) && self.w == Matrix::identity(n)
    }

    /// Componentwise inverse.
    pub fn inverse(&self) -> Result<Self> {
        Ok(Isotropy { u: self.u.inverse()?, v: self.v.inverse()?, w: self.w.inverse()? })
    }

    /// The transformed `(L, R, P)` without building an [`HMRep`].
    pub fn transform(&self, l: &Matrix, r: &Matrix, p: &Matrix) -> Result<(Matrix, Matrix, Matrix)> {
        let (m, k, n) = self.dims();
        if l.cols() != m * k || r.cols() != k * n || p.rows() != m * n {
            return Err(Error::Dimension(format!("isotropy of <{m},{k},{n}> applied to mismatched matrices")));
        }
        let ui = self.u.inverse()?;
        let vi = self.v.inverse()?;
        let wit = self.w.inverse()?.transpose();
        let l2 = l.matmul(&ui.kron(&self.v.transpose()));
        let r2 = r.matmul(&vi.kron(&self.w.transpose()));
        let p2 = self.u.kron(&wit).matmul(p);
        Ok((l2, r2, p2))
    }
}

/// Applies `g` to `h`.  The identity returns `h` unchanged (still exact);
/// any other isotropy yields a float-backed representation.
pub fn act(g: &Isotropy, h: &HMRep) -> Result<HMRep> {
    if g.dims() != h.dims() {
        return Err(Error::Dimension(format!("isotropy for {:?} applied to {:?}", g.dims(), h.dims())));
    }
    if g.is_identity() {
        return Ok(h.clone());
    }
    let (l, r, p) = g.transform(h.lf(), h.rf(), h.pf())?;
    HMRep::new_float(h.dims(), l, r, p, format!("{}-iso", h.name), format!("isotropy image of {}", h.name))
}

/// `g1 ∘ g2 = (U₁U₂, V₁V₂, W₁W₂)`, so that
/// `act(compose(g1, g2), h) = act(g1, act(g2, h))`.
pub fn compose(g1: &Isotropy, g2: &Isotropy) -> Result<Isotropy> {
    if g1.dims() != g2.dims() {
        return Err(Error::Dimension("composing isotropies of different shapes".into()));
    }
    Ok(Isotropy { u: g1.u.matmul(&g2.u), v: g1.v.matmul(&g2.v), w: g1.w.matmul(&g2.w) })
}

/// Number of Iwasawa parameters of one `s×s` factor: `(s+2)(s−1)/2`.
pub fn factor_param_count(s: usize) -> usize {
    (s + 2) * (s - 1) / 2
}

/// A point of the Iwasawa parametrization.
///
/// For each factor size `s ∈ {m, k, n}` (in that order) the parameter
/// vector holds `s−1` diagonal entries `ρ` (strictly positive) followed by
/// the `s(s−1)/2` strictly-upper entries `ξ` of `P_s`, read row by row.
#[derive(Clone, Debug, PartialEq)]
pub struct IwasawaPoint {
    /// Dimensions `(m, k, n)`.
    pub dims: (usize, usize, usize),
    /// Concatenated `(ρ, ξ)` blocks of the three factors.
    pub params: Vec<f64>,
}

impl IwasawaPoint {
    /// The identity point (all `ρ = 1`, all `ξ = 0`).
    pub fn identity(dims: (usize, usize, usize)) -> Self {
        let mut params = Vec::new();
        for s in [dims.0, dims.1, dims.2] {
            params.extend(std::iter::repeat_n(1.0, s - 1));
            params.extend(std::iter::repeat_n(0.0, s * (s - 1) / 2));
        }
        IwasawaPoint { dims, params }
    }

    /// Total parameter count `Σ (s+2)(s−1)/2`.
    pub fn param_count(dims: (usize, usize, usize)) -> usize {
        factor_param_count(dims.0) + factor_param_count(dims.1) + factor_param_count(dims.2)
    }

    /// Maps log-diagonal coordinates (`ρ = e^θ`) to a point.
    pub fn from_log_coords(dims: (usize, usize, usize), x: &[f64]) -> Self {
        let mut params = x.to_vec();
        let mut off = 0;
        for s in [dims.0, dims.1, dims.2] {
            for p in params.iter_mut().skip(off).take(s - 1) {
                *p = p.exp();
            }
            off += factor_param_count(s);
        }
        IwasawaPoint { dims, params }
    }

    /// Inverse of [`IwasawaPoint::from_log_coords`].
    pub fn to_log_coords(&self) -> Vec<f64> {
        let mut x = self.params.clone();
        let mut off = 0;
        for s in [self.dims.0, self.dims.1, self.dims.2] {
            for p in x.iter_mut().skip(off).take(s - 1) {
                *p = p.ln();
            }
            off += factor_param_count(s);
        }
        x
    }
}

/// `H_s(ρ)·P_s(ξ)` for one factor.
pub fn iwasawa_factor(s: usize, rho: &[f64], xi: &[f64]) -> Result<Matrix> {
    if rho.len() != s - 1 || xi.len() != s * (s - 1) / 2 {
        return Err(Error::Dimension(format!("wrong Iwasawa parameter count for a {s}x{s} factor")));
    }
    if let Some(bad) = rho.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidArgument(format!("diagonal parameter {bad} is not strictly positive")));
    }
    let mut diag: Vec<f64> = rho.to_vec();
    diag.push(1.0 / rho.iter().product::<f64>());
    let mut m = Matrix::zeros(s, s);
    let mut t = 0;
    let mut upper = Matrix::identity(s);
    for i in 0..s {
        for j in i + 1..s {
            upper[(i, j)] = xi[t];
            t += 1;
        }
    }
    for i in 0..s {
        for j in i..s {
            m[(i, j)] = diag[i] * upper[(i, j)];
        }
    }
    Ok(m)
}

/// The isotropy of an Iwasawa point (every factor has determinant 1 by
/// construction).
pub fn iwasawa(pt: &IwasawaPoint) -> Result<Isotropy> {
    if pt.params.len() != IwasawaPoint::param_count(pt.dims) {
        return Err(Error::Dimension(format!(
            "{} parameters for dimensions {:?}, expected {}",
            pt.params.len(),
            pt.dims,
            IwasawaPoint::param_count(pt.dims)
        )));
    }
    let mut off = 0;
    let mut factors = Vec::with_capacity(3);
    for s in [pt.dims.0, pt.dims.1, pt.dims.2] {
        let rho = &pt.params[off..off + s - 1];
        let xi = &pt.params[off + s - 1..off + factor_param_count(s)];
        factors.push(iwasawa_factor(s, rho, xi)?);
        off += factor_param_count(s);
    }
    let w = factors.pop().expect("three factors");
    let v = factors.pop().expect("three factors");
    let u = factors.pop().expect("three factors");
    Ok(Isotropy { u, v, w })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmrep::validate_matmul;
    use crate::norms::gamma2;
    use crate::schemes::{load_scheme, SchemeId};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(s: usize, rng: &mut ChaCha8Rng) -> Matrix {
        Matrix::from_fn(s, s, |i, j| if i == j { 1.5 } else { 0.0 } + rng.random_range(-0.5..0.5))
    }

    fn random_iso(dims: (usize, usize, usize), rng: &mut ChaCha8Rng) -> Isotropy {
        Isotropy::new(random_matrix(dims.0, rng), random_matrix(dims.1, rng), random_matrix(dims.2, rng)).unwrap()
    }

    fn rotation(t: f64) -> Matrix {
        Matrix::from_rows(&[vec![t.cos(), -t.sin()], vec![t.sin(), t.cos()]])
    }

    #[test]
    fn identity_keeps_exact_scheme() {
        let s = load_scheme(&SchemeId::Strassen).unwrap();
        let t = act(&Isotropy::identity(2, 2, 2), &s).unwrap();
        assert!(t.is_exact());
        assert_eq!(t.exact().unwrap(), s.exact().unwrap());
    }

    #[test]
    fn random_isotropies_preserve_validity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for id in [SchemeId::Strassen, SchemeId::Winograd, SchemeId::AccurateSqrt3, SchemeId::Smirnov336Accurate] {
            let h = load_scheme(&id).unwrap();
            let g = random_iso(h.dims(), &mut rng);
            let t = act(&g, &h).unwrap();
            assert_eq!(t.rank(), h.rank());
            let rep = validate_matmul(&t);
            assert!(rep.valid, "{id}: residual {}", rep.max_residual);
        }
    }

    #[test]
    fn composition_is_sequential_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = load_scheme(&SchemeId::Strassen).unwrap();
        let (g1, g2) = (random_iso((2, 2, 2), &mut rng), random_iso((2, 2, 2), &mut rng));
        let a = act(&compose(&g1, &g2).unwrap(), &h).unwrap();
        let b = act(&g1, &act(&g2, &h).unwrap()).unwrap();
        assert!(a.lf().max_abs_diff(b.lf()) < 1e-9);
        assert!(a.rf().max_abs_diff(b.rf()) < 1e-9);
        assert!(a.pf().max_abs_diff(b.pf()) < 1e-9);
        let id = compose(&g1, &g1.inverse().unwrap()).unwrap();
        let (u, v, w) = id.factors();
        assert!(u.max_abs_diff(&Matrix::identity(2)) < 1e-9);
        assert!(v.max_abs_diff(&Matrix::identity(2)) < 1e-9);
        assert!(w.max_abs_diff(&Matrix::identity(2)) < 1e-9);
    }

    #[test]
    fn gamma2_invariant_under_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = load_scheme(&SchemeId::Strassen).unwrap();
        for _ in 0..10 {
            let g = Isotropy::new(
                rotation(rng.random_range(0.0..6.3)),
                rotation(rng.random_range(0.0..6.3)),
                rotation(rng.random_range(0.0..6.3)),
            )
            .unwrap();
            assert!((gamma2(&act(&g, &h).unwrap()) - gamma2(&h)).abs() < 1e-9);
        }
    }

    #[test]
    fn scaling_is_normalized_away() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = load_scheme(&SchemeId::Winograd).unwrap();
        let g = random_iso((2, 2, 2), &mut rng);
        let (u, v, w) = g.factors();
        let scaled = Isotropy::new(u.scale(3.7), v.clone(), w.clone()).unwrap();
        assert!((gamma2(&act(&g, &h).unwrap()) - gamma2(&act(&scaled, &h).unwrap())).abs() < 1e-9);
        for f in [scaled.factors().0, scaled.factors().1] {
            assert!((f.determinant().abs() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn iwasawa_examples() {
        let id = iwasawa(&IwasawaPoint::identity((2, 2, 2))).unwrap();
        assert!(id.is_identity());
        let f = iwasawa_factor(2, &[2.0], &[0.5]).unwrap();
        assert_eq!(f, Matrix::from_rows(&[vec![2.0, 1.0], vec![0.0, 0.5]]));
        assert_eq!(IwasawaPoint::param_count((3, 3, 6)), 30);
        assert!(iwasawa_factor(2, &[-1.0], &[0.0]).is_err());
        let pt = IwasawaPoint { dims: (3, 3, 6), params: (0..30).map(|i| 1.0 + 0.01 * i as f64).collect() };
        let g = iwasawa(&pt).unwrap();
        let (u, v, w) = g.factors();
        for f in [u, v, w] {
            assert!((f.determinant() - 1.0).abs() < 1e-12);
        }
        let back = IwasawaPoint::from_log_coords(pt.dims, &pt.to_log_coords());
        for (a, b) in back.params.iter().zip(&pt.params) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_factor_rejected() {
        let z = Matrix::zeros(2, 2);
        assert!(matches!(Isotropy::new(z, Matrix::identity(2), Matrix::identity(2)), Err(Error::Singular(_))));
    }
}
