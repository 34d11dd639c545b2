//! Descent along isotropy orbits towards more accurate schemes.
//!
//! The objective is `γ₂` of the transformed scheme as a function of the
//! Iwasawa parameters (diagonal entries in log coordinates so that the
//! search is unconstrained).  Nelder–Mead is restarted from the identity
//! and from Gaussian perturbations of it; restarts are independent and run
//! in parallel, and the best result wins (ties go to the lowest restart
//! index, so results do not depend on scheduling).  The identity is always
//! evaluated, hence the result never worsens the input.
//!
//! [`snap_point`] recognizes parameters close to simple algebraic values
//! (small fractions and a few surds) and re-evaluates `γ₂` there.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hmrep::{validate_matmul, HMRep};
use crate::isotropy::{act, iwasawa, iwasawa_factor, Isotropy, IwasawaPoint};
use crate::matrix::Matrix;
use crate::norms::{gamma2, gamma2_of};
use crate::optim::{nelder_mead, NelderMeadOptions};

/// Budget and randomness of [`minimize_gamma2`].
#[derive(Clone, Debug, PartialEq)]
pub struct DescentOptions {
    /// Number of Nelder–Mead runs; the first starts at the identity.
    pub restarts: usize,
    /// Standard deviation of the Gaussian start perturbations.
    pub sigma: f64,
    /// Evaluation budget per restart.
    pub max_evals: usize,
    /// Simplex-diameter convergence threshold.
    pub diameter_tol: f64,
    /// Seed of the start-point generator.
    pub seed: u64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        DescentOptions { restarts: 32, sigma: 0.3, max_evals: 20_000, diameter_tol: 1e-10, seed: 0 }
    }
}

/// Result of an orbit descent.
#[derive(Clone, Debug)]
pub struct OrbitResult {
    /// Best Iwasawa point found.
    pub point: IwasawaPoint,
    /// The transformed scheme.
    pub rep: HMRep,
    /// Its `γ₂`.
    pub gamma2: f64,
    /// Total objective evaluations over all restarts.
    pub evaluations: usize,
}

/// `γ₂` of `g·(l, r, p)`, or `+∞` when `g` is degenerate.
fn objective(dims: (usize, usize, usize), x: &[f64], l: &Matrix, r: &Matrix, p: &Matrix) -> f64 {
    let pt = IwasawaPoint::from_log_coords(dims, x);
    match iwasawa(&pt).and_then(|g| g.transform(l, r, p)) {
        Ok((l2, r2, p2)) => gamma2_of(&l2, &r2, &p2),
        Err(_) => f64::INFINITY,
    }
}

/// Minimizes `γ₂` over the isotropy orbit of `h`.
///
/// Fails when `h` is not a matrix-multiplication scheme.
pub fn minimize_gamma2(h: &HMRep, opts: &DescentOptions) -> Result<OrbitResult> {
    if !validate_matmul(h).valid {
        return Err(Error::NonConforming(format!("{} is not a matrix-multiplication scheme", h.name)));
    }
    let dims = h.dims();
    let n = IwasawaPoint::param_count(dims);
    let x_id = IwasawaPoint::identity(dims).to_log_coords();
    let (l, r, p) = (h.lf(), h.rf(), h.pf());
    let nm = NelderMeadOptions { initial_step: 0.1, diameter_tol: opts.diameter_tol, max_evals: opts.max_evals };
    let normal = Normal::new(0.0, opts.sigma.max(0.0)).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let starts: Vec<Vec<f64>> = (0..opts.restarts.max(1))
        .map(|i| {
            if i == 0 {
                x_id.clone()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                x_id.iter().map(|v| v + normal.sample(&mut rng)).collect()
            }
        })
        .collect();
    let runs: Vec<_> =
        starts.par_iter().map(|x0| nelder_mead(|x| objective(dims, x, l, r, p), x0, &nm)).collect();
    let evaluations = runs.iter().map(|m| m.evaluations).sum::<usize>() + 1;
    let base = gamma2(h);
    let mut best_x = x_id;
    let mut best_v = base;
    for m in runs {
        if m.value < best_v {
            best_v = m.value;
            best_x = m.x;
        }
    }
    debug_assert_eq!(best_x.len(), n);
    let point = IwasawaPoint::from_log_coords(dims, &best_x);
    let rep = if best_v < base { act(&iwasawa(&point)?, h)? } else { h.clone() };
    let gamma2 = gamma2(&rep);
    Ok(OrbitResult { point, rep, gamma2, evaluations })
}

/// The `2×2` factor `[[ρ, ρξ], [0, 1/ρ]]`.
pub fn uuu_factor(rho: f64, xi: f64) -> Result<Matrix> {
    iwasawa_factor(2, &[rho], &[xi])
}

/// Result of [`restricted_uuu_scan`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UuuScan {
    /// Optimal diagonal parameter `ρ`.
    pub rho: f64,
    /// Optimal shear parameter `ξ`.
    pub xi: f64,
    /// `γ₂` at the optimum.
    pub gamma2: f64,
}

/// Minimizes `γ₂` over the two-parameter family `U = V = W = [[ρ, ρξ],
/// [0, 1/ρ]]` of a `⟨2,2,2⟩` scheme: coarse grid over `ρ ∈ [1/2, 2]`,
/// `ξ ∈ [−1, 1]`, then Nelder–Mead refinement from the best grid node.
pub fn restricted_uuu_scan(h: &HMRep) -> Result<UuuScan> {
    if h.dims() != (2, 2, 2) {
        return Err(Error::Dimension(format!("restricted scan needs a <2,2,2> scheme, got {:?}", h.dims())));
    }
    let (l, r, p) = (h.lf(), h.rf(), h.pf());
    let f = |x: &[f64]| -> f64 {
        let Ok(u) = uuu_factor(x[0].exp(), x[1]) else { return f64::INFINITY };
        match Isotropy::new(u.clone(), u.clone(), u).and_then(|g| g.transform(l, r, p)) {
            Ok((a, b, c)) => gamma2_of(&a, &b, &c),
            Err(_) => f64::INFINITY,
        }
    };
    let mut best = (f(&[0.0, 0.0]), 0.0, 0.0);
    const STEPS: usize = 60;
    for i in 0..=STEPS {
        let lr = (0.5f64).ln() + (4f64).ln() * i as f64 / STEPS as f64;
        for j in 0..=STEPS {
            let xi = -1.0 + 2.0 * j as f64 / STEPS as f64;
            let v = f(&[lr, xi]);
            if v < best.0 - 1e-12 {
                best = (v, lr, xi);
            }
        }
    }
    let opts = NelderMeadOptions { initial_step: 0.05, diameter_tol: 1e-12, max_evals: 20_000 };
    let m = nelder_mead(f, &[best.1, best.2], &opts);
    let (v, lr, xi) = if m.value < best.0 { (m.value, m.x[0], m.x[1]) } else { best };
    Ok(UuuScan { rho: lr.exp(), xi, gamma2: v })
}

/// A recognized algebraic value.
#[derive(Clone, Debug, PartialEq)]
pub struct SnappedValue {
    /// The exact value.
    pub value: f64,
    /// Its symbolic form (`p/q`, `(4/3)^(1/4)`, `1/sqrt3`, …).
    pub label: String,
}

/// Finds the value of `{±p/q : q ≤ 64} ∪ {±⁴√(4/3), ±1/2, ±1/√3}` closest
/// to `x`, provided it lies within `tol`.
pub fn snap_value(x: f64, tol: f64) -> Option<SnappedValue> {
    let sign = if x < 0.0 { "-" } else { "" };
    let s = x.signum();
    let mut best: Option<(f64, SnappedValue)> = None;
    let mut consider = |v: f64, label: String| {
        let d = (x - v).abs();
        if d <= tol && best.as_ref().is_none_or(|(bd, _)| d < *bd - 1e-15) {
            best = Some((d, SnappedValue { value: v, label }));
        }
    };
    consider(s * (4.0f64 / 3.0).powf(0.25), format!("{sign}(4/3)^(1/4)"));
    consider(s / 3f64.sqrt(), format!("{sign}1/sqrt3"));
    for q in 1..=64i64 {
        let p = (x * q as f64).round() as i64;
        let g = gcd(p.unsigned_abs(), q as u64) as i64;
        if g != 1 && p != 0 {
            continue;
        }
        let label = if p == 0 {
            "0".to_string()
        } else if q == 1 {
            p.to_string()
        } else {
            format!("{p}/{q}")
        };
        consider(p as f64 / q as f64, label);
    }
    best.map(|(_, v)| v)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// A snapped Iwasawa point and its re-evaluated `γ₂`.
#[derive(Clone, Debug)]
pub struct SnapResult {
    /// Point with every recognized parameter replaced by its exact value.
    pub point: IwasawaPoint,
    /// Symbolic labels (`None` where no value was recognized).
    pub labels: Vec<Option<String>>,
    /// `γ₂` at the snapped point.
    pub gamma2: f64,
}

/// Snaps each parameter of `pt` within `tol` and recomputes `γ₂` of `h`
/// at the snapped point.
pub fn snap_point(h: &HMRep, pt: &IwasawaPoint, tol: f64) -> Result<SnapResult> {
    let mut point = pt.clone();
    let mut labels = Vec::with_capacity(pt.params.len());
    for x in point.params.iter_mut() {
        match snap_value(*x, tol) {
            Some(sv) => {
                *x = sv.value;
                labels.push(Some(sv.label));
            }
            None => labels.push(None),
        }
    }
    let gamma2 = gamma2(&act(&iwasawa(&point)?, h)?);
    Ok(SnapResult { point, labels, gamma2 })
}
