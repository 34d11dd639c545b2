//! Alternative-basis sparsification.
//!
//! Every HM matrix can be factored through an invertible change of basis:
//! `L = Ls·φ`, `R = Rs·ψ` and `P = νᵀ·Ps`.  When the cores `Ls`, `Rs`, `Ps`
//! are sparse (ideally with entries in `{0,±1}`), the recursive algorithm
//! spends fewer additions per level, and the bases are applied once, in
//! `O(n² log n)` operations, before and after the recursion.
//!
//! The search below follows a simple heuristic:
//!
//! 1. for each matrix `M ∈ {L, R, Pᵀ}` (all with `r` rows), every set of
//!    `e` linearly independent rows `B` yields a core `M·B⁻¹` that contains
//!    an identity block;
//! 2. each core is improved greedily by column operations
//!    `col_j += c·col_i (+ c'·col_k)` with coefficients chosen to cancel
//!    entries, as long as the number of non-zeros decreases — each column
//!    operation is compensated by the inverse row operation on `B`;
//! 3. columns whose non-zeros share a common magnitude are rescaled to
//!    `±1`;
//! 4. among the per-matrix cores of minimal addition count, the
//!    combination with the smallest `γ₂` of the resulting core is kept.

use std::collections::HashSet;

use crate::coeff::Coefficient;
use crate::error::{Error, Result};
use crate::hmrep::{validate_matmul, HMRep};
use crate::matrix::CoeffMatrix;
use crate::norms::{gamma2_of, map_norm, NormId};
use crate::schemes::{altbasis_cob_matrices, altbasis_core_matrices};

/// A factorization `L = Ls·φ`, `R = Rs·ψ`, `P = νᵀ·Ps` of an HM
/// representation through three changes of basis.
#[derive(Clone, Debug, PartialEq)]
pub struct CoBTriple {
    /// Dimensions `(m, k, n)` of the factored scheme.
    pub dims: (usize, usize, usize),
    /// Left change of basis, `mk × mk`.
    pub phi: CoeffMatrix,
    /// Right change of basis, `kn × kn`.
    pub psi: CoeffMatrix,
    /// Output change of basis, `mn × mn` (applied as `νᵀ`).
    pub nu: CoeffMatrix,
    /// Sparse left core, `r × mk`.
    pub ls: CoeffMatrix,
    /// Sparse right core, `r × kn`.
    pub rs: CoeffMatrix,
    /// Sparse output core, `mn × r`.
    pub ps: CoeffMatrix,
    /// True when every core entry lies in `{0, ±1}`.
    pub ternary: bool,
}

fn is_ternary(m: &CoeffMatrix) -> bool {
    m.data().iter().all(|c| c.is_zero() || c.is_unit())
}

/// Additions needed to evaluate `m` row by row.
fn naive_adds(m: &CoeffMatrix) -> usize {
    m.nnz() - m.nonempty_rows()
}

impl CoBTriple {
    /// Assembles a triple from its six matrices, checking shapes.
    pub fn new(
        dims: (usize, usize, usize),
        (phi, psi, nu): (CoeffMatrix, CoeffMatrix, CoeffMatrix),
        (ls, rs, ps): (CoeffMatrix, CoeffMatrix, CoeffMatrix),
    ) -> Result<Self> {
        let (m, k, n) = dims;
        let square = |a: &CoeffMatrix, s: usize| a.rows() == s && a.cols() == s;
        if !square(&phi, m * k) || !square(&psi, k * n) || !square(&nu, m * n) {
            return Err(Error::Dimension("change-of-basis matrices have the wrong size".into()));
        }
        let r = ls.rows();
        if ls.cols() != m * k || rs.rows() != r || rs.cols() != k * n || ps.rows() != m * n || ps.cols() != r {
            return Err(Error::Dimension("core matrices have inconsistent shapes".into()));
        }
        let ternary = is_ternary(&ls) && is_ternary(&rs) && is_ternary(&ps);
        Ok(CoBTriple { dims, phi, psi, nu, ls, rs, ps, ternary })
    }

    /// The trivial factorization of `h` with identity bases.
    pub fn identity(h: &HMRep) -> Result<Self> {
        let (m, k, n) = h.dims();
        let (l, r, p) = h.exact()?;
        Self::new(
            h.dims(),
            (CoeffMatrix::identity(m * k), CoeffMatrix::identity(k * n), CoeffMatrix::identity(m * n)),
            (l.clone(), r.clone(), p.clone()),
        )
    }

    /// The bundled factorization of the accurate `⟨2,2,2;7⟩` scheme.
    pub fn bundled_accurate() -> Self {
        Self::new((2, 2, 2), altbasis_cob_matrices(), altbasis_core_matrices()).expect("bundled shapes")
    }

    /// Fails with [`Error::Singular`] unless `φ`, `ψ` and `ν` are invertible.
    pub fn check_invertible(&self) -> Result<()> {
        for (name, b) in [("phi", &self.phi), ("psi", &self.psi), ("nu", &self.nu)] {
            if b.rank() != b.rows() {
                return Err(Error::Singular(format!("change of basis {name} is singular")));
            }
        }
        Ok(())
    }

    /// The sparse core `(Ls, Rs, Ps)` as a bilinear map.
    pub fn core(&self) -> Result<HMRep> {
        HMRep::new_exact(self.dims, self.ls.clone(), self.rs.clone(), self.ps.clone(), "core", "sparse core")
    }

    /// The composed scheme `(Ls·φ, Rs·ψ, νᵀ·Ps)`.
    pub fn composed(&self) -> Result<HMRep> {
        let l = self.ls.mul(&self.phi)?;
        let r = self.rs.mul(&self.psi)?;
        let p = self.nu.transpose().mul(&self.ps)?;
        HMRep::new_exact(self.dims, l, r, p, "composed", "core composed with its change of basis")
    }

    /// Naive addition counts `(Ls, Rs, Ps)` of the core.
    pub fn core_adds(&self) -> (usize, usize, usize) {
        (naive_adds(&self.ls), naive_adds(&self.rs), naive_adds(&self.ps))
    }

    /// Total naive additions of the core.
    pub fn core_total_adds(&self) -> usize {
        let (a, b, c) = self.core_adds();
        a + b + c
    }

    /// `γ₂` of the core.
    pub fn core_gamma2(&self) -> f64 {
        gamma2_of(&self.ls.to_f64(), &self.rs.to_f64(), &self.ps.to_f64())
    }
}

/// Checks `L = Ls·φ`, `R = Rs·ψ`, `P = νᵀ·Ps` exactly, and that the
/// composed scheme still computes a matrix product.
pub fn verify_factorization(h: &HMRep, c: &CoBTriple) -> bool {
    let Ok((l, r, p)) = h.exact() else { return false };
    if h.dims() != c.dims {
        return false;
    }
    let Ok(comp) = c.composed() else { return false };
    let Ok((cl, cr, cp)) = comp.exact() else { return false };
    cl == l && cr == r && cp == p && validate_matmul(&comp).valid
}

/// The change-of-basis penalty `‖φ‖_q ‖ψ‖_q ‖ν‖_p` and the resulting
/// growth factor of the alternative-basis algorithm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoBQuality {
    /// `‖φ‖_q ‖ψ‖_q ‖ν‖_p`.
    pub factor: f64,
    /// `γ_{p,q}(core) · factor`.
    pub gamma_mmab: f64,
}

/// Quality of a change of basis (see [`crate::bounds::altbasis_bound`]).
pub fn cob_quality(c: &CoBTriple, p: NormId, q: NormId) -> Result<CoBQuality> {
    let core = c.core()?;
    let factor = map_norm(&c.phi.to_f64(), q) * map_norm(&c.psi.to_f64(), q) * map_norm(&c.nu.to_f64(), p);
    Ok(CoBQuality { factor, gamma_mmab: crate::norms::growth_factor(&core, p, q) * factor })
}

/// Search budget of [`sparsify`].
#[derive(Clone, Debug)]
pub struct SparsifyOptions {
    /// Largest number of row subsets enumerated per matrix; beyond it a
    /// single greedy subset (sparsest rows first) is used.
    pub max_subsets: usize,
    /// Allow column operations combining three columns.
    pub three_column_ops: bool,
    /// Number of minimal-cost candidates kept per matrix for the final
    /// `γ₂` tie-break.
    pub keep_per_matrix: usize,
}

impl Default for SparsifyOptions {
    fn default() -> Self {
        SparsifyOptions { max_subsets: 20_000, three_column_ops: true, keep_per_matrix: 64 }
    }
}

/// A core/basis pair `M = C·B` for one HM matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Factor {
    core: CoeffMatrix,
    basis: CoeffMatrix,
}

/// Lexicographic cost of a core: non-zeros, then entries outside `{0,±1}`.
fn core_cost(c: &CoeffMatrix) -> (usize, usize) {
    (c.nnz(), c.data().iter().filter(|x| !x.is_zero() && !x.is_unit()).count())
}

fn column_cost(col: &[Coefficient]) -> (usize, usize) {
    (
        col.iter().filter(|x| !x.is_zero()).count(),
        col.iter().filter(|x| !x.is_zero() && !x.is_unit()).count(),
    )
}

/// `col_j + Σ c_t · col_{i_t}`.
fn combined_column(c: &CoeffMatrix, j: usize, terms: &[(usize, &Coefficient)]) -> Vec<Coefficient> {
    (0..c.rows())
        .map(|t| {
            let mut v = c[(t, j)].clone();
            for (i, a) in terms {
                let x = &c[(t, *i)];
                if !x.is_zero() {
                    v = &v + &(*a * x);
                }
            }
            v
        })
        .collect()
}

/// Coefficients `a` for which `col_j + a·col_i` cancels at least one entry,
/// plus `±1`.
fn cancelling_coefficients(c: &CoeffMatrix, i: usize, j: usize) -> Vec<Coefficient> {
    let mut out: Vec<Coefficient> = vec![Coefficient::one(), -Coefficient::one()];
    for t in 0..c.rows() {
        let (x, y) = (&c[(t, i)], &c[(t, j)]);
        if !x.is_zero() && !y.is_zero() {
            let a = -(y / x);
            if !out.contains(&a) {
                out.push(a);
            }
        }
    }
    out
}

/// Applies `col_j += Σ a_t col_{i_t}` to the core and the compensating row
/// operations `row_{i_t}(B) -= a_t row_j(B)` to the basis.
fn apply_column_op(f: &mut Factor, j: usize, terms: &[(usize, Coefficient)], new_col: Vec<Coefficient>) {
    for (t, v) in new_col.into_iter().enumerate() {
        f.core[(t, j)] = v;
    }
    for (i, a) in terms {
        for col in 0..f.basis.cols() {
            let bj = f.basis[(j, col)].clone();
            if !bj.is_zero() {
                f.basis[(*i, col)] = &f.basis[(*i, col)] - &(a * &bj);
            }
        }
    }
}

/// Greedy density reduction by column operations.
fn improve(f: &mut Factor, three_column_ops: bool) {
    let e = f.core.cols();
    loop {
        let mut changed = false;
        for j in 0..e {
            let current = column_cost(&f.core.col(j));
            'pairs: for i in (0..e).filter(|&i| i != j) {
                for a in cancelling_coefficients(&f.core, i, j) {
                    let col = combined_column(&f.core, j, &[(i, &a)]);
                    if column_cost(&col) < current {
                        apply_column_op(f, j, &[(i, a)], col);
                        changed = true;
                        break 'pairs;
                    }
                }
            }
        }
        if changed {
            continue;
        }
        if three_column_ops {
            'outer: for j in 0..e {
                let current = column_cost(&f.core.col(j));
                for i in (0..e).filter(|&i| i != j) {
                    for k in (i + 1..e).filter(|&k| k != j) {
                        for a in cancelling_coefficients(&f.core, i, j) {
                            for b in cancelling_coefficients(&f.core, k, j) {
                                let col = combined_column(&f.core, j, &[(i, &a), (k, &b)]);
                                if column_cost(&col) < current {
                                    apply_column_op(f, j, &[(i, a), (k, b)], col);
                                    changed = true;
                                    break 'outer;
                                }
                            }
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    normalize_columns(f);
}

/// Rescales each column whose non-zeros share one magnitude `v ≠ 1` to
/// `±1`, moving `v` into the corresponding basis row.
fn normalize_columns(f: &mut Factor) {
    for j in 0..f.core.cols() {
        let col = f.core.col(j);
        let Some(v) = col.iter().find(|x| !x.is_zero()).map(Coefficient::abs) else { continue };
        if v.is_one() || !col.iter().all(|x| x.is_zero() || x.abs() == v) {
            continue;
        }
        let inv = v.recip().expect("non-zero");
        for t in 0..f.core.rows() {
            if !f.core[(t, j)].is_zero() {
                f.core[(t, j)] = &f.core[(t, j)] * &inv;
            }
        }
        for col in 0..f.basis.cols() {
            f.basis[(j, col)] = &f.basis[(j, col)] * &v;
        }
    }
}

/// Greedy choice of `e` independent rows, sparsest first.
fn greedy_subset(m: &CoeffMatrix) -> Option<Vec<usize>> {
    let mut order: Vec<usize> = (0..m.rows()).collect();
    order.sort_by_key(|&i| (m.row_nnz(i), i));
    let mut chosen = Vec::new();
    for i in order {
        let mut trial = chosen.clone();
        trial.push(i);
        if m.select_rows(&trial).rank() == trial.len() {
            chosen = trial;
            if chosen.len() == m.cols() {
                chosen.sort_unstable();
                return Some(chosen);
            }
        }
    }
    None
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    usize::try_from(acc).unwrap_or(usize::MAX)
}

/// All minimal-cost factors `M = C·B` found by the search, in discovery
/// order (lexicographic row subsets).
fn factor_candidates(m: &CoeffMatrix, opts: &SparsifyOptions) -> Result<Vec<Factor>> {
    let (r, e) = (m.rows(), m.cols());
    if m.rank() != e {
        return Err(Error::Singular("HM matrix does not have full column rank".into()));
    }
    let subsets: Vec<Vec<usize>> = if binomial(r, e) <= opts.max_subsets {
        combinations(r, e)
    } else {
        greedy_subset(m).into_iter().collect()
    };
    let mut found: Vec<Factor> = Vec::new();
    let mut seen: HashSet<Factor> = HashSet::new();
    let mut best: Option<(usize, usize)> = None;
    for s in subsets {
        let b = m.select_rows(&s);
        let Ok(binv) = b.inverse() else { continue };
        let mut f = Factor { core: m.mul(&binv)?, basis: b };
        improve(&mut f, opts.three_column_ops);
        let cost = (naive_adds(&f.core), core_cost(&f.core).1);
        match best {
            Some(bc) if cost > bc => continue,
            Some(bc) if cost < bc => {
                found.clear();
                seen.clear();
                best = Some(cost);
            }
            None => best = Some(cost),
            _ => {}
        }
        if seen.insert(f.clone()) {
            found.push(f);
        }
    }
    Ok(found)
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        let Some(pos) = (0..k).rev().find(|&p| idx[p] != p + n - k) else { break };
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
    out
}

/// Factors `h` through changes of basis with sparse cores.
///
/// Returns the factorization with the fewest core additions; ties are
/// broken by the smallest `γ₂` of the core, then by discovery order.
/// [`CoBTriple::ternary`] records whether all core entries are in `{0,±1}`.
pub fn sparsify(h: &HMRep, opts: &SparsifyOptions) -> Result<CoBTriple> {
    let (l, r, p) = h.exact()?;
    let pt = p.transpose();
    let mut lists = Vec::with_capacity(3);
    for m in [l, r, &pt] {
        let mut c = factor_candidates(m, opts)?;
        c.truncate(opts.keep_per_matrix.max(1));
        lists.push(c);
    }
    let norms = |f: &Factor| -> Vec<f64> {
        let cf = f.core.to_f64();
        (0..cf.rows()).map(|i| cf.row(i).iter().map(|x| x * x).sum::<f64>().sqrt()).collect()
    };
    let nl: Vec<Vec<f64>> = lists[0].iter().map(norms).collect();
    let nr: Vec<Vec<f64>> = lists[1].iter().map(norms).collect();
    let np: Vec<Vec<f64>> = lists[2].iter().map(norms).collect();
    let mut best: Option<(f64, usize, usize, usize)> = None;
    for (a, la) in nl.iter().enumerate() {
        for (b, rb) in nr.iter().enumerate() {
            for (c, pc) in np.iter().enumerate() {
                let g: f64 = (0..la.len()).map(|i| la[i] * rb[i] * pc[i]).sum();
                if best.is_none_or(|(bg, ..)| g < bg - 1e-12) {
                    best = Some((g, a, b, c));
                }
            }
        }
    }
    let (_, a, b, c) = best.ok_or_else(|| Error::Singular("no factorization found".into()))?;
    let (fl, fr, fp) = (&lists[0][a], &lists[1][b], &lists[2][c]);
    CoBTriple::new(
        h.dims(),
        (fl.basis.clone(), fr.basis.clone(), fp.basis.clone()),
        (fl.core.clone(), fr.core.clone(), fp.core.transpose()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::{load_scheme, SchemeId};

    #[test]
    fn combinations_count() {
        assert_eq!(combinations(7, 4).len(), 35);
        assert_eq!(binomial(7, 4), 35);
        assert_eq!(binomial(40, 9), 273_438_880);
    }

    #[test]
    fn bundled_triple_factors_accurate_scheme() {
        let h = load_scheme(&SchemeId::AccurateSqrt3).unwrap();
        let c = CoBTriple::bundled_accurate();
        assert!(c.ternary);
        assert!(verify_factorization(&h, &c));
        assert_eq!(c.core_total_adds(), 12);
    }

    #[test]
    fn perturbed_core_fails_verification() {
        let h = load_scheme(&SchemeId::AccurateSqrt3).unwrap();
        let mut c = CoBTriple::bundled_accurate();
        c.ls[(0, 0)] = Coefficient::one();
        assert!(!verify_factorization(&h, &c));
    }

    #[test]
    fn identity_triple_on_conventional() {
        let h = load_scheme(&SchemeId::Conventional(2, 2, 2)).unwrap();
        let c = CoBTriple::identity(&h).unwrap();
        assert!(verify_factorization(&h, &c));
        let q = cob_quality(&c, NormId::Max, NormId::Max).unwrap();
        assert_eq!(q.factor, 1.0);
    }

    #[test]
    fn sparsify_accurate_scheme() {
        let h = load_scheme(&SchemeId::AccurateSqrt3).unwrap();
        let c = sparsify(&h, &SparsifyOptions::default()).unwrap();
        assert!(c.ternary);
        assert!(verify_factorization(&h, &c));
        assert_eq!(c.core_total_adds(), 12);
        assert!((c.core_gamma2() - (7.0 + 3.0 * 2f64.sqrt())).abs() < 1e-9);
    }

    #[test]
    fn sparsify_winograd() {
        let h = load_scheme(&SchemeId::Winograd).unwrap();
        let c = sparsify(&h, &SparsifyOptions::default()).unwrap();
        assert!(c.ternary);
        assert!(verify_factorization(&h, &c));
        assert_eq!(c.core_total_adds(), 12);
    }

    #[test]
    fn sparsify_conventional_keeps_identity() {
        let h = load_scheme(&SchemeId::Conventional(2, 2, 2)).unwrap();
        let c = sparsify(&h, &SparsifyOptions::default()).unwrap();
        assert_eq!(c, CoBTriple::identity(&h).unwrap());
    }
}
