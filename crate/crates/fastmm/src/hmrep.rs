//! HM (Hopcroft–Musinski) representations of bilinear matrix-multiplication
//! algorithms.
//!
//! A scheme for `C = A·B` with `A: m×k`, `B: k×n` and `r` products is the
//! triple `(L, R, P)` with `L: r×mk`, `R: r×kn`, `P: mn×r`, and
//!
//! ```text
//! vec(C) = P · ((L · vec A) ⊙ (R · vec B))
//! ```
//!
//! where `vec` is the row-major vectorization `vec(A)[i·k + j] = a_ij`.
//!
//! An [`HMRep`] is either *exact* (coefficients in ℚ(√d), always with a
//! cached double projection) or *float-backed* (e.g. produced by an
//! isotropy acting with real parameters).  Float-backed representations
//! are validated with a relative tolerance instead of exact equality.

use crate::coeff::Coefficient;
use crate::error::{Error, Result};
use crate::matrix::{CoeffMatrix, Matrix};

/// Relative tolerance used to validate float-backed representations.
pub const FLOAT_VALIDATION_TOL: f64 = 1e-9;

/// A bilinear algorithm in HM form.
#[derive(Clone, Debug)]
pub struct HMRep {
    m: usize,
    k: usize,
    n: usize,
    rank: usize,
    /// Human-readable label.
    pub name: String,
    /// Free-text origin of the coefficients.
    pub provenance: String,
    exact: Option<[CoeffMatrix; 3]>,
    float: [Matrix; 3],
}

fn check_shapes(m: usize, k: usize, n: usize, l: (usize, usize), r: (usize, usize), p: (usize, usize)) -> Result<usize> {
    let rank = l.0;
    if l.1 != m * k {
        return Err(Error::Dimension(format!("L has {} columns, expected m*k = {}", l.1, m * k)));
    }
    if r != (rank, k * n) {
        return Err(Error::Dimension(format!("R is {}x{}, expected {}x{}", r.0, r.1, rank, k * n)));
    }
    if p != (m * n, rank) {
        return Err(Error::Dimension(format!("P is {}x{}, expected {}x{}", p.0, p.1, m * n, rank)));
    }
    Ok(rank)
}

impl HMRep {
    /// Builds an exact representation, checking shape consistency.
    pub fn new_exact(
        (m, k, n): (usize, usize, usize),
        l: CoeffMatrix,
        r: CoeffMatrix,
        p: CoeffMatrix,
        name: impl Into<String>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let rank = check_shapes(m, k, n, (l.rows(), l.cols()), (r.rows(), r.cols()), (p.rows(), p.cols()))?;
        let d: Vec<u32> = [l.d(), r.d(), p.d()].into_iter().filter(|&d| d != 0).collect();
        if d.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::InvalidArgument("L, R and P live in different quadratic fields".into()));
        }
        let float = [l.to_f64(), r.to_f64(), p.to_f64()];
        Ok(HMRep { m, k, n, rank, name: name.into(), provenance: provenance.into(), exact: Some([l, r, p]), float })
    }

    /// Builds a float-backed representation.
    pub fn new_float(
        (m, k, n): (usize, usize, usize),
        l: Matrix,
        r: Matrix,
        p: Matrix,
        name: impl Into<String>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let rank = check_shapes(m, k, n, (l.rows(), l.cols()), (r.rows(), r.cols()), (p.rows(), p.cols()))?;
        Ok(HMRep { m, k, n, rank, name: name.into(), provenance: provenance.into(), exact: None, float: [l, r, p] })
    }

    /// Dimensions `(m, k, n)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.m, self.k, self.n)
    }

    /// Tensor rank `r` (number of products).
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// True when exact coefficients are available.
    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Radicand of the coefficient field (`0` for rational or float schemes).
    pub fn d(&self) -> u32 {
        self.exact.as_ref().map_or(0, |e| e.iter().map(CoeffMatrix::d).max().unwrap_or(0))
    }

    /// Exact `(L, R, P)`, or an error for float-backed schemes.
    pub fn exact(&self) -> Result<(&CoeffMatrix, &CoeffMatrix, &CoeffMatrix)> {
        match &self.exact {
            Some([l, r, p]) => Ok((l, r, p)),
            None => Err(Error::NotExact(format!("scheme {} is float-backed", self.name))),
        }
    }

    /// Double projection of `L`.
    pub fn lf(&self) -> &Matrix {
        &self.float[0]
    }

    /// Double projection of `R`.
    pub fn rf(&self) -> &Matrix {
        &self.float[1]
    }

    /// Double projection of `P`.
    pub fn pf(&self) -> &Matrix {
        &self.float[2]
    }

    /// Whether coefficient `(i, j)` of `L`/`R`/`P` is non-zero (exactly when
    /// exact coefficients are available).
    fn nonzero(&self, which: usize, i: usize, j: usize) -> bool {
        match &self.exact {
            Some(e) => !e[which][(i, j)].is_zero(),
            None => self.float[which][(i, j)] != 0.0,
        }
    }

    /// Hamming weight of row `i` of `L`.
    pub fn l_row_weight(&self, i: usize) -> usize {
        (0..self.m * self.k).filter(|&j| self.nonzero(0, i, j)).count()
    }

    /// Hamming weight of row `i` of `R`.
    pub fn r_row_weight(&self, i: usize) -> usize {
        (0..self.k * self.n).filter(|&j| self.nonzero(1, i, j)).count()
    }

    /// Hamming weight of row `j` of `P`.
    pub fn p_row_weight(&self, j: usize) -> usize {
        (0..self.rank).filter(|&i| self.nonzero(2, j, i)).count()
    }

    /// Whether `p_{j,i} ≠ 0`.
    pub fn p_nonzero(&self, j: usize, i: usize) -> bool {
        self.nonzero(2, j, i)
    }

    /// Returns a copy with a different name.
    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// The scheme for `⟨k, n, m⟩` obtained by cyclically rotating the
    /// matrix-multiplication tensor.
    pub fn cyclic(&self) -> HMRep {
        let (m, k, n, r) = (self.m, self.k, self.n, self.rank);
        // L'[i][(b,d)] = R[i][(b,d)], R'[i][(d,a)] = P[(a,d)][i], P'[(b,a)][i] = L[i][(a,b)].
        let map_r = |i: usize, q: usize| -> (usize, usize) {
            let (d, a) = (q / m, q % m);
            (a * n + d, i)
        };
        let map_p = |q: usize, i: usize| -> (usize, usize) {
            let (b, a) = (q / m, q % m);
            (i, a * k + b)
        };
        let exact = self.exact.as_ref().map(|[l, rr, p]| {
            let nl = rr.clone();
            let mut nr = CoeffMatrix::zeros(r, n * m);
            let mut np = CoeffMatrix::zeros(k * m, r);
            for i in 0..r {
                for q in 0..n * m {
                    nr[(i, q)] = p[map_r(i, q)].clone();
                }
            }
            for q in 0..k * m {
                for i in 0..r {
                    np[(q, i)] = l[map_p(q, i)].clone();
                }
            }
            [nl, nr, np]
        });
        let [l, rr, p] = &self.float;
        let nr = Matrix::from_fn(r, n * m, |i, q| p[map_r(i, q)]);
        let np = Matrix::from_fn(k * m, r, |q, i| l[map_p(q, i)]);
        let float = [rr.clone(), nr, np];
        HMRep {
            m: k,
            k: n,
            n: m,
            rank: r,
            name: format!("{}^cyc", self.name),
            provenance: format!("cyclic rotation of {}", self.name),
            exact,
            float,
        }
    }

    /// The scheme for `⟨n, k, m⟩` obtained from `Cᵀ = Bᵀ·Aᵀ`.
    pub fn transposed(&self) -> HMRep {
        let (m, k, n, r) = (self.m, self.k, self.n, self.rank);
        // A' = Bᵀ (n×k): L'[i][(d,c)] = R[i][(c,d)]; B' = Aᵀ (k×m): R'[i][(b,a)] = L[i][(a,b)];
        // C' = Cᵀ (n×m): P'[(f,e)][i] = P[(e,f)][i].
        let map_l = |i: usize, q: usize| (i, (q % k) * n + q / k);
        let map_r = |i: usize, q: usize| (i, (q % m) * k + q / m);
        let map_p = |q: usize, i: usize| ((q % m) * n + q / m, i);
        let exact = self.exact.as_ref().map(|[l, rr, p]| {
            let mut nl = CoeffMatrix::zeros(r, n * k);
            let mut nr = CoeffMatrix::zeros(r, k * m);
            let mut np = CoeffMatrix::zeros(n * m, r);
            for i in 0..r {
                for q in 0..n * k {
                    nl[(i, q)] = rr[map_l(i, q)].clone();
                }
                for q in 0..k * m {
                    nr[(i, q)] = l[map_r(i, q)].clone();
                }
            }
            for q in 0..n * m {
                for i in 0..r {
                    np[(q, i)] = p[map_p(q, i)].clone();
                }
            }
            [nl, nr, np]
        });
        let [l, rr, p] = &self.float;
        let float = [
            Matrix::from_fn(r, n * k, |i, q| rr[map_l(i, q)]),
            Matrix::from_fn(r, k * m, |i, q| l[map_r(i, q)]),
            Matrix::from_fn(n * m, r, |q, i| p[map_p(q, i)]),
        ];
        HMRep {
            m: n,
            k,
            n: m,
            rank: r,
            name: format!("{}^T", self.name),
            provenance: format!("transposition of {}", self.name),
            exact,
            float,
        }
    }
}

/// Row-major vectorization of a matrix.
pub fn vec_row_major(a: &Matrix) -> Vec<f64> {
    a.data().to_vec()
}

/// Evaluates one level of the bilinear map in double precision:
/// `matr(P·((L·vec A) ⊙ (R·vec B)))`, every dot product accumulated left to
/// right.
pub fn apply_bilinear(h: &HMRep, a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let (m, k, n) = h.dims();
    if (a.rows(), a.cols()) != (m, k) || (b.rows(), b.cols()) != (k, n) {
        return Err(Error::Dimension(format!(
            "scheme <{m},{k},{n}> applied to {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let x = h.lf().mul_vec(a.data());
    let y = h.rf().mul_vec(b.data());
    let z: Vec<f64> = x.iter().zip(&y).map(|(u, v)| u * v).collect();
    Ok(Matrix::from_vec(m, n, h.pf().mul_vec(&z)))
}

/// Exact evaluation of one level of the bilinear map on row-major vectors.
pub fn apply_bilinear_exact(h: &HMRep, a: &[Coefficient], b: &[Coefficient]) -> Result<Vec<Coefficient>> {
    let (l, r, p) = h.exact()?;
    if a.len() != l.cols() || b.len() != r.cols() {
        return Err(Error::Dimension("input vector lengths".into()));
    }
    let x = l.mul_vec(a);
    let y = r.mul_vec(b);
    let z: Vec<Coefficient> = x.iter().zip(&y).map(|(u, v)| u * v).collect();
    Ok(p.mul_vec(&z))
}

/// One canonical input pair `(e_ab, e_cd)` whose product is wrong.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationFailure {
    /// Row of the unit entry of `A`.
    pub a: usize,
    /// Column of the unit entry of `A`.
    pub b: usize,
    /// Row of the unit entry of `B`.
    pub c: usize,
    /// Column of the unit entry of `B`.
    pub d: usize,
    /// Largest absolute entry of `computed − expected` (double projection).
    pub residual: f64,
    /// Exact residual entries as text (empty in tolerance mode).
    pub exact_residual: Vec<String>,
}

/// Outcome of [`validate_matmul`].
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    /// True when no canonical pair fails.
    pub valid: bool,
    /// True when the check used exact arithmetic (zero tolerance).
    pub exact: bool,
    /// Every failing quadruple.
    pub failures: Vec<ValidationFailure>,
    /// Largest residual over all pairs.
    pub max_residual: f64,
}

/// Checks the matrix-multiplication identity on every canonical input pair
/// `(e_ab, e_cd)`: the output must be `e_ad` when `b = c` and zero otherwise.
///
/// Exact schemes are checked in exact arithmetic; float-backed ones with the
/// relative tolerance [`FLOAT_VALIDATION_TOL`].
pub fn validate_matmul(h: &HMRep) -> ValidationReport {
    let (m, k, n) = h.dims();
    let r = h.rank();
    let mut failures = Vec::new();
    let mut max_residual: f64 = 0.0;
    for a in 0..m {
        for b in 0..k {
            for c in 0..k {
                for d in 0..n {
                    let (x, y) = (a * k + b, c * n + d);
                    let expected = |o: usize| b == c && o == a * n + d;
                    if let Ok((l, rr, p)) = h.exact() {
                        let z: Vec<Coefficient> = (0..r).map(|i| &l[(i, x)] * &rr[(i, y)]).collect();
                        let out = p.mul_vec(&z);
                        let mut worst: f64 = 0.0;
                        let mut exact_res = Vec::new();
                        for (o, v) in out.into_iter().enumerate() {
                            let res = if expected(o) { v - Coefficient::one() } else { v };
                            if !res.is_zero() {
                                worst = worst.max(res.to_f64().abs());
                                exact_res.push(format!("c[{},{}]: {}", o / n, o % n, res));
                            }
                        }
                        max_residual = max_residual.max(worst);
                        if !exact_res.is_empty() {
                            failures.push(ValidationFailure { a, b, c, d, residual: worst, exact_residual: exact_res });
                        }
                    } else {
                        let (l, rr, p) = (h.lf(), h.rf(), h.pf());
                        let z: Vec<f64> = (0..r).map(|i| l[(i, x)] * rr[(i, y)]).collect();
                        let mut worst: f64 = 0.0;
                        let mut bad = false;
                        for o in 0..m * n {
                            let v: f64 = (0..r).map(|i| p[(o, i)] * z[i]).sum();
                            let scale: f64 = (0..r).map(|i| (p[(o, i)] * z[i]).abs()).sum::<f64>().max(1.0);
                            let res = (v - if expected(o) { 1.0 } else { 0.0 }).abs();
                            worst = worst.max(res);
                            bad |= res > FLOAT_VALIDATION_TOL * scale;
                        }
                        max_residual = max_residual.max(worst);
                        if bad {
                            failures.push(ValidationFailure { a, b, c, d, residual: worst, exact_residual: vec![] });
                        }
                    }
                }
            }
        }
    }
    ValidationReport { valid: failures.is_empty(), exact: h.is_exact(), failures, max_residual }
}
