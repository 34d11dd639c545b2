//! Recursive execution of bilinear schemes in double precision.
//!
//! Every linear phase runs through a compiled straight-line program, so the
//! operations executed (and hence the rounding errors committed) are exactly
//! those of the optimized SLPs:
//!
//! * [`classical_mm`] — the base case, a fixed `i-k-j` triple loop;
//! * [`recursive_mm`] — a [`RecursionPlan`] lists one scheme per level
//!   (outermost first); at each level the operands are split into blocks,
//!   combined by the `L`/`R` programs, the `r` products are computed
//!   recursively in index order and recombined by the `P` program;
//! * [`altbasis_mm`] — an [`AltPlan`] first maps `A` and `B` to the
//!   alternative basis recursively (`φ`, `ψ` applied blockwise at every
//!   level), multiplies with the sparse core and maps the result back with
//!   `νᵀ`.
//!
//! Dimensions must factor exactly; nothing is padded.  A call is
//! sequential and bit-reproducible.

use std::sync::Arc;

use crate::coeff::Coefficient;
use crate::error::{Error, Result};
use crate::hmrep::{validate_matmul, HMRep};
use crate::matrix::{CoeffMatrix, Matrix};
use crate::slp::{best_of, Instr, OpCounts, Slp, SlpOptions};
use crate::sparsify::CoBTriple;

/// One operation of a [`FloatProgram`].
#[derive(Clone, Debug, PartialEq)]
enum FOp {
    Load(usize),
    Zero,
    Add(usize, usize),
    Sub(usize, usize),
    Neg(usize),
    Scale(f64, usize),
    Store(usize, usize),
}

/// An SLP with its constants rounded to doubles, executed on matrix blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatProgram {
    n_in: usize,
    n_out: usize,
    ops: Vec<FOp>,
    /// Index of the last instruction reading each value (for early frees).
    last_use: Vec<usize>,
}

impl FloatProgram {
    /// Compiles an exact program; `±1` multiplications become negations or
    /// disappear.
    pub fn from_slp(s: &Slp) -> Result<FloatProgram> {
        s.validate()?;
        let ops = s
            .instrs
            .iter()
            .map(|ins| match ins {
                Instr::Load(i) => FOp::Load(*i),
                Instr::Zero => FOp::Zero,
                Instr::Add(a, b) => FOp::Add(*a, *b),
                Instr::Sub(a, b) => FOp::Sub(*a, *b),
                Instr::Mul(c, a) if c.is_one() => FOp::Scale(1.0, *a),
                Instr::Mul(c, a) if *c == -Coefficient::one() => FOp::Neg(*a),
                Instr::Mul(c, a) => FOp::Scale(c.to_f64(), *a),
                Instr::Store(o, a) => FOp::Store(*o, *a),
            })
            .collect();
        Ok(Self::with_ops(s.n_in, s.n_out, ops))
    }

    /// Row-by-row program for a float matrix (used for float-backed schemes,
    /// which are not optimized).
    pub fn from_matrix(m: &Matrix) -> FloatProgram {
        let mut ops: Vec<FOp> = (0..m.cols()).map(FOp::Load).collect();
        let mut outs = Vec::with_capacity(m.rows());
        for i in 0..m.rows() {
            let mut acc: Option<usize> = None;
            for (j, &c) in m.row(i).iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                acc = Some(match acc {
                    None => {
                        if c == 1.0 {
                            j
                        } else {
                            ops.push(if c == -1.0 { FOp::Neg(j) } else { FOp::Scale(c, j) });
                            ops.len() - 1
                        }
                    }
                    Some(a) => {
                        let t = if c.abs() == 1.0 {
                            j
                        } else {
                            ops.push(FOp::Scale(c.abs(), j));
                            ops.len() - 1
                        };
                        ops.push(if c > 0.0 { FOp::Add(a, t) } else { FOp::Sub(a, t) });
                        ops.len() - 1
                    }
                });
            }
            outs.push(acc.unwrap_or_else(|| {
                ops.push(FOp::Zero);
                ops.len() - 1
            }));
        }
        for (o, a) in outs.into_iter().enumerate() {
            ops.push(FOp::Store(o, a));
        }
        Self::with_ops(m.cols(), m.rows(), ops)
    }

    fn with_ops(n_in: usize, n_out: usize, ops: Vec<FOp>) -> FloatProgram {
        let mut last_use = vec![0usize; ops.len()];
        for (k, op) in ops.iter().enumerate() {
            match op {
                FOp::Add(a, b) | FOp::Sub(a, b) => {
                    last_use[*a] = k;
                    last_use[*b] = k;
                }
                FOp::Neg(a) | FOp::Scale(_, a) | FOp::Store(_, a) => last_use[*a] = k,
                FOp::Load(_) | FOp::Zero => {}
            }
        }
        FloatProgram { n_in, n_out, ops, last_use }
    }

    /// Number of inputs.
    pub fn n_in(&self) -> usize {
        self.n_in
    }

    /// Number of outputs.
    pub fn n_out(&self) -> usize {
        self.n_out
    }

    /// Runs the program on equally-shaped blocks.
    pub fn run(&self, inputs: &[Matrix]) -> Vec<Matrix> {
        assert_eq!(inputs.len(), self.n_in, "program expects {} blocks", self.n_in);
        let (h, w) = inputs.first().map_or((0, 0), |m| (m.rows(), m.cols()));
        let mut vals: Vec<Option<Matrix>> = vec![None; self.ops.len()];
        let mut out: Vec<Option<Matrix>> = vec![None; self.n_out];
        for (k, op) in self.ops.iter().enumerate() {
            let v = match op {
                FOp::Load(i) => Some(inputs[*i].clone()),
                FOp::Zero => Some(Matrix::zeros(h, w)),
                FOp::Add(a, b) => Some(zip(val(&vals, *a), val(&vals, *b), |x, y| x + y)),
                FOp::Sub(a, b) => Some(zip(val(&vals, *a), val(&vals, *b), |x, y| x - y)),
                FOp::Neg(a) => Some(map(val(&vals, *a), |x| -x)),
                FOp::Scale(c, a) => Some(map(val(&vals, *a), |x| c * x)),
                FOp::Store(o, a) => {
                    out[*o] = Some(val(&vals, *a).clone());
                    None
                }
            };
            vals[k] = v;
            // Free operands whose last reader was this instruction.
            match op {
                FOp::Add(a, b) | FOp::Sub(a, b) => {
                    for x in [*a, *b] {
                        if self.last_use[x] == k {
                            vals[x] = None;
                        }
                    }
                }
                FOp::Neg(a) | FOp::Scale(_, a) | FOp::Store(_, a) if self.last_use[*a] == k => vals[*a] = None,
                _ => {}
            }
        }
        out.into_iter().map(|m| m.expect("every output is stored")).collect()
    }
}

fn val(vals: &[Option<Matrix>], a: usize) -> &Matrix {
    vals[a].as_ref().expect("operand is live")
}

fn zip(a: &Matrix, b: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
    let data = a.data().iter().zip(b.data()).map(|(x, y)| f(*x, *y)).collect();
    Matrix::from_vec(a.rows(), a.cols(), data)
}

fn map(a: &Matrix, f: impl Fn(f64) -> f64) -> Matrix {
    Matrix::from_vec(a.rows(), a.cols(), a.data().iter().map(|x| f(*x)).collect())
}

/// A scheme with its three linear maps compiled for block execution.
#[derive(Clone, Debug)]
pub struct CompiledScheme {
    /// Scheme name.
    pub name: String,
    /// `(m, k, n)`.
    pub dims: (usize, usize, usize),
    /// Number of products.
    pub rank: usize,
    /// Operation counts of the `L`, `R`, `P` programs (zero for float-backed
    /// schemes, which are executed row by row).
    pub counts: [OpCounts; 3],
    l: FloatProgram,
    r: FloatProgram,
    p: FloatProgram,
}

impl CompiledScheme {
    /// Compiles a matrix-multiplication scheme: exact schemes through
    /// [`best_of`], float-backed ones row by row.
    ///
    /// # Errors
    /// [`Error::NonConforming`] when the scheme does not compute a matrix
    /// product.
    pub fn new(h: &HMRep, opts: &SlpOptions) -> Result<CompiledScheme> {
        if !validate_matmul(h).valid {
            return Err(Error::NonConforming(format!("{} is not a matrix-multiplication scheme", h.name)));
        }
        Self::bilinear(h, opts)
    }

    /// Compiles any bilinear map (no validation), e.g. a sparse core.
    pub fn bilinear(h: &HMRep, opts: &SlpOptions) -> Result<CompiledScheme> {
        let (l, r, p, counts) = match h.exact() {
            Ok((l, r, p)) => {
                let s = [best_of(l, opts), best_of(r, opts), best_of(p, opts)];
                let counts = [s[0].counts(), s[1].counts(), s[2].counts()];
                let [sl, sr, sp] = s;
                (FloatProgram::from_slp(&sl)?, FloatProgram::from_slp(&sr)?, FloatProgram::from_slp(&sp)?, counts)
            }
            Err(_) => (
                FloatProgram::from_matrix(h.lf()),
                FloatProgram::from_matrix(h.rf()),
                FloatProgram::from_matrix(h.pf()),
                [OpCounts::default(); 3],
            ),
        };
        Ok(CompiledScheme { name: h.name.clone(), dims: h.dims(), rank: h.rank(), counts, l, r, p })
    }

    /// Compiles from explicit programs for `L`, `R`, `P`.
    pub fn from_slps(name: &str, dims: (usize, usize, usize), l: &Slp, r: &Slp, p: &Slp) -> Result<CompiledScheme> {
        let (m, k, n) = dims;
        if l.n_in != m * k || r.n_in != k * n || p.n_out != m * n || l.n_out != r.n_out || p.n_in != l.n_out {
            return Err(Error::Dimension(format!("programs do not fit a <{m},{k},{n}> scheme")));
        }
        Ok(CompiledScheme {
            name: name.to_string(),
            dims,
            rank: l.n_out,
            counts: [l.counts(), r.counts(), p.counts()],
            l: FloatProgram::from_slp(l)?,
            r: FloatProgram::from_slp(r)?,
            p: FloatProgram::from_slp(p)?,
        })
    }
}

/// `C = A·B` by the triple loop in fixed `i-k-j` order.
///
/// # Errors
/// [`Error::Dimension`] when the inner dimensions differ.
pub fn classical_mm(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols() != b.rows() {
        return Err(Error::Dimension(format!("cannot multiply {}x{} by {}x{}", a.rows(), a.cols(), b.rows(), b.cols())));
    }
    let (m, k, n) = (a.rows(), a.cols(), b.cols());
    let mut c = Matrix::zeros(m, n);
    let (ad, bd) = (a.data(), b.data());
    let cd = c.data_mut();
    for i in 0..m {
        let crow = &mut cd[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = ad[i * k + p];
            let brow = &bd[p * n..(p + 1) * n];
            for (cij, bpj) in crow.iter_mut().zip(brow) {
                *cij += aip * bpj;
            }
        }
    }
    Ok(c)
}

/// Splits `a` into an `p × q` grid of blocks, row-major.
fn split(a: &Matrix, p: usize, q: usize) -> Vec<Matrix> {
    let (h, w) = (a.rows() / p, a.cols() / q);
    (0..p * q).map(|t| a.block((t / q) * h, (t % q) * w, h, w)).collect()
}

fn join(blocks: &[Matrix], p: usize, q: usize) -> Matrix {
    let (h, w) = (blocks[0].rows(), blocks[0].cols());
    let mut out = Matrix::zeros(h * p, w * q);
    for (t, b) in blocks.iter().enumerate() {
        out.set_block((t / q) * h, (t % q) * w, b);
    }
    out
}

/// A schedule of schemes, outermost level first, over a classical base.
#[derive(Clone, Debug)]
pub struct RecursionPlan {
    levels: Vec<Arc<CompiledScheme>>,
}

impl RecursionPlan {
    /// The given levels (outermost first).
    pub fn new(levels: Vec<Arc<CompiledScheme>>) -> RecursionPlan {
        RecursionPlan { levels }
    }

    /// `ell` levels of the same scheme.
    pub fn uniform(s: Arc<CompiledScheme>, ell: usize) -> RecursionPlan {
        RecursionPlan { levels: vec![s; ell] }
    }

    /// The levels.
    pub fn levels(&self) -> &[Arc<CompiledScheme>] {
        &self.levels
    }

    /// Product of the level dimensions `(∏mᵢ, ∏kᵢ, ∏nᵢ)`.
    pub fn factors(&self) -> (usize, usize, usize) {
        self.levels.iter().fold((1, 1, 1), |(a, b, c), s| (a * s.dims.0, b * s.dims.1, c * s.dims.2))
    }

    /// Checks that `A (m×k)` times `B (k×n)` can run without padding.
    pub fn check_dims(&self, m: usize, k: usize, n: usize) -> Result<()> {
        let (fm, fk, fn_) = self.factors();
        if !m.is_multiple_of(fm) || !k.is_multiple_of(fk) || !n.is_multiple_of(fn_) || m == 0 || k == 0 || n == 0 {
            return Err(Error::Dimension(format!(
                "{m}x{k} times {k}x{n} is not divisible by the plan factors ({fm},{fk},{fn_})"
            )));
        }
        Ok(())
    }
}

/// `A·B` following `plan` (see the module documentation).
///
/// # Errors
/// [`Error::Dimension`] on mismatched or non-divisible dimensions.
pub fn recursive_mm(plan: &RecursionPlan, a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols() != b.rows() {
        return Err(Error::Dimension(format!("cannot multiply {}x{} by {}x{}", a.rows(), a.cols(), b.rows(), b.cols())));
    }
    plan.check_dims(a.rows(), a.cols(), b.cols())?;
    Ok(recurse(&plan.levels, a, b))
}

fn recurse(levels: &[Arc<CompiledScheme>], a: &Matrix, b: &Matrix) -> Matrix {
    let Some((s, rest)) = levels.split_first() else {
        return classical_mm(a, b).expect("dimensions checked");
    };
    let (m, k, n) = s.dims;
    let left = s.l.run(&split(a, m, k));
    let right = s.r.run(&split(b, k, n));
    let products: Vec<Matrix> = left.iter().zip(&right).map(|(x, y)| recurse(rest, x, y)).collect();
    join(&s.p.run(&products), m, n)
}

/// Alternative-basis plan: a change-of-basis triple, its compiled programs
/// and the number of recursive levels.
#[derive(Clone, Debug)]
pub struct AltPlan {
    /// The factorization.
    pub cob: CoBTriple,
    /// Number of recursive levels `ℓ`.
    pub levels: usize,
    phi: FloatProgram,
    psi: FloatProgram,
    nut: FloatProgram,
    core: Arc<CompiledScheme>,
}

impl AltPlan {
    /// Compiles `φ`, `ψ`, `νᵀ` and the core.
    pub fn new(cob: CoBTriple, levels: usize, opts: &SlpOptions) -> Result<AltPlan> {
        cob.check_invertible()?;
        let prog = |m: &CoeffMatrix| FloatProgram::from_slp(&best_of(m, opts));
        Ok(AltPlan {
            phi: prog(&cob.phi)?,
            psi: prog(&cob.psi)?,
            nut: prog(&cob.nu.transpose())?,
            core: Arc::new(CompiledScheme::bilinear(&cob.core()?, opts)?),
            levels,
            cob,
        })
    }

    /// The compiled sparse core.
    pub fn core(&self) -> &Arc<CompiledScheme> {
        &self.core
    }
}

/// Applies a `p·q × p·q` change of basis recursively: blocks are first
/// transformed at the lower levels, then combined by `prog`.
fn change_basis(prog: &FloatProgram, a: &Matrix, p: usize, q: usize, ell: usize) -> Matrix {
    if ell == 0 {
        return a.clone();
    }
    let blocks: Vec<Matrix> = split(a, p, q).iter().map(|x| change_basis(prog, x, p, q, ell - 1)).collect();
    join(&prog.run(&blocks), p, q)
}

/// `A·B` through the alternative basis: `Ā = φ(A)`, `B̄ = ψ(B)`, the core
/// recursion on `Ā, B̄`, then `C = νᵀ(C̄)`, each change of basis applied
/// at all `ℓ` levels.
///
/// # Errors
/// [`Error::Dimension`] on mismatched or non-divisible dimensions.
pub fn altbasis_mm(plan: &AltPlan, a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let (m, k, n) = plan.cob.dims;
    let core = RecursionPlan::uniform(plan.core.clone(), plan.levels);
    if a.cols() != b.rows() {
        return Err(Error::Dimension(format!("cannot multiply {}x{} by {}x{}", a.rows(), a.cols(), b.rows(), b.cols())));
    }
    core.check_dims(a.rows(), a.cols(), b.cols())?;
    let abar = change_basis(&plan.phi, a, m, k, plan.levels);
    let bbar = change_basis(&plan.psi, b, k, n, plan.levels);
    let cbar = recurse(core.levels(), &abar, &bbar);
    Ok(change_basis(&plan.nut, &cbar, m, n, plan.levels))
}
