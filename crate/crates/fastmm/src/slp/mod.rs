//! Straight-line programs (SLPs) for the linear maps of a bilinear scheme.
//!
//! An [`Slp`] is a branch-free, single-assignment list of instructions
//! realizing `y = M·x` for a coefficient matrix `M`.  The module provides
//!
//! * the IR itself, with validation, exact and double-precision evaluation
//!   and operation counting ([`OpCounts`]);
//! * [`naive_slp`] — row-by-row evaluation, the reference count;
//! * [`cancellation_free`] — common-subexpression elimination on the matrix
//!   (colinear pairs, column multipliers, triangle relations, row
//!   multipliers, in that order);
//! * [`kernel_decompose`] — compute a maximal set of independent rows and
//!   derive the others through the left kernel;
//! * [`transpose_slp`] — Tellegen transposition;
//! * [`best_of`] — the cheapest of the above strategies;
//! * a line-oriented text format ([`Slp::to_text`], [`Slp::parse`]) and
//!   per-scheme operation-count reports ([`codegen_report`]).
//!
//! Additions and subtractions count as additions.  Multiplications by
//! `±1` are free (the sign is absorbed by a neighbouring `Add`/`Sub`);
//! every other constant multiplication counts as one multiplication, and
//! those by `2^t` are additionally reported as `div2`.

mod kernel;
mod linear;
mod report;
mod text;
mod transpose;

use std::collections::HashMap;

use crate::coeff::Coefficient;
use crate::error::{Error, Result};
use crate::matrix::CoeffMatrix;

pub use kernel::kernel_decompose;
pub use linear::{cancellation_free, naive_slp};
pub use report::{codegen_report, OpCountRow, OperationCountReport, Strategy};
pub use transpose::transpose_slp;

/// One SLP instruction.  Operands refer to the results of strictly earlier
/// instructions (by index in [`Slp::instrs`]).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instr {
    /// Reads input `x[i]`.
    Load(usize),
    /// The constant `0` (used for identically-zero outputs).
    Zero,
    /// `a + b`.
    Add(usize, usize),
    /// `a − b`.
    Sub(usize, usize),
    /// `c · a`.
    Mul(Coefficient, usize),
    /// Writes the value of `a` to output `y[o]`; produces no value.
    Store(usize, usize),
}

/// A straight-line program computing `n_out` linear forms of `n_in` inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slp {
    /// Number of inputs.
    pub n_in: usize,
    /// Number of outputs.
    pub n_out: usize,
    /// The instructions, in execution order.
    pub instrs: Vec<Instr>,
}

/// Operation counts of an SLP.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct OpCounts {
    /// Additions and subtractions.
    pub adds: usize,
    /// Multiplications by constants other than `±1`.
    pub mults: usize,
    /// The subset of `mults` whose constant is `±2^t`.
    pub div2: usize,
}

impl OpCounts {
    /// Lexicographic cost `(adds, mults)` used to rank programs.
    pub fn key(&self) -> (usize, usize) {
        (self.adds, self.mults)
    }
}

impl std::ops::Add for OpCounts {
    type Output = OpCounts;

    fn add(self, o: OpCounts) -> OpCounts {
        OpCounts { adds: self.adds + o.adds, mults: self.mults + o.mults, div2: self.div2 + o.div2 }
    }
}

/// Arithmetic used by [`Slp::eval_with`].
pub trait SlpScalar: Clone {
    /// The additive identity.
    fn zero() -> Self;
    /// `a + b`.
    fn add(a: &Self, b: &Self) -> Self;
    /// `a − b`.
    fn sub(a: &Self, b: &Self) -> Self;
    /// `c · a`.
    fn scale(c: &Coefficient, a: &Self) -> Self;
}

impl SlpScalar for Coefficient {
    fn zero() -> Self {
        Coefficient::zero()
    }
    fn add(a: &Self, b: &Self) -> Self {
        a + b
    }
    fn sub(a: &Self, b: &Self) -> Self {
        a - b
    }
    fn scale(c: &Coefficient, a: &Self) -> Self {
        c * a
    }
}

impl SlpScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(a: &Self, b: &Self) -> Self {
        a + b
    }
    fn sub(a: &Self, b: &Self) -> Self {
        a - b
    }
    fn scale(c: &Coefficient, a: &Self) -> Self {
        c.to_f64() * a
    }
}

/// Tuning knobs of the optimization passes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SlpOptions {
    /// Maximum number of complete pipeline runs explored when several
    /// colinear pairs tie for the largest number of representatives.
    pub branch_budget: usize,
    /// Maximum number of rounds of the four elimination phases.
    pub max_rounds: usize,
    /// Kernel decomposition enumerates every independent row subset when
    /// there are at most this many candidate subsets, and otherwise picks
    /// rows greedily by increasing Hamming weight.
    pub subset_limit: usize,
}

impl Default for SlpOptions {
    fn default() -> Self {
        SlpOptions { branch_budget: 64, max_rounds: 16, subset_limit: 512 }
    }
}

impl SlpOptions {
    /// Largest rank compiled with the default branch budget.
    pub const SMALL_RANK: usize = 16;

    /// Options scaled to a scheme of `rank` products: the defaults for
    /// small schemes, a branch budget of 4 above [`SlpOptions::SMALL_RANK`]
    /// (each pipeline run on a 40-product scheme takes about a second,
    /// and wider exploration gains only a few percent).
    pub fn for_rank(rank: usize) -> SlpOptions {
        if rank <= Self::SMALL_RANK {
            SlpOptions::default()
        } else {
            SlpOptions { branch_budget: 4, ..SlpOptions::default() }
        }
    }
}

impl Slp {
    /// The program `y = x` on `n` values.
    pub fn identity(n: usize) -> Slp {
        let mut instrs: Vec<Instr> = (0..n).map(Instr::Load).collect();
        instrs.extend((0..n).map(|i| Instr::Store(i, i)));
        Slp { n_in: n, n_out: n, instrs }
    }

    /// Checks single assignment, operand ranges and that every output is
    /// stored exactly once.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidProgram(msg));
        let mut is_value: Vec<bool> = Vec::with_capacity(self.instrs.len());
        let mut stored = vec![false; self.n_out];
        for (k, ins) in self.instrs.iter().enumerate() {
            let values = &is_value;
            let check = |a: usize| -> Result<()> {
                if a >= k || !values[a] {
                    return Err(Error::InvalidProgram(format!("instruction {k} reads invalid operand {a}")));
                }
                Ok(())
            };
            match ins {
                Instr::Load(i) => {
                    if *i >= self.n_in {
                        return bad(format!("instruction {k} loads input {i} of {}", self.n_in));
                    }
                }
                Instr::Zero => {}
                Instr::Add(a, b) | Instr::Sub(a, b) => {
                    check(*a)?;
                    check(*b)?;
                }
                Instr::Mul(c, a) => {
                    if c.is_zero() {
                        return bad(format!("instruction {k} multiplies by zero"));
                    }
                    check(*a)?;
                }
                Instr::Store(o, a) => {
                    check(*a)?;
                    if *o >= self.n_out {
                        return bad(format!("instruction {k} stores output {o} of {}", self.n_out));
                    }
                    if std::mem::replace(&mut stored[*o], true) {
                        return bad(format!("output {o} stored twice"));
                    }
                }
            }
            is_value.push(!matches!(ins, Instr::Store(..)));
        }
        if let Some(o) = stored.iter().position(|s| !s) {
            return bad(format!("output {o} is never stored"));
        }
        Ok(())
    }

    /// Operation counts.
    pub fn counts(&self) -> OpCounts {
        let mut c = OpCounts::default();
        for ins in &self.instrs {
            match ins {
                Instr::Add(..) | Instr::Sub(..) => c.adds += 1,
                Instr::Mul(k, _) if !k.is_unit() => {
                    c.mults += 1;
                    if k.is_power_of_two_scale() {
                        c.div2 += 1;
                    }
                }
                _ => {}
            }
        }
        c
    }

    /// Evaluates the program in order with caller-supplied arithmetic.
    ///
    /// # Panics
    /// If `x.len() != n_in` or the program is malformed (see
    /// [`Slp::validate`]).
    pub fn eval_with<T: SlpScalar>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n_in, "SLP expects {} inputs", self.n_in);
        let mut vals: Vec<Option<T>> = Vec::with_capacity(self.instrs.len());
        let mut out: Vec<Option<T>> = vec![None; self.n_out];
        let get = |vals: &[Option<T>], a: usize| vals[a].clone().expect("operand is a value");
        for ins in &self.instrs {
            let v = match ins {
                Instr::Load(i) => Some(x[*i].clone()),
                Instr::Zero => Some(T::zero()),
                Instr::Add(a, b) => Some(T::add(&get(&vals, *a), &get(&vals, *b))),
                Instr::Sub(a, b) => Some(T::sub(&get(&vals, *a), &get(&vals, *b))),
                Instr::Mul(c, a) => Some(T::scale(c, &get(&vals, *a))),
                Instr::Store(o, a) => {
                    out[*o] = Some(get(&vals, *a));
                    None
                }
            };
            vals.push(v);
        }
        out.into_iter().map(|v| v.expect("every output is stored")).collect()
    }

    /// Exact evaluation.
    pub fn eval_exact(&self, x: &[Coefficient]) -> Vec<Coefficient> {
        self.eval_with(x)
    }

    /// Double-precision evaluation (constants rounded to nearest).
    pub fn eval_f64(&self, x: &[f64]) -> Vec<f64> {
        self.eval_with(x)
    }

    /// The matrix realized by the program, recovered exactly by evaluating
    /// it on the unit vectors.
    pub fn to_matrix(&self) -> CoeffMatrix {
        let mut m = CoeffMatrix::zeros(self.n_out, self.n_in);
        for j in 0..self.n_in {
            let mut e = vec![Coefficient::zero(); self.n_in];
            e[j] = Coefficient::one();
            for (i, v) in self.eval_exact(&e).into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// True when the program computes exactly `M·x`.
    pub fn realizes(&self, m: &CoeffMatrix) -> bool {
        self.n_out == m.rows() && self.n_in == m.cols() && self.validate().is_ok() && self.to_matrix() == *m
    }

    /// Length of the longest dependency chain (loads and stores excluded).
    pub fn depth(&self) -> usize {
        let mut d = vec![0usize; self.instrs.len()];
        let mut best = 0;
        for (k, ins) in self.instrs.iter().enumerate() {
            d[k] = match ins {
                Instr::Load(_) | Instr::Zero => 0,
                Instr::Add(a, b) | Instr::Sub(a, b) => 1 + d[*a].max(d[*b]),
                Instr::Mul(_, a) => 1 + d[*a],
                Instr::Store(_, a) => d[*a],
            };
            best = best.max(d[k]);
        }
        best
    }
}

/// Checks `eval(s, x) = M·x` exactly on `trials` pseudo-random vectors with
/// small rational entries (numerators in `[-50, 50]`, denominators in
/// `[1, 7]`), drawn from a fixed seed.
pub fn check_equivalence(s: &Slp, m: &CoeffMatrix, trials: usize, seed: u64) -> bool {
    use rand::{Rng, SeedableRng};
    if s.validate().is_err() || s.n_in != m.cols() || s.n_out != m.rows() {
        return false;
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..trials).all(|_| {
        let x: Vec<Coefficient> =
            (0..m.cols()).map(|_| Coefficient::from_frac(rng.random_range(-50..=50), rng.random_range(1..=7))).collect();
        s.eval_exact(&x) == m.mul_vec(&x)
    })
}

/// The cheapest (fewest additions, then fewest multiplications) of
/// [`cancellation_free`]`(M)`, [`kernel_decompose`]`(M)` and the Tellegen
/// transpose of [`kernel_decompose`]`(Mᵀ)`, never worse than
/// [`naive_slp`]`(M)`.
pub fn best_of(m: &CoeffMatrix, opts: &SlpOptions) -> Slp {
    best_of_with_strategy(m, opts).0
}

/// [`best_of`] together with the strategy that produced the program.
pub fn best_of_with_strategy(m: &CoeffMatrix, opts: &SlpOptions) -> (Slp, Strategy) {
    let mut cands = vec![
        (naive_slp(m), Strategy::Naive),
        (cancellation_free(m, opts), Strategy::Direct),
        (kernel_decompose(m, opts), Strategy::Kernel),
    ];
    if let Ok(t) = transpose_slp(&kernel_decompose(&m.transpose(), opts)) {
        cands.push((t, Strategy::Transpose));
    }
    let naive = cands[0].0.counts();
    cands
        .into_iter()
        .filter(|(s, _)| {
            let c = s.counts();
            c.adds <= naive.adds && c.mults <= naive.mults
        })
        .min_by_key(|(s, _)| s.counts().key())
        .expect("the naive program is always a candidate")
}

/// Memoizing instruction builder shared by the passes.
#[derive(Default)]
pub(crate) struct Builder {
    pub(crate) instrs: Vec<Instr>,
    muls: HashMap<(usize, Coefficient), usize>,
}

impl Builder {
    pub(crate) fn push(&mut self, ins: Instr) -> usize {
        self.instrs.push(ins);
        self.instrs.len() - 1
    }

    /// `c·a`, reusing an identical earlier product; `1·a` is `a` itself.
    pub(crate) fn mul(&mut self, c: &Coefficient, a: usize) -> usize {
        if c.is_one() {
            return a;
        }
        if let Some(&k) = self.muls.get(&(a, c.clone())) {
            return k;
        }
        let k = self.push(Instr::Mul(c.clone(), a));
        self.muls.insert((a, c.clone()), k);
        k
    }

    /// `Σ cₖ·aₖ` with `len − 1` additions; starts from a positive term when
    /// there is one so that signs are absorbed by subtractions.
    pub(crate) fn sum(&mut self, terms: &[(Coefficient, usize)]) -> usize {
        if terms.is_empty() {
            return self.push(Instr::Zero);
        }
        let first = terms
            .iter()
            .position(|(c, _)| c.is_one())
            .or_else(|| terms.iter().position(|(c, _)| c.signum() > 0))
            .unwrap_or(0);
        let mut acc = self.mul(&terms[first].0, terms[first].1);
        for (k, (c, a)) in terms.iter().enumerate() {
            if k == first {
                continue;
            }
            let positive = c.signum() > 0;
            let t = self.mul(&c.abs(), *a);
            acc = self.push(if positive { Instr::Add(acc, t) } else { Instr::Sub(acc, t) });
        }
        acc
    }

    pub(crate) fn clear_memo(&mut self) {
        self.muls.clear();
    }

    pub(crate) fn finish(self, n_in: usize, n_out: usize) -> Slp {
        Slp { n_in, n_out, instrs: self.instrs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::{load_scheme, SchemeId};

    fn c(s: &str) -> Coefficient {
        s.parse().unwrap()
    }

    #[test]
    fn identity_program() {
        let s = Slp::identity(3);
        s.validate().unwrap();
        assert_eq!(s.counts(), OpCounts::default());
        let x = vec![c("1"), c("-2/3"), c("sqrt3")];
        assert_eq!(s.eval_exact(&x), x);
        assert!(s.realizes(&CoeffMatrix::identity(3)));
    }

    #[test]
    fn validation_rejects_malformed_programs() {
        let fwd = Slp { n_in: 1, n_out: 1, instrs: vec![Instr::Add(1, 1), Instr::Load(0), Instr::Store(0, 1)] };
        assert!(fwd.validate().is_err());
        let twice = Slp {
            n_in: 1,
            n_out: 1,
            instrs: vec![Instr::Load(0), Instr::Store(0, 0), Instr::Store(0, 0)],
        };
        assert!(twice.validate().is_err());
        let missing = Slp { n_in: 1, n_out: 2, instrs: vec![Instr::Load(0), Instr::Store(0, 0)] };
        assert!(missing.validate().is_err());
        let store_ref = Slp {
            n_in: 1,
            n_out: 2,
            instrs: vec![Instr::Load(0), Instr::Store(0, 0), Instr::Store(1, 1)],
        };
        assert!(store_ref.validate().is_err());
    }

    #[test]
    fn counting_rules() {
        let s = Slp {
            n_in: 2,
            n_out: 1,
            instrs: vec![
                Instr::Load(0),
                Instr::Load(1),
                Instr::Mul(c("-1"), 0),
                Instr::Mul(c("1/2"), 1),
                Instr::Mul(c("sqrt3"), 3),
                Instr::Sub(2, 4),
                Instr::Store(0, 5),
            ],
        };
        s.validate().unwrap();
        assert_eq!(s.counts(), OpCounts { adds: 1, mults: 2, div2: 1 });
        assert_eq!(s.depth(), 3);
        assert_eq!(s.eval_exact(&[c("1"), c("2")]), vec![c("-1-sqrt3")]);
    }

    #[test]
    fn best_of_realizes_every_scheme_matrix() {
        let opts = SlpOptions::default();
        for id in [SchemeId::Strassen, SchemeId::Winograd, SchemeId::AccurateSqrt3, SchemeId::Powers] {
            let h = load_scheme(&id).unwrap();
            let (l, r, p) = h.exact().unwrap();
            for m in [l, r, p] {
                let s = best_of(m, &opts);
                assert!(check_equivalence(&s, m, 100, 7), "{id}");
                let naive = naive_slp(m).counts();
                assert!(s.counts().adds <= naive.adds && s.counts().mults <= naive.mults);
            }
        }
    }

    #[test]
    fn float_evaluation_tracks_exact() {
        let h = load_scheme(&SchemeId::AccurateSqrt3).unwrap();
        let l = h.exact().unwrap().0;
        let s = best_of(l, &SlpOptions::default());
        let x = [0.3, -1.25, 2.0, 0.7];
        let exact = l.to_f64().mul_vec(&x);
        let got = s.eval_f64(&x);
        let range = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in exact.iter().zip(&got) {
            assert!((a - b).abs() <= (s.depth() as f64 + 2.0) * f64::EPSILON * range * 4.0);
        }
    }
}
