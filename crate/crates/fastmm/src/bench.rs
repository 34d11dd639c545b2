//! Accuracy benchmark harness.
//!
//! * [`gen_matrix`] — deterministic random inputs: uniform on `[−1, 1]`,
//!   standard normal, or `U·diag(σ)·Vᵀ` with log-spaced singular values
//!   (`randsvd`);
//! * [`reference_mm`] — the product accumulated in double-double
//!   arithmetic, accurate to `O(k·ε²)` per entry;
//! * [`run_bench`] — multiplies the same inputs with every configured plan,
//!   measures the max-norm error against the reference and compares it
//!   with the forward-error bound `E⁽ℓ⁾_{∞,∞}·‖A‖_max‖B‖_max·ε`.
//!
//! Trials run in parallel; trial `t` of a run seeded with `s` draws its
//! inputs from seed `s ⊕ t`, and records are sorted by (plan, size,
//! distribution, trial), so a configuration always produces the same CSV
//! bytes.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::bounds::{altbasis_bound, base_case, error_bound_plan, UNIT_ROUNDOFF};
use crate::error::{Error, Result};
use crate::exec::{altbasis_mm, classical_mm, recursive_mm, AltPlan, CompiledScheme, RecursionPlan};
use crate::hmrep::HMRep;
use crate::matrix::Matrix;
use crate::norms::NormId;
use crate::schemes::{load_scheme, SchemeId};
use crate::slp::SlpOptions;
use crate::sparsify::{sparsify, CoBTriple, SparsifyOptions};

/// Seed offset separating the stream of `B` from that of `A`.
const B_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;

/// Input distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Dist {
    /// Independent entries uniform on `[−1, 1]`.
    Uniform11,
    /// Independent standard normal entries.
    Normal01,
    /// `U·diag(σ)·Vᵀ` with Haar-distributed orthogonal `U`, `V` and
    /// singular values log-spaced from `1` down to `1/cond`.
    RandSvd(f64),
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dist::Uniform11 => f.write_str("uniform"),
            Dist::Normal01 => f.write_str("normal"),
            Dist::RandSvd(c) => write!(f, "randsvd:{c:e}"),
        }
    }
}

impl FromStr for Dist {
    type Err = Error;

    /// `uniform`, `normal` or `randsvd:<cond>`.
    fn from_str(s: &str) -> Result<Dist> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "uniform" | "uniform11" => Ok(Dist::Uniform11),
            "normal" | "normal01" | "gaussian" => Ok(Dist::Normal01),
            _ => {
                let cond = s
                    .strip_prefix("randsvd:")
                    .and_then(|c| c.parse::<f64>().ok())
                    .filter(|c| c.is_finite() && *c >= 1.0)
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown distribution {s:?}")))?;
                Ok(Dist::RandSvd(cond))
            }
        }
    }
}

/// A random `m × n` matrix, a deterministic function of `(dist, m, n, seed)`
/// (ChaCha8 stream).
pub fn gen_matrix(dist: Dist, m: usize, n: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match dist {
        Dist::Uniform11 => Matrix::from_fn(m, n, |_, _| rng.random_range(-1.0..=1.0)),
        Dist::Normal01 => Matrix::from_fn(m, n, |_, _| rng.sample(StandardNormal)),
        Dist::RandSvd(cond) => {
            let u = haar_orthogonal(m, &mut rng);
            let v = haar_orthogonal(n, &mut rng);
            let p = m.min(n);
            let sigma: Vec<f64> =
                (0..p).map(|i| if p == 1 { 1.0 } else { cond.powf(-(i as f64) / (p - 1) as f64) }).collect();
            Matrix::from_fn(m, n, |i, j| (0..p).map(|t| u[(i, t)] * sigma[t] * v[(j, t)]).sum())
        }
    }
}

/// Orthogonal factor of the QR decomposition of a Gaussian matrix, with
/// column signs fixed so that `R` has a positive diagonal (which makes the
/// distribution Haar).
fn haar_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `a + b = s + e` exactly.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// `a·b = p + e` exactly (fused multiply-add).
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// A matrix of double-double numbers `hi + lo`, `|lo| ≤ ulp(hi)/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct DdMatrix {
    rows: usize,
    cols: usize,
    hi: Vec<f64>,
    lo: Vec<f64>,
}

impl DdMatrix {
    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry `(i, j)` as `(hi, lo)`.
    pub fn get(&self, i: usize, j: usize) -> (f64, f64) {
        let t = i * self.cols + j;
        (self.hi[t], self.lo[t])
    }

    /// The entries rounded to double precision.
    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_vec(self.rows, self.cols, self.hi.clone())
    }

    /// `max |c_ij − ref_ij|`, the difference evaluated in double-double so
    /// that the reference itself contributes no rounding.
    pub fn max_abs_error(&self, c: &Matrix) -> Result<f64> {
        if c.rows() != self.rows || c.cols() != self.cols {
            return Err(Error::Dimension(format!(
                "{}x{} result against a {}x{} reference",
                c.rows(),
                c.cols(),
                self.rows,
                self.cols
            )));
        }
        Ok(c.data().iter().zip(self.hi.iter().zip(&self.lo)).fold(0.0, |m, (&x, (&h, &l))| {
            let (d, e) = two_sum(x, -h);
            m.max((d + (e - l)).abs())
        }))
    }
}

/// `A·B` with every dot product accumulated in double-double arithmetic
/// (exact products by FMA, compensated sums); the result differs from the
/// exact product by `O(k·ε²)` relative to `|A|·|B|`.
///
/// # Errors
/// [`Error::Dimension`] when the inner dimensions differ.
pub fn reference_mm(a: &Matrix, b: &Matrix) -> Result<DdMatrix> {
    if a.cols() != b.rows() {
        return Err(Error::Dimension(format!("cannot multiply {}x{} by {}x{}", a.rows(), a.cols(), b.rows(), b.cols())));
    }
    let (m, k, n) = (a.rows(), a.cols(), b.cols());
    let mut hi = vec![0.0; m * n];
    let mut lo = vec![0.0; m * n];
    for i in 0..m {
        let (hrow, lrow) = (&mut hi[i * n..(i + 1) * n], &mut lo[i * n..(i + 1) * n]);
        for p in 0..k {
            let aip = a.data()[i * k + p];
            for (j, &bpj) in b.row(p).iter().enumerate() {
                let (ph, pl) = two_prod(aip, bpj);
                let (sh, se) = two_sum(hrow[j], ph);
                let (h, l) = two_sum(sh, se + lrow[j] + pl);
                hrow[j] = h;
                lrow[j] = l;
            }
        }
    }
    Ok(DdMatrix { rows: m, cols: n, hi, lo })
}

/// How a benchmarked product is computed.
#[derive(Clone, Debug, PartialEq)]
pub enum BenchPlan {
    /// The classical triple loop on the whole matrices.
    Classical,
    /// One scheme at every level.
    Plain(SchemeId),
    /// Alternative-basis recursion: the bundled factorization for the
    /// accurate scheme, otherwise the result of
    /// [`sparsify`](crate::sparsify::sparsify).
    AltBasis(SchemeId),
    /// A schedule of schemes cycled level by level (outermost first).
    Mixed(Vec<SchemeId>),
}

impl BenchPlan {
    /// The `plan` CSV column.
    pub fn kind(&self) -> &'static str {
        match self {
            BenchPlan::Classical => "classical",
            BenchPlan::Plain(_) => "plain",
            BenchPlan::AltBasis(_) => "altbasis",
            BenchPlan::Mixed(_) => "mixed",
        }
    }

    /// The `scheme` CSV column (schedules joined by `>`).
    pub fn label(&self) -> String {
        match self {
            BenchPlan::Classical => "classical".into(),
            BenchPlan::Plain(s) | BenchPlan::AltBasis(s) => s.short_name(),
            BenchPlan::Mixed(v) => v.iter().map(SchemeId::short_name).collect::<Vec<_>>().join(">"),
        }
    }
}

impl FromStr for BenchPlan {
    type Err = Error;

    /// `classical`, a scheme name (plain recursion), `altbasis:<scheme>`
    /// or `mixed:<scheme>><scheme>>…`.
    fn from_str(s: &str) -> Result<BenchPlan> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("classical") {
            return Ok(BenchPlan::Classical);
        }
        if let Some(rest) = t.strip_prefix("altbasis:") {
            return Ok(BenchPlan::AltBasis(rest.parse()?));
        }
        if let Some(rest) = t.strip_prefix("mixed:") {
            let ids = rest.split('>').map(str::parse).collect::<Result<Vec<SchemeId>>>()?;
            if ids.is_empty() {
                return Err(Error::InvalidArgument("empty mixed schedule".into()));
            }
            return Ok(BenchPlan::Mixed(ids));
        }
        Ok(BenchPlan::Plain(t.parse()?))
    }
}

/// A benchmark configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    /// Plans to compare; all see the same inputs.
    pub plans: Vec<BenchPlan>,
    /// Problem sizes `(m, k, n)`.
    pub sizes: Vec<(usize, usize, usize)>,
    /// Input distributions.
    pub dists: Vec<Dist>,
    /// Trials per (size, distribution); at least 1.
    pub trials: usize,
    /// Base seed.
    pub seed: u64,
    /// Recursion stops before any base-case dimension drops below this.
    pub min_base: usize,
    /// Fixed recursion depth instead of the `min_base` rule (the run fails
    /// for plans whose dimensions do not divide).
    pub levels: Option<usize>,
}

impl BenchConfig {
    /// Square sizes `n × n × n`.
    pub fn square_sizes(ns: &[usize]) -> Vec<(usize, usize, usize)> {
        ns.iter().map(|&n| (n, n, n)).collect()
    }

    /// The 2×2×2 family against the classical product, on the given
    /// square sizes, uniform and normal inputs, 10 trials and recursion
    /// down to 16×16 blocks (four levels at `n = 256`).
    pub fn family_222(ns: &[usize], seed: u64) -> BenchConfig {
        BenchConfig {
            plans: vec![
                BenchPlan::Classical,
                BenchPlan::Plain(SchemeId::Conventional(2, 2, 2)),
                BenchPlan::Plain(SchemeId::Winograd),
                BenchPlan::Plain(SchemeId::Strassen),
                BenchPlan::Plain(SchemeId::Powers),
                BenchPlan::Plain(SchemeId::AccurateSqrt3),
                BenchPlan::AltBasis(SchemeId::AccurateSqrt3),
            ],
            sizes: Self::square_sizes(ns),
            dists: vec![Dist::Uniform11, Dist::Normal01],
            trials: 10,
            seed,
            min_base: 16,
            levels: None,
        }
    }
}

/// One measured product.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    /// Scheme label ([`BenchPlan::label`]).
    pub scheme: String,
    /// Plan kind ([`BenchPlan::kind`]).
    pub plan: &'static str,
    /// `(m, k, n)`.
    pub size: (usize, usize, usize),
    /// Recursion depth used.
    pub levels: usize,
    /// Input distribution.
    pub dist: Dist,
    /// Trial index.
    pub trial: usize,
    /// `‖Ĉ − C‖_max` against the double-double reference.
    pub err_max: f64,
    /// `err_max / (‖A‖_max ‖B‖_max)`.
    pub rel_err: f64,
    /// `E⁽ℓ⁾_{∞,∞}·‖A‖_max‖B‖_max·ε`.
    pub bound: f64,
    /// `err_max / bound`; at most 1 whenever the bound holds.
    pub ratio: f64,
    /// Seed the inputs were drawn from.
    pub seed: u64,
}

/// CSV header of [`BenchOutcome::to_csv`].
pub const CSV_HEADER: &str = "scheme,plan,m,k,n,levels,dist,trial,err_max,rel_err,bound,ratio,seed";

/// A plan that could not run at some size.
#[derive(Clone, Debug, PartialEq)]
pub struct Skipped {
    /// Scheme label.
    pub scheme: String,
    /// `(m, k, n)`, or `None` when the plan failed to compile.
    pub size: Option<(usize, usize, usize)>,
    /// Why.
    pub reason: String,
}

/// Median error of one (plan, size, distribution) group.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    /// Scheme label.
    pub scheme: String,
    /// Plan kind.
    pub plan: &'static str,
    /// `(m, k, n)`.
    pub size: (usize, usize, usize),
    /// Distribution.
    pub dist: Dist,
    /// Median of `err_max` over the trials.
    pub median_err: f64,
    /// Largest `ratio` over the trials.
    pub max_ratio: f64,
}

/// Result of [`run_bench`].
#[derive(Clone, Debug, PartialEq)]
pub struct BenchOutcome {
    /// Records sorted by (plan, size, distribution, trial).
    pub records: Vec<BenchRecord>,
    /// Plans that could not run.
    pub skipped: Vec<Skipped>,
}

/// Fixed-width scientific notation with 17 significant digits.
fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

impl BenchOutcome {
    /// The records as CSV (with header).
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.scheme,
                r.plan,
                r.size.0,
                r.size.1,
                r.size.2,
                r.levels,
                r.dist,
                r.trial,
                sci(r.err_max),
                sci(r.rel_err),
                sci(r.bound),
                sci(r.ratio),
                r.seed
            ));
        }
        out
    }

    /// Records whose error exceeds the bound.
    pub fn violations(&self) -> Vec<&BenchRecord> {
        self.records.iter().filter(|r| !(r.ratio <= 1.0)).collect()
    }

    /// Median error per (plan, size, distribution), in record order.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut rows: Vec<SummaryRow> = Vec::new();
        let mut errs: Vec<Vec<f64>> = Vec::new();
        for r in &self.records {
            let same = rows.last().is_some_and(|s: &SummaryRow| {
                s.scheme == r.scheme && s.plan == r.plan && s.size == r.size && s.dist == r.dist
            });
            if !same {
                rows.push(SummaryRow {
                    scheme: r.scheme.clone(),
                    plan: r.plan,
                    size: r.size,
                    dist: r.dist,
                    median_err: 0.0,
                    max_ratio: 0.0,
                });
                errs.push(Vec::new());
            }
            let last = rows.last_mut().expect("pushed above");
            last.max_ratio = last.max_ratio.max(r.ratio);
            errs.last_mut().expect("pushed above").push(r.err_max);
        }
        for (row, e) in rows.iter_mut().zip(errs.iter_mut()) {
            row.median_err = median(e);
        }
        rows
    }

    /// Median of `err_max` for one scheme label, plan kind, size and
    /// distribution.
    pub fn median(&self, scheme: &str, plan: &str, size: (usize, usize, usize), dist: Dist) -> Option<f64> {
        self.summary()
            .into_iter()
            .find(|s| s.scheme == scheme && s.plan == plan && s.size == size && s.dist == dist)
            .map(|s| s.median_err)
    }

    /// Aligned-text summary table.
    pub fn summary_text(&self) -> String {
        let mut out = format!("{:<28} {:<9} {:>16} {:<14} {:>12} {:>10}\n", "scheme", "plan", "size", "dist", "median_err", "max_ratio");
        for s in self.summary() {
            let size = format!("{}x{}x{}", s.size.0, s.size.1, s.size.2);
            out.push_str(&format!(
                "{:<28} {:<9} {:>16} {:<14} {:>12.4e} {:>10.4}\n",
                s.scheme,
                s.plan,
                size,
                s.dist.to_string(),
                s.median_err,
                s.max_ratio
            ));
        }
        for s in &self.skipped {
            let size = s.size.map_or("-".to_string(), |(m, k, n)| format!("{m}x{k}x{n}"));
            out.push_str(&format!("skipped {} at {}: {}\n", s.scheme, size, s.reason));
        }
        out
    }
}

/// Median of a non-empty sample (mean of the two middle values for even
/// counts).
pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// A plan with its schemes loaded and compiled.
enum Prepared {
    Classical,
    Schedule { schemes: Vec<(HMRep, Arc<CompiledScheme>)> },
    AltBasis { cob: CoBTriple },
}

/// A plan instantiated for one size.
enum Runnable {
    Classical,
    Recursive { plan: RecursionPlan, bound_factor: f64 },
    AltBasis { plan: Box<AltPlan>, bound_factor: f64 },
}

fn prepare(plan: &BenchPlan) -> Result<Prepared> {
    let compile = |id: &SchemeId| -> Result<(HMRep, Arc<CompiledScheme>)> {
        let h = load_scheme(id)?;
        let c = CompiledScheme::new(&h, &SlpOptions::for_rank(h.rank()))?;
        Ok((h, Arc::new(c)))
    };
    Ok(match plan {
        BenchPlan::Classical => Prepared::Classical,
        BenchPlan::Plain(id) => Prepared::Schedule { schemes: vec![compile(id)?] },
        BenchPlan::Mixed(ids) => {
            if ids.is_empty() {
                return Err(Error::InvalidArgument("empty mixed schedule".into()));
            }
            Prepared::Schedule { schemes: ids.iter().map(compile).collect::<Result<_>>()? }
        }
        BenchPlan::AltBasis(id) => {
            let cob = match id {
                SchemeId::AccurateSqrt3 | SchemeId::AltBasisCoB => CoBTriple::bundled_accurate(),
                _ => sparsify(&load_scheme(id)?, &SparsifyOptions::default())?,
            };
            Prepared::AltBasis { cob }
        }
    })
}

/// Number of levels of the cyclic schedule `dims` that fit `size`.
fn fit_levels(dims: &[(usize, usize, usize)], size: (usize, usize, usize), cfg: &BenchConfig) -> Result<usize> {
    let fits = |cur: (usize, usize, usize), d: (usize, usize, usize), min: usize| {
        cur.0.is_multiple_of(d.0) && cur.1.is_multiple_of(d.1) && cur.2.is_multiple_of(d.2) && cur.0 / d.0 >= min && cur.1 / d.1 >= min && cur.2 / d.2 >= min
    };
    let mut cur = size;
    let mut ell = 0;
    loop {
        if cfg.levels == Some(ell) {
            return Ok(ell);
        }
        let d = dims[ell % dims.len()];
        let min = if cfg.levels.is_some() { 1 } else { cfg.min_base.max(1) };
        if !fits(cur, d, min) {
            break;
        }
        cur = (cur.0 / d.0, cur.1 / d.1, cur.2 / d.2);
        ell += 1;
    }
    match cfg.levels {
        None if ell == 0 => Err(Error::Dimension(format!(
            "no level fits {}x{}x{} with base dimension at least {}",
            size.0, size.1, size.2, cfg.min_base
        ))),
        Some(want) => Err(Error::Dimension(format!(
            "{}x{}x{} does not allow {want} levels (only {ell})",
            size.0, size.1, size.2
        ))),
        None => Ok(ell),
    }
}

fn instantiate(p: &Prepared, size: (usize, usize, usize), cfg: &BenchConfig) -> Result<(Runnable, usize)> {
    let (_, k, _) = size;
    Ok(match p {
        Prepared::Classical => (Runnable::Classical, 0),
        Prepared::Schedule { schemes } => {
            let dims: Vec<_> = schemes.iter().map(|(h, _)| h.dims()).collect();
            let ell = fit_levels(&dims, size, cfg)?;
            let levels: Vec<Arc<CompiledScheme>> = (0..ell).map(|i| schemes[i % schemes.len()].1.clone()).collect();
            let reps: Vec<&HMRep> = (0..ell).map(|i| &schemes[i % schemes.len()].0).collect();
            let plan = RecursionPlan::new(levels);
            let k0 = k / plan.factors().1;
            let bound_factor = error_bound_plan(&reps, NormId::Max, NormId::Max, k0)?;
            (Runnable::Recursive { plan, bound_factor }, ell)
        }
        Prepared::AltBasis { cob } => {
            let ell = fit_levels(&[cob.dims], size, cfg)?;
            let plan = AltPlan::new(cob.clone(), ell, &SlpOptions::default())?;
            let k0 = k / cob.dims.1.pow(ell as u32);
            let bound_factor = altbasis_bound(cob, NormId::Max, NormId::Max, ell as u32, k0)?.e_ell;
            (Runnable::AltBasis { plan: Box::new(plan), bound_factor }, ell)
        }
    })
}

impl Runnable {
    fn multiply(&self, a: &Matrix, b: &Matrix) -> Result<Matrix> {
        match self {
            Runnable::Classical => classical_mm(a, b),
            Runnable::Recursive { plan, .. } => recursive_mm(plan, a, b),
            Runnable::AltBasis { plan, .. } => altbasis_mm(plan, a, b),
        }
    }

    fn bound_factor(&self, k: usize) -> f64 {
        match self {
            Runnable::Classical => base_case(NormId::Max, NormId::Max, k).0,
            Runnable::Recursive { bound_factor, .. } | Runnable::AltBasis { bound_factor, .. } => *bound_factor,
        }
    }
}

/// Runs the benchmark (see the module documentation).
///
/// Plans that fail to compile, or whose dimensions do not divide a size,
/// are reported in [`BenchOutcome::skipped`] and the run continues.
///
/// # Errors
/// [`Error::InvalidArgument`] for an empty configuration or zero trials.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchOutcome> {
    if cfg.trials == 0 || cfg.plans.is_empty() || cfg.sizes.is_empty() || cfg.dists.is_empty() {
        return Err(Error::InvalidArgument("benchmark needs plans, sizes, distributions and at least one trial".into()));
    }
    if cfg.sizes.iter().any(|&(m, k, n)| m == 0 || k == 0 || n == 0) {
        return Err(Error::InvalidArgument("sizes must be positive".into()));
    }
    let mut skipped = Vec::new();
    let prepared: Vec<Option<Prepared>> = cfg
        .plans
        .iter()
        .map(|p| match prepare(p) {
            Ok(x) => Some(x),
            Err(e) => {
                skipped.push(Skipped { scheme: p.label(), size: None, reason: e.to_string() });
                None
            }
        })
        .collect();

    // (plan index, size index, dist index, trial) → record
    let mut keyed: Vec<((usize, usize, usize, usize), BenchRecord)> = Vec::new();
    for (si, &size) in cfg.sizes.iter().enumerate() {
        let mut runnables: Vec<(usize, Runnable, usize)> = Vec::new();
        for (pi, p) in prepared.iter().enumerate() {
            let Some(p) = p else { continue };
            match instantiate(p, size, cfg) {
                Ok((r, ell)) => runnables.push((pi, r, ell)),
                Err(e) => skipped.push(Skipped { scheme: cfg.plans[pi].label(), size: Some(size), reason: e.to_string() }),
            }
        }
        if runnables.is_empty() {
            continue;
        }
        for (di, &dist) in cfg.dists.iter().enumerate() {
            let per_trial: Vec<Result<Vec<_>>> = (0..cfg.trials)
                .into_par_iter()
                .map(|trial| {
                    let seed = cfg.seed ^ trial as u64;
                    let a = gen_matrix(dist, size.0, size.1, seed);
                    let b = gen_matrix(dist, size.1, size.2, seed ^ B_STREAM);
                    let reference = reference_mm(&a, &b)?;
                    let scale = a.max_abs() * b.max_abs();
                    runnables
                        .iter()
                        .map(|(pi, r, ell)| {
                            let c = r.multiply(&a, &b)?;
                            let err_max = reference.max_abs_error(&c)?;
                            let bound = r.bound_factor(size.1) * scale * UNIT_ROUNDOFF;
                            let plan = &cfg.plans[*pi];
                            Ok((
                                (*pi, si, di, trial),
                                BenchRecord {
                                    scheme: plan.label(),
                                    plan: plan.kind(),
                                    size,
                                    levels: *ell,
                                    dist,
                                    trial,
                                    err_max,
                                    rel_err: err_max / scale,
                                    bound,
                                    ratio: err_max / bound,
                                    seed,
                                },
                            ))
                        })
                        .collect()
                })
                .collect();
            for t in per_trial {
                keyed.extend(t?);
            }
        }
    }
    keyed.sort_by_key(|(k, _)| *k);
    Ok(BenchOutcome { records: keyed.into_iter().map(|(_, r)| r).collect(), skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{FromPrimitive, Signed};

    #[test]
    fn generators_are_deterministic_and_in_range() {
        for d in [Dist::Uniform11, Dist::Normal01, Dist::RandSvd(1e6)] {
            assert_eq!(gen_matrix(d, 5, 7, 3), gen_matrix(d, 5, 7, 3));
            assert_ne!(gen_matrix(d, 5, 7, 3), gen_matrix(d, 5, 7, 4));
        }
        assert!(gen_matrix(Dist::Uniform11, 20, 20, 1).data().iter().all(|x| (-1.0..=1.0).contains(x)));
        let g = gen_matrix(Dist::Normal01, 60, 60, 2);
        let mean = g.data().iter().sum::<f64>() / 3600.0;
        assert!(mean.abs() < 0.1);
    }

    /// `σ_max` by power iteration on `AᵀA`, `σ_min` by inverse iteration
    /// with an LU solve.
    fn condition_estimate(a: &Matrix) -> f64 {
        let n = a.rows();
        let am = DMatrix::from_row_slice(n, n, a.data());
        let ata = am.transpose() * &am;
        let mut x = nalgebra::DVector::from_element(n, 1.0);
        for _ in 0..200 {
            x = &ata * &x;
            x /= x.norm();
        }
        let smax = (&am * &x).norm();
        let lu = am.clone().lu();
        let lut = am.transpose().lu();
        let mut y = nalgebra::DVector::from_fn(n, |i, _| 1.0 + i as f64 / n as f64);
        for _ in 0..50 {
            let z = lut.solve(&y).unwrap();
            y = lu.solve(&z).unwrap();
            y /= y.norm();
        }
        let smin = (&am * &y).norm();
        smax / smin
    }

    #[test]
    fn randsvd_condition_number() {
        let a = gen_matrix(Dist::RandSvd(1e12), 24, 24, 5);
        let c = condition_estimate(&a);
        assert!((1e11..=1e13).contains(&c), "cond {c:e}");
        let a = gen_matrix(Dist::RandSvd(1e3), 16, 16, 6);
        let c = condition_estimate(&a);
        assert!((c / 1e3 - 1.0).abs() < 1e-6, "cond {c}");
    }

    #[test]
    fn reference_exact_on_sign_matrices() {
        let a = Matrix::from_fn(16, 16, |i, j| if (i * 7 + j * 3) % 5 < 2 { -1.0 } else { 1.0 });
        let b = Matrix::from_fn(16, 16, |i, j| if (i + 2 * j) % 3 == 0 { 0.0 } else { 1.0 });
        let r = reference_mm(&a, &b).unwrap();
        assert_eq!(r.to_matrix(), classical_mm(&a, &b).unwrap());
        assert!(r.lo.iter().all(|&l| l == 0.0));
    }

    #[test]
    fn reference_matches_exact_rational_product() {
        let a = gen_matrix(Dist::Normal01, 9, 13, 7);
        let b = gen_matrix(Dist::Uniform11, 13, 6, 8);
        let r = reference_mm(&a, &b).unwrap();
        let q = |x: f64| BigRational::from_f64(x).unwrap();
        for i in 0..9 {
            for j in 0..6 {
                let exact: BigRational = (0..13).map(|p| q(a.row(i)[p]) * q(b.row(p)[j])).fold(BigRational::from_integer(BigInt::from(0)), |s, t| s + t);
                let (h, l) = r.get(i, j);
                let diff = (q(h) + q(l) - &exact).abs();
                let scale: f64 = (0..13).map(|p| (a.row(i)[p] * b.row(p)[j]).abs()).sum();
                assert!(diff <= q(13.0 * f64::EPSILON * f64::EPSILON * scale), "({i},{j})");
            }
        }
        let c = classical_mm(&a, &b).unwrap();
        let err = r.max_abs_error(&c).unwrap();
        assert!(err <= 13.0 * f64::EPSILON * a.max_abs() * b.max_abs());
    }

    #[test]
    fn dist_names_round_trip() {
        for d in [Dist::Uniform11, Dist::Normal01, Dist::RandSvd(1e12)] {
            assert_eq!(d.to_string().parse::<Dist>().unwrap(), d);
        }
        assert!("cauchy".parse::<Dist>().is_err());
        assert!("randsvd:0.5".parse::<Dist>().is_err());
    }

    fn small_config() -> BenchConfig {
        BenchConfig {
            plans: vec![
                BenchPlan::Classical,
                BenchPlan::Plain(SchemeId::Strassen),
                BenchPlan::AltBasis(SchemeId::AccurateSqrt3),
                BenchPlan::Plain(SchemeId::Smirnov336Accurate),
            ],
            sizes: BenchConfig::square_sizes(&[16, 32]),
            dists: vec![Dist::Uniform11],
            trials: 3,
            seed: 42,
            min_base: 4,
            levels: None,
        }
    }

    #[test]
    fn bench_is_deterministic_sorted_and_bounded() {
        let cfg = small_config();
        let out = run_bench(&cfg).unwrap();
        assert_eq!(out.to_csv(), run_bench(&cfg).unwrap().to_csv());
        // 3 runnable plans × 2 sizes × 3 trials; the <3,3,6> scheme is skipped.
        assert_eq!(out.records.len(), 18);
        assert_eq!(out.skipped.len(), 2);
        assert!(out.violations().is_empty());
        assert_eq!(out.records[0].scheme, "classical");
        assert_eq!((out.records[3].size, out.records[3].trial), ((32, 32, 32), 0));
        assert_eq!(out.records[6].levels, 2);
        assert_eq!(out.records[9].levels, 3);
        let csv = out.to_csv();
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
        let fields: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(fields.len(), 13);
        assert_eq!(fields[8].split('e').next().unwrap().replace(['-', '.'], "").len(), 17);
        assert_eq!(out.summary().len(), 6);
    }

    #[test]
    fn fixed_levels_and_mixed_schedules() {
        let cfg = BenchConfig {
            plans: vec![BenchPlan::Mixed(vec![SchemeId::Strassen, SchemeId::Conventional(2, 2, 2)])],
            sizes: BenchConfig::square_sizes(&[8, 12]),
            dists: vec![Dist::Normal01],
            trials: 2,
            seed: 1,
            min_base: 1,
            levels: Some(3),
        };
        let out = run_bench(&cfg).unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.records[0].levels, 3);
        assert_eq!(out.skipped.len(), 1);
        assert!(out.violations().is_empty());
    }

    #[test]
    fn plan_names() {
        assert_eq!("classical".parse::<BenchPlan>().unwrap(), BenchPlan::Classical);
        assert_eq!("strassen".parse::<BenchPlan>().unwrap(), BenchPlan::Plain(SchemeId::Strassen));
        assert_eq!("altbasis:accurate".parse::<BenchPlan>().unwrap(), BenchPlan::AltBasis(SchemeId::AccurateSqrt3));
        let m: BenchPlan = "mixed:strassen>winograd".parse().unwrap();
        assert_eq!(m.label(), "strassen>winograd");
        assert!("mixed:strassen>nope".parse::<BenchPlan>().is_err());
    }

    #[test]
    fn median_of_even_and_odd_samples() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
