//! Kernel decomposition: compute independent rows, derive the rest.
//!
//! For `M` of rank `r` with fewer than `m` independent rows, pick `r`
//! independent rows `M_I`; every other row is `M_D = K·M_I` with
//! `K = M_D[:,J]·M_I[:,J]⁻¹` for any `r` independent columns `J`
//! (`[−K  I]` is a left kernel of the row-permuted `M`).  The rows of
//! `M_I` are computed from the inputs and the rows of `M_D` from the
//! outputs of `M_I`; the whole system then goes through the elimination
//! pipeline of [`cancellation_free`](super::cancellation_free).
//!
//! The independent rows are the sparsest ones: for small matrices every
//! independent subset is tried and the cheapest program kept, otherwise
//! rows are chosen greedily by increasing Hamming weight (ties by index).

use super::linear::{cancellation_free, optimize_state, LinState};
use super::{Slp, SlpOptions};
use crate::matrix::CoeffMatrix;

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Greedy rank profile of the rows of `m` visited in `order`.
fn greedy_independent(m: &CoeffMatrix, order: &[usize], target: usize) -> Vec<usize> {
    let mut picked: Vec<usize> = Vec::with_capacity(target);
    for &i in order {
        let mut trial = picked.clone();
        trial.push(i);
        if m.select_rows(&trial).rank() == trial.len() {
            picked = trial;
            if picked.len() == target {
                break;
            }
        }
    }
    picked
}

fn for_each_subset(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

/// The split system for the independent rows `idx` (sorted).
fn split_state(m: &CoeffMatrix, idx: &[usize]) -> Option<LinState> {
    let r = idx.len();
    let top = m.select_rows(idx);
    let deps_idx: Vec<usize> = (0..m.rows()).filter(|i| !idx.contains(i)).collect();
    let topt = top.transpose();
    let cols = greedy_independent(&topt, &(0..m.cols()).collect::<Vec<_>>(), r);
    if cols.len() != r {
        return None;
    }
    let square = topt.select_rows(&cols).transpose();
    let inv = square.inverse().ok()?;
    let dsel = m.select_rows(&deps_idx).transpose().select_rows(&cols).transpose();
    let k = dsel.mul(&inv).ok()?;
    let mut order = vec![0; m.rows()];
    for (p, &i) in idx.iter().enumerate() {
        order[i] = p;
    }
    for (q, &i) in deps_idx.iter().enumerate() {
        order[i] = r + q;
    }
    Some(LinState::from_split(&top, &k, &order))
}

/// Kernel decomposition of `M`; a matrix without dependent rows is handed
/// to [`cancellation_free`](super::cancellation_free) unchanged.
pub fn kernel_decompose(m: &CoeffMatrix, opts: &SlpOptions) -> Slp {
    let rank = m.rank();
    if rank == m.rows() || rank == 0 {
        return cancellation_free(m, opts);
    }
    let mut best: Option<Slp> = None;
    let mut consider = |idx: &[usize]| {
        if m.select_rows(idx).rank() != idx.len() {
            return;
        }
        if let Some(s) = split_state(m, idx) {
            let slp = optimize_state(&s, opts);
            if best.as_ref().is_none_or(|b| slp.counts().key() < b.counts().key()) {
                best = Some(slp);
            }
        }
    };
    if binomial(m.rows(), rank) <= opts.subset_limit as u128 {
        for_each_subset(m.rows(), rank, &mut consider);
    } else {
        let mut order: Vec<usize> = (0..m.rows()).collect();
        order.sort_by_key(|&i| (m.row_nnz(i), i));
        let mut idx = greedy_independent(m, &order, rank);
        idx.sort_unstable();
        consider(&idx);
    }
    best.unwrap_or_else(|| cancellation_free(m, opts))
}
