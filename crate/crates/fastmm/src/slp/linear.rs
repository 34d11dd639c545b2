//! Row-by-row programs and the cancellation-free elimination pipeline.
//!
//! The pipeline works on a *linear system* rather than on instructions:
//! every row defines one variable as a linear combination of inputs and of
//! other row variables.  Outputs are rows; extracted common
//! subexpressions become new rows.  Four rewriting phases make the system
//! sparser and leave more unit coefficients:
//!
//! 1. **colinear pairs** — a pair of variables occurring with proportional
//!    coefficients in several rows (a vanishing 2×2 minor) is computed once
//!    and reused; repeated until no pair has two representatives;
//! 2. **column multipliers** — equal (up to sign) non-unit coefficients of
//!    a variable across rows share one scaled copy of it;
//! 3. **triangle relations** — a coefficient `±q·a` next to `a`-scaled
//!    copies is rewritten as `q` times that copy when `±q` already occurs
//!    in the row, so that the row multiplier phase can merge them;
//! 4. **row multipliers** — equal (up to sign) non-unit coefficients in a
//!    row are factored out of a new sum.
//!
//! Rounds are repeated until a fixed point, the system is emitted as an
//! SLP after every phase, and the cheapest program is kept.  Ties among the
//! pairs with the most representatives are explored breadth-first within
//! a branch budget.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::rc::Rc;

use super::{Builder, Instr, Slp, SlpOptions};
use crate::coeff::Coefficient;
use crate::matrix::CoeffMatrix;

type Row = BTreeMap<usize, Coefficient>;

/// A linear system: variable `n_in + k` is defined by `rows[k]`.
#[derive(Clone, Debug)]
pub(crate) struct LinState {
    n_in: usize,
    rows: Vec<Row>,
    /// Row defining each output.
    outputs: Vec<usize>,
}

fn nonunit(c: &Coefficient) -> bool {
    !c.is_unit()
}

impl LinState {
    /// One row per matrix row, all over the inputs.
    pub(crate) fn from_matrix(m: &CoeffMatrix) -> LinState {
        let rows = (0..m.rows())
            .map(|i| m.row(i).iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(j, c)| (j, c.clone())).collect())
            .collect();
        LinState { n_in: m.cols(), rows, outputs: (0..m.rows()).collect() }
    }

    /// A system whose first rows compute `top` from the inputs and whose
    /// remaining outputs are combinations (`deps`) of those first rows.
    /// `order[o]` gives, for output `o`, its position in `top ++ deps`.
    pub(crate) fn from_split(top: &CoeffMatrix, deps: &CoeffMatrix, order: &[usize]) -> LinState {
        let mut s = LinState::from_matrix(top);
        let base = s.n_in;
        for i in 0..deps.rows() {
            let row: Row = deps
                .row(i)
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(j, c)| (base + j, c.clone()))
                .collect();
            s.rows.push(row);
        }
        s.outputs = order.to_vec();
        s
    }

    fn var(&self, row: usize) -> usize {
        self.n_in + row
    }

    fn row_of(&self, var: usize) -> Option<usize> {
        var.checked_sub(self.n_in)
    }

    fn push_row(&mut self, row: Row) -> usize {
        self.rows.push(row);
        self.var(self.rows.len() - 1)
    }

    fn add_entry(row: &mut Row, var: usize, c: Coefficient) {
        let v = match row.remove(&var) {
            Some(old) => old + c,
            None => c,
        };
        if !v.is_zero() {
            row.insert(var, v);
        }
    }

    /// Emits the system as an SLP: used inputs are loaded in index order,
    /// then rows in dependency order; rows `1·v` are aliases.
    pub(crate) fn emit(&self) -> Slp {
        let mut used = vec![false; self.n_in + self.rows.len()];
        let mut stack: Vec<usize> = self.outputs.iter().map(|&r| self.var(r)).collect();
        while let Some(v) = stack.pop() {
            if std::mem::replace(&mut used[v], true) {
                continue;
            }
            if let Some(r) = self.row_of(v) {
                stack.extend(self.rows[r].keys().copied());
            }
        }
        let mut b = Builder::default();
        let mut node: Vec<Option<usize>> = vec![None; used.len()];
        for i in 0..self.n_in {
            if used[i] {
                node[i] = Some(b.push(Instr::Load(i)));
            }
        }
        for &o in &self.outputs {
            self.emit_var(self.var(o), &mut b, &mut node);
        }
        for (o, &r) in self.outputs.iter().enumerate() {
            let a = node[self.var(r)].expect("outputs are emitted");
            b.push(Instr::Store(o, a));
        }
        b.finish(self.n_in, self.outputs.len())
    }

    fn emit_var(&self, v: usize, b: &mut Builder, node: &mut Vec<Option<usize>>) -> usize {
        if let Some(k) = node[v] {
            return k;
        }
        let r = self.row_of(v).expect("inputs are loaded up front");
        let terms: Vec<(Coefficient, usize)> =
            self.rows[r].iter().map(|(&u, c)| (c.clone(), self.emit_var(u, b, node))).collect();
        let k = b.sum(&terms);
        node[v] = Some(k);
        k
    }

    fn pair_candidates(&self, cache: &mut PairCache) -> Vec<PairCand> {
        let mut index: HashMap<(usize, usize, Coefficient), usize> = HashMap::new();
        let mut cands: Vec<PairCand> = Vec::new();
        for (r, row) in self.rows.iter().enumerate() {
            if row.len() < 2 {
                continue;
            }
            let pairs = cache.entry(row.clone()).or_insert_with(|| row_pairs(row)).clone();
            for key in pairs.iter() {
                let k = match index.get(key) {
                    Some(&k) => k,
                    None => {
                        index.insert(key.clone(), cands.len());
                        cands.push(PairCand { i: key.0, j: key.1, ratio: key.2.clone(), rows: Vec::new() });
                        cands.len() - 1
                    }
                };
                cands[k].rows.push(r);
            }
        }
        cands
    }

    /// Best colinear pairs (most representatives, ≥ 2), ordered by
    /// column pair.
    fn best_pairs(&self, cache: &mut PairCache) -> Vec<PairCand> {
        let cands = self.pair_candidates(cache);
        let best = cands.iter().map(|c| c.rows.len()).max().unwrap_or(0);
        if best < 2 {
            return Vec::new();
        }
        let mut top: Vec<PairCand> = cands.into_iter().filter(|c| c.rows.len() == best).collect();
        top.sort_by_key(|c| (c.i, c.j));
        top
    }

    fn apply_pair(&mut self, p: &PairCand) {
        let exact = p.rows.iter().copied().find(|&r| self.rows[r].len() == 2);
        let (v, ci, def_row) = match exact {
            Some(d) => (self.var(d), self.rows[d][&p.i].clone(), Some(d)),
            None => {
                // Scale the shared sum to minimize non-unit coefficients.
                let mut alphas = vec![Coefficient::one(), p.ratio.recip().expect("non-zero ratio")];
                alphas.extend(p.rows.iter().map(|&r| self.rows[r][&p.i].clone()));
                let cost = |al: &Coefficient| {
                    usize::from(nonunit(al))
                        + usize::from(nonunit(&(al * &p.ratio)))
                        + p.rows.iter().filter(|&&r| nonunit(&(&self.rows[r][&p.i] / al))).count()
                };
                let alpha = alphas.iter().min_by_key(|a| cost(a)).expect("non-empty").clone();
                let mut row = Row::new();
                row.insert(p.i, alpha.clone());
                row.insert(p.j, &alpha * &p.ratio);
                (self.push_row(row), alpha, None)
            }
        };
        for &r in &p.rows {
            if Some(r) == def_row {
                continue;
            }
            let row = &mut self.rows[r];
            let mi = row.remove(&p.i).expect("pair present");
            row.remove(&p.j);
            Self::add_entry(row, v, mi / &ci);
        }
    }

    /// Phase 2.  Returns true when something changed.
    fn column_multipliers(&mut self) -> bool {
        let mut changed = false;
        let nvars = self.n_in + self.rows.len();
        for j in 0..nvars {
            let mut groups: Vec<(Coefficient, Vec<usize>)> = Vec::new();
            for (r, row) in self.rows.iter().enumerate() {
                if let Some(m) = row.get(&j) {
                    if nonunit(m) {
                        let a = m.abs();
                        match groups.iter_mut().find(|(g, _)| *g == a) {
                            Some((_, rs)) => rs.push(r),
                            None => groups.push((a, vec![r])),
                        }
                    }
                }
            }
            for (a, rs) in groups {
                if rs.len() < 2 {
                    continue;
                }
                let def = rs.iter().copied().find(|&r| self.rows[r].len() == 1);
                let (w, wc) = match def {
                    Some(d) => (self.var(d), self.rows[d][&j].clone()),
                    None => {
                        let mut row = Row::new();
                        row.insert(j, a.clone());
                        (self.push_row(row), a)
                    }
                };
                for &r in &rs {
                    if Some(r) == def {
                        continue;
                    }
                    let m = self.rows[r].remove(&j).expect("entry present");
                    Self::add_entry(&mut self.rows[r], w, m / &wc);
                }
                changed = true;
            }
        }
        changed
    }

    /// True when row `r` has an entry other than `skip` of magnitude `|q|`.
    fn row_has_magnitude(&self, r: usize, skip: usize, q: &Coefficient) -> bool {
        let aq = q.abs();
        self.rows[r].iter().any(|(&k, c)| k != skip && c.abs() == aq)
    }

    /// Phase 3.  Returns true when something changed.
    fn triangles(&mut self) -> bool {
        let mut changed = false;
        // Existing scaled copies `w = a·x_j`.
        let scalings: Vec<(usize, usize, Coefficient)> = self
            .rows
            .iter()
            .enumerate()
            .filter(|(_, row)| row.len() == 1)
            .filter_map(|(r, row)| {
                let (&j, a) = row.iter().next()?;
                nonunit(a).then(|| (r, j, a.clone()))
            })
            .collect();
        for (wr, j, a) in scalings {
            let w = self.var(wr);
            for r in 0..self.rows.len() {
                if r == wr {
                    continue;
                }
                let Some(m) = self.rows[r].get(&j) else { continue };
                if !nonunit(m) {
                    continue;
                }
                let q = m / &a;
                if q.is_unit() || self.row_has_magnitude(r, j, &q) {
                    self.rows[r].remove(&j);
                    Self::add_entry(&mut self.rows[r], w, q);
                    changed = true;
                }
            }
        }
        // New pivots: rows `i0` (≥ 2 entries) and `i` sharing variable `j`.
        let nrows = self.rows.len();
        for i0 in 0..nrows {
            if self.rows[i0].len() < 2 {
                continue;
            }
            let entries: Vec<(usize, Coefficient)> =
                self.rows[i0].iter().filter(|(_, c)| nonunit(c)).map(|(&j, c)| (j, c.clone())).collect();
            for (j, a) in entries {
                if self.rows[i0].get(&j) != Some(&a) {
                    continue;
                }
                let partner = (0..nrows).find(|&i| {
                    i != i0
                        && self.rows[i].get(&j).is_some_and(|y| {
                            let q = y / &a;
                            nonunit(y) && nonunit(&q) && self.row_has_magnitude(i, j, &q)
                        })
                });
                let Some(i) = partner else { continue };
                let aa = a.abs();
                let mut row = Row::new();
                row.insert(j, aa.clone());
                let w = self.push_row(row);
                for rr in [i0, i] {
                    let m = self.rows[rr].remove(&j).expect("entry present");
                    Self::add_entry(&mut self.rows[rr], w, m / &aa);
                }
                changed = true;
            }
        }
        changed
    }

    /// Phase 4.  Returns true when something changed.
    fn row_multipliers(&mut self) -> bool {
        let mut changed = false;
        for r in 0..self.rows.len() {
            loop {
                let mut groups: Vec<(Coefficient, Vec<usize>)> = Vec::new();
                for (&k, c) in &self.rows[r] {
                    if nonunit(c) {
                        let a = c.abs();
                        match groups.iter_mut().find(|(g, _)| *g == a) {
                            Some((_, ks)) => ks.push(k),
                            None => groups.push((a, vec![k])),
                        }
                    }
                }
                let Some((_, ks)) = groups.into_iter().find(|(_, ks)| ks.len() >= 2) else { break };
                let base = self.rows[r][&ks[0]].clone();
                let sum: Row = ks.iter().map(|k| (*k, &self.rows[r][k] / &base)).collect();
                for k in &ks {
                    self.rows[r].remove(k);
                }
                let w = self.push_row(sum);
                Self::add_entry(&mut self.rows[r], w, base);
                changed = true;
            }
        }
        changed
    }
}

/// Pairs `(i, j, m_j/m_i)` of a row, memoized by row content: rows
/// rarely change between phase-1 steps and branch runs, and the exact
/// divisions dominate the cost on large matrices.
type PairCache = HashMap<Row, Rc<Vec<(usize, usize, Coefficient)>>>;

fn row_pairs(row: &Row) -> Rc<Vec<(usize, usize, Coefficient)>> {
    let e: Vec<(&usize, &Coefficient)> = row.iter().collect();
    let mut out = Vec::with_capacity(e.len() * (e.len() - 1) / 2);
    for a in 0..e.len() {
        for b in a + 1..e.len() {
            out.push((*e[a].0, *e[b].0, e[b].1 / e[a].1));
        }
    }
    Rc::new(out)
}

#[derive(Clone, Debug)]
struct PairCand {
    i: usize,
    j: usize,
    ratio: Coefficient,
    rows: Vec<usize>,
}

/// One deterministic pipeline run; `choices[d]` selects among the tied
/// pairs at the `d`-th decision (0 beyond the prefix).  Returns the best
/// program seen and the number of options at every decision met.
fn run_pipeline(mut s: LinState, choices: &[usize], opts: &SlpOptions, cache: &mut PairCache) -> (Slp, Vec<usize>) {
    let mut decisions = Vec::new();
    let mut best = s.emit();
    for _ in 0..opts.max_rounds {
        let mut changed = false;
        loop {
            let top = s.best_pairs(cache);
            if top.is_empty() {
                break;
            }
            let d = decisions.len();
            decisions.push(top.len());
            let pick = choices.get(d).copied().unwrap_or(0).min(top.len() - 1);
            s.apply_pair(&top[pick]);
            changed = true;
        }
        if changed {
            consider(&mut best, s.emit());
        }
        for phase in [LinState::column_multipliers, LinState::triangles, LinState::row_multipliers] {
            if phase(&mut s) {
                changed = true;
                consider(&mut best, s.emit());
            }
        }
        if !changed {
            break;
        }
    }
    (best, decisions)
}

fn consider(best: &mut Slp, cand: Slp) {
    if cand.counts().key() < best.counts().key() {
        *best = cand;
    }
}

/// Runs the pipeline on `s`, exploring tie-breaks breadth-first within the
/// branch budget, and returns the cheapest program.
pub(crate) fn optimize_state(s: &LinState, opts: &SlpOptions) -> Slp {
    let mut best: Option<Slp> = None;
    let mut queue: VecDeque<Vec<usize>> = VecDeque::from([Vec::new()]);
    let mut runs = 0;
    let mut cache = PairCache::new();
    while let Some(prefix) = queue.pop_front() {
        if runs >= opts.branch_budget.max(1) {
            break;
        }
        runs += 1;
        let (slp, decisions) = run_pipeline(s.clone(), &prefix, opts, &mut cache);
        if best.as_ref().is_none_or(|b| slp.counts().key() < b.counts().key()) {
            best = Some(slp);
        }
        for (d, &n) in decisions.iter().enumerate().skip(prefix.len()) {
            for alt in 1..n {
                let mut p = prefix.clone();
                p.resize(d, 0);
                p.push(alt);
                queue.push_back(p);
            }
        }
    }
    best.expect("at least one run")
}

/// Row-by-row program: `nnz − (non-empty rows)` additions and one
/// multiplication per entry outside `{0, ±1}`.
pub fn naive_slp(m: &CoeffMatrix) -> Slp {
    let mut b = Builder::default();
    let loads: Vec<usize> = (0..m.cols()).map(|j| b.push(Instr::Load(j))).collect();
    let mut outs = Vec::with_capacity(m.rows());
    for i in 0..m.rows() {
        let terms: Vec<(Coefficient, usize)> =
            m.row(i).iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(j, c)| (c.clone(), loads[j])).collect();
        // Products are not shared across rows: the count stays row-local.
        b.clear_memo();
        outs.push(b.sum(&terms));
    }
    for (o, k) in outs.into_iter().enumerate() {
        b.push(Instr::Store(o, k));
    }
    b.finish(m.cols(), m.rows())
}

/// Common-subexpression elimination on `M` (the four phases of the module
/// documentation).  Never more additions or multiplications than
/// [`naive_slp`].
pub fn cancellation_free(m: &CoeffMatrix, opts: &SlpOptions) -> Slp {
    let s = optimize_state(&LinState::from_matrix(m), opts);
    let naive = naive_slp(m);
    let (c, n) = (s.counts(), naive.counts());
    if c.adds <= n.adds && c.mults <= n.mults {
        s
    } else {
        naive
    }
}
