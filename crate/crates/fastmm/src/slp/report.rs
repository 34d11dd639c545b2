//! Per-scheme operation-count reports.

use std::fmt;

use super::{best_of_with_strategy, naive_slp, OpCounts, Slp, SlpOptions};
use crate::error::Result;
use crate::hmrep::HMRep;

/// The pass that produced a program.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Row-by-row evaluation.
    Naive,
    /// Common-subexpression elimination on the matrix itself.
    Direct,
    /// Kernel decomposition of the matrix.
    Kernel,
    /// Transpose of the kernel decomposition of the transposed matrix.
    Transpose,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Naive => "naive",
            Strategy::Direct => "direct",
            Strategy::Kernel => "kernel",
            Strategy::Transpose => "transpose",
        })
    }
}

/// Counts for one of the three matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct OpCountRow {
    /// `L`, `R` or `P`.
    pub matrix: &'static str,
    /// Counts of the row-by-row program.
    pub naive: OpCounts,
    /// Counts of the best program found.
    pub best: OpCounts,
    /// Strategy of the best program.
    pub strategy: Strategy,
    /// The best program itself.
    pub slp: Slp,
}

/// Naive and optimized operation counts of the three linear maps of a
/// scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct OperationCountReport {
    /// Scheme name.
    pub scheme: String,
    /// Rows for `L`, `R`, `P` in that order.
    pub rows: Vec<OpCountRow>,
}

impl OperationCountReport {
    /// Sum of the naive counts.
    pub fn naive_total(&self) -> OpCounts {
        self.rows.iter().fold(OpCounts::default(), |a, r| a + r.naive)
    }

    /// Sum of the optimized counts.
    pub fn best_total(&self) -> OpCounts {
        self.rows.iter().fold(OpCounts::default(), |a, r| a + r.best)
    }

    /// The optimized programs for `L`, `R`, `P`.
    pub fn slps(&self) -> [&Slp; 3] {
        [&self.rows[0].slp, &self.rows[1].slp, &self.rows[2].slp]
    }

    /// CSV header used by [`OperationCountReport::to_csv`].
    pub const CSV_HEADER: &'static str =
        "scheme,matrix,naive_adds,naive_mults,naive_div2,best_adds,best_mults,best_div2,strategy";

    /// Machine-readable form: one line per matrix plus a `total` line.
    pub fn to_csv(&self, header: bool) -> String {
        let mut out = String::new();
        if header {
            out.push_str(Self::CSV_HEADER);
            out.push('\n');
        }
        let line = |m: &str, n: OpCounts, b: OpCounts, s: &str| {
            format!("{},{m},{},{},{},{},{},{},{s}\n", self.scheme, n.adds, n.mults, n.div2, b.adds, b.mults, b.div2)
        };
        for r in &self.rows {
            out.push_str(&line(r.matrix, r.naive, r.best, &r.strategy.to_string()));
        }
        out.push_str(&line("total", self.naive_total(), self.best_total(), "-"));
        out
    }
}

/// Optimizes the three matrices of an exact scheme.
///
/// # Errors
/// [`Error::NotExact`](crate::Error::NotExact) for float-backed schemes,
/// which must be snapped to exact coefficients first.
pub fn codegen_report(h: &HMRep, opts: &SlpOptions) -> Result<OperationCountReport> {
    let (l, r, p) = h.exact()?;
    let rows = [("L", l), ("R", r), ("P", p)]
        .into_iter()
        .map(|(name, m)| {
            let (slp, strategy) = best_of_with_strategy(m, opts);
            OpCountRow { matrix: name, naive: naive_slp(m).counts(), best: slp.counts(), strategy, slp }
        })
        .collect();
    Ok(OperationCountReport { scheme: h.name.clone(), rows })
}
