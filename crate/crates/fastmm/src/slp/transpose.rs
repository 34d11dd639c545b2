//! Tellegen transposition of linear straight-line programs.
//!
//! Reversing the computation graph turns every fan-out into an addition
//! and every addition into a fan-out: the program for `Mᵀ` accumulates, for
//! each original value, the adjoints of all its uses.  Multiplications are
//! kept (one per original multiplication), so for a program whose inputs
//! are all read, whose outputs are all distinct stores and which has no
//! dead code or `Zero`,
//!
//! ```text
//! adds(sᵀ) = adds(s) + n_out(s) − n_in(s)
//! ```
//!
//! An unused input becomes an identically-zero output of the transpose.

use super::{Builder, Instr, Slp};
use crate::coeff::Coefficient;
use crate::error::Result;

/// The transposed program: computes `Mᵀ·y` when `s` computes `M·x`.
///
/// # Errors
/// [`Error::InvalidProgram`](crate::Error::InvalidProgram) when `s` does not
/// validate.
pub fn transpose_slp(s: &Slp) -> Result<Slp> {
    s.validate()?;
    let mut b = Builder::default();
    let loads: Vec<usize> = (0..s.n_out).map(|o| b.push(Instr::Load(o))).collect();
    let mut adj: Vec<Vec<(Coefficient, usize)>> = vec![Vec::new(); s.instrs.len()];
    let mut outputs: Vec<Option<usize>> = vec![None; s.n_in];
    for (k, ins) in s.instrs.iter().enumerate().rev() {
        if let Instr::Store(o, a) = ins {
            adj[*a].push((Coefficient::one(), loads[*o]));
            continue;
        }
        let terms = std::mem::take(&mut adj[k]);
        if terms.is_empty() {
            continue;
        }
        let v = b.sum(&terms);
        match ins {
            Instr::Load(i) => {
                // Several loads of the same input accumulate.
                outputs[*i] = Some(match outputs[*i] {
                    Some(prev) => b.push(Instr::Add(prev, v)),
                    None => v,
                });
            }
            Instr::Zero => {}
            Instr::Add(x, y) => {
                adj[*x].push((Coefficient::one(), v));
                adj[*y].push((Coefficient::one(), v));
            }
            Instr::Sub(x, y) => {
                adj[*x].push((Coefficient::one(), v));
                adj[*y].push((-Coefficient::one(), v));
            }
            Instr::Mul(c, x) => adj[*x].push((c.clone(), v)),
            Instr::Store(..) => unreachable!("handled above"),
        }
    }
    let outs: Vec<usize> = outputs.into_iter().map(|o| o.unwrap_or_else(|| b.push(Instr::Zero))).collect();
    for (i, v) in outs.into_iter().enumerate() {
        b.push(Instr::Store(i, v));
    }
    Ok(b.finish(s.n_out, s.n_in))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::CoeffMatrix;
    use crate::schemes::{load_scheme, SchemeId};
    use crate::slp::{check_equivalence, kernel_decompose, naive_slp, SlpOptions};

    #[test]
    fn identity_transposes_to_identity() {
        let t = transpose_slp(&naive_slp(&CoeffMatrix::identity(4))).unwrap();
        assert_eq!(t.counts().adds, 0);
        assert!(t.realizes(&CoeffMatrix::identity(4)));
    }

    #[test]
    fn sum_becomes_fan_out() {
        let m = CoeffMatrix::from_ints(&[&[1, 1, -1]]);
        let s = naive_slp(&m);
        let t = transpose_slp(&s).unwrap();
        assert!(check_equivalence(&t, &m.transpose(), 10, 1));
        assert_eq!(t.counts().adds, 0);
        assert_eq!(t.counts().adds as isize - s.counts().adds as isize, s.n_out as isize - s.n_in as isize);
    }

    #[test]
    fn count_identity_and_involution_on_scheme_matrices() {
        let opts = SlpOptions::default();
        for id in [SchemeId::Strassen, SchemeId::Winograd, SchemeId::AccurateSqrt3, SchemeId::Powers] {
            let h = load_scheme(&id).unwrap();
            let (l, r, p) = h.exact().unwrap();
            for m in [l, r, p] {
                let s = kernel_decompose(m, &opts);
                let t = transpose_slp(&s).unwrap();
                assert!(check_equivalence(&t, &m.transpose(), 30, 2), "{id}");
                let delta = t.counts().adds as isize - s.counts().adds as isize;
                assert_eq!(delta, s.n_out as isize - s.n_in as isize, "{id}");
                assert_eq!(t.counts().mults, s.counts().mults);
                let tt = transpose_slp(&t).unwrap();
                assert_eq!(tt.counts(), s.counts(), "{id}");
                assert!(check_equivalence(&tt, m, 30, 3), "{id}");
            }
        }
    }

    #[test]
    fn zero_column_gives_zero_output() {
        let m = CoeffMatrix::from_ints(&[&[1, 0], &[1, 0]]);
        let t = transpose_slp(&naive_slp(&m)).unwrap();
        assert!(check_equivalence(&t, &m.transpose(), 10, 4));
    }
}
