//! Line-oriented text form of an SLP.
//!
//! ```text
//! # slp inputs=2 outputs=2
//! t0 := x0
//! t1 := x1
//! t2 := t0 + t1
//! t3 := sqrt3*1/2 * t2
//! o0 := t2
//! o1 := t3
//! ```
//!
//! Values are numbered `t0, t1, …` in order; value lines are `xI` (input),
//! `0`, `tA + tB`, `tA - tB` or `<constant> * tA` with the constant in the
//! [`Coefficient`] text syntax (reduced fractions, `sqrt3*p/q`).  Output
//! lines `oJ := tI` follow.  Blank lines and other `#` lines are ignored.

use super::{Instr, Slp};
use crate::coeff::Coefficient;
use crate::error::{Error, Result};

impl Slp {
    /// Renders the program; stores are listed after all values.
    pub fn to_text(&self) -> String {
        let mut out = format!("# slp inputs={} outputs={}\n", self.n_in, self.n_out);
        let mut num = vec![usize::MAX; self.instrs.len()];
        let mut next = 0usize;
        let mut stores = vec![usize::MAX; self.n_out];
        for (k, ins) in self.instrs.iter().enumerate() {
            let expr = match ins {
                Instr::Load(i) => format!("x{i}"),
                Instr::Zero => "0".to_string(),
                Instr::Add(a, b) => format!("t{} + t{}", num[*a], num[*b]),
                Instr::Sub(a, b) => format!("t{} - t{}", num[*a], num[*b]),
                Instr::Mul(c, a) => format!("{c} * t{}", num[*a]),
                Instr::Store(o, a) => {
                    stores[*o] = num[*a];
                    continue;
                }
            };
            num[k] = next;
            out.push_str(&format!("t{next} := {expr}\n"));
            next += 1;
        }
        for (o, t) in stores.iter().enumerate() {
            out.push_str(&format!("o{o} := t{t}\n"));
        }
        out
    }

    /// Parses the format produced by [`Slp::to_text`].  Without a header
    /// the input and output counts are inferred from the largest indices.
    pub fn parse(text: &str) -> Result<Slp> {
        let err = |line: usize, msg: &str| Error::InvalidProgram(format!("line {}: {msg}", line + 1));
        let mut header: Option<(usize, usize)> = None;
        let mut values: Vec<Instr> = Vec::new();
        let mut stores: Vec<(usize, usize)> = Vec::new();
        let index = |s: &str, prefix: char| -> Option<usize> { s.trim().strip_prefix(prefix)?.parse().ok() };
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let mut it = rest.split_whitespace();
                if it.next() == Some("slp") {
                    let mut ins = None;
                    let mut outs = None;
                    for kv in it {
                        match kv.split_once('=') {
                            Some(("inputs", v)) => ins = v.parse().ok(),
                            Some(("outputs", v)) => outs = v.parse().ok(),
                            _ => {}
                        }
                    }
                    header = Some((ins.ok_or_else(|| err(ln, "bad inputs"))?, outs.ok_or_else(|| err(ln, "bad outputs"))?));
                }
                continue;
            }
            let (lhs, rhs) = line.split_once(":=").ok_or_else(|| err(ln, "expected ':='"))?;
            let (lhs, rhs) = (lhs.trim(), rhs.trim());
            if let Some(o) = index(lhs, 'o') {
                let t = index(rhs, 't').ok_or_else(|| err(ln, "output must be a value tI"))?;
                stores.push((o, t));
                continue;
            }
            let t = index(lhs, 't').ok_or_else(|| err(ln, "expected tI or oJ on the left"))?;
            if t != values.len() {
                return Err(err(ln, "values must be numbered consecutively from t0"));
            }
            let operand = |s: &str| -> Result<usize> {
                let a = index(s, 't').ok_or_else(|| err(ln, "expected operand tI"))?;
                if a >= t {
                    return Err(err(ln, "operand defined later"));
                }
                Ok(a)
            };
            let ins = if let Some(i) = index(rhs, 'x') {
                Instr::Load(i)
            } else if rhs == "0" {
                Instr::Zero
            } else if let Some((c, a)) = rhs.rsplit_once(" * ") {
                let c: Coefficient = c.trim().parse()?;
                Instr::Mul(c, operand(a)?)
            } else if let Some((a, b)) = rhs.split_once(" + ") {
                Instr::Add(operand(a)?, operand(b)?)
            } else if let Some((a, b)) = rhs.split_once(" - ") {
                Instr::Sub(operand(a)?, operand(b)?)
            } else {
                return Err(err(ln, "unrecognized expression"));
            };
            values.push(ins);
        }
        let (n_in, n_out) = header.unwrap_or_else(|| {
            let n_in = values.iter().filter_map(|v| if let Instr::Load(i) = v { Some(i + 1) } else { None }).max();
            (n_in.unwrap_or(0), stores.iter().map(|(o, _)| o + 1).max().unwrap_or(0))
        });
        let mut instrs = values;
        for (o, t) in stores {
            if t >= instrs.len() {
                return Err(Error::InvalidProgram(format!("output o{o} reads undefined t{t}")));
            }
            instrs.push(Instr::Store(o, t));
        }
        let s = Slp { n_in, n_out, instrs };
        s.validate()?;
        Ok(s)
    }
}
