//! Reader and writer for the SMS sparse-matrix text format.
//!
//! Dialect (bit-exact):
//!
//! ```text
//! <rows> <cols> M
//! <i> <j> <v>        # 1-based indices, v an integer or fraction p/q
//! ...
//! 0 0 0
//! ```
//!
//! Lines starting with `#` are comments, blank lines are ignored and CRLF
//! line endings are accepted.  Entries that are not listed are zero.  The
//! exact dialect is rational-only; [`write_sms`] refuses surd entries unless
//! decimal export is requested, in which case values are printed as
//! shortest round-trip doubles and must be read back with
//! [`parse_sms_f64`].

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::coeff::Coefficient;
use crate::error::{Error, Result, SmsErrorKind};
use crate::matrix::{CoeffMatrix, Matrix};

/// One meaningful line of an SMS text with its 1-based line number.
struct Line<'a> {
    no: usize,
    text: &'a str,
}

fn meaningful_lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.lines().enumerate().filter_map(|(k, raw)| {
        let t = raw.trim_end_matches('\r').trim();
        if t.is_empty() || t.starts_with('#') {
            None
        } else {
            Some(Line { no: k + 1, text: t })
        }
    })
}

fn sms_err(line: usize, kind: SmsErrorKind) -> Error {
    Error::Sms { line, kind }
}

/// Parses the header and entry triples; the value field is handed to `value`.
fn parse_generic<T>(
    text: &str,
    mut value: impl FnMut(&str) -> Option<T>,
) -> Result<(usize, usize, Vec<(usize, usize, T)>)> {
    let mut lines = meaningful_lines(text);
    let header = lines.next().ok_or_else(|| sms_err(1, SmsErrorKind::MalformedHeader(String::new())))?;
    let fields: Vec<&str> = header.text.split_whitespace().collect();
    let bad_header = || sms_err(header.no, SmsErrorKind::MalformedHeader(header.text.to_string()));
    if fields.len() != 3 || fields[2] != "M" {
        return Err(bad_header());
    }
    let rows: usize = fields[0].parse().map_err(|_| bad_header())?;
    let cols: usize = fields[1].parse().map_err(|_| bad_header())?;
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for line in lines {
        let f: Vec<&str> = line.text.split_whitespace().collect();
        if f.len() != 3 {
            return Err(sms_err(line.no, SmsErrorKind::MalformedEntry(line.text.to_string())));
        }
        let bad_entry = || sms_err(line.no, SmsErrorKind::MalformedEntry(line.text.to_string()));
        let i: usize = f[0].parse().map_err(|_| bad_entry())?;
        let j: usize = f[1].parse().map_err(|_| bad_entry())?;
        if i == 0 && j == 0 && f[2] == "0" {
            return Ok((rows, cols, entries));
        }
        if i == 0 || j == 0 || i > rows || j > cols {
            return Err(sms_err(line.no, SmsErrorKind::IndexOutOfRange { i, j }));
        }
        if !seen.insert((i, j)) {
            return Err(sms_err(line.no, SmsErrorKind::DuplicateEntry { i, j }));
        }
        let v = value(f[2]).ok_or_else(|| sms_err(line.no, SmsErrorKind::BadValue(f[2].to_string())))?;
        entries.push((i - 1, j - 1, v));
    }
    Err(sms_err(text.lines().count().max(1), SmsErrorKind::MissingTerminator))
}

/// Parses an exact SMS matrix (integers and `p/q` fractions only).
pub fn parse_sms(text: &str) -> Result<CoeffMatrix> {
    let (rows, cols, entries) = parse_generic(text, parse_rational_literal)?;
    let mut m = CoeffMatrix::zeros(rows, cols);
    for (i, j, v) in entries {
        m[(i, j)] = Coefficient::rational(v);
    }
    Ok(m)
}

/// Parses an SMS matrix whose values may also be decimal floats.
pub fn parse_sms_f64(text: &str) -> Result<Matrix> {
    let (rows, cols, entries) = parse_generic(text, |s| {
        parse_rational_literal(s)
            .map(|r| Coefficient::rational(r).to_f64())
            .or_else(|| s.parse::<f64>().ok().filter(|x| x.is_finite()))
    })?;
    let mut m = Matrix::zeros(rows, cols);
    for (i, j, v) in entries {
        m[(i, j)] = v;
    }
    Ok(m)
}

/// `-?digits(/digits)?` with a non-zero denominator.
fn parse_rational_literal(s: &str) -> Option<BigRational> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let (p, q) = body.split_once('/').unwrap_or((body, "1"));
    let digits = |x: &str| !x.is_empty() && x.bytes().all(|c| c.is_ascii_digit());
    if !digits(p) || !digits(q) {
        return None;
    }
    let p: BigInt = p.parse().ok()?;
    let q: BigInt = q.parse().ok()?;
    if q.is_zero() {
        return None;
    }
    let r = BigRational::new(p, q);
    Some(if neg { -r } else { r })
}

/// Writes `m` in the exact dialect (no trailing newline).
///
/// With `decimal_export == false` any irrational entry is an error; with
/// `decimal_export == true` irrational entries are written as shortest
/// round-trip decimals (rational entries stay exact).
pub fn write_sms(m: &CoeffMatrix, decimal_export: bool) -> Result<String> {
    let mut out = format!("{} {} M\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let c = &m[(i, j)];
            if c.is_zero() {
                continue;
            }
            let v = if c.is_rational() {
                c.to_string()
            } else if decimal_export {
                format!("{:?}", c.to_f64())
            } else {
                return Err(Error::SurdEntry(c.to_string()));
            };
            out.push_str(&format!("{} {} {}\n", i + 1, j + 1, v));
        }
    }
    out.push_str("0 0 0");
    Ok(out)
}

/// Writes a float matrix with shortest round-trip decimals.
pub fn write_sms_f64(m: &Matrix) -> String {
    let mut out = format!("{} {} M\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let v = m[(i, j)];
            if v != 0.0 {
                out.push_str(&format!("{} {} {:?}\n", i + 1, j + 1, v));
            }
        }
    }
    out.push_str("0 0 0");
    out
}
