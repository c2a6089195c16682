//! Plain-text matrix and channel files.
//!
//! Matrix file: a `rows cols` line, then `rows·cols` complex entries in
//! row-major order, each written as a `re im` pair. Whitespace and line
//! breaks between numbers are free-form. Lines starting with `#` are
//! comments.
//!
//! ```text
//! # density-matrix dim=2
//! 2 2
//! 0.5 0   0.5 0
//! 0.5 0   0.5 0
//! ```
//!
//! Channel file: a `kraus <count> <dim>` line followed by `count` blocks of
//! `dim·dim` entries, one block per Kraus operator.

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::state::DensityMatrix;

/// Upper bound on the number of complex entries any file may declare.
pub const MAX_ENTRIES: usize = 1 << 20;

struct Tokens<'a> {
    inner: Box<dyn Iterator<Item = (usize, &'a str)> + 'a>,
    line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let inner = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim_start().starts_with('#'))
            .flat_map(|(n, l)| l.split_whitespace().map(move |t| (n + 1, t)));
        Self {
            inner: Box::new(inner),
            line: 0,
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            message: message.into(),
        }
    }

    fn next(&mut self, what: &str) -> Result<&'a str> {
        match self.inner.next() {
            Some((line, tok)) => {
                self.line = line;
                Ok(tok)
            }
            None => Err(self.err(format!("unexpected end of input, expected {what}"))),
        }
    }

    fn usize(&mut self, what: &str) -> Result<usize> {
        let tok = self.next(what)?;
        tok.parse()
            .map_err(|_| self.err(format!("expected {what}, found {tok:?}")))
    }

    fn real(&mut self) -> Result<f64> {
        let tok = self.next("a number")?;
        let x: f64 = tok
            .parse()
            .map_err(|_| self.err(format!("expected a number, found {tok:?}")))?;
        if !x.is_finite() {
            return Err(self.err(format!("non-finite value {tok:?}")));
        }
        Ok(x)
    }

    fn keyword(&mut self, word: &str) -> Result<()> {
        let tok = self.next(word)?;
        if tok != word {
            return Err(self.err(format!("expected {word:?}, found {tok:?}")));
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<()> {
        match self.inner.next() {
            None => Ok(()),
            Some((line, tok)) => {
                self.line = line;
                Err(self.err(format!("trailing data {tok:?}")))
            }
        }
    }

    fn entries(&mut self, rows: usize, cols: usize) -> Result<ComplexMatrix> {
        let count = checked_count(rows, cols, 1).map_err(|e| self.err(e))?;
        let mut data = Vec::new();
        for _ in 0..count {
            let re = self.real()?;
            let im = self.real()?;
            data.push(C64::new(re, im));
        }
        ComplexMatrix::new(rows, cols, data).map_err(|e| self.err(e.to_string()))
    }
}

fn checked_count(rows: usize, cols: usize, blocks: usize) -> std::result::Result<usize, String> {
    if rows == 0 || cols == 0 {
        return Err("dimensions must be positive".into());
    }
    rows.checked_mul(cols)
        .and_then(|n| n.checked_mul(blocks))
        .filter(|&n| n <= MAX_ENTRIES)
        .ok_or_else(|| format!("declared size exceeds {MAX_ENTRIES} entries"))
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let mut t = Tokens::new(text);
    let rows = t.usize("row count")?;
    let cols = t.usize("column count")?;
    let m = t.entries(rows, cols)?;
    t.finish()?;
    Ok(m)
}

/// Parses a matrix file and validates it as a density matrix.
pub fn parse_density(text: &str) -> Result<DensityMatrix> {
    DensityMatrix::new(parse_matrix(text)?)
}

/// The Kraus operators of a channel file, without checking completeness.
pub fn parse_kraus_ops(text: &str) -> Result<Vec<ComplexMatrix>> {
    let mut t = Tokens::new(text);
    t.keyword("kraus")?;
    let count = t.usize("operator count")?;
    let dim = t.usize("dimension")?;
    checked_count(dim, dim, count).map_err(|e| t.err(e))?;
    let mut ops = Vec::new();
    for _ in 0..count {
        ops.push(t.entries(dim, dim)?);
    }
    t.finish()?;
    Ok(ops)
}

/// Parses a channel file into a validated (trace-preserving) channel.
pub fn parse_channel(text: &str) -> Result<KrausChannel> {
    KrausChannel::new(parse_kraus_ops(text)?)
}

fn write_entries(out: &mut String, m: &ComplexMatrix) {
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols())
            .map(|j| format!("{:e} {:e}", m[(i, j)].re, m[(i, j)].im))
            .collect();
        out.push_str(&row.join("  "));
        out.push('\n');
    }
}

/// Round-trips exactly through [`parse_matrix`].
pub fn write_matrix(m: &ComplexMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    write_entries(&mut out, m);
    out
}

pub fn write_density(rho: &DensityMatrix) -> String {
    format!(
        "# density-matrix dim={}\n{}",
        rho.dim(),
        write_matrix(rho.matrix())
    )
}

pub fn write_channel(ch: &KrausChannel) -> String {
    let mut out = format!("kraus {} {}\n", ch.len(), ch.dim());
    for k in ch.ops() {
        write_entries(&mut out, k);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::dephasing_channel;
    use crate::random::{ginibre, random_density, rng_for};

    #[test]
    fn parses_commented_density() {
        let text = "# density-matrix dim=2\n2 2\n0.5 0 0.5 0\n# mid comment\n0.5 0 5e-1 0\n";
        let rho = parse_density(text).unwrap();
        assert_eq!(rho.dim(), 2);
        assert_eq!(rho.matrix()[(1, 1)], C64::new(0.5, 0.0));
    }

    #[test]
    fn roundtrip_is_exact() {
        let mut rng = rng_for(5, 0);
        let m = ginibre(&mut rng, 3, 4);
        assert_eq!(parse_matrix(&write_matrix(&m)).unwrap(), m);
        let rho = DensityMatrix::new(random_density(&mut rng, 3)).unwrap();
        assert_eq!(parse_density(&write_density(&rho)).unwrap(), rho);
        let ch = dephasing_channel(C64::new(0.3, 0.4)).unwrap();
        assert_eq!(parse_channel(&write_channel(&ch)).unwrap().ops(), ch.ops());
    }

    #[test]
    fn rejects_malformed_input() {
        let cases = [
            "",
            "2",
            "2 2\n1 0 0 0 0 0",
            "2 2\n1 0 0 0 0 0 1 0 extra",
            "0 3",
            "2 2\n1 0 0 0 0 0 nan 0",
            "2 2\n1 0 0 0 0 0 inf 0",
            "-1 2",
            "99999999999 99999999999\n1 0",
            "18446744073709551615 2\n",
            "2 2\n1 0 x 0 0 0 1 0",
        ];
        for text in cases {
            assert!(
                matches!(parse_matrix(text), Err(Error::Parse { .. })),
                "{text:?}"
            );
        }
        assert!(parse_kraus_ops("kraus 1000000 1000\n").is_err());
        assert!(parse_kraus_ops("kruas 1 1\n1 0").is_err());
        assert!(parse_density("2 2\n1 0 0 0 0 0 1 0").is_err());
        assert!(parse_channel("kraus 1 2\n1 0 0 0 0 0 0 0").is_err());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match parse_matrix("# c\n2 2\n1 0 0 0\n0 0 oops 0") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }
}
