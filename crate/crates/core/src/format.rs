//! Plain-text documents used for matrices, measurements, results and reports.
//!
//! ```text
//! # comment
//! kind = matrix
//! n = 8
//! inner_points = -1.0000000000000000e0 -7.1428571428571430e-1 ...
//! [H 4 8]
//! <row 0: 8 numbers>
//! ...
//! ```
//!
//! Scalars and lists are `key = value` lines (lists space separated, possibly
//! empty); matrices are `[name rows cols]` headers followed by one line per
//! row. Floats are written with 17 significant digits, which round-trips
//! every finite `f64` exactly.

use std::fmt::Display;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_float(token: &str, line: usize) -> Result<f64> {
    let x: f64 = token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("`{token}` is not a number"),
    })?;
    if !x.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite entry `{token}`"),
        });
    }
    Ok(x)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Document {
    comments: Vec<String>,
    entries: Vec<(String, String)>,
    blocks: Vec<(String, DMatrix<f64>)>,
}

impl Document {
    pub fn new(kind: &str) -> Self {
        let mut doc = Self::default();
        doc.set("kind", kind);
        doc
    }

    pub fn comment(&mut self, text: impl Into<String>) {
        self.comments.push(text.into());
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn set_floats(&mut self, key: &str, values: &[f64]) {
        let joined: Vec<String> = values.iter().map(|&x| format_float(x)).collect();
        self.set(key, joined.join(" "));
    }

    pub fn set_indices(&mut self, key: &str, values: &[usize]) {
        let joined: Vec<String> = values.iter().map(|x| x.to_string()).collect();
        self.set(key, joined.join(" "));
    }

    pub fn add_block(&mut self, name: &str, m: &DMatrix<f64>) {
        self.blocks.retain(|(n, _)| n != name);
        self.blocks.push((name.to_string(), m.clone()));
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("missing key `{key}`"),
        })
    }

    pub fn kind(&self) -> Option<&str> {
        self.get("kind")
    }

    pub fn expect_kind(&self, kind: &str) -> Result<()> {
        match self.kind() {
            Some(k) if k == kind => Ok(()),
            other => Err(Error::Parse {
                line: 0,
                message: format!("expected a `{kind}` document, found {other:?}"),
            }),
        }
    }

    pub fn value<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.require(key)?;
        raw.parse().map_err(|_| Error::Parse {
            line: 0,
            message: format!("bad value `{raw}` for `{key}`"),
        })
    }

    pub fn floats(&self, key: &str) -> Result<Vec<f64>> {
        self.require(key)?
            .split_whitespace()
            .map(|tok| parse_float(tok, 0))
            .collect()
    }

    pub fn indices(&self, key: &str) -> Result<Vec<usize>> {
        self.require(key)?
            .split_whitespace()
            .map(|tok| {
                tok.parse().map_err(|_| Error::Parse {
                    line: 0,
                    message: format!("bad index `{tok}` for `{key}`"),
                })
            })
            .collect()
    }

    pub fn block(&self, name: &str) -> Result<&DMatrix<f64>> {
        self.blocks
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m)
            .ok_or_else(|| Error::Parse {
                line: 0,
                message: format!("missing matrix block `{name}`"),
            })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        for (k, v) in &self.entries {
            if v.is_empty() {
                out.push_str(&format!("{k} =\n"));
            } else {
                out.push_str(&format!("{k} = {v}\n"));
            }
        }
        for (name, m) in &self.blocks {
            out.push_str(&format!("[{name} {} {}]\n", m.nrows(), m.ncols()));
            for row in m.row_iter() {
                let cells: Vec<String> = row.iter().map(|&x| format_float(x)).collect();
                out.push_str(&cells.join(" "));
                out.push('\n');
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = Self::default();
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        while let Some((line_no, line)) = lines.next() {
            if line.is_empty() {
                continue;
            }
            if let Some(c) = line.strip_prefix('#') {
                doc.comments.push(c.trim().to_string());
                continue;
            }
            if let Some(header) = line.strip_prefix('[') {
                let header = header.strip_suffix(']').ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: "unterminated block header".into(),
                })?;
                let parts: Vec<&str> = header.split_whitespace().collect();
                let bad = || Error::Parse {
                    line: line_no,
                    message: format!("block header `[{header}]` needs `name rows cols`"),
                };
                if parts.len() != 3 {
                    return Err(bad());
                }
                let rows: usize = parts[1].parse().map_err(|_| bad())?;
                let cols: usize = parts[2].parse().map_err(|_| bad())?;
                let mut data = Vec::with_capacity(rows * cols);
                for _ in 0..rows {
                    let (row_no, row) = lines.next().ok_or_else(|| Error::Parse {
                        line: line_no,
                        message: format!("block `{}` ends early", parts[0]),
                    })?;
                    let cells = row
                        .split_whitespace()
                        .map(|tok| parse_float(tok, row_no))
                        .collect::<Result<Vec<f64>>>()?;
                    if cells.len() != cols {
                        return Err(Error::Parse {
                            line: row_no,
                            message: format!("expected {cols} entries, found {}", cells.len()),
                        });
                    }
                    data.extend(cells);
                }
                doc.blocks
                    .push((parts[0].to_string(), DMatrix::from_row_slice(rows, cols, &data)));
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            doc.set(key.trim(), value.trim());
        }
        Ok(doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_rejects_malformed_input() {
        assert!(Document::parse("just words").is_err());
        assert!(Document::parse("[H 2 2]\n1 2\n").is_err());
        assert!(Document::parse("[H 1 2]\n1 nan\n").is_err());
        assert!(Document::parse("[H 1 2]\n1 2 3\n").is_err());
        assert!(Document::parse("[H 1]\n").is_err());
    }

    #[test]
    fn empty_lists_survive() {
        let mut doc = Document::new("result");
        doc.set_indices("support", &[]);
        let back = Document::parse(&doc.render()).unwrap();
        assert_eq!(back.indices("support").unwrap(), Vec::<usize>::new());
        assert_eq!(back.kind(), Some("result"));
    }

    proptest! {
        #[test]
        fn floats_and_blocks_round_trip_bit_exactly(
            values in proptest::collection::vec(
                prop_oneof![any::<f64>().prop_filter("finite", |x| x.is_finite()), -1e3f64..1e3],
                1..24,
            ),
        ) {
            let mut doc = Document::new("test");
            doc.comment("round trip");
            doc.set_floats("v", &values);
            let m = DMatrix::from_row_slice(1, values.len(), &values);
            doc.add_block("M", &m);
            let back = Document::parse(&doc.render()).unwrap();
            let parsed = back.floats("v").unwrap();
            prop_assert_eq!(parsed.len(), values.len());
            for (a, b) in parsed.iter().zip(&values) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            prop_assert_eq!(back.block("M").unwrap(), &m);
        }
    }
}
