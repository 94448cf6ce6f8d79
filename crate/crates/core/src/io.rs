//! Plain-text network and instance files.
//!
//! Network: `P E`, then `E` lines `i j` (0-based, `i < j`), then optionally
//! `colors c_0 ... c_{P-1}`.
//!
//! Instance: `m n`, `m` lines of `n` values (`A`), one line of `m` values
//! (`b`), optionally one line of `n` values (reference solution).

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{Coloring, Graph};
use crate::linalg::DenseMatrix;
use crate::scalar::Real;

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
        }
    }

    /// Next non-blank line with its 1-based number.
    fn next(&mut self) -> Option<(usize, &'a str)> {
        self.inner
            .by_ref()
            .map(|(i, l)| (i + 1, l.trim()))
            .find(|(_, l)| !l.is_empty())
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.next().ok_or_else(|| Error::Parse {
            line: 0,
            msg: format!("unexpected end of file, expected {what}"),
        })
    }
}

fn fields<F: FromStr>(line: usize, text: &str, count: usize) -> Result<Vec<F>> {
    let vals = text
        .split_whitespace()
        .map(|t| {
            t.parse::<F>().map_err(|_| Error::Parse {
                line,
                msg: format!("cannot parse {t:?}"),
            })
        })
        .collect::<Result<Vec<F>>>()?;
    if vals.len() != count {
        return Err(Error::Parse {
            line,
            msg: format!("expected {count} values, found {}", vals.len()),
        });
    }
    Ok(vals)
}

fn reals<T: Real>(line: usize, text: &str, count: usize) -> Result<Vec<T>> {
    let vals: Vec<f64> = fields(line, text, count)?;
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parse {
            line,
            msg: "non-finite value".into(),
        });
    }
    Ok(vals.into_iter().map(T::lit).collect())
}

pub fn parse_network(text: &str) -> Result<(Graph, Option<Coloring>)> {
    let mut lines = Lines::new(text);
    let (ln, head) = lines.expect("header `P E`")?;
    let [p, e]: [usize; 2] = fields(ln, head, 2)?.try_into().expect("two fields");
    let mut edges = Vec::with_capacity(e);
    for _ in 0..e {
        let (ln, text) = lines.expect("edge line")?;
        let [i, j]: [usize; 2] = fields(ln, text, 2)?.try_into().expect("two fields");
        if i >= j || j >= p {
            return Err(Error::Parse {
                line: ln,
                msg: format!("edge ({i}, {j}) needs i < j < {p}"),
            });
        }
        edges.push((i, j));
    }
    let graph = Graph::from_edges(p, edges)?;
    if graph.edge_count() != e {
        return Err(Error::Parse {
            line: ln,
            msg: "duplicate edges".into(),
        });
    }
    let coloring = match lines.next() {
        None => None,
        Some((ln, text)) => {
            let rest = text.strip_prefix("colors").ok_or_else(|| Error::Parse {
                line: ln,
                msg: "expected `colors` line".into(),
            })?;
            let colors = fields(ln, rest, p)?;
            Some(Coloring::new(&graph, colors).map_err(|e| Error::Parse {
                line: ln,
                msg: e.to_string(),
            })?)
        }
    };
    if let Some((ln, _)) = lines.next() {
        return Err(Error::Parse {
            line: ln,
            msg: "trailing content".into(),
        });
    }
    Ok((graph, coloring))
}

pub fn format_network(graph: &Graph, coloring: Option<&Coloring>) -> String {
    let mut out = format!("{} {}\n", graph.node_count(), graph.edge_count());
    for &(i, j) in graph.edges() {
        let _ = writeln!(out, "{i} {j}");
    }
    if let Some(c) = coloring {
        out.push_str("colors");
        for col in c.colors() {
            let _ = write!(out, " {col}");
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceFile<T> {
    pub a: DenseMatrix<T>,
    pub b: Vec<T>,
    pub x_ref: Option<Vec<T>>,
}

pub fn parse_instance<T: Real>(text: &str) -> Result<InstanceFile<T>> {
    let mut lines = Lines::new(text);
    let (ln, head) = lines.expect("header `m n`")?;
    let [m, n]: [usize; 2] = fields(ln, head, 2)?.try_into().expect("two fields");
    if m == 0 || n == 0 {
        return Err(Error::Parse {
            line: ln,
            msg: "empty matrix".into(),
        });
    }
    let mut data = Vec::with_capacity(m * n);
    for _ in 0..m {
        let (ln, text) = lines.expect("matrix row")?;
        data.extend(reals::<T>(ln, text, n)?);
    }
    let (ln, text) = lines.expect("right-hand side")?;
    let b = reals(ln, text, m)?;
    let x_ref = match lines.next() {
        Some((ln, text)) => Some(reals(ln, text, n)?),
        None => None,
    };
    if let Some((ln, _)) = lines.next() {
        return Err(Error::Parse {
            line: ln,
            msg: "trailing content".into(),
        });
    }
    Ok(InstanceFile {
        a: DenseMatrix::new(m, n, data)?,
        b,
        x_ref,
    })
}

fn push_row<T: Real>(out: &mut String, vals: &[T]) {
    for (i, v) in vals.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        // shortest representation that round-trips
        let _ = write!(out, "{:?}", v.as_f64());
    }
    out.push('\n');
}

pub fn format_instance<T: Real>(a: &DenseMatrix<T>, b: &[T], x_ref: Option<&[T]>) -> String {
    let mut out = format!("{} {}\n", a.rows(), a.cols());
    for i in 0..a.rows() {
        push_row(&mut out, a.row(i));
    }
    push_row(&mut out, b);
    if let Some(x) = x_ref {
        push_row(&mut out, x);
    }
    out
}
