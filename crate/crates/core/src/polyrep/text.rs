//! Versioned plain-text serialization of [`PiecewisePoly`].
//!
//! ```text
//! piecewise-poly v1
//! dim 2
//! degree 2 1
//! knots 0 0x0p+0 0x1p+0
//! knots 1 0x0p+0 0x1p-1 0x1p+0
//! cell 0 0 : <coefficients, first axis fastest>
//! cell 0 1 : ...
//! end
//! ```
//!
//! Knots include both endpoints. Every real is a lossless hex float, so a
//! write/read cycle reproduces the value bit for bit.

use std::fmt::Write as _;

use super::{format_hex, parse_hex, PiecewisePoly};
use crate::error::{Error, Result};
use crate::lattice::{shape_iter, HyperRect, MultiIndex};

const HEADER: &str = "piecewise-poly v1";

pub fn to_text(p: &PiecewisePoly) -> String {
    let n = p.dim();
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    writeln!(out, "dim {n}").unwrap();
    let deg: Vec<String> = p.degree().iter().map(|d| d.to_string()).collect();
    writeln!(out, "degree {}", deg.join(" ")).unwrap();
    for axis in 0..n {
        let k: Vec<String> = p.knots(axis).iter().map(|x| format_hex(*x)).collect();
        writeln!(out, "knots {axis} {}", k.join(" ")).unwrap();
    }
    for cell in shape_iter(&p.cell_shape()) {
        let idx: Vec<String> = cell.iter().map(|c| c.to_string()).collect();
        let c: Vec<String> = p.cell_coeffs(&cell).iter().map(|x| format_hex(*x)).collect();
        writeln!(out, "cell {} : {}", idx.join(" "), c.join(" ")).unwrap();
    }
    writeln!(out, "end").unwrap();
    out
}

pub fn from_text(text: &str) -> Result<PiecewisePoly> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let err = |line: usize, msg: &str| Error::Parse {
        line,
        msg: msg.to_string(),
    };
    let hex = |line: usize, s: &str| {
        parse_hex(s).map_err(|_| err(line, &format!("bad number '{s}'")))
    };
    let mut next = |what: &str| lines.next().ok_or_else(|| err(0, &format!("missing {what}")));

    let (ln, l) = next("header")?;
    if l != HEADER {
        return Err(err(ln, "unsupported header"));
    }
    let (ln, l) = next("dim")?;
    let n: usize = l
        .strip_prefix("dim ")
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n| n >= 1)
        .ok_or_else(|| err(ln, "expected 'dim N'"))?;
    let (ln, l) = next("degree")?;
    let degree: Vec<usize> = l
        .strip_prefix("degree ")
        .ok_or_else(|| err(ln, "expected 'degree'"))?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| err(ln, "bad degree")))
        .collect::<Result<_>>()?;
    if degree.len() != n {
        return Err(err(ln, "degree length differs from dim"));
    }
    let degree = MultiIndex::new(degree)?;

    let mut knots = Vec::with_capacity(n);
    for axis in 0..n {
        let (ln, l) = next("knots")?;
        let mut toks = l.split_whitespace();
        if toks.next() != Some("knots") || toks.next() != Some(axis.to_string().as_str()) {
            return Err(err(ln, &format!("expected 'knots {axis}'")));
        }
        let k: Vec<f64> = toks.map(|t| hex(ln, t)).collect::<Result<_>>()?;
        if k.len() < 2 {
            return Err(err(ln, "an axis needs at least two knots"));
        }
        knots.push(k);
    }
    let lo = knots.iter().map(|k| k[0]).collect();
    let hi = knots.iter().map(|k| *k.last().unwrap()).collect();
    let domain = HyperRect::new(lo, hi)?;
    let breaks: Vec<Vec<f64>> = knots.iter().map(|k| k[1..k.len() - 1].to_vec()).collect();

    let cell_shape: Vec<usize> = knots.iter().map(|k| k.len() - 1).collect();
    let m = degree.lattice_size();
    let mut coeffs = Vec::new();
    for cell in shape_iter(&cell_shape) {
        let (ln, l) = next("cell")?;
        let (head, body) = l.split_once(':').ok_or_else(|| err(ln, "expected ':'"))?;
        let mut toks = head.split_whitespace();
        if toks.next() != Some("cell") {
            return Err(err(ln, "expected 'cell'"));
        }
        let idx: Vec<usize> = toks
            .map(|t| t.parse().map_err(|_| err(ln, "bad cell index")))
            .collect::<Result<_>>()?;
        if idx != cell {
            return Err(err(ln, "cells out of order"));
        }
        let c: Vec<f64> = body
            .split_whitespace()
            .map(|t| hex(ln, t))
            .collect::<Result<_>>()?;
        if c.len() != m {
            return Err(err(ln, &format!("expected {m} coefficients")));
        }
        coeffs.extend(c);
    }
    let (ln, l) = next("end")?;
    if l != "end" {
        return Err(err(ln, "expected 'end'"));
    }
    PiecewisePoly::new(domain, breaks, degree, coeffs)
}
