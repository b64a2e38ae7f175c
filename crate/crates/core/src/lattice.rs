//! Multi-index lattices and hyperrectangle geometry.
//!
//! Orders, degrees and cell counts are all [`MultiIndex`] values. Lattices
//! `{alpha : 0 <= alpha <= delta}` are enumerated with the first axis varying
//! fastest, so `(2,1)` yields `(0,0),(1,0),(2,0),(0,1),(1,1),(2,1)`.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// An element of `N_0^N`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyIndex);
        }
        Ok(MultiIndex(entries))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "multi-index dimension must be positive");
        MultiIndex(vec![0; dim])
    }

    pub fn splat(dim: usize, value: usize) -> Self {
        assert!(dim >= 1, "multi-index dimension must be positive");
        MultiIndex(vec![value; dim])
    }

    /// The `axis`-th standard basis vector.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut m = Self::zeros(dim);
        m.0[axis] = 1;
        m
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.dim() == other.dim() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    pub fn norm1(&self) -> usize {
        self.0.iter().sum()
    }

    /// Number of lattice points below `self`, i.e. `prod(d_i + 1)`.
    pub fn lattice_size(&self) -> usize {
        self.0.iter().map(|d| d + 1).product()
    }

    /// Componentwise minimum.
    pub fn meet(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| *a.min(b)).collect())
    }

    /// Componentwise maximum.
    pub fn join(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - other`; requires `other <= self`.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        if !other.le(self) {
            return None;
        }
        Some(MultiIndex(
            self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
        ))
    }

    /// Position of `self` in `multiindex_range(bound)`.
    pub fn flat_index(&self, bound: &MultiIndex) -> usize {
        debug_assert!(self.le(bound));
        let mut idx = 0;
        let mut stride = 1;
        for (a, d) in self.0.iter().zip(&bound.0) {
            idx += a * stride;
            stride *= d + 1;
        }
        idx
    }

    pub fn with(&self, axis: usize, value: usize) -> MultiIndex {
        let mut m = self.clone();
        m.0[axis] = value;
        m
    }

    pub(crate) fn ensure_le(&self, bound: &MultiIndex) -> Result<()> {
        if self.dim() != bound.dim() {
            return Err(Error::DimensionMismatch {
                expected: bound.dim(),
                found: self.dim(),
            });
        }
        if !self.le(bound) {
            return Err(Error::NotDominated {
                alpha: self.to_string(),
                delta: bound.to_string(),
            });
        }
        Ok(())
    }
}

impl std::ops::Index<usize> for MultiIndex {
    type Output = usize;
    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self == other {
            Some(Ordering::Equal)
        } else if self.le(other) {
            Some(Ordering::Less)
        } else if other.le(self) {
            Some(Ordering::Greater)
        } else {
            None
        }
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl std::str::FromStr for MultiIndex {
    type Err = Error;

    /// Parses `3`, `3,3` or `(2,1)`.
    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        let entries = trimmed
            .split(',')
            .map(|t| {
                t.trim().parse::<usize>().map_err(|e| Error::Parse {
                    line: 0,
                    msg: format!("bad multi-index '{s}': {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        MultiIndex::new(entries)
    }
}

/// All `alpha` with `0 <= alpha <= delta`, first axis fastest.
pub fn multiindex_range(delta: &MultiIndex) -> Vec<MultiIndex> {
    let n = delta.dim();
    let mut out = Vec::with_capacity(delta.lattice_size());
    let mut cur = vec![0usize; n];
    loop {
        out.push(MultiIndex(cur.clone()));
        let mut axis = 0;
        loop {
            if axis == n {
                return out;
            }
            if cur[axis] < delta[axis] {
                cur[axis] += 1;
                break;
            }
            cur[axis] = 0;
            axis += 1;
        }
    }
}

/// Iterates over a dense tensor shape (first axis fastest), yielding the
/// multi-index of each flat position.
pub(crate) fn shape_iter(shape: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = shape.iter().product();
    let mut cur = vec![0usize; shape.len()];
    let mut first = true;
    (0..total).map(move |_| {
        if first {
            first = false;
        } else {
            for axis in 0..shape.len() {
                cur[axis] += 1;
                if cur[axis] < shape[axis] {
                    break;
                }
                cur[axis] = 0;
            }
        }
        cur.clone()
    })
}

/// Strides for a first-axis-fastest layout.
pub(crate) fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = Vec::with_capacity(shape.len());
    let mut acc = 1;
    for &n in shape {
        s.push(acc);
        acc *= n;
    }
    s
}

/// The hyperrectangle `prod [lo_i, hi_i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperRect {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl HyperRect {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() {
            return Err(Error::InvalidDomain("zero-dimensional box".into()));
        }
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        for (i, (a, b)) in lo.iter().zip(&hi).enumerate() {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::InvalidDomain(format!(
                    "axis {i}: need finite lo < hi, got [{a}, {b}]"
                )));
            }
        }
        Ok(HyperRect { lo, hi })
    }

    /// `[-1, 1]^dim`.
    pub fn symmetric(dim: usize) -> Self {
        HyperRect::new(vec![-1.0; dim], vec![1.0; dim]).expect("valid box")
    }

    /// `[0, 1]^dim`.
    pub fn unit(dim: usize) -> Self {
        HyperRect::new(vec![0.0; dim], vec![1.0; dim]).expect("valid box")
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.width(i)).product()
    }

    pub fn contains(&self, s: &[f64]) -> bool {
        s.len() == self.dim()
            && s
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (a, b))| *a <= *x && *x <= *b)
    }

    pub(crate) fn ensure_contains(&self, s: &[f64]) -> Result<()> {
        if s.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: s.len(),
            });
        }
        if !self.contains(s) {
            return Err(Error::OutsideDomain { point: s.to_vec() });
        }
        Ok(())
    }

    pub(crate) fn ensure_same(&self, other: &HyperRect) -> Result<()> {
        if self != other {
            return Err(Error::InvalidDomain(format!(
                "domains differ: {self:?} vs {other:?}"
            )));
        }
        Ok(())
    }
}

/// Selects the subdomain `Omega^beta`; `beta_i` is `-1` (pinned at the lower
/// endpoint), `0` (the open interval) or `+1` (pinned at the upper endpoint).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubdomainSpec {
    beta: Vec<i8>,
}

impl SubdomainSpec {
    pub fn new(beta: Vec<i8>) -> Result<Self> {
        if beta.is_empty() {
            return Err(Error::EmptyIndex);
        }
        if let Some(b) = beta.iter().find(|b| !(-1..=1).contains(*b)) {
            return Err(Error::InvalidDomain(format!(
                "subdomain selector entries must be -1, 0 or 1, got {b}"
            )));
        }
        Ok(SubdomainSpec { beta })
    }

    pub fn interior(dim: usize) -> Self {
        SubdomainSpec { beta: vec![0; dim] }
    }

    pub fn lower_corner(dim: usize) -> Self {
        SubdomainSpec { beta: vec![-1; dim] }
    }

    pub fn dim(&self) -> usize {
        self.beta.len()
    }

    pub fn beta(&self) -> &[i8] {
        &self.beta
    }

    pub fn is_active(&self, axis: usize) -> bool {
        self.beta[axis] == 0
    }

    pub fn active_axes(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.is_active(i)).collect()
    }

    pub fn num_active(&self) -> usize {
        self.beta.iter().filter(|b| **b == 0).count()
    }

    /// The face as a degenerate box: inactive axes collapse onto the pinned
    /// endpoint. Returned as `(lo, hi)` pairs rather than a [`HyperRect`].
    pub fn face_bounds(&self, domain: &HyperRect) -> Vec<(f64, f64)> {
        (0..self.dim())
            .map(|i| match self.beta[i] {
                0 => (domain.lo()[i], domain.hi()[i]),
                b if b < 0 => (domain.lo()[i], domain.lo()[i]),
                _ => (domain.hi()[i], domain.hi()[i]),
            })
            .collect()
    }

    /// Pins the inactive coordinates of `s` onto the face.
    pub fn pin(&self, domain: &HyperRect, s: &[f64]) -> Vec<f64> {
        s.iter()
            .enumerate()
            .map(|(i, &x)| match self.beta[i] {
                0 => x,
                b if b < 0 => domain.lo()[i],
                _ => domain.hi()[i],
            })
            .collect()
    }
}

impl fmt::Display for SubdomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, b) in self.beta.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, ")")
    }
}

/// `beta = alpha - delta` clipped to `{-1, 0}`: the lower face on which the
/// trace of `D^alpha u` lives.
pub fn face_spec(alpha: &MultiIndex, delta: &MultiIndex) -> Result<SubdomainSpec> {
    alpha.ensure_le(delta)?;
    Ok(SubdomainSpec {
        beta: alpha
            .iter()
            .zip(delta.iter())
            .map(|(a, d)| if a == d { 0 } else { -1 })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    #[test]
    fn range_2_1() {
        let r = multiindex_range(&mi(&[2, 1]));
        let expect: Vec<_> = [[0, 0], [1, 0], [2, 0], [0, 1], [1, 1], [2, 1]]
            .iter()
            .map(|v| mi(v))
            .collect();
        assert_eq!(r, expect);
    }

    #[test]
    fn range_identity_and_size() {
        assert_eq!(multiindex_range(&mi(&[0, 0, 0])), vec![mi(&[0, 0, 0])]);
        let d = mi(&[3, 3]);
        assert_eq!(multiindex_range(&d).len(), 16);
        assert_eq!(d.lattice_size(), 16);
    }

    #[test]
    fn flat_index_matches_enumeration() {
        let d = mi(&[2, 3, 1]);
        for (k, a) in multiindex_range(&d).iter().enumerate() {
            assert_eq!(a.flat_index(&d), k);
        }
    }

    #[test]
    fn face_specs() {
        let d = mi(&[2, 1]);
        assert_eq!(face_spec(&mi(&[2, 1]), &d).unwrap().beta(), &[0, 0]);
        assert_eq!(face_spec(&mi(&[0, 0]), &d).unwrap().beta(), &[-1, -1]);
        assert_eq!(face_spec(&mi(&[2, 0]), &d).unwrap().beta(), &[0, -1]);
        assert!(matches!(
            face_spec(&mi(&[3, 0]), &d),
            Err(Error::NotDominated { .. })
        ));
    }

    #[test]
    fn partial_order() {
        assert!(mi(&[1, 0]) < mi(&[1, 1]));
        assert_eq!(mi(&[1, 0]).partial_cmp(&mi(&[0, 1])), None);
        assert!(mi(&[1, 0]) <= mi(&[1, 0]));
    }

    #[test]
    fn parse_forms() {
        assert_eq!("(2,1)".parse::<MultiIndex>().unwrap(), mi(&[2, 1]));
        assert_eq!("5".parse::<MultiIndex>().unwrap(), mi(&[5]));
        assert!("".parse::<MultiIndex>().is_err());
    }

    #[test]
    fn rejects_bad_boxes() {
        assert!(HyperRect::new(vec![0.0], vec![0.0]).is_err());
        assert!(HyperRect::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(HyperRect::new(vec![], vec![]).is_err());
    }

    #[test]
    fn shape_iter_order() {
        let all: Vec<_> = shape_iter(&[2, 2]).collect();
        assert_eq!(all, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]]);
    }
}
