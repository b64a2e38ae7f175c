//! Fixtures shared by the benchmarks.

use sobolev_recon::expansion::extract_traces_poly;
use sobolev_recon::funcmodel::TraceBundle;
use sobolev_recon::{HyperRect, MultiIndex, PiecewisePoly};

/// Deterministic coefficients in `[-1, 1)`.
pub fn coefficients(n: usize) -> Vec<f64> {
    (0..n).map(|i| ((i * 7919) % 2003) as f64 / 1001.5 - 1.0).collect()
}

/// A piecewise polynomial on `[-1, 1]^dim` with `cells` uniform cells and
/// the given degree along every axis.
pub fn piecewise(dim: usize, degree: usize, cells: usize) -> PiecewisePoly {
    let breaks: Vec<Vec<f64>> = (0..dim)
        .map(|_| (1..cells).map(|j| -1.0 + 2.0 * j as f64 / cells as f64).collect())
        .collect();
    let degree = MultiIndex::splat(dim, degree);
    let n = degree.lattice_size() * cells.pow(dim as u32);
    PiecewisePoly::new(HyperRect::symmetric(dim), breaks, degree, coefficients(n)).expect("consistent sizes")
}

/// Order-`order` traces of a smooth single-cell polynomial.
pub fn bundle(dim: usize, order: usize) -> TraceBundle<PiecewisePoly> {
    let u = piecewise(dim, order + 2, 1);
    extract_traces_poly(&u, &MultiIndex::splat(dim, order)).expect("single cell is smooth")
}

/// Tensor Gauss grid nodes with `n` points per axis.
pub fn nodes(dim: usize, n: usize) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|_| (0..n).map(|j| -1.0 + 2.0 * (j as f64 + 0.5) / n as f64).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use sobolev_recon::expansion::reconstruct;

    #[test]
    fn fixtures_are_consistent() {
        assert_eq!(piecewise(2, 3, 4).ncells(), 16);
        let b = bundle(2, 2);
        assert_eq!(b.entries().len(), 9);
        assert!(reconstruct(&b).unwrap().rel_coeff_diff(&piecewise(2, 4, 1)).unwrap() < 1e-12);
        assert!(coefficients(100).iter().all(|c| (-1.0..1.0).contains(c)));
    }
}
