//! Dense first-axis-fastest tensors: fiber maps and contractions.

use crate::lattice::strides;

/// Applies `f` to every fiber along `axis`, producing a tensor whose extent
/// along `axis` becomes `new_len`. `f` receives the fiber position (with the
/// `axis` coordinate set to zero), the input fiber and a zeroed output fiber.
pub(crate) fn map_axis(
    data: &[f64],
    shape: &[usize],
    axis: usize,
    new_len: usize,
    mut f: impl FnMut(&[usize], &[f64], &mut [f64]),
) -> Vec<f64> {
    let n = shape[axis];
    let in_strides = strides(shape);
    let mut out_shape = shape.to_vec();
    out_shape[axis] = new_len;
    let out_strides = strides(&out_shape);
    let total_other: usize = shape
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != axis)
        .map(|(_, s)| *s)
        .product();
    let mut out = vec![0.0; out_shape.iter().product()];
    let mut fin = vec![0.0; n];
    let mut fout = vec![0.0; new_len];
    let other_axes: Vec<usize> = (0..shape.len()).filter(|&i| i != axis).collect();
    let mut pos = vec![0usize; other_axes.len()];
    let mut full = vec![0usize; shape.len()];
    for _ in 0..total_other {
        for (j, &a) in other_axes.iter().enumerate() {
            full[a] = pos[j];
        }
        let base_in: usize = other_axes
            .iter()
            .zip(&pos)
            .map(|(&a, &p)| p * in_strides[a])
            .sum();
        let base_out: usize = other_axes
            .iter()
            .zip(&pos)
            .map(|(&a, &p)| p * out_strides[a])
            .sum();
        for (k, v) in fin.iter_mut().enumerate() {
            *v = data[base_in + k * in_strides[axis]];
        }
        fout.iter_mut().for_each(|v| *v = 0.0);
        f(&full, &fin, &mut fout);
        for (k, v) in fout.iter().enumerate() {
            out[base_out + k * out_strides[axis]] = *v;
        }
        for (j, &a) in other_axes.iter().enumerate() {
            pos[j] += 1;
            if pos[j] < shape[a] {
                break;
            }
            pos[j] = 0;
        }
    }
    out
}

/// Contracts `axis` against a row-major `rows x shape[axis]` matrix.
pub(crate) fn contract_axis(
    data: &[f64],
    shape: &[usize],
    axis: usize,
    mat: &[f64],
    rows: usize,
) -> Vec<f64> {
    let n = shape[axis];
    debug_assert_eq!(mat.len(), rows * n);
    map_axis(data, shape, axis, rows, |_, fin, fout| {
        for (r, o) in fout.iter_mut().enumerate() {
            let row = &mat[r * n..(r + 1) * n];
            *o = row.iter().zip(fin).map(|(a, b)| a * b).sum();
        }
    })
}

/// `sum_k c[k] prod_i w_i[k_i]` for a dense first-axis-fastest tensor.
pub(crate) fn tensor_dot(c: &[f64], shape: &[usize], w: &[Vec<f64>]) -> f64 {
    // Contract the last axis first so each step is a contiguous block.
    let n = shape.len();
    let mut buf: Vec<f64> = c.to_vec();
    let mut len = buf.len();
    for axis in (0..n).rev() {
        let block = len / shape[axis];
        let wa = &w[axis];
        let mut next = vec![0.0; block];
        for k in 0..shape[axis] {
            let wk = wa[k];
            if wk == 0.0 {
                continue;
            }
            let src = &buf[k * block..(k + 1) * block];
            for (o, s) in next.iter_mut().zip(src) {
                *o += wk * s;
            }
        }
        buf = next;
        len = block;
    }
    buf[0]
}

/// Pairwise summation in a fixed order, independent of thread count.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if v.len() <= LEAF {
        v.iter().sum()
    } else {
        let mid = v.len() / 2;
        pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contract_matches_manual() {
        // 2x3 tensor, first axis fastest: t[i,j] = data[i + 2j]
        let data = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let mat = [1.0, 1.0, 1.0]; // sum over axis 1
        let out = contract_axis(&data, &[2, 3], 1, &mat, 1);
        assert_eq!(out, vec![1.0 + 3.0 + 5.0, 2.0 + 4.0 + 6.0]);
        let out0 = contract_axis(&data, &[2, 3], 0, &[1.0, -1.0], 1);
        assert_eq!(out0, vec![-1.0, -1.0, -1.0]);
    }

    #[test]
    fn pairwise_is_exact_on_integers() {
        let v: Vec<f64> = (1..=1000).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&v), 500500.0);
    }
}
