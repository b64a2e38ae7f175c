//! Gauss–Legendre nodes and weights on `[-1, 1]`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Nodes and weights.
pub type Rule = (Vec<f64>, Vec<f64>);

/// Nodes (ascending) and weights of the `n`-point rule, cached per `n`.
pub fn gauss_legendre(n: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&n) {
        return r.clone();
    }
    let rule = Arc::new(compute(n));
    cache.lock().unwrap().insert(n, rule.clone());
    rule
}

/// `(P_n(x), P_n'(x))`.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 1..n {
        let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn compute(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_point_rule() {
        let r = gauss_legendre(2);
        assert_relative_eq!(r.0[1], 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(r.1[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn exactness_and_weights() {
        for n in [3, 16, 64, 300] {
            let r = gauss_legendre(n);
            let total: f64 = r.1.iter().sum();
            assert_relative_eq!(total, 2.0, epsilon = 1e-13);
            assert!(r.0.windows(2).all(|w| w[0] < w[1]));
            let k = 2 * n - 2;
            let moment: f64 = r.0.iter().zip(r.1.iter()).map(|(x, w)| w * x.powi(k as i32)).sum();
            assert_relative_eq!(moment, 2.0 / (k as f64 + 1.0), epsilon = 1e-12);
        }
    }
}
