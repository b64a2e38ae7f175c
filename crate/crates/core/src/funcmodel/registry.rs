//! Built-in target functions, addressable by name.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AnalyticFunction, Breakpoint, Evaluator};
use crate::error::{Error, Result};
use crate::lattice::{multiindex_range, HyperRect, MultiIndex};
use crate::polyrep::PiecewisePoly;

pub const EXAMPLE_NAMES: [&str; 4] = ["example1-1d", "example2-2d", "poly-random", "x2y-2d"];

/// Looks up a registered example; `seed` only affects `poly-random`.
pub fn lookup(name: &str, seed: u64) -> Result<AnalyticFunction> {
    match name {
        "example1-1d" => Ok(example1()),
        "example2-2d" => Ok(example2()),
        "x2y-2d" => Ok(x2y()),
        "poly-random" => Ok(poly_random(
            &HyperRect::symmetric(2),
            &MultiIndex::splat(2, 2),
            seed,
        )),
        _ => Err(Error::UnknownExample(name.to_string())),
    }
}

fn sign(s: f64) -> f64 {
    if s > 0.0 {
        1.0
    } else if s < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `u(s) = s^4/36 + 17 s^3/210 - 3 s^2/55 + 29 s/90 - 413/1140
///        + sign(s) 512 |s|^{19/4} / 65835`
/// on `[-1, 1]`, in `S_2^5` but not `S_2^6`.
pub fn example1() -> AnalyticFunction {
    const C: f64 = 512.0 / 65835.0;
    let a1 = C * 19.0 / 4.0;
    let a2 = a1 * 15.0 / 4.0;
    let a3 = a2 * 11.0 / 4.0;
    let a4 = a3 * 7.0 / 4.0;
    let derivs: Vec<Evaluator> = vec![
        Arc::new(move |s: &[f64]| {
            let x = s[0];
            x.powi(4) / 36.0 + 17.0 * x.powi(3) / 210.0 - 3.0 * x * x / 55.0 + 29.0 * x / 90.0
                - 413.0 / 1140.0
                + C * sign(x) * x.abs().powf(4.75)
        }),
        Arc::new(move |s: &[f64]| {
            let x = s[0];
            x.powi(3) / 9.0 + 17.0 * x * x / 70.0 - 6.0 * x / 55.0 + 29.0 / 90.0
                + a1 * x.abs().powf(3.75)
        }),
        Arc::new(move |s: &[f64]| {
            let x = s[0];
            x * x / 3.0 + 17.0 * x / 35.0 - 6.0 / 55.0 + a2 * sign(x) * x.abs().powf(2.75)
        }),
        Arc::new(move |s: &[f64]| {
            let x = s[0];
            2.0 * x / 3.0 + 17.0 / 35.0 + a3 * x.abs().powf(1.75)
        }),
        Arc::new(move |s: &[f64]| {
            let x = s[0];
            2.0 / 3.0 + a4 * sign(x) * x.abs().powf(0.75)
        }),
        Arc::new(|s: &[f64]| 0.5 / s[0].abs().powf(0.25)),
    ];
    AnalyticFunction::new(
        "example1-1d",
        HyperRect::symmetric(1),
        MultiIndex::splat(1, 5),
        derivs,
        vec![vec![Breakpoint::singular(0.0)]],
    )
    .expect("example1 is well formed")
}

/// Branch `b` (0 left, 1 middle, 2 right) of the example 2 spline factor,
/// differentiated `k` times.
fn example2_branch(b: usize, k: usize, x: f64) -> f64 {
    match (b, k) {
        (0, 0) => x.powi(3) / 6.0 + x * x / 2.0 + 5.0 * x / 6.0 - 1.0 / 6.0,
        (0, 1) => x * x / 2.0 + x + 5.0 / 6.0,
        (0, 2) => x + 1.0,
        (1, 0) => -x.powi(3) / 6.0 + 7.0 * x / 12.0 - 5.0 / 24.0,
        (1, 1) => -x * x / 2.0 + 7.0 / 12.0,
        (1, 2) => -x,
        (1, _) => -1.0,
        (2, 0) => x.powi(3) / 6.0 - x * x / 2.0 + 5.0 * x / 6.0 - 0.25,
        (2, 1) => x * x / 2.0 - x + 5.0 / 6.0,
        (2, 2) => x - 1.0,
        _ => 1.0,
    }
}

/// The spline factor of example 2 and its first three derivatives.
pub(crate) fn example2_factor(k: usize, x: f64) -> f64 {
    let b = if x < -0.5 {
        0
    } else if x <= 0.5 {
        1
    } else {
        2
    };
    example2_branch(b, k, x)
}

/// `w(s_1, s_2) = v(s_1) v(s_2)` on `[-1, 1]^2`, where `v` is a cubic spline
/// whose third derivative is `+1` outside `[-1/2, 1/2]` and `-1` inside.
pub fn example2() -> AnalyticFunction {
    let delta = MultiIndex::splat(2, 3);
    let derivs: Vec<Evaluator> = multiindex_range(&delta)
        .into_iter()
        .map(|a| {
            let (k1, k2) = (a[0], a[1]);
            Arc::new(move |s: &[f64]| example2_factor(k1, s[0]) * example2_factor(k2, s[1])) as Evaluator
        })
        .collect();
    let breaks = vec![Breakpoint::jump(-0.5), Breakpoint::jump(0.5)];
    AnalyticFunction::new(
        "example2-2d",
        HyperRect::symmetric(2),
        delta,
        derivs,
        vec![breaks.clone(), breaks],
    )
    .expect("example2 is well formed")
}

/// `u(x, y) = x^2 y` on `[0, 1]^2` with smoothness order `(2, 1)`.
pub fn x2y() -> AnalyticFunction {
    let mut c = vec![0.0; 6];
    c[5] = 2.0;
    let p = PiecewisePoly::single_cell(HyperRect::unit(2), MultiIndex::new(vec![2, 1]).unwrap(), c)
        .expect("valid coefficients");
    AnalyticFunction::from_calculus("x2y-2d", &p, MultiIndex::new(vec![2, 1]).unwrap())
        .expect("x2y is well formed")
}

/// A seeded random tensor polynomial of degree `delta + 1` per axis.
pub fn poly_random(domain: &HyperRect, delta: &MultiIndex, seed: u64) -> AnalyticFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let degree: MultiIndex = MultiIndex::new(delta.iter().map(|d| d + 1).collect()).unwrap();
    let coeffs = (0..degree.lattice_size())
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    let p = PiecewisePoly::single_cell(domain.clone(), degree, coeffs).expect("valid coefficients");
    AnalyticFunction::from_calculus("poly-random", &p, delta.clone()).expect("well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    /// Central differences of `D^alpha` against `D^{alpha + e_i}` away from breaks.
    fn fd_check(u: &AnalyticFunction, points: &[Vec<f64>]) {
        let h = 1e-4;
        for alpha in multiindex_range(u.delta()) {
            for i in 0..u.dim() {
                let next = alpha.with(i, alpha[i] + 1);
                if !next.le(u.delta()) {
                    continue;
                }
                for p in points {
                    let mut pp = p.clone();
                    let mut pm = p.clone();
                    pp[i] += h;
                    pm[i] -= h;
                    let fd = (u.deriv_unchecked(&alpha, &pp) - u.deriv_unchecked(&alpha, &pm)) / (2.0 * h);
                    let exact = u.deriv_unchecked(&next, p);
                    assert!(
                        (fd - exact).abs() <= 1e-5 * exact.abs().max(1.0),
                        "{} alpha={alpha} axis={i} at {p:?}: fd={fd} exact={exact}",
                        u.name()
                    );
                }
            }
        }
    }

    #[test]
    fn example1_values() {
        let u = example1();
        assert_relative_eq!(u.eval(&[0.0]).unwrap(), -413.0 / 1140.0);
        assert_relative_eq!(
            u.deriv_unchecked(&mi(&[5]), &[-0.3]),
            1.0 / (2.0 * 0.3f64.powf(0.25)),
            epsilon = 1e-14
        );
        fd_check(&u, &[vec![-0.7], vec![-0.2], vec![0.35], vec![0.9]]);
    }

    #[test]
    fn example2_values() {
        let u = example2();
        assert_eq!(example2_factor(3, 0.75), 1.0);
        assert_eq!(example2_factor(3, 0.5), -1.0);
        assert_eq!(example2_factor(3, -0.9), 1.0);
        assert_relative_eq!(example2_factor(0, -1.0), -2.0 / 3.0, epsilon = 1e-15);
        for k in 0..3 {
            assert!((example2_branch(0, k, -0.5) - example2_branch(1, k, -0.5)).abs() < 1e-12);
            assert!((example2_branch(1, k, 0.5) - example2_branch(2, k, 0.5)).abs() < 1e-12);
        }
        assert_relative_eq!(
            u.eval_derivative(&mi(&[3, 1]), &[0.75, 0.0]).unwrap(),
            7.0 / 12.0,
            epsilon = 1e-15
        );
        fd_check(&u, &[vec![-0.8, 0.1], vec![0.2, -0.3], vec![0.7, 0.9]]);
    }

    #[test]
    fn registry_names() {
        for name in EXAMPLE_NAMES {
            assert_eq!(lookup(name, 1).unwrap().name(), name);
        }
        assert!(matches!(lookup("nope", 0), Err(Error::UnknownExample(_))));
        let a = poly_random(&HyperRect::symmetric(1), &mi(&[2]), 5);
        let b = poly_random(&HyperRect::symmetric(1), &mi(&[2]), 5);
        assert_eq!(a.eval(&[0.3]).unwrap(), b.eval(&[0.3]).unwrap());
        fd_check(&x2y(), &[vec![0.3, 0.6]]);
    }
}
