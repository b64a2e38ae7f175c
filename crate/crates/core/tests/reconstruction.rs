use proptest::prelude::*;
use sobolev_recon::expansion::{expansion_terms, extract_traces_poly, reconstruct};
use sobolev_recon::funcmodel::{example1, extract_traces, x2y, TraceBundle};
use sobolev_recon::quadnorm::{dc_norm_poly, QuadratureRule};
use sobolev_recon::verify::reconstruction_bound;
use sobolev_recon::{face_spec, multiindex_range, Calculus, HyperRect, MultiIndex, PiecewisePoly};

/// Bundles of order `delta` on `[0,1] x [-1,1]`: entries of degree two along
/// their active axes, one break at the midpoint of each active axis.
fn bundle(delta: Vec<usize>) -> impl Strategy<Value = TraceBundle<PiecewisePoly>> {
    let delta = MultiIndex::new(delta).unwrap();
    let dom = HyperRect::new(vec![0.0, -1.0], vec![1.0, 1.0]).unwrap();
    let layout: Vec<(Vec<Vec<f64>>, MultiIndex)> = multiindex_range(&delta)
        .iter()
        .map(|alpha| {
            let spec = face_spec(alpha, &delta).unwrap();
            let breaks = (0..2)
                .map(|i| if spec.is_active(i) { vec![(dom.lo()[i] + dom.hi()[i]) / 2.0] } else { vec![] })
                .collect();
            let degree = MultiIndex::new((0..2).map(|i| if spec.is_active(i) { 2 } else { 0 }).collect()).unwrap();
            (breaks, degree)
        })
        .collect();
    let sizes: Vec<usize> = layout
        .iter()
        .map(|(b, d)| d.lattice_size() * b.iter().map(|x| x.len() + 1).product::<usize>())
        .collect();
    sizes
        .iter()
        .map(|&n| prop::collection::vec(-1.0f64..1.0, n))
        .collect::<Vec<_>>()
        .prop_map(move |coeffs| {
            let entries = layout
                .iter()
                .zip(coeffs)
                .map(|((b, d), c)| PiecewisePoly::new(dom.clone(), b.clone(), d.clone(), c).unwrap())
                .collect();
            TraceBundle::new(delta.clone(), entries).unwrap()
        })
}

fn orders() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0usize..=2, 2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn traces_of_reconstruction_are_the_bundle(b in orders().prop_flat_map(bundle)) {
        let u = reconstruct(&b).unwrap();
        let back = extract_traces_poly(&u, b.delta()).unwrap();
        prop_assert!(back.max_rel_diff(&b).unwrap() <= 1e-10);
    }

    #[test]
    fn reconstruction_is_linear(
        (b1, b2) in orders().prop_flat_map(|d| (bundle(d.clone()), bundle(d))),
        lambda in -3.0f64..3.0,
    ) {
        let lhs = reconstruct(&b1.axpy(lambda, &b2).unwrap()).unwrap();
        let rhs = reconstruct(&b1).unwrap().axpy(lambda, &reconstruct(&b2).unwrap()).unwrap();
        prop_assert!(lhs.rel_coeff_diff(&rhs).unwrap() <= 1e-10);
    }

    #[test]
    fn trace_norm_of_reconstruction(b in orders().prop_flat_map(bundle)) {
        let rule = QuadratureRule::new(4, 2, None).unwrap();
        let u = reconstruct(&b).unwrap();
        let lhs = dc_norm_poly(&extract_traces_poly(&u, b.delta()).unwrap(), &rule);
        let rhs = dc_norm_poly(&b, &rule);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1.0));
    }

    #[test]
    fn reconstruction_is_bounded(b in orders().prop_flat_map(bundle)) {
        let u = reconstruct(&b).unwrap();
        let rule = QuadratureRule::new(4, 2, None).unwrap();
        let s: f64 = multiindex_range(b.delta())
            .iter()
            .map(|a| u.mixed_derivative(a).l2_norm().powi(2))
            .sum::<f64>()
            .sqrt();
        let bound = reconstruction_bound(u.domain(), b.delta()) * dc_norm_poly(&b, &rule);
        prop_assert!(s <= bound * (1.0 + 1e-10), "{s} > {bound}");
    }
}

#[test]
fn x2y_trace_table() {
    let rows = expansion_terms(&extract_traces(&x2y()), &[1.0, 1.0], &QuadratureRule::default()).unwrap();
    assert_eq!(rows.len(), 6);
    let nonzero: Vec<_> = rows.iter().filter(|r| r.contribution != 0.0).collect();
    assert_eq!(nonzero.len(), 1);
    assert_eq!(nonzero[0].alpha, MultiIndex::new(vec![2, 1]).unwrap());
    assert!((nonzero[0].contribution - 1.0).abs() < 1e-14);
}

#[test]
fn example1_trace_table() {
    let u = example1();
    let rows = expansion_terms(&extract_traces(&u), &[0.5], &QuadratureRule::default()).unwrap();
    assert_eq!(rows.len(), 6);
    let total: f64 = rows.iter().map(|r| r.contribution).sum();
    assert!((total - u.eval(&[0.5]).unwrap()).abs() < 1e-8);
}

#[test]
fn order_zero_table_is_the_value() {
    let u = x2y();
    let b = sobolev_recon::funcmodel::extract_traces_order(&u, &MultiIndex::zeros(2)).unwrap();
    let rows = expansion_terms(&b, &[0.5, 0.8], &QuadratureRule::default()).unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0].contribution - 0.2).abs() < 1e-15);
}

#[test]
fn absolute_value_needs_first_order_only() {
    let u = PiecewisePoly::new(
        HyperRect::symmetric(1),
        vec![vec![0.0]],
        MultiIndex::new(vec![1]).unwrap(),
        vec![1.0, -1.0, 0.0, 1.0],
    )
    .unwrap();
    let b = extract_traces_poly(&u, &MultiIndex::new(vec![1]).unwrap()).unwrap();
    assert_eq!(b.entries()[0].eval(&[0.9]).unwrap(), 1.0);
    assert_eq!(b.entries()[1].eval(&[-0.5]).unwrap(), -1.0);
    assert_eq!(b.entries()[1].eval(&[0.5]).unwrap(), 1.0);
    let err = extract_traces_poly(&u, &MultiIndex::new(vec![2]).unwrap()).unwrap_err();
    assert!(err.to_string().contains("jumps"), "{err}");
}
