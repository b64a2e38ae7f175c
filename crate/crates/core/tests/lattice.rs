use proptest::prelude::*;
use sobolev_recon::funcmodel::{example2, extract_traces, x2y};
use sobolev_recon::{face_spec, multiindex_range, MultiIndex};

fn index(max_dim: usize, max: usize) -> impl Strategy<Value = MultiIndex> {
    prop::collection::vec(0..=max, 1..=max_dim).prop_map(|v| MultiIndex::new(v).unwrap())
}

proptest! {
    #[test]
    fn range_is_closed_under_meet(delta in index(3, 3), i in 0usize..64, j in 0usize..64) {
        let r = multiindex_range(&delta);
        let a = &r[i % r.len()];
        let b = &r[j % r.len()];
        prop_assert!(r.contains(&a.meet(b)));
        prop_assert_eq!(r.len(), delta.lattice_size());
    }

    #[test]
    fn face_activity_counts(delta in index(4, 3), i in 0usize..256) {
        let r = multiindex_range(&delta);
        let alpha = &r[i % r.len()];
        let spec = face_spec(alpha, &delta).unwrap();
        let at_top = (0..delta.dim()).filter(|&k| alpha[k] == delta[k]).count();
        prop_assert_eq!(spec.num_active(), at_top);
        prop_assert_eq!(face_spec(&delta, &delta).unwrap().num_active(), delta.dim());
    }
}

#[test]
fn x2y_traces() {
    let b = extract_traces(&x2y());
    let values: Vec<f64> = b.iter().map(|(_, _, t)| t.eval(&[0.6, 0.7])).collect();
    assert_eq!(values, vec![0.0, 0.0, 0.0, 0.0, 0.0, 2.0]);
}

#[test]
fn top_trace_is_full_derivative() {
    let w = example2();
    let b = extract_traces(&w);
    let top = b.get(w.delta());
    assert_eq!(top.spec().num_active(), 2);
    for s in [[-0.9, 0.1], [0.3, -0.7], [0.75, 0.6]] {
        assert_eq!(top.eval(&s), w.eval_derivative(w.delta(), &s).unwrap());
    }
}
