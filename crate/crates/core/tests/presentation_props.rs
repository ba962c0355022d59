use std::collections::BTreeMap;

use fetalorient_core::presentation::{
    classify_sweep, cosine_similarity, template_breech, template_cephalic,
};
use fetalorient_core::{Sweep, SweepLabel};
use proptest::prelude::*;

fn sweep(trace: Vec<f64>) -> Sweep {
    Sweep {
        sweep_id: "V1".into(),
        n_frames: trace.len(),
        trace,
        segmentations: BTreeMap::new(),
    }
}

fn trace_strategy() -> impl Strategy<Value = Vec<f64>> {
    (2usize..200).prop_flat_map(|n| prop::collection::vec(0.0f64..=1.0, n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn similarity_is_scale_invariant(trace in trace_strategy(), k in 0.01f64..100.0) {
        prop_assume!(trace.iter().any(|&x| x > 0.0));
        let fc = template_cephalic(trace.len()).unwrap();
        let scaled: Vec<f64> = trace.iter().map(|x| x * k).collect();
        let a = cosine_similarity(&trace, &fc).unwrap();
        let b = cosine_similarity(&scaled, &fc).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn time_reversal_swaps_labels(mut trace in trace_strategy()) {
        trace[0] = 1.0;
        let forward = classify_sweep(&sweep(trace.clone()), 0.5);
        prop_assume!((forward.sim_cephalic - forward.sim_breech).abs() > 1e-9);
        let reversed: Vec<f64> = trace.iter().rev().copied().collect();
        let back = classify_sweep(&sweep(reversed), 0.5);
        prop_assert!((forward.sim_cephalic - back.sim_breech).abs() <= 1e-12);
        prop_assert!((forward.sim_breech - back.sim_cephalic).abs() <= 1e-12);
        let flipped = match forward.label {
            SweepLabel::Cephalic => SweepLabel::Breech,
            SweepLabel::Breech => SweepLabel::Cephalic,
            SweepLabel::NoHead => SweepLabel::NoHead,
        };
        prop_assert_eq!(back.label, flipped);
    }

    #[test]
    fn similarities_are_bounded(trace in trace_strategy()) {
        let s = classify_sweep(&sweep(trace), 0.0);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&s.sim_cephalic));
        prop_assert!((0.0..=1.0 + 1e-12).contains(&s.sim_breech));
    }
}

#[test]
fn templates_match_direct_evaluation() {
    for n in [2usize, 10, 100, 500] {
        let fc = template_cephalic(n).unwrap();
        let fb = template_breech(n).unwrap();
        let nf = n as f64;
        for t in 0..n {
            let tf = t as f64;
            let direct_c = (nf - tf).exp() / nf.exp();
            let direct_b = tf.exp() / nf.exp();
            assert!(((fc[t] - direct_c) / direct_c).abs() <= 1e-12, "f_c n={n} t={t}");
            assert!(((fb[t] - direct_b) / direct_b).abs() <= 1e-12, "f_b n={n} t={t}");
        }
    }
}
