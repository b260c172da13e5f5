mod common;

use aiqt::encoding::*;
use aiqt::scalar::{inner, norm};
use aiqt::transform::TransformModel;
use aiqt::Error;
use common::{random_model, random_real, random_state};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn crmse_matches_overlap_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for len in [2, 16, 256] {
        for _ in 0..100 {
            let a = random_state(&mut rng, len);
            let b = random_state(&mut rng, len);
            let r = compare_states(&a, &b);
            let lhs = len as f64 * r.crmse * r.crmse;
            let rhs = 2.0 - 2.0 * inner(&a, &b).re;
            assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
            assert!((r.real_norm.powi(2) + r.imag_norm.powi(2) - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn fsl_reconstruction_is_real() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let fsl = Encoder::new(&TransformModel::fourier(9).unwrap());
    for k in [2, 16, 100, 510] {
        for _ in 0..10 {
            let x = random_real(&mut rng, 512);
            let r = fsl.evaluate(&x, SelectionRule::ConjugateSymmetric, k).unwrap();
            assert!(r.imag_norm < 1e-12, "k={k} I={}", r.imag_norm);
        }
    }
}

#[test]
fn full_budget_is_lossless() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let fsl = Encoder::new(&TransformModel::fourier(7).unwrap());
    let x = random_real(&mut rng, 128);
    let r = fsl.evaluate(&x, SelectionRule::ConjugateSymmetric, 126).unwrap();
    assert!(r.crmse < 1e-10);
    assert!(r.fidelity > 1.0 - 1e-10);
    let model = random_model(&mut rng, 7, 2);
    let e = Encoder::new(&model).encode(&x, SelectionRule::PlainTopk, 128).unwrap();
    assert!(e.report().crmse < 1e-10);
    assert!(e.tail() < 1e-12);
}

#[test]
fn error_shrinks_as_budget_grows() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let model = random_model(&mut rng, 6, 1);
    let enc = Encoder::new(&model);
    for _ in 0..20 {
        let x = random_real(&mut rng, 64);
        let mut last = f64::INFINITY;
        for k in 1..=64 {
            let r = enc.evaluate(&x, SelectionRule::PlainTopk, k).unwrap();
            assert!(r.crmse <= last + 1e-14, "k={k}");
            last = r.crmse;
        }
    }
}

#[test]
fn fidelity_is_kept_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let model = random_model(&mut rng, 5, 2);
    let x = random_real(&mut rng, 32);
    let e = Encoder::new(&model).encode(&x, SelectionRule::PlainTopk, 6).unwrap();
    assert!((e.report().fidelity - (1.0 - e.tail())).abs() < 1e-12);
    assert!((norm(&e.reconstruction) - 1.0).abs() < 1e-12);
}

#[test]
fn conjugate_symmetric_rule_pairs_indices() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let enc = Encoder::new(&TransformModel::fourier(6).unwrap());
    for k in [0, 2, 10, 62] {
        let x = random_real(&mut rng, 64);
        let e = enc.encode(&x, SelectionRule::ConjugateSymmetric, k).unwrap();
        assert_eq!(e.mask.len(), k + 2);
        assert!(e.mask.contains(0) && e.mask.contains(32));
        for &j in e.mask.kept() {
            assert!(e.mask.contains((64 - j) % 64), "k={k} j={j}");
        }
    }
    assert!(matches!(
        enc.encode(&random_real(&mut rng, 64), SelectionRule::ConjugateSymmetric, 3),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn zero_sample_is_rejected() {
    let enc = Encoder::new(&TransformModel::fourier(3).unwrap());
    assert!(matches!(enc.evaluate(&[0.0; 8], SelectionRule::PlainTopk, 2), Err(Error::DegenerateInput(_))));
    assert!(enc.evaluate(&[1.0; 4], SelectionRule::PlainTopk, 2).is_err());
}

#[test]
fn dataset_means_do_not_depend_on_workers() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let model = random_model(&mut rng, 6, 2);
    let samples: Vec<Vec<f64>> = (0..50).map(|_| random_real(&mut rng, 64)).collect();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| evaluate_dataset(&samples, &model, SelectionRule::PlainTopk, 8).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn rank_profile_is_sorted_and_normalized() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let samples: Vec<Vec<f64>> = (0..30).map(|_| random_real(&mut rng, 32)).collect();
    let p = rank_profile(&samples, &TransformModel::fourier(5).unwrap()).unwrap();
    assert_eq!(p.len(), 32);
    assert!(p.windows(2).all(|w| w[0].mean_m >= w[1].mean_m));
    assert!((p.iter().map(|r| r.mean_m).sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn single_precision_pipeline() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let x: Vec<f32> = random_real(&mut rng, 64).into_iter().map(|v| v as f32).collect();
    let model = TransformModel::<f32>::fourier(6).unwrap();
    let r = evaluate(&x, &model, SelectionRule::ConjugateSymmetric, 62).unwrap();
    assert!(r.crmse < 1e-5);
    assert!(r.imag_norm < 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prop_reconstruction_is_unit_norm(seed in any::<u64>(), n in 1usize..7, depth in 1usize..3, kf in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = 1 << n;
        let k = 1 + ((len - 1) as f64 * kf) as usize;
        let model = random_model(&mut rng, n, depth);
        let x = random_real(&mut rng, len);
        let e = Encoder::new(&model).encode(&x, SelectionRule::PlainTopk, k).unwrap();
        prop_assert!((norm(&e.reconstruction) - 1.0).abs() < 1e-12);
        prop_assert_eq!(e.mask.len(), k);
        let r = e.report();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&r.fidelity));
        prop_assert!(((len as f64) * r.crmse * r.crmse - (2.0 - 2.0 * inner(&e.psi, &e.reconstruction).re)).abs() < 1e-10);
    }

    #[test]
    fn prop_fsl_realness(seed in any::<u64>(), n in 2usize..9, kf in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = 1usize << n;
        let k = 2 * (((len - 2) / 2) as f64 * kf) as usize;
        let x = random_real(&mut rng, len);
        let r = evaluate(&x, &TransformModel::fourier(n).unwrap(), SelectionRule::ConjugateSymmetric, k).unwrap();
        prop_assert!(r.imag_norm < 1e-12);
    }
}
