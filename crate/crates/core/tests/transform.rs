use aiqt::circuit::{to_qasm, verify_qasm, Circuit};
use aiqt::scalar::{max_abs_diff, norm};
use aiqt::transform::*;
use aiqt::{Error, C64};
use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vec(rng: &mut impl Rng, len: usize) -> Vec<C64> {
    (0..len).map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn random_model(rng: &mut impl Rng, n: usize, depth: usize) -> TransformModel<f64> {
    TransformModel::new((0..depth).map(|_| ParameterSet::random(n, rng).unwrap()).collect()).unwrap()
}

#[test]
fn delta_maps_to_flat_vector() {
    for n in 1..=6 {
        let len = 1 << n;
        let mut x = vec![Complex::new(0.0, 0.0); len];
        x[0] = Complex::new(1.0, 0.0);
        let y = forward(&x, &ParameterSet::fourier(n).unwrap()).unwrap();
        let want = 1.0 / (len as f64).sqrt();
        assert!(y.iter().all(|z| (z - Complex::new(want, 0.0)).norm() < 1e-14));
    }
}

#[test]
fn dft_oracle_small_cases() {
    let one = Complex::new(1.0, 0.0);
    let zero = Complex::new(0.0, 0.0);
    let y = dft_oracle(&[one, zero, zero, zero]);
    assert!(y.iter().all(|z| (z - Complex::new(0.5, 0.0)).norm() < 1e-15));
    let y = dft_oracle(&[one; 4]);
    assert!((y[0] - Complex::new(2.0, 0.0)).norm() < 1e-15);
    assert!(y[1..].iter().all(|z| z.norm() < 1e-15));
    // sign convention: a single positive-frequency tone lands on index 1
    let tone: Vec<C64> = (0..8).map(|l| Complex::from_polar(1.0, -2.0 * std::f64::consts::PI * l as f64 / 8.0)).collect();
    let y = dft_oracle(&tone);
    assert!((y[7].norm() - 8f64.sqrt()).abs() < 1e-12);
}

#[test]
fn fourier_point_matches_dft_for_all_sizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 1..=10 {
        let p = ParameterSet::fourier(n).unwrap();
        for _ in 0..5 {
            let x = random_vec(&mut rng, 1 << n);
            let err = max_abs_diff(&forward(&x, &p).unwrap(), &dft_oracle(&x));
            assert!(err < 1e-10, "n={n} err={err:e}");
        }
    }
}

#[test]
fn fourier_dense_matrix_is_dft_matrix() {
    for n in 1..=5 {
        let m = dense_matrix(&ParameterSet::<f64>::fourier(n).unwrap()).unwrap();
        assert!(m.max_abs_diff(&dft_matrix(n)) < 1e-12, "n={n}");
    }
}

#[test]
fn fourier_inverse_is_inverse_dft() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 5;
    let y = random_vec(&mut rng, 1 << n);
    let got = inverse(&y, &ParameterSet::fourier(n).unwrap()).unwrap();
    let want = dft_matrix::<f64>(n).adjoint().matvec(&y);
    assert!(max_abs_diff(&got, &want) < 1e-12);
}

fn reversed(x: &[C64]) -> Vec<C64> {
    let mut v = x.to_vec();
    bit_reverse_permute(&mut v);
    v
}

#[test]
fn zero_angles_leave_only_the_swap_network() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = identity_init::<f64>(3).unwrap();
    let x = random_vec(&mut rng, 8);
    assert_eq!(forward(&x, &p).unwrap(), reversed(&x));
    assert_eq!(inverse(&x, &p).unwrap(), reversed(&x));
    let perm = aiqt::Matrix::from_columns(8, |c| reversed(&aiqt::Matrix::identity(8).matvec(&{
        let mut e = vec![Complex::new(0.0, 0.0); 8];
        e[c] = Complex::new(1.0, 0.0);
        e
    })));
    assert_eq!(dense_matrix(&p).unwrap().max_abs_diff(&perm), 0.0);
    let one = identity_init::<f64>(1).unwrap();
    assert_eq!(forward(&x[..2], &one).unwrap(), x[..2].to_vec());
}

#[test]
fn paired_zero_blocks_cancel() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 4;
    let m = TransformModel::new(vec![fourier_init(n).unwrap(), identity_init(n).unwrap(), identity_init(n).unwrap()])
        .unwrap();
    let x = random_vec(&mut rng, 16);
    let a = deep_forward(&x, &m).unwrap();
    let b = forward(&x, &fourier_init(n).unwrap()).unwrap();
    assert_eq!(a, b);
    let m2 = TransformModel::new(vec![fourier_init(n).unwrap(), identity_init(n).unwrap()]).unwrap();
    assert_eq!(deep_forward(&x, &m2).unwrap(), reversed(&b));
}

#[test]
fn deep_init_starts_at_relabelled_fourier() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = random_vec(&mut rng, 64);
    for depth in 1..=4 {
        let m = TransformModel::<f64>::deep_init(6, depth, 9).unwrap();
        let want = if depth % 2 == 1 { dft_oracle(&x) } else { reversed(&dft_oracle(&x)) };
        assert!(max_abs_diff(&deep_forward(&x, &m).unwrap(), &want) < 1e-12);
    }
}

#[test]
fn random_blocks_match_circuit() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in 1..=8 {
        for _ in 0..3 {
            let p = ParameterSet::random(n, &mut rng).unwrap();
            let m = dense_matrix(&p).unwrap();
            assert!(m.unitarity_error() < 1e-10);
            let x = random_vec(&mut rng, 1 << n);
            let err = max_abs_diff(&forward(&x, &p).unwrap(), &m.matvec(&x));
            assert!(err < 1e-9, "n={n} err={err:e}");
        }
    }
}

#[test]
fn three_block_model_matches_matrix_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let model = random_model(&mut rng, 5, 3);
    let x = random_vec(&mut rng, 32);
    let got = deep_forward(&x, &model).unwrap();
    let want = dense_model_matrix(&model).unwrap().matvec(&x);
    assert!(max_abs_diff(&got, &want) < 1e-9);
}

#[test]
fn length_errors() {
    let p = ParameterSet::<f64>::fourier(3).unwrap();
    let x = vec![Complex::new(1.0, 0.0); 6];
    assert!(matches!(forward(&x, &p), Err(Error::InvalidArgument(_))));
    let x = vec![Complex::new(1.0, 0.0); 16];
    assert!(matches!(inverse(&x, &p), Err(Error::InvalidArgument(_))));
    assert!(matches!(deep_forward(&x, &TransformModel::single(p)), Err(Error::InvalidArgument(_))));
    assert!(matches!(dense_matrix(&ParameterSet::<f64>::identity(13).unwrap()), Err(Error::ResourceLimit(_))));
    assert!(fourier_init::<f64>(0).is_err());
}

#[test]
fn single_precision_tracks_double() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let model = random_model(&mut rng, 6, 2);
    let x = random_vec(&mut rng, 64);
    let y64 = deep_forward(&x, &model).unwrap();
    let x32: Vec<Complex<f32>> = x.iter().map(|z| Complex::new(z.re as f32, z.im as f32)).collect();
    let y32 = deep_forward(&x32, &model.cast::<f32>()).unwrap();
    let err = y64.iter().zip(&y32).map(|(a, b)| (a - Complex::new(b.re as f64, b.im as f64)).norm()).fold(0.0, f64::max);
    assert!(err < 1e-5);
}

#[test]
fn qasm_export_verifies() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in 1..=5 {
        let model = random_model(&mut rng, n, 2);
        let text = to_qasm(&model);
        assert!(verify_qasm(&text, &model, 1e-9).unwrap() < 1e-12);
        let c = Circuit::from_model(&model).counts();
        assert_eq!(c.single_qubit, 2 * n);
        assert_eq!(c.swap, 2 * (n / 2));
    }
    let id = TransformModel::single(identity_init::<f64>(3).unwrap());
    assert!(verify_qasm(&to_qasm(&id), &id, 1e-12).is_ok());
}

#[test]
fn forward_runtime_is_quasilinear() {
    let p12 = ParameterSet::<f64>::fourier(14).unwrap();
    let p13 = ParameterSet::<f64>::fourier(15).unwrap();
    let k12 = BlockKernel::new(&p12);
    let k13 = BlockKernel::new(&p13);
    let time = |k: &BlockKernel<f64>| {
        let mut v = vec![Complex::new(1.0, 0.5); k.dim()];
        let mut best = f64::INFINITY;
        for _ in 0..7 {
            let t = std::time::Instant::now();
            k.apply(&mut v);
            best = best.min(t.elapsed().as_secs_f64());
        }
        best
    };
    let ratio = time(&k13) / time(&k12);
    assert!(ratio < 3.5, "doubling N scaled time by {ratio}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn norm_preserved_and_round_trip(n in 1usize..=7, depth in 1usize..=3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, n, depth);
        let x = random_vec(&mut rng, 1 << n);
        let y = deep_forward(&x, &model).unwrap();
        prop_assert!((norm(&y) - norm(&x)).abs() < 1e-12);
        let back = deep_inverse(&y, &model).unwrap();
        prop_assert!(max_abs_diff(&back, &x) < 1e-10 * depth as f64);
    }

    #[test]
    fn butterfly_matches_circuit(n in 1usize..=6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = ParameterSet::random(n, &mut rng).unwrap();
        let x = random_vec(&mut rng, 1 << n);
        let mut via_circuit = x.clone();
        Circuit::from_params(&p).apply(&mut via_circuit);
        prop_assert!(max_abs_diff(&forward(&x, &p).unwrap(), &via_circuit) < 1e-9);
    }

    #[test]
    fn flat_round_trip(n in 1usize..=8, depth in 1usize..=3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, n, depth);
        let flat = model.flatten();
        prop_assert_eq!(flat.len(), depth * (3 * n + n * (n - 1) / 2));
        let mut other = TransformModel::<f64>::deep_init(n, depth, 0).unwrap();
        other.assign_flat(&flat).unwrap();
        prop_assert_eq!(other, model);
    }
}
