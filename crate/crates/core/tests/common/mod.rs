#![allow(dead_code)]

use aiqt::encoding::energies;
use aiqt::transform::{deep_forward, deep_inverse, ParameterSet, TransformModel};
use aiqt::C64;
use num_complex::Complex;
use rand::Rng;

pub fn random_model(rng: &mut impl Rng, n: usize, depth: usize) -> TransformModel<f64> {
    TransformModel::new((0..depth).map(|_| ParameterSet::random(n, rng).unwrap()).collect()).unwrap()
}

pub fn random_state(rng: &mut impl Rng, len: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..len).map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let nrm = aiqt::scalar::norm(&v);
    v.into_iter().map(|z| z / nrm).collect()
}

pub fn random_real(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Smallest `|m_j - t_k|` over every index except the one holding `t_k`.
pub fn threshold_gap(m: &[f64], k: usize) -> f64 {
    let mut order: Vec<usize> = (0..m.len()).collect();
    order.sort_by(|&a, &b| m[b].partial_cmp(&m[a]).unwrap());
    let t = m[order[k - 1]];
    order
        .iter()
        .enumerate()
        .filter(|(r, _)| *r != k - 1)
        .map(|(_, &j)| (m[j] - t).abs())
        .fold(f64::INFINITY, f64::min)
}

/// A real sample whose energy profile under `model` is concentrated on a
/// few coefficients: the real part of `U^{-1}` applied to a random sparse
/// vector. Returns `None` when the profile is not separated from the top-k
/// threshold by more than `gap`.
pub fn separated_sample(rng: &mut impl Rng, model: &TransformModel<f64>, k: usize, gap: f64) -> Option<Vec<f64>> {
    let len = model.dim();
    let mut y = vec![Complex::new(0.0, 0.0); len];
    for _ in 0..rng.gen_range(1..=k + 1) {
        let j = rng.gen_range(0..len);
        y[j] = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    let x: Vec<f64> = deep_inverse(&y, model).ok()?.iter().map(|z| z.re).collect();
    if x.iter().all(|v| *v == 0.0) {
        return None;
    }
    let xc: Vec<C64> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    let m = energies(&deep_forward(&xc, model).unwrap()).ok()?;
    (threshold_gap(m.values(), k) > gap).then_some(x)
}
