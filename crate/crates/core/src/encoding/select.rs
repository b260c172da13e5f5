use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::{norm_sqr, Scalar};

/// Normalized squared magnitudes `m_j = |y_j|^2 / sum |y_l|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyProfile<T> {
    m: Vec<T>,
}

impl<T: Scalar> EnergyProfile<T> {
    /// Wraps an energy vector as is. Intended for tests and hand-built
    /// profiles; entries must be finite and nonnegative.
    pub fn from_energies(m: Vec<T>) -> Result<Self> {
        if m.is_empty() || m.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(invalid("energies must be finite, nonnegative and nonempty"));
        }
        Ok(Self { m })
    }

    pub fn values(&self) -> &[T] {
        &self.m
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    /// Indices sorted by decreasing energy; equal energies keep index order.
    pub fn rank_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.m.len()).collect();
        idx.sort_by(|&a, &b| desc(self.m[a], self.m[b]));
        idx
    }

    /// Energies sorted in decreasing order, `m_r` for rank `r = 0..N`.
    pub fn sorted(&self) -> Vec<T> {
        let mut v = self.m.clone();
        v.sort_by(|a, b| desc(*a, *b));
        v
    }

    /// Energy outside the kept set.
    pub fn tail(&self, mask: &SelectionMask) -> T {
        let mut keep = vec![false; self.m.len()];
        for &j in mask.kept() {
            keep[j] = true;
        }
        self.m.iter().zip(&keep).filter(|(_, k)| !**k).map(|(v, _)| *v).sum()
    }
}

fn desc<T: Scalar>(a: T, b: T) -> Ordering {
    b.partial_cmp(&a).unwrap_or(Ordering::Equal)
}

/// Energy profile of a coefficient vector.
pub fn energies<T: Scalar>(y: &[Complex<T>]) -> Result<EnergyProfile<T>> {
    let total = norm_sqr(y);
    if !(total > T::zero()) || !total.is_finite() {
        return Err(Error::DegenerateInput("coefficient vector has zero or non-finite norm".into()));
    }
    Ok(EnergyProfile { m: y.iter().map(|z| z.norm_sqr() / total).collect() })
}

/// Coefficient retention rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionRule {
    /// The `k` largest energies.
    PlainTopk,
    /// DC and Nyquist always, plus the `k/2` strongest pairs `(j, N - j)`.
    ConjugateSymmetric,
}

impl fmt::Display for SelectionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectionRule::PlainTopk => "plain-topk",
            SelectionRule::ConjugateSymmetric => "conjugate-symmetric",
        })
    }
}

impl FromStr for SelectionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain-topk" | "topk" => Ok(SelectionRule::PlainTopk),
            "conjugate-symmetric" | "conjugate" => Ok(SelectionRule::ConjugateSymmetric),
            other => Err(invalid(format!("unknown selection rule {other:?}"))),
        }
    }
}

/// Sorted set of retained coefficient indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionMask {
    kept: Vec<usize>,
    rule: SelectionRule,
    budget: usize,
}

impl SelectionMask {
    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn rule(&self) -> SelectionRule {
        self.rule
    }

    /// The nominal `k`.
    pub fn budget(&self) -> usize {
        self.budget
    }

    /// `|K|`, which is `k + 2` for the conjugate-symmetric rule.
    pub fn len(&self) -> usize {
        self.kept.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kept.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.kept.binary_search(&j).is_ok()
    }
}

pub fn select_topk<T: Scalar>(m: &EnergyProfile<T>, k: usize) -> Result<SelectionMask> {
    let len = m.len();
    if k < 1 || k > len {
        return Err(invalid(format!("k={k} outside 1..={len}")));
    }
    let mut kept = m.rank_order();
    kept.truncate(k);
    kept.sort_unstable();
    Ok(SelectionMask { kept, rule: SelectionRule::PlainTopk, budget: k })
}

pub fn select_conjugate_symmetric<T: Scalar>(m: &EnergyProfile<T>, k: usize) -> Result<SelectionMask> {
    let len = m.len();
    if len < 2 || len % 2 != 0 {
        return Err(invalid(format!("conjugate-symmetric selection needs even N, got {len}")));
    }
    if k % 2 != 0 {
        return Err(invalid(format!("conjugate-symmetric selection needs even k, got {k}")));
    }
    let half = len / 2;
    if k / 2 > half - 1 {
        return Err(invalid(format!("k={k} exceeds the {} available pairs", half - 1)));
    }
    let v = m.values();
    let mut pairs: Vec<usize> = (1..half).collect();
    pairs.sort_by(|&a, &b| desc(v[a] + v[len - a], v[b] + v[len - b]));
    let mut kept = vec![0, half];
    for &j in &pairs[..k / 2] {
        kept.push(j);
        kept.push(len - j);
    }
    kept.sort_unstable();
    Ok(SelectionMask { kept, rule: SelectionRule::ConjugateSymmetric, budget: k })
}

pub fn select<T: Scalar>(m: &EnergyProfile<T>, rule: SelectionRule, k: usize) -> Result<SelectionMask> {
    match rule {
        SelectionRule::PlainTopk => select_topk(m, k),
        SelectionRule::ConjugateSymmetric => select_conjugate_symmetric(m, k),
    }
}

/// Checks that `k` is usable with `rule` on vectors of length `len`.
pub fn validate_budget(rule: SelectionRule, k: usize, len: usize) -> Result<()> {
    let probe = EnergyProfile { m: vec![1.0f64; len] };
    select(&probe, rule, k).map(|_| ())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(v: &[f64]) -> EnergyProfile<f64> {
        EnergyProfile::from_energies(v.to_vec()).unwrap()
    }

    #[test]
    fn energies_of_small_vector() {
        let y = [Complex::new(1.0, 0.0), Complex::new(0.0, 1.0), Complex::new(0.0, 0.0), Complex::new(0.0, 0.0)];
        assert_eq!(energies(&y).unwrap().values(), &[0.5, 0.5, 0.0, 0.0]);
        let scaled: Vec<_> = y.iter().map(|z| z * Complex::new(0.0, -3.0)).collect();
        assert_eq!(energies(&scaled).unwrap(), energies(&y).unwrap());
        assert!(matches!(energies(&[Complex::new(0.0, 0.0); 4]), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn topk_examples() {
        assert_eq!(select_topk(&profile(&[0.4, 0.3, 0.2, 0.1]), 2).unwrap().kept(), &[0, 1]);
        assert_eq!(select_topk(&profile(&[0.125; 8]), 3).unwrap().kept(), &[0, 1, 2]);
        assert_eq!(select_topk(&profile(&[0.1, 0.4, 0.1, 0.4]), 3).unwrap().kept(), &[0, 1, 3]);
        assert!(select_topk(&profile(&[0.5, 0.5]), 0).is_err());
        assert!(select_topk(&profile(&[0.5, 0.5]), 3).is_err());
    }

    #[test]
    fn conjugate_examples() {
        let m = profile(&[0.05, 0.4, 0.01, 0.02, 0.05, 0.02, 0.01, 0.44]);
        let mask = select_conjugate_symmetric(&m, 2).unwrap();
        assert_eq!(mask.kept(), &[0, 1, 4, 7]);
        assert_eq!(mask.len(), 4);
        let all = select_conjugate_symmetric(&m, 6).unwrap();
        assert_eq!(all.kept(), &[0, 1, 2, 3, 4, 5, 6, 7]);
        assert!(select_conjugate_symmetric(&m, 3).is_err());
        assert!(select_conjugate_symmetric(&m, 8).is_err());
        // tie between pairs resolves to the lower index
        let tie = profile(&[0.0, 0.25, 0.0, 0.25, 0.0, 0.25, 0.0, 0.25]);
        assert_eq!(select_conjugate_symmetric(&tie, 2).unwrap().kept(), &[0, 1, 4, 7]);
    }

    #[test]
    fn tail_and_rule_names() {
        let m = profile(&[0.7, 0.2, 0.1]);
        assert!((m.tail(&select_topk(&m, 1).unwrap()) - 0.3).abs() < 1e-15);
        assert_eq!(m.tail(&select_topk(&m, 3).unwrap()), 0.0);
        for r in [SelectionRule::PlainTopk, SelectionRule::ConjugateSymmetric] {
            assert_eq!(r.to_string().parse::<SelectionRule>().unwrap(), r);
        }
    }
}
