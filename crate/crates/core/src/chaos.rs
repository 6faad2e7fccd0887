//! Sparse Wiener chaos coefficients.
//!
//! A [`ChaosVector`] maps multi-indices `α` to complex coefficients `f_α` of the
//! basis `H_α`. Coordinate `k` labels the Hermite function `ζ_k` (and the
//! Gaussian `Z_k`), counting from zero. Weighted norms use
//! `b_α = Π a_k^{α_k}`, kept in the log domain.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hermite::ln_factorial;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Finitely supported exponent sequence, stored as sorted `(coordinate, exponent)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MultiIndex(Vec<(u32, u32)>);

impl MultiIndex {
    /// The zero multi-index (label of the constant `H_0 = 1`).
    pub fn zero() -> Self {
        Self(Vec::new())
    }

    /// `ε_k`, a single exponent 1 at coordinate `k`.
    pub fn unit(k: u32) -> Self {
        Self(vec![(k, 1)])
    }

    /// Validates `(coordinate, exponent)` pairs: strictly increasing
    /// coordinates and exponents >= 1.
    pub fn new(entries: Vec<(u32, u32)>) -> Result<Self> {
        for w in entries.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::InvalidMultiIndex(format!(
                    "coordinates must be strictly increasing, got {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        if let Some(&(k, _)) = entries.iter().find(|e| e.1 == 0) {
            return Err(Error::InvalidMultiIndex(format!(
                "zero exponent stored at coordinate {k}"
            )));
        }
        Ok(Self(entries))
    }

    /// Builds a multi-index from a dense exponent list (`exponents[k] = α_k`).
    pub fn from_exponents(exponents: &[u32]) -> Self {
        Self(
            exponents
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(k, &e)| (k as u32, e))
                .collect(),
        )
    }

    pub fn entries(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// `|α| = Σ α_k`.
    pub fn order(&self) -> u32 {
        self.0.iter().map(|e| e.1).sum()
    }

    pub fn exponent(&self, k: u32) -> u32 {
        self.0
            .binary_search_by_key(&k, |e| e.0)
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    /// `α + β`, merging the two sorted lists.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        MultiIndex(out)
    }

    /// `ln α! = Σ ln α_k!`.
    pub fn factorial_log(&self) -> f64 {
        self.0.iter().map(|&(_, e)| ln_factorial(e as usize)).sum()
    }

    /// `ln b_α = Σ α_k ln a_k`.
    pub fn b_weight_log(&self, weights: &WeightSequence) -> f64 {
        self.0
            .iter()
            .map(|&(k, e)| e as f64 * weights.ln_a(k))
            .sum()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, e)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}:{e}")?;
        }
        write!(f, "}}")
    }
}

/// Geometric weights `a_k = base^{k + shift}` together with the exponent `d`
/// for which `Σ_k a_k^{-d}` converges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSequence {
    pub base: f64,
    pub shift: u32,
    pub d: u32,
}

impl Default for WeightSequence {
    fn default() -> Self {
        Self::dyadic()
    }
}

impl WeightSequence {
    /// `a_k = 2^{k+1}`, `d = 1`.
    pub fn dyadic() -> Self {
        Self {
            base: 2.0,
            shift: 1,
            d: 1,
        }
    }

    pub fn geometric(base: f64, shift: u32, d: u32) -> Result<Self> {
        if !(base > 1.0) || shift == 0 || d == 0 {
            return Err(Error::InvalidConfig(format!(
                "geometric weights need base > 1, shift >= 1, d >= 1 (got {base}, {shift}, {d})"
            )));
        }
        Ok(Self { base, shift, d })
    }

    pub fn ln_a(&self, k: u32) -> f64 {
        (k + self.shift) as f64 * self.base.ln()
    }

    pub fn a(&self, k: u32) -> f64 {
        self.ln_a(k).exp()
    }
}

/// `ln α!`.
pub fn factorial_log(alpha: &MultiIndex) -> f64 {
    alpha.factorial_log()
}

/// `ln b_α`.
pub fn b_weight_log(alpha: &MultiIndex, weights: &WeightSequence) -> f64 {
    alpha.b_weight_log(weights)
}

/// Våge constant `A(l) = (Σ_α b_α^{-l})^{1/2} = (Π_k (1 − a_k^{-l})^{-1})^{1/2}`.
pub fn vage_constant(l: u32, weights: &WeightSequence) -> Result<f64> {
    if l < weights.d {
        return Err(Error::Divergence { l, d: weights.d });
    }
    let mut ln_prod = 0.0;
    for k in 0..100_000u32 {
        let term = (-(l as f64) * weights.ln_a(k)).exp();
        ln_prod -= (-term).ln_1p();
        if term < 1e-18 {
            break;
        }
    }
    Ok((0.5 * ln_prod).exp())
}

/// Sparse chaos expansion with deterministic (sorted) iteration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChaosVector {
    coeffs: BTreeMap<MultiIndex, Complex64>,
    max_order: u32,
}

impl ChaosVector {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The Wick unit, the indicator of the zero multi-index.
    pub fn one() -> Self {
        Self::basis(MultiIndex::zero(), Complex64::new(1.0, 0.0))
    }

    pub fn basis(alpha: MultiIndex, c: Complex64) -> Self {
        let mut v = Self::zero();
        v.insert(alpha, c);
        v
    }

    /// Order-1 vector `Σ_k coeffs[k] H_{ε_k}`.
    pub fn from_order1(coeffs: &[Complex64]) -> Self {
        let mut v = Self::zero();
        for (k, &c) in coeffs.iter().enumerate() {
            v.insert(MultiIndex::unit(k as u32), c);
        }
        v
    }

    /// Sets `f_α = c`; an exact zero removes the entry.
    pub fn insert(&mut self, alpha: MultiIndex, c: Complex64) {
        if c == ZERO {
            self.coeffs.remove(&alpha);
            self.refresh_order();
        } else {
            self.max_order = self.max_order.max(alpha.order());
            self.coeffs.insert(alpha, c);
        }
    }

    /// `f_α += c`, pruning an exact zero result.
    pub fn add_to(&mut self, alpha: MultiIndex, c: Complex64) {
        if c == ZERO {
            return;
        }
        let updated = self.get(&alpha) + c;
        self.insert(alpha, updated);
    }

    fn refresh_order(&mut self) {
        self.max_order = self.coeffs.keys().map(MultiIndex::order).max().unwrap_or(0);
    }

    pub fn get(&self, alpha: &MultiIndex) -> Complex64 {
        self.coeffs.get(alpha).copied().unwrap_or(ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    /// Coefficients at the unit indices `ε_0 … ε_{len−1}`.
    pub fn order1_coefficients(&self, len: usize) -> Vec<Complex64> {
        (0..len as u32)
            .map(|k| self.get(&MultiIndex::unit(k)))
            .collect()
    }

    pub fn scale(&self, s: Complex64) -> ChaosVector {
        let mut out = Self::zero();
        for (a, c) in &self.coeffs {
            out.insert(a.clone(), *c * s);
        }
        out
    }

    /// In place `self += s · other`.
    pub fn axpy(&mut self, s: Complex64, other: &ChaosVector) {
        for (a, c) in &other.coeffs {
            let v = *c * s;
            if v == ZERO {
                continue;
            }
            let slot = self.coeffs.entry(a.clone()).or_insert(ZERO);
            *slot += v;
        }
        self.coeffs.retain(|_, v| *v != ZERO);
        self.refresh_order();
    }

    pub fn add(&self, other: &ChaosVector) -> ChaosVector {
        let mut out = self.clone();
        out.axpy(Complex64::new(1.0, 0.0), other);
        out
    }

    pub fn sub(&self, other: &ChaosVector) -> ChaosVector {
        let mut out = self.clone();
        out.axpy(Complex64::new(-1.0, 0.0), other);
        out
    }

    /// Coefficientwise complex conjugate.
    pub fn conj(&self) -> ChaosVector {
        let mut out = self.clone();
        out.coeffs.values_mut().for_each(|c| *c = c.conj());
        out
    }

    /// `‖f‖_{-p} = (Σ |f_α|² b_α^{-p})^{1/2}`.
    pub fn norm_minus(&self, p: u32, weights: &WeightSequence) -> f64 {
        let pf = p as f64;
        self.coeffs
            .iter()
            .map(|(a, c)| (2.0 * c.norm().ln() - pf * a.b_weight_log(weights)).exp())
            .sum::<f64>()
            .sqrt()
    }

    /// `‖f‖_{p} = (Σ |f_α|² (α!)² b_α^{p})^{1/2}`.
    pub fn norm_plus(&self, p: u32, weights: &WeightSequence) -> f64 {
        let pf = p as f64;
        self.coeffs
            .iter()
            .map(|(a, c)| {
                (2.0 * c.norm().ln() + 2.0 * a.factorial_log() + pf * a.b_weight_log(weights)).exp()
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Duality pairing `⟨f, g⟩ = Σ α! conj(g_α) f_α`.
    pub fn pairing(&self, g: &ChaosVector) -> Complex64 {
        let mut sum = ZERO;
        for (a, f) in &self.coeffs {
            if let Some(gv) = g.coeffs.get(a) {
                sum += *f * gv.conj() * a.factorial_log().exp();
            }
        }
        sum
    }

    /// Wick product, the Cauchy convolution `(f⋆g)_γ = Σ_{α+β=γ} f_α g_β`.
    pub fn wick(&self, g: &ChaosVector) -> ChaosVector {
        let mut acc: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (a, f) in &self.coeffs {
            for (b, gv) in &g.coeffs {
                *acc.entry(a.add(b)).or_insert(ZERO) += *f * *gv;
            }
        }
        Self::from_map(acc)
    }

    /// Ordinary product of two order <= 1 expansions, using
    /// `Z_n Z_m = Z_n⋆Z_m + δ_{nm}`.
    pub fn pointwise_product_order1(&self, g: &ChaosVector) -> Result<ChaosVector> {
        for v in [self, g] {
            if v.max_order > 1 {
                return Err(Error::OrderTooHigh { order: v.max_order });
            }
        }
        let mut out = self.wick(g);
        let mut trace = ZERO;
        for (a, f) in &self.coeffs {
            if a.order() == 1 {
                if let Some(gv) = g.coeffs.get(a) {
                    trace += *f * *gv;
                }
            }
        }
        out.add_to(MultiIndex::zero(), trace);
        Ok(out)
    }

    fn from_map(mut map: BTreeMap<MultiIndex, Complex64>) -> ChaosVector {
        map.retain(|_, v| *v != ZERO);
        let mut out = ChaosVector {
            coeffs: map,
            max_order: 0,
        };
        out.refresh_order();
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<ChaosVector> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Serialize, Deserialize)]
struct Term {
    alpha: Vec<[u32; 2]>,
    re: f64,
    im: f64,
}

impl Serialize for ChaosVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let terms: Vec<Term> = self
            .coeffs
            .iter()
            .map(|(a, c)| Term {
                alpha: a.0.iter().map(|&(k, e)| [k, e]).collect(),
                re: c.re,
                im: c.im,
            })
            .collect();
        terms.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ChaosVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let terms = Vec::<Term>::deserialize(deserializer)?;
        let mut map = BTreeMap::new();
        for t in terms {
            let alpha = MultiIndex::new(t.alpha.iter().map(|p| (p[0], p[1])).collect())
                .map_err(D::Error::custom)?;
            if map
                .insert(alpha.clone(), Complex64::new(t.re, t.im))
                .is_some()
            {
                return Err(D::Error::custom(format!("duplicate multi-index {alpha}")));
            }
        }
        Ok(ChaosVector::from_map(map))
    }
}
