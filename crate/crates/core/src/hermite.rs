//! Normalized Hermite functions `ζ_n` on the complex plane.
//!
//! `ζ_0(z) = π^{-1/4} e^{-z²/2}` and the upward recurrence
//! `ζ_{n+1} = (z ζ_n − √(n/2) ζ_{n−1}) √(2/(n+1))` give every degree at once.
//! Growth bounds, Mehler kernels and the constants `c_z`, `C_R`, `K_n` live
//! here as well; every inequality is compared in the log domain.

use std::f64::consts::{E, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_segment, Tolerance};

/// Largest modulus tolerated inside the recurrence before reporting overflow.
pub const MAGNITUDE_CAP: f64 = 1e300;

/// Largest admissible evaluation radius.
pub const MAX_RADIUS: f64 = 8.0;

/// Samples on `|z| = R` used for the numerical maximum of `c_z`.
pub const BOUNDARY_SAMPLES: usize = 1024;

/// Relative slack accepted when testing `|z| <= R`.
const DISK_SLACK: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Sign convention for `ζ_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// No `(−1)^n` factor; the three-term and derivative recurrences hold verbatim.
    #[default]
    Standard,
    /// Multiplies odd degrees by −1.
    Alternating,
}

impl Convention {
    fn sign(self, n: usize) -> f64 {
        match self {
            Convention::Alternating if n % 2 == 1 => -1.0,
            _ => 1.0,
        }
    }
}

/// Validated evaluation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HermiteConfig {
    pub n_max: usize,
    pub radius: f64,
    pub quad_tol: f64,
    pub convention: Convention,
}

impl HermiteConfig {
    pub fn new(n_max: usize, radius: f64, quad_tol: f64, convention: Convention) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidConfig("n_max must be at least 1".into()));
        }
        if !(radius > 0.0 && radius <= MAX_RADIUS) {
            return Err(Error::InvalidConfig(format!(
                "radius {radius} must lie in (0, {MAX_RADIUS}]"
            )));
        }
        if !(quad_tol > 0.0 && quad_tol <= 1e-3) {
            return Err(Error::InvalidConfig(format!(
                "quad_tol {quad_tol} must lie in (0, 1e-3]"
            )));
        }
        Ok(Self {
            n_max,
            radius,
            quad_tol,
            convention,
        })
    }

    pub fn standard(n_max: usize, radius: f64) -> Result<Self> {
        Self::new(n_max, radius, 1e-12, Convention::Standard)
    }

    pub fn check_degree(&self, n: usize) -> Result<()> {
        if n > self.n_max {
            return Err(Error::DegreeOverflow {
                n,
                n_max: self.n_max,
            });
        }
        Ok(())
    }

    pub fn check_point(&self, z: Complex64) -> Result<()> {
        if !z.is_finite() || z.norm() > self.radius * (1.0 + DISK_SLACK) {
            return Err(Error::OutsideDisk {
                z,
                radius: self.radius,
            });
        }
        Ok(())
    }

    /// `ζ_0(z), …, ζ_n(z)`.
    pub fn zeta_table(&self, n: usize, z: Complex64) -> Result<Vec<Complex64>> {
        self.check_degree(n)?;
        self.check_point(z)?;
        let mut out = vec![ZERO; n + 1];
        fill_zeta(z, &mut out)?;
        self.apply_convention(&mut out);
        Ok(out)
    }

    pub fn zeta(&self, n: usize, z: Complex64) -> Result<Complex64> {
        Ok(self.zeta_table(n, z)?[n])
    }

    pub fn zeta_prime(&self, n: usize, z: Complex64) -> Result<Complex64> {
        Ok(self.zeta_prime_table(n, z)?[n])
    }

    /// `ζ_0'(z), …, ζ_n'(z)` via `ζ_k' = −z ζ_k + √(2k) ζ_{k−1}`.
    pub fn zeta_prime_table(&self, n: usize, z: Complex64) -> Result<Vec<Complex64>> {
        self.check_degree(n)?;
        self.check_point(z)?;
        let mut values = vec![ZERO; n + 1];
        fill_zeta(z, &mut values)?;
        let mut out = derivatives_from_values(z, &values);
        self.apply_convention(&mut out);
        Ok(out)
    }

    /// `∫_{[0,z]} ζ_n(u) du` with absolute error at most `tol`.
    pub fn antiderivative(&self, n: usize, z: Complex64, tol: f64) -> Result<Complex64> {
        Ok(self.antiderivative_table(n, z, Tolerance::absolute(tol))?[n])
    }

    /// `∫_{[0,z]} ζ_k(u) du` for every `k <= n`.
    pub fn antiderivative_table(
        &self,
        n: usize,
        z: Complex64,
        tol: Tolerance,
    ) -> Result<Vec<Complex64>> {
        self.segment_integrals(n, ZERO, z, tol, None)
    }

    /// `∫_{[a,b]} w(u) ζ_k(u) du` for every `k <= n`, with an optional
    /// analytic multiplier `w` (`None` means `w ≡ 1`).
    pub fn segment_integrals(
        &self,
        n: usize,
        a: Complex64,
        b: Complex64,
        tol: Tolerance,
        multiplier: Option<&dyn Fn(Complex64) -> Complex64>,
    ) -> Result<Vec<Complex64>> {
        self.check_degree(n)?;
        self.check_point(a)?;
        self.check_point(b)?;
        let mut out = integrate_segment(a, b, n + 1, tol, |u, values| {
            fill_zeta(u, values)?;
            if let Some(w) = multiplier {
                let m = w(u);
                values.iter_mut().for_each(|v| *v *= m);
            }
            Ok(())
        })?;
        self.apply_convention(&mut out);
        Ok(out)
    }

    /// Constants `c_z`, `C_R` and `K_n` at `z`, radius `radius` and degree `n`.
    pub fn envelope(&self, z: Complex64, radius: f64, n: usize) -> Result<BoundEnvelope> {
        if z.norm() > radius * (1.0 + DISK_SLACK) {
            return Err(Error::OutsideDisk { z, radius });
        }
        Ok(BoundEnvelope {
            c_z: c_z(z),
            c_r: c_radius(radius),
            k_n: ln_k_n(n).exp(),
        })
    }

    /// Evaluates the four growth bounds at `(n, z)`.
    pub fn check_bounds(&self, n: usize, z: Complex64) -> Result<BoundReport> {
        if n == 0 {
            return Err(Error::InvalidConfig(
                "bound checks start at degree 1".into(),
            ));
        }
        let values = self.zeta_table(n, z)?;
        let standard_sign = self.convention.sign(n) * self.convention.sign(n - 1);
        // derivative magnitude is convention independent
        let deriv = -z * values[n] + (2.0 * n as f64).sqrt() * values[n - 1] * standard_sign;
        let ln_zeta = values[n].norm().ln();
        let ln_zeta_prime = deriv.norm().ln();
        let ln_h = ln_hermite_from_zeta(n, z, ln_zeta);

        let zeta_rhs = ln_zeta_envelope(n, z);
        let zeta_prime_rhs =
            ln_c_z(z) + (1.0 + (2.0 * n as f64).sqrt()).ln() + 2.0 * n as f64 * z.im.abs();
        let em_rhs = ln_em_bound(n, z);
        let hille_rhs = ln_hille_bound(n, z, self.radius);

        Ok(BoundReport {
            n,
            z,
            zeta_margin: zeta_rhs - ln_zeta,
            zeta_prime_margin: zeta_prime_rhs - ln_zeta_prime,
            em_margin: em_rhs - ln_h,
            hille_margin: hille_rhs - ln_h,
            zeta_ok: ln_zeta <= zeta_rhs,
            zeta_prime_ok: ln_zeta_prime <= zeta_prime_rhs,
            em_ok: ln_h <= em_rhs,
            hille_ok: ln_h <= hille_rhs,
        })
    }

    /// Closed-form Mehler kernel `Σ ε^n ζ_n(u) ζ_n(v)`.
    pub fn mehler_kernel(&self, eps: f64, u: Complex64, v: Complex64) -> Result<Complex64> {
        mehler_kernel(eps, u, v)
    }

    /// Truncated Mehler series through degree `n_terms`.
    pub fn mehler_series(
        &self,
        eps: f64,
        u: Complex64,
        v: Complex64,
        n_terms: usize,
    ) -> Result<Complex64> {
        check_eps(eps)?;
        let zu = self.zeta_table(n_terms, u)?;
        let zv = self.zeta_table(n_terms, v)?;
        let mut power = 1.0;
        let mut sum = ZERO;
        for (a, b) in zu.iter().zip(&zv) {
            sum += *a * *b * power;
            power *= eps;
        }
        Ok(sum)
    }

    fn apply_convention(&self, values: &mut [Complex64]) {
        if self.convention == Convention::Alternating {
            values.iter_mut().skip(1).step_by(2).for_each(|v| *v = -*v);
        }
    }
}

/// Writes `ζ_0(z), …, ζ_{len−1}(z)` (standard convention) into `out`.
pub fn fill_zeta(z: Complex64, out: &mut [Complex64]) -> Result<()> {
    if out.is_empty() {
        return Ok(());
    }
    out[0] = (-z * z * 0.5).exp() * PI.powf(-0.25);
    guard(0, z, out[0])?;
    if out.len() > 1 {
        out[1] = z * out[0] * std::f64::consts::SQRT_2;
        guard(1, z, out[1])?;
    }
    for n in 1..out.len().saturating_sub(1) {
        let nf = n as f64;
        let next = (z * out[n] - out[n - 1] * (nf / 2.0).sqrt()) * (2.0 / (nf + 1.0)).sqrt();
        guard(n + 1, z, next)?;
        out[n + 1] = next;
    }
    Ok(())
}

fn guard(n: usize, z: Complex64, v: Complex64) -> Result<()> {
    if !v.is_finite() || v.norm() > MAGNITUDE_CAP {
        return Err(Error::OverflowGuard { n, z });
    }
    Ok(())
}

fn derivatives_from_values(z: Complex64, values: &[Complex64]) -> Vec<Complex64> {
    (0..values.len())
        .map(|k| {
            let lower = if k == 0 {
                ZERO
            } else {
                values[k - 1] * (2.0 * k as f64).sqrt()
            };
            -z * values[k] + lower
        })
        .collect()
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps.abs() < 1.0) {
        return Err(Error::EpsOutOfRange { eps });
    }
    Ok(())
}

/// `(π(1−ε²))^{-1/2} exp(−[(1+ε²)(u²+v²) − 4uvε] / (2(1−ε²)))`.
pub fn mehler_kernel(eps: f64, u: Complex64, v: Complex64) -> Result<Complex64> {
    check_eps(eps)?;
    let one_minus = 1.0 - eps * eps;
    let exponent = -((u * u + v * v) * (1.0 + eps * eps) - u * v * (4.0 * eps)) / (2.0 * one_minus);
    Ok(exponent.exp() / (PI * one_minus).sqrt())
}

/// Constants attached to a point, a radius and a degree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundEnvelope {
    pub c_z: f64,
    pub c_r: f64,
    pub k_n: f64,
}

/// Outcome of [`HermiteConfig::check_bounds`]; margins are `ln(rhs) − ln(lhs)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub z: Complex64,
    pub zeta_ok: bool,
    pub zeta_prime_ok: bool,
    pub em_ok: bool,
    pub hille_ok: bool,
    pub zeta_margin: f64,
    pub zeta_prime_margin: f64,
    pub em_margin: f64,
    pub hille_margin: f64,
}

impl BoundReport {
    pub fn all_ok(&self) -> bool {
        self.zeta_ok && self.zeta_prime_ok && self.em_ok && self.hille_ok
    }
}

/// `(2e³/π²)^{1/4}`, the value of `c_z` at the origin.
pub fn c_origin() -> f64 {
    (2.0 * E.powi(3) / (PI * PI)).powf(0.25)
}

pub fn ln_c_z(z: Complex64) -> f64 {
    c_origin().ln() + z.norm_sqr() / 2.0 + z.re * z.re + z.im.abs()
}

/// `c_z = (2e³/π²)^{1/4} e^{|z|²/2 + x² + |y|}`.
pub fn c_z(z: Complex64) -> f64 {
    ln_c_z(z).exp()
}

/// Closed form of `max_{|z| = R} (x² + |y|)`.
pub fn max_boundary_exponent(radius: f64) -> f64 {
    if radius >= 0.5 {
        radius * radius + 0.25
    } else {
        radius
    }
}

/// `c_z` maximized over `BOUNDARY_SAMPLES` points of `|z| = R`.
pub fn c_radius_sampled(radius: f64) -> f64 {
    (0..BOUNDARY_SAMPLES)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / BOUNDARY_SAMPLES as f64;
            c_z(Complex64::from_polar(radius, theta))
        })
        .fold(c_z(ZERO), f64::max)
}

/// `C_R = max_{|z| <= R} c_z`. The exponent grows radially, so the maximum
/// sits on the boundary circle; the sampled maximum never exceeds the closed
/// form and the larger of the two is returned.
pub fn c_radius(radius: f64) -> f64 {
    let closed = (c_origin().ln() + radius * radius / 2.0 + max_boundary_exponent(radius)).exp();
    closed.max(c_radius_sampled(radius))
}

/// `ln n!` by direct summation.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `ln K_n` with `K_n = (2e/π)^{1/4} ((2n)!)^{1/4} (2n+1)^{−n/2−1/4} e^{n/2}`.
pub fn ln_k_n(n: usize) -> f64 {
    let nf = n as f64;
    0.25 * (2.0 * E / PI).ln() + 0.25 * ln_factorial(2 * n)
        - (nf / 2.0 + 0.25) * (2.0 * nf + 1.0).ln()
        + nf / 2.0
}

/// `ln |H_n(z)|` from `ln |ζ_n(z)|`.
pub fn ln_hermite_from_zeta(n: usize, z: Complex64, ln_zeta: f64) -> f64 {
    ln_zeta
        + 0.25 * PI.ln()
        + 0.5 * n as f64 * std::f64::consts::LN_2
        + 0.5 * ln_factorial(n)
        + (z * z).re / 2.0
}

/// `ln` of the right-hand side of `|ζ_n(z)| <= c_z e^{2n|y|}`.
pub fn ln_zeta_envelope(n: usize, z: Complex64) -> f64 {
    ln_c_z(z) + 2.0 * n as f64 * z.im.abs()
}

/// `ln(2^{n/2} (n!)^{1/2} e^{√(2n)|z|})`.
pub fn ln_em_bound(n: usize, z: Complex64) -> f64 {
    0.5 * n as f64 * std::f64::consts::LN_2
        + 0.5 * ln_factorial(n)
        + (2.0 * n as f64).sqrt() * z.norm()
}

/// `ln(n! e^{R|z| + n/2} R^{−n})`.
pub fn ln_hille_bound(n: usize, z: Complex64, radius: f64) -> f64 {
    let nf = n as f64;
    ln_factorial(n) + radius * z.norm() + nf / 2.0 - nf * radius.ln()
}

/// `ln` of the Hermite-function envelope obtained from the Hille-type bound:
/// `π^{-1/4} e^{R²/2 + R|z|} (e^{1/2} / (√2 R))^n (n!)^{1/2}`.
pub fn ln_hille_zeta_envelope(n: usize, z: Complex64, radius: f64) -> f64 {
    let nf = n as f64;
    -0.25 * PI.ln()
        + radius * radius / 2.0
        + radius * z.norm()
        + nf * (0.5 - 0.5 * std::f64::consts::LN_2 - radius.ln())
        + 0.5 * ln_factorial(n)
}

/// Checks `√(2π) n^{n+1/2} e^{−n} e^{1/(12n+1)} <= n! <= √(2π) n^{n+1/2} e^{−n} e^{1/(12n)}`.
pub fn stirling_sandwich(n: usize) -> (bool, bool) {
    assert!(n >= 1);
    let nf = n as f64;
    let base = 0.5 * (2.0 * PI).ln() + (nf + 0.5) * nf.ln() - nf;
    let diff = ln_factorial(n) - base;
    (diff >= 1.0 / (12.0 * nf + 1.0), diff <= 1.0 / (12.0 * nf))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> HermiteConfig {
        HermiteConfig::standard(256, 8.0).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn quoted_hille_estimate_fails_at_origin() {
        // |H_2(0)| = 2 while n! e^{n/2} R^{-n} = 2e/9 at R = 3
        let r = HermiteConfig::standard(4, 3.0)
            .unwrap()
            .check_bounds(2, Complex64::new(0.0, 0.0))
            .unwrap();
        assert!(!r.hille_ok);
        assert!((r.hille_margin - (2f64.ln() + 1.0 - 2.0 * 3f64.ln() - 2f64.ln())).abs() < 1e-12);
        assert!(r.zeta_ok && r.em_ok);
    }

    #[test]
    fn seeds_match_closed_forms() {
        let h = cfg();
        assert!((h.zeta(0, ZERO).unwrap().re - 0.7511255444649425).abs() < 1e-15);
        // ζ_1(z) = √2 π^{-1/4} z e^{-z²/2}
        let z = c(1.0, 0.0);
        assert!((h.zeta(1, z).unwrap().re - 0.6442883651134752).abs() < 1e-14);
        let w = c(0.7, -1.3);
        let closed = w * (-w * w / 2.0).exp() * std::f64::consts::SQRT_2 * PI.powf(-0.25);
        assert!((h.zeta(1, w).unwrap() - closed).norm() < 1e-14);
        // ζ_2(z) = π^{-1/4} (2z² − 1)/√2 e^{-z²/2}
        let closed2 =
            (w * w * 2.0 - 1.0) / std::f64::consts::SQRT_2 * (-w * w / 2.0).exp() * PI.powf(-0.25);
        assert!((h.zeta(2, w).unwrap() - closed2).norm() < 1e-14);
    }

    #[test]
    fn derivative_examples() {
        let h = cfg();
        assert_eq!(h.zeta_prime(0, ZERO).unwrap(), ZERO);
        assert!((h.zeta_prime(1, ZERO).unwrap().re - 1.0622519320271968).abs() < 1e-15);
    }

    #[test]
    fn central_difference_is_second_order() {
        let h = cfg();
        for n in [1usize, 5, 17] {
            let x = 0.37;
            let exact = h.zeta_prime(n, c(x, 0.0)).unwrap().re;
            let errs: Vec<f64> = [1e-2, 5e-3]
                .iter()
                .map(|&step| {
                    let fd = (h.zeta(n, c(x + step, 0.0)).unwrap().re
                        - h.zeta(n, c(x - step, 0.0)).unwrap().re)
                        / (2.0 * step);
                    (fd - exact).abs()
                })
                .collect();
            let ratio = errs[0] / errs[1];
            assert!(ratio > 3.5 && ratio < 4.5, "n={n} ratio {ratio}");
        }
    }

    #[test]
    fn odd_degrees_vanish_at_origin() {
        let t = cfg().zeta_table(51, ZERO).unwrap();
        for (n, v) in t.iter().enumerate() {
            if n % 2 == 1 {
                assert_eq!(*v, ZERO);
            } else {
                assert!(v.norm() > 0.0);
            }
        }
    }

    #[test]
    fn alternating_convention_flips_odd_degrees() {
        let s = cfg();
        let p = HermiteConfig {
            convention: Convention::Alternating,
            ..s
        };
        let z = c(0.3, 0.8);
        for n in 0..6 {
            let sign = if n % 2 == 1 { -1.0 } else { 1.0 };
            assert_eq!(p.zeta(n, z).unwrap(), s.zeta(n, z).unwrap() * sign);
            assert_eq!(
                p.zeta_prime(n, z).unwrap(),
                s.zeta_prime(n, z).unwrap() * sign
            );
        }
        assert_eq!(s.check_bounds(7, z).unwrap(), p.check_bounds(7, z).unwrap());
    }

    #[test]
    fn degree_and_disk_errors() {
        let h = HermiteConfig::standard(10, 1.0).unwrap();
        assert!(matches!(
            h.zeta(11, ZERO),
            Err(Error::DegreeOverflow { n: 11, n_max: 10 })
        ));
        assert!(matches!(
            h.zeta(1, c(1.5, 0.0)),
            Err(Error::OutsideDisk { .. })
        ));
    }

    #[test]
    fn overflow_guard_trips_far_up_the_imaginary_axis() {
        let h = HermiteConfig::standard(20000, 8.0).unwrap();
        assert!(matches!(
            h.zeta(20000, c(0.0, 8.0)),
            Err(Error::OverflowGuard { .. })
        ));
    }

    #[test]
    fn config_validation() {
        assert!(HermiteConfig::new(0, 1.0, 1e-8, Convention::Standard).is_err());
        assert!(HermiteConfig::new(4, 9.0, 1e-8, Convention::Standard).is_err());
        assert!(HermiteConfig::new(4, 1.0, 1e-2, Convention::Standard).is_err());
        assert!(HermiteConfig::new(4, 1.0, 0.0, Convention::Standard).is_err());
    }

    #[test]
    fn antiderivative_examples() {
        let h = cfg();
        assert_eq!(h.antiderivative(3, ZERO, 1e-10).unwrap(), ZERO);
        // π^{-1/4} √(π/2) erf(1/√2)
        let v = h.antiderivative(0, c(1.0, 0.0), 1e-10).unwrap();
        assert!((v.re - 0.6426813372174756).abs() < 1e-12);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn antiderivative_respects_growth_bound() {
        let r = 2.0;
        let h = HermiteConfig::standard(40, r).unwrap();
        let cr = c_radius(r);
        for &z in &[c(2.0, 0.0), c(0.0, 2.0), c(-1.2, 1.5), c(1.0, -1.0)] {
            let t = h
                .antiderivative_table(40, z, Tolerance::absolute(1e-10))
                .unwrap();
            for (n, v) in t.iter().enumerate() {
                let rhs = z.norm().ln() + cr.ln() + 2.0 * r * n as f64;
                assert!(v.norm().ln() <= rhs);
            }
        }
    }

    #[test]
    fn envelope_examples() {
        let h = cfg();
        let e0 = h.envelope(ZERO, 1.0, 1).unwrap();
        assert!((e0.c_z - 1.4203763223118604).abs() < 1e-14);
        assert!((e0.k_n - 0.9865235340629325).abs() < 1e-13);
        let one = c(1.0, 0.0);
        let e1 = h.envelope(one, 1.0, 1).unwrap();
        assert!(e1.c_r >= e1.c_z);
        assert!(e1.c_z > e0.c_z);
        assert!(h.envelope(c(2.0, 0.0), 1.0, 1).is_err());
    }

    #[test]
    fn c_radius_closed_form_cross_check() {
        for r in [0.25, 0.5, 1.0, 2.5, 8.0] {
            let closed = (c_origin().ln() + r * r / 2.0 + max_boundary_exponent(r)).exp();
            let sampled = c_radius_sampled(r);
            assert!(sampled <= closed * (1.0 + 1e-12));
            assert!(sampled >= closed * (1.0 - 1e-3), "r={r}");
            // interior points never exceed the boundary maximum
            for k in 0..64 {
                let w = Complex64::from_polar(r * (k as f64 / 64.0), 0.37 * k as f64);
                assert!(c_z(w) <= c_radius(r));
            }
        }
    }

    #[test]
    fn bound_checks_at_origin() {
        let r = cfg().check_bounds(1, ZERO).unwrap();
        assert!(r.all_ok());
        assert!(cfg().check_bounds(0, ZERO).is_err());
    }

    #[test]
    fn real_axis_margin_is_tighter_than_imaginary_axis() {
        let h = cfg();
        for n in [4usize, 16, 64] {
            let real = h.check_bounds(n, c(2.0, 0.0)).unwrap();
            let imag = h.check_bounds(n, c(0.0, 2.0)).unwrap();
            assert!(real.zeta_ok && imag.zeta_ok);
            assert!(real.zeta_margin < imag.zeta_margin, "n={n}");
        }
    }

    #[test]
    fn hille_envelope_only_loses_for_large_degree() {
        // The Hille-type envelope grows like (n!)^{1/2}, the other like e^{2n|y|};
        // at z = 2i the crossover sits near n ≈ 3·10⁴.
        let z = c(0.0, 2.0);
        assert!(ln_hille_zeta_envelope(32, z, 2.0) < ln_zeta_envelope(32, z));
        assert!(ln_hille_zeta_envelope(100_000, z, 2.0) > ln_zeta_envelope(100_000, z));
    }

    #[test]
    fn stirling_bounds_hold() {
        for n in 1..=170 {
            assert_eq!(stirling_sandwich(n), (true, true), "n={n}");
        }
    }

    #[test]
    fn mehler_examples() {
        let h = cfg();
        let u = c(0.4, -0.2);
        let v = c(-0.9, 0.5);
        let k0 = h.mehler_kernel(0.0, u, v).unwrap();
        let prod = h.zeta(0, u).unwrap() * h.zeta(0, v).unwrap();
        assert!((k0 - prod).norm() < 1e-15);
        let k = mehler_kernel(0.5, ZERO, ZERO).unwrap();
        assert!((k.re - 0.6514700158705599).abs() < 1e-15);
        let s = h
            .mehler_series(0.3, c(1.0, 0.0), c(-0.5, 0.0), 200)
            .unwrap();
        let kk = mehler_kernel(0.3, c(1.0, 0.0), c(-0.5, 0.0)).unwrap();
        assert!((s - kk).norm() < 1e-8);
        assert!(matches!(
            mehler_kernel(1.0, u, v),
            Err(Error::EpsOutOfRange { .. })
        ));
    }
}
