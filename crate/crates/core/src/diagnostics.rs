//! Parseval convergence, the imaginary-time divergence scan and Mehler
//! consistency checks.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermite::{mehler_kernel, Convention, HermiteConfig};
use crate::quadrature::{integrate_real, tensor_unit_square, Tolerance};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative tolerance for the antiderivative tables used by the scans.
pub const SCAN_REL_TOL: f64 = 1e-13;

/// Tensor panels per axis for the closed-form divergence totals.
pub const DIVERGENCE_PANELS: usize = 32;

fn scan_config(n: usize, radius: f64) -> Result<HermiteConfig> {
    HermiteConfig::new(
        n.max(1),
        radius.min(crate::hermite::MAX_RADIUS),
        1e-12,
        Convention::Standard,
    )
}

/// `(∫_{[0,z]} ζ_n)²`-style antiderivatives for `n = 0..=n`.
fn antiderivatives(n: usize, z: Complex64) -> Result<Vec<Complex64>> {
    let config = scan_config(n, z.norm().max(1e-300))?;
    config.antiderivative_table(
        n,
        z,
        Tolerance {
            abs: 1e-300,
            rel: SCAN_REL_TOL,
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParsevalRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub partial_sum: f64,
    /// `t − S_N`.
    pub gap: f64,
}

/// `S_N(t) = Σ_{n<=N} (∫_0^t ζ_n)²` for each `N` in `n_list`.
pub fn parseval_scan(t: f64, n_list: &[usize]) -> Result<Vec<ParsevalRow>> {
    if !(t > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "parseval scan needs t > 0, got {t}"
        )));
    }
    let n_max = n_list.iter().copied().max().unwrap_or(0);
    let c = antiderivatives(n_max, Complex64::new(t, 0.0))?;
    let mut prefix = Vec::with_capacity(c.len());
    let mut acc = 0.0;
    for v in &c {
        acc += v.re * v.re;
        prefix.push(acc);
    }
    Ok(n_list
        .iter()
        .map(|&n| ParsevalRow {
            n,
            partial_sum: prefix[n],
            gap: t - prefix[n],
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceRow {
    pub eps: f64,
    /// `Σ_{n<=N} ε^n |∫_{[0,iT]} ζ_n|²`.
    pub partial_sum: f64,
    /// `T² (π(1−ε²))^{-1/2} (∫_0^1 exp((1+ε²)T²t²/(2(1−ε²))) dt)²`.
    pub lower_bound: f64,
    /// Untruncated sum, as `T² ∬_{[0,1]²} K_ε(iTs, −iTr) ds dr`.
    pub closed_form: f64,
    /// `max(0, closed_form − partial_sum)`.
    pub truncation_allowance: f64,
}

impl DivergenceRow {
    pub fn lower_bound_holds(&self) -> bool {
        self.lower_bound <= self.partial_sum + self.truncation_allowance
    }
}

/// Analytic lower bound on `Σ_n ε^n |∫_{[0,iT]} ζ_n|²`.
pub fn divergence_lower_bound(t_imag: f64, eps: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::EpsOutOfRange { eps });
    }
    let e2 = eps * eps;
    let a = (1.0 + e2) * t_imag * t_imag / (2.0 * (1.0 - e2));
    let inner = integrate_real(0.0, 1.0, Tolerance::relative(1e-14), |t| (a * t * t).exp())?;
    Ok(t_imag * t_imag * inner * inner / (std::f64::consts::PI * (1.0 - e2)).sqrt())
}

/// `|z|² ∬_{[0,1]²} K_ε(zs, z̄r) ds dr = Σ_n ε^n |∫_{[0,z]} ζ_n|²`.
pub fn mehler_closed_form_sum(eps: f64, z: Complex64, panels: usize) -> Result<f64> {
    mehler_kernel(eps, ZERO, ZERO)?;
    let v = tensor_unit_square(panels, |s, r| {
        mehler_kernel(eps, z * s, z.conj() * r).unwrap_or(ZERO)
    });
    Ok(v.re * z.norm_sqr())
}

/// Truncated `S(ε)` along the imaginary axis, with the analytic lower bound.
pub fn divergence_scan(t_imag: f64, eps_grid: &[f64], n: usize) -> Result<Vec<DivergenceRow>> {
    if t_imag == 0.0 {
        return Err(Error::InvalidConfig("divergence scan needs T != 0".into()));
    }
    if let Some(&eps) = eps_grid.iter().find(|e| !(0.0..1.0).contains(*e)) {
        return Err(Error::EpsOutOfRange { eps });
    }
    let z = Complex64::new(0.0, t_imag);
    let c = antiderivatives(n, z)?;
    let squares: Vec<f64> = c.iter().map(|v| v.norm_sqr()).collect();
    eps_grid
        .par_iter()
        .map(|&eps| {
            let mut partial_sum = 0.0;
            let mut power = 1.0;
            for s in &squares {
                partial_sum += power * s;
                power *= eps;
            }
            let lower_bound = divergence_lower_bound(t_imag, eps)?;
            let closed_form = mehler_closed_form_sum(eps, z, DIVERGENCE_PANELS)?;
            Ok(DivergenceRow {
                eps,
                partial_sum,
                lower_bound,
                closed_form,
                truncation_allowance: (closed_form - partial_sum).max(0.0),
            })
        })
        .collect()
}

/// Strict increase of `S(ε)` along a sorted grid.
pub fn strictly_increasing(rows: &[DivergenceRow]) -> bool {
    rows.windows(2).all(|w| w[1].partial_sum > w[0].partial_sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MehlerReport {
    pub eps: f64,
    pub n_terms: usize,
    pub points: usize,
    pub max_deviation: f64,
    /// `max |K(u, v) − K(v, u)|` over the grid.
    pub max_asymmetry: f64,
}

/// `max |Σ_{n<=N} ε^n ζ_n(u) ζ_n(v) − K_ε(u, v)|` over `grid`.
pub fn mehler_consistency(
    eps: f64,
    grid: &[(Complex64, Complex64)],
    n: usize,
) -> Result<MehlerReport> {
    if !(eps.abs() < 1.0) {
        return Err(Error::EpsOutOfRange { eps });
    }
    let radius = grid
        .iter()
        .map(|(u, v)| u.norm().max(v.norm()))
        .fold(1e-3, f64::max);
    let config = scan_config(n, radius)?;
    let rows: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&(u, v)| {
            let series = config.mehler_series(eps, u, v, n)?;
            let kernel = mehler_kernel(eps, u, v)?;
            let swapped = mehler_kernel(eps, v, u)?;
            Ok(((series - kernel).norm(), (kernel - swapped).norm()))
        })
        .collect::<Result<_>>()?;
    Ok(MehlerReport {
        eps,
        n_terms: n,
        points: grid.len(),
        max_deviation: rows.iter().map(|r| r.0).fold(0.0, f64::max),
        max_asymmetry: rows.iter().map(|r| r.1).fold(0.0, f64::max),
    })
}

/// Regular `k × k` grid of real pairs on `[lo, hi]²`.
pub fn real_pair_grid(lo: f64, hi: f64, k: usize) -> Vec<(Complex64, Complex64)> {
    let step = if k > 1 {
        (hi - lo) / (k - 1) as f64
    } else {
        0.0
    };
    let pts: Vec<f64> = (0..k).map(|i| lo + step * i as f64).collect();
    pts.iter()
        .flat_map(|&u| {
            pts.iter()
                .map(move |&v| (Complex64::new(u, 0.0), Complex64::new(v, 0.0)))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MehlerIdentityReport {
    pub z: Complex64,
    pub eps: f64,
    pub series: f64,
    pub double_integral: f64,
    pub deviation: f64,
}

/// Compares `Σ_{n<=N} ε^n |∫_{[0,z]} ζ_n|²` with the Mehler double integral
/// over `[0,z]²`. Requires `|ε| e^{2|z|} < 1`.
pub fn mehler_identity_check(
    eps: f64,
    z: Complex64,
    n: usize,
    panels: usize,
) -> Result<MehlerIdentityReport> {
    let limit = (-2.0 * z.norm()).exp();
    if !(eps.abs() < limit) {
        return Err(Error::EpsRegime { eps, limit });
    }
    let c = antiderivatives(n, z)?;
    let mut series = 0.0;
    let mut power = 1.0;
    for v in &c {
        series += power * v.norm_sqr();
        power *= eps;
    }
    let double_integral = mehler_closed_form_sum(eps, z, panels)?;
    Ok(MehlerIdentityReport {
        z,
        eps,
        series,
        double_integral,
        deviation: (series - double_integral).abs(),
    })
}

/// Writes serializable rows as CSV with a header line.
pub fn write_rows_csv<W: Write, T: Serialize>(writer: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn parseval_is_bessel_bounded_and_monotone() {
        let rows = parseval_scan(1.0, &[0, 4, 16, 64, 256]).unwrap();
        assert!(rows
            .windows(2)
            .all(|w| w[1].partial_sum >= w[0].partial_sum));
        assert!(rows.iter().all(|r| r.partial_sum <= 1.0));
        // oracle: 1 − S_64(1) = 0.05122, 1 − S_256(1) = 0.02745
        assert!((rows[3].gap - 0.05122).abs() < 5e-5, "{}", rows[3].gap);
        assert!((rows[4].gap - 0.02745).abs() < 5e-5, "{}", rows[4].gap);
    }

    #[test]
    fn parseval_differences_approach_one() {
        let n = [64, 512];
        let s1 = parseval_scan(1.0, &n).unwrap();
        let s2 = parseval_scan(2.0, &n).unwrap();
        let d: Vec<f64> = (0..2)
            .map(|k| (s2[k].partial_sum - s1[k].partial_sum - 1.0).abs())
            .collect();
        assert!(d[1] < d[0]);
        assert!(d[1] < 0.05);
    }

    #[test]
    fn parseval_rejects_nonpositive_time() {
        assert!(parseval_scan(0.0, &[1]).is_err());
    }

    #[test]
    fn divergence_at_zero_eps_is_single_term() {
        let rows = divergence_scan(1.0, &[0.0], 10).unwrap();
        let c0 = antiderivatives(0, c(0.0, 1.0)).unwrap()[0];
        assert!((rows[0].partial_sum - c0.norm_sqr()).abs() < 1e-15);
        assert!((rows[0].closed_form - rows[0].partial_sum).abs() < 1e-12);
    }

    #[test]
    fn divergence_scan_matches_oracle() {
        let rows = divergence_scan(1.0, &[0.1, 0.5, 0.9], 400).unwrap();
        // oracle: S(0.1) = 0.8672, S(0.5) = 1.989, S(0.9) = 6.985e5
        assert!((rows[0].partial_sum / 0.8672 - 1.0).abs() < 1e-3);
        assert!((rows[1].partial_sum / 1.989 - 1.0).abs() < 1e-3);
        assert!((rows[2].partial_sum / 6.985e5 - 1.0).abs() < 1e-3);
        assert!(strictly_increasing(&rows));
        assert!(rows.iter().all(|r| r.lower_bound <= r.partial_sum));
        for r in &rows[..2] {
            assert!((r.closed_form - r.partial_sum).abs() <= 1e-12 * r.closed_form);
        }
        // ε = 0.9 is still truncated at N = 400
        assert!(
            rows[2].truncation_allowance > 0.0
                && rows[2].truncation_allowance < 1e-3 * rows[2].closed_form
        );
    }

    #[test]
    fn lower_bound_grows_without_limit() {
        let l: Vec<f64> = [0.5, 0.9, 0.99, 0.999]
            .iter()
            .map(|&e| divergence_lower_bound(1.0, e).unwrap())
            .collect();
        assert!(l.windows(2).all(|w| w[1] > 10.0 * w[0]));
    }

    #[test]
    fn mehler_at_zero_eps_is_exact() {
        let grid = real_pair_grid(-2.0, 2.0, 5);
        let r = mehler_consistency(0.0, &grid, 3).unwrap();
        assert!(r.max_deviation < 1e-15);
        assert_eq!(r.max_asymmetry, 0.0);
    }

    #[test]
    fn mehler_series_matches_kernel_on_complex_pairs() {
        let grid = vec![(c(0.3, 0.2), c(-0.5, 0.1)), (c(1.0, -0.4), c(0.2, 0.6))];
        let r = mehler_consistency(0.3, &grid, 200).unwrap();
        assert!(r.max_deviation < 1e-12, "{}", r.max_deviation);
    }

    #[test]
    fn mehler_identity_inside_regime() {
        let r = mehler_identity_check(0.3, c(0.2, 0.4), 80, 8).unwrap();
        assert!(r.deviation < 1e-12, "{r:?}");
        assert!(matches!(
            mehler_identity_check(0.5, c(0.0, 1.0), 80, 8),
            Err(Error::EpsRegime { .. })
        ));
    }

    #[test]
    fn rows_serialize_with_header() {
        let mut buf = Vec::new();
        write_rows_csv(
            &mut buf,
            &[ParsevalRow {
                n: 1,
                partial_sum: 0.5,
                gap: 0.5,
            }],
        )
        .unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "N,partial_sum,gap\n1,0.5,0.5\n"
        );
    }
}
