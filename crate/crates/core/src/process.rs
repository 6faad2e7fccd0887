//! Complex-time processes as truncated order-1 chaos vectors.
//!
//! `B_z = Σ_n (∫_{[0,z]} ζ_n) Z_n`, `N_z = Σ_n ζ_n(z) Z_n`, the weighted
//! family `X_z = Σ_n (∫_{[0,z]} √m ζ_n) Z_n` and the regularized
//! `B_{z,ε} = Σ_n ε^{n/2} (∫_{[0,z]} ζ_n) Z_n`. The coefficient of `Z_n` sits at
//! the unit multi-index `ε_n`.

use std::io::Write;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chaos::{ChaosVector, WeightSequence};
use crate::error::{Error, Result};
use crate::hermite::{c_radius, Convention, HermiteConfig, MAX_RADIUS};
use crate::quadrature::Tolerance;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Headroom factor in `2^p > margin · e^{4R}`.
pub const P_MARGIN: f64 = 1.1;

/// Largest truncation `plan` will pick before giving up on the tail target.
pub const MAX_TERMS: usize = 100_000;

/// Graded-norm order and series truncation for a disk of radius `radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPlan {
    pub radius: f64,
    pub p: u32,
    pub n_terms: usize,
    pub tail_bound: f64,
    pub tol: f64,
    pub c_r: f64,
}

impl TruncationPlan {
    /// Smallest `p` with `2^p > 1.1 e^{4R}` and smallest `N` whose geometric
    /// tail `C_R² Σ_{n>N} e^{4Rn} 2^{-(n+1)p}` is at most `tol²`.
    pub fn new(radius: f64, tol: f64) -> Result<Self> {
        if !(radius > 0.0 && radius <= MAX_RADIUS) {
            return Err(Error::InvalidConfig(format!(
                "radius {radius} must lie in (0, {MAX_RADIUS}]"
            )));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerance {tol} must be positive"
            )));
        }
        let threshold = (P_MARGIN * (4.0 * radius).exp()).log2();
        let mut p = threshold.floor().max(0.0) as u32 + 1;
        while (p as f64) <= threshold {
            p += 1;
        }
        let mut plan = Self {
            radius,
            p,
            n_terms: 0,
            tail_bound: 0.0,
            tol,
            c_r: c_radius(radius),
        };
        let target = 2.0 * tol.ln();
        let n = (0..MAX_TERMS)
            .find(|&n| plan.ln_tail(n) <= target)
            .ok_or_else(|| {
                Error::InvalidConfig(format!("no truncation below {MAX_TERMS} meets tol {tol}"))
            })?;
        plan.n_terms = n;
        plan.tail_bound = plan.ln_tail(n).exp();
        Ok(plan)
    }

    /// Replaces `p`, re-deriving `N` from the tail target.
    pub fn with_p(self, p: u32) -> Result<Self> {
        let plan = Self { p, ..self };
        if !plan.is_feasible() {
            return Err(Error::InvalidConfig(format!(
                "p = {p} violates e^(4R)/2^p < 1 at R = {}",
                self.radius
            )));
        }
        let target = 2.0 * self.tol.ln();
        let n = (0..MAX_TERMS)
            .find(|&n| plan.ln_tail(n) <= target)
            .unwrap_or(MAX_TERMS);
        Ok(Self {
            n_terms: n,
            tail_bound: plan.ln_tail(n).exp(),
            ..plan
        })
    }

    /// Fixes the truncation at `n_terms`; `tail_bound` then reports the actual
    /// tail, which may exceed `tol²`.
    pub fn with_terms(self, n_terms: usize) -> Self {
        Self {
            n_terms,
            tail_bound: self.ln_tail(n_terms).exp(),
            ..self
        }
    }

    /// `e^{4R} / 2^p`.
    pub fn ratio(&self) -> f64 {
        (4.0 * self.radius - self.p as f64 * std::f64::consts::LN_2).exp()
    }

    pub fn is_feasible(&self) -> bool {
        self.ratio() < 1.0
    }

    /// `ln(C_R² Σ_{n>N} e^{4Rn} 2^{-(n+1)p})`.
    pub fn ln_tail(&self, n: usize) -> f64 {
        let q = self.ratio();
        2.0 * self.c_r.ln() - self.p as f64 * std::f64::consts::LN_2 + (n as f64 + 1.0) * q.ln()
            - (-q).ln_1p()
    }

    pub fn tail(&self, n: usize) -> f64 {
        self.ln_tail(n).exp()
    }

    /// `Σ_{n<=N} w(n)² e^{4Rn} 2^{-(n+1)p}` for a per-degree factor `w`.
    fn weighted_geometric_sum(&self, w: impl Fn(usize) -> f64) -> f64 {
        let ln2 = std::f64::consts::LN_2;
        (0..=self.n_terms)
            .map(|n| {
                let nf = n as f64;
                w(n).powi(2) * (4.0 * self.radius * nf - (nf + 1.0) * self.p as f64 * ln2).exp()
            })
            .sum()
    }

    /// `(Σ_{n<=N} e^{4Rn} 2^{-(n+1)p})^{1/2}`.
    pub fn geometric_norm(&self) -> f64 {
        self.weighted_geometric_sum(|_| 1.0).sqrt()
    }
}

/// Closed catalog of weights `m` with an analytic square root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightFunction {
    /// `m(u) = (1+u²)^{2n}`, `√m = (1+u²)^n`.
    PolyPower(u32),
    /// `m(u) = e^{u^{2n}}`.
    ExpPlus(u32),
    /// `m(u) = e^{−u^{2n}}`.
    ExpMinus(u32),
}

impl WeightFunction {
    pub fn m(&self, u: Complex64) -> Complex64 {
        let s = self.sqrt_m(u);
        s * s
    }

    pub fn sqrt_m(&self, u: Complex64) -> Complex64 {
        match *self {
            WeightFunction::PolyPower(n) => (u * u + 1.0).powu(n),
            WeightFunction::ExpPlus(n) => (u.powu(2 * n) * 0.5).exp(),
            WeightFunction::ExpMinus(n) => (-u.powu(2 * n) * 0.5).exp(),
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, WeightFunction::PolyPower(0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessSpec {
    Brownian,
    WhiteNoise,
    Weighted(WeightFunction),
    Regularized(f64),
}

impl ProcessSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ProcessSpec::Regularized(eps) if !(0.0..1.0).contains(&eps) => {
                Err(Error::EpsOutOfRange { eps })
            }
            _ => Ok(()),
        }
    }
}

/// Coefficient builders bound to one disk, truncation and weight sequence.
#[derive(Debug, Clone)]
pub struct ChaosProcesses {
    hermite: HermiteConfig,
    plan: TruncationPlan,
    weights: WeightSequence,
}

impl ChaosProcesses {
    pub fn new(plan: TruncationPlan) -> Result<Self> {
        Self::with_convention(plan, Convention::Standard)
    }

    pub fn with_convention(plan: TruncationPlan, convention: Convention) -> Result<Self> {
        let quad_tol = (plan.tol / (plan.n_terms as f64 + 1.0)).min(1e-3);
        let hermite = HermiteConfig::new(plan.n_terms.max(1), plan.radius, quad_tol, convention)?;
        Ok(Self {
            hermite,
            plan,
            weights: WeightSequence::dyadic(),
        })
    }

    pub fn plan(&self) -> &TruncationPlan {
        &self.plan
    }

    pub fn hermite(&self) -> &HermiteConfig {
        &self.hermite
    }

    pub fn weights(&self) -> &WeightSequence {
        &self.weights
    }

    /// `‖f‖_{-p}` at the plan's order.
    pub fn norm(&self, f: &ChaosVector) -> f64 {
        f.norm_minus(self.plan.p, &self.weights)
    }

    fn coefficient_tol(&self) -> Tolerance {
        Tolerance::absolute(self.hermite.quad_tol)
    }

    /// `∫_{[0,z]} ζ_n` for `n <= N`.
    pub fn brownian_coefficients(&self, z: Complex64) -> Result<Vec<Complex64>> {
        self.hermite
            .antiderivative_table(self.plan.n_terms, z, self.coefficient_tol())
    }

    pub fn white_noise_coefficients(&self, z: Complex64) -> Result<Vec<Complex64>> {
        self.hermite.zeta_table(self.plan.n_terms, z)
    }

    pub fn weighted_coefficients(&self, z: Complex64, m: WeightFunction) -> Result<Vec<Complex64>> {
        if m.is_unit() {
            return self.brownian_coefficients(z);
        }
        let w = move |u: Complex64| m.sqrt_m(u);
        self.hermite
            .segment_integrals(self.plan.n_terms, ZERO, z, self.coefficient_tol(), Some(&w))
    }

    pub fn regularized_coefficients(&self, z: Complex64, eps: f64) -> Result<Vec<Complex64>> {
        ProcessSpec::Regularized(eps).validate()?;
        let mut c = self.brownian_coefficients(z)?;
        apply_damping(&mut c, eps);
        Ok(c)
    }

    /// `ε^{n/2} ζ_n(z)`, the derivative of `z ↦ B_{z,ε}`.
    pub fn regularized_noise_coefficients(&self, z: Complex64, eps: f64) -> Result<Vec<Complex64>> {
        ProcessSpec::Regularized(eps).validate()?;
        let mut c = self.white_noise_coefficients(z)?;
        apply_damping(&mut c, eps);
        Ok(c)
    }

    pub fn coefficients(&self, spec: ProcessSpec, z: Complex64) -> Result<Vec<Complex64>> {
        spec.validate()?;
        match spec {
            ProcessSpec::Brownian => self.brownian_coefficients(z),
            ProcessSpec::WhiteNoise => self.white_noise_coefficients(z),
            ProcessSpec::Weighted(m) => self.weighted_coefficients(z, m),
            ProcessSpec::Regularized(eps) => self.regularized_coefficients(z, eps),
        }
    }

    pub fn process(&self, spec: ProcessSpec, z: Complex64) -> Result<ChaosVector> {
        Ok(ChaosVector::from_order1(&self.coefficients(spec, z)?))
    }

    pub fn brownian(&self, z: Complex64) -> Result<ChaosVector> {
        self.process(ProcessSpec::Brownian, z)
    }

    pub fn white_noise(&self, z: Complex64) -> Result<ChaosVector> {
        self.process(ProcessSpec::WhiteNoise, z)
    }

    pub fn weighted(&self, z: Complex64, m: WeightFunction) -> Result<ChaosVector> {
        self.process(ProcessSpec::Weighted(m), z)
    }

    pub fn regularized(&self, z: Complex64, eps: f64) -> Result<ChaosVector> {
        self.process(ProcessSpec::Regularized(eps), z)
    }

    /// Uniform bound `R C_R (Σ e^{4Rn} 2^{-(n+1)p})^{1/2} + tol` on `‖B_z‖_{-p}`.
    pub fn brownian_norm_bound(&self) -> f64 {
        self.plan.radius * self.plan.c_r * self.plan.geometric_norm() + self.plan.tol
    }

    /// Uniform bound `C_R (Σ e^{4Rn} 2^{-(n+1)p})^{1/2}` on `‖N_z‖_{-p}`.
    pub fn white_noise_norm_bound(&self) -> f64 {
        self.plan.c_r * self.plan.geometric_norm()
    }

    /// Constant `C` in `‖(B_{z0+h} − B_{z0})/h − N_{z0}‖_{-p} <= C |h|`.
    pub fn difference_quotient_constant(&self) -> f64 {
        self.plan.c_r
            * self
                .plan
                .weighted_geometric_sum(|n| 1.0 + (2.0 * n as f64).sqrt())
                .sqrt()
    }

    /// Difference quotients of `B` at `z0` along `±h`, `±ih` for every step.
    pub fn analyticity_check(&self, z0: Complex64, steps: &[f64]) -> Result<AnalyticityReport> {
        let h_max = steps.iter().copied().fold(0.0, f64::max);
        if z0.norm() + h_max > self.plan.radius * (1.0 + 1e-12) {
            return Err(Error::OutsideDisk {
                z: z0 + h_max,
                radius: self.plan.radius,
            });
        }
        let noise = self.white_noise(z0)?;
        let constant = self.difference_quotient_constant();
        let directions = [
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -1.0),
        ];
        let mut rows = Vec::with_capacity(steps.len());
        for &h in steps {
            let mut quotients = Vec::with_capacity(4);
            let mut residuals = [0.0; 4];
            for (d, dir) in directions.iter().enumerate() {
                let step = dir * h;
                // ∫_{[z0, z0+step]} ζ_n directly, avoiding cancellation in B_{z0+step} − B_{z0}
                let tol = Tolerance::absolute(self.hermite.quad_tol * h);
                let inc =
                    self.hermite
                        .segment_integrals(self.plan.n_terms, z0, z0 + step, tol, None)?;
                let q = ChaosVector::from_order1(&inc).scale(step.inv());
                residuals[d] = self.norm(&q.sub(&noise));
                quotients.push(q);
            }
            let mut spread = 0.0f64;
            for i in 0..4 {
                for j in i + 1..4 {
                    spread = spread.max(self.norm(&quotients[i].sub(&quotients[j])));
                }
            }
            rows.push(AnalyticityRow {
                h,
                residuals,
                bound: constant * h,
                direction_spread: spread,
            });
        }
        let observed_order = (0..4)
            .map(|d| {
                let pts: Vec<(f64, f64)> = rows
                    .iter()
                    .map(|r| (r.h.ln(), r.residuals[d].ln()))
                    .collect();
                least_squares_slope(&pts)
            })
            .fold(f64::INFINITY, f64::min);
        Ok(AnalyticityReport {
            z0,
            rows,
            observed_order,
            constant,
        })
    }

    /// `‖B_{z1} − B_{z2}‖_{-p}` against `|z1 − z2| max(R,1) C_R (Σ e^{4Rn}2^{-(n+1)p})^{1/2} + 2 tol`.
    pub fn continuity_check(&self, z1: Complex64, z2: Complex64) -> Result<ContinuityReport> {
        let norm = self.norm(&self.brownian(z1)?.sub(&self.brownian(z2)?));
        let bound = (z1 - z2).norm()
            * self.plan.radius.max(1.0)
            * self.plan.c_r
            * self.plan.geometric_norm()
            + 2.0 * self.plan.tol;
        Ok(ContinuityReport {
            z1,
            z2,
            norm,
            bound,
            ok: norm <= bound,
        })
    }

    /// `(B_z ⊗ conj(B_w)) f = B_z ⟨conj(B_w), f⟩`.
    pub fn covariance_operator(
        &self,
        z: Complex64,
        w: Complex64,
        f: &ChaosVector,
    ) -> Result<ChaosVector> {
        let s = self.brownian(w)?.conj().pairing(f);
        Ok(self.brownian(z)?.scale(s))
    }

    /// Monte Carlo realizations `B_z(ω) = Σ_n coeff_n(z) Z_n(ω)` on `grid`.
    ///
    /// Sample `s` draws its `N+1` standard normals from ChaCha8 seeded with
    /// `seed` on stream `s`, so every sample is reproducible on its own and the
    /// table does not depend on thread scheduling.
    pub fn sample_paths(
        &self,
        seed: u64,
        grid: &[Complex64],
        n_samples: usize,
    ) -> Result<TrajectoryTable> {
        let coeffs: Vec<Vec<Complex64>> = grid
            .iter()
            .map(|&z| self.brownian_coefficients(z))
            .collect::<Result<_>>()?;
        let dim = self.plan.n_terms + 1;
        let values: Vec<Vec<Complex64>> = (0..n_samples)
            .into_par_iter()
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(s as u64);
                let normals: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                coeffs
                    .iter()
                    .map(|c| {
                        c.iter()
                            .zip(&normals)
                            .fold(ZERO, |acc, (a, z)| acc + *a * *z)
                    })
                    .collect()
            })
            .collect();
        Ok(TrajectoryTable {
            seed,
            grid: grid.to_vec(),
            values,
        })
    }
}

fn apply_damping(c: &mut [Complex64], eps: f64) {
    let root = eps.sqrt();
    let mut factor = 1.0;
    for v in c.iter_mut() {
        *v *= factor;
        factor *= root;
    }
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyticityRow {
    pub h: f64,
    /// Residuals along `+h, −h, +ih, −ih`.
    pub residuals: [f64; 4],
    pub bound: f64,
    pub direction_spread: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyticityReport {
    pub z0: Complex64,
    pub rows: Vec<AnalyticityRow>,
    /// Smallest least-squares slope of `ln residual` against `ln h` over the
    /// four directions.
    pub observed_order: f64,
    pub constant: f64,
}

impl AnalyticityReport {
    pub fn within_bound(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.residuals.iter().all(|&x| x <= r.bound))
    }

    /// Every pair of directions agrees within twice the residual bound.
    pub fn directions_agree(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.direction_spread <= 2.0 * r.bound)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ContinuityReport {
    pub z1: Complex64,
    pub z2: Complex64,
    pub norm: f64,
    pub bound: f64,
    pub ok: bool,
}

/// Sampled trajectories; `values[sample][grid point]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    pub seed: u64,
    pub grid: Vec<Complex64>,
    pub values: Vec<Vec<Complex64>>,
}

impl TrajectoryTable {
    pub fn n_samples(&self) -> usize {
        self.values.len()
    }

    pub fn empirical_mean(&self, i: usize) -> Complex64 {
        self.values.iter().map(|row| row[i]).sum::<Complex64>() / self.n_samples() as f64
    }

    /// Unconjugated empirical covariance `mean(B_i B_j) − mean(B_i) mean(B_j)`.
    pub fn empirical_covariance(&self, i: usize, j: usize) -> Complex64 {
        let n = self.n_samples() as f64;
        let cross = self
            .values
            .iter()
            .map(|row| row[i] * row[j])
            .sum::<Complex64>()
            / n;
        cross - self.empirical_mean(i) * self.empirical_mean(j)
    }

    /// CSV with header `re_z,im_z,sample_id,re_B,im_B`, sample-major.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["re_z", "im_z", "sample_id", "re_B", "im_B"])?;
        for (s, row) in self.values.iter().enumerate() {
            for (z, b) in self.grid.iter().zip(row) {
                w.serialize((z.re, z.im, s, b.re, b.im))?;
            }
        }
        w.flush()?;
        Ok(())
    }
}
