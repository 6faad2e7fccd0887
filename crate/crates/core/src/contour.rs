//! Wick contour integrals `∫_C f(z) ⋆ N_z dz` as Riemann sums in `F_{-p}`.
//!
//! Each contour piece is parametrized over `s ∈ [0, 1]`. A refinement level
//! with `M` panels per piece uses the composite midpoint rule; levels are
//! refined (×2 or ×3) until two consecutive sums differ by at most `tol` in
//! the graded norm, and the finer sum is returned.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::chaos::ChaosVector;
use crate::error::{Error, Result};
use crate::hermite::mehler_kernel;
use crate::process::ChaosProcesses;
use crate::quadrature::{tensor_unit_square, GaussLegendre};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default refinement-level cap.
pub const MAX_LEVEL: usize = 20;

/// One smooth piece of a contour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContourPiece {
    Segment {
        a: Complex64,
        b: Complex64,
    },
    Arc {
        center: Complex64,
        radius: f64,
        theta0: f64,
        theta1: f64,
    },
}

impl ContourPiece {
    pub fn point(&self, s: f64) -> Complex64 {
        match *self {
            ContourPiece::Segment { a, b } => a + (b - a) * s,
            ContourPiece::Arc {
                center,
                radius,
                theta0,
                theta1,
            } => center + Complex64::from_polar(radius, theta0 + (theta1 - theta0) * s),
        }
    }

    /// `dγ/ds`.
    pub fn derivative(&self, s: f64) -> Complex64 {
        match *self {
            ContourPiece::Segment { a, b } => b - a,
            ContourPiece::Arc {
                center: _,
                radius,
                theta0,
                theta1,
            } => {
                let dtheta = theta1 - theta0;
                Complex64::i() * Complex64::from_polar(radius, theta0 + dtheta * s) * dtheta
            }
        }
    }

    pub fn reversed(&self) -> ContourPiece {
        match *self {
            ContourPiece::Segment { a, b } => ContourPiece::Segment { a: b, b: a },
            ContourPiece::Arc {
                center,
                radius,
                theta0,
                theta1,
            } => ContourPiece::Arc {
                center,
                radius,
                theta0: theta1,
                theta1: theta0,
            },
        }
    }

    fn max_modulus(&self) -> f64 {
        match *self {
            ContourPiece::Segment { a, b } => a.norm().max(b.norm()),
            ContourPiece::Arc { .. } => (0..=1024)
                .map(|k| self.point(k as f64 / 1024.0).norm())
                .fold(0.0, f64::max),
        }
    }
}

/// Piecewise-smooth path, traversed piece by piece.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contour {
    pub id: String,
    pub pieces: Vec<ContourPiece>,
}

impl Contour {
    pub fn segment(a: Complex64, b: Complex64) -> Self {
        Self {
            id: format!("segment:{},{}", fmt_complex(a), fmt_complex(b)),
            pieces: vec![ContourPiece::Segment { a, b }],
        }
    }

    pub fn arc(center: Complex64, radius: f64, theta0: f64, theta1: f64) -> Self {
        Self {
            id: format!("arc:{},{radius},{theta0},{theta1}", fmt_complex(center)),
            pieces: vec![ContourPiece::Arc {
                center,
                radius,
                theta0,
                theta1,
            }],
        }
    }

    pub fn polyline(points: &[Complex64]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::ParseContour(
                "a polyline needs at least two points".into(),
            ));
        }
        let pieces = points
            .windows(2)
            .map(|w| ContourPiece::Segment { a: w[0], b: w[1] })
            .collect();
        let id = format!(
            "polyline:{}",
            points
                .iter()
                .map(|z| fmt_complex(*z))
                .collect::<Vec<_>>()
                .join(",")
        );
        Ok(Self { id, pieces })
    }

    /// Parses `segment:a,b`, `arc:c,r,θ0,θ1` or `polyline:z0,z1,…`, where each
    /// complex literal looks like `0.5`, `2i`, `-i` or `0.3-1.2i`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| Error::ParseContour(format!("missing ':' in {spec:?}")))?;
        let fields: Vec<&str> = rest.split(',').map(str::trim).collect();
        let mut contour = match kind.trim() {
            "segment" => {
                if fields.len() != 2 {
                    return Err(Error::ParseContour(format!(
                        "segment needs 2 points, got {}",
                        fields.len()
                    )));
                }
                Self::segment(parse_complex(fields[0])?, parse_complex(fields[1])?)
            }
            "arc" => {
                if fields.len() != 4 {
                    return Err(Error::ParseContour(format!(
                        "arc needs c,r,theta0,theta1, got {} fields",
                        fields.len()
                    )));
                }
                let real = |s: &str| {
                    s.parse::<f64>()
                        .map_err(|e| Error::ParseContour(format!("{s:?}: {e}")))
                };
                Self::arc(
                    parse_complex(fields[0])?,
                    real(fields[1])?,
                    real(fields[2])?,
                    real(fields[3])?,
                )
            }
            "polyline" => Self::polyline(
                &fields
                    .iter()
                    .map(|f| parse_complex(f))
                    .collect::<Result<Vec<_>>>()?,
            )?,
            other => {
                return Err(Error::ParseContour(format!(
                    "unknown contour kind {other:?}"
                )))
            }
        };
        contour.id = spec.trim().to_string();
        Ok(contour)
    }

    pub fn reversed(&self) -> Contour {
        Contour {
            id: format!("reverse({})", self.id),
            pieces: self
                .pieces
                .iter()
                .rev()
                .map(ContourPiece::reversed)
                .collect(),
        }
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Contour) -> Contour {
        let mut pieces = self.pieces.clone();
        pieces.extend_from_slice(&other.pieces);
        Contour {
            id: format!("{}+{}", self.id, other.id),
            pieces,
        }
    }

    pub fn start(&self) -> Complex64 {
        self.pieces[0].point(0.0)
    }

    pub fn end(&self) -> Complex64 {
        self.pieces[self.pieces.len() - 1].point(1.0)
    }

    pub fn max_modulus(&self) -> f64 {
        self.pieces
            .iter()
            .map(ContourPiece::max_modulus)
            .fold(0.0, f64::max)
    }
}

fn fmt_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im < 0.0 {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` (also `i`, `-i`).
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let s = s.trim();
    let bad = |e: &dyn std::fmt::Display| {
        Error::ParseContour(format!("{s:?} is not a complex number: {e}"))
    };
    let real = |t: &str| t.parse::<f64>().map_err(|e| bad(&e));
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex64::new(real(s)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re_part, im_part) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("", body),
    };
    let im = match im_part {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => real(t)?,
    };
    let re = if re_part.is_empty() {
        0.0
    } else {
        real(re_part)?
    };
    Ok(Complex64::new(re, im))
}

/// Catalog of integrands `z ↦ f(z)`.
#[derive(Debug, Clone, PartialEq)]
pub enum IntegrandField {
    Constant(ChaosVector),
    /// `z ↦ scale · B_z`.
    Brownian {
        scale: Complex64,
    },
    /// `z ↦ scale · B_{z,ε}`.
    Regularized {
        eps: f64,
        scale: Complex64,
    },
}

impl IntegrandField {
    pub fn eval(&self, z: Complex64, processes: &ChaosProcesses) -> Result<ChaosVector> {
        match self {
            IntegrandField::Constant(v) => Ok(v.clone()),
            IntegrandField::Brownian { scale } => {
                let c: Vec<Complex64> = processes
                    .brownian_coefficients(z)?
                    .iter()
                    .map(|v| v * scale)
                    .collect();
                Ok(ChaosVector::from_order1(&c))
            }
            IntegrandField::Regularized { eps, scale } => {
                let c: Vec<Complex64> = processes
                    .regularized_coefficients(z, *eps)?
                    .iter()
                    .map(|v| v * scale)
                    .collect();
                Ok(ChaosVector::from_order1(&c))
            }
        }
    }
}

/// Which white noise multiplies the integrand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// `N_z`.
    Standard,
    /// `N_{z,ε} = Σ ε^{n/2} ζ_n(z) Z_n`.
    Regularized(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Refinement {
    Dyadic,
    Triadic,
}

impl Refinement {
    fn factor(self) -> usize {
        match self {
            Refinement::Dyadic => 2,
            Refinement::Triadic => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegrationOptions {
    pub tol: f64,
    pub refinement: Refinement,
    pub max_level: usize,
    pub noise: NoiseKind,
}

impl IntegrationOptions {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            refinement: Refinement::Dyadic,
            max_level: MAX_LEVEL,
            noise: NoiseKind::Standard,
        }
    }

    pub fn with_refinement(self, refinement: Refinement) -> Self {
        Self { refinement, ..self }
    }

    pub fn with_noise(self, noise: NoiseKind) -> Self {
        Self { noise, ..self }
    }
}

/// One refinement level of the Riemann sums.
#[derive(Debug, Clone, Serialize)]
pub struct LevelRecord {
    /// Panels per contour piece.
    pub panels: usize,
    /// `‖S_M − S_{M_prev}‖_{-p}`; absent on the first level.
    pub gap: Option<f64>,
    pub sum_norm: f64,
    /// `max_t ‖f(γ(t)) ⋆ N_{γ(t)} γ'(t)‖_{-p}` over this level's nodes.
    pub max_integrand_norm: f64,
}

#[derive(Debug, Clone)]
pub struct IntegralReport {
    pub contour_id: String,
    pub p: u32,
    pub n_terms: usize,
    pub panels: usize,
    pub levels: Vec<LevelRecord>,
    pub value: ChaosVector,
}

impl IntegralReport {
    /// Parameter length of the contour (one unit per piece).
    pub fn parameter_length(&self, contour: &Contour) -> f64 {
        contour.pieces.len() as f64
    }

    /// JSON summary; `vector_ref` names wherever the value was stored.
    pub fn summary(&self, vector_ref: &str) -> serde_json::Value {
        serde_json::json!({
            "contour_id": self.contour_id,
            "p": self.p,
            "N": self.n_terms,
            "panels": self.panels,
            "residuals": self.levels.iter().filter_map(|l| l.gap).collect::<Vec<_>>(),
            "levels": self.levels,
            "final_vector": vector_ref,
        })
    }
}

/// Midpoint node `s = num/den` keyed by its reduced fraction.
type NodeKey = (usize, u64, u64);

fn reduced(num: u64, den: u64) -> (u64, u64) {
    let (mut a, mut b) = (num, den);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    (num / a, den / a)
}

/// `∫_C f(z) ⋆ N_z dz` with the Cauchy stopping rule in `F_{-p}`.
pub fn integrate_wick(
    f: &IntegrandField,
    contour: &Contour,
    processes: &ChaosProcesses,
    options: &IntegrationOptions,
) -> Result<IntegralReport> {
    let radius = processes.plan().radius;
    if contour.max_modulus() > radius * (1.0 + 1e-12) {
        return Err(Error::OutsideDisk {
            z: contour.end(),
            radius,
        });
    }
    let node_value = |z: Complex64| -> Result<ChaosVector> {
        let noise = match options.noise {
            NoiseKind::Standard => processes.white_noise_coefficients(z)?,
            NoiseKind::Regularized(eps) => processes.regularized_noise_coefficients(z, eps)?,
        };
        Ok(f.eval(z, processes)?
            .wick(&ChaosVector::from_order1(&noise)))
    };

    let factor = options.refinement.factor();
    let reuse = options.refinement == Refinement::Triadic;
    let mut cache: HashMap<NodeKey, ChaosVector> = HashMap::new();
    let mut levels: Vec<LevelRecord> = Vec::new();
    let mut previous: Option<ChaosVector> = None;
    let mut panels = factor;
    for _ in 0..options.max_level {
        let mut next_cache = HashMap::new();
        let mut sum = ChaosVector::zero();
        let mut max_integrand = 0.0f64;
        for (pi, piece) in contour.pieces.iter().enumerate() {
            for j in 0..panels {
                let (num, den) = reduced(2 * j as u64 + 1, 2 * panels as u64);
                let key = (pi, num, den);
                let s = num as f64 / den as f64;
                let value = match cache.remove(&key) {
                    Some(v) => v,
                    None => node_value(piece.point(s))?,
                };
                let dz = piece.derivative(s);
                max_integrand = max_integrand.max(processes.norm(&value) * dz.norm());
                sum.axpy(dz / panels as f64, &value);
                if reuse {
                    next_cache.insert(key, value);
                }
            }
        }
        cache = next_cache;
        let gap = previous.as_ref().map(|prev| processes.norm(&sum.sub(prev)));
        levels.push(LevelRecord {
            panels,
            gap,
            sum_norm: processes.norm(&sum),
            max_integrand_norm: max_integrand,
        });
        if matches!(gap, Some(g) if g <= options.tol) {
            return Ok(IntegralReport {
                contour_id: contour.id.clone(),
                p: processes.plan().p,
                n_terms: processes.plan().n_terms,
                panels,
                levels,
                value: sum,
            });
        }
        previous = Some(sum);
        panels *= factor;
    }
    Err(Error::NoConvergence {
        levels: options.max_level,
        gap: levels.last().and_then(|l| l.gap).unwrap_or(f64::INFINITY),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ItoRealReport {
    pub t: f64,
    pub residual_norm: f64,
    pub antisymmetry_max: f64,
    /// `|Σ_{n<=N} (∫_0^t ζ_n)² − t|`.
    pub parseval_gap: f64,
    pub tol: f64,
    pub panels: usize,
}

impl ItoRealReport {
    pub fn residual_ok(&self) -> bool {
        self.residual_norm <= self.tol + self.parseval_gap
    }
}

/// Composite panels used for the `A_{n,m}` quadrature.
pub const ANTISYMMETRY_PANELS: usize = 16;

/// Checks `B_t² = ∫_0^t 2 B_u ⋆ N_u du + t` in `F_{-p}` and the cancellation
/// `A_{n,m} + A_{m,n} = 0` with `A_{n,m} = c_n c_m − 2 ∫_0^t c_n(u) ζ_m(u) du`.
pub fn ito_check_real(
    t: f64,
    processes: &ChaosProcesses,
    options: &IntegrationOptions,
) -> Result<ItoRealReport> {
    if !(t > 0.0 && t <= processes.plan().radius) {
        return Err(Error::InvalidConfig(format!("t = {t} must lie in (0, R]")));
    }
    let tz = Complex64::new(t, 0.0);
    let c = processes.brownian_coefficients(tz)?;
    let b = ChaosVector::from_order1(&c);
    let lhs = b.pointwise_product_order1(&b)?;
    let integrand = IntegrandField::Brownian {
        scale: Complex64::new(2.0, 0.0),
    };
    let report = integrate_wick(&integrand, &Contour::segment(ZERO, tz), processes, options)?;
    let mut rhs = report.value.clone();
    rhs.add_to(crate::chaos::MultiIndex::zero(), tz);
    let residual_norm = processes.norm(&lhs.sub(&rhs));
    let parseval_gap = (c.iter().map(|v| v * v).sum::<Complex64>() - tz).norm();

    let n = c.len();
    let mut inner = vec![ZERO; n * n];
    let h = t / ANTISYMMETRY_PANELS as f64;
    for panel in 0..ANTISYMMETRY_PANELS {
        for (u, w) in GaussLegendre::panel().mapped(panel as f64 * h, (panel + 1) as f64 * h) {
            let uz = Complex64::new(u, 0.0);
            let cu = processes.brownian_coefficients(uz)?;
            let zu = processes.white_noise_coefficients(uz)?;
            for (i, ci) in cu.iter().enumerate() {
                for (j, zj) in zu.iter().enumerate() {
                    inner[i * n + j] += ci * zj * w;
                }
            }
        }
    }
    let mut antisymmetry_max = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let a_ij = c[i] * c[j] - inner[i * n + j] * 2.0;
            let a_ji = c[j] * c[i] - inner[j * n + i] * 2.0;
            antisymmetry_max = antisymmetry_max.max((a_ij + a_ji).norm());
        }
    }
    Ok(ItoRealReport {
        t,
        residual_norm,
        antisymmetry_max,
        parseval_gap,
        tol: options.tol,
        panels: report.panels,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ItoRegularizedReport {
    pub z: Complex64,
    pub eps: f64,
    pub residual_norm: f64,
    /// `Σ_{n<=N} ε^n (∫_{[0,z]} ζ_n)²`.
    pub correction_value: Complex64,
    /// `∬_{[0,z]²}` of the Mehler kernel.
    pub correction_closed_form: Complex64,
    pub tol: f64,
    pub panels: usize,
}

impl ItoRegularizedReport {
    pub fn correction_gap(&self) -> f64 {
        (self.correction_value - self.correction_closed_form).norm()
    }
}

/// Tensor panels per axis for the closed-form Mehler double integral.
pub const MEHLER_PANELS: usize = 8;

/// `z² ∬_{[0,1]²} K_ε(zs, zr) ds dr`, the Mehler double integral over `[0,z]²`.
pub fn mehler_double_integral(
    eps: f64,
    z: Complex64,
    w: Complex64,
    panels: usize,
) -> Result<Complex64> {
    mehler_kernel(eps, ZERO, ZERO)?;
    Ok(tensor_unit_square(panels, |s, r| {
        mehler_kernel(eps, z * s, w * r).unwrap_or(ZERO)
    }) * z
        * w)
}

/// Upper end of the admissible `ε` for the regularized check at `z`.
pub fn regularized_eps_limit(z: Complex64) -> f64 {
    (1.0f64).min((-2.0 * z.norm()).exp() / 1.01)
}

/// Checks `B_{z,ε}² = ∫_{[0,z]} 2 B_{u,ε} ⋆ N_{u,ε} du + Σ_n ε^n (∫_{[0,z]} ζ_n)²`.
pub fn ito_check_regularized(
    z: Complex64,
    eps: f64,
    processes: &ChaosProcesses,
    options: &IntegrationOptions,
) -> Result<ItoRegularizedReport> {
    let limit = regularized_eps_limit(z);
    if !(eps >= 0.0 && eps < limit) {
        return Err(Error::EpsRegime { eps, limit });
    }
    let c = processes.regularized_coefficients(z, eps)?;
    let b = ChaosVector::from_order1(&c);
    let lhs = b.pointwise_product_order1(&b)?;
    let correction_value: Complex64 = c.iter().map(|v| v * v).sum();
    let integrand = IntegrandField::Regularized {
        eps,
        scale: Complex64::new(2.0, 0.0),
    };
    let opts = options.with_noise(NoiseKind::Regularized(eps));
    let report = integrate_wick(&integrand, &Contour::segment(ZERO, z), processes, &opts)?;
    let mut rhs = report.value.clone();
    rhs.add_to(crate::chaos::MultiIndex::zero(), correction_value);
    let residual_norm = processes.norm(&lhs.sub(&rhs));
    let correction_closed_form = mehler_double_integral(eps, z, z, MEHLER_PANELS)?;
    Ok(ItoRegularizedReport {
        z,
        eps,
        residual_norm,
        correction_value,
        correction_closed_form,
        tol: options.tol,
        panels: report.panels,
    })
}

/// Full turn of the circle `|z| = r` as an arc contour.
pub fn circle(r: f64) -> Contour {
    Contour::arc(ZERO, r, 0.0, 2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::MultiIndex;
    use crate::process::TruncationPlan;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn small() -> ChaosProcesses {
        ChaosProcesses::new(TruncationPlan::new(1.0, 1e-6).unwrap().with_terms(12)).unwrap()
    }

    #[test]
    fn parses_complex_literals() {
        assert_eq!(parse_complex("0.5").unwrap(), c(0.5, 0.0));
        assert_eq!(parse_complex("2i").unwrap(), c(0.0, 2.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("0.3-1.2i").unwrap(), c(0.3, -1.2));
        assert_eq!(parse_complex("-1e-3+2e-2i").unwrap(), c(-1e-3, 2e-2));
        assert_eq!(parse_complex("1e+2i").unwrap(), c(0.0, 100.0));
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("1+xi").is_err());
    }

    #[test]
    fn parses_contours() {
        let s = Contour::parse("segment:0,0.5+0.5i").unwrap();
        assert_eq!(
            s.pieces,
            vec![ContourPiece::Segment {
                a: c(0.0, 0.0),
                b: c(0.5, 0.5)
            }]
        );
        assert_eq!(s.id, "segment:0,0.5+0.5i");
        let a = Contour::parse("arc:0,0.5,0,3.141592653589793").unwrap();
        assert!((a.end() - c(-0.5, 0.0)).norm() < 1e-15);
        let p = Contour::parse("polyline:0,1,1+i").unwrap();
        assert_eq!(p.pieces.len(), 2);
        assert!(Contour::parse("spiral:0,1").is_err());
        assert!(Contour::parse("segment:0").is_err());
        assert!(Contour::parse("polyline:0").is_err());
    }

    #[test]
    fn arc_derivative_matches_finite_difference() {
        let piece = ContourPiece::Arc {
            center: c(0.1, 0.2),
            radius: 0.4,
            theta0: 0.3,
            theta1: 2.0,
        };
        let s = 0.37;
        let h = 1e-6;
        let fd = (piece.point(s + h) - piece.point(s - h)) / (2.0 * h);
        assert!((fd - piece.derivative(s)).norm() < 1e-8);
    }

    #[test]
    fn zero_integrand_gives_zero() {
        let proc = small();
        let r = integrate_wick(
            &IntegrandField::Constant(ChaosVector::zero()),
            &Contour::segment(ZERO, c(0.5, 0.0)),
            &proc,
            &IntegrationOptions::new(1e-8),
        )
        .unwrap();
        assert!(r.value.is_empty());
    }

    #[test]
    fn wick_unit_integrates_to_brownian_motion() {
        let proc = small();
        let t = c(0.8, 0.0);
        let r = integrate_wick(
            &IntegrandField::Constant(ChaosVector::one()),
            &Contour::segment(ZERO, t),
            &proc,
            &IntegrationOptions::new(1e-9),
        )
        .unwrap();
        let b = proc.brownian(t).unwrap();
        assert!(proc.norm(&r.value.sub(&b)) < 1e-9);
    }

    #[test]
    fn reversal_negates() {
        let proc = small();
        let arc = Contour::arc(c(0.0, 0.0), 0.6, 0.2, 1.4);
        let f = IntegrandField::Brownian { scale: c(1.0, 0.0) };
        let opts = IntegrationOptions::new(1e-9);
        let fwd = integrate_wick(&f, &arc, &proc, &opts).unwrap().value;
        let back = integrate_wick(&f, &arc.reversed(), &proc, &opts)
            .unwrap()
            .value;
        assert!(proc.norm(&fwd.add(&back)) < 1e-12);
    }

    #[test]
    fn exact_wick_antiderivative_around_a_closed_loop() {
        // ∮ N_z dz = 0 for the entire coefficients ζ_n
        let proc = small();
        let r = integrate_wick(
            &IntegrandField::Constant(ChaosVector::one()),
            &circle(0.7),
            &proc,
            &IntegrationOptions::new(1e-10),
        )
        .unwrap();
        assert!(proc.norm(&r.value) < 1e-10);
    }

    #[test]
    fn level_cap_reports_no_convergence() {
        let proc = small();
        let opts = IntegrationOptions {
            max_level: 2,
            ..IntegrationOptions::new(1e-30)
        };
        let e = integrate_wick(
            &IntegrandField::Brownian { scale: c(1.0, 0.0) },
            &Contour::segment(ZERO, c(0.5, 0.0)),
            &proc,
            &opts,
        );
        assert!(matches!(e, Err(Error::NoConvergence { levels: 2, .. })));
    }

    #[test]
    fn contour_outside_disk_is_rejected() {
        let proc = small();
        let e = integrate_wick(
            &IntegrandField::Constant(ChaosVector::one()),
            &Contour::segment(ZERO, c(1.5, 0.0)),
            &proc,
            &IntegrationOptions::new(1e-6),
        );
        assert!(matches!(e, Err(Error::OutsideDisk { .. })));
    }

    #[test]
    fn ito_real_vanishes_near_zero_time() {
        let proc = small();
        let r = ito_check_real(1e-4, &proc, &IntegrationOptions::new(1e-12)).unwrap();
        assert!(r.residual_ok(), "{} vs {}", r.residual_norm, r.parseval_gap);
        assert!(r.residual_norm < 2e-4);
        assert!(r.antisymmetry_max < 1e-12);
    }

    #[test]
    fn regularized_check_examples() {
        let proc = small();
        let z = c(0.0, 0.5);
        let r0 = ito_check_regularized(z, 0.0, &proc, &IntegrationOptions::new(1e-9)).unwrap();
        let c0 = proc.brownian_coefficients(z).unwrap()[0];
        assert!((r0.correction_value - c0 * c0).norm() < 1e-15);
        assert!(matches!(
            ito_check_regularized(z, 0.5, &proc, &IntegrationOptions::new(1e-9)),
            Err(Error::EpsRegime { .. })
        ));
    }

    #[test]
    fn mehler_double_integral_at_zero_eps() {
        let z = c(0.3, 0.4);
        let v = mehler_double_integral(0.0, z, z, 4).unwrap();
        let proc = small();
        let c0 = proc.brownian_coefficients(z).unwrap()[0];
        assert!((v - c0 * c0).norm() < 1e-14);
        let _ = MultiIndex::zero();
    }
}
