//! Gauss–Legendre rules and an adaptive, vector-valued integrator for
//! straight segments in the complex plane.
//!
//! Every integrand handled here is entire, so a segment `[a, b]` is pulled
//! back to `t ∈ [0, 1]` through `u = a + t (b - a)` and integrated with
//! 15-point panels. A panel is accepted when its one-panel estimate agrees
//! with the sum of its two halves; otherwise it is bisected.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Panel order used throughout the crate.
pub const PANEL_POINTS: usize = 15;

/// Bisection depth cap for [`integrate_segment`].
pub const MAX_DEPTH: usize = 40;

/// Nodes and weights of an n-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes the rule by Newton iteration on `P_n` from Chebyshev guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a quadrature rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// The shared 15-point rule.
    pub fn panel() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(PANEL_POINTS))
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

/// Error target for the adaptive integrator. A component is converged when
/// its error estimate is below `abs` (shared in proportion to panel length)
/// or below `rel` times its magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn absolute(abs: f64) -> Self {
        Self { abs, rel: 0.0 }
    }

    pub fn relative(rel: f64) -> Self {
        Self { abs: 0.0, rel }
    }
}

struct Panel {
    t0: f64,
    t1: f64,
    depth: usize,
    estimate: Vec<Complex64>,
    magnitude: Vec<f64>,
}

/// Integrates a vector-valued entire function along the segment `[a, b]`.
///
/// `f(u, out)` must write the `dim` integrand values at `u` into `out`.
/// Panels are processed depth-first from the left, so the accumulation order
/// (and therefore the result) is deterministic.
pub fn integrate_segment<F>(
    a: Complex64,
    b: Complex64,
    dim: usize,
    tol: Tolerance,
    mut f: F,
) -> Result<Vec<Complex64>>
where
    F: FnMut(Complex64, &mut [Complex64]) -> Result<()>,
{
    let mut total = vec![Complex64::new(0.0, 0.0); dim];
    if a == b || dim == 0 {
        return Ok(total);
    }
    let jac = b - a;
    let mut scratch = vec![Complex64::new(0.0, 0.0); dim];

    let mut panel = |t0: f64, t1: f64, depth: usize, scratch: &mut [Complex64]| -> Result<Panel> {
        let mut estimate = vec![Complex64::new(0.0, 0.0); dim];
        let mut magnitude = vec![0.0; dim];
        for (t, w) in GaussLegendre::panel().mapped(t0, t1) {
            f(a + jac * t, scratch)?;
            for ((e, m), v) in estimate
                .iter_mut()
                .zip(magnitude.iter_mut())
                .zip(scratch.iter())
            {
                let term = *v * jac * w;
                *e += term;
                *m += term.norm();
            }
        }
        Ok(Panel {
            t0,
            t1,
            depth,
            estimate,
            magnitude,
        })
    };

    let mut stack = vec![panel(0.0, 1.0, 0, &mut scratch)?];
    while let Some(whole) = stack.pop() {
        let mid = 0.5 * (whole.t0 + whole.t1);
        let left = panel(whole.t0, mid, whole.depth + 1, &mut scratch)?;
        let right = panel(mid, whole.t1, whole.depth + 1, &mut scratch)?;
        let share = tol.abs * (whole.t1 - whole.t0);
        let mut worst = 0.0f64;
        let mut converged = true;
        for k in 0..dim {
            let refined = left.estimate[k] + right.estimate[k];
            let err = (whole.estimate[k] - refined).norm();
            let roundoff = 64.0 * f64::EPSILON * (left.magnitude[k] + right.magnitude[k]);
            let allowed = share.max(tol.rel * refined.norm()).max(roundoff);
            if err > allowed {
                converged = false;
                worst = worst.max(err);
            }
        }
        if converged {
            for ((t, l), r) in total.iter_mut().zip(&left.estimate).zip(&right.estimate) {
                *t += l + r;
            }
        } else if whole.depth + 1 >= MAX_DEPTH {
            return Err(Error::ToleranceNotMet {
                depth: MAX_DEPTH,
                estimate: worst,
            });
        } else {
            // right pushed first so the left half is finished first
            stack.push(right);
            stack.push(left);
        }
    }
    Ok(total)
}

/// Adaptive integral of a real function over `[a, b]`.
pub fn integrate_real<F>(a: f64, b: f64, tol: Tolerance, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let v = integrate_segment(
        Complex64::new(a, 0.0),
        Complex64::new(b, 0.0),
        1,
        tol,
        |u, out| {
            out[0] = Complex64::new(f(u.re), 0.0);
            Ok(())
        },
    )?;
    Ok(v[0].re)
}

/// Composite tensor-product rule over `[0,1]²` with `panels × panels` cells.
pub fn tensor_unit_square<F>(panels: usize, mut f: F) -> Complex64
where
    F: FnMut(f64, f64) -> Complex64,
{
    let rule = GaussLegendre::panel();
    let h = 1.0 / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..panels {
        let (s0, s1) = (i as f64 * h, (i + 1) as f64 * h);
        for j in 0..panels {
            let (r0, r1) = (j as f64 * h, (j + 1) as f64 * h);
            for (s, ws) in rule.mapped(s0, s1) {
                for (r, wr) in rule.mapped(r0, r1) {
                    total += f(s, r) * (ws * wr);
                }
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(15);
        let sum: f64 = rule.weights.iter().sum();
        assert!((sum - 2.0).abs() < 1e-14);
        // exact through degree 29
        let m28: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x.powi(28))
            .sum();
        assert!((m28 - 2.0 / 29.0).abs() < 1e-14);
        let odd: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x.powi(29))
            .sum();
        assert!(odd.abs() < 1e-14);
    }

    #[test]
    fn small_rules_match_tables() {
        let r2 = GaussLegendre::new(2);
        assert!((r2.nodes[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((r2.weights[0] - 1.0).abs() < 1e-15);
        let r3 = GaussLegendre::new(3);
        assert_eq!(r3.nodes[1], 0.0);
        assert!((r3.weights[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_oscillation() {
        let v =
            integrate_real(0.0, 10.0, Tolerance::absolute(1e-12), |x| (20.0 * x).sin()).unwrap();
        let exact = (1.0 - (200.0f64).cos()) / 20.0;
        assert!((v - exact).abs() < 1e-11);
    }

    #[test]
    fn complex_segment_of_exponential() {
        let a = Complex64::new(0.0, 0.0);
        let b = Complex64::new(0.3, 1.7);
        let v = integrate_segment(a, b, 1, Tolerance::absolute(1e-13), |u, out| {
            out[0] = u.exp();
            Ok(())
        })
        .unwrap();
        assert!((v[0] - (b.exp() - 1.0)).norm() < 1e-13);
    }

    #[test]
    fn degenerate_segment_is_zero() {
        let z = Complex64::new(0.4, 0.1);
        let v =
            integrate_segment(z, z, 3, Tolerance::absolute(1e-10), |_, _| unreachable!()).unwrap();
        assert!(v.iter().all(|c| *c == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn tensor_rule_on_smooth_product() {
        let v = tensor_unit_square(2, |s, r| Complex64::new((s + r).exp(), 0.0));
        let e1 = std::f64::consts::E - 1.0;
        assert!((v.re - e1 * e1).abs() < 1e-13);
    }
}
