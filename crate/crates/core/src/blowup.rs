//! Weighted polar blow-up of the center family and the flow factor.
//!
//! The change of variables x = r·cosθ, y = r²·sinθ (weights (1, 2)) turns the
//! planar system into a scalar periodic equation dr/dθ = F₀ + εF₁ with
//! F₀ = (f/g)·r, where
//!   M(θ) = a·cos²θ + b·sinθ,
//!   N(θ) = c·cos³θ + d·cosθ·sinθ,
//!   f(θ) = cosθ·M + sinθ·N,
//!   g(θ) = cosθ·N − 2·sinθ·M.
//! All denominators carry g, so a numeric guard certifies min |g| before any
//! integration. The unperturbed flow through angle is the flow factor
//! exp(∫_α^θ f/g), built once with dense panel output and reused everywhere.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{Error, Result};
use crate::problem::{CenterParams, SwitchingLine};
use crate::quad;

/// The fixed blow-up chart: weights (1, 2), a base angle, period 2π.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupSpec {
    pub weights: (u32, u32),
    pub base_angle: f64,
    pub period: f64,
}

impl BlowupSpec {
    pub fn for_line(line: SwitchingLine) -> Self {
        BlowupSpec {
            weights: (1, 2),
            base_angle: line.base_angle(),
            period: TAU,
        }
    }
}

pub fn eval_m(p: CenterParams, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    p.a * c * c + p.b * s
}

pub fn eval_n(p: CenterParams, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    p.c * c * c * c + p.d * c * s
}

pub fn eval_f(p: CenterParams, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    c * eval_m(p, theta) + s * eval_n(p, theta)
}

pub fn eval_g(p: CenterParams, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    c * eval_n(p, theta) - 2.0 * s * eval_m(p, theta)
}

/// Location and value of the smallest |g| found by the guard.
#[derive(Debug, Clone, Copy)]
pub struct GMinReport {
    pub min_abs: f64,
    pub theta: f64,
}

/// Golden-section minimization of |g| on [lo, hi].
fn golden_min(p: CenterParams, mut lo: f64, mut hi: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = eval_g(p, x1).abs();
    let mut f2 = eval_g(p, x2).abs();
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = eval_g(p, x1).abs();
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = eval_g(p, x2).abs();
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Certify that g stays away from zero over a full period.
///
/// Samples |g| on a uniform grid of `n_samples` points over [0, 2π), then
/// refines around the five smallest samples by golden-section search. Returns
/// the refined minimum, or [`Error::GNearZero`] when it falls below `floor`.
pub fn check_g_nonvanishing(
    params: CenterParams,
    n_samples: usize,
    floor: f64,
) -> Result<GMinReport> {
    assert!(n_samples >= 256, "guard needs at least 256 samples");
    assert!(floor > 0.0, "floor must be positive");
    let h = TAU / n_samples as f64;
    let mut samples: Vec<(f64, f64)> = (0..n_samples)
        .map(|k| {
            let th = k as f64 * h;
            (eval_g(params, th).abs(), th)
        })
        .collect();
    samples.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite |g| samples"));
    let mut best = (samples[0].0, samples[0].1);
    for &(_, th) in samples.iter().take(5) {
        let (x, v) = golden_min(params, th - h, th + h);
        if v < best.0 {
            best = (v, x);
        }
    }
    let report = GMinReport {
        min_abs: best.0,
        theta: best.1.rem_euclid(TAU),
    };
    if report.min_abs < floor {
        return Err(Error::GNearZero {
            min_abs: report.min_abs,
            theta: report.theta,
            floor,
        });
    }
    Ok(report)
}

/// The flow factor exp(w(θ)) with w(θ) = ∫_α^θ f/g dτ, represented by a
/// piecewise-polynomial antiderivative on [α−π, α+3π].
///
/// The domain extends one half-period beyond [α, α+2π] on both sides so the
/// simulation stage can probe slightly past period ends. Panel boundaries
/// (checkpoints) include every multiple of π/2 offset from α, hence every
/// switching angle.
#[derive(Debug, Clone)]
pub struct FlowFactor {
    base_angle: f64,
    w: quad::Antiderivative,
    /// w at the base angle in the antiderivative's own (domain-anchored) frame.
    w_at_base: f64,
    err_bound: f64,
    checkpoints: Vec<(f64, f64)>,
    params: CenterParams,
}

impl FlowFactor {
    pub fn base_angle(&self) -> f64 {
        self.base_angle
    }

    pub fn params(&self) -> CenterParams {
        self.params
    }

    pub fn domain(&self) -> (f64, f64) {
        self.w.domain()
    }

    /// Quadrature error bound on w over the whole domain.
    pub fn err_bound(&self) -> f64 {
        self.err_bound
    }

    /// Panel boundaries (θ, w(θ)); includes all switching angles.
    pub fn checkpoints(&self) -> &[(f64, f64)] {
        &self.checkpoints
    }

    fn check_domain(&self, theta: f64) -> Result<()> {
        let (lo, hi) = self.w.domain();
        if theta < lo - 1e-12 || theta > hi + 1e-12 {
            return Err(Error::DomainExceeded { theta, lo, hi });
        }
        Ok(())
    }

    /// w(θ) = ∫_α^θ f/g. Exactly zero at the base angle.
    pub fn w(&self, theta: f64) -> Result<f64> {
        self.check_domain(theta)?;
        Ok(self.w.value(theta) - self.w_at_base)
    }

    /// The flow factor value exp(w(θ)) > 0.
    pub fn value(&self, theta: f64) -> Result<f64> {
        Ok(self.w(theta)?.exp())
    }

    /// Internal fast path for integrands that stay inside the domain by construction.
    pub(crate) fn value_unchecked(&self, theta: f64) -> f64 {
        (self.w.value(theta) - self.w_at_base).exp()
    }
}

/// Default sampling and floor for the g-guard run inside the builder.
pub const G_GUARD_SAMPLES: usize = 4096;
pub const G_GUARD_FLOOR: f64 = 1e-8;

/// Build the flow factor for `params` anchored at `base_angle`, with absolute
/// tolerance `tol` on w. Runs the g-guard first; quadrature uses mandatory
/// panel breaks at every α + k·π/2 across the domain [α−π, α+3π].
pub fn build_flow_factor(params: CenterParams, base_angle: f64, tol: f64) -> Result<FlowFactor> {
    assert!(tol > 0.0, "tolerance must be positive");
    check_g_nonvanishing(params, G_GUARD_SAMPLES, G_GUARD_FLOOR)?;
    let lo = base_angle - PI;
    let hi = base_angle + 3.0 * PI;
    let breaks: Vec<f64> = (-2..=6).map(|k| base_angle + k as f64 * FRAC_PI_2).collect();
    let integrand = move |th: f64| eval_f(params, th) / eval_g(params, th);
    let w = quad::build_antiderivative(integrand, lo, hi, tol, &breaks)?;
    let w_at_base = w.value(base_angle);
    let err_bound = w.err_bound().max(1e-14);
    let checkpoints: Vec<(f64, f64)> = w
        .breakpoints()
        .into_iter()
        .map(|(th, v)| (th, v - w_at_base))
        .collect();
    let ff = FlowFactor {
        base_angle,
        w,
        w_at_base,
        err_bound,
        checkpoints,
        params,
    };
    // Periodicity of the unperturbed flow: one full period must return to 1.
    let period_value = ff.value(base_angle + TAU)?;
    if (period_value - 1.0).abs() > 10.0 * ff.err_bound {
        return Err(Error::QuadratureFailure {
            lo,
            hi,
            err: (period_value - 1.0).abs(),
            tol: 10.0 * ff.err_bound,
        });
    }
    Ok(ff)
}

/// Convenience: build the flow factor matching a switching line's base angle.
pub fn build_flow_factor_for_line(
    params: CenterParams,
    line: SwitchingLine,
    tol: f64,
) -> Result<FlowFactor> {
    build_flow_factor(params, line.base_angle(), tol)
}
