//! Adaptive quadrature on Chebyshev panels with dense antiderivative output.
//!
//! Each panel carries a degree-16 Chebyshev interpolant of the integrand
//! fitted at Chebyshev–Lobatto nodes. Termwise integration of the interpolant
//! yields both the panel integral and a polynomial antiderivative that can be
//! evaluated anywhere inside the panel, which is what the flow factor needs
//! for dense output. The trailing interpolation coefficients give the error
//! estimate; panels are split greedily (largest estimated error first) until
//! the summed estimate meets tolerance. Caller-supplied break angles are
//! always panel boundaries so no panel straddles a known feature.

use crate::error::{Error, Result};

/// Interpolation degree per panel (Lobatto node count = degree + 1).
const DEGREE: usize = 16;
const NODES: usize = DEGREE + 1;
/// Hard cap on panels per adaptive call.
const MAX_PANELS: usize = 4096;
/// Tolerances are absolute, but demands below this relative level of the
/// accumulated magnitude are unsatisfiable in f64 and are floored away.
const REL_FLOOR: f64 = 1e-13;

/// One fitted panel: Chebyshev coefficients of the integrand and of its
/// antiderivative (normalized to vanish at the left endpoint), plus the panel
/// integral and error estimate.
#[derive(Debug, Clone)]
pub struct Panel {
    pub lo: f64,
    pub hi: f64,
    /// Antiderivative Chebyshev coefficients on [−1, 1], scaled to θ-units;
    /// value at the left endpoint is 0.
    anti: [f64; NODES + 1],
    pub integral: f64,
    pub err: f64,
}

impl Panel {
    /// Antiderivative of the integrand from `lo` to `theta` (θ within the panel).
    pub fn anti_value(&self, theta: f64) -> f64 {
        let x = (2.0 * theta - self.lo - self.hi) / (self.hi - self.lo);
        clenshaw(&self.anti, x.clamp(-1.0, 1.0)) - clenshaw(&self.anti, -1.0)
    }
}

/// Evaluate Σ c_j T_j(x) by the Clenshaw recurrence.
fn clenshaw(c: &[f64], x: f64) -> f64 {
    let mut u1 = 0.0;
    let mut u2 = 0.0;
    for &cj in c.iter().skip(1).rev() {
        let u = 2.0 * x * u1 - u2 + cj;
        u2 = u1;
        u1 = u;
    }
    x * u1 - u2 + c[0]
}

/// Fit one panel: interpolate at Lobatto nodes, build the antiderivative, and
/// estimate the error from the coefficient tail.
fn fit_panel<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Panel {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    // Lobatto nodes x_k = cos(πk/N); x_0 = 1 is the right endpoint.
    let mut fv = [0.0f64; NODES];
    for (k, slot) in fv.iter_mut().enumerate() {
        let x = (std::f64::consts::PI * k as f64 / DEGREE as f64).cos();
        *slot = f(mid + half * x);
    }
    // Discrete cosine fit; b holds plain-series coefficients (ends pre-halved).
    let mut b = [0.0f64; NODES];
    for (j, bj) in b.iter_mut().enumerate() {
        let mut acc = 0.5 * (fv[0] + if j % 2 == 0 { fv[DEGREE] } else { -fv[DEGREE] });
        for (k, &fk) in fv.iter().enumerate().take(DEGREE).skip(1) {
            acc += fk * (std::f64::consts::PI * (j * k) as f64 / DEGREE as f64).cos();
        }
        *bj = 2.0 * acc / DEGREE as f64;
    }
    b[0] *= 0.5;
    b[DEGREE] *= 0.5;

    // Termwise antiderivative: ∫T_0 = T_1, ∫T_1 = T_2/4,
    // ∫T_j = T_{j+1}/(2(j+1)) − T_{j−1}/(2(j−1)) for j ≥ 2.
    let mut anti = [0.0f64; NODES + 1];
    anti[1] = b[0] - 0.5 * b[2];
    for (k, slot) in anti.iter_mut().enumerate().skip(2) {
        let prev = b[k - 1];
        let next = if k + 1 < NODES { b[k + 1] } else { 0.0 };
        *slot = (prev - next) / (2.0 * k as f64);
    }
    for a in anti.iter_mut() {
        *a *= half;
    }

    let integral = clenshaw(&anti, 1.0) - clenshaw(&anti, -1.0);
    let tail = b[DEGREE].abs() + b[DEGREE - 1].abs() + 0.5 * b[DEGREE - 2].abs();
    // Truncation estimate from the tail, floored at the roundoff level of the
    // panel magnitude so cancellation across panels is never reported as exact.
    let err = (tail * (hi - lo)).max(integral.abs() * 1e-15);

    Panel {
        lo,
        hi,
        anti,
        integral,
        err,
    }
}

/// Split [lo, hi] at the supplied interior break points (sorted, deduplicated).
fn initial_segments(lo: f64, hi: f64, breaks: &[f64]) -> Vec<(f64, f64)> {
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&b| b > lo + 1e-14 && b < hi - 1e-14)
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite break angles"));
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    let mut segs = Vec::with_capacity(cuts.len() + 1);
    let mut left = lo;
    for c in cuts {
        segs.push((left, c));
        left = c;
    }
    segs.push((left, hi));
    segs
}

/// Run the greedy adaptive loop; returns panels sorted by position.
fn adapt<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64, breaks: &[f64]) -> Result<Vec<Panel>> {
    let mut panels: Vec<Panel> = initial_segments(lo, hi, breaks)
        .into_iter()
        .map(|(a, b)| fit_panel(f, a, b))
        .collect();
    loop {
        let total_err: f64 = panels.iter().map(|p| p.err).sum();
        let magnitude: f64 = panels.iter().map(|p| p.integral.abs()).sum();
        let goal = tol.max(REL_FLOOR * magnitude);
        if total_err <= goal {
            break;
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::QuadratureFailure {
                lo,
                hi,
                err: total_err,
                tol: goal,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.err.partial_cmp(&b.1.err).expect("finite error estimates"))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let Panel { lo: a, hi: b, .. } = panels[worst];
        if b - a < 1e-13 * (hi - lo).abs().max(1.0) {
            return Err(Error::QuadratureFailure {
                lo,
                hi,
                err: total_err,
                tol: goal,
            });
        }
        let m = 0.5 * (a + b);
        panels[worst] = fit_panel(f, a, m);
        panels.push(fit_panel(f, m, b));
        // Keep ordering for deterministic summation.
        panels.sort_by(|p, q| p.lo.partial_cmp(&q.lo).expect("finite panel bounds"));
    }
    Ok(panels)
}

/// Adaptive integral of `f` over [lo, hi] with mandatory breaks.
/// Returns `(value, error_estimate)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    breaks: &[f64],
) -> Result<(f64, f64)> {
    if lo == hi {
        return Ok((0.0, 0.0));
    }
    let panels = adapt(&f, lo, hi, tol, breaks)?;
    let value = panels.iter().map(|p| p.integral).sum();
    let err = panels.iter().map(|p| p.err).sum();
    Ok((value, err))
}

/// Piecewise-polynomial antiderivative W(θ) = ∫_lo^θ f, with dense evaluation
/// and a certified-style error bound (sum of panel estimates).
#[derive(Debug, Clone)]
pub struct Antiderivative {
    panels: Vec<Panel>,
    /// Cumulative integral at each panel's left endpoint.
    starts: Vec<f64>,
    lo: f64,
    hi: f64,
    err_bound: f64,
}

impl Antiderivative {
    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn err_bound(&self) -> f64 {
        self.err_bound
    }

    /// W(θ). Panics outside the domain; callers guard with their own domain error.
    pub fn value(&self, theta: f64) -> f64 {
        assert!(
            theta >= self.lo - 1e-12 && theta <= self.hi + 1e-12,
            "antiderivative evaluated outside its domain"
        );
        let idx = match self
            .panels
            .binary_search_by(|p| p.lo.partial_cmp(&theta).expect("finite bounds"))
        {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        };
        let p = &self.panels[idx];
        self.starts[idx] + p.anti_value(theta)
    }

    /// Panel boundaries with the cumulative integral at each: (θ, W(θ)).
    pub fn breakpoints(&self) -> Vec<(f64, f64)> {
        let mut pts: Vec<(f64, f64)> = self
            .panels
            .iter()
            .zip(&self.starts)
            .map(|(p, &w)| (p.lo, w))
            .collect();
        if let (Some(last), Some(&wlast)) = (self.panels.last(), self.starts.last()) {
            pts.push((last.hi, wlast + last.integral));
        }
        pts
    }
}

/// Build the dense antiderivative of `f` on [lo, hi] with mandatory breaks.
pub fn build_antiderivative<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    breaks: &[f64],
) -> Result<Antiderivative> {
    let panels = adapt(&f, lo, hi, tol, breaks)?;
    let mut starts = Vec::with_capacity(panels.len());
    let mut acc = 0.0;
    for p in &panels {
        starts.push(acc);
        acc += p.integral;
    }
    let err_bound = panels.iter().map(|p| p.err).sum();
    Ok(Antiderivative {
        panels,
        starts,
        lo,
        hi,
        err_bound,
    })
}
