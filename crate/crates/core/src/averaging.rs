//! The first-order averaged function of the perturbed system.
//!
//! Writing r₀(θ; z) = ff(θ)·z for the unperturbed solution (ff = flow
//! factor), the averaged function expands as h(z) = z³·h₁(z) = Σ k_{i,j}
//! z^{i+2j}, where each coefficient k_{i,j} combines up to four integrals of
//! the two integrand families
//!
//!   φ_{i,j}(θ) = (1+sin²θ)·N·cosⁱθ·sin^{j−1}θ·ff(θ)^{i+2j−4} / g²   (j ≥ 1)
//!   ψ_{i,j}(θ) = (1+sin²θ)·M·cos^{i−1}θ·sinʲθ·ff(θ)^{i+2j−4} / g²  (i ≥ 1)
//!
//! over the "+" half-period [α, α+π] (weights from p⁺, q⁺) and the "−"
//! half-period [α+π, α+2π] (weights from p⁻, q⁻):
//!
//!   k_{i,j} = p⁺_{i,j−1}·∫₊φ − q⁺_{i−1,j}·∫₊ψ + p⁻_{i,j−1}·∫₋φ − q⁻_{i−1,j}·∫₋ψ.
//!
//! Slots with negative index, and slots whose perturbation coefficient is
//! absent, contribute nothing and their integral is never evaluated.
//!
//! For the horizontal switching line the map θ ↦ π−θ is a symmetry of the
//! unperturbed flow that makes every even-i integral vanish; the table checks
//! that cancellation against its quadrature error estimates and the assembled
//! polynomial then keeps only odd powers of z.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::blowup::{eval_g, eval_m, eval_n, FlowFactor};
use crate::error::{Error, Result};
use crate::parallel::parallel_map_indexed;
use crate::problem::{Problem, SwitchingLine};
use crate::quad;

/// Exponent-pair range of the coefficient table: 1 ≤ i+j ≤ 4.
pub fn index_pairs() -> Vec<(u32, u32)> {
    let mut pairs = Vec::new();
    for total in 1..=4u32 {
        for i in (0..=total).rev() {
            pairs.push((i, total - i));
        }
    }
    pairs
}

fn check_pair(i: u32, j: u32) -> Result<()> {
    let total = i + j;
    if !(1..=4).contains(&total) {
        return Err(Error::IndexOutOfRange {
            i: i as i64,
            j: j as i64,
            reason: "coefficient indices satisfy 1 <= i+j <= 4",
        });
    }
    Ok(())
}

/// φ-family integrand (requires j ≥ 1; the sin^{j−1} factor is undefined otherwise).
pub fn integrand_phi(
    problem: &Problem,
    ff: &FlowFactor,
    i: u32,
    j: u32,
    theta: f64,
) -> Result<f64> {
    check_pair(i, j)?;
    if j < 1 {
        return Err(Error::IndexOutOfRange {
            i: i as i64,
            j: j as i64,
            reason: "phi integrand requires j >= 1",
        });
    }
    let p = problem.params;
    let (s, c) = theta.sin_cos();
    let g = eval_g(p, theta);
    let exp = i as i32 + 2 * j as i32 - 4;
    let u = ff.value(theta)?;
    Ok((1.0 + s * s) * eval_n(p, theta) * c.powi(i as i32) * s.powi(j as i32 - 1) * u.powi(exp)
        / (g * g))
}

/// ψ-family integrand (requires i ≥ 1; the cos^{i−1} factor is undefined otherwise).
pub fn integrand_psi(
    problem: &Problem,
    ff: &FlowFactor,
    i: u32,
    j: u32,
    theta: f64,
) -> Result<f64> {
    check_pair(i, j)?;
    if i < 1 {
        return Err(Error::IndexOutOfRange {
            i: i as i64,
            j: j as i64,
            reason: "psi integrand requires i >= 1",
        });
    }
    let p = problem.params;
    let (s, c) = theta.sin_cos();
    let g = eval_g(p, theta);
    let exp = i as i32 + 2 * j as i32 - 4;
    let u = ff.value(theta)?;
    Ok((1.0 + s * s) * eval_m(p, theta) * c.powi(i as i32 - 1) * s.powi(j as i32) * u.powi(exp)
        / (g * g))
}

/// Quarter-period angles strictly inside (lo, hi): mandatory quadrature breaks.
fn quarter_breaks(lo: f64, hi: f64) -> Vec<f64> {
    let k0 = (lo / FRAC_PI_2).floor() as i64 - 1;
    let k1 = (hi / FRAC_PI_2).ceil() as i64 + 1;
    (k0..=k1)
        .map(|k| k as f64 * FRAC_PI_2)
        .filter(|&b| b > lo && b < hi)
        .collect()
}

#[derive(Clone, Copy)]
enum Family {
    Phi,
    Psi,
}

fn family_integral(
    problem: &Problem,
    ff: &FlowFactor,
    family: Family,
    i: u32,
    j: u32,
    (lo, hi): (f64, f64),
    tol: f64,
) -> Result<(f64, f64)> {
    let p = problem.params;
    let exp = i as i32 + 2 * j as i32 - 4;
    let f = |theta: f64| {
        let (s, c) = theta.sin_cos();
        let g = eval_g(p, theta);
        let u = ff.value_unchecked(theta);
        let trig = match family {
            Family::Phi => eval_n(p, theta) * c.powi(i as i32) * s.powi(j as i32 - 1),
            Family::Psi => eval_m(p, theta) * c.powi(i as i32 - 1) * s.powi(j as i32),
        };
        (1.0 + s * s) * trig * u.powi(exp) / (g * g)
    };
    quad::integrate(f, lo, hi, tol, &quarter_breaks(lo, hi))
}

/// One coefficient k_{i,j}: the weighted combination of up to four integrals.
/// Returns `(value, summed error estimate)`. Absent slots skip their integral.
pub fn compute_coefficient(
    problem: &Problem,
    ff: &FlowFactor,
    i: u32,
    j: u32,
    tol: f64,
) -> Result<(f64, f64)> {
    check_pair(i, j)?;
    let alpha = problem.line.base_angle();
    let plus = (alpha, alpha + PI);
    let minus = (alpha + PI, alpha + 2.0 * PI);
    let ii = i as i64;
    let jj = j as i64;
    let mut value = 0.0;
    let mut err = 0.0;
    let jobs = [
        (Family::Phi, problem.p_plus.slot(ii, jj - 1), plus, 1.0),
        (Family::Psi, problem.q_plus.slot(ii - 1, jj), plus, -1.0),
        (Family::Phi, problem.p_minus.slot(ii, jj - 1), minus, 1.0),
        (Family::Psi, problem.q_minus.slot(ii - 1, jj), minus, -1.0),
    ];
    for (family, slot, seg, sign) in jobs {
        if let Some(weight) = slot {
            let (integral, e) = family_integral(problem, ff, family, i, j, seg, tol)?;
            value += sign * weight * integral;
            err += weight.abs() * e;
        }
    }
    Ok((value, err))
}

/// One entry of the coefficient table.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct CoeffEntry {
    pub value: f64,
    pub err: f64,
}

/// All coefficients k_{i,j} for 1 ≤ i+j ≤ 4, with quadrature error estimates.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    pub line: SwitchingLine,
    entries: BTreeMap<(u32, u32), CoeffEntry>,
}

impl CoefficientTable {
    pub fn entry(&self, i: u32, j: u32) -> Option<CoeffEntry> {
        self.entries.get(&(i, j)).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = ((u32, u32), CoeffEntry)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    /// Build a table from explicit entries (used by tests and the FFI layer).
    pub fn from_entries(
        line: SwitchingLine,
        entries: impl IntoIterator<Item = ((u32, u32), CoeffEntry)>,
    ) -> Self {
        CoefficientTable {
            line,
            entries: entries.into_iter().collect(),
        }
    }
}

/// Compute the full coefficient table. The up-to-28 half-period integrals are
/// independent; `threads` caps the worker fan-out. With `fast_symmetry` set
/// and a horizontal switching line, even-i entries (which cancel by the mirror
/// symmetry) are skipped outright instead of computed-and-checked.
pub fn compute_table(
    problem: &Problem,
    ff: &FlowFactor,
    tol: f64,
    fast_symmetry: bool,
    threads: usize,
) -> Result<CoefficientTable> {
    let pairs = index_pairs();
    let skip_even = fast_symmetry && problem.line == SwitchingLine::HorizontalY0;
    let results = parallel_map_indexed(pairs.len(), threads, |idx| {
        let (i, j) = pairs[idx];
        if skip_even && i % 2 == 0 {
            Ok((0.0, 0.0))
        } else {
            compute_coefficient(problem, ff, i, j, tol)
        }
    });
    let mut entries = BTreeMap::new();
    for ((i, j), res) in pairs.into_iter().zip(results) {
        let (value, err) = res?;
        entries.insert((i, j), CoeffEntry { value, err });
    }
    Ok(CoefficientTable {
        line: problem.line,
        entries,
    })
}

/// The averaged polynomial h(z) = z³·h₁(z) in sparse exponent form, with a
/// provenance record of which table entries fed each power of z.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedPolynomial {
    coeffs: BTreeMap<u32, f64>,
    provenance: BTreeMap<u32, Vec<(u32, u32)>>,
}

impl AveragedPolynomial {
    /// Build directly from (exponent, coefficient) pairs; zero coefficients
    /// are dropped. Exponents must lie in 1..=8.
    pub fn from_coeffs(coeffs: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, c) in coeffs {
            if !(1..=8).contains(&n) {
                return Err(Error::IndexOutOfRange {
                    i: n as i64,
                    j: 0,
                    reason: "averaged polynomial exponents lie in 1..=8",
                });
            }
            if c != 0.0 {
                map.insert(n, c);
            }
        }
        Ok(AveragedPolynomial {
            coeffs: map,
            provenance: BTreeMap::new(),
        })
    }

    pub fn coeff(&self, n: u32) -> f64 {
        self.coeffs.get(&n).copied().unwrap_or(0.0)
    }

    /// Stored (nonzero) coefficients in ascending exponent order.
    pub fn coeffs(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.coeffs.iter().map(|(&n, &c)| (n, c))
    }

    /// Which table entries were grouped into each exponent.
    pub fn provenance(&self) -> &BTreeMap<u32, Vec<(u32, u32)>> {
        &self.provenance
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(&n, &c)| c * z.powi(n as i32))
            .sum()
    }

    pub fn eval_deriv(&self, z: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(&n, &c)| c * n as f64 * z.powi(n as i32 - 1))
            .sum()
    }
}

impl std::fmt::Display for AveragedPolynomial {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coeffs.is_empty() {
            return write!(fm, "0");
        }
        let mut first = true;
        for (&n, &c) in &self.coeffs {
            if first {
                write!(fm, "{c}·z^{n}")?;
                first = false;
            } else if c < 0.0 {
                write!(fm, " − {}·z^{n}", -c)?;
            } else {
                write!(fm, " + {c}·z^{n}")?;
            }
        }
        Ok(())
    }
}

/// Group table entries by exponent n = i + 2j into h(z) = Σ k_{i,j} z^{i+2j}.
///
/// Under the horizontal switching line, even-n coefficients must cancel by the
/// mirror symmetry: each is checked against 10× its summed quadrature error
/// and then dropped (set exactly to zero). A violation signals an integrand or
/// quadrature bug, not a property of the problem.
pub fn assemble_h(table: &CoefficientTable) -> Result<AveragedPolynomial> {
    let mut coeffs: BTreeMap<u32, f64> = BTreeMap::new();
    let mut errs: BTreeMap<u32, f64> = BTreeMap::new();
    let mut provenance: BTreeMap<u32, Vec<(u32, u32)>> = BTreeMap::new();
    for ((i, j), entry) in table.entries() {
        let n = i + 2 * j;
        *coeffs.entry(n).or_insert(0.0) += entry.value;
        *errs.entry(n).or_insert(0.0) += entry.err;
        provenance.entry(n).or_default().push((i, j));
    }
    if table.line == SwitchingLine::HorizontalY0 {
        for (&n, &value) in &coeffs {
            if n % 2 == 0 && value.abs() > 10.0 * errs[&n] {
                return Err(Error::SymmetryViolation {
                    n,
                    value,
                    err: errs[&n],
                });
            }
        }
        coeffs.retain(|&n, _| n % 2 == 1);
    }
    coeffs.retain(|_, &mut c| c != 0.0);
    Ok(AveragedPolynomial { coeffs, provenance })
}

/// Evaluate h₁(z) directly from its defining integral, without the k-table:
/// h₁(z) = ∫_α^{α+2π} F₁(s, ff(s)·z) / ff(s) ds, with the branch polynomials
/// switching at α+π. Used as an independent cross-check of the assembly.
pub fn h1_direct(problem: &Problem, ff: &FlowFactor, z: f64, tol: f64) -> Result<f64> {
    if z <= 0.0 {
        return Err(Error::NonpositiveRadius {
            r: z,
            theta: ff.base_angle(),
        });
    }
    let p = problem.params;
    let alpha = problem.line.base_angle();
    let mut total = 0.0;
    for (plus, lo, hi) in [
        (true, alpha, alpha + PI),
        (false, alpha + PI, alpha + 2.0 * PI),
    ] {
        let (pp, qq) = problem.branch(plus);
        if pp.is_zero() && qq.is_zero() {
            continue;
        }
        let f = |theta: f64| {
            let (s, c) = theta.sin_cos();
            let g = eval_g(p, theta);
            let u = ff.value_unchecked(theta);
            let r = u * z;
            let x = r * c;
            let y = r * r * s;
            let f1 = (1.0 + s * s) / (r.powi(3) * g * g)
                * (r * r * eval_n(p, theta) * pp.eval(x, y)
                    - r * eval_m(p, theta) * qq.eval(x, y));
            f1 / u
        };
        let (val, _) = quad::integrate(f, lo, hi, tol, &quarter_breaks(lo, hi))?;
        total += val;
    }
    Ok(total)
}
