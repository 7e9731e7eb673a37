//! Problem definition: center parameters, switching line, piecewise
//! perturbation, and JSON configuration I/O.
//!
//! The unperturbed family is
//!   dx/dt = a·x² + b·y,   dy/dt = c·x³ + d·x·y,
//! which has a global center at the origin exactly when (d−2a)² + 8bc < 0.
//! The perturbation is a pair of cubic polynomial branches (p⁺, q⁺) on one
//! closed half-plane of the switching line and (p⁻, q⁻) on the open other.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{BivarPoly, MAX_TOTAL_DEGREE};

/// Validated parameters (a, b, c, d) of the center family, with the computed
/// discriminant (d−2a)² + 8bc recorded for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    discriminant: f64,
}

impl CenterParams {
    /// The quantity (d−2a)² + 8bc; strictly negative for every constructed value.
    pub fn discriminant(&self) -> f64 {
        self.discriminant
    }
}

/// Validate the center condition (d−2a)² + 8bc < 0 and construct the parameters.
pub fn validate_center(a: f64, b: f64, c: f64, d: f64) -> Result<CenterParams> {
    let discriminant = (d - 2.0 * a).powi(2) + 8.0 * b * c;
    // NaN inputs fall through to the violation branch (NaN < 0 is false).
    if discriminant < 0.0 {
        Ok(CenterParams {
            a,
            b,
            c,
            d,
            discriminant,
        })
    } else {
        Err(Error::CenterConditionViolated { discriminant })
    }
}

/// Which axis carries the perturbation branch switch.
///
/// The vertical line x = 0 pairs with base angle −π/2; the horizontal line
/// y = 0 pairs with base angle 0. In the blow-up chart x = r·cosθ, y = r²·sinθ
/// the "+" branch (closed half-plane x ≥ 0 resp. y ≥ 0) occupies the closed
/// half-period [α, α+π] and the "−" branch the open remainder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SwitchingLine {
    VerticalX0,
    HorizontalY0,
}

impl SwitchingLine {
    /// Base angle α at which trajectories and integrals start.
    pub fn base_angle(self) -> f64 {
        match self {
            SwitchingLine::VerticalX0 => -FRAC_PI_2,
            SwitchingLine::HorizontalY0 => 0.0,
        }
    }

    /// The three switching angles in one period: α, α+π, α+2π.
    pub fn switch_angles(self) -> [f64; 3] {
        let a = self.base_angle();
        [a, a + PI, a + TAU]
    }

    /// Whether the "+" branch applies at angle θ. The switching set itself
    /// (θ ≡ α or α+π mod 2π) uses the "+" branch: the branches are defined on
    /// closed half-planes x ≥ 0 / y ≥ 0.
    pub fn plus_branch_at(self, theta: f64) -> bool {
        let wrap = (theta - self.base_angle()).rem_euclid(TAU);
        wrap <= PI
    }

    pub fn as_config_str(self) -> &'static str {
        match self {
            SwitchingLine::VerticalX0 => "x=0",
            SwitchingLine::HorizontalY0 => "y=0",
        }
    }
}

/// A complete problem: validated center, switching line, and the four
/// perturbation polynomial branches.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub params: CenterParams,
    pub line: SwitchingLine,
    pub p_plus: BivarPoly,
    pub p_minus: BivarPoly,
    pub q_plus: BivarPoly,
    pub q_minus: BivarPoly,
}

impl Problem {
    /// The (p, q) branch pair applying on the given side.
    pub fn branch(&self, plus: bool) -> (&BivarPoly, &BivarPoly) {
        if plus {
            (&self.p_plus, &self.q_plus)
        } else {
            (&self.p_minus, &self.q_minus)
        }
    }
}

// ---------------------------------------------------------------------------
// JSON configuration
// ---------------------------------------------------------------------------

/// A coefficient in the configuration: either a JSON number or an exact
/// rational written as a string "n/d" (converted with one round-to-nearest
/// division at parse time).
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
enum NumOrRational {
    Num(f64),
    Text(String),
}

impl NumOrRational {
    fn to_f64(&self) -> Result<f64> {
        match self {
            NumOrRational::Num(v) => Ok(*v),
            NumOrRational::Text(s) => parse_rational(s),
        }
    }
}

/// Parse "n/d" (or a plain numeric string) into the nearest binary double.
fn parse_rational(s: &str) -> Result<f64> {
    let t = s.trim();
    if let Some((num, den)) = t.split_once('/') {
        let n: i64 = num
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad rational numerator in {t:?}")))?;
        let d: i64 = den
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad rational denominator in {t:?}")))?;
        if d == 0 {
            return Err(Error::Parse(format!("zero denominator in rational {t:?}")));
        }
        // Both operands are exactly representable (|n|, |d| < 2^53 in practice),
        // so the single division rounds to nearest.
        Ok(n as f64 / d as f64)
    } else {
        t.parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad numeric literal {t:?}")))
    }
}

#[derive(Debug, Deserialize)]
struct CenterConfig {
    a: NumOrRational,
    b: NumOrRational,
    c: NumOrRational,
    d: NumOrRational,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct PerturbationConfig {
    p_plus: Vec<(u32, u32, NumOrRational)>,
    p_minus: Vec<(u32, u32, NumOrRational)>,
    q_plus: Vec<(u32, u32, NumOrRational)>,
    q_minus: Vec<(u32, u32, NumOrRational)>,
}

#[derive(Debug, Deserialize)]
struct ConfigDoc {
    center: CenterConfig,
    switching_line: String,
    #[serde(default)]
    perturbation: Option<PerturbationConfig>,
}

fn poly_from_triples(triples: &[(u32, u32, NumOrRational)]) -> Result<BivarPoly> {
    let mut seen = std::collections::BTreeSet::new();
    let mut p = BivarPoly::new();
    for &(i, j, ref c) in triples {
        if i + j > MAX_TOTAL_DEGREE {
            return Err(Error::DegreeExceeded { i, j });
        }
        if !seen.insert((i, j)) {
            return Err(Error::DuplicateTerm { i, j });
        }
        p.set_term(i, j, c.to_f64()?)?;
    }
    Ok(p)
}

/// Parse a JSON configuration document into a validated [`Problem`].
///
/// Top-level keys: `center: {a,b,c,d}`, `switching_line: "x=0"|"y=0"`,
/// `perturbation: {p_plus, p_minus, q_plus, q_minus}` where each polynomial is
/// a list of `[i, j, coefficient]` triples and a coefficient is a number or a
/// string rational "n/d". Unspecified blocks default to zero; duplicate
/// exponent pairs are an error.
pub fn parse_problem(config_text: &str) -> Result<Problem> {
    let doc: ConfigDoc =
        serde_json::from_str(config_text).map_err(|e| Error::Parse(e.to_string()))?;
    let line = match doc.switching_line.as_str() {
        "x=0" => SwitchingLine::VerticalX0,
        "y=0" => SwitchingLine::HorizontalY0,
        other => {
            return Err(Error::Parse(format!(
                "switching_line must be \"x=0\" or \"y=0\", got {other:?}"
            )))
        }
    };
    let params = validate_center(
        doc.center.a.to_f64()?,
        doc.center.b.to_f64()?,
        doc.center.c.to_f64()?,
        doc.center.d.to_f64()?,
    )?;
    let pert = doc.perturbation.unwrap_or_default();
    Ok(Problem {
        params,
        line,
        p_plus: poly_from_triples(&pert.p_plus)?,
        p_minus: poly_from_triples(&pert.p_minus)?,
        q_plus: poly_from_triples(&pert.q_plus)?,
        q_minus: poly_from_triples(&pert.q_minus)?,
    })
}

fn poly_to_triples(p: &BivarPoly) -> Vec<(u32, u32, f64)> {
    p.terms().map(|((i, j), c)| (i, j, c)).collect()
}

/// Serialize a problem back to the JSON configuration schema.
/// `parse_problem(serialize_problem(p))` reproduces `p` exactly: numbers are
/// written in shortest round-trip form.
pub fn serialize_problem(problem: &Problem) -> String {
    #[derive(Serialize)]
    struct CenterOut {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
    }
    #[derive(Serialize)]
    struct PertOut {
        p_plus: Vec<(u32, u32, f64)>,
        p_minus: Vec<(u32, u32, f64)>,
        q_plus: Vec<(u32, u32, f64)>,
        q_minus: Vec<(u32, u32, f64)>,
    }
    #[derive(Serialize)]
    struct DocOut {
        center: CenterOut,
        switching_line: &'static str,
        perturbation: PertOut,
    }
    let doc = DocOut {
        center: CenterOut {
            a: problem.params.a,
            b: problem.params.b,
            c: problem.params.c,
            d: problem.params.d,
        },
        switching_line: problem.line.as_config_str(),
        perturbation: PertOut {
            p_plus: poly_to_triples(&problem.p_plus),
            p_minus: poly_to_triples(&problem.p_minus),
            q_plus: poly_to_triples(&problem.q_plus),
            q_minus: poly_to_triples(&problem.q_minus),
        },
    };
    serde_json::to_string_pretty(&doc).expect("serialization of plain structs cannot fail")
}
