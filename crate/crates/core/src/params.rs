//! Problem parameters, critical exponents and `p`-regime classification.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when a comparison involves an inexact value.
pub const REL_TOL: f64 = 1e-12;

/// A real number that remembers its exact rational value when it has one.
///
/// Regime boundaries (`p = p_c`, `γ = 1 + α`, ...) are decided exactly when
/// every operand is rational and with a `1e-12` relative tolerance otherwise.
#[derive(Clone, Copy, Debug)]
pub struct Real {
    value: f64,
    exact: Option<Ratio<i64>>,
}

// Exact-or-float arithmetic by name; operator traits would hide the fallback.
#[allow(clippy::should_implement_trait)]
impl Real {
    /// An inexact value.
    pub fn float(value: f64) -> Self {
        Self { value, exact: None }
    }

    pub fn ratio(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Self::from_ratio(Ratio::new(numer, denom))
    }

    pub fn int(n: i64) -> Self {
        Self::from_ratio(Ratio::from_integer(n))
    }

    fn from_ratio(r: Ratio<i64>) -> Self {
        let value = *r.numer() as f64 / *r.denom() as f64;
        Self { value, exact: Some(r) }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> Option<Ratio<i64>> {
        self.exact
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    fn combine(
        self,
        other: Self,
        fv: impl Fn(f64, f64) -> f64,
        fx: impl Fn(&Ratio<i64>, &Ratio<i64>) -> Option<Ratio<i64>>,
    ) -> Self {
        match (self.exact, other.exact) {
            (Some(a), Some(b)) => match fx(&a, &b) {
                Some(r) => Self::from_ratio(r),
                None => Self::float(fv(self.value, other.value)),
            },
            _ => Self::float(fv(self.value, other.value)),
        }
    }

    pub fn add(self, other: Self) -> Self {
        self.combine(other, |a, b| a + b, |a, b| a.checked_add(b))
    }

    pub fn sub(self, other: Self) -> Self {
        self.combine(other, |a, b| a - b, |a, b| a.checked_sub(b))
    }

    pub fn mul(self, other: Self) -> Self {
        self.combine(other, |a, b| a * b, |a, b| a.checked_mul(b))
    }

    pub fn div(self, other: Self) -> Self {
        self.combine(
            other,
            |a, b| a / b,
            |a, b| if b.is_zero() { None } else { a.checked_div(b) },
        )
    }

    pub fn neg(self) -> Self {
        Self::int(0).sub(self)
    }

    /// Total order: exact when both sides are rational, otherwise equal
    /// within [`REL_TOL`] relative.
    pub fn compare(&self, other: &Self) -> Ordering {
        if let (Some(a), Some(b)) = (self.exact, other.exact) {
            return a.cmp(&b);
        }
        let (a, b) = (self.value, other.value);
        let scale = a.abs().max(b.abs()).max(1.0);
        if (a - b).abs() <= REL_TOL * scale {
            Ordering::Equal
        } else if a < b {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        self.compare(other) == Ordering::Equal
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other)
    }
}

impl From<f64> for Real {
    fn from(value: f64) -> Self {
        Self::float(value)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact {
            Some(r) if *r.denom() == 1 => write!(f, "{}", r.numer()),
            Some(r) => {
                // Prefer a short decimal when it round-trips exactly.
                let d = r.to_f64().unwrap_or(self.value);
                match d.to_string().parse::<Real>() {
                    Ok(back) if back.exact == Some(r) => write!(f, "{d}"),
                    _ => write!(f, "{}/{}", r.numer(), r.denom()),
                }
            }
            None => write!(f, "{}", self.value),
        }
    }
}

/// Parses `"3"`, `"-0.25"`, `"5/3"`, `"1e-3"` exactly; anything else that
/// parses as `f64` becomes an inexact value.
impl FromStr for Real {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: Real = n.parse()?;
            let d: Real = d.parse()?;
            if d.value == 0.0 {
                return Err(Error::Format(format!("zero denominator in {s:?}")));
            }
            return Ok(n.div(d));
        }
        if let Some(r) = parse_decimal(s) {
            return Ok(Self::from_ratio(r));
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::Format(format!("not a number: {s:?}")))?;
        if !v.is_finite() {
            return Err(Error::Format(format!("not a finite number: {s:?}")));
        }
        Ok(Self::float(v))
    }
}

fn parse_decimal(s: &str) -> Option<Ratio<i64>> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer: i64 = digits.trim_start_matches('0').parse().unwrap_or(0);
    if digits.len() > 17 {
        return None;
    }
    let scale = exp - frac_part.len() as i32;
    let mut denom: i64 = 1;
    if scale >= 0 {
        numer = numer.checked_mul(10i64.checked_pow(scale as u32)?)?;
    } else {
        denom = 10i64.checked_pow((-scale) as u32)?;
    }
    if neg {
        numer = -numer;
    }
    Some(Ratio::new(numer, denom))
}

impl Serialize for Real {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Str(String),
            Int(i64),
            Float(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Int(i) => Ok(Real::int(i)),
            // Decimal literals from the config are taken at face value.
            Raw::Float(f) => f.to_string().parse().map_err(serde::de::Error::custom),
        }
    }
}

/// A Lebesgue exponent `p ∈ [1, ∞]` with `∞` as a distinguished value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(Real),
    Infinity,
}

impl Exponent {
    pub fn finite(p: f64) -> Self {
        Self::Finite(Real::float(p))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::Finite(Real::ratio(n, d))
    }

    /// `1/p`, zero for `p = ∞`.
    pub fn reciprocal(&self) -> Real {
        match self {
            Self::Finite(p) => Real::int(1).div(*p),
            Self::Infinity => Real::int(0),
        }
    }

    /// `1 − 1/p`.
    pub fn conjugate_factor(&self) -> Real {
        Real::int(1).sub(self.reciprocal())
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Self::Infinity)
    }

    pub fn value(&self) -> f64 {
        match self {
            Self::Finite(p) => p.value(),
            Self::Infinity => f64::INFINITY,
        }
    }

    pub fn compare(&self, other: &Real) -> Ordering {
        match self {
            Self::Finite(p) => p.compare(other),
            Self::Infinity => Ordering::Greater,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(p) => write!(f, "{p}"),
            Self::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "Inf" | "infinity" | "∞" => Ok(Self::Infinity),
            other => Ok(Self::Finite(other.parse()?)),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Str(String),
            Int(i64),
            Float(f64),
        }
        let s = match Raw::deserialize(d)? {
            Raw::Str(s) => s,
            Raw::Int(i) => i.to_string(),
            Raw::Float(f) => f.to_string(),
        };
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `(α, β, N, γ)` for `∂ₜᵅu + (−Δ)ᵝu = f` with `‖f(·,t)‖₁ ≲ (1+t)^{−γ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProblemParams {
    alpha: Real,
    beta: Real,
    dim: u32,
    gamma: Real,
}

impl ProblemParams {
    pub fn new(alpha: Real, beta: Real, dim: u32, gamma: Real) -> Result<Self> {
        let (a, b, g) = (alpha.value(), beta.value(), gamma.value());
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidParams(format!("alpha must lie in (0,1), got {a}")));
        }
        if !(b > 0.0 && b <= 1.0) {
            return Err(Error::InvalidParams(format!("beta must lie in (0,1], got {b}")));
        }
        if dim == 0 {
            return Err(Error::InvalidParams("dimension must be positive".into()));
        }
        // N > 4β, decided exactly when β is rational.
        let four_beta = Real::int(4).mul(beta);
        if Real::int(dim as i64).compare(&four_beta) != Ordering::Greater {
            return Err(Error::InvalidParams(format!(
                "N > 4β violated: N = {dim}, 4β = {}",
                four_beta.value()
            )));
        }
        if !g.is_finite() {
            return Err(Error::InvalidParams("gamma must be finite".into()));
        }
        Ok(Self { alpha, beta, dim, gamma })
    }

    /// Convenience constructor from floats.
    pub fn from_f64(alpha: f64, beta: f64, dim: u32, gamma: f64) -> Result<Self> {
        Self::new(
            exact_if_simple(alpha),
            exact_if_simple(beta),
            dim,
            exact_if_simple(gamma),
        )
    }

    pub fn with_gamma(&self, gamma: Real) -> Self {
        Self { gamma, ..*self }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.value()
    }

    pub fn beta(&self) -> f64 {
        self.beta.value()
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn gamma(&self) -> f64 {
        self.gamma.value()
    }

    pub fn alpha_real(&self) -> Real {
        self.alpha
    }

    pub fn beta_real(&self) -> Real {
        self.beta
    }

    pub fn gamma_real(&self) -> Real {
        self.gamma
    }

    pub fn dim_real(&self) -> Real {
        Real::int(self.dim as i64)
    }

    /// `α/(2β)`: the diffusive scale is `|x| ≍ t^{α/(2β)}`.
    pub fn diffusive_exponent(&self) -> f64 {
        self.alpha() / (2.0 * self.beta())
    }

    /// `αN/(2β)` as an exact value when possible.
    pub fn alpha_n_over_two_beta(&self) -> Real {
        self.alpha
            .mul(self.dim_real())
            .div(Real::int(2).mul(self.beta))
    }
}

/// Floats such as `0.5` or `2.0` that are short binary fractions are taken
/// as exact rationals.
fn exact_if_simple(x: f64) -> Real {
    let scaled = x * 1024.0;
    if scaled.is_finite() && scaled.fract() == 0.0 && scaled.abs() < 1e15 {
        Real::ratio(scaled as i64, 1024)
    } else {
        Real::float(x)
    }
}

/// Critical exponents derived from [`ProblemParams`]; never stored separately.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalExponents {
    /// `N/(N−4β)`: `Y(·,t) ∈ Lᵖ` iff `p < p_star`.
    pub p_star: Real,
    /// `N/(N−2β)`: border of time-local `Lᵖ` integrability of `Y`.
    pub p_c: Real,
    /// `α/(2β)`.
    pub diffusive_exponent: f64,
}

pub fn critical_exponents(params: &ProblemParams) -> CriticalExponents {
    let n = params.dim_real();
    let b = params.beta_real();
    CriticalExponents {
        p_star: n.div(n.sub(Real::int(4).mul(b))),
        p_c: n.div(n.sub(Real::int(2).mul(b))),
        diffusive_exponent: params.diffusive_exponent(),
    }
}

/// `q_c(p) = N/(2β + N/p)`, exact when the inputs are rational.
pub fn q_c_real(params: &ProblemParams, p: Exponent) -> Real {
    let n = params.dim_real();
    let two_beta = Real::int(2).mul(params.beta_real());
    n.div(two_beta.add(n.mul(p.reciprocal())))
}

pub fn q_c(params: &ProblemParams, p: Exponent) -> f64 {
    q_c_real(params, p).value()
}

/// Position of `p` relative to the critical exponents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PRegime {
    Subcritical,
    Critical,
    MidSupercritical,
    PStar,
    AbovePStar,
}

impl PRegime {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Subcritical => "p<p_c",
            Self::Critical => "p=p_c",
            Self::MidSupercritical => "p_c<p<p_*",
            Self::PStar => "p=p_*",
            Self::AbovePStar => "p>p_*",
        }
    }
}

pub fn classify_p(params: &ProblemParams, p: Exponent) -> PRegime {
    let crit = critical_exponents(params);
    match p.compare(&crit.p_c) {
        Ordering::Less => PRegime::Subcritical,
        Ordering::Equal => PRegime::Critical,
        Ordering::Greater => match p.compare(&crit.p_star) {
            Ordering::Less => PRegime::MidSupercritical,
            Ordering::Equal => PRegime::PStar,
            Ordering::Greater => PRegime::AbovePStar,
        },
    }
}
