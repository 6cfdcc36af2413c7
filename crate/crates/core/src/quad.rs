//! Quadrature and interpolation primitives: Gauss-Legendre rules, adaptive
//! Gauss-Kronrod (7, 15), the Levin u-transform and natural cubic splines.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated: `f64` and `Complex64`.
pub trait QuadValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
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
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate<T: QuadValue>(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> T) -> T {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut s = T::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s = s + f(c + h * x) * *w;
        }
        s * h
    }

    /// Composite rule over consecutive breakpoints.
    pub fn integrate_composite<T: QuadValue>(&self, breaks: &[f64], mut f: impl FnMut(f64) -> T) -> T {
        let mut s = T::default();
        for w in breaks.windows(2) {
            s = s + self.integrate(w[0], w[1], &mut f);
        }
        s
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared 16-point rule.
pub fn gl16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

/// Shared 32-point rule.
pub fn gl32() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(32))
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<T: QuadValue>(a: f64, b: f64, f: &mut impl FnMut(f64) -> T) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        let s = f1 + f2;
        k = k + s * WGK[j];
        if j % 2 == 1 {
            g = g + s * WG[j / 2];
        }
    }
    let k = k * h;
    let g = g * h;
    (k, (k - g).magnitude())
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct QuadOutcome<T> {
    pub value: T,
    pub abs_err: f64,
    /// Sum of `|∫|` over the final subintervals; a scale for cancellation.
    pub abs_mass: f64,
    pub intervals: usize,
    pub converged: bool,
}

impl<T> QuadOutcome<T> {
    pub fn require(self, what: &str) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::Quadrature(format!(
                "{what}: adaptive quadrature did not converge (error estimate {:e})",
                self.abs_err
            )))
        }
    }
}

struct Piece<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

impl<T> PartialEq for Piece<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T> Eq for Piece<T> {}
impl<T> PartialOrd for Piece<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Piece<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Stopping rule for [`gk_adaptive`]: the error estimate must fall below
/// `max(abs, rel·|I|, mass·Σ|I_k|)`. The `mass` term bounds the effort spent
/// on integrals that cancel to far below the size of their pieces.
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub mass: f64,
}

impl Tolerance {
    pub fn rel(rel: f64) -> Self {
        Self { abs: 0.0, rel, mass: 0.0 }
    }

    fn bound(&self, value: f64, mass: f64) -> f64 {
        self.abs.max(self.rel * value).max(self.mass * mass)
    }
}

/// Globally adaptive Gauss-Kronrod (7, 15) with initial breakpoints
/// `breaks` (endpoints included, ascending).
pub fn gk_adaptive<T: QuadValue>(
    breaks: &[f64],
    tol: Tolerance,
    max_intervals: usize,
    mut f: impl FnMut(f64) -> T,
) -> QuadOutcome<T> {
    let mut heap = BinaryHeap::new();
    let mut total = T::default();
    let mut err = 0.0;
    let mut mass = 0.0;
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (v, e) = gk15(w[0], w[1], &mut f);
        total = total + v;
        err += e;
        mass += v.magnitude();
        heap.push(Piece { a: w[0], b: w[1], value: v, err: e });
    }
    while err > tol.bound(total.magnitude(), mass) && heap.len() < max_intervals {
        let Some(p) = heap.pop() else { break };
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            heap.push(p);
            break;
        }
        let (v1, e1) = gk15(p.a, m, &mut f);
        let (v2, e2) = gk15(m, p.b, &mut f);
        total = total - p.value + v1 + v2;
        err += e1 + e2 - p.err;
        mass += v1.magnitude() + v2.magnitude() - p.value.magnitude();
        heap.push(Piece { a: p.a, b: m, value: v1, err: e1 });
        heap.push(Piece { a: m, b: p.b, value: v2, err: e2 });
    }
    // Recompute sums to shed accumulated rounding from the updates.
    let mut value = T::default();
    let mut abs_err = 0.0;
    let mut abs_mass = 0.0;
    let n = heap.len();
    for p in heap.into_vec() {
        value = value + p.value;
        abs_err += p.err;
        abs_mass += p.value.magnitude();
    }
    let converged = abs_err <= tol.bound(value.magnitude(), abs_mass) * 1.0000001;
    QuadOutcome { value, abs_err, abs_mass, intervals: n, converged }
}

/// Levin u-transform of the series `Σ terms[m]`.
///
/// Returns the accelerated sum and the difference to the transform of one
/// order lower as an error estimate.
pub fn levin_u<T>(terms: &[T]) -> (T, f64)
where
    T: QuadValue + Mul<T, Output = T> + std::ops::Div<Output = T> + From<f64>,
{
    let n = terms.len();
    if n == 0 {
        return (T::default(), 0.0);
    }
    let mut partial = Vec::with_capacity(n);
    let mut s = T::default();
    for t in terms {
        s = s + *t;
        partial.push(s);
    }
    if n < 3 {
        let e = terms[n - 1].magnitude();
        return (s, e);
    }
    let est = |k: usize| -> Option<T> {
        // T_k^{(0)} using S_0..S_k with ω_m = (m+1)·a_m.
        let mut num = T::default();
        let mut den = T::default();
        let mut binom = 1.0f64;
        for j in 0..=k {
            let a = terms[j];
            if a.magnitude() == 0.0 {
                return None;
            }
            let omega = a * (j as f64 + 1.0);
            let inv = T::from(1.0) / omega;
            let scale = ((j as f64 + 1.0) / (k as f64 + 1.0)).powi(k as i32 - 1);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let c = sign * binom * scale;
            num = num + partial[j] * inv * c;
            den = den + inv * c;
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
        if den.magnitude() == 0.0 {
            None
        } else {
            Some(num / den)
        }
    };
    match (est(n - 1), est(n - 2)) {
        (Some(a), Some(b)) => (a, (a - b).magnitude()),
        _ => (s, terms[n - 1].magnitude()),
    }
}

/// Natural cubic spline through `(x_i, y_i)` with strictly increasing `x`.
#[derive(Clone, Debug)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n != y.len() || n < 2 {
            return Err(Error::InvalidParams("spline needs at least two matching points".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParams("spline abscissae must increase strictly".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("spline ordinates must be finite".into()));
        }
        let mut m = vec![0.0; n];
        if n > 2 {
            // Tridiagonal solve for interior second derivatives.
            let mut c = vec![0.0; n];
            let mut d = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
                let diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
                c[i] = h1 / diag;
                d[i] = (rhs - h0 * d[i - 1]) / diag;
            }
            for i in (1..n - 1).rev() {
                m[i] = d[i] - c[i] * m[i + 1];
            }
        }
        Ok(Self { x, y, m })
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    pub fn knots(&self) -> (&[f64], &[f64]) {
        (&self.x, &self.y)
    }

    /// Value at `t`; linear continuation outside the knot range.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0] + self.slope_at(0) * (t - self.x[0]);
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1] + self.slope_at(n - 1) * (t - self.x[n - 1]);
        }
        let i = self.x.partition_point(|v| *v <= t).clamp(1, n - 1) - 1;
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = 1.0 - a;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    fn slope_at(&self, i: usize) -> f64 {
        let n = self.x.len();
        if i == 0 {
            let h = self.x[1] - self.x[0];
            (self.y[1] - self.y[0]) / h - h * (2.0 * self.m[0] + self.m[1]) / 6.0
        } else {
            let h = self.x[n - 1] - self.x[n - 2];
            (self.y[n - 1] - self.y[n - 2]) / h + h * (self.m[n - 2] + 2.0 * self.m[n - 1]) / 6.0
        }
    }
}

/// `n` points spaced geometrically from `a` to `b` inclusive.
pub fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > 0.0 && n >= 2);
    let (la, lb) = (a.ln(), b.ln());
    let mut v: Vec<f64> = (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect();
    v[0] = a;
    v[n - 1] = b;
    v
}
