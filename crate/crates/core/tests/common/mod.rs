//! Reference data shared by the integration targets.
#![allow(dead_code, clippy::approx_constant, clippy::excessive_precision)]

// (a, b, |x|, E_{a,b}(−|x|)) from a 30-digit reference implementation.
#[rustfmt::skip]
pub const MLF_GRID: &[(f64, f64, f64, f64)] = &[
    (0.3, 0.3, 0.0, 0.33427275256419055), (0.3, 0.3, 0.5, 0.14375650014722127),
    (0.3, 0.3, 1.0, 0.077316799030089676), (0.3, 0.3, 5.0, 0.0072751008031549119),
    (0.3, 0.3, 20.0, 0.00054462489804465209), (0.3, 0.3, 100.0, 2.2841967214289511e-5),
    (0.3, 1.0, 0.0, 1.0), (0.3, 1.0, 0.5, 0.63264900594359902),
    (0.3, 1.0, 1.0, 0.45659440832969067), (0.3, 1.0, 5.0, 0.13708086902027064),
    (0.3, 1.0, 20.0, 0.037406226213884453), (0.3, 1.0, 100.0, 0.0076588562222866414),
    (0.3, 1.3, 0.0, 1.1142425085473018), (0.3, 1.3, 0.5, 0.73470198811280196),
    (0.3, 1.3, 1.0, 0.54340559167030933), (0.3, 1.3, 5.0, 0.17258382619594587),
    (0.3, 1.3, 20.0, 0.048129688689305777), (0.3, 1.3, 100.0, 0.0099234114377771336),
    (0.5, 0.5, 0.0, 0.56418958354775629), (0.5, 0.5, 0.5, 0.25634441145129335),
    (0.5, 0.5, 1.0, 0.13660600739194928), (0.5, 0.5, 5.0, 0.010666394882413155),
    (0.5, 0.5, 20.0, 0.00070260872672990058), (0.5, 0.5, 100.0, 2.8205248812996592e-5),
    (0.5, 1.0, 0.0, 1.0), (0.5, 1.0, 0.5, 0.61569034419292587),
    (0.5, 1.0, 1.0, 0.427583576155807), (0.5, 1.0, 5.0, 0.11070463773306863),
    (0.5, 1.0, 20.0, 0.028174348741051319), (0.5, 1.0, 100.0, 0.0056416137829894329),
    (0.5, 1.5, 0.0, 1.1283791670955126), (0.5, 1.5, 0.5, 0.76861931161414825),
    (0.5, 1.5, 1.0, 0.572416423844193), (0.5, 1.5, 5.0, 0.17785907245338627),
    (0.5, 1.5, 20.0, 0.048591282562947434), (0.5, 1.5, 100.0, 0.0099435838621701057),
    (0.7, 0.7, 0.0, 0.770383183866566), (0.7, 0.7, 0.5, 0.38661080082252713),
    (0.7, 0.7, 1.0, 0.21039334638902371), (0.7, 0.7, 5.0, 0.012201124167156127),
    (0.7, 0.7, 20.0, 0.00063299724600969779), (0.7, 0.7, 100.0, 2.3777205523569579e-5),
    (0.7, 1.0, 0.0, 1.0), (0.7, 1.0, 0.5, 0.60514759205956427),
    (0.7, 1.0, 1.0, 0.39961197811559938), (0.7, 1.0, 5.0, 0.077569357764769802),
    (0.7, 1.0, 20.0, 0.017395698291603977), (0.7, 1.0, 100.0, 0.0033696874163059938),
    (0.7, 1.7, 0.0, 1.1005474055236657), (0.7, 1.7, 0.5, 0.78970481588087146),
    (0.7, 1.7, 1.0, 0.60038802188440062), (0.7, 1.7, 5.0, 0.18448612844704604),
    (0.7, 1.7, 20.0, 0.049130215085419801), (0.7, 1.7, 100.0, 0.0099663031258369401),
    (0.9, 0.9, 0.0, 0.93577872091287277), (0.9, 0.9, 0.5, 0.53190235156843732),
    (0.9, 0.9, 1.0, 0.30814879777662194), (0.9, 0.9, 5.0, 0.010212790452992134),
    (0.9, 0.9, 20.0, 0.00028402595741192644), (0.9, 0.9, 100.0, 9.785063588909693e-6),
    (0.9, 1.0, 0.0, 1.0), (0.9, 1.0, 0.5, 0.60340549869586097),
    (0.9, 1.0, 1.0, 0.37606602142464188), (0.9, 1.0, 5.0, 0.034431324804098424),
    (0.9, 1.0, 20.0, 0.0057495078161091139), (0.9, 1.0, 100.0, 0.0010689724182870893),
    (0.9, 1.9, 0.0, 1.0397541343476364), (0.9, 1.9, 0.5, 0.79318900260827806),
    (0.9, 1.9, 1.0, 0.62393397857535812), (0.9, 1.9, 5.0, 0.19311373503918032),
    (0.9, 1.9, 20.0, 0.049712524609194544), (0.9, 1.9, 100.0, 0.0099893102758171291),
];

use nlheat_core::quad::{gk_adaptive, Tolerance};
use nlheat_core::specfun::unit_sphere_area;
use nlheat_core::KernelProfile;

/// `∫ Y(x,t) dx` by adaptive quadrature of `eval_y` in `ln r`.
pub fn radial_mass(profile: &KernelProfile, t: f64) -> f64 {
    let p = &profile.params;
    let n = p.dim() as i32;
    let s = t.powf(p.diffusive_exponent());
    let breaks: Vec<f64> = (-8..=12).map(|k| (s * 10f64.powi(k)).ln()).collect();
    let out = gk_adaptive(&breaks, Tolerance { abs: 0.0, rel: 1e-10, mass: 0.0 }, 20000, |x: f64| {
        let r = x.exp();
        profile.eval_y(r, t).unwrap() * r.powi(n)
    });
    unit_sphere_area(p.dim()) * out.value
}

use nlheat_core::{Exponent, ProblemParams, Real, RegionSpec};

/// One expected row of the rate tables.
pub struct GoldenRow {
    pub config: char,
    pub gamma: &'static str,
    pub p: &'static str,
    pub region: RegionSpec,
    /// `(t_exp, log_exp, g_exp)` in any order.
    pub monomials: &'static [(f64, u8, f64)],
    pub boundary: bool,
    pub dominant: f64,
}

impl GoldenRow {
    pub fn params(&self) -> ProblemParams {
        let gamma: Real = self.gamma.parse().unwrap();
        match self.config {
            'A' => ProblemParams::new(Real::ratio(1, 2), Real::int(1), 5, gamma).unwrap(),
            _ => ProblemParams::new(Real::ratio(1, 2), Real::ratio(1, 2), 3, gamma).unwrap(),
        }
    }

    pub fn exponent(&self) -> Exponent {
        self.p.parse().unwrap()
    }
}

const EXT: RegionSpec = RegionSpec::Exterior { nu: 1.0 };
const CPT: RegionSpec = RegionSpec::Compact { r0: 2.0 };
const INT: RegionSpec = RegionSpec::Intermediate { nu: 1.0, mu: 2.0, theta: 0.1 };
const INT_B: RegionSpec = RegionSpec::Intermediate { nu: 1.0, mu: 2.0, theta: 0.2 };
const GLO: RegionSpec = RegionSpec::Global;

macro_rules! row {
    ($c:expr, $g:expr, $p:expr, $r:expr, [$($m:expr),+], $b:expr, $d:expr) => {
        GoldenRow { config: $c, gamma: $g, p: $p, region: $r, monomials: &[$($m),+], boundary: $b, dominant: $d }
    };
}

// A = (1/2, 1, 5): αN/(2β) = 5/4, p_c = 5/3, p_* = 5.
// B = (1/2, 1/2, 3): αN/(2β) = 3/2, p_c = 3/2, p_* = 3.
#[rustfmt::skip]
pub const GOLDEN: &[GoldenRow] = &[
    // exterior
    row!('A', "1/2", "1", EXT, [(0.0, 0, 0.0)], false, 0.0),
    row!('A', "1", "1", EXT, [(-0.5, 1, 0.0)], true, -0.5),
    row!('A', "2", "1", EXT, [(-0.5, 0, 0.0)], false, -0.5),
    row!('A', "2", "2", EXT, [(-1.125, 0, 0.0)], false, -1.125),
    row!('A', "1/2", "inf", EXT, [(-1.25, 0, 0.0)], false, -1.25),
    row!('A', "1", "2", EXT, [(-1.125, 1, 0.0)], true, -1.125),
    row!('B', "1/2", "2", EXT, [(-0.75, 0, 0.0)], false, -0.75),
    // compact
    row!('A', "1/2", "inf", CPT, [(-0.5, 0, 0.0)], false, -0.5),
    row!('A', "2", "inf", CPT, [(-1.5, 0, 0.0)], false, -1.5),
    row!('A', "3/2", "1", CPT, [(-1.5, 0, 0.0)], true, -1.5),
    row!('A', "1", "2", CPT, [(-1.0, 0, 0.0)], false, -1.0),
    // intermediate, g(t) = t^θ
    row!('A', "1/2", "inf", INT, [(-0.5, 0, -3.0)], false, -0.8),
    row!('A', "1", "inf", INT, [(-1.0, 0, -3.0), (-1.5, 1, -1.0)], true, -1.3),
    row!('A', "2", "inf", INT, [(-2.0, 0, -3.0), (-1.5, 0, -1.0)], false, -1.6),
    row!('A', "2", "1", INT, [(-2.0, 0, 2.0), (-1.5, 0, 4.0)], false, -1.1),
    row!('B', "2", "inf", INT_B, [(-2.0, 0, -2.0), (-1.5, 0, -1.0)], false, -1.7),
    // global, p < p_c
    row!('A', "1/2", "1", GLO, [(0.0, 0, 0.0)], false, 0.0),
    row!('A', "1", "1", GLO, [(-0.5, 1, 0.0)], true, -0.5),
    row!('A', "2", "1", GLO, [(-0.5, 0, 0.0)], false, -0.5),
    row!('A', "0", "3/2", GLO, [(1.0 / 12.0, 0, 0.0)], false, 1.0 / 12.0),
    row!('B', "2", "1", GLO, [(-0.5, 0, 0.0)], false, -0.5),
    // global, p = p_c
    row!('A', "0", "5/3", GLO, [(0.0, 1, 0.0)], true, 0.0),
    row!('A', "1/2", "5/3", GLO, [(-0.5, 1, 0.0)], true, -0.5),
    row!('A', "1", "5/3", GLO, [(-1.0, 1, 0.0)], true, -1.0),
    row!('A', "2", "5/3", GLO, [(-1.0, 0, 0.0)], true, -1.0),
    row!('B', "0", "3/2", GLO, [(0.0, 1, 0.0)], true, 0.0),
    // global, p_c < p < p_*
    row!('A', "1/2", "2", GLO, [(-0.5, 0, 0.0)], false, -0.5),
    row!('A', "9/8", "2", GLO, [(-1.125, 0, 0.0)], true, -1.125),
    row!('A', "2", "2", GLO, [(-1.125, 0, 0.0)], false, -1.125),
    row!('A', "1", "3", GLO, [(-1.0, 0, 0.0)], false, -1.0),
    row!('A', "3/2", "3", GLO, [(-4.0 / 3.0, 0, 0.0)], false, -4.0 / 3.0),
    row!('B', "1/2", "2", GLO, [(-0.5, 0, 0.0)], false, -0.5),
    row!('B', "2", "2", GLO, [(-1.25, 0, 0.0)], false, -1.25),
    // global, p = p_*
    row!('A', "1/2", "5", GLO, [(-0.5, 0, 0.0)], true, -0.5),
    row!('A', "3/2", "5", GLO, [(-1.5, 1, 0.0)], true, -1.5),
    row!('A', "3", "5", GLO, [(-1.5, 1, 0.0)], true, -1.5),
    row!('B', "2", "3", GLO, [(-1.5, 1, 0.0)], true, -1.5),
    // global, p > p_*
    row!('A', "1/2", "10", GLO, [(-0.5, 0, 0.0)], false, -0.5),
    row!('A', "3/2", "10", GLO, [(-1.5, 0, 0.0)], true, -1.5),
    row!('A', "3", "10", GLO, [(-1.5, 0, 0.0)], false, -1.5),
    row!('A', "2", "inf", GLO, [(-1.5, 0, 0.0)], false, -1.5),
    row!('A', "0", "inf", GLO, [(0.0, 0, 0.0)], false, 0.0),
];

/// Checks one golden row, returning a description of the first mismatch.
pub fn check_golden(row: &GoldenRow) -> Result<(), String> {
    let pred = nlheat_core::rates::predict(&row.params(), row.exponent(), &row.region);
    let tag = format!("{} γ={} p={} {}", row.config, row.gamma, row.p, row.region.label());
    if pred.monomials.len() != row.monomials.len() {
        return Err(format!("{tag}: {} monomials, want {}", pred.monomials.len(), row.monomials.len()));
    }
    for &(t, l, g) in row.monomials {
        let hit = pred.monomials.iter().any(|m| {
            (m.t_exp.value() - t).abs() <= 1e-12 && m.log_exp == l && (m.g_exp.value() - g).abs() <= 1e-12
        });
        if !hit {
            return Err(format!("{tag}: missing t^{t} log^{l} g^{g} in {:?}", pred.monomials));
        }
    }
    if pred.boundary_flag != row.boundary {
        return Err(format!("{tag}: boundary flag {}", pred.boundary_flag));
    }
    if (pred.dominant_exponent() - row.dominant).abs() > 1e-12 {
        return Err(format!("{tag}: dominant {} want {}", pred.dominant_exponent(), row.dominant));
    }
    Ok(())
}
