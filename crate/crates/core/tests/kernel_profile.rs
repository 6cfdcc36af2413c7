//! Kernel profile identities, bounds and serialization.

mod common;

use std::sync::OnceLock;

use nlheat_core::kernel::build_profile;
use nlheat_core::specfun::gamma;
use nlheat_core::{Exponent, KernelProfile, MlfAccuracy, ProblemParams, ProfileGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn profile_a() -> &'static KernelProfile {
    static P: OnceLock<KernelProfile> = OnceLock::new();
    P.get_or_init(|| {
        let params = ProblemParams::from_f64(0.5, 1.0, 5, 0.0).unwrap();
        build_profile(&params, &ProfileGrid::default(), &MlfAccuracy::default()).unwrap()
    })
}

fn profile_b() -> &'static KernelProfile {
    static P: OnceLock<KernelProfile> = OnceLock::new();
    P.get_or_init(|| {
        let params = ProblemParams::from_f64(0.5, 0.5, 3, 0.0).unwrap();
        build_profile(&params, &ProfileGrid::default(), &MlfAccuracy::default()).unwrap()
    })
}

#[test]
fn mass_matches_time_power() {
    for prof in [profile_a(), profile_b()] {
        let alpha = prof.params.alpha();
        for t in [0.25f64, 1.0, 4.0, 100.0] {
            let want = t.powf(alpha - 1.0) / gamma(alpha);
            let got = common::radial_mass(prof, t);
            assert!((got - want).abs() < 1e-5 * want, "t = {t}: {got} vs {want}");
        }
    }
}

#[test]
fn self_similar_scaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for prof in [profile_a(), profile_b()] {
        let p = &prof.params;
        let a = p.diffusive_exponent();
        let k = p.alpha() - 1.0 - p.alpha() * p.dim() as f64 / (2.0 * p.beta());
        for _ in 0..100 {
            let r = 10f64.powf(rng.gen_range(-2.0..2.0));
            let t = 10f64.powf(rng.gen_range(-2.0..3.0));
            let lam = 10f64.powf(rng.gen_range(-2.0..2.0));
            let lhs = prof.eval_y(lam.powf(a) * r, lam * t).unwrap();
            let rhs = lam.powf(k) * prof.eval_y(r, t).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs(), "r={r} t={t} λ={lam}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn profile_is_positive() {
    for prof in [profile_a(), profile_b()] {
        assert_eq!(prof.values.len(), 400);
        assert!(prof.values.iter().all(|v| *v > 0.0));
        for i in 0..2000 {
            let xi = 10f64.powf(-4.0 + 8.0 * i as f64 / 1999.0);
            assert!(prof.eval_g(xi).unwrap() > 0.0, "G({xi}) not positive");
        }
    }
}

#[test]
fn text_round_trip_is_exact() {
    for prof in [profile_a(), profile_b()] {
        let text = prof.to_text();
        let back = KernelProfile::from_text(&text).unwrap();
        assert_eq!(back.to_text(), text);
        assert_eq!(back.values, prof.values);
        for xi in [1e-4, 0.3, 2.0, 50.0, 5e3] {
            assert_eq!(back.eval_g(xi).unwrap(), prof.eval_g(xi).unwrap());
        }
    }
    assert!(KernelProfile::from_text("nlheat-profile v2\n").is_err());
}

#[test]
fn bands_are_bounded_and_grid_stable() {
    for prof in [profile_a(), profile_b()] {
        let report = prof.check_profile_bounds().unwrap();
        for b in &report.bands {
            assert!(b.is_finite() && b.ratio() < 50.0, "{}: {:?}", b.label, b);
        }
        let refined = build_profile(&prof.params, &prof.grid.refined(), &prof.mlf).unwrap();
        let change = report.max_relative_change(&refined.check_profile_bounds().unwrap());
        assert!(change < 0.2, "band change {change}");
    }
}

#[test]
fn lp_norms() {
    let prof = profile_a();
    // p_* = 5 for (0.5, 1, 5)
    assert!(prof.lp_constant(Exponent::ratio(5, 1)).is_err());
    assert!(prof.lp_constant(Exponent::Infinity).is_err());
    let one = prof.lp_constant(Exponent::ratio(1, 1)).unwrap();
    assert!((one - 1.0 / gamma(0.5)).abs() < 1e-6 * one);
    let r = prof.y_lp_norm(Exponent::ratio(1, 1), 4.0).unwrap() / prof.y_lp_norm(Exponent::ratio(1, 1), 1.0).unwrap();
    assert!((r - 0.5).abs() < 1e-12);
    // ‖Y(·,t)‖₂ ∝ t^{α−1−αN/(4β)}
    let r2 = prof.y_lp_norm(Exponent::ratio(2, 1), 16.0).unwrap() / prof.y_lp_norm(Exponent::ratio(2, 1), 1.0).unwrap();
    assert!((r2 - 16f64.powf(-0.5 - 0.625)).abs() < 1e-12 * r2);
}
