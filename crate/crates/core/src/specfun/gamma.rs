use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// `sin(πx)` with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    // r in [-1, 1]
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    if r > 0.5 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.5 {
        -(PI * (1.0 + r)).sin()
    } else {
        (PI * r).sin()
    }
}

fn lanczos_sum(z: f64) -> f64 {
    // z = x - 1
    let mut a = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    a
}

/// Stirling series for `ln Γ(x)`, accurate for `x ≥ 10`.
fn log_gamma_stirling(x: f64) -> f64 {
    const C: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
    ];
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut corr = 0.0;
    let mut p = inv;
    for c in C {
        corr += c * p;
        p *= inv2;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + corr
}

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "log_gamma requires x > 0, got {x}");
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    if x >= 10.0 {
        return log_gamma_stirling(x);
    }
    if x < 0.5 {
        // Γ(x) = Γ(x+1)/x keeps the Lanczos argument away from the pole.
        return log_gamma(x + 1.0) - x.ln();
    }
    // Shift up into the Stirling range; the product is exact enough for x < 10.
    let mut prod = 1.0;
    let mut y = x;
    while y < 10.0 {
        prod *= y;
        y += 1.0;
    }
    log_gamma_stirling(y) - prod.ln()
}

/// `Γ(x)` for real `x`; infinite at the poles.
pub fn gamma(x: f64) -> f64 {
    if x <= 0.0 && x.fract() == 0.0 {
        return f64::INFINITY;
    }
    if x < 0.5 {
        return PI / (sin_pi(x) * gamma(1.0 - x));
    }
    if x > 171.0 {
        return f64::INFINITY;
    }
    if x >= 10.0 {
        return log_gamma_stirling(x).exp();
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z)
}

/// `1/Γ(x)`, zero at the poles `x = 0, −1, −2, …`.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x.fract() == 0.0 {
        return 0.0;
    }
    if x < 0.5 {
        // 1/Γ(x) = Γ(1−x) sin(πx)/π
        return gamma(1.0 - x) * sin_pi(x) / PI;
    }
    if x > 170.0 {
        return (-log_gamma(x)).exp();
    }
    1.0 / gamma(x)
}

/// Surface area `ω_{N−1} = 2π^{N/2}/Γ(N/2)` of the unit sphere in `ℝᴺ`.
pub fn unit_sphere_area(dim: u32) -> f64 {
    let h = 0.5 * dim as f64;
    2.0 * (h * std::f64::consts::PI.ln() - log_gamma(h)).exp()
}

/// Volume `π^{N/2}/Γ(N/2 + 1)` of the unit ball in `ℝᴺ`.
pub fn unit_ball_volume(dim: u32) -> f64 {
    unit_sphere_area(dim) / dim as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn log_gamma_examples() {
        assert_eq!(log_gamma(1.0), 0.0);
        assert!(rel(log_gamma(0.5), 0.572_364_942_924_700_1) < 1e-14);
        // Γ(3.5) = 15√π/8
        let exact = (15.0 * PI.sqrt() / 8.0).ln();
        assert!(rel(log_gamma(3.5), exact) < 1e-14);
        assert!(rel(log_gamma(3.5), 1.200_973_602_347_074_2) < 1e-13);
        assert!(rel(log_gamma(100.0), 359.134_205_369_575_4) < 1e-14);
        assert!(rel(log_gamma(1e-3), 6.907_178_885_383_854) < 1e-13);
    }

    #[test]
    fn gamma_values_and_recurrence() {
        assert!(rel(gamma(0.5), PI.sqrt()) < 1e-14);
        assert!(rel(gamma(5.0), 24.0) < 1e-14);
        assert!(rel(gamma(-0.5), -2.0 * PI.sqrt()) < 1e-14);
        for i in 1..200 {
            let x = 0.037 * i as f64 + 0.01;
            assert!(rel(gamma(x + 1.0), x * gamma(x)) < 1e-13, "x = {x}");
        }
    }

    #[test]
    fn reciprocal_gamma_poles() {
        for n in 0..6 {
            assert_eq!(rgamma(-(n as f64)), 0.0);
        }
        assert!(rel(rgamma(-1.5), 3.0 / (4.0 * PI.sqrt())) < 1e-14);
        assert!(rel(rgamma(0.5), 1.0 / PI.sqrt()) < 1e-15);
    }

    #[test]
    fn sphere_and_ball_constants() {
        use std::f64::consts::PI;
        assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((unit_sphere_area(2) - 2.0 * PI).abs() < 1e-13);
        // 8π²/15
        assert!((unit_ball_volume(5) - 5.263_789_013_914_324).abs() < 1e-12);
    }
}
