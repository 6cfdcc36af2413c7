//! Fixtures shared by the criterion benchmarks in `benches/`.

use nlheat_core::{Forcing, ProblemParams, Real};

/// `(α, β, N, γ) = (1/2, 1, 5, 2)`.
pub fn config_a() -> ProblemParams {
    ProblemParams::new(Real::ratio(1, 2), Real::int(1), 5, Real::int(2)).expect("valid parameters")
}

/// `(1/2, 1/2, 3, 2)`: algebraic kernel tail.
pub fn config_b() -> ProblemParams {
    ProblemParams::new(Real::ratio(1, 2), Real::ratio(1, 2), 3, Real::int(2)).expect("valid parameters")
}

/// `(1+t)^{−γ} χ_{B₁}`.
pub fn unit_ball_forcing(params: &ProblemParams) -> Forcing {
    Forcing::ball(params, 1.0).expect("valid forcing")
}
