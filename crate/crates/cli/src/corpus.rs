//! Seeded random test fields.

use axicone::field::ScalarField;
use axicone::solver::initial::StreamData;
use axicone::Grid;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

/// `c + Σ a_kl cos(kπ(2ρ − 1)) cos(l(φ − π/2)) / (1 + k + l)` for `k, l < 4`, coefficients uniform in `[−1, 1]`.
pub fn random_smooth(g: &Arc<Grid>, rng: &mut ChaCha8Rng) -> ScalarField<f64> {
    let a: Vec<[f64; 4]> = (0..4).map(|_| [(); 4].map(|_| rng.gen_range(-1.0..1.0))).collect();
    let shift = rng.gen_range(-1.0..1.0);
    ScalarField::from_fn(g, |r, p| {
        let s = p - FRAC_PI_2;
        let mut f = shift;
        for (k, row) in a.iter().enumerate() {
            for (l, c) in row.iter().enumerate() {
                f += c * (k as f64 * PI * (2.0 * r - 1.0)).cos() * (l as f64 * s).cos() / (1 + k + l) as f64;
            }
        }
        f
    })
}

/// Stream-function data with random amplitudes and low modes.
pub fn random_stream(rng: &mut ChaCha8Rng) -> StreamData {
    StreamData {
        lambda1: rng.gen_range(-2.0..2.0),
        lambda2: rng.gen_range(-2.0..2.0),
        meridional_mode: rng.gen_range(1..=3),
        swirl_mode: rng.gen_range(0..=2),
    }
}
