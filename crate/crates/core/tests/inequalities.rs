use axicone::field::{ScalarField, VectorField};
use axicone::geometry::MeridianDomain;
use axicone::grid::MeridianGrid;
use axicone::inequalities::*;
use axicone::solver::initial::{stream_velocity, swirl_velocity, StreamData};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI};
use std::sync::Arc;

fn grid(alpha: f64, n: usize) -> Arc<MeridianGrid<f64>> {
    MeridianGrid::new(MeridianDomain::new(alpha, 2).unwrap(), n, n).unwrap().shared()
}

/// Smooth field `Σ a_kl cos(kπ(2ρ − 1)) cos(l s)` with `s = φ − π/2`.
fn random_smooth(g: &Arc<MeridianGrid<f64>>, rng: &mut ChaCha8Rng) -> ScalarField<f64> {
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

#[test]
fn sharp_constants_respect_closed_forms() {
    let n = 257;
    let slack = 10.0 / (n * n) as f64;
    for (alpha, a, b) in [(FRAC_PI_6, 2.0 / 19.0, 3.0 / 25.0), (FRAC_PI_4, 2.0 / 9.0, 1.0 / 3.0)] {
        let dir = sharp_weighted_constant(alpha, PoincareSubspace::Dirichlet, n).unwrap();
        let mz = sharp_weighted_constant(alpha, PoincareSubspace::MeanZero, n).unwrap();
        assert!(dir <= b + slack, "alpha {alpha}: dirichlet {dir} vs {b}");
        assert!(mz <= a + slack, "alpha {alpha}: mean-zero {mz} vs {a}");
        assert!(dir > 0.5 * b && mz > 0.5 * a);
    }
}

#[test]
fn sharp_constants_converge_at_second_order() {
    for mode in [PoincareSubspace::Dirichlet, PoincareSubspace::MeanZero] {
        let c: Vec<f64> = [65, 129, 257, 513].iter().map(|&n| sharp_weighted_constant(FRAC_PI_6, mode, n).unwrap()).collect();
        let d1 = (c[1] - c[0]).abs();
        let d2 = (c[2] - c[1]).abs();
        let d3 = (c[3] - c[2]).abs();
        let p1 = (d1 / d2).log2();
        let p2 = (d2 / d3).log2();
        assert!(p1 > 1.9 && p2 > 1.9, "{mode:?}: orders {p1} {p2}");
    }
}

#[test]
fn sharp_constants_below_closed_forms_across_angles() {
    let n = 257;
    let slack = 10.0 / (n * n) as f64;
    for k in 1..=20 {
        let alpha = FRAC_PI_4 * k as f64 / 20.0;
        let dir = sharp_weighted_constant(alpha, PoincareSubspace::Dirichlet, n).unwrap();
        assert!(dir <= poincare_const_b(alpha).unwrap() + slack, "alpha {alpha}");
    }
    for k in 1..=30 {
        let alpha = 1.5 * k as f64 / 30.0;
        let mz = sharp_weighted_constant(alpha, PoincareSubspace::MeanZero, n).unwrap();
        assert!(mz <= poincare_const_a(alpha).unwrap() + slack, "alpha {alpha}");
    }
}

#[test]
fn hardy_on_constant_function() {
    let g = grid(FRAC_PI_6, 129);
    let r = hardy_check(&ScalarField::constant(&g, 1.0), 1.0).unwrap();
    // ∫ρ⁻² dV = 2π·2 sinα·(1 − 1/2) and |D₂| = 2π·2 sinα·(1 − 1/8)/3 at α = π/6.
    assert!((r.lhs - PI).abs() < 1e-3, "{}", r.lhs);
    assert!((r.rhs - 56.0 * 7.0 * PI / 12.0).abs() < 1e-2, "{}", r.rhs);
    assert!(r.pass);
}

#[test]
fn hardy_on_random_corpus() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = grid(FRAC_PI_6, 33);
    for _ in 0..200 {
        let r = hardy_check(&random_smooth(&g, &mut rng), 1.0).unwrap();
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn hardy_rejects_bad_epsilon() {
    let g = grid(FRAC_PI_6, 17);
    assert!(hardy_check(&ScalarField::constant(&g, 1.0), 0.0).is_err());
}

#[test]
fn curl_grad_on_manufactured_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = grid(FRAC_PI_6, 65);
    for _ in 0..20 {
        let d = StreamData {
            lambda1: rng.gen_range(-2.0..2.0),
            lambda2: rng.gen_range(-2.0..2.0),
            meridional_mode: rng.gen_range(1..=3),
            swirl_mode: rng.gen_range(0..=2),
        };
        let r = curl_grad_check(&stream_velocity(&g, d)).unwrap_or_else(|e| panic!("{d:?}: {e}"));
        assert!(r.pass, "{d:?}: {r:?}");
    }
}

#[test]
fn curl_grad_rejects_the_swirl() {
    let g = grid(FRAC_PI_6, 33);
    match curl_grad_check(&swirl_velocity(&g, 1.0)) {
        Err(InequalityError::Hypothesis { hypothesis, lhs, rhs, .. }) => {
            assert_eq!(hypothesis, "even-odd-odd symmetry");
            // The swirl is curl-free, so the inequality itself would fail.
            assert!(lhs > rhs);
        }
        other => panic!("expected a hypothesis failure, got {other:?}"),
    }
}

#[test]
fn curl_grad_rejects_wide_cones() {
    let g = grid(PI / 3.0, 33);
    let v = stream_velocity(&g, StreamData::example(1.0, 1.0));
    assert!(matches!(curl_grad_check(&v), Err(InequalityError::Hypothesis { hypothesis: "alpha <= pi/6", .. })));
}

#[test]
fn curl_grad_rejects_divergent_fields() {
    let g = grid(FRAC_PI_6, 33);
    let v = VectorField::from_fn(&g, |r, p| {
        let s = p - FRAC_PI_2;
        [(r - 0.5) * (1.0 - r) * (s * s - FRAC_PI_6 * FRAC_PI_6), 0.0, 0.0]
    });
    assert!(matches!(curl_grad_check(&v), Err(InequalityError::Hypothesis { hypothesis: "divergence-free", .. })));
}

#[test]
fn poincare_field_checks() {
    let g = grid(FRAC_PI_6, 65);
    let q = FRAC_PI_2 / FRAC_PI_6;
    let dir = ScalarField::from_fn(&g, |r, p| r * r * (q * (p - FRAC_PI_2)).cos());
    let r = poincare_field_check(&dir, PoincareSubspace::Dirichlet).unwrap();
    assert!(r.pass && r.lhs > 0.0, "{r:?}");
    let odd = ScalarField::from_fn(&g, |r, p| (1.0 + r) * (q * (p - FRAC_PI_2)).sin());
    let r = poincare_field_check(&odd, PoincareSubspace::MeanZero).unwrap();
    assert!(r.pass, "{r:?}");
    assert!(poincare_field_check(&odd, PoincareSubspace::Dirichlet).is_err());
    assert!(poincare_field_check(&dir, PoincareSubspace::MeanZero).is_err());
}

#[test]
fn h1_ratio_within_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = grid(FRAC_PI_6, 33);
    let bound = h1_equivalence_bound(FRAC_PI_6);
    for _ in 0..20 {
        let v = VectorField::new(random_smooth(&g, &mut rng), random_smooth(&g, &mut rng), random_smooth(&g, &mut rng)).unwrap();
        let r = h1_equivalence_ratio(&v);
        assert!(r <= bound && r >= 1.0 / bound, "{r}");
    }
}

#[test]
fn f32_constants() {
    let c = sharp_weighted_constant(std::f32::consts::FRAC_PI_6, PoincareSubspace::Dirichlet, 129).unwrap();
    assert!((c as f64 - sharp_weighted_constant(FRAC_PI_6, PoincareSubspace::Dirichlet, 129).unwrap()).abs() < 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hardy_holds_for_random_fields(seed in any::<u64>()) {
        let g = grid(FRAC_PI_6, 21);
        let f = random_smooth(&g, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(hardy_check(&f, 1.0).unwrap().pass);
    }

    #[test]
    fn hardy_holds_for_any_epsilon(eps in 0.05f64..20.0) {
        let g = grid(FRAC_PI_6, 21);
        let f = ScalarField::from_fn(&g, |r, p| (3.0 * r).sin() + p.cos());
        prop_assert!(hardy_check(&f, eps).unwrap().pass);
    }

    #[test]
    fn curl_grad_holds_for_random_amplitudes(l1 in -3.0f64..3.0, l2 in -3.0f64..3.0) {
        let g = grid(FRAC_PI_6, 33);
        let r = curl_grad_check(&stream_velocity(&g, StreamData::example(l1, l2))).unwrap();
        prop_assert!(r.pass);
    }

    #[test]
    fn closed_forms_are_monotone(a in 0.05f64..0.75, b in 0.05f64..0.75) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(poincare_const_b(lo).unwrap() <= poincare_const_b(hi).unwrap());
        prop_assert!(poincare_const_a(lo).unwrap() <= poincare_const_a(hi).unwrap());
    }
}
