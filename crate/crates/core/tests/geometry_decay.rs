use curvmax_core::geometry::{
    decay_along, decay_slope, measure_fourier, normal_direction, phase_value, sample_directions,
    stationary_point, worst_direction_decay, Cutoff, SurfaceSpec,
};
use curvmax_core::Execution;
use proptest::prelude::*;

fn lambdas() -> Vec<f64> {
    (4..=10).map(|e| 2f64.powi(e)).collect()
}

/// The parabola piece over `[1/2, 2]`.
fn parabola_piece() -> (SurfaceSpec, Cutoff) {
    (
        SurfaceSpec::finite_type_curve(2, 0.0, vec![1.0], 1, 2.0).unwrap(),
        Cutoff::bump_on(0.5, 2.0).unwrap(),
    )
}

#[test]
fn normal_direction_decays_like_the_square_root() {
    let (spec, cutoff) = parabola_piece();
    for x0 in [0.8, 1.25, 1.6] {
        let n = normal_direction(&spec, x0).unwrap();
        let m = decay_along(&spec, &cutoff, &n, &lambdas(), 1e-10, Execution::Parallel).unwrap();
        let fit = decay_slope(&lambdas(), &m).unwrap();
        assert!(
            (fit.slope + 0.5).abs() <= 0.05,
            "x0 {x0}: slope {}",
            fit.slope
        );
    }
}

#[test]
fn off_the_normal_cone_decay_is_rapid() {
    let (spec, cutoff) = parabola_piece();
    // Normals of the piece are (−2x, 1)/|·| with 2x ∈ [1, 4]; this direction
    // is far from all of them.
    let w = [1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()];
    let m = decay_along(&spec, &cutoff, &w, &lambdas(), 1e-13, Execution::Parallel).unwrap();
    let fit = decay_slope(&lambdas(), &m).unwrap();
    assert!(fit.slope <= -4.0, "slope {}", fit.slope);
}

#[test]
fn finite_type_worst_direction_decay() {
    for d in [2u32, 3, 4] {
        let spec = SurfaceSpec::finite_type_curve(d, 0.0, vec![1.0], 1, 1.0).unwrap();
        let cutoff = Cutoff::bump(1, 1.0).unwrap();
        let dirs = sample_directions(2, 64);
        let m = worst_direction_decay(
            &spec,
            &cutoff,
            &dirs,
            &lambdas(),
            1e-10,
            Execution::Parallel,
        )
        .unwrap();
        let fit = decay_slope(&lambdas(), &m).unwrap();
        assert!(
            fit.slope <= -1.0 / d as f64 + 0.1,
            "d {d}: slope {}",
            fit.slope
        );
    }
}

#[test]
fn perturbed_profile_keeps_its_decay() {
    // φ(x) = 1 + x²/2 keeps the type at 0; the worst-direction slope is the
    // same as for the pure power.
    let spec = SurfaceSpec::finite_type_curve(3, 0.0, vec![1.0, 0.0, 0.5], 2, 1.0).unwrap();
    let cutoff = Cutoff::bump(1, 1.0).unwrap();
    let dirs = sample_directions(2, 64);
    let m = worst_direction_decay(
        &spec,
        &cutoff,
        &dirs,
        &lambdas(),
        1e-10,
        Execution::Parallel,
    )
    .unwrap();
    assert!(decay_slope(&lambdas(), &m).unwrap().slope <= -1.0 / 3.0 + 0.1);
}

#[test]
fn stationary_point_is_critical() {
    for d in 2u32..7 {
        for i in 1..50 {
            let s = 0.1 * i as f64;
            let sp = stationary_point(s, d).unwrap();
            let derivative = -s + d as f64 * sp.x.powi(d as i32 - 1);
            assert!(derivative.abs() <= 1e-13 * s.max(1.0), "d {d} s {s}");
            let inside = s >= d as f64 && s <= d as f64 * 2f64.powi(d as i32 - 1);
            assert_eq!(sp.in_support, inside);
        }
    }
}

proptest! {
    #[test]
    fn conjugate_symmetry(x in -50.0f64..50.0, y in -50.0f64..50.0, d in 2u32..5) {
        let spec = SurfaceSpec::finite_type_curve(d, 0.3, vec![1.0], 1, 0.5).unwrap();
        let cutoff = Cutoff::bump(1, 0.5).unwrap();
        let a = measure_fourier(&spec, &cutoff, &[x, y], 1e-11).unwrap();
        let b = measure_fourier(&spec, &cutoff, &[-x, -y], 1e-11).unwrap();
        prop_assert!((a - b.conj()).norm() < 1e-9);
    }

    #[test]
    fn phase_is_homogeneous(s in 0.1f64..10.0, lambda in 0.1f64..100.0, t in 0.5f64..2.0, d in 2u32..6) {
        let xi = [-s, 1.0];
        let base = phase_value(&xi, t, d).unwrap();
        let scaled = phase_value(&[-s * lambda, lambda], t, d).unwrap();
        prop_assert!((scaled - lambda * base).abs() <= 1e-10 * scaled.abs().max(1.0));
    }
}
