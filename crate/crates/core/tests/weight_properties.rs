use curvmax_core::averaging::{lp_norm, weighted_lp_norm, Averager, GridFunction, TimeSampling};
use curvmax_core::delta_grid::{all_shifts, normalize_dilation, MeasuredBox};
use curvmax_core::geometry::{Cutoff, SurfaceSpec};
use curvmax_core::regions::{in_region, ExponentPoint, RegionKind};
use curvmax_core::weights::{
    alpha_exponent, alpha_exponent_exact, ap_characteristic, characteristic_bound, dyadic_family,
    rh_characteristic, sliding_family, weighted_norm_ratio, Weight,
};
use curvmax_core::Execution;
use num_rational::Rational64 as Q;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit_box() -> MeasuredBox {
    MeasuredBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap()
}

fn random_weight(seed: u64) -> Weight {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..256)
        .map(|_| rng.gen_range(-2.0f64..2.0).exp2())
        .collect();
    let data = GridFunction::new(unit_box(), vec![16, 16], values).unwrap();
    Weight::new(data, normalize_dilation(&[1.0, 2.0]).unwrap()).unwrap()
}

/// `⟨ω⟩⟨ω^{1−p'}⟩^{p−1}` and `⟨ω⟩_p / ⟨ω⟩` over one box, by scanning cells.
fn scan_characteristics(w: &Weight, b: &MeasuredBox, p: f64) -> (f64, f64) {
    let data = w.data();
    let vals: Vec<f64> = (0..data.len())
        .filter(|&i| b.contains(&data.center(i)))
        .map(|i| data.values()[i])
        .collect();
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let dual = vals
        .iter()
        .map(|v| v.powf(1.0 - p / (p - 1.0)))
        .sum::<f64>()
        / n;
    let pth = vals.iter().map(|v| v.powf(p)).sum::<f64>() / n;
    (mean * dual.powf(p - 1.0), pth.powf(1.0 / p) / mean)
}

#[test]
fn characteristics_match_a_cell_scan() {
    let w = random_weight(1);
    let family = sliding_family(&w, -4, 0).unwrap();
    for p in [1.5, 2.0, 3.0] {
        let (mut ap, mut rh) = (0.0f64, 0.0f64);
        for b in &family {
            let (a, r) = scan_characteristics(&w, b, p);
            ap = ap.max(a);
            rh = rh.max(r);
        }
        let got_ap = ap_characteristic(&w, p, &family, Execution::Sequential).unwrap();
        let got_rh = rh_characteristic(&w, p, &family, Execution::Sequential).unwrap();
        assert!((got_ap - ap).abs() <= 1e-12 * ap);
        assert!((got_rh - rh).abs() <= 1e-12 * rh);
    }
}

#[test]
fn split_weight_closed_forms() {
    let d = normalize_dilation(&[1.0, 1.0]).unwrap();
    let w = Weight::two_valued_split(unit_box(), vec![8, 8], 0, 1.0, 4.0, d).unwrap();
    let whole = vec![unit_box()];
    let ap = ap_characteristic(&w, 2.0, &whole, Execution::Sequential).unwrap();
    let rh = rh_characteristic(&w, 2.0, &whole, Execution::Sequential).unwrap();
    assert!((ap - 2.5 * 0.625).abs() < 1e-12);
    assert!((rh - 8.5f64.sqrt() / 2.5).abs() < 1e-12);
    // Over the dyadic family the split cube is the worst one; halves are flat.
    let family = dyadic_family(&w, -3, 0, &all_shifts(2)).unwrap();
    assert!(
        (ap_characteristic(&w, 2.0, &family, Execution::Sequential).unwrap() - 1.5625).abs()
            < 1e-12
    );
}

#[test]
fn characteristics_grow_with_the_family_and_ignore_scaling() {
    for seed in 0..5 {
        let w = random_weight(10 + seed);
        let small = dyadic_family(&w, -2, 0, &all_shifts(2)[..1]).unwrap();
        let large = sliding_family(&w, -4, 0).unwrap();
        for p in [1.5, 2.0, 4.0] {
            let a_small = ap_characteristic(&w, p, &small, Execution::Sequential).unwrap();
            let a_large = ap_characteristic(&w, p, &large, Execution::Parallel).unwrap();
            let r_small = rh_characteristic(&w, p, &small, Execution::Sequential).unwrap();
            let r_large = rh_characteristic(&w, p, &large, Execution::Parallel).unwrap();
            assert!(a_small >= 1.0 && r_small >= 1.0);
            assert!(a_large >= a_small && r_large >= r_small);
            for c in [0.125, 3.0, 1024.0] {
                let scaled = w.scaled(c).unwrap();
                let a = ap_characteristic(&scaled, p, &large, Execution::Sequential).unwrap();
                let r = rh_characteristic(&scaled, p, &large, Execution::Sequential).unwrap();
                assert!((a - a_large).abs() <= 1e-12 * a_large);
                assert!((r - r_large).abs() <= 1e-12 * r_large);
            }
        }
    }
}

proptest! {
    #[test]
    fn alpha_matches_exact_arithmetic(
        p_num in 1i64..40,
        gap1 in 1i64..40,
        gap2 in 1i64..40,
        den in 1i64..12,
    ) {
        let p = Q::new(p_num, den) + Q::from_integer(1);
        let r = p + Q::new(gap1, den);
        let q = r + Q::new(gap2, den);
        let exact = alpha_exponent_exact(p, q, r).unwrap();
        let first = Q::from_integer(1) / (r - p);
        let second = (q - Q::from_integer(1)) / (q - r);
        prop_assert_eq!(exact, if first > second { first } else { second });
        let f = |x: Q| *x.numer() as f64 / *x.denom() as f64;
        let approx = alpha_exponent(f(p), f(q), f(r)).unwrap();
        prop_assert!((approx - f(exact)).abs() <= 1e-12 * f(exact));
    }

    #[test]
    fn unit_weight_norm_is_the_plain_norm(seed in 0u64..1000, p in 1.0f64..6.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..64).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let f = GridFunction::new(unit_box(), vec![8, 8], values).unwrap();
        let one = GridFunction::constant(unit_box(), vec![8, 8], 1.0).unwrap();
        prop_assert_eq!(weighted_lp_norm(&f, &one, p).unwrap().to_bits(), lp_norm(&f, p).unwrap().to_bits());
    }
}

#[test]
fn ordering_violations_are_rejected() {
    assert!(alpha_exponent(2.0, 3.0, 3.0).is_err());
    assert!(alpha_exponent(3.0, 4.0, 2.0).is_err());
    assert!(
        alpha_exponent_exact(Q::from_integer(2), Q::from_integer(2), Q::from_integer(2)).is_err()
    );
    assert_eq!(alpha_exponent(2.0, 6.0, 3.0).unwrap(), 5.0 / 3.0);
    assert_eq!(alpha_exponent(1.0, 3.0, 2.0).unwrap(), 2.0);
    assert_eq!(alpha_exponent(2.0, 4.0, 3.0).unwrap(), 3.0);
}

fn parabola() -> (SurfaceSpec, Cutoff) {
    (
        SurfaceSpec::homogeneous_curve(2, 1.0).unwrap(),
        Cutoff::bump_on(0.5, 1.0).unwrap(),
    )
}

fn bump_data() -> GridFunction {
    let b = MeasuredBox::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
    GridFunction::from_fn(b, vec![24, 24], |x| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        if r2 < 1.0 {
            1.0 - r2
        } else {
            0.0
        }
    })
    .unwrap()
}

#[test]
fn weighted_ratio_reduces_and_is_scale_free() {
    let (spec, cutoff) = parabola();
    let f = bump_data();
    let d = spec.dilation().clone();
    let ts = TimeSampling::dense(16).unwrap();
    let one = Weight::constant(f.bbox().clone(), f.resolution().to_vec(), 1.0, d.clone()).unwrap();
    let r = 2.0;
    let weighted =
        weighted_norm_ratio(&spec, &cutoff, &f, &one, r, &ts, Execution::Parallel).unwrap();
    let op = Averager::new(&spec, &cutoff).unwrap();
    let m = op
        .maximal_grid(&f, &ts, f.bbox(), f.resolution(), Execution::Sequential)
        .unwrap();
    let plain = lp_norm(&m, r).unwrap() / lp_norm(&f, r).unwrap();
    assert_eq!(weighted.to_bits(), plain.to_bits());
    let w = Weight::clipped_power(f.bbox().clone(), f.resolution().to_vec(), 0.5, d).unwrap();
    let base = weighted_norm_ratio(&spec, &cutoff, &f, &w, r, &ts, Execution::Sequential).unwrap();
    let scaled = weighted_norm_ratio(
        &spec,
        &cutoff,
        &f,
        &w.scaled(7.0).unwrap(),
        r,
        &ts,
        Execution::Sequential,
    )
    .unwrap();
    assert!((base - scaled).abs() <= 1e-12 * base);
}

/// A narrow bump, an off-center bump and a broad plateau.
fn test_family() -> Vec<GridFunction> {
    let b = MeasuredBox::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
    let bump = |cx: f64, cy: f64, r: f64| {
        GridFunction::from_fn(b.clone(), vec![32, 32], move |x| {
            let r2 = ((x[0] - cx).powi(2) + (x[1] - cy).powi(2)) / (r * r);
            if r2 < 1.0 {
                1.0 - r2
            } else {
                0.0
            }
        })
        .unwrap()
    };
    let plateau = GridFunction::from_fn(b.clone(), vec![32, 32], |x| {
        let edge = x[0].abs().max(x[1].abs());
        (4.0 * (1.75 - edge)).clamp(0.0, 1.0)
    })
    .unwrap();
    vec![bump(0.0, 0.0, 0.5), bump(-1.0, 0.5, 0.7), plateau]
}

#[test]
fn power_weights_respect_the_characteristic_bound() {
    let (spec, cutoff) = parabola();
    let d = spec.dilation().clone();
    let ts = TimeSampling::dense(16).unwrap();
    let family = test_family();
    let bbox = family[0].bbox().clone();
    let res = family[0].resolution().to_vec();
    let one = Weight::constant(bbox.clone(), res.clone(), 1.0, d.clone()).unwrap();
    // The bound applies for p < r < q with (1/p, 1/q) in the exponent region.
    let (p, q, r) = (10.0 / 3.0, 5.0, 4.0);
    let admissible = ExponentPoint::from_ratios((3, 10), (1, 5)).unwrap();
    assert!(in_region(RegionKind::Delta0, 2, &admissible).unwrap());
    let unweighted = family
        .iter()
        .map(|f| weighted_norm_ratio(&spec, &cutoff, f, &one, r, &ts, Execution::Parallel).unwrap())
        .fold(0.0, f64::max);
    for gamma in [-0.5, 0.25, 1.0] {
        let w = Weight::clipped_power(bbox.clone(), res.clone(), gamma, d.clone()).unwrap();
        let mut cubes = sliding_family(&w, -3, 1).unwrap();
        cubes.extend(dyadic_family(&w, -4, 1, &all_shifts(2)).unwrap());
        let bound = characteristic_bound(&w, p, q, r, &cubes, Execution::Parallel).unwrap();
        assert!(bound >= 1.0);
        for f in &family {
            let ratio =
                weighted_norm_ratio(&spec, &cutoff, f, &w, r, &ts, Execution::Parallel).unwrap();
            assert!(
                ratio <= bound * unweighted,
                "gamma {gamma}: {ratio} vs {bound} x {unweighted}"
            );
        }
    }
}
