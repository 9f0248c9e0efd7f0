//! Property suites shared by the `properties` and `acceptance` targets.
//! Each suite runs a fixed number of generated cases from a deterministic
//! generator and returns the first counterexample as an error.

#![allow(dead_code)]

use std::f64::consts::TAU;

use hospec::{
    compare_grids, dft_segments, estimate_spectrum, segment_and_demean, window_sums_2d,
    EstimationConfig, Matrix2D, SegmentConfig, SegmentSet, SmoothingPlan, TimeSeries, WindowSpec,
};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestError, TestRng, TestRunner};

pub const WINDOWS: [usize; 5] = [1, 2, 3, 5, 8];

pub fn run<S, F>(cases: u32, strategy: S, test: F) -> Result<(), String>
where
    S: Strategy,
    S::Value: std::fmt::Debug,
    F: Fn(S::Value) -> Result<(), TestCaseError>,
{
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner =
        TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| match e {
        TestError::Fail(why, value) => format!("{why} for input {value:?}"),
        TestError::Abort(why) => why.to_string(),
    })
}

/// Every window enumerated directly.
pub fn brute_window_sums(a: &Matrix2D, w: usize, periodic: bool) -> Vec<f64> {
    let (rows, cols) = (a.rows(), a.cols());
    let (or, oc) = if periodic {
        (rows, cols)
    } else {
        (rows - w + 1, cols - w + 1)
    };
    let mut out = Vec::with_capacity(or * oc);
    for i in 0..or {
        for j in 0..oc {
            let mut s = 0.0;
            for u in 0..w {
                for v in 0..w {
                    s += a.get((i + u) % rows, (j + v) % cols);
                }
            }
            out.push(s);
        }
    }
    out
}

pub fn matrix() -> impl Strategy<Value = Matrix2D> {
    (8usize..=64, 8usize..=64).prop_flat_map(|(rows, cols)| {
        prop::collection::vec(-1.0f64..1.0, rows * cols)
            .prop_map(move |v| Matrix2D::new(v, rows, cols).unwrap())
    })
}

/// All six plans against enumeration, every window in [`WINDOWS`], both
/// boundaries.
pub fn window_sum_plans(cases: u32) -> Result<(), String> {
    run(cases, matrix(), |a| {
        for w in WINDOWS {
            for periodic in [false, true] {
                let spec = if periodic {
                    WindowSpec::periodic(w)
                } else {
                    WindowSpec::valid(w)
                };
                let want = brute_window_sums(&a, w, periodic);
                for plan in SmoothingPlan::ALL {
                    let got = window_sums_2d(&a, spec, plan).unwrap();
                    for (x, y) in got.values().iter().zip(&want) {
                        let tol = 1e-9 * x.abs().max(y.abs()) + 1e-12;
                        prop_assert!(
                            (x - y).abs() <= tol,
                            "{plan} w={w} periodic={periodic}: {x} vs {y}"
                        );
                    }
                }
            }
        }
        Ok(())
    })
}

/// `sum_u x(u) exp(-j 2 pi u k / M)` evaluated term by term.
pub fn defining_sum(x: &[f64]) -> Vec<Complex64> {
    let m = x.len();
    (0..m)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(u, &v)| Complex64::from_polar(v, -TAU * ((u * k) % m) as f64 / m as f64))
                .sum()
        })
        .collect()
}

fn transform(x: &[f64]) -> Vec<Complex64> {
    let segs = SegmentSet::from_parts(vec![x.to_vec()], true);
    dft_segments(&segs).unwrap().spectra()[0].clone()
}

fn segment() -> impl Strategy<Value = Vec<f64>> {
    (1usize..=64).prop_flat_map(|m| prop::collection::vec(-10.0f64..10.0, m))
}

/// Transform versus the defining sum, error measured against the largest
/// coefficient.
pub fn dft_matches_definition(cases: u32) -> Result<(), String> {
    run(cases, segment(), |x| {
        let got = transform(&x);
        let want = defining_sum(&x);
        let scale = want.iter().map(|v| v.norm()).fold(1e-12, f64::max);
        for (k, (a, b)) in got.iter().zip(&want).enumerate() {
            prop_assert!((a - b).norm() <= 1e-9 * scale, "bin {k}: {a} vs {b}");
        }
        Ok(())
    })
}

pub fn parseval(cases: u32) -> Result<(), String> {
    run(cases, segment(), |x| {
        let f = transform(&x);
        let time: f64 = x.iter().map(|v| v * v).sum();
        let freq: f64 = f.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64;
        prop_assert!(
            (time - freq).abs() <= 1e-9 * time.max(1e-300),
            "{time} vs {freq}"
        );
        Ok(())
    })
}

pub fn dft_linearity(cases: u32) -> Result<(), String> {
    let pair = (1usize..=64).prop_flat_map(|m| {
        (
            prop::collection::vec(-10.0f64..10.0, m),
            prop::collection::vec(-10.0f64..10.0, m),
            -3.0f64..3.0,
            -3.0f64..3.0,
        )
    });
    run(cases, pair, |(x, y, a, b)| {
        let combo: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
        let (fx, fy, fc) = (transform(&x), transform(&y), transform(&combo));
        let scale = fc.iter().map(|v| v.norm()).fold(1e-12, f64::max);
        for ((p, q), r) in fx.iter().zip(&fy).zip(&fc) {
            prop_assert!((p * a + q * b - r).norm() <= 1e-9 * scale);
        }
        Ok(())
    })
}

fn series(v: Vec<f64>) -> TimeSeries {
    TimeSeries::new(v, "generated").unwrap()
}

/// `estimate(alpha x) = alpha^3 estimate(x)` for the bispectrum and
/// `alpha^4` for the trispectrum.
pub fn homogeneity(cases: u32) -> Result<(), String> {
    let input = (
        prop::collection::vec(-1.0f64..1.0, 64),
        prop_oneof![-3.0f64..-0.2, 0.2f64..3.0],
        prop::sample::select(vec![3usize, 5, 7]),
        prop::sample::select(SmoothingPlan::ALL.to_vec()),
    );
    run(cases, input, |(x, alpha, m3, plan)| {
        let scaled = series(x.iter().map(|v| alpha * v).collect());
        let x = series(x);
        for (cfg, power) in [
            (EstimationConfig::bispectrum(64, 1, m3, plan), 3),
            (EstimationConfig::trispectrum(32, 2, m3, plan), 4),
        ] {
            let base = estimate_spectrum(&x, &cfg).unwrap();
            let got = estimate_spectrum(&scaled, &cfg).unwrap();
            let factor = alpha.powi(power);
            for (u, v) in base.values().iter().zip(got.values()) {
                let want = u * factor;
                let tol = 1e-9 * want.norm().max(v.norm()).max(1e-12);
                prop_assert!(
                    (want - v).norm() <= tol,
                    "{plan} order {}: {want} vs {v}",
                    power
                );
            }
        }
        Ok(())
    })
}

/// Adding a constant before segmentation changes nothing.
pub fn demean_shift_invariance(cases: u32) -> Result<(), String> {
    let input = (1usize..=4, 1usize..=16).prop_flat_map(|(k, m)| {
        (
            prop::collection::vec(-1.0f64..1.0, k * m + 3),
            Just(k),
            Just(m),
            -100.0f64..100.0,
        )
    });
    run(cases, input, |(x, k, m, c)| {
        let cfg = SegmentConfig { m, k };
        let shifted = series(x.iter().map(|v| v + c).collect());
        let a = segment_and_demean(&series(x), cfg).unwrap();
        let b = segment_and_demean(&shifted, cfg).unwrap();
        for (sa, sb) in a.segments().iter().zip(b.segments()) {
            for (u, v) in sa.iter().zip(sb) {
                prop_assert!((u - v).abs() <= 1e-12, "{u} vs {v}");
            }
        }
        Ok(())
    })
}

/// Smoothing each segment then averaging equals smoothing the averaged
/// products: the `K`-segment estimate is the mean of per-segment estimates.
pub fn smoothing_averaging_commute(cases: u32) -> Result<(), String> {
    let input = (2usize..=4).prop_flat_map(|k| {
        (
            prop::collection::vec(-1.0f64..1.0, 32 * k),
            Just(k),
            prop::sample::select(vec![3usize, 5, 7]),
            prop::sample::select(SmoothingPlan::ALL.to_vec()),
        )
    });
    run(cases, input, |(x, k, m3, plan)| {
        let joint = estimate_spectrum(
            &series(x.clone()),
            &EstimationConfig::bispectrum(32, k, m3, plan),
        )
        .unwrap();
        let mut mean = vec![Complex64::default(); joint.len()];
        for part in x.chunks(32) {
            let g = estimate_spectrum(
                &series(part.to_vec()),
                &EstimationConfig::bispectrum(32, 1, m3, plan),
            )
            .unwrap();
            for (acc, v) in mean.iter_mut().zip(g.values()) {
                *acc += v / k as f64;
            }
        }
        for (u, v) in joint.values().iter().zip(&mean) {
            let tol = 1e-9 * u.norm().max(v.norm()).max(1e-12);
            prop_assert!((u - v).norm() <= tol, "{plan} K={k}: {u} vs {v}");
        }
        Ok(())
    })
}

/// All plans on one series, compared with NAIVE.
pub fn max_plan_deviation(x: &TimeSeries, base: &EstimationConfig) -> f64 {
    let naive = estimate_spectrum(x, &base.with_plan(SmoothingPlan::Naive)).unwrap();
    SmoothingPlan::ALL[1..]
        .iter()
        .map(|&p| {
            compare_grids(&naive, &estimate_spectrum(x, &base.with_plan(p)).unwrap()).unwrap()
        })
        .fold(0.0, f64::max)
}
