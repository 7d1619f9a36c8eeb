//! Cross-module solver properties that are too heavy for in-module unit
//! tests: linear-time kernel evaluation and self-convergence of the
//! Lagrangian scheme under simultaneous mesh and step refinement.

use std::time::{Duration, Instant};

use nlclaw_core::{
    exp_nonlocal, simulate, KernelSpec, PiecewiseConstantProfile, SimConfig, VelocityModel, Window,
};

fn synthetic_profile(n: usize) -> PiecewiseConstantProfile {
    let breakpoints: Vec<f64> = (0..=n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect();
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let x = i as f64 * 0.7548776662466927;
            0.5 + 0.5 * (x - x.floor() - 0.5)
        })
        .collect();
    PiecewiseConstantProfile::new(breakpoints, values, 0.3, 0.1).unwrap()
}

fn best_of(runs: usize, mut f: impl FnMut()) -> Duration {
    (0..runs)
        .map(|_| {
            let t0 = Instant::now();
            f();
            t0.elapsed()
        })
        .min()
        .unwrap()
}

#[test]
fn exponential_field_scales_linearly() {
    let small = synthetic_profile(40_000);
    let large = synthetic_profile(80_000);
    // warm up allocations
    let _ = exp_nonlocal(&small, 0.05).unwrap();

    let t_small = best_of(7, || {
        let f = exp_nonlocal(&small, 0.05).unwrap();
        assert!(f.node_values()[0].is_finite());
    });
    let t_large = best_of(7, || {
        let f = exp_nonlocal(&large, 0.05).unwrap();
        assert!(f.node_values()[0].is_finite());
    });
    let ratio = t_large.as_secs_f64() / t_small.as_secs_f64();
    assert!(ratio < 3.0, "doubling N scaled runtime by {ratio:.2}");
}

#[test]
fn lagrangian_scheme_self_converges_on_the_step_datum() {
    // three resolutions: each halves the width-change bound and doubles the
    // initial refinement; successive L1 distances must shrink by >= 1.5
    let run = |refine: f64, width_change: f64| {
        let mut cfg = SimConfig::new(
            KernelSpec::exponential(0.1).unwrap(),
            VelocityModel::greenshields(1.0, 1.0).unwrap(),
            0.5,
        );
        cfg.snapshot_times = vec![0.5];
        cfg.refine_target = Some(refine);
        cfg.max_width_change = width_change;
        simulate(&PiecewiseConstantProfile::fig1(), &cfg)
            .unwrap()
            .snapshots
            .pop()
            .unwrap()
            .profile
    };

    let coarse = run(200.0, 0.1);
    let medium = run(400.0, 0.05);
    let fine = run(800.0, 0.025);

    let k = Window::new(-1.0, 1.5).unwrap();
    let d1 = coarse.l1_distance(&medium, k);
    let d2 = medium.l1_distance(&fine, k);
    assert!(d1 > 0.0 && d2 > 0.0);
    let factor = d1 / d2;
    assert!(factor >= 1.5, "self-convergence factor {factor:.3} (d1 = {d1:.3e}, d2 = {d2:.3e})");
}
