//! Detection localization on the study drift: the strong left hat is found
//! at desk scale, the weaker right hat at the study's own horizon.
//!
//! The windows are the drift's three deviation regions; a window counts as
//! hit when some minimal interval intersects it.

use driftscan::kernels::KernelId;
use driftscan::multiscale::{decide, TestConfig};
use driftscan::quantiles::{kappa_similarity, QuantileConfig};
use driftscan::rng;
use driftscan::sde::{simulate_em, DriftSpec};

fn kappa(eta: f64, alpha: f64) -> f64 {
    let cfg = QuantileConfig {
        reference: DriftSpec::standard_ou(),
        radius: 1.0,
        sigma: 1.0,
        eta,
        alphas: vec![alpha],
        replications: 10_000,
        grid_res: 100,
        noise_res: 100,
        master_seed: 20_260_811,
        kernel: KernelId::QuarticSmooth,
    };
    kappa_similarity(&cfg).unwrap().kappa(alpha).unwrap()
}

fn hit_rate(horizon: f64, reps: u64, window: (f64, f64), kappa: f64, eta: f64) -> f64 {
    let alt = DriftSpec::alternative_example();
    let ou = DriftSpec::standard_ou();
    let config = TestConfig::for_horizon(1.0, 1.0, eta, 0.05, ou, horizon).unwrap();
    let mut hits = 0usize;
    for i in 0..reps {
        let path = simulate_em(&alt, 0.0, horizon, 0.005, rng::mix(24_601, i)).unwrap();
        let result = decide(&path, &config, kappa).unwrap();
        if result
            .minimal
            .iter()
            .any(|&(y, h)| y + h >= window.0 && y - h <= window.1)
        {
            hits += 1;
        }
    }
    hits as f64 / reps as f64
}

#[test]
fn left_window_localized_at_desk_scale() {
    let k = kappa(0.05, 0.05);
    let rate = hit_rate(2000.0, 50, (-0.75, -0.45), k, 0.05);
    println!("left window hit rate at T=2000: {rate:.2}");
    assert!(rate >= 0.8, "hit rate {rate} below 0.8");
}

#[test]
fn right_window_localized_at_study_scale() {
    let k = kappa(0.05, 0.05);
    let rate = hit_rate(10_000.0, 30, (0.4, 0.6), k, 0.05);
    println!("right window hit rate at T=10000: {rate:.2}");
    assert!(rate >= 0.8, "hit rate {rate} below 0.8");
}
