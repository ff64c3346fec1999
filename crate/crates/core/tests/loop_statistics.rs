//! Statistical validation of the fiber-loop emulator against closed-form
//! expectations, plus determinism and dead-time behavior.

use dispersim_core::fiber_loop::{default_loop_detector, run_emulation, LoopConfig};
use dispersim_core::temporal::{gaussian_sigma_from_fwhm, DetectorSpec};

/// Closed-form per-trial click probabilities per round trip, independent of
/// the emulator: the out-coupled cascade is a_k = tap·(1−tap)^(k−1)·10^(−k·loss/10),
/// the pair count is Poisson with P(≥1) = creation_probability, and a click
/// fires when at least one thinned photon arrives.
struct ClickOracle {
    signal_p: Vec<f64>,
    pump_p: Vec<f64>,
    /// e^{−a_k·η} per trip, for joint-click covariance terms.
    signal_survival: Vec<f64>,
    nu: f64,
}

impl ClickOracle {
    fn new(cfg: &LoopConfig, detector: &DetectorSpec) -> Self {
        let nu = -(1.0 - cfg.creation_probability).ln();
        let pgf = |s: f64| (-nu * (1.0 - s)).exp();
        let mut signal_p = Vec::new();
        let mut pump_p = Vec::new();
        let mut signal_survival = Vec::new();
        for k in 1..cfg.bins {
            let a = cfg.tap_ratio
                * (1.0 - cfg.tap_ratio).powi(k as i32 - 1)
                * 10f64.powf(-(k as f64) * cfg.loop_loss_db / 10.0);
            let s = (-a * detector.efficiency).exp();
            signal_p.push(1.0 - pgf(s));
            pump_p.push(1.0 - (-cfg.pump_clicks_per_bin_scale * a * detector.efficiency).exp());
            signal_survival.push(s);
        }
        Self {
            signal_p,
            pump_p,
            signal_survival,
            nu,
        }
    }

    /// Mean and variance of the total signal clicks per trial, including the
    /// correlation induced by the shared pair count.
    fn signal_total_moments(&self) -> (f64, f64) {
        let pgf = |s: f64| (-self.nu * (1.0 - s)).exp();
        let mean: f64 = self.signal_p.iter().sum();
        let mut var: f64 = self.signal_p.iter().map(|p| p * (1.0 - p)).sum();
        for j in 0..self.signal_survival.len() {
            for k in (j + 1)..self.signal_survival.len() {
                let sj = self.signal_survival[j];
                let sk = self.signal_survival[k];
                let joint = 1.0 - pgf(sj) - pgf(sk) + pgf(sj * sk);
                var += 2.0 * (joint - self.signal_p[j] * self.signal_p[k]);
            }
        }
        (mean, var)
    }
}

#[test]
fn per_round_trip_counts_follow_the_geometric_cascade() {
    let cfg = LoopConfig::default();
    let detector = default_loop_detector();
    let trials = 400_000u64;
    let result = run_emulation(&cfg, &detector, trials, 42).unwrap();
    let oracle = ClickOracle::new(&cfg, &detector);

    // The oracle's cascade is exactly geometric in the out-coupled
    // amplitude with this ratio.
    let ratio = (1.0 - cfg.tap_ratio) * 10f64.powf(-cfg.loop_loss_db / 10.0);
    assert!((0.0..1.0).contains(&ratio));

    let n = trials as f64;
    let mut checked = 0;
    for k in 1..cfg.bins {
        let (p_s, p_p) = (oracle.signal_p[k - 1], oracle.pump_p[k - 1]);
        for (expect, observed) in [
            (n * p_s, result.counts_signal[k] as f64),
            (n * p_p, result.counts_pump[k] as f64),
        ] {
            if expect < 100.0 {
                continue;
            }
            let sigma = (expect * (1.0 - expect / n)).sqrt();
            assert!(
                (observed - expect).abs() <= 3.0 * sigma,
                "trip {k}: observed {observed}, expected {expect} ± {sigma}"
            );
            checked += 1;
        }
    }
    assert!(checked >= 40, "only {checked} populated trips checked");
}

#[test]
fn total_out_coupled_energy_and_clicks_match_closed_forms() {
    let cfg = LoopConfig::default();
    let detector = default_loop_detector();

    // Infinite-trip energy sum of the cascade.
    let q = 10f64.powf(-cfg.loop_loss_db / 10.0);
    let closed_form = cfg.tap_ratio * q / (1.0 - (1.0 - cfg.tap_ratio) * q);
    assert!(closed_form <= 1.0);
    let partial: f64 = (1..500)
        .map(|k| {
            cfg.tap_ratio
                * (1.0 - cfg.tap_ratio).powi(k - 1)
                * 10f64.powf(-(k as f64) * cfg.loop_loss_db / 10.0)
        })
        .sum();
    assert!((partial / closed_form - 1.0).abs() < 1e-12);

    // Monte Carlo total signal clicks against the exact mean and variance.
    let trials = 400_000u64;
    let result = run_emulation(&cfg, &detector, trials, 4242).unwrap();
    let oracle = ClickOracle::new(&cfg, &detector);
    let (mean, var) = oracle.signal_total_moments();
    let observed: u64 = result.counts_signal.iter().sum();
    let expect = trials as f64 * mean;
    let sigma = (trials as f64 * var).sqrt();
    assert!(
        (observed as f64 - expect).abs() <= 3.0 * sigma,
        "total {observed} vs {expect} ± {sigma}"
    );
}

#[test]
fn centroid_separation_grows_linearly_with_round_trips() {
    let cfg = LoopConfig::default();
    let detector = default_loop_detector();
    let result = run_emulation(&cfg, &detector, 400_000, 7).unwrap();
    let sigma_click = gaussian_sigma_from_fwhm(detector.jitter_fwhm_s);
    assert!(result.centroids.len() >= 10);
    for c in &result.centroids {
        let expected = c.round_trip as f64 * cfg.differential_delay_s;
        let sem = sigma_click * (1.0 / c.counts_signal as f64 + 1.0 / c.counts_pump as f64).sqrt();
        assert!(
            (c.separation_s - expected).abs() <= 3.0 * sem,
            "trip {}: separation {} vs {} ± {}",
            c.round_trip,
            c.separation_s,
            expected,
            sem
        );
    }
}

#[test]
fn results_do_not_depend_on_the_thread_count() {
    let cfg = LoopConfig::default();
    let detector = default_loop_detector();
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| run_emulation(&cfg, &detector, 60_000, 99).unwrap());
    let many = rayon::ThreadPoolBuilder::new()
        .num_threads(8)
        .build()
        .unwrap()
        .install(|| run_emulation(&cfg, &detector, 60_000, 99).unwrap());
    assert_eq!(single, many);
}

#[test]
fn dead_time_blocks_every_second_click_within_a_trial() {
    // With the dead time spanning the whole trigger period, any trial can
    // register at most one click per channel.
    let cfg = LoopConfig {
        loop_loss_db: 0.0,
        ..LoopConfig::default()
    };
    let blocked = DetectorSpec {
        dead_time_s: cfg.period_s(),
        ..default_loop_detector()
    };
    for seed in 0..200 {
        let one = run_emulation(&cfg, &blocked, 1, seed).unwrap();
        assert!(one.counts_signal.iter().sum::<u64>() <= 1, "seed {seed}");
        assert!(one.counts_pump.iter().sum::<u64>() <= 1, "seed {seed}");
    }
    // Sanity: without dead time the same seeds produce multi-click trials.
    let free = default_loop_detector();
    let mut multi = 0;
    for seed in 0..200 {
        let one = run_emulation(&cfg, &free, 1, seed).unwrap();
        if one.counts_signal.iter().sum::<u64>() > 1 {
            multi += 1;
        }
    }
    assert!(
        multi > 10,
        "dead-time test has no power: {multi} multi-click trials"
    );
}
