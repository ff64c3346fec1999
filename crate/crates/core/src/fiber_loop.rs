//! Seeded Monte Carlo emulation of a recirculating fiber-loop measurement.
//!
//! Each laser trigger may create photon pairs; the signal photon and a
//! classical pump pulse both enter a tap-coupled delay loop. On every round
//! trip a fixed fraction couples out, attenuated by the per-trip loop loss,
//! and the pump falls behind the signal by the per-trip differential group
//! delay. Out-coupled light is detected with Gaussian timing jitter, dead
//! time, and dark counts, and clock-referenced click times are histogrammed
//! into round-trip bins.
//!
//! Trials use counter-derived random substreams, so results are bit-for-bit
//! reproducible for a fixed seed regardless of thread count.

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal, Poisson};
use rand_pcg::Pcg64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::{SellmeierModel, SPEED_OF_LIGHT_M_PER_S};
use crate::error::{Error, Result};
use crate::temporal::{gaussian_sigma_from_fwhm, DetectorSpec};

/// Physical length of the reference delay loop, meters.
const LOOP_FIBER_LENGTH_M: f64 = 30.0;

/// Trials per parallel work unit. Fixed so the reduction order, and thus the
/// output, never depends on the thread count.
const TRIAL_BLOCK: u64 = 8192;

/// Per-trip pump−signal walk-off of the reference loop: bulk fused-silica
/// group indices at 775 nm and 1550 nm over the loop length (≈ 539.9 ps).
pub fn default_differential_delay_s() -> f64 {
    let silica = SellmeierModel::fused_silica();
    let ng_pump = silica.group_index(0.775).expect("within validity range");
    let ng_signal = silica.group_index(1.550).expect("within validity range");
    LOOP_FIBER_LENGTH_M * (ng_pump - ng_signal) / SPEED_OF_LIGHT_M_PER_S
}

/// Detector defaults for loop runs: the 800 ps FWHM system timing spread is
/// calibrated so that, with the default loop geometry, the signal and pump
/// trains first resolve after three round trips.
pub fn default_loop_detector() -> DetectorSpec {
    DetectorSpec {
        jitter_fwhm_s: 800e-12,
        ..DetectorSpec::default()
    }
}

/// Geometry and statistics of the loop experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopConfig {
    /// Round-trip time of the loop; also the pulse-train bin pitch, seconds.
    pub loop_delay_s: f64,
    /// Laser trigger rate, Hz.
    pub rep_rate_hz: f64,
    /// Number of pulse-train time bins (slot 0 plus `bins − 1` round trips).
    pub bins: usize,
    /// Fraction of circulating light tapped out each pass.
    pub tap_ratio: f64,
    /// Loss per round trip per channel, dB.
    pub loop_loss_db: f64,
    /// Pump-minus-signal delay accumulated per round trip, seconds.
    pub differential_delay_s: f64,
    /// Probability that a trigger creates at least one photon pair.
    pub creation_probability: f64,
    /// Mean pump clicks in the first bin at unit out-coupling; a nuisance
    /// amplitude standing in for the unknown detected pump flux.
    pub pump_clicks_per_bin_scale: f64,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            loop_delay_s: 156.9e-9,
            rep_rate_hz: 125e3,
            bins: 51,
            tap_ratio: 0.1,
            loop_loss_db: 0.5,
            differential_delay_s: default_differential_delay_s(),
            creation_probability: 0.615,
            pump_clicks_per_bin_scale: 1.0,
        }
    }
}

impl LoopConfig {
    /// Trigger period 1/rep_rate, seconds.
    pub fn period_s(&self) -> f64 {
        1.0 / self.rep_rate_hz
    }

    /// Highest round-trip number that still has a bin.
    pub fn max_round_trips(&self) -> usize {
        self.bins - 1
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.loop_delay_s > 0.0) || !self.loop_delay_s.is_finite() {
            return Err(Error::Config(format!(
                "loop delay must be positive, got {}",
                self.loop_delay_s
            )));
        }
        if !(self.rep_rate_hz > 0.0) || !self.rep_rate_hz.is_finite() {
            return Err(Error::Config(format!(
                "repetition rate must be positive, got {}",
                self.rep_rate_hz
            )));
        }
        if self.bins < 2 {
            return Err(Error::Config(format!(
                "need at least 2 time bins, got {}",
                self.bins
            )));
        }
        // Every pulse slot must land inside one trigger period, or the
        // detector could not assign clicks to round trips.
        let last_slot_s = (self.bins - 1) as f64 * self.loop_delay_s;
        if last_slot_s > self.period_s() {
            return Err(Error::Config(format!(
                "{} bins of {:.4e} s place the last pulse at {:.4e} s, beyond the {:.4e} s \
                 trigger period; the pulse train cannot be resolved",
                self.bins,
                self.loop_delay_s,
                last_slot_s,
                self.period_s()
            )));
        }
        if !(self.tap_ratio > 0.0 && self.tap_ratio < 1.0) {
            return Err(Error::Config(format!(
                "tap ratio must be in (0, 1), got {}",
                self.tap_ratio
            )));
        }
        if !(self.loop_loss_db >= 0.0) || !self.loop_loss_db.is_finite() {
            return Err(Error::Config(format!(
                "loop loss must be ≥ 0 dB, got {}",
                self.loop_loss_db
            )));
        }
        if !self.differential_delay_s.is_finite() {
            return Err(Error::Config("differential delay must be finite".into()));
        }
        if !(self.creation_probability > 0.0 && self.creation_probability < 1.0) {
            return Err(Error::Config(format!(
                "creation probability must be in (0, 1), got {}",
                self.creation_probability
            )));
        }
        if !(self.pump_clicks_per_bin_scale >= 0.0) || !self.pump_clicks_per_bin_scale.is_finite() {
            return Err(Error::Config(format!(
                "pump click scale must be ≥ 0, got {}",
                self.pump_clicks_per_bin_scale
            )));
        }
        Ok(())
    }

    /// Out-coupled amplitude fraction after round trip `k ≥ 1`:
    /// tap·(1−tap)^(k−1)·10^(−k·loss/10).
    pub fn out_coupled_fraction(&self, round_trip: usize) -> f64 {
        let k = round_trip as i32;
        self.tap_ratio
            * (1.0 - self.tap_ratio).powi(k - 1)
            * 10f64.powf(-(k as f64) * self.loop_loss_db / 10.0)
    }
}

/// Signal/pump centroid times for one round trip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundTripCentroid {
    pub round_trip: usize,
    pub t_signal_s: f64,
    pub t_pump_s: f64,
    /// t_pump − t_signal.
    pub separation_s: f64,
    pub counts_signal: u64,
    pub counts_pump: u64,
}

/// Clock-referenced click histogram of an emulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramResult {
    /// `bins + 1` edges; bin `k` is centered on pulse slot `k·loop_delay`.
    pub bin_edges_s: Vec<f64>,
    pub counts_signal: Vec<u64>,
    pub counts_pump: Vec<u64>,
    pub trials: u64,
    /// Centroids for round trips with at least 100 aggregate counts and at
    /// least one click per channel.
    pub centroids: Vec<RoundTripCentroid>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn trial_rng(seed: u64, trial: u64) -> Pcg64 {
    Pcg64::seed_from_u64(splitmix64(seed ^ trial.wrapping_mul(0xA24B_AED4_963E_E407)))
}

#[derive(Clone)]
struct BinAccumulator {
    counts_signal: Vec<u64>,
    counts_pump: Vec<u64>,
    time_sum_signal: Vec<f64>,
    time_sum_pump: Vec<f64>,
}

impl BinAccumulator {
    fn new(bins: usize) -> Self {
        Self {
            counts_signal: vec![0; bins],
            counts_pump: vec![0; bins],
            time_sum_signal: vec![0.0; bins],
            time_sum_pump: vec![0.0; bins],
        }
    }

    fn merge(&mut self, other: &Self) {
        for i in 0..self.counts_signal.len() {
            self.counts_signal[i] += other.counts_signal[i];
            self.counts_pump[i] += other.counts_pump[i];
            self.time_sum_signal[i] += other.time_sum_signal[i];
            self.time_sum_pump[i] += other.time_sum_pump[i];
        }
    }
}

struct TrialModel<'a> {
    cfg: &'a LoopConfig,
    jitter: Option<Normal<f64>>,
    pair_count: Poisson<f64>,
    /// e^{−a_k·η} per round trip; P(signal click | n pairs) = 1 − q_k^n.
    signal_survival: Vec<f64>,
    /// Pump click probability per round trip.
    pump_click_p: Vec<f64>,
    dark_counts: Option<Poisson<f64>>,
    dead_time_s: f64,
    period_s: f64,
}

impl<'a> TrialModel<'a> {
    fn new(cfg: &'a LoopConfig, detector: &DetectorSpec) -> Result<Self> {
        let trips = cfg.max_round_trips();
        let mut signal_survival = Vec::with_capacity(trips);
        let mut pump_click_p = Vec::with_capacity(trips);
        for k in 1..=trips {
            let a = cfg.out_coupled_fraction(k);
            signal_survival.push((-a * detector.efficiency).exp());
            pump_click_p.push(-(-cfg.pump_clicks_per_bin_scale * a * detector.efficiency).exp_m1());
        }
        // P(≥1 pair) = creation_probability under Poisson pair statistics.
        let nu = -(1.0 - cfg.creation_probability).ln();
        let pair_count =
            Poisson::new(nu).map_err(|e| Error::Config(format!("pair statistics: {e}")))?;
        let sigma_jitter_s = gaussian_sigma_from_fwhm(detector.jitter_fwhm_s);
        let jitter = if sigma_jitter_s > 0.0 {
            Some(
                Normal::new(0.0, sigma_jitter_s)
                    .map_err(|e| Error::Config(format!("jitter kernel: {e}")))?,
            )
        } else {
            None
        };
        let period_s = cfg.period_s();
        let dark_mean = detector.dark_count_rate_hz * period_s;
        let dark_counts = if dark_mean > 0.0 {
            Some(Poisson::new(dark_mean).map_err(|e| Error::Config(format!("dark counts: {e}")))?)
        } else {
            None
        };
        Ok(Self {
            cfg,
            jitter,
            pair_count,
            signal_survival,
            pump_click_p,
            dark_counts,
            dead_time_s: detector.dead_time_s,
            period_s,
        })
    }

    fn jitter_draw(&self, rng: &mut Pcg64) -> f64 {
        match &self.jitter {
            Some(n) => n.sample(rng),
            None => 0.0,
        }
    }

    fn run_trial(&self, rng: &mut Pcg64, acc: &mut BinAccumulator) {
        let delay = self.cfg.loop_delay_s;
        let diff = self.cfg.differential_delay_s;
        let pairs = self.pair_count.sample(rng) as u64;

        let mut signal_clicks: Vec<f64> = Vec::new();
        if pairs > 0 {
            for (i, q) in self.signal_survival.iter().enumerate() {
                // P(click | n pairs) = 1 − e^{−n·a_k·η} = 1 − q_k^n.
                let p_click = 1.0 - q.powi(pairs as i32);
                if rng.random::<f64>() < p_click {
                    let k = (i + 1) as f64;
                    signal_clicks.push(k * delay + self.jitter_draw(rng));
                }
            }
        }
        let mut pump_clicks: Vec<f64> = Vec::new();
        for (i, p) in self.pump_click_p.iter().enumerate() {
            if rng.random::<f64>() < *p {
                let k = (i + 1) as f64;
                pump_clicks.push(k * (delay + diff) + self.jitter_draw(rng));
            }
        }
        if let Some(darks) = &self.dark_counts {
            for clicks in [&mut signal_clicks, &mut pump_clicks] {
                let n = darks.sample(rng) as u64;
                for _ in 0..n {
                    clicks.push(rng.random::<f64>() * self.period_s);
                }
            }
        }

        for (clicks, counts, sums) in [
            (
                &mut signal_clicks,
                &mut acc.counts_signal,
                &mut acc.time_sum_signal,
            ),
            (
                &mut pump_clicks,
                &mut acc.counts_pump,
                &mut acc.time_sum_pump,
            ),
        ] {
            if self.dead_time_s > 0.0 {
                clicks.sort_by(f64::total_cmp);
                let mut last_kept = f64::NEG_INFINITY;
                clicks.retain(|&t| {
                    if t - last_kept >= self.dead_time_s {
                        last_kept = t;
                        true
                    } else {
                        false
                    }
                });
            }
            for &t in clicks.iter() {
                // Bins are centered on the pulse slots.
                let idx = (t / delay + 0.5).floor();
                if idx >= 0.0 && (idx as usize) < self.cfg.bins {
                    let i = idx as usize;
                    counts[i] += 1;
                    sums[i] += t;
                }
            }
        }
    }
}

/// Run `trials` triggers through the loop and histogram the clicks.
///
/// Identical `(cfg, detector, trials, seed)` give identical output.
pub fn run_emulation(
    cfg: &LoopConfig,
    detector: &DetectorSpec,
    trials: u64,
    seed: u64,
) -> Result<HistogramResult> {
    cfg.validate()?;
    detector.validate()?;
    if trials == 0 {
        return Err(Error::Config("trials must be ≥ 1".into()));
    }
    let model = TrialModel::new(cfg, detector)?;

    let blocks = trials.div_ceil(TRIAL_BLOCK);
    let partials: Vec<BinAccumulator> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = BinAccumulator::new(cfg.bins);
            let start = b * TRIAL_BLOCK;
            let end = ((b + 1) * TRIAL_BLOCK).min(trials);
            for trial in start..end {
                let mut rng = trial_rng(seed, trial);
                model.run_trial(&mut rng, &mut acc);
            }
            acc
        })
        .collect();
    let mut acc = BinAccumulator::new(cfg.bins);
    for p in &partials {
        acc.merge(p);
    }

    let mut centroids = Vec::new();
    for k in 1..cfg.bins {
        let ns = acc.counts_signal[k];
        let np = acc.counts_pump[k];
        if ns + np >= 100 && ns > 0 && np > 0 {
            let t_signal = acc.time_sum_signal[k] / ns as f64;
            let t_pump = acc.time_sum_pump[k] / np as f64;
            centroids.push(RoundTripCentroid {
                round_trip: k,
                t_signal_s: t_signal,
                t_pump_s: t_pump,
                separation_s: t_pump - t_signal,
                counts_signal: ns,
                counts_pump: np,
            });
        }
    }

    let bin_edges_s = (0..=cfg.bins)
        .map(|k| (k as f64 - 0.5) * cfg.loop_delay_s)
        .collect();
    Ok(HistogramResult {
        bin_edges_s,
        counts_signal: acc.counts_signal,
        counts_pump: acc.counts_pump,
        trials,
        centroids,
    })
}

/// First round trip whose signal and pump centroids are farther apart than
/// three times the combined per-click timing spread of the two channels
/// (jitter in quadrature; pulses are modeled as instantaneous).
pub fn first_separated_round_trip(
    result: &HistogramResult,
    detector: &DetectorSpec,
) -> Result<usize> {
    if result.centroids.len() < 3 {
        return Err(Error::Config(format!(
            "need at least 3 populated round trips to judge separation, got {}",
            result.centroids.len()
        )));
    }
    let sigma = gaussian_sigma_from_fwhm(detector.jitter_fwhm_s);
    let combined_spread = (2.0 * sigma * sigma).sqrt();
    result
        .centroids
        .iter()
        .find(|c| c.separation_s.abs() > 3.0 * combined_spread)
        .map(|c| c.round_trip)
        .ok_or(Error::NotSeparated)
}
