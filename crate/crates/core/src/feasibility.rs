//! Separation feasibility analysis: contamination of the heralding window by
//! pump clicks, equivalent suppression in dB, filtered-signal curves, and the
//! minimum-distance solver.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::{arrival_separation_s, attenuate, propagation_loss_db, PlatformSpec};
use crate::error::{Error, Result};
use crate::temporal::{
    convolve_jitter, cumulative_click_probability, density_moments, photon_number_density,
    required_grid_span, sample_click_density, DetectorSpec, PulseSpec, SampledDensity,
    TemporalGrid, WidthConvention,
};

/// Half-width of the integration window in units of the jittered signal
/// click-density standard deviation.
const WINDOW_SIGMAS: f64 = 3.0;

/// Smallest bracketing length for the distance solver, meters.
const BRACKET_START_M: f64 = 1e-3;

/// Give up bracketing beyond this length (1000 km).
const DEFAULT_MAX_LENGTH_M: f64 = 1e6;

/// Bisection terminates at this relative bracket width.
const BISECTION_REL_WIDTH: f64 = 1e-4;

/// Hard cap on evaluation grid size.
const MAX_GRID_POINTS: usize = 20_000_000;

/// One separation scenario: platform, detector, and pulse assumptions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub platform: PlatformSpec,
    pub detector: DetectorSpec,
    /// Optical pulse duration (FWHM), seconds.
    pub pulse_fwhm_s: f64,
    /// Pump photons per pulse before propagation losses.
    pub pump_photons: f64,
    /// Photon-pair generation probability per pump pulse (signal µ).
    pub pair_probability: f64,
    pub width_convention: WidthConvention,
    /// Pump fraction of windowed detection events that still counts as
    /// "separated".
    pub contamination_threshold: f64,
}

impl ScenarioConfig {
    /// Scenario with the platform's default photon numbers, a 1 ps pulse,
    /// and a 1 % contamination target.
    pub fn new(platform: PlatformSpec, detector: DetectorSpec) -> Self {
        let pump_photons = platform.default_pump_photons;
        let pair_probability = platform.default_pair_probability;
        Self {
            platform,
            detector,
            pulse_fwhm_s: 1e-12,
            pump_photons,
            pair_probability,
            width_convention: WidthConvention::default(),
            contamination_threshold: 0.01,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.platform.validate()?;
        self.detector.validate()?;
        if !(self.pulse_fwhm_s > 0.0) || !self.pulse_fwhm_s.is_finite() {
            return Err(Error::Config(format!(
                "pulse fwhm must be positive, got {}",
                self.pulse_fwhm_s
            )));
        }
        if !(self.pump_photons >= 1.0) || !self.pump_photons.is_finite() {
            return Err(Error::Config(format!(
                "pump photons per pulse must be ≥ 1, got {}",
                self.pump_photons
            )));
        }
        if !(self.pair_probability > 0.0 && self.pair_probability < 1.0) {
            return Err(Error::Config(format!(
                "pair probability must be in (0, 1), got {}",
                self.pair_probability
            )));
        }
        if !(self.contamination_threshold > 0.0 && self.contamination_threshold < 1.0) {
            return Err(Error::Config(format!(
                "contamination threshold must be in (0, 1), got {}",
                self.contamination_threshold
            )));
        }
        Ok(())
    }

    /// dB quoted for equal windowed probabilities: the pump starts
    /// 10·log₁₀(µ_P/µ_S) above the signal, so matching it click-for-click is
    /// worth that many dB of suppression (100 dB with the defaults).
    pub fn suppression_anchor_db(&self) -> f64 {
        10.0 * (self.pump_photons / self.pair_probability).log10()
    }
}

/// Windowed detection probabilities at one propagation distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    /// Integration window, seconds (detector-frame arrival time).
    pub window_start_s: f64,
    pub window_end_s: f64,
    /// Windowed click probability of the heralding signal.
    pub p_signal: f64,
    /// Windowed click probability of the pump.
    pub p_pump: f64,
    /// p_pump / (p_pump + p_signal).
    pub contamination: f64,
    /// Equivalent spectral pump suppression, dB. Infinite when no pump
    /// probability remains in the window.
    pub suppression_db: f64,
    /// 1 − contamination: probability a windowed click is the signal.
    pub filtered_signal_probability: f64,
}

impl WindowReport {
    /// Assemble a report from windowed probabilities. `anchor_db` is the dB
    /// equivalent of equal probabilities (see
    /// [`ScenarioConfig::suppression_anchor_db`]).
    pub fn from_probabilities(
        window_start_s: f64,
        window_end_s: f64,
        p_signal: f64,
        p_pump: f64,
        anchor_db: f64,
    ) -> Result<Self> {
        if !(window_start_s < window_end_s) {
            return Err(Error::Domain(format!(
                "window must be ordered, got [{window_start_s}, {window_end_s}]"
            )));
        }
        if !(p_signal > 0.0) || !p_signal.is_finite() {
            return Err(Error::Domain(format!(
                "windowed signal probability must be positive, got {p_signal}"
            )));
        }
        if !(p_pump >= 0.0) || !p_pump.is_finite() {
            return Err(Error::Domain(format!(
                "windowed pump probability must be ≥ 0, got {p_pump}"
            )));
        }
        let contamination = p_pump / (p_pump + p_signal);
        let suppression_db = if p_pump == 0.0 {
            f64::INFINITY
        } else {
            anchor_db + 10.0 * (p_signal / p_pump).log10()
        };
        Ok(Self {
            window_start_s,
            window_end_s,
            p_signal,
            p_pump,
            contamination,
            suppression_db,
            filtered_signal_probability: 1.0 - contamination,
        })
    }
}

/// Solver output: the shortest distance meeting the contamination target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationResult {
    pub distance_m: f64,
    pub arrival_separation_s: f64,
    pub signal_loss_db: f64,
    pub pump_loss_db: f64,
    pub report: WindowReport,
    /// Number of contamination evaluations spent bracketing and bisecting.
    pub iterations: usize,
}

/// Full per-grid-point curves behind one evaluation, for profile exports.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioProfile {
    pub report: WindowReport,
    /// Detector-frame time axis (the jitter-extended grid), seconds.
    pub times_s: Vec<f64>,
    /// Photon-number densities, photons per second.
    pub signal_photon_density: Vec<f64>,
    pub pump_photon_density: Vec<f64>,
    /// Cumulative click probabilities 1 − e^{−µ(t)}.
    pub signal_cumulative: Vec<f64>,
    pub pump_cumulative: Vec<f64>,
    /// Jitter-convolved click-probability densities, 1/s.
    pub signal_click_density_jittered: Vec<f64>,
    pub pump_click_density_jittered: Vec<f64>,
}

struct Evaluation {
    signal: PulseSpec,
    pump: PulseSpec,
    jittered_signal: SampledDensity,
    jittered_pump: SampledDensity,
    report: WindowReport,
}

fn evaluate(cfg: &ScenarioConfig, length_m: f64) -> Result<Evaluation> {
    cfg.validate()?;
    if !(length_m >= 0.0) || !length_m.is_finite() {
        return Err(Error::Domain(format!("length must be ≥ 0, got {length_m}")));
    }
    let tau = arrival_separation_s(length_m, &cfg.platform);
    let signal_loss_db = propagation_loss_db(length_m, &cfg.platform.signal);
    let pump_loss_db = propagation_loss_db(length_m, &cfg.platform.pump);
    let mu_signal = attenuate(cfg.pair_probability, signal_loss_db)? * cfg.detector.efficiency;
    let mu_pump = attenuate(cfg.pump_photons, pump_loss_db)? * cfg.detector.efficiency;
    if mu_signal == 0.0 {
        return Err(Error::SignalExtinguished {
            loss_db: signal_loss_db,
        });
    }

    // Signal arrives first (center 0); the pump trails by the accumulated
    // group delay.
    let signal = PulseSpec::sech2(
        cfg.pulse_fwhm_s,
        0.0,
        mu_signal,
        "signal",
        cfg.width_convention,
    )?;
    let pump = PulseSpec::sech2(cfg.pulse_fwhm_s, tau, mu_pump, "pump", cfg.width_convention)?;

    let (lo_s, hi_s) = required_grid_span(&signal);
    let (lo_p, hi_p) = required_grid_span(&pump);
    let (lo, hi) = (lo_s.min(lo_p), hi_s.max(hi_p));
    let step = signal.sigma_s() / 10.0;
    let points = ((hi - lo) / step).ceil() as usize + 1;
    if points > MAX_GRID_POINTS {
        return Err(Error::Config(format!(
            "evaluation grid would need {points} points at {length_m} m; the separation is far \
             beyond what this scenario can resolve"
        )));
    }
    let grid = TemporalGrid::spanning(lo, hi, step)?;

    let signal_density = sample_click_density(&signal, &grid)?;
    let pump_density = sample_click_density(&pump, &grid)?;
    let jittered_signal = convolve_jitter(&signal_density, cfg.detector.jitter_fwhm_s)?;
    let jittered_pump = convolve_jitter(&pump_density, cfg.detector.jitter_fwhm_s)?;

    let m = density_moments(&jittered_signal).map_err(|e| match e {
        Error::DegenerateDensity => Error::SignalExtinguished {
            loss_db: signal_loss_db,
        },
        other => other,
    })?;
    let window = (
        m.mean_s - WINDOW_SIGMAS * m.std_s,
        m.mean_s + WINDOW_SIGMAS * m.std_s,
    );
    let p_signal = jittered_signal.integral_between(window.0, window.1);
    let p_pump = jittered_pump.integral_between(window.0, window.1);

    let window_fraction = p_signal / m.total;
    if window_fraction < 0.99 {
        return Err(Error::Internal(format!(
            "integration window captures only {window_fraction:.6} of the signal click mass"
        )));
    }

    let report = WindowReport::from_probabilities(
        window.0,
        window.1,
        p_signal,
        p_pump,
        cfg.suppression_anchor_db(),
    )?;
    Ok(Evaluation {
        signal,
        pump,
        jittered_signal,
        jittered_pump,
        report,
    })
}

/// Windowed detection probabilities after `length_m` of propagation.
///
/// Builds both click densities, applies the jitter kernel, integrates over
/// the ±3σ window of the jittered signal density, and reports contamination
/// and equivalent suppression.
pub fn evaluate_at_distance(cfg: &ScenarioConfig, length_m: f64) -> Result<WindowReport> {
    evaluate(cfg, length_m).map(|e| e.report)
}

/// Like [`evaluate_at_distance`], but returns every intermediate curve on
/// the evaluation grid.
pub fn profile_at_distance(cfg: &ScenarioConfig, length_m: f64) -> Result<ScenarioProfile> {
    let ev = evaluate(cfg, length_m)?;
    let times: Vec<f64> = ev.jittered_signal.grid.times().collect();
    Ok(ScenarioProfile {
        report: ev.report,
        signal_photon_density: times
            .iter()
            .map(|&t| photon_number_density(t, &ev.signal))
            .collect(),
        pump_photon_density: times
            .iter()
            .map(|&t| photon_number_density(t, &ev.pump))
            .collect(),
        signal_cumulative: times
            .iter()
            .map(|&t| cumulative_click_probability(t, &ev.signal))
            .collect(),
        pump_cumulative: times
            .iter()
            .map(|&t| cumulative_click_probability(t, &ev.pump))
            .collect(),
        signal_click_density_jittered: ev.jittered_signal.values,
        pump_click_density_jittered: ev.jittered_pump.values,
        times_s: times,
    })
}

/// Filtered-signal probability at each length, in input order. Rows are
/// evaluated in parallel.
pub fn filtered_signal_curve(cfg: &ScenarioConfig, lengths_m: &[f64]) -> Result<Vec<(f64, f64)>> {
    if lengths_m.is_empty() {
        return Err(Error::Domain("lengths must be non-empty".into()));
    }
    lengths_m
        .par_iter()
        .map(|&l| evaluate_at_distance(cfg, l).map(|r| (l, r.filtered_signal_probability)))
        .collect()
}

/// Find the minimal propagation distance whose contamination is at or below
/// the scenario threshold.
///
/// Brackets by doubling from 1 mm, then bisects to a relative bracket width
/// of 1e−4. The returned report is the evaluation at the solution distance;
/// the spot just below the final bracket still fails the threshold.
pub fn solve_separation_distance(cfg: &ScenarioConfig) -> Result<SeparationResult> {
    cfg.validate()?;
    let threshold = cfg.contamination_threshold;
    let mut iterations = 0usize;

    let mut contamination_at = |len: f64| -> Result<(f64, WindowReport)> {
        iterations += 1;
        let report = evaluate_at_distance(cfg, len)?;
        Ok((report.contamination, report))
    };

    // Exponential bracketing. Contamination first rises while the signal
    // decays against a still-saturated pump, then falls as the pulses part;
    // flag any rebound on the falling side instead of bisecting across it.
    let mut lo = 0.0;
    let mut hi = BRACKET_START_M;
    let (mut f_hi, mut report_hi) = contamination_at(hi)?;
    let mut f_prev = f_hi;
    let mut f_max = f_hi;
    while f_hi > threshold {
        if hi >= DEFAULT_MAX_LENGTH_M {
            return Err(Error::SeparationUnreachable {
                threshold,
                max_length_m: DEFAULT_MAX_LENGTH_M,
            });
        }
        lo = hi;
        hi = (hi * 2.0).min(DEFAULT_MAX_LENGTH_M);
        let (f, report) = contamination_at(hi)?;
        if f > f_prev * (1.0 + 1e-6) + 1e-12 && f_prev < 0.5 * f_max {
            return Err(Error::NonMonotoneObjective { length_m: hi });
        }
        f_max = f_max.max(f);
        f_prev = f;
        f_hi = f;
        report_hi = report;
    }

    // Bisection: keep contamination(lo) > threshold ≥ contamination(hi).
    while hi - lo > BISECTION_REL_WIDTH * hi {
        let mid = 0.5 * (lo + hi);
        let (f, report) = contamination_at(mid)?;
        if f <= threshold {
            hi = mid;
            report_hi = report;
        } else {
            lo = mid;
        }
    }

    Ok(SeparationResult {
        distance_m: hi,
        arrival_separation_s: arrival_separation_s(hi, &cfg.platform),
        signal_loss_db: propagation_loss_db(hi, &cfg.platform.signal),
        pump_loss_db: propagation_loss_db(hi, &cfg.platform.pump),
        report: report_hi,
        iterations,
    })
}

/// One row of a jitter sweep. A failed solve is carried in the row rather
/// than dropped.
#[derive(Debug, Clone)]
pub struct JitterSweepRow {
    pub jitter_fwhm_s: f64,
    pub outcome: Result<SeparationResult>,
}

/// Solve the separation distance for each jitter value, rows in input
/// order. Rows are solved in parallel.
pub fn jitter_sweep(cfg: &ScenarioConfig, jitters_fwhm_s: &[f64]) -> Result<Vec<JitterSweepRow>> {
    if jitters_fwhm_s.is_empty() {
        return Err(Error::Domain("jitter list must be non-empty".into()));
    }
    for &j in jitters_fwhm_s {
        if !(j >= 0.0) || !j.is_finite() {
            return Err(Error::Domain(format!("jitter must be ≥ 0, got {j}")));
        }
    }
    Ok(jitters_fwhm_s
        .par_iter()
        .map(|&j| {
            let mut scenario = cfg.clone();
            scenario.detector.jitter_fwhm_s = j;
            JitterSweepRow {
                jitter_fwhm_s: j,
                outcome: solve_separation_distance(&scenario),
            }
        })
        .collect())
}
