//! Instrumentation model for single-photon detectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Timing and efficiency model of a single-photon detector plus its clock.
///
/// `jitter_fwhm_s` and `efficiency` drive the separation analysis; dead time
/// and dark counts only matter to the pulse-train emulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorSpec {
    /// Gaussian instrumentation jitter, full width at half maximum, seconds.
    pub jitter_fwhm_s: f64,
    /// Detection efficiency in [0, 1]; thins the mean photon number.
    pub efficiency: f64,
    /// Recovery interval after a click during which further clicks are lost.
    pub dead_time_s: f64,
    /// Homogeneous dark-count rate, events per second.
    pub dark_count_rate_hz: f64,
}

impl Default for DetectorSpec {
    fn default() -> Self {
        Self {
            jitter_fwhm_s: 0.0,
            efficiency: 1.0,
            dead_time_s: 0.0,
            dark_count_rate_hz: 0.0,
        }
    }
}

impl DetectorSpec {
    /// Ideal detector (unit efficiency, no dead time, no darks) with the
    /// given timing jitter.
    pub fn with_jitter(jitter_fwhm_s: f64) -> Result<Self> {
        let d = Self {
            jitter_fwhm_s,
            ..Self::default()
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.jitter_fwhm_s >= 0.0) || !self.jitter_fwhm_s.is_finite() {
            return Err(Error::Domain(format!(
                "jitter must be ≥ 0 and finite, got {}",
                self.jitter_fwhm_s
            )));
        }
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::Domain(format!(
                "efficiency must be in [0, 1], got {}",
                self.efficiency
            )));
        }
        if !(self.dead_time_s >= 0.0) || !self.dead_time_s.is_finite() {
            return Err(Error::Domain(format!(
                "dead time must be ≥ 0 and finite, got {}",
                self.dead_time_s
            )));
        }
        if !(self.dark_count_rate_hz >= 0.0) || !self.dark_count_rate_hz.is_finite() {
            return Err(Error::Domain(format!(
                "dark-count rate must be ≥ 0 and finite, got {}",
                self.dark_count_rate_hz
            )));
        }
        Ok(())
    }
}
