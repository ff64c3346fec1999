//! Uniform temporal grids and densities sampled on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::temporal::pulse::{click_density, photon_number_density, PulseSpec};

/// A uniform grid of `count` time points `start + i·step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemporalGrid {
    pub start_s: f64,
    pub step_s: f64,
    pub count: usize,
}

impl TemporalGrid {
    pub fn new(start_s: f64, step_s: f64, count: usize) -> Result<Self> {
        if !start_s.is_finite() {
            return Err(Error::Config(format!(
                "grid start must be finite, got {start_s}"
            )));
        }
        if !(step_s > 0.0) || !step_s.is_finite() {
            return Err(Error::Config(format!(
                "grid step must be positive and finite, got {step_s}"
            )));
        }
        if count < 2 {
            return Err(Error::Config(format!(
                "grid needs at least 2 points, got {count}"
            )));
        }
        Ok(Self {
            start_s,
            step_s,
            count,
        })
    }

    /// Grid spanning `[lo, hi]` with step at most `max_step` (the step is
    /// shrunk so the span divides evenly).
    pub fn spanning(lo_s: f64, hi_s: f64, max_step_s: f64) -> Result<Self> {
        if !(hi_s > lo_s) {
            return Err(Error::Config(format!(
                "grid span must be non-empty, got [{lo_s}, {hi_s}]"
            )));
        }
        let intervals = ((hi_s - lo_s) / max_step_s).ceil() as usize;
        Self::new(lo_s, (hi_s - lo_s) / intervals as f64, intervals + 1)
    }

    pub fn time_at(&self, i: usize) -> f64 {
        self.start_s + i as f64 * self.step_s
    }

    pub fn end_s(&self) -> f64 {
        self.time_at(self.count - 1)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.time_at(i))
    }
}

/// What a [`SampledDensity`] represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityKind {
    PhotonNumberDensity,
    ClickProbabilityDensity,
}

/// A non-negative density sampled on a uniform temporal grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledDensity {
    pub grid: TemporalGrid,
    pub values: Vec<f64>,
    pub kind: DensityKind,
}

/// Trapezoidal moments of a sampled density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    /// Zeroth moment (total mass).
    pub total: f64,
    /// First moment: mean time, seconds.
    pub mean_s: f64,
    /// Square root of the second central moment, seconds.
    pub std_s: f64,
}

impl SampledDensity {
    pub fn new(grid: TemporalGrid, values: Vec<f64>, kind: DensityKind) -> Result<Self> {
        if values.len() != grid.count {
            return Err(Error::Config(format!(
                "density has {} values for a grid of {} points",
                values.len(),
                grid.count
            )));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::Config(format!(
                    "density value at index {i} must be finite and ≥ 0, got {v}"
                )));
            }
        }
        Ok(Self { grid, values, kind })
    }

    /// Trapezoidal integral over the whole grid.
    pub fn trapezoid_integral(&self) -> f64 {
        trapezoid(&self.values, self.grid.step_s)
    }

    /// Trapezoidal integral over `[lo, hi]`, treating the sampled density as
    /// piecewise linear and clamping to the grid extent.
    pub fn integral_between(&self, lo_s: f64, hi_s: f64) -> f64 {
        let start = self.grid.start_s;
        let step = self.grid.step_s;
        let end = self.grid.end_s();
        let lo = lo_s.max(start);
        let hi = hi_s.min(end);
        if hi <= lo {
            return 0.0;
        }
        let value_at = |t: f64| -> f64 {
            let x = (t - start) / step;
            let i = (x.floor() as usize).min(self.grid.count - 2);
            let frac = x - i as f64;
            self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
        };
        let i_lo = (((lo - start) / step).ceil() as usize).min(self.grid.count - 1);
        let i_hi = (((hi - start) / step).floor() as usize).min(self.grid.count - 1);
        if i_lo > i_hi {
            // Both edges fall inside one cell.
            return 0.5 * (value_at(lo) + value_at(hi)) * (hi - lo);
        }
        let mut sum = 0.0;
        // Partial cell before the first interior grid point.
        let t_lo_grid = self.grid.time_at(i_lo);
        if t_lo_grid > lo {
            sum += 0.5 * (value_at(lo) + self.values[i_lo]) * (t_lo_grid - lo);
        }
        // Whole interior cells.
        if i_hi > i_lo {
            sum += trapezoid(&self.values[i_lo..=i_hi], step);
        }
        // Partial cell after the last interior grid point.
        let t_hi_grid = self.grid.time_at(i_hi);
        if hi > t_hi_grid {
            sum += 0.5 * (self.values[i_hi] + value_at(hi)) * (hi - t_hi_grid);
        }
        sum
    }
}

fn trapezoid(values: &[f64], step: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    step * (inner + 0.5 * (values[0] + values[values.len() - 1]))
}

/// Grid span a pulse needs so that sampled click densities capture both the
/// sech² body and, for bright pulses, the advanced click spike near
/// `t_c − (σ/2)·ln A`.
pub fn required_grid_span(pulse: &PulseSpec) -> (f64, f64) {
    let sigma = pulse.sigma_s();
    let a = pulse.mean_photons.max(std::f64::consts::E);
    let lo = pulse.center_s - 0.5 * sigma * a.ln() - 8.0 * sigma;
    let hi = pulse.center_s + 8.0 * sigma;
    (lo, hi)
}

fn check_grid(pulse: &PulseSpec, grid: &TemporalGrid) -> Result<()> {
    let sigma = pulse.sigma_s();
    let max_step = sigma / 10.0;
    // Tolerate representation noise from constructing the grid span.
    let slack = 1.0 + 1e-9;
    if grid.step_s > max_step * slack {
        return Err(Error::Config(format!(
            "grid step {:.6e} s exceeds σ/10 = {:.6e} s for pulse '{}'",
            grid.step_s, max_step, pulse.label
        )));
    }
    let (lo, hi) = required_grid_span(pulse);
    if grid.start_s > lo + grid.step_s * 1e-6 {
        return Err(Error::Config(format!(
            "grid misses leading-tail click spike of pulse '{}': start {:.6e} s must be ≤ \
             t_c − (σ/2)·ln(max(A, e)) − 8σ = {:.6e} s",
            pulse.label, grid.start_s, lo
        )));
    }
    if grid.end_s() < hi - grid.step_s * 1e-6 {
        return Err(Error::Config(format!(
            "grid ends before the tail of pulse '{}': end {:.6e} s must be ≥ t_c + 8σ = {:.6e} s",
            pulse.label,
            grid.end_s(),
            hi
        )));
    }
    Ok(())
}

/// Sample the photon-number density of `pulse` on `grid`.
pub fn sample_photon_density(pulse: &PulseSpec, grid: &TemporalGrid) -> Result<SampledDensity> {
    check_grid(pulse, grid)?;
    let values = grid
        .times()
        .map(|t| photon_number_density(t, pulse))
        .collect();
    SampledDensity::new(*grid, values, DensityKind::PhotonNumberDensity)
}

/// Sample the click-probability density of `pulse` on `grid`.
///
/// The grid must satisfy `step ≤ σ/10` and cover
/// `[t_c − (σ/2)·ln(max(A, e)) − 8σ, t_c + 8σ]`; violations are rejected
/// with the offending bound spelled out.
pub fn sample_click_density(pulse: &PulseSpec, grid: &TemporalGrid) -> Result<SampledDensity> {
    check_grid(pulse, grid)?;
    let values = grid.times().map(|t| click_density(t, pulse)).collect();
    SampledDensity::new(*grid, values, DensityKind::ClickProbabilityDensity)
}

/// Trapezoidal zeroth/first/second central moments of a density.
pub fn density_moments(density: &SampledDensity) -> Result<Moments> {
    let step = density.grid.step_s;
    let total = density.trapezoid_integral();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::DegenerateDensity);
    }
    let weighted: Vec<f64> = density
        .values
        .iter()
        .zip(density.grid.times())
        .map(|(v, t)| v * t)
        .collect();
    let mean = trapezoid(&weighted, step) / total;
    let central: Vec<f64> = density
        .values
        .iter()
        .zip(density.grid.times())
        .map(|(v, t)| v * (t - mean) * (t - mean))
        .collect();
    let var = trapezoid(&central, step) / total;
    Ok(Moments {
        total,
        mean_s: mean,
        std_s: var.max(0.0).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temporal::pulse::WidthConvention;
    use approx::assert_relative_eq;

    const PS: f64 = 1e-12;

    fn compliant_grid(pulse: &PulseSpec) -> TemporalGrid {
        let (lo, hi) = required_grid_span(pulse);
        TemporalGrid::spanning(lo, hi, pulse.sigma_s() / 10.0).unwrap()
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(TemporalGrid::new(0.0, 0.0, 10).is_err());
        assert!(TemporalGrid::new(0.0, -1.0, 10).is_err());
        assert!(TemporalGrid::new(0.0, 1.0, 1).is_err());
        assert!(TemporalGrid::new(f64::NAN, 1.0, 10).is_err());
    }

    #[test]
    fn sampled_density_rejects_negative_or_nonfinite_values() {
        let grid = TemporalGrid::new(0.0, 1.0, 3).unwrap();
        assert!(
            SampledDensity::new(grid, vec![0.0, -1.0, 0.0], DensityKind::PhotonNumberDensity)
                .is_err()
        );
        assert!(SampledDensity::new(
            grid,
            vec![0.0, f64::NAN, 0.0],
            DensityKind::PhotonNumberDensity
        )
        .is_err());
        assert!(
            SampledDensity::new(grid, vec![0.0, 1.0], DensityKind::PhotonNumberDensity).is_err()
        );
    }

    #[test]
    fn faint_pulse_click_integral_matches_closed_form() {
        let p = PulseSpec::sech2(PS, 0.0, 0.1, "signal", WidthConvention::Sech2Exact).unwrap();
        let d = sample_click_density(&p, &compliant_grid(&p)).unwrap();
        assert_relative_eq!(
            d.trapezoid_integral(),
            0.09516258196404048,
            max_relative = 1e-5
        );
    }

    #[test]
    fn bright_pulse_click_integral_saturates_to_unity() {
        let p = PulseSpec::sech2(PS, 0.0, 1e9, "pump", WidthConvention::Sech2Exact).unwrap();
        let d = sample_click_density(&p, &compliant_grid(&p)).unwrap();
        assert_relative_eq!(d.trapezoid_integral(), 1.0, max_relative = 1e-4);
    }

    #[test]
    fn zero_pulse_samples_to_zero() {
        let p = PulseSpec::sech2(PS, 0.0, 0.0, "empty", WidthConvention::Sech2Exact).unwrap();
        let d = sample_click_density(&p, &compliant_grid(&p)).unwrap();
        assert!(d.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn grid_missing_the_click_spike_is_rejected_by_name() {
        let p = PulseSpec::sech2(PS, 0.0, 1e9, "pump", WidthConvention::Sech2Exact).unwrap();
        let sigma = p.sigma_s();
        let grid = TemporalGrid::spanning(-3.0 * sigma, 8.0 * sigma, sigma / 10.0).unwrap();
        let err = sample_click_density(&p, &grid).unwrap_err();
        assert!(
            err.to_string().contains("misses leading-tail click spike"),
            "{err}"
        );
    }

    #[test]
    fn too_coarse_grid_is_rejected_by_name() {
        let p = PulseSpec::sech2(PS, 0.0, 0.1, "signal", WidthConvention::Sech2Exact).unwrap();
        let (lo, hi) = required_grid_span(&p);
        let grid = TemporalGrid::spanning(lo, hi, p.sigma_s()).unwrap();
        let err = sample_click_density(&p, &grid).unwrap_err();
        assert!(err.to_string().contains("exceeds σ/10"), "{err}");
    }

    #[test]
    fn moments_of_a_sampled_gaussian() {
        // Unit Gaussian with σ = 8.49 ps, sampled densely over ±8σ.
        let sigma = 8.49 * PS;
        let grid = TemporalGrid::spanning(-8.0 * sigma, 8.0 * sigma, sigma / 20.0).unwrap();
        let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        let values: Vec<f64> = grid
            .times()
            .map(|t| norm * (-0.5 * (t / sigma) * (t / sigma)).exp())
            .collect();
        let d = SampledDensity::new(grid, values, DensityKind::ClickProbabilityDensity).unwrap();
        let m = density_moments(&d).unwrap();
        assert_relative_eq!(m.total, 1.0, max_relative = 1e-6);
        assert!(m.mean_s.abs() < 1e-3 * sigma);
        assert_relative_eq!(m.std_s, sigma, max_relative = 5e-3);
    }

    #[test]
    fn moments_of_symmetric_density_center_on_the_pulse() {
        let p =
            PulseSpec::sech2(PS, 3.0 * PS, 0.05, "signal", WidthConvention::Sech2Exact).unwrap();
        let d = sample_photon_density(&p, &compliant_grid(&p)).unwrap();
        let m = density_moments(&d).unwrap();
        assert!((m.mean_s - 3.0 * PS).abs() < 1e-4 * p.sigma_s());
    }

    #[test]
    fn moments_reject_empty_mass() {
        let grid = TemporalGrid::new(0.0, 1.0, 4).unwrap();
        let d = SampledDensity::new(grid, vec![0.0; 4], DensityKind::PhotonNumberDensity).unwrap();
        assert!(matches!(density_moments(&d), Err(Error::DegenerateDensity)));
    }

    #[test]
    fn window_integral_with_partial_cells() {
        // f(t) = t on [0, 4]: ∫ from 0.5 to 2.5 = (2.5² − 0.5²)/2 = 3.
        let grid = TemporalGrid::new(0.0, 1.0, 5).unwrap();
        let d = SampledDensity::new(
            grid,
            vec![0.0, 1.0, 2.0, 3.0, 4.0],
            DensityKind::PhotonNumberDensity,
        )
        .unwrap();
        assert_relative_eq!(d.integral_between(0.5, 2.5), 3.0, max_relative = 1e-12);
        // Window entirely inside one cell: ∫ t from 1.25 to 1.75 = 0.75.
        assert_relative_eq!(d.integral_between(1.25, 1.75), 0.75, max_relative = 1e-12);
        // Clamped to grid extent.
        assert_relative_eq!(d.integral_between(-10.0, 10.0), 8.0, max_relative = 1e-12);
        assert_eq!(d.integral_between(5.0, 6.0), 0.0);
    }
}
