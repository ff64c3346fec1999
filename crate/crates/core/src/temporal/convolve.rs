//! Gaussian jitter convolution on sampled densities.

use crate::error::{Error, Result};
use crate::temporal::grid::{SampledDensity, TemporalGrid};

const GAUSSIAN_FWHM_FACTOR: f64 = 2.354_820_045_030_949_3; // 2√(2 ln 2)

/// Standard deviation of a Gaussian with the given FWHM.
pub fn gaussian_sigma_from_fwhm(fwhm_s: f64) -> f64 {
    fwhm_s / GAUSSIAN_FWHM_FACTOR
}

/// Convolve a sampled density with a unit-area Gaussian timing kernel of the
/// given FWHM.
///
/// The kernel is truncated at ±6σ (tail mass < 2e−9) and renormalized on the
/// grid so the discrete sum has exactly unit area; the output grid is
/// extended by the kernel half-width on each side so no mass leaves the grid.
pub fn convolve_jitter(density: &SampledDensity, jitter_fwhm_s: f64) -> Result<SampledDensity> {
    if !(jitter_fwhm_s >= 0.0) || !jitter_fwhm_s.is_finite() {
        return Err(Error::Domain(format!(
            "jitter fwhm must be ≥ 0 and finite, got {jitter_fwhm_s}"
        )));
    }
    if jitter_fwhm_s == 0.0 {
        return Ok(density.clone());
    }
    let step = density.grid.step_s;
    let sigma = gaussian_sigma_from_fwhm(jitter_fwhm_s);
    let half = ((6.0 * sigma / step).ceil() as usize).max(1);

    let mut kernel = Vec::with_capacity(2 * half + 1);
    for m in -(half as i64)..=(half as i64) {
        let x = m as f64 * step / sigma;
        kernel.push((-0.5 * x * x).exp());
    }
    let norm: f64 = kernel.iter().sum::<f64>() * step;
    for k in &mut kernel {
        *k /= norm;
    }

    let out_count = density.grid.count + 2 * half;
    let out_grid = TemporalGrid::new(density.grid.start_s - half as f64 * step, step, out_count)?;
    let mut out = vec![0.0; out_count];
    for (j, v) in density.values.iter().enumerate() {
        if *v == 0.0 {
            continue;
        }
        let scaled = v * step;
        for (m, k) in kernel.iter().enumerate() {
            out[j + m] += scaled * k;
        }
    }
    SampledDensity::new(out_grid, out, density.kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temporal::grid::{density_moments, DensityKind};
    use approx::assert_relative_eq;

    const PS: f64 = 1e-12;

    fn gaussian_density(sigma: f64, center: f64, step: f64) -> SampledDensity {
        let grid =
            TemporalGrid::spanning(center - 8.0 * sigma, center + 8.0 * sigma, step).unwrap();
        let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        let values = grid
            .times()
            .map(|t| norm * (-0.5 * ((t - center) / sigma).powi(2)).exp())
            .collect();
        SampledDensity::new(grid, values, DensityKind::ClickProbabilityDensity).unwrap()
    }

    #[test]
    fn zero_jitter_is_the_identity() {
        let d = gaussian_density(1.0 * PS, 0.0, 0.05 * PS);
        let out = convolve_jitter(&d, 0.0).unwrap();
        assert_eq!(out, d);
    }

    #[test]
    fn negative_jitter_is_rejected() {
        let d = gaussian_density(1.0 * PS, 0.0, 0.05 * PS);
        assert!(convolve_jitter(&d, -PS).is_err());
        assert!(convolve_jitter(&d, f64::NAN).is_err());
    }

    #[test]
    fn area_is_preserved() {
        let d = gaussian_density(0.8 * PS, 2.0 * PS, 0.04 * PS);
        let before = d.trapezoid_integral();
        let out = convolve_jitter(&d, 12.0 * PS).unwrap();
        assert_relative_eq!(out.trapezoid_integral(), before, max_relative = 1e-6);
    }

    #[test]
    fn gaussian_variances_add() {
        let sigma_in = 1.3 * PS;
        let jitter_fwhm = 8.0 * PS;
        let sigma_kernel = gaussian_sigma_from_fwhm(jitter_fwhm);
        let d = gaussian_density(sigma_in, 0.0, 0.05 * PS);
        let out = convolve_jitter(&d, jitter_fwhm).unwrap();
        let m = density_moments(&out).unwrap();
        let expected = (sigma_in * sigma_in + sigma_kernel * sigma_kernel).sqrt();
        assert_relative_eq!(m.std_s, expected, max_relative = 1e-3);
    }

    #[test]
    fn output_grid_extends_by_the_kernel_half_width() {
        let d = gaussian_density(1.0 * PS, 0.0, 0.05 * PS);
        let jitter = 5.0 * PS;
        let out = convolve_jitter(&d, jitter).unwrap();
        let half = (6.0 * gaussian_sigma_from_fwhm(jitter) / d.grid.step_s).ceil() as usize;
        assert_eq!(out.grid.count, d.grid.count + 2 * half);
        assert_relative_eq!(
            out.grid.start_s,
            d.grid.start_s - half as f64 * d.grid.step_s,
            max_relative = 1e-12
        );
    }
}
