//! Pulse shapes and Poisson click statistics.
//!
//! A pulse is described by its photon-number density over time,
//! `S(t) = A/(2σ) · sech²((t − t_c)/σ)`, whose integral is the mean photon
//! number `A`. The running integral `μ(t)` feeds the Poisson click
//! probability `1 − e^{−μ}`, and its time derivative `S(t)·e^{−μ(t)}` is the
//! click-probability density a timing detector samples from.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a quoted FWHM maps onto the sech² scale parameter σ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WidthConvention {
    /// σ = FWHM / (2 ln(1 + √2)), the exact half-maximum points of sech².
    #[default]
    Sech2Exact,
    /// σ = FWHM / (2 √(2 ln 2)), the Gaussian FWHM relation.
    GaussianEquivalent,
    /// σ = FWHM · 2 √(2 ln 2), the Gaussian relation with the factor
    /// applied as a multiplier instead of a divisor. Kept for comparison
    /// runs; it does not reproduce the reference separation distances.
    GaussianReciprocal,
}

/// Supported pulse envelope shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseShape {
    #[default]
    Sech2,
}

/// One optical pulse: envelope shape, width, arrival time, and mean photon
/// number. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub shape: PulseShape,
    /// Full width at half maximum of the photon-number density, seconds.
    pub fwhm_s: f64,
    /// Arrival time of the envelope center at the detector, seconds.
    pub center_s: f64,
    /// Mean photon number carried by the pulse (the pulse area A).
    pub mean_photons: f64,
    /// Free-text role tag, e.g. "pump" or "signal".
    pub label: String,
    pub width_convention: WidthConvention,
}

/// Convert a sech² FWHM to the scale parameter σ under `convention`.
pub fn sigma_from_fwhm(fwhm_s: f64, convention: WidthConvention) -> Result<f64> {
    if !(fwhm_s > 0.0) || !fwhm_s.is_finite() {
        return Err(Error::Domain(format!(
            "pulse fwhm must be positive and finite, got {fwhm_s}"
        )));
    }
    // sech²(x) = 1/2 at x = ln(1 + √2)
    let sech2_half = 2.0 * (1.0 + std::f64::consts::SQRT_2).ln();
    let gauss = 2.0 * (2.0 * std::f64::consts::LN_2).sqrt();
    Ok(match convention {
        WidthConvention::Sech2Exact => fwhm_s / sech2_half,
        WidthConvention::GaussianEquivalent => fwhm_s / gauss,
        WidthConvention::GaussianReciprocal => fwhm_s * gauss,
    })
}

impl PulseSpec {
    /// Build a sech² pulse, validating widths and photon numbers.
    pub fn sech2(
        fwhm_s: f64,
        center_s: f64,
        mean_photons: f64,
        label: impl Into<String>,
        width_convention: WidthConvention,
    ) -> Result<Self> {
        if !(fwhm_s > 0.0) || !fwhm_s.is_finite() {
            return Err(Error::Domain(format!(
                "pulse fwhm must be positive and finite, got {fwhm_s}"
            )));
        }
        if !(mean_photons >= 0.0) || !mean_photons.is_finite() {
            return Err(Error::Domain(format!(
                "mean photon number must be ≥ 0 and finite, got {mean_photons}"
            )));
        }
        if !center_s.is_finite() {
            return Err(Error::Domain(format!(
                "pulse center must be finite, got {center_s}"
            )));
        }
        Ok(Self {
            shape: PulseShape::Sech2,
            fwhm_s,
            center_s,
            mean_photons,
            label: label.into(),
            width_convention,
        })
    }

    /// Scale parameter σ in seconds.
    pub fn sigma_s(&self) -> f64 {
        sigma_from_fwhm(self.fwhm_s, self.width_convention).expect("validated at construction")
    }
}

/// Photon-number density S(t) = A/(2σ) · sech²((t − t_c)/σ), photons/second.
pub fn photon_number_density(t_s: f64, pulse: &PulseSpec) -> f64 {
    let sigma = pulse.sigma_s();
    let u = (t_s - pulse.center_s) / sigma;
    // cosh overflows to +inf for |u| ≳ 710; sech² then underflows to 0.
    let sech = 1.0 / u.cosh();
    pulse.mean_photons / (2.0 * sigma) * sech * sech
}

/// Running mean photon number μ(t) = ∫_{−∞}^{t} S dt'.
///
/// Evaluated in the logistic form A / (1 + e^{−2u}) rather than
/// (A/2)(1 + tanh u): on the leading tail the tanh form cancels
/// catastrophically while the logistic form keeps full relative precision
/// down to μ values near the f64 underflow limit.
pub fn cumulative_mean_photons(t_s: f64, pulse: &PulseSpec) -> f64 {
    let u = (t_s - pulse.center_s) / pulse.sigma_s();
    let a = pulse.mean_photons;
    if u >= 0.0 {
        a / (1.0 + (-2.0 * u).exp())
    } else {
        let e = (2.0 * u).exp();
        a * e / (1.0 + e)
    }
}

/// Probability that a detector fires on a pulse of mean photon number `mu`:
/// 1 − P(μ, 0) = 1 − e^{−μ}, in the expm1 form that is exact for small μ.
pub fn click_probability(mu: f64) -> Result<f64> {
    if !(mu >= 0.0) {
        return Err(Error::Domain(format!(
            "mean photon number must be ≥ 0, got {mu}"
        )));
    }
    Ok(-(-mu).exp_m1())
}

/// Cumulative click probability 1 − e^{−μ(t)} after all light up to `t_s`
/// has reached the detector.
pub fn cumulative_click_probability(t_s: f64, pulse: &PulseSpec) -> f64 {
    -(-cumulative_mean_photons(t_s, pulse)).exp_m1()
}

/// Click-probability density d/dt [1 − e^{−μ(t)}] = S(t) · e^{−μ(t)}, 1/s.
///
/// For bright pulses (A ≫ 1) this density does NOT peak at the pulse
/// center: the detector almost surely fires on the leading tail, so the
/// density spikes near t_c − (σ/2)·ln A. Grids must reach that far out.
pub fn click_density(t_s: f64, pulse: &PulseSpec) -> f64 {
    photon_number_density(t_s, pulse) * (-cumulative_mean_photons(t_s, pulse)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const PS: f64 = 1e-12;

    fn pulse(mean_photons: f64) -> PulseSpec {
        PulseSpec::sech2(PS, 0.0, mean_photons, "test", WidthConvention::Sech2Exact).unwrap()
    }

    #[test]
    fn sigma_conventions_for_one_picosecond() {
        let f = 1.0 * PS;
        assert_relative_eq!(
            sigma_from_fwhm(f, WidthConvention::Sech2Exact).unwrap(),
            0.5672963285532555 * PS,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            sigma_from_fwhm(f, WidthConvention::GaussianEquivalent).unwrap(),
            0.42466090014400953 * PS,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            sigma_from_fwhm(f, WidthConvention::GaussianReciprocal).unwrap(),
            2.3548200450309493 * PS,
            max_relative = 1e-12
        );
    }

    #[test]
    fn sigma_rejects_nonpositive_fwhm() {
        assert!(sigma_from_fwhm(0.0, WidthConvention::Sech2Exact).is_err());
        assert!(sigma_from_fwhm(-PS, WidthConvention::Sech2Exact).is_err());
        assert!(sigma_from_fwhm(f64::NAN, WidthConvention::Sech2Exact).is_err());
    }

    #[test]
    fn density_peak_is_a_over_two_sigma() {
        let p = pulse(0.1);
        let sigma = p.sigma_s();
        assert_relative_eq!(
            photon_number_density(0.0, &p),
            0.1 / (2.0 * sigma),
            max_relative = 1e-12
        );
        // A = 0.1, σ = 0.56729 ps → peak 8.8139e10 photons/s
        assert_relative_eq!(
            photon_number_density(0.0, &p),
            8.8139e10,
            max_relative = 1e-4
        );
    }

    #[test]
    fn density_is_symmetric_and_sech_one_squared_at_one_sigma() {
        let p = pulse(1.0);
        let sigma = p.sigma_s();
        assert_relative_eq!(
            photon_number_density(sigma, &p),
            photon_number_density(-sigma, &p),
            max_relative = 1e-12
        );
        // sech(1)² = 0.41997434161402614
        assert_relative_eq!(
            photon_number_density(sigma, &p),
            0.41997434161402614 / (2.0 * sigma),
            max_relative = 1e-12
        );
    }

    #[test]
    fn cumulative_limits_and_center() {
        let p = pulse(0.1);
        assert_relative_eq!(cumulative_mean_photons(1e-9, &p), 0.1, max_relative = 1e-12);
        assert_relative_eq!(cumulative_mean_photons(0.0, &p), 0.05, max_relative = 1e-12);
        assert_eq!(cumulative_mean_photons(-1.0, &p), 0.0);
    }

    #[test]
    fn cumulative_leading_tail_keeps_relative_precision() {
        // A = 1e9, u = −15: μ = A e^{−30}/(1 + e^{−30}) = 9.357622968839301e-5
        let p = pulse(1e9);
        let sigma = p.sigma_s();
        assert_relative_eq!(
            cumulative_mean_photons(-15.0 * sigma, &p),
            9.357622968839301e-5,
            max_relative = 1e-12
        );
        // Far tail: still a clean exponential, no cancellation.
        let mu = cumulative_mean_photons(-350.0 * sigma, &p);
        assert!(mu > 0.0 && mu < 1e-290);
        assert_relative_eq!(mu, 1e9 * (-700.0f64).exp(), max_relative = 1e-9);
    }

    #[test]
    fn click_probability_values() {
        assert_eq!(click_probability(0.0).unwrap(), 0.0);
        assert_relative_eq!(
            click_probability(0.1).unwrap(),
            0.09516258196404048,
            max_relative = 1e-12
        );
        assert_eq!(click_probability(1e9).unwrap(), 1.0);
        assert!(click_probability(-0.1).is_err());
        assert!(click_probability(f64::NAN).is_err());
    }

    #[test]
    fn click_density_tracks_photon_density_for_faint_pulses() {
        let p = pulse(0.1);
        let sigma = p.sigma_s();
        for u in [-3.0, -1.0, 0.0, 1.0, 3.0] {
            let t = u * sigma;
            let s = photon_number_density(t, &p);
            let d = click_density(t, &p);
            assert!(d <= s);
            assert!(d >= s * 0.9, "within 10% for A = 0.1");
        }
    }

    #[test]
    fn click_density_zero_pulse_is_zero() {
        let p = pulse(0.0);
        assert_eq!(click_density(0.0, &p), 0.0);
        assert_eq!(click_density(1e-12, &p), 0.0);
    }

    #[test]
    fn bright_pulse_click_spike_sits_on_the_leading_tail() {
        // Independent maximizer: golden-section search on the closed form
        // written out locally, so the location does not come from the grid
        // sampling path.
        let a = 1e9f64;
        let sigma = 0.5672963285532555e-12;
        let dens = |t: f64| {
            let u = t / sigma;
            let sech = 1.0 / u.cosh();
            let mu = if u >= 0.0 {
                a / (1.0 + (-2.0 * u).exp())
            } else {
                a * (2.0 * u).exp() / (1.0 + (2.0 * u).exp())
            };
            a / (2.0 * sigma) * sech * sech * (-mu).exp()
        };
        let (mut lo, mut hi) = (-12.0 * sigma, -8.0 * sigma);
        let phi = (5.0f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let x1 = hi - phi * (hi - lo);
            let x2 = lo + phi * (hi - lo);
            if dens(x1) < dens(x2) {
                lo = x1;
            } else {
                hi = x2;
            }
        }
        let t_star = 0.5 * (lo + hi);
        // 5.8781 ps before center, and within a tenth of σ of −(σ/2)·ln A.
        assert_relative_eq!(t_star, -5.8781163130337e-12, max_relative = 1e-4);
        assert!((t_star - (-(sigma / 2.0) * a.ln())).abs() < 0.1 * sigma);

        let p = pulse(a);
        assert_relative_eq!(
            click_density(t_star, &p),
            dens(t_star),
            max_relative = 1e-12
        );
    }

    #[test]
    fn pulse_spec_rejects_bad_fields() {
        assert!(PulseSpec::sech2(0.0, 0.0, 1.0, "x", WidthConvention::Sech2Exact).is_err());
        assert!(PulseSpec::sech2(PS, 0.0, -1.0, "x", WidthConvention::Sech2Exact).is_err());
        assert!(
            PulseSpec::sech2(PS, f64::INFINITY, 1.0, "x", WidthConvention::Sech2Exact).is_err()
        );
    }
}
