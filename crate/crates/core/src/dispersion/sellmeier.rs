//! Sellmeier dispersion models for bulk materials.
//!
//! n²(λ) = 1 + Σ B_i λ² / (λ² − C_i), with λ in µm and C_i in µm².
//! The group index n_g = n − λ·dn/dλ is computed from the analytic
//! derivative of the Sellmeier sum, not a finite difference.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One Sellmeier resonance term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SellmeierTerm {
    pub b: f64,
    /// Resonance wavelength squared, µm².
    pub c_um2: f64,
}

/// A Sellmeier model with its validity range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SellmeierModel {
    pub name: String,
    pub terms: Vec<SellmeierTerm>,
    /// Inclusive wavelength validity range, µm.
    pub valid_range_um: (f64, f64),
}

impl SellmeierModel {
    pub fn new(
        name: impl Into<String>,
        terms: Vec<SellmeierTerm>,
        valid_range_um: (f64, f64),
    ) -> Result<Self> {
        let (lo, hi) = valid_range_um;
        if !(lo > 0.0) || !(hi > lo) {
            return Err(Error::Config(format!(
                "Sellmeier validity range must satisfy 0 < λ_min < λ_max, got ({lo}, {hi})"
            )));
        }
        if terms.is_empty() {
            return Err(Error::Config(
                "Sellmeier model needs at least one term".into(),
            ));
        }
        for t in &terms {
            if !t.b.is_finite() || !t.c_um2.is_finite() {
                return Err(Error::Config(
                    "Sellmeier coefficients must be finite".into(),
                ));
            }
        }
        Ok(Self {
            name: name.into(),
            terms,
            valid_range_um,
        })
    }

    /// Fused silica (visible through mid-infrared bulk fit).
    pub fn fused_silica() -> Self {
        Self::new(
            "fused-silica",
            vec![
                SellmeierTerm {
                    b: 0.696_166_3,
                    c_um2: 0.068_404_3 * 0.068_404_3,
                },
                SellmeierTerm {
                    b: 0.407_942_6,
                    c_um2: 0.116_241_4 * 0.116_241_4,
                },
                SellmeierTerm {
                    b: 0.897_479_4,
                    c_um2: 9.896_161 * 9.896_161,
                },
            ],
            (0.21, 3.71),
        )
        .expect("builtin model is valid")
    }

    /// Stoichiometric silicon nitride (bulk LPCVD fit).
    pub fn silicon_nitride() -> Self {
        Self::new(
            "silicon-nitride",
            vec![
                SellmeierTerm {
                    b: 3.024_9,
                    c_um2: 0.135_340_6 * 0.135_340_6,
                },
                SellmeierTerm {
                    b: 40_314.0,
                    c_um2: 1_239.842 * 1_239.842,
                },
            ],
            (0.31, 5.504),
        )
        .expect("builtin model is valid")
    }

    fn check_wavelength(&self, wavelength_um: f64) -> Result<()> {
        let (lo, hi) = self.valid_range_um;
        if !wavelength_um.is_finite() || wavelength_um < lo || wavelength_um > hi {
            return Err(Error::Domain(format!(
                "wavelength {wavelength_um} µm outside the validity range [{lo}, {hi}] µm of \
                 model '{}'",
                self.name
            )));
        }
        let l2 = wavelength_um * wavelength_um;
        for t in &self.terms {
            if (l2 - t.c_um2).abs() < 1e-12 * l2.max(t.c_um2) {
                return Err(Error::Domain(format!(
                    "wavelength {wavelength_um} µm sits on the Sellmeier pole at √{} µm",
                    t.c_um2
                )));
            }
        }
        Ok(())
    }

    /// Refractive index n(λ).
    pub fn index(&self, wavelength_um: f64) -> Result<f64> {
        self.check_wavelength(wavelength_um)?;
        let l2 = wavelength_um * wavelength_um;
        let n2 = 1.0
            + self
                .terms
                .iter()
                .map(|t| t.b * l2 / (l2 - t.c_um2))
                .sum::<f64>();
        if !(n2 > 1.0) {
            return Err(Error::Domain(format!(
                "model '{}' gives n² = {n2} ≤ 1 at {wavelength_um} µm",
                self.name
            )));
        }
        Ok(n2.sqrt())
    }

    /// Analytic dn/dλ in 1/µm.
    pub fn index_derivative(&self, wavelength_um: f64) -> Result<f64> {
        let n = self.index(wavelength_um)?;
        let l2 = wavelength_um * wavelength_um;
        let sum: f64 = self
            .terms
            .iter()
            .map(|t| t.b * t.c_um2 * wavelength_um / ((l2 - t.c_um2) * (l2 - t.c_um2)))
            .sum();
        Ok(-sum / n)
    }

    /// Group index n_g(λ) = n − λ·dn/dλ.
    pub fn group_index(&self, wavelength_um: f64) -> Result<f64> {
        Ok(self.index(wavelength_um)? - wavelength_um * self.index_derivative(wavelength_um)?)
    }
}
