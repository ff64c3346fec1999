//! Pure temporal core: pulse shapes, Poisson click statistics, sampled
//! densities, and jitter convolution.
//!
//! Everything here is a pure function of its immutable inputs and safe to
//! share across threads.

mod convolve;
mod detector;
mod grid;
mod pulse;

pub use convolve::{convolve_jitter, gaussian_sigma_from_fwhm};
pub use detector::DetectorSpec;
pub use grid::{
    density_moments, required_grid_span, sample_click_density, sample_photon_density, DensityKind,
    Moments, SampledDensity, TemporalGrid,
};
pub use pulse::{
    click_density, click_probability, cumulative_click_probability, cumulative_mean_photons,
    photon_number_density, sigma_from_fwhm, PulseShape, PulseSpec, WidthConvention,
};
