//! Platform registry and bulk-material dispersion.

mod platform;
mod sellmeier;

pub use platform::{
    arrival_separation_s, attenuate, builtin_platforms, find_platform, load_platform_file,
    parse_platform_json, propagation_loss_db, soi_text_consistent, PlatformSpec, Polarization,
    Process, WaveChannel, SPEED_OF_LIGHT_M_PER_S,
};
pub use sellmeier::{SellmeierModel, SellmeierTerm};
