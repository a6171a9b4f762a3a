//! Configuration-driven sweeps, CSV persistence, rate fits and built-in studies.

pub mod config;
pub mod csv;
pub mod fit;
pub mod presets;
pub mod sweep;

pub use config::{KernelOrders, SweepConfig};
pub use csv::{emit, load, Record};
pub use fit::{fit_rate, series, Abscissa, RateFit};
pub use presets::{preset, run_preset, Feature, Preset, PRESET_NAMES};
pub use sweep::{run_sweep, SweepPoint};
