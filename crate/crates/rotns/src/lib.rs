//! Standard-library companion of `rotns-core`: an FFT backend, the spectrum
//! container, TOML run configurations, result files and the `rotns` command.

pub mod commands;
pub mod config;
pub mod container;
pub mod fft;
pub mod output;

pub use fft::RustFft;
