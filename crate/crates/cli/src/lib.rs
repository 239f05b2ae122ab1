//! Configuration, dispatch and CSV output behind the `rotordyn` binary.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, parse_config_with, Command, ConfigError, Overrides, RunConfig};
pub use run::{execute, RunOutput};

/// Environment variable that caps the worker threads used by sweeps and
/// comparisons.
pub const THREADS_ENV: &str = "ROTORDYN_THREADS";

/// Path of the effective-configuration sidecar written next to `out`.
pub fn sidecar_path(out: &std::path::Path) -> std::path::PathBuf {
    let mut name = out
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".config.toml");
    out.with_file_name(name)
}
