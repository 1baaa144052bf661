use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

/// Sidecar describing how an output file was produced.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a, P: Serialize> {
    pub subcommand: &'a str,
    pub parameters: &'a P,
    pub seed: u64,
    pub version: &'a str,
    pub wall_time_secs: f64,
}

/// `<output>.manifest.json`
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn write<P: Serialize>(
    output: &Path,
    subcommand: &str,
    parameters: &P,
    seed: u64,
    wall_time: Duration,
) -> std::io::Result<()> {
    let m = RunManifest {
        subcommand,
        parameters,
        seed,
        version: env!("CARGO_PKG_VERSION"),
        wall_time_secs: wall_time.as_secs_f64(),
    };
    let json = serde_json::to_string_pretty(&m).map_err(std::io::Error::other)?;
    std::fs::write(sidecar_path(output), json + "\n")
}
