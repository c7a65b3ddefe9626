use std::fs;
use std::path::Path;

use eesaa_core::NetworkConfig;

use crate::error::CliError;

/// Reads a JSON configuration. Absent keys keep the reference defaults;
/// unknown keys are rejected.
pub fn parse_config(path: &Path) -> Result<NetworkConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_config_str(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_config_str(text: &str) -> Result<NetworkConfig, CliError> {
    let cfg: NetworkConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}
