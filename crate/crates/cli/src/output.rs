//! CSV time series and JSON provenance records.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use eesaa_core::engine::RNG_ALGORITHM;
use eesaa_core::{NetworkConfig, PairingTable, ProtocolKind, SimSummary, ENGINE_VERSION};

use crate::error::CliError;

pub const CSV_HEADER: [&str; 8] = [
    "round",
    "alive",
    "dead",
    "ch_count",
    "packets_to_bs",
    "packets_to_ch",
    "energy_dissipated",
    "total_residual",
];

/// Formats `x` with `sig` significant digits, like C's `%.{sig}g`.
pub fn format_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", sig.saturating_sub(1), x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= sig as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_fraction(mantissa), sign, exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// The per-round table as CSV bytes (LF line endings).
pub fn csv_bytes(summary: &SimSummary) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("write to memory");
    for r in &summary.per_round {
        w.write_record([
            r.round.to_string(),
            r.alive.to_string(),
            r.dead.to_string(),
            r.ch_count.to_string(),
            r.packets_to_bs.to_string(),
            r.packets_to_ch.to_string(),
            format_sig(r.energy_dissipated, 12),
            format_sig(r.total_residual, 12),
        ])
        .expect("write to memory");
    }
    w.into_inner().expect("flush to memory")
}

pub fn emit_csv(summary: &SimSummary, path: &Path) -> Result<(), CliError> {
    fs::write(path, csv_bytes(summary)).map_err(|e| CliError::io(path, e))
}

/// Headline numbers of a run, repeated in its provenance record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryDigest {
    pub first_death_round: Option<u32>,
    pub last_death_round: Option<u32>,
    pub instability: Option<u32>,
    pub cumulative_packets_to_bs: u64,
    pub rounds_simulated: u32,
}

impl From<&SimSummary> for SummaryDigest {
    fn from(s: &SimSummary) -> Self {
        Self {
            first_death_round: s.first_death_round,
            last_death_round: s.last_death_round,
            instability: s.instability,
            cumulative_packets_to_bs: s.cumulative_packets_to_bs,
            rounds_simulated: s.rounds_simulated,
        }
    }
}

/// Everything needed to replay a run bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunProvenance {
    pub engine_version: String,
    pub rng_algorithm: String,
    pub protocol: ProtocolKind,
    pub seed: u64,
    pub config: NetworkConfig,
    pub pairing: Option<PairingTable>,
    /// Seconds since the epoch, taken from `SOURCE_DATE_EPOCH` when set so
    /// that repeated runs stay byte-identical.
    pub timestamp: Option<u64>,
    pub summary: SummaryDigest,
}

impl RunProvenance {
    pub fn new(
        config: &NetworkConfig,
        protocol: ProtocolKind,
        pairing: Option<&PairingTable>,
        summary: &SimSummary,
    ) -> Self {
        Self {
            engine_version: ENGINE_VERSION.to_string(),
            rng_algorithm: RNG_ALGORITHM.to_string(),
            protocol,
            seed: config.rng_seed,
            config: config.clone(),
            pairing: pairing.cloned(),
            timestamp: std::env::var("SOURCE_DATE_EPOCH")
                .ok()
                .and_then(|v| v.trim().parse().ok()),
            summary: summary.into(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("provenance serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.to_json()).map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use eesaa_core::compute_summary;

    #[test]
    fn sig_formatting() {
        assert_eq!(format_sig(0.0, 12), "0");
        assert_eq!(format_sig(50.0, 12), "50");
        assert_eq!(format_sig(0.5, 12), "0.5");
        assert_eq!(format_sig(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(format_sig(49.945_331_004_712_35, 12), "49.9453310047");
        assert_eq!(format_sig(2.0e-4, 12), "0.0002");
        assert_eq!(format_sig(1.234e-5, 12), "1.234e-05");
        assert_eq!(format_sig(123456789012345.0, 12), "1.23456789012e+14");
        assert_eq!(format_sig(-0.25, 12), "-0.25");
    }

    #[test]
    fn empty_summary_is_header_only() {
        let s = compute_summary(Vec::new());
        assert_eq!(
            String::from_utf8(csv_bytes(&s)).unwrap(),
            "round,alive,dead,ch_count,packets_to_bs,packets_to_ch,energy_dissipated,total_residual\n"
        );
    }
}
