//! Shared domain types and the first-order radio energy model.
//!
//! Every protocol in the crate debits energy through the functions in this
//! module, so LEACH, SEP, DEEC and EESAA runs are directly comparable.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{ConfigError, ModelError};

/// Index of a node in the network. Ids are dense: `0..n_nodes`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Planar position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Euclidean distance in meters.
pub fn distance(a: Position, b: Position) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    (dx * dx + dy * dy).sqrt()
}

/// Radio constants of the first-order model, in joules per bit
/// (`e_amp` in joules per bit per square meter).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioParams {
    pub e_elec_tx: f64,
    pub e_elec_rx: f64,
    pub e_amp: f64,
    pub e_agg: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            e_elec_tx: 50e-9,
            e_elec_rx: 50e-9,
            e_amp: 100e-12,
            e_agg: 50e-12,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fields = [
            ("radio.e_elec_tx", self.e_elec_tx),
            ("radio.e_elec_rx", self.e_elec_rx),
            ("radio.e_amp", self.e_amp),
            ("radio.e_agg", self.e_agg),
        ];
        for (key, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(ConfigError::invalid(key, "must be finite and strictly positive"));
            }
        }
        Ok(())
    }
}

/// Complete description of one simulated deployment.
///
/// `Default` yields the 100 m x 100 m, 100-node reference setup. Every field
/// can be overridden from a JSON document whose keys match the field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub n_nodes: u32,
    pub field_width: f64,
    pub field_height: f64,
    pub bs_position: Position,
    pub initial_energy: f64,
    pub p_desired: f64,
    pub packet_bits: u32,
    pub aggregated_bits: u32,
    pub pairing_range: f64,
    pub app_type_count: u32,
    pub max_rounds: u32,
    pub rng_seed: u64,
    pub radio: RadioParams,
    /// Energy charged to a sleeping node per round.
    pub sleep_energy: f64,
    /// SEP: fraction of advanced nodes (m).
    pub sep_advanced_fraction: f64,
    /// SEP: extra energy factor of advanced nodes (alpha).
    pub sep_energy_factor: f64,
    /// DEEC: when set, the average network energy follows the linear
    /// lifetime estimate over this many rounds instead of the exact mean.
    pub deec_rounds_estimate: Option<u32>,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            n_nodes: 100,
            field_width: 100.0,
            field_height: 100.0,
            bs_position: Position::new(50.0, 175.0),
            initial_energy: 0.5,
            p_desired: 0.1,
            packet_bits: 4000,
            aggregated_bits: 4000,
            pairing_range: 15.0,
            app_type_count: 1,
            max_rounds: 10_000,
            rng_seed: 0,
            radio: RadioParams::default(),
            sleep_energy: 0.0,
            sep_advanced_fraction: 0.0,
            sep_energy_factor: 1.0,
            deec_rounds_estimate: None,
        }
    }
}

impl NetworkConfig {
    /// Checks every field invariant, naming the first offending key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        fn finite_positive(key: &'static str, v: f64) -> Result<(), ConfigError> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::invalid(key, "must be finite and strictly positive"))
            }
        }
        if self.n_nodes < 1 {
            return Err(ConfigError::invalid("n_nodes", "must be at least 1"));
        }
        finite_positive("field_width", self.field_width)?;
        finite_positive("field_height", self.field_height)?;
        if !(self.bs_position.x.is_finite() && self.bs_position.y.is_finite()) {
            return Err(ConfigError::invalid("bs_position", "coordinates must be finite"));
        }
        finite_positive("initial_energy", self.initial_energy)?;
        if !(self.p_desired > 0.0 && self.p_desired < 1.0) {
            return Err(ConfigError::invalid("p_desired", "must lie strictly between 0 and 1"));
        }
        if self.packet_bits == 0 {
            return Err(ConfigError::invalid("packet_bits", "must be positive"));
        }
        if self.aggregated_bits == 0 {
            return Err(ConfigError::invalid("aggregated_bits", "must be positive"));
        }
        finite_positive("pairing_range", self.pairing_range)?;
        if self.app_type_count < 1 {
            return Err(ConfigError::invalid("app_type_count", "must be at least 1"));
        }
        self.radio.validate()?;
        if !(self.sleep_energy.is_finite() && self.sleep_energy >= 0.0) {
            return Err(ConfigError::invalid("sleep_energy", "must be finite and non-negative"));
        }
        if !(0.0..=1.0).contains(&self.sep_advanced_fraction) {
            return Err(ConfigError::invalid("sep_advanced_fraction", "must lie in [0, 1]"));
        }
        if !(self.sep_energy_factor.is_finite() && self.sep_energy_factor >= 0.0) {
            return Err(ConfigError::invalid(
                "sep_energy_factor",
                "must be finite and non-negative",
            ));
        }
        if self.deec_rounds_estimate == Some(0) {
            return Err(ConfigError::invalid("deec_rounds_estimate", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Active,
    Sleep,
    Dead,
}

/// One sensor node as held by the simulation engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeState {
    pub id: NodeId,
    pub position: Position,
    pub app_type: u32,
    pub residual_energy: f64,
    pub mode: Mode,
    pub partner: Option<NodeId>,
    pub is_ch: bool,
    /// Designated cluster head for the next round.
    pub cch_flag: bool,
    pub cluster_of: Option<NodeId>,
}

impl NodeState {
    pub fn new(id: NodeId, position: Position, app_type: u32, energy: f64) -> Self {
        Self {
            id,
            position,
            app_type,
            residual_energy: energy,
            mode: if energy > 0.0 { Mode::Active } else { Mode::Dead },
            partner: None,
            is_ch: false,
            cch_flag: false,
            cluster_of: None,
        }
    }

    pub fn is_alive(&self) -> bool {
        self.mode != Mode::Dead
    }

    pub fn is_active(&self) -> bool {
        self.mode == Mode::Active
    }

    /// Removes `amount` joules, clamping at zero. A node whose debit meets or
    /// exceeds its residual energy dies and loses its CH roles.
    ///
    /// Returns the energy actually removed.
    pub fn debit(&mut self, amount: f64) -> f64 {
        debug_assert!(amount >= 0.0);
        if amount >= self.residual_energy {
            let taken = self.residual_energy;
            self.residual_energy = 0.0;
            self.mode = Mode::Dead;
            self.is_ch = false;
            self.cch_flag = false;
            taken
        } else {
            self.residual_energy -= amount;
            amount
        }
    }
}

/// Energy to transmit `bits` over `d` meters: `E_elec*L + E_amp*L*d^2`.
pub fn tx_energy(radio: &RadioParams, bits: u32, d: f64) -> f64 {
    let l = f64::from(bits);
    radio.e_elec_tx * l + radio.e_amp * l * (d * d)
}

/// Energy to receive `bits`.
pub fn rx_energy(radio: &RadioParams, bits: u32) -> f64 {
    radio.e_elec_rx * f64::from(bits)
}

/// Energy to aggregate `sources` streams of `bits_per_source` each.
/// `sources` includes the cluster head's own reading.
pub fn agg_energy(radio: &RadioParams, bits_per_source: u32, sources: u32) -> f64 {
    radio.e_agg * f64::from(bits_per_source) * f64::from(sources)
}

/// Average number of non-head members per cluster, `N/K - 1`.
pub fn expected_cluster_members(n: u32, k: u32) -> Result<f64, ModelError> {
    if k == 0 {
        return Err(ModelError::InvalidParameter("cluster count k must be at least 1"));
    }
    Ok(f64::from(n) / f64::from(k) - 1.0)
}

/// Total energy a cluster head spends in one round: reception from
/// `members`, aggregation of `members + 1` streams, and one aggregated
/// transmission to the base station.
pub fn ch_round_energy(radio: &RadioParams, members: u32, bits: u32, agg_bits: u32, d_to_bs: f64) -> f64 {
    rx_energy(radio, bits) * f64::from(members)
        + agg_energy(radio, bits, members + 1)
        + tx_energy(radio, agg_bits, d_to_bs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_eq(a: f64, b: f64) -> bool {
        if b == 0.0 {
            a == 0.0
        } else {
            ((a - b) / b).abs() <= 1e-12
        }
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(Position::new(0.0, 0.0), Position::new(0.0, 0.0)), 0.0);
        assert_eq!(distance(Position::new(0.0, 0.0), Position::new(3.0, 4.0)), 5.0);
        assert_eq!(distance(Position::new(10.0, 20.0), Position::new(40.0, 60.0)), 50.0);
    }

    #[test]
    fn energy_examples() {
        let r = RadioParams::default();
        assert_eq!(tx_energy(&r, 0, 100.0), 0.0);
        assert!(rel_eq(tx_energy(&r, 4000, 0.0), 2.0e-4));
        assert!(rel_eq(tx_energy(&r, 4000, 50.0), 1.2e-3));
        assert_eq!(rx_energy(&r, 0), 0.0);
        assert!(rel_eq(rx_energy(&r, 4000), 2.0e-4));
        assert!(rel_eq(rx_energy(&r, 8000), 4.0e-4));
        assert_eq!(agg_energy(&r, 4000, 0), 0.0);
        assert!(rel_eq(agg_energy(&r, 4000, 10), 2.0e-6));
        assert!(rel_eq(agg_energy(&r, 4000, 1), 2.0e-7));
        assert!(rel_eq(ch_round_energy(&r, 0, 4000, 4000, 0.0), 2.002e-4));
        assert!(rel_eq(ch_round_energy(&r, 9, 4000, 4000, 100.0), 6.002e-3));
        assert_eq!(ch_round_energy(&r, 5, 0, 0, 30.0), 0.0);
    }

    #[test]
    fn cluster_members() {
        assert_eq!(expected_cluster_members(100, 10).unwrap(), 9.0);
        assert_eq!(expected_cluster_members(100, 100).unwrap(), 0.0);
        assert_eq!(expected_cluster_members(100, 5).unwrap(), 19.0);
        assert!(expected_cluster_members(100, 0).is_err());
    }

    #[test]
    fn debit_clamps_and_kills() {
        let mut n = NodeState::new(NodeId(0), Position::default(), 0, 1e-9);
        n.is_ch = true;
        n.cch_flag = true;
        let taken = n.debit(2e-4);
        assert_eq!(taken, 1e-9);
        assert_eq!(n.residual_energy, 0.0);
        assert_eq!(n.mode, Mode::Dead);
        assert!(!n.is_ch && !n.cch_flag);
    }

    #[test]
    fn default_config_is_valid() {
        NetworkConfig::default().validate().unwrap();
    }

    #[test]
    fn validation_names_the_key() {
        let cfg = NetworkConfig {
            p_desired: 1.5,
            ..Default::default()
        };
        assert_eq!(cfg.validate().unwrap_err().key(), "p_desired");
        let cfg = NetworkConfig {
            radio: RadioParams {
                e_amp: -1.0,
                ..Default::default()
            },
            ..Default::default()
        };
        assert_eq!(cfg.validate().unwrap_err().key(), "radio.e_amp");
    }
}
