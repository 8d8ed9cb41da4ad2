//! Single-cell topology generation and link gains.
//!
//! The base station sits at the origin. C-UEs and V-UE transmitters are
//! dropped uniformly on the cell disk; every V-UE receiver sits at a fixed
//! distance from its transmitter at a uniform angle, redrawn until it lands
//! inside the cell.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{db_to_linear, dbm_to_watts};

/// Upper bound on angle redraws when placing one V-UE receiver.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Cell radius in metres.
    pub cell_radius: f64,
    pub num_cues: usize,
    pub num_vue_pairs: usize,
    /// Transmitter to receiver distance of every V2V pair, metres.
    pub v2v_distance: f64,
    /// Carrier frequency in Hz.
    pub carrier_freq: f64,
    pub rng_seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            cell_radius: 250.0,
            num_cues: 100,
            num_vue_pairs: 10,
            v2v_distance: 25.0,
            carrier_freq: 2.0e9,
            rng_seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cell_radius > 0.0 && self.cell_radius.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "cell_radius must be positive, got {}",
                self.cell_radius
            )));
        }
        if !(self.v2v_distance > 0.0 && self.v2v_distance < 2.0 * self.cell_radius) {
            return Err(Error::InvalidConfig(format!(
                "v2v_distance must lie in (0, 2*cell_radius), got {}",
                self.v2v_distance
            )));
        }
        if !(self.carrier_freq > 0.0) {
            return Err(Error::InvalidConfig("carrier_freq must be positive".into()));
        }
        Ok(())
    }
}

/// Positions of every node in one drop. V-UE vectors are index-aligned per pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub cell_radius: f64,
    pub bs_position: Point,
    pub cue_positions: Vec<Point>,
    pub vue_tx_positions: Vec<Point>,
    pub vue_rx_positions: Vec<Point>,
}

impl Scenario {
    pub fn num_cues(&self) -> usize {
        self.cue_positions.len()
    }

    pub fn num_vue_pairs(&self) -> usize {
        self.vue_tx_positions.len()
    }
}

fn uniform_in_disk<R: Rng>(rng: &mut R, radius: f64) -> Point {
    let r = radius * rng.random::<f64>().sqrt();
    let theta = rng.random::<f64>() * std::f64::consts::TAU;
    Point::new(r * theta.cos(), r * theta.sin())
}

/// Draws a fresh topology. Deterministic in `cfg.rng_seed`.
pub fn generate_scenario(cfg: &ScenarioConfig) -> Result<Scenario> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let radius = cfg.cell_radius;

    let cue_positions = (0..cfg.num_cues)
        .map(|_| uniform_in_disk(&mut rng, radius))
        .collect();

    let mut vue_tx_positions = Vec::with_capacity(cfg.num_vue_pairs);
    let mut vue_rx_positions = Vec::with_capacity(cfg.num_vue_pairs);
    for pair in 0..cfg.num_vue_pairs {
        let tx = uniform_in_disk(&mut rng, radius);
        let mut placed = None;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let phi = rng.random::<f64>() * std::f64::consts::TAU;
            let rx = Point::new(
                tx.x + cfg.v2v_distance * phi.cos(),
                tx.y + cfg.v2v_distance * phi.sin(),
            );
            if rx.norm() <= radius {
                placed = Some(rx);
                break;
            }
        }
        let rx = placed.ok_or(Error::PlacementFailed {
            pair,
            attempts: MAX_PLACEMENT_ATTEMPTS,
        })?;
        vue_tx_positions.push(tx);
        vue_rx_positions.push(rx);
    }

    Ok(Scenario {
        cell_radius: radius,
        bs_position: Point::ORIGIN,
        cue_positions,
        vue_tx_positions,
        vue_rx_positions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkClass {
    /// Links terminating at the base station and C-UE to V-UE receiver links.
    Cellular,
    /// V-UE transmitter to V-UE receiver links.
    V2v,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    /// Path loss at 1 m, dB.
    pub pathloss_ref_db: f64,
    pub pathloss_exponent_cellular: f64,
    pub pathloss_exponent_v2v: f64,
    /// Log-normal shadowing standard deviation, dB. Zero disables shadowing.
    pub shadowing_sigma_db: f64,
    pub noise_psd_dbm_hz: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            pathloss_ref_db: 38.46,
            pathloss_exponent_cellular: 3.5,
            pathloss_exponent_v2v: 3.0,
            shadowing_sigma_db: 0.0,
            noise_psd_dbm_hz: -174.0,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.pathloss_exponent_cellular >= 2.0 && self.pathloss_exponent_v2v >= 2.0) {
            return Err(Error::InvalidConfig(
                "path loss exponents must be at least 2".into(),
            ));
        }
        if !(self.shadowing_sigma_db >= 0.0) {
            return Err(Error::InvalidConfig(
                "shadowing_sigma_db must be non-negative".into(),
            ));
        }
        if !self.pathloss_ref_db.is_finite() || !self.noise_psd_dbm_hz.is_finite() {
            return Err(Error::InvalidConfig("non-finite channel parameter".into()));
        }
        Ok(())
    }

    fn exponent(&self, class: LinkClass) -> f64 {
        match class {
            LinkClass::Cellular => self.pathloss_exponent_cellular,
            LinkClass::V2v => self.pathloss_exponent_v2v,
        }
    }
}

/// Free-space path loss at 1 m for the given carrier, dB.
pub fn free_space_ref_db(carrier_freq: f64) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * carrier_freq / SPEED_OF_LIGHT).log10()
}

/// Log-distance path gain (linear), clamped to at most 1.
pub fn path_gain(d: f64, class: LinkClass, ch: &ChannelConfig, shadow_db: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::ZeroDistance(format!("d = {d}")));
    }
    let loss_db = ch.pathloss_ref_db + 10.0 * ch.exponent(class) * d.log10() + shadow_db;
    Ok(db_to_linear(-loss_db).min(1.0))
}

/// Total thermal noise over `bandwidth` Hz, in watts.
pub fn noise_power(ch: &ChannelConfig, bandwidth: f64) -> Result<f64> {
    if !(bandwidth > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "bandwidth must be positive, got {bandwidth}"
        )));
    }
    Ok(dbm_to_watts(ch.noise_psd_dbm_hz) * bandwidth)
}

/// Linear power gains for every transmitter/receiver pair the SINR
/// expressions touch. Indices: `i` C-UE, `j`/`l` V-UE pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelGains {
    /// C-UE i to BS.
    pub cue_bs: Vec<f64>,
    /// C-UE i to V-UE receiver j, `[i][j]`.
    pub cue_vrx: Vec<Vec<f64>>,
    /// V-UE transmitter j to BS.
    pub vtx_bs: Vec<f64>,
    /// V-UE transmitter l to V-UE receiver j, `[l][j]`; the diagonal is the
    /// desired V2V link.
    pub vtx_vrx: Vec<Vec<f64>>,
}

impl ChannelGains {
    pub fn num_cues(&self) -> usize {
        self.cue_bs.len()
    }

    pub fn num_vue_pairs(&self) -> usize {
        self.vtx_bs.len()
    }

    /// Checks table shapes and that every entry lies in (0, 1].
    pub fn validate(&self) -> Result<()> {
        let n = self.num_cues();
        let k = self.num_vue_pairs();
        let shape_ok = self.cue_vrx.len() == n
            && self.cue_vrx.iter().all(|r| r.len() == k)
            && self.vtx_vrx.len() == k
            && self.vtx_vrx.iter().all(|r| r.len() == k);
        if !shape_ok {
            return Err(Error::InvalidConfig("gain table shape mismatch".into()));
        }
        let all = self
            .cue_bs
            .iter()
            .chain(self.vtx_bs.iter())
            .chain(self.cue_vrx.iter().flatten())
            .chain(self.vtx_vrx.iter().flatten());
        for &g in all {
            if !(g > 0.0 && g <= 1.0) {
                return Err(Error::InvalidConfig(format!("gain {g} outside (0, 1]")));
            }
        }
        Ok(())
    }
}

/// Computes all gain tables for a scenario. Shadowing draws (if enabled) come
/// from a stream seeded by `rng_seed`, consumed in table order.
pub fn build_gain_tables(s: &Scenario, ch: &ChannelConfig, rng_seed: u64) -> Result<ChannelGains> {
    ch.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let shadow = if ch.shadowing_sigma_db > 0.0 {
        Some(Normal::new(0.0, ch.shadowing_sigma_db).expect("sigma checked positive"))
    } else {
        None
    };
    let mut gain = |from: &Point, to: &Point, class: LinkClass, what: &str| -> Result<f64> {
        let draw = shadow.as_ref().map_or(0.0, |n| n.sample(&mut rng));
        path_gain(from.distance(to), class, ch, draw)
            .map_err(|_| Error::ZeroDistance(what.to_string()))
    };

    let bs = s.bs_position;
    let mut cue_bs = Vec::with_capacity(s.num_cues());
    for (i, p) in s.cue_positions.iter().enumerate() {
        cue_bs.push(gain(p, &bs, LinkClass::Cellular, &format!("C-UE {i} at BS"))?);
    }
    let mut cue_vrx = Vec::with_capacity(s.num_cues());
    for (i, p) in s.cue_positions.iter().enumerate() {
        let mut row = Vec::with_capacity(s.num_vue_pairs());
        for (j, rx) in s.vue_rx_positions.iter().enumerate() {
            row.push(gain(p, rx, LinkClass::Cellular, &format!("C-UE {i} at V-UE rx {j}"))?);
        }
        cue_vrx.push(row);
    }
    let mut vtx_bs = Vec::with_capacity(s.num_vue_pairs());
    for (j, tx) in s.vue_tx_positions.iter().enumerate() {
        vtx_bs.push(gain(tx, &bs, LinkClass::Cellular, &format!("V-UE tx {j} at BS"))?);
    }
    let mut vtx_vrx = Vec::with_capacity(s.num_vue_pairs());
    for (l, tx) in s.vue_tx_positions.iter().enumerate() {
        let mut row = Vec::with_capacity(s.num_vue_pairs());
        for (j, rx) in s.vue_rx_positions.iter().enumerate() {
            row.push(gain(tx, rx, LinkClass::V2v, &format!("V-UE tx {l} at V-UE rx {j}"))?);
        }
        vtx_vrx.push(row);
    }

    Ok(ChannelGains {
        cue_bs,
        cue_vrx,
        vtx_bs,
        vtx_vrx,
    })
}
