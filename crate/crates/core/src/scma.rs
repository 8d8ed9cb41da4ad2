//! SCMA resource structure.
//!
//! A codebook is modelled only by which subcarriers of a block it occupies.
//! Subcarrier and codebook indices are zero-based throughout. Two C-UEs in the
//! same block interfere iff their codebooks share a subcarrier.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::db_to_linear;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScmaConfig {
    /// Subcarriers (RBs) per SCMA block; also the codeword dimension.
    pub subcarriers_per_block: usize,
    /// Non-zero dimensions per codeword.
    pub nonzero_dims: usize,
    pub num_rbs: usize,
    /// Bandwidth of one RB in Hz.
    pub rb_bandwidth: f64,
    /// Power of a colliding codebook left over after multi-user detection,
    /// relative to its received power, dB. 0 dB counts collisions at full power.
    pub co_layer_residual_db: f64,
}

impl Default for ScmaConfig {
    fn default() -> Self {
        ScmaConfig {
            subcarriers_per_block: 4,
            nonzero_dims: 2,
            num_rbs: 100,
            rb_bandwidth: 180e3,
            co_layer_residual_db: -40.0,
        }
    }
}

impl ScmaConfig {
    pub fn validate(&self) -> Result<()> {
        let l = self.subcarriers_per_block;
        let mc = self.nonzero_dims;
        if !(mc > 0 && mc < l && l <= self.num_rbs) {
            return Err(Error::InvalidConfig(format!(
                "need 0 < nonzero_dims < subcarriers_per_block <= num_rbs, got {mc}, {l}, {}",
                self.num_rbs
            )));
        }
        if l > 64 {
            return Err(Error::InvalidConfig(
                "subcarriers_per_block above 64 is not supported".into(),
            ));
        }
        if self.num_rbs % l != 0 {
            return Err(Error::InvalidConfig(format!(
                "num_rbs {} is not a multiple of subcarriers_per_block {l}",
                self.num_rbs
            )));
        }
        if !(self.rb_bandwidth > 0.0) {
            return Err(Error::InvalidConfig("rb_bandwidth must be positive".into()));
        }
        if !(self.co_layer_residual_db <= 0.0) {
            return Err(Error::InvalidConfig(
                "co_layer_residual_db must be at most 0 dB".into(),
            ));
        }
        Ok(())
    }

    pub fn num_blocks(&self) -> usize {
        self.num_rbs / self.subcarriers_per_block
    }

    /// Linear weight applied to colliding-codebook interference.
    pub fn co_layer_weight(&self) -> f64 {
        db_to_linear(self.co_layer_residual_db)
    }
}

/// Codebook-to-subcarrier incidence of one SCMA block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorGraph {
    subcarriers: usize,
    occupancy: Vec<Vec<usize>>,
    masks: Vec<u64>,
}

impl FactorGraph {
    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn num_codebooks(&self) -> usize {
        self.occupancy.len()
    }

    /// Occupied subcarriers per codebook, lexicographic over subsets.
    pub fn codebook_occupancy(&self) -> &[Vec<usize>] {
        &self.occupancy
    }

    /// J / L.
    pub fn overload_factor(&self) -> f64 {
        self.num_codebooks() as f64 / self.subcarriers as f64
    }

    /// Whether codebooks `a` and `b` share a subcarrier. A codebook never
    /// collides with itself.
    pub fn codebooks_collide(&self, a: usize, b: usize) -> Result<bool> {
        let len = self.masks.len();
        for index in [a, b] {
            if index >= len {
                return Err(Error::IndexOutOfRange { index, len });
            }
        }
        Ok(a != b && self.masks[a] & self.masks[b] != 0)
    }

    /// Number of codebooks touching each subcarrier.
    pub fn subcarrier_load(&self) -> Vec<usize> {
        let mut load = vec![0; self.subcarriers];
        for set in &self.occupancy {
            for &s in set {
                load[s] += 1;
            }
        }
        load
    }

    /// Plain-text incidence matrix: one row per codebook, one 0/1 column per
    /// subcarrier, space separated.
    pub fn incidence_matrix(&self) -> String {
        let mut out = String::new();
        for &mask in &self.masks {
            let row = (0..self.subcarriers)
                .map(|s| if mask >> s & 1 == 1 { "1" } else { "0" })
                .join(" ");
            out.push_str(&row);
            out.push('\n');
        }
        out
    }
}

pub fn build_factor_graph(cfg: &ScmaConfig) -> Result<FactorGraph> {
    cfg.validate()?;
    let l = cfg.subcarriers_per_block;
    let occupancy: Vec<Vec<usize>> = (0..l).combinations(cfg.nonzero_dims).collect();
    let masks = occupancy
        .iter()
        .map(|set| set.iter().fold(0u64, |m, &s| m | 1 << s))
        .collect();
    Ok(FactorGraph {
        subcarriers: l,
        occupancy,
        masks,
    })
}

pub fn overload_factor(fg: &FactorGraph) -> f64 {
    fg.overload_factor()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccessScheme {
    Scma,
    Ofdma,
}

impl fmt::Display for AccessScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AccessScheme::Scma => "scma",
            AccessScheme::Ofdma => "ofdma",
        })
    }
}

impl FromStr for AccessScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "scma" => Ok(AccessScheme::Scma),
            "ofdma" => Ok(AccessScheme::Ofdma),
            other => Err(Error::InvalidConfig(format!("unknown access scheme '{other}'"))),
        }
    }
}

/// Where a C-UE transmits. Under OFDMA `block` is the RB index and
/// `codebook` is always 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceSlot {
    pub block: usize,
    pub codebook: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CueResourceMap {
    scheme: AccessScheme,
    slots: Vec<Option<ResourceSlot>>,
}

impl CueResourceMap {
    pub fn new(scheme: AccessScheme, slots: Vec<Option<ResourceSlot>>) -> Self {
        CueResourceMap { scheme, slots }
    }

    pub fn scheme(&self) -> AccessScheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slot(&self, cue: usize) -> Option<ResourceSlot> {
        self.slots.get(cue).copied().flatten()
    }

    pub fn slots(&self) -> &[Option<ResourceSlot>] {
        &self.slots
    }

    pub fn assigned_count(&self) -> usize {
        self.slots.iter().filter(|s| s.is_some()).count()
    }

    /// The `y` reuse indicator: distinct assigned C-UEs in the same block whose
    /// codebooks collide. Never true under OFDMA.
    pub fn shares_resource(&self, i: usize, k: usize, fg: &FactorGraph) -> bool {
        if i == k {
            return false;
        }
        match (self.slot(i), self.slot(k)) {
            (Some(a), Some(b)) if a.block == b.block => match self.scheme {
                AccessScheme::Scma => fg.codebooks_collide(a.codebook, b.codebook).unwrap_or(false),
                AccessScheme::Ofdma => a.codebook == b.codebook,
            },
            _ => false,
        }
    }

    /// Full `y` matrix.
    pub fn collision_matrix(&self, fg: &FactorGraph) -> Vec<Vec<bool>> {
        let n = self.len();
        (0..n)
            .map(|i| (0..n).map(|k| self.shares_resource(i, k, fg)).collect())
            .collect()
    }
}

/// Sequential fill: C-UE `i` gets block `i / J`, codebook `i % J`, until the
/// `num_blocks * J` admission cap is reached. The rest are unassigned.
pub fn assign_cues(n: usize, fg: &FactorGraph, cfg: &ScmaConfig) -> CueResourceMap {
    let per_block = fg.num_codebooks();
    let capacity = cfg.num_blocks() * per_block;
    let slots = (0..n)
        .map(|i| {
            (i < capacity).then(|| ResourceSlot {
                block: i / per_block,
                codebook: i % per_block,
            })
        })
        .collect();
    CueResourceMap::new(AccessScheme::Scma, slots)
}

/// Admission cap N_RB * OF for the configured structure.
pub fn admission_cap(fg: &FactorGraph, cfg: &ScmaConfig) -> usize {
    cfg.num_blocks() * fg.num_codebooks()
}
