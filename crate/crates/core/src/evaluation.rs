//! Monte Carlo drops and parameter sweeps.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::allocation::{allocate, Allocation, LinkBudget, PowerConfig, QosConfig, SinrReport};
use crate::clustering::{build_interference_graph, color_clusters, ClusterAssignment, ClusteringConfig};
use crate::error::{Error, Result};
use crate::par::{map_ordered, Execution};
use crate::scenario::{
    build_gain_tables, generate_scenario, noise_power, ChannelConfig, ChannelGains, Scenario,
    ScenarioConfig,
};
use crate::scma::{
    assign_cues, build_factor_graph, AccessScheme, CueResourceMap, FactorGraph, ResourceSlot,
    ScmaConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    #[serde(rename = "num_cues", alias = "cues")]
    NumCues,
    #[serde(rename = "num_vue_pairs", alias = "vues")]
    NumVuePairs,
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cues" | "num_cues" => Ok(SweepVariable::NumCues),
            "vues" | "num_vue_pairs" => Ok(SweepVariable::NumVuePairs),
            other => Err(Error::InvalidConfig(format!("unknown sweep variable '{other}'"))),
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepVariable::NumCues => "num_cues",
            SweepVariable::NumVuePairs => "num_vue_pairs",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    pub sweep_variable: SweepVariable,
    pub sweep_values: Vec<usize>,
    pub drops_per_point: usize,
    pub master_seed: u64,
    pub access_scheme: AccessScheme,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            sweep_variable: SweepVariable::NumVuePairs,
            sweep_values: vec![0, 5, 10, 20, 40, 80],
            drops_per_point: 200,
            master_seed: 1,
            access_scheme: AccessScheme::Scma,
        }
    }
}

/// Full parameter set for a drop or a sweep. Each field is one section of the
/// configuration file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub channel: ChannelConfig,
    pub scma: ScmaConfig,
    pub power: PowerConfig,
    pub qos: QosConfig,
    pub clustering: ClusteringConfig,
    pub experiment: SweepSettings,
}

impl ExperimentConfig {
    /// Validates every section; sweep values must be non-empty and strictly
    /// increasing.
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.channel.validate()?;
        self.scma.validate()?;
        self.power.validate()?;
        self.qos.validate()?;
        let e = &self.experiment;
        if e.drops_per_point == 0 {
            return Err(Error::InvalidConfig("drops_per_point must be at least 1".into()));
        }
        if e.sweep_values.is_empty() {
            return Err(Error::InvalidConfig("sweep_values is empty".into()));
        }
        if e.sweep_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "sweep_values must be strictly increasing".into(),
            ));
        }
        Ok(())
    }

    /// Copy of this configuration with the swept population set to `value`.
    pub fn at_point(&self, value: usize) -> ExperimentConfig {
        let mut cfg = self.clone();
        match self.experiment.sweep_variable {
            SweepVariable::NumCues => cfg.scenario.num_cues = value,
            SweepVariable::NumVuePairs => cfg.scenario.num_vue_pairs = value,
        }
        cfg
    }
}

/// One C-UE per RB, no sharing, capacity `num_rbs`.
pub fn ofdma_baseline(n: usize, cfg: &ScmaConfig) -> CueResourceMap {
    let slots = (0..n)
        .map(|i| (i < cfg.num_rbs).then_some(ResourceSlot { block: i, codebook: 0 }))
        .collect();
    CueResourceMap::new(AccessScheme::Ofdma, slots)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable seed for one drop of a sweep.
pub fn drop_seed(master_seed: u64, sweep_value: usize, drop_index: usize) -> u64 {
    let h = splitmix64(master_seed);
    let h = splitmix64(h ^ sweep_value as u64);
    splitmix64(h ^ drop_index as u64)
}

/// Everything produced by one drop, kept for audit output.
#[derive(Debug, Clone, PartialEq)]
pub struct DropResult {
    pub seed: u64,
    pub scenario: Scenario,
    pub gains: ChannelGains,
    pub factor_graph: FactorGraph,
    pub cue_map: CueResourceMap,
    pub clusters: ClusterAssignment,
    pub allocation: Allocation,
    pub report: SinrReport,
    pub cue_throughput_bps: f64,
    pub vue_throughput_bps: f64,
    pub admitted_cues: usize,
    pub admitted_vues: usize,
}

impl DropResult {
    pub fn total_throughput_bps(&self) -> f64 {
        self.cue_throughput_bps + self.vue_throughput_bps
    }
}

/// Runs one drop: topology, gains, C-UE resources, clustering, allocation.
pub fn run_drop(seed: u64, cfg: &ExperimentConfig) -> Result<DropResult> {
    cfg.validate()?;
    let scenario_cfg = ScenarioConfig {
        rng_seed: seed,
        ..cfg.scenario.clone()
    };
    let scenario = generate_scenario(&scenario_cfg)?;
    let gains = build_gain_tables(&scenario, &cfg.channel, splitmix64(seed ^ 0x5E_ED0F_5AD0))?;
    let fg = build_factor_graph(&cfg.scma)?;
    let n = scenario.num_cues();
    let cue_map = match cfg.experiment.access_scheme {
        AccessScheme::Scma => assign_cues(n, &fg, &cfg.scma),
        AccessScheme::Ofdma => ofdma_baseline(n, &cfg.scma),
    };
    let noise = noise_power(&cfg.channel, cfg.scma.rb_bandwidth)?;
    let graph = build_interference_graph(
        &gains,
        cfg.power.p_vue,
        noise,
        cfg.clustering.inr_threshold_db,
    );
    let clusters = color_clusters(&graph);
    let budget = LinkBudget {
        gains: &gains,
        power: &cfg.power,
        noise,
        co_layer_weight: cfg.scma.co_layer_weight(),
    };
    let (allocation, report) = allocate(&clusters, &cue_map, &fg, &budget, &cfg.qos);

    let bw = cfg.scma.rb_bandwidth;
    Ok(DropResult {
        seed,
        cue_throughput_bps: report.cue_sum_rate() * bw,
        vue_throughput_bps: report.vue_sum_rate() * bw,
        admitted_cues: allocation.admitted_cue_count(),
        admitted_vues: allocation.admitted_vue_count(),
        scenario,
        gains,
        factor_graph: fg,
        cue_map,
        clusters,
        allocation,
        report,
    })
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len();
        if n == 0 {
            return Summary::default();
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Summary { mean, std, n }
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.std / (self.n as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub sweep_value: usize,
    pub total_bps: Summary,
    pub cue_bps: Summary,
    pub vue_bps: Summary,
    pub admitted_cues: Summary,
    pub admitted_vues: Summary,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn point(&self, value: usize) -> Option<&SweepPoint> {
        self.points.iter().find(|p| p.sweep_value == value)
    }
}

#[derive(Debug, Clone, Copy)]
struct DropStats {
    total: f64,
    cue: f64,
    vue: f64,
    admitted_cues: usize,
    admitted_vues: usize,
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    run_sweep_with(cfg, Execution::Parallel)
}

/// Sweep with an explicit execution mode. Drops are keyed by
/// `(sweep_value, drop_index)` and reduced in key order, so the result does
/// not depend on scheduling.
pub fn run_sweep_with(cfg: &ExperimentConfig, exec: Execution) -> Result<SweepResult> {
    cfg.validate()?;
    let e = &cfg.experiment;
    let points: Vec<ExperimentConfig> = e.sweep_values.iter().map(|&v| cfg.at_point(v)).collect();
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..e.drops_per_point).map(move |d| (p, d)))
        .collect();

    let outcomes = map_ordered(jobs, exec, |(p, d)| {
        let seed = drop_seed(e.master_seed, e.sweep_values[p], d);
        run_drop(seed, &points[p]).map(|r| DropStats {
            total: r.total_throughput_bps(),
            cue: r.cue_throughput_bps,
            vue: r.vue_throughput_bps,
            admitted_cues: r.admitted_cues,
            admitted_vues: r.admitted_vues,
        })
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;

    let points = e
        .sweep_values
        .iter()
        .zip(outcomes.chunks(e.drops_per_point))
        .map(|(&value, drops)| {
            let col = |f: fn(&DropStats) -> f64| Summary::of(&drops.iter().map(f).collect::<Vec<_>>());
            SweepPoint {
                sweep_value: value,
                total_bps: col(|d| d.total),
                cue_bps: col(|d| d.cue),
                vue_bps: col(|d| d.vue),
                admitted_cues: col(|d| d.admitted_cues as f64),
                admitted_vues: col(|d| d.admitted_vues as f64),
            }
        })
        .collect();
    Ok(SweepResult { points })
}
