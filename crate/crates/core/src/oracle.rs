//! Exhaustive allocation search for small instances.

use crate::allocation::{
    compute_report, pre_reuse_sinr, reuse_is_feasible, sum_rate, Allocation, LinkBudget,
    QosConfig, SinrReport,
};
use crate::clustering::ClusterAssignment;
use crate::error::{Error, Result};
use crate::evaluation::{run_drop, DropResult, ExperimentConfig};
use crate::scenario::noise_power;
use crate::scma::{CueResourceMap, FactorGraph};

pub const MAX_ORACLE_CLUSTERS: usize = 3;
pub const MAX_ORACLE_CUES: usize = 4;
pub const MAX_ORACLE_VUES: usize = 12;

/// Best QoS-feasible allocation by enumeration of every injective partial
/// matching of clusters to C-UEs and every non-empty admitted subset of each
/// matched cluster. Ties keep the first configuration in enumeration order
/// (matchings lexicographic with "unmatched" first, then subset masks
/// ascending).
pub fn brute_force_allocate(
    clusters: &ClusterAssignment,
    cue_map: &CueResourceMap,
    fg: &FactorGraph,
    b: &LinkBudget,
    q: &QosConfig,
) -> Result<(Allocation, SinrReport)> {
    let nc = clusters.num_clusters();
    let num_vues = b.gains.num_vue_pairs();
    if nc > MAX_ORACLE_CLUSTERS || cue_map.len() > MAX_ORACLE_CUES || num_vues > MAX_ORACLE_VUES {
        return Err(Error::InstanceTooLarge(format!(
            "{nc} clusters, {} C-UEs, {num_vues} V-UE pairs",
            cue_map.len()
        )));
    }

    let base_gamma = pre_reuse_sinr(cue_map, fg, b);
    let baseline_ok: Vec<bool> = (0..cue_map.len())
        .map(|i| cue_map.slot(i).is_some() && base_gamma[i] >= q.sinr_cue_min)
        .collect();
    let candidates: Vec<usize> = (0..cue_map.len())
        .filter(|&i| cue_map.slot(i).is_some())
        .collect();

    let base = Allocation::without_reuse(cue_map, fg, num_vues, nc);
    let mut best = (base.clone(), compute_report(&base, b));
    // The no-reuse layout is always feasible.
    let mut best_rate = sum_rate(&best.1);

    let mut matching = vec![None; nc];
    let mut used = vec![false; cue_map.len()];
    let mut visit = |m: &[Option<usize>]| {
        let matched: Vec<usize> = (0..nc).filter(|&c| m[c].is_some()).collect();
        let sizes: Vec<usize> = matched.iter().map(|&c| clusters.clusters[c].len()).collect();
        let mut masks: Vec<u32> = vec![1; matched.len()];
        if sizes.contains(&0) {
            return;
        }
        loop {
            let mut alloc = base.clone();
            for (slot, &c) in matched.iter().enumerate() {
                let members: Vec<usize> = clusters.clusters[c]
                    .iter()
                    .enumerate()
                    .filter(|(bit, _)| masks[slot] >> bit & 1 == 1)
                    .map(|(_, &v)| v)
                    .collect();
                alloc.reuse(c, &members, m[c].expect("matched"));
            }
            let report = compute_report(&alloc, b);
            let rate = sum_rate(&report);
            if rate > best_rate && reuse_is_feasible(&alloc, &report, q, &baseline_ok) {
                best_rate = rate;
                best = (alloc, report);
            }
            // odometer over subset masks
            let mut pos = 0;
            loop {
                if pos == masks.len() {
                    return;
                }
                masks[pos] += 1;
                if masks[pos] < 1 << sizes[pos] {
                    break;
                }
                masks[pos] = 1;
                pos += 1;
            }
        }
    };
    enumerate_matchings(0, &candidates, &mut matching, &mut used, &mut visit);
    Ok(best)
}

fn enumerate_matchings(
    cluster: usize,
    candidates: &[usize],
    matching: &mut Vec<Option<usize>>,
    used: &mut Vec<bool>,
    visit: &mut impl FnMut(&[Option<usize>]),
) {
    if cluster == matching.len() {
        visit(matching);
        return;
    }
    matching[cluster] = None;
    enumerate_matchings(cluster + 1, candidates, matching, used, visit);
    for &i in candidates {
        if used[i] {
            continue;
        }
        used[i] = true;
        matching[cluster] = Some(i);
        enumerate_matchings(cluster + 1, candidates, matching, used, visit);
        used[i] = false;
    }
    matching[cluster] = None;
}

/// Greedy and exhaustive results on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleComparison {
    pub greedy_rate: f64,
    pub oracle_rate: f64,
    pub greedy_feasible: bool,
    pub oracle_feasible: bool,
    pub greedy: Allocation,
    pub oracle: Allocation,
}

impl OracleComparison {
    pub fn gap(&self) -> f64 {
        self.oracle_rate - self.greedy_rate
    }
}

/// Re-runs a drop's allocation exhaustively. Returns `Ok(None)` when the
/// drop exceeds the enumeration bounds.
pub fn compare_with_oracle(
    drop: &DropResult,
    cfg: &ExperimentConfig,
) -> Result<Option<OracleComparison>> {
    let too_big = drop.clusters.num_clusters() > MAX_ORACLE_CLUSTERS
        || drop.cue_map.len() > MAX_ORACLE_CUES
        || drop.gains.num_vue_pairs() > MAX_ORACLE_VUES;
    if too_big {
        return Ok(None);
    }
    let noise = noise_power(&cfg.channel, cfg.scma.rb_bandwidth)?;
    let b = LinkBudget {
        gains: &drop.gains,
        power: &cfg.power,
        noise,
        co_layer_weight: cfg.scma.co_layer_weight(),
    };
    let (oracle, oracle_report) =
        brute_force_allocate(&drop.clusters, &drop.cue_map, &drop.factor_graph, &b, &cfg.qos)?;
    let base_gamma = pre_reuse_sinr(&drop.cue_map, &drop.factor_graph, &b);
    let baseline_ok: Vec<bool> = (0..drop.cue_map.len())
        .map(|i| drop.cue_map.slot(i).is_some() && base_gamma[i] >= cfg.qos.sinr_cue_min)
        .collect();
    Ok(Some(OracleComparison {
        greedy_rate: sum_rate(&drop.report),
        oracle_rate: sum_rate(&oracle_report),
        greedy_feasible: reuse_is_feasible(&drop.allocation, &drop.report, &cfg.qos, &baseline_ok),
        oracle_feasible: reuse_is_feasible(&oracle, &oracle_report, &cfg.qos, &baseline_ok),
        greedy: drop.allocation.clone(),
        oracle,
    }))
}

/// Draws a small drop (1 to 4 C-UEs, 1 to 6 V-UE pairs) from `seed` on top
/// of `base`.
pub fn small_instance(seed: u64, base: &ExperimentConfig) -> Result<DropResult> {
    let mut cfg = base.clone();
    cfg.scenario.num_cues = 1 + (seed % 4) as usize;
    cfg.scenario.num_vue_pairs = 1 + (seed / 4 % 6) as usize;
    run_drop(seed, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::{allocate, PowerConfig};
    use crate::scenario::ChannelGains;
    use crate::scma::{AccessScheme, ResourceSlot};

    fn fg() -> FactorGraph {
        crate::scma::build_factor_graph(&crate::scma::ScmaConfig {
            num_rbs: 4,
            ..Default::default()
        })
        .unwrap()
    }

    fn ofdma(n: usize) -> CueResourceMap {
        CueResourceMap::new(
            AccessScheme::Ofdma,
            (0..n)
                .map(|i| Some(ResourceSlot { block: i, codebook: 0 }))
                .collect(),
        )
    }

    #[test]
    fn zero_clusters_gives_no_reuse() {
        let g = ChannelGains {
            cue_bs: vec![1e-9, 2e-9],
            cue_vrx: vec![vec![], vec![]],
            vtx_bs: vec![],
            vtx_vrx: vec![],
        };
        let p = PowerConfig::default();
        let b = LinkBudget {
            gains: &g,
            power: &p,
            noise: 1e-15,
            co_layer_weight: 1.0,
        };
        let clusters = ClusterAssignment::default();
        let (alloc, _) =
            brute_force_allocate(&clusters, &ofdma(2), &fg(), &b, &QosConfig::default()).unwrap();
        assert_eq!(alloc, Allocation::without_reuse(&ofdma(2), &fg(), 0, 0));
    }

    #[test]
    fn rejects_large_instances() {
        let g = ChannelGains {
            cue_bs: vec![1e-9; 5],
            cue_vrx: vec![vec![]; 5],
            vtx_bs: vec![],
            vtx_vrx: vec![],
        };
        let p = PowerConfig::default();
        let b = LinkBudget {
            gains: &g,
            power: &p,
            noise: 1e-15,
            co_layer_weight: 1.0,
        };
        let r = brute_force_allocate(
            &ClusterAssignment::default(),
            &ofdma(5),
            &fg(),
            &b,
            &QosConfig::default(),
        );
        assert!(matches!(r, Err(Error::InstanceTooLarge(_))));
    }

    #[test]
    fn unique_feasible_matching_is_found() {
        // One V-UE pair; C-UE 0 sits so close to the V-UE receiver that reuse
        // of C-UE 0 breaks the V2V link, C-UE 1 is harmless.
        let g = ChannelGains {
            cue_bs: vec![1e-8, 1e-9],
            cue_vrx: vec![vec![1e-6], vec![1e-14]],
            vtx_bs: vec![1e-14],
            vtx_vrx: vec![vec![1e-7]],
        };
        let p = PowerConfig::default();
        let b = LinkBudget {
            gains: &g,
            power: &p,
            noise: 1e-15,
            co_layer_weight: 1.0,
        };
        let clusters = ClusterAssignment::from_clusters(1, vec![vec![0]]).unwrap();
        let q = QosConfig::default();
        let (oracle, _) = brute_force_allocate(&clusters, &ofdma(2), &fg(), &b, &q).unwrap();
        assert_eq!(oracle.cluster_cue, vec![Some(1)]);
        let (greedy, _) = allocate(&clusters, &ofdma(2), &fg(), &b, &q);
        assert_eq!(greedy, oracle);
    }
}
