//! SINR evaluation and cluster-to-C-UE resource allocation.
//!
//! Indicator matrices follow the usual reuse notation: `x[i][j]` V-UE pair `j`
//! transmits on C-UE `i`'s resource, `y[i][k]` C-UEs `i` and `k` collide on an
//! SCMA block, `z[l][j]` V-UE pairs `l` and `j` share a resource.

use serde::{Deserialize, Serialize};

use crate::clustering::ClusterAssignment;
use crate::error::{Error, Result};
use crate::scenario::ChannelGains;
use crate::scma::{CueResourceMap, FactorGraph};
use crate::units::{db_to_linear, dbm_to_watts};

/// Transmit powers in watts. Powers are fixed; the caps are only checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerConfig {
    pub p_cue: f64,
    pub p_vue: f64,
    pub p_cue_max: f64,
    pub p_vue_max: f64,
}

impl Default for PowerConfig {
    fn default() -> Self {
        PowerConfig::from_dbm(20.0, 17.0)
    }
}

impl PowerConfig {
    /// Powers fixed at their caps.
    pub fn from_dbm(p_cue_dbm: f64, p_vue_dbm: f64) -> Self {
        let p_cue = dbm_to_watts(p_cue_dbm);
        let p_vue = dbm_to_watts(p_vue_dbm);
        PowerConfig {
            p_cue,
            p_vue,
            p_cue_max: p_cue,
            p_vue_max: p_vue,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.p_cue && self.p_cue <= self.p_cue_max) {
            return Err(Error::InvalidConfig(format!(
                "C-UE power {} W outside [0, {}]",
                self.p_cue, self.p_cue_max
            )));
        }
        if !(0.0 <= self.p_vue && self.p_vue <= self.p_vue_max) {
            return Err(Error::InvalidConfig(format!(
                "V-UE power {} W outside [0, {}]",
                self.p_vue, self.p_vue_max
            )));
        }
        Ok(())
    }
}

/// Minimum SINRs, linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QosConfig {
    pub sinr_cue_min: f64,
    pub sinr_vue_min: f64,
}

impl Default for QosConfig {
    fn default() -> Self {
        QosConfig {
            sinr_cue_min: db_to_linear(0.0),
            sinr_vue_min: db_to_linear(5.0),
        }
    }
}

impl QosConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sinr_cue_min > 0.0 && self.sinr_vue_min > 0.0) {
            return Err(Error::InvalidConfig("QoS thresholds must be positive".into()));
        }
        Ok(())
    }
}

/// Everything the SINR expressions need besides the reuse pattern.
#[derive(Debug, Clone, Copy)]
pub struct LinkBudget<'a> {
    pub gains: &'a ChannelGains,
    pub power: &'a PowerConfig,
    /// Noise power per RB, watts.
    pub noise: f64,
    /// Weight on colliding-codebook interference (1.0 = full power).
    pub co_layer_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    pub x: Vec<Vec<bool>>,
    pub y: Vec<Vec<bool>>,
    pub z: Vec<Vec<bool>>,
    pub admitted_cues: Vec<bool>,
    pub admitted_vues: Vec<bool>,
    /// C-UE reused by each cluster, if any.
    pub cluster_cue: Vec<Option<usize>>,
}

impl Allocation {
    /// No V-UE reuse: every C-UE holding a resource is admitted and `y` is
    /// fixed from the resource map.
    pub fn without_reuse(
        cue_map: &CueResourceMap,
        fg: &FactorGraph,
        num_vues: usize,
        num_clusters: usize,
    ) -> Self {
        let n = cue_map.len();
        Allocation {
            x: vec![vec![false; num_vues]; n],
            y: cue_map.collision_matrix(fg),
            z: vec![vec![false; num_vues]; num_vues],
            admitted_cues: (0..n).map(|i| cue_map.slot(i).is_some()).collect(),
            admitted_vues: vec![false; num_vues],
            cluster_cue: vec![None; num_clusters],
        }
    }

    pub fn num_cues(&self) -> usize {
        self.admitted_cues.len()
    }

    pub fn num_vues(&self) -> usize {
        self.admitted_vues.len()
    }

    /// Puts `members` (a cluster, or part of one) on C-UE `cue`'s resource.
    pub fn reuse(&mut self, cluster: usize, members: &[usize], cue: usize) {
        for &j in members {
            self.x[cue][j] = true;
            self.admitted_vues[j] = true;
            for &l in members {
                if l != j {
                    self.z[l][j] = true;
                }
            }
        }
        self.cluster_cue[cluster] = Some(cue);
    }

    /// Reverts [`Allocation::reuse`].
    pub fn release(&mut self, cluster: usize, members: &[usize], cue: usize) {
        for &j in members {
            self.x[cue][j] = false;
            self.admitted_vues[j] = false;
            for &l in members {
                self.z[l][j] = false;
            }
        }
        self.cluster_cue[cluster] = None;
    }

    /// C-UE whose resource V-UE pair `j` reuses.
    pub fn vue_partner(&self, j: usize) -> Option<usize> {
        (0..self.num_cues()).find(|&i| self.x[i][j])
    }

    /// V-UE pairs reusing C-UE `i`'s resource.
    pub fn cue_partners(&self, i: usize) -> Vec<usize> {
        (0..self.num_vues()).filter(|&j| self.x[i][j]).collect()
    }

    pub fn admitted_cue_count(&self) -> usize {
        self.admitted_cues.iter().filter(|&&a| a).count()
    }

    pub fn admitted_vue_count(&self) -> usize {
        self.admitted_vues.iter().filter(|&&a| a).count()
    }
}

/// SINR of admitted C-UE `i` at the base station.
pub fn compute_sinr_cue(i: usize, alloc: &Allocation, b: &LinkBudget) -> Result<f64> {
    let n = alloc.num_cues();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    if !alloc.admitted_cues[i] {
        return Err(Error::NotAdmitted {
            role: "C-UE",
            index: i,
        });
    }
    let g = b.gains;
    let p = b.power;
    let signal = p.p_cue * g.cue_bs[i];
    let vue_interference: f64 = alloc.x[i]
        .iter()
        .enumerate()
        .filter(|(_, &x)| x)
        .map(|(j, _)| p.p_vue * g.vtx_bs[j])
        .sum();
    let cue_interference: f64 = alloc.y[i]
        .iter()
        .enumerate()
        .filter(|&(k, &y)| y && k != i)
        .map(|(k, _)| p.p_cue * g.cue_bs[k])
        .sum();
    Ok(signal / (vue_interference + b.co_layer_weight * cue_interference + b.noise))
}

/// SINR of admitted V-UE pair `j` at its receiver.
pub fn compute_sinr_vue(j: usize, alloc: &Allocation, b: &LinkBudget) -> Result<f64> {
    let k = alloc.num_vues();
    if j >= k {
        return Err(Error::IndexOutOfRange { index: j, len: k });
    }
    if !alloc.admitted_vues[j] {
        return Err(Error::NotAdmitted {
            role: "V-UE",
            index: j,
        });
    }
    let g = b.gains;
    let p = b.power;
    let signal = p.p_vue * g.vtx_vrx[j][j];
    let vue_interference: f64 = (0..k)
        .filter(|&l| l != j && alloc.z[l][j])
        .map(|l| p.p_vue * g.vtx_vrx[l][j])
        .sum();
    let cue_interference: f64 = (0..alloc.num_cues())
        .filter(|&i| alloc.x[i][j])
        .map(|i| p.p_cue * g.cue_vrx[i][j])
        .sum();
    Ok(signal / (vue_interference + cue_interference + b.noise))
}

/// Per-user SINR and spectral efficiency. Unadmitted users carry zeros.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SinrReport {
    pub gamma_cue: Vec<f64>,
    pub gamma_vue: Vec<f64>,
    pub rate_cue: Vec<f64>,
    pub rate_vue: Vec<f64>,
}

impl SinrReport {
    pub fn cue_sum_rate(&self) -> f64 {
        self.rate_cue.iter().fold(0.0, |a, r| a + r)
    }

    pub fn vue_sum_rate(&self) -> f64 {
        self.rate_vue.iter().fold(0.0, |a, r| a + r)
    }
}

pub fn compute_report(alloc: &Allocation, b: &LinkBudget) -> SinrReport {
    let gamma_cue: Vec<f64> = (0..alloc.num_cues())
        .map(|i| compute_sinr_cue(i, alloc, b).unwrap_or(0.0))
        .collect();
    let gamma_vue: Vec<f64> = (0..alloc.num_vues())
        .map(|j| compute_sinr_vue(j, alloc, b).unwrap_or(0.0))
        .collect();
    SinrReport {
        rate_cue: gamma_cue.iter().map(|g| (1.0 + g).log2()).collect(),
        rate_vue: gamma_vue.iter().map(|g| (1.0 + g).log2()).collect(),
        gamma_cue,
        gamma_vue,
    }
}

/// Sum of per-user spectral efficiencies, bit/s/Hz.
pub fn sum_rate(report: &SinrReport) -> f64 {
    report.cue_sum_rate() + report.vue_sum_rate()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Cue,
    Vue,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Cue => "cue",
            Role::Vue => "vue",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QosViolation {
    pub role: Role,
    pub index: usize,
    pub gamma: f64,
    pub required: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct QosCheck {
    pub violations: Vec<QosViolation>,
}

impl QosCheck {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every admitted user below its minimum SINR (equality passes).
pub fn check_qos(report: &SinrReport, q: &QosConfig, alloc: &Allocation) -> QosCheck {
    let mut violations = Vec::new();
    for (i, &g) in report.gamma_cue.iter().enumerate() {
        if alloc.admitted_cues[i] && g < q.sinr_cue_min {
            violations.push(QosViolation {
                role: Role::Cue,
                index: i,
                gamma: g,
                required: q.sinr_cue_min,
            });
        }
    }
    for (j, &g) in report.gamma_vue.iter().enumerate() {
        if alloc.admitted_vues[j] && g < q.sinr_vue_min {
            violations.push(QosViolation {
                role: Role::Vue,
                index: j,
                gamma: g,
                required: q.sinr_vue_min,
            });
        }
    }
    QosCheck { violations }
}

/// C-UE SINRs with no V-UE reuse, only SCMA collisions. Unassigned C-UEs get 0.
pub fn pre_reuse_sinr(cue_map: &CueResourceMap, fg: &FactorGraph, b: &LinkBudget) -> Vec<f64> {
    let base = Allocation::without_reuse(cue_map, fg, b.gains.num_vue_pairs(), 0);
    (0..cue_map.len())
        .map(|i| compute_sinr_cue(i, &base, b).unwrap_or(0.0))
        .collect()
}

/// Whether a reuse pattern respects QoS. C-UEs already below threshold from
/// SCMA collisions alone (`baseline_ok[i] == false`) stay admitted and are
/// exempt, but may not have their resource reused.
pub fn reuse_is_feasible(
    alloc: &Allocation,
    report: &SinrReport,
    q: &QosConfig,
    baseline_ok: &[bool],
) -> bool {
    let vues_ok = (0..alloc.num_vues())
        .all(|j| !alloc.admitted_vues[j] || report.gamma_vue[j] >= q.sinr_vue_min);
    let cues_ok = (0..alloc.num_cues()).all(|i| {
        if !alloc.admitted_cues[i] {
            return !alloc.x[i].iter().any(|&x| x);
        }
        let reused = alloc.x[i].iter().any(|&x| x);
        !(baseline_ok[i] || reused) || report.gamma_cue[i] >= q.sinr_cue_min
    });
    vues_ok && cues_ok
}

/// Greedy allocation. C-UEs are ranked by pre-reuse SINR (descending, ties to
/// the lower index); clusters in creation order each take the best-ranked
/// C-UE that is still free and keeps every affected user above its QoS
/// threshold. A cluster that fits nowhere stays unallocated.
pub fn allocate(
    clusters: &ClusterAssignment,
    cue_map: &CueResourceMap,
    fg: &FactorGraph,
    b: &LinkBudget,
    q: &QosConfig,
) -> (Allocation, SinrReport) {
    let num_vues = b.gains.num_vue_pairs();
    let mut alloc = Allocation::without_reuse(cue_map, fg, num_vues, clusters.num_clusters());

    let base_gamma: Vec<f64> = (0..alloc.num_cues())
        .map(|i| compute_sinr_cue(i, &alloc, b).unwrap_or(0.0))
        .collect();
    let baseline_ok: Vec<bool> = (0..alloc.num_cues())
        .map(|i| alloc.admitted_cues[i] && base_gamma[i] >= q.sinr_cue_min)
        .collect();

    let mut ranked: Vec<usize> = (0..alloc.num_cues())
        .filter(|&i| alloc.admitted_cues[i])
        .collect();
    ranked.sort_by(|&a, &c| base_gamma[c].total_cmp(&base_gamma[a]).then(a.cmp(&c)));

    let mut taken = vec![false; alloc.num_cues()];
    for (c, members) in clusters.clusters.iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        for &i in &ranked {
            if taken[i] {
                continue;
            }
            alloc.reuse(c, members, i);
            if commit_ok(&alloc, i, members, b, q, &baseline_ok) {
                taken[i] = true;
                break;
            }
            alloc.release(c, members, i);
        }
    }

    let report = compute_report(&alloc, b);
    (alloc, report)
}

/// QoS re-check after tentatively placing `members` on C-UE `cue`: the C-UE
/// itself, its colliding SCMA peers, the cluster, and V-UEs already riding on
/// those peers.
fn commit_ok(
    alloc: &Allocation,
    cue: usize,
    members: &[usize],
    b: &LinkBudget,
    q: &QosConfig,
    baseline_ok: &[bool],
) -> bool {
    let cue_meets = |i: usize| {
        compute_sinr_cue(i, alloc, b).is_ok_and(|g| g >= q.sinr_cue_min)
    };
    let vue_meets = |j: usize| {
        compute_sinr_vue(j, alloc, b).is_ok_and(|g| g >= q.sinr_vue_min)
    };
    if !cue_meets(cue) || !members.iter().all(|&j| vue_meets(j)) {
        return false;
    }
    for k in (0..alloc.num_cues()).filter(|&k| alloc.y[cue][k]) {
        if baseline_ok[k] && !cue_meets(k) {
            return false;
        }
        if !alloc.cue_partners(k).into_iter().all(&vue_meets) {
            return false;
        }
    }
    true
}
