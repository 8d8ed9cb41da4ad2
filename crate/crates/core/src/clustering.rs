//! V-UE interference graph and greedy clustering.
//!
//! Clusters are colour classes of the interference graph: pairs that do not
//! interfere with each other may share one C-UE's resource.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::ChannelGains;
use crate::units::db_to_linear;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusteringConfig {
    /// Interference-to-noise ratio above which two V-UE pairs conflict, dB.
    pub inr_threshold_db: f64,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        ClusteringConfig {
            inr_threshold_db: 0.0,
        }
    }
}

/// Undirected simple graph over V-UE pair indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterferenceGraph {
    adjacency: Vec<Vec<bool>>,
}

impl InterferenceGraph {
    pub fn new(num_nodes: usize) -> Self {
        InterferenceGraph {
            adjacency: vec![vec![false; num_nodes]; num_nodes],
        }
    }

    pub fn from_edges(num_nodes: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(num_nodes);
        for &(i, j) in edges {
            g.add_edge(i, j)?;
        }
        Ok(g)
    }

    pub fn num_nodes(&self) -> usize {
        self.adjacency.len()
    }

    /// Inserts the undirected edge `{i, j}`. Self-loops are ignored.
    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<()> {
        let len = self.num_nodes();
        for index in [i, j] {
            if index >= len {
                return Err(Error::IndexOutOfRange { index, len });
            }
        }
        if i != j {
            self.adjacency[i][j] = true;
            self.adjacency[j][i] = true;
        }
        Ok(())
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i][j]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].iter().filter(|&&e| e).count()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.num_nodes()).map(|i| self.degree(i)).max().unwrap_or(0)
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[i]
            .iter()
            .enumerate()
            .filter_map(|(j, &e)| e.then_some(j))
    }

    /// Edges with `i < j`, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.num_nodes();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.adjacency[i][j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Edge list text: a `# nodes K` header, then one `i j` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# nodes {}\n", self.num_nodes());
        for (i, j) in self.edges() {
            let _ = writeln!(out, "{i} {j}");
        }
        out
    }

    /// Parses an edge list. Without a `# nodes K` header the node count is
    /// one past the largest index seen. Blank lines and other `#` comments are
    /// skipped.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut declared = None;
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let line_err = |reason: String| Error::EdgeList {
                line: lineno + 1,
                reason,
            };
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let mut parts = comment.split_whitespace();
                if parts.next() == Some("nodes") {
                    let k = parts
                        .next()
                        .and_then(|t| t.parse::<usize>().ok())
                        .ok_or_else(|| line_err("bad node count".into()))?;
                    declared = Some(k);
                }
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(line_err(format!("expected two indices, got '{line}'")));
            }
            let parse = |t: &str| {
                t.parse::<usize>()
                    .map_err(|e| line_err(format!("'{t}': {e}")))
            };
            edges.push((parse(fields[0])?, parse(fields[1])?));
        }
        let implied = edges.iter().map(|&(i, j)| i.max(j) + 1).max().unwrap_or(0);
        let n = declared.unwrap_or(implied);
        if n < implied {
            return Err(Error::EdgeList {
                line: 0,
                reason: format!("edge index {} exceeds declared node count {n}", implied - 1),
            });
        }
        Self::from_edges(n, &edges)
    }
}

/// Pairs `i`, `j` conflict when either one's transmitter raises the other's
/// receiver above the INR threshold.
pub fn build_interference_graph(
    gains: &ChannelGains,
    p_vue: f64,
    noise: f64,
    inr_threshold_db: f64,
) -> InterferenceGraph {
    let k = gains.num_vue_pairs();
    let threshold = db_to_linear(inr_threshold_db);
    let mut graph = InterferenceGraph::new(k);
    for i in 0..k {
        for j in i + 1..k {
            let into_i = p_vue * gains.vtx_vrx[j][i] / noise;
            let into_j = p_vue * gains.vtx_vrx[i][j] / noise;
            if into_i > threshold || into_j > threshold {
                graph.adjacency[i][j] = true;
                graph.adjacency[j][i] = true;
            }
        }
    }
    graph
}

/// Partition of V-UE pairs into conflict-free clusters, in creation order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClusterAssignment {
    pub clusters: Vec<Vec<usize>>,
    pub node_to_cluster: Vec<usize>,
}

impl ClusterAssignment {
    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    /// Builds an assignment from explicit clusters over `0..num_nodes`.
    pub fn from_clusters(num_nodes: usize, clusters: Vec<Vec<usize>>) -> Result<Self> {
        let mut node_to_cluster = vec![usize::MAX; num_nodes];
        for (c, members) in clusters.iter().enumerate() {
            for &v in members {
                if v >= num_nodes {
                    return Err(Error::IndexOutOfRange {
                        index: v,
                        len: num_nodes,
                    });
                }
                if node_to_cluster[v] != usize::MAX {
                    return Err(Error::InvalidConfig(format!("V-UE {v} in two clusters")));
                }
                node_to_cluster[v] = c;
            }
        }
        if let Some(v) = node_to_cluster.iter().position(|&c| c == usize::MAX) {
            return Err(Error::InvalidConfig(format!("V-UE {v} in no cluster")));
        }
        Ok(ClusterAssignment {
            clusters,
            node_to_cluster,
        })
    }

    /// True when no cluster contains both endpoints of an edge.
    pub fn is_proper(&self, graph: &InterferenceGraph) -> bool {
        graph
            .edges()
            .iter()
            .all(|&(i, j)| self.node_to_cluster[i] != self.node_to_cluster[j])
    }
}

/// Degree-descending first-fit colouring. Ties in degree go to the lower
/// node index; each node joins the earliest-created cluster holding none of
/// its neighbours, or opens a new one.
pub fn color_clusters(graph: &InterferenceGraph) -> ClusterAssignment {
    let n = graph.num_nodes();
    let mut order: Vec<(usize, usize)> = (0..n).map(|i| (graph.degree(i), i)).collect();
    order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut node_to_cluster = vec![usize::MAX; n];
    for (_, node) in order {
        let fit = clusters
            .iter()
            .position(|members| members.iter().all(|&m| !graph.has_edge(node, m)));
        let c = match fit {
            Some(c) => c,
            None => {
                clusters.push(Vec::new());
                clusters.len() - 1
            }
        };
        clusters[c].push(node);
        node_to_cluster[node] = c;
    }
    ClusterAssignment {
        clusters,
        node_to_cluster,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{path_gain, ChannelConfig, LinkClass};
    use crate::units::dbm_to_watts;

    #[test]
    fn single_node() {
        let g = InterferenceGraph::new(1);
        assert!(g.edges().is_empty());
        let c = color_clusters(&g);
        assert_eq!(c.clusters, vec![vec![0]]);
    }

    #[test]
    fn empty_graph_has_no_clusters() {
        let c = color_clusters(&InterferenceGraph::new(0));
        assert_eq!(c.num_clusters(), 0);
    }

    #[test]
    fn edgeless_graph_is_one_cluster() {
        let c = color_clusters(&InterferenceGraph::new(5));
        assert_eq!(c.clusters, vec![vec![0, 1, 2, 3, 4]]);
    }

    #[test]
    fn triangle_needs_three() {
        let g = InterferenceGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let c = color_clusters(&g);
        assert_eq!(c.clusters, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn path_hand_trace() {
        // node 1 (degree 2) first -> A; 0 conflicts with A -> B; 2 fits B.
        let g = InterferenceGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let c = color_clusters(&g);
        assert_eq!(c.clusters, vec![vec![1], vec![0, 2]]);
        assert_eq!(c.node_to_cluster, vec![1, 0, 1]);
    }

    #[test]
    fn edge_list_round_trip_keeps_isolated_nodes() {
        let g = InterferenceGraph::from_edges(6, &[(0, 3), (2, 4)]).unwrap();
        let text = g.to_edge_list();
        assert_eq!(text, "# nodes 6\n0 3\n2 4\n");
        assert_eq!(InterferenceGraph::from_edge_list(&text).unwrap(), g);
        let bare = InterferenceGraph::from_edge_list("0 1\n\n1 2\n").unwrap();
        assert_eq!(bare.num_nodes(), 3);
        assert!(matches!(
            InterferenceGraph::from_edge_list("0 x\n"),
            Err(Error::EdgeList { line: 1, .. })
        ));
        assert!(InterferenceGraph::from_edge_list("# nodes 2\n0 5\n").is_err());
    }

    fn two_pair_gains(cross: f64) -> ChannelGains {
        ChannelGains {
            cue_bs: vec![],
            cue_vrx: vec![],
            vtx_bs: vec![1e-9, 1e-9],
            vtx_vrx: vec![vec![1e-8, cross], vec![cross, 1e-8]],
        }
    }

    #[test]
    fn far_pairs_do_not_conflict() {
        let g = build_interference_graph(&two_pair_gains(1e-30), 0.05, 1e-15, 0.0);
        assert!(g.edges().is_empty());
    }

    #[test]
    fn threshold_is_respected_on_both_sides() {
        // Invert the path-loss law to place the interferer at the distance that
        // yields a target INR, then check the edge flips across the threshold.
        let ch = ChannelConfig::default();
        let p = dbm_to_watts(17.0);
        let noise = crate::scenario::noise_power(&ch, 180e3).unwrap();
        let threshold_db = 10.0;
        for (offset, expect) in [(1.0, true), (-1.0, false)] {
            let target_inr_db = threshold_db + offset;
            let loss_db = crate::units::watts_to_dbm(p) - crate::units::watts_to_dbm(noise) - target_inr_db;
            let d = 10f64.powf((loss_db - ch.pathloss_ref_db) / (10.0 * ch.pathloss_exponent_v2v));
            let cross = path_gain(d, LinkClass::V2v, &ch, 0.0).unwrap();
            let inr_db = crate::units::linear_to_db(p * cross / noise);
            assert!((inr_db - target_inr_db).abs() < 1e-9);
            let g = build_interference_graph(&two_pair_gains(cross), p, noise, threshold_db);
            assert_eq!(g.has_edge(0, 1), expect);
        }
    }

    #[test]
    fn one_sided_interference_creates_edge() {
        let mut gains = two_pair_gains(1e-30);
        gains.vtx_vrx[1][0] = 1e-3;
        let g = build_interference_graph(&gains, 0.05, 1e-15, 0.0);
        assert!(g.has_edge(0, 1) && g.has_edge(1, 0));
    }

    #[test]
    fn explicit_assignment_validation() {
        assert!(ClusterAssignment::from_clusters(3, vec![vec![0, 2], vec![1]]).is_ok());
        assert!(ClusterAssignment::from_clusters(3, vec![vec![0, 2]]).is_err());
        assert!(ClusterAssignment::from_clusters(2, vec![vec![0, 1], vec![1]]).is_err());
    }
}
