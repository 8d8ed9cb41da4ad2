use proptest::prelude::*;

use scma_v2x::allocation::{check_qos, compute_sinr_cue, compute_sinr_vue, Allocation, LinkBudget, Role};
use scma_v2x::clustering::{color_clusters, InterferenceGraph};
use scma_v2x::evaluation::{run_drop, ExperimentConfig};
use scma_v2x::scenario::{generate_scenario, noise_power, ScenarioConfig};
use scma_v2x::scma::{admission_cap, assign_cues, build_factor_graph, ScmaConfig};

fn graph_strategy() -> impl Strategy<Value = InterferenceGraph> {
    (0usize..30, 0.0f64..1.0, any::<u64>()).prop_map(|(k, density, seed)| {
        let mut g = InterferenceGraph::new(k);
        let mut state = seed;
        for i in 0..k {
            for j in i + 1..k {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                if ((state >> 11) as f64 / (1u64 << 53) as f64) < density {
                    g.add_edge(i, j).unwrap();
                }
            }
        }
        g
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn placement_stays_in_cell(seed in any::<u64>(), n in 0usize..60, k in 0usize..30) {
        let cfg = ScenarioConfig { num_cues: n, num_vue_pairs: k, rng_seed: seed, ..Default::default() };
        let s = generate_scenario(&cfg).unwrap();
        prop_assert_eq!(s.cue_positions.len(), n);
        for p in s.cue_positions.iter().chain(&s.vue_tx_positions).chain(&s.vue_rx_positions) {
            prop_assert!(p.norm() <= cfg.cell_radius + 1e-9);
        }
        for (tx, rx) in s.vue_tx_positions.iter().zip(&s.vue_rx_positions) {
            prop_assert!((tx.distance(rx) - cfg.v2v_distance).abs() < 1e-9);
        }
    }

    #[test]
    fn coloring_is_proper_partition(g in graph_strategy()) {
        let a = color_clusters(&g);
        prop_assert!(a.is_proper(&g));
        if g.num_nodes() > 0 {
            prop_assert!(a.num_clusters() <= g.max_degree() + 1);
        }
        let mut seen = vec![0; g.num_nodes()];
        for c in &a.clusters {
            for &v in c {
                seen[v] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&s| s == 1));
    }

    #[test]
    fn scheduling_respects_cap(n in 0usize..400, blocks in 1usize..50) {
        let cfg = ScmaConfig { num_rbs: 4 * blocks, ..Default::default() };
        let fg = build_factor_graph(&cfg).unwrap();
        let map = assign_cues(n, &fg, &cfg);
        let cap = admission_cap(&fg, &cfg);
        prop_assert_eq!(map.assigned_count(), n.min(cap));
        let mut used = std::collections::HashSet::new();
        for s in map.slots().iter().flatten() {
            prop_assert!(s.block < cfg.num_blocks());
            prop_assert!(used.insert((s.block, s.codebook)));
        }
    }

    #[test]
    fn committed_allocation_is_feasible(seed in any::<u64>(), n in 1usize..40, k in 0usize..20) {
        let mut cfg = ExperimentConfig::default();
        cfg.scenario.num_cues = n;
        cfg.scenario.num_vue_pairs = k;
        let d = run_drop(seed, &cfg).unwrap();
        let a = &d.allocation;
        for j in 0..k {
            let partners = (0..n).filter(|&i| a.x[i][j]).count();
            prop_assert!(partners <= 1);
            prop_assert_eq!(partners == 1, a.admitted_vues[j]);
        }
        let qos = check_qos(&d.report, &cfg.qos, a);
        for v in &qos.violations {
            // only C-UEs already short of QoS before any reuse may appear
            prop_assert_eq!(v.role, Role::Cue);
            prop_assert!(!a.x[v.index].iter().any(|&x| x));
        }
    }

    #[test]
    fn extra_interferer_never_raises_sinr(seed in any::<u64>()) {
        let mut cfg = ExperimentConfig::default();
        cfg.scenario.num_cues = 3;
        cfg.scenario.num_vue_pairs = 3;
        let d = run_drop(seed, &cfg).unwrap();
        let noise = noise_power(&cfg.channel, cfg.scma.rb_bandwidth).unwrap();
        let b = LinkBudget { gains: &d.gains, power: &cfg.power, noise, co_layer_weight: 1.0 };
        let mut a = Allocation::without_reuse(&d.cue_map, &d.factor_graph, 3, 2);
        a.reuse(0, &[0], 0);
        let before_cue = compute_sinr_cue(0, &a, &b).unwrap();
        let before_vue = compute_sinr_vue(0, &a, &b).unwrap();
        a.reuse(1, &[1], 0);
        prop_assert!(compute_sinr_cue(0, &a, &b).unwrap() <= before_cue);
        prop_assert!(compute_sinr_vue(0, &a, &b).unwrap() <= before_vue);
    }
}
