use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use scma_v2x::config::load_config;
use scma_v2x::evaluation::{drop_seed, run_drop, run_sweep, ExperimentConfig, SweepVariable};
use scma_v2x::oracle::{compare_with_oracle, small_instance};
use scma_v2x::output::{audit_records, write_audit_csv, write_sweep_csv};
use scma_v2x::scma::AccessScheme;

#[derive(Parser)]
#[command(name = "scma-v2x", version, about = "Single-cell V2X spectrum sharing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo sweep over C-UE or V-UE pair count, written as CSV.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        scheme: Option<AccessScheme>,
        /// cues | vues
        #[arg(long)]
        sweep: Option<SweepVariable>,
        /// Comma-separated population sizes.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<usize>>,
        #[arg(long)]
        drops: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run one drop and dump per-user allocation records as CSV.
    Drop {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        scheme: Option<AccessScheme>,
        #[arg(long)]
        cues: Option<usize>,
        #[arg(long)]
        vues: Option<usize>,
        /// Drop seed; defaults to the first drop of the configured sweep.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the V-UE interference graph as an edge list.
        #[arg(long)]
        graph_out: Option<PathBuf>,
        /// Print the SCMA codebook incidence matrix to stderr.
        #[arg(long)]
        show_factor_graph: bool,
    },
    /// Compare greedy allocation against exhaustive search on small drops.
    Oracle {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        instances: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn base_config(path: Option<&PathBuf>) -> anyhow::Result<ExperimentConfig> {
    Ok(match path {
        Some(p) => load_config(p)?,
        None => ExperimentConfig::default(),
    })
}

fn output(path: Option<&PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("{}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Sweep {
            config,
            out,
            scheme,
            sweep,
            values,
            drops,
            seed,
        } => {
            let mut cfg = base_config(config.as_ref())?;
            let e = &mut cfg.experiment;
            if let Some(s) = scheme {
                e.access_scheme = s;
            }
            if let Some(s) = sweep {
                e.sweep_variable = s;
            }
            if let Some(v) = values {
                e.sweep_values = v;
            }
            if let Some(d) = drops {
                e.drops_per_point = d;
            }
            if let Some(s) = seed {
                e.master_seed = s;
            }
            let result = run_sweep(&cfg)?;
            let sink = output(out.as_ref())?;
            write_sweep_csv(&result, sink).context("writing sweep CSV")?;
        }
        Command::Drop {
            config,
            out,
            scheme,
            cues,
            vues,
            seed,
            graph_out,
            show_factor_graph,
        } => {
            let mut cfg = base_config(config.as_ref())?;
            if let Some(s) = scheme {
                cfg.experiment.access_scheme = s;
            }
            if let Some(n) = cues {
                cfg.scenario.num_cues = n;
            }
            if let Some(k) = vues {
                cfg.scenario.num_vue_pairs = k;
            }
            let seed = seed.unwrap_or_else(|| drop_seed(cfg.experiment.master_seed, 0, 0));
            let drop = run_drop(seed, &cfg)?;
            if show_factor_graph {
                eprint!("{}", drop.factor_graph.incidence_matrix());
            }
            if let Some(path) = graph_out {
                let noise = scma_v2x::scenario::noise_power(&cfg.channel, cfg.scma.rb_bandwidth)?;
                let graph = scma_v2x::clustering::build_interference_graph(
                    &drop.gains,
                    cfg.power.p_vue,
                    noise,
                    cfg.clustering.inr_threshold_db,
                );
                std::fs::write(&path, graph.to_edge_list())
                    .with_context(|| format!("{}", path.display()))?;
            }
            write_audit_csv(&audit_records(&drop), output(out.as_ref())?)
                .context("writing audit CSV")?;
            eprintln!(
                "seed {seed}: {} C-UEs admitted, {} V-UE pairs admitted, {} clusters, total {:.4e} bit/s",
                drop.admitted_cues,
                drop.admitted_vues,
                drop.clusters.num_clusters(),
                drop.total_throughput_bps()
            );
        }
        Command::Oracle {
            config,
            instances,
            seed,
        } => {
            let cfg = base_config(config.as_ref())?;
            let mut compared = 0;
            let mut gaps = 0;
            let mut worst = 0.0f64;
            let mut index = 0u64;
            while compared < instances {
                if index > 100 * instances as u64 + 1000 {
                    bail!("could not find {instances} instances within the enumeration bounds");
                }
                let drop = small_instance(drop_seed(seed, 0, index as usize), &cfg)?;
                index += 1;
                let Some(cmp) = compare_with_oracle(&drop, &cfg)? else {
                    continue;
                };
                compared += 1;
                if !cmp.greedy_feasible || !cmp.oracle_feasible || cmp.gap() < -1e-9 {
                    bail!("instance {} violates greedy <= oracle", index - 1);
                }
                if cmp.gap() > 1e-9 {
                    gaps += 1;
                    worst = worst.max(cmp.gap());
                }
            }
            println!(
                "{compared} instances: greedy <= oracle on all, strict gap on {gaps}, largest gap {worst:.4} bit/s/Hz"
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("bad arguments");
            eprintln!("error: {}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // library errors already embed their source in the message
            let mut msg = String::new();
            for cause in e.chain().map(|c| c.to_string()) {
                if !msg.ends_with(&cause) {
                    if !msg.is_empty() {
                        msg.push_str(": ");
                    }
                    msg.push_str(&cause);
                }
            }
            eprintln!("error: {}", msg.split_whitespace().collect::<Vec<_>>().join(" "));
            ExitCode::FAILURE
        }
    }
}
