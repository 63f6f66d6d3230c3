//! `photosim` command-line front end.
//!
//! Exit codes: 0 success, 2 validation failure (bad or inconsistent inputs),
//! 3 runtime error (execution or output failure).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use photosim::device::{bank_spectrum, validate_bank};
use photosim::harness::{emit_report, execute, RunManifest, RunOutcome, SimConfig, WorkloadPaths};
use photosim::perf::{run_sweep, sweep_to_csv, SweepGrid};
use photosim::tensor::{fmt_num, write_csv_matrix};
use photosim::tron::{random_input, TransformerModelSpec};
use photosim::{Error, Mode, Real, RealTransformerWeights};

#[derive(Parser)]
#[command(name = "photosim", version, about = "Microring photonic accelerator simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Device-level analytics.
    #[command(subcommand)]
    Device(DeviceCmd),
    /// Transformer workloads.
    #[command(subcommand)]
    Tron(TronCmd),
    /// Graph neural network workloads.
    #[command(subcommand)]
    Ghost(GhostCmd),
    /// Digital reference executors.
    #[command(subcommand)]
    Reference(ReferenceCmd),
    /// Runs every point of a parameter grid.
    Sweep {
        /// Grid JSON: workload, base config, mode, seed and parameter lists.
        #[arg(long)]
        grid: PathBuf,
        /// Directory for sweep.csv; stdout when absent.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Re-runs a recorded manifest.json.
    Replay {
        /// manifest.json from an earlier report directory.
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory for the regenerated report files.
        #[arg(long)]
        report: PathBuf,
        /// Suppress the summary on stdout.
        #[arg(long)]
        quiet: bool,
    },
}

#[derive(Subcommand)]
enum DeviceCmd {
    /// Through-port transmission of the configured bank as CSV.
    Spectrum {
        #[command(flatten)]
        config: ConfigArgs,
        /// First wavelength in nm; one channel spacing below the grid when absent.
        #[arg(long)]
        start: Option<f64>,
        /// Last wavelength in nm; one channel spacing above the grid when absent.
        #[arg(long)]
        stop: Option<f64>,
        /// Number of evenly spaced samples, at least 2.
        #[arg(long, default_value_t = 1001)]
        points: usize,
        /// Output CSV; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks the configuration and the bank design rules.
    Validate {
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Subcommand)]
enum TronCmd {
    /// Runs a transformer and writes a report directory.
    Run {
        #[command(flatten)]
        model: TronArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Writes seeded random weights (binary + manifest) and optionally an input.
    GenWeights {
        /// Transformer model spec JSON.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Weights binary; the manifest is written next to it.
        #[arg(long)]
        out: PathBuf,
        /// Input CSV drawn with seed + 1.
        #[arg(long)]
        input_out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GhostCmd {
    /// Runs a GNN and writes a report directory.
    Run {
        #[command(flatten)]
        model: GhostArgs,
        /// Execution lanes V; overrides the configuration.
        #[arg(long)]
        lanes: Option<usize>,
        /// Input block size N; overrides the configuration.
        #[arg(long)]
        partition: Option<usize>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Subcommand)]
enum ReferenceCmd {
    /// `float_ref` or `quant_ref` execution of a transformer (`--weights`,
    /// `--input`) or a GNN (`--graph`, `--features`).
    Run {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, conflicts_with = "graph", requires = "input")]
        weights: Option<PathBuf>,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, requires = "features")]
        graph: Option<PathBuf>,
        #[arg(long)]
        features: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// Simulator configuration JSON; built-in defaults when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Cost table JSON replacing the configuration's cost section.
    #[arg(long)]
    cost: Option<PathBuf>,
}

#[derive(Args)]
struct TronArgs {
    /// Transformer model spec JSON.
    #[arg(long)]
    spec: PathBuf,
    /// Weights binary (little-endian f32) with its manifest alongside.
    #[arg(long)]
    weights: PathBuf,
    /// Input matrix CSV, seq_len x d_model.
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args)]
struct GhostArgs {
    /// Edge list, one "src dst [weight]" per line.
    #[arg(long)]
    graph: PathBuf,
    /// Vertex feature CSV, one row per vertex.
    #[arg(long)]
    features: PathBuf,
    /// GNN model spec JSON.
    #[arg(long)]
    spec: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// float_ref, quant_ref or photonic.
    #[arg(long, default_value = "photonic")]
    mode: Mode,
    /// Seeds the noise stream; overrides noise.rng_seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for the report files.
    #[arg(long)]
    report: PathBuf,
    /// Suppress the summary on stdout.
    #[arg(long)]
    quiet: bool,
}

/// A failure and the exit code it maps to.
struct Failure {
    code: u8,
    error: Error,
}

fn invalid(error: Error) -> Failure {
    Failure { code: 2, error }
}

fn runtime(error: Error) -> Failure {
    Failure { code: 3, error }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cmd: Command) -> CliResult<u8> {
    match cmd {
        Command::Device(DeviceCmd::Spectrum {
            config,
            start,
            stop,
            points,
            out,
        }) => spectrum(&config, start, stop, points, out.as_deref()),
        Command::Device(DeviceCmd::Validate { config }) => device_validate(&config),
        Command::Tron(TronCmd::Run { model, run }) => {
            let paths = WorkloadPaths::Transformer {
                spec: model.spec,
                weights: model.weights,
                input: model.input,
            };
            run_workload("tron run", paths, &run, |_| {})
        }
        Command::Tron(TronCmd::GenWeights {
            spec,
            seed,
            out,
            input_out,
        }) => gen_weights(&spec, seed, &out, input_out.as_deref()),
        Command::Ghost(GhostCmd::Run {
            model,
            lanes,
            partition,
            run,
        }) => {
            let paths = WorkloadPaths::Gnn {
                graph: model.graph,
                features: model.features,
                spec: model.spec,
            };
            run_workload("ghost run", paths, &run, |cfg| {
                if let Some(v) = lanes {
                    cfg.ghost.lanes_v = v;
                }
                if let Some(n) = partition {
                    cfg.ghost.partition_n = n;
                }
            })
        }
        Command::Reference(ReferenceCmd::Run {
            spec,
            weights,
            input,
            graph,
            features,
            run,
        }) => {
            if run.mode == Mode::Photonic {
                return Err(invalid(Error::Unsupported {
                    what: "reference mode",
                    name: run.mode.to_string(),
                }));
            }
            let paths = match (weights, input, graph, features) {
                (Some(weights), Some(input), None, None) => WorkloadPaths::Transformer { spec, weights, input },
                (None, None, Some(graph), Some(features)) => WorkloadPaths::Gnn { graph, features, spec },
                _ => {
                    return Err(invalid(Error::Unsupported {
                        what: "reference workload",
                        name: "give either --weights and --input or --graph and --features".into(),
                    }))
                }
            };
            run_workload("reference run", paths, &run, |_| {})
        }
        Command::Sweep { grid, report } => sweep(&grid, report.as_deref()),
        Command::Replay {
            manifest,
            report,
            quiet,
        } => {
            let m = RunManifest::load(&manifest).map_err(invalid)?;
            let workload = m.workload.load().map_err(invalid)?;
            m.config.validate().map_err(invalid)?;
            let outcome = execute(&workload, &m.config, m.mode, m.seed).map_err(runtime)?;
            emit_report(&outcome, &m, &report).map_err(runtime)?;
            summarize(&outcome, &m, quiet);
            Ok(0)
        }
    }
}

fn load_config(args: &ConfigArgs) -> CliResult<SimConfig> {
    let mut cfg = match &args.config {
        Some(p) => SimConfig::load(p).map_err(invalid)?,
        None => SimConfig::default(),
    };
    if let Some(p) = &args.cost {
        cfg.cost = photosim::perf::CostTable::load(p).map_err(invalid)?;
    }
    Ok(cfg)
}

fn absolute(paths: WorkloadPaths) -> CliResult<WorkloadPaths> {
    let cwd = std::env::current_dir().map_err(|e| {
        runtime(Error::Io {
            path: PathBuf::from("."),
            source: e,
        })
    })?;
    Ok(paths.relative_to(&cwd))
}

fn run_workload(
    subcommand: &str,
    paths: WorkloadPaths,
    run: &RunArgs,
    adjust: impl FnOnce(&mut SimConfig),
) -> CliResult<u8> {
    let mut cfg = load_config(&run.config)?;
    adjust(&mut cfg);
    cfg.validate().map_err(invalid)?;
    let paths = absolute(paths)?;
    let workload = paths.load().map_err(invalid)?;
    let manifest = RunManifest::new(subcommand, paths, run.seed, run.mode, cfg);
    let outcome = execute(&workload, &manifest.config, run.mode, run.seed).map_err(runtime)?;
    emit_report(&outcome, &manifest, &run.report).map_err(runtime)?;
    summarize(&outcome, &manifest, run.quiet);
    Ok(0)
}

fn summarize(o: &RunOutcome, m: &RunManifest, quiet: bool) {
    if quiet {
        return;
    }
    let r = &o.report;
    println!("workload {} mode {} seed {}", m.workload.kind(), m.mode, m.seed);
    println!("total_energy_pj {}", fmt_num(r.total_energy_pj));
    println!("total_latency_ns {}", fmt_num(r.total_latency_ns));
    println!("total_bits {}", r.total_bits);
    println!("total_ops {}", r.total_ops);
    println!("epb_fj_per_bit {}", fmt_num(r.epb_fj_per_bit));
    println!("gops {}", fmt_num(r.gops));
    println!(
        "float_vs_quant_max_rel_err {}",
        fmt_num(o.accuracy.float_vs_quant_max_rel_err)
    );
    println!(
        "mode_vs_quant_max_abs_diff {}",
        fmt_num(o.accuracy.mode_vs_quant_max_abs_diff)
    );
}

fn spectrum(
    args: &ConfigArgs,
    start: Option<f64>,
    stop: Option<f64>,
    points: usize,
    out: Option<&Path>,
) -> CliResult<u8> {
    let cfg = load_config(args)?;
    let (grid, devices) = cfg.device.bank::<Real>().map_err(invalid)?;
    let first = grid.channel_wavelength(0);
    let last = grid.channel_wavelength(grid.channel_count() - 1);
    let margin = grid.channel_spacing_nm();
    let start = start.unwrap_or(first - margin);
    let stop = stop.unwrap_or(last + margin);
    if points < 2 || stop.partial_cmp(&start) != Some(std::cmp::Ordering::Greater) {
        return Err(invalid(Error::Unsupported {
            what: "spectrum range",
            name: format!("need points >= 2 and stop > start, got {points} points over [{start}, {stop}]"),
        }));
    }
    let step = (stop - start) / (points - 1) as f64;
    let wl: Vec<Real> = (0..points).map(|i| start + step * i as f64).collect();
    let mut text = String::from("wavelength_nm,transmission\n");
    for (w, t) in bank_spectrum(&devices, &wl) {
        text.push_str(&format!("{},{}\n", fmt_num(w), fmt_num(t)));
    }
    write_text(out, &text)?;
    Ok(0)
}

fn write_text(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| {
            runtime(Error::Io {
                path: p.to_path_buf(),
                source: e,
            })
        }),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| {
            runtime(Error::Io {
                path: PathBuf::from("<stdout>"),
                source: e,
            })
        }),
    }
}

fn device_validate(args: &ConfigArgs) -> CliResult<u8> {
    let cfg = load_config(args)?;
    let diags = cfg.diagnostics();
    for d in &diags {
        println!("{d}");
    }
    if !diags.is_empty() {
        return Ok(2);
    }
    let (grid, devices) = cfg.device.bank::<Real>().map_err(invalid)?;
    let violations = validate_bank(&grid, &devices, &cfg.noise);
    for v in &violations {
        println!("{v}");
    }
    if violations.is_empty() {
        println!("ok: {} channels", grid.channel_count());
        Ok(0)
    } else {
        Ok(2)
    }
}

fn gen_weights(spec: &Path, seed: u64, out: &Path, input_out: Option<&Path>) -> CliResult<u8> {
    let s = TransformerModelSpec::load(spec).map_err(invalid)?;
    s.validate().map_err(invalid)?;
    RealTransformerWeights::random(&s, seed)
        .save_bin(out)
        .map_err(runtime)?;
    if let Some(p) = input_out {
        write_csv_matrix(p, &random_input::<Real>(&s, seed.wrapping_add(1))).map_err(runtime)?;
    }
    Ok(0)
}

fn sweep(grid_path: &Path, report: Option<&Path>) -> CliResult<u8> {
    let grid = SweepGrid::load(grid_path).map_err(invalid)?;
    let workload = grid.workload.load().map_err(invalid)?;
    let rows = run_sweep(&grid, &workload).map_err(invalid)?;
    let text = sweep_to_csv(&rows).map_err(runtime)?;
    match report {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| {
                runtime(Error::Io {
                    path: dir.to_path_buf(),
                    source: e,
                })
            })?;
            write_text(Some(&dir.join("sweep.csv")), &text)?;
        }
        None => write_text(None, &text)?,
    }
    Ok(0)
}
