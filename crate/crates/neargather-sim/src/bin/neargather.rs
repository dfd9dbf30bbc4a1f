//! Command-line driver: scenario generation, simulation runs with audit and
//! metrics output, standalone trace audits, and the annulus-gap scan.
//!
//! Exit codes: 0 = all invariants hold (and, for near-gathering protocols,
//! every robot terminated); 2 = an invariant was violated; 1 = usage or IO
//! error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use neargather_core::geometry::annulus_chord_gap;
use neargather_core::protocol::{AxisMode, ProtocolParams, TieBreak};
use neargather_core::Point2;
use neargather_sim::scenario::{canned, generate_connected, load_scenario, CannedName, Scenario};
use neargather_sim::sim::{
    centroid_counterexample_script, read_trace_jsonl, run, write_trace_jsonl, ProtocolKind,
    RunStatus, SchedulerPolicy, SimConfig, Trace,
};
use neargather_sim::{audit_trace, write_metrics_csv, AuditReport};

#[derive(Parser)]
#[command(name = "neargather", about = "Near-gathering swarm simulator and auditor")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ProtocolArg {
    Neargather,
    NeargatherOneaxis,
    Gathering,
    Centroid,
}

impl ProtocolArg {
    fn kind(self) -> ProtocolKind {
        match self {
            ProtocolArg::Neargather => ProtocolKind::NearGather,
            ProtocolArg::NeargatherOneaxis => ProtocolKind::OneAxis,
            ProtocolArg::Gathering => ProtocolKind::Gathering,
            ProtocolArg::Centroid => ProtocolKind::Centroid,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    Fsync,
    Ssync,
    Async,
    Scripted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TieBreakArg {
    Horizontal,
    Vertical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CannedArg {
    CentroidPair,
    VerticalLine,
    RegularPolygon,
    Grid,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random scenario with a connected strong distance graph.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 4.0)]
        v: f64,
        #[arg(long, default_value_t = 3.5)]
        d: f64,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// Minimum pairwise separation; defaults to 0.01 * D.
        #[arg(long)]
        min_sep: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write one of the canned scenarios.
    Canned {
        #[arg(long)]
        name: CannedArg,
        /// Robot count for vertical-line / regular-polygon, side for grid.
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Circumradius for regular-polygon.
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate a scenario, audit the trace, and emit metrics.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = "neargather")]
        protocol: ProtocolArg,
        #[arg(long, default_value = "async")]
        policy: PolicyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scheduler minimum-progress constant; defaults to 0.05 * rho.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 2_000_000)]
        max_events: u64,
        #[arg(long, default_value = "horizontal")]
        tie_break: TieBreakArg,
        /// Stop once the swarm diameter drops to this value (defaults to
        /// 0.01 * epsilon for gathering, unset otherwise).
        #[arg(long)]
        stop_diameter: Option<f64>,
        #[arg(long)]
        out_dir: PathBuf,
        /// Run this many independent seeded runs (seed, seed+1, ...)
        /// concurrently; outputs are keyed by seed.
        #[arg(long, default_value_t = 1)]
        batch: u64,
    },
    /// Re-audit an existing trace against its scenario.
    Check {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = "neargather")]
        protocol: ProtocolArg,
    },
    /// Grid scan of the annulus chord gap f(x); passes iff the minimum is
    /// rho/2 at x = 0 and f is non-decreasing.
    ScanProp1 {
        #[arg(long)]
        v: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 10_000)]
        grid: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(ok) => {
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> Result<bool, String> {
    match command {
        Command::Generate {
            n,
            v,
            d,
            epsilon,
            min_sep,
            seed,
            out,
        } => {
            let min_sep = min_sep.unwrap_or(0.01 * d);
            let scenario = generate_connected(n, v, d, epsilon, min_sep, seed)
                .map_err(|e| e.to_string())?;
            write_scenario(&scenario, &out)?;
            println!("wrote {} ({} robots)", out.display(), n);
            Ok(true)
        }
        Command::Canned {
            name,
            n,
            radius,
            out,
        } => {
            let name = match name {
                CannedArg::CentroidPair => CannedName::CentroidPair,
                CannedArg::VerticalLine => CannedName::VerticalLine(n),
                CannedArg::RegularPolygon => CannedName::RegularPolygon(n, radius),
                CannedArg::Grid => CannedName::Grid(n),
            };
            let scenario = canned(name).map_err(|e| e.to_string())?;
            write_scenario(&scenario, &out)?;
            println!("wrote {} ({})", out.display(), scenario.name);
            Ok(true)
        }
        Command::Run {
            scenario,
            protocol,
            policy,
            seed,
            delta,
            max_events,
            tie_break,
            stop_diameter,
            out_dir,
            batch,
        } => cmd_run(
            &scenario,
            protocol,
            policy,
            seed,
            delta,
            max_events,
            tie_break,
            stop_diameter,
            &out_dir,
            batch,
        ),
        Command::Check {
            trace,
            scenario,
            protocol,
        } => {
            let scenario = read_scenario(&scenario)?;
            let params = derive_params(&scenario, TieBreakArg::Horizontal, protocol)?;
            let bytes = fs::read(&trace).map_err(|e| format!("{}: {e}", trace.display()))?;
            let records = read_trace_jsonl(bytes.as_slice()).map_err(|e| e.to_string())?;
            let report = audit_trace(&records, &scenario.points(), &params, protocol.kind())
                .map_err(|e| e.to_string())?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?
            );
            Ok(report.all_pass())
        }
        Command::ScanProp1 { v, rho, grid } => cmd_scan_prop1(v, rho, grid),
    }
}

fn write_scenario(scenario: &Scenario, out: &Path) -> Result<(), String> {
    let bytes = neargather_sim::scenario::save_scenario(scenario).map_err(|e| e.to_string())?;
    fs::write(out, bytes).map_err(|e| format!("{}: {e}", out.display()))
}

fn read_scenario(path: &Path) -> Result<Scenario, String> {
    let bytes = fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    load_scenario(&bytes).map_err(|e| e.to_string())
}

fn derive_params(
    scenario: &Scenario,
    tie_break: TieBreakArg,
    protocol: ProtocolArg,
) -> Result<ProtocolParams, String> {
    let tie = match tie_break {
        TieBreakArg::Horizontal => TieBreak::Horizontal,
        TieBreakArg::Vertical => TieBreak::Vertical,
    };
    let axis = if protocol == ProtocolArg::NeargatherOneaxis {
        AxisMode::OneAxisRotated
    } else {
        AxisMode::TwoAxes
    };
    ProtocolParams::derive(scenario.v, scenario.d, scenario.epsilon, tie, axis)
        .map_err(|e| e.to_string())
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    scenario_path: &Path,
    protocol: ProtocolArg,
    policy: PolicyArg,
    seed: u64,
    delta: Option<f64>,
    max_events: u64,
    tie_break: TieBreakArg,
    stop_diameter: Option<f64>,
    out_dir: &Path,
    batch: u64,
) -> Result<bool, String> {
    let scenario = read_scenario(scenario_path)?;
    let params = derive_params(&scenario, tie_break, protocol)?;
    let initial = scenario.points();
    let kind = protocol.kind();
    let stop_diameter = stop_diameter.or(if kind == ProtocolKind::Gathering {
        Some(0.01 * params.epsilon)
    } else {
        None
    });
    fs::create_dir_all(out_dir).map_err(|e| format!("{}: {e}", out_dir.display()))?;

    let make_policy = |run_seed: u64| -> Result<SchedulerPolicy, String> {
        match policy {
            PolicyArg::Fsync => Ok(SchedulerPolicy::FullySync),
            PolicyArg::Ssync => Ok(SchedulerPolicy::SemiSync),
            PolicyArg::Async => Ok(SchedulerPolicy::RandomAsync),
            PolicyArg::Scripted => {
                if kind != ProtocolKind::Centroid || initial.len() != 2 {
                    return Err(
                        "scripted policy only ships the centroid counterexample schedule \
                         (protocol centroid, 2-robot scenario)"
                            .into(),
                    );
                }
                let _ = run_seed;
                Ok(SchedulerPolicy::Scripted(centroid_counterexample_script()))
            }
        }
    };

    let seeds: Vec<u64> = (0..batch.max(1)).map(|k| seed + k).collect();
    let single = seeds.len() == 1;
    let mut results: Vec<(u64, Result<bool, String>)> = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for &run_seed in &seeds {
            let policy = make_policy(run_seed);
            let initial = &initial;
            let params = &params;
            handles.push((
                run_seed,
                scope.spawn(move || {
                    one_run(
                        kind,
                        params,
                        policy?,
                        run_seed,
                        delta,
                        max_events,
                        stop_diameter,
                        initial,
                        out_dir,
                        single,
                    )
                }),
            ));
        }
        for (run_seed, handle) in handles {
            results.push((run_seed, handle.join().expect("run thread panicked")));
        }
    });

    let mut all_ok = true;
    for (run_seed, result) in results {
        match result {
            Ok(true) => {}
            Ok(false) => all_ok = false,
            Err(msg) => return Err(format!("seed {run_seed}: {msg}")),
        }
    }
    Ok(all_ok)
}

#[allow(clippy::too_many_arguments)]
fn one_run(
    kind: ProtocolKind,
    params: &ProtocolParams,
    policy: SchedulerPolicy,
    seed: u64,
    delta: Option<f64>,
    max_events: u64,
    stop_diameter: Option<f64>,
    initial: &[Point2],
    out_dir: &Path,
    single: bool,
) -> Result<bool, String> {
    let config = SimConfig {
        params: *params,
        protocol: kind,
        policy,
        delta: delta.unwrap_or_else(|| SimConfig::default_delta(params)),
        seed,
        max_events,
        fairness_bound: 1000.0,
        stop_diameter,
    };
    let trace = run(&config, initial).map_err(|e| e.to_string())?;
    let report = audit_trace(&trace.records, initial, params, kind).map_err(|e| e.to_string())?;
    write_outputs(&trace, &report, initial, out_dir, seed, single)?;

    let ok = match kind {
        // Gathering never terminates on its own; success is completing the
        // run (diameter floor or event budget).
        ProtocolKind::Gathering => true,
        _ => trace.status == RunStatus::AllTerminated && report.all_pass(),
    };
    let verdict = if ok { "ok" } else { "FAIL" };
    println!(
        "seed {seed}: {verdict} status={:?} events={} finalDiameter={:.6} {}",
        trace.status,
        report.summary.event_count,
        report.summary.final_diameter,
        failing_checks(&report)
    );
    Ok(ok)
}

fn failing_checks(report: &AuditReport) -> String {
    let mut names = Vec::new();
    for (name, check) in [
        ("collisionFree", &report.collision_free),
        ("gConnected", &report.g_connected),
        ("mutualAwareness", &report.mutual_awareness),
        ("coordinateMonotone", &report.coordinate_monotone),
        ("ellConstant", &report.ell_constant),
        ("terminateSawAll", &report.terminate_saw_all),
        ("finalDisk", &report.final_disk),
    ] {
        if !check.pass {
            names.push(name);
        }
    }
    if names.is_empty() {
        String::new()
    } else {
        format!("failed=[{}]", names.join(","))
    }
}

fn write_outputs(
    trace: &Trace,
    report: &AuditReport,
    initial: &[Point2],
    out_dir: &Path,
    seed: u64,
    single: bool,
) -> Result<(), String> {
    let name = |base: &str, ext: &str| -> PathBuf {
        if single {
            out_dir.join(format!("{base}.{ext}"))
        } else {
            out_dir.join(format!("{base}-{seed}.{ext}"))
        }
    };
    let mut buf = Vec::new();
    write_trace_jsonl(trace, &mut buf).map_err(|e| e.to_string())?;
    fs::write(name("trace", "jsonl"), buf).map_err(|e| e.to_string())?;
    let mut audit_bytes = serde_json::to_vec_pretty(report).map_err(|e| e.to_string())?;
    audit_bytes.push(b'\n');
    fs::write(name("audit", "json"), audit_bytes).map_err(|e| e.to_string())?;
    let mut metrics = Vec::new();
    write_metrics_csv(&trace.records, initial, &mut metrics).map_err(|e| e.to_string())?;
    fs::write(name("metrics", "csv"), metrics).map_err(|e| e.to_string())?;
    Ok(())
}

fn cmd_scan_prop1(v: f64, rho: f64, grid: usize) -> Result<bool, String> {
    if grid < 2 {
        return Err("grid must be at least 2".into());
    }
    let hi = v - rho;
    let mut min = f64::INFINITY;
    let mut argmin = 0.0;
    let mut prev = f64::NEG_INFINITY;
    let mut non_decreasing = true;
    for i in 0..grid {
        let x = hi * i as f64 / (grid - 1) as f64;
        let f = annulus_chord_gap(v, rho, x.min(hi)).map_err(|e| e.to_string())?;
        if f < min {
            min = f;
            argmin = x;
        }
        if f < prev - 1e-12 {
            non_decreasing = false;
        }
        prev = f;
    }
    let tol = 1e-9 * v;
    let pass = (min - rho / 2.0).abs() <= tol && argmin == 0.0 && non_decreasing;
    println!(
        "annulus gap scan: V={v} rho={rho} grid={grid} min={min} at x={argmin} \
         nonDecreasing={non_decreasing} pass={pass}"
    );
    Ok(pass)
}
