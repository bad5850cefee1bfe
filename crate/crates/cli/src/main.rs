use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde::Deserialize;

use ranlat::optimizer::{
    find_all, optimize, sample_valid, FindAllOptions, Objective, Pinning, ReliabilityTarget, SearchOptions,
    SearchSpace, AXES,
};
use ranlat::oracle::simulate_slot_timeline;
use ranlat::stochastic::{
    draw_profiles, fit_learned_distribution, latency_distribution, packet_rng, DistSpec, FitGrid, FitTarget,
    LatencyDistribution, ProfileSpec,
};
use ranlat::traffic::{export_results, generate_trace, load_trace, ExportFormat};
use ranlat::{
    Direction, Duplexing, Evaluator, MiniSlotSplit, Mode, Packet, PacketTrace, SystemConfig, TddPattern,
    TrafficSpec,
};

#[derive(Parser)]
#[command(name = "ranlat", version, about = "Slot-level 5G NR latency model and configuration search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Latency distribution of one configuration.
    Model(ModelArgs),
    /// Best configuration of a search space.
    Optimize(OptimizeArgs),
    /// Every configuration meeting a latency/reliability target.
    FindAll(FindAllArgs),
    /// Fit a learned processing-delay distribution to observed latencies.
    Fit(FitArgs),
    /// Randomized differential test of the closed forms against the slot walk.
    OracleCheck(OracleArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CliMode {
    Ul,
    Dl,
    GrantFree,
    MiniSlot,
    Fdd,
}

#[derive(clap::Args)]
struct ModelArgs {
    /// YAML file with `system` and optional `profile`.
    #[arg(long)]
    config: PathBuf,
    /// CSV trace (`arrival_ms,size_bytes`).
    #[arg(long, conflicts_with = "traffic")]
    trace: Option<PathBuf>,
    /// Generated traffic, e.g. `constant:101@64x10000`.
    #[arg(long, default_value = "constant:101@64x10000")]
    traffic: String,
    #[arg(long, value_enum, default_value = "ul")]
    mode: CliMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Packets to evaluate (default: the whole trace).
    #[arg(long)]
    packets: Option<usize>,
    /// Packets share the UE buffer (grant-based uplink only).
    #[arg(long)]
    train: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// samples-table, cdf-table or summary.
    #[arg(long, default_value = "summary")]
    format: ExportFormat,
}

#[derive(clap::Args)]
struct SearchArgs {
    /// Search-space YAML (default: the built-in FR1 space).
    #[arg(long)]
    space: Option<PathBuf>,
    #[arg(long, env = "RANLAT_WORKERS", default_value_t = 0)]
    workers: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(clap::Args)]
struct OptimizeArgs {
    #[command(flatten)]
    search: SearchArgs,
    /// mean, max or pNN (e.g. p99.9).
    #[arg(long, default_value = "mean")]
    objective: Objective,
    /// Skip the coarse pass.
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value_t = 500)]
    coarse_packets: usize,
    #[arg(long, default_value_t = 10_000)]
    fine_packets: usize,
    /// Write the best configuration's latency summary here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct FindAllArgs {
    #[command(flatten)]
    search: SearchArgs,
    /// e.g. `1ms@99.99`.
    #[arg(long)]
    target: ReliabilityTarget,
    #[arg(long, default_value_t = 10_000)]
    packets: usize,
    /// Evaluate a uniform subsample of this many configurations.
    #[arg(long)]
    sample: Option<usize>,
    /// CSV table of matching configurations.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliFitTarget {
    Ue,
    Gnb,
}

#[derive(clap::Args)]
struct FitArgs {
    #[arg(long)]
    config: PathBuf,
    /// One observed latency (ms) per line.
    #[arg(long)]
    observed: PathBuf,
    /// `START:STOP:STEP,START:STOP:STEP` (default: the built-in UE grid).
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, value_enum, default_value = "ue")]
    target: CliFitTarget,
    #[arg(long, default_value = "constant:101@64x2000")]
    traffic: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(clap::Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 1000)]
    configs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    system: SystemConfig,
    profile: Option<ProfileSpec>,
}

/// Exit 1: the closed forms disagree with the oracle.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct Mismatch(String);

/// Exit 3: a search came back empty.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct Empty(String);

fn load_config(path: &Path) -> anyhow::Result<(SystemConfig, ProfileSpec)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let f: ConfigFile =
        serde_yaml::from_str(&text).map_err(|e| ranlat::Error::config(format!("{}: {e}", path.display())))?;
    f.system.validate()?;
    let profile = f.profile.unwrap_or_else(ProfileSpec::testbed_defaults);
    profile.check()?;
    Ok((f.system, profile))
}

fn resolve_mode(cfg: &mut SystemConfig, mode: CliMode) -> anyhow::Result<Mode> {
    Ok(match mode {
        CliMode::Ul => Mode::UL,
        CliMode::Dl => Mode::DL,
        CliMode::GrantFree => Mode::GRANT_FREE,
        CliMode::MiniSlot => {
            if cfg.pattern.duplexing != Duplexing::TddMiniSlot {
                return Err(ranlat::Error::config("--mode mini-slot needs a mini-slot pattern in the config").into());
            }
            Mode::UL
        }
        CliMode::Fdd => {
            cfg.pattern = TddPattern::fdd(cfg.pattern.total_slots);
            cfg.validate()?;
            Mode::UL
        }
    })
}

fn traffic(spec: &str, seed: u64) -> anyhow::Result<PacketTrace> {
    Ok(generate_trace(&TrafficSpec::parse(spec, seed)?)?)
}

fn print_summary(d: &LatencyDistribution) {
    let s = d.summary();
    println!("packets  {}", s.count);
    println!("min      {:.6} ms", s.min);
    println!("mean     {:.6} ms", s.mean);
    println!("p50      {:.6} ms", s.p50);
    println!("p99      {:.6} ms", s.p99);
    println!("p99.99   {:.6} ms", s.p9999);
    println!("max      {:.6} ms", s.max);
}

fn cmd_model(a: ModelArgs) -> anyhow::Result<()> {
    let (mut cfg, profile) = load_config(&a.config)?;
    let mode = resolve_mode(&mut cfg, a.mode)?;
    let trace = match &a.trace {
        Some(p) => load_trace(p)?,
        None => traffic(&a.traffic, a.seed)?,
    };
    let n = a.packets.unwrap_or(trace.len());
    let run = latency_distribution(&cfg, mode, &profile, &trace, n, a.seed, a.train)?;
    print_summary(&run.distribution);
    if run.excluded > 0 {
        let why = run.first_error.map(|e| e.to_string()).unwrap_or_default();
        println!("excluded {} ({why})", run.excluded);
    }
    if let Some(out) = &a.out {
        export_results(&run.distribution, &run.breakdowns, out, a.format)?;
    }
    Ok(())
}

fn load_space(a: &SearchArgs) -> anyhow::Result<SearchSpace> {
    Ok(match &a.space {
        Some(p) => SearchSpace::from_file(p)?,
        None => SearchSpace::default_space(),
    })
}

fn cmd_optimize(a: OptimizeArgs) -> anyhow::Result<()> {
    let space = load_space(&a.search)?;
    let opts = SearchOptions {
        objective: a.objective,
        n_coarse: a.coarse_packets,
        n_fine: a.fine_packets,
        exact: a.exact,
        seed: a.search.seed,
        workers: a.search.workers,
    };
    let r = optimize(&space, &opts)?;
    println!("valid configurations {} (finalists {})", r.valid, r.finalists);
    println!("best {}", r.best);
    println!("objective {:.6} ms", r.objective);
    print_summary(&r.run.distribution);
    if let Some(out) = &a.out {
        export_results(&r.run.distribution, &r.run.breakdowns, out, ExportFormat::Summary)?;
    }
    Ok(())
}

fn cmd_find_all(a: FindAllArgs) -> anyhow::Result<()> {
    let space = load_space(&a.search)?;
    let opts = FindAllOptions {
        packets: a.packets,
        seed: a.search.seed,
        workers: a.search.workers,
        sample: a.sample,
        sample_seed: a.search.seed,
    };
    let mut r = find_all(&space, &a.target, &opts)?;
    r.matches.sort_by_key(|m| m.point.key());
    println!(
        "{} of {} evaluated configurations meet {} ms at {}% ({} valid in total)",
        r.matches.len(),
        r.considered,
        a.target.latency_bound_ms,
        a.target.reliability,
        r.valid_total
    );
    if let Some(out) = &a.out {
        let mut w = csv::Writer::from_path(out).with_context(|| format!("writing {}", out.display()))?;
        let mut header: Vec<&str> = AXES.to_vec();
        header.push("achieved_ms");
        w.write_record(&header)?;
        for m in &r.matches {
            let p = m.point;
            w.write_record([
                p.slot_ms.to_string(),
                p.period.to_string(),
                p.dl_slots.to_string(),
                p.k2.to_string(),
                p.sr_period.to_string(),
                p.sr_offset.to_string(),
                p.pucch_start.to_string(),
                p.pucch_symbols.to_string(),
                p.pdcch_symbols.to_string(),
                p.advance_slots.to_string(),
                m.achieved_ms.to_string(),
            ])?;
        }
        w.flush()?;
    }
    if r.matches.is_empty() {
        return Err(Empty("no configuration meets the target".into()).into());
    }
    Ok(())
}

fn cmd_fit(a: FitArgs) -> anyhow::Result<()> {
    let (cfg, base) = load_config(&a.config)?;
    let target = match a.target {
        CliFitTarget::Ue => FitTarget::UePreparation,
        CliFitTarget::Gnb => FitTarget::GnbProcessing,
    };
    let grid = match &a.grid {
        Some(g) => FitGrid::parse(target, g)?,
        None if matches!(target, FitTarget::UePreparation) => FitGrid::default_ue(),
        None => bail!(ranlat::Error::config("--grid is required for --target gnb")),
    };
    let observed = match DistSpec::empirical_from_file(&a.observed)? {
        DistSpec::Empirical { samples } => LatencyDistribution::new(samples.to_vec())?,
        _ => unreachable!("empirical_from_file returns an empirical spec"),
    };
    let trace = traffic(&a.traffic, a.seed)?;
    let ev = Evaluator::new(&cfg, Mode::UL)?;
    let fit = fit_learned_distribution(&ev, &observed, &grid, &base, &trace, trace.len(), a.seed)?;
    let (first, second) = match target {
        FitTarget::UePreparation => ("mean", "std"),
        FitTarget::GnbProcessing => ("shape", "loc"),
    };
    println!("{first} {:.6}", fit.first);
    println!("{second} {:.6}", fit.second);
    println!("wasserstein {:.6}", fit.distance);
    Ok(())
}

/// The grid point as a common TDD, FDD or mini-slot configuration.
fn oracle_variant(base: SystemConfig, which: usize, rng: &mut impl Rng) -> SystemConfig {
    let mut cfg = base;
    let t = base.pattern.total_slots;
    match which {
        1 => cfg.pattern = TddPattern::fdd(t),
        2 if base.ctrl.pucch_start >= 4 => {
            let sy_f_ul = rng.gen_range(4..=base.ctrl.pucch_start);
            let sy_l_dl = rng.gen_range(base.ctrl.pdcch_symbols.max(2)..sy_f_ul);
            cfg.pattern = TddPattern::mini_slot(
                t,
                MiniSlotSplit {
                    sy_f_dl: rng.gen_range(2..=sy_l_dl),
                    sy_l_dl,
                    sy_f_ul,
                    sy_l_ul: 14,
                },
            );
        }
        _ => {}
    }
    cfg
}

fn cmd_oracle(a: OracleArgs) -> anyhow::Result<()> {
    let space = SearchSpace::default_space();
    let points = sample_valid(&space, Pinning::None, a.configs, a.seed);
    let draws = draw_profiles(&ProfileSpec::testbed_defaults(), points.len().max(1), a.seed);
    let mut rng = packet_rng(a.seed, u64::MAX);
    let (mut compared, mut mismatches) = (0usize, 0usize);
    for (i, p) in points.iter().enumerate() {
        let cfg = oracle_variant(space.config(p)?, i % 3, &mut rng);
        let dr = draws[i];
        for mode in [Mode::UL, Mode::GRANT_FREE, Mode::DL] {
            let Ok(ev) = Evaluator::new(&cfg, mode) else { continue };
            let cap = match mode.direction {
                Direction::Uplink => ev.ul_capacity(),
                Direction::Downlink => ev.dl_capacity(),
            };
            let Some(cap) = cap.ok().filter(|&c| c > 0) else { continue };
            let g = cfg.ctrl.initial_grant_bytes;
            let o1 = rng.gen_range(0.0..50.0);
            let size = rng.gen_range(1..=g + 300 * cap);
            let trace = PacketTrace::new(vec![Packet { arrival_ms: o1, size_bytes: size }]);
            let walked = simulate_slot_timeline(&cfg, mode, &[dr], &trace)?
                .pop()
                .ok_or_else(|| anyhow!("oracle returned no result"))?;
            let agree = match (ev.evaluate(&dr, o1, size), walked) {
                (Ok(x), Ok(y)) => (x.total - y.total).abs() <= 1e-9,
                (Err(_), Err(_)) => true,
                _ => false,
            };
            compared += 1;
            if !agree {
                mismatches += 1;
                eprintln!("mismatch: {p} {:?} {mode:?} o1={o1} size={size}", cfg.pattern.duplexing);
            }
        }
    }
    println!("{compared} comparisons over {} configurations, {mismatches} mismatches", points.len());
    if mismatches > 0 {
        return Err(Mismatch(format!("{mismatches} mismatches")).into());
    }
    Ok(())
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Mismatch>().is_some() {
        return 1;
    }
    if e.downcast_ref::<Empty>().is_some() {
        return 3;
    }
    match e.downcast_ref::<ranlat::Error>() {
        Some(err) if err.is_infeasible() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Model(a) => cmd_model(a),
        Command::Optimize(a) => cmd_optimize(a),
        Command::FindAll(a) => cmd_find_all(a),
        Command::Fit(a) => cmd_fit(a),
        Command::OracleCheck(a) => cmd_oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
