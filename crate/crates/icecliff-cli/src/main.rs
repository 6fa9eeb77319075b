//! Command-line driver: single runs, parametric sweeps and yield-surface
//! sampling.
//!
//! Exit codes: 0 success, 1 validation error, 2 solver failure (partial
//! outputs are preserved).

use clap::{Parser, Subcommand};
use icecliff::analysis::{detect_failure, ProbeConfig, FAILURE_THRESHOLD};
use icecliff::assembly::FemCache;
use icecliff::constitutive::{sample_yield_surface, DrivingForceModel};
use icecliff::io::{
    self, export_envelope, export_snapshot, export_trace, export_yield_surface, load_scenario,
    load_sweep_config, CohesionSweepConfig, FrictionSweepConfig, MarineSweepConfig, Scenario,
};
use icecliff::solver::{DamageOutcome, StepProgress};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "icecliff",
    version,
    about = "Plane-strain phase-field fracture simulation of grounded glacier cliffs"
)]
struct Cli {
    /// Output directory (overrides the scenario's export_dir).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads for sweeps and assembly (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Run the fast invariant self-check suite and exit.
    #[arg(long, global = true)]
    seed_check: bool,
    /// Cap on mesh node count.
    #[arg(long, global = true)]
    max_nodes: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Spin-up plus damage phase for one scenario; exports snapshots and
    /// the damage trace.
    Run { scenario: PathBuf },
    /// Creep spin-up only; exports the terminal stress state.
    SpinupOnly { scenario: PathBuf },
    /// Critical cliff heights over cohesion (and friction) values.
    SweepCohesion { config: PathBuf },
    /// Marine stability envelope over thickness and ocean-water height.
    SweepMarine { config: PathBuf },
    /// Damage traces across basal friction coefficients.
    SweepFriction { config: PathBuf },
    /// Sample a crack driving force on an (sxx, szz) grid.
    YieldSurface {
        /// Driving force: "mc" or "principal".
        #[arg(long, default_value = "mc")]
        model: String,
        #[arg(long, default_value_t = 0.8)]
        mu: f64,
        /// Cohesive strength, Pa.
        #[arg(long, default_value_t = 1e6)]
        tau_c: f64,
        /// Material strength of the principal model, Pa.
        #[arg(long, default_value_t = 1e6)]
        sigma_c: f64,
        #[arg(long, default_value_t = 1.0)]
        zeta: f64,
        /// Grid as lo:hi:count, Pa.
        #[arg(long, default_value = "-4e6:4e6:201", allow_hyphen_values = true)]
        range: String,
        #[arg(long, default_value = "yield_surface.csv")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes; anything else is a
            // validation error.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: cannot configure {threads} worker threads: {e}");
            return ExitCode::from(1);
        }
    }
    if cli.seed_check {
        return run_seed_check();
    }
    let Some(command) = cli.command else {
        eprintln!("error: a subcommand is required (see --help)");
        return ExitCode::from(1);
    };
    match dispatch(command, &cli.out_dir, cli.max_nodes) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Solver(msg)) => {
            eprintln!("solver failure: {msg}");
            ExitCode::from(2)
        }
    }
}

enum CliError {
    Validation(String),
    Solver(String),
}

impl From<io::IoError> for CliError {
    fn from(e: io::IoError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<icecliff::solver::SolverError> for CliError {
    fn from(e: icecliff::solver::SolverError) -> Self {
        CliError::Solver(e.to_string())
    }
}

impl From<icecliff::analysis::AnalysisError> for CliError {
    fn from(e: icecliff::analysis::AnalysisError) -> Self {
        CliError::Solver(e.to_string())
    }
}

fn run_seed_check() -> ExitCode {
    let results = icecliff::selfcheck::run(0xC11FF);
    let mut ok = true;
    for r in &results {
        println!(
            "seed-check {:40} {} ({})",
            r.name,
            if r.ok { "ok" } else { "FAILED" },
            r.detail
        );
        ok &= r.ok;
    }
    if ok {
        println!("seed-check: all {} checks passed", results.len());
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn dispatch(
    command: Command,
    out_dir: &Option<PathBuf>,
    max_nodes: Option<usize>,
) -> Result<(), CliError> {
    match command {
        Command::Run { scenario } => run_scenario(&scenario, out_dir, max_nodes, false),
        Command::SpinupOnly { scenario } => run_scenario(&scenario, out_dir, max_nodes, true),
        Command::SweepCohesion { config } => sweep_cohesion(&config, out_dir, max_nodes),
        Command::SweepMarine { config } => sweep_marine(&config, out_dir, max_nodes),
        Command::SweepFriction { config } => sweep_friction(&config, out_dir, max_nodes),
        Command::YieldSurface {
            model,
            mu,
            tau_c,
            sigma_c,
            zeta,
            range,
            out,
        } => yield_surface(&model, mu, tau_c, sigma_c, zeta, &range, &out),
    }
}

fn load(path: &Path, max_nodes: Option<usize>) -> Result<Scenario, CliError> {
    let mut scenario = load_scenario(path)?;
    if let Some(cap) = max_nodes {
        scenario.node_cap = cap;
    }
    Ok(scenario)
}

fn resolve_out_dir(scenario: &Scenario, out_dir: &Option<PathBuf>) -> Result<PathBuf, CliError> {
    let dir = out_dir
        .clone()
        .unwrap_or_else(|| scenario.outputs.export_dir.clone());
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Validation(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn progress_line(p: &StepProgress) {
    println!(
        "step={} t={} dt={} passes={} D={}",
        p.step, p.t, p.dt, p.passes, p.damage
    );
}

fn run_scenario(
    path: &Path,
    out_dir: &Option<PathBuf>,
    max_nodes: Option<usize>,
    spinup_only: bool,
) -> Result<(), CliError> {
    let scenario = load(path, max_nodes)?;
    let dir = resolve_out_dir(&scenario, out_dir)?;
    let mut sim = scenario.to_simulation()?;
    let mut state = sim.initial_state();
    eprintln!(
        "mesh: {} nodes, {} elements (H={} m, L={} m, h={} m)",
        sim.mesh.n_nodes(),
        sim.mesh.elements.len(),
        scenario.h,
        scenario.length(),
        scenario.target_h
    );
    sim.run_spinup(&mut state, progress_line)?;
    let cache = FemCache::new(&sim.mesh);
    export_snapshot(
        &sim.mesh,
        &cache,
        &sim.material,
        &state,
        dir.join("spinup.vtk"),
    )?;
    if spinup_only {
        println!(
            "spin-up complete: t={} s, exported {}",
            state.t,
            dir.join("spinup.vtk").display()
        );
        return Ok(());
    }

    let run = sim.run_damage_phase(
        &mut state,
        &scenario.outputs.snapshot_times,
        progress_line,
        |_| false,
    )?;
    export_trace(&run.trace, dir.join("damage_trace.csv"))?;
    for snap in &run.snapshots {
        let name = format!("snapshot_t{:08.2}.vtk", snap.t);
        export_snapshot(&sim.mesh, &cache, &sim.material, snap, dir.join(name))?;
    }
    let report = detect_failure(
        &sim.mesh,
        &state.phi,
        sim.terminus.h_w,
        sim.material.ell,
        FAILURE_THRESHOLD,
    );
    let final_damage = run.trace.normalized_damage.last().copied().unwrap_or(0.0);
    println!(
        "mode={} t_end={} final_damage={}{}",
        report.mode,
        state.t,
        final_damage,
        report
            .residual_front_thickness
            .map_or(String::new(), |r| format!(" residual_front_m={r}")),
    );
    if run.outcome == DamageOutcome::AbortedAtDtMin {
        return Err(CliError::Solver(format!(
            "staggered solver stalled at dt_min before t={} s; partial outputs in {}",
            state.t,
            dir.display()
        )));
    }
    Ok(())
}

fn probe_config(scenario: &Scenario, max_nodes: Option<usize>) -> ProbeConfig {
    let mut cfg = ProbeConfig::new(
        scenario.material,
        scenario.controls.clone(),
        scenario.target_h,
    );
    cfg.l_over_h = scenario.l_over_h;
    cfg.node_cap = max_nodes.unwrap_or(scenario.node_cap);
    cfg
}

fn sweep_cohesion(
    path: &Path,
    out_dir: &Option<PathBuf>,
    max_nodes: Option<usize>,
) -> Result<(), CliError> {
    let config: CohesionSweepConfig = load_sweep_config(path)?;
    let base = config.base_scenario()?;
    let dir = resolve_out_dir(&base, out_dir)?;
    let cfg = probe_config(&base, max_nodes);
    let tau_values: Vec<f64> = config.tau_c_mpa_values.iter().map(|t| t * 1e6).collect();
    let (points, summaries) = cfg.cohesion_sweep(
        &tau_values,
        &config.mu_values,
        base.basal,
        config.h_bracket_m,
        config.resolution_m,
    )?;
    export_envelope(&points, dir.join("cohesion_probes.csv"))?;
    for s in &summaries {
        println!(
            "tau_c={} Pa mu={} H_crit={} m (resolution {} m)",
            s.tau_c, s.mu, s.h_crit, config.resolution_m
        );
    }
    Ok(())
}

fn sweep_marine(
    path: &Path,
    out_dir: &Option<PathBuf>,
    max_nodes: Option<usize>,
) -> Result<(), CliError> {
    let config: MarineSweepConfig = load_sweep_config(path)?;
    let base = config.base_scenario()?;
    let dir = resolve_out_dir(&base, out_dir)?;
    let cfg = probe_config(&base, max_nodes);
    let buttress_values = if config.buttress_sigma_mpa_values.is_empty() {
        vec![0.0]
    } else {
        config.buttress_sigma_mpa_values.clone()
    };
    let mut all_points = Vec::new();
    for &tau_mpa in &config.tau_c_mpa_values {
        for &but_mpa in &buttress_values {
            let (points, summaries) = cfg.stability_envelope(
                &config.h_values_m,
                tau_mpa * 1e6,
                base.material.mu_int,
                base.basal,
                but_mpa * 1e6,
                config.freeboard_bracket_m,
                config.resolution_m,
            )?;
            for s in &summaries {
                println!(
                    "tau_c={:.3e} Pa buttress={:.3e} Pa H={} m: h_w_crit={} m freeboard={} m{}",
                    tau_mpa * 1e6,
                    but_mpa * 1e6,
                    s.h,
                    s.h_w_crit,
                    s.freeboard,
                    if s.buoyancy_bound {
                        " [buoyancy bound]"
                    } else {
                        ""
                    }
                );
            }
            all_points.extend(points);
        }
    }
    export_envelope(&all_points, dir.join("marine_envelope.csv"))?;
    Ok(())
}

fn sweep_friction(
    path: &Path,
    out_dir: &Option<PathBuf>,
    max_nodes: Option<usize>,
) -> Result<(), CliError> {
    let config: FrictionSweepConfig = load_sweep_config(path)?;
    let base = config.base_scenario()?;
    let dir = resolve_out_dir(&base, out_dir)?;
    let cfg = probe_config(&base, max_nodes);
    let results = cfg.basal_friction_sweep(
        &config.c_values,
        base.h,
        base.material.tau_c,
        base.material.mu_int,
    )?;
    for (label, trace, report) in &results {
        let path = dir.join(format!("trace_{label}.csv"));
        export_trace(trace, &path)?;
        println!(
            "{label}: mode={} final_damage={} -> {}",
            report.mode,
            trace.normalized_damage.last().copied().unwrap_or(0.0),
            path.display()
        );
    }
    Ok(())
}

fn yield_surface(
    model: &str,
    mu: f64,
    tau_c: f64,
    sigma_c: f64,
    zeta: f64,
    range: &str,
    out: &Path,
) -> Result<(), CliError> {
    let parts: Vec<&str> = range.split(':').collect();
    let parse = |s: &str| -> Result<f64, CliError> {
        s.parse()
            .map_err(|_| CliError::Validation(format!("bad range component {s:?}")))
    };
    if parts.len() != 3 {
        return Err(CliError::Validation(format!(
            "range must be lo:hi:count, got {range:?}"
        )));
    }
    let lo = parse(parts[0])?;
    let hi = parse(parts[1])?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| CliError::Validation(format!("bad count {:?}", parts[2])))?;
    if count < 2 || !(hi > lo) {
        return Err(CliError::Validation(
            "range needs hi > lo and count >= 2".into(),
        ));
    }
    let model = match model {
        "mc" => DrivingForceModel::MohrCoulomb { mu, tau_c },
        "principal" => DrivingForceModel::Principal { sigma_c, zeta },
        other => {
            return Err(CliError::Validation(format!(
                "unknown model {other:?}; use mc or principal"
            )))
        }
    };
    let grid: Vec<f64> = (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect();
    let samples = sample_yield_surface(&model, &grid, &grid);
    export_yield_surface(&samples, out)?;
    println!(
        "yield surface: {} samples -> {} (intact fraction {:.3})",
        samples.len(),
        out.display(),
        samples
            .iter()
            .filter(|s| match model {
                DrivingForceModel::MohrCoulomb { .. } => s.d_d < 1.0,
                DrivingForceModel::Principal { .. } => s.d_d == 0.0,
            })
            .count() as f64
            / samples.len() as f64
    );
    Ok(())
}
