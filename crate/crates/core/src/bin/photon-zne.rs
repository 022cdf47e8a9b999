use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use photon_zne::harness::experiments::{
    deferred_heatmap, diag, hom_scan, hom_table, run_batch, sweep_m, sweep_m_table, sweep_noise,
    sweep_noise_table, theta_grid, MeanStd,
};
use photon_zne::harness::output::{write_csv, write_json, Cell, Table};
use photon_zne::harness::vqe::RunSpec;
use photon_zne::harness::{ExperimentConfig, MassValues, ShotMode};
use photon_zne::processor::build_chip;
use photon_zne::sampling::ShotScale;
use photon_zne::schwinger::exact_ground_energy;

#[derive(Parser)]
#[command(
    name = "photon-zne",
    version,
    about = "Photonic VQE with zero-noise extrapolation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Flat TOML file with ExperimentConfig keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Analytic probabilities instead of sampled counts.
    #[arg(long, conflicts_with = "shots")]
    exact: bool,
    /// Expected coincidences per basis measurement at the nominal 1/9 success rate.
    #[arg(long)]
    shots: Option<f64>,
    #[arg(long)]
    runs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact ground energy and ground state.
    Diag {
        #[arg(short, long, allow_negative_numbers = true)]
        mass: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// HOM visibility and coincidence probability against HWP angle.
    HomScan {
        /// Number of angles in [0, 45°].
        #[arg(long)]
        points: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// VQE runs with a k0/k1 deferred schedule.
    Vqe {
        #[arg(short, long, allow_negative_numbers = true)]
        mass: Option<f64>,
        #[arg(long)]
        eps1: Option<f64>,
        #[arg(long)]
        eps2: Option<f64>,
        #[arg(long)]
        k0: Option<usize>,
        #[arg(long)]
        k1: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Both strategies over a grid of m.
    SweepM {
        #[arg(short, long, allow_negative_numbers = true, value_delimiter = ',')]
        mass: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Both strategies over an eps1 grid with eps2 = ratio * eps1.
    SweepNoise {
        #[arg(short, long, allow_negative_numbers = true)]
        mass: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Relative error R(N, k0) of deferred mitigation.
    Deferred {
        #[arg(short, long, allow_negative_numbers = true)]
        mass: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.master_seed = Some(seed);
    }
    if let Some(out) = &common.out {
        cfg.output = out.clone();
    }
    if common.exact {
        cfg.shot_scale = ShotMode::Exact;
    }
    if let Some(s) = common.shots {
        cfg.shot_scale = ShotMode::Sampled(ShotScale::new(s)?);
    }
    if let Some(r) = common.runs {
        cfg.runs = r;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn required_seed(cfg: &ExperimentConfig) -> Result<u64> {
    match cfg.master_seed {
        Some(s) => Ok(s),
        None => bail!("--seed (or master_seed in the config file) is required for this command"),
    }
}

fn override_mass(cfg: &mut ExperimentConfig, mass: Option<f64>) {
    if let Some(m) = mass {
        cfg.m = Some(MassValues::One(m));
    }
}

fn emit<T: Serialize>(
    cfg: &ExperimentConfig,
    stem: &str,
    table: &Table,
    headline: T,
) -> Result<()> {
    let dir = &cfg.output;
    let csv = dir.join(format!("{stem}.csv"));
    write_csv(&csv, table).with_context(|| format!("writing {}", csv.display()))?;
    let summary = json!({
        "command": stem,
        "seed": cfg.master_seed,
        "config": cfg,
        "results": headline,
    });
    let json_path = dir.join(format!("{stem}.json"));
    write_json(&json_path, &summary).with_context(|| format!("writing {}", json_path.display()))?;
    println!("wrote {} and {}", display(&csv), display(&json_path));
    Ok(())
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Diag { mass, common } => {
            let mut cfg = load(&common)?;
            override_mass(&mut cfg, mass);
            let report = diag(cfg.mass()?)?;
            println!("m = {}  E0 = {:.10}", report.m, report.e0);
            println!(
                "ground state (|00>, |01>, |10>, |11>) = ({:.10}, {:.10}, {:.10}, {:.10})",
                report.ground_state[0],
                report.ground_state[1],
                report.ground_state[2],
                report.ground_state[3]
            );
            emit(&cfg, "diag", &report.table(), &report)
        }
        Command::HomScan { points, common } => {
            let mut cfg = load(&common)?;
            if let Some(p) = points {
                cfg.theta_points = p;
            }
            let rows = hom_scan(&theta_grid(cfg.theta_points))?;
            emit(
                &cfg,
                "hom_scan",
                &hom_table(&rows),
                json!({ "points": rows.len() }),
            )
        }
        Command::Vqe {
            mass,
            eps1,
            eps2,
            k0,
            k1,
            common,
        } => {
            let mut cfg = load(&common)?;
            override_mass(&mut cfg, mass);
            let seed = required_seed(&cfg)?;
            if let Some(e) = eps1 {
                cfg.epsilon_levels[0] = e;
            }
            if let Some(e) = eps2 {
                cfg.epsilon_levels[1] = e;
            }
            cfg.k0 = k0.unwrap_or(cfg.k0);
            cfg.k1 = k1.unwrap_or(cfg.k1);
            cfg.validate()?;
            let m = cfg.mass()?;
            let [e1, e2] = cfg.epsilon_levels;
            let spec = RunSpec {
                m,
                eps1: e1,
                eps2: Some(e2),
                k0: cfg.k0,
                k1: cfg.k1,
            };
            let results = run_batch(
                &build_chip(),
                &spec,
                cfg.shot_scale,
                &cfg.spsa(1),
                seed,
                0,
                cfg.runs,
            )?;
            let finals: Vec<f64> = results.iter().map(|r| r.final_energy.value).collect();
            let stats = MeanStd::of(&finals);

            let mut table = Table::new(vec![
                "run",
                "iteration",
                "stage",
                "E_eps1",
                "E_eps2",
                "estimate",
                "N",
            ]);
            for (run, r) in results.iter().enumerate() {
                for log in &r.iterations {
                    table.push(vec![
                        run.into(),
                        log.iteration.into(),
                        Cell::from(if log.stage == photon_zne::harness::StageKind::Mitigated {
                            "mitigated"
                        } else {
                            "unmitigated"
                        }),
                        log.e_eps1.into(),
                        log.e_eps2.map_or(Cell::from(""), Cell::from),
                        log.estimate.into(),
                        log.measurements.into(),
                    ]);
                }
            }
            println!(
                "E = {:.6} +- {:.6} (std {:.6}) over {} runs; E0 = {:.6}",
                stats.mean,
                stats.sem,
                stats.std,
                results.len(),
                exact_ground_energy(m)
            );
            let per_run: Vec<_> = results
                .iter()
                .map(|r| {
                    json!({
                        "run": r.seed.run_index,
                        "final_energy": r.final_energy,
                        "last_iterate": r.last_iterate,
                        "mitigated": r.mitigated,
                        "final_phases": r.final_phases,
                        "measurements": r.measurements,
                        "completed": r.completed,
                    })
                })
                .collect();
            emit(
                &cfg,
                "vqe",
                &table,
                json!({ "E0": exact_ground_energy(m), "energy": stats, "runs": per_run }),
            )
        }
        Command::SweepM { mass, common } => {
            let mut cfg = load(&common)?;
            if !mass.is_empty() {
                cfg.m = Some(MassValues::Many(mass));
            }
            let seed = required_seed(&cfg)?;
            let masses = cfg.masses_or(&(-10..=10).map(f64::from).collect::<Vec<_>>());
            let rows = sweep_m(&cfg, &masses, seed)?;
            emit(&cfg, "sweep_m", &sweep_m_table(&rows), &rows)
        }
        Command::SweepNoise { mass, common } => {
            let mut cfg = load(&common)?;
            override_mass(&mut cfg, mass);
            let seed = required_seed(&cfg)?;
            let rows = sweep_noise(&cfg, cfg.mass()?, seed)?;
            emit(&cfg, "sweep_noise", &sweep_noise_table(&rows), &rows)
        }
        Command::Deferred { mass, common } => {
            let mut cfg = load(&common)?;
            override_mass(&mut cfg, mass);
            let seed = required_seed(&cfg)?;
            let grid = deferred_heatmap(&cfg, cfg.mass()?, seed)?;
            let headline = json!({
                "E0": grid.e0,
                "audited_runs": grid.audited_runs,
                "R_120_18": grid.get(120, 18).map(|c| c.relative_error),
            });
            emit(&cfg, "deferred", &grid.table(), headline)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
