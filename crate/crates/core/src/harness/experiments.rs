use std::f64::consts::FRAC_PI_4;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, ShotMode};
use crate::harness::output::{Cell, Table};
use crate::harness::vqe::{run_vqe, trailing_mean, RunSeed, RunSpec, StageKind, VqeRunResult};
use crate::mitigation::{epsilon_of_theta, MitigationSchedule, BASES_PER_ITERATION};
use crate::optics::{coincidence_probability, directional_coupler, OutputPattern, PhotonPairInput};
use crate::processor::{build_chip, hom_visibility, ChipLayout};
use crate::schwinger::{eigenvalues, exact_ground_energy, ground_state};
use crate::spsa::SpsaConfig;

/// Sample mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
    pub sem: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            std: var.sqrt(),
            sem: (var / n).sqrt(),
        }
    }
}

/// Runs `runs` seeds of one [`RunSpec`] in parallel; results are in run order.
pub fn run_batch(
    chip: &ChipLayout,
    spec: &RunSpec,
    shots: ShotMode,
    spsa: &SpsaConfig,
    master_seed: u64,
    grid_index: u64,
    runs: usize,
) -> Result<Vec<VqeRunResult>> {
    (0..runs as u64)
        .into_par_iter()
        .map(|run_index| {
            let seed = RunSeed {
                master_seed,
                grid_index,
                run_index,
            };
            run_vqe(chip, spec, shots, spsa, seed)
        })
        .collect()
}

fn final_values(results: &[VqeRunResult]) -> Vec<f64> {
    results.iter().map(|r| r.final_energy.value).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagReport {
    pub m: f64,
    pub e0: f64,
    /// Amplitudes over |00⟩, |01⟩, |10⟩, |11⟩.
    pub ground_state: [f64; 4],
    pub eigenvalues: [f64; 4],
}

pub fn diag(m: f64) -> Result<DiagReport> {
    if !m.is_finite() {
        return Err(Error::NonFinite("m"));
    }
    let (e0, state) = ground_state(m);
    Ok(DiagReport {
        m,
        e0,
        ground_state: state,
        eigenvalues: eigenvalues(m),
    })
}

impl DiagReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(vec!["m", "E0", "psi_00", "psi_01", "psi_10", "psi_11"]);
        let mut row = vec![Cell::from(self.m), Cell::from(self.e0)];
        row.extend(self.ground_state.iter().map(|&a| Cell::from(a)));
        t.push(row);
        t
    }
}

/// θ in `[0, π/4]`, `points` evenly spaced values including both ends.
pub fn theta_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n)
            .map(|i| FRAC_PI_4 * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HomRow {
    pub theta: f64,
    pub epsilon: f64,
    pub visibility: f64,
    /// Coincidence probability behind a bare 50:50 coupler.
    pub p_coincidence: f64,
}

pub fn hom_scan(thetas: &[f64]) -> Result<Vec<HomRow>> {
    if thetas.is_empty() {
        return Err(Error::Config("theta grid is empty".into()));
    }
    let chip = build_chip();
    let coupler = directional_coupler(0.5, (0, 1), 2)?;
    thetas
        .iter()
        .map(|&theta| {
            if !theta.is_finite() {
                return Err(Error::NonFinite("theta"));
            }
            let epsilon = epsilon_of_theta(theta);
            let input = PhotonPairInput::new(0, 1, epsilon)?;
            Ok(HomRow {
                theta,
                epsilon,
                visibility: hom_visibility(&chip, epsilon)?,
                p_coincidence: coincidence_probability(&coupler, &input, OutputPattern::new(0, 1))?,
            })
        })
        .collect()
}

pub fn hom_table(rows: &[HomRow]) -> Table {
    let mut t = Table::new(vec!["theta", "epsilon", "V", "p_coincidence"]);
    for r in rows {
        t.push(vec![
            r.theta.into(),
            r.epsilon.into(),
            r.visibility.into(),
            r.p_coincidence.into(),
        ]);
    }
    t
}

/// Aggregated runs of both strategies at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrategyPair {
    pub unmitigated: MeanStd,
    pub mitigated: MeanStd,
}

/// The mitigated strategy follows the configured `(k0, k1)` schedule; the
/// unmitigated one spends the same number of iterations on the raw energy.
fn both_strategies(
    chip: &ChipLayout,
    cfg: &ExperimentConfig,
    seed: u64,
    grid: u64,
    m: f64,
    eps1: f64,
    eps2: f64,
) -> Result<StrategyPair> {
    let total = cfg.k0 + cfg.k1;
    let spsa = cfg.spsa(total);
    let plain = RunSpec::unmitigated(m, eps1, total);
    let unmitigated = run_batch(chip, &plain, cfg.shot_scale, &spsa, seed, grid, cfg.runs)?;
    let unmitigated = MeanStd::of(&final_values(&unmitigated));
    // Extrapolating from a noise-free point returns that point.
    if eps1 == 0.0 {
        return Ok(StrategyPair {
            unmitigated,
            mitigated: unmitigated,
        });
    }
    let zne = RunSpec::deferred(m, eps1, eps2, cfg.k0, cfg.k1);
    let mitigated = run_batch(chip, &zne, cfg.shot_scale, &spsa, seed, grid, cfg.runs)?;
    Ok(StrategyPair {
        unmitigated,
        mitigated: MeanStd::of(&final_values(&mitigated)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepMRow {
    pub m: f64,
    pub energies: StrategyPair,
    pub e0: f64,
}

pub fn sweep_m(cfg: &ExperimentConfig, masses: &[f64], seed: u64) -> Result<Vec<SweepMRow>> {
    cfg.validate()?;
    if masses.is_empty() {
        return Err(Error::Config("m grid is empty".into()));
    }
    let chip = build_chip();
    let [eps1, eps2] = cfg.epsilon_levels;
    masses
        .iter()
        .enumerate()
        .map(|(g, &m)| {
            Ok(SweepMRow {
                m,
                energies: both_strategies(&chip, cfg, seed, g as u64, m, eps1, eps2)?,
                e0: exact_ground_energy(m),
            })
        })
        .collect()
}

pub fn sweep_m_table(rows: &[SweepMRow]) -> Table {
    let mut t = Table::new(vec![
        "m",
        "E_unmitigated",
        "E_mitigated",
        "E0",
        "sem_unmitigated",
        "sem_mitigated",
    ]);
    for r in rows {
        let e = &r.energies;
        t.push(vec![
            r.m.into(),
            e.unmitigated.mean.into(),
            e.mitigated.mean.into(),
            r.e0.into(),
            e.unmitigated.sem.into(),
            e.mitigated.sem.into(),
        ]);
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepNoiseRow {
    pub eps1: f64,
    pub eps2: f64,
    pub energies: StrategyPair,
}

pub fn sweep_noise(cfg: &ExperimentConfig, m: f64, seed: u64) -> Result<Vec<SweepNoiseRow>> {
    cfg.validate()?;
    if cfg.epsilon_grid.is_empty() {
        return Err(Error::Config("epsilon grid is empty".into()));
    }
    if let Some(bad) = cfg.epsilon_grid.iter().find(|&&e| cfg.ratio * e > 1.0) {
        return Err(Error::Config(format!(
            "ratio * eps1 exceeds 1 at eps1 = {bad}"
        )));
    }
    let chip = build_chip();
    cfg.epsilon_grid
        .iter()
        .enumerate()
        .map(|(g, &eps1)| {
            let eps2 = cfg.ratio * eps1;
            Ok(SweepNoiseRow {
                eps1,
                eps2,
                energies: both_strategies(&chip, cfg, seed, g as u64, m, eps1, eps2)?,
            })
        })
        .collect()
}

pub fn sweep_noise_table(rows: &[SweepNoiseRow]) -> Table {
    let mut t = Table::new(vec![
        "epsilon1",
        "E_unmitigated",
        "E_mitigated",
        "epsilon2",
        "sem_unmitigated",
        "sem_mitigated",
    ]);
    for r in rows {
        let e = &r.energies;
        t.push(vec![
            r.eps1.into(),
            e.unmitigated.mean.into(),
            e.mitigated.mean.into(),
            r.eps2.into(),
            e.unmitigated.sem.into(),
            e.mitigated.sem.into(),
        ]);
    }
    t
}

/// One `(N, k₀)` cell of the deferred-mitigation grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeferredCell {
    pub budget: usize,
    pub k0: usize,
    /// `None` when no `k₁ ≥ 1` spends exactly `N`.
    pub k1: Option<usize>,
    pub mean_energy: f64,
    pub delta_e: f64,
    pub relative_error: f64,
}

impl DeferredCell {
    pub fn feasible(&self) -> bool {
        self.k1.is_some()
    }
}

/// `R(N, k₀) = ΔE(N, k₀)/ΔE(N, 0)` over a budget × deferral grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelativeErrorGrid {
    pub budgets: Vec<usize>,
    pub k0s: Vec<usize>,
    pub e0: f64,
    /// Row-major over budgets, then k₀.
    pub cells: Vec<DeferredCell>,
    /// Runs whose recorded spend matched `n·k₀ + 2n·k₁` at every cell.
    pub audited_runs: usize,
}

impl RelativeErrorGrid {
    pub fn get(&self, budget: usize, k0: usize) -> Option<&DeferredCell> {
        self.cells.iter().find(|c| c.budget == budget && c.k0 == k0)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(vec!["N", "k0", "k1", "feasible", "E_mean", "delta_E", "R"]);
        for c in &self.cells {
            let (k1, e, d, r) = match c.k1 {
                Some(k1) => (
                    Cell::from(k1),
                    c.mean_energy.into(),
                    c.delta_e.into(),
                    c.relative_error.into(),
                ),
                None => (
                    Cell::from(""),
                    Cell::from(""),
                    Cell::from(""),
                    Cell::from(""),
                ),
            };
            t.push(vec![
                c.budget.into(),
                c.k0.into(),
                k1,
                c.feasible().into(),
                e,
                d,
                r,
            ]);
        }
        t
    }
}

/// Mitigated iterations for `(N, k₀)`, requiring at least one.
pub fn deferred_split(budget: usize, k0: usize) -> Option<usize> {
    MitigationSchedule::mitigated_for_budget(budget, k0, BASES_PER_ITERATION).filter(|&k1| k1 >= 1)
}

/// One trajectory per `(k₀, run)` runs to the largest `k₁` any budget needs;
/// the gain law does not depend on the stage length, so the prefix after
/// `k₁` mitigated iterations is exactly the shorter run.
pub fn deferred_heatmap(cfg: &ExperimentConfig, m: f64, seed: u64) -> Result<RelativeErrorGrid> {
    cfg.validate()?;
    if !cfg.k0_grid.contains(&0) {
        return Err(Error::Config(
            "k0_grid must contain 0 as the reference column".into(),
        ));
    }
    if cfg.budget_grid.is_empty() {
        return Err(Error::Config("budget grid is empty".into()));
    }
    let chip = build_chip();
    let [eps1, eps2] = cfg.epsilon_levels;
    let spsa = cfg.spsa(1);
    let e0 = exact_ground_energy(m);

    // Per k₀: trailing-mean energies indexed by run, then by k₁ − 1.
    let mut curves: Vec<Option<Vec<Vec<f64>>>> = Vec::with_capacity(cfg.k0_grid.len());
    let mut audited = usize::MAX;
    for &k0 in &cfg.k0_grid {
        let Some(k1_max) = cfg
            .budget_grid
            .iter()
            .filter_map(|&n| deferred_split(n, k0))
            .max()
        else {
            curves.push(None);
            continue;
        };
        let spec = RunSpec {
            m,
            eps1,
            eps2: Some(eps2),
            k0,
            k1: k1_max,
        };
        let runs = run_batch(&chip, &spec, cfg.shot_scale, &spsa, seed, 0, cfg.runs)?;
        let mut per_run = Vec::with_capacity(runs.len());
        let mut ok = 0;
        for run in &runs {
            let mitigated: Vec<_> = run
                .iterations
                .iter()
                .filter(|l| l.stage == StageKind::Mitigated)
                .collect();
            let estimates: Vec<f64> = mitigated.iter().map(|l| l.estimate).collect();
            let audit = cfg
                .budget_grid
                .iter()
                .all(|&n| match deferred_split(n, k0) {
                    Some(k1) => mitigated.get(k1 - 1).is_some_and(|l| l.measurements == n),
                    None => true,
                });
            ok += usize::from(audit && run.completed);
            per_run.push(
                (1..=estimates.len())
                    .map(|j| trailing_mean(&estimates[..j]))
                    .collect(),
            );
        }
        audited = audited.min(ok);
        curves.push(Some(per_run));
    }

    let mut cells = Vec::with_capacity(cfg.budget_grid.len() * cfg.k0_grid.len());
    for &budget in &cfg.budget_grid {
        let mean_at = |k0_idx: usize, k0: usize| -> Option<(usize, f64)> {
            let k1 = deferred_split(budget, k0)?;
            let runs = curves[k0_idx].as_ref()?;
            let values: Vec<f64> = runs.iter().map(|r| r[k1 - 1]).collect();
            Some((k1, MeanStd::of(&values).mean))
        };
        let zero_idx = cfg.k0_grid.iter().position(|&k| k == 0).expect("checked");
        let reference = mean_at(zero_idx, 0).map(|(_, e)| (e - e0).abs());
        for (i, &k0) in cfg.k0_grid.iter().enumerate() {
            let cell = match mean_at(i, k0) {
                Some((k1, mean)) => {
                    let delta = (mean - e0).abs();
                    let relative_error = match reference {
                        _ if k0 == 0 => 1.0,
                        Some(r) => delta / r,
                        None => f64::NAN,
                    };
                    DeferredCell {
                        budget,
                        k0,
                        k1: Some(k1),
                        mean_energy: mean,
                        delta_e: delta,
                        relative_error,
                    }
                }
                None => DeferredCell {
                    budget,
                    k0,
                    k1: None,
                    mean_energy: f64::NAN,
                    delta_e: f64::NAN,
                    relative_error: f64::NAN,
                },
            };
            cells.push(cell);
        }
    }
    Ok(RelativeErrorGrid {
        budgets: cfg.budget_grid.clone(),
        k0s: cfg.k0_grid.clone(),
        e0,
        cells,
        audited_runs: if audited == usize::MAX { 0 } else { audited },
    })
}
