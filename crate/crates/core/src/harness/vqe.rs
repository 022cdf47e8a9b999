use std::f64::consts::TAU;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::config::{check_levels, ShotMode};
use crate::mitigation::{
    linear_zne, measurements_used, MitigationSchedule, ZneEstimate, BASES_PER_ITERATION,
};
use crate::processor::{outcome_probabilities, BasisId, ChipLayout, OutcomeProbs};
use crate::sampling::{sample_counts, seeded_rng, stream_id, RngStream};
use crate::schwinger::{energy_from_counts, energy_from_probs, EnergyEstimate};
use crate::spsa::{self, OptimTrace, SpsaConfig, Termination};

/// Iterations averaged for the reported energy.
pub const TRAILING_WINDOW: usize = 10;

const PURPOSE_INIT: u8 = 0;
const PURPOSE_SPSA: u8 = 1;
const PURPOSE_SHOTS: u8 = 2;

/// Energy of the chip-prepared state at one noise level, measured in the
/// three bases.
#[derive(Debug, Clone, Copy)]
pub struct EnergyProbe<'a> {
    pub chip: &'a ChipLayout,
    pub m: f64,
    pub shots: ShotMode,
}

impl EnergyProbe<'_> {
    pub fn measure<R: Rng + ?Sized>(
        &self,
        phases: &[f64],
        epsilon: f64,
        rng: &mut R,
    ) -> Result<EnergyEstimate> {
        let prep: [f64; 4] = phases.try_into().map_err(|_| {
            Error::Config(format!(
                "expected 4 preparation phases, got {}",
                phases.len()
            ))
        })?;
        let mut probs = [OutcomeProbs([0.0; 4]); 3];
        let mut success = [0.0; 3];
        for (i, basis) in BasisId::ALL.into_iter().enumerate() {
            (probs[i], success[i]) = outcome_probabilities(self.chip, prep, basis, epsilon)?;
        }
        match self.shots {
            ShotMode::Exact => Ok(EnergyEstimate::exact(energy_from_probs(
                &probs[0], &probs[1], &probs[2], self.m,
            )?)),
            ShotMode::Sampled(scale) => {
                let counts: Vec<[u64; 4]> = BasisId::ALL
                    .into_iter()
                    .enumerate()
                    .map(|(i, basis)| {
                        sample_counts(basis, &probs[i], success[i], scale, rng).counts
                    })
                    .collect();
                energy_from_counts(counts[0], counts[1], counts[2], self.m)
            }
        }
    }
}

/// One VQE run: `k0` iterations on the raw ε₁ energy, then `k1` iterations
/// on the extrapolated energy with a restarted optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunSpec {
    pub m: f64,
    pub eps1: f64,
    /// Required when `k1 > 0`.
    pub eps2: Option<f64>,
    pub k0: usize,
    pub k1: usize,
}

impl RunSpec {
    pub fn unmitigated(m: f64, eps1: f64, iterations: usize) -> Self {
        Self {
            m,
            eps1,
            eps2: None,
            k0: iterations,
            k1: 0,
        }
    }

    pub fn mitigated(m: f64, eps1: f64, eps2: f64, iterations: usize) -> Self {
        Self {
            m,
            eps1,
            eps2: Some(eps2),
            k0: 0,
            k1: iterations,
        }
    }

    pub fn deferred(m: f64, eps1: f64, eps2: f64, k0: usize, k1: usize) -> Self {
        Self {
            m,
            eps1,
            eps2: Some(eps2),
            k0,
            k1,
        }
    }

    pub fn schedule(&self) -> Result<MitigationSchedule> {
        MitigationSchedule::new(self.k0, self.k1, BASES_PER_ITERATION)
    }

    fn validate(&self) -> Result<()> {
        if !self.m.is_finite() {
            return Err(Error::Config("m must be finite".into()));
        }
        if !(0.0..=1.0).contains(&self.eps1) {
            return Err(Error::NoiseLevelOutOfRange(self.eps1));
        }
        match self.eps2 {
            Some(e2) => check_levels(self.eps1, e2),
            None if self.k1 > 0 => Err(Error::Config(
                "mitigated iterations need a second noise level".into(),
            )),
            None => Ok(()),
        }
    }
}

/// Random streams owned by one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RunSeed {
    pub master_seed: u64,
    pub grid_index: u64,
    pub run_index: u64,
}

impl RunSeed {
    fn stream(&self, purpose: u8) -> RngStream {
        seeded_rng(
            self.master_seed,
            stream_id(self.grid_index, self.run_index, purpose),
        )
    }

    /// Uniform initial phases in `[0, 2π)⁴`. Keyed by run only, so every
    /// grid point starts run `i` from the same place.
    pub fn initial_phases(&self) -> [f64; 4] {
        let mut rng = seeded_rng(self.master_seed, stream_id(0, self.run_index, PURPOSE_INIT));
        std::array::from_fn(|_| rng.random::<f64>() * TAU)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StageKind {
    Unmitigated,
    Mitigated,
}

/// One optimizer iteration as seen by the harness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationLog {
    /// Global iteration index across both stages.
    pub iteration: usize,
    pub stage: StageKind,
    /// Mean of the two ε₁ evaluations.
    pub e_eps1: f64,
    /// Mean of the two ε₂ evaluations in the mitigated stage.
    pub e_eps2: Option<f64>,
    /// Mean of the two objective values.
    pub estimate: f64,
    /// Basis measurements spent so far, this iteration included.
    pub measurements: usize,
    pub params: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VqeRunResult {
    pub spec: RunSpec,
    pub seed: RunSeed,
    pub schedule: MitigationSchedule,
    /// Trailing-window mean of the final stage's estimates.
    pub final_energy: EnergyEstimate,
    /// Estimate from the last iteration alone.
    pub last_iterate: EnergyEstimate,
    /// Trailing-window extrapolation when the final stage is mitigated.
    pub mitigated: Option<ZneEstimate>,
    pub iterations: Vec<IterationLog>,
    pub measurements: usize,
    pub final_phases: [f64; 4],
    pub completed: bool,
}

#[derive(Debug, Clone, Copy)]
struct Evaluation {
    e1: EnergyEstimate,
    e2: Option<EnergyEstimate>,
    objective: EnergyEstimate,
}

/// Runs one VQE instance. `spsa` supplies the gains; its iteration count is
/// replaced by each stage's length. Streams are derived from `seed`, so the
/// result does not depend on thread scheduling.
pub fn run_vqe(
    chip: &ChipLayout,
    spec: &RunSpec,
    shots: ShotMode,
    spsa: &SpsaConfig,
    seed: RunSeed,
) -> Result<VqeRunResult> {
    spec.validate()?;
    let schedule = spec.schedule()?;
    let probe = EnergyProbe {
        chip,
        m: spec.m,
        shots,
    };
    let mut spsa_rng = seed.stream(PURPOSE_SPSA);
    let mut shot_rng = seed.stream(PURPOSE_SHOTS);
    let x0 = seed.initial_phases();

    let mut logs: Vec<IterationLog> = Vec::with_capacity(schedule.iterations());
    let mut measurements = 0usize;
    let mut completed = true;
    let mut previous: Option<OptimTrace> = None;
    let mut window: Vec<Evaluation> = Vec::new();

    for (kind, length) in [
        (StageKind::Unmitigated, spec.k0),
        (StageKind::Mitigated, spec.k1),
    ] {
        if length == 0 || !completed {
            continue;
        }
        let config = SpsaConfig {
            max_iterations: length,
            ..*spsa
        };
        let mut evals: Vec<Evaluation> = Vec::with_capacity(2 * length);
        let objective = |phases: &[f64]| -> Result<EnergyEstimate> {
            let e1 = probe.measure(phases, spec.eps1, &mut shot_rng)?;
            let eval = match (kind, spec.eps2) {
                (StageKind::Mitigated, Some(eps2)) => {
                    let e2 = probe.measure(phases, eps2, &mut shot_rng)?;
                    Evaluation {
                        e1,
                        e2: Some(e2),
                        objective: linear_zne(e1, e2, spec.eps1, eps2)?.as_energy(),
                    }
                }
                _ => Evaluation {
                    e1,
                    e2: None,
                    objective: e1,
                },
            };
            evals.push(eval);
            Ok(eval.objective)
        };
        let trace = match &previous {
            None => spsa::minimize(objective, &x0, &config, &mut spsa_rng)?,
            Some(trace) => {
                let (start, gains) = spsa::restart(trace, &config)?;
                spsa::resume(objective, &start, gains, &config, &mut spsa_rng)?
            }
        };

        let bases_per_eval = if kind == StageKind::Mitigated { 6 } else { 3 };
        // Evaluations of an aborted iteration were still measured.
        measurements += evals.len() * bases_per_eval;
        let offset = logs.len();
        let mut spent = logs.last().map_or(0, |l| l.measurements);
        for (record, pair) in trace.records.iter().zip(evals.chunks_exact(2)) {
            spent += 2 * bases_per_eval;
            logs.push(IterationLog {
                iteration: offset + record.iteration,
                stage: kind,
                e_eps1: 0.5 * (pair[0].e1.value + pair[1].e1.value),
                e_eps2: pair[0]
                    .e2
                    .zip(pair[1].e2)
                    .map(|(a, b)| 0.5 * (a.value + b.value)),
                estimate: record.estimate(),
                measurements: spent,
                params: phases4(&record.params),
            });
        }
        completed = trace.termination == Termination::Completed && !trace.records.is_empty();
        let kept = 2 * trace.records.len();
        window = evals[kept.saturating_sub(2 * TRAILING_WINDOW)..kept].to_vec();
        previous = Some(trace);
    }

    let last = logs.last().ok_or(Error::EmptyTrace)?;
    let final_stage_mitigated = last.stage == StageKind::Mitigated;
    let final_energy = mean_estimate(window.iter().map(|e| e.objective));
    let last_iterate = mean_estimate(window[window.len() - 2..].iter().map(|e| e.objective));
    let mitigated = match spec.eps2 {
        Some(eps2) if final_stage_mitigated => {
            let e1 = mean_estimate(window.iter().map(|e| e.e1));
            let e2 = mean_estimate(window.iter().filter_map(|e| e.e2));
            Some(linear_zne(e1, e2, spec.eps1, eps2)?)
        }
        _ => None,
    };
    if completed && measurements != measurements_used(&schedule) {
        return Err(Error::InvalidSchedule(format!(
            "budget audit failed: measured {measurements}, expected {}",
            measurements_used(&schedule)
        )));
    }
    Ok(VqeRunResult {
        spec: *spec,
        seed,
        schedule,
        final_energy,
        last_iterate,
        mitigated,
        final_phases: last.params,
        iterations: logs,
        measurements,
        completed,
    })
}

fn phases4(params: &[f64]) -> [f64; 4] {
    std::array::from_fn(|i| params[i])
}

/// Mean of independent estimates with the propagated std.
pub fn mean_estimate(values: impl Iterator<Item = EnergyEstimate> + Clone) -> EnergyEstimate {
    let n = values.clone().count().max(1) as f64;
    let value = values.clone().map(|e| e.value).sum::<f64>() / n;
    let var = values.map(|e| e.variance()).sum::<f64>() / (n * n);
    EnergyEstimate {
        value,
        std: var.sqrt(),
    }
}

/// Mean of the last [`TRAILING_WINDOW`] values.
pub fn trailing_mean(values: &[f64]) -> f64 {
    let tail = &values[values.len().saturating_sub(TRAILING_WINDOW)..];
    tail.iter().sum::<f64>() / tail.len().max(1) as f64
}
