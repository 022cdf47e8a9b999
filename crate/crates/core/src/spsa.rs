//! Simultaneous perturbation stochastic approximation.
//!
//! Each iteration draws a Bernoulli ±1 direction Δ, evaluates the objective
//! at `x ± c_k Δ` and steps `x ← x − a_k ĝ` with
//! `ĝ_i = (E⁺ − E⁻)/(2 c_k Δ_i)`, `a_k = a/(k + 1 + A)^α` and
//! `c_k = c/(k + 1)^γ`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::processor::wrap_phase;
use crate::schwinger::EnergyEstimate;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpsaConfig {
    pub a: f64,
    pub c: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// Stability offset `A`.
    pub stability: f64,
    pub max_iterations: usize,
    /// Wrap parameters into `[0, 2π)` after every step.
    pub periodic: bool,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        Self::for_iterations(200)
    }
}

impl SpsaConfig {
    /// Tuned on the m = −10 VQE objective; see the README.
    pub const DEFAULT_A: f64 = 0.8;
    pub const DEFAULT_C: f64 = 0.1;

    /// Standard exponents, `A = K/4`.
    pub fn for_iterations(max_iterations: usize) -> Self {
        Self {
            a: Self::DEFAULT_A,
            c: Self::DEFAULT_C,
            alpha: 0.602,
            gamma: 0.101,
            stability: 0.25 * max_iterations as f64,
            max_iterations,
            periodic: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSpsaConfig(msg.to_string()));
        if !(self.a > 0.0 && self.a.is_finite()) {
            return bad("a must be positive");
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad("c must be positive");
        }
        if !(0.0 < self.gamma && self.gamma < self.alpha && self.alpha <= 1.0) {
            return bad("need 0 < gamma < alpha <= 1");
        }
        if !(self.stability >= 0.0 && self.stability.is_finite()) {
            return bad("stability offset must be non-negative");
        }
        Ok(())
    }

    pub fn schedule(&self) -> GainSchedule {
        GainSchedule {
            a: self.a,
            c: self.c,
            alpha: self.alpha,
            gamma: self.gamma,
            stability: self.stability,
        }
    }
}

/// Gain sequences counted from a fresh `k = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSchedule {
    a: f64,
    c: f64,
    alpha: f64,
    gamma: f64,
    stability: f64,
}

impl GainSchedule {
    pub fn step_gain(&self, k: usize) -> f64 {
        self.a / (k as f64 + 1.0 + self.stability).powf(self.alpha)
    }

    pub fn perturbation(&self, k: usize) -> f64 {
        self.c / (k as f64 + 1.0).powf(self.gamma)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Iterate after this iteration's update.
    pub params: Vec<f64>,
    pub e_plus: EnergyEstimate,
    pub e_minus: EnergyEstimate,
    /// Objective evaluations spent in this iteration.
    pub evaluations: usize,
}

impl IterationRecord {
    /// Mean of the two evaluations, the per-iteration energy estimate.
    pub fn estimate(&self) -> f64 {
        0.5 * (self.e_plus.value + self.e_minus.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Completed,
    /// The objective returned a non-finite value during this iteration.
    NonFinite {
        iteration: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimTrace {
    pub initial: Vec<f64>,
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
}

impl OptimTrace {
    pub fn evaluations(&self) -> usize {
        self.records.iter().map(|r| r.evaluations).sum()
    }

    pub fn last_params(&self) -> &[f64] {
        self.records.last().map_or(&self.initial, |r| &r.params)
    }
}

/// Runs `config.max_iterations` iterations from `x0` with a fresh gain
/// schedule. Errors from the objective are propagated; a non-finite value
/// stops the run and is reported through [`OptimTrace::termination`].
pub fn minimize<F, R>(
    objective: F,
    x0: &[f64],
    config: &SpsaConfig,
    rng: &mut R,
) -> Result<OptimTrace>
where
    F: FnMut(&[f64]) -> Result<EnergyEstimate>,
    R: Rng + ?Sized,
{
    config.validate()?;
    run(objective, x0, config, config.schedule(), rng)
}

fn run<F, R>(
    mut objective: F,
    x0: &[f64],
    config: &SpsaConfig,
    gains: GainSchedule,
    rng: &mut R,
) -> Result<OptimTrace>
where
    F: FnMut(&[f64]) -> Result<EnergyEstimate>,
    R: Rng + ?Sized,
{
    if x0.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("initial parameters"));
    }
    let mut x = x0.to_vec();
    if config.periodic {
        x.iter_mut().for_each(|p| *p = wrap_phase(*p));
    }
    let mut trace = OptimTrace {
        initial: x.clone(),
        records: Vec::with_capacity(config.max_iterations),
        termination: Termination::Completed,
    };
    let mut probe = vec![0.0; x.len()];
    for k in 0..config.max_iterations {
        let ck = gains.perturbation(k);
        let delta: Vec<f64> = (0..x.len())
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();

        for ((p, xi), d) in probe.iter_mut().zip(&x).zip(&delta) {
            *p = xi + ck * d;
        }
        let e_plus = objective(&probe)?;
        for ((p, xi), d) in probe.iter_mut().zip(&x).zip(&delta) {
            *p = xi - ck * d;
        }
        let e_minus = objective(&probe)?;
        if !(e_plus.value.is_finite() && e_minus.value.is_finite()) {
            trace.termination = Termination::NonFinite { iteration: k };
            break;
        }

        let ak = gains.step_gain(k);
        let diff = (e_plus.value - e_minus.value) / (2.0 * ck);
        for (xi, d) in x.iter_mut().zip(&delta) {
            *xi -= ak * diff / d;
            if config.periodic {
                *xi = wrap_phase(*xi);
            }
        }
        trace.records.push(IterationRecord {
            iteration: k,
            params: x.clone(),
            e_plus,
            e_minus,
            evaluations: 2,
        });
    }
    Ok(trace)
}

/// Starting point and a fresh gain schedule for a follow-up stage.
pub fn restart(trace: &OptimTrace, config: &SpsaConfig) -> Result<(Vec<f64>, GainSchedule)> {
    let last = trace.records.last().ok_or(Error::EmptyTrace)?;
    config.validate()?;
    Ok((last.params.clone(), config.schedule()))
}

/// Continues from a [`restart`] point for `config.max_iterations` iterations.
pub fn resume<F, R>(
    objective: F,
    x0: &[f64],
    gains: GainSchedule,
    config: &SpsaConfig,
    rng: &mut R,
) -> Result<OptimTrace>
where
    F: FnMut(&[f64]) -> Result<EnergyEstimate>,
    R: Rng + ?Sized,
{
    config.validate()?;
    run(objective, x0, config, gains, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::seeded_rng;

    fn quadratic(x: &[f64]) -> Result<EnergyEstimate> {
        Ok(EnergyEstimate::exact(x.iter().map(|v| v * v).sum()))
    }

    fn flat_config(iterations: usize) -> SpsaConfig {
        SpsaConfig {
            a: 0.2,
            periodic: false,
            ..SpsaConfig::for_iterations(iterations)
        }
    }

    #[test]
    fn converges_on_quadratic() {
        let x0 = [0.9, -0.7, 0.4, -1.0];
        let initial: f64 = x0.iter().map(|v| v * v).sum();
        let mut rng = seeded_rng(3, 0);
        let trace = minimize(quadratic, &x0, &flat_config(200), &mut rng).unwrap();
        let last: f64 = trace.last_params().iter().map(|v| v * v).sum();
        assert!(last < 1e-2 * initial, "{last} vs {initial}");
        assert_eq!(trace.termination, Termination::Completed);
    }

    #[test]
    fn negligible_gain_keeps_parameters() {
        let x0 = [0.3, 1.2, 2.0, 5.5];
        let config = SpsaConfig {
            a: f64::EPSILON,
            ..SpsaConfig::for_iterations(50)
        };
        let mut rng = seeded_rng(9, 0);
        let trace = minimize(quadratic, &x0, &config, &mut rng).unwrap();
        for (a, b) in trace.last_params().iter().zip(x0) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn two_evaluations_per_iteration() {
        let mut calls = 0;
        let mut rng = seeded_rng(1, 0);
        let trace = minimize(
            |x| {
                calls += 1;
                quadratic(x)
            },
            &[0.5; 4],
            &flat_config(37),
            &mut rng,
        )
        .unwrap();
        assert_eq!(calls, 74);
        assert_eq!(trace.evaluations(), 74);
        assert_eq!(trace.records.len(), 37);
    }

    #[test]
    fn deterministic_given_seed() {
        let run = |seed| {
            let mut rng = seeded_rng(seed, 4);
            minimize(
                quadratic,
                &[0.5, 0.1, -0.3, 0.8],
                &flat_config(30),
                &mut rng,
            )
            .unwrap()
        };
        assert_eq!(run(5), run(5));
        assert_ne!(run(5), run(6));
    }

    #[test]
    fn non_finite_objective_stops_run() {
        let mut calls = 0;
        let mut rng = seeded_rng(1, 0);
        let trace = minimize(
            |x| {
                calls += 1;
                if calls > 10 {
                    Ok(EnergyEstimate::exact(f64::NAN))
                } else {
                    quadratic(x)
                }
            },
            &[0.5; 4],
            &flat_config(20),
            &mut rng,
        )
        .unwrap();
        assert_eq!(trace.records.len(), 5);
        assert_eq!(trace.termination, Termination::NonFinite { iteration: 5 });
    }

    #[test]
    fn restart_uses_last_iterate_and_fresh_gains() {
        let config = flat_config(12);
        let mut rng = seeded_rng(2, 0);
        let trace = minimize(quadratic, &[0.5; 4], &config, &mut rng).unwrap();
        let (x, gains) = restart(&trace, &config).unwrap();
        assert_eq!(x, trace.records[11].params);
        let expected = config.a / (1.0 + config.stability).powf(config.alpha);
        assert_eq!(gains.step_gain(0), expected);

        let second = resume(quadratic, &x, gains, &flat_config(7), &mut rng).unwrap();
        assert_eq!(trace.evaluations() + second.evaluations(), 2 * (12 + 7));

        let empty = OptimTrace {
            initial: vec![0.0],
            records: vec![],
            termination: Termination::Completed,
        };
        assert_eq!(restart(&empty, &config), Err(Error::EmptyTrace));
    }

    #[test]
    fn phases_stay_wrapped() {
        let mut rng = seeded_rng(8, 0);
        let config = SpsaConfig {
            a: 5.0,
            ..SpsaConfig::for_iterations(30)
        };
        let trace = minimize(quadratic, &[6.2, 0.1, 3.0, -2.0], &config, &mut rng).unwrap();
        for r in &trace.records {
            assert!(r
                .params
                .iter()
                .all(|p| (0.0..std::f64::consts::TAU).contains(p)));
        }
    }

    #[test]
    fn config_validation() {
        let mut c = SpsaConfig::default();
        assert!(c.validate().is_ok());
        c.gamma = 0.7;
        assert!(c.validate().is_err());
        let c = SpsaConfig {
            a: 0.0,
            ..SpsaConfig::default()
        };
        assert!(c.validate().is_err());
        let c = SpsaConfig {
            alpha: 1.2,
            ..SpsaConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
