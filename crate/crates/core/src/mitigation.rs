//! Zero-noise extrapolation and the deferred-mitigation budget.

use crate::error::{Error, Result};
use crate::schwinger::EnergyEstimate;

/// Strictly increasing noise levels in `(0, 1]`, at least two of them.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseLevels(Vec<f64>);

impl NoiseLevels {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::InvalidNoiseLevels("need at least two levels".into()));
        }
        if levels.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
            return Err(Error::InvalidNoiseLevels(format!(
                "levels must lie in (0, 1]: {levels:?}"
            )));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidNoiseLevels(format!(
                "levels must increase strictly: {levels:?}"
            )));
        }
        Ok(Self(levels))
    }

    pub fn levels(&self) -> &[f64] {
        &self.0
    }
}

/// Extrapolated value with the fitted line `E(ε) = c₁ + c₂ε`; `value == c1`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ZneEstimate {
    pub value: f64,
    pub std: f64,
    pub c1: f64,
    pub c2: f64,
}

impl ZneEstimate {
    pub fn as_energy(&self) -> EnergyEstimate {
        EnergyEstimate {
            value: self.value,
            std: self.std,
        }
    }
}

/// `ε(θ) = 2 sin²(2θ) / (1 + sin²(2θ))` for a half-wave plate at angle θ.
pub fn epsilon_of_theta(theta: f64) -> f64 {
    let s = (2.0 * theta).sin().powi(2);
    (2.0 * s / (1.0 + s)).min(1.0)
}

fn check_pair(eps1: f64, eps2: f64) -> Result<()> {
    if !(eps1.is_finite() && eps2.is_finite()) {
        return Err(Error::NonFinite("noise level"));
    }
    if eps1 == eps2 {
        return Err(Error::SingularExtrapolation(eps1));
    }
    Ok(())
}

/// `Var[E_est] = (ε₂² var₁ + ε₁² var₂) / (ε₂ − ε₁)²`.
pub fn zne_variance(var1: f64, var2: f64, eps1: f64, eps2: f64) -> Result<f64> {
    check_pair(eps1, eps2)?;
    if !(var1 >= 0.0 && var2 >= 0.0) {
        return Err(Error::NonFinite("variance"));
    }
    Ok((eps2 * eps2 * var1 + eps1 * eps1 * var2) / (eps2 - eps1).powi(2))
}

/// Two-point linear extrapolation to zero noise.
pub fn linear_zne(
    e1: EnergyEstimate,
    e2: EnergyEstimate,
    eps1: f64,
    eps2: f64,
) -> Result<ZneEstimate> {
    check_pair(eps1, eps2)?;
    let gap = eps2 - eps1;
    let value = (eps2 * e1.value - eps1 * e2.value) / gap;
    let var = zne_variance(e1.variance(), e2.variance(), eps1, eps2)?;
    Ok(ZneEstimate {
        value,
        std: var.sqrt(),
        c1: value,
        c2: (e2.value - e1.value) / gap,
    })
}

/// Weighted least-squares line through `(ε, E, var)` points, evaluated at
/// ε = 0. Weights are `1/var` when every variance is positive, uniform
/// otherwise. The reported std propagates the given variances through the
/// linear estimator, so two points reproduce [`linear_zne`].
pub fn lsq_extrapolate(points: &[(f64, f64, f64)]) -> Result<ZneEstimate> {
    if points.len() < 2 {
        return Err(Error::InvalidNoiseLevels("need at least two points".into()));
    }
    if points
        .iter()
        .any(|(e, v, var)| !(e.is_finite() && v.is_finite()) || !(*var >= 0.0))
    {
        return Err(Error::NonFinite("extrapolation point"));
    }
    let weighted = points.iter().all(|p| p.2 > 0.0);
    let weights: Vec<f64> = points
        .iter()
        .map(|p| if weighted { 1.0 / p.2 } else { 1.0 })
        .collect();
    let sw: f64 = weights.iter().sum();
    let mean_eps = points
        .iter()
        .zip(&weights)
        .map(|(p, w)| w * p.0)
        .sum::<f64>()
        / sw;
    let sxx: f64 = points
        .iter()
        .zip(&weights)
        .map(|(p, w)| w * (p.0 - mean_eps).powi(2))
        .sum();
    if !(sxx > 0.0) {
        return Err(Error::SingularExtrapolation(points[0].0));
    }
    // Slope and intercept are linear in the E values: cᵢ coefficients.
    let slope_coef: Vec<f64> = points
        .iter()
        .zip(&weights)
        .map(|(p, w)| w * (p.0 - mean_eps) / sxx)
        .collect();
    let intercept_coef: Vec<f64> = weights
        .iter()
        .zip(&slope_coef)
        .map(|(w, s)| w / sw - mean_eps * s)
        .collect();
    let c1: f64 = intercept_coef
        .iter()
        .zip(points)
        .map(|(c, p)| c * p.1)
        .sum();
    let c2: f64 = slope_coef.iter().zip(points).map(|(c, p)| c * p.1).sum();
    let var: f64 = intercept_coef
        .iter()
        .zip(points)
        .map(|(c, p)| c * c * p.2)
        .sum();
    Ok(ZneEstimate {
        value: c1,
        std: var.sqrt(),
        c1,
        c2,
    })
}

/// `k₀` unmitigated iterations followed by `k₁` mitigated ones; each
/// unmitigated iteration costs `bases_per_iteration` basis measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct MitigationSchedule {
    pub k0: usize,
    pub k1: usize,
    pub bases_per_iteration: usize,
}

/// Basis measurements per unmitigated SPSA iteration: 2 evaluations × 3 bases.
pub const BASES_PER_ITERATION: usize = 6;

impl MitigationSchedule {
    pub fn new(k0: usize, k1: usize, bases_per_iteration: usize) -> Result<Self> {
        if k0 + k1 == 0 {
            return Err(Error::InvalidSchedule("k0 + k1 must be at least 1".into()));
        }
        if bases_per_iteration == 0 {
            return Err(Error::InvalidSchedule("n must be at least 1".into()));
        }
        Ok(Self {
            k0,
            k1,
            bases_per_iteration,
        })
    }

    pub fn iterations(&self) -> usize {
        self.k0 + self.k1
    }

    /// Mitigated iterations that fit in a budget of `budget` measurements
    /// after `k0` unmitigated ones, if the split is exact.
    pub fn mitigated_for_budget(budget: usize, k0: usize, n: usize) -> Option<usize> {
        let spent = k0.checked_mul(n)?;
        let rest = budget.checked_sub(spent)?;
        (n > 0 && rest % (2 * n) == 0).then_some(rest / (2 * n))
    }
}

/// `N = n·k₀ + 2n·k₁`.
pub fn measurements_used(schedule: &MitigationSchedule) -> usize {
    let n = schedule.bases_per_iteration;
    n * schedule.k0 + 2 * n * schedule.k1
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn exact(v: f64) -> EnergyEstimate {
        EnergyEstimate::exact(v)
    }

    #[test]
    fn epsilon_of_theta_values() {
        assert_eq!(epsilon_of_theta(0.0), 0.0);
        assert_abs_diff_eq!(epsilon_of_theta(PI / 4.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(epsilon_of_theta(10f64.to_radians()), 0.2095, epsilon = 1e-4);
    }

    #[test]
    fn linear_examples() {
        let z = linear_zne(exact(3.0), exact(5.0), 1.0, 2.0).unwrap();
        assert_abs_diff_eq!(z.value, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(z.c2, 2.0, epsilon = 1e-15);
        let z = linear_zne(exact(-7.9), exact(-7.9), 0.18, 0.29).unwrap();
        assert_abs_diff_eq!(z.value, -7.9, epsilon = 1e-12);
        assert_eq!(
            linear_zne(exact(1.0), exact(2.0), 0.2, 0.2),
            Err(Error::SingularExtrapolation(0.2))
        );
    }

    #[test]
    fn curved_model_error_is_second_order() {
        // E(ε) = c₁ + c₂·2ε/(2−ε). Substituting into the two-point rule,
        // the line misses c₁ by exactly −2c₂·ε₁ε₂/((2−ε₁)(2−ε₂)).
        let (c1, c2) = (-9.2, 6.0);
        let model = |e: f64| c1 + c2 * 2.0 * e / (2.0 - e);
        for (e1, e2) in [(0.01, 0.02), (0.05, 0.08), (0.18, 0.29)] {
            let z = linear_zne(exact(model(e1)), exact(model(e2)), e1, e2).unwrap();
            let predicted = -2.0 * c2 * e1 * e2 / ((2.0 - e1) * (2.0 - e2));
            assert_abs_diff_eq!(z.value - c1, predicted, epsilon = 1e-12);
        }
    }

    #[test]
    fn variance_examples() {
        let v = zne_variance(1.0, 1.0, 0.18, 0.29).unwrap();
        assert_abs_diff_eq!(v, (0.0841 + 0.0324) / 0.0121, epsilon = 1e-12);
        assert_abs_diff_eq!(v, 9.628, epsilon = 1e-3);
        assert_abs_diff_eq!(v.sqrt(), 3.10, epsilon = 5e-3);
        assert_abs_diff_eq!(
            zne_variance(1.0, 1.0, 1.0, 2.0).unwrap(),
            5.0,
            epsilon = 1e-15
        );
        assert!(zne_variance(1.0, 1.0, 0.3, 0.3).is_err());
    }

    #[test]
    fn variance_blows_up_as_gap_closes() {
        let mut last = 0.0;
        for k in 0..30 {
            let gap = 0.5 * 0.7f64.powi(k);
            let v = zne_variance(1.0, 2.0, 0.2, 0.2 + gap).unwrap();
            assert!(v > last);
            last = v;
        }
        assert!(last > 1e8);
    }

    #[test]
    fn lsq_matches_two_point() {
        let pts = [(0.18, -7.4, 0.04), (0.29, -6.4, 0.09)];
        let lsq = lsq_extrapolate(&pts).unwrap();
        let two = linear_zne(
            EnergyEstimate {
                value: -7.4,
                std: 0.2,
            },
            EnergyEstimate {
                value: -6.4,
                std: 0.3,
            },
            0.18,
            0.29,
        )
        .unwrap();
        assert_abs_diff_eq!(lsq.value, two.value, epsilon = 1e-12);
        assert_abs_diff_eq!(lsq.std, two.std, epsilon = 1e-12);
        assert_abs_diff_eq!(lsq.c2, two.c2, epsilon = 1e-12);
    }

    #[test]
    fn lsq_collinear() {
        let pts: Vec<_> = [0.1, 0.2, 0.35, 0.5, 0.9]
            .iter()
            .map(|&e| (e, 2.0 - 3.0 * e, 0.01))
            .collect();
        let z = lsq_extrapolate(&pts).unwrap();
        assert_abs_diff_eq!(z.value, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(z.c2, -3.0, epsilon = 1e-12);
        assert!(lsq_extrapolate(&[(0.3, 1.0, 0.1), (0.3, 2.0, 0.1)]).is_err());
        assert!(lsq_extrapolate(&[(0.3, 1.0, 0.1)]).is_err());
    }

    #[test]
    fn budget() {
        let s = MitigationSchedule::new(10, 5, 6).unwrap();
        assert_eq!(measurements_used(&s), 120);
        assert_eq!(
            measurements_used(&MitigationSchedule::new(7, 0, 6).unwrap()),
            42
        );
        assert_eq!(
            measurements_used(&MitigationSchedule::new(0, 7, 6).unwrap()),
            84
        );
        assert!(MitigationSchedule::new(0, 0, 6).is_err());
        assert_eq!(
            MitigationSchedule::mitigated_for_budget(120, 18, 6),
            Some(1)
        );
        assert_eq!(MitigationSchedule::mitigated_for_budget(120, 17, 6), None);
        assert_eq!(MitigationSchedule::mitigated_for_budget(120, 21, 6), None);
        assert_eq!(
            MitigationSchedule::mitigated_for_budget(120, 0, 6),
            Some(10)
        );
    }

    #[test]
    fn noise_levels() {
        assert!(NoiseLevels::new(vec![0.18, 0.29]).is_ok());
        assert!(NoiseLevels::new(vec![0.18]).is_err());
        assert!(NoiseLevels::new(vec![0.29, 0.18]).is_err());
        assert!(NoiseLevels::new(vec![0.0, 0.18]).is_err());
        assert!(NoiseLevels::new(vec![0.5, 1.2]).is_err());
    }
}
