use photon_zne::harness::experiments::{deferred_heatmap, sweep_m, sweep_noise};
use photon_zne::harness::{ExperimentConfig, ShotMode};

fn small() -> ExperimentConfig {
    ExperimentConfig {
        runs: 4,
        k0: 4,
        k1: 6,
        shot_scale: ShotMode::Exact,
        ..ExperimentConfig::default()
    }
}

#[test]
fn zero_noise_point_is_its_own_extrapolation() {
    let cfg = ExperimentConfig {
        epsilon_grid: vec![0.0, 0.2],
        ..small()
    };
    let rows = sweep_noise(&cfg, -10.0, 3).unwrap();
    assert_eq!(rows[0].energies.mitigated, rows[0].energies.unmitigated);
    assert_ne!(rows[1].energies.mitigated, rows[1].energies.unmitigated);
    assert!((rows[1].eps2 - 0.322).abs() < 1e-12);
}

#[test]
fn noise_grid_must_stay_below_one_after_scaling() {
    let cfg = ExperimentConfig {
        epsilon_grid: vec![0.1, 0.7],
        ..small()
    };
    let err = sweep_noise(&cfg, -10.0, 3).unwrap_err();
    assert!(err.to_string().contains("0.7"), "{err}");
}

#[test]
fn sweeps_are_reproducible() {
    let cfg = small();
    let a = sweep_m(&cfg, &[-10.0, 0.0], 8).unwrap();
    let b = sweep_m(&cfg, &[-10.0, 0.0], 8).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, sweep_m(&cfg, &[-10.0, 0.0], 9).unwrap());
}

#[test]
fn deferred_grid_reference_column_and_audit() {
    let cfg = ExperimentConfig {
        budget_grid: vec![12, 24, 36],
        k0_grid: vec![0, 1, 2, 4],
        ..small()
    };
    let grid = deferred_heatmap(&cfg, -10.0, 5).unwrap();
    assert_eq!(grid.cells.len(), 12);
    for c in &grid.cells {
        assert_eq!(c.feasible(), c.k0 % 2 == 0 && 6 * c.k0 < c.budget, "({}, {})", c.budget, c.k0);
        if let Some(k1) = c.k1 {
            assert_eq!(6 * c.k0 + 12 * k1, c.budget);
        }
        if c.k0 == 0 {
            assert_eq!(c.relative_error, 1.0);
        }
    }
    assert_eq!(grid.audited_runs, cfg.runs);

    let no_reference = ExperimentConfig {
        k0_grid: vec![2, 4],
        ..cfg
    };
    assert!(deferred_heatmap(&no_reference, -10.0, 5).is_err());
}
