//! Experiment orchestration: VQE runs, sweeps, the deferred-mitigation grid
//! and file output.

pub mod config;
pub mod experiments;
pub mod output;
pub mod vqe;

pub use config::{ExperimentConfig, MassValues, ShotMode};
pub use experiments::{
    deferred_heatmap, diag, hom_scan, sweep_m, sweep_noise, DeferredCell, DiagReport, HomRow,
    MeanStd, RelativeErrorGrid, StrategyPair, SweepMRow, SweepNoiseRow,
};
pub use vqe::{run_vqe, IterationLog, RunSeed, RunSpec, StageKind, VqeRunResult};
