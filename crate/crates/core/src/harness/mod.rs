//! Experiment drivers: data ingestion, report emission, the pendulum case
//! study, and the random-system sweep.

pub mod ingest;
pub mod report;
pub mod study;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datadriven::{dispatch_rho_max, DataDrivenError, ResilienceReport};
use crate::numlin::{NumericalConfig, NumlinError};
use crate::oracle::{sparse_obs_index_enum, sparse_obs_index_eig};
use crate::sysmodel::{
    build_data_matrices, inject_attack, pendulum_system, simulate, AttackSpec, AttackStrategy,
    ModelError, ScenarioTag,
};

pub use ingest::{ingest_trajectory, read_numeric_csv, write_matrix_csv};
pub use report::{text_summary, ReportJson, REPORT_SCHEMA};
pub use study::{
    aggregate_csv, run_random_study, study_csv, AggregateRow, StudyConfig, StudyOutput, StudyRow,
    STUDY_CSV_HEADER, THREADS_ENV,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed CSV `{path}`: {detail}")]
    MalformedCsv { path: PathBuf, detail: String },
    #[error("non-numeric cell in `{path}` at row {row}, column {col}: `{token}`")]
    NonNumericCell {
        path: PathBuf,
        row: usize,
        col: usize,
        token: String,
    },
    #[error("dimension mismatch: {detail}")]
    DimensionMismatch { detail: String },
    #[error("invalid configuration: {detail}")]
    InvalidConfig { detail: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Data(#[from] DataDrivenError),
    #[error(transparent)]
    Numerics(#[from] NumlinError),
}

impl HarnessError {
    /// Is this an ingestion problem (as opposed to an analysis outcome)?
    pub fn is_ingestion(&self) -> bool {
        matches!(
            self,
            HarnessError::Io { .. }
                | HarnessError::MalformedCsv { .. }
                | HarnessError::NonNumericCell { .. }
                | HarnessError::DimensionMismatch { .. }
        )
    }
}

/// Inputs for a one-shot analysis of an ingested dataset.
#[derive(Debug, Clone)]
pub struct AnalyzeConfig {
    pub x_path: PathBuf,
    pub y_path: PathBuf,
    pub scenario: ScenarioTag,
    pub assumed_l: Option<usize>,
    pub tolerances: NumericalConfig,
}

/// Top-level experiment selection.
#[derive(Debug, Clone)]
pub enum ExperimentConfig {
    Analyze(AnalyzeConfig),
    Pendulum { out_dir: PathBuf },
    RandomStudy(StudyConfig),
}

/// A finished analysis: the report plus both renderings.
#[derive(Debug, Clone)]
pub struct AnalyzeOutcome {
    pub report: ResilienceReport,
    pub json: String,
    pub summary: String,
}

/// Ingest a state/output CSV pair, compute the data-driven index and render
/// the report.
pub fn analyze(cfg: &AnalyzeConfig) -> Result<AnalyzeOutcome, HarnessError> {
    cfg.tolerances
        .validate()
        .map_err(|e| HarnessError::InvalidConfig {
            detail: e.to_string(),
        })?;
    let (states, outputs) = ingest_trajectory(&cfg.x_path, &cfg.y_path)?;
    let data = build_data_matrices(&states, &outputs, cfg.scenario)?;
    let report = dispatch_rho_max(&data, cfg.assumed_l, &cfg.tolerances)?;
    let json = ReportJson::from_report(&report).to_json_string();
    let summary = text_summary(&report);
    Ok(AnalyzeOutcome {
        report,
        json,
        summary,
    })
}

/// JSON bundle summarizing a pendulum run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendulumBundle {
    pub schema: String,
    pub delta_max: i64,
    pub rho_free: i64,
    pub rho_poisoned: i64,
    pub rho_poisoned_l_admissible: bool,
    pub attacked_sensor: usize,
    pub assumed_l: usize,
    pub horizon: usize,
}

/// Everything the pendulum driver produced.
#[derive(Debug, Clone)]
pub struct PendulumRun {
    pub bundle: PendulumBundle,
    pub free_report: ResilienceReport,
    pub poisoned_report: ResilienceReport,
}

/// The pendulum case study: simulate 100 steps from (0.1, 0), compute the
/// model-based index by both routes, the data-driven index from attack-free
/// data, then zero out the second sensor and recompute from poisoned data
/// with an assumed budget of one. Writes the three trajectory CSVs and the
/// JSON bundle into `out_dir` when given.
pub fn run_pendulum(out_dir: Option<&Path>) -> Result<PendulumRun, HarnessError> {
    let cfg = NumericalConfig::default();
    let sys = pendulum_system();
    let x0 = nalgebra::DVector::from_vec(vec![0.1, 0.0]);
    let horizon = 100;
    let traj = simulate(&sys, &x0, horizon)?;

    let by_enum = sparse_obs_index_enum(&sys, &cfg)?;
    let by_eig = sparse_obs_index_eig(&sys, &cfg)?;
    if by_enum.index != by_eig.index {
        return Err(HarnessError::InvalidConfig {
            detail: format!(
                "model-based index routes disagree: {} vs {}",
                by_enum.index, by_eig.index
            ),
        });
    }

    let free_data = build_data_matrices(
        traj.states(),
        traj.nominal_outputs(),
        ScenarioTag::AttackFree,
    )?;
    let free_report = dispatch_rho_max(&free_data, None, &cfg)?;

    let attacked_sensor = 1; // the sensor reading angle + angular velocity
    let assumed_l = 1;
    let spec = AttackSpec::new(vec![attacked_sensor], assumed_l, AttackStrategy::Zeroing)?;
    let (poisoned, _) = inject_attack(&traj, &sys, &spec)?;
    let pois_data = build_data_matrices(traj.states(), &poisoned, ScenarioTag::Poisoned)?;
    let poisoned_report = dispatch_rho_max(&pois_data, Some(assumed_l), &cfg)?;

    let bundle = PendulumBundle {
        schema: REPORT_SCHEMA.to_string(),
        delta_max: by_enum.index,
        rho_free: free_report.rho_max,
        rho_poisoned: poisoned_report.rho_max,
        rho_poisoned_l_admissible: poisoned_report.l_admissible.unwrap_or(false),
        attacked_sensor,
        assumed_l,
        horizon,
    };

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        write_matrix_csv(&dir.join("x.csv"), traj.states())?;
        write_matrix_csv(&dir.join("y_attack_free.csv"), traj.nominal_outputs())?;
        write_matrix_csv(&dir.join("y_poisoned.csv"), &poisoned)?;
        let json =
            serde_json::to_string_pretty(&bundle).expect("bundle serialization cannot fail");
        std::fs::write(dir.join("pendulum.json"), json).map_err(|source| HarnessError::Io {
            path: dir.join("pendulum.json"),
            source,
        })?;
    }

    Ok(PendulumRun {
        bundle,
        free_report,
        poisoned_report,
    })
}
