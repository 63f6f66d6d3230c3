use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perf::{stages_to_csv, trace_to_csv, EnergyReport, REPORT_CSV_HEADER};
use crate::tensor::{fmt_num, write_csv_matrix};
use crate::Mode;

use super::{execute, Accuracy, RunOutcome, SimConfig, WorkloadPaths};

/// Everything needed to repeat a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub subcommand: String,
    pub workload: WorkloadPaths,
    pub seed: u64,
    pub mode: Mode,
    pub config: SimConfig,
    pub version: String,
}

impl RunManifest {
    pub fn new(subcommand: &str, workload: WorkloadPaths, seed: u64, mode: Mode, config: SimConfig) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            workload,
            seed,
            mode,
            config,
            version: crate::VERSION.to_string(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn inputs(&self) -> BTreeMap<String, PathBuf> {
        self.workload
            .entries()
            .into_iter()
            .map(|(k, p)| (k.to_string(), p.to_path_buf()))
            .collect()
    }
}

/// Full breakdown written to `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub workload: String,
    pub mode: Mode,
    pub seed: u64,
    pub report: EnergyReport,
    pub accuracy: Accuracy,
    pub annotations: BTreeMap<String, u64>,
}

pub const REPORT_FILES: [&str; 7] = [
    "report.csv",
    "report.json",
    "trace.csv",
    "stages.csv",
    "stage_latency.csv",
    "output.csv",
    "manifest.json",
];

/// One-row `report.csv` contents.
pub fn report_csv(workload: &str, mode: Mode, seed: u64, report: &EnergyReport, acc: &Accuracy) -> String {
    let mut cells = vec![workload.to_string(), mode.to_string(), seed.to_string()];
    cells.extend(report.csv_cells());
    cells.push(fmt_num(acc.float_vs_quant_max_rel_err));
    cells.push(fmt_num(acc.mode_vs_quant_max_abs_diff));
    format!(
        "workload,mode,seed,{REPORT_CSV_HEADER},float_vs_quant_max_rel_err,mode_vs_quant_max_abs_diff\n{}\n",
        cells.join(",")
    )
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))
}

/// Writes the report files listed in [`REPORT_FILES`] into `outdir`.
pub fn emit_report(outcome: &RunOutcome, manifest: &RunManifest, outdir: &Path) -> Result<()> {
    std::fs::create_dir_all(outdir).map_err(|e| Error::io(outdir, e))?;
    let kind = manifest.workload.kind();
    write(
        outdir,
        "report.csv",
        &report_csv(kind, manifest.mode, manifest.seed, &outcome.report, &outcome.accuracy),
    )?;
    let doc = ReportDocument {
        workload: kind.to_string(),
        mode: manifest.mode,
        seed: manifest.seed,
        report: outcome.report.clone(),
        accuracy: outcome.accuracy,
        annotations: outcome.trace.annotations().clone(),
    };
    write(outdir, "report.json", &(to_json(&doc)? + "\n"))?;
    write(outdir, "trace.csv", &trace_to_csv(&outcome.trace))?;
    write(outdir, "stages.csv", &stages_to_csv(&outcome.report))?;
    write(outdir, "stage_latency.csv", &crate::perf::stage_latencies_to_csv(&outcome.trace))?;
    write_csv_matrix(outdir.join("output.csv"), &outcome.output)?;
    write(outdir, "manifest.json", &(to_json(manifest)? + "\n"))
}

fn to_json<S: Serialize>(v: &S) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|source| Error::Json {
        path: PathBuf::from("<report>"),
        source,
    })
}

/// Re-runs the manifest and writes a fresh report set into `outdir`.
pub fn replay(manifest: &RunManifest, outdir: &Path) -> Result<RunOutcome> {
    let workload = manifest.workload.load()?;
    let outcome = execute(&workload, &manifest.config, manifest.mode, manifest.seed)?;
    emit_report(&outcome, manifest, outdir)?;
    Ok(outcome)
}
