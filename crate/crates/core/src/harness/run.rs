use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ghost::run_gnn_with;
use crate::kernels::{Executor, ScheduleTrace};
use crate::perf::{account_trace, EnergyReport};
use crate::tensor::max_relative_error;
use crate::tron::run_transformer_with;
use crate::{Mode, Real, RealMatrix};

use super::{SimConfig, Workload};

/// Accuracy figures computed on every run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    /// `max|float − quant| / max|float|`.
    pub float_vs_quant_max_rel_err: f64,
    /// Largest element-wise gap between the selected mode and the quantized reference.
    pub mode_vs_quant_max_abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub output: RealMatrix,
    pub trace: ScheduleTrace,
    pub report: EnergyReport,
    pub accuracy: Accuracy,
}

fn run_mode(workload: &Workload, cfg: &SimConfig, mode: Mode, seed: u64) -> Result<(RealMatrix, ScheduleTrace)> {
    let engine = cfg.engine_config::<Real>(seed)?;
    let mut exec = Executor::new(mode, &engine)?;
    match workload {
        Workload::Transformer { spec, weights, input } => run_transformer_with(spec, weights, input, &mut exec),
        Workload::Gnn { graph, spec, weights } => run_gnn_with(
            graph,
            spec,
            weights,
            cfg.ghost.lanes_v,
            cfg.ghost.partition_n,
            &mut exec,
        ),
    }
}

/// Digital execution without a trace. Only the two reference modes are accepted.
pub fn run_reference(workload: &Workload, cfg: &SimConfig, mode: Mode) -> Result<RealMatrix> {
    if mode == Mode::Photonic {
        return Err(Error::Unsupported {
            what: "reference mode",
            name: mode.to_string(),
        });
    }
    Ok(run_mode(workload, cfg, mode, 0)?.0)
}

/// Runs `workload` in `mode`, accounts its trace and compares it against
/// both digital references.
pub fn execute(workload: &Workload, cfg: &SimConfig, mode: Mode, seed: u64) -> Result<RunOutcome> {
    let (output, trace) = run_mode(workload, cfg, mode, seed)?;
    let report = account_trace(&trace, &cfg.cost)?;
    let float = match mode {
        Mode::FloatRef => output.clone(),
        _ => run_reference(workload, cfg, Mode::FloatRef)?,
    };
    let quant = match mode {
        Mode::QuantRef => output.clone(),
        _ => run_reference(workload, cfg, Mode::QuantRef)?,
    };
    let accuracy = Accuracy {
        float_vs_quant_max_rel_err: max_relative_error(&quant, &float),
        mode_vs_quant_max_abs_diff: output.max_abs_diff(&quant),
    };
    Ok(RunOutcome {
        output,
        trace,
        report,
        accuracy,
    })
}
