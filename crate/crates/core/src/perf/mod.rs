//! Cost model, trace accounting, operation counts and parameter sweeps.

mod cost;
mod opcount;
mod report;
mod sweep;

pub use cost::{CostTable, EventCost, TuningCosts};
pub use opcount::{gnn_op_count, transformer_op_count, TransformerOpCount};
pub use report::{
    account_trace, event_bits, event_energy_pj, parse_trace_csv, stage_latencies_to_csv,
    stages_to_csv, trace_from_csv, trace_to_csv, EnergyReport, StageBreakdown, REPORT_CSV_HEADER,
    STAGES_CSV_HEADER, TRACE_CSV_HEADER,
};
pub use sweep::{expand_grid, run_sweep, sweep_to_csv, BaseConfig, SweepGrid, SweepPoint, SweepRow};
