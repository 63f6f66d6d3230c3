//! Functional semantics of the photonic compute primitives.

mod activation;
mod engine;
mod exec;
mod ops;
mod quant;
mod trace;

pub use activation::{
    activate, exact_softmax, lut_exp, lut_softmax_values, Activation, LUT_ENTRIES, LUT_RANGE,
};
pub use exec::{layer_norm_row, Executor, LnParams, LN_EPS};
pub use engine::{EngineSettings, PhotonicEngine, PhotonicEngineConfig};
pub use ops::{matmul_event_counts, MatmulEventCounts};
pub use quant::{
    dequantize, dequantize_acc, fake_quantize, qmax, quantize, reference_matmul, QuantSpec,
    QuantTensor,
};
pub use trace::{EventKind, ScheduleTrace, StageLatency, TraceEvent};
