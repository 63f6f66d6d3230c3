//! Transformer inference on the photonic kernels.
//!
//! Attention scores use the decomposition `Q·Kᵀ = (Q·W_Kᵀ)·Xᵀ`: `Xᵀ` and
//! `W_Kᵀ/√d_k` are prepared offline, so both products stream through the MR
//! banks and `K` is never materialized.

use crate::error::{Error, Result};
use crate::kernels::{EventKind, Executor, PhotonicEngineConfig, ScheduleTrace};
use crate::scalar::Scalar;
use crate::tensor::Matrix;
use crate::Mode;

use super::{AttentionWeights, FfnWeights, HeadWeights, TransformerModelSpec, TransformerWeights};

/// Bank arrays per attention head: two each for `Q`, the chained score
/// products and `V`, one for `P·V`.
pub const BANK_ARRAYS_PER_HEAD: u64 = 7;

#[derive(Debug, Clone, PartialEq)]
pub struct OfflineOperands<T> {
    /// Source of keys and values.
    pub x: Matrix<T>,
    pub x_t: Matrix<T>,
    /// `W_Kᵀ/√d_k`, one per head.
    pub w_kt_scaled: Vec<Matrix<T>>,
}

impl<T: Scalar> OfflineOperands<T> {
    pub fn prepare(x: &Matrix<T>, attn: &AttentionWeights<T>) -> Result<Self> {
        let mut w_kt_scaled = Vec::with_capacity(attn.heads.len());
        for h in &attn.heads {
            if h.w_k.rows() != x.cols() {
                return Err(Error::ShapeMismatch {
                    context: "prepare_offline_operands",
                    left: x.shape(),
                    right: h.w_k.shape(),
                });
            }
            let root = T::from_count(h.w_k.cols() as i64).sqrt();
            w_kt_scaled.push(h.w_k.transpose().map(|v| v / root));
        }
        Ok(Self {
            x: x.clone(),
            x_t: x.transpose(),
            w_kt_scaled,
        })
    }
}

/// Digital preprocessing of the attention operands, stored to memory.
pub fn prepare_offline_operands<T: Scalar>(
    x: &Matrix<T>,
    attn: &AttentionWeights<T>,
    exec: &mut Executor<T>,
    trace: &mut ScheduleTrace,
) -> Result<OfflineOperands<T>> {
    let ops = OfflineOperands::prepare(x, attn)?;
    let bits = exec.bits() as u64;
    let mut elems = (ops.x_t.rows() * ops.x_t.cols()) as u64;
    for w in &ops.w_kt_scaled {
        elems += (w.rows() * w.cols()) as u64;
    }
    exec.record(trace, EventKind::MemWrite, 1 + ops.w_kt_scaled.len() as u64, elems * bits);
    if let Some(e) = exec.engine() {
        let l = e.config().latency(EventKind::MemWrite);
        trace.add_latency(l);
    }
    Ok(ops)
}

/// `(Q·W_Kᵀ/√d_k)·Xᵀ` with `Q = x_q·W_Q`.
pub fn attention_scores_decomposed<T: Scalar>(
    x_q: &Matrix<T>,
    head: &HeadWeights<T>,
    ops: &OfflineOperands<T>,
    h: usize,
    exec: &mut Executor<T>,
    trace: &mut ScheduleTrace,
) -> Result<Matrix<T>> {
    let w_kt = ops.w_kt_scaled.get(h).ok_or(Error::IndexOutOfRange {
        index: h,
        len: ops.w_kt_scaled.len(),
    })?;
    let q = exec.matmul(x_q, &head.w_q, trace)?;
    let qk = exec.matmul(&q, w_kt, trace)?;
    exec.matmul(&qk, &ops.x_t, trace)
}

/// One scaled dot-product attention head. `causal` masks future positions.
pub fn attention_head<T: Scalar>(
    x_q: &Matrix<T>,
    head: &HeadWeights<T>,
    ops: &OfflineOperands<T>,
    h: usize,
    causal: bool,
    exec: &mut Executor<T>,
    trace: &mut ScheduleTrace,
) -> Result<Matrix<T>> {
    let mut scores = attention_scores_decomposed(x_q, head, ops, h, exec, trace)?;
    if causal {
        for i in 0..scores.rows() {
            for j in (i + 1)..scores.cols() {
                scores[(i, j)] = T::neg_infinity();
            }
        }
    }
    let v = exec.matmul(&ops.x, &head.w_v, trace)?;
    let p = exec.softmax_rows(&scores, trace)?;
    let out = exec.matmul(&p, &v, trace)?;
    exec.annotate(trace, "bank_arrays.attention_head", BANK_ARRAYS_PER_HEAD);
    Ok(out)
}

/// Multi-head attention block: heads, concatenation, `W_O`, residual add
/// and layer norm. `kv` supplies keys and values (`x_q` itself for
/// self-attention). Heads run as concurrent lanes.
#[allow(clippy::too_many_arguments)]
pub fn mha_forward<T: Scalar>(
    x_q: &Matrix<T>,
    kv: &Matrix<T>,
    attn: &AttentionWeights<T>,
    causal: bool,
    label: &str,
    exec: &mut Executor<T>,
    trace: &mut ScheduleTrace,
) -> Result<Matrix<T>> {
    exec.begin_stage(trace, format!("{label}.offline"));
    let ops = prepare_offline_operands(kv, attn, exec, trace)?;
    let mut outs = Vec::with_capacity(attn.heads.len());
    let mut lanes = Vec::with_capacity(attn.heads.len());
    for (h, hw) in attn.heads.iter().enumerate() {
        let mut lane = ScheduleTrace::new();
        outs.push(attention_head(x_q, hw, &ops, h, causal, exec, &mut lane)?);
        lanes.push(lane);
    }
    exec.merge(trace, &format!("{label}.heads"), lanes);

    exec.begin_stage(trace, format!("{label}.out"));
    let concat = Matrix::hconcat(&outs)?;
    let projected = exec.matmul(&concat, &attn.w_o, trace)?;
    let sum = exec.residual_add(x_q, &projected, trace)?;
    match &attn.ln {
        Some(ln) => exec.layer_norm(&sum, ln, trace),
        None => Ok(sum),
    }
}

/// `relu(x·W_1)·W_2`.
pub fn ffn_forward<T: Scalar>(
    x: &Matrix<T>,
    ffn: &FfnWeights<T>,
    exec: &mut Executor<T>,
    trace: &mut ScheduleTrace,
) -> Result<Matrix<T>> {
    let h = exec.matmul(x, &ffn.w_1, trace)?;
    let h = exec.activation(&h, crate::kernels::Activation::Relu, trace)?;
    exec.matmul(&h, &ffn.w_2, trace)
}

/// Feed-forward block: [`ffn_forward`], residual add and layer norm.
pub fn ffn_block<T: Scalar>(
    x: &Matrix<T>,
    ffn: &FfnWeights<T>,
    label: &str,
    exec: &mut Executor<T>,
    trace: &mut ScheduleTrace,
) -> Result<Matrix<T>> {
    exec.begin_stage(trace, label.to_string());
    let y = ffn_forward(x, ffn, exec, trace)?;
    let sum = exec.residual_add(x, &y, trace)?;
    match &ffn.ln {
        Some(ln) => exec.layer_norm(&sum, ln, trace),
        None => Ok(sum),
    }
}

/// Runs the full stack on an existing executor.
pub fn run_transformer_with<T: Scalar>(
    spec: &TransformerModelSpec,
    weights: &TransformerWeights<T>,
    x: &Matrix<T>,
    exec: &mut Executor<T>,
) -> Result<(Matrix<T>, ScheduleTrace)> {
    spec.validate()?;
    let d = weights.diagnostics(spec);
    if !d.is_empty() {
        return Err(Error::InvalidConfig(d));
    }
    if x.shape() != (spec.seq_len, spec.d_model) {
        return Err(Error::ShapeMismatch {
            context: "transformer input",
            left: x.shape(),
            right: (spec.seq_len, spec.d_model),
        });
    }
    x.check_finite()?;
    let mut trace = ScheduleTrace::new();
    let mut h = x.clone();
    for (l, layer) in weights.encoder.iter().enumerate() {
        h = mha_forward(&h, &h, &layer.attn, false, &format!("enc{l}.mha"), exec, &mut trace)?;
        h = ffn_block(&h, &layer.ffn, &format!("enc{l}.ffn"), exec, &mut trace)?;
    }
    if !weights.decoder.is_empty() {
        // the decoder consumes the input sequence; cross-attention reads the
        // encoder output
        let memory = h;
        let mut y = x.clone();
        for (l, layer) in weights.decoder.iter().enumerate() {
            y = mha_forward(&y, &y, &layer.self_attn, true, &format!("dec{l}.self"), exec, &mut trace)?;
            if let Some(cross) = &layer.cross_attn {
                y = mha_forward(&y, &memory, cross, false, &format!("dec{l}.cross"), exec, &mut trace)?;
            }
            y = ffn_block(&y, &layer.ffn, &format!("dec{l}.ffn"), exec, &mut trace)?;
        }
        h = y;
    }
    if let Some(head) = &weights.head {
        exec.begin_stage(&mut trace, "head");
        h = exec.matmul(&h, head, &mut trace)?;
    }
    Ok((h, trace))
}

/// Transformer inference in the given mode. The quantized reference uses the
/// same bit width as the photonic engine.
pub fn run_transformer<T: Scalar>(
    spec: &TransformerModelSpec,
    weights: &TransformerWeights<T>,
    x: &Matrix<T>,
    mode: Mode,
    cfg: &PhotonicEngineConfig<T>,
) -> Result<(Matrix<T>, ScheduleTrace)> {
    let mut exec = Executor::new(mode, cfg)?;
    run_transformer_with(spec, weights, x, &mut exec)
}
