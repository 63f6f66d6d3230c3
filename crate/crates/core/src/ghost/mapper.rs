//! GNN inference on `V` execution lanes: aggregate, combine, update.

use crate::error::{Error, Result};
use crate::kernels::{
    dequantize_acc, reference_matmul, EventKind, Executor, QuantSpec, QuantTensor, ScheduleTrace,
};
use crate::scalar::Scalar;
use crate::tensor::Matrix;
use crate::Mode;

use super::{partition_graph, Aggregator, GhostConfig, GnnLayerSpec, GnnModelSpec, Graph, PartitionSchedule};

/// Aggregation coefficients per vertex: sorted `(neighbor, c)` with
/// `c = edge weight`, times `deg(v)^−½·deg(u)^−½` under GCN normalization.
/// Degrees are weighted and include the self-loop when one is added.
pub fn aggregation_coefficients<T: Scalar>(graph: &Graph<T>, layer: &GnnLayerSpec) -> Vec<Vec<(usize, T)>> {
    let inc: Vec<Vec<(usize, T)>> = (0..graph.vertex_count())
        .map(|v| graph.incidences(v, layer.self_loops))
        .collect();
    if !layer.gcn_norm {
        return inc;
    }
    let inv_sqrt: Vec<T> = inc
        .iter()
        .map(|row| {
            let d = row.iter().fold(T::zero(), |s, e| s + e.1);
            if d > T::zero() {
                T::one() / d.sqrt()
            } else {
                T::zero()
            }
        })
        .collect();
    inc.iter()
        .enumerate()
        .map(|(v, row)| row.iter().map(|&(u, w)| (u, w * inv_sqrt[v] * inv_sqrt[u])).collect())
        .collect()
}

/// Dense aggregation matrix `A` with `aggregate = A·X` for sum aggregation.
pub fn dense_aggregation_matrix<T: Scalar>(graph: &Graph<T>, layer: &GnnLayerSpec) -> Matrix<T> {
    let n = graph.vertex_count();
    let mut a = Matrix::zeros(n, n);
    for (v, row) in aggregation_coefficients(graph, layer).into_iter().enumerate() {
        for (u, c) in row {
            a[(v, u)] = c;
        }
    }
    a
}

/// Coefficient codes; all-one coefficients stay exact with scale 1.
fn coefficient_codes<T: Scalar>(coef: &[Vec<(usize, T)>], bits: u32) -> Result<(Vec<Vec<i64>>, T)> {
    if coef.iter().flatten().all(|e| e.1 == T::one()) {
        return Ok((coef.iter().map(|r| vec![1; r.len()]).collect(), T::one()));
    }
    let all: Vec<T> = coef.iter().flatten().map(|e| e.1).collect();
    let spec = QuantSpec::calibrate(&all, bits)?;
    let codes = coef
        .iter()
        .map(|r| r.iter().map(|e| spec.quantize_one(e.1) as i64).collect())
        .collect();
    Ok((codes, spec.scale))
}

/// Neighbor reduction following `schedule`. Per vertex the incidences are
/// visited in sorted order whatever the blocking, so the result does not
/// depend on `(V, N)`.
pub fn aggregate<T: Scalar>(
    graph: &Graph<T>,
    features: &Matrix<T>,
    layer: &GnnLayerSpec,
    schedule: &PartitionSchedule,
    label: &str,
    exec: &mut Executor<T>,
    trace: &mut ScheduleTrace,
) -> Result<Matrix<T>> {
    let n = graph.vertex_count();
    if features.rows() != n {
        return Err(Error::ShapeMismatch {
            context: "aggregate features",
            left: features.shape(),
            right: (n, features.cols()),
        });
    }
    let f = features.cols();
    let coef = aggregation_coefficients(graph, layer);
    let counts: Vec<usize> = coef.iter().map(Vec::len).collect();
    let weighted = coef.iter().flatten().any(|e| e.1 != T::one());
    if layer.gcn_norm {
        exec.begin_stage(trace, format!("{label}.preprocess"));
        let total: usize = counts.iter().sum();
        exec.record(trace, EventKind::DigitalOp, total as u64, 0);
        if let Some(e) = exec.engine() {
            let l = e.config().latency(EventKind::DigitalOp);
            trace.add_latency(l);
        }
    }

    let mut out = if exec.mode() == Mode::FloatRef {
        aggregate_float(features, &coef, layer.aggregator, schedule)
    } else {
        aggregate_codes(features, &coef, layer.aggregator, schedule, label, weighted, exec, trace)?
    };

    if layer.aggregator == Aggregator::Mean {
        for (v, &c) in counts.iter().enumerate() {
            let d = T::from_count(c.max(1) as i64);
            for x in out.row_mut(v) {
                *x = *x / d;
            }
        }
        exec.record(trace, EventKind::DigitalOp, (n * f) as u64, 0);
    }
    Ok(out)
}

fn aggregate_float<T: Scalar>(
    x: &Matrix<T>,
    coef: &[Vec<(usize, T)>],
    agg: Aggregator,
    schedule: &PartitionSchedule,
) -> Matrix<T> {
    let f = x.cols();
    let mut out: Matrix<T> = Matrix::zeros(x.rows(), f);
    let mut seen = vec![false; x.rows()];
    for r in &schedule.rounds {
        for &v in &r.outputs {
            for &(u, c) in &coef[v] {
                if r.inputs.binary_search(&u).is_err() {
                    continue;
                }
                for j in 0..f {
                    let t = c * x[(u, j)];
                    out[(v, j)] = match agg {
                        Aggregator::Max if seen[v] => out[(v, j)].max(t),
                        Aggregator::Max => t,
                        _ => out[(v, j)] + t,
                    };
                }
                seen[v] = true;
            }
        }
    }
    out
}

#[allow(clippy::too_many_arguments, clippy::needless_range_loop)]
fn aggregate_codes<T: Scalar>(
    x: &Matrix<T>,
    coef: &[Vec<(usize, T)>],
    agg: Aggregator,
    schedule: &PartitionSchedule,
    label: &str,
    weighted: bool,
    exec: &mut Executor<T>,
    trace: &mut ScheduleTrace,
) -> Result<Matrix<T>> {
    let n = x.rows();
    let f = x.cols();
    let bits = exec.bits();
    let qx = QuantTensor::from_matrix(x, bits)?;
    let (ccodes, cscale) = coefficient_codes(coef, bits)?;
    let noisy = exec.engine().is_some_and(|e| !e.noise_free()) && agg != Aggregator::Max;
    let mut acc = vec![0i64; n * f];
    let mut best: Vec<Option<i64>> = vec![None; n * f];
    let mut analog = vec![T::zero(); if noisy { n * f } else { 0 }];
    let lanes_v = schedule.lanes_v;

    for (ri, r) in schedule.rounds.iter().enumerate() {
        let mut lanes = Vec::with_capacity(lanes_v);
        let mut idle = lanes_v - r.outputs.len();
        for &v in &r.outputs {
            let mut lane = ScheduleTrace::new();
            let mut k = 0u64;
            let mut partial = vec![T::zero(); if noisy { f } else { 0 }];
            for (ci, &(u, _)) in coef[v].iter().enumerate() {
                if r.inputs.binary_search(&u).is_err() {
                    continue;
                }
                let cc = ccodes[v][ci];
                for j in 0..f {
                    let t = cc * qx.code(u, j) as i64;
                    let s = v * f + j;
                    match agg {
                        Aggregator::Max => best[s] = Some(best[s].map_or(t, |b| b.max(t))),
                        _ if noisy => {
                            let e = exec.engine().expect("noisy implies photonic");
                            let ch = k as usize;
                            partial[j] = partial[j] + T::from_count(t) * e.heterodyne_factor(ch);
                        }
                        _ => acc[s] += t,
                    }
                }
                k += 1;
            }
            if noisy && k > 0 {
                // one homodyne draw per coherent accumulation
                let e = exec.engine().expect("noisy implies photonic");
                for (j, p) in partial.iter().enumerate() {
                    analog[v * f + j] = analog[v * f + j] + *p + e.homodyne(p.abs());
                }
            }
            if k == 0 {
                idle += 1;
            }
            if let Some(e) = exec.engine() {
                record_lane(e.config(), &mut lane, k, f as u64, weighted);
            }
            lanes.push(lane);
        }
        exec.merge(trace, &format!("{label}.aggregate.r{ri}"), lanes);
        if let Some(e) = exec.engine() {
            let b = e.config().bits();
            let mem = e.config().latency(EventKind::MemRead);
            trace.record(EventKind::MemRead, 1, (r.inputs.len() * f) as u64 * b);
            trace.add_latency(mem);
            trace.annotate("reduce_unit_activations", lanes_v as u64);
            trace.annotate("idle_lanes", idle as u64);
        }
    }

    if let Some(e) = exec.engine() {
        let cfg = e.config();
        let total = (n * f) as u64;
        let adc = cfg.latency(EventKind::AdcRead);
        let b = cfg.bits();
        trace.begin_stage(format!("{label}.aggregate.readout"));
        trace.record(EventKind::AdcRead, total, total * b);
        trace.add_latency(adc);
    }

    let data = (0..n * f)
        .map(|s| match agg {
            Aggregator::Max => best[s].map_or(T::zero(), |b| dequantize_acc(b, cscale, qx.spec.scale)),
            _ if noisy => analog[s] * (cscale * qx.spec.scale),
            _ => dequantize_acc(acc[s], cscale, qx.spec.scale),
        })
        .collect();
    Matrix::from_vec(n, f, data)
}

fn record_lane<T: Scalar>(
    cfg: &crate::kernels::PhotonicEngineConfig<T>,
    lane: &mut ScheduleTrace,
    k: u64,
    f: u64,
    weighted: bool,
) {
    if k == 0 {
        return;
    }
    let b = cfg.bits();
    let e = k * f;
    lane.record(EventKind::DacWrite, e, e * b);
    if weighted {
        lane.record(EventKind::MrTuneEo, e, 0);
    }
    lane.record_ops(EventKind::VcselEmit, e, e * b, e);
    lane.record(EventKind::BpdRead, f, 0);
    let per_step = f.div_ceil(cfg.bank_rows_k.max(1) as u64);
    lane.add_latency(
        cfg.latency(EventKind::DacWrite)
            + if weighted { cfg.latency(EventKind::MrTuneEo) } else { 0.0 }
            + (k * per_step) as f64 * cfg.step_ns()
            + cfg.latency(EventKind::BpdRead),
    );
}

/// Linear transform `aggregated·W`. On the photonic path each output block
/// is one bank pass whose lanes share the weight DACs.
pub fn combine<T: Scalar>(
    aggregated: &Matrix<T>,
    weights: &Matrix<T>,
    schedule: &PartitionSchedule,
    label: &str,
    exec: &mut Executor<T>,
    trace: &mut ScheduleTrace,
) -> Result<Matrix<T>> {
    if aggregated.cols() != weights.rows() {
        return Err(Error::ShapeMismatch {
            context: "combine",
            left: aggregated.shape(),
            right: weights.shape(),
        });
    }
    let bits = exec.bits();
    match exec.mode() {
        Mode::FloatRef => aggregated.matmul(weights),
        Mode::QuantRef => reference_matmul(
            &QuantTensor::from_matrix(aggregated, bits)?,
            &QuantTensor::from_matrix(weights, bits)?,
        ),
        Mode::Photonic => {
            let qa = QuantTensor::from_matrix(aggregated, bits)?;
            let qw = QuantTensor::from_matrix(weights, bits)?;
            let mut out = Matrix::zeros(aggregated.rows(), weights.cols());
            let engine = exec.engine().expect("photonic mode has an engine");
            for (bi, (s, e)) in schedule.output_blocks().into_iter().enumerate() {
                trace.begin_stage(format!("{label}.combine.b{bi}"));
                let part = engine.matmul_codes(&qa.slice_rows(s, e), &qw, trace)?;
                for i in s..e {
                    out.row_mut(i).copy_from_slice(part.row(i - s));
                }
            }
            Ok(out)
        }
    }
}

/// Nonlinear update: SOA activations, or LUT softmax per vertex row.
pub fn update<T: Scalar>(
    combined: &Matrix<T>,
    layer: &GnnLayerSpec,
    label: &str,
    exec: &mut Executor<T>,
    trace: &mut ScheduleTrace,
) -> Result<Matrix<T>> {
    exec.begin_stage(trace, format!("{label}.update"));
    exec.activation(combined, layer.activation, trace)
}

pub fn run_gnn_with<T: Scalar>(
    graph: &Graph<T>,
    spec: &GnnModelSpec,
    weights: &[Matrix<T>],
    lanes_v: usize,
    partition_n: usize,
    exec: &mut Executor<T>,
) -> Result<(Matrix<T>, ScheduleTrace)> {
    spec.validate(Some(graph.features().cols()))?;
    if weights.len() != spec.layers.len() {
        return Err(Error::LengthMismatch {
            left: weights.len(),
            right: spec.layers.len(),
        });
    }
    for (l, (w, ls)) in weights.iter().zip(&spec.layers).enumerate() {
        if w.shape() != (ls.f_in, ls.f_out) {
            return Err(Error::invalid(
                format!("gnn.layers[{l}].weights"),
                format!("shape {:?}, expected {:?}", w.shape(), (ls.f_in, ls.f_out)),
            ));
        }
    }
    graph.features().check_finite()?;
    let mut trace = ScheduleTrace::new();
    let mut h = graph.features().clone();
    for (l, (layer, w)) in spec.layers.iter().zip(weights).enumerate() {
        let label = format!("L{l}");
        let schedule = partition_graph(graph, lanes_v, partition_n, layer.self_loops);
        let a = aggregate(graph, &h, layer, &schedule, &label, exec, &mut trace)?;
        let c = combine(&a, w, &schedule, &label, exec, &mut trace)?;
        h = update(&c, layer, &label, exec, &mut trace)?;
    }
    Ok((h, trace))
}

/// GNN inference in the given mode.
pub fn run_gnn<T: Scalar>(
    graph: &Graph<T>,
    spec: &GnnModelSpec,
    weights: &[Matrix<T>],
    cfg: &GhostConfig<T>,
    mode: Mode,
) -> Result<(Matrix<T>, ScheduleTrace)> {
    let mut exec = Executor::new(mode, &cfg.engine)?;
    run_gnn_with(graph, spec, weights, cfg.lanes_v, cfg.partition_n, &mut exec)
}
