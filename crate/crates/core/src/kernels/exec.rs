//! Mode dispatch for the mappers.
//!
//! The quantized reference and the photonic path share quantization and
//! readout code, so with noise off both produce the same bits. The float
//! reference and the quantized reference never touch the trace.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Matrix;
use crate::Mode;

use super::activation::{activate, exact_softmax, lut_softmax_values, Activation};
use super::quant::{fake_quantize, reference_matmul, QuantTensor};
use super::{EventKind, PhotonicEngine, PhotonicEngineConfig, ScheduleTrace};

pub const LN_EPS: f64 = 1e-5;

/// Per-feature layer-norm parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LnParams<T> {
    pub gamma: Vec<T>,
    pub beta: Vec<T>,
}

impl<T: Scalar> LnParams<T> {
    pub fn identity(d: usize) -> Self {
        Self {
            gamma: vec![T::one(); d],
            beta: vec![T::zero(); d],
        }
    }
}

/// Layer norm of one row. Statistics are digital; `gamma` is the optical MR
/// scaling and `beta` the digital shift. The variance is floored at
/// [`LN_EPS`], so a zero-variance row maps to `beta`.
pub fn layer_norm_row<T: Scalar>(x: &[T], ln: &LnParams<T>) -> Vec<T> {
    let n = T::from_count(x.len() as i64);
    let mean = x.iter().fold(T::zero(), |s, &v| s + v) / n;
    let var = x.iter().fold(T::zero(), |s, &v| s + (v - mean) * (v - mean)) / n;
    let inv = T::one() / var.max(T::lit(LN_EPS)).sqrt();
    x.iter()
        .zip(ln.gamma.iter().zip(&ln.beta))
        .map(|(&v, (&g, &b))| (v - mean) * inv * g + b)
        .collect()
}

pub struct Executor<T> {
    mode: Mode,
    bits: u32,
    engine: Option<PhotonicEngine<T>>,
}

impl<T: Scalar> Executor<T> {
    pub fn new(mode: Mode, cfg: &PhotonicEngineConfig<T>) -> Result<Self> {
        let engine = match mode {
            Mode::Photonic => Some(PhotonicEngine::new(cfg.clone())?),
            _ => None,
        };
        Ok(Self {
            mode,
            bits: cfg.quant_bits,
            engine,
        })
    }

    pub fn float() -> Self {
        Self {
            mode: Mode::FloatRef,
            bits: 8,
            engine: None,
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn engine(&mut self) -> Option<&mut PhotonicEngine<T>> {
        self.engine.as_mut()
    }

    pub fn traced(&self) -> bool {
        self.engine.is_some()
    }

    pub fn begin_stage(&self, trace: &mut ScheduleTrace, label: impl Into<String>) {
        if self.traced() {
            trace.begin_stage(label);
        }
    }

    pub fn annotate(&self, trace: &mut ScheduleTrace, key: &str, n: u64) {
        if self.traced() {
            trace.annotate(key, n);
        }
    }

    /// Folds lane traces into one concurrent stage.
    pub fn merge(&self, trace: &mut ScheduleTrace, label: &str, lanes: Vec<ScheduleTrace>) {
        if self.traced() {
            trace.merge_concurrent(label, lanes);
        }
    }

    pub fn record(&self, trace: &mut ScheduleTrace, kind: EventKind, count: u64, payload_bits: u64) {
        if self.traced() {
            trace.record(kind, count, payload_bits);
        }
    }

    pub fn matmul(&mut self, a: &Matrix<T>, b: &Matrix<T>, trace: &mut ScheduleTrace) -> Result<Matrix<T>> {
        match self.mode {
            Mode::FloatRef => a.matmul(b),
            Mode::QuantRef => {
                if a.cols() != b.rows() {
                    return Err(Error::ShapeMismatch {
                        context: "matmul",
                        left: a.shape(),
                        right: b.shape(),
                    });
                }
                let qa = QuantTensor::from_matrix(a, self.bits)?;
                let qb = QuantTensor::from_matrix(b, self.bits)?;
                reference_matmul(&qa, &qb)
            }
            Mode::Photonic => self.engine_mut().matmul_photonic(a, b, trace),
        }
    }

    /// Residual addition. Outside float mode both operands pass the DAC.
    pub fn residual_add(&mut self, a: &Matrix<T>, b: &Matrix<T>, trace: &mut ScheduleTrace) -> Result<Matrix<T>> {
        if a.shape() != b.shape() {
            return Err(Error::ShapeMismatch {
                context: "residual_add",
                left: a.shape(),
                right: b.shape(),
            });
        }
        match self.mode {
            Mode::FloatRef => a.add(b),
            Mode::QuantRef => fake_quantize(a, self.bits)?.add(&fake_quantize(b, self.bits)?),
            Mode::Photonic => {
                let qa = fake_quantize(a, self.bits)?;
                let qb = fake_quantize(b, self.bits)?;
                let out = self.engine_mut().coherent_add(qa.data(), qb.data(), trace)?;
                Matrix::from_vec(a.rows(), a.cols(), out)
            }
        }
    }

    /// Row-wise softmax: exact in float mode, LUT-based otherwise.
    pub fn softmax_rows(&mut self, m: &Matrix<T>, trace: &mut ScheduleTrace) -> Result<Matrix<T>> {
        let mut out = Vec::with_capacity(m.rows() * m.cols());
        for i in 0..m.rows() {
            let row = m.row(i);
            match self.mode {
                Mode::FloatRef => out.extend(exact_softmax(row)),
                Mode::QuantRef => out.extend(lut_softmax_values(row)),
                Mode::Photonic => out.extend(self.engine_mut().lut_softmax(row, trace)),
            }
        }
        Matrix::from_vec(m.rows(), m.cols(), out)
    }

    /// Elementwise activation (SOA) or row-wise softmax.
    pub fn activation(&mut self, m: &Matrix<T>, kind: Activation, trace: &mut ScheduleTrace) -> Result<Matrix<T>> {
        if kind == Activation::Softmax {
            return self.softmax_rows(m, trace);
        }
        let out = match self.mode {
            Mode::Photonic => self.engine_mut().soa_activation_many(m.data(), kind, trace)?,
            _ => m
                .data()
                .iter()
                .map(|&x| activate(x, kind))
                .collect::<Result<Vec<_>>>()?,
        };
        Matrix::from_vec(m.rows(), m.cols(), out)
    }

    pub fn layer_norm(&mut self, m: &Matrix<T>, ln: &LnParams<T>, trace: &mut ScheduleTrace) -> Result<Matrix<T>> {
        if ln.gamma.len() != m.cols() || ln.beta.len() != m.cols() {
            return Err(Error::ShapeMismatch {
                context: "layer_norm",
                left: m.shape(),
                right: (ln.gamma.len(), ln.beta.len()),
            });
        }
        let mut out = Vec::with_capacity(m.rows() * m.cols());
        for i in 0..m.rows() {
            out.extend(layer_norm_row(m.row(i), ln));
        }
        if let Some(engine) = self.engine.as_ref() {
            let cfg = engine.config();
            let e = (m.rows() * m.cols()) as u64;
            let bits = cfg.bits();
            // mean and variance, then the shift
            trace.record(EventKind::DigitalOp, 3 * e, 0);
            trace.record(EventKind::DacWrite, e, e * bits);
            trace.record(EventKind::MrTuneEo, e, 0);
            let steps = e.div_ceil(cfg.bank_rows_k.max(1) as u64);
            trace.add_latency(
                3.0 * cfg.latency(EventKind::DigitalOp)
                    + cfg.latency(EventKind::DacWrite)
                    + cfg.latency(EventKind::MrTuneEo)
                    + steps as f64 * cfg.step_ns(),
            );
        }
        Matrix::from_vec(m.rows(), m.cols(), out)
    }

    fn engine_mut(&mut self) -> &mut PhotonicEngine<T> {
        self.engine.as_mut().expect("photonic mode has an engine")
    }
}
