//! Photonic compute primitives.
//!
//! Every kernel returns values in dequantized space and appends its device
//! events to the caller's trace. With noise disabled the arithmetic is exact
//! on the integer codes, so results match the digital integer reference bit
//! for bit.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Matrix;

use super::quant::{dequantize_acc, QuantTensor};
use super::{EventKind, PhotonicEngine, ScheduleTrace};

impl<T: Scalar> PhotonicEngine<T> {
    /// Elementwise `w_i·a_i` on one WDM waveguide (input bank then weight bank).
    pub fn noncoherent_multiply(
        &mut self,
        a: &[T],
        w: &[T],
        trace: &mut ScheduleTrace,
    ) -> Result<Vec<T>> {
        if a.len() != w.len() {
            return Err(Error::LengthMismatch {
                left: a.len(),
                right: w.len(),
            });
        }
        let rows = self.config().bank_rows_k;
        if a.len() > rows {
            return Err(Error::BankOverflow { len: a.len(), rows });
        }
        let out = a
            .iter()
            .zip(w)
            .enumerate()
            .map(|(ch, (&x, &y))| x * y * self.heterodyne_factor(ch))
            .collect();
        let n = a.len() as u64;
        let bits = self.config().bits();
        trace.record(EventKind::DacWrite, 2 * n, 2 * n * bits);
        trace.record(EventKind::MrTuneEo, 2 * n, 0);
        trace.record_ops(EventKind::VcselEmit, n, n * bits, n);
        let cfg = self.config();
        trace.add_latency(
            cfg.latency(EventKind::DacWrite) + cfg.latency(EventKind::MrTuneEo) + cfg.step_ns(),
        );
        Ok(out)
    }

    /// Single-wavelength interference sum of `values`.
    ///
    /// An empty input returns zero and only leaves an annotation.
    pub fn coherent_sum(&mut self, values: &[T], trace: &mut ScheduleTrace) -> T {
        if values.is_empty() {
            trace.annotate("empty_coherent_sum", 1);
            return T::zero();
        }
        let mut acc = T::zero();
        let mut signal = T::zero();
        for &v in values {
            acc = acc + v;
            signal = signal + v.abs();
        }
        acc = acc + self.homodyne(signal);
        let n = values.len() as u64;
        let bits = self.config().bits();
        trace.record(EventKind::DacWrite, n, n * bits);
        trace.record_ops(EventKind::VcselEmit, n, n * bits, n);
        trace.record(EventKind::BpdRead, 1, 0);
        let cfg = self.config();
        trace.add_latency(
            cfg.latency(EventKind::DacWrite) + cfg.step_ns() + cfg.latency(EventKind::BpdRead),
        );
        acc
    }

    /// Elementwise coherent sums of two equally long streams, `a_i + b_i`.
    /// Pairs are spread over the bank's waveguides and pipelined.
    pub fn coherent_add(&mut self, a: &[T], b: &[T], trace: &mut ScheduleTrace) -> Result<Vec<T>> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch {
                left: a.len(),
                right: b.len(),
            });
        }
        let out = a
            .iter()
            .zip(b)
            .map(|(&x, &y)| x + y + self.homodyne(x.abs() + y.abs()))
            .collect();
        let n = a.len() as u64;
        if n == 0 {
            return Ok(out);
        }
        let bits = self.config().bits();
        trace.record(EventKind::DacWrite, 2 * n, 2 * n * bits);
        trace.record_ops(EventKind::VcselEmit, 2 * n, 2 * n * bits, 2 * n);
        trace.record(EventKind::BpdRead, n, 0);
        let cfg = self.config();
        let steps = n.div_ceil(cfg.bank_rows_k.max(1) as u64);
        trace.add_latency(
            cfg.latency(EventKind::DacWrite)
                + steps as f64 * cfg.step_ns()
                + cfg.latency(EventKind::BpdRead),
        );
        Ok(out)
    }

    /// Signed dot product: positive and negative weight arms accumulate
    /// separately and the balanced photodetector subtracts them.
    pub fn bpd_dot(&mut self, a: &[T], w: &[T], trace: &mut ScheduleTrace) -> Result<T> {
        if a.len() != w.len() {
            return Err(Error::LengthMismatch {
                left: a.len(),
                right: w.len(),
            });
        }
        let mut pos = T::zero();
        let mut neg = T::zero();
        let mut pos_sig = T::zero();
        let mut neg_sig = T::zero();
        for (ch, (&x, &y)) in a.iter().zip(w).enumerate() {
            if y > T::zero() {
                let p = x * y * self.heterodyne_factor(ch);
                pos = pos + p;
                pos_sig = pos_sig + p.abs();
            } else if y < T::zero() {
                let p = x * (-y) * self.heterodyne_factor(ch);
                neg = neg + p;
                neg_sig = neg_sig + p.abs();
            }
        }
        pos = pos + self.homodyne(pos_sig);
        neg = neg + self.homodyne(neg_sig);
        let n = a.len() as u64;
        let bits = self.config().bits();
        trace.record(EventKind::DacWrite, 2 * n, 2 * n * bits);
        trace.record(EventKind::MrTuneEo, 2 * n, 0);
        trace.record_ops(EventKind::VcselEmit, n, n * bits, n);
        trace.record(EventKind::BpdRead, 1, 0);
        let cfg = self.config();
        trace.add_latency(
            cfg.latency(EventKind::DacWrite)
                + cfg.latency(EventKind::MrTuneEo)
                + cfg.step_ns()
                + cfg.latency(EventKind::BpdRead),
        );
        Ok(pos - neg)
    }

    /// Quantizes both operands per tensor and multiplies them on the banks.
    pub fn matmul_photonic(
        &mut self,
        a: &Matrix<T>,
        b: &Matrix<T>,
        trace: &mut ScheduleTrace,
    ) -> Result<Matrix<T>> {
        if a.cols() != b.rows() {
            return Err(Error::ShapeMismatch {
                context: "matmul_photonic",
                left: a.shape(),
                right: b.shape(),
            });
        }
        let bits = self.config().quant_bits;
        let qa = QuantTensor::from_matrix(a, bits)?;
        let qb = QuantTensor::from_matrix(b, bits)?;
        self.matmul_codes(&qa, &qb, trace)
    }

    /// Tiled product of pre-quantized operands.
    ///
    /// `b` is loaded into the K×N weight bank one tile at a time; each row of
    /// `a` streams through as one modulation step per tile. Partial sums from
    /// the positive and negative arms accumulate across tiles and are read
    /// out by one ADC conversion per output element.
    pub fn matmul_codes(
        &mut self,
        a: &QuantTensor<T>,
        b: &QuantTensor<T>,
        trace: &mut ScheduleTrace,
    ) -> Result<Matrix<T>> {
        if a.cols != b.rows {
            return Err(Error::ShapeMismatch {
                context: "matmul_codes",
                left: (a.rows, a.cols),
                right: (b.rows, b.cols),
            });
        }
        let (m, k, n) = (a.rows, a.cols, b.cols);
        let rows_k = self.config().bank_rows_k;
        let cols_n = self.config().bank_cols_n;
        let exact = self.noise_free();
        let mut acc_int = vec![0i64; m * n];
        let mut acc_analog = vec![T::zero(); if exact { 0 } else { m * n }];

        for k0 in (0..k).step_by(rows_k.max(1)) {
            let kk = rows_k.min(k - k0);
            for n0 in (0..n).step_by(cols_n) {
                let nn = cols_n.min(n - n0);
                for i in 0..m {
                    let arow = &a.row(i)[k0..k0 + kk];
                    for j in n0..n0 + nn {
                        if exact {
                            let (pos, neg) = signed_arms(arow, b, k0, j);
                            acc_int[i * n + j] += pos - neg;
                        } else {
                            let v = self.noisy_arms(arow, b, k0, j);
                            acc_analog[i * n + j] = acc_analog[i * n + j] + v;
                        }
                    }
                }
                self.record_tile(trace, m as u64, kk as u64, nn as u64);
            }
        }

        let total = (m * n) as u64;
        let bits = self.config().bits();
        trace.record(EventKind::AdcRead, total, total * bits);
        trace.add_latency(self.config().latency(EventKind::AdcRead));

        let data = if exact {
            acc_int
                .into_iter()
                .map(|v| dequantize_acc(v, a.spec.scale, b.spec.scale))
                .collect()
        } else {
            let s = a.spec.scale * b.spec.scale;
            acc_analog.into_iter().map(|v| v * s).collect()
        };
        Matrix::from_vec(m, n, data)
    }

    fn noisy_arms(&mut self, arow: &[i32], b: &QuantTensor<T>, k0: usize, j: usize) -> T {
        let mut pos = T::zero();
        let mut neg = T::zero();
        let mut pos_sig = T::zero();
        let mut neg_sig = T::zero();
        for (ch, &x) in arow.iter().enumerate() {
            let w = b.code(k0 + ch, j);
            if w == 0 {
                continue;
            }
            let p = T::from_count(x as i64 * w.abs() as i64) * self.heterodyne_factor(ch);
            if w > 0 {
                pos = pos + p;
                pos_sig = pos_sig + p.abs();
            } else {
                neg = neg + p;
                neg_sig = neg_sig + p.abs();
            }
        }
        pos = pos + self.homodyne(pos_sig);
        neg = neg + self.homodyne(neg_sig);
        pos - neg
    }

    fn record_tile(&self, trace: &mut ScheduleTrace, m: u64, kk: u64, nn: u64) {
        let cfg = self.config();
        let bits = cfg.bits();
        // weight tile: fetched, one DAC channel per column, one MR per element
        trace.record(EventKind::MemRead, 1, kk * nn * bits);
        trace.record(EventKind::DacWrite, nn, kk * nn * bits);
        trace.record(EventKind::MrTuneEo, kk * nn, 0);
        // input rows: one DAC + VCSEL per wavelength, imprinted on every column
        trace.record(EventKind::DacWrite, m * kk, m * kk * bits);
        trace.record_ops(EventKind::VcselEmit, m * kk, m * kk * bits, m * kk * nn);
        trace.record(EventKind::MrTuneEo, m * kk * nn, 0);
        trace.record(EventKind::BpdRead, m * nn, 0);
        trace.add_latency(
            cfg.latency(EventKind::MemRead)
                + cfg.latency(EventKind::DacWrite)
                + cfg.latency(EventKind::MrTuneEo)
                + m as f64 * cfg.step_ns()
                + cfg.latency(EventKind::BpdRead),
        );
    }
}

/// Positive- and negative-arm integer sums of one tile column.
fn signed_arms<T>(arow: &[i32], b: &QuantTensor<T>, k0: usize, j: usize) -> (i64, i64) {
    let mut pos = 0i64;
    let mut neg = 0i64;
    for (ch, &x) in arow.iter().enumerate() {
        let w = b.codes[(k0 + ch) * b.cols + j];
        if w > 0 {
            pos += x as i64 * w as i64;
        } else if w < 0 {
            neg += x as i64 * (-(w as i64));
        }
    }
    (pos, neg)
}

/// Closed-form event counts of [`PhotonicEngine::matmul_codes`] for an
/// `m×k · k×n` product on a `rows_k × cols_n` bank.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatmulEventCounts {
    pub tiles: u64,
    pub dac_write: u64,
    pub mr_tune_eo: u64,
    pub vcsel_emit: u64,
    pub bpd_read: u64,
    pub adc_read: u64,
    pub mem_read: u64,
    pub ops: u64,
}

pub fn matmul_event_counts(m: usize, k: usize, n: usize, rows_k: usize, cols_n: usize) -> MatmulEventCounts {
    let (m, k, n) = (m as u64, k as u64, n as u64);
    let (rk, cn) = (rows_k as u64, cols_n as u64);
    let tk = k.div_ceil(rk);
    let tn = n.div_ceil(cn);
    MatmulEventCounts {
        tiles: tk * tn,
        // Σ over tiles of (nn + m·kk) = tk·n + m·k·tn
        dac_write: tk * n + m * k * tn,
        // Σ over tiles of (kk·nn + m·kk·nn) = (1 + m)·k·n
        mr_tune_eo: (1 + m) * k * n,
        vcsel_emit: m * k * tn,
        bpd_read: m * n * tk,
        adc_read: m * n,
        mem_read: tk * tn,
        ops: m * k * n,
    }
}
