//! Symmetric per-tensor quantization at the DAC/ADC boundary.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantSpec<T> {
    pub bits: u32,
    pub scale: T,
}

impl<T: Scalar> QuantSpec<T> {
    pub fn new(bits: u32, scale: T) -> Result<Self> {
        if !(2..=16).contains(&bits) {
            return Err(Error::invalid("quant.bits", "must lie in 2..=16"));
        }
        if !(scale > T::zero() && scale.is_finite()) {
            return Err(Error::invalid("quant.scale", "must be finite and > 0"));
        }
        Ok(Self { bits, scale })
    }

    /// Largest code magnitude, `2^(bits−1) − 1`.
    pub fn qmax(&self) -> i32 {
        qmax(self.bits)
    }

    /// Calibrates `scale = max|x| / qmax`. An all-zero tensor gets scale 1.
    pub fn calibrate(values: &[T], bits: u32) -> Result<Self> {
        let mut peak = T::zero();
        for (index, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    index,
                    value: v.as_f64(),
                });
            }
            peak = peak.max(v.abs());
        }
        let scale = if peak > T::zero() {
            peak / T::from_count(qmax(bits) as i64)
        } else {
            T::one()
        };
        Self::new(bits, scale)
    }

    pub fn quantize_one(&self, x: T) -> i32 {
        let q = self.qmax();
        let code = (x / self.scale).round().to_i64().unwrap_or(0);
        code.clamp(-(q as i64), q as i64) as i32
    }

    pub fn dequantize_one(&self, code: i32) -> T {
        T::from_count(code as i64) * self.scale
    }
}

pub fn qmax(bits: u32) -> i32 {
    (1i32 << (bits - 1)) - 1
}

/// `round(x/scale)` clamped to the symmetric code range.
pub fn quantize<T: Scalar>(values: &[T], spec: &QuantSpec<T>) -> Result<Vec<i32>> {
    values
        .iter()
        .enumerate()
        .map(|(index, &v)| {
            if v.is_finite() {
                Ok(spec.quantize_one(v))
            } else {
                Err(Error::NonFinite {
                    index,
                    value: v.as_f64(),
                })
            }
        })
        .collect()
}

pub fn dequantize<T: Scalar>(codes: &[i32], spec: &QuantSpec<T>) -> Vec<T> {
    codes.iter().map(|&c| spec.dequantize_one(c)).collect()
}

/// Integer codes of a matrix plus their shared scale.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantTensor<T> {
    pub rows: usize,
    pub cols: usize,
    pub codes: Vec<i32>,
    pub spec: QuantSpec<T>,
}

impl<T: Scalar> QuantTensor<T> {
    pub fn from_matrix(m: &Matrix<T>, bits: u32) -> Result<Self> {
        let spec = QuantSpec::calibrate(m.data(), bits)?;
        Self::with_spec(m, spec)
    }

    pub fn with_spec(m: &Matrix<T>, spec: QuantSpec<T>) -> Result<Self> {
        Ok(Self {
            rows: m.rows(),
            cols: m.cols(),
            codes: quantize(m.data(), &spec)?,
            spec,
        })
    }

    pub fn code(&self, i: usize, j: usize) -> i32 {
        self.codes[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[i32] {
        &self.codes[i * self.cols..(i + 1) * self.cols]
    }

    pub fn slice_rows(&self, start: usize, end: usize) -> Self {
        Self {
            rows: end - start,
            cols: self.cols,
            codes: self.codes[start * self.cols..end * self.cols].to_vec(),
            spec: self.spec,
        }
    }

    pub fn dequantize(&self) -> Matrix<T> {
        Matrix::from_vec(self.rows, self.cols, dequantize(&self.codes, &self.spec))
            .expect("code count matches shape")
    }
}

/// Converts a wide integer accumulator of `a`-codes times `b`-codes back to
/// real space. Shared by the photonic readout and the digital reference.
pub fn dequantize_acc<T: Scalar>(acc: i64, scale_a: T, scale_b: T) -> T {
    T::from_count(acc) * (scale_a * scale_b)
}

/// Digital integer product of two quantized tensors.
pub fn reference_matmul<T: Scalar>(a: &QuantTensor<T>, b: &QuantTensor<T>) -> Result<Matrix<T>> {
    if a.cols != b.rows {
        return Err(Error::ShapeMismatch {
            context: "reference_matmul",
            left: (a.rows, a.cols),
            right: (b.rows, b.cols),
        });
    }
    let mut acc = vec![0i64; a.rows * b.cols];
    for i in 0..a.rows {
        for (k, &x) in a.row(i).iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &w) in b.row(k).iter().enumerate() {
                acc[i * b.cols + j] += x as i64 * w as i64;
            }
        }
    }
    let data = acc
        .into_iter()
        .map(|v| dequantize_acc(v, a.spec.scale, b.spec.scale))
        .collect();
    Matrix::from_vec(a.rows, b.cols, data)
}

/// Round-trips a matrix through the quantizer.
pub fn fake_quantize<T: Scalar>(m: &Matrix<T>, bits: u32) -> Result<Matrix<T>> {
    Ok(QuantTensor::from_matrix(m, bits)?.dequantize())
}
