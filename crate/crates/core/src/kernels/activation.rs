//! SOA activations and the LUT-based softmax.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{EventKind, PhotonicEngine, ScheduleTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Sigmoid,
    Tanh,
    Softmax,
}

impl Activation {
    pub fn as_str(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
            Activation::Softmax => "softmax",
        }
    }

    /// Whether an SOA can realise this nonlinearity.
    pub fn is_optical(self) -> bool {
        !matches!(self, Activation::Softmax)
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Activation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "sigmoid" => Ok(Activation::Sigmoid),
            "tanh" => Ok(Activation::Tanh),
            "softmax" => Ok(Activation::Softmax),
            other => Err(Error::Unsupported {
                what: "activation",
                name: other.to_string(),
            }),
        }
    }
}

/// Exact elementwise activation. Softmax is not elementwise and is rejected.
pub fn activate<T: Scalar>(x: T, kind: Activation) -> Result<T> {
    match kind {
        Activation::Relu => Ok(x.max(T::zero())),
        Activation::Sigmoid => Ok(T::one() / (T::one() + (-x).exp())),
        Activation::Tanh => Ok(x.tanh()),
        Activation::Softmax => Err(Error::Unsupported {
            what: "SOA activation",
            name: kind.as_str().to_string(),
        }),
    }
}

pub const LUT_ENTRIES: usize = 1024;
pub const LUT_RANGE: f64 = 16.0;

/// Table-driven `exp` over `[−16, 0]` without interpolation.
///
/// Two 1024-entry tables: a coarse one stepping across the whole range and a
/// fine one spanning a single coarse step. `exp(x)` is the product of one
/// entry from each.
struct ExpLut {
    coarse: Vec<f64>,
    fine: Vec<f64>,
    coarse_step: f64,
    fine_step: f64,
}

impl ExpLut {
    fn get() -> &'static ExpLut {
        static LUT: OnceLock<ExpLut> = OnceLock::new();
        LUT.get_or_init(|| {
            let coarse_step = LUT_RANGE / LUT_ENTRIES as f64;
            let fine_step = coarse_step / LUT_ENTRIES as f64;
            ExpLut {
                coarse: (0..LUT_ENTRIES)
                    .map(|i| (-(i as f64) * coarse_step).exp())
                    .collect(),
                fine: (0..LUT_ENTRIES)
                    .map(|j| (-(j as f64) * fine_step).exp())
                    .collect(),
                coarse_step,
                fine_step,
            }
        })
    }

    /// `x` is a max-subtracted logit; `−∞` maps to exactly zero.
    fn lookup(&self, x: f64) -> f64 {
        if x == f64::NEG_INFINITY {
            return 0.0;
        }
        let mag = (-x).clamp(0.0, LUT_RANGE);
        let i = ((mag / self.coarse_step) as usize).min(LUT_ENTRIES - 1);
        let rem = mag - i as f64 * self.coarse_step;
        let j = ((rem / self.fine_step) as usize).min(LUT_ENTRIES - 1);
        self.coarse[i] * self.fine[j]
    }
}

/// LUT exponential of a non-positive argument.
pub fn lut_exp<T: Scalar>(x: T) -> T {
    T::lit(ExpLut::get().lookup(x.as_f64()))
}

/// Softmax through the exp LUT. `−∞` entries (masked positions) get zero
/// probability. Shared by the photonic path and the quantized reference.
pub fn lut_softmax_values<T: Scalar>(v: &[T]) -> Vec<T> {
    if v.is_empty() {
        return Vec::new();
    }
    let max = v.iter().fold(T::neg_infinity(), |m, &x| m.max(x));
    if max == T::neg_infinity() {
        let u = T::one() / T::from_count(v.len() as i64);
        return vec![u; v.len()];
    }
    let e: Vec<T> = v.iter().map(|&x| lut_exp(x - max)).collect();
    let sum = e.iter().fold(T::zero(), |s, &x| s + x);
    e.into_iter().map(|x| x / sum).collect()
}

/// Exact softmax, used by the float reference.
pub fn exact_softmax<T: Scalar>(v: &[T]) -> Vec<T> {
    if v.is_empty() {
        return Vec::new();
    }
    let max = v.iter().fold(T::neg_infinity(), |m, &x| m.max(x));
    if max == T::neg_infinity() {
        let u = T::one() / T::from_count(v.len() as i64);
        return vec![u; v.len()];
    }
    let e: Vec<T> = v.iter().map(|&x| (x - max).exp()).collect();
    let sum = e.iter().fold(T::zero(), |s, &x| s + x);
    e.into_iter().map(|x| x / sum).collect()
}

impl<T: Scalar> PhotonicEngine<T> {
    /// One SOA pass computing an elementwise nonlinearity.
    pub fn soa_activation(&mut self, x: T, kind: Activation, trace: &mut ScheduleTrace) -> Result<T> {
        let y = activate(x, kind)?;
        trace.record(EventKind::SoaPass, 1, 0);
        trace.add_latency(self.config().latency(EventKind::SoaPass));
        Ok(y)
    }

    /// SOA activation over a stream of values pipelined at the modulation rate.
    pub fn soa_activation_many(
        &mut self,
        xs: &[T],
        kind: Activation,
        trace: &mut ScheduleTrace,
    ) -> Result<Vec<T>> {
        let out = xs
            .iter()
            .map(|&x| activate(x, kind))
            .collect::<Result<Vec<_>>>()?;
        let n = xs.len() as u64;
        trace.record(EventKind::SoaPass, n, 0);
        let cfg = self.config();
        trace.add_latency(cfg.latency(EventKind::SoaPass) + n as f64 * cfg.step_ns());
        Ok(out)
    }

    /// Digitizes `v` and evaluates softmax with the exp LUT.
    pub fn lut_softmax(&mut self, v: &[T], trace: &mut ScheduleTrace) -> Vec<T> {
        let out = lut_softmax_values(v);
        let n = v.len() as u64;
        let bits = self.config().bits();
        trace.record(EventKind::AdcRead, n, n * bits);
        // max-compare, LUT lookup and normalisation per element
        trace.record(EventKind::DigitalOp, 3 * n, 0);
        let cfg = self.config();
        trace.add_latency(
            cfg.latency(EventKind::AdcRead) + 3.0 * n as f64 * cfg.latency(EventKind::DigitalOp),
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn activation_values() {
        assert_eq!(activate(-2.0f64, Activation::Relu).unwrap(), 0.0);
        assert_eq!(activate(3.0f64, Activation::Relu).unwrap(), 3.0);
        assert_eq!(activate(0.0f64, Activation::Tanh).unwrap(), 0.0);
        assert_eq!(activate(0.0f64, Activation::Sigmoid).unwrap(), 0.5);
        assert!(activate(0.0f64, Activation::Softmax).is_err());
        assert!("gelu".parse::<Activation>().is_err());
    }

    #[test]
    fn softmax_trivial_cases() {
        let p = lut_softmax_values(&[2.5f64, 2.5, 2.5]);
        for x in p {
            assert!((x - 1.0 / 3.0).abs() < 1e-12);
        }
        assert_eq!(lut_softmax_values(&[-7.0f64]), vec![1.0]);
        let masked = lut_softmax_values(&[1.0f64, f64::NEG_INFINITY]);
        assert_eq!(masked, vec![1.0, 0.0]);
    }

    #[test]
    fn lut_softmax_close_to_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let v: Vec<f64> = (0..8).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let approx = lut_softmax_values(&v);
            let exact: Vec<f64> = {
                let m = v.iter().cloned().fold(f64::MIN, f64::max);
                let e: Vec<f64> = v.iter().map(|x| (x - m).exp()).collect();
                let s: f64 = e.iter().sum();
                e.iter().map(|x| x / s).collect()
            };
            for (a, b) in approx.iter().zip(&exact) {
                assert!((a - b).abs() <= 1e-3);
            }
            assert!((approx.iter().sum::<f64>() - 1.0).abs() <= 1e-6);
        }
    }

    #[test]
    fn lut_exp_relative_error_small() {
        for i in 0..=1600 {
            let x = -(i as f64) * 0.01;
            let rel = (lut_exp(x) - x.exp()).abs() / x.exp();
            assert!(rel < 2e-5, "x={x} rel={rel}");
        }
    }
}
