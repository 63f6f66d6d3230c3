use std::fmt;

use serde::Serialize;

use crate::perf::TuningCosts;
use crate::scalar::Scalar;

use super::crosstalk::heterodyne_crosstalk;
use super::tuning::plan_shift;
use super::{MrDevice, NoiseContext, WavelengthGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BankRule {
    DeviceCount,
    FsrFit,
    Snr,
    TuningRange,
}

impl BankRule {
    pub fn as_str(self) -> &'static str {
        match self {
            BankRule::DeviceCount => "device_count",
            BankRule::FsrFit => "fsr_fit",
            BankRule::Snr => "snr",
            BankRule::TuningRange => "tuning_range",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    /// `None` for bank-wide rules.
    pub channel: Option<usize>,
    pub rule: BankRule,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.channel {
            Some(c) => write!(f, "channel {c}: {}: {}", self.rule.as_str(), self.detail),
            None => write!(f, "bank: {}: {}", self.rule.as_str(), self.detail),
        }
    }
}

/// Default tuning ranges for a grid: EO ±0.5 nm, TO ±FSR/2.
pub fn default_tuning_for<T: Scalar>(grid: &WavelengthGrid<T>) -> TuningCosts {
    TuningCosts {
        to_range_nm: grid.fsr_nm().as_f64() / 2.0,
        ..TuningCosts::default()
    }
}

/// Design-rule check of a WDM bank with default tuning ranges.
pub fn validate_bank<T: Scalar>(
    grid: &WavelengthGrid<T>,
    devices: &[MrDevice<T>],
    noise: &NoiseContext,
) -> Vec<Violation> {
    validate_bank_with(grid, devices, noise, &default_tuning_for(grid))
}

/// Rules:
/// - all channels fit in one FSR;
/// - the weakest full-scale signal, `1 − extinction_floor`, minus heterodyne
///   crosstalk (and homodyne leakage when enabled) stays above the detector
///   sensitivity;
/// - each device's tuning offset is reachable with the hybrid tuner.
pub fn validate_bank_with<T: Scalar>(
    grid: &WavelengthGrid<T>,
    devices: &[MrDevice<T>],
    noise: &NoiseContext,
    tuning: &TuningCosts,
) -> Vec<Violation> {
    let mut out = Vec::new();
    if devices.len() != grid.channel_count() {
        out.push(Violation {
            channel: None,
            rule: BankRule::DeviceCount,
            detail: format!(
                "{} devices for {} channels",
                devices.len(),
                grid.channel_count()
            ),
        });
        return out;
    }
    if !grid.fits_fsr() {
        out.push(Violation {
            channel: None,
            rule: BankRule::FsrFit,
            detail: format!(
                "span {} nm >= fsr {} nm",
                grid.span_nm(),
                grid.fsr_nm()
            ),
        });
    }
    let sensitivity = noise.detector_sensitivity;
    let homodyne = if noise.homodyne_enabled {
        noise.homodyne_amplitude
    } else {
        0.0
    };
    for (ch, dev) in devices.iter().enumerate() {
        let xt = heterodyne_crosstalk(grid, devices, ch)
            .map(|v| v.as_f64())
            .unwrap_or(f64::INFINITY);
        let signal = 1.0 - dev.extinction_floor().as_f64();
        let margin = signal - xt - homodyne;
        if margin <= sensitivity {
            out.push(Violation {
                channel: Some(ch),
                rule: BankRule::Snr,
                detail: format!(
                    "signal {signal:.6} - crosstalk {xt:.6} - homodyne {homodyne:.6} <= sensitivity {sensitivity}"
                ),
            });
        }
        let plan = plan_shift(dev.tuning_offset_nm(), tuning);
        if !plan.feasible {
            out.push(Violation {
                channel: Some(ch),
                rule: BankRule::TuningRange,
                detail: format!(
                    "offset {} nm exceeds EO {} + TO {} nm",
                    dev.tuning_offset_nm(),
                    tuning.eo_range_nm,
                    tuning.to_range_nm
                ),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(q: f64) -> MrDevice<f64> {
        MrDevice::new(5.0, 48, 2.368, q, 0.0, 0.0).unwrap()
    }

    fn noise() -> NoiseContext {
        NoiseContext {
            detector_sensitivity: 0.98,
            ..NoiseContext::disabled()
        }
    }

    #[test]
    fn single_channel_feasible_bank_is_clean() {
        let grid = WavelengthGrid::new(1549.8, 1.6, 1, 18.0).unwrap();
        let devs = grid.bank_devices(&ring(8000.0)).unwrap();
        assert!(validate_bank(&grid, &devs, &noise()).is_empty());
    }

    #[test]
    fn fsr_overflow_reported() {
        let grid = WavelengthGrid::new(1545.0, 2.0, 12, 18.0).unwrap();
        let devs = grid.bank_devices(&ring(20000.0)).unwrap();
        let v = validate_bank(&grid, &devs, &noise());
        assert!(v.iter().any(|v| v.rule == BankRule::FsrFit));
    }

    #[test]
    fn unreachable_offset_reported() {
        let grid = WavelengthGrid::new(1570.0, 1.6, 2, 18.0).unwrap();
        let devs = grid.bank_devices(&ring(8000.0)).unwrap();
        let v = validate_bank(&grid, &devs, &noise());
        assert_eq!(
            v.iter().filter(|v| v.rule == BankRule::TuningRange).count(),
            2
        );
    }

    #[test]
    fn shrinking_spacing_hits_interior_channels_first() {
        let count = 6;
        let mut first: Option<Vec<usize>> = None;
        for step in 0..200 {
            let cs = 2.0 - 0.01 * step as f64;
            let grid = WavelengthGrid::new(1547.0, cs, count, 18.0).unwrap();
            let devs = grid.bank_devices(&ring(8000.0)).unwrap();
            let bad: Vec<usize> = validate_bank(&grid, &devs, &noise())
                .into_iter()
                .filter(|v| v.rule == BankRule::Snr)
                .filter_map(|v| v.channel)
                .collect();
            if !bad.is_empty() {
                first = Some(bad);
                break;
            }
        }
        let first = first.expect("some spacing violates the margin");
        assert!(first.iter().all(|&c| c != 0 && c != count - 1), "{first:?}");
    }

    #[test]
    fn device_count_mismatch() {
        let grid = WavelengthGrid::new(1549.8, 1.6, 2, 18.0).unwrap();
        let v = validate_bank(&grid, &[ring(8000.0)], &noise());
        assert_eq!(v[0].rule, BankRule::DeviceCount);
    }
}
