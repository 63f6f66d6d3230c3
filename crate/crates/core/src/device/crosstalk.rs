//! Heterodyne and homodyne crosstalk.
//!
//! Heterodyne: the victim ring's Lorentzian tail removes a fraction of every
//! other channel's power. Homodyne: same-wavelength leakage modeled as an
//! additive perturbation of `±amplitude·signal` with a seeded random sign.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::Diagnostic;
use crate::scalar::Scalar;

use super::{MrDevice, WavelengthGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseContext {
    pub heterodyne_enabled: bool,
    pub homodyne_enabled: bool,
    pub homodyne_amplitude: f64,
    pub rng_seed: u64,
    pub detector_sensitivity: f64,
}

impl Default for NoiseContext {
    fn default() -> Self {
        Self::disabled()
    }
}

impl NoiseContext {
    pub fn disabled() -> Self {
        Self {
            heterodyne_enabled: false,
            homodyne_enabled: false,
            homodyne_amplitude: 0.01,
            rng_seed: 0,
            detector_sensitivity: 0.5,
        }
    }

    pub fn enabled(seed: u64) -> Self {
        Self {
            heterodyne_enabled: true,
            homodyne_enabled: true,
            rng_seed: seed,
            ..Self::disabled()
        }
    }

    pub fn any_enabled(&self) -> bool {
        self.heterodyne_enabled || self.homodyne_enabled
    }

    pub fn diagnostics(&self, prefix: &str) -> Vec<Diagnostic> {
        let mut d = Vec::new();
        if !(0.0..1.0).contains(&self.homodyne_amplitude) {
            d.push(Diagnostic::new(
                format!("{prefix}.homodyne_amplitude"),
                format!("must lie in [0, 1), got {}", self.homodyne_amplitude),
            ));
        }
        if !(self.detector_sensitivity > 0.0 && self.detector_sensitivity <= 1.0) {
            d.push(Diagnostic::new(
                format!("{prefix}.detector_sensitivity"),
                format!("must lie in (0, 1], got {}", self.detector_sensitivity),
            ));
        }
        d
    }
}

/// Total power fraction leaking into `victim_channel` from every other channel.
///
/// Each aggressor contributes `1 − T_victim(λ_aggressor)`. Aggressors more
/// than one FSR away from the victim are ignored.
pub fn heterodyne_crosstalk<T: Scalar>(
    grid: &WavelengthGrid<T>,
    devices: &[MrDevice<T>],
    victim_channel: usize,
) -> Result<T> {
    if devices.len() != grid.channel_count() {
        return Err(Error::LengthMismatch {
            left: devices.len(),
            right: grid.channel_count(),
        });
    }
    let victim = devices.get(victim_channel).ok_or(Error::IndexOutOfRange {
        index: victim_channel,
        len: devices.len(),
    })?;
    let centre = grid.channel_wavelength(victim_channel);
    let mut total = T::zero();
    for ch in (0..grid.channel_count()).filter(|&c| c != victim_channel) {
        let lambda = grid.channel_wavelength(ch);
        if (lambda - centre).abs() > grid.fsr_nm() {
            continue;
        }
        total = total + (T::one() - victim.through_transmission(lambda));
    }
    Ok(total)
}

/// Per-channel heterodyne crosstalk for a whole bank.
pub fn bank_crosstalk<T: Scalar>(
    grid: &WavelengthGrid<T>,
    devices: &[MrDevice<T>],
) -> Result<Vec<T>> {
    (0..grid.channel_count())
        .map(|c| heterodyne_crosstalk(grid, devices, c))
        .collect()
}

/// Homodyne perturbation for a coherent accumulation of total optical
/// amplitude `signal`.
pub fn homodyne_perturbation<T: Scalar, R: Rng>(rng: &mut R, amplitude: f64, signal: T) -> T {
    let sign = if rng.gen::<bool>() { T::one() } else { -T::one() };
    sign * T::lit(amplitude) * signal
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bank(spacing: f64, count: usize, q: f64) -> (WavelengthGrid<f64>, Vec<MrDevice<f64>>) {
        let grid = WavelengthGrid::new(1548.4, spacing, count, 18.0).unwrap();
        let ring = MrDevice::new(5.0, 48, 2.368, q, 0.0, 0.0).unwrap();
        let devices = grid.bank_devices(&ring).unwrap();
        (grid, devices)
    }

    #[test]
    fn single_channel_has_no_aggressors() {
        let (g, d) = bank(1.6, 1, 8000.0);
        assert_eq!(heterodyne_crosstalk(&g, &d, 0).unwrap(), 0.0);
    }

    #[test]
    fn three_channel_value_matches_tail_sum() {
        // Independent evaluation: δ = 2π·5000·2.368/48 / (2·8000),
        // xt0 = δ²/(1.6²+δ²) + δ²/(3.2²+δ²), xt1 = 2·δ²/(1.6²+δ²).
        let (g, d) = bank(1.6, 3, 8000.0);
        let xt0 = heterodyne_crosstalk(&g, &d, 0).unwrap();
        let xt1 = heterodyne_crosstalk(&g, &d, 1).unwrap();
        let xt2 = heterodyne_crosstalk(&g, &d, 2).unwrap();
        assert!((xt0 - 0.004_567_308_591_483_12).abs() / xt0 < 1e-9, "{xt0}");
        assert!((xt1 - 0.007_303_681_975_831_614).abs() / xt1 < 1e-9, "{xt1}");
        assert!((xt0 - xt2).abs() / xt0 < 1e-12);
    }

    #[test]
    fn victim_out_of_range() {
        let (g, d) = bank(1.6, 3, 8000.0);
        assert!(matches!(
            heterodyne_crosstalk(&g, &d, 3),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn crosstalk_falls_with_spacing_and_q() {
        let mut prev = f64::INFINITY;
        for step in 0..20 {
            let cs = 0.4 + 0.1 * step as f64;
            let (g, d) = bank(cs, 5, 8000.0);
            let xt = heterodyne_crosstalk(&g, &d, 2).unwrap();
            assert!(xt <= prev);
            prev = xt;
        }
        let mut prev = f64::INFINITY;
        for q in [2000.0, 4000.0, 8000.0, 16000.0] {
            let (g, d) = bank(1.6, 5, q);
            let xt = heterodyne_crosstalk(&g, &d, 2).unwrap();
            assert!(xt <= prev);
            prev = xt;
        }
    }

    #[test]
    fn homodyne_is_seeded_and_bounded() {
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..16)
                .map(|_| homodyne_perturbation(&mut rng, 0.05, 2.0f64))
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(7), draw(7));
        assert!(draw(7).iter().all(|v| v.abs() == 0.1));
    }

    #[test]
    fn noise_context_bounds() {
        let mut n = NoiseContext::enabled(1);
        assert!(n.diagnostics("noise").is_empty());
        n.homodyne_amplitude = 1.0;
        n.detector_sensitivity = 0.0;
        assert_eq!(n.diagnostics("noise").len(), 2);
    }
}
