use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::device::{bank_crosstalk, homodyne_perturbation, MrDevice, NoiseContext, WavelengthGrid};
use crate::error::{Error, Result};
use crate::harness::Diagnostic;
use crate::perf::CostTable;
use crate::scalar::Scalar;

use super::EventKind;

/// Engine knobs that are not part of the device or cost description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineSettings {
    pub bank_cols_n: usize,
    pub quant_bits: u32,
}

impl Default for EngineSettings {
    fn default() -> Self {
        Self {
            bank_cols_n: 8,
            quant_bits: 8,
        }
    }
}

impl EngineSettings {
    pub fn diagnostics(&self, prefix: &str) -> Vec<Diagnostic> {
        let mut d = Vec::new();
        if self.bank_cols_n == 0 {
            d.push(Diagnostic::new(
                format!("{prefix}.bank_cols_n"),
                "must be >= 1",
            ));
        }
        if !(2..=16).contains(&self.quant_bits) {
            d.push(Diagnostic::new(
                format!("{prefix}.quant_bits"),
                "must lie in 2..=16",
            ));
        }
        d
    }
}

/// Photonic engine: K×N MR bank arrays on a WDM grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonicEngineConfig<T> {
    /// One wavelength per row element; equals the grid's channel count.
    pub bank_rows_k: usize,
    pub bank_cols_n: usize,
    pub grid: WavelengthGrid<T>,
    pub ring: MrDevice<T>,
    pub noise: NoiseContext,
    pub quant_bits: u32,
    pub modulation_rate_ghz: f64,
    pub cost: CostTable,
}

impl<T: Scalar> PhotonicEngineConfig<T> {
    pub fn new(
        grid: WavelengthGrid<T>,
        ring: MrDevice<T>,
        noise: NoiseContext,
        settings: EngineSettings,
        cost: CostTable,
    ) -> Result<Self> {
        let cfg = Self {
            bank_rows_k: grid.channel_count(),
            bank_cols_n: settings.bank_cols_n,
            grid,
            ring,
            noise,
            quant_bits: settings.quant_bits,
            modulation_rate_ghz: cost.modulation_rate_ghz,
            cost,
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<()> {
        let mut d = Vec::new();
        if self.bank_rows_k != self.grid.channel_count() {
            d.push(Diagnostic::new(
                "engine.bank_rows_k",
                format!(
                    "{} rows but the grid has {} channels",
                    self.bank_rows_k,
                    self.grid.channel_count()
                ),
            ));
        }
        if !(self.modulation_rate_ghz > 0.0 && self.modulation_rate_ghz.is_finite()) {
            d.push(Diagnostic::new(
                "engine.modulation_rate_ghz",
                "must be finite and > 0",
            ));
        }
        d.extend(
            EngineSettings {
                bank_cols_n: self.bank_cols_n,
                quant_bits: self.quant_bits,
            }
            .diagnostics("engine"),
        );
        d.extend(self.noise.diagnostics("noise"));
        d.extend(self.cost.diagnostics("cost"));
        if d.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(d))
        }
    }

    pub fn step_ns(&self) -> f64 {
        1.0 / self.modulation_rate_ghz
    }

    pub fn latency(&self, kind: EventKind) -> f64 {
        self.cost.latency(kind)
    }

    pub fn bits(&self) -> u64 {
        self.quant_bits as u64
    }
}

/// Stateful executor for the photonic kernels: holds the per-channel
/// crosstalk figures and the seeded noise stream.
#[derive(Debug, Clone)]
pub struct PhotonicEngine<T> {
    cfg: PhotonicEngineConfig<T>,
    crosstalk: Vec<T>,
    rng: ChaCha8Rng,
}

impl<T: Scalar> PhotonicEngine<T> {
    pub fn new(cfg: PhotonicEngineConfig<T>) -> Result<Self> {
        cfg.check()?;
        let devices = cfg.grid.bank_devices(&cfg.ring)?;
        let crosstalk = bank_crosstalk(&cfg.grid, &devices)?;
        let rng = ChaCha8Rng::seed_from_u64(cfg.noise.rng_seed);
        Ok(Self {
            cfg,
            crosstalk,
            rng,
        })
    }

    pub fn config(&self) -> &PhotonicEngineConfig<T> {
        &self.cfg
    }

    pub fn crosstalk(&self) -> &[T] {
        &self.crosstalk
    }

    pub fn noise_free(&self) -> bool {
        !self.cfg.noise.any_enabled()
    }

    /// Heterodyne factor for one product on `channel`: `1 + u·xt`, `u ∈ [−1, 1]`.
    pub(crate) fn heterodyne_factor(&mut self, channel: usize) -> T {
        if !self.cfg.noise.heterodyne_enabled {
            return T::one();
        }
        let xt = self.crosstalk[channel % self.crosstalk.len()];
        let u = T::lit(self.rng.gen_range(-1.0..=1.0));
        T::one() + u * xt
    }

    pub(crate) fn homodyne(&mut self, signal: T) -> T {
        if !self.cfg.noise.homodyne_enabled {
            return T::zero();
        }
        homodyne_perturbation(&mut self.rng, self.cfg.noise.homodyne_amplitude, signal)
    }
}
