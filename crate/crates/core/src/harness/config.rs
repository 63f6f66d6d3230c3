use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::device::{DeviceConfig, NoiseContext};
use crate::error::{Error, Result};
use crate::ghost::{GhostConfig, GhostSettings};
use crate::kernels::{EngineSettings, PhotonicEngineConfig};
use crate::perf::CostTable;
use crate::scalar::Scalar;

use super::Diagnostic;

/// Complete simulator configuration. Every section is optional in JSON.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub device: DeviceConfig,
    pub engine: EngineSettings,
    pub noise: NoiseContext,
    pub ghost: GhostSettings,
    pub cost: CostTable,
}

impl SimConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Every violated cross-field invariant, named by field path.
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut d = self.device.diagnostics("device");
        d.extend(self.engine.diagnostics("engine"));
        d.extend(self.noise.diagnostics("noise"));
        d.extend(self.ghost.diagnostics("ghost"));
        d.extend(self.cost.diagnostics("cost"));
        d
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.diagnostics();
        if d.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(d))
        }
    }

    /// Engine configuration with the noise stream seeded by `seed`.
    pub fn engine_config<T: Scalar>(&self, seed: u64) -> Result<PhotonicEngineConfig<T>> {
        self.validate()?;
        let (grid, ring) = (self.device.grid()?, self.device.template()?);
        let noise = NoiseContext {
            rng_seed: seed,
            ..self.noise
        };
        PhotonicEngineConfig::new(grid, ring, noise, self.engine, self.cost.clone())
    }

    pub fn ghost_config<T: Scalar>(&self, seed: u64) -> Result<GhostConfig<T>> {
        GhostConfig::new(self.ghost, self.engine_config(seed)?)
    }
}

/// Loads a configuration file, or the defaults when no path is given, and
/// optionally replaces the cost table from a separate file.
pub fn validate_config(config: Option<&Path>, cost: Option<&Path>) -> Result<SimConfig> {
    let mut cfg = match config {
        Some(p) => SimConfig::load(p)?,
        None => SimConfig::default(),
    };
    if let Some(p) = cost {
        cfg.cost = CostTable::load(p)?;
    }
    cfg.validate()?;
    Ok(cfg)
}
