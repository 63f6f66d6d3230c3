use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::Diagnostic;
use crate::scalar::Scalar;

use super::{MrDevice, WavelengthGrid};

/// Flat JSON form of the ring template and channel plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceConfig {
    pub radius_um: f64,
    pub order_m: u32,
    pub n_eff: f64,
    pub q_factor: f64,
    pub extinction_floor: f64,
    pub base_wavelength_nm: f64,
    pub channel_spacing_nm: f64,
    pub channel_count: usize,
    pub fsr_nm: f64,
}

impl Default for DeviceConfig {
    /// Placeholder values: a 5 µm ring resonant near 1549.85 nm with eight
    /// channels centred on it.
    fn default() -> Self {
        Self {
            radius_um: 5.0,
            order_m: 48,
            n_eff: 2.368,
            q_factor: 8000.0,
            extinction_floor: 0.0,
            base_wavelength_nm: 1544.25,
            channel_spacing_nm: 1.6,
            channel_count: 8,
            fsr_nm: 18.0,
        }
    }
}

impl DeviceConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn template<T: Scalar>(&self) -> Result<MrDevice<T>> {
        MrDevice::new(
            T::lit(self.radius_um),
            self.order_m,
            T::lit(self.n_eff),
            T::lit(self.q_factor),
            T::lit(self.extinction_floor),
            T::zero(),
        )
    }

    pub fn grid<T: Scalar>(&self) -> Result<WavelengthGrid<T>> {
        WavelengthGrid::new(
            T::lit(self.base_wavelength_nm),
            T::lit(self.channel_spacing_nm),
            self.channel_count,
            T::lit(self.fsr_nm),
        )
    }

    /// Ring template replicated onto every channel.
    pub fn bank<T: Scalar>(&self) -> Result<(WavelengthGrid<T>, Vec<MrDevice<T>>)> {
        let grid = self.grid()?;
        let devices = grid.bank_devices(&self.template()?)?;
        Ok((grid, devices))
    }

    pub fn diagnostics(&self, prefix: &str) -> Vec<Diagnostic> {
        let mut d = Vec::new();
        if let Err(Error::InvalidConfig(mut diags)) = self.template::<f64>() {
            for diag in &mut diags {
                diag.field = diag.field.replacen("device", prefix, 1);
            }
            d.extend(diags);
        }
        let grid = WavelengthGrid::<f64>::new(
            self.base_wavelength_nm,
            self.channel_spacing_nm,
            self.channel_count,
            self.fsr_nm,
        );
        match grid {
            Ok(g) => d.extend(g.diagnostics(prefix)),
            Err(Error::InvalidConfig(diags)) => {
                for mut diag in diags {
                    diag.field = diag.field.replacen("grid", prefix, 1);
                    d.push(diag);
                }
            }
            Err(_) => {}
        }
        d
    }
}
