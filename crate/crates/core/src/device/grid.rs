use crate::error::{Error, Result};
use crate::harness::Diagnostic;
use crate::scalar::Scalar;

use super::MrDevice;

/// WDM channel plan. Channel `i` sits at `base + i·spacing`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavelengthGrid<T> {
    base_wavelength_nm: T,
    channel_spacing_nm: T,
    channel_count: usize,
    fsr_nm: T,
}

impl<T: Scalar> WavelengthGrid<T> {
    /// Checks the per-field invariants. Whether the channels fit in one FSR is
    /// reported separately by [`WavelengthGrid::diagnostics`] so that bank
    /// validation can flag it as a violation instead of refusing the grid.
    pub fn new(
        base_wavelength_nm: T,
        channel_spacing_nm: T,
        channel_count: usize,
        fsr_nm: T,
    ) -> Result<Self> {
        let g = Self {
            base_wavelength_nm,
            channel_spacing_nm,
            channel_count,
            fsr_nm,
        };
        let fatal: Vec<_> = g
            .diagnostics("grid")
            .into_iter()
            .filter(|d| !d.field.ends_with("fsr_fit"))
            .collect();
        if fatal.is_empty() {
            Ok(g)
        } else {
            Err(Error::InvalidConfig(fatal))
        }
    }

    pub fn base_wavelength_nm(&self) -> T {
        self.base_wavelength_nm
    }
    pub fn channel_spacing_nm(&self) -> T {
        self.channel_spacing_nm
    }
    pub fn channel_count(&self) -> usize {
        self.channel_count
    }
    pub fn fsr_nm(&self) -> T {
        self.fsr_nm
    }

    pub fn channel_wavelength(&self, i: usize) -> T {
        self.base_wavelength_nm + T::from_count(i as i64) * self.channel_spacing_nm
    }

    /// Width occupied by the channel plan, `(count − 1)·spacing`.
    pub fn span_nm(&self) -> T {
        T::from_count(self.channel_count as i64 - 1) * self.channel_spacing_nm
    }

    pub fn fits_fsr(&self) -> bool {
        self.span_nm() < self.fsr_nm
    }

    pub fn with_spacing(&self, spacing: T) -> Result<Self> {
        Self::new(
            self.base_wavelength_nm,
            spacing,
            self.channel_count,
            self.fsr_nm,
        )
    }

    pub fn diagnostics(&self, prefix: &str) -> Vec<Diagnostic> {
        let mut d = Vec::new();
        if !(self.base_wavelength_nm > T::zero() && self.base_wavelength_nm.is_finite()) {
            d.push(Diagnostic::new(
                format!("{prefix}.base_wavelength_nm"),
                "must be finite and > 0",
            ));
        }
        if !(self.channel_spacing_nm > T::zero() && self.channel_spacing_nm.is_finite()) {
            d.push(Diagnostic::new(
                format!("{prefix}.channel_spacing_nm"),
                "must be finite and > 0",
            ));
        }
        if self.channel_count == 0 {
            d.push(Diagnostic::new(
                format!("{prefix}.channel_count"),
                "must be >= 1",
            ));
        }
        if !(self.fsr_nm > T::zero() && self.fsr_nm.is_finite()) {
            d.push(Diagnostic::new(
                format!("{prefix}.fsr_nm"),
                "must be finite and > 0",
            ));
        } else if self.channel_count > 0 && !self.fits_fsr() {
            d.push(Diagnostic::new(
                format!("{prefix}.fsr_fit"),
                format!(
                    "channels span {} nm which does not fit inside fsr_nm = {}",
                    self.span_nm(),
                    self.fsr_nm
                ),
            ));
        }
        d
    }

    /// One copy of `template` per channel, each tuned onto its channel.
    pub fn bank_devices(&self, template: &MrDevice<T>) -> Result<Vec<MrDevice<T>>> {
        (0..self.channel_count)
            .map(|i| template.tuned_to(self.channel_wavelength(i)))
            .collect()
    }
}
