//! Analytic microring, WDM grid, tuning and crosstalk models.

mod bank;
mod config;
mod crosstalk;
mod grid;
mod mr;
mod tuning;

pub use bank::{default_tuning_for, validate_bank, validate_bank_with, BankRule, Violation};
pub use config::DeviceConfig;
pub use crosstalk::{bank_crosstalk, heterodyne_crosstalk, homodyne_perturbation, NoiseContext};
pub use grid::WavelengthGrid;
pub use mr::{resonant_wavelength, through_transmission, MrDevice};
pub use tuning::{plan_shift, plan_tuning, TuningPlan};

use crate::scalar::Scalar;

/// Through-port response of a whole bank: the product of every ring's notch.
pub fn bank_spectrum<T: Scalar>(devices: &[MrDevice<T>], wavelengths_nm: &[T]) -> Vec<(T, T)> {
    wavelengths_nm
        .iter()
        .map(|&w| {
            let t = devices
                .iter()
                .fold(T::one(), |acc, d| acc * d.through_transmission(w));
            (w, t)
        })
        .collect()
}
