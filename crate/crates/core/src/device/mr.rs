use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A single microring resonator.
///
/// Lengths: radius in µm, wavelengths and tuning offsets in nm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MrDevice<T> {
    radius_um: T,
    order_m: u32,
    n_eff: T,
    q_factor: T,
    extinction_floor: T,
    tuning_offset_nm: T,
}

impl<T: Scalar> MrDevice<T> {
    pub fn new(
        radius_um: T,
        order_m: u32,
        n_eff: T,
        q_factor: T,
        extinction_floor: T,
        tuning_offset_nm: T,
    ) -> Result<Self> {
        let d = Self {
            radius_um,
            order_m,
            n_eff,
            q_factor,
            extinction_floor,
            tuning_offset_nm,
        };
        d.check()?;
        Ok(d)
    }

    fn check(&self) -> Result<()> {
        let bad = |field: &str, msg: &str| Err(Error::invalid(format!("device.{field}"), msg));
        if !(self.radius_um > T::zero() && self.radius_um.is_finite()) {
            return bad("radius_um", "must be finite and > 0");
        }
        if self.order_m == 0 {
            return bad("order_m", "must be >= 1");
        }
        if !(self.n_eff > T::zero() && self.n_eff.is_finite()) {
            return bad("n_eff", "must be finite and > 0");
        }
        if !(self.q_factor > T::zero() && self.q_factor.is_finite()) {
            return bad("q_factor", "must be finite and > 0");
        }
        if !(self.extinction_floor >= T::zero() && self.extinction_floor < T::one()) {
            return bad("extinction_floor", "must lie in [0, 1)");
        }
        let res = self.resonant_wavelength_nm();
        if !(res > T::zero() && res.is_finite()) {
            return bad(
                "tuning_offset_nm",
                "tuned resonance must be finite and positive",
            );
        }
        Ok(())
    }

    pub fn radius_um(&self) -> T {
        self.radius_um
    }
    pub fn order_m(&self) -> u32 {
        self.order_m
    }
    pub fn n_eff(&self) -> T {
        self.n_eff
    }
    pub fn q_factor(&self) -> T {
        self.q_factor
    }
    pub fn extinction_floor(&self) -> T {
        self.extinction_floor
    }
    pub fn tuning_offset_nm(&self) -> T {
        self.tuning_offset_nm
    }

    /// Untuned resonance `2π·R·n_eff / m`, in nm.
    pub fn natural_resonance_nm(&self) -> T {
        let two_pi = T::lit(2.0) * T::PI();
        two_pi * self.radius_um * T::lit(1000.0) * self.n_eff / T::from_count(self.order_m as i64)
    }

    pub fn resonant_wavelength_nm(&self) -> T {
        self.natural_resonance_nm() + self.tuning_offset_nm
    }

    /// Tuned resonance in µm.
    pub fn resonant_wavelength_um(&self) -> T {
        self.resonant_wavelength_nm() / T::lit(1000.0)
    }

    /// Half of the full width at half maximum, in nm.
    ///
    /// Set by the cavity (untuned resonance over Q); tuning moves the notch
    /// but does not change its width.
    pub fn half_linewidth_nm(&self) -> T {
        self.natural_resonance_nm() / (T::lit(2.0) * self.q_factor)
    }

    /// Lorentzian notch at the through port.
    pub fn through_transmission(&self, wavelength_nm: T) -> T {
        let detuning = wavelength_nm - self.resonant_wavelength_nm();
        T::one() - self.drop_fraction(detuning)
    }

    /// Power removed from the through port at the given detuning.
    pub fn drop_fraction(&self, detuning_nm: T) -> T {
        let hw = self.half_linewidth_nm();
        let hw2 = hw * hw;
        (T::one() - self.extinction_floor) * hw2 / (detuning_nm * detuning_nm + hw2)
    }

    /// Same ring, tuned so that its resonance lands on `target_nm`.
    pub fn tuned_to(&self, target_nm: T) -> Result<Self> {
        self.with_tuning_offset(target_nm - self.natural_resonance_nm())
    }

    pub fn with_tuning_offset(&self, offset_nm: T) -> Result<Self> {
        let d = Self {
            tuning_offset_nm: offset_nm,
            ..*self
        };
        d.check()?;
        Ok(d)
    }

    pub fn with_q_factor(&self, q: T) -> Result<Self> {
        let d = Self {
            q_factor: q,
            ..*self
        };
        d.check()?;
        Ok(d)
    }
}

/// Tuned resonant wavelength of `device`, in µm.
pub fn resonant_wavelength<T: Scalar>(device: &MrDevice<T>) -> T {
    device.resonant_wavelength_um()
}

pub fn through_transmission<T: Scalar>(device: &MrDevice<T>, wavelength_nm: T) -> T {
    device.through_transmission(wavelength_nm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dev(r: f64, m: u32, n: f64, off_nm: f64) -> MrDevice<f64> {
        MrDevice::new(r, m, n, 8000.0, 0.0, off_nm).unwrap()
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn resonance_matches_hand_values() {
        // 2π·5·2.4/48 evaluated independently
        let base = resonant_wavelength(&dev(5.0, 48, 2.4, 0.0));
        assert!((base - 1.570_796_326_794_896_6).abs() < 1e-12);
        let doubled = resonant_wavelength(&dev(5.0, 48, 4.8, 0.0));
        assert!((doubled - 2.0 * base).abs() < 1e-12);
        let shifted = resonant_wavelength(&dev(5.0, 48, 2.4, 1.0));
        assert!((shifted - 1.571_796_326_794_896_4).abs() < 1e-12);
    }

    #[test]
    fn transmission_shape() {
        let d = MrDevice::<f64>::new(5.0, 48, 2.4, 8000.0, 0.2, 0.0).unwrap();
        let res = d.resonant_wavelength_nm();
        let hw = d.half_linewidth_nm();
        assert!((d.through_transmission(res) - 0.2).abs() < 1e-15);
        assert!((d.through_transmission(res + hw) - 0.6).abs() < 1e-12);
        let clear = MrDevice::<f64>::new(5.0, 48, 2.4, 8000.0, 0.0, 0.0).unwrap();
        assert!(clear.through_transmission(res + 100.0 * hw) >= 0.9999);
        assert!((clear.through_transmission(res + hw) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(MrDevice::new(0.0, 48, 2.4, 8000.0, 0.0, 0.0).is_err());
        assert!(MrDevice::new(5.0, 0, 2.4, 8000.0, 0.0, 0.0).is_err());
        assert!(MrDevice::new(5.0, 48, -1.0, 8000.0, 0.0, 0.0).is_err());
        assert!(MrDevice::new(5.0, 48, 2.4, 0.0, 0.0, 0.0).is_err());
        assert!(MrDevice::new(5.0, 48, 2.4, 8000.0, 1.0, 0.0).is_err());
        assert!(MrDevice::new(5.0, 48, 2.4, 8000.0, 0.0, -2000.0).is_err());
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn works_in_single_precision() {
        let d = MrDevice::<f32>::new(5.0, 48, 2.4, 8000.0, 0.0, 0.0).unwrap();
        assert!((d.resonant_wavelength_um() - 1.570_796_3).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn resonance_monotone(r in 1.0f64..20.0, m in 10u32..200, n in 1.5f64..4.0, dr in 0.01f64..1.0, dn in 0.001f64..0.5) {
            let base = dev(r, m, n, 0.0).resonant_wavelength_nm();
            prop_assert!(dev(r + dr, m, n, 0.0).resonant_wavelength_nm() > base);
            prop_assert!(dev(r, m, n + dn, 0.0).resonant_wavelength_nm() > base);
            prop_assert!(dev(r, m + 1, n, 0.0).resonant_wavelength_nm() < base);
        }

        #[test]
        fn transmission_symmetric_and_bounded(detune in 0.0f64..5.0, floor in 0.0f64..0.99) {
            let d = MrDevice::new(5.0, 48, 2.4, 8000.0, floor, 0.0).unwrap();
            let res = d.resonant_wavelength_nm();
            let up = d.through_transmission(res + detune);
            let down = d.through_transmission(res - detune);
            prop_assert!((up - down).abs() <= 1e-12);
            prop_assert!(up >= floor - 1e-15 && up <= 1.0);
        }
    }
}
