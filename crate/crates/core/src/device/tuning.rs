use crate::perf::{CostTable, TuningCosts};
use crate::scalar::Scalar;

use super::MrDevice;

/// Split of a requested resonance shift between EO and TO tuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningPlan<T> {
    pub requested_nm: T,
    pub eo_shift_nm: T,
    pub to_shift_nm: T,
    pub energy_pj: T,
    pub latency_ns: T,
    pub feasible: bool,
}

impl<T: Scalar> TuningPlan<T> {
    fn infeasible(requested: T) -> Self {
        Self {
            requested_nm: requested,
            eo_shift_nm: T::zero(),
            to_shift_nm: T::zero(),
            energy_pj: T::zero(),
            latency_ns: T::zero(),
            feasible: false,
        }
    }
}

/// Plans a resonance shift of `target_shift_nm` on `device`.
///
/// Shifts inside the EO range use EO alone. Larger shifts saturate EO and
/// hand the excess to TO, whose energy is discounted by TED. Anything beyond
/// EO + TO range, or a shift that would push the resonance to a non-positive
/// wavelength, comes back with `feasible = false` and zero shifts.
pub fn plan_tuning<T: Scalar>(
    device: &MrDevice<T>,
    target_shift_nm: T,
    cost: &CostTable,
) -> TuningPlan<T> {
    let plan = plan_shift(target_shift_nm, &cost.tuning);
    let landed = device.resonant_wavelength_nm() + target_shift_nm;
    if plan.feasible && !(landed > T::zero() && landed.is_finite()) {
        return TuningPlan::infeasible(target_shift_nm);
    }
    plan
}

pub fn plan_shift<T: Scalar>(shift: T, t: &TuningCosts) -> TuningPlan<T> {
    let eo_range = T::lit(t.eo_range_nm);
    let to_range = T::lit(t.to_range_nm);
    let mag = shift.abs();
    if !shift.is_finite() || mag > eo_range + to_range {
        return TuningPlan::infeasible(shift);
    }
    if mag == T::zero() {
        return TuningPlan {
            requested_nm: shift,
            eo_shift_nm: T::zero(),
            to_shift_nm: T::zero(),
            energy_pj: T::zero(),
            latency_ns: T::zero(),
            feasible: true,
        };
    }
    let (eo, to) = if mag <= eo_range {
        (shift, T::zero())
    } else {
        let eo = eo_range.copysign(shift);
        (eo, shift - eo)
    };
    let energy = T::lit(t.eo_energy_pj_per_nm) * eo.abs()
        + T::lit(t.ted_discount) * T::lit(t.to_energy_pj_per_nm) * to.abs();
    let mut latency = T::lit(t.eo_latency_ns);
    if to != T::zero() {
        latency = latency.max(T::lit(t.to_latency_ns));
    }
    TuningPlan {
        requested_nm: shift,
        eo_shift_nm: eo,
        to_shift_nm: to,
        energy_pj: energy,
        latency_ns: latency,
        feasible: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ring() -> MrDevice<f64> {
        MrDevice::new(5.0, 48, 2.368, 8000.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn zero_shift_is_free() {
        let p = plan_tuning(&ring(), 0.0, &CostTable::default());
        assert!(p.feasible);
        assert_eq!((p.energy_pj, p.latency_ns), (0.0, 0.0));
    }

    #[test]
    fn small_shift_is_eo_only() {
        let cost = CostTable::default();
        let p = plan_tuning(&ring(), 0.3, &cost);
        assert!(p.feasible);
        assert_eq!(p.to_shift_nm, 0.0);
        assert_eq!(p.eo_shift_nm, 0.3);
        assert!((p.energy_pj - 0.3 * cost.tuning.eo_energy_pj_per_nm).abs() < 1e-12);
        assert_eq!(p.latency_ns, cost.tuning.eo_latency_ns);
    }

    #[test]
    fn large_shift_uses_discounted_to() {
        let cost = CostTable::default();
        let p = plan_tuning(&ring(), -3.0, &cost);
        assert!(p.feasible);
        assert_eq!(p.eo_shift_nm, -0.5);
        assert_eq!(p.to_shift_nm, -2.5);
        let t = cost.tuning;
        let expect = 0.5 * t.eo_energy_pj_per_nm + t.ted_discount * t.to_energy_pj_per_nm * 2.5;
        assert!((p.energy_pj - expect).abs() < 1e-9);
        assert_eq!(p.latency_ns, t.to_latency_ns);
    }

    #[test]
    fn range_exhaustion_is_flagged() {
        let cost = CostTable::default();
        let too_far = cost.tuning.eo_range_nm + cost.tuning.to_range_nm + 0.01;
        let p = plan_tuning(&ring(), too_far, &cost);
        assert!(!p.feasible);
        assert_eq!(p.requested_nm, too_far);
    }

    proptest! {
        #[test]
        fn plan_invariants(shift in -9.5f64..9.5) {
            let cost = CostTable::default();
            let p = plan_tuning(&ring(), shift, &cost);
            prop_assert!(p.feasible);
            prop_assert!(p.eo_shift_nm.abs() <= cost.tuning.eo_range_nm);
            prop_assert!(p.to_shift_nm.abs() <= cost.tuning.to_range_nm);
            prop_assert!((p.eo_shift_nm + p.to_shift_nm - shift).abs() < 1e-12);
            prop_assert!(p.energy_pj >= 0.0 && p.latency_ns >= 0.0);
            let back = plan_tuning(&ring(), -shift, &cost);
            prop_assert_eq!(back.energy_pj, p.energy_pj);
            prop_assert_eq!(back.latency_ns, p.latency_ns);
        }
    }
}
