//! Device cost table: per-event energy and latency, tuning costs, link energy.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::Diagnostic;
use crate::kernels::EventKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventCost {
    /// Fixed energy per event (pJ).
    pub energy_pj: f64,
    /// Additional energy per payload bit (fJ/bit).
    #[serde(default)]
    pub energy_fj_per_bit: f64,
    pub latency_ns: f64,
}

impl EventCost {
    pub const fn new(energy_pj: f64, energy_fj_per_bit: f64, latency_ns: f64) -> Self {
        Self {
            energy_pj,
            energy_fj_per_bit,
            latency_ns,
        }
    }
}

/// Hybrid EO/TO tuning parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningCosts {
    pub eo_range_nm: f64,
    pub to_range_nm: f64,
    pub eo_energy_pj_per_nm: f64,
    pub to_energy_pj_per_nm: f64,
    pub eo_latency_ns: f64,
    pub to_latency_ns: f64,
    /// Multiplicative discount on TO energy from thermal eigenmode decomposition.
    pub ted_discount: f64,
}

impl Default for TuningCosts {
    fn default() -> Self {
        Self {
            eo_range_nm: 0.5,
            to_range_nm: 9.0,
            eo_energy_pj_per_nm: 0.8,
            to_energy_pj_per_nm: 275.0,
            eo_latency_ns: 0.1,
            to_latency_ns: 4000.0,
            ted_discount: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostTable {
    pub events: BTreeMap<EventKind, EventCost>,
    pub tuning: TuningCosts,
    /// Optical link energy charged on every emitted payload bit (fJ/bit).
    pub link_energy_fj_per_bit: f64,
    pub modulation_rate_ghz: f64,
    /// Free-form provenance labels, e.g. which entries are placeholders.
    #[serde(default)]
    pub sources: BTreeMap<String, String>,
}

impl Default for CostTable {
    fn default() -> Self {
        use EventKind::*;
        let events = BTreeMap::from([
            (DacWrite, EventCost::new(0.2, 0.0, 0.08)),
            (AdcRead, EventCost::new(0.5, 0.0, 0.1)),
            (MrTuneEo, EventCost::new(0.04, 0.0, 0.1)),
            (MrTuneTo, EventCost::new(27.5, 0.0, 4000.0)),
            (VcselEmit, EventCost::new(0.1, 0.0, 0.01)),
            (BpdRead, EventCost::new(0.05, 0.0, 0.02)),
            (SoaPass, EventCost::new(0.3, 0.0, 0.03)),
            (MemRead, EventCost::new(0.0, 10.0, 1.0)),
            (MemWrite, EventCost::new(0.0, 12.0, 1.0)),
            (DigitalOp, EventCost::new(0.05, 0.0, 0.5)),
        ]);
        let sources = BTreeMap::from([
            ("modulation_rate_ghz".into(), "anchored: >50 GHz modulators".into()),
            ("link_energy_fj_per_bit".into(), "anchored: <70 fJ/bit links".into()),
            ("events".into(), "placeholder device estimates".into()),
            ("events.mem_read".into(), "placeholder for a memory model".into()),
            ("events.mem_write".into(), "placeholder for a memory model".into()),
            ("tuning".into(), "placeholder; to_range_nm is FSR/2 of the default grid".into()),
        ]);
        Self {
            events,
            tuning: TuningCosts::default(),
            link_energy_fj_per_bit: 70.0,
            modulation_rate_ghz: 50.0,
            sources,
        }
    }
}

impl CostTable {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn get(&self, kind: EventKind) -> Result<&EventCost> {
        self.events.get(&kind).ok_or(Error::MissingCost(kind.as_str()))
    }

    /// Latency lookup used by kernels; missing entries count as zero here and
    /// are rejected by [`CostTable::diagnostics`] before any run.
    pub fn latency(&self, kind: EventKind) -> f64 {
        self.events.get(&kind).map_or(0.0, |c| c.latency_ns)
    }

    /// Nanoseconds per modulation step.
    pub fn step_ns(&self) -> f64 {
        1.0 / self.modulation_rate_ghz
    }

    /// Returns a copy with every energy figure multiplied by `factor`.
    pub fn scale_energy(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for c in out.events.values_mut() {
            c.energy_pj *= factor;
            c.energy_fj_per_bit *= factor;
        }
        out.link_energy_fj_per_bit *= factor;
        out.tuning.eo_energy_pj_per_nm *= factor;
        out.tuning.to_energy_pj_per_nm *= factor;
        out
    }

    pub fn diagnostics(&self, prefix: &str) -> Vec<Diagnostic> {
        let mut d = Vec::new();
        for kind in EventKind::ALL {
            match self.events.get(&kind) {
                None => d.push(Diagnostic::new(
                    format!("{prefix}.events.{kind}"),
                    "missing cost entry",
                )),
                Some(c) => {
                    for (name, v) in [
                        ("energy_pj", c.energy_pj),
                        ("energy_fj_per_bit", c.energy_fj_per_bit),
                        ("latency_ns", c.latency_ns),
                    ] {
                        if !(v >= 0.0 && v.is_finite()) {
                            d.push(Diagnostic::new(
                                format!("{prefix}.events.{kind}.{name}"),
                                format!("must be finite and >= 0, got {v}"),
                            ));
                        }
                    }
                }
            }
        }
        let t = &self.tuning;
        for (name, v) in [
            ("eo_range_nm", t.eo_range_nm),
            ("to_range_nm", t.to_range_nm),
            ("eo_energy_pj_per_nm", t.eo_energy_pj_per_nm),
            ("to_energy_pj_per_nm", t.to_energy_pj_per_nm),
            ("eo_latency_ns", t.eo_latency_ns),
            ("to_latency_ns", t.to_latency_ns),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                d.push(Diagnostic::new(
                    format!("{prefix}.tuning.{name}"),
                    format!("must be finite and >= 0, got {v}"),
                ));
            }
        }
        if !(t.ted_discount > 0.0 && t.ted_discount <= 1.0) {
            d.push(Diagnostic::new(
                format!("{prefix}.tuning.ted_discount"),
                format!("must lie in (0, 1], got {}", t.ted_discount),
            ));
        }
        if !(self.link_energy_fj_per_bit >= 0.0 && self.link_energy_fj_per_bit.is_finite()) {
            d.push(Diagnostic::new(
                format!("{prefix}.link_energy_fj_per_bit"),
                "must be finite and >= 0",
            ));
        }
        if !(self.modulation_rate_ghz > 0.0 && self.modulation_rate_ghz.is_finite()) {
            d.push(Diagnostic::new(
                format!("{prefix}.modulation_rate_ghz"),
                "must be finite and > 0",
            ));
        }
        d
    }
}
