//! Ordered record of device-level events emitted by a run.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    DacWrite,
    AdcRead,
    MrTuneEo,
    MrTuneTo,
    VcselEmit,
    BpdRead,
    SoaPass,
    MemRead,
    MemWrite,
    DigitalOp,
}

impl EventKind {
    pub const ALL: [EventKind; 10] = [
        EventKind::DacWrite,
        EventKind::AdcRead,
        EventKind::MrTuneEo,
        EventKind::MrTuneTo,
        EventKind::VcselEmit,
        EventKind::BpdRead,
        EventKind::SoaPass,
        EventKind::MemRead,
        EventKind::MemWrite,
        EventKind::DigitalOp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::DacWrite => "dac_write",
            EventKind::AdcRead => "adc_read",
            EventKind::MrTuneEo => "mr_tune_eo",
            EventKind::MrTuneTo => "mr_tune_to",
            EventKind::VcselEmit => "vcsel_emit",
            EventKind::BpdRead => "bpd_read",
            EventKind::SoaPass => "soa_pass",
            EventKind::MemRead => "mem_read",
            EventKind::MemWrite => "mem_write",
            EventKind::DigitalOp => "digital_op",
        }
    }

    /// Conversions whose payload counts toward the energy-per-bit denominator.
    pub fn is_conversion(self) -> bool {
        matches!(self, EventKind::DacWrite | EventKind::AdcRead)
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        EventKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownEventKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub stage: String,
    pub kind: EventKind,
    pub count: u64,
    pub payload_bits: u64,
    /// MAC-equivalent operations completed by this event group.
    pub ops: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageLatency {
    pub label: String,
    pub latency_ns: f64,
}

/// Append-only event log. Stages execute sequentially; lanes that ran
/// concurrently are folded in with [`ScheduleTrace::merge_concurrent`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScheduleTrace {
    events: Vec<TraceEvent>,
    stages: Vec<StageLatency>,
    annotations: BTreeMap<String, u64>,
}

impl ScheduleTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_parts(
        events: Vec<TraceEvent>,
        stages: Vec<StageLatency>,
        annotations: BTreeMap<String, u64>,
    ) -> Self {
        Self {
            events,
            stages,
            annotations,
        }
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn stages(&self) -> &[StageLatency] {
        &self.stages
    }

    pub fn annotations(&self) -> &BTreeMap<String, u64> {
        &self.annotations
    }

    pub fn annotation(&self, key: &str) -> u64 {
        self.annotations.get(key).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty() && self.stages.is_empty() && self.annotations.is_empty()
    }

    /// Opens a new sequential stage. Subsequent events and latency land in it.
    pub fn begin_stage(&mut self, label: impl Into<String>) {
        self.stages.push(StageLatency {
            label: label.into(),
            latency_ns: 0.0,
        });
    }

    fn current_stage(&mut self) -> &mut StageLatency {
        if self.stages.is_empty() {
            self.begin_stage("main");
        }
        self.stages.last_mut().expect("stage exists")
    }

    pub fn record(&mut self, kind: EventKind, count: u64, payload_bits: u64) {
        self.record_ops(kind, count, payload_bits, 0);
    }

    pub fn record_ops(&mut self, kind: EventKind, count: u64, payload_bits: u64, ops: u64) {
        if count == 0 && payload_bits == 0 && ops == 0 {
            return;
        }
        let stage = self.current_stage().label.clone();
        self.events.push(TraceEvent {
            stage,
            kind,
            count,
            payload_bits,
            ops,
        });
    }

    pub fn add_latency(&mut self, ns: f64) {
        debug_assert!(ns >= 0.0);
        self.current_stage().latency_ns += ns;
    }

    pub fn annotate(&mut self, key: &str, n: u64) {
        *self.annotations.entry(key.to_string()).or_insert(0) += n;
    }

    /// Sequential composition: `self` then `other`.
    pub fn append(&mut self, other: ScheduleTrace) {
        self.events.extend(other.events);
        self.stages.extend(other.stages);
        for (k, v) in other.annotations {
            *self.annotations.entry(k).or_insert(0) += v;
        }
    }

    /// Folds lane-private traces that ran side by side into one stage.
    /// Events keep lane order; the stage latency is the slowest lane.
    pub fn merge_concurrent(&mut self, label: &str, lanes: Vec<ScheduleTrace>) {
        let latency = lanes
            .iter()
            .map(ScheduleTrace::total_latency_ns)
            .fold(0.0, f64::max);
        self.begin_stage(label);
        self.current_stage().latency_ns = latency;
        for lane in lanes {
            for mut ev in lane.events {
                ev.stage = label.to_string();
                self.events.push(ev);
            }
            for (k, v) in lane.annotations {
                *self.annotations.entry(k).or_insert(0) += v;
            }
        }
    }

    pub fn total_latency_ns(&self) -> f64 {
        self.stages.iter().map(|s| s.latency_ns).sum()
    }

    pub fn total_ops(&self) -> u64 {
        self.events.iter().map(|e| e.ops).sum()
    }

    pub fn count_of(&self, kind: EventKind) -> u64 {
        self.events
            .iter()
            .filter(|e| e.kind == kind)
            .map(|e| e.count)
            .sum()
    }

    pub fn bits_of(&self, kind: EventKind) -> u64 {
        self.events
            .iter()
            .filter(|e| e.kind == kind)
            .map(|e| e.payload_bits)
            .sum()
    }
}
