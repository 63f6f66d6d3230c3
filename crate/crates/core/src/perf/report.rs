//! Trace accounting: energy, latency, EPB and GOPS.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{EventKind, ScheduleTrace, StageLatency, TraceEvent};
use crate::tensor::fmt_num;

use super::CostTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageBreakdown {
    pub stage: String,
    pub energy_pj: f64,
    pub latency_ns: f64,
    pub ops: u64,
    pub bits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub total_energy_pj: f64,
    pub total_latency_ns: f64,
    /// DAC input plus ADC output payload bits.
    pub total_bits: u64,
    pub total_ops: u64,
    /// fJ per bit; 0 when `epb_defined` is false.
    pub epb_fj_per_bit: f64,
    pub epb_defined: bool,
    /// Operations per nanosecond, i.e. giga-ops per second; 0 when undefined.
    pub gops: f64,
    pub gops_defined: bool,
    pub stages: Vec<StageBreakdown>,
}

/// Energy of one event row: `count·energy_pj + payload_bits·fJ/bit`, plus
/// link energy on every emitted optical bit.
pub fn event_energy_pj(ev: &TraceEvent, cost: &CostTable) -> Result<f64> {
    let c = cost.get(ev.kind)?;
    let mut e = ev.count as f64 * c.energy_pj + ev.payload_bits as f64 * c.energy_fj_per_bit / 1000.0;
    if ev.kind == EventKind::VcselEmit {
        e += ev.payload_bits as f64 * cost.link_energy_fj_per_bit / 1000.0;
    }
    Ok(e)
}

/// Bits an event contributes to the EPB denominator.
pub fn event_bits(ev: &TraceEvent) -> u64 {
    if ev.kind.is_conversion() {
        ev.payload_bits
    } else {
        0
    }
}

pub fn account_trace(trace: &ScheduleTrace, cost: &CostTable) -> Result<EnergyReport> {
    let mut stages: Vec<StageBreakdown> = Vec::new();
    let slot = |stages: &mut Vec<StageBreakdown>, label: &str| -> usize {
        match stages.iter().position(|s| s.stage == label) {
            Some(i) => i,
            None => {
                stages.push(StageBreakdown {
                    stage: label.to_string(),
                    energy_pj: 0.0,
                    latency_ns: 0.0,
                    ops: 0,
                    bits: 0,
                });
                stages.len() - 1
            }
        }
    };
    for s in trace.stages() {
        let i = slot(&mut stages, &s.label);
        stages[i].latency_ns += s.latency_ns;
    }

    let mut total_energy = 0.0;
    let mut total_bits = 0u64;
    let mut total_ops = 0u64;
    for ev in trace.events() {
        let e = event_energy_pj(ev, cost)?;
        total_energy += e;
        total_bits += event_bits(ev);
        total_ops += ev.ops;
        let i = slot(&mut stages, &ev.stage);
        stages[i].energy_pj += e;
        stages[i].ops += ev.ops;
        stages[i].bits += event_bits(ev);
    }
    let total_latency = trace.total_latency_ns();

    let epb_defined = total_bits > 0;
    let gops_defined = total_latency > 0.0;
    Ok(EnergyReport {
        total_energy_pj: total_energy,
        total_latency_ns: total_latency,
        total_bits,
        total_ops,
        epb_fj_per_bit: if epb_defined {
            total_energy * 1000.0 / total_bits as f64
        } else {
            0.0
        },
        epb_defined,
        gops: if gops_defined {
            total_ops as f64 / total_latency
        } else {
            0.0
        },
        gops_defined,
        stages,
    })
}

pub const TRACE_CSV_HEADER: &str = "stage,event_kind,count,payload_bits,ops";
pub const STAGES_CSV_HEADER: &str = "stage,energy_pj,latency_ns";

pub fn trace_to_csv(trace: &ScheduleTrace) -> String {
    let mut out = String::from(TRACE_CSV_HEADER);
    out.push('\n');
    for ev in trace.events() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            ev.stage, ev.kind, ev.count, ev.payload_bits, ev.ops
        ));
    }
    out
}

/// Stage latencies in sequence, one row per stage entry.
pub fn stage_latencies_to_csv(trace: &ScheduleTrace) -> String {
    let mut out = String::from("stage,latency_ns\n");
    for s in trace.stages() {
        out.push_str(&format!("{},{}\n", s.label, fmt_num(s.latency_ns)));
    }
    out
}

/// Plot-ready per-stage rows.
pub fn stages_to_csv(report: &EnergyReport) -> String {
    let mut out = String::from(STAGES_CSV_HEADER);
    out.push('\n');
    for s in &report.stages {
        out.push_str(&format!(
            "{},{},{}\n",
            s.stage,
            fmt_num(s.energy_pj),
            fmt_num(s.latency_ns)
        ));
    }
    out
}

/// Parses trace CSV rows back into events. Unknown event kinds are errors.
pub fn parse_trace_csv(text: &str, path: &Path) -> Result<Vec<TraceEvent>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let mut events = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2;
        let perr = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let record = record.map_err(|e| perr(e.to_string()))?;
        if record.len() != 5 {
            return Err(perr(format!("expected 5 fields, found {}", record.len())));
        }
        let num = |i: usize| -> Result<u64> {
            record[i]
                .parse::<u64>()
                .map_err(|e| perr(format!("column {}: {e}", i + 1)))
        };
        events.push(TraceEvent {
            stage: record[0].to_string(),
            kind: record[1].parse()?,
            count: num(2)?,
            payload_bits: num(3)?,
            ops: num(4)?,
        });
    }
    Ok(events)
}

/// Rebuilds a trace from its event rows and stage latency rows.
pub fn trace_from_csv(events_csv: &str, stages_csv: &str, path: &Path) -> Result<ScheduleTrace> {
    let events = parse_trace_csv(events_csv, path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(stages_csv.as_bytes());
    let mut stages = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let perr = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 2,
            message,
        };
        let record = record.map_err(|e| perr(e.to_string()))?;
        let latency_ns = record
            .get(1)
            .ok_or_else(|| perr("missing latency column".into()))?
            .parse::<f64>()
            .map_err(|e| perr(e.to_string()))?;
        stages.push(StageLatency {
            label: record[0].to_string(),
            latency_ns,
        });
    }
    Ok(ScheduleTrace::from_parts(events, stages, Default::default()))
}

pub const REPORT_CSV_HEADER: &str =
    "total_energy_pj,total_latency_ns,total_bits,total_ops,epb_fj_per_bit,epb_defined,gops,gops_defined";

impl EnergyReport {
    /// CSV cells in [`REPORT_CSV_HEADER`] order.
    pub fn csv_cells(&self) -> Vec<String> {
        vec![
            fmt_num(self.total_energy_pj),
            fmt_num(self.total_latency_ns),
            self.total_bits.to_string(),
            self.total_ops.to_string(),
            fmt_num(self.epb_fj_per_bit),
            self.epb_defined.to_string(),
            fmt_num(self.gops),
            self.gops_defined.to_string(),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perf::EventCost;
    use proptest::prelude::*;

    fn unit_cost() -> CostTable {
        let mut c = CostTable::default();
        c.events.insert(EventKind::DacWrite, EventCost::new(1.0, 0.0, 0.0));
        c
    }

    #[test]
    fn empty_trace_is_all_zero() {
        let r = account_trace(&ScheduleTrace::new(), &CostTable::default()).unwrap();
        assert_eq!(r.total_energy_pj, 0.0);
        assert_eq!(r.total_latency_ns, 0.0);
        assert_eq!((r.total_bits, r.total_ops), (0, 0));
        assert_eq!((r.epb_fj_per_bit, r.gops), (0.0, 0.0));
        assert!(!r.epb_defined && !r.gops_defined);
        assert!(r.stages.is_empty());
    }

    #[test]
    fn single_dac_write() {
        let mut t = ScheduleTrace::new();
        t.record(EventKind::DacWrite, 1, 8);
        let r = account_trace(&t, &unit_cost()).unwrap();
        assert_eq!(r.total_energy_pj, 1.0);
        assert_eq!(r.total_bits, 8);
        assert_eq!(r.epb_fj_per_bit, 125.0);
    }

    #[test]
    fn missing_cost_is_an_error() {
        let mut c = CostTable::default();
        c.events.remove(&EventKind::SoaPass);
        let mut t = ScheduleTrace::new();
        t.record(EventKind::SoaPass, 1, 0);
        assert!(matches!(account_trace(&t, &c), Err(Error::MissingCost("soa_pass"))));
    }

    #[test]
    fn csv_roundtrip_and_unknown_kind() {
        let mut t = ScheduleTrace::new();
        t.begin_stage("a");
        t.record_ops(EventKind::VcselEmit, 3, 24, 9);
        t.add_latency(1.5);
        t.begin_stage("b");
        t.record(EventKind::AdcRead, 2, 16);
        t.add_latency(0.25);
        let back = trace_from_csv(&trace_to_csv(&t), &stage_latencies_to_csv(&t), Path::new("t")).unwrap();
        assert_eq!(back.events(), t.events());
        assert_eq!(back.stages(), t.stages());
        let bad = format!("{TRACE_CSV_HEADER}\nx,laser_fire,1,0,0\n");
        assert!(parse_trace_csv(&bad, Path::new("t")).is_err());
    }

    fn arb_trace() -> impl Strategy<Value = ScheduleTrace> {
        let ev = (0usize..10, 0u64..1000, 0u64..10_000, 0u64..5000, 0u8..3);
        (prop::collection::vec(ev, 0..40), prop::collection::vec(0.0f64..100.0, 1..4)).prop_map(
            |(evs, lats)| {
                let mut t = ScheduleTrace::new();
                for (i, l) in lats.iter().enumerate() {
                    t.begin_stage(format!("s{i}"));
                    t.add_latency(*l);
                }
                for (k, c, b, o, _) in evs {
                    t.record_ops(EventKind::ALL[k], c, b, o);
                }
                t
            },
        )
    }

    proptest! {
        #[test]
        fn energy_is_additive(a in arb_trace(), b in arb_trace()) {
            let cost = CostTable::default();
            let ra = account_trace(&a, &cost).unwrap();
            let rb = account_trace(&b, &cost).unwrap();
            let mut ab = a.clone();
            ab.append(b.clone());
            let rab = account_trace(&ab, &cost).unwrap();
            let sum = ra.total_energy_pj + rb.total_energy_pj;
            prop_assert!((rab.total_energy_pj - sum).abs() <= 1e-9 * sum.max(1.0));
            prop_assert_eq!(rab.total_bits, ra.total_bits + rb.total_bits);
        }

        #[test]
        fn doubling_costs_doubles_energy(t in arb_trace()) {
            let cost = CostTable::default();
            let r1 = account_trace(&t, &cost).unwrap();
            let r2 = account_trace(&t, &cost.scale_energy(2.0)).unwrap();
            prop_assert_eq!(r2.total_energy_pj, 2.0 * r1.total_energy_pj);
            prop_assert_eq!(r2.epb_fj_per_bit, 2.0 * r1.epb_fj_per_bit);
            prop_assert_eq!(r2.gops, r1.gops);
        }

        #[test]
        fn adding_an_event_never_lowers_energy(t in arb_trace(), k in 0usize..10, c in 0u64..100) {
            let cost = CostTable::default();
            let r1 = account_trace(&t, &cost).unwrap();
            let mut t2 = t.clone();
            t2.record(EventKind::ALL[k], c, c * 8);
            let r2 = account_trace(&t2, &cost).unwrap();
            prop_assert!(r2.total_energy_pj >= r1.total_energy_pj);
        }

        #[test]
        fn breakdown_sums_to_totals(t in arb_trace()) {
            let r = account_trace(&t, &CostTable::default()).unwrap();
            let e: f64 = r.stages.iter().map(|s| s.energy_pj).sum();
            let l: f64 = r.stages.iter().map(|s| s.latency_ns).sum();
            prop_assert!((e - r.total_energy_pj).abs() <= 1e-9 * r.total_energy_pj.max(1.0));
            prop_assert!((l - r.total_latency_ns).abs() <= 1e-9 * r.total_latency_ns.max(1.0));
            prop_assert_eq!(r.stages.iter().map(|s| s.ops).sum::<u64>(), r.total_ops);
        }

        #[test]
        fn reordering_within_a_stage_keeps_metrics(t in arb_trace()) {
            let cost = CostTable::default();
            let r1 = account_trace(&t, &cost).unwrap();
            let mut evs = t.events().to_vec();
            evs.reverse();
            let t2 = ScheduleTrace::from_parts(evs, t.stages().to_vec(), Default::default());
            let r2 = account_trace(&t2, &cost).unwrap();
            prop_assert!((r1.epb_fj_per_bit - r2.epb_fj_per_bit).abs() <= 1e-9 * r1.epb_fj_per_bit.max(1.0));
            prop_assert_eq!(r1.gops, r2.gops);
        }
    }
}
