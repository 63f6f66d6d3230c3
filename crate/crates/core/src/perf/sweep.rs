//! Design-space sweeps over configuration fields.
//!
//! Grid keys are dotted paths into the JSON form of the configuration, e.g.
//! `device.q_factor` or `cost.events.dac_write.energy_pj`. Points are the
//! cartesian product of the value lists with keys in sorted order, the first
//! key varying slowest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::device::{validate_bank, BankRule};
use crate::error::{Error, Result};
use crate::harness::{execute, Accuracy, Diagnostic, SimConfig, Workload, WorkloadPaths};
use crate::tensor::fmt_num;
use crate::{Mode, Real};

use super::{EnergyReport, REPORT_CSV_HEADER};

/// Base configuration: a path to a config file or the config itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BaseConfig {
    Path(PathBuf),
    Inline(Box<SimConfig>),
}

/// Contents of a `grid.json` file. Relative paths resolve against the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub workload: WorkloadPaths,
    #[serde(default)]
    pub config: Option<BaseConfig>,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: BTreeMap<String, Vec<Value>>,
}

fn default_mode() -> Mode {
    Mode::Photonic
}

impl SweepGrid {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let g: Self = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Ok(g.relative_to(base))
    }

    fn relative_to(mut self, base: &Path) -> Self {
        self.workload = self.workload.relative_to(base);
        if let Some(BaseConfig::Path(p)) = &mut self.config {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        self
    }

    pub fn base_config(&self) -> Result<SimConfig> {
        match &self.config {
            None => Ok(SimConfig::default()),
            Some(BaseConfig::Path(p)) => SimConfig::load(p),
            Some(BaseConfig::Inline(c)) => Ok((**c).clone()),
        }
    }
}

/// One grid point: the varied values and the resulting configuration, or
/// the reason it could not be built.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub params: BTreeMap<String, Value>,
    pub config: std::result::Result<SimConfig, String>,
}

/// Expands the grid over `base`. Unknown keys and empty value lists are errors.
pub fn expand_grid(base: &SimConfig, grid: &BTreeMap<String, Vec<Value>>) -> Result<Vec<SweepPoint>> {
    let root = serde_json::to_value(base).map_err(|source| Error::Json {
        path: PathBuf::from("<config>"),
        source,
    })?;
    let mut d = Vec::new();
    for (key, values) in grid {
        if root.pointer(&pointer(key)).is_none() {
            d.push(Diagnostic::new(format!("grid.{key}"), "invalid key: no such configuration field"));
        } else if values.is_empty() {
            d.push(Diagnostic::new(format!("grid.{key}"), "empty value list"));
        }
    }
    if !d.is_empty() {
        return Err(Error::InvalidConfig(d));
    }
    let keys: Vec<&String> = grid.keys().collect();
    let total: usize = grid.values().map(Vec::len).product();
    let mut out = Vec::with_capacity(total);
    for index in 0..total {
        let mut rest = index;
        let mut picks = vec![0; keys.len()];
        for (k, key) in keys.iter().enumerate().rev() {
            let n = grid[*key].len();
            picks[k] = rest % n;
            rest /= n;
        }
        let mut value = root.clone();
        let mut params = BTreeMap::new();
        for (k, key) in keys.iter().enumerate() {
            let v = grid[*key][picks[k]].clone();
            *value.pointer_mut(&pointer(key)).expect("key checked above") = v.clone();
            params.insert((*key).clone(), v);
        }
        let config = serde_json::from_value::<SimConfig>(value).map_err(|e| e.to_string());
        out.push(SweepPoint { params, config });
    }
    Ok(out)
}

fn pointer(key: &str) -> String {
    key.split('.').fold(String::new(), |acc, part| acc + "/" + part)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub params: BTreeMap<String, Value>,
    pub feasible: bool,
    /// Why the point is infeasible; empty otherwise.
    pub reason: String,
    pub bank_violations: usize,
    pub snr_violations: usize,
    /// Present only for feasible points.
    pub run: Option<(EnergyReport, Accuracy)>,
}

fn evaluate(point: SweepPoint, workload: &Workload, mode: Mode, seed: u64) -> SweepRow {
    let mut row = SweepRow {
        params: point.params,
        feasible: false,
        reason: String::new(),
        bank_violations: 0,
        snr_violations: 0,
        run: None,
    };
    let cfg = match point.config {
        Ok(c) => c,
        Err(e) => {
            row.reason = e;
            return row;
        }
    };
    let d = cfg.diagnostics();
    if !d.is_empty() {
        row.reason = d.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
        return row;
    }
    let violations = match cfg.device.bank::<Real>() {
        Ok((grid, devices)) => validate_bank(&grid, &devices, &cfg.noise),
        Err(e) => {
            row.reason = e.to_string();
            return row;
        }
    };
    row.bank_violations = violations.len();
    row.snr_violations = violations.iter().filter(|v| v.rule == BankRule::Snr).count();
    if !violations.is_empty() {
        row.reason = format!("{} bank rule violations", violations.len());
        return row;
    }
    match execute(workload, &cfg, mode, seed) {
        Ok(o) => {
            row.feasible = true;
            row.run = Some((o.report, o.accuracy));
        }
        Err(e) => row.reason = e.to_string(),
    }
    row
}

/// One row per grid point in grid order. Points run in parallel, each with
/// its own executor and trace.
pub fn run_sweep(grid: &SweepGrid, workload: &Workload) -> Result<Vec<SweepRow>> {
    let base = grid.base_config()?;
    let points = expand_grid(&base, &grid.grid)?;
    Ok(points
        .into_par_iter()
        .map(|p| evaluate(p, workload, grid.mode, grid.seed))
        .collect())
}

fn param_cell(v: &Value) -> String {
    match v {
        Value::Number(n) => n.as_f64().map_or_else(|| n.to_string(), fmt_num),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Sweep rows as CSV: varied parameters, feasibility, violation counts,
/// report fields and accuracy. Infeasible rows leave the metric cells blank.
pub fn sweep_to_csv(rows: &[SweepRow]) -> Result<String> {
    let keys: Vec<String> = rows.first().map(|r| r.params.keys().cloned().collect()).unwrap_or_default();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = keys.clone();
    header.extend(["feasible", "reason", "bank_violations", "snr_violations"].map(String::from));
    header.extend(REPORT_CSV_HEADER.split(',').map(String::from));
    header.extend(["float_vs_quant_max_rel_err", "mode_vs_quant_max_abs_diff"].map(String::from));
    let metric_cols = header.len() - keys.len() - 4;
    let csv_err = |e: csv::Error| Error::Unsupported {
        what: "csv output",
        name: e.to_string(),
    };
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let mut cells: Vec<String> = keys.iter().map(|k| param_cell(&r.params[k])).collect();
        cells.push(r.feasible.to_string());
        cells.push(r.reason.clone());
        cells.push(r.bank_violations.to_string());
        cells.push(r.snr_violations.to_string());
        match &r.run {
            Some((rep, acc)) => {
                cells.extend(rep.csv_cells());
                cells.push(fmt_num(acc.float_vs_quant_max_rel_err));
                cells.push(fmt_num(acc.mode_vs_quant_max_abs_diff));
            }
            None => cells.extend(std::iter::repeat_n(String::new(), metric_cols)),
        }
        w.write_record(&cells).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Unsupported {
        what: "csv output",
        name: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn empty_grid_is_one_base_row() {
        let base = SimConfig::default();
        let pts = expand_grid(&base, &BTreeMap::new()).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].config.as_ref().unwrap(), &base);
    }

    #[test]
    fn two_by_three_in_grid_order() {
        let grid = BTreeMap::from([
            ("engine.quant_bits".to_string(), vec![json!(4), json!(8)]),
            ("device.q_factor".to_string(), vec![json!(1000.0), json!(2000.0), json!(3000.0)]),
        ]);
        let pts = expand_grid(&SimConfig::default(), &grid).unwrap();
        let got: Vec<(f64, u32)> = pts
            .iter()
            .map(|p| {
                let c = p.config.as_ref().unwrap();
                (c.device.q_factor, c.engine.quant_bits)
            })
            .collect();
        assert_eq!(
            got,
            vec![(1000.0, 4), (1000.0, 8), (2000.0, 4), (2000.0, 8), (3000.0, 4), (3000.0, 8)]
        );
    }

    #[test]
    fn invalid_keys_and_bad_values() {
        let grid = BTreeMap::from([("device.q".to_string(), vec![json!(1)])]);
        match expand_grid(&SimConfig::default(), &grid) {
            Err(Error::InvalidConfig(d)) => assert_eq!(d[0].field, "grid.device.q"),
            other => panic!("{other:?}"),
        }
        let grid = BTreeMap::from([("device.order_m".to_string(), vec![json!("x")])]);
        let pts = expand_grid(&SimConfig::default(), &grid).unwrap();
        assert!(pts[0].config.is_err());
    }
}
