use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::Diagnostic;
use crate::kernels::{Activation, PhotonicEngineConfig};
use crate::scalar::Scalar;
use crate::tensor::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregator {
    Sum,
    Mean,
    Max,
}

impl Aggregator {
    pub fn as_str(self) -> &'static str {
        match self {
            Aggregator::Sum => "sum",
            Aggregator::Mean => "mean",
            Aggregator::Max => "max",
        }
    }
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GnnLayerSpec {
    pub f_in: usize,
    pub f_out: usize,
    pub aggregator: Aggregator,
    pub activation: Activation,
    #[serde(default)]
    pub self_loops: bool,
    #[serde(default)]
    pub gcn_norm: bool,
    /// Inline `f_in × f_out` weights; generated from the model seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GnnModelSpec {
    pub layers: Vec<GnnLayerSpec>,
    #[serde(default)]
    pub weight_seed: u64,
}

impl GnnModelSpec {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Checks layer chaining and, when given, the input feature width.
    pub fn diagnostics(&self, prefix: &str, feature_width: Option<usize>) -> Vec<Diagnostic> {
        let mut d = Vec::new();
        for (i, l) in self.layers.iter().enumerate() {
            let p = format!("{prefix}.layers[{i}]");
            if l.f_in == 0 {
                d.push(Diagnostic::new(format!("{p}.f_in"), "must be >= 1"));
            }
            if l.f_out == 0 {
                d.push(Diagnostic::new(format!("{p}.f_out"), "must be >= 1"));
            }
            if let Some(next) = self.layers.get(i + 1) {
                if next.f_in != l.f_out {
                    d.push(Diagnostic::new(
                        format!("{prefix}.layers[{}].f_in", i + 1),
                        format!("is {} but the previous layer's f_out is {}", next.f_in, l.f_out),
                    ));
                }
            }
            if let Some(w) = &l.weights {
                let ok = w.len() == l.f_in && w.iter().all(|r| r.len() == l.f_out);
                if !ok {
                    d.push(Diagnostic::new(
                        format!("{p}.weights"),
                        format!("must be {}×{}", l.f_in, l.f_out),
                    ));
                } else if w.iter().flatten().any(|v| !v.is_finite()) {
                    d.push(Diagnostic::new(format!("{p}.weights"), "non-finite entry"));
                }
            }
        }
        if let (Some(w), Some(first)) = (feature_width, self.layers.first()) {
            if first.f_in != w {
                d.push(Diagnostic::new(
                    format!("{prefix}.layers[0].f_in"),
                    format!("is {} but the features have {w} columns", first.f_in),
                ));
            }
        }
        d
    }

    pub fn validate(&self, feature_width: Option<usize>) -> Result<()> {
        let d = self.diagnostics("gnn", feature_width);
        if d.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(d))
        }
    }

    /// Layer weights: inline values, or seeded uniform `±1/√f_in`.
    pub fn weights<T: Scalar>(&self) -> Result<Vec<Matrix<T>>> {
        self.validate(None)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.weight_seed);
        Ok(self
            .layers
            .iter()
            .map(|l| {
                let a = 1.0 / (l.f_in as f64).sqrt();
                let generated = Matrix::from_fn(l.f_in, l.f_out, |_, _| T::lit(rng.gen_range(-a..a)));
                match &l.weights {
                    Some(w) => Matrix::from_fn(l.f_in, l.f_out, |i, j| T::lit(w[i][j])),
                    None => generated,
                }
            })
            .collect())
    }
}

/// Lane and partition sizes as read from configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GhostSettings {
    pub lanes_v: usize,
    pub partition_n: usize,
}

impl Default for GhostSettings {
    fn default() -> Self {
        Self {
            lanes_v: 8,
            partition_n: 64,
        }
    }
}

impl GhostSettings {
    pub fn diagnostics(&self, prefix: &str) -> Vec<Diagnostic> {
        let mut d = Vec::new();
        if self.lanes_v == 0 {
            d.push(Diagnostic::new(format!("{prefix}.lanes_v"), "must be >= 1"));
        }
        if self.partition_n == 0 {
            d.push(Diagnostic::new(format!("{prefix}.partition_n"), "must be >= 1"));
        }
        d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GhostConfig<T> {
    pub lanes_v: usize,
    pub partition_n: usize,
    pub engine: PhotonicEngineConfig<T>,
}

impl<T: Scalar> GhostConfig<T> {
    pub fn new(settings: GhostSettings, engine: PhotonicEngineConfig<T>) -> Result<Self> {
        let d = settings.diagnostics("ghost");
        if !d.is_empty() {
            return Err(Error::InvalidConfig(d));
        }
        Ok(Self {
            lanes_v: settings.lanes_v,
            partition_n: settings.partition_n,
            engine,
        })
    }

    pub fn with_partition(&self, lanes_v: usize, partition_n: usize) -> Result<Self> {
        Self::new(
            GhostSettings {
                lanes_v,
                partition_n,
            },
            self.engine.clone(),
        )
    }
}
