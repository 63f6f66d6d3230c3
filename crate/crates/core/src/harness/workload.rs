use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ghost::GnnModelSpec;
use crate::tensor::read_csv_matrix;
use crate::tron::TransformerModelSpec;
use crate::{Real, RealGraph, RealMatrix, RealTransformerWeights};

/// Input files of one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WorkloadPaths {
    Transformer {
        spec: PathBuf,
        /// Binary weight file with a shape manifest, or a directory of CSVs.
        weights: PathBuf,
        input: PathBuf,
    },
    Gnn {
        graph: PathBuf,
        features: PathBuf,
        spec: PathBuf,
    },
}

impl WorkloadPaths {
    pub fn kind(&self) -> &'static str {
        match self {
            WorkloadPaths::Transformer { .. } => "transformer",
            WorkloadPaths::Gnn { .. } => "gnn",
        }
    }

    /// `(role, path)` pairs in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, &Path)> {
        match self {
            WorkloadPaths::Transformer { spec, weights, input } => {
                vec![("spec", spec.as_path()), ("weights", weights.as_path()), ("input", input.as_path())]
            }
            WorkloadPaths::Gnn { graph, features, spec } => {
                vec![("graph", graph.as_path()), ("features", features.as_path()), ("spec", spec.as_path())]
            }
        }
    }

    /// Resolves relative paths against `base`.
    pub fn relative_to(&self, base: &Path) -> Self {
        let j = |p: &PathBuf| if p.is_absolute() { p.clone() } else { base.join(p) };
        match self {
            WorkloadPaths::Transformer { spec, weights, input } => WorkloadPaths::Transformer {
                spec: j(spec),
                weights: j(weights),
                input: j(input),
            },
            WorkloadPaths::Gnn { graph, features, spec } => WorkloadPaths::Gnn {
                graph: j(graph),
                features: j(features),
                spec: j(spec),
            },
        }
    }

    pub fn load(&self) -> Result<Workload> {
        match self {
            WorkloadPaths::Transformer { spec, weights, input } => {
                let spec = TransformerModelSpec::load(spec)?;
                spec.validate()?;
                let weights = RealTransformerWeights::load(&spec, weights)?;
                let input: RealMatrix = read_csv_matrix(input)?;
                if input.shape() != (spec.seq_len, spec.d_model) {
                    return Err(Error::ShapeMismatch {
                        context: "transformer input",
                        left: input.shape(),
                        right: (spec.seq_len, spec.d_model),
                    });
                }
                Ok(Workload::Transformer { spec, weights, input })
            }
            WorkloadPaths::Gnn { graph, features, spec } => {
                let graph = RealGraph::load(graph, features)?;
                let spec = GnnModelSpec::load(spec)?;
                spec.validate(Some(graph.features().cols()))?;
                let weights = spec.weights::<Real>()?;
                Ok(Workload::Gnn { graph, spec, weights })
            }
        }
    }
}

/// Loaded and validated model, weights and input.
#[derive(Debug, Clone, PartialEq)]
pub enum Workload {
    Transformer {
        spec: TransformerModelSpec,
        weights: RealTransformerWeights,
        input: RealMatrix,
    },
    Gnn {
        graph: RealGraph,
        spec: GnnModelSpec,
        weights: Vec<RealMatrix>,
    },
}

impl Workload {
    pub fn kind(&self) -> &'static str {
        match self {
            Workload::Transformer { .. } => "transformer",
            Workload::Gnn { .. } => "gnn",
        }
    }
}
