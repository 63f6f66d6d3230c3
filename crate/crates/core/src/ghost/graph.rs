use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{read_csv_matrix, Matrix};

/// Undirected graph in compressed neighbor-list form with vertex features.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph<T> {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    /// Parallel to `neighbors`; `None` when every edge has weight 1.
    weights: Option<Vec<T>>,
    features: Matrix<T>,
}

/// One parsed edge-list line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeLine {
    pub line: usize,
    pub src: usize,
    pub dst: usize,
    pub weight: Option<f64>,
}

/// Parses `src dst [weight]` lines. Blank lines and `#` comments are skipped.
pub fn parse_edge_list(text: &str, path: &Path) -> Result<Vec<EdgeLine>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let perr = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let fields: Vec<&str> = body.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(perr(format!("expected `src dst [weight]`, got {body:?}")));
        }
        let idx_of = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| perr(format!("bad vertex index {s:?}: {e}")))
        };
        let weight = match fields.get(2) {
            Some(w) => {
                let v: f64 = w.parse().map_err(|e| perr(format!("bad weight {w:?}: {e}")))?;
                if !v.is_finite() {
                    return Err(perr(format!("non-finite weight {v}")));
                }
                Some(v)
            }
            None => None,
        };
        out.push(EdgeLine {
            line,
            src: idx_of(fields[0])?,
            dst: idx_of(fields[1])?,
            weight,
        });
    }
    Ok(out)
}

impl<T: Scalar> Graph<T> {
    /// Builds the symmetric adjacency. Repeated edges collapse to the first
    /// occurrence; a missing weight means 1.
    pub fn from_edges(edges: &[(usize, usize, Option<T>)], features: Matrix<T>) -> Result<Self> {
        let n = features.rows();
        let weighted = edges.iter().any(|e| e.2.is_some());
        let mut directed: Vec<(usize, usize, T)> = Vec::with_capacity(2 * edges.len());
        for &(s, d, w) in edges {
            for v in [s, d] {
                if v >= n {
                    return Err(Error::IndexOutOfRange { index: v, len: n });
                }
            }
            let w = w.unwrap_or_else(T::one);
            directed.push((s, d, w));
            if s != d {
                directed.push((d, s, w));
            }
        }
        directed.sort_by_key(|&(s, d, _)| (s, d));
        directed.dedup_by_key(|e| (e.0, e.1));
        let mut offsets = vec![0usize; n + 1];
        for &(s, _, _) in &directed {
            offsets[s + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        Ok(Self {
            offsets,
            neighbors: directed.iter().map(|e| e.1).collect(),
            weights: weighted.then(|| directed.iter().map(|e| e.2).collect()),
            features,
        })
    }

    /// Reads an edge list and a feature CSV; the feature rows fix the vertex count.
    pub fn load(edge_path: impl AsRef<Path>, features_path: impl AsRef<Path>) -> Result<Self> {
        let edge_path = edge_path.as_ref();
        let features: Matrix<T> = read_csv_matrix(features_path)?;
        let text = std::fs::read_to_string(edge_path).map_err(|e| Error::io(edge_path, e))?;
        let lines = parse_edge_list(&text, edge_path)?;
        let n = features.rows();
        let mut edges = Vec::with_capacity(lines.len());
        for e in lines {
            if e.src >= n || e.dst >= n {
                return Err(Error::Parse {
                    path: edge_path.to_path_buf(),
                    line: e.line,
                    message: format!(
                        "vertex index {} out of range: the feature file has {n} rows",
                        e.src.max(e.dst)
                    ),
                });
            }
            edges.push((e.src, e.dst, e.weight.map(T::lit)));
        }
        Self::from_edges(&edges, features)
    }

    pub fn vertex_count(&self) -> usize {
        self.features.rows()
    }

    /// Number of stored directed incidences (twice the undirected edges, self-edges once).
    pub fn incidence_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn features(&self) -> &Matrix<T> {
        &self.features
    }

    pub fn with_features(&self, features: Matrix<T>) -> Result<Self> {
        if features.rows() != self.vertex_count() {
            return Err(Error::ShapeMismatch {
                context: "graph features",
                left: features.shape(),
                right: self.features.shape(),
            });
        }
        Ok(Self {
            features,
            ..self.clone()
        })
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    pub fn edge_weight_at(&self, v: usize, k: usize) -> T {
        match &self.weights {
            Some(w) => w[self.offsets[v] + k],
            None => T::one(),
        }
    }

    /// Sorted `(neighbor, weight)` pairs aggregated into `v`, with `v` itself
    /// (weight 1) added when `self_loops` is set and no self-edge exists.
    pub fn incidences(&self, v: usize, self_loops: bool) -> Vec<(usize, T)> {
        let mut out: Vec<(usize, T)> = self
            .neighbors(v)
            .iter()
            .enumerate()
            .map(|(k, &u)| (u, self.edge_weight_at(v, k)))
            .collect();
        if self_loops {
            if let Err(pos) = out.binary_search_by_key(&v, |e| e.0) {
                out.insert(pos, (v, T::one()));
            }
        }
        out
    }

    /// Dense adjacency with edge weights, plus the identity when `self_loops`.
    pub fn dense_adjacency(&self, self_loops: bool) -> Matrix<T> {
        let n = self.vertex_count();
        let mut a = Matrix::zeros(n, n);
        for v in 0..n {
            for (u, w) in self.incidences(v, self_loops) {
                a[(v, u)] = w;
            }
        }
        a
    }

    /// Relabels vertices: old vertex `v` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.vertex_count();
        let mut edges = Vec::with_capacity(self.neighbors.len());
        for v in 0..n {
            for (k, &u) in self.neighbors(v).iter().enumerate() {
                if v <= u {
                    let w = self.is_weighted().then(|| self.edge_weight_at(v, k));
                    edges.push((perm[v], perm[u], w));
                }
            }
        }
        let mut rows = vec![Vec::new(); n];
        for v in 0..n {
            rows[perm[v]] = self.features.row(v).to_vec();
        }
        Self::from_edges(&edges, Matrix::from_rows(&rows)?)
    }
}
