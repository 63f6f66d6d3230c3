//! Transformer weights and their on-disk forms.
//!
//! Tensors are addressed by dotted names such as `encoder.0.attn.heads.1.w_q`.
//! A weights file is either a directory of `<name>.csv` matrices or a flat
//! little-endian `f32` blob with a JSON manifest listing `{name, shape}` in
//! storage order.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::Diagnostic;
use crate::kernels::LnParams;
use crate::scalar::Scalar;
use crate::tensor::{read_csv_matrix, Matrix};

use super::TransformerModelSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct HeadWeights<T> {
    /// d_model × d_k
    pub w_q: Matrix<T>,
    pub w_k: Matrix<T>,
    pub w_v: Matrix<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionWeights<T> {
    pub heads: Vec<HeadWeights<T>>,
    /// d_model × d_model
    pub w_o: Matrix<T>,
    /// `None` disables the normalization after the residual add.
    pub ln: Option<LnParams<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FfnWeights<T> {
    /// d_model × d_ff
    pub w_1: Matrix<T>,
    /// d_ff × d_model
    pub w_2: Matrix<T>,
    pub ln: Option<LnParams<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderLayer<T> {
    pub attn: AttentionWeights<T>,
    pub ffn: FfnWeights<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoderLayer<T> {
    pub self_attn: AttentionWeights<T>,
    pub cross_attn: Option<AttentionWeights<T>>,
    pub ffn: FfnWeights<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformerWeights<T> {
    pub encoder: Vec<EncoderLayer<T>>,
    pub decoder: Vec<DecoderLayer<T>>,
    /// Dense output layer of the ViT variant, d_model × d_model.
    pub head: Option<Matrix<T>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightManifest {
    pub dtype: String,
    pub tensors: Vec<TensorEntry>,
}

pub const MANIFEST_DTYPE: &str = "f32_le";

/// Manifest that accompanies a binary weights file: `w.bin` → `w.manifest.json`.
pub fn manifest_path(bin: &Path) -> PathBuf {
    bin.with_extension("manifest.json")
}

fn uniform<T: Scalar>(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix<T> {
    let a = 1.0 / (rows as f64).sqrt();
    Matrix::from_fn(rows, cols, |_, _| T::lit(rng.gen_range(-a..a)))
}

fn random_ln<T: Scalar>(rng: &mut ChaCha8Rng, d: usize) -> LnParams<T> {
    LnParams {
        gamma: (0..d).map(|_| T::lit(rng.gen_range(0.8..1.2))).collect(),
        beta: (0..d).map(|_| T::lit(rng.gen_range(-0.1..0.1))).collect(),
    }
}

fn random_attention<T: Scalar>(rng: &mut ChaCha8Rng, s: &TransformerModelSpec) -> AttentionWeights<T> {
    let heads = (0..s.n_heads)
        .map(|_| HeadWeights {
            w_q: uniform(rng, s.d_model, s.d_k),
            w_k: uniform(rng, s.d_model, s.d_k),
            w_v: uniform(rng, s.d_model, s.d_k),
        })
        .collect();
    AttentionWeights {
        heads,
        w_o: uniform(rng, s.d_model, s.d_model),
        ln: Some(random_ln(rng, s.d_model)),
    }
}

fn random_ffn<T: Scalar>(rng: &mut ChaCha8Rng, s: &TransformerModelSpec) -> FfnWeights<T> {
    FfnWeights {
        w_1: uniform(rng, s.d_model, s.d_ff),
        w_2: uniform(rng, s.d_ff, s.d_model),
        ln: Some(random_ln(rng, s.d_model)),
    }
}

fn ln_matrices<T: Scalar>(prefix: &str, ln: &Option<LnParams<T>>, out: &mut Vec<(String, Matrix<T>)>) {
    if let Some(ln) = ln {
        let d = ln.gamma.len();
        out.push((
            format!("{prefix}.ln.gamma"),
            Matrix::from_vec(1, d, ln.gamma.clone()).expect("vector shape"),
        ));
        out.push((
            format!("{prefix}.ln.beta"),
            Matrix::from_vec(1, d, ln.beta.clone()).expect("vector shape"),
        ));
    }
}

fn attention_matrices<T: Scalar>(prefix: &str, a: &AttentionWeights<T>, out: &mut Vec<(String, Matrix<T>)>) {
    for (h, hw) in a.heads.iter().enumerate() {
        out.push((format!("{prefix}.heads.{h}.w_q"), hw.w_q.clone()));
        out.push((format!("{prefix}.heads.{h}.w_k"), hw.w_k.clone()));
        out.push((format!("{prefix}.heads.{h}.w_v"), hw.w_v.clone()));
    }
    out.push((format!("{prefix}.w_o"), a.w_o.clone()));
    ln_matrices(prefix, &a.ln, out);
}

fn ffn_matrices<T: Scalar>(prefix: &str, f: &FfnWeights<T>, out: &mut Vec<(String, Matrix<T>)>) {
    out.push((format!("{prefix}.w_1"), f.w_1.clone()));
    out.push((format!("{prefix}.w_2"), f.w_2.clone()));
    ln_matrices(prefix, &f.ln, out);
}

/// Pulls named tensors out of a map, checking shapes as it goes.
struct Store<T> {
    map: BTreeMap<String, Matrix<T>>,
    diags: Vec<Diagnostic>,
}

impl<T: Scalar> Store<T> {
    fn take(&mut self, name: &str, rows: usize, cols: usize) -> Matrix<T> {
        match self.map.remove(name) {
            Some(m) if m.shape() == (rows, cols) => m,
            Some(m) => {
                self.diags.push(Diagnostic::new(
                    format!("weights.{name}"),
                    format!("shape {:?}, expected {:?}", m.shape(), (rows, cols)),
                ));
                Matrix::zeros(rows, cols)
            }
            None => {
                self.diags
                    .push(Diagnostic::new(format!("weights.{name}"), "missing tensor"));
                Matrix::zeros(rows, cols)
            }
        }
    }

    fn take_ln(&mut self, prefix: &str, d: usize) -> Option<LnParams<T>> {
        let g = format!("{prefix}.ln.gamma");
        let b = format!("{prefix}.ln.beta");
        if !self.map.contains_key(&g) && !self.map.contains_key(&b) {
            return None;
        }
        Some(LnParams {
            gamma: self.take(&g, 1, d).into_data(),
            beta: self.take(&b, 1, d).into_data(),
        })
    }

    fn attention(&mut self, prefix: &str, s: &TransformerModelSpec) -> AttentionWeights<T> {
        let heads = (0..s.n_heads)
            .map(|h| HeadWeights {
                w_q: self.take(&format!("{prefix}.heads.{h}.w_q"), s.d_model, s.d_k),
                w_k: self.take(&format!("{prefix}.heads.{h}.w_k"), s.d_model, s.d_k),
                w_v: self.take(&format!("{prefix}.heads.{h}.w_v"), s.d_model, s.d_k),
            })
            .collect();
        AttentionWeights {
            heads,
            w_o: self.take(&format!("{prefix}.w_o"), s.d_model, s.d_model),
            ln: self.take_ln(prefix, s.d_model),
        }
    }

    fn ffn(&mut self, prefix: &str, s: &TransformerModelSpec) -> FfnWeights<T> {
        FfnWeights {
            w_1: self.take(&format!("{prefix}.w_1"), s.d_model, s.d_ff),
            w_2: self.take(&format!("{prefix}.w_2"), s.d_ff, s.d_model),
            ln: self.take_ln(prefix, s.d_model),
        }
    }
}

/// Seeded uniform `[-1, 1)` input sequence of shape `seq_len × d_model`.
pub fn random_input<T: Scalar>(spec: &TransformerModelSpec, seed: u64) -> Matrix<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(spec.seq_len, spec.d_model, |_, _| T::lit(rng.gen_range(-1.0..1.0)))
}

impl<T: Scalar> TransformerWeights<T> {
    /// Seeded uniform `±1/√fan_in` weights with mildly perturbed LN parameters.
    pub fn random(spec: &TransformerModelSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = spec.variant;
        let encoder = (0..v.encoder_layers(spec.n_layers))
            .map(|_| EncoderLayer {
                attn: random_attention(&mut rng, spec),
                ffn: random_ffn(&mut rng, spec),
            })
            .collect();
        let decoder = (0..v.decoder_layers(spec.n_layers))
            .map(|_| DecoderLayer {
                self_attn: random_attention(&mut rng, spec),
                cross_attn: v
                    .has_cross_attention()
                    .then(|| random_attention(&mut rng, spec)),
                ffn: random_ffn(&mut rng, spec),
            })
            .collect();
        let head = v
            .has_head()
            .then(|| uniform(&mut rng, spec.d_model, spec.d_model));
        Self {
            encoder,
            decoder,
            head,
        }
    }

    /// Every tensor with its name, in storage order.
    pub fn named(&self) -> Vec<(String, Matrix<T>)> {
        let mut out = Vec::new();
        for (l, layer) in self.encoder.iter().enumerate() {
            attention_matrices(&format!("encoder.{l}.attn"), &layer.attn, &mut out);
            ffn_matrices(&format!("encoder.{l}.ffn"), &layer.ffn, &mut out);
        }
        for (l, layer) in self.decoder.iter().enumerate() {
            attention_matrices(&format!("decoder.{l}.self_attn"), &layer.self_attn, &mut out);
            if let Some(c) = &layer.cross_attn {
                attention_matrices(&format!("decoder.{l}.cross_attn"), c, &mut out);
            }
            ffn_matrices(&format!("decoder.{l}.ffn"), &layer.ffn, &mut out);
        }
        if let Some(h) = &self.head {
            out.push(("head.w".to_string(), h.clone()));
        }
        out
    }

    /// Assembles weights for `spec` from named tensors. Missing, misshapen and
    /// unexpected tensors are all reported.
    pub fn from_named(spec: &TransformerModelSpec, map: BTreeMap<String, Matrix<T>>) -> Result<Self> {
        let mut st = Store {
            map,
            diags: Vec::new(),
        };
        let v = spec.variant;
        let encoder = (0..v.encoder_layers(spec.n_layers))
            .map(|l| EncoderLayer {
                attn: st.attention(&format!("encoder.{l}.attn"), spec),
                ffn: st.ffn(&format!("encoder.{l}.ffn"), spec),
            })
            .collect();
        let decoder = (0..v.decoder_layers(spec.n_layers))
            .map(|l| DecoderLayer {
                self_attn: st.attention(&format!("decoder.{l}.self_attn"), spec),
                cross_attn: v
                    .has_cross_attention()
                    .then(|| st.attention(&format!("decoder.{l}.cross_attn"), spec)),
                ffn: st.ffn(&format!("decoder.{l}.ffn"), spec),
            })
            .collect();
        let head = v
            .has_head()
            .then(|| st.take("head.w", spec.d_model, spec.d_model));
        for name in st.map.keys() {
            st.diags
                .push(Diagnostic::new(format!("weights.{name}"), "unexpected tensor"));
        }
        if !st.diags.is_empty() {
            return Err(Error::InvalidConfig(st.diags));
        }
        Ok(Self {
            encoder,
            decoder,
            head,
        })
    }

    /// Checks shapes against `spec`.
    pub fn diagnostics(&self, spec: &TransformerModelSpec) -> Vec<Diagnostic> {
        let map = self.named().into_iter().collect();
        match Self::from_named(spec, map) {
            Ok(_) => Vec::new(),
            Err(Error::InvalidConfig(d)) => d,
            Err(e) => vec![Diagnostic::new("weights", e.to_string())],
        }
    }

    /// Writes the binary blob and its manifest next to it.
    pub fn save_bin(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let named = self.named();
        let mut bytes = Vec::new();
        let mut tensors = Vec::with_capacity(named.len());
        for (name, m) in &named {
            for &v in m.data() {
                bytes.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
            }
            tensors.push(TensorEntry {
                name: name.clone(),
                shape: [m.rows(), m.cols()],
            });
        }
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
        let manifest = WeightManifest {
            dtype: MANIFEST_DTYPE.to_string(),
            tensors,
        };
        let mpath = manifest_path(path);
        let text = serde_json::to_string_pretty(&manifest).map_err(|source| Error::Json {
            path: mpath.clone(),
            source,
        })?;
        std::fs::write(&mpath, text + "\n").map_err(|e| Error::io(&mpath, e))
    }

    pub fn load_bin(spec: &TransformerModelSpec, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mpath = manifest_path(path);
        let text = std::fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?;
        let manifest: WeightManifest = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: mpath.clone(),
            source,
        })?;
        let perr = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message,
        };
        if manifest.dtype != MANIFEST_DTYPE {
            return Err(perr(format!(
                "manifest dtype {:?}, expected {MANIFEST_DTYPE:?}",
                manifest.dtype
            )));
        }
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let expected: usize = manifest.tensors.iter().map(|t| t.shape[0] * t.shape[1] * 4).sum();
        if bytes.len() != expected {
            return Err(perr(format!(
                "{} bytes but the manifest describes {expected}",
                bytes.len()
            )));
        }
        let mut map = BTreeMap::new();
        let mut off = 0;
        for t in manifest.tensors {
            let n = t.shape[0] * t.shape[1];
            let data = bytes[off..off + 4 * n]
                .chunks_exact(4)
                .map(|c| T::lit(f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64))
                .collect();
            off += 4 * n;
            if map.contains_key(&t.name) {
                return Err(perr(format!("duplicate tensor {}", t.name)));
            }
            map.insert(t.name, Matrix::from_vec(t.shape[0], t.shape[1], data)?);
        }
        Self::from_named(spec, map)
    }

    /// Loads every `<name>.csv` in `dir`.
    pub fn load_csv_dir(spec: &TransformerModelSpec, dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut map = BTreeMap::new();
        let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(dir, e))?;
            let p = entry.path();
            if p.extension().and_then(|e| e.to_str()) != Some("csv") {
                continue;
            }
            let name = p
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_string();
            map.insert(name, read_csv_matrix(&p)?);
        }
        Self::from_named(spec, map)
    }

    /// Directory of CSVs or a binary blob, chosen by what `path` is.
    pub fn load(spec: &TransformerModelSpec, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if path.is_dir() {
            Self::load_csv_dir(spec, path)
        } else {
            Self::load_bin(spec, path)
        }
    }

    /// Copy with every weight rounded through `f32`, as stored on disk.
    pub fn rounded_to_f32(&self, spec: &TransformerModelSpec) -> Self {
        let map = self
            .named()
            .into_iter()
            .map(|(n, m)| (n, m.map(|v| T::lit(v.as_f64() as f32 as f64))))
            .collect();
        Self::from_named(spec, map).expect("names come from a valid set")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tron::Variant;

    fn spec(variant: Variant) -> TransformerModelSpec {
        TransformerModelSpec {
            n_layers: 2,
            n_heads: 2,
            d_model: 4,
            d_k: 2,
            d_ff: 6,
            seq_len: 3,
            variant,
        }
    }

    #[test]
    fn random_weights_fit_every_variant() {
        for v in [
            Variant::EncoderOnly,
            Variant::DecoderOnly,
            Variant::EncoderDecoder,
            Variant::Vit,
        ] {
            let s = spec(v);
            let w = TransformerWeights::<f64>::random(&s, 1);
            assert!(w.diagnostics(&s).is_empty(), "{v}");
        }
        let s = spec(Variant::EncoderDecoder);
        let w = TransformerWeights::<f64>::random(&s, 1);
        assert_eq!(w.encoder.len(), 2);
        assert!(w.decoder.iter().all(|d| d.cross_attn.is_some()));
    }

    #[test]
    fn binary_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let s = spec(Variant::Vit);
        let w = TransformerWeights::<f64>::random(&s, 3);
        let p = dir.path().join("w.bin");
        w.save_bin(&p).unwrap();
        assert!(dir.path().join("w.manifest.json").exists());
        let back = TransformerWeights::<f64>::load(&s, &p).unwrap();
        assert_eq!(back, w.rounded_to_f32(&s));
    }

    #[test]
    fn csv_dir_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let s = TransformerModelSpec {
            n_layers: 1,
            ..spec(Variant::EncoderOnly)
        };
        let w = TransformerWeights::<f64>::random(&s, 4);
        for (name, m) in w.named() {
            crate::tensor::write_csv_matrix(dir.path().join(format!("{name}.csv")), &m).unwrap();
        }
        assert_eq!(TransformerWeights::<f64>::load(&s, dir.path()).unwrap(), w);

        let mut map: BTreeMap<_, _> = w.named().into_iter().collect();
        map.remove("encoder.0.attn.w_o");
        map.insert("encoder.0.ffn.w_1".into(), Matrix::zeros(2, 2));
        map.insert("extra".into(), Matrix::zeros(1, 1));
        let Err(Error::InvalidConfig(d)) = TransformerWeights::from_named(&s, map) else {
            panic!("expected diagnostics");
        };
        let fields: Vec<_> = d.iter().map(|x| x.field.as_str()).collect();
        assert!(fields.contains(&"weights.encoder.0.attn.w_o"));
        assert!(fields.contains(&"weights.encoder.0.ffn.w_1"));
        assert!(fields.contains(&"weights.extra"));
    }
}
