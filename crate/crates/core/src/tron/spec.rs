use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::Diagnostic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    EncoderOnly,
    DecoderOnly,
    EncoderDecoder,
    /// Encoder stack followed by a dense output layer on pre-embedded patches.
    Vit,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::EncoderOnly => "encoder_only",
            Variant::DecoderOnly => "decoder_only",
            Variant::EncoderDecoder => "encoder_decoder",
            Variant::Vit => "vit",
        }
    }

    pub fn encoder_layers(self, n: usize) -> usize {
        match self {
            Variant::DecoderOnly => 0,
            _ => n,
        }
    }

    pub fn decoder_layers(self, n: usize) -> usize {
        match self {
            Variant::DecoderOnly | Variant::EncoderDecoder => n,
            _ => 0,
        }
    }

    pub fn has_cross_attention(self) -> bool {
        self == Variant::EncoderDecoder
    }

    pub fn has_head(self) -> bool {
        self == Variant::Vit
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformerModelSpec {
    pub n_layers: usize,
    pub n_heads: usize,
    pub d_model: usize,
    pub d_k: usize,
    pub d_ff: usize,
    pub seq_len: usize,
    pub variant: Variant,
}

impl TransformerModelSpec {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn diagnostics(&self, prefix: &str) -> Vec<Diagnostic> {
        let mut d = Vec::new();
        for (name, v) in [
            ("n_heads", self.n_heads),
            ("d_model", self.d_model),
            ("d_k", self.d_k),
            ("d_ff", self.d_ff),
            ("seq_len", self.seq_len),
        ] {
            if v == 0 {
                d.push(Diagnostic::new(format!("{prefix}.{name}"), "must be >= 1"));
            }
        }
        if self.n_heads * self.d_k != self.d_model {
            d.push(Diagnostic::new(
                format!("{prefix}.d_model"),
                format!(
                    "d_model = {} but n_heads·d_k = {}·{} = {}",
                    self.d_model,
                    self.n_heads,
                    self.d_k,
                    self.n_heads * self.d_k
                ),
            ));
        }
        d
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.diagnostics("spec");
        if d.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(d))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> TransformerModelSpec {
        TransformerModelSpec {
            n_layers: 2,
            n_heads: 4,
            d_model: 64,
            d_k: 16,
            d_ff: 128,
            seq_len: 16,
            variant: Variant::EncoderOnly,
        }
    }

    #[test]
    fn head_dimension_must_chain() {
        assert!(spec().validate().is_ok());
        let bad = TransformerModelSpec { d_k: 15, ..spec() };
        let d = bad.diagnostics("spec");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].field, "spec.d_model");
    }

    #[test]
    fn json_roundtrip() {
        let s = serde_json::to_string(&spec()).unwrap();
        assert!(s.contains("\"encoder_only\""));
        let back: TransformerModelSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, spec());
        assert!(serde_json::from_str::<TransformerModelSpec>(&s.replace("encoder_only", "rnn")).is_err());
    }
}
