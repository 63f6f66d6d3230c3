//! Analytic operation counts, the GOPS numerator.
//!
//! A multiply-accumulate counts as one operation, and so does every value
//! entering a coherent sum (residual adds, neighbor aggregation). Softmax,
//! activations and layer-norm statistics are not counted.

use serde::Serialize;

use crate::ghost::{Graph, GnnModelSpec};
use crate::scalar::Scalar;
use crate::tron::TransformerModelSpec;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TransformerOpCount {
    pub attention: u64,
    pub projection: u64,
    pub ffn: u64,
    pub residual: u64,
    pub head: u64,
}

impl TransformerOpCount {
    pub fn total(&self) -> u64 {
        self.attention + self.projection + self.ffn + self.residual + self.head
    }

    fn add_attention(&mut self, s: u64, dm: u64, dk: u64, h: u64) {
        // Q, Q·W_Kᵀ, (·)·Xᵀ, V, P·V
        self.attention += h * (s * dm * dk + s * dk * dm + s * dm * s + s * dm * dk + s * s * dk);
        self.projection += s * dm * dm;
        self.residual += 2 * s * dm;
    }

    fn add_ffn(&mut self, s: u64, dm: u64, dff: u64) {
        self.ffn += 2 * s * dm * dff;
        self.residual += 2 * s * dm;
    }
}

pub fn transformer_op_count(spec: &TransformerModelSpec) -> TransformerOpCount {
    let (s, dm, dk, h, dff) = (
        spec.seq_len as u64,
        spec.d_model as u64,
        spec.d_k as u64,
        spec.n_heads as u64,
        spec.d_ff as u64,
    );
    let v = spec.variant;
    let mut c = TransformerOpCount::default();
    for _ in 0..v.encoder_layers(spec.n_layers) {
        c.add_attention(s, dm, dk, h);
        c.add_ffn(s, dm, dff);
    }
    for _ in 0..v.decoder_layers(spec.n_layers) {
        c.add_attention(s, dm, dk, h);
        if v.has_cross_attention() {
            c.add_attention(s, dm, dk, h);
        }
        c.add_ffn(s, dm, dff);
    }
    if v.has_head() {
        c.head = s * dm * dm;
    }
    c
}

/// `Σ_layers (Σ_v incidences(v)·f_in + |V|·f_in·f_out)`, where a vertex's
/// incidences include its self-loop when the layer adds one.
pub fn gnn_op_count<T: Scalar>(graph: &Graph<T>, spec: &GnnModelSpec) -> u64 {
    let n = graph.vertex_count() as u64;
    spec.layers
        .iter()
        .map(|l| {
            let inc: u64 = (0..graph.vertex_count())
                .map(|v| graph.incidences(v, l.self_loops).len() as u64)
                .sum();
            inc * l.f_in as u64 + n * l.f_in as u64 * l.f_out as u64
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tron::Variant;

    #[test]
    fn single_token_ffn() {
        let spec = TransformerModelSpec {
            n_layers: 1,
            n_heads: 1,
            d_model: 64,
            d_k: 64,
            d_ff: 128,
            seq_len: 1,
            variant: Variant::EncoderOnly,
        };
        assert_eq!(transformer_op_count(&spec).ffn, 2 * 64 * 128);
    }

    #[test]
    fn trivial_model() {
        let spec = TransformerModelSpec {
            n_layers: 1,
            n_heads: 1,
            d_model: 1,
            d_k: 1,
            d_ff: 1,
            seq_len: 1,
            variant: Variant::EncoderOnly,
        };
        let c = transformer_op_count(&spec);
        // five 1×1 products, W_O, two FFN products, two residual adds of 2
        assert_eq!(c.total(), 5 + 1 + 2 + 4);
        let none = TransformerModelSpec { n_layers: 0, ..spec };
        assert_eq!(transformer_op_count(&none).total(), 0);
    }
}
