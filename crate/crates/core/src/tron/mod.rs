//! Transformer mapping: model description, weights, and the mapper that runs
//! encoder and decoder stacks on the photonic kernels.

mod mapper;
mod spec;
mod weights;

pub use mapper::{
    attention_head, attention_scores_decomposed, ffn_block, ffn_forward, mha_forward,
    prepare_offline_operands, run_transformer, run_transformer_with, OfflineOperands,
    BANK_ARRAYS_PER_HEAD,
};
pub use spec::{TransformerModelSpec, Variant};
pub use weights::{
    manifest_path, random_input, AttentionWeights, DecoderLayer, EncoderLayer, FfnWeights, HeadWeights,
    TensorEntry, TransformerWeights, WeightManifest,
};
