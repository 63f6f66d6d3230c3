//! Functional and performance simulator for silicon-photonic neural-network
//! accelerators built from microring resonator (MR) banks.
//!
//! The crate models MR devices and WDM banks, the photonic compute kernels
//! built on them (non-coherent multiplication, coherent summation, balanced
//! photodetection, SOA activations, LUT softmax), maps transformer and GNN
//! inference onto those kernels, and turns the resulting device-event traces
//! into latency, energy, energy-per-bit and GOPS figures.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix it to [`Real`] for the CLI and the bundled examples.

pub mod device;
pub mod error;
pub mod ghost;
pub mod harness;
pub mod kernels;
pub mod perf;
pub mod scalar;
pub mod tensor;
pub mod tron;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use tensor::Matrix;

/// Scalar used by the CLI and reports.
pub type Real = f64;

pub type RealMatrix = Matrix<Real>;
pub type RealMrDevice = device::MrDevice<Real>;
pub type RealGrid = device::WavelengthGrid<Real>;
pub type RealEngine = kernels::PhotonicEngine<Real>;
pub type RealEngineConfig = kernels::PhotonicEngineConfig<Real>;
pub type RealGraph = ghost::Graph<Real>;
pub type RealTransformerWeights = tron::TransformerWeights<Real>;

/// Tool version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Execution mode shared by the transformer and GNN mappers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Full-precision digital execution.
    FloatRef,
    /// Digital execution on the same integer codes the photonic path uses.
    QuantRef,
    /// Photonic kernels with trace emission and optional noise.
    Photonic,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::FloatRef => "float_ref",
            Mode::QuantRef => "quant_ref",
            Mode::Photonic => "photonic",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "float_ref" => Ok(Mode::FloatRef),
            "quant_ref" => Ok(Mode::QuantRef),
            "photonic" => Ok(Mode::Photonic),
            other => Err(Error::Unsupported {
                what: "mode",
                name: other.to_string(),
            }),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
