//! Decoded Quantum Interferometry workbench.
//!
//! Compiles 0–1 ILPs into max-XORSAT instances, builds the gate-level DQI
//! circuit with a coherent BP1 decoder, simulates it, and benchmarks the
//! result against classical decoders and exact solvers.

pub mod analytics;
pub mod circuits;
pub mod decoders;
pub mod encoder;
pub mod error;
pub mod experiments;
pub mod gf2;
pub mod instances;
pub mod simulator;
pub mod xorsat;

pub use analytics::{DickeWeights, DqiPrediction};
pub use circuits::QuantumCircuit;
pub use error::{Error, Result};
pub use gf2::{BitMatrix, BitVec};
pub use xorsat::XorSatInstance;

/// Floating-point type usable by the decoders, simulator and analytics.
pub trait Scalar:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::NumAssign
    + Send
    + Sync
    + std::fmt::Debug
    + 'static
{
}

impl<T> Scalar for T where
    T: num_traits::Float
        + num_traits::FloatConst
        + num_traits::NumAssign
        + Send
        + Sync
        + std::fmt::Debug
        + 'static
{
}

pub type Bp2Config64 = decoders::Bp2Config<f64>;
pub type Bp2Config32 = decoders::Bp2Config<f32>;
pub type StateVector64 = simulator::StateVector<f64>;
pub type StateVector32 = simulator::StateVector<f32>;
pub type SparseState64 = simulator::SparseState<f64>;
