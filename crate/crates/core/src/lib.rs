//! Automatic multitrack mixing by minimising inter-track masking.
//!
//! Each track gets a six-band EQ and a compressor whose settings are found
//! by particle swarm optimisation against a cross-adaptive masking metric.

pub mod audio;
pub mod biquad;
pub mod cli;
pub mod error;
pub mod fx;
pub mod loudness;
pub mod metric;
pub mod pipeline;
pub mod pso;
pub mod psycho;
pub mod report;
pub mod session;
pub mod synth;

pub use audio::AudioClip;
pub use error::{Error, Result};
pub use fx::{DrcParams, EqParams, ParamBounds, TrackParams};
pub use metric::{MaskingResult, MetricConfig};
pub use pipeline::{mix_flat, mix_subgrouped, MixResult};
pub use pso::{PsoConfig, PsoTrace};
pub use session::{EngineConfig, InstrumentClass, Session, SubgroupSpec, Track};
