//! Behavioral, time-stepped simulator of a memristive spiking neural network
//! trained in situ with supervised STDP.
//!
//! The crate is organized bottom-up: [`device`] models a single threshold
//! memristor, [`encoder`] turns data into spike trains, [`circuit`] holds the
//! crossbar, neurons and RC control latches, [`engine`] runs presentations,
//! training and testing, and [`experiments`] drives whole campaigns.

pub mod circuit;
pub mod device;
pub mod encoder;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod metrics;
pub mod seed;

pub use device::{MemristorParams, MemristorState};
pub use encoder::{EncoderConfig, SpikeTrain};
pub use engine::{ModelFile, Network, NetworkConfig, PresentationResult, TrainingMode};
pub use error::{Error, Result};
pub use metrics::Metrics;
