//! Link-level Monte-Carlo simulation of noncoherent energy-harvesting
//! amplify-and-forward relay networks.
//!
//! Sources broadcast M-DPSK or M-FSK symbols; `K` relays harvest energy from the
//! source signal (power splitting or time switching) and amplify-and-forward
//! what they receive. The destination runs either the exact maximum-likelihood
//! detector or its closed-form five-point Gauss–Legendre approximation.

pub mod channel;
pub mod detectors;
pub mod harness;
pub mod numerics;
pub mod protocol;
pub mod transceiver;
