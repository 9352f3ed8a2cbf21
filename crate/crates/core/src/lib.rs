//! Secret-key-rate bounds for satellite QKD when the eavesdropper only
//! reaches part of the beam and an uncharacterised bypass channel carries
//! the rest.
//!
//! * [`gaussian`]: covariance-matrix algebra.
//! * [`cv`]: continuous-variable key rates (reverse and direct reconciliation).
//! * [`dv`]: BB84 bounds for single-photon and weak coherent pulse sources.
//! * [`lidar`]: beam optics and monitoring bounds on the eavesdropper's apertures.

pub mod cv;
pub mod dv;
pub mod gaussian;
pub mod lidar;
pub mod par;
