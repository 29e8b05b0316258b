//! Numerically exact reference for the driven qubit: the spin and a finite
//! Ohmic bath of harmonic oscillators evolved as a locally purified matrix
//! product state with second-order TEBD.
//!
//! The bath is a star around the spin. Interaction gates reach every mode by
//! routing the spin along the chain with swap gates, right then back left.

pub mod bath;
pub mod dense;
pub mod error;
pub mod mps;
pub mod run;

pub use bath::{discretize_bath, BathMode, DiscretizedBath};
pub use dense::dense_reference;
pub use error::{Error, Result};
pub use mps::{initial_purified_state, initial_purified_state_with, tebd_step, PurifiedMps, Site, StepGates, Truncation};
pub use run::{tn_run, tn_run_on, TnConfig, TnSample, TnTrajectory, DESK_SCALE_MODES};
