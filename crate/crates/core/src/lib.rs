//! Simulation and signal processing for FBG shape sensing on a continuum
//! manipulator that carries a rotating tool.
//!
//! The pipeline mirrors a bench experiment:
//!
//! * [`vib_model`] generates wavelength traces from a two-degree-of-freedom
//!   rotating-unbalance model superposed on slow bend trajectories.
//! * [`spectral`] computes spectra and picks out the base frequency, the
//!   tool fundamental and its harmonics.
//! * [`filtering`] removes tool-locked content with zero-phase notch cascades.
//! * [`shape`] turns wavelengths into curvature and a planar centerline.
//! * [`events`] flags sudden level shifts in filtered traces.
//! * [`sweep`] runs amplitude-vs-RPM sweeps and locates resonances.
//! * [`cli_io`] holds the command line, configuration and CSV formats.

pub mod cli_io;
pub mod error;
pub mod events;
pub mod filtering;
pub mod shape;
pub mod spectral;
pub mod sweep;
pub mod trace;
pub mod vib_model;

pub use error::{Error, Result};
pub use trace::{ChannelLabel, WavelengthTrace};
