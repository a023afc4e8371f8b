//! Virtual-point-source beamforming for dual near-field IRS-assisted XL-MIMO.
//!
//! A base station (BS) array serves a single-antenna user through an
//! intelligent reflecting surface (IRS), with both hops in the radiating near
//! field. [`vps`] designs both the BS beamformer and the IRS phase profile in
//! closed form by focusing on a virtual point source between the arrays;
//! [`ao`] is the iterative alternating-optimization baseline it is compared
//! against. [`spectrum`] holds the angular-spectrum tools, and [`harness`]
//! runs the experiment sweeps.
//!
//! ```
//! use vpsbeam::{ao, vps, ScenarioSpec};
//!
//! let scenario = ScenarioSpec::baseline().with_counts(16, 64).build()?;
//! let channels = scenario.channels()?;
//! let state = vps::vps_beamformer(&scenario)?;
//! let power = ao::received_power(&channels, &state)?;
//! assert!(power > 0.0);
//! # Ok::<(), vpsbeam::Error>(())
//! ```

mod error;

pub mod ao;
pub mod channel;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod scenario;
pub mod spectrum;
pub mod vps;

pub use ao::{AoTrace, InitKind};
pub use channel::{AmplitudeModel, ChannelSet};
pub use error::{Error, Result};
pub use geometry::{ArrayGeometry, Point2D};
pub use linalg::CMatrix;
pub use scenario::{Scenario, ScenarioSpec};
pub use spectrum::AngularSpectrum;
pub use vps::BeamformerState;

// The guide's code blocks run as doctests of this crate.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/channel.md")]
    mod channel {}
    #[doc = include_str!("../../../book/src/vps.md")]
    mod vps {}
    #[doc = include_str!("../../../book/src/ao.md")]
    mod ao {}
    #[doc = include_str!("../../../book/src/spectrum.md")]
    mod spectrum {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
