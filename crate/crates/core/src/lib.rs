//! Simulation toolkit for tendon-driven, spring-restored robot hands.

pub mod calibration;
pub mod config;
pub mod contact_world;
pub mod dynamics;
pub mod error;
pub mod grasp_taxonomy;
pub mod hand_model;
pub mod statics;
pub mod tendon_geometry;

pub use error::{HandError, Result};
