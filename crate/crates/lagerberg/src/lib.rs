//! File formats, scenes and reports around `lagerberg-core`.

pub mod format;
pub mod scene;
pub mod suite;
pub mod witness;

pub use scene::{Report, Scene, SceneError, Settings};
