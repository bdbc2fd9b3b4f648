//! Operational surface of `homopart`: seeded instance generators with
//! planted structure, line-oriented text formats, run manifests and the
//! artifacts of the layered weighted construction.

pub mod formats;
pub mod generate;
pub mod gowers_io;
pub mod manifest;

pub use formats::FormatError;
pub use generate::{generate, Family, Instance, InstanceSpec};
pub use manifest::{sha256_hex, RunManifest};
