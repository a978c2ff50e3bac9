//! File formats, report emission and the command-line front end for
//! `symlab-core`.

pub mod emit;
pub mod manifest;
pub mod trajectory;

pub use emit::{emit_report, emit_reports, exit_status, Format};
pub use manifest::{export, load, load_bindings, load_manifest, Manifest, ManifestError};
