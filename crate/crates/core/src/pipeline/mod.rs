//! Manifest-driven batch generation and inspection renders.

mod manifest;
mod render;
mod runner;

pub use manifest::{
    load_manifest, validate_manifest, Generator, GeneratorConfig, Manifest, ManifestRow,
};
pub use render::{
    compose_grid, draw_label, inspect_panels, mask_image, sweep_scale_render, SweepPanel,
};
pub use runner::{generate_row, run, RowRecord, RowStatus, RunLedger, RunOptions};
