//! Scene configuration, noise, data products and command runs.

mod config;
mod io;
mod noise;
mod run;

pub use config::{
    bundled_scene, IncidentConfig, MeasurementConfig, MediumConfig, NoiseConfig, ObstacleConfig, Scene, SceneConfig,
    SolverConfig, BUNDLED_SCENES,
};
pub use io::{
    farfield_from_csv, farfield_to_csv, fmt_f64, grid_from_csv, grid_sidecar, grid_to_csv, grid_to_pgm, read_farfield,
    read_grid, table_to_csv, write_farfield, write_grid, GridFiles, GridSidecar, FARFIELD_HEADER, GRID_HEADER,
};
pub use noise::{inject_noise, NoisyPattern};
pub use run::{
    convex_hull, corner_ridge_distances, run, solve_scene, CacheStats, Command, Comparison, DataProvenance, Gate,
    Overrides, RunManifest, RunOptions, Stage, LEVEL_SET_FRACTION, RIDGE_FRACTION,
};
