//! Estimation of a common change-in-the-mean set in spatio-temporal data on
//! a rectangular lattice.
//!
//! Each lattice row (or column) is cut into overlapping windows of `N`
//! pixels; every window is treated as a panel of `N` short time series and
//! its change point is located with a weighted CUSUM statistic. Change
//! points that several consecutive windows agree on are kept as relevant
//! points, and runs of relevant points along a slice are closed into the
//! estimated change set.
//!
//! ```
//! use changeset::{estimate_change_set, Gamma, Mode, NoiseSpec, OverlapRule, Scenario};
//!
//! let scenario = Scenario::rectangle(50).with_noise(NoiseSpec::disabled());
//! let data = scenario.generate(0, 50).unwrap();
//! let rule = OverlapRule::new(6, 2).unwrap();
//! let est = estimate_change_set(&data, Mode::Horizontal, rule, Gamma::ZERO).unwrap();
//! assert_eq!(est, scenario.truth().unwrap());
//! ```

pub mod config;
pub mod connect;
pub mod cusum;
pub mod error;
pub mod experiment;
pub mod lattice;
pub mod pgm;
pub mod scan;
pub mod slicing;
pub mod synth;

pub use connect::{
    estimate_change_set, estimate_detailed, validate_theorem_conditions, ConditionReport, Estimate,
    Mode,
};
pub use cusum::{estimate_change_point, Gamma, PanelSeries};
pub use error::{Error, Result};
pub use experiment::{run_cell, run_table, run_trial, CellResult, ExperimentGrid};
pub use lattice::{jaccard_distance, Lattice, Partition, Point, PointSet};
pub use scan::{scan, OverlapRule, ScanField};
pub use slicing::{FrameSequence, Orientation, SubSliceSpec};
pub use synth::{MeanGenerator, NoiseSpec, Scenario};
