//! Directional quantile classifiers.
//!
//! A point is assigned to the class whose directional quantiles it sits
//! closest to under the asymmetric quantile loss, summed over a set of
//! projection directions with data-driven weights. The crate also provides
//! componentwise baselines, exact two-population error curves and a
//! seeded simulation harness.
//!
//! ```
//! use dirquant::{fit, DqcConfig, LabeledDataset, QuantileLevel};
//!
//! let rows: Vec<Vec<f64>> = (0..20)
//!     .map(|i| vec![(i % 10) as f64 * 0.1 + if i < 10 { 0.0 } else { 5.0 }, 1.0])
//!     .collect();
//! let labels = (0..20).map(|i| if i < 10 { 1 } else { 2 }).collect();
//! let data = LabeledDataset::from_rows(&rows, labels).unwrap();
//! let config = DqcConfig {
//!     theta_grid: vec![QuantileLevel::MEDIAN],
//!     directions_per_theta: Some(8),
//!     ..Default::default()
//! };
//! let model = fit(&data, &config).unwrap();
//! assert_eq!(model.predict(&[5.2, 1.0]).unwrap(), 2);
//! ```

pub mod baselines;
pub mod cli;
pub mod dataset;
pub mod directions;
pub mod dqc;
pub mod error;
pub mod io;
pub mod quantile;
pub mod seed;
pub mod simbench;
pub mod theory;

pub use baselines::{fit_centroid, fit_cqc, fit_cqc_at, fit_median, BaselineKind, BaselineModel};
pub use dataset::{misclassification_rate, Label, LabeledDataset};
pub use directions::{Direction, DirectionSet};
pub use dqc::{fit, DirectionMode, DqcConfig, TrainedDqc};
pub use error::{Error, Result};
pub use quantile::{empirical_quantile, loss_gap, quantile_loss, QuantileLevel, SortedSample};
pub use simbench::{ClassifierSpec, FittedClassifier, Scenario, ScenarioConfig};
