//! The fitted Radon–Nikodym model and the eigenproblems derived from it.

mod cluster;
mod coverage;
mod document;
mod outlier;

pub use cluster::{fit, ClusterModel, DistributionEstimate, Prediction};
pub use coverage::{
    coverage_eigenstates, interval_coverage, two_class_classifier, CoverageSpectrum, TwoClassModel,
};
pub use document::{write_json_17, ModelDocument};
pub use outlier::{outlier_report, OutlierProbe, OutlierReport};
