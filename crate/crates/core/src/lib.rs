//! Norm-free Radon–Nikodym supervised learning.
//!
//! From observations `x⁽ˡ⁾ → y⁽ˡ⁾` the crate assembles the Gram matrix
//! `G = Σ x xᵀ` and the label-weighted matrix `yG = Σ y x xᵀ`, solves the
//! generalized symmetric eigenproblem `yG ψ = λ G ψ`, and exposes what falls out
//! of it:
//!
//! * the outcome spectrum `y⁽ⁱ⁾` (eigenvalues) and cluster centers `ψ⁽ⁱ⁾`,
//! * outcome probabilities `P⁽ⁱ⁾(x)` obtained by projecting a query onto the
//!   cluster centers,
//! * the least-squares (`A_LS`) and Radon–Nikodym (`A_RN`) point estimators,
//! * per-cluster coverage `C⁽ⁱ⁾` and localization `D⁽ⁱ⁾`,
//! * the `(y⁽ⁱ⁾, C⁽ⁱ⁾)` distribution estimate, which reduces to Gauss
//!   quadrature when the features are polynomials of `y` itself,
//! * coverage, interval-count and two-class eigenproblems for component
//!   selection.
//!
//! ```
//! use rnml_core::{fit, Dataset};
//!
//! let data = Dataset::from_rows(vec![
//!     (vec![1.0, -1.0], 0.0),
//!     (vec![1.0, 0.0], 1.0),
//!     (vec![1.0, 1.0], 0.0),
//! ])
//! .unwrap();
//! let model = fit(&data, 0.0).unwrap();
//! let p = model.predict(&[1.0, 0.0]).unwrap();
//! assert!((p.a_rn - 1.0 / 3.0).abs() < 1e-12);
//! ```

pub mod basis;
mod error;
pub mod linalg;
pub mod model;
pub mod moments;
pub mod synth;

pub use basis::{BasisSpec, Family};
pub use error::{Error, Result};
pub use linalg::{CholeskyFactor, EigenDecomposition, Matrix, SymMatrix};
pub use model::{
    coverage_eigenstates, fit, interval_coverage, outlier_report, two_class_classifier,
    ClusterModel, CoverageSpectrum, DistributionEstimate, OutlierProbe, OutlierReport,
    Prediction, TwoClassModel,
};
pub use moments::{build_moments, Dataset, MomentSet};
pub use synth::{generate, target_fn, SynthSpec, Target};
