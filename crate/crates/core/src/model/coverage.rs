//! Eigenproblems on `n⁽ˡ⁾`-weighted matrices: coverage extremums, per-interval
//! observation counts and the signed two-class variant. All are solved against
//! the (regularized) Gram matrix as metric.

use super::cluster::check_lambda;
use crate::linalg::{self, CholeskyFactor, EigenDecomposition, Matrix};
use crate::moments::{build_moments, build_n_weights_factored, build_weighted_matrix, regularize, Dataset};
use crate::{Error, Result};

/// Generalized eigenpairs of `(CG, G)` for some weighted `CG`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageSpectrum {
    pub decomposition: EigenDecomposition,
    /// `tr(G⁻¹ · CG)`, evaluated as the trace of `L⁻¹ · CG · L⁻ᵀ`; the
    /// eigenvalues must sum to it.
    pub expected_sum: f64,
}

impl CoverageSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.decomposition.values
    }

    pub fn sum(&self) -> f64 {
        self.decomposition.value_sum()
    }

    /// Indices by descending eigenvalue; ties keep index order.
    pub fn ranked(&self) -> Vec<usize> {
        let v = self.values();
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[b].total_cmp(&v[a]));
        idx
    }

    /// The `d` states of largest coverage as rows of a `d × d_x` transform.
    pub fn top(&self, d: usize) -> Result<Matrix> {
        let dim = self.values().len();
        if d == 0 || d > dim {
            return Err(Error::InvalidParameter(format!(
                "cannot select {d} of {dim} states"
            )));
        }
        let ranked = self.ranked();
        let vecs = &self.decomposition.vectors;
        Ok(Matrix::from_fn(d, dim, |r, c| vecs.get(c, ranked[r])))
    }
}

pub(crate) struct Metric {
    pub factor: CholeskyFactor,
    pub n: Vec<f64>,
}

pub(crate) fn metric(data: &Dataset, lambda: f64) -> Result<Metric> {
    check_lambda(lambda)?;
    let g = regularize(&build_moments(data).g, lambda);
    let factor = linalg::cholesky(&g)?;
    let n = build_n_weights_factored(data, &factor)?;
    Ok(Metric { factor, n })
}

fn spectrum(data: &Dataset, metric: &Metric, weights: &[f64]) -> Result<CoverageSpectrum> {
    let cg = build_weighted_matrix(data, weights)?;
    let decomposition = linalg::gen_sym_eigen_factored(&cg, &metric.factor)?;
    Ok(CoverageSpectrum {
        decomposition,
        expected_sum: linalg::reduce(&cg, &metric.factor)?.trace(),
    })
}

/// States of extremal coverage: `CG ψ = C G ψ` with `CG = Σ n⁽ˡ⁾ x xᵀ`.
/// Without regularization the coverages sum to `M`.
pub fn coverage_eigenstates(data: &Dataset, lambda: f64) -> Result<CoverageSpectrum> {
    let metric = metric(data, lambda)?;
    spectrum(data, &metric, &metric.n)
}

/// As [`coverage_eigenstates`] counting only observations with `lo <= y < hi`.
pub fn interval_coverage(data: &Dataset, lambda: f64, lo: f64, hi: f64) -> Result<CoverageSpectrum> {
    if !(lo < hi) {
        return Err(Error::InvalidParameter(format!("empty interval [{lo}, {hi})")));
    }
    let metric = metric(data, lambda)?;
    let weights: Vec<f64> = data
        .labels()
        .iter()
        .zip(&metric.n)
        .map(|(&y, &n)| if lo <= y && y < hi { n } else { 0.0 })
        .collect();
    if weights.iter().all(|&w| w == 0.0) {
        log::warn!("no observation has y in [{lo}, {hi}); all interval coverages are zero");
    }
    spectrum(data, &metric, &weights)
}

/// Signed coverage problem: class-1 observations weigh `+n⁽ˡ⁾`, class-2 `−n⁽ˡ⁾`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoClassModel {
    pub class1: f64,
    pub class2: f64,
    pub count1: usize,
    pub count2: usize,
    /// Eigenvalues are the prediction strengths, eigenvectors the classifiers.
    pub spectrum: CoverageSpectrum,
}

impl TwoClassModel {
    /// Ascending.
    pub fn strengths(&self) -> &[f64] {
        self.spectrum.values()
    }

    pub fn classifiers(&self) -> &Matrix {
        &self.spectrum.decomposition.vectors
    }

    /// `tr(G⁻¹ · CG_signed)`; equals `count1 − count2` without regularization.
    pub fn signed_trace(&self) -> f64 {
        self.spectrum.expected_sum
    }
}

pub fn two_class_classifier(data: &Dataset, lambda: f64, class1: f64, class2: f64) -> Result<TwoClassModel> {
    if class1 == class2 {
        return Err(Error::InvalidParameter("the two class labels must differ".into()));
    }
    let mut signs = Vec::with_capacity(data.len());
    for (row, &y) in data.labels().iter().enumerate() {
        if y == class1 {
            signs.push(1.0);
        } else if y == class2 {
            signs.push(-1.0);
        } else {
            return Err(Error::LabelNotInClasses { row, label: y });
        }
    }
    let metric = metric(data, lambda)?;
    let weights: Vec<f64> = signs.iter().zip(&metric.n).map(|(s, n)| s * n).collect();
    let count1 = signs.iter().filter(|&&s| s > 0.0).count();
    Ok(TwoClassModel {
        class1,
        class2,
        count1,
        count2: data.len() - count1,
        spectrum: spectrum(data, &metric, &weights)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_point() -> Dataset {
        Dataset::from_rows(vec![
            (vec![1.0, -1.0], 0.0),
            (vec![1.0, 0.0], 1.0),
            (vec![1.0, 1.0], 0.0),
        ])
        .unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn three_point_coverage() {
        let s = coverage_eigenstates(&three_point(), 0.0).unwrap();
        // CG = diag(27/5, 12/5) against G = diag(3, 2)
        assert!(close(s.values()[0], 6.0 / 5.0));
        assert!(close(s.values()[1], 9.0 / 5.0));
        assert!(close(s.sum(), 3.0));
        assert!(close(s.expected_sum, 3.0));
        assert_eq!(s.ranked(), vec![1, 0]);
        let t = s.top(1).unwrap();
        assert_eq!((t.rows(), t.cols()), (1, 2));
        assert!(close(t.get(0, 0), (1.0_f64 / 3.0).sqrt()) && close(t.get(0, 1), 0.0));
        assert!(s.top(3).is_err());
        assert!(s.top(0).is_err());
    }

    #[test]
    fn single_observation_coverage() {
        let data = Dataset::from_rows(vec![(vec![2.0], 1.0)]).unwrap();
        let s = coverage_eigenstates(&data, 0.0).unwrap();
        assert!(close(s.values()[0], 1.0));
    }

    #[test]
    fn one_hot_coverage() {
        let data = Dataset::from_rows(vec![
            (vec![1.0, 0.0, 0.0], 0.0),
            (vec![0.0, 1.0, 0.0], 1.0),
            (vec![0.0, 0.0, 1.0], 2.0),
        ])
        .unwrap();
        let s = coverage_eigenstates(&data, 0.0).unwrap();
        assert_eq!(s.values(), &[1.0, 1.0, 1.0]);
        assert_eq!(s.ranked(), vec![0, 1, 2]);
    }

    #[test]
    fn interval_examples() {
        let data = three_point();
        let all = interval_coverage(&data, 0.0, -10.0, 10.0).unwrap();
        assert_eq!(all, coverage_eigenstates(&data, 0.0).unwrap());

        let none = interval_coverage(&data, 0.0, 5.0, 6.0).unwrap();
        assert!(none.values().iter().all(|&v| v == 0.0));

        let one = interval_coverage(&data, 0.0, 0.5, 2.0).unwrap();
        assert!(close(one.values()[0], 0.0) && close(one.values()[1], 1.0));
        assert!(close(one.sum(), one.expected_sum));

        // half-open: y = 1 is excluded from [0, 1)
        let half = interval_coverage(&data, 0.0, 0.0, 1.0).unwrap();
        let zeros = interval_coverage(&data, 0.0, 1.0, 2.0).unwrap();
        assert!(close(half.sum() + zeros.sum(), 3.0));
        assert!(close(zeros.sum(), 1.0));

        assert!(interval_coverage(&data, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn two_class_three_point() {
        let m = two_class_classifier(&three_point(), 0.0, 1.0, 0.0).unwrap();
        assert!(close(m.strengths()[0], -6.0 / 5.0));
        assert!(close(m.strengths()[1], 1.0 / 5.0));
        assert!(close(m.spectrum.sum(), -1.0));
        assert!(close(m.signed_trace(), -1.0));
        assert_eq!((m.count1, m.count2), (1, 2));

        let swapped = two_class_classifier(&three_point(), 0.0, 0.0, 1.0).unwrap();
        assert!(close(swapped.strengths()[0], -1.0 / 5.0));
        assert!(close(swapped.strengths()[1], 6.0 / 5.0));
    }

    #[test]
    fn two_class_all_one_class_matches_coverage() {
        let data = Dataset::from_rows(vec![
            (vec![1.0, -1.0], 1.0),
            (vec![1.0, 0.5], 1.0),
            (vec![1.0, 1.0], 1.0),
        ])
        .unwrap();
        let m = two_class_classifier(&data, 0.0, 1.0, 0.0).unwrap();
        let c = coverage_eigenstates(&data, 0.0).unwrap();
        for (a, b) in m.strengths().iter().zip(c.values()) {
            assert!(close(*a, *b));
        }
        assert!((m.spectrum.sum() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn balanced_symmetric_classes_cancel() {
        let data = Dataset::from_rows(vec![
            (vec![1.0, -1.0], 0.0),
            (vec![1.0, -0.5], 0.0),
            (vec![1.0, 0.5], 1.0),
            (vec![1.0, 1.0], 1.0),
        ])
        .unwrap();
        let m = two_class_classifier(&data, 0.0, 1.0, 0.0).unwrap();
        assert!(m.spectrum.sum().abs() < 1e-10);
    }

    #[test]
    fn two_class_rejects_foreign_label() {
        let err = two_class_classifier(&three_point(), 0.0, 1.0, 2.0).unwrap_err();
        assert_eq!(err, Error::LabelNotInClasses { row: 0, label: 0.0 });
        assert!(two_class_classifier(&three_point(), 0.0, 1.0, 1.0).is_err());
    }
}
