//! Learning samples and the moment matrices assembled from them.
//!
//! All sums over observations use a fixed-tree pairwise reduction so results
//! are bit-stable for a given sample and lose fewer digits than a running sum.

use crate::linalg::{CholeskyFactor, Matrix, SymMatrix};
use crate::{Error, Result};

/// Rows per leaf of the pairwise reduction tree.
const LEAF_ROWS: usize = 32;

/// `M` observations `x⁽ˡ⁾ → y⁽ˡ⁾` with `x⁽ˡ⁾` of fixed dimension `d_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    features: Vec<f64>,
    labels: Vec<f64>,
}

impl Dataset {
    /// `features` is row-major `labels.len() × dim`.
    pub fn new(dim: usize, features: Vec<f64>, labels: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDataset("feature dimension must be positive".into()));
        }
        if labels.is_empty() {
            return Err(Error::InvalidDataset("dataset has no observations".into()));
        }
        if features.len() != dim * labels.len() {
            return Err(Error::InvalidDataset(format!(
                "{} feature values do not form {} rows of dimension {dim}",
                features.len(),
                labels.len()
            )));
        }
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "row {}: feature {} is not finite",
                i / dim,
                i % dim
            )));
        }
        if let Some(l) = labels.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!("row {l}: label is not finite")));
        }
        if labels.len() < dim {
            log::warn!(
                "only {} observations for {dim} features; the Gram matrix is singular without regularization",
                labels.len()
            );
        }
        Ok(Dataset {
            dim,
            features,
            labels,
        })
    }

    pub fn from_rows(rows: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let dim = rows.first().map(|(x, _)| x.len()).unwrap_or(0);
        let mut features = Vec::with_capacity(rows.len() * dim);
        let mut labels = Vec::with_capacity(rows.len());
        for (l, (x, y)) in rows.into_iter().enumerate() {
            if x.len() != dim {
                return Err(Error::InvalidDataset(format!(
                    "row {l} has {} features, expected {dim}",
                    x.len()
                )));
            }
            features.extend(x);
            labels.push(y);
        }
        Dataset::new(dim, features, labels)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, l: usize) -> &[f64] {
        &self.features[l * self.dim..(l + 1) * self.dim]
    }

    pub fn label(&self, l: usize) -> f64 {
        self.labels[l]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.features.chunks(self.dim).zip(self.labels.iter().copied())
    }

    /// `(min y, max y)`
    pub fn label_range(&self) -> (f64, f64) {
        self.labels
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| (lo.min(y), hi.max(y)))
    }

    /// Copy with one more observation appended.
    pub fn with_row(&self, x: &[f64], y: f64) -> Result<Dataset> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        let mut features = self.features.clone();
        features.extend_from_slice(x);
        let mut labels = self.labels.clone();
        labels.push(y);
        Dataset::new(self.dim, features, labels)
    }

    /// Applies `x → T·x` to every feature vector; `T` may be rectangular.
    pub fn transform(&self, t: &Matrix) -> Result<Dataset> {
        let mut features = Vec::with_capacity(self.len() * t.rows());
        for (x, _) in self.rows() {
            features.extend(t.mul_vec(x)?);
        }
        Dataset::new(t.rows(), features, self.labels.clone())
    }
}

/// `G`, `yG` and `Y` of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    /// `G_qr = Σ_l x_q x_r`
    pub g: SymMatrix,
    /// `yG_qr = Σ_l y x_q x_r`
    pub yg: SymMatrix,
    /// `Y_q = Σ_l y x_q`
    pub y_vec: Vec<f64>,
    pub m: usize,
}

pub fn build_moments(data: &Dataset) -> MomentSet {
    let d = data.dim();
    let tri = d * (d + 1) / 2;
    // accumulator layout: [g upper triangle | yg upper triangle | Y]
    let acc = pairwise_sum(data.len(), 2 * tri + d, |l, acc| {
        let x = data.row(l);
        let y = data.label(l);
        let mut k = 0;
        for q in 0..d {
            for r in q..d {
                let p = x[q] * x[r];
                acc[k] += p;
                acc[tri + k] += y * p;
                k += 1;
            }
            acc[2 * tri + q] += y * x[q];
        }
    });
    MomentSet {
        g: unpack_upper(d, &acc[..tri]),
        yg: unpack_upper(d, &acc[tri..2 * tri]),
        y_vec: acc[2 * tri..].to_vec(),
        m: data.len(),
    }
}

/// Tikhonov shift `g + λ·mean(diag g)·I`.
///
/// Panics if `lambda` is negative or not finite.
pub fn regularize(g: &SymMatrix, lambda: f64) -> SymMatrix {
    assert!(
        lambda.is_finite() && lambda >= 0.0,
        "regularization lambda must be finite and non-negative, got {lambda}"
    );
    if lambda == 0.0 {
        return g.clone();
    }
    let mean_diag = g.trace() / g.dim() as f64;
    g.add_identity(lambda * mean_diag)
}

/// `n⁽ˡ⁾ = 1 / (x⁽ˡ⁾ᵀ · G⁻¹ · x⁽ˡ⁾)` for every observation.
pub fn build_n_weights(data: &Dataset, g_inv: &SymMatrix) -> Result<Vec<f64>> {
    if g_inv.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            found: g_inv.dim(),
        });
    }
    let floor = 1e-14 * g_inv.trace();
    data.rows()
        .enumerate()
        .map(|(l, (x, _))| {
            let q = g_inv.quad_form(x)?;
            if q > floor {
                Ok(1.0 / q)
            } else {
                Err(Error::SingularProjection { row: l })
            }
        })
        .collect()
}

/// As [`build_n_weights`] with `G` given by its Cholesky factor; the quadratic
/// forms are evaluated as `‖L⁻¹x‖²`, which stays accurate when `G` is badly
/// conditioned.
pub fn build_n_weights_factored(data: &Dataset, factor: &CholeskyFactor) -> Result<Vec<f64>> {
    if factor.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            found: factor.dim(),
        });
    }
    let floor = 1e-14 * factor.inverse_trace();
    data.rows()
        .enumerate()
        .map(|(l, (x, _))| {
            let q = factor.inverse_quad_form(x)?;
            if q > floor {
                Ok(1.0 / q)
            } else {
                Err(Error::SingularProjection { row: l })
            }
        })
        .collect()
}

/// `Σ_l w_l · x⁽ˡ⁾ x⁽ˡ⁾ᵀ`
pub fn build_weighted_matrix(data: &Dataset, weights: &[f64]) -> Result<SymMatrix> {
    if weights.len() != data.len() {
        return Err(Error::DimensionMismatch {
            expected: data.len(),
            found: weights.len(),
        });
    }
    let d = data.dim();
    let acc = pairwise_sum(data.len(), d * (d + 1) / 2, |l, acc| {
        let w = weights[l];
        if w == 0.0 {
            return;
        }
        let x = data.row(l);
        let mut k = 0;
        for q in 0..d {
            let wq = w * x[q];
            for r in q..d {
                acc[k] += wq * x[r];
                k += 1;
            }
        }
    });
    Ok(unpack_upper(d, &acc))
}

fn unpack_upper(d: usize, packed: &[f64]) -> SymMatrix {
    // Packed row order matches the (q, r≥q) loops above.
    let mut index = vec![0usize; d * d];
    let mut k = 0;
    for q in 0..d {
        for r in q..d {
            index[q * d + r] = k;
            k += 1;
        }
    }
    SymMatrix::from_upper(d, |q, r| packed[index[q * d + r]])
}

/// Fixed-tree pairwise reduction of per-row contributions into `width` slots.
pub(crate) fn pairwise_sum(rows: usize, width: usize, leaf: impl Fn(usize, &mut [f64])) -> Vec<f64> {
    fn go(lo: usize, hi: usize, width: usize, leaf: &dyn Fn(usize, &mut [f64])) -> Vec<f64> {
        if hi - lo <= LEAF_ROWS {
            let mut acc = vec![0.0; width];
            for l in lo..hi {
                leaf(l, &mut acc);
            }
            acc
        } else {
            let mid = lo + (hi - lo) / 2;
            let mut left = go(lo, mid, width, leaf);
            let right = go(mid, hi, width, leaf);
            left.iter_mut().zip(right).for_each(|(a, b)| *a += b);
            left
        }
    }
    go(0, rows, width, &leaf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_eigen;
    use proptest::prelude::*;

    pub(crate) fn three_point() -> Dataset {
        Dataset::from_rows(vec![
            (vec![1.0, -1.0], 0.0),
            (vec![1.0, 0.0], 1.0),
            (vec![1.0, 1.0], 0.0),
        ])
        .unwrap()
    }

    #[test]
    fn factored_n_weights_match_inverse_route() {
        let data = three_point();
        let g = build_moments(&data).g;
        let factor = crate::linalg::cholesky(&g).unwrap();
        let g_inv = crate::linalg::invert_factored(&factor).unwrap();
        let a = build_n_weights_factored(&data, &factor).unwrap();
        let b = build_n_weights(&data, &g_inv).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-14);
        }
        assert!((a[0] - 1.2).abs() < 1e-14 && (a[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn single_row_moments() {
        let data = Dataset::from_rows(vec![(vec![1.0], 2.0)]).unwrap();
        let m = build_moments(&data);
        assert_eq!(m.g.as_slice(), &[1.0]);
        assert_eq!(m.yg.as_slice(), &[2.0]);
        assert_eq!(m.y_vec, vec![2.0]);
        assert_eq!(m.m, 1);
    }

    #[test]
    fn three_point_moments() {
        let m = build_moments(&three_point());
        assert_eq!(m.g, SymMatrix::from_diag(&[3.0, 2.0]));
        assert_eq!(m.yg, SymMatrix::from_diag(&[1.0, 0.0]));
        assert_eq!(m.y_vec, vec![1.0, 0.0]);
    }

    #[test]
    fn zero_labels() {
        let data = Dataset::new(2, vec![1.0, 2.0, -3.0, 0.5], vec![0.0, 0.0]).unwrap();
        let m = build_moments(&data);
        assert_eq!(m.yg, SymMatrix::zeros(2));
        assert_eq!(m.y_vec, vec![0.0, 0.0]);
    }

    #[test]
    fn dataset_validation() {
        assert!(Dataset::new(2, vec![1.0, 2.0, 3.0], vec![0.0, 1.0]).is_err());
        assert!(Dataset::new(1, vec![f64::NAN], vec![0.0]).is_err());
        assert!(Dataset::new(1, vec![1.0], vec![f64::INFINITY]).is_err());
        assert!(Dataset::new(1, vec![], vec![]).is_err());
        assert!(Dataset::from_rows(vec![(vec![1.0], 0.0), (vec![1.0, 2.0], 0.0)]).is_err());
    }

    #[test]
    fn regularize_examples() {
        let g = SymMatrix::from_diag(&[1.0, 3.0]);
        assert_eq!(regularize(&g, 0.0), g);
        assert_eq!(regularize(&SymMatrix::zeros(2), 1.0), SymMatrix::zeros(2));
        assert_eq!(regularize(&g, 0.5), SymMatrix::from_diag(&[2.0, 4.0]));
    }

    #[test]
    #[should_panic]
    fn regularize_rejects_negative_lambda() {
        regularize(&SymMatrix::identity(2), -1.0);
    }

    #[test]
    fn n_weight_examples() {
        let n = build_n_weights(&three_point(), &SymMatrix::from_diag(&[1.0 / 3.0, 0.5])).unwrap();
        let expected = [6.0 / 5.0, 3.0, 6.0 / 5.0];
        for (a, b) in n.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }

        let single = Dataset::from_rows(vec![(vec![1.0], 5.0)]).unwrap();
        assert_eq!(build_n_weights(&single, &SymMatrix::identity(1)).unwrap(), vec![1.0]);

        let one_hot = Dataset::from_rows(vec![(vec![0.0, 2.0], 0.0), (vec![3.0, 4.0], 1.0)]).unwrap();
        let n = build_n_weights(&one_hot, &SymMatrix::identity(2)).unwrap();
        assert_eq!(n, vec![1.0 / 4.0, 1.0 / 25.0]);
    }

    #[test]
    fn n_weight_zero_row() {
        let data = Dataset::from_rows(vec![(vec![1.0, 0.0], 0.0), (vec![0.0, 0.0], 1.0)]).unwrap();
        assert_eq!(
            build_n_weights(&data, &SymMatrix::identity(2)).unwrap_err(),
            Error::SingularProjection { row: 1 }
        );
    }

    #[test]
    fn weighted_matrix_examples() {
        let data = three_point();
        assert_eq!(build_weighted_matrix(&data, &[1.0; 3]).unwrap(), build_moments(&data).g);

        let cg = build_weighted_matrix(&data, &[6.0 / 5.0, 3.0, 6.0 / 5.0]).unwrap();
        let expected = [27.0 / 5.0, 0.0, 0.0, 12.0 / 5.0];
        for (a, b) in cg.as_slice().iter().zip(expected) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }

        let signed = build_weighted_matrix(&data, &[-6.0 / 5.0, 3.0, -6.0 / 5.0]).unwrap();
        let expected = [3.0 / 5.0, 0.0, 0.0, -12.0 / 5.0];
        for (a, b) in signed.as_slice().iter().zip(expected) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }

        assert!(build_weighted_matrix(&data, &[1.0]).is_err());
    }

    #[test]
    fn pairwise_matches_naive_on_large_sample() {
        let m = 10_007;
        let features: Vec<f64> = (0..m * 2).map(|i| ((i * 7919) % 1000) as f64 / 1000.0 - 0.5).collect();
        let labels: Vec<f64> = (0..m).map(|i| (i % 13) as f64).collect();
        let data = Dataset::new(2, features, labels).unwrap();
        let mom = build_moments(&data);
        let naive: f64 = data.rows().map(|(x, _)| x[0] * x[1]).sum();
        assert!((mom.g.get(0, 1) - naive).abs() <= 1e-10 * naive.abs().max(1.0));
    }

    fn dataset_strategy() -> impl Strategy<Value = Dataset> {
        (1usize..6, 1usize..60).prop_flat_map(|(d, m)| {
            (
                prop::collection::vec(-3.0f64..3.0, d * m),
                prop::collection::vec(-5.0f64..5.0, m),
            )
                .prop_map(move |(f, y)| Dataset::new(d, f, y).unwrap())
        })
    }

    proptest! {
        #[test]
        fn gram_trace_identity(data in dataset_strategy()) {
            let m = build_moments(&data);
            let sq: f64 = data.features().iter().map(|v| v * v).sum();
            prop_assert!((m.g.trace() - sq).abs() <= 1e-12 * sq.max(1.0));
        }

        #[test]
        fn gram_is_psd(data in dataset_strategy()) {
            let m = build_moments(&data);
            let e = sym_eigen(&m.g).unwrap();
            let tr = m.g.trace();
            for v in e.values {
                prop_assert!(v >= -1e-10 * tr);
            }
        }

        #[test]
        fn constant_labels_scale_gram(data in dataset_strategy(), c in -4.0f64..4.0) {
            let constant = Dataset::new(data.dim(), data.features().to_vec(), vec![c; data.len()]).unwrap();
            let m = build_moments(&constant);
            let d = data.dim();
            for q in 0..d {
                for r in 0..d {
                    let g = m.g.get(q, r);
                    prop_assert!((m.yg.get(q, r) - c * g).abs() <= 1e-12 * (c * g).abs().max(1e-300) + 1e-13);
                }
                let col: f64 = constant.rows().map(|(x, _)| x[q]).sum();
                prop_assert!((m.y_vec[q] - c * col).abs() <= 1e-11 * (1.0 + (c * col).abs()));
            }
        }

        #[test]
        fn weighted_matrix_is_linear(
            data in dataset_strategy(),
            seed in prop::collection::vec(-2.0f64..2.0, 120),
        ) {
            let m = data.len();
            let w1: Vec<f64> = seed[..m].to_vec();
            let w2: Vec<f64> = seed[60..60 + m].to_vec();
            let sum: Vec<f64> = w1.iter().zip(&w2).map(|(a, b)| a + b).collect();
            let a = build_weighted_matrix(&data, &w1).unwrap();
            let b = build_weighted_matrix(&data, &w2).unwrap();
            let c = build_weighted_matrix(&data, &sum).unwrap();
            let scale = a.frobenius_norm() + b.frobenius_norm();
            for ((x, y), z) in a.as_slice().iter().zip(b.as_slice()).zip(c.as_slice()) {
                prop_assert!((x + y - z).abs() <= 1e-12 * scale.max(1.0));
            }
        }
    }
}
