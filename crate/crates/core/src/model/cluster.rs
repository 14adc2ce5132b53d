use crate::linalg::{self, dot, CholeskyFactor, EigenDecomposition, Matrix, SymMatrix};
use crate::moments::{build_moments, build_n_weights_factored, pairwise_sum, regularize, Dataset};
use crate::{Error, Result};

/// Fitted spectrum `y⁽ⁱ⁾`, cluster centers `ψ⁽ⁱ⁾` and the per-cluster coverage
/// `C⁽ⁱ⁾` and localization `D⁽ⁱ⁾` of a training sample.
///
/// Cluster centers are `G`-orthonormal (`ψᵀ G ψ = I`, with `G` regularized when
/// `lambda_used > 0`). Within a repeated eigenvalue the choice of basis is
/// whatever the eigensolver returned.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub(crate) eigenvalues: Vec<f64>,
    pub(crate) eigenvectors: Matrix,
    pub(crate) g: SymMatrix,
    /// Cholesky factor of `g`; every `G⁻¹` product goes through it.
    pub(crate) factor: CholeskyFactor,
    pub(crate) g_inv: SymMatrix,
    pub(crate) yg: SymMatrix,
    pub(crate) y_vec: Vec<f64>,
    pub(crate) coverage: Vec<f64>,
    pub(crate) localization: Vec<f64>,
    pub(crate) m: usize,
    pub(crate) lambda_used: f64,
    /// `G⁻¹ Y`, the least-squares coefficients.
    pub(crate) ls_coefficients: Vec<f64>,
}

/// Outcome probabilities and both point estimates for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// `P⁽ⁱ⁾(x)`, ordered like the model's eigenvalues.
    pub probabilities: Vec<f64>,
    /// Least-squares estimate `xᵀ G⁻¹ Y`.
    pub a_ls: f64,
    /// Radon–Nikodym estimate `xᵀG⁻¹·yG·G⁻¹x / xᵀG⁻¹x`.
    pub a_rn: f64,
}

/// The `(y⁽ⁱ⁾, C⁽ⁱ⁾)` pairs, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionEstimate {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl DistributionEstimate {
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "lambda must be finite and non-negative, got {lambda}"
        )))
    }
}

/// Solves `yG ψ = y G ψ` on `data` and evaluates coverage and localization of
/// every cluster.
pub fn fit(data: &Dataset, lambda: f64) -> Result<ClusterModel> {
    check_lambda(lambda)?;
    let moments = build_moments(data);
    let g = regularize(&moments.g, lambda);
    let factor = linalg::cholesky(&g)?;
    let eig = linalg::gen_sym_eigen_factored(&moments.yg, &factor)?;
    let g_inv = linalg::invert_factored(&factor)?;
    let n = build_n_weights_factored(data, &factor)?;

    let d = data.dim();
    // [C | D]
    let sums = pairwise_sum(data.len(), 2 * d, |l, acc| {
        let x = data.row(l);
        for i in 0..d {
            let s = column_dot(&eig.vectors, i, x);
            let omega = s * s * n[l];
            acc[i] += omega;
            acc[d + i] += omega * (1.0 - omega);
        }
    });

    ClusterModel::assemble(
        eig,
        g,
        factor,
        g_inv,
        moments.yg,
        moments.y_vec,
        sums[..d].to_vec(),
        sums[d..].to_vec(),
        data.len(),
        lambda,
    )
}

#[inline]
fn column_dot(m: &Matrix, col: usize, x: &[f64]) -> f64 {
    x.iter().enumerate().map(|(r, v)| m.get(r, col) * v).sum()
}

impl ClusterModel {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        eig: EigenDecomposition,
        g: SymMatrix,
        factor: CholeskyFactor,
        g_inv: SymMatrix,
        yg: SymMatrix,
        y_vec: Vec<f64>,
        coverage: Vec<f64>,
        localization: Vec<f64>,
        m: usize,
        lambda_used: f64,
    ) -> Result<Self> {
        let ls_coefficients = linalg::solve_cholesky(&factor, &y_vec)?;
        Ok(ClusterModel {
            eigenvalues: eig.values,
            eigenvectors: eig.vectors,
            g,
            factor,
            g_inv,
            yg,
            y_vec,
            coverage,
            localization,
            m,
            lambda_used,
            ls_coefficients,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Number of training observations.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn lambda_used(&self) -> f64 {
        self.lambda_used
    }

    /// Outcome spectrum `y⁽ⁱ⁾`, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Column `i` is the cluster center `ψ⁽ⁱ⁾`.
    pub fn eigenvectors(&self) -> &Matrix {
        &self.eigenvectors
    }

    pub fn cluster_center(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.column(i)
    }

    /// Gram matrix (after regularization).
    pub fn gram(&self) -> &SymMatrix {
        &self.g
    }

    pub fn gram_inverse(&self) -> &SymMatrix {
        &self.g_inv
    }

    pub fn yg(&self) -> &SymMatrix {
        &self.yg
    }

    pub fn y_vec(&self) -> &[f64] {
        &self.y_vec
    }

    pub fn coverage(&self) -> &[f64] {
        &self.coverage
    }

    pub fn localization(&self) -> &[f64] {
        &self.localization
    }

    /// `D⁽ⁱ⁾ / C⁽ⁱ⁾`; zero where the coverage vanishes.
    pub fn relative_localization(&self) -> Vec<f64> {
        self.localization
            .iter()
            .zip(&self.coverage)
            .map(|(d, c)| if *c > 0.0 { d / c } else { 0.0 })
            .collect()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            })
        }
    }

    /// `xᵀ G⁻¹ x`, rejecting vectors the metric annihilates.
    fn metric_length(&self, x: &[f64], row: usize) -> Result<f64> {
        self.check_dim(x)?;
        let q = self.factor.inverse_quad_form(x)?;
        if q > 1e-14 * self.g_inv.trace() {
            Ok(q)
        } else {
            Err(Error::SingularProjection { row })
        }
    }

    /// `w⁽ⁱ⁾(x) = (x·ψ⁽ⁱ⁾)²`
    pub fn cluster_weights(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(self.eigenvectors.tr_mul_vec(x)?.into_iter().map(|s| s * s).collect())
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        let norm = self.metric_length(x, 0)?;
        let w = self.cluster_weights(x)?;
        let total: f64 = w.iter().sum();
        let probabilities = w.iter().map(|v| v / total).collect();
        let a_ls = dot(x, &self.ls_coefficients);
        let v = linalg::solve_cholesky(&self.factor, x)?;
        let a_rn = self.yg.quad_form(&v)? / norm;
        Ok(Prediction {
            probabilities,
            a_ls,
            a_rn,
        })
    }

    /// `ω⁽ˡ⁾_[i;j] = (ψ⁽ⁱ⁾·x)(ψ⁽ʲ⁾·x) / (xᵀG⁻¹x)` for one feature vector, `d×d`.
    pub fn omega_full(&self, x: &[f64]) -> Result<Matrix> {
        let norm = self.metric_length(x, 0)?;
        let s = self.eigenvectors.tr_mul_vec(x)?;
        Ok(Matrix::from_fn(s.len(), s.len(), |i, j| s[i] * s[j] / norm))
    }

    /// Diagonal `ω⁽ˡ⁾_[i;i]` for every row of `data`, as an `M×d` matrix.
    pub fn omega_matrix(&self, data: &Dataset) -> Result<Matrix> {
        if data.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: data.dim(),
            });
        }
        let n = build_n_weights_factored(data, &self.factor)?;
        let d = self.dim();
        let mut out = Matrix::zeros(data.len(), d);
        for (l, (x, _)) in data.rows().enumerate() {
            for i in 0..d {
                let s = column_dot(&self.eigenvectors, i, x);
                out.set(l, i, s * s * n[l]);
            }
        }
        Ok(out)
    }

    pub fn distribution(&self) -> DistributionEstimate {
        let mut pairs: Vec<(f64, f64)> = self
            .eigenvalues
            .iter()
            .copied()
            .zip(self.coverage.iter().copied())
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        DistributionEstimate {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    }

    /// Reproducing kernel `xaᵀ G⁻¹ xb`, i.e. the density matrix `ρ(xa, xb)`.
    pub fn project(&self, xa: &[f64], xb: &[f64]) -> Result<f64> {
        self.check_dim(xa)?;
        self.factor.inverse_bilinear(xa, xb)
    }

    /// Expansion coefficients `⟨ψ⁽ᶜ⁾|ψ⁽ⁱ⁾⟩` of the normalized state localized at `xc`.
    pub fn state_from_x(&self, xc: &[f64]) -> Result<Vec<f64>> {
        let norm = self.metric_length(xc, 0)?.sqrt();
        Ok(self
            .eigenvectors
            .tr_mul_vec(xc)?
            .into_iter()
            .map(|s| s / norm)
            .collect())
    }

    /// Mixed-state average `tr(yg · G⁻¹) / d_x`.
    pub fn mixed_state_average(&self, yg: &SymMatrix) -> Result<f64> {
        if yg.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: yg.dim(),
            });
        }
        Ok(trace_product(yg, &self.g_inv) / self.dim() as f64)
    }
}

/// `tr(a · b)` for symmetric `a`, `b`.
pub(crate) fn trace_product(a: &SymMatrix, b: &SymMatrix) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn three_point() -> Dataset {
        Dataset::from_rows(vec![
            (vec![1.0, -1.0], 0.0),
            (vec![1.0, 0.0], 1.0),
            (vec![1.0, 1.0], 0.0),
        ])
        .unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12
    }

    #[test]
    fn three_point_fit() {
        let m = fit(&three_point(), 0.0).unwrap();
        assert!(close(m.eigenvalues()[0], 0.0));
        assert!(close(m.eigenvalues()[1], 1.0 / 3.0));
        let psi = m.eigenvectors();
        assert!(close(psi.get(0, 0), 0.0) && close(psi.get(1, 0), 0.5_f64.sqrt()));
        assert!(close(psi.get(0, 1), (1.0_f64 / 3.0).sqrt()) && close(psi.get(1, 1), 0.0));
        assert!(close(m.coverage()[0], 6.0 / 5.0));
        assert!(close(m.coverage()[1], 9.0 / 5.0));
        // Σ ω(1-ω) = 2·(2/5)(3/5) for either node
        assert!(close(m.localization()[0], 12.0 / 25.0));
        assert!(close(m.localization()[1], 12.0 / 25.0));
    }

    #[test]
    fn three_point_predictions() {
        let m = fit(&three_point(), 0.0).unwrap();
        let p = m.predict(&[1.0, 0.0]).unwrap();
        assert!(close(p.probabilities[0], 0.0) && close(p.probabilities[1], 1.0));
        assert!(close(p.a_ls, 1.0 / 3.0));
        assert!(close(p.a_rn, 1.0 / 3.0));

        let p = m.predict(&[1.0, 1.0]).unwrap();
        assert!(close(p.a_ls, 1.0 / 3.0));
        assert!(close(p.a_rn, 2.0 / 15.0));
    }

    #[test]
    fn three_point_omega() {
        let data = three_point();
        let m = fit(&data, 0.0).unwrap();
        let om = m.omega_matrix(&data).unwrap();
        let expected = [[0.6, 0.4], [0.0, 1.0], [0.6, 0.4]];
        for (l, row) in expected.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                assert!(close(om.get(l, i), *v));
            }
        }
    }

    #[test]
    fn three_point_distribution_and_projections() {
        let m = fit(&three_point(), 0.0).unwrap();
        let dist = m.distribution();
        assert!(close(dist.nodes[0], 0.0) && close(dist.nodes[1], 1.0 / 3.0));
        assert!(close(dist.weights[0], 1.2) && close(dist.weights[1], 1.8));
        assert!(close(m.project(&[1.0, 1.0], &[1.0, -1.0]).unwrap(), -1.0 / 6.0));
        assert!(close(m.project(&[1.0, -1.0], &[1.0, 1.0]).unwrap(), -1.0 / 6.0));
        // project(x, x) = 1/n for a training row
        assert!(close(m.project(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0 / 3.0));

        let c = m.state_from_x(&[1.0, 0.0]).unwrap();
        assert!(close(c[0], 0.0) && close(c[1], 1.0));

        assert!(close(m.mixed_state_average(m.yg()).unwrap(), 1.0 / 6.0));
        assert!(close(m.mixed_state_average(m.gram()).unwrap(), 1.0));
        assert_eq!(m.mixed_state_average(&SymMatrix::zeros(2)).unwrap(), 0.0);
        assert!(m.mixed_state_average(&SymMatrix::zeros(3)).is_err());
    }

    #[test]
    fn constant_labels() {
        let rows = (0..7)
            .map(|i| {
                let t = i as f64 / 3.0 - 1.0;
                (vec![1.0, t, t * t], 2.5)
            })
            .collect();
        let data = Dataset::from_rows(rows).unwrap();
        let m = fit(&data, 0.0).unwrap();
        for v in m.eigenvalues() {
            assert!((v - 2.5).abs() < 1e-12);
        }
        let p = m.predict(&[1.0, 0.3, -0.7]).unwrap();
        assert!((p.a_rn - 2.5).abs() < 1e-12);
        assert!((p.a_ls - 2.5).abs() < 1e-12);
        let dist = m.distribution();
        assert!((dist.total_weight() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_recovery_two_points() {
        let k = 4;
        let mut rows = Vec::new();
        for _ in 0..k {
            rows.push((vec![1.0, -1.0], -1.0));
            rows.push((vec![1.0, 1.0], 1.0));
        }
        let m = fit(&Dataset::from_rows(rows).unwrap(), 0.0).unwrap();
        assert!(close(m.eigenvalues()[0], -1.0) && close(m.eigenvalues()[1], 1.0));
        assert!(close(m.coverage()[0], k as f64) && close(m.coverage()[1], k as f64));
    }

    #[test]
    fn single_feature() {
        let data = Dataset::from_rows(vec![(vec![1.0], 2.0), (vec![2.0], 5.0)]).unwrap();
        let m = fit(&data, 0.0).unwrap();
        // weighted mean Σ y x² / Σ x²
        assert!(close(m.eigenvalues()[0], 22.0 / 5.0));
        let om = m.omega_matrix(&data).unwrap();
        assert!(close(om.get(0, 0), 1.0) && close(om.get(1, 0), 1.0));
    }

    #[test]
    fn one_hot_pure_states() {
        let rows = vec![(vec![1.0, 0.0, 0.0], 3.0), (vec![0.0, 1.0, 0.0], 1.0), (vec![0.0, 0.0, 1.0], 2.0)];
        let data = Dataset::from_rows(rows).unwrap();
        let m = fit(&data, 0.0).unwrap();
        let om = m.omega_matrix(&data).unwrap();
        // eigenvalues ascending (1, 2, 3) map to rows 1, 2, 0
        let expected = [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        for (l, row) in expected.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                assert!(close(om.get(l, i), *v));
            }
        }
        let c = m.state_from_x(&[0.0, 1.0, 0.0]).unwrap();
        assert!(close(c[0], 1.0) && close(c[1], 0.0) && close(c[2], 0.0));
    }

    #[test]
    fn rejects_bad_queries() {
        let m = fit(&three_point(), 0.0).unwrap();
        assert!(matches!(m.predict(&[0.0, 0.0]), Err(Error::SingularProjection { .. })));
        assert!(matches!(m.predict(&[1.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(m.state_from_x(&[0.0, 0.0]), Err(Error::SingularProjection { .. })));
    }

    #[test]
    fn degenerate_gram_needs_lambda() {
        let rows = (0..5).map(|i| (vec![i as f64, i as f64, 1.0], i as f64)).collect();
        let data = Dataset::from_rows(rows).unwrap();
        assert!(matches!(fit(&data, 0.0), Err(Error::NotPositiveDefinite { .. })));
        let m = fit(&data, 1e-8).unwrap();
        assert_eq!(m.lambda_used(), 1e-8);
        assert!(fit(&data, -1.0).is_err());
        assert!(fit(&data, f64::NAN).is_err());
    }

    fn dataset_strategy() -> impl Strategy<Value = Dataset> {
        (1usize..6).prop_flat_map(|d| {
            let m = 4 * d + 5;
            (
                prop::collection::vec(-1.0f64..1.0, d * m),
                prop::collection::vec(-3.0f64..3.0, m),
            )
                .prop_map(move |(f, y)| Dataset::new(d, f, y).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn model_invariants(data in dataset_strategy(), q in prop::collection::vec(-1.5f64..1.5, 6)) {
            let m = match fit(&data, 0.0) {
                Ok(m) => m,
                Err(Error::NotPositiveDefinite { .. }) => return Ok(()),
                Err(e) => panic!("{e}"),
            };
            let d = data.dim();
            let (lo, hi) = data.label_range();
            let span = (hi - lo).max(1e-300);
            // G-orthonormality
            let gram = m.gram().congruence(m.eigenvectors()).unwrap();
            for i in 0..d {
                for j in 0..d {
                    prop_assert!((gram.get(i, j) - (i == j) as u8 as f64).abs() < 1e-8);
                }
            }
            for (k, y) in m.eigenvalues().iter().enumerate() {
                prop_assert!(*y >= lo - 1e-8 * span && *y <= hi + 1e-8 * span);
                prop_assert!(m.localization()[k] >= -1e-12);
                prop_assert!(m.localization()[k] <= m.coverage()[k] + 1e-12);
            }
            let total: f64 = m.coverage().iter().sum();
            prop_assert!((total - data.len() as f64).abs() < 1e-8 * data.len() as f64);

            // localization identity: Σ ω(1-ω) == Σ_{j≠k} ω_[k;j]²
            let mut d_alt = vec![0.0; d];
            for (x, _) in data.rows() {
                let om = m.omega_full(x).unwrap();
                for k in 0..d {
                    d_alt[k] += (0..d).filter(|&j| j != k).map(|j| om.get(k, j).powi(2)).sum::<f64>();
                }
            }
            for k in 0..d {
                let scale = m.localization()[k].abs().max(1e-6);
                prop_assert!((d_alt[k] - m.localization()[k]).abs() <= 1e-8 * scale.max(1.0));
            }

            let x = &q[..d];
            if let Ok(p) = m.predict(x) {
                let s: f64 = p.probabilities.iter().sum();
                prop_assert!((s - 1.0).abs() < 1e-10);
                let ymin = m.eigenvalues()[0];
                let ymax = m.eigenvalues()[d - 1];
                prop_assert!(p.a_rn >= ymin - 1e-10 * span && p.a_rn <= ymax + 1e-10 * span);
                // Σ w = xᵀG⁻¹x
                let w: f64 = m.cluster_weights(x).unwrap().iter().sum();
                let norm = m.project(x, x).unwrap();
                prop_assert!((w - norm).abs() <= 1e-10 * norm);
                // A_RN is the probability-weighted spectrum mean
                let mean: f64 = p.probabilities.iter().zip(m.eigenvalues()).map(|(p, y)| p * y).sum();
                prop_assert!((mean - p.a_rn).abs() <= 1e-9 * (1.0 + p.a_rn.abs()));
                // state_from_x squares reproduce the probabilities
                let c = m.state_from_x(x).unwrap();
                for (ci, pi) in c.iter().zip(&p.probabilities) {
                    prop_assert!((ci * ci - pi).abs() < 1e-10);
                }
            }
        }
    }
}
