//! Sensitivity of the `(y⁽ⁱ⁾, C⁽ⁱ⁾)` pairs to a single label outlier.

use super::cluster::{fit, ClusterModel};
use crate::moments::Dataset;
use crate::synth::UniformSource;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutlierProbe {
    /// Label of the appended observation.
    pub y_outlier: f64,
    /// A matched node counts as moved when it shifts by more than this.
    pub tolerance: f64,
    /// Picks which existing row's features the outlier copies.
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct OutlierReport {
    pub clean: ClusterModel,
    pub perturbed: ClusterModel,
    /// Index of the row whose features the outlier copies.
    pub source_row: usize,
    /// Label range of the clean data.
    pub clean_range: (f64, f64),
    /// Perturbed node indices outside the clean label range.
    pub escaped: Vec<usize>,
    /// `(perturbed index, clean index)`, both ascending.
    pub matching: Vec<(usize, usize)>,
    pub max_node_shift: f64,
    pub max_coverage_shift: f64,
    /// Escaped nodes plus matched nodes that moved by more than the tolerance.
    pub moved: usize,
}

impl OutlierReport {
    pub fn clean_pairs(&self) -> Vec<(f64, f64)> {
        self.clean.distribution().pairs().collect()
    }

    pub fn perturbed_pairs(&self) -> Vec<(f64, f64)> {
        self.perturbed.distribution().pairs().collect()
    }
}

/// Fits `data` and `data` plus one row `(x⁽ʲ⁾, y_outlier)` with `j` drawn from
/// `probe.seed`, then aligns the two spectra.
///
/// Perturbed nodes inside the clean label range are matched to an
/// order-preserving subsequence of clean nodes minimizing the largest shift.
pub fn outlier_report(data: &Dataset, lambda: f64, probe: &OutlierProbe) -> Result<OutlierReport> {
    let clean = fit(data, lambda)?;
    let source_row = UniformSource::new(probe.seed).index(data.len());
    let augmented = data.with_row(data.row(source_row), probe.y_outlier)?;
    let perturbed = fit(&augmented, lambda)?;

    let (lo, hi) = data.label_range();
    let slack = 1e-8 * (hi - lo);
    let nodes = perturbed.eigenvalues();
    let (escaped, inside): (Vec<usize>, Vec<usize>) =
        (0..nodes.len()).partition(|&i| nodes[i] < lo - slack || nodes[i] > hi + slack);

    let inside_nodes: Vec<f64> = inside.iter().map(|&i| nodes[i]).collect();
    let matched = align(&inside_nodes, clean.eigenvalues());
    let matching: Vec<(usize, usize)> = inside.iter().copied().zip(matched).collect();

    let mut max_node_shift: f64 = 0.0;
    let mut max_coverage_shift: f64 = 0.0;
    let mut moved = escaped.len();
    for &(p, c) in &matching {
        let shift = (nodes[p] - clean.eigenvalues()[c]).abs();
        max_node_shift = max_node_shift.max(shift);
        if shift > probe.tolerance {
            moved += 1;
        }
        let c0 = clean.coverage()[c];
        let rel = (perturbed.coverage()[p] - c0).abs() / c0.abs().max(f64::MIN_POSITIVE);
        max_coverage_shift = max_coverage_shift.max(rel);
    }

    Ok(OutlierReport {
        clean,
        perturbed,
        source_row,
        clean_range: (lo, hi),
        escaped,
        matching,
        max_node_shift,
        max_coverage_shift,
        moved,
    })
}

/// Strictly increasing map from sorted `short` into sorted `long`
/// (`short.len() <= long.len()`) minimizing the largest `|short[i] - long[j]|`.
fn align(short: &[f64], long: &[f64]) -> Vec<usize> {
    let (q, d) = (short.len(), long.len());
    assert!(q <= d);
    if q == 0 {
        return Vec::new();
    }
    // cost[i][j]: best max-shift with short[i] mapped to long[j]
    let mut cost = vec![vec![f64::INFINITY; d]; q];
    let mut back = vec![vec![0usize; d]; q];
    for j in 0..=d - q {
        cost[0][j] = (short[0] - long[j]).abs();
    }
    for i in 1..q {
        let mut best = f64::INFINITY;
        let mut arg = 0;
        for j in i..=d - q + i {
            if cost[i - 1][j - 1] < best {
                best = cost[i - 1][j - 1];
                arg = j - 1;
            }
            cost[i][j] = best.max((short[i] - long[j]).abs());
            back[i][j] = arg;
        }
    }
    let mut j = (q - 1..d)
        .min_by(|&a, &b| cost[q - 1][a].total_cmp(&cost[q - 1][b]))
        .expect("non-empty range");
    let mut out = vec![0; q];
    for i in (0..q).rev() {
        out[i] = j;
        if i > 0 {
            j = back[i][j];
        }
    }
    out
}
