//! The experiment grid: 3 targets × R ∈ {0.1, 0.3} × d_x ∈ {10, 20}.

use std::fs;
use std::path::Path;
use std::thread;

use rnml_core::linalg::condition_estimate;
use rnml_core::synth::RNG_ALGORITHM;
use rnml_core::{fit, generate, target_fn, BasisSpec, ClusterModel, Family, SynthSpec, Target};
use serde::Serialize;

use crate::formats::{self, SweepRow};
use crate::CliError;

pub const NOISE_LEVELS: [f64; 2] = [0.1, 0.3];
pub const FEATURE_COUNTS: [usize; 2] = [10, 20];
pub const BASIS: Family = Family::Chebyshev;
pub const SWEEP_LO: f64 = -1.2;
pub const SWEEP_HI: f64 = 1.2;
/// Error statistics use this interior grid.
pub const INTERIOR: (f64, f64, usize) = (-0.9, 0.9, 101);

#[derive(Debug, Clone, Copy)]
pub struct ReproConfig {
    pub m: usize,
    pub seed: u64,
    pub lambda: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Cell {
    pub target: Target,
    pub noise_r: f64,
    pub d_x: usize,
    pub basis: Family,
    pub m: usize,
    pub seed: u64,
    pub lambda: f64,
    pub file: String,
    pub condition: f64,
    pub rmse_a_ls: f64,
    pub rmse_a_rn: f64,
    pub spearman_a_rn_f: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub rng_algorithm: String,
    pub sweep: GridSpec,
    pub interior: GridSpec,
    pub cells: Vec<Cell>,
}

/// `count ≥ 2` equally spaced points with both ends exact.
pub fn grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2);
    let step = (hi - lo) / (count - 1) as f64;
    (0..count)
        .map(|k| if k == count - 1 { hi } else { lo + step * k as f64 })
        .collect()
}

pub fn rmse(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (s / a.len() as f64).sqrt()
}

/// Ranks starting at 1; ties share the mean of their positions.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && v[idx[end]] == v[idx[start]] {
            end += 1;
        }
        let mean = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            out[i] = mean;
        }
        start = end;
    }
    out
}

/// Spearman's rho: Pearson correlation of tie-averaged ranks.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

pub fn cell_file(target: Target, r: f64, d_x: usize) -> String {
    format!("{target}_r{r}_dx{d_x}.csv")
}

/// Dataset and fitted model of one cell.
pub fn cell_model(config: &ReproConfig, target: Target, r: f64, d_x: usize) -> Result<(BasisSpec, ClusterModel), CliError> {
    let basis = BasisSpec::new(BASIS, d_x)?;
    let data = generate(&SynthSpec {
        target,
        m: config.m,
        noise_r: r,
        basis,
        seed: config.seed,
    })?;
    Ok((basis, fit(&data, config.lambda)?))
}

pub fn sweep(model: &ClusterModel, basis: &BasisSpec, points: &[f64]) -> Result<Vec<SweepRow>, CliError> {
    points
        .iter()
        .map(|&t| {
            let p = model.predict(&basis.evaluate(t))?;
            Ok(SweepRow {
                key: formats::num17(t),
                a_ls: p.a_ls,
                a_rn: p.a_rn,
                probabilities: p.probabilities,
            })
        })
        .collect()
}

fn run_cell(config: &ReproConfig, dir: &Path, target: Target, r: f64, d_x: usize) -> Result<Cell, CliError> {
    let (basis, model) = cell_model(config, target, r, d_x)?;
    let file = cell_file(target, r, d_x);
    let rows = sweep(&model, &basis, &grid(SWEEP_LO, SWEEP_HI, config.count))?;
    formats::write_sweep(formats::create(&dir.join(&file))?, "t", d_x, &rows)
        .map_err(|e| CliError::io(&dir.join(&file), e))?;

    let (lo, hi, n) = INTERIOR;
    let interior = sweep(&model, &basis, &grid(lo, hi, n))?;
    let truth: Vec<f64> = grid(lo, hi, n).iter().map(|&t| target_fn(target, t)).collect();
    let a_ls: Vec<f64> = interior.iter().map(|r| r.a_ls).collect();
    let a_rn: Vec<f64> = interior.iter().map(|r| r.a_rn).collect();
    Ok(Cell {
        target,
        noise_r: r,
        d_x,
        basis: BASIS,
        m: config.m,
        seed: config.seed,
        lambda: config.lambda,
        file,
        condition: condition_estimate(model.gram()),
        rmse_a_ls: rmse(&a_ls, &truth),
        rmse_a_rn: rmse(&a_rn, &truth),
        spearman_a_rn_f: spearman(&a_rn, &truth),
    })
}

/// Runs all 12 cells, one thread each, and writes `manifest.json` into `dir`.
/// Every cell draws from its own generator seeded with `config.seed`.
pub fn run(config: &ReproConfig, dir: &Path) -> Result<Manifest, CliError> {
    if config.count < 2 {
        return Err(CliError::InvalidConfig("grid count must be at least 2".into()));
    }
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut specs = Vec::new();
    for target in Target::ALL {
        for r in NOISE_LEVELS {
            for d_x in FEATURE_COUNTS {
                specs.push((target, r, d_x));
            }
        }
    }
    let cells = thread::scope(|scope| {
        let handles: Vec<_> = specs
            .iter()
            .map(|&(target, r, d_x)| scope.spawn(move || run_cell(config, dir, target, r, d_x)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("repro cell panicked"))
            .collect::<Result<Vec<Cell>, CliError>>()
    })?;

    let (lo, hi, n) = INTERIOR;
    let manifest = Manifest {
        rng_algorithm: RNG_ALGORITHM.into(),
        sweep: GridSpec {
            lo: SWEEP_LO,
            hi: SWEEP_HI,
            count: config.count,
        },
        interior: GridSpec { lo, hi, count: n },
        cells,
    };
    let path = dir.join("manifest.json");
    let mut w = formats::create(&path)?;
    rnml_core::model::write_json_17(&mut w, &manifest)
        .and_then(|_| std::io::Write::flush(&mut w))
        .map_err(|e| CliError::io(&path, e))?;
    Ok(manifest)
}
