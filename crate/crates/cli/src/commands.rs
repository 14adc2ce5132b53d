use std::io::Write;
use std::path::Path;

use rnml_core::linalg::condition_estimate;
use rnml_core::synth::RNG_ALGORITHM;
use rnml_core::{
    coverage_eigenstates, fit, generate, interval_coverage, two_class_classifier, BasisSpec,
    ClusterModel, SynthSpec,
};

use crate::args::*;
use crate::formats::{self, num17, num7, SweepRow};
use crate::repro::{self, ReproConfig};
use crate::CliError;

/// Executes one command; human-readable reports go to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(a) => gen(&a, out),
        Command::Fit(a) => fit_cmd(&a, out),
        Command::Predict(a) => predict(&a, out),
        Command::Distribution(a) => distribution(&a, out),
        Command::Select(a) => select(&a, out),
        Command::Classify2(a) => classify2(&a, out),
        Command::Reproject(a) => reproject(&a, out),
        Command::Repro(a) => repro_cmd(&a, out),
    }
}

fn stdout_error(e: std::io::Error) -> CliError {
    CliError::io(Path::new("<stdout>"), e)
}

macro_rules! say {
    ($out:expr, $($arg:tt)*) => {
        writeln!($out, $($arg)*).map_err(stdout_error)?
    };
}

fn check_path(path: &Path) -> Result<(), CliError> {
    if path.as_os_str().is_empty() {
        Err(CliError::InvalidConfig("file path must not be empty".into()))
    } else {
        Ok(())
    }
}

fn load_model(path: &Path) -> Result<ClusterModel, CliError> {
    check_path(path)?;
    Ok(ClusterModel::from_json(&formats::read_to_string(path)?)?)
}

fn gen(a: &GenArgs, out: &mut dyn Write) -> Result<(), CliError> {
    check_path(&a.output)?;
    let spec = SynthSpec {
        target: a.target,
        m: a.m,
        noise_r: a.r,
        basis: BasisSpec::new(a.basis, a.dx)?,
        seed: a.seed,
    };
    let data = generate(&spec).map_err(|e| match e {
        rnml_core::Error::InvalidParameter(m) => CliError::InvalidConfig(m),
        other => other.into(),
    })?;
    let meta = format!(
        "target={} m={} r={} basis={} dx={} seed={}",
        a.target, a.m, a.r, a.basis, a.dx, a.seed
    );
    let comments = [meta.clone(), format!("rng={RNG_ALGORITHM}")];
    formats::write_dataset(formats::create(&a.output)?, &data, &comments)
        .map_err(|e| CliError::io(&a.output, e))?;
    say!(out, "{meta}");
    Ok(())
}

fn fit_cmd(a: &FitArgs, out: &mut dyn Write) -> Result<(), CliError> {
    check_path(&a.input)?;
    check_path(&a.output)?;
    let data = formats::read_dataset(&a.input)?;
    let model = fit(&data, a.lambda)?;
    let mut w = formats::create(&a.output)?;
    w.write_all(model.to_json().as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(&a.output, e))?;

    say!(out, "{:>4} {:>14} {:>14} {:>14} {:>14}", "i", "y", "C", "D", "D/C");
    let rel = model.relative_localization();
    for i in 0..model.dim() {
        say!(
            out,
            "{:>4} {:>14} {:>14} {:>14} {:>14}",
            i,
            num7(model.eigenvalues()[i]),
            num7(model.coverage()[i]),
            num7(model.localization()[i]),
            num7(rel[i])
        );
    }
    say!(out, "sum C = {}  (M = {})", num7(model.coverage().iter().sum()), model.m());
    say!(out, "condition(G) = {}", num7(condition_estimate(model.gram())));
    say!(out, "lambda = {}", num7(model.lambda_used()));
    Ok(())
}

fn predict(a: &PredictArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let model = load_model(&a.model)?;
    let (key, rows) = match (&a.queries, a.grid.basis) {
        (Some(path), _) => {
            check_path(path)?;
            let queries = formats::read_queries(path)?;
            let rows = queries
                .iter()
                .enumerate()
                .map(|(id, x)| {
                    let p = model.predict(x)?;
                    Ok(SweepRow {
                        key: id.to_string(),
                        a_ls: p.a_ls,
                        a_rn: p.a_rn,
                        probabilities: p.probabilities,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            ("id", rows)
        }
        (None, Some(family)) => {
            let g = &a.grid;
            if g.count < 2 {
                return Err(CliError::InvalidConfig("grid count must be at least 2".into()));
            }
            if !(g.lo < g.hi) {
                return Err(CliError::InvalidConfig(format!("empty grid [{}, {}]", g.lo, g.hi)));
            }
            let basis = BasisSpec::new(family, model.dim())?;
            let points = repro::grid(g.lo, g.hi, g.count);
            ("t", repro::sweep(&model, &basis, &points)?)
        }
        (None, None) => {
            return Err(CliError::InvalidConfig("give --queries or --basis".into()));
        }
    };
    match &a.output {
        Some(path) => {
            check_path(path)?;
            formats::write_sweep(formats::create(path)?, key, model.dim(), &rows)
                .map_err(|e| CliError::io(path, e))
        }
        None => formats::write_sweep(out, key, model.dim(), &rows).map_err(stdout_error),
    }
}

fn distribution(a: &DistributionArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let model = load_model(&a.model)?;
    let dist = model.distribution();
    match &a.output {
        Some(path) => {
            check_path(path)?;
            formats::write_distribution(formats::create(path)?, &dist, model.m())
                .map_err(|e| CliError::io(path, e))
        }
        None => formats::write_distribution(out, &dist, model.m()).map_err(stdout_error),
    }
}

fn select(a: &SelectArgs, out: &mut dyn Write) -> Result<(), CliError> {
    check_path(&a.input)?;
    check_path(&a.output)?;
    let data = formats::read_dataset(&a.input)?;
    let d = a.d.unwrap_or(data.dim());
    if d == 0 || d > data.dim() {
        return Err(CliError::InvalidConfig(format!(
            "--d must lie in 1..={}, got {d}",
            data.dim()
        )));
    }
    let spectrum = match (a.y_lo, a.y_hi) {
        (Some(lo), Some(hi)) => {
            if !(lo < hi) {
                return Err(CliError::InvalidConfig(format!("empty interval [{lo}, {hi})")));
            }
            interval_coverage(&data, a.lambda, lo, hi)?
        }
        _ => coverage_eigenstates(&data, a.lambda)?,
    };
    let vectors = &spectrum.decomposition.vectors;
    say!(out, "{:>4} {:>6} {:>14}  coefficients", "rank", "state", "coverage");
    for (rank, &i) in spectrum.ranked().iter().enumerate() {
        let coeffs: Vec<String> = vectors.column(i).iter().map(|&v| num7(v)).collect();
        say!(
            out,
            "{:>4} {:>6} {:>14}  {}",
            rank,
            i,
            num7(spectrum.values()[i]),
            coeffs.join(" ")
        );
    }
    say!(
        out,
        "sum = {}  trace = {}  (M = {})",
        num7(spectrum.sum()),
        num7(spectrum.expected_sum),
        data.len()
    );

    let transform = spectrum.top(d)?;
    let ranked = spectrum.ranked();
    let coverages: Vec<String> = ranked[..d].iter().map(|&i| num17(spectrum.values()[i])).collect();
    let comments = [
        format!("top {d} of {} coverage states, one per row", data.dim()),
        format!("coverage={}", coverages.join(" ")),
    ];
    formats::write_matrix(formats::create(&a.output)?, &transform, &comments)
        .map_err(|e| CliError::io(&a.output, e))?;
    Ok(())
}

fn distinct_labels(labels: &[f64]) -> Vec<f64> {
    let mut v = labels.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn classify2(a: &Classify2Args, out: &mut dyn Write) -> Result<(), CliError> {
    check_path(&a.input)?;
    let data = formats::read_dataset(&a.input)?;
    let labels = distinct_labels(data.labels());
    if labels.len() != 2 {
        return Err(CliError::NotTwoClasses(labels.len()));
    }
    let other = |c: f64| -> Result<f64, CliError> {
        if c == labels[0] {
            Ok(labels[1])
        } else if c == labels[1] {
            Ok(labels[0])
        } else {
            Err(CliError::InvalidConfig(format!("label {c} does not occur")))
        }
    };
    let (c1, c2) = match (a.class1, a.class2) {
        (Some(c1), Some(c2)) => {
            if other(c1)? != c2 {
                return Err(CliError::InvalidConfig("the two classes must differ".into()));
            }
            (c1, c2)
        }
        (Some(c1), None) => (c1, other(c1)?),
        (None, Some(c2)) => (other(c2)?, c2),
        (None, None) => (labels[1], labels[0]),
    };
    let model = two_class_classifier(&data, a.lambda, c1, c2)?;
    say!(
        out,
        "class1 = {} ({} rows, weight +1)  class2 = {} ({} rows, weight -1)",
        num7(c1),
        model.count1,
        num7(c2),
        model.count2
    );
    say!(out, "{:>4} {:>14}  classifier", "i", "strength");
    let classifiers = model.classifiers();
    for i in (0..model.strengths().len()).rev() {
        let coeffs: Vec<String> = classifiers.column(i).iter().map(|&v| num7(v)).collect();
        say!(out, "{:>4} {:>14}  {}", i, num7(model.strengths()[i]), coeffs.join(" "));
    }
    say!(
        out,
        "sum = {}  signed trace = {}  (N1 - N2 = {})",
        num7(model.spectrum.sum()),
        num7(model.signed_trace()),
        model.count1 as i64 - model.count2 as i64
    );
    Ok(())
}

fn reproject(a: &ReprojectArgs, out: &mut dyn Write) -> Result<(), CliError> {
    check_path(&a.input)?;
    check_path(&a.transform)?;
    check_path(&a.output)?;
    let data = formats::read_dataset(&a.input)?;
    let t = formats::read_matrix(&a.transform)?;
    let projected = data.transform(&t)?;
    let comments = [format!("reprojected {} through {}", a.input.display(), a.transform.display())];
    formats::write_dataset(formats::create(&a.output)?, &projected, &comments)
        .map_err(|e| CliError::io(&a.output, e))?;
    say!(out, "{} rows, {} -> {} features", data.len(), data.dim(), projected.dim());
    Ok(())
}

fn repro_cmd(a: &ReproArgs, out: &mut dyn Write) -> Result<(), CliError> {
    check_path(&a.output)?;
    if a.m == 0 {
        return Err(CliError::InvalidConfig("sample count must be at least 1".into()));
    }
    let config = ReproConfig {
        m: a.m,
        seed: a.seed,
        lambda: a.lambda,
        count: a.count,
    };
    let manifest = repro::run(&config, &a.output)?;
    say!(
        out,
        "{:>7} {:>4} {:>4} {:>14} {:>14} {:>14}",
        "target", "R", "d_x", "cond(G)", "rmse a_ls", "rmse a_rn"
    );
    for c in &manifest.cells {
        say!(
            out,
            "{:>7} {:>4} {:>4} {:>14} {:>14} {:>14}",
            c.target.to_string(),
            c.noise_r,
            c.d_x,
            num7(c.condition),
            num7(c.rmse_a_ls),
            num7(c.rmse_a_rn)
        );
    }
    Ok(())
}
