use std::io::Write;
use std::path::Path;

use classicml::clustering::inertia;

use crate::args::{Cli, Command, EvaluateArgs, FitArgs, PredictArgs, TransformArgs};
use crate::dataset::{format_number, load_csv, write_csv, Dataset};
use crate::error::{CliError, CliResult};
use crate::model_file::{Metadata, ModelFile, Standardizer, FORMAT_VERSION};
use crate::models::{fit, Fitted, Prediction};

pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Fit(a) => {
            let data = load_csv(&a.input, a.label.as_deref())?;
            let mf = build_model(a, &data)?;
            mf.save(&a.out)
        }
        Command::Predict(a) => predict_command(a, stdout),
        Command::Evaluate(a) => evaluate_command(a, stdout),
        Command::Transform(a) => transform_command(a, stdout, stderr),
    }
}

/// Fits the model described by `args` on `data` and packages it as a model file.
pub fn build_model(args: &FitArgs, data: &Dataset) -> CliResult<ModelFile> {
    let standardizer = args.standardize.then(|| Standardizer::fit(&data.x));
    let x = match &standardizer {
        Some(s) => s.apply(&data.x)?,
        None => data.x.clone(),
    };
    let outcome = fit(args.model, args.task, &args.hyper, args.seed, &x, data.labels.as_deref())?;
    let mut hyperparameters = outcome.hyperparameters;
    hyperparameters.insert("standardize".into(), args.standardize.into());
    Ok(ModelFile {
        format_version: FORMAT_VERSION,
        model_kind: args.model.name(),
        hyperparameters,
        metadata: Metadata {
            seed: args.seed,
            n_features: data.x.cols(),
            n_samples: data.x.rows(),
            feature_names: data.feature_names.clone(),
            label_column: data.label_name.clone(),
        },
        standardizer,
        labels: outcome.labels,
        model: outcome.model,
    })
}

/// Loads an input file for an already-fitted model. The fit-time label column
/// is dropped from the features when present.
pub fn load_input(path: &Path, mf: &ModelFile, label: Option<&str>) -> CliResult<Dataset> {
    match label.or(mf.metadata.label_column.as_deref()) {
        Some(l) => match load_csv(path, Some(l)) {
            Err(e) if e.code == crate::error::EXIT_CONFIG && label.is_none() => load_csv(path, None),
            other => other,
        },
        None => load_csv(path, None),
    }
}

fn class_name(mf: &ModelFile, k: usize) -> String {
    mf.labels.as_ref().and_then(|l| l.get(k)).cloned().unwrap_or_else(|| k.to_string())
}

/// Header and rows of the prediction CSV.
pub fn prediction_table(mf: &ModelFile, data: &Dataset, proba: bool) -> CliResult<(Vec<String>, Vec<Vec<String>>)> {
    let x = mf.prepare(&data.x)?;
    let pred = mf.model.predict(&x)?;
    let mut header = vec!["prediction".to_string()];
    let mut rows: Vec<Vec<String>> = match &pred {
        Prediction::Classes(c) => c.iter().map(|&k| vec![class_name(mf, k)]).collect(),
        Prediction::Clusters(c) => c.iter().map(|k| vec![k.to_string()]).collect(),
        Prediction::Values(v) => v.iter().map(|&y| vec![format_number(y)]).collect(),
    };
    if proba {
        let p = mf.model.predict_proba(&x)?;
        let width = p.first().map_or(0, Vec::len);
        for k in 0..width {
            let name = match &pred {
                Prediction::Clusters(_) => k.to_string(),
                _ => class_name(mf, k),
            };
            header.push(format!("proba_{name}"));
        }
        for (row, probs) in rows.iter_mut().zip(&p) {
            row.extend(probs.iter().map(|&v| format_number(v)));
        }
    }
    Ok((header, rows))
}

fn open_out(path: Option<&Path>, stdout: &mut dyn Write, f: impl FnOnce(&mut dyn Write) -> CliResult<()>) -> CliResult<()> {
    match path {
        Some(p) => {
            let mut file = std::fs::File::create(p).map_err(|e| CliError::data(format!("{}: {e}", p.display())))?;
            f(&mut file)
        }
        None => f(stdout),
    }
}

fn predict_command(a: &PredictArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let mf = ModelFile::load(&a.model_file)?;
    let data = load_input(&a.input, &mf, None)?;
    let (header, rows) = prediction_table(&mf, &data, a.proba)?;
    open_out(a.out.as_deref(), stdout, |w| write_csv(w, &header, &rows))
}

/// Metric name/value pairs for a model on a dataset.
pub fn evaluate(mf: &ModelFile, data: &Dataset) -> CliResult<Vec<(String, f64)>> {
    let x = mf.prepare(&data.x)?;
    match &mf.model {
        Fitted::KMeans(m) => return Ok(vec![("inertia".into(), inertia(&x, &m.centroids)?.1)]),
        Fitted::Gmm(m) => {
            let ll = m.log_likelihood_of(&x)?;
            return Ok(vec![("log_likelihood".into(), ll), ("mean_log_likelihood".into(), ll / x.rows() as f64)]);
        }
        _ => {}
    }
    match mf.model.predict(&x)? {
        Prediction::Classes(c) => {
            let truth = data.require_labels()?;
            let hits = c.iter().zip(truth).filter(|(&k, t)| class_name(mf, k) == **t).count();
            Ok(vec![("accuracy".into(), hits as f64 / c.len() as f64)])
        }
        Prediction::Values(v) => {
            let y = data.targets()?;
            let n = y.len() as f64;
            let mse = v.iter().zip(&y).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / n;
            let mae = v.iter().zip(&y).map(|(p, t)| (p - t).abs()).sum::<f64>() / n;
            Ok(vec![("mse".into(), mse), ("mae".into(), mae)])
        }
        Prediction::Clusters(_) => unreachable!("clustering models handled above"),
    }
}

fn evaluate_command(a: &EvaluateArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let mf = ModelFile::load(&a.model_file)?;
    if matches!(mf.model, Fitted::Pca(_) | Fitted::LdaProjection(_) | Fitted::KernelPca(_)) {
        return Err(CliError::config(format!("{} models have no evaluation metric", mf.model.kind_name())));
    }
    let data = load_input(&a.input, &mf, a.label.as_deref())?;
    for (name, value) in evaluate(&mf, &data)? {
        writeln!(stdout, "{name}={value:.6}").map_err(|e| CliError::data(e.to_string()))?;
    }
    Ok(())
}

pub fn transform_table(mf: &ModelFile, data: &Dataset) -> CliResult<(Vec<String>, Vec<Vec<String>>)> {
    let x = mf.prepare(&data.x)?;
    let t = mf.model.transform(&x)?;
    let header = (1..=t.cols()).map(|k| format!("comp_{k}")).collect();
    let rows = t.iter_rows().map(|r| r.iter().map(|&v| format_number(v)).collect()).collect();
    Ok((header, rows))
}

fn transform_command(a: &TransformArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let mf = ModelFile::load(&a.model_file)?;
    let data = load_input(&a.input, &mf, None)?;
    let (header, rows) = transform_table(&mf, &data)?;
    let log = |stderr: &mut dyn Write, line: String| {
        let _ = writeln!(stderr, "{line}");
    };
    match &mf.model {
        Fitted::Pca(m) => {
            let ratios: Vec<String> = m
                .explained_variance_ratio
                .iter()
                .enumerate()
                .map(|(k, r)| format!("comp_{}={r:.6}", k + 1))
                .collect();
            log(stderr, format!("explained_variance_ratio {}", ratios.join(" ")));
        }
        Fitted::KernelPca(m) => {
            if let Some(w) = m.warning() {
                log(stderr, format!("warning: {w}"));
            }
        }
        _ => {}
    }
    open_out(a.out.as_deref(), stdout, |w| write_csv(w, &header, &rows))
}
