//! CSV and metadata writers for both experiments.
//!
//! All CSVs are comma-separated with LF line endings. Floats use the
//! shortest round-trip representation.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use super::random_fn::RandomFnOutput;
use super::rbf_demo::{RbfDemoOutput, SelectionMethod};
use crate::error::Result;
use crate::predictive::PredictiveDistribution;

pub const CURVE_HEADER: [&str; 3] = ["x", "f", "std"];
pub const SELECTION_HEADER: [&str; 4] = ["method", "index", "center", "score"];
pub const RESULTS_HEADER: [&str; 8] = [
    "L",
    "rho",
    "rel_kl",
    "rel_nlpd",
    "rel_rmse",
    "rel_time",
    "abs_time_full_s",
    "abs_time_reduced_s",
];
pub const DETAILS_HEADER: [&str; 11] = [
    "L",
    "rho",
    "n_selected",
    "residual_bound",
    "kl_full",
    "kl_reduced",
    "nlpd_full",
    "nlpd_reduced",
    "rmse_full",
    "rmse_reduced",
    "rel_time",
];
pub const SCORES_HEADER: [&str; 4] = ["L", "index", "frequency_index", "score"];

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_curve(path: &Path, grid: &[f64], pred: &PredictiveDistribution) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(CURVE_HEADER)?;
    for ((x, f), s) in grid.iter().zip(&pred.means).zip(pred.std_devs()) {
        w.write_record([x.to_string(), f.to_string(), s.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn write_metadata(dir: &Path, config: &ExperimentConfig) -> Result<PathBuf> {
    let path = dir.join("metadata.txt");
    let mut f = fs::File::create(&path)?;
    writeln!(
        f,
        "# bfselect {} {}",
        config.name(),
        env!("CARGO_PKG_VERSION")
    )?;
    writeln!(f, "# seed = {}", config.seed())?;
    f.write_all(config.to_toml().as_bytes())?;
    Ok(path)
}

/// Writes `base.csv`, `standard.csv`, `integral.csv`, `selection.csv` and
/// `metadata.txt` into `dir`, creating it if needed. Returns the paths.
pub fn write_rbf_demo(
    dir: &Path,
    config: &ExperimentConfig,
    out: &RbfDemoOutput,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (name, pred) in [
        ("base.csv", &out.full),
        ("standard.csv", &out.standard),
        ("integral.csv", &out.integral),
    ] {
        let path = dir.join(name);
        write_curve(&path, &out.grid, pred)?;
        paths.push(path);
    }

    let path = dir.join("selection.csv");
    let mut w = writer(&path)?;
    w.write_record(SELECTION_HEADER)?;
    for method in [SelectionMethod::Integral, SelectionMethod::Simplified] {
        let sel = out.selection(method);
        for &k in &sel.kept {
            w.write_record([
                method.label().to_string(),
                k.to_string(),
                out.basis.centers()[k][0].to_string(),
                sel.scores[k].to_string(),
            ])?;
        }
    }
    w.flush()?;
    paths.push(path);
    paths.push(write_metadata(dir, config)?);
    Ok(paths)
}

/// Writes `results.csv`, `details.csv`, `scores.csv` and `metadata.txt`
/// into `dir`, creating it if needed. Returns the paths.
pub fn write_random_fn(
    dir: &Path,
    config: &ExperimentConfig,
    out: &RandomFnOutput,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let results = dir.join("results.csv");
    let mut w = writer(&results)?;
    w.write_record(RESULTS_HEADER)?;
    for r in &out.rows {
        w.write_record([
            r.num_bfs.to_string(),
            r.rho.to_string(),
            opt(r.rel_kl),
            opt(r.rel_nlpd),
            opt(r.rel_rmse),
            opt(r.rel_time),
            r.abs_time_full_s.to_string(),
            r.abs_time_reduced_s.to_string(),
        ])?;
    }
    w.flush()?;

    let details = dir.join("details.csv");
    let mut w = writer(&details)?;
    w.write_record(DETAILS_HEADER)?;
    for r in &out.rows {
        w.write_record([
            r.num_bfs.to_string(),
            r.rho.to_string(),
            r.n_selected.to_string(),
            r.residual_bound.to_string(),
            r.kl_full.to_string(),
            r.kl_reduced.to_string(),
            r.nlpd_full.to_string(),
            r.nlpd_reduced.to_string(),
            r.rmse_full.to_string(),
            r.rmse_reduced.to_string(),
            opt(r.rel_time),
        ])?;
    }
    w.flush()?;

    let scores = dir.join("scores.csv");
    let mut w = writer(&scores)?;
    w.write_record(SCORES_HEADER)?;
    for log in &out.scores {
        let indices = log.model.basis.indices();
        for (k, s) in log.scores.iter().enumerate() {
            let freq = indices[k]
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(" ");
            w.write_record([
                log.model.len().to_string(),
                k.to_string(),
                freq,
                s.to_string(),
            ])?;
        }
    }
    w.flush()?;

    let meta = write_metadata(dir, config)?;
    Ok(vec![results, details, scores, meta])
}
