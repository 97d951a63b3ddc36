use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::PathBuf;

use serde::Serialize;

use super::format::canonical_json;
use super::{file_stem, load_dataset, load_joined_scores, write, ReportError, RunConfig};
use crate::measures::fit_gaussian;
use crate::stats::{kde, shapiro_wilk, DensityCurve, NormalityResult};

/// Normality test, density estimate and fitted normal for one side of one model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideCurve {
    pub normality: NormalityResult,
    pub mu: f64,
    pub sigma: f64,
    pub bandwidth: f64,
    #[serde(skip)]
    pub curve: DensityCurve,
    /// Fitted normal density on the KDE grid.
    #[serde(skip)]
    pub gaussian: Vec<f64>,
}

impl SideCurve {
    /// `grid,density,gaussian` CSV with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("grid,density,gaussian\n");
        for ((x, d), g) in self.curve.grid.iter().zip(&self.curve.density).zip(&self.gaussian) {
            writeln!(out, "{x:.6e},{d:.6e},{g:.6e}").unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalityReport {
    pub score_measure: String,
    /// model -> side ("stereo" / "anti") -> analysis
    pub models: BTreeMap<String, BTreeMap<String, SideCurve>>,
}

fn side_curve(model: &str, side: &str, sample: &[f64], grid_size: usize) -> Result<SideCurve, ReportError> {
    let context = || format!("model {model}, {side} scores");
    let stats_err = |source| ReportError::Stats { context: context(), source };
    let normality = shapiro_wilk(sample).map_err(stats_err)?;
    let curve = kde(sample, grid_size).map_err(stats_err)?;
    let fit = fit_gaussian(sample).map_err(|source| ReportError::Measure { context: context(), source })?;
    let gaussian = curve.grid.iter().map(|&x| fit.pdf(x)).collect();
    Ok(SideCurve {
        normality,
        mu: fit.mu(),
        sigma: fit.sigma(),
        bandwidth: curve.bandwidth,
        curve,
        gaussian,
    })
}

/// Shapiro-Wilk tests and density curves for both sides of every model's
/// divergence-source scores. Writes `kde_<model>_<side>.csv` per curve and
/// `normality.json`.
pub fn run_normality(config: &RunConfig) -> Result<(NormalityReport, Vec<PathBuf>), ReportError> {
    config.validate()?;
    let dataset = load_dataset(&config.dataset_path, config.dataset_kind)?;
    let scores = load_joined_scores(&config.score_paths, &dataset)?;
    let mut models = BTreeMap::new();
    let mut written = Vec::new();
    for (model, sets) in &scores {
        let Some(set) = sets.get(&config.divergence_source) else {
            continue;
        };
        let mut sides = BTreeMap::new();
        for (side, sample) in [("stereo", set.stereo_scores()), ("anti", set.anti_scores())] {
            let curve = side_curve(model, side, &sample, config.kde_grid_size)?;
            let name = format!("kde_{}_{side}.csv", file_stem(model));
            written.push(write(&config.output_dir, &name, &curve.to_csv())?);
            sides.insert(side.to_string(), curve);
        }
        models.insert(model.clone(), sides);
    }
    if models.is_empty() {
        return Err(ReportError::Config(format!(
            "no {} score file among the inputs",
            config.divergence_source
        )));
    }
    let report = NormalityReport {
        score_measure: config.divergence_source.to_string(),
        models,
    };
    written.push(write(&config.output_dir, "normality.json", &canonical_json(&report))?);
    Ok((report, written))
}
