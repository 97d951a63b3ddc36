use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::PathBuf;

use serde::Serialize;

use super::format::{canonical_json, csv_field, num, round_sig};
use super::{load_dataset, load_joined_scores, write, ModelScores, ReportError, ReportFormat, RunConfig};
use crate::dataset::BiasDataset;
use crate::measures::{indicator_bias_score, weighted_divergence_scores, MeasureError};
use crate::robustness::{group_deltas, GroupDeltas, RobustnessError};
use crate::scores::{split_by_type, ScoreMeasure, ScoreSet};
use crate::stats::{mutual_information, pearson, shapiro_wilk, NormalityResult, StatsError, DEFAULT_NEIGHBORS};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeRow {
    pub bias_type: String,
    /// Pairs of this type scored under the divergence source.
    pub count: usize,
    pub kls: Option<f64>,
    pub jss: Option<f64>,
    pub mu_stereo: Option<f64>,
    pub sigma_stereo: Option<f64>,
    pub mu_anti: Option<f64>,
    pub sigma_anti: Option<f64>,
    pub indicator: BTreeMap<ScoreMeasure, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SideNormality {
    pub stereo: NormalityResult,
    pub anti: NormalityResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelReport {
    pub indicator: BTreeMap<ScoreMeasure, f64>,
    pub scored_pairs: BTreeMap<ScoreMeasure, usize>,
    pub dropped_pairs: BTreeMap<ScoreMeasure, usize>,
    /// Count-weighted KLS over bias types, when divergence-source scores exist.
    pub kls: Option<f64>,
    pub jss: Option<f64>,
    pub per_type: Vec<TypeRow>,
    pub group_deltas: Option<GroupDeltas>,
    /// Present when the sample size lies in the supported range.
    pub normality: Option<SideNormality>,
}

/// Square matrix over named columns; `None` where the statistic is undefined.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureMatrix {
    pub labels: Vec<String>,
    pub observations: usize,
    pub values: Vec<Vec<Option<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub source: String,
    pub pairs: usize,
    pub type_counts: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureReport {
    pub dataset: DatasetSummary,
    pub divergence_source: ScoreMeasure,
    pub models: BTreeMap<String, ModelReport>,
    /// Pearson correlation between measure columns over (model, bias type) cells.
    pub correlation: MeasureMatrix,
    /// KSG mutual information (nats) over the same cells.
    pub mutual_information: MeasureMatrix,
    /// Per model: mutual information between the per-pair score differences
    /// of each score measure.
    pub pair_difference_mi: BTreeMap<String, MeasureMatrix>,
}

fn measure_err(context: String) -> impl FnOnce(MeasureError) -> ReportError {
    move |source| ReportError::Measure { context, source }
}

fn robustness_err(context: String) -> impl FnOnce(RobustnessError) -> ReportError {
    move |source| match source {
        RobustnessError::Measure { source, .. } => ReportError::Measure { context, source },
        other => ReportError::Robustness(other),
    }
}

fn normality(set: &ScoreSet) -> Result<Option<SideNormality>, ReportError> {
    if !(3..=5000).contains(&set.len()) {
        return Ok(None);
    }
    let side = |name: &str, sample: Vec<f64>| {
        shapiro_wilk(&sample).map_err(|source| ReportError::Stats {
            context: format!("model {} {name} scores", set.model_id()),
            source,
        })
    };
    Ok(Some(SideNormality {
        stereo: side("stereotype", set.stereo_scores())?,
        anti: side("anti-stereotype", set.anti_scores())?,
    }))
}

fn model_report(
    model: &str,
    sets: &BTreeMap<ScoreMeasure, ScoreSet>,
    source: ScoreMeasure,
) -> Result<ModelReport, ReportError> {
    let mut indicator = BTreeMap::new();
    let mut typed_indicator: BTreeMap<String, BTreeMap<ScoreMeasure, f64>> = BTreeMap::new();
    for (&measure, set) in sets {
        let ctx = || format!("model {model}, {measure} scores");
        indicator.insert(measure, indicator_bias_score(set).map_err(measure_err(ctx()))?.value);
        for (t, subset) in split_by_type(set) {
            let v = indicator_bias_score(&subset).map_err(measure_err(format!("{}, bias type {t}", ctx())))?;
            typed_indicator.entry(t).or_default().insert(measure, v.value);
        }
    }

    let mut report = ModelReport {
        indicator,
        scored_pairs: sets.iter().map(|(m, s)| (*m, s.len())).collect(),
        dropped_pairs: sets.iter().map(|(m, s)| (*m, s.dropped())).collect(),
        kls: None,
        jss: None,
        per_type: Vec::new(),
        group_deltas: None,
        normality: None,
    };

    let divergence = match sets.get(&source) {
        Some(set) => {
            let ctx = format!("model {model}, {source} scores");
            let (per_type, kls, jss) = weighted_divergence_scores(set).map_err(measure_err(ctx.clone()))?;
            report.kls = Some(kls.value);
            report.jss = Some(jss.value);
            report.group_deltas = Some(group_deltas(set).map_err(robustness_err(ctx))?);
            report.normality = normality(set)?;
            per_type
        }
        None => BTreeMap::new(),
    };

    for (t, ind) in typed_indicator {
        let d = divergence.get(&t);
        report.per_type.push(TypeRow {
            count: d.map(|d| d.n).unwrap_or(0),
            kls: d.map(|d| d.kls),
            jss: d.map(|d| d.jss),
            mu_stereo: d.map(|d| d.stereo.mu()),
            sigma_stereo: d.map(|d| d.stereo.sigma()),
            mu_anti: d.map(|d| d.anti.mu()),
            sigma_anti: d.map(|d| d.anti.sigma()),
            indicator: ind,
            bias_type: t,
        });
    }
    Ok(report)
}

fn matrix(labels: Vec<String>, columns: &[Vec<f64>], stat: impl Fn(&[f64], &[f64]) -> Result<f64, StatsError>) -> MeasureMatrix {
    let observations = columns.first().map_or(0, Vec::len);
    let values = columns
        .iter()
        .map(|x| columns.iter().map(|y| stat(x, y).ok()).collect())
        .collect();
    MeasureMatrix {
        labels,
        observations,
        values,
    }
}

/// Measure columns over (model, bias type) cells. A column is kept only if
/// every cell has a value for it.
fn cell_columns(models: &BTreeMap<String, ModelReport>) -> (Vec<String>, Vec<Vec<f64>>) {
    let rows: Vec<&TypeRow> = models.values().flat_map(|m| m.per_type.iter()).collect();
    let mut labels = Vec::new();
    let mut columns = Vec::new();
    for measure in ScoreMeasure::ALL {
        let col: Option<Vec<f64>> = rows.iter().map(|r| r.indicator.get(&measure).copied()).collect();
        if let Some(col) = col {
            labels.push(format!("indicator_{measure}"));
            columns.push(col);
        }
    }
    for (name, pick) in [("kls", (|r: &TypeRow| r.kls) as fn(&TypeRow) -> Option<f64>), ("jss", |r: &TypeRow| r.jss)] {
        let col: Option<Vec<f64>> = rows.iter().map(|r| pick(r)).collect();
        if let Some(col) = col {
            labels.push(name.to_string());
            columns.push(col);
        }
    }
    if rows.is_empty() {
        return (Vec::new(), Vec::new());
    }
    (labels, columns)
}

fn pair_difference_mi(sets: &BTreeMap<ScoreMeasure, ScoreSet>) -> Option<MeasureMatrix> {
    if sets.len() < 2 {
        return None;
    }
    let diffs: Vec<BTreeMap<&str, f64>> = sets
        .values()
        .map(|s| s.entries().iter().map(|e| (e.pair_id.as_str(), e.score_stereo - e.score_anti)).collect())
        .collect();
    let common: Vec<&str> = diffs[0]
        .keys()
        .copied()
        .filter(|id| diffs.iter().all(|d| d.contains_key(id)))
        .collect();
    let columns: Vec<Vec<f64>> = diffs.iter().map(|d| common.iter().map(|id| d[id]).collect()).collect();
    let labels = sets.keys().map(|m| m.to_string()).collect();
    Some(matrix(labels, &columns, |x, y| mutual_information(x, y, DEFAULT_NEIGHBORS)))
}

/// Computes every bias measure for the loaded scores.
pub fn evaluate_scores(dataset: &BiasDataset, scores: &ModelScores, source: ScoreMeasure) -> Result<MeasureReport, ReportError> {
    let mut models = BTreeMap::new();
    for (model, sets) in scores {
        models.insert(model.clone(), model_report(model, sets, source)?);
    }
    let (labels, columns) = cell_columns(&models);
    let correlation = matrix(labels.clone(), &columns, pearson);
    let mutual_information = matrix(labels, &columns, |x, y| mutual_information(x, y, DEFAULT_NEIGHBORS));
    let pair_difference_mi = scores
        .iter()
        .filter_map(|(m, sets)| pair_difference_mi(sets).map(|mat| (m.clone(), mat)))
        .collect();
    Ok(MeasureReport {
        dataset: DatasetSummary {
            source: dataset.source().to_string(),
            pairs: dataset.len(),
            type_counts: dataset.type_counts().clone(),
        },
        divergence_source: source,
        models,
        correlation,
        mutual_information,
        pair_difference_mi,
    })
}

impl MeasureReport {
    /// Long-format rows: model_id, scope, measure, value, count.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model_id,scope,measure,value,count\n");
        for (model, r) in &self.models {
            let model = csv_field(model);
            let total: usize = r.per_type.iter().map(|t| t.count).sum();
            for (m, v) in &r.indicator {
                writeln!(out, "{model},overall,indicator_{m},{},{}", num(*v), r.scored_pairs[m]).unwrap();
            }
            if let (Some(kls), Some(jss)) = (r.kls, r.jss) {
                writeln!(out, "{model},overall,kls,{},{total}", num(kls)).unwrap();
                writeln!(out, "{model},overall,jss,{},{total}", num(jss)).unwrap();
            }
            for row in &r.per_type {
                let scope = csv_field(&row.bias_type);
                for (m, v) in &row.indicator {
                    writeln!(out, "{model},{scope},indicator_{m},{},{}", num(*v), row.count).unwrap();
                }
                if let (Some(kls), Some(jss)) = (row.kls, row.jss) {
                    writeln!(out, "{model},{scope},kls,{},{}", num(kls), row.count).unwrap();
                    writeln!(out, "{model},{scope},jss,{},{}", num(jss), row.count).unwrap();
                }
            }
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let f2 = |v: Option<f64>| v.map(|v| format!("{:.2}", round_sig(v))).unwrap_or_else(|| "-".into());
        let mut out = String::new();
        writeln!(out, "# Bias report\n").unwrap();
        writeln!(
            out,
            "Dataset: {} ({} pairs). Divergence scores use {}.\n",
            self.dataset.source,
            self.dataset.pairs,
            self.divergence_source
        )
        .unwrap();
        let measures: Vec<ScoreMeasure> = ScoreMeasure::ALL
            .into_iter()
            .filter(|m| self.models.values().any(|r| r.indicator.contains_key(m)))
            .collect();
        let head: Vec<String> = measures.iter().map(|m| m.as_str().to_uppercase()).collect();
        writeln!(out, "## Overall\n").unwrap();
        writeln!(out, "| model | {} | KLS | JSS |", head.join(" | ")).unwrap();
        writeln!(out, "|---|{}---|---|", "---|".repeat(measures.len())).unwrap();
        for (model, r) in &self.models {
            let cells: Vec<String> = measures.iter().map(|m| f2(r.indicator.get(m).copied())).collect();
            writeln!(out, "| {model} | {} | {} | {} |", cells.join(" | "), f2(r.kls), f2(r.jss)).unwrap();
        }
        for (model, r) in &self.models {
            writeln!(out, "\n## {model} by bias type\n").unwrap();
            writeln!(out, "| bias type | count | {} | KLS | JSS |", head.join(" | ")).unwrap();
            writeln!(out, "|---|---|{}---|---|", "---|".repeat(measures.len())).unwrap();
            for row in &r.per_type {
                let cells: Vec<String> = measures.iter().map(|m| f2(row.indicator.get(m).copied())).collect();
                writeln!(
                    out,
                    "| {} | {} | {} | {} | {} |",
                    row.bias_type,
                    row.count,
                    cells.join(" | "),
                    f2(row.kls),
                    f2(row.jss)
                )
                .unwrap();
            }
            if let Some(n) = &r.normality {
                writeln!(
                    out,
                    "\nShapiro-Wilk: stereotype W = {} (p = {}), anti-stereotype W = {} (p = {}).",
                    f2(Some(n.stereo.w)),
                    f2(Some(n.stereo.p_value)),
                    f2(Some(n.anti.w)),
                    f2(Some(n.anti.p_value))
                )
                .unwrap();
            }
        }
        for (title, mat) in [("Correlation", &self.correlation), ("Mutual information", &self.mutual_information)] {
            if mat.labels.is_empty() {
                continue;
            }
            writeln!(out, "\n## {title} ({} observations)\n", mat.observations).unwrap();
            writeln!(out, "| | {} |", mat.labels.join(" | ")).unwrap();
            writeln!(out, "|---|{}", "---|".repeat(mat.labels.len())).unwrap();
            for (label, row) in mat.labels.iter().zip(&mat.values) {
                let cells: Vec<String> = row.iter().map(|v| f2(*v)).collect();
                writeln!(out, "| {label} | {} |", cells.join(" | ")).unwrap();
            }
        }
        out
    }
}


/// Loads the dataset and score files, computes every measure, and writes the
/// requested report formats into the output directory.
pub fn run_evaluate(config: &RunConfig) -> Result<(MeasureReport, Vec<PathBuf>), ReportError> {
    config.validate()?;
    let dataset = load_dataset(&config.dataset_path, config.dataset_kind)?;
    let scores = load_joined_scores(&config.score_paths, &dataset)?;
    let report = evaluate_scores(&dataset, &scores, config.divergence_source)?;
    let mut written = Vec::new();
    for format in &config.formats {
        written.push(match format {
            ReportFormat::Json => write(&config.output_dir, "report.json", &canonical_json(&report))?,
            ReportFormat::Csv => write(&config.output_dir, "report.csv", &report.to_csv())?,
            ReportFormat::Markdown => write(&config.output_dir, "report.md", &report.to_markdown())?,
        });
    }
    Ok((report, written))
}
