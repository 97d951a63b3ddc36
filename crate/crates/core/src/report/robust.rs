use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::PathBuf;

use super::format::{canonical_json, csv_field, num};
use super::{load_dataset, load_joined_scores, write, ReportError, ReportFormat, RunConfig};
use crate::measures::MeasureKind;
use crate::robustness::{robustness_experiment, RobustnessReport};

/// One row per rate, model and measure kind: the repeat-averaged score, the
/// rank-change flag of that measure at that rate, and the model's delta_sp.
pub fn robustness_csv(report: &RobustnessReport) -> String {
    let mut out = String::from("rate,aggregate,model_id,measure,score,rank_flag,delta_sp\n");
    for r in &report.rates {
        for (model, scores) in &r.mean_scores {
            for (kind, v) in scores {
                writeln!(
                    out,
                    "{},mean,{},{},{},{},{}",
                    num(r.rate),
                    csv_field(model),
                    kind.as_str(),
                    num(*v),
                    r.rank_flags[kind],
                    num(r.delta_sp[model])
                )
                .unwrap();
            }
        }
    }
    out
}

/// Runs the subsampling experiment over the divergence-source scores of
/// every model and writes `robustness.csv` and `robustness.json`.
pub fn run_robustness(config: &RunConfig) -> Result<(RobustnessReport, Vec<PathBuf>), ReportError> {
    config.validate()?;
    let dataset = load_dataset(&config.dataset_path, config.dataset_kind)?;
    let scores = load_joined_scores(&config.score_paths, &dataset)?;
    let sets: BTreeMap<String, _> = scores
        .into_iter()
        .filter_map(|(model, mut sets)| sets.remove(&config.divergence_source).map(|s| (model, s)))
        .collect();
    if sets.len() < 2 {
        return Err(ReportError::Config(format!(
            "robustness needs {} scores for at least 2 models, got {}",
            config.divergence_source,
            sets.len()
        )));
    }
    let report = robustness_experiment(&sets, &config.plan, &MeasureKind::ALL)?;
    let mut written = Vec::new();
    if config.formats.contains(&ReportFormat::Csv) {
        written.push(write(&config.output_dir, "robustness.csv", &robustness_csv(&report))?);
    }
    if config.formats.contains(&ReportFormat::Json) {
        written.push(write(&config.output_dir, "robustness.json", &canonical_json(&report))?);
    }
    Ok((report, written))
}
