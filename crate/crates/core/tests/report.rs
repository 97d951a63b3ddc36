mod common;

use std::fs;
use std::path::{Path, PathBuf};

use common::{crowspairs_csv, score_jsonl, synthetic_pll, CP_TYPES};
use pllbias::report::{
    canonical_json, run_evaluate, run_normality, run_robustness, validate, DatasetKind, ReportError, ReportFormat,
    RunConfig,
};
use pllbias::robustness::SamplingPlan;
use pllbias::ScoreMeasure;
use tempfile::TempDir;

const PER_TYPE: usize = 24;

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        fs::write(dir.path().join("cp.csv"), crowspairs_csv(PER_TYPE)).unwrap();
        let ws = Self { dir };
        ws.scores("model-a", "aul", &synthetic_pll(PER_TYPE, 0.3, 1));
        ws.scores("model-a", "cps", &synthetic_pll(PER_TYPE, 0.1, 2));
        ws.scores("model-b", "aul", &synthetic_pll(PER_TYPE, 0.8, 3));
        ws.scores("model-c", "aul", &synthetic_pll(PER_TYPE, -0.4, 4));
        ws
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn scores(&self, model: &str, measure: &str, pairs: &[(String, f64, f64)]) -> PathBuf {
        let p = self.path(&format!("{model}.{measure}.jsonl"));
        fs::write(&p, score_jsonl(model, measure, pairs)).unwrap();
        p
    }

    fn config(&self, out: &str, files: &[&str]) -> RunConfig {
        let mut c = RunConfig::new(self.path("cp.csv"), DatasetKind::CrowsPairs, self.path(out));
        c.score_paths = files.iter().map(|f| self.path(f)).collect();
        c
    }
}

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap()
}

#[test]
fn one_model_report_structure() {
    let ws = Workspace::new();
    let (report, written) = run_evaluate(&ws.config("out", &["model-a.aul.jsonl"])).unwrap();
    let m = &report.models["model-a"];
    assert_eq!(m.indicator.len(), 1);
    assert!(m.kls.is_some() && m.jss.is_some());
    assert_eq!(m.per_type.len(), 9);
    assert_eq!(m.per_type.iter().map(|r| r.bias_type.as_str()).collect::<Vec<_>>(), CP_TYPES);
    assert_eq!(written.len(), 3);
    for name in ["report.json", "report.csv", "report.md"] {
        assert!(ws.path("out").join(name).exists(), "{name}");
    }
}

#[test]
fn weighted_overall_matches_per_type_rows() {
    let ws = Workspace::new();
    let (report, _) = run_evaluate(&ws.config("out", &["model-a.aul.jsonl", "model-b.aul.jsonl"])).unwrap();
    for m in report.models.values() {
        let total: usize = m.per_type.iter().map(|r| r.count).sum();
        let combine = |pick: fn(&pllbias::report::TypeRow) -> Option<f64>| {
            m.per_type.iter().map(|r| r.count as f64 / total as f64 * pick(r).unwrap()).sum::<f64>()
        };
        assert!((m.kls.unwrap() - combine(|r| r.kls)).abs() < 1e-9);
        assert!((m.jss.unwrap() - combine(|r| r.jss)).abs() < 1e-9);
    }
}

#[test]
fn two_models_give_square_matrices() {
    let ws = Workspace::new();
    let (report, _) = run_evaluate(&ws.config("out", &["model-a.aul.jsonl", "model-b.aul.jsonl"])).unwrap();
    for mat in [&report.correlation, &report.mutual_information] {
        assert!(mat.labels.len() >= 2);
        assert_eq!(mat.values.len(), mat.labels.len());
        assert!(mat.values.iter().all(|row| row.len() == mat.labels.len()));
        assert_eq!(mat.observations, 18);
    }
    assert_eq!(report.correlation.values[0][0], Some(1.0));
}

#[test]
fn pair_difference_mi_needs_two_score_measures() {
    let ws = Workspace::new();
    let (report, _) = run_evaluate(&ws.config("out", &["model-a.aul.jsonl", "model-a.cps.jsonl", "model-b.aul.jsonl"])).unwrap();
    assert_eq!(report.pair_difference_mi.len(), 1);
    let mat = &report.pair_difference_mi["model-a"];
    assert_eq!(mat.labels, ["cps", "aul"]);
    assert_eq!(mat.observations, 9 * PER_TYPE);
    // model-b has no CPS scores, so no cell-level CPS column
    assert!(!report.correlation.labels.contains(&"indicator_cps".to_string()));
}

#[test]
fn missing_scores_is_a_configuration_error() {
    let ws = Workspace::new();
    let err = run_evaluate(&ws.config("out", &[])).unwrap_err();
    assert!(matches!(err, ReportError::Config(_)));
    assert_eq!(err.exit_code(), 1);
    assert!(!ws.path("out").exists());
}

#[test]
fn schema_errors_carry_file_and_line() {
    let ws = Workspace::new();
    let bad = ws.path("bad.jsonl");
    let good = score_jsonl("model-a", "aul", &synthetic_pll(PER_TYPE, 0.3, 1));
    let mut lines: Vec<&str> = good.lines().collect();
    lines[2] = r#"{"model_id":"model-a","measure":"aul","pair_id":"2","bias_type":"age","score_stereo":"x","score_anti":1}"#;
    fs::write(&bad, lines.join("\n")).unwrap();
    let err = run_evaluate(&ws.config("out", &["bad.jsonl"])).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    let msg = err.to_string();
    assert!(msg.contains("bad.jsonl") && msg.contains("line 3"), "{msg}");
}

#[test]
fn markdown_numbers_appear_in_json() {
    let ws = Workspace::new();
    run_evaluate(&ws.config("out", &["model-a.aul.jsonl", "model-a.cps.jsonl", "model-b.aul.jsonl"])).unwrap();
    let json: serde_json::Value = serde_json::from_str(&read(&ws.path("out/report.json"))).unwrap();
    let mut numbers = Vec::new();
    collect_numbers(&json, &mut numbers);
    let rendered: std::collections::HashSet<String> = numbers
        .iter()
        .flat_map(|v| [format!("{v:.2}"), format!("{v}")])
        .collect();
    let md = read(&ws.path("out/report.md"));
    let mut checked = 0;
    for line in md.lines().filter(|l| l.starts_with('|') && !l.starts_with("|---")) {
        for cell in line.trim_matches('|').split('|').skip(1) {
            let cell = cell.trim();
            if cell.parse::<f64>().is_ok() {
                assert!(rendered.contains(cell), "{cell} missing from JSON ({line})");
                checked += 1;
            }
        }
    }
    for token in md.split(|c: char| c == '=' || c == '(' || c == ')' || c == ',').map(str::trim) {
        if token.contains('.') && token.parse::<f64>().is_ok() {
            assert!(rendered.contains(token), "{token}");
            checked += 1;
        }
    }
    assert!(checked > 50);
}

fn collect_numbers(v: &serde_json::Value, out: &mut Vec<f64>) {
    match v {
        serde_json::Value::Number(n) => out.push(n.as_f64().unwrap()),
        serde_json::Value::Array(a) => a.iter().for_each(|x| collect_numbers(x, out)),
        serde_json::Value::Object(m) => m.values().for_each(|x| collect_numbers(x, out)),
        _ => {}
    }
}

#[test]
fn evaluate_is_byte_identical_across_runs() {
    let ws = Workspace::new();
    let files = ["model-a.aul.jsonl", "model-a.cps.jsonl", "model-b.aul.jsonl", "model-c.aul.jsonl"];
    run_evaluate(&ws.config("one", &files)).unwrap();
    run_evaluate(&ws.config("two", &files)).unwrap();
    for name in ["report.json", "report.csv", "report.md"] {
        assert_eq!(read(&ws.path("one").join(name)), read(&ws.path("two").join(name)), "{name}");
    }
}

#[test]
fn json_floats_have_six_significant_digits() {
    let ws = Workspace::new();
    let (report, _) = run_evaluate(&ws.config("out", &["model-a.aul.jsonl"])).unwrap();
    let text = canonical_json(&report);
    let kls = report.models["model-a"].kls.unwrap();
    assert!(text.contains(&format!("\"kls\": {}", pllbias::report::round_sig(kls))));
}

#[test]
fn robustness_rows_and_files() {
    let ws = Workspace::new();
    let mut config = ws.config("out", &["model-a.aul.jsonl", "model-b.aul.jsonl", "model-c.aul.jsonl"]);
    config.plan.repeats = 3;
    let (report, _) = run_robustness(&config).unwrap();
    assert_eq!(report.rates.len(), 6);
    let csv = read(&ws.path("out/robustness.csv"));
    assert_eq!(csv.lines().count(), 1 + 6 * 3 * 3);
    assert!(csv.starts_with("rate,aggregate,model_id,measure,score,rank_flag,delta_sp\n"));
    assert!(ws.path("out/robustness.json").exists());
}

#[test]
fn robustness_at_full_rate_never_flags() {
    let ws = Workspace::new();
    let mut config = ws.config("out", &["model-a.aul.jsonl", "model-b.aul.jsonl"]);
    config.plan = SamplingPlan::new(vec![1.0], 2, 9).unwrap();
    let (report, _) = run_robustness(&config).unwrap();
    let r = &report.rates[0];
    assert!(r.rank_flags.values().all(|f| !f));
    assert_eq!(r.mean_scores, report.full_scores);
    assert!(r.delta_sp.values().all(|&d| d == 0.0));
}

#[test]
fn robustness_needs_two_models() {
    let ws = Workspace::new();
    let err = run_robustness(&ws.config("out", &["model-a.aul.jsonl", "model-a.cps.jsonl"])).unwrap_err();
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn robustness_is_byte_identical_across_runs() {
    let ws = Workspace::new();
    let files = ["model-a.aul.jsonl", "model-b.aul.jsonl", "model-c.aul.jsonl"];
    let mut one = ws.config("one", &files);
    one.plan.repeats = 2;
    let mut two = ws.config("two", &files);
    two.plan.repeats = 2;
    run_robustness(&one).unwrap();
    run_robustness(&two).unwrap();
    for name in ["robustness.csv", "robustness.json"] {
        assert_eq!(read(&ws.path("one").join(name)), read(&ws.path("two").join(name)), "{name}");
    }
}

#[test]
fn normality_writes_two_curves_per_model() {
    let ws = Workspace::new();
    let mut config = ws.config("out", &["model-a.aul.jsonl"]);
    config.kde_grid_size = 128;
    let (report, written) = run_normality(&config).unwrap();
    assert_eq!(report.models["model-a"].len(), 2);
    for side in ["stereo", "anti"] {
        let csv = read(&ws.path(&format!("out/kde_model-a_{side}.csv")));
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("grid,density,gaussian"));
        let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
        assert!(rows.len() >= 128);
        assert!(rows.iter().all(|r| r.len() == 3 && r[1] >= 0.0 && r[2] >= 0.0));
        let curve = &report.models["model-a"][side];
        assert_eq!(curve.curve.grid.len(), curve.gaussian.len());
    }
    assert_eq!(written.len(), 3);
}

#[test]
fn normality_surfaces_degenerate_side() {
    let ws = Workspace::new();
    let mut pairs = synthetic_pll(PER_TYPE, 0.0, 5);
    for p in &mut pairs {
        p.2 = -12.0;
    }
    ws.scores("flat", "aul", &pairs);
    let err = run_normality(&ws.config("out", &["flat.aul.jsonl"])).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    let msg = err.to_string();
    assert!(msg.contains("flat") && msg.contains("anti"), "{msg}");
}

#[test]
fn validate_writes_canonical_dataset() {
    let ws = Workspace::new();
    let out = ws.path("canon");
    let summary = validate(&ws.path("cp.csv"), DatasetKind::CrowsPairs, &[ws.path("model-b.aul.jsonl")], Some(&out)).unwrap();
    assert_eq!(summary.pairs, 9 * PER_TYPE);
    assert_eq!(summary.score_files[0].matched, 9 * PER_TYPE);
    assert_eq!(summary.score_files[0].measure, ScoreMeasure::Aul);
    let mut config = ws.config("out", &["model-b.aul.jsonl"]);
    config.dataset_path = out.join("dataset.jsonl");
    config.dataset_kind = DatasetKind::Canonical;
    config.formats = [ReportFormat::Json].into();
    let (from_canonical, _) = run_evaluate(&config).unwrap();
    let (from_csv, _) = run_evaluate(&ws.config("out2", &["model-b.aul.jsonl"])).unwrap();
    assert_eq!(from_canonical.models, from_csv.models);
}
