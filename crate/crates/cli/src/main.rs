use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use pllbias::report::{
    run_evaluate, run_normality, run_robustness, validate, DatasetKind, ReportError, ReportFormat, RunConfig,
};
use pllbias::robustness::SamplingPlan;
use pllbias::ScoreMeasure;

/// Bias measures over pseudo-log-likelihood scores of sentence pairs.
#[derive(Parser)]
#[command(name = "pllbias", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute indicator, KLS and JSS scores, correlations and mutual information.
    Evaluate(Common),
    /// Run the subsampling rank-consistency experiment.
    Robustness {
        #[command(flatten)]
        common: Common,
        /// Comma-separated sampling rates.
        #[arg(long, value_delimiter = ',', default_values_t = SamplingPlan::default().rates)]
        rates: Vec<f64>,
        #[arg(long, default_value_t = SamplingPlan::default().repeats)]
        repeats: usize,
        #[arg(long, default_value_t = SamplingPlan::default().seed)]
        seed: u64,
        /// Sample every bias type separately.
        #[arg(long)]
        stratified: bool,
    },
    /// Shapiro-Wilk tests and density curves of the score distributions.
    Normality {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 512)]
        grid_size: usize,
    },
    /// Check the dataset and score files; optionally write the canonical dataset.
    Validate {
        #[command(flatten)]
        input: Input,
        /// Directory to write dataset.jsonl into.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Input {
    #[arg(long)]
    dataset: PathBuf,
    /// stereoset, crowspairs or canonical.
    #[arg(long)]
    dataset_kind: DatasetKind,
    /// Score file (JSON Lines); repeat for several models or score measures.
    #[arg(long = "scores")]
    scores: Vec<PathBuf>,
}

#[derive(Args)]
struct Common {
    #[command(flatten)]
    input: Input,
    /// Score measure feeding KLS, JSS and the normality analysis.
    #[arg(long, default_value = "aul")]
    divergence_source: ScoreMeasure,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Comma-separated output formats: json, csv, markdown.
    #[arg(long, value_delimiter = ',', default_value = "json,csv,markdown")]
    format: Vec<ReportFormat>,
}

impl Common {
    fn config(self) -> RunConfig {
        let mut config = RunConfig::new(self.input.dataset, self.input.dataset_kind, self.out);
        config.score_paths = self.input.scores;
        config.divergence_source = self.divergence_source;
        config.formats = self.format.into_iter().collect();
        config
    }
}

fn print_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Evaluate(common) => {
            let (report, written) = run_evaluate(&common.config())?;
            for (model, r) in &report.models {
                let ind: Vec<String> = r.indicator.iter().map(|(m, v)| format!("{m}={v:.2}")).collect();
                let div = match (r.kls, r.jss) {
                    (Some(k), Some(j)) => format!(" kls={k:.2} jss={j:.2}"),
                    _ => String::new(),
                };
                println!("{model}: {}{div}", ind.join(" "));
            }
            print_written(&written);
        }
        Command::Robustness {
            common,
            rates,
            repeats,
            seed,
            stratified,
        } => {
            let mut config = common.config();
            config.plan = SamplingPlan {
                rates,
                repeats,
                seed,
                stratified,
            };
            let (report, written) = run_robustness(&config)?;
            for kind in &report.measures {
                let changed = if report.any_flag(*kind) { "changes" } else { "stable" };
                println!("{}: ranking {changed}", kind.as_str());
            }
            print_written(&written);
        }
        Command::Normality { common, grid_size } => {
            let mut config = common.config();
            config.kde_grid_size = grid_size;
            let (report, written) = run_normality(&config)?;
            for (model, sides) in &report.models {
                for (side, c) in sides {
                    println!("{model} {side}: W={:.4} p={:.4}", c.normality.w, c.normality.p_value);
                }
            }
            print_written(&written);
        }
        Command::Validate { input, out } => {
            let summary = validate(&input.dataset, input.dataset_kind, &input.scores, out.as_deref())?;
            println!("{} pairs from {} in {} bias types", summary.pairs, summary.source, summary.type_counts.len());
            for f in &summary.score_files {
                println!(
                    "{}: model {} {} matched={} dropped={}",
                    f.path, f.model_id, f.measure, f.matched, f.dropped
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<ReportError>().map_or(1, ReportError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
