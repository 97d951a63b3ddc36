//! Subsampling robustness protocol: repeated random subsets at fixed rates,
//! repeat-averaged scores, model rank consistency, and the stereotype /
//! anti-stereotype group delta analysis.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measures::{indicator_bias_score, weighted_divergence_scores, MeasureError, MeasureKind};
use crate::num::Field;
use crate::scores::{ScoreMeasure, ScoreSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RobustnessError {
    #[error("sampling rate {0} outside (0, 1]")]
    InvalidRate(f64),
    #[error("sampling rates must be strictly increasing")]
    UnorderedRates,
    #[error("sampling plan has no rates")]
    NoRates,
    #[error("repeats must be at least 1")]
    NoRepeats,
    #[error("subsample of {size} pairs at rate {rate} is too small (need at least 2)")]
    TooFewSamples { rate: f64, size: usize },
    #[error("{0} group is empty")]
    EmptyGroup(&'static str),
    #[error("robustness needs at least 2 models, got {0}")]
    TooFewModels(usize),
    #[error("model {0} is scored over a different pair-id universe")]
    UniverseMismatch(String),
    #[error("model {model} uses score measure {found}, expected {expected}")]
    MeasureMismatch {
        model: String,
        expected: ScoreMeasure,
        found: ScoreMeasure,
    },
    #[error("model {model}: {source}")]
    Measure {
        model: String,
        #[source]
        source: MeasureError,
    },
}

/// Sampling rates, repeats per rate, and the seed every draw derives from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub rates: Vec<f64>,
    pub repeats: usize,
    pub seed: u64,
    /// Sample each bias type separately at the same rate.
    pub stratified: bool,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self {
            rates: vec![0.3, 0.4, 0.5, 0.6, 0.7, 0.8],
            repeats: 10,
            seed: 0,
            stratified: false,
        }
    }
}

impl SamplingPlan {
    pub fn new(rates: Vec<f64>, repeats: usize, seed: u64) -> Result<Self, RobustnessError> {
        let plan = Self {
            rates,
            repeats,
            seed,
            stratified: false,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<(), RobustnessError> {
        if self.rates.is_empty() {
            return Err(RobustnessError::NoRates);
        }
        if let Some(&r) = self.rates.iter().find(|&&r| !(r > 0.0 && r <= 1.0)) {
            return Err(RobustnessError::InvalidRate(r));
        }
        if self.rates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(RobustnessError::UnorderedRates);
        }
        if self.repeats == 0 {
            return Err(RobustnessError::NoRepeats);
        }
        Ok(())
    }
}

/// round(rate * n), halves rounded up.
pub fn sample_size(n: usize, rate: f64) -> usize {
    ((rate * n as f64) + 0.5).floor() as usize
}

fn mix(mut z: u64) -> u64 {
    // splitmix64 finalizer
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rng_for(seed: u64, rate: f64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(mix(seed) ^ rate.to_bits()))
}

/// Seed of the `repeat`-th draw derived from the plan seed.
pub fn repeat_seed(seed: u64, repeat: usize) -> u64 {
    mix(seed ^ mix(repeat as u64))
}

fn check_rate(rate: f64) -> Result<(), RobustnessError> {
    if rate > 0.0 && rate <= 1.0 {
        Ok(())
    } else {
        Err(RobustnessError::InvalidRate(rate))
    }
}

/// Pair ids drawn without replacement from the sorted id universe.
fn draw_ids<'a>(ids: &[&'a str], rate: f64, rng: &mut ChaCha8Rng) -> Vec<&'a str> {
    let k = sample_size(ids.len(), rate);
    rand::seq::index::sample(rng, ids.len(), k)
        .into_iter()
        .map(|i| ids[i])
        .collect()
}

fn sample_ids(scores: &ScoreSet, rate: f64, seed: u64, stratified: bool) -> Result<BTreeSet<String>, RobustnessError> {
    check_rate(rate)?;
    let mut rng = rng_for(seed, rate);
    let chosen: BTreeSet<String> = if stratified {
        let mut by_type: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for e in scores.entries() {
            by_type.entry(e.bias_type.as_str()).or_default().push(e.pair_id.as_str());
        }
        by_type
            .into_values()
            .flat_map(|mut ids| {
                ids.sort_unstable();
                draw_ids(&ids, rate, &mut rng)
            })
            .map(str::to_string)
            .collect()
    } else {
        let mut ids: Vec<&str> = scores.pair_ids().collect();
        ids.sort_unstable();
        draw_ids(&ids, rate, &mut rng).into_iter().map(str::to_string).collect()
    };
    if chosen.len() < 2 {
        return Err(RobustnessError::TooFewSamples { rate, size: chosen.len() });
    }
    Ok(chosen)
}

/// Simple random sample of round(rate * N) pairs without replacement.
///
/// Pair ids are the sampling unit and are drawn from the sorted id universe
/// with a generator seeded by `(seed, rate)`, so score sets of different
/// models over the same pairs select the same ids. Entry order is preserved.
pub fn subsample(scores: &ScoreSet, rate: f64, seed: u64) -> Result<ScoreSet, RobustnessError> {
    let ids = sample_ids(scores, rate, seed, false)?;
    Ok(scores.filter(|e| ids.contains(&e.pair_id)))
}

/// [`subsample`] applied within each bias type.
pub fn stratified_subsample(scores: &ScoreSet, rate: f64, seed: u64) -> Result<ScoreSet, RobustnessError> {
    let ids = sample_ids(scores, rate, seed, true)?;
    Ok(scores.filter(|e| ids.contains(&e.pair_id)))
}

/// Mean scores of the stereotype sample group (stereo score strictly wins)
/// and the anti-stereotype sample group (everything else).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDeltas<T = f64> {
    pub avg_st_in_stereo_group: T,
    pub avg_at_in_stereo_group: T,
    pub delta_st: T,
    pub avg_st_in_anti_group: T,
    pub avg_at_in_anti_group: T,
    pub delta_at: T,
    /// delta_st - delta_at
    pub imbalance: T,
}

fn mean_of<T: Field>(values: impl Iterator<Item = T>) -> (T, usize) {
    let mut n = 0;
    let mut sum = T::zero();
    for v in values {
        sum = sum + v;
        n += 1;
    }
    let count = T::from_usize(n.max(1)).expect("count representable");
    (sum / count, n)
}

/// Group deltas over `(stereo, anti)` score pairs in any ordered field.
pub fn group_deltas_of<T: Field>(pairs: &[(T, T)]) -> Result<GroupDeltas<T>, RobustnessError> {
    let stereo_group = || pairs.iter().filter(|(s, a)| s > a);
    let anti_group = || pairs.iter().filter(|(s, a)| !(s > a));
    let (avg_st_s, n_s) = mean_of(stereo_group().map(|(s, _)| s.clone()));
    let (avg_at_s, _) = mean_of(stereo_group().map(|(_, a)| a.clone()));
    let (avg_st_a, n_a) = mean_of(anti_group().map(|(s, _)| s.clone()));
    let (avg_at_a, _) = mean_of(anti_group().map(|(_, a)| a.clone()));
    if n_s == 0 {
        return Err(RobustnessError::EmptyGroup("stereotype"));
    }
    if n_a == 0 {
        return Err(RobustnessError::EmptyGroup("anti-stereotype"));
    }
    let delta_st = (avg_st_s.clone() - avg_at_s.clone()).abs();
    let delta_at = (avg_st_a.clone() - avg_at_a.clone()).abs();
    Ok(GroupDeltas {
        imbalance: delta_st.clone() - delta_at.clone(),
        avg_st_in_stereo_group: avg_st_s,
        avg_at_in_stereo_group: avg_at_s,
        delta_st,
        avg_st_in_anti_group: avg_st_a,
        avg_at_in_anti_group: avg_at_a,
        delta_at,
    })
}

pub fn group_deltas(scores: &ScoreSet) -> Result<GroupDeltas, RobustnessError> {
    let pairs: Vec<(f64, f64)> = scores.entries().iter().map(|e| (e.score_stereo, e.score_anti)).collect();
    group_deltas_of(&pairs)
}

/// Repeat-averaged results at one sampling rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    pub rate: f64,
    pub sample_size: usize,
    /// model -> measure kind -> mean score over repeats
    pub mean_scores: BTreeMap<String, BTreeMap<MeasureKind, f64>>,
    /// measure kind -> models from least to most biased
    pub ranking: BTreeMap<MeasureKind, Vec<String>>,
    /// measure kind -> ranking differs from the full-dataset ranking
    pub rank_flags: BTreeMap<MeasureKind, bool>,
    /// model -> mean imbalance over repeats minus the full-dataset imbalance
    pub delta_sp: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub plan: SamplingPlan,
    pub score_measure: ScoreMeasure,
    pub measures: Vec<MeasureKind>,
    pub pairs: usize,
    pub full_scores: BTreeMap<String, BTreeMap<MeasureKind, f64>>,
    pub full_ranking: BTreeMap<MeasureKind, Vec<String>>,
    pub full_imbalance: BTreeMap<String, f64>,
    pub rates: Vec<RateResult>,
}

impl RobustnessReport {
    /// Whether the ranking under `kind` changed at any rate.
    pub fn any_flag(&self, kind: MeasureKind) -> bool {
        self.rates.iter().any(|r| r.rank_flags.get(&kind).copied().unwrap_or(false))
    }
}

/// Orders models from least to most biased: |score - 50| ascending for the
/// indicator and KLS, descending JSS. Ties break on model id.
pub fn rank_models(scores: &BTreeMap<String, f64>, kind: MeasureKind) -> Vec<String> {
    let key = |v: f64| match kind {
        MeasureKind::Indicator | MeasureKind::Kls => (v - 50.0).abs(),
        MeasureKind::Jss => -v,
    };
    let mut models: Vec<(&String, f64)> = scores.iter().map(|(m, &v)| (m, key(v))).collect();
    models.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
    models.into_iter().map(|(m, _)| m.clone()).collect()
}

fn evaluate(scores: &ScoreSet, kinds: &[MeasureKind]) -> Result<BTreeMap<MeasureKind, f64>, RobustnessError> {
    let wrap = |source| RobustnessError::Measure {
        model: scores.model_id().to_string(),
        source,
    };
    let mut out = BTreeMap::new();
    if kinds.contains(&MeasureKind::Indicator) {
        out.insert(MeasureKind::Indicator, indicator_bias_score(scores).map_err(wrap)?.value);
    }
    if kinds.iter().any(|k| matches!(k, MeasureKind::Kls | MeasureKind::Jss)) {
        let (_, kls, jss) = weighted_divergence_scores(scores).map_err(wrap)?;
        if kinds.contains(&MeasureKind::Kls) {
            out.insert(MeasureKind::Kls, kls.value);
        }
        if kinds.contains(&MeasureKind::Jss) {
            out.insert(MeasureKind::Jss, jss.value);
        }
    }
    Ok(out)
}

/// Running mean that reproduces its input exactly when all inputs are equal.
#[derive(Default)]
struct RunningMean {
    mean: f64,
    n: usize,
}

impl RunningMean {
    fn push(&mut self, v: f64) {
        self.n += 1;
        self.mean += (v - self.mean) / self.n as f64;
    }
}

/// Runs the subsampling protocol over several models scored on the same pairs.
///
/// For every rate and repeat one pair-id subset is drawn and shared by all
/// models. The report is a pure function of its inputs.
pub fn robustness_experiment(
    score_sets: &BTreeMap<String, ScoreSet>,
    plan: &SamplingPlan,
    measures: &[MeasureKind],
) -> Result<RobustnessReport, RobustnessError> {
    plan.validate()?;
    if score_sets.len() < 2 {
        return Err(RobustnessError::TooFewModels(score_sets.len()));
    }
    let kinds: Vec<MeasureKind> = MeasureKind::ALL.into_iter().filter(|k| measures.contains(k)).collect();
    let (_, reference) = score_sets.iter().next().expect("at least two models");
    let universe: BTreeSet<&str> = reference.pair_ids().collect();
    for (model, set) in score_sets {
        if set.measure() != reference.measure() {
            return Err(RobustnessError::MeasureMismatch {
                model: model.clone(),
                expected: reference.measure(),
                found: set.measure(),
            });
        }
        if set.len() != universe.len() || !set.pair_ids().all(|id| universe.contains(id)) {
            return Err(RobustnessError::UniverseMismatch(model.clone()));
        }
    }

    let mut full_scores = BTreeMap::new();
    let mut full_imbalance = BTreeMap::new();
    for (model, set) in score_sets {
        full_scores.insert(model.clone(), evaluate(set, &kinds)?);
        full_imbalance.insert(model.clone(), group_deltas(set)?.imbalance);
    }
    let ranking_of = |scores: &BTreeMap<String, BTreeMap<MeasureKind, f64>>| -> BTreeMap<MeasureKind, Vec<String>> {
        kinds
            .iter()
            .map(|&k| {
                let per_model = scores.iter().map(|(m, s)| (m.clone(), s[&k])).collect();
                (k, rank_models(&per_model, k))
            })
            .collect()
    };
    let full_ranking = ranking_of(&full_scores);

    let mut rates = Vec::with_capacity(plan.rates.len());
    for &rate in &plan.rates {
        let mut means: BTreeMap<String, BTreeMap<MeasureKind, RunningMean>> = BTreeMap::new();
        let mut imbalances: BTreeMap<String, RunningMean> = BTreeMap::new();
        let mut size = 0;
        for repeat in 0..plan.repeats {
            let ids = sample_ids(reference, rate, repeat_seed(plan.seed, repeat), plan.stratified)?;
            size = ids.len();
            for (model, set) in score_sets {
                let subset = set.filter(|e| ids.contains(&e.pair_id));
                for (kind, v) in evaluate(&subset, &kinds)? {
                    means.entry(model.clone()).or_default().entry(kind).or_default().push(v);
                }
                imbalances.entry(model.clone()).or_default().push(group_deltas(&subset)?.imbalance);
            }
        }
        let mean_scores: BTreeMap<String, BTreeMap<MeasureKind, f64>> = means
            .into_iter()
            .map(|(m, per_kind)| (m, per_kind.into_iter().map(|(k, rm)| (k, rm.mean)).collect()))
            .collect();
        let ranking = ranking_of(&mean_scores);
        let rank_flags = kinds.iter().map(|k| (*k, ranking[k] != full_ranking[k])).collect();
        let delta_sp = imbalances
            .into_iter()
            .map(|(m, rm)| {
                let full = full_imbalance[&m];
                (m, rm.mean - full)
            })
            .collect();
        rates.push(RateResult {
            rate,
            sample_size: size,
            mean_scores,
            ranking,
            rank_flags,
            delta_sp,
        });
    }

    Ok(RobustnessReport {
        plan: plan.clone(),
        score_measure: reference.measure(),
        measures: kinds,
        pairs: universe.len(),
        full_scores,
        full_ranking,
        full_imbalance,
        rates,
    })
}
