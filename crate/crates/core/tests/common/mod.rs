//! Independent oracles and fixture builders shared by the integration tests.
#![allow(dead_code)]

use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Deserialize;
use statrs::distribution::{ContinuousCDF, Normal};

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Composite Simpson over [a, b] with `intervals` (even) sub-intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    assert!(intervals % 2 == 0);
    let h = (b - a) / intervals as f64;
    let terms = (0..=intervals).map(|i| {
        let w = if i == 0 || i == intervals {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        w * f(a + h * i as f64)
    });
    compensated_sum(terms) * h / 3.0
}

pub fn ln_normal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    -0.5 * z * z - sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
}

/// KL(p || q) in nats by Simpson quadrature of p(x) (ln p(x) - ln q(x)) in
/// the standardized coordinate of p over [-40, 40].
pub fn kl_quadrature(p: (f64, f64), q: (f64, f64)) -> f64 {
    let (mp, sp) = p;
    let (mq, sq) = q;
    let integrand = |z: f64| {
        let x = mp + sp * z;
        let lp = ln_normal_pdf(x, mp, sp);
        let lq = ln_normal_pdf(x, mq, sq);
        // dx = sp dz
        lp.exp() * (lp - lq) * sp
    };
    simpson(integrand, -40.0, 40.0, 16_000)
}

/// Jittered stratified standard-normal draws: one uniform per stratum
/// `[i/n, (i+1)/n)` pushed through the normal quantile.
pub struct StratifiedNormal {
    pub z: Vec<f64>,
}

impl StratifiedNormal {
    pub fn new(n: usize, seed: u64) -> Self {
        let normal = Normal::new(0.0, 1.0).unwrap();
        let mut r = rng(seed);
        let z = (0..n)
            .map(|i| {
                let u = (i as f64 + r.gen::<f64>()) / n as f64;
                normal.inverse_cdf(u.clamp(1e-300, 1.0 - 1e-16))
            })
            .collect();
        Self { z }
    }
}

/// h(r) = r/2 log2 r + (2-r)/2 log2(2-r) with r = p/m = 2 / (1 + e^d) and
/// d = ln q - ln p, written through softplus so that one exp and one log1p
/// suffice.
fn js_kernel(d: f64) -> f64 {
    let e = (-d.abs()).exp();
    let l = e.ln_1p();
    // ln r = ln 2 - softplus(d), ln(2 - r) = ln 2 - softplus(-d)
    let (sp_pos, sp_neg) = if d > 0.0 { (d + l, l) } else { (l, -d + l) };
    let (r, s) = if d > 0.0 {
        (2.0 * e / (1.0 + e), 2.0 / (1.0 + e))
    } else {
        (2.0 / (1.0 + e), 2.0 * e / (1.0 + e))
    };
    let ln2 = std::f64::consts::LN_2;
    0.5 * (r * (ln2 - sp_pos) + s * (ln2 - sp_neg)) / ln2
}

/// ln q(x) - ln p(x) at x = mu_from + sigma_from z, as a quadratic in z.
fn log_ratio_coefficients(from: (f64, f64), p: (f64, f64), q: (f64, f64)) -> [f64; 3] {
    // ln N(x; m, s) = -((x - m) / s)^2 / 2 - ln s + const
    // (x - m) / s = (from.0 - m) / s + (from.1 / s) z
    let quad = |m: f64, s: f64| {
        let a = (from.0 - m) / s;
        let b = from.1 / s;
        [-0.5 * a * a - s.ln(), -a * b, -0.5 * b * b]
    };
    let lq = quad(q.0, q.1);
    let lp = quad(p.0, p.1);
    [lq[0] - lp[0], lq[1] - lp[1], lq[2] - lp[2]]
}

/// Monte-Carlo JS divergence (bits): JS = E_{x ~ m}[h(p(x) / m(x))] with
/// half of the draws taken from each component.
pub fn js_monte_carlo(draws: &StratifiedNormal, p: (f64, f64), q: (f64, f64)) -> f64 {
    let side = |from: (f64, f64)| {
        let [c0, c1, c2] = log_ratio_coefficients(from, p, q);
        compensated_sum(draws.z.iter().map(|&z| js_kernel(c0 + z * (c1 + z * c2)))) / draws.z.len() as f64
    };
    0.5 * side(p) + 0.5 * side(q)
}

/// Seeded Gaussian pairs: mu uniform in [-10, 10], sigma log-uniform in [0.01, 100].
pub fn random_gaussian_pairs(n: usize, seed: u64) -> Vec<((f64, f64), (f64, f64))> {
    let mut r = rng(seed);
    let one = |r: &mut ChaCha20Rng| {
        let mu = r.gen_range(-10.0..=10.0);
        let sigma = 10f64.powf(r.gen_range(-2.0..=2.0));
        (mu, sigma)
    };
    (0..n).map(|_| (one(&mut r), one(&mut r))).collect()
}

/// Plug-in mutual information (nats) from an equal-width 2-D histogram.
pub fn binned_mi(x: &[f64], y: &[f64], bins: usize) -> f64 {
    let index = |v: &[f64]| -> Vec<usize> {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        v.iter()
            .map(|&a| (((a - lo) / (hi - lo) * bins as f64) as usize).min(bins - 1))
            .collect()
    };
    let (ix, iy) = (index(x), index(y));
    let n = x.len() as f64;
    let mut joint = vec![vec![0.0; bins]; bins];
    let (mut px, mut py) = (vec![0.0; bins], vec![0.0; bins]);
    for (&a, &b) in ix.iter().zip(&iy) {
        joint[a][b] += 1.0 / n;
        px[a] += 1.0 / n;
        py[b] += 1.0 / n;
    }
    let mut mi = 0.0;
    for a in 0..bins {
        for b in 0..bins {
            if joint[a][b] > 0.0 {
                mi += joint[a][b] * (joint[a][b] / (px[a] * py[b])).ln();
            }
        }
    }
    mi
}

pub fn gauss(r: &mut ChaCha20Rng) -> f64 {
    StandardNormal.sample(r)
}

pub fn normal_draws(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| gauss(&mut r)).collect()
}

#[derive(Deserialize)]
pub struct ShapiroCase {
    pub name: String,
    pub sample: Vec<f64>,
    pub w: f64,
    pub p_value: f64,
}

#[derive(Deserialize)]
struct ShapiroFixture {
    cases: Vec<ShapiroCase>,
}

/// Reference W and p-values computed by scipy (see fixtures/gen_shapiro.py).
pub fn shapiro_reference() -> Vec<ShapiroCase> {
    let text = include_str!("../fixtures/shapiro_reference.json");
    serde_json::from_str::<ShapiroFixture>(text).unwrap().cases
}

pub const CP_TYPES: [&str; 9] = [
    "age",
    "disability",
    "gender",
    "nationality",
    "physical-appearance",
    "race-color",
    "religion",
    "sexual-orientation",
    "socioeconomic",
];

/// CrowS-Pairs style CSV with `per_type` rows for each of the nine bias types.
pub fn crowspairs_csv(per_type: usize) -> String {
    let mut out = String::from(",sent_more,sent_less,stereo_antistereo,bias_type,annotations\n");
    let mut row = 0;
    for t in CP_TYPES {
        for i in 0..per_type {
            let flag = if i % 4 == 3 { "antistereo" } else { "stereo" };
            writeln!(
                out,
                "{row},\"Group A person {row} did thing {i}.\",\"Group B person {row} did thing {i}.\",{flag},{t},[]"
            )
            .unwrap();
            row += 1;
        }
    }
    out
}

/// Score file lines for pair ids `0..n`; entry `i` is (bias type, stereo, anti).
pub fn score_jsonl(model: &str, measure: &str, pairs: &[(String, f64, f64)]) -> String {
    let mut out = String::new();
    for (id, (t, s, a)) in pairs.iter().enumerate() {
        let line = serde_json::json!({
            "model_id": model,
            "measure": measure,
            "pair_id": id.to_string(),
            "bias_type": t,
            "score_stereo": s,
            "score_anti": a,
        });
        writeln!(out, "{line}").unwrap();
    }
    out
}

/// Seeded synthetic PLL-like scores for the CrowS-Pairs fixture: negative
/// log-probabilities with a model-specific stereotype shift.
pub fn synthetic_pll(per_type: usize, shift: f64, seed: u64) -> Vec<(String, f64, f64)> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    for t in CP_TYPES {
        for _ in 0..per_type {
            let base = -40.0 + 6.0 * gauss(&mut r);
            let s = base + shift + 1.5 * gauss(&mut r);
            let a = base + 1.5 * gauss(&mut r);
            out.push((t.to_string(), s, a));
        }
    }
    out
}

/// Model name, stereo-win count and anti-win margin of the rank fixture.
pub const RANK_FIXTURE_MODELS: [(&str, usize, f64); 3] = [("model-a", 754, 0.5), ("model-b", 755, 2.0), ("model-c", 756, 8.0)];
pub const RANK_FIXTURE_PAIRS: usize = 1508;

/// Three models over 1,508 pairs. In each model the stereotype-winning
/// pairs beat the anti sentence by a small margin and the remaining pairs
/// lose by a model-specific large margin. Win counts differ by one pair, so
/// the indicator scores sit within 0.14 of 50 and reorder under subsampling,
/// while the anti-win margins keep the fitted Gaussians far apart.
pub fn rank_fixture(seed: u64) -> std::collections::BTreeMap<String, pllbias::ScoreSet> {
    use rand::seq::SliceRandom;
    let mut r = rng(seed);
    let base: Vec<f64> = (0..RANK_FIXTURE_PAIRS).map(|_| -40.0 + 6.0 * gauss(&mut r)).collect();
    let mut out = std::collections::BTreeMap::new();
    for (model, wins, margin) in RANK_FIXTURE_MODELS {
        let mut ids: Vec<usize> = (0..RANK_FIXTURE_PAIRS).collect();
        ids.shuffle(&mut r);
        let mut stereo_wins = vec![false; RANK_FIXTURE_PAIRS];
        for &i in &ids[..wins] {
            stereo_wins[i] = true;
        }
        let entries = (0..RANK_FIXTURE_PAIRS)
            .map(|i| {
                let anti = base[i] + 0.5 * gauss(&mut r);
                let gap = 0.05 * (1.0 + r.gen::<f64>());
                let stereo = if stereo_wins[i] { anti + gap } else { anti - margin * (1.0 + 0.2 * gauss(&mut r).abs()) };
                pllbias::ScoredPair {
                    pair_id: format!("{i:04}"),
                    bias_type: CP_TYPES[i % CP_TYPES.len()].to_string(),
                    model_id: model.to_string(),
                    measure: pllbias::ScoreMeasure::Aul,
                    score_stereo: stereo,
                    score_anti: anti,
                }
            })
            .collect();
        out.insert(model.to_string(), pllbias::ScoreSet::new(entries).unwrap());
    }
    out
}
