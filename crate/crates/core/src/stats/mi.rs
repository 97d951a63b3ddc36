use statrs::function::gamma::digamma;

use super::{check_finite, StatsError};

pub const DEFAULT_NEIGHBORS: usize = 3;

/// Distance from point `i` to its k-th nearest neighbour under the max-norm.
/// Scans outward in x order and stops once the x gap alone exceeds the
/// current k-th best distance.
fn kth_neighbor_distance(order: &[usize], rank: usize, x: &[f64], y: &[f64], k: usize) -> f64 {
    let i = order[rank];
    let mut best: Vec<f64> = Vec::with_capacity(k + 1);
    let push = |d: f64, best: &mut Vec<f64>| {
        if best.len() < k || d < best[k - 1] {
            let at = best.partition_point(|&b| b <= d);
            best.insert(at, d);
            best.truncate(k);
        }
    };
    let (mut lo, mut hi) = (rank, rank);
    loop {
        let bound = if best.len() == k { best[k - 1] } else { f64::INFINITY };
        let left = (lo > 0).then(|| x[i] - x[order[lo - 1]]);
        let right = (hi + 1 < order.len()).then(|| x[order[hi + 1]] - x[i]);
        let step_left = match (left, right) {
            (Some(l), Some(r)) => l <= r,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => break,
        };
        let j = if step_left {
            lo -= 1;
            order[lo]
        } else {
            hi += 1;
            order[hi]
        };
        let dx = (x[j] - x[i]).abs();
        if dx > bound {
            break;
        }
        push(dx.max((y[j] - y[i]).abs()), &mut best);
    }
    best[k - 1]
}

/// Number of points strictly within `eps` of `v` in a sorted marginal, excluding `v` itself.
fn count_within(sorted: &[f64], v: f64, eps: f64) -> usize {
    let lo = sorted.partition_point(|&s| s <= v - eps);
    let hi = sorted.partition_point(|&s| s < v + eps);
    hi.saturating_sub(lo).saturating_sub(1)
}

/// Kraskov-Stögbauer-Grassberger (algorithm 1) mutual information estimate
/// in nats, with max-norm k-nearest neighbours. Negative estimates are
/// clamped to zero.
pub fn mutual_information(x: &[f64], y: &[f64], k: usize) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if k == 0 || n < k + 1 {
        return Err(StatsError::SampleSize { n, min: k.max(1) + 1, max: usize::MAX });
    }
    check_finite(x)?;
    check_finite(y)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));
    let mut xs = x.to_vec();
    xs.sort_by(f64::total_cmp);
    let mut ys = y.to_vec();
    ys.sort_by(f64::total_cmp);

    let mut marginal = vec![0.0; n];
    for (rank, &i) in order.iter().enumerate() {
        let eps = kth_neighbor_distance(&order, rank, x, y, k);
        let nx = count_within(&xs, x[i], eps);
        let ny = count_within(&ys, y[i], eps);
        marginal[i] = digamma((nx + 1) as f64) + digamma((ny + 1) as f64);
    }
    let avg = marginal.iter().sum::<f64>() / n as f64;
    let mi = digamma(k as f64) + digamma(n as f64) - avg;
    Ok(mi.max(0.0))
}
