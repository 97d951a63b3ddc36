use crate::num::Scalar;

use super::Gaussian;

/// Closed-form KL(p || q) between univariate Gaussians, in nats.
pub fn kl_gaussian<T: Scalar>(p: &Gaussian<T>, q: &Gaussian<T>) -> T {
    let half = T::lit(0.5);
    let dmu = p.mu() - q.mu();
    let kl = (q.sigma() / p.sigma()).ln()
        + (p.sigma() * p.sigma() + dmu * dmu) / (T::lit(2.0) * q.sigma() * q.sigma())
        - half;
    kl.max(T::zero())
}

/// KLS = 100 * max(KL(st||at), KL(at||st)) / (KL(st||at) + KL(at||st)).
/// Identical distributions score exactly 50.
pub fn kls<T: Scalar>(p_st: &Gaussian<T>, p_at: &Gaussian<T>) -> T {
    let forward = kl_gaussian(p_st, p_at);
    let backward = kl_gaussian(p_at, p_st);
    let eps = T::lit(1e-12);
    if forward < eps && backward < eps {
        return T::lit(50.0);
    }
    T::lit(100.0) * forward.max(backward) / (forward + backward)
}

/// Simpson intervals per integration panel (even).
pub const JS_PANEL_INTERVALS: usize = 96;
/// Half-width of each component's resolved window, in its own sigmas.
const WINDOW_SIGMAS: f64 = 12.0;
/// Panel breakpoint spacing inside a window, in the component's sigmas.
const BREAK_STEP_SIGMAS: f64 = 0.5;
/// Outer span beyond the means, in units of the larger sigma.
const OUTER_SIGMAS: f64 = 10.0;

fn log_add_exp<T: Scalar>(a: T, b: T) -> T {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Pointwise JS integrand (nats): p ln(p/m)/2 + q ln(q/m)/2 with m = (p+q)/2.
fn js_integrand<T: Scalar>(p: &Gaussian<T>, q: &Gaussian<T>, x: T) -> T {
    let lp = p.ln_pdf(x);
    let lq = q.ln_pdf(x);
    let lm = log_add_exp(lp, lq) - T::LN_2();
    let half = T::lit(0.5);
    half * (lp.exp() * (lp - lm)) + half * (lq.exp() * (lq - lm))
}

/// Panel breakpoints: the outer span ends plus a fine lattice over each
/// component's own window, so narrow components are resolved even when the
/// other one is wide.
fn breakpoints<T: Scalar>(p: &Gaussian<T>, q: &Gaussian<T>) -> Vec<T> {
    let max_sigma = p.sigma().max(q.sigma());
    let outer = T::lit(OUTER_SIGMAS) * max_sigma;
    let mut pts = vec![p.mu().min(q.mu()) - outer, p.mu().max(q.mu()) + outer];
    let steps = (2.0 * WINDOW_SIGMAS / BREAK_STEP_SIGMAS).round() as usize;
    for g in [p, q] {
        for k in 0..=steps {
            let offset = T::lit(-WINDOW_SIGMAS + BREAK_STEP_SIGMAS * k as f64);
            pts.push(g.mu() + offset * g.sigma());
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    pts.dedup_by(|a, b| *a <= *b);
    pts
}

fn simpson<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T, intervals: usize) -> T {
    let h = (b - a) / T::from_count(intervals);
    let mut odd = T::zero();
    let mut even = T::zero();
    for i in 1..intervals {
        let v = f(a + h * T::from_count(i));
        if i % 2 == 1 {
            odd = odd + v;
        } else {
            even = even + v;
        }
    }
    (f(a) + f(b) + T::lit(4.0) * odd + T::lit(2.0) * even) * h / T::lit(3.0)
}

/// Jensen-Shannon divergence between two Gaussians in bits, in [0, 1].
///
/// The mixture (p+q)/2 is not Gaussian, so the divergence is integrated with
/// composite Simpson's rule over panels that cover
/// `[min(mu) - 10 max(sigma), max(mu) + 10 max(sigma)]` and every
/// component's ±12 sigma window at half-sigma resolution. The result is
/// exactly symmetric in its arguments and exactly 0 for equal parameters.
pub fn js_gaussian<T: Scalar>(p: &Gaussian<T>, q: &Gaussian<T>) -> T {
    if p.same_parameters(q) {
        return T::zero();
    }
    let f = |x: T| js_integrand(p, q, x);
    let pts = breakpoints(p, q);
    let nats: T = pts
        .windows(2)
        .map(|w| simpson(&f, w[0], w[1], JS_PANEL_INTERVALS))
        .sum();
    (nats / T::LN_2()).max(T::zero()).min(T::one())
}

/// JSS = 100 * (1 - JS(st||at)) / (1 + |sigma_st - sigma_at|).
pub fn jss<T: Scalar>(p_st: &Gaussian<T>, p_at: &Gaussian<T>) -> T {
    let js = js_gaussian(p_st, p_at);
    let dsigma = (p_st.sigma() - p_at.sigma()).abs();
    jss_from_parts(js, dsigma)
}

pub(crate) fn jss_from_parts<T: Scalar>(js: T, dsigma: T) -> T {
    T::lit(100.0) * (T::one() - js) / (T::one() + dsigma)
}
