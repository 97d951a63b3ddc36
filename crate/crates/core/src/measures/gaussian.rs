use crate::num::Scalar;

use super::MeasureError;

const MIN_SIGMA: f64 = 1e-9;

/// Univariate Gaussian summary N(mu, sigma^2) of a PLL score set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian<T> {
    mu: T,
    sigma: T,
    n: Option<usize>,
}

impl<T: Scalar> Gaussian<T> {
    /// A parametric Gaussian not fitted from data.
    pub fn new(mu: T, sigma: T) -> Result<Self, MeasureError> {
        if !mu.is_finite() || !sigma.is_finite() || sigma <= T::zero() {
            return Err(MeasureError::InvalidParameters {
                mu: mu.to_f64().unwrap_or(f64::NAN),
                sigma: sigma.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self { mu, sigma, n: None })
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    /// Number of scores the summary was fitted from; `None` for parametric ones.
    pub fn sample_size(&self) -> Option<usize> {
        self.n
    }

    pub fn same_parameters(&self, other: &Self) -> bool {
        self.mu == other.mu && self.sigma == other.sigma
    }

    pub fn ln_pdf(&self, x: T) -> T {
        let z = (x - self.mu) / self.sigma;
        let half = T::lit(0.5);
        -self.sigma.ln() - half * (T::TAU()).ln() - half * z * z
    }

    pub fn pdf(&self, x: T) -> T {
        self.ln_pdf(x).exp()
    }

    /// Same sigma, mean moved by `offset`.
    pub fn shifted(&self, offset: T) -> Self {
        Self {
            mu: self.mu + offset,
            ..*self
        }
    }
}

/// Mean and n-1 sample standard deviation of `scores`.
pub fn fit_gaussian<T: Scalar>(scores: &[T]) -> Result<Gaussian<T>, MeasureError> {
    let n = scores.len();
    if n < 2 {
        return Err(MeasureError::TooFewSamples(n));
    }
    if let Some(i) = scores.iter().position(|v| !v.is_finite()) {
        return Err(MeasureError::NonFinite(i));
    }
    let count = T::from_count(n);
    let mu = scores.iter().copied().sum::<T>() / count;
    let ss: T = scores.iter().map(|&v| (v - mu) * (v - mu)).sum();
    let sigma = (ss / (count - T::one())).sqrt();
    if sigma < T::lit(MIN_SIGMA) {
        return Err(MeasureError::DegenerateDistribution(sigma.to_f64().unwrap_or(0.0)));
    }
    Ok(Gaussian { mu, sigma, n: Some(n) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_fit() {
        let g = fit_gaussian(&[0.0, 2.0]).unwrap();
        assert_eq!(g.mu(), 1.0);
        assert!((g.sigma() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(g.sample_size(), Some(2));
    }

    #[test]
    fn constant_scores_are_degenerate() {
        assert!(matches!(fit_gaussian(&[5.0, 5.0, 5.0]), Err(MeasureError::DegenerateDistribution(_))));
        assert!(matches!(fit_gaussian(&[1.0]), Err(MeasureError::TooFewSamples(1))));
        assert!(matches!(fit_gaussian(&[1.0, f64::NAN]), Err(MeasureError::NonFinite(1))));
    }

    #[test]
    fn works_in_single_precision() {
        let g = fit_gaussian(&[1.0f32, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(g.mu(), 2.5);
        assert!((g.sigma() - 1.290_994_4).abs() < 1e-6);
    }

    #[test]
    fn parametric_validation() {
        assert!(Gaussian::new(0.0, 0.0).is_err());
        assert!(Gaussian::new(f64::INFINITY, 1.0).is_err());
        let g = Gaussian::new(0.0f64, 1.0).unwrap();
        assert!((g.pdf(0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
    }
}
