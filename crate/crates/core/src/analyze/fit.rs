use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// Least-squares fit of `c0 exp(-alpha t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub c0: f64,
    /// Decay rate in 1/µs.
    pub alpha: f64,
    /// Covariance of `(c0, alpha)`.
    pub covariance: [[f64; 2]; 2],
    pub r2: f64,
    /// Sum of squared residuals.
    pub ssr: f64,
    pub iterations: usize,
}

impl DecayFit {
    /// `1 / alpha` in µs.
    pub fn lifetime(&self) -> f64 {
        1.0 / self.alpha
    }

    pub fn alpha_se(&self) -> f64 {
        self.covariance[1][1].max(0.0).sqrt()
    }
}

/// Ordinary least squares `y = slope x + intercept`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

fn linear(xs: &[f64], ys: &[f64]) -> Result<LinearFit, AnalysisError> {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * n * mx.abs().max(1.0) {
        return Err(AnalysisError::Degenerate);
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sst: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ssr: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    let r2 = if sst == 0.0 { 1.0 } else { 1.0 - ssr / sst };
    Ok(LinearFit { slope, intercept, r2 })
}

fn ssr(samples: &[(f64, f64)], c0: f64, alpha: f64) -> f64 {
    samples.iter().map(|&(t, y)| (y - c0 * (-alpha * t).exp()).powi(2)).sum()
}

/// Levenberg-Marquardt fit of `c0 exp(-alpha t)` started from a log-linear
/// regression on the positive samples.
pub fn fit_decay(samples: &[(f64, f64)]) -> Result<DecayFit, AnalysisError> {
    if samples.len() < 3 {
        return Err(AnalysisError::TooFewSamples { needed: 3, found: samples.len() });
    }
    if let Some(&(t, _)) = samples.iter().find(|s| !(s.0 >= 0.0) || !s.1.is_finite()) {
        return Err(AnalysisError::OutOfRange(t));
    }
    let positive: Vec<(f64, f64)> = samples.iter().copied().filter(|s| s.1 > 0.0).collect();
    if positive.is_empty() {
        return Err(AnalysisError::NonPositive);
    }
    let ts: Vec<f64> = samples.iter().map(|s| s.0).collect();
    if ts.iter().all(|&t| t == ts[0]) {
        return Err(AnalysisError::Degenerate);
    }
    let (mut c0, mut alpha) = if positive.len() >= 2 {
        let xs: Vec<f64> = positive.iter().map(|s| s.0).collect();
        let ys: Vec<f64> = positive.iter().map(|s| s.1.ln()).collect();
        match linear(&xs, &ys) {
            Ok(l) => (l.intercept.exp(), -l.slope),
            Err(_) => (positive[0].1, 0.0),
        }
    } else {
        (positive[0].1, 0.0)
    };
    let mut lambda = 1e-3;
    let mut cost = ssr(samples, c0, alpha);
    let mut iterations = 0;
    for _ in 0..200 {
        iterations += 1;
        // J^T J and J^T r for residuals r = y - f
        let (mut a, mut g) = ([[0.0; 2]; 2], [0.0; 2]);
        for &(t, y) in samples {
            let e = (-alpha * t).exp();
            let j = [e, -c0 * t * e];
            let r = y - c0 * e;
            for p in 0..2 {
                g[p] += j[p] * r;
                for q in 0..2 {
                    a[p][q] += j[p] * j[q];
                }
            }
        }
        let mut improved = false;
        while lambda < 1e12 {
            let m = [[a[0][0] * (1.0 + lambda), a[0][1]], [a[1][0], a[1][1] * (1.0 + lambda)]];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            if det.abs() < 1e-300 {
                lambda *= 10.0;
                continue;
            }
            let d0 = (m[1][1] * g[0] - m[0][1] * g[1]) / det;
            let d1 = (m[0][0] * g[1] - m[1][0] * g[0]) / det;
            let trial = ssr(samples, c0 + d0, alpha + d1);
            if trial < cost {
                let done = (cost - trial) <= 1e-15 * cost.max(1e-300) || (d0.abs() < 1e-14 * c0.abs().max(1e-12) && d1.abs() < 1e-14);
                c0 += d0;
                alpha += d1;
                cost = trial;
                lambda = (lambda / 10.0).max(1e-12);
                improved = !done;
                break;
            }
            lambda *= 10.0;
        }
        if !improved || cost == 0.0 {
            break;
        }
    }
    let n = samples.len() as f64;
    let mut jtj = [[0.0; 2]; 2];
    for &(t, _) in samples {
        let e = (-alpha * t).exp();
        let j = [e, -c0 * t * e];
        for p in 0..2 {
            for q in 0..2 {
                jtj[p][q] += j[p] * j[q];
            }
        }
    }
    let det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
    let s2 = cost / (n - 2.0).max(1.0);
    let covariance = if det.abs() > 0.0 {
        [[s2 * jtj[1][1] / det, -s2 * jtj[0][1] / det], [-s2 * jtj[1][0] / det, s2 * jtj[0][0] / det]]
    } else {
        [[f64::INFINITY; 2]; 2]
    };
    let mean = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sst: f64 = samples.iter().map(|s| (s.1 - mean).powi(2)).sum();
    let r2 = if sst == 0.0 { 1.0 } else { 1.0 - cost / sst };
    Ok(DecayFit { c0, alpha, covariance, r2, ssr: cost, iterations })
}

/// OLS of decay rate against GHZ size, `points = [(N, alpha)]`.
pub fn fit_scaling(points: &[(f64, f64)]) -> Result<LinearFit, AnalysisError> {
    if points.len() < 2 {
        return Err(AnalysisError::TooFewSamples { needed: 2, found: points.len() });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    linear(&xs, &ys)
}

/// Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, AnalysisError> {
    if xs.len() != ys.len() {
        return Err(AnalysisError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(AnalysisError::TooFewSamples { needed: 2, found: xs.len() });
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return Err(AnalysisError::ZeroVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential() {
        let s: Vec<(f64, f64)> = (0..10).map(|i| (i as f64 * 5.0, 0.9 * (-0.05 * i as f64 * 5.0).exp())).collect();
        let f = fit_decay(&s).unwrap();
        assert!((f.alpha - 0.05).abs() < 1e-10);
        assert!((f.c0 - 0.9).abs() < 1e-10);
        assert!(f.ssr < 1e-10);
        assert!((f.lifetime() - 20.0).abs() < 1e-7);
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(fit_decay(&[(0.0, 1.0), (1.0, 0.5)]), Err(AnalysisError::TooFewSamples { .. })));
        assert_eq!(fit_decay(&[(0.0, -1.0), (1.0, 0.0), (2.0, -0.1)]), Err(AnalysisError::NonPositive));
        assert_eq!(fit_decay(&[(1.0, 1.0), (1.0, 0.5), (1.0, 0.2)]), Err(AnalysisError::Degenerate));
    }

    #[test]
    fn pearson_extremes() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let down: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        assert!((pearson(&xs, &down).unwrap() + 1.0).abs() < 1e-15);
        assert!((pearson(&xs, &xs).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(pearson(&xs, &[1.0; 10]), Err(AnalysisError::ZeroVariance));
    }
}
