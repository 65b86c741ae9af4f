//! Sample moments with standard errors.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::infectivity::Estimate;

/// Mean of `xs` with its standard error.
pub fn mean_se(xs: &[f64]) -> Estimate {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return Estimate::exact(0.0);
    }
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return Estimate::exact(m);
    }
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    Estimate { value: m, se: (v / n).sqrt() }
}

/// Unbiased sample covariance of `p` variables with jackknife standard
/// errors, both stored row-major `p x p`.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariance {
    pub dim: usize,
    pub mean: Vec<f64>,
    pub cov: Vec<f64>,
    pub se: Vec<f64>,
}

impl Covariance {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.cov[a * self.dim + b]
    }

    pub fn se_of(&self, a: usize, b: usize) -> f64 {
        self.se[a * self.dim + b]
    }

    /// Correlation of entries `a` and `b`; zero when either variance is.
    pub fn corr(&self, a: usize, b: usize) -> f64 {
        let d = (self.get(a, a) * self.get(b, b)).sqrt();
        if d > 0.0 {
            self.get(a, b) / d
        } else {
            0.0
        }
    }
}

/// Covariance of the rows of `samples`, each a vector of length `dim`.
///
/// Needs at least two samples; the jackknife standard errors need three.
pub fn sample_covariance(samples: &[Vec<f64>]) -> Covariance {
    let r = samples.len();
    let p = samples.first().map_or(0, Vec::len);
    let mut mean = vec![0.0; p];
    for x in samples {
        for (m, v) in mean.iter_mut().zip(x) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= r.max(1) as f64;
    }
    let centered: Vec<Vec<f64>> = samples
        .iter()
        .map(|x| x.iter().zip(&mean).map(|(v, m)| v - m).collect())
        .collect();
    let mut cov = vec![0.0; p * p];
    let mut se = vec![0.0; p * p];
    if r < 2 {
        return Covariance { dim: p, mean, cov, se };
    }
    let rf = r as f64;
    for a in 0..p {
        for b in a..p {
            // Centered data have zero column sums, which keeps the
            // leave-one-out formula short.
            let sxy: f64 = centered.iter().map(|x| x[a] * x[b]).sum();
            let c = sxy / (rf - 1.0);
            let mut s = 0.0;
            if r > 2 {
                let mut loo = Vec::with_capacity(r);
                for x in &centered {
                    let (xa, xb) = (x[a], x[b]);
                    loo.push((sxy - xa * xb - xa * xb / (rf - 1.0)) / (rf - 2.0));
                }
                let m = loo.iter().sum::<f64>() / rf;
                s = ((rf - 1.0) / rf * loo.iter().map(|v| (v - m) * (v - m)).sum::<f64>()).sqrt();
            }
            cov[a * p + b] = c;
            cov[b * p + a] = c;
            se[a * p + b] = s;
            se[b * p + a] = s;
        }
    }
    Covariance { dim: p, mean, cov, se }
}

/// Chi-squared homogeneity test of two count histograms over the same
/// categories. Categories with small pooled counts are merged with their
/// neighbours until every expected count is at least 5.
///
/// Returns `(statistic, degrees of freedom, p-value)`.
pub fn two_sample_chi2(a: &[u64], b: &[u64]) -> (f64, usize, f64) {
    let na: f64 = a.iter().sum::<u64>() as f64;
    let nb: f64 = b.iter().sum::<u64>() as f64;
    let total = na + nb;
    let min_pooled = 5.0 * total / na.min(nb);
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut ca, mut cb) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        ca += *x as f64;
        cb += *y as f64;
        if ca + cb >= min_pooled {
            cells.push((ca, cb));
            ca = 0.0;
            cb = 0.0;
        }
    }
    if ca + cb > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += ca;
                last.1 += cb;
            }
            None => cells.push((ca, cb)),
        }
    }
    let mut stat = 0.0;
    for (x, y) in &cells {
        let pooled = x + y;
        let (ea, eb) = (pooled * na / total, pooled * nb / total);
        stat += (x - ea) * (x - ea) / ea + (y - eb) * (y - eb) / eb;
    }
    let dof = cells.len().saturating_sub(1);
    let p = if dof == 0 { 1.0 } else { crate::math::chi2_sf(stat, dof as f64) };
    (stat, dof, p)
}
