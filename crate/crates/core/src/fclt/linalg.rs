//! Dense Cholesky factorization with diagonal jitter.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

pub(crate) const JITTER_START: f64 = 1e-10;
pub(crate) const JITTER_MAX: f64 = 1e-6;

/// Lower-triangular factor of a symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub dim: usize,
    /// Relative jitter that made the factorization succeed.
    pub jitter: f64,
    pub(crate) l: Vec<f64>,
}

impl Factor {
    /// `L z`.
    pub fn apply(&self, z: &[f64], out: &mut [f64]) {
        let d = self.dim;
        for i in 0..d {
            let row = &self.l[i * d..i * d + i + 1];
            out[i] = row.iter().zip(z).map(|(a, b)| a * b).sum();
        }
    }

    /// Entry `(i, j)` of `L`.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.l[i * self.dim + j]
        }
    }
}

fn try_cholesky(a: &[f64], d: usize, shift: f64) -> Option<Vec<f64>> {
    let mut l = alloc::vec![0.0; d * d];
    for i in 0..d {
        let (done, rest) = l.split_at_mut(i * d);
        let ri = &mut rest[..d];
        for j in 0..=i {
            let rj = if j == i { None } else { Some(&done[j * d..j * d + j]) };
            let dot: f64 = match rj {
                Some(rj) => ri[..j].iter().zip(rj).map(|(x, y)| x * y).sum(),
                None => ri[..j].iter().map(|x| x * x).sum(),
            };
            let v = a[i * d + j] - dot;
            if j == i {
                let diag = v + shift;
                if !(diag > 0.0) {
                    return None;
                }
                ri[i] = diag.sqrt();
            } else {
                ri[j] = v / done[j * d + j];
            }
        }
    }
    Some(l)
}

/// Factor `a + eps * mean(diag a) * I` for the smallest `eps` in
/// `1e-10, 1e-9, ..., 1e-6` that works.
pub fn cholesky_with_jitter(a: &[f64], d: usize) -> Result<Factor> {
    let tm = (0..d).map(|i| a[i * d + i]).sum::<f64>() / d.max(1) as f64;
    let scale = if tm > 0.0 { tm } else { 1.0 };
    let mut eps = JITTER_START;
    while eps <= JITTER_MAX * (1.0 + 1e-9) {
        if let Some(l) = try_cholesky(a, d, eps * scale) {
            return Ok(Factor { dim: d, jitter: eps, l });
        }
        eps *= 10.0;
    }
    Err(Error::NotPositiveDefinite { jitter: JITTER_MAX })
}
