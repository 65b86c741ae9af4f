//! Product-integration weights for `int_0^{t_i} K(t_i - s) y(s) ds` on a
//! uniform grid.
//!
//! Each lag cell `p` (ages between `p dt` and `(p + 1) dt`) contributes
//! `dt * (alpha_p y_j + beta_p y_{j+1})` with `j = i - 1 - p`. Smooth cells
//! use the trapezoid rule; cells flagged as steep use the midpoint value of
//! the kernel, read from a half-step tabulation.

use alloc::vec::Vec;

/// A kernel cell is steep when it moves by more than this fraction of the
/// kernel's sup norm within one step.
pub(crate) const STEEP_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Conv {
    dt: f64,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl Conv {
    /// Plain trapezoid weights from grid values `k[0..=n]`.
    pub fn trapezoid(k: &[f64], dt: f64) -> Self {
        let n = k.len() - 1;
        Conv {
            dt,
            alpha: (0..n).map(|p| 0.5 * k[p + 1]).collect(),
            beta: (0..n).map(|p| 0.5 * k[p]).collect(),
        }
    }

    /// Weights from a half-step tabulation `half[0..=2n]` with the given
    /// steep-cell flags.
    pub fn from_half(half: &[f64], flags: &[bool], dt: f64) -> Self {
        let n = (half.len() - 1) / 2;
        let mut alpha = Vec::with_capacity(n);
        let mut beta = Vec::with_capacity(n);
        for p in 0..n {
            if flags[p] {
                let m = 0.5 * half[2 * p + 1];
                alpha.push(m);
                beta.push(m);
            } else {
                alpha.push(0.5 * half[2 * p + 2]);
                beta.push(0.5 * half[2 * p]);
            }
        }
        Conv { dt, alpha, beta }
    }

    /// Convolution at step `i` without the `y_i` term.
    #[inline]
    pub fn partial(&self, y: &[f64], i: usize) -> f64 {
        if i == 0 {
            return 0.0;
        }
        let mut s = 0.0;
        // j = 0 .. i-1 with alpha_{i-1-j} y_j, and y_{j+1} for j < i-1.
        let a = &self.alpha[..i];
        let b = &self.beta[1..i];
        for j in 0..i {
            s += a[i - 1 - j] * y[j];
        }
        for m in 1..i {
            s += b[i - 1 - m] * y[m];
        }
        self.dt * s
    }

    /// Coefficient of `y_i` in the convolution at step `i >= 1`.
    #[inline]
    pub fn head(&self) -> f64 {
        self.dt * self.beta[0]
    }

    /// Full convolution at step `i`.
    pub fn at(&self, y: &[f64], i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.partial(y, i) + self.head() * y[i]
        }
    }
}

/// Steep-cell flags of a half-step tabulation.
pub(crate) fn steep_cells(half: &[f64]) -> Vec<bool> {
    let n = (half.len() - 1) / 2;
    let sup = half.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    (0..n)
        .map(|p| sup > 0.0 && (half[2 * p + 2] - half[2 * p]).abs() > STEEP_FRACTION * sup)
        .collect()
}

/// Elementwise union of flag vectors.
pub(crate) fn union(flags: &[Vec<bool>], n: usize) -> Vec<bool> {
    (0..n).map(|p| flags.iter().any(|f| f[p])).collect()
}

/// Every other entry of a half-step tabulation.
pub(crate) fn coarse(half: &[f64]) -> Vec<f64> {
    half.iter().step_by(2).copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_convolution_is_exact_for_linear_data() {
        let dt = 0.1;
        let k: Vec<f64> = (0..=10).map(|_| 1.0).collect();
        let y: Vec<f64> = (0..=10).map(|j| j as f64 * dt).collect();
        let c = Conv::trapezoid(&k, dt);
        // int_0^1 s ds
        assert!((c.at(&y, 10) - 0.5).abs() < 1e-14);
        assert!((c.partial(&y, 10) + c.head() * y[10] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn steep_flags_mark_jumps() {
        let half: Vec<f64> = (0..=20).map(|j| if j < 9 { 1.0 } else { 0.0 }).collect();
        let f = steep_cells(&half);
        assert_eq!(f.iter().filter(|&&b| b).count(), 1);
        assert!(f[4]);
    }
}
