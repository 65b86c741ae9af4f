use crate::{Error, Result};

/// Uniform time grid `t_k = k * dt`, `k = 0..=n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dt: f64,
    n: usize,
}

impl Grid {
    /// Grid on `[0, horizon]` with step `dt`. The horizon is rounded to the
    /// nearest whole number of steps.
    pub fn new(dt: f64, horizon: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::param("dt", "must be positive and finite"));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::param("horizon", "must be positive and finite"));
        }
        let n = libm::round(horizon / dt) as usize;
        if n == 0 {
            return Err(Error::param("dt", "larger than the horizon"));
        }
        Ok(Grid { dt, n })
    }

    pub fn with_steps(dt: f64, n: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) || n == 0 {
            return Err(Error::param("dt", "must be positive with at least one step"));
        }
        Ok(Grid { dt, n })
    }

    #[inline]
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of steps; the grid has `steps() + 1` points.
    #[inline]
    pub fn steps(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn t(&self, k: usize) -> f64 {
        self.dt * k as f64
    }

    #[inline]
    pub fn horizon(&self) -> f64 {
        self.t(self.n)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(move |k| self.t(k))
    }

    /// Index of the nearest grid point, clamped to the grid.
    pub fn index_of(&self, t: f64) -> usize {
        let k = libm::round(t / self.dt);
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(self.n)
        }
    }

    /// Grid with half the step on the same horizon.
    pub fn refined(&self) -> Grid {
        Grid {
            dt: 0.5 * self.dt,
            n: 2 * self.n,
        }
    }

    /// Bin of a duration: 0 for `x <= 0`, `k` for `x` in `(t_{k-1}, t_k]`,
    /// `n + 1` beyond the horizon.
    #[inline]
    pub(crate) fn bin(&self, x: f64) -> usize {
        if x <= 0.0 {
            return 0;
        }
        let k = libm::ceil(x / self.dt);
        if k > self.n as f64 {
            self.n + 1
        } else {
            k as usize
        }
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.n == other.n && (self.dt - other.dt).abs() <= 1e-12 * self.dt
    }
}
