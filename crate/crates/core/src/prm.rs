//! Fourth mixed moments of compensated Poisson random measures.
//!
//! For a unit-rate Poisson random measure `Q` on the plane with compensated
//! version `Q~`, and bounded step functions `f`, `g` with bounded support,
//!
//! ```text
//! E[(int f dQ~)^2 (int g dQ~)^2] = int f^2 g^2 + 2 (int f g)^2 + int f^2 int g^2.
//! ```
//!
//! This module evaluates both sides: the right-hand side exactly, the left by
//! Monte Carlo.

use alloc::vec::Vec;
use rand::Rng as _;
use rand_distr::{Distribution, Poisson};

use crate::infectivity::Estimate;
use crate::rng::stream;
use crate::{Error, Result};

/// Axis-aligned rectangle `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        let ok = [x0, x1, y0, y1].iter().all(|v| v.is_finite()) && x1 > x0 && y1 > y0;
        if !ok {
            return Err(Error::param("rect", "needs finite bounds with x0 < x1 and y0 < y1"));
        }
        Ok(Rect { x0, x1, y0, y1 })
    }

    /// `[a, b) x [0, 1)`, for one-dimensional configurations.
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Rect::new(a, b, 0.0, 1.0)
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }
}

/// Sum of constants on rectangles.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepFunction {
    pub pieces: Vec<(Rect, f64)>,
}

impl StepFunction {
    pub fn zero() -> Self {
        StepFunction::default()
    }

    pub fn constant(on: Rect, value: f64) -> Self {
        StepFunction {
            pieces: alloc::vec![(on, value)],
        }
    }

    pub fn plus(mut self, on: Rect, value: f64) -> Self {
        self.pieces.push((on, value));
        self
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.pieces.iter().filter(|(r, _)| r.contains(x, y)).map(|(_, v)| v).sum()
    }

    fn breaks(&self, xs: &mut Vec<f64>, ys: &mut Vec<f64>) {
        for (r, _) in &self.pieces {
            xs.extend([r.x0, r.x1]);
            ys.extend([r.y0, r.y1]);
        }
    }
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// `int h(f(p), g(p)) dp` over the common refinement of both functions.
fn integrate<H: Fn(f64, f64) -> f64>(f: &StepFunction, g: &StepFunction, h: H) -> f64 {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    f.breaks(&mut xs, &mut ys);
    g.breaks(&mut xs, &mut ys);
    let (xs, ys) = (sorted_unique(xs), sorted_unique(ys));
    let mut total = 0.0;
    for xw in xs.windows(2) {
        for yw in ys.windows(2) {
            let (cx, cy) = (0.5 * (xw[0] + xw[1]), 0.5 * (yw[0] + yw[1]));
            total += h(f.eval(cx, cy), g.eval(cx, cy)) * (xw[1] - xw[0]) * (yw[1] - yw[0]);
        }
    }
    total
}

/// Exact value of the mixed fourth moment.
pub fn closed_form(f: &StepFunction, g: &StepFunction) -> f64 {
    let ffgg = integrate(f, g, |a, b| a * a * b * b);
    let fg = integrate(f, g, |a, b| a * b);
    let ff = integrate(f, g, |a, _| a * a);
    let gg = integrate(f, g, |_, b| b * b);
    ffgg + 2.0 * fg * fg + ff * gg
}

fn bounding_box(f: &StepFunction, g: &StepFunction) -> Option<Rect> {
    let mut it = f.pieces.iter().chain(&g.pieces).map(|(r, _)| *r);
    let first = it.next()?;
    Some(it.fold(first, |a, r| Rect {
        x0: a.x0.min(r.x0),
        x1: a.x1.max(r.x1),
        y0: a.y0.min(r.y0),
        y1: a.y1.max(r.y1),
    }))
}

/// Monte Carlo estimate of the mixed fourth moment from `draws` independent
/// realizations of the measure on the bounding box of the supports.
pub fn sample_moment(f: &StepFunction, g: &StepFunction, draws: usize, seed: u64) -> Result<Estimate> {
    if draws < 2 {
        return Err(Error::param("draws", "need at least two draws"));
    }
    let Some(bx) = bounding_box(f, g) else {
        return Ok(Estimate::exact(0.0));
    };
    let mean_f = integrate(f, g, |a, _| a);
    let mean_g = integrate(f, g, |_, b| b);
    let count = Poisson::new(bx.area()).map_err(|_| Error::param("rect", "area out of range"))?;
    let mut rng = stream(seed, 0);
    let mut xs = Vec::with_capacity(draws);
    for _ in 0..draws {
        let k = count.sample(&mut rng) as usize;
        let (mut sf, mut sg) = (-mean_f, -mean_g);
        for _ in 0..k {
            let x = bx.x0 + (bx.x1 - bx.x0) * rng.random::<f64>();
            let y = bx.y0 + (bx.y1 - bx.y0) * rng.random::<f64>();
            sf += f.eval(x, y);
            sg += g.eval(x, y);
        }
        xs.push(sf * sf * sg * sg);
    }
    Ok(crate::stats::mean_se(&xs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_indicator_gives_poisson_fourth_moment() {
        let f = StepFunction::constant(Rect::interval(0.0, 1.0).unwrap(), 1.0);
        assert!((closed_form(&f, &f) - 4.0).abs() < 1e-14);
        let g = StepFunction::constant(Rect::interval(1.0, 2.0).unwrap(), 1.0);
        assert!((closed_form(&f, &g) - 1.0).abs() < 1e-14);
        assert_eq!(closed_form(&f, &StepFunction::zero()), 0.0);
    }
}
