//! Joint law of a compartment clock pair `(U, V)` together with the
//! infectivity coefficients, and its weighted rectangle moments.
//!
//! Every built-in model is described by two clocks `U <= V` and a polynomial
//! infectivity living either on `[U, V)` or on `[0, U)`. A rectangle query
//! returns, for `U` in `(u.lo, u.hi]` and `V` in `(v.lo, v.hi]`, the ten
//! numbers `E[w]` with `w = (1, c_i, c_i c_j)`.

use alloc::sync::Arc;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::duration::DurationLaw;
use crate::math::{exprel, gl_split, panels, GL_W, GL_X};

pub(crate) type W10 = [f64; 10];

pub(crate) const ZERO10: W10 = [0.0; 10];

/// Half-open interval `(lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Iv {
    pub lo: f64,
    pub hi: f64,
}

impl Iv {
    pub const ALL: Iv = Iv {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn le(t: f64) -> Iv {
        Iv {
            lo: f64::NEG_INFINITY,
            hi: t,
        }
    }

    pub fn gt(t: f64) -> Iv {
        Iv {
            lo: t,
            hi: f64::INFINITY,
        }
    }

    pub fn meet(self, o: Iv) -> Iv {
        Iv {
            lo: self.lo.max(o.lo),
            hi: self.hi.min(o.hi),
        }
    }

    pub fn shift(self, by: f64) -> Iv {
        Iv {
            lo: self.lo - by,
            hi: self.hi - by,
        }
    }

    pub fn is_empty(self) -> bool {
        !(self.hi > self.lo)
    }

    pub fn contains(self, x: f64) -> bool {
        x > self.lo && x <= self.hi
    }
}

#[inline]
pub(crate) fn weights(c: [f64; 3]) -> W10 {
    [
        1.0,
        c[0],
        c[1],
        c[2],
        c[0] * c[0],
        c[0] * c[1],
        c[0] * c[2],
        c[1] * c[1],
        c[1] * c[2],
        c[2] * c[2],
    ]
}

#[inline]
pub(crate) fn axpy(acc: &mut W10, a: f64, w: &W10) {
    for k in 0..10 {
        acc[k] += a * w[k];
    }
}

#[inline]
pub(crate) fn scaled(a: f64, w: &W10) -> W10 {
    let mut r = ZERO10;
    axpy(&mut r, a, w);
    r
}

/// `E[lambda(t)]`-type contraction: `sum_i t^i C_i`.
#[inline]
pub(crate) fn first_moment(w: &W10, t: f64) -> f64 {
    w[1] + t * (w[2] + t * w[3])
}

/// `sum_ij t^i s^j CC_ij`.
#[inline]
pub(crate) fn second_moment(w: &W10, t: f64, s: f64) -> f64 {
    let (t2, s2) = (t * t, s * s);
    w[4] + w[5] * (t + s) + w[6] * (t2 + s2) + w[7] * t * s + w[8] * (t2 * s + t * s2) + w[9] * t2 * s2
}

/// `sum_i t^i C_i` restricted to compartment indicators is the same
/// contraction; kept separate for readability at call sites.
#[inline]
pub(crate) fn mass(w: &W10) -> f64 {
    w[0]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Profile {
    Constant(f64),
    /// Hat of height `h` over `[0, chi]`.
    Bump(f64),
}

impl Profile {
    #[inline]
    pub fn coeffs(self, chi: f64) -> [f64; 3] {
        match self {
            Profile::Constant(b) => [b, 0.0, 0.0],
            Profile::Bump(h) => [0.0, 4.0 * h / chi, -4.0 * h / (chi * chi)],
        }
    }
}

/// Where the infectivity lives relative to the clocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Support {
    /// On `[U, V)`.
    Between,
    /// On `[0, U)`.
    BeforeFirst,
}

impl Support {
    /// Clock rectangle on which `lambda(t)` may be nonzero.
    pub fn at(self, t: f64) -> (Iv, Iv) {
        match self {
            Support::Between => (Iv::le(t), Iv::gt(t)),
            Support::BeforeFirst => (Iv::gt(t), Iv::ALL),
        }
    }
}

/// Which clock the bump's width is read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum WidthFrom {
    /// `U = X`.
    First,
    /// The increment `D = V - U`.
    Increment,
}

/// `U = X`, `V = X + D` with `X` and `D` independent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct TwoStage {
    pub x: DurationLaw,
    pub d: DurationLaw,
    pub profile: Profile,
    pub width: WidthFrom,
    pub support: Support,
}

fn law_mass(law: &DurationLaw, iv: Iv) -> f64 {
    if iv.is_empty() {
        return 0.0;
    }
    let hi = if iv.hi == f64::INFINITY { 1.0 } else { law.cdf(iv.hi) };
    let lo = if iv.lo == f64::NEG_INFINITY { 0.0 } else { law.cdf(iv.lo) };
    (hi - lo).max(0.0)
}

/// Integrate `f(x)` over `(lo, hi]` with `hi` possibly infinite; tails are
/// added in doubling chunks until the law's remaining mass is negligible.
fn integrate_law<F: FnMut(f64) -> W10>(law: &DurationLaw, lo: f64, hi: f64, kinks: &[f64], mut f: F) -> W10 {
    let mut acc = ZERO10;
    let (slo, shi) = law.support();
    let lo = lo.max(slo);
    let hi = hi.min(shi);
    if !(hi > lo) {
        return acc;
    }
    let panel = 0.25 * law.scale();
    if hi.is_finite() {
        gl_vec(lo, hi, kinks, panel, &mut f, &mut acc);
        return acc;
    }
    let mut a = lo;
    let mut len = 4.0 * law.scale().max(law.mean());
    loop {
        let b = a + len;
        gl_vec(a, b, kinks, panel, &mut f, &mut acc);
        if law.sf(b) < 1e-17 {
            break;
        }
        a = b;
        len *= 2.0;
    }
    acc
}

/// Vector-valued split Gauss-Legendre, accumulated into `acc`.
fn gl_vec<F: FnMut(f64) -> W10>(a: f64, b: f64, kinks: &[f64], panel: f64, f: &mut F, acc: &mut W10) {
    for (lo, hi) in panels(a, b, kinks, panel) {
        let h = 0.5 * (hi - lo);
        let c = 0.5 * (lo + hi);
        for k in 0..4 {
            let d = h * GL_X[k];
            let w = GL_W[k] * h;
            axpy(acc, w, &f(c - d));
            axpy(acc, w, &f(c + d));
        }
    }
}

impl TwoStage {
    fn x_weight_from(&self, x: f64) -> W10 {
        weights(self.profile.coeffs(x))
    }

    /// Weighted moments over `U in u`, `V in v`.
    pub fn rect(&self, u: Iv, v: Iv) -> W10 {
        if u.is_empty() || v.is_empty() {
            return ZERO10;
        }
        let const_w = match self.profile {
            Profile::Constant(b) => Some(weights([b, 0.0, 0.0])),
            Profile::Bump(_) => None,
        };
        if let Some(x0) = self.x.atom() {
            if !u.contains(x0) {
                return ZERO10;
            }
            let dv = v.shift(x0);
            return match (const_w, self.width) {
                (Some(w), _) => scaled(law_mass(&self.d, dv), &w),
                (None, WidthFrom::First) => scaled(law_mass(&self.d, dv), &self.x_weight_from(x0)),
                (None, WidthFrom::Increment) => self.weighted(&self.d, dv),
            };
        }
        if let Some(d0) = self.d.atom() {
            let xi = u.meet(v.shift(d0));
            return match (const_w, self.width) {
                (Some(w), _) => scaled(law_mass(&self.x, xi), &w),
                (None, WidthFrom::Increment) => scaled(law_mass(&self.x, xi), &self.x_weight_from(d0)),
                (None, WidthFrom::First) => self.weighted(&self.x, xi),
            };
        }
        if let Some(w) = const_w {
            return scaled(self.mass_continuous(u, v), &w);
        }
        debug_assert_eq!(self.width, WidthFrom::First, "bump width from a continuous increment");
        self.weighted_continuous(u, v)
    }

    /// `E[w(Y); Y in iv]` for the law of the width variable.
    fn weighted(&self, law: &DurationLaw, iv: Iv) -> W10 {
        if iv.is_empty() {
            return ZERO10;
        }
        if let Some(a) = law.atom() {
            return if iv.contains(a) { self.x_weight_from(a) } else { ZERO10 };
        }
        let kinks = law.kinks();
        integrate_law(law, iv.lo, iv.hi, &kinks, |y| scaled(law.pdf(y), &self.x_weight_from(y)))
    }

    /// `P(X in u, X + D in v)` for continuous `X`, `D`.
    fn mass_continuous(&self, u: Iv, v: Iv) -> f64 {
        if let (Some(a), Some(b)) = (self.x.exponential_rate(), self.d.exponential_rate()) {
            let i = |c: f64| exp_conv_mass(a, b, u, c);
            return (i(v.hi) - i(v.lo)).max(0.0);
        }
        // Factor F_D(v.hi - x) - F_D(v.lo - x) vanishes for x >= v.hi and
        // equals F_D(v.hi - x) for x > v.lo.
        let mut total = 0.0;
        let lo = u.lo.max(0.0);
        let hi = u.hi.min(v.hi);
        if !(hi > lo) {
            return 0.0;
        }
        if v.hi == f64::INFINITY {
            total += law_mass(&self.x, Iv { lo: lo.max(v.lo), hi });
            let top = hi.min(v.lo);
            if top > lo {
                total += self.conv_integral(lo, top, |x, d| self.x.pdf(x) * d.sf(v.lo - x), v);
            }
        } else {
            total += self.conv_integral(lo, hi, |x, d| self.x.pdf(x) * (d.cdf(v.hi - x) - d.cdf(v.lo - x)), v);
        }
        total.max(0.0)
    }

    fn conv_integral<F: Fn(f64, &DurationLaw) -> f64>(&self, lo: f64, hi: f64, f: F, v: Iv) -> f64 {
        let dk = self.d.kinks();
        let xk = self.x.kinks();
        let mut kinks: Vec<f64> = Vec::with_capacity(10);
        kinks.extend_from_slice(&xk);
        for c in [v.lo, v.hi] {
            if c.is_finite() {
                kinks.push(c);
                kinks.extend(dk.iter().map(|k| c - k));
            }
        }
        let panel = 0.25 * self.x.scale().min(self.d.scale());
        if hi.is_finite() {
            return gl_split(lo, hi, &kinks, panel, |x| f(x, &self.d));
        }
        let mut s = 0.0;
        let mut a = lo;
        let mut len = 4.0 * self.x.scale().max(self.x.mean());
        loop {
            let b = a + len;
            s += gl_split(a, b, &kinks, panel, |x| f(x, &self.d));
            if self.x.sf(b) < 1e-17 {
                break;
            }
            a = b;
            len *= 2.0;
        }
        s
    }

    /// Bump with width `U = X`, both clocks continuous.
    fn weighted_continuous(&self, u: Iv, v: Iv) -> W10 {
        let lo = u.lo.max(0.0);
        let hi = u.hi.min(v.hi);
        if !(hi > lo) {
            return ZERO10;
        }
        let mut kinks: Vec<f64> = self.x.kinks().to_vec();
        for c in [v.lo, v.hi] {
            if c.is_finite() {
                kinks.push(c);
                kinks.extend(self.d.kinks().iter().map(|k| c - k));
            }
        }
        let d = self.d;
        let x = self.x;
        let (vlo, vhi) = (v.lo, v.hi);
        integrate_law(&x, lo, hi, &kinks, |t| {
            let f = if vhi == f64::INFINITY { d.sf(vlo - t) } else { d.cdf(vhi - t) - d.cdf(vlo - t) };
            scaled(x.pdf(t) * f, &self.x_weight_from(t))
        })
    }

    /// `P(U <= t)`.
    pub fn p_first(&self, t: f64) -> f64 {
        self.x.cdf(t)
    }

    /// `P(V <= t)`.
    pub fn p_second(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        if let Some(x0) = self.x.atom() {
            return self.d.cdf(t - x0);
        }
        if let Some(d0) = self.d.atom() {
            return self.x.cdf(t - d0);
        }
        self.mass_continuous(Iv::ALL, Iv::le(t))
    }
}

/// `int_{x in u, x >= 0} a e^{-a x} F_D(c - x) dx` for `D ~ Exp(b)`.
fn exp_conv_mass(a: f64, b: f64, u: Iv, c: f64) -> f64 {
    let l = u.lo.max(0.0);
    if c == f64::INFINITY {
        let h = u.hi;
        if !(h > l) {
            return 0.0;
        }
        let eh = if h == f64::INFINITY { 0.0 } else { (-a * h).exp() };
        return (-a * l).exp() - eh;
    }
    let h = u.hi.min(c);
    if !(h > l) {
        return 0.0;
    }
    let w = h - l;
    let first = (-a * l).exp() * -(-a * w).exp_m1();
    // a e^{-a l} e^{-b (c - l)} int_0^w e^{(b - a) s} ds
    let second = a * (-a * l - b * (c - l)).exp() * w * exprel((b - a) * w);
    first - second
}

/// One pre-sampled realization: clocks and coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Row {
    pub u: f64,
    pub v: f64,
    pub c: [f64; 3],
}

/// Empirical clock law of a model without closed forms.
#[derive(Debug, Clone)]
pub(crate) struct Sampled {
    pub rows: Arc<Vec<Row>>,
    pub support: Support,
}

/// Clock law of one model under one compartment mapping.
#[derive(Debug, Clone)]
pub(crate) enum ClockLaw {
    Two(TwoStage),
    Sampled(Sampled),
}

impl ClockLaw {
    pub fn support(&self) -> Support {
        match self {
            ClockLaw::Two(t) => t.support,
            ClockLaw::Sampled(s) => s.support,
        }
    }
}
