//! Special functions and quadrature rules.

#[allow(unused_imports)]
use num_traits::Float;

pub(crate) const GL_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
pub(crate) const GL_W: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Eight-point Gauss-Legendre on `[a, b]`.
#[inline]
pub fn gl8<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    let mut s = 0.0;
    for k in 0..4 {
        let d = h * GL_X[k];
        s += GL_W[k] * (f(c - d) + f(c + d));
    }
    s * h
}

/// Composite eight-point Gauss-Legendre with panels no longer than `panel`.
#[cfg(test)]
pub fn gl_composite<F: FnMut(f64) -> f64>(a: f64, b: f64, panel: f64, mut f: F) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let n = ((b - a) / panel).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    let mut s = 0.0;
    for k in 0..n {
        let lo = a + h * k as f64;
        let hi = if k + 1 == n { b } else { lo + h };
        s += gl8(lo, hi, &mut f);
    }
    s
}

/// Composite rule over `[a, b]` split at the supplied kink locations.
pub fn gl_split<F: FnMut(f64) -> f64>(a: f64, b: f64, kinks: &[f64], panel: f64, mut f: F) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    panels(a, b, kinks, panel)
        .into_iter()
        .map(|(lo, hi)| gl8(lo, hi, &mut f))
        .sum()
}

/// Sorted panel boundaries of `[a, b]` split at kinks, each piece cut into
/// panels no longer than `panel`.
pub fn panels(a: f64, b: f64, kinks: &[f64], panel: f64) -> alloc::vec::Vec<(f64, f64)> {
    let mut pts: alloc::vec::Vec<f64> = kinks
        .iter()
        .copied()
        .filter(|&k| k.is_finite() && k > a && k < b)
        .collect();
    // Densities may be non-smooth at the origin (gamma shape not an
    // integer); grade the mesh geometrically towards it.
    if a == 0.0 {
        let mut g = panel.min(b);
        for _ in 0..24 {
            g *= 0.5;
            pts.push(g);
        }
    }
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.push(b);
    let mut out = alloc::vec::Vec::new();
    let mut lo = a;
    for p in pts {
        if p > lo {
            let n = ((p - lo) / panel).ceil().max(1.0) as usize;
            let h = (p - lo) / n as f64;
            for k in 0..n {
                let l = lo + h * k as f64;
                out.push((l, if k + 1 == n { p } else { l + h }));
            }
            lo = p;
        }
    }
    out
}

/// Normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * core::f64::consts::PI).sqrt()
}

/// Regularized lower incomplete gamma function `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    let ln_pre = -x + a * x.ln() - libm::lgamma(a);
    if x < a + 1.0 {
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        for _ in 0..1000 {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * 1e-16 {
                break;
            }
        }
        (sum * ln_pre.exp()).min(1.0)
    } else {
        // Lentz continued fraction for Q.
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..1000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (1.0 - ln_pre.exp() * h).max(0.0)
    }
}

/// `(e^x - 1) / x`, stable near zero.
pub fn exprel(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        1.0 + x * (0.5 + x / 6.0)
    } else {
        x.exp_m1() / x
    }
}

/// Chi-square survival function via the incomplete gamma.
pub fn chi2_sf(x: f64, dof: f64) -> f64 {
    1.0 - gamma_p(0.5 * dof, 0.5 * x)
}
