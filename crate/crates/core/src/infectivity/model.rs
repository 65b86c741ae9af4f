use alloc::boxed::Box;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;
use once_cell::race::OnceBox;

use super::path::InfectivityPath;
use super::structure::{
    first_moment, second_moment, ClockLaw, Iv, Profile, Row, Sampled, Support, TwoStage, WidthFrom,
};
use crate::duration::DurationLaw;
use crate::rng::{stream, Rng};
use crate::{Error, Result};

/// Default Monte Carlo size for laws without closed forms.
pub const DEFAULT_MC_SAMPLES: usize = 1_000_000;
/// Default cap on rejection attempts for aged initial laws.
pub const DEFAULT_MAX_ATTEMPTS: usize = 10_000;

const MC_CHUNK: usize = 4096;

/// Which infectivity law a model plays in the epidemic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RoleTag {
    NewlyInfected,
    InitiallyExposed,
    InitiallyInfectious,
}

/// Conditioning used when aging a law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgeCondition {
    /// Keep draws whose age is still before the onset of infectivity.
    Exposed,
    /// Keep draws whose age is past the onset of infectivity.
    Infectious,
}

/// Compartment at a given infection age.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Exposed,
    Infectious,
    Recovered,
}

/// A value with its Monte Carlo standard error (zero for closed forms).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, se: 0.0 }
    }
}

/// Hölder data: continuous pieces satisfy `|l(t) - l(s)| <= C |t - s|^alpha`
/// and breakpoint CDFs satisfy `F(t) - F(s) <= C' (t - s)^rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityDescriptor {
    pub alpha: f64,
    pub rho: f64,
    pub holder_const: f64,
    pub breakpoint_const: f64,
}

/// Constant pieces satisfy any Hölder bound; this is the constant declared
/// for them.
const FLAT_HOLDER_CONST: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `beta` on `[0, eta)` with `eta ~ Exp(gamma)`.
    ConstantMarkov { beta: f64, gamma: f64 },
    /// `beta` on `[zeta, zeta + eta)`; `zeta` and `eta` independent.
    PiecewiseIndicator {
        beta: f64,
        exposed: DurationLaw,
        infectious: DurationLaw,
    },
    /// `4 h t (chi - t) / chi^2` on `[0, chi]`.
    ContinuousBump { peak: f64, infected: DurationLaw },
    /// `t -> lambda(age + t)` for `lambda` from `base`, conditioned on the age.
    AgedInitial {
        base: Arc<InfectivityModel>,
        age: DurationLaw,
        condition: AgeCondition,
        max_attempts: usize,
    },
}

/// Compartment clocks a model is read through.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Mapping {
    /// `(U, V) = (zeta, chi)`.
    Seir,
    /// `(U, V) = (chi, chi + Y)` with an independent immunity period `Y`.
    Sirs(DurationLaw),
}

struct RowCache(OnceBox<Arc<Vec<Row>>>);

impl fmt::Debug for RowCache {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.0.get().is_some() { "RowCache(filled)" } else { "RowCache(empty)" })
    }
}

/// Law of a random infectivity function.
#[derive(Debug, Clone)]
pub struct InfectivityModel {
    family: Family,
    lambda_star: f64,
    role: RoleTag,
    mc_samples: usize,
    mc_seed: u64,
    rows: Arc<RowCache>,
}

impl PartialEq for InfectivityModel {
    fn eq(&self, o: &Self) -> bool {
        self.family == o.family
            && self.lambda_star == o.lambda_star
            && self.role == o.role
            && self.mc_samples == o.mc_samples
            && self.mc_seed == o.mc_seed
    }
}

fn positive(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, "must be positive and finite"))
    }
}

fn breakpoint_law(name: &'static str, law: &DurationLaw) -> Result<()> {
    law.validate()?;
    if matches!(law, DurationLaw::Deterministic { .. }) {
        return Err(Error::param(
            name,
            "deterministic durations are only allowed for continuous single-piece profiles",
        ));
    }
    Ok(())
}

impl InfectivityModel {
    fn from_family(family: Family, lambda_star: f64) -> Self {
        InfectivityModel {
            family,
            lambda_star,
            role: RoleTag::NewlyInfected,
            mc_samples: DEFAULT_MC_SAMPLES,
            mc_seed: 0x5eed_1a3b_d00d_f00d,
            rows: Arc::new(RowCache(OnceBox::new())),
        }
    }

    pub fn constant_markov(beta: f64, gamma: f64) -> Result<Self> {
        positive("beta", beta)?;
        positive("gamma", gamma)?;
        Ok(Self::from_family(Family::ConstantMarkov { beta, gamma }, beta))
    }

    /// `beta >= 0` is allowed here so that silent initial groups can be
    /// expressed.
    pub fn piecewise_indicator(beta: f64, exposed: DurationLaw, infectious: DurationLaw) -> Result<Self> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::param("beta", "must be nonnegative and finite"));
        }
        exposed.validate()?;
        if !matches!(exposed, DurationLaw::Zero) {
            breakpoint_law("exposed", &exposed)?;
        }
        breakpoint_law("infectious", &infectious)?;
        if matches!(infectious, DurationLaw::Zero) {
            return Err(Error::param("infectious", "must have positive length"));
        }
        Ok(Self::from_family(
            Family::PiecewiseIndicator { beta, exposed, infectious },
            beta,
        ))
    }

    pub fn continuous_bump(peak: f64, infected: DurationLaw) -> Result<Self> {
        if !(peak.is_finite() && peak >= 0.0) {
            return Err(Error::param("peak", "must be nonnegative and finite"));
        }
        infected.validate()?;
        if matches!(infected, DurationLaw::Zero) {
            return Err(Error::param("infected", "must have positive length"));
        }
        Ok(Self::from_family(Family::ContinuousBump { peak, infected }, peak))
    }

    /// Declare a larger a.s. bound than the profile peak.
    pub fn with_lambda_star(mut self, lambda_star: f64) -> Result<Self> {
        let peak = self.peak();
        if !(lambda_star.is_finite() && lambda_star >= peak) {
            return Err(Error::param(
                "lambda_star",
                format!("{lambda_star} is below the profile peak {peak}"),
            ));
        }
        if lambda_star <= 0.0 {
            return Err(Error::param("lambda_star", "must be positive"));
        }
        self.lambda_star = lambda_star;
        Ok(self)
    }

    pub fn with_role(mut self, role: RoleTag) -> Result<Self> {
        if role == RoleTag::InitiallyInfectious && !self.onset_is_zero() {
            return Err(Error::param(
                "role",
                "an initially infectious law needs zero exposed period",
            ));
        }
        if let Family::AgedInitial { condition, .. } = self.family {
            let fits = matches!(
                (condition, role),
                (AgeCondition::Exposed, RoleTag::InitiallyExposed)
                    | (AgeCondition::Infectious, RoleTag::InitiallyInfectious)
            );
            if !fits {
                return Err(Error::param("role", "conflicts with the aging condition"));
            }
        }
        self.role = role;
        Ok(self)
    }

    /// Monte Carlo size and seed used when the law has no closed forms.
    pub fn with_monte_carlo(mut self, samples: usize, seed: u64) -> Result<Self> {
        if samples < 2 {
            return Err(Error::param("samples", "need at least two"));
        }
        self.mc_samples = samples;
        self.mc_seed = seed;
        self.rows = Arc::new(RowCache(OnceBox::new()));
        Ok(self)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn lambda_star(&self) -> f64 {
        self.lambda_star
    }

    pub fn role(&self) -> RoleTag {
        self.role
    }

    pub fn monte_carlo(&self) -> (usize, u64) {
        (self.mc_samples, self.mc_seed)
    }

    /// Number of continuity pieces.
    pub fn pieces(&self) -> usize {
        match &self.family {
            Family::ConstantMarkov { .. } => 2,
            Family::PiecewiseIndicator { exposed, .. } => {
                if matches!(exposed, DurationLaw::Zero) {
                    2
                } else {
                    3
                }
            }
            Family::ContinuousBump { .. } => 1,
            Family::AgedInitial { base, .. } => base.pieces(),
        }
    }

    fn peak(&self) -> f64 {
        match &self.family {
            Family::ConstantMarkov { beta, .. } | Family::PiecewiseIndicator { beta, .. } => *beta,
            Family::ContinuousBump { peak, .. } => *peak,
            Family::AgedInitial { base, .. } => base.peak(),
        }
    }

    /// Whether `zeta = 0` almost surely.
    pub fn onset_is_zero(&self) -> bool {
        match &self.family {
            Family::ConstantMarkov { .. } | Family::ContinuousBump { .. } => true,
            Family::PiecewiseIndicator { exposed, .. } => matches!(exposed, DurationLaw::Zero),
            Family::AgedInitial { base, condition, .. } => {
                *condition == AgeCondition::Infectious || base.onset_is_zero()
            }
        }
    }

    /// Whether every realization is a constant on its support.
    pub fn is_flat(&self) -> bool {
        match &self.family {
            Family::ContinuousBump { .. } => false,
            Family::AgedInitial { base, .. } => base.is_flat(),
            _ => true,
        }
    }

    pub fn regularity(&self) -> RegularityDescriptor {
        match &self.family {
            Family::ConstantMarkov { gamma, .. } => RegularityDescriptor {
                alpha: 1.0,
                rho: 1.0,
                holder_const: FLAT_HOLDER_CONST,
                breakpoint_const: *gamma,
            },
            Family::PiecewiseIndicator { exposed, infectious, .. } => {
                // The end point zeta + eta inherits the Hölder data of eta.
                let mut rho = f64::INFINITY;
                let mut c = 0.0f64;
                for law in [exposed, infectious] {
                    if let Some((r, k)) = law.cdf_holder() {
                        rho = rho.min(r);
                        c = c.max(k);
                    }
                }
                RegularityDescriptor {
                    alpha: 1.0,
                    rho: rho.min(1.0),
                    holder_const: FLAT_HOLDER_CONST,
                    breakpoint_const: c,
                }
            }
            Family::ContinuousBump { peak, infected } => bump_regularity(*peak, infected),
            Family::AgedInitial { base, .. } => base.regularity(),
        }
    }

    /// CDFs of the breakpoints at `t`, one entry per jump location.
    pub fn breakpoint_cdfs(&self, t: f64) -> Result<Vec<f64>> {
        Ok(match &self.family {
            Family::ConstantMarkov { gamma, .. } => {
                alloc::vec![DurationLaw::Exponential { rate: *gamma }.cdf(t)]
            }
            Family::PiecewiseIndicator { exposed, .. } => {
                let two = self.clock(Mapping::Seir)?;
                let ClockLaw::Two(two) = two else { unreachable!() };
                let mut v = Vec::new();
                if !matches!(exposed, DurationLaw::Zero) {
                    v.push(two.p_first(t));
                }
                v.push(two.p_second(t));
                v
            }
            Family::ContinuousBump { .. } => Vec::new(),
            Family::AgedInitial { .. } => {
                let rows = self.rows()?;
                let m = rows.len() as f64;
                let mut v = Vec::new();
                if !self.onset_is_zero() {
                    v.push(rows.iter().filter(|r| r.u <= t).count() as f64 / m);
                }
                if self.pieces() > 1 {
                    v.push(rows.iter().filter(|r| r.v <= t).count() as f64 / m);
                }
                v
            }
        })
    }

    /// Draw one path using the stream derived from `seed`.
    pub fn sample_path(&self, seed: u64) -> Result<InfectivityPath> {
        let mut rng = stream(seed, 0);
        self.sample_with(&mut rng)
    }

    pub fn sample_with<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Result<InfectivityPath> {
        Ok(match &self.family {
            Family::ConstantMarkov { beta, gamma } => {
                let eta = DurationLaw::Exponential { rate: *gamma }.sample(rng);
                InfectivityPath::new(0.0, eta, [*beta, 0.0, 0.0], false, true)
            }
            Family::PiecewiseIndicator { beta, exposed, infectious } => {
                let zeta = exposed.sample(rng);
                let eta = infectious.sample(rng);
                InfectivityPath::new(zeta, zeta + eta, [*beta, 0.0, 0.0], true, true)
            }
            Family::ContinuousBump { peak, infected } => {
                let chi = infected.sample(rng);
                InfectivityPath::new(0.0, chi, Profile::Bump(*peak).coeffs(chi), false, false)
            }
            Family::AgedInitial {
                base,
                age,
                condition,
                max_attempts,
            } => {
                for _ in 0..*max_attempts {
                    let p = base.sample_with(rng)?;
                    let a = age.sample(rng);
                    let ok = a < p.chi
                        && match condition {
                            AgeCondition::Exposed => a < p.zeta,
                            AgeCondition::Infectious => a >= p.zeta,
                        };
                    if ok {
                        return Ok(p.shifted(a));
                    }
                }
                return Err(Error::RejectionLimit {
                    attempts: *max_attempts,
                });
            }
        })
    }

    /// Cached Monte Carlo rows `(zeta, chi, coeffs)`.
    pub(crate) fn rows(&self) -> Result<Arc<Vec<Row>>> {
        self.rows
            .0
            .get_or_try_init(|| self.build_rows().map(|r| Box::new(Arc::new(r))))
            .cloned()
    }

    fn build_rows(&self) -> Result<Vec<Row>> {
        let m = self.mc_samples;
        let chunks = m.div_ceil(MC_CHUNK);
        let chunk = |c: usize| -> Result<Vec<Row>> {
            let mut rng = stream(self.mc_seed, c as u64);
            let len = MC_CHUNK.min(m - c * MC_CHUNK);
            let mut out = Vec::with_capacity(len);
            for _ in 0..len {
                let p = self.sample_with(&mut rng)?;
                out.push(Row {
                    u: p.zeta,
                    v: p.chi,
                    c: p.coeffs,
                });
            }
            Ok(out)
        };
        #[cfg(feature = "parallel")]
        let parts: Vec<Result<Vec<Row>>> = {
            use rayon::prelude::*;
            (0..chunks).into_par_iter().map(chunk).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let parts: Vec<Result<Vec<Row>>> = (0..chunks).map(chunk).collect();
        let mut rows = Vec::with_capacity(m);
        for p in parts {
            rows.extend(p?);
        }
        Ok(rows)
    }

    /// Clock law of this model under a compartment mapping.
    pub(crate) fn clock(&self, mapping: Mapping) -> Result<ClockLaw> {
        let two = |x, d, profile, width, support| {
            Ok(ClockLaw::Two(TwoStage {
                x,
                d,
                profile,
                width,
                support,
            }))
        };
        let need_zero_onset = || {
            Err(Error::Unsupported(
                "recurrent immunity needs a law without exposed period".into(),
            ))
        };
        match (&self.family, mapping) {
            (Family::ConstantMarkov { beta, gamma }, Mapping::Seir) => two(
                DurationLaw::Zero,
                DurationLaw::Exponential { rate: *gamma },
                Profile::Constant(*beta),
                WidthFrom::Increment,
                Support::Between,
            ),
            (Family::ConstantMarkov { beta, gamma }, Mapping::Sirs(y)) => two(
                DurationLaw::Exponential { rate: *gamma },
                y,
                Profile::Constant(*beta),
                WidthFrom::First,
                Support::BeforeFirst,
            ),
            (Family::PiecewiseIndicator { beta, exposed, infectious }, Mapping::Seir) => two(
                *exposed,
                *infectious,
                Profile::Constant(*beta),
                WidthFrom::Increment,
                Support::Between,
            ),
            (Family::PiecewiseIndicator { beta, exposed, infectious }, Mapping::Sirs(y)) => {
                if !matches!(exposed, DurationLaw::Zero) {
                    return need_zero_onset();
                }
                two(
                    *infectious,
                    y,
                    Profile::Constant(*beta),
                    WidthFrom::First,
                    Support::BeforeFirst,
                )
            }
            (Family::ContinuousBump { peak, infected }, Mapping::Seir) => two(
                DurationLaw::Zero,
                *infected,
                Profile::Bump(*peak),
                WidthFrom::Increment,
                Support::Between,
            ),
            (Family::ContinuousBump { peak, infected }, Mapping::Sirs(y)) => two(
                *infected,
                y,
                Profile::Bump(*peak),
                WidthFrom::First,
                Support::BeforeFirst,
            ),
            (Family::AgedInitial { .. }, Mapping::Seir) => Ok(ClockLaw::Sampled(Sampled {
                rows: self.rows()?,
                support: Support::Between,
            })),
            (Family::AgedInitial { .. }, Mapping::Sirs(y)) => {
                if !self.onset_is_zero() {
                    return need_zero_onset();
                }
                let rows = self.rows()?;
                let mut out = Vec::with_capacity(rows.len());
                let mut rng: Rng = stream(self.mc_seed ^ 0xa5a5_5a5a_0f0f_f0f0, 0);
                for r in rows.iter() {
                    let extra = y.sample(&mut rng);
                    out.push(Row {
                        u: r.v,
                        v: r.v + extra,
                        c: r.c,
                    });
                }
                Ok(ClockLaw::Sampled(Sampled {
                    rows: Arc::new(out),
                    support: Support::BeforeFirst,
                }))
            }
        }
    }

    /// `E[lambda(t)]`.
    pub fn mean_infectivity(&self, t: f64) -> Result<Estimate> {
        match self.clock(Mapping::Seir)? {
            ClockLaw::Two(two) => {
                let w = two.rect(Iv::le(t), Iv::gt(t));
                Ok(Estimate::exact(first_moment(&w, t)))
            }
            ClockLaw::Sampled(s) => Ok(sample_stats(&s.rows, |r| row_eval(r, t))),
        }
    }

    /// `Cov(lambda(t), lambda(t2))`.
    pub fn cov_infectivity(&self, t: f64, t2: f64) -> Result<Estimate> {
        match self.clock(Mapping::Seir)? {
            ClockLaw::Two(two) => {
                let (lo, hi) = (t.min(t2), t.max(t2));
                let w = two.rect(Iv::le(lo), Iv::gt(hi));
                let m1 = first_moment(&two.rect(Iv::le(t), Iv::gt(t)), t);
                let m2 = first_moment(&two.rect(Iv::le(t2), Iv::gt(t2)), t2);
                Ok(Estimate::exact(second_moment(&w, t, t2) - m1 * m2))
            }
            ClockLaw::Sampled(s) => {
                let a = sample_stats(&s.rows, |r| row_eval(r, t)).value;
                let b = sample_stats(&s.rows, |r| row_eval(r, t2)).value;
                let m = s.rows.len() as f64;
                let mut e = sample_stats(&s.rows, |r| (row_eval(r, t) - a) * (row_eval(r, t2) - b));
                e.value *= m / (m - 1.0);
                Ok(e)
            }
        }
    }

    /// `E[lambda(t) 1{region at age t2}]`.
    pub fn joint_indicator_moment(&self, t: f64, t2: f64, region: Region) -> Result<Estimate> {
        let (ru, rv) = region_rect(region, t2);
        match self.clock(Mapping::Seir)? {
            ClockLaw::Two(two) => {
                let w = two.rect(Iv::le(t).meet(ru), Iv::gt(t).meet(rv));
                Ok(Estimate::exact(first_moment(&w, t)))
            }
            ClockLaw::Sampled(s) => Ok(sample_stats(&s.rows, |r| {
                if ru.contains(r.u) && rv.contains(r.v) {
                    row_eval(r, t)
                } else {
                    0.0
                }
            })),
        }
    }
}

/// Clock rectangle of a region at age `t`.
pub(crate) fn region_rect(region: Region, t: f64) -> (Iv, Iv) {
    match region {
        Region::Exposed => (Iv::gt(t), Iv::ALL),
        Region::Infectious => (Iv::le(t), Iv::gt(t)),
        Region::Recovered => (Iv::ALL, Iv::le(t)),
    }
}

#[inline]
fn row_eval(r: &Row, t: f64) -> f64 {
    if t >= r.u && t < r.v {
        r.c[0] + t * (r.c[1] + t * r.c[2])
    } else {
        0.0
    }
}

fn sample_stats<F: Fn(&Row) -> f64>(rows: &[Row], f: F) -> Estimate {
    let m = rows.len() as f64;
    let (mut s, mut s2) = (0.0, 0.0);
    for r in rows {
        let x = f(r);
        s += x;
        s2 += x * x;
    }
    let mean = s / m;
    let var = ((s2 - m * mean * mean) / (m - 1.0)).max(0.0);
    Estimate {
        value: mean,
        se: (var / m).sqrt(),
    }
}

fn bump_regularity(peak: f64, infected: &DurationLaw) -> RegularityDescriptor {
    let (lo, _) = infected.support();
    if lo > 0.0 {
        return RegularityDescriptor {
            alpha: 1.0,
            rho: 1.0,
            holder_const: 4.0 * peak / lo,
            breakpoint_const: 0.0,
        };
    }
    // Paths with short support are steep, so only an averaged bound holds:
    // E|l(t + d) - l(t)| <= E[min(h, 4 h d / chi)] <= C d^alpha.
    let alpha = 0.75;
    let mut c = peak;
    for k in 0..=60 {
        let d = 10f64.powf(-6.0 + 0.1 * k as f64);
        let tail = crate::math::gl_split(4.0 * d, 4.0 * d + 50.0 * infected.scale().max(infected.mean()), &infected.kinks(), 0.05 * infected.scale(), |x| {
            infected.pdf(x) / x
        });
        let e = peak * infected.cdf(4.0 * d) + 4.0 * peak * d * tail;
        c = c.max(e / d.powf(alpha));
    }
    RegularityDescriptor {
        alpha,
        rho: 1.0,
        holder_const: c,
        breakpoint_const: 0.0,
    }
}

/// Aged law `t -> lambda(age + t)`, rejection-sampled so that the age falls
/// inside the infected period and satisfies `condition`.
pub fn make_aged_initial_model(
    base: &InfectivityModel,
    age: DurationLaw,
    condition: AgeCondition,
) -> Result<InfectivityModel> {
    make_aged_initial_model_with(base, age, condition, DEFAULT_MAX_ATTEMPTS)
}

pub fn make_aged_initial_model_with(
    base: &InfectivityModel,
    age: DurationLaw,
    condition: AgeCondition,
    max_attempts: usize,
) -> Result<InfectivityModel> {
    if base.role != RoleTag::NewlyInfected {
        return Err(Error::param("base", "must be a newly-infected law"));
    }
    age.validate()?;
    if max_attempts == 0 {
        return Err(Error::param("max_attempts", "must be positive"));
    }
    if condition == AgeCondition::Exposed && base.onset_is_zero() {
        return Err(Error::param(
            "condition",
            "the base law has no exposed period to age into",
        ));
    }
    let role = match condition {
        AgeCondition::Exposed => RoleTag::InitiallyExposed,
        AgeCondition::Infectious => RoleTag::InitiallyInfectious,
    };
    let mut m = InfectivityModel::from_family(
        Family::AgedInitial {
            base: Arc::new(base.clone()),
            age,
            condition,
            max_attempts,
        },
        base.lambda_star,
    );
    m.role = role;
    m.mc_samples = base.mc_samples;
    m.mc_seed = crate::rng::mix(base.mc_seed ^ 0x0a9e_d000);
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cm() -> InfectivityModel {
        InfectivityModel::constant_markov(0.5, 0.2).unwrap()
    }

    #[test]
    fn constant_markov_closed_forms() {
        let m = cm();
        assert_eq!(m.mean_infectivity(0.0).unwrap().value, 0.5);
        assert_relative_eq!(m.mean_infectivity(5.0).unwrap().value, 0.5 * (-1.0f64).exp(), max_relative = 1e-14);
        let c = m.cov_infectivity(2.0, 3.0).unwrap().value;
        assert_relative_eq!(c, 0.25 * ((-0.6f64).exp() - (-1.0f64).exp()), max_relative = 1e-13);
        let j = m.joint_indicator_moment(1.0, 4.0, Region::Infectious).unwrap().value;
        assert_relative_eq!(j, 0.5 * (-0.8f64).exp(), max_relative = 1e-13);
    }

    #[test]
    fn regions_partition_the_mean() {
        let pi = InfectivityModel::piecewise_indicator(
            0.8,
            DurationLaw::Gamma { shape: 2.0, rate: 1.5 },
            DurationLaw::LogNormal { mu: 0.5, sigma: 0.4 },
        )
        .unwrap();
        for (t, t2) in [(1.0, 1.0), (2.0, 0.5), (0.7, 3.0)] {
            let s: f64 = [Region::Exposed, Region::Infectious, Region::Recovered]
                .iter()
                .map(|&r| pi.joint_indicator_moment(t, t2, r).unwrap().value)
                .sum();
            assert_relative_eq!(s, pi.mean_infectivity(t).unwrap().value, epsilon = 1e-12);
        }
    }

    #[test]
    fn bad_parameters_are_rejected() {
        assert!(InfectivityModel::constant_markov(-1.0, 0.2).is_err());
        assert!(InfectivityModel::constant_markov(0.5, 0.0).is_err());
        assert!(cm().with_lambda_star(0.4).is_err());
        assert!(InfectivityModel::piecewise_indicator(
            1.0,
            DurationLaw::Deterministic { value: 1.0 },
            DurationLaw::Exponential { rate: 1.0 }
        )
        .is_err());
        assert!(InfectivityModel::continuous_bump(1.0, DurationLaw::Deterministic { value: 2.0 }).is_ok());
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = cm();
        let a = m.sample_path(7).unwrap();
        assert_eq!(a, m.sample_path(7).unwrap());
        assert_eq!(a.zeta, 0.0);
        assert_eq!(a.eval(0.0), 0.5);
    }

    #[test]
    fn aged_law_near_zero_age() {
        let m = cm().with_monte_carlo(200_000, 11).unwrap();
        let aged = make_aged_initial_model(
            &m,
            DurationLaw::Uniform { lo: 0.0, hi: 1e-3 },
            AgeCondition::Infectious,
        )
        .unwrap();
        assert_eq!(aged.role(), RoleTag::InitiallyInfectious);
        let e = aged.mean_infectivity(2.0).unwrap();
        let want = 0.5 * (-0.4f64).exp();
        assert!((e.value - want).abs() < 4.0 * e.se + 1e-4, "{e:?}");
        let p = aged.sample_path(3).unwrap();
        assert_eq!(p.zeta, 0.0);
    }

    #[test]
    fn aged_exposed_needs_exposed_period() {
        assert!(make_aged_initial_model(&cm(), DurationLaw::Zero, AgeCondition::Exposed).is_err());
    }

    #[test]
    fn rejection_cap_reports_error() {
        let m = InfectivityModel::continuous_bump(1.0, DurationLaw::Uniform { lo: 1.0, hi: 2.0 }).unwrap();
        let aged = make_aged_initial_model_with(
            &m,
            DurationLaw::Deterministic { value: 5.0 },
            AgeCondition::Infectious,
            50,
        )
        .unwrap();
        assert_eq!(aged.sample_path(1), Err(Error::RejectionLimit { attempts: 50 }));
    }
}
