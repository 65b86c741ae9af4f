//! The laws and initial fractions shared by the simulator and the limits.

use alloc::format;

use crate::duration::DurationLaw;
use crate::infectivity::{InfectivityModel, Mapping, RoleTag};
use crate::{Error, Result, Variant};

/// Infectivity laws for new infections, initially exposed and initially
/// infectious individuals, plus the immunity laws used by SIRS.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSet {
    pub model: InfectivityModel,
    pub model0: InfectivityModel,
    pub model0i: InfectivityModel,
    /// Immunity period after an infection (SIRS only).
    pub immunity: Option<DurationLaw>,
    /// Remaining immunity of the initially recovered (SIRS only).
    pub immunity0: Option<DurationLaw>,
}

impl ModelSet {
    /// Fresh copies of `model` for the initial groups. The initially
    /// infectious law keeps only the infectious period.
    pub fn from_model(model: InfectivityModel) -> Result<Self> {
        let model0 = model.clone().with_role(RoleTag::InitiallyExposed)?;
        let model0i = default_initially_infectious(&model)?;
        Ok(ModelSet {
            model,
            model0,
            model0i,
            immunity: None,
            immunity0: None,
        })
    }

    pub fn with_immunity(mut self, immunity: DurationLaw, immunity0: Option<DurationLaw>) -> Result<Self> {
        immunity.validate()?;
        if let Some(l) = immunity0 {
            l.validate()?;
        }
        self.immunity = Some(immunity);
        self.immunity0 = immunity0;
        Ok(self)
    }

    pub fn validate(&self, variant: Variant) -> Result<()> {
        if self.model.role() != RoleTag::NewlyInfected {
            return Err(Error::param("model", "must be a newly-infected law"));
        }
        if !self.model0i.onset_is_zero() {
            return Err(Error::param("model0I", "initially infectious law must have zero exposed period"));
        }
        if variant == Variant::Sirs {
            if self.immunity.is_none() {
                return Err(Error::param("immunity", "required for SIRS"));
            }
            if !self.model.onset_is_zero() {
                return Err(Error::param("model", "SIRS needs a law without exposed period"));
            }
        } else if self.immunity.is_some() || self.immunity0.is_some() {
            return Err(Error::param(
                "immunity",
                format!("only meaningful for SIRS, not {variant}"),
            ));
        }
        Ok(())
    }

    /// Compartment mapping used for new infections.
    pub(crate) fn mapping(&self, variant: Variant) -> Mapping {
        match (variant, self.immunity) {
            (Variant::Sirs, Some(y)) => Mapping::Sirs(y),
            _ => Mapping::Seir,
        }
    }

    pub(crate) fn immunity0_law(&self) -> Option<DurationLaw> {
        self.immunity0.or(self.immunity)
    }
}

/// `model` with the exposed period removed, as a law for individuals that are
/// already infectious at time zero.
pub fn default_initially_infectious(model: &InfectivityModel) -> Result<InfectivityModel> {
    use crate::infectivity::Family;
    let base = match model.family() {
        Family::PiecewiseIndicator { beta, infectious, .. } => {
            let m = InfectivityModel::piecewise_indicator(*beta, DurationLaw::Zero, *infectious)?;
            if model.lambda_star() > 0.0 {
                m.with_lambda_star(model.lambda_star())?
            } else {
                m
            }
        }
        Family::AgedInitial { .. } => {
            return Err(Error::param("model", "an aged law cannot be a newly-infected law"));
        }
        _ => model.clone(),
    };
    let (m, s) = model.monte_carlo();
    base.with_monte_carlo(m, s)?.with_role(RoleTag::InitiallyInfectious)
}

/// Initial compartment fractions.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InitialFractions {
    pub e0: f64,
    pub i0: f64,
    pub r0: f64,
}

impl InitialFractions {
    pub fn s0(&self) -> f64 {
        1.0 - self.e0 - self.i0 - self.r0
    }

    pub fn validate(&self, variant: Variant) -> Result<()> {
        for (name, x) in [("e0_frac", self.e0), ("i0_frac", self.i0), ("r0_frac", self.r0)] {
            if !(x.is_finite() && x >= 0.0) {
                return Err(Error::param(name, "must be a nonnegative fraction"));
            }
        }
        if self.e0 + self.i0 + self.r0 > 1.0 + 1e-12 {
            return Err(Error::param(
                "e0_frac + i0_frac + r0_frac",
                format!("sum {} exceeds 1", self.e0 + self.i0 + self.r0),
            ));
        }
        if variant != Variant::Seir && self.e0 != 0.0 {
            return Err(Error::param("e0_frac", format!("must be 0 for {variant}")));
        }
        if variant == Variant::Sis && self.r0 != 0.0 {
            return Err(Error::param("r0_frac", "must be 0 for SIS"));
        }
        Ok(())
    }
}
