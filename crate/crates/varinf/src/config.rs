//! TOML scenario documents.
//!
//! ```toml
//! [scenario]
//! variant = "SEIR"
//! N = 10000
//! e0_frac = 0.01
//! i0_frac = 0.01
//!
//! [model]
//! family = "piecewise_indicator"
//! beta = 0.6
//! exposed = { law = "gamma", shape = 2.0, rate = 1.0 }
//! infectious = { law = "gamma", shape = 3.0, rate = 1.0 }
//!
//! [grid]
//! delta = 0.01
//! horizon = 20.0
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;
use varinf_core::simulator::{InitMode, Scenario};
use varinf_core::infectivity::{make_aged_initial_model_with, DEFAULT_MAX_ATTEMPTS};
use varinf_core::{AgeCondition, DurationLaw, Family, InfectivityModel, InitialFractions, ModelSet, RoleTag, Variant};

pub const DEFAULT_DELTA: f64 = 0.01;
pub const DEFAULT_HORIZON: f64 = 20.0;
pub const DEFAULT_VARIANT: Variant = Variant::Seir;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Invalid(#[from] varinf_core::Error),
    #[error("invalid configuration: {0}")]
    Key(String),
}

pub type ConfigResult<T> = Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum LawSpec {
    Zero,
    Deterministic { value: f64 },
    Exponential { rate: f64 },
    Gamma { shape: f64, rate: f64 },
    LogNormal { mu: f64, sigma: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl From<LawSpec> for DurationLaw {
    fn from(s: LawSpec) -> Self {
        match s {
            LawSpec::Zero => DurationLaw::Zero,
            LawSpec::Deterministic { value } => DurationLaw::Deterministic { value },
            LawSpec::Exponential { rate } => DurationLaw::Exponential { rate },
            LawSpec::Gamma { shape, rate } => DurationLaw::Gamma { shape, rate },
            LawSpec::LogNormal { mu, sigma } => DurationLaw::LogNormal { mu, sigma },
            LawSpec::Uniform { lo, hi } => DurationLaw::Uniform { lo, hi },
        }
    }
}

impl From<DurationLaw> for LawSpec {
    fn from(l: DurationLaw) -> Self {
        match l {
            DurationLaw::Zero => LawSpec::Zero,
            DurationLaw::Deterministic { value } => LawSpec::Deterministic { value },
            DurationLaw::Exponential { rate } => LawSpec::Exponential { rate },
            DurationLaw::Gamma { shape, rate } => LawSpec::Gamma { shape, rate },
            DurationLaw::LogNormal { mu, sigma } => LawSpec::LogNormal { mu, sigma },
            DurationLaw::Uniform { lo, hi } => LawSpec::Uniform { lo, hi },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    ConstantMarkov,
    PiecewiseIndicator,
    ContinuousBump,
    /// The `[model]` law seen at a random infection age.
    Aged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionName {
    Exposed,
    Infectious,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitModeName {
    #[default]
    Deterministic,
    Binomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(rename = "N")]
    pub population: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replications: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_mode: Option<InitModeName>,
    #[serde(default)]
    pub e0_frac: f64,
    #[serde(default)]
    pub i0_frac: f64,
    #[serde(default)]
    pub r0_frac: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub family: FamilyName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exposed: Option<LawSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infectious: Option<LawSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infected: Option<LawSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub age: Option<LawSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<ConditionName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_attempts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_seed: Option<u64>,
    /// Immunity period after recovery (SIRS).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub immunity: Option<LawSpec>,
    /// Remaining immunity of the initially recovered (SIRS).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub immunity0: Option<LawSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    /// Population sizes for the law-of-large-numbers study.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ns: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    /// Draws per configuration of the Poisson moment check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub draws: Option<usize>,
}

/// A whole configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub scenario: ScenarioSection,
    pub model: ModelSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model0: Option<ModelSection>,
    #[serde(default, rename = "model0I", skip_serializing_if = "Option::is_none")]
    pub model0i: Option<ModelSection>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

fn key(msg: impl Into<String>) -> ConfigError {
    ConfigError::Key(msg.into())
}

fn need<T: Copy>(v: Option<T>, section: &str, name: &str, family: FamilyName) -> ConfigResult<T> {
    v.ok_or_else(|| key(format!("[{section}] {name} is required for family {family:?}")))
}

impl ModelSection {
    fn present(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut add = |b: bool, n| {
            if b {
                out.push(n)
            }
        };
        add(self.beta.is_some(), "beta");
        add(self.gamma.is_some(), "gamma");
        add(self.peak.is_some(), "peak");
        add(self.exposed.is_some(), "exposed");
        add(self.infectious.is_some(), "infectious");
        add(self.infected.is_some(), "infected");
        add(self.age.is_some(), "age");
        add(self.condition.is_some(), "condition");
        add(self.max_attempts.is_some(), "max_attempts");
        add(self.immunity.is_some(), "immunity");
        add(self.immunity0.is_some(), "immunity0");
        out
    }

    fn check_keys(&self, section: &str) -> ConfigResult<()> {
        let allowed: &[&str] = match self.family {
            FamilyName::ConstantMarkov => &["beta", "gamma"],
            FamilyName::PiecewiseIndicator => &["beta", "exposed", "infectious"],
            FamilyName::ContinuousBump => &["peak", "infected"],
            FamilyName::Aged => &["age", "condition", "max_attempts"],
        };
        let immunity_ok = section == "model";
        for k in self.present() {
            let ok = allowed.contains(&k) || (immunity_ok && (k == "immunity" || k == "immunity0"));
            if !ok {
                return Err(key(format!(
                    "[{section}] key `{k}` does not apply to family {:?}",
                    self.family
                )));
            }
        }
        Ok(())
    }

    /// Build the law. `base` is the newly-infected law, required for aged
    /// families.
    fn build(&self, section: &str, base: Option<&InfectivityModel>) -> ConfigResult<InfectivityModel> {
        self.check_keys(section)?;
        let f = self.family;
        let mut m = match f {
            FamilyName::ConstantMarkov => {
                InfectivityModel::constant_markov(need(self.beta, section, "beta", f)?, need(self.gamma, section, "gamma", f)?)?
            }
            FamilyName::PiecewiseIndicator => InfectivityModel::piecewise_indicator(
                need(self.beta, section, "beta", f)?,
                self.exposed.map_or(DurationLaw::Zero, Into::into),
                need(self.infectious, section, "infectious", f)?.into(),
            )?,
            FamilyName::ContinuousBump => InfectivityModel::continuous_bump(
                need(self.peak, section, "peak", f)?,
                need(self.infected, section, "infected", f)?.into(),
            )?,
            FamilyName::Aged => {
                let base = base.ok_or_else(|| key(format!("[{section}] family aged is only valid for initial laws")))?;
                let condition = match need(self.condition, section, "condition", f)? {
                    ConditionName::Exposed => AgeCondition::Exposed,
                    ConditionName::Infectious => AgeCondition::Infectious,
                };
                make_aged_initial_model_with(
                    base,
                    need(self.age, section, "age", f)?.into(),
                    condition,
                    self.max_attempts.unwrap_or(DEFAULT_MAX_ATTEMPTS),
                )?
            }
        };
        if let Some(ls) = self.lambda_star {
            m = m.with_lambda_star(ls)?;
        }
        if self.mc_samples.is_some() || self.mc_seed.is_some() {
            let (s, seed) = m.monte_carlo();
            m = m.with_monte_carlo(self.mc_samples.unwrap_or(s), self.mc_seed.unwrap_or(seed))?;
        }
        Ok(m)
    }

    /// Section describing `m` (immunity keys left empty).
    pub fn from_model(m: &InfectivityModel) -> Self {
        let mut s = ModelSection {
            family: FamilyName::ConstantMarkov,
            beta: None,
            gamma: None,
            peak: None,
            exposed: None,
            infectious: None,
            infected: None,
            age: None,
            condition: None,
            max_attempts: None,
            lambda_star: Some(m.lambda_star()),
            mc_samples: Some(m.monte_carlo().0),
            mc_seed: Some(m.monte_carlo().1),
            immunity: None,
            immunity0: None,
        };
        match m.family() {
            Family::ConstantMarkov { beta, gamma } => {
                s.beta = Some(*beta);
                s.gamma = Some(*gamma);
            }
            Family::PiecewiseIndicator { beta, exposed, infectious } => {
                s.family = FamilyName::PiecewiseIndicator;
                s.beta = Some(*beta);
                s.exposed = Some((*exposed).into());
                s.infectious = Some((*infectious).into());
            }
            Family::ContinuousBump { peak, infected } => {
                s.family = FamilyName::ContinuousBump;
                s.peak = Some(*peak);
                s.infected = Some((*infected).into());
            }
            Family::AgedInitial { age, condition, max_attempts, .. } => {
                s.family = FamilyName::Aged;
                s.age = Some((*age).into());
                s.condition = Some(match condition {
                    AgeCondition::Exposed => ConditionName::Exposed,
                    AgeCondition::Infectious => ConditionName::Infectious,
                });
                s.max_attempts = Some(*max_attempts);
                // Derived from the base law.
                s.mc_seed = None;
            }
        }
        s
    }
}

impl ConfigDocument {
    pub fn parse(text: &str) -> ConfigResult<Self> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn variant(&self) -> ConfigResult<Variant> {
        match &self.scenario.variant {
            Some(v) => Ok(v.parse()?),
            None => Ok(DEFAULT_VARIANT),
        }
    }

    /// Validated scenario with defaults filled in.
    pub fn scenario(&self) -> ConfigResult<Scenario> {
        let variant = self.variant()?;
        let model = self.model.build("model", None)?;
        if model.role() != RoleTag::NewlyInfected {
            return Err(key("[model] must be a newly-infected law"));
        }
        let mut models = ModelSet::from_model(model.clone())?;
        if let Some(s) = &self.model0 {
            models.model0 = s.build("model0", Some(&model))?.with_role(RoleTag::InitiallyExposed)?;
        }
        if let Some(s) = &self.model0i {
            models.model0i = s.build("model0I", Some(&model))?.with_role(RoleTag::InitiallyInfectious)?;
        }
        if let Some(y) = self.model.immunity {
            models = models.with_immunity(y.into(), self.model.immunity0.map(Into::into))?;
        } else if self.model.immunity0.is_some() {
            return Err(key("[model] immunity0 needs immunity"));
        }
        let sc = Scenario {
            variant,
            population: self.scenario.population,
            horizon: self.grid.horizon.unwrap_or(DEFAULT_HORIZON),
            delta: self.grid.delta.unwrap_or(DEFAULT_DELTA),
            init: InitialFractions {
                e0: self.scenario.e0_frac,
                i0: self.scenario.i0_frac,
                r0: self.scenario.r0_frac,
            },
            models,
            seed: self.scenario.seed.unwrap_or(0),
            replications: self.scenario.replications.unwrap_or(1),
            init_mode: match self.scenario.init_mode.unwrap_or_default() {
                InitModeName::Deterministic => InitMode::Deterministic,
                InitModeName::Binomial => InitMode::Binomial,
            },
        };
        sc.validate()?;
        Ok(sc)
    }

    /// Fully explicit document for `sc`.
    pub fn from_scenario(sc: &Scenario, experiment: ExperimentSection) -> Self {
        let mut model = ModelSection::from_model(&sc.models.model);
        model.immunity = sc.models.immunity.map(Into::into);
        model.immunity0 = sc.models.immunity0.map(Into::into);
        ConfigDocument {
            scenario: ScenarioSection {
                variant: Some(sc.variant.name().to_string()),
                population: sc.population,
                seed: Some(sc.seed),
                replications: Some(sc.replications),
                init_mode: Some(match sc.init_mode {
                    InitMode::Deterministic => InitModeName::Deterministic,
                    InitMode::Binomial => InitModeName::Binomial,
                }),
                e0_frac: sc.init.e0,
                i0_frac: sc.init.i0,
                r0_frac: sc.init.r0,
            },
            model,
            model0: Some(ModelSection::from_model(&sc.models.model0)),
            model0i: Some(ModelSection::from_model(&sc.models.model0i)),
            grid: GridSection {
                delta: Some(sc.delta),
                horizon: Some(sc.horizon),
            },
            experiment,
        }
    }
}

/// Parse and validate a scenario document.
pub fn parse_scenario(text: &str) -> ConfigResult<Scenario> {
    ConfigDocument::parse(text)?.scenario()
}
