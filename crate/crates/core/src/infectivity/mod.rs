//! Random infectivity laws, path sampling and deterministic functionals of
//! the law.

mod model;
mod path;
mod sojourn;
pub(crate) mod structure;
pub(crate) mod tables;

pub(crate) use model::Mapping;
pub use model::{
    make_aged_initial_model, make_aged_initial_model_with, AgeCondition, Estimate, Family, InfectivityModel,
    RegularityDescriptor, Region, RoleTag, DEFAULT_MAX_ATTEMPTS, DEFAULT_MC_SAMPLES,
};
pub use path::{eval_path, path_durations, InfectivityPath};
pub use sojourn::{compute_sojourn_table, SojournTable};

/// Free-function form of [`InfectivityModel::sample_path`].
pub fn sample_path(model: &InfectivityModel, seed: u64) -> crate::Result<InfectivityPath> {
    model.sample_path(seed)
}

/// Free-function form of [`InfectivityModel::mean_infectivity`].
pub fn mean_infectivity(model: &InfectivityModel, t: f64) -> crate::Result<Estimate> {
    model.mean_infectivity(t)
}

/// Free-function form of [`InfectivityModel::cov_infectivity`].
pub fn cov_infectivity(model: &InfectivityModel, t: f64, t2: f64) -> crate::Result<Estimate> {
    model.cov_infectivity(t, t2)
}

/// Free-function form of [`InfectivityModel::joint_indicator_moment`].
pub fn joint_indicator_moment(model: &InfectivityModel, t: f64, t2: f64, region: Region) -> crate::Result<Estimate> {
    model.joint_indicator_moment(t, t2, region)
}
