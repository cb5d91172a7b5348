//! Conceptual cost-estimation model zoo for field canal improvement projects.
//!
//! Twenty regression families share one fit/predict contract
//! ([`model::Predictor`]) and one evaluation report ([`model::EvalReport`]).

pub mod cart;
pub mod cbr;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod fuzzy;
pub mod genetic_fuzzy;
pub mod metrics;
pub mod model;
pub mod neural;
pub mod regression;
pub mod seed;
pub mod svr;

pub use data::{Dataset, FeatureVector, ProjectRecord};
pub use error::{Error, Result};
pub use model::{evaluate, EvalReport, ModelKind, ModelSpec, Predictor, TargetTransform};
