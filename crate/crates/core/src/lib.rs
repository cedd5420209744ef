pub mod experiment;
pub mod explain;
pub mod lifted;
pub mod metrics;
pub mod model;
pub mod pddl;
pub mod planner;
mod util;

pub use explain::{
    generate_concise, generate_progressive, ExplainError, ExplanationTrace, Mode, Reconcilable,
    ReconciliationProblem, SearchConfig,
};
pub use lifted::LiftedModel;
pub use metrics::{HeuristicVariant, MetricKind, Score};
pub use model::{Fact, Feature, FeatureChange, FeatureKind, FeatureSet, GroundAction, Model, ModelError};
pub use planner::{optimal_plan, optimal_plan_with, Plan, PlannerConfig};
