//! Constraint learning from labeled examples under a mode bias.

mod learn;
mod space;
mod task;

pub use learn::{accepts, learn, Hypothesis, LearnConfig, LearnStats, DEFAULT_ACCEPTING_CAP, DEFAULT_SEARCH_BUDGET};
pub use space::{
    enumerate_space, score, CandidateConstraint, HypothesisSpace, ModeDecl, Scoring, DEFAULT_MAX_BODY, DEFAULT_MAX_VARS,
    DEFAULT_SPACE_LIMIT,
};
pub use task::{emit_ilasp_task, parse_las, parse_modes, render_context, render_example, LearningTask};
