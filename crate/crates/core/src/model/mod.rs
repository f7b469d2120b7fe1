//! Application DAGs, duration distributions and job instances.

mod dist;
mod job;
mod template;

pub use dist::{DurationDistribution, Interval, SUPPORT_EPS};
pub use job::{
    JobInstance, JobTruth, JobView, RealizedSubgraph, StageOrigin, StageState, StageView,
    TaskState, TaskView,
};
pub use template::{
    AppId, AppTemplate, CandidateStage, ChainSlot, DynamicStageSpec, Family, StageId, StageKind,
    StageTemplate,
};
