//! Synchronize recordings of the same task by aligning their multivariate
//! kinematics.
//!
//! * [`dtw`]: dependent multivariate DTW with full warping-path recovery.
//! * [`dba`]: DTW barycenter averaging over a set of recordings.
//! * [`nlts`]: dilation of every recording to the length of the average.
//! * [`sync`]: frame schedules, their file format, and video rendering.
//! * [`analyze`]: DTW cost versus skill-score gap, with a cubic trend fit.
//! * [`kinio`]: kinematic and metadata file readers.

pub mod analyze;
pub mod cli;
pub mod config;
pub mod dba;
pub mod dtw;
pub mod error;
pub mod kinio;
pub mod nlts;
pub mod series;
pub mod sync;

pub use analyze::{emit_fit_report, polyfit3, score_pairs, PairOptions, PolyFit, ScorePair};
pub use config::RunConfig;
pub use dba::{compact_alignment, dba, dba_iterate, initialize_average, AverageSeries, CompactAlignment, DbaParams};
pub use dtw::{cost_matrix, dtw, dtw_cost, dtw_cost_with, dtw_with, CostMatrix, DtwOptions, WarpingPath};
pub use error::{Error, Result};
pub use kinio::{load_kinematics, load_meta, ChannelSelection, MetaFields, MetaRecord};
pub use nlts::{apply_dilation, nlts, DilationMap, NltsResult};
pub use series::{MultivariateTimeSeries, SkillClass, TrialRecord};
pub use sync::{
    multi_schedules, pairwise_schedules, read_schedule, render, write_schedule, Encoder, FrameSchedule, ScheduleEntry,
};
