//! Higher-level runs built on the engine and the monitors: monitored
//! solves, the saddle-escape experiment, and the verification suites.

mod monitored;
mod saddle;
mod verify;

pub use monitored::{run_monitored, run_monitored_with, MonitoredRun};
pub use saddle::{run_saddle_trial, saddle_escape, PlateauCheck, SaddleConfig, SaddleSummary, SaddleTrial};
pub use verify::{fixed_point_sweep, verify, verify_replay, Suite, SuiteResult, VerifyConfig, VerifyReport};
