//! Traffic snapshots, timed words, and the transition sequences they induce.
//!
//! All arithmetic is exact. A snapshot evolves by delays (constant
//! acceleration, reservation length recomputed from speed) and by discrete
//! actions whose guards are checked on application.

mod scenario;
mod snapshot;
mod transition;
mod view;
mod word;

pub use scenario::{CarFile, EventFile, Scenario, ScenarioFile, ViewFile};
pub use snapshot::{CarId, CarState, LaneId, TrafficSnapshot};
pub use transition::{model_at, snapshot_at, Label, TransitionSequence};
pub use view::{Model, Valuation, View, EGO};
pub use word::{Action, Event, TimedWord};
