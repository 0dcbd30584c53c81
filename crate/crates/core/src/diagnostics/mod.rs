//! Zero numbers, the reflection transform, critical-point tracks, the case
//! trichotomy and the windowed energy.

mod energy;
mod reflection;
mod tracks;
mod zeros;

pub use energy::{energy_series, energy_window};
pub use reflection::{reflect_diff, vlambda_decay, Reflection, VlambdaPoint, VlambdaSeries};
pub use tracks::{
    classify_case, critical_points, track_critical_points, CaseKind, CaseTag, CriticalKind,
    CriticalPoint, CriticalTrack, TrackSample,
};
pub use zeros::{
    count_zeros, zero_history, Companion, Zero, ZeroHistory, ZeroKind, ZeroReport, ZeroTolerances,
};
