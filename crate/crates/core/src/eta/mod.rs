//! Energy-window time-averaging: window selection, the classical standard
//! of comparison, and the simulator-side diagnostic.

pub mod arbitrate;
pub mod standardize;
pub mod time_average;
pub mod window;

pub use arbitrate::{
    arbitrate_variant1, arbitrate_variant2, AdiabaticSchedule, AnnealCache, AnnealOutcome,
    ArbitrationSettings, EdgeStates, InitializingHamiltonian, ScheduleSpace, SimulationDiagnostic,
    VariationalAnsatz,
};
pub use standardize::{
    standardize_variant1, standardize_variant2, StandardOfComparison, StandardizeSettings,
};
pub use time_average::{
    detect_gaps, time_average_simulated, GapEstimate, PeakSettings, TimeAverage, TimeAveraging,
};
pub use window::{select_window, variant1_member, variant2_member, EnergyWindow, WindowKind};
