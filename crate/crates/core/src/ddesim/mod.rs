//! Delay-differential simulation: system descriptions, initial data, an RK4
//! integrator with interpolated history, and derived series.

mod history;
mod integrate;
mod series;
mod svg;
mod system;

pub use history::{History, HistorySegment};
pub use integrate::{integrate, Trajectory};
pub use series::{
    extract_orbit, fit_decay_rate, maximal_function, periodic_residual, sync_error, MagnitudePath, Orbit, Series,
};
pub use svg::polyline_svg;
pub use system::{
    Activation, DelayFloor, DelayKind, DelaySpec, NetworkParts, NetworkSpec, PeriodicNetworkSpec, ScalarDde,
    ScalarForm, SystemSpec,
};
