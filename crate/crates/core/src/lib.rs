//! Stability certificates for scalar delay inequalities with time-varying
//! coefficients and bounded time-varying delays, plus the simulation and
//! property-checking machinery used to exercise them on concrete systems.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the common double-precision case.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certifier;
pub mod coeff;
pub mod ddesim;
pub mod error;
pub mod expr;
pub mod oracle;
pub mod piecewise;
pub mod scalar;

pub use certifier::{
    check_eta_condition, check_periodic_condition, common_pair, theorem1_constants, window_ratio, CertifyParams,
    EtaCertificate, PeriodicCheck, Verdict, WindowStats,
};
pub use coeff::{
    bound_estimates, classify, extrema, partition_measures, Boundary, CoefficientPair, Eta, MeasureTriple, PairSource,
    PairValue, Region, RegionMap,
};
pub use ddesim::{integrate, HistorySegment, MagnitudePath, Series, SystemSpec, Trajectory};
pub use error::{Error, EvalError, Result};
pub use expr::{Expr, ParseError};
pub use oracle::{OracleInput, OracleReport, Tolerance};
pub use piecewise::{PiecewiseDef, PiecewiseFunction, Segment, SegmentDef};
pub use scalar::Scalar;

pub type CoefficientPair64 = CoefficientPair<f64>;
pub type Eta64 = Eta<f64>;
pub type MeasureTriple64 = MeasureTriple<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type EtaCertificate64 = EtaCertificate<f64>;
