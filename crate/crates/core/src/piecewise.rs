//! Time signals assembled from expression segments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, EvalError, Result};
use crate::expr::Expr;
use crate::scalar::Scalar;

/// An expression active on the half-open interval `[from, to)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub from: f64,
    pub to: f64,
    pub expr: Expr,
}

/// A signal made of expression segments over sorted, disjoint half-open
/// intervals, with a default expression elsewhere. When `period` is set the
/// argument is first reduced into `[0, period)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFunction {
    segments: Vec<Segment>,
    default: Expr,
    period: Option<f64>,
}

impl PiecewiseFunction {
    pub fn new(segments: Vec<Segment>, default: Expr, period: Option<f64>) -> Result<Self> {
        if let Some(p) = period {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::InvalidPiecewise(format!("period must be positive, got {p}")));
            }
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.from.is_finite() && s.to.is_finite() && s.from < s.to) {
                return Err(Error::InvalidPiecewise(format!(
                    "segment {i} has invalid bounds [{}, {})",
                    s.from, s.to
                )));
            }
            if let Some(p) = period {
                if s.from < 0.0 || s.to > p {
                    return Err(Error::InvalidPiecewise(format!(
                        "segment {i} [{}, {}) leaves the period [0, {p})",
                        s.from, s.to
                    )));
                }
            }
            if i > 0 && segments[i - 1].to > s.from {
                return Err(Error::InvalidPiecewise(format!(
                    "segment {i} overlaps or precedes segment {}",
                    i - 1
                )));
            }
        }
        Ok(PiecewiseFunction {
            segments,
            default,
            period,
        })
    }

    pub fn from_expr(expr: Expr) -> Self {
        PiecewiseFunction {
            segments: Vec::new(),
            default: expr,
            period: None,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_expr(Expr::Const(c))
    }

    pub fn parse(source: &str) -> Result<Self> {
        Ok(Self::from_expr(Expr::parse(source)?))
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn default_expr(&self) -> &Expr {
        &self.default
    }

    pub fn period(&self) -> Option<f64> {
        self.period
    }

    /// Returns the value if the function does not depend on time.
    pub fn as_constant(&self) -> Option<f64> {
        if self.segments.is_empty() {
            self.default.as_constant()
        } else {
            None
        }
    }

    fn reduce<T: Scalar>(&self, t: T) -> T {
        match self.period {
            Some(p) => {
                let p = T::lit(p);
                let r = t - (t / p).floor() * p;
                // rounding can land exactly on the period
                if r >= p {
                    T::zero()
                } else {
                    r
                }
            }
            None => t,
        }
    }

    fn expr_at<T: Scalar>(&self, local: T) -> &Expr {
        let x = local.as_f64();
        let idx = self.segments.partition_point(|s| s.to <= x);
        match self.segments.get(idx) {
            Some(s) if s.from <= x => &s.expr,
            _ => &self.default,
        }
    }

    /// Evaluates the signal. Segment expressions see the original time `t`,
    /// not the reduced one, so periodic expressions can still be written in
    /// absolute time.
    pub fn eval<T: Scalar>(&self, t: T) -> Result<T, EvalError> {
        let local = self.reduce(t);
        self.expr_at(local).eval(t)
    }

    /// Segment endpoints inside `(t1, t2)`, unrolled over periods.
    pub fn breakpoints(&self, t1: f64, t2: f64) -> Vec<f64> {
        let mut out = Vec::new();
        if self.segments.is_empty() || !(t1 < t2) {
            return out;
        }
        let ends = self.segments.iter().flat_map(|s| [s.from, s.to]);
        match self.period {
            None => out.extend(ends.filter(|&x| x > t1 && x < t2)),
            Some(p) => {
                let first = (t1 / p).floor() as i64;
                let last = (t2 / p).ceil() as i64;
                for k in first..=last {
                    let base = k as f64 * p;
                    out.extend(
                        self.segments
                            .iter()
                            .flat_map(|s| [s.from, s.to])
                            .map(|x| base + x)
                            .filter(|&x| x > t1 && x < t2),
                    );
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    pub fn to_def(&self) -> PiecewiseDef {
        PiecewiseDef::Full {
            segments: self
                .segments
                .iter()
                .map(|s| SegmentDef {
                    from: s.from,
                    to: s.to,
                    expr: s.expr.to_string(),
                })
                .collect(),
            default: self.default.to_string(),
            period: self.period,
        }
    }
}

/// Serialized segment: `{from, to, expr}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentDef {
    pub from: f64,
    pub to: f64,
    pub expr: String,
}

/// Serialized piecewise function. A bare string is shorthand for a function
/// with no segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PiecewiseDef {
    Expr(String),
    Full {
        #[serde(default)]
        segments: Vec<SegmentDef>,
        default: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        period: Option<f64>,
    },
}

impl TryFrom<&PiecewiseDef> for PiecewiseFunction {
    type Error = Error;

    fn try_from(def: &PiecewiseDef) -> Result<Self> {
        match def {
            PiecewiseDef::Expr(src) => PiecewiseFunction::parse(src),
            PiecewiseDef::Full {
                segments,
                default,
                period,
            } => {
                let segments = segments
                    .iter()
                    .map(|s| {
                        Ok(Segment {
                            from: s.from,
                            to: s.to,
                            expr: Expr::parse(&s.expr)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                PiecewiseFunction::new(segments, Expr::parse(default)?, *period)
            }
        }
    }
}

impl TryFrom<PiecewiseDef> for PiecewiseFunction {
    type Error = Error;

    fn try_from(def: PiecewiseDef) -> Result<Self> {
        PiecewiseFunction::try_from(&def)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_b() -> PiecewiseFunction {
        PiecewiseFunction::new(
            vec![
                Segment {
                    from: 0.0,
                    to: 0.5,
                    expr: Expr::Const(0.8),
                },
                Segment {
                    from: 1.0,
                    to: 1.002,
                    expr: Expr::Const(1.2),
                },
            ],
            Expr::Const(1.0),
            Some(2.0),
        )
        .unwrap()
    }

    #[test]
    fn half_open_segments() {
        let b = step_b();
        assert_eq!(b.eval(0.0).unwrap(), 0.8);
        assert_eq!(b.eval(0.4999).unwrap(), 0.8);
        assert_eq!(b.eval(0.5).unwrap(), 1.0);
        assert_eq!(b.eval(1.001).unwrap(), 1.2);
        assert_eq!(b.eval(1.5).unwrap(), 1.0);
    }

    #[test]
    fn periodic_reduction() {
        let b = step_b();
        assert_eq!(b.eval(10.25).unwrap(), 0.8);
        assert_eq!(b.eval(11.001).unwrap(), 1.2);
        assert_eq!(b.eval(-1.0).unwrap(), 1.2);
        assert_eq!(b.eval(-0.25).unwrap(), 1.0);
    }

    #[test]
    fn segments_see_absolute_time() {
        let f = PiecewiseFunction::new(
            vec![Segment {
                from: 0.0,
                to: 1.0,
                expr: Expr::parse("t").unwrap(),
            }],
            Expr::Const(0.0),
            Some(2.0),
        )
        .unwrap();
        assert_eq!(f.eval(4.5).unwrap(), 4.5);
    }

    #[test]
    fn rejects_bad_layouts() {
        let seg = |a, b| Segment {
            from: a,
            to: b,
            expr: Expr::Const(1.0),
        };
        assert!(PiecewiseFunction::new(vec![seg(0.0, 1.0), seg(0.5, 2.0)], Expr::Const(0.0), None).is_err());
        assert!(PiecewiseFunction::new(vec![seg(1.0, 2.0), seg(0.0, 0.5)], Expr::Const(0.0), None).is_err());
        assert!(PiecewiseFunction::new(vec![seg(0.0, 3.0)], Expr::Const(0.0), Some(2.0)).is_err());
        assert!(PiecewiseFunction::new(vec![seg(1.0, 1.0)], Expr::Const(0.0), None).is_err());
        assert!(PiecewiseFunction::new(vec![], Expr::Const(0.0), Some(0.0)).is_err());
    }

    #[test]
    fn breakpoints_unroll() {
        let b = step_b();
        assert_eq!(b.breakpoints(0.0, 4.0), vec![0.5, 1.0, 1.002, 2.0, 2.5, 3.0, 3.002]);
    }

    #[test]
    fn def_round_trip() {
        let b = step_b();
        let back = PiecewiseFunction::try_from(b.to_def()).unwrap();
        for i in 0..400 {
            let t = i as f64 * 0.01;
            assert_eq!(b.eval(t).unwrap(), back.eval(t).unwrap());
        }
        let shorthand: PiecewiseFunction = PiecewiseDef::Expr("1+t".into()).try_into().unwrap();
        assert_eq!(shorthand.eval(2.0).unwrap(), 3.0);
    }
}
