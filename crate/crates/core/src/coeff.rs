//! Coefficient pairs `{a(t), b(t)}`, their pointwise classification into the
//! strongly stable, weakly stable and unstable sets, and the Lebesgue measure
//! of those sets over an interval.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, EvalError, Result};
use crate::piecewise::PiecewiseFunction;
use crate::scalar::Scalar;

/// Values of a coefficient pair at one instant. `scale` bounds the magnitude
/// of the terms that produced the margin and sets the rounding tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairValue<T> {
    pub a: T,
    pub b: T,
    pub scale: T,
}

impl<T: Scalar> PairValue<T> {
    pub fn margin(&self) -> T {
        self.a - self.b.abs()
    }
}

/// Something that yields `(a(t), b(t))`.
pub trait PairSource<T: Scalar>: fmt::Debug + Send + Sync {
    fn eval(&self, t: T) -> Result<PairValue<T>, EvalError>;

    /// Known discontinuities inside `(t1, t2)`; used as extra sample points.
    fn breakpoints(&self, _t1: f64, _t2: f64) -> Vec<f64> {
        Vec::new()
    }
}

/// Pair given by two explicit signals.
#[derive(Debug, Clone)]
pub struct ExplicitPair {
    pub a: PiecewiseFunction,
    pub b: PiecewiseFunction,
}

impl<T: Scalar> PairSource<T> for ExplicitPair {
    fn eval(&self, t: T) -> Result<PairValue<T>, EvalError> {
        let a = self.a.eval(t)?;
        let b = self.b.eval(t)?;
        Ok(PairValue {
            a,
            b,
            scale: a.abs() + b.abs(),
        })
    }

    fn breakpoints(&self, t1: f64, t2: f64) -> Vec<f64> {
        let mut v = self.a.breakpoints(t1, t2);
        v.extend(self.b.breakpoints(t1, t2));
        v
    }
}

/// Pointwise worst member of a family of pairs: at each `t` the pair with the
/// smallest margin, ties going to the lowest index.
#[derive(Debug, Clone)]
pub struct MinMarginPair<T: Scalar> {
    pub members: Vec<CoefficientPair<T>>,
}

impl<T: Scalar> MinMarginPair<T> {
    pub fn argmin(&self, t: T) -> Result<(usize, PairValue<T>), EvalError> {
        let mut best: Option<(usize, PairValue<T>)> = None;
        for (i, p) in self.members.iter().enumerate() {
            let v = p.eval(t)?;
            match best {
                Some((_, b)) if v.margin() >= b.margin() => {}
                _ => best = Some((i, v)),
            }
        }
        Ok(best.expect("non-empty family"))
    }
}

impl<T: Scalar> PairSource<T> for MinMarginPair<T> {
    fn eval(&self, t: T) -> Result<PairValue<T>, EvalError> {
        self.argmin(t).map(|(_, v)| v)
    }

    fn breakpoints(&self, t1: f64, t2: f64) -> Vec<f64> {
        self.members.iter().flat_map(|m| m.source.breakpoints(t1, t2)).collect()
    }
}

/// A coefficient pair with its declared bounds `a <= m_a`, `|b| <= m_b` and the
/// delay bound `tau_max`.
#[derive(Clone)]
pub struct CoefficientPair<T: Scalar> {
    source: Arc<dyn PairSource<T>>,
    m_a: T,
    m_b: T,
    tau_max: T,
}

impl<T: Scalar> fmt::Debug for CoefficientPair<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientPair")
            .field("source", &self.source)
            .field("m_a", &self.m_a)
            .field("m_b", &self.m_b)
            .field("tau_max", &self.tau_max)
            .finish()
    }
}

impl<T: Scalar> CoefficientPair<T> {
    pub fn new(a: PiecewiseFunction, b: PiecewiseFunction, m_a: T, m_b: T, tau_max: T) -> Result<Self> {
        Self::from_source(Arc::new(ExplicitPair { a, b }), m_a, m_b, tau_max)
    }

    pub fn from_source(source: Arc<dyn PairSource<T>>, m_a: T, m_b: T, tau_max: T) -> Result<Self> {
        if !(m_a > T::zero() && m_a.is_finite()) {
            return Err(Error::InvalidParameter(format!("M_a must be positive, got {m_a}")));
        }
        if !(m_b >= T::zero() && m_b.is_finite()) {
            return Err(Error::InvalidParameter(format!("M_b must be nonnegative, got {m_b}")));
        }
        if !(tau_max > T::zero() && tau_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tau_max must be positive, got {tau_max}"
            )));
        }
        Ok(CoefficientPair {
            source,
            m_a,
            m_b,
            tau_max,
        })
    }

    /// Constant pair `a ≡ a0`, `b ≡ b0` with bounds taken from the values.
    pub fn constant(a0: f64, b0: f64, tau_max: T) -> Result<Self> {
        Self::new(
            PiecewiseFunction::constant(a0),
            PiecewiseFunction::constant(b0),
            T::lit(a0),
            T::lit(b0.abs()),
            tau_max,
        )
    }

    pub fn m_a(&self) -> T {
        self.m_a
    }

    pub fn m_b(&self) -> T {
        self.m_b
    }

    pub fn tau_max(&self) -> T {
        self.tau_max
    }

    pub fn source(&self) -> &Arc<dyn PairSource<T>> {
        &self.source
    }

    pub fn eval(&self, t: T) -> Result<PairValue<T>, EvalError> {
        self.source.eval(t)
    }

    pub fn margin(&self, t: T) -> Result<T, EvalError> {
        self.eval(t).map(|v| v.margin())
    }

    /// Checks `0 < a(t) <= M_a` and `|b(t)| <= M_b` on a uniform grid.
    pub fn validate_on_grid(&self, t1: T, t2: T, resolution: T) -> Result<()> {
        for t in grid_points(t1, t2, resolution)? {
            let v = self.eval(t)?;
            let tol = T::classification_tolerance(v.scale.max(self.m_a).max(self.m_b));
            if !(v.a > T::zero()) {
                return Err(Error::BoundViolation {
                    t: t.as_f64(),
                    what: format!("a = {} is not positive", v.a),
                });
            }
            if v.a > self.m_a + tol {
                return Err(Error::BoundViolation {
                    t: t.as_f64(),
                    what: format!("a = {} exceeds M_a = {}", v.a, self.m_a),
                });
            }
            if v.b.abs() > self.m_b + tol {
                return Err(Error::BoundViolation {
                    t: t.as_f64(),
                    what: format!("|b| = {} exceeds M_b = {}", v.b.abs(), self.m_b),
                });
            }
        }
        Ok(())
    }
}

/// Which of the three sets an instant belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    /// margin above the η threshold
    #[serde(rename = "eta")]
    Eta,
    /// negative margin, `a < |b|`
    #[serde(rename = "minus")]
    Minus,
    /// everything else, `0 <= margin` and below the threshold
    #[serde(rename = "plus")]
    Plus,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Region::Eta => "η",
            Region::Minus => "−",
            Region::Plus => "+",
        })
    }
}

/// How a margin exactly equal to η is labelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// `margin >= η` counts as strongly stable, up to rounding of the margin.
    #[default]
    Closed,
    /// `margin > η` in exact floating point comparison.
    Open,
}

/// Positive threshold η together with its boundary rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eta<T> {
    value: T,
    boundary: Boundary,
}

impl<T: Scalar> Eta<T> {
    pub fn new(value: T) -> Result<Self> {
        Self::with_boundary(value, Boundary::Closed)
    }

    pub fn open(value: T) -> Result<Self> {
        Self::with_boundary(value, Boundary::Open)
    }

    pub fn with_boundary(value: T, boundary: Boundary) -> Result<Self> {
        if !(value > T::zero() && value.is_finite()) {
            return Err(Error::InvalidParameter(format!("eta must be positive, got {value}")));
        }
        Ok(Eta { value, boundary })
    }

    pub fn value(&self) -> T {
        self.value
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn half(&self) -> T {
        self.value / T::lit(2.0)
    }

    /// Labels a margin computed from terms of magnitude `scale`.
    pub fn classify_margin(&self, margin: T, scale: T) -> Region {
        match self.boundary {
            Boundary::Open => {
                if margin > self.value {
                    Region::Eta
                } else if margin < T::zero() {
                    Region::Minus
                } else {
                    Region::Plus
                }
            }
            Boundary::Closed => {
                let tol = T::classification_tolerance(scale + self.value);
                if margin >= self.value - tol {
                    Region::Eta
                } else if margin < -tol {
                    Region::Minus
                } else {
                    Region::Plus
                }
            }
        }
    }
}

/// Labels time `t` as `η`, `−` or `+`.
pub fn classify<T: Scalar>(pair: &CoefficientPair<T>, eta: Eta<T>, t: T) -> Result<Region, EvalError> {
    let v = pair.eval(t)?;
    Ok(eta.classify_margin(v.margin(), v.scale))
}

/// Measures of the three sets over `interval`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureTriple<T> {
    pub mu_eta: T,
    pub mu_minus: T,
    pub mu_plus: T,
    pub interval: (T, T),
}

impl<T: Scalar> MeasureTriple<T> {
    pub fn get(&self, r: Region) -> T {
        match r {
            Region::Eta => self.mu_eta,
            Region::Minus => self.mu_minus,
            Region::Plus => self.mu_plus,
        }
    }

    pub fn sum(&self) -> T {
        self.mu_eta + self.mu_minus + self.mu_plus
    }

    pub fn span(&self) -> T {
        self.interval.1 - self.interval.0
    }
}

/// Maximal interval carrying a single label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Run<T> {
    pub region: Region,
    pub start: T,
    pub end: T,
}

/// Labelling of an interval as a sequence of runs, built by sampling on a
/// uniform grid (plus known breakpoints) and bisecting every cell whose end
/// labels differ down to `resolution / 1024`.
///
/// Label changes that start and end inside a single cell are not detected.
#[derive(Debug, Clone)]
pub struct RegionMap<T> {
    runs: Vec<Run<T>>,
    // measure of each region on [t1, runs[i].start], indexed eta/minus/plus
    prefix: Vec<[T; 3]>,
    boundaries: usize,
    tolerance: T,
}

fn slot(r: Region) -> usize {
    match r {
        Region::Eta => 0,
        Region::Minus => 1,
        Region::Plus => 2,
    }
}

pub(crate) fn grid_points<T: Scalar>(t1: T, t2: T, resolution: T) -> Result<Vec<T>> {
    if !(t1 < t2) || !t1.is_finite() || !t2.is_finite() {
        return Err(Error::EmptyInterval {
            t1: t1.as_f64(),
            t2: t2.as_f64(),
        });
    }
    if !(resolution > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "resolution must be positive, got {resolution}"
        )));
    }
    let cells = ((t2 - t1) / resolution).ceil().to_usize().unwrap_or(1).max(1);
    let mut pts: Vec<T> = (0..cells).map(|i| t1 + resolution * T::from_usize_lossy(i)).collect();
    pts.push(t2);
    Ok(pts)
}

impl<T: Scalar> RegionMap<T> {
    pub fn build<F>(label: F, t1: T, t2: T, resolution: T, extra: &[f64]) -> Result<Self>
    where
        F: Fn(T) -> Result<Region, EvalError>,
    {
        let grid = grid_points(t1, t2, resolution)?;
        let mut extra: Vec<T> = extra.iter().map(|&x| T::lit(x)).filter(|&x| x > t1 && x < t2).collect();
        extra.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
        extra.dedup();
        // (time, is a known jump)
        let mut samples: Vec<(T, bool)> = grid.into_iter().map(|t| (t, false)).collect();
        if !extra.is_empty() {
            samples.extend(extra.into_iter().map(|t| (t, true)));
            samples.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite samples").then(b.1.cmp(&a.1)));
            samples.dedup_by(|b, a| a.0 == b.0);
        }
        let tolerance = resolution / T::lit(1024.0);
        let mut builder = Builder {
            label: &label,
            tolerance,
            runs: Vec::new(),
            boundaries: 0,
        };
        let mut prev_t = samples[0].0;
        let mut prev_l = label(prev_t)?;
        for (idx, &(t, jump)) in samples.iter().enumerate().skip(1) {
            let nudge = T::epsilon() * T::lit(64.0) * t.abs().max(T::one());
            let next = samples.get(idx + 1).map(|s| s.0).unwrap_or(t2);
            if jump && t - nudge > prev_t && t + nudge < next {
                // a jump at a known breakpoint sits exactly there; probe both
                // sides so rounding in the period reduction cannot move it
                let left = t - nudge;
                let right = t + nudge;
                let l_left = label(left)?;
                let l_right = label(right)?;
                builder.refine(prev_t, prev_l, left, l_left)?;
                builder.push(l_left, left, t);
                builder.push(l_right, t, right);
                if l_left != l_right {
                    builder.boundaries += 1;
                }
                prev_t = right;
                prev_l = l_right;
            } else {
                // the last sample takes its left limit
                let l = if idx + 1 == samples.len() && t - nudge > prev_t {
                    label(t - nudge)?
                } else {
                    label(t)?
                };
                builder.refine(prev_t, prev_l, t, l)?;
                prev_t = t;
                prev_l = l;
            }
        }
        let Builder { runs, boundaries, .. } = builder;
        let mut prefix = Vec::with_capacity(runs.len());
        let mut acc = [T::zero(); 3];
        for r in &runs {
            prefix.push(acc);
            acc[slot(r.region)] = acc[slot(r.region)] + (r.end - r.start);
        }
        Ok(RegionMap {
            runs,
            prefix,
            boundaries,
            tolerance,
        })
    }

    /// Region map of a coefficient pair at level η.
    pub fn for_pair(pair: &CoefficientPair<T>, eta: Eta<T>, t1: T, t2: T, resolution: T) -> Result<Self> {
        let extra = pair.source().breakpoints(t1.as_f64(), t2.as_f64());
        Self::build(|t| classify(pair, eta, t), t1, t2, resolution, &extra)
    }

    pub fn runs(&self) -> &[Run<T>] {
        &self.runs
    }

    pub fn boundaries(&self) -> usize {
        self.boundaries
    }

    pub fn tolerance(&self) -> T {
        self.tolerance
    }

    pub fn start(&self) -> T {
        self.runs[0].start
    }

    pub fn end(&self) -> T {
        self.runs[self.runs.len() - 1].end
    }

    fn cumulative(&self, x: T) -> [T; 3] {
        let x = x.max(self.start()).min(self.end());
        let idx = self.runs.partition_point(|r| r.end <= x).min(self.runs.len() - 1);
        let run = &self.runs[idx];
        let mut acc = self.prefix[idx];
        let s = slot(run.region);
        acc[s] = acc[s] + (x - run.start).max(T::zero());
        acc
    }

    /// Measures over the sub-interval `(a, b)`, clipped to the mapped range.
    pub fn measures(&self, a: T, b: T) -> MeasureTriple<T> {
        let lo = self.cumulative(a);
        let hi = self.cumulative(b);
        MeasureTriple {
            mu_eta: (hi[0] - lo[0]).max(T::zero()),
            mu_minus: (hi[1] - lo[1]).max(T::zero()),
            mu_plus: (hi[2] - lo[2]).max(T::zero()),
            interval: (a, b),
        }
    }

    pub fn total(&self) -> MeasureTriple<T> {
        self.measures(self.start(), self.end())
    }

    /// Region at `t`, read from the map.
    pub fn region_at(&self, t: T) -> Region {
        let idx = self.runs.partition_point(|r| r.end <= t).min(self.runs.len() - 1);
        self.runs[idx].region
    }
}

struct Builder<'a, T, F> {
    label: &'a F,
    tolerance: T,
    runs: Vec<Run<T>>,
    boundaries: usize,
}

impl<T: Scalar, F: Fn(T) -> Result<Region, EvalError>> Builder<'_, T, F> {
    fn push(&mut self, region: Region, start: T, end: T) {
        if end <= start {
            return;
        }
        if let Some(last) = self.runs.last_mut() {
            if last.region == region {
                last.end = end;
                return;
            }
        }
        self.runs.push(Run { region, start, end });
    }

    fn refine(&mut self, lo: T, l_lo: Region, hi: T, l_hi: Region) -> Result<(), EvalError> {
        if l_lo == l_hi {
            self.push(l_lo, lo, hi);
            return Ok(());
        }
        if hi - lo <= self.tolerance {
            let mid = lo + (hi - lo) / T::lit(2.0);
            self.push(l_lo, lo, mid);
            self.push(l_hi, mid, hi);
            self.boundaries += 1;
            return Ok(());
        }
        let mid = lo + (hi - lo) / T::lit(2.0);
        let l_mid = (self.label)(mid)?;
        self.refine(lo, l_lo, mid, l_mid)?;
        self.refine(mid, l_mid, hi, l_hi)
    }
}

/// Measures of the η, − and + sets of `pair` over `(t1, t2)`.
pub fn partition_measures<T: Scalar>(
    pair: &CoefficientPair<T>,
    eta: Eta<T>,
    t1: T,
    t2: T,
    resolution: T,
) -> Result<MeasureTriple<T>> {
    Ok(RegionMap::for_pair(pair, eta, t1, t2, resolution)?.total())
}

/// Grid estimates of `inf f` and `sup f` over `[t1, t2]`; the best grid points
/// are polished with a golden-section search on their neighbouring cells.
pub fn extrema<T, F>(f: F, t1: T, t2: T, resolution: T) -> Result<(T, T)>
where
    T: Scalar,
    F: Fn(T) -> Result<T, EvalError>,
{
    let pts = grid_points(t1, t2, resolution)?;
    let vals = pts.iter().map(|&t| f(t)).collect::<Result<Vec<_>, _>>()?;
    let (mut imin, mut imax) = (0, 0);
    for (i, &v) in vals.iter().enumerate() {
        if v < vals[imin] {
            imin = i;
        }
        if v > vals[imax] {
            imax = i;
        }
    }
    let bracket = |i: usize| (pts[i.saturating_sub(1)], pts[(i + 1).min(pts.len() - 1)]);
    let (a, b) = bracket(imax);
    let sup = golden(&f, a, b, true)?.max(vals[imax]);
    let (a, b) = bracket(imin);
    let inf = golden(&f, a, b, false)?.min(vals[imin]);
    Ok((inf, sup))
}

fn golden<T: Scalar, F: Fn(T) -> Result<T, EvalError>>(
    f: F,
    mut a: T,
    mut b: T,
    maximize: bool,
) -> Result<T, EvalError> {
    let sign = if maximize { T::one() } else { -T::one() };
    let g = |t: T| f(t).map(|v| v * sign);
    let ratio = T::lit(0.618_033_988_749_894_8);
    let mut c = b - (b - a) * ratio;
    let mut d = a + (b - a) * ratio;
    let (mut fc, mut fd) = (g(c)?, g(d)?);
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * ratio;
            fc = g(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * ratio;
            fd = g(d)?;
        }
    }
    Ok(fc.max(fd) * sign)
}

/// Grid estimates of the infimum and supremum of `f` over `[t1, t2]`.
pub fn bound_estimates<T: Scalar>(f: &PiecewiseFunction, t1: T, t2: T, resolution: T) -> Result<(T, T)> {
    extrema(|t| f.eval(t), t1, t2, resolution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::piecewise::Segment;
    use approx::assert_abs_diff_eq;

    fn sawtooth_b() -> PiecewiseFunction {
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

    fn sawtooth_pair() -> CoefficientPair<f64> {
        CoefficientPair::new(PiecewiseFunction::constant(1.0), sawtooth_b(), 1.0, 1.2, 1.0).unwrap()
    }

    #[test]
    fn classify_boundary_rules() {
        let pair = CoefficientPair::<f64>::constant(1.0, 0.8, 1.0).unwrap();
        assert_eq!(classify(&pair, Eta::open(0.2).unwrap(), 0.1).unwrap(), Region::Plus);
        assert_eq!(classify(&pair, Eta::new(0.2).unwrap(), 0.1).unwrap(), Region::Eta);
    }

    #[test]
    fn classify_minus_during_burst() {
        let pair = sawtooth_pair();
        for eta in [0.01, 0.2, 5.0] {
            assert_eq!(classify(&pair, Eta::new(eta).unwrap(), 1.001).unwrap(), Region::Minus);
        }
    }

    #[test]
    fn classify_constant_margin() {
        let pair = CoefficientPair::<f64>::constant(2.0, 1.0, 1.0).unwrap();
        for t in [0.0, 0.3, 17.0] {
            assert_eq!(classify(&pair, Eta::new(0.5).unwrap(), t).unwrap(), Region::Eta);
        }
    }

    #[test]
    fn zero_margin_is_plus() {
        let pair = CoefficientPair::<f64>::constant(1.0, 1.0, 1.0).unwrap();
        assert_eq!(classify(&pair, Eta::new(0.1).unwrap(), 0.0).unwrap(), Region::Plus);
        assert_eq!(classify(&pair, Eta::open(0.1).unwrap(), 0.0).unwrap(), Region::Plus);
    }

    #[test]
    fn sawtooth_window_measures() {
        let m = partition_measures(&sawtooth_pair(), Eta::new(0.2).unwrap(), 0.0, 2.0, 1e-3).unwrap();
        assert_abs_diff_eq!(m.mu_eta, 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(m.mu_minus, 0.002, epsilon = 1e-6);
        assert_abs_diff_eq!(m.mu_plus, 1.498, epsilon = 1e-6);
    }

    #[test]
    fn sawtooth_open_boundary_has_no_eta_set() {
        let m = partition_measures(&sawtooth_pair(), Eta::open(0.2).unwrap(), 0.0, 2.0, 1e-3).unwrap();
        assert_eq!(m.mu_eta, 0.0);
        assert_abs_diff_eq!(m.mu_minus, 0.002, epsilon = 1e-6);
    }

    #[test]
    fn constant_margin_measures() {
        let pair = CoefficientPair::<f64>::constant(2.0, 1.0, 1.0).unwrap();
        let m = partition_measures(&pair, Eta::new(0.5).unwrap(), 0.0, 10.0, 1e-3).unwrap();
        assert_abs_diff_eq!(m.mu_eta, 10.0, epsilon = 1e-9);
        assert_eq!(m.mu_minus, 0.0);
        assert_eq!(m.mu_plus, 0.0);
    }

    #[test]
    fn smooth_boundaries_are_bisected() {
        // margin 1 - |0.5 + sin(t)| is negative exactly where sin(t) > 0.5 or sin(t) < -1.5
        let pair = CoefficientPair::new(
            PiecewiseFunction::constant(1.0),
            PiecewiseFunction::parse("0.5+sin(t)").unwrap(),
            1.0,
            1.5,
            1.0,
        )
        .unwrap();
        let pi = std::f64::consts::PI;
        let m = partition_measures(&pair, Eta::new(0.25).unwrap(), 0.0, 2.0 * pi, 1e-2).unwrap();
        assert_abs_diff_eq!(m.mu_minus, 2.0 * pi / 3.0, epsilon = 1e-4);
        assert_abs_diff_eq!(m.sum(), 2.0 * pi, epsilon = 1e-9);
    }

    #[test]
    fn nonpositive_interval_rejected() {
        let pair = sawtooth_pair();
        let eta = Eta::new(0.2).unwrap();
        assert!(matches!(
            partition_measures(&pair, eta, 1.0, 1.0, 1e-3),
            Err(Error::EmptyInterval { .. })
        ));
        assert!(matches!(
            partition_measures(&pair, eta, 0.0, 1.0, 0.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn evaluation_error_propagates() {
        let pair = CoefficientPair::new(
            PiecewiseFunction::parse("1/(t-0.5)").unwrap(),
            PiecewiseFunction::constant(0.0),
            10.0,
            1.0,
            1.0,
        )
        .unwrap();
        let r = partition_measures(&pair, Eta::new(0.1).unwrap(), 0.0, 1.0, 0.25);
        assert!(matches!(r, Err(Error::Eval(EvalError::DivisionByZero { .. }))));
    }

    #[test]
    fn region_map_sub_measures() {
        let map = RegionMap::for_pair(&sawtooth_pair(), Eta::new(0.2).unwrap(), 0.0, 8.0, 1e-3).unwrap();
        let m = map.measures(0.25, 1.001);
        assert_abs_diff_eq!(m.mu_eta, 0.25, epsilon = 1e-6);
        assert_abs_diff_eq!(m.mu_minus, 0.001, epsilon = 1e-6);
        assert_abs_diff_eq!(m.mu_plus, 0.5, epsilon = 1e-6);
        assert_eq!(map.region_at(3.0015), Region::Minus);
        assert_eq!(map.region_at(4.1), Region::Eta);
    }

    #[test]
    fn bounds_of_shifted_sine() {
        let f = PiecewiseFunction::parse("2+sin(pi*t)^2").unwrap();
        let (lo, hi) = bound_estimates(&f, 0.0, 2.0, 1e-3).unwrap();
        assert_abs_diff_eq!(lo, 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(hi, 3.0, epsilon = 1e-6);
    }

    #[test]
    fn bounds_of_constant() {
        let (lo, hi) = bound_estimates(&PiecewiseFunction::constant(1.2), 0.0, 5.0, 1e-2).unwrap();
        assert_eq!((lo, hi), (1.2, 1.2));
    }

    #[test]
    fn bounds_of_cubic_sine_margin() {
        // s^2 - s^3 peaks at s = 2/3 with value 4/27
        let f = PiecewiseFunction::parse("1+sin(pi*t)^2-abs(sin(pi*t))^3").unwrap();
        let (lo, hi) = bound_estimates(&f, 0.0, 1.0, 1e-3).unwrap();
        assert_abs_diff_eq!(hi, 31.0 / 27.0, epsilon = 1e-9);
        assert_abs_diff_eq!(lo, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn grid_validation_catches_bound_violations() {
        let pair = CoefficientPair::new(
            PiecewiseFunction::parse("1+0.5*sin(t)").unwrap(),
            PiecewiseFunction::constant(0.3),
            1.2,
            0.3,
            1.0,
        )
        .unwrap();
        assert!(matches!(
            pair.validate_on_grid(0.0, 7.0, 1e-2),
            Err(Error::BoundViolation { .. })
        ));
        let ok = CoefficientPair::<f64>::constant(1.0, -0.3, 1.0).unwrap();
        ok.validate_on_grid(0.0, 7.0, 1e-2).unwrap();
    }
}
