//! Executable checks of the lemma estimates and the decay bound along a
//! sampled solution. Every violation carries the `(t1, t2, lhs, rhs)` witness.

use rand::Rng;
use serde::Serialize;

use crate::certifier::{theorem1_constants, window_samples, EtaCertificate};
use crate::coeff::{CoefficientPair, Eta, Region, RegionMap};
use crate::ddesim::{fit_decay_rate, MagnitudePath, Series};
use crate::error::Result;
use crate::scalar::Scalar;

/// Most violations kept per report; the count is always exact.
pub const MAX_RECORDED: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance<T> {
    pub relative: T,
    pub absolute: T,
}

impl<T: Scalar> Tolerance<T> {
    pub fn new(relative: T) -> Self {
        Tolerance {
            relative,
            absolute: T::lit(1e-9),
        }
    }

    fn allows(&self, lhs: T, rhs: T) -> bool {
        lhs <= rhs + self.relative * lhs.abs().max(rhs.abs()) + self.absolute
    }
}

impl<T: Scalar> Default for Tolerance<T> {
    fn default() -> Self {
        Self::new(T::lit(1e-3))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation<T: Scalar> {
    pub t1: T,
    pub t2: T,
    pub lhs: T,
    pub rhs: T,
    /// `rhs - lhs`
    pub slack: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport<T: Scalar> {
    pub name: String,
    pub checks: usize,
    pub violations: Vec<Violation<T>>,
    pub violation_count: usize,
    pub tolerance: T,
    pub passed: bool,
    /// smallest `rhs - lhs` seen
    #[serde(serialize_with = "crate::certifier::ser_extended")]
    pub min_slack: T,
    pub skipped: usize,
    pub notes: Vec<String>,
}

impl<T: Scalar> OracleReport<T> {
    fn new(name: &str, tolerance: T) -> Self {
        OracleReport {
            name: name.to_string(),
            checks: 0,
            violations: Vec::new(),
            violation_count: 0,
            tolerance,
            passed: true,
            min_slack: T::infinity(),
            skipped: 0,
            notes: Vec::new(),
        }
    }

    fn record(&mut self, t1: T, t2: T, lhs: T, rhs: T, ok: bool) {
        self.checks += 1;
        self.min_slack = self.min_slack.min(rhs - lhs);
        if !ok {
            self.violation_count += 1;
            self.passed = false;
            if self.violations.len() < MAX_RECORDED {
                self.violations.push(Violation {
                    t1,
                    t2,
                    lhs,
                    rhs,
                    slack: rhs - lhs,
                });
            }
        }
    }
}

/// A sampled solution magnitude together with its maximal function and the
/// classification of the pair it is checked against.
#[derive(Debug, Clone)]
pub struct OracleInput<T: Scalar> {
    pub path: MagnitudePath<T>,
    pub m0: Vec<T>,
    pub map: RegionMap<T>,
    pub eta: Eta<T>,
    pub m_a: T,
    pub m_b: T,
}

impl<T: Scalar> OracleInput<T> {
    pub fn new(path: MagnitudePath<T>, pair: &CoefficientPair<T>, eta: Eta<T>, resolution: T) -> Result<Self> {
        let m0 = path.maximal();
        let end = path.time(path.values.len() - 1);
        let map = RegionMap::for_pair(pair, eta, T::zero(), end, resolution)?;
        Ok(OracleInput {
            path,
            m0,
            map,
            eta,
            m_a: pair.m_a(),
            m_b: pair.m_b(),
        })
    }

    pub fn len(&self) -> usize {
        self.path.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.path.values.is_empty()
    }

    fn t(&self, i: usize) -> T {
        self.path.time(i)
    }

    fn index_at_or_after(&self, t: T) -> usize {
        (t / self.path.h - T::lit(1e-9))
            .ceil()
            .max(T::zero())
            .to_usize()
            .unwrap_or(0)
    }

    fn index_at_or_before(&self, t: T) -> usize {
        (t / self.path.h + T::lit(1e-9))
            .floor()
            .max(T::zero())
            .to_usize()
            .unwrap_or(0)
            .min(self.len() - 1)
    }
}

/// `M0` does not grow across a step that meets no unstable time.
pub fn check_lemma1<T: Scalar>(input: &OracleInput<T>, tol: Tolerance<T>) -> OracleReport<T> {
    let mut rep = OracleReport::new("lemma1", tol.relative);
    let h = input.path.h;
    let peak = input.m0.iter().fold(T::zero(), |m, &v| m.max(v));
    let slack = T::lit(10.0) * h * input.m_b * peak;
    for i in 0..input.len().saturating_sub(1) {
        let (t1, t2) = (input.t(i), input.t(i + 1));
        if input.map.measures(t1, t2).mu_minus > T::zero() {
            rep.skipped += 1;
            continue;
        }
        let (lhs, rhs) = (input.m0[i + 1], input.m0[i]);
        let ok = lhs <= rhs + slack || tol.allows(lhs, rhs);
        rep.record(t1, t2, lhs, rhs, ok);
    }
    rep
}

/// `M0(t2) <= M0(t1) e^{M_b μ_-(t1, t2)}` on the given grid index pairs.
pub fn check_lemma2<T: Scalar>(input: &OracleInput<T>, pairs: &[(usize, usize)], tol: Tolerance<T>) -> OracleReport<T> {
    let mut rep = OracleReport::new("lemma2", tol.relative);
    for &(i1, i2) in pairs {
        let (t1, t2) = (input.t(i1), input.t(i2));
        let mu = input.map.measures(t1, t2);
        let rhs = input.m0[i1] * (input.m_b * mu.mu_minus).exp();
        let lhs = input.m0[i2];
        rep.record(t1, t2, lhs, rhs, tol.allows(lhs, rhs));
    }
    rep
}

/// Right-hand side of the single-region estimate for an interval of length
/// `span` lying in `region`.
pub fn lemma3_bound<T: Scalar>(region: Region, x1: T, m0: T, span: T, eta: T, m_a: T, m_b: T) -> T {
    match region {
        Region::Plus => m0 - (m0 - x1) * (-(m_a * span)).exp(),
        Region::Eta => {
            let delta = T::one() - eta / (T::lit(2.0) * m_a);
            (delta * m0).max(x1 - eta / T::lit(2.0) * span * m0)
        }
        Region::Minus => x1 + m0 * (m_b * span).exp_m1(),
    }
}

/// The case bound on grid sub-intervals of every maximal single-region run.
/// At most `per_run` right endpoints are tried per run.
pub fn check_lemma3<T: Scalar>(input: &OracleInput<T>, per_run: usize, tol: Tolerance<T>) -> OracleReport<T> {
    let mut rep = OracleReport::new("lemma3", tol.relative);
    let per_run = per_run.max(1);
    for run in input.map.runs() {
        let i1 = input.index_at_or_after(run.start);
        let i2 = input.index_at_or_before(run.end);
        if i2 <= i1 || i1 >= input.len() {
            rep.skipped += 1;
            continue;
        }
        let stride = ((i2 - i1) / per_run).max(1);
        let t1 = input.t(i1);
        let mut j = i1 + stride;
        while j <= i2 {
            let t2 = input.t(j);
            let span = t2 - t1;
            let inside = input.map.measures(t1, t2).get(run.region);
            if inside < span * (T::one() - T::lit(1e-9)) {
                rep.skipped += 1;
                if rep.notes.len() < 10 {
                    rep.notes.push(format!("({t1}, {t2}) spans several regions, skipped"));
                }
            } else {
                let x1 = input.path.values[i1];
                let rhs = lemma3_bound(
                    run.region,
                    x1,
                    input.m0[i1],
                    span,
                    input.eta.value(),
                    input.m_a,
                    input.m_b,
                );
                let lhs = input.path.values[j];
                rep.record(t1, t2, lhs, rhs, tol.allows(lhs, rhs));
            }
            j += stride;
        }
    }
    rep
}

/// Right-hand side of the mixed-region estimate.
#[allow(clippy::too_many_arguments)]
pub fn lemma4_bound<T: Scalar>(x1: T, m0: T, mu_eta: T, mu_minus: T, mu_plus: T, eta: T, m_a: T, m_b: T) -> T {
    let delta = T::one() - eta / (T::lit(2.0) * m_a);
    let inner = (delta * m0).max(x1 - eta / T::lit(2.0) * mu_eta * m0);
    m0 * (m_b * mu_minus).exp() - (m0 - inner) * (-(m_a * mu_plus)).exp()
}

/// The mixed-region estimate on the given grid index pairs.
pub fn check_lemma4<T: Scalar>(input: &OracleInput<T>, pairs: &[(usize, usize)], tol: Tolerance<T>) -> OracleReport<T> {
    let mut rep = OracleReport::new("lemma4", tol.relative);
    for &(i1, i2) in pairs {
        let (t1, t2) = (input.t(i1), input.t(i2));
        let mu = input.map.measures(t1, t2);
        let rhs = lemma4_bound(
            input.path.values[i1],
            input.m0[i1],
            mu.mu_eta,
            mu.mu_minus,
            mu.mu_plus,
            input.eta.value(),
            input.m_a,
            input.m_b,
        );
        let lhs = input.path.values[i2];
        rep.record(t1, t2, lhs, rhs, tol.allows(lhs, rhs));
    }
    rep
}

/// Uniform bound `|x(t)| <= K M0(t0)` and, when the certificate carries a
/// rate, `|x(t)| <= K̃ M0(t0) e^{-α(t - t0)}` for `t >= t0`, with constants
/// measured from the path's own `M0` at the window starts.
pub fn check_theorem1_envelope<T: Scalar>(
    input: &OracleInput<T>,
    cert: &EtaCertificate<T>,
    tol: Tolerance<T>,
) -> Result<OracleReport<T>> {
    let mut rep = OracleReport::new("theorem1_envelope", tol.relative);
    let h = input.path.h;
    let samples = window_samples(cert, &input.m0, h);
    let constants = theorem1_constants(cert, &samples)?;
    let start = input.index_at_or_after(cert.t0);
    if start >= input.len() {
        rep.notes.push("trajectory ends before t0".into());
        return Ok(rep);
    }
    let base = input.m0[start];
    let t0 = input.t(start);
    for i in start..input.len() {
        let t = input.t(i);
        let x = input.path.values[i];
        let uniform = constants.k * base;
        rep.record(t0, t, x, uniform, tol.allows(x, uniform));
        if let (Some(kt), Some(alpha)) = (constants.k_tilde, cert.alpha) {
            let env = kt * base * (-(alpha * (t - t0))).exp();
            rep.record(t0, t, x, env, tol.allows(x, env));
        }
    }
    rep.notes.push(format!(
        "K' = {}, K = {}, K_tilde = {}",
        constants.k_prime,
        constants.k,
        constants.k_tilde.map(|v| v.to_string()).unwrap_or_else(|| "-".into())
    ));
    Ok(rep)
}

/// Fitted decay rate of `|x|` from `t_start` against the certified rate.
/// Skipped when the certificate carries no rate or the path is identically
/// zero from `t_start` on.
pub fn check_decay_rate<T: Scalar>(
    input: &OracleInput<T>,
    cert: &EtaCertificate<T>,
    t_start: T,
) -> Result<(OracleReport<T>, Option<T>)> {
    let mut rep = OracleReport::new("decay_rate", T::zero());
    let Some(alpha) = cert.alpha else {
        rep.skipped += 1;
        rep.notes.push("certificate has no rate".into());
        return Ok((rep, None));
    };
    let times: Vec<T> = (0..input.len()).map(|i| input.t(i)).collect();
    let series = Series {
        times,
        values: input.m0.clone(),
    };
    let tail_zero = series
        .times
        .iter()
        .zip(&series.values)
        .all(|(&t, &v)| t < t_start || v == T::zero());
    if tail_zero {
        rep.skipped += 1;
        rep.notes.push("zero solution".into());
        return Ok((rep, None));
    }
    let fitted = fit_decay_rate(&series, t_start)?;
    rep.record(t_start, series.times[series.len() - 1], alpha, fitted, alpha <= fitted);
    Ok((rep, Some(fitted)))
}

/// Random grid index pairs `i1 < i2`. When the map has unstable runs, at
/// least a third of the pairs straddle one of them.
pub fn sample_pairs<T: Scalar, R: Rng + ?Sized>(
    input: &OracleInput<T>,
    count: usize,
    reach: T,
    rng: &mut R,
) -> Vec<(usize, usize)> {
    let last = input.len() - 1;
    if last == 0 {
        return Vec::new();
    }
    let minus: Vec<_> = input.map.runs().iter().filter(|r| r.region == Region::Minus).collect();
    let straddle = if minus.is_empty() { 0 } else { count.div_ceil(3) };
    let reach_steps = (reach / input.path.h).ceil().to_usize().unwrap_or(1).max(1);
    let mut out = Vec::with_capacity(count);
    for _ in 0..straddle {
        let run = minus[rng.gen_range(0..minus.len())];
        let a = input.index_at_or_before(run.start);
        let b = (input.index_at_or_after(run.end)).min(last);
        let i1 = a.saturating_sub(rng.gen_range(0..=reach_steps));
        let i2 = (b + rng.gen_range(0..=reach_steps)).min(last).max(i1 + 1);
        out.push((i1, i2));
    }
    while out.len() < count {
        let i1 = rng.gen_range(0..last);
        let i2 = if rng.gen_bool(0.5) {
            (i1 + rng.gen_range(1..=reach_steps)).min(last)
        } else {
            rng.gen_range(i1 + 1..=last)
        };
        out.push((i1, i2));
    }
    out
}

/// Lemmas 1-4 and, for a certified pair, the decay envelope.
pub fn run_battery<T: Scalar, R: Rng + ?Sized>(
    input: &OracleInput<T>,
    cert: Option<&EtaCertificate<T>>,
    pairs: usize,
    tol: Tolerance<T>,
    rng: &mut R,
) -> Result<Vec<OracleReport<T>>> {
    let reach = input.path.tau_max * T::lit(4.0);
    let sampled = sample_pairs(input, pairs, reach, rng);
    let mut out = vec![
        check_lemma1(input, tol),
        check_lemma2(input, &sampled, tol),
        check_lemma3(input, 20, tol),
        check_lemma4(input, &sampled, tol),
    ];
    if let Some(cert) = cert {
        out.push(check_theorem1_envelope(input, cert, tol)?);
    }
    Ok(out)
}

/// Random piecewise-constant coefficient pairs.
pub mod synth {
    use rand::Rng;

    use crate::coeff::CoefficientPair;
    use crate::error::Result;
    use crate::expr::Expr;
    use crate::piecewise::{PiecewiseFunction, Segment};
    use crate::scalar::Scalar;

    fn steps(cuts: &[f64], values: &[f64], period: Option<f64>, tail: f64) -> Result<PiecewiseFunction> {
        let segments = cuts
            .windows(2)
            .zip(values)
            .map(|(w, &v)| Segment {
                from: w[0],
                to: w[1],
                expr: Expr::Const(v),
            })
            .collect();
        PiecewiseFunction::new(segments, Expr::Const(tail), period)
    }

    /// Pair with `segments` constant pieces of random length on `[0, span)`,
    /// `a` in `[0.5, 2]` and `b` in `[-2, 2]`.
    pub fn random_pair<T: Scalar, R: Rng + ?Sized>(
        rng: &mut R,
        segments: usize,
        span: f64,
        tau_max: T,
    ) -> Result<CoefficientPair<T>> {
        let mut cuts: Vec<f64> = (0..segments.saturating_sub(1))
            .map(|_| rng.gen_range(0.0..span))
            .collect();
        cuts.push(0.0);
        cuts.push(span);
        cuts.sort_by(f64::total_cmp);
        let a: Vec<f64> = (0..segments).map(|_| rng.gen_range(0.5..2.0)).collect();
        let b: Vec<f64> = (0..segments).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let m_a = a.iter().fold(0.0f64, |m, &v| m.max(v));
        let m_b = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        CoefficientPair::new(
            steps(&cuts, &a, None, a[segments - 1])?,
            steps(&cuts, &b, None, b[segments - 1])?,
            T::lit(m_a),
            T::lit(m_b),
            tau_max,
        )
    }

    /// Period-2 pair with `τ_max = 1` that meets the η-condition for `η`
    /// and `N = 1` by construction: each period has a strongly stable stretch
    /// at the start, one short unstable burst sized so every window ratio
    /// stays below `η/4`, and weakly stable time elsewhere.
    pub fn certified_pair<T: Scalar, R: Rng + ?Sized>(rng: &mut R, eta: f64) -> Result<CoefficientPair<T>> {
        let a: f64 = rng.gen_range(1.0..2.0);
        let stable: f64 = rng.gen_range(0.3..0.9);
        let m_b = a + rng.gen_range(0.05..0.5);
        let w_max = ((eta / 4.0) * (1.0 / a).min(stable) * (-2.0 * a).exp()).ln_1p() / m_b;
        let width = rng.gen_range(0.2..1.0) * w_max;
        let start = rng.gen_range(stable + 0.05..1.9 - width);
        let b_eta = (a - eta) * rng.gen_range(0.0..1.0);
        let b_plus = a - eta * rng.gen_range(0.0..0.9);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let cuts = [0.0, stable, start, start + width, 2.0];
        let b = steps(&cuts, &[sign * b_eta, b_plus, -sign * m_b, b_plus], Some(2.0), b_plus)?;
        CoefficientPair::new(PiecewiseFunction::constant(a), b, T::lit(a), T::lit(m_b), T::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_master_bound_covers_start() {
        let rhs = lemma4_bound(0.7, 1.0, 0.0, 0.0, 0.0, 0.2, 1.0, 1.2);
        assert!(rhs >= 0.7);
        assert_eq!(lemma4_bound(0.0, 0.0, 0.3, 0.1, 0.2, 0.2, 1.0, 1.2), 0.0);
    }

    #[test]
    fn master_bound_reduces_to_case_bounds() {
        let (x1, m0, eta, m_a, m_b) = (0.6f64, 1.0, 0.2, 1.0, 1.2);
        let s = 0.3;
        let eta_case = lemma4_bound(x1, m0, s, 0.0, 0.0, eta, m_a, m_b);
        assert_eq!(eta_case, lemma3_bound(Region::Eta, x1, m0, s, eta, m_a, m_b));
        // for |x1| >= δ M0 the + and − reductions coincide with the case bounds
        let x1 = 0.95f64;
        let plus = lemma4_bound(x1, m0, 0.0, 0.0, s, eta, m_a, m_b);
        assert!((plus - lemma3_bound(Region::Plus, x1, m0, s, eta, m_a, m_b)).abs() < 1e-15);
        let minus = lemma4_bound(x1, m0, 0.0, s, 0.0, eta, m_a, m_b);
        assert!((minus - lemma3_bound(Region::Minus, x1, m0, s, eta, m_a, m_b)).abs() < 1e-15);
    }

    #[test]
    fn tolerance_has_floor() {
        let tol = Tolerance::<f64>::default();
        assert!(tol.allows(1e-10, 0.0));
        assert!(!tol.allows(1e-8, 0.0));
        assert!(tol.allows(1.0005, 1.0));
        assert!(!tol.allows(1.002, 1.0));
    }
}
