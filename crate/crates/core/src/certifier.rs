//! Window statistics, the η-condition and its finite-horizon verdict, the
//! decay constants of the resulting certificate, reduction of a family of
//! pairs to one pair, and the one-period check for periodic networks.

use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::coeff::{CoefficientPair, Eta, MinMarginPair, Region, RegionMap};
use crate::ddesim::PeriodicNetworkSpec;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Fewest windows a horizon must cover before a verdict is attempted.
pub const MIN_WINDOWS: usize = 8;

/// Serializes a possibly infinite value; JSON has no infinity, so it becomes
/// the string `"inf"`.
pub fn ser_extended<T: Scalar, S: Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        v.serialize(s)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > T::zero() {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

fn ser_extended_opt<T: Scalar, S: Serializer>(v: &Option<T>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => ser_extended(x, s),
        None => s.serialize_none(),
    }
}

/// Statistics of window `k`: `[t_k, t_{k+1})` with `t_k = t0 + k(N+1)τ_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowStats<T: Scalar> {
    pub k: usize,
    pub t_k: T,
    /// `t_k - τ_max`
    pub t_k_minus: T,
    /// over `(t_k, t_{k+1} - τ_max)`
    pub mu_eta: T,
    /// over the whole window
    pub mu_eta_full: T,
    pub mu_minus: T,
    pub mu_plus: T,
    #[serde(serialize_with = "ser_extended")]
    pub ratio: T,
    /// ratio with the exponent read as `M_a μ_+` instead of `M_a (N+1) τ_max`
    #[serde(serialize_with = "ser_extended")]
    pub ratio_mu_plus: T,
}

/// `[e^{M_b μ_-} - 1] e^{M_a L} / min{1/M_a, μ_η}`, with `0` when `μ_- = 0`
/// and `+∞` when the denominator vanishes otherwise.
pub fn ratio_from_measures<T: Scalar>(m_a: T, m_b: T, exponent_len: T, mu_minus: T, mu_eta: T) -> T {
    let grow = (m_b * mu_minus).exp_m1();
    if grow <= T::zero() {
        return T::zero();
    }
    let den = (T::one() / m_a).min(mu_eta);
    if den <= T::zero() {
        return T::infinity();
    }
    grow * (m_a * exponent_len).exp() / den
}

fn window_len<T: Scalar>(n: usize, tau: T) -> T {
    T::from_usize_lossy(n + 1) * tau
}

fn stats_from_map<T: Scalar>(
    pair: &CoefficientPair<T>,
    map: &RegionMap<T>,
    t0: T,
    n: usize,
    k: usize,
) -> WindowStats<T> {
    let tau = pair.tau_max();
    let len = window_len(n, tau);
    let t_k = t0 + T::from_usize_lossy(k) * len;
    let t_next = t_k + len;
    let full = map.measures(t_k, t_next);
    let head = map.measures(t_k, t_next - tau);
    WindowStats {
        k,
        t_k,
        t_k_minus: t_k - tau,
        mu_eta: head.mu_eta,
        mu_eta_full: full.mu_eta,
        mu_minus: full.mu_minus,
        mu_plus: full.mu_plus,
        ratio: ratio_from_measures(pair.m_a(), pair.m_b(), len, full.mu_minus, head.mu_eta),
        ratio_mu_plus: ratio_from_measures(pair.m_a(), pair.m_b(), full.mu_plus, full.mu_minus, head.mu_eta),
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    Ok(())
}

/// Statistics of a single window.
pub fn window_ratio<T: Scalar>(
    pair: &CoefficientPair<T>,
    eta: Eta<T>,
    t0: T,
    n: usize,
    k: usize,
    resolution: T,
) -> Result<WindowStats<T>> {
    check_n(n)?;
    let len = window_len(n, pair.tau_max());
    let t_k = t0 + T::from_usize_lossy(k) * len;
    let map = RegionMap::for_pair(pair, eta, t_k, t_k + len, resolution)?;
    Ok(stats_from_map(pair, &map, t0, n, k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Certified,
    Refuted,
    Inconclusive,
}

#[derive(Debug, Clone, Copy)]
pub struct CertifyParams<T> {
    pub eta: Eta<T>,
    pub t0: T,
    pub n: usize,
    /// length of the checked span, starting at `t0`
    pub horizon: T,
    pub resolution: T,
    /// defaults to `10 max(1/M_a, τ_max)`
    pub divergence_threshold: Option<T>,
}

impl<T: Scalar> CertifyParams<T> {
    pub fn new(eta: Eta<T>, n: usize, horizon: T) -> Self {
        CertifyParams {
            eta,
            t0: T::zero(),
            n,
            horizon,
            resolution: T::lit(1e-3),
            divergence_threshold: None,
        }
    }
}

/// Outcome of the η-condition check together with the constants of the
/// decay estimate `|x(t)| <= K̃ max|φ| e^{-α t}`.
#[derive(Debug, Clone, Serialize)]
pub struct EtaCertificate<T: Scalar> {
    pub eta: T,
    pub t0: T,
    #[serde(rename = "N")]
    pub n: usize,
    pub tau_max: T,
    #[serde(rename = "M_a")]
    pub m_a: T,
    #[serde(rename = "M_b")]
    pub m_b: T,
    pub delta: T,
    pub windows: Vec<WindowStats<T>>,
    #[serde(rename = "C_star_est", serialize_with = "ser_extended")]
    pub c_star_est: T,
    pub sum_mu_eta: T,
    pub divergence_threshold: T,
    pub verdict: Verdict,
    pub epsilon: Option<T>,
    #[serde(rename = "C")]
    pub c: Option<T>,
    pub lambda0: Option<T>,
    pub alpha: Option<T>,
    /// first window from which every ratio is at most `C`
    pub k_star: Option<usize>,
    /// a-priori bound on `max_{k <= k*} M0(t_k)/M0(t_0)`
    #[serde(rename = "K_prime")]
    pub k_prime: Option<T>,
    #[serde(rename = "K")]
    pub k: Option<T>,
    #[serde(rename = "K_tilde", serialize_with = "ser_extended_opt")]
    pub k_tilde: Option<T>,
    /// worst tail ratio under the `M_a μ_+` exponent reading
    #[serde(rename = "C_star_mu_plus", serialize_with = "ser_extended")]
    pub c_star_mu_plus: T,
    pub diagnostic: Option<String>,
}

impl<T: Scalar> EtaCertificate<T> {
    /// First window of the tail used for `C_star_est`.
    pub fn tail_start(&self) -> usize {
        self.windows.len() / 2
    }

    pub fn window_len(&self) -> T {
        window_len(self.n, self.tau_max)
    }

    /// Decay envelope `K̃ e^{-α(t - t0)}` relative to `max|φ|`.
    pub fn envelope(&self, t: T) -> Option<T> {
        Some(self.k_tilde? * (-(self.alpha?) * (t - self.t0).max(T::zero())).exp())
    }
}

/// Runs the η-condition over every full window of `[t0, t0 + horizon]`.
pub fn check_eta_condition<T: Scalar>(
    pair: &CoefficientPair<T>,
    params: &CertifyParams<T>,
) -> Result<EtaCertificate<T>> {
    check_n(params.n)?;
    let (m_a, m_b, tau) = (pair.m_a(), pair.m_b(), pair.tau_max());
    let eta = params.eta;
    let half = eta.half();
    let delta = T::one() - eta.value() / (T::lit(2.0) * m_a);
    if !(delta > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "eta = {} must be below 2 M_a = {}",
            eta.value(),
            T::lit(2.0) * m_a
        )));
    }
    let len = window_len(params.n, tau);
    let count = (params.horizon / len + T::lit(1e-9)).floor().to_usize().unwrap_or(0);
    if count < MIN_WINDOWS {
        return Err(Error::HorizonTooShort {
            windows: count,
            required: MIN_WINDOWS,
        });
    }
    let t_end = params.t0 + T::from_usize_lossy(count) * len;
    pair.validate_on_grid(params.t0, t_end, params.resolution)?;

    let map = RegionMap::for_pair(pair, eta, params.t0, t_end, params.resolution)?;
    let windows: Vec<WindowStats<T>> = (0..count)
        .map(|k| stats_from_map(pair, &map, params.t0, params.n, k))
        .collect();

    let tail = &windows[count / 2..];
    let c_star = tail.iter().fold(T::zero(), |m, w| m.max(w.ratio));
    let c_star_mu_plus = tail.iter().fold(T::zero(), |m, w| m.max(w.ratio_mu_plus));
    let sum_mu_eta = windows.iter().fold(T::zero(), |s, w| s + w.mu_eta);
    let threshold = params
        .divergence_threshold
        .unwrap_or_else(|| T::lit(10.0) * (T::one() / m_a).max(tau));

    let near = half * T::lit(1.01);
    let reached = sum_mu_eta >= threshold * (T::one() - T::lit(1e-9));
    let mut diagnostic = None;
    let verdict = if let Some(w) = tail.iter().find(|w| w.ratio.is_infinite()) {
        diagnostic = Some(format!(
            "window {} has mu_minus = {} and no eta-stable time before t_(k+1) - tau_max; ratio infinite",
            w.k, w.mu_minus
        ));
        Verdict::Refuted
    } else if tail.iter().all(|w| w.ratio >= near) {
        diagnostic = Some(format!("every tail ratio is at least {near}"));
        Verdict::Refuted
    } else if c_star < half && reached {
        Verdict::Certified
    } else {
        diagnostic = Some(if c_star >= half {
            format!("tail ratios reach {c_star}, not below eta/2 = {half}")
        } else {
            format!("sum of mu_eta {sum_mu_eta} is below the divergence threshold {threshold}")
        });
        Verdict::Inconclusive
    };
    if diagnostic.is_none() {
        if let Some(w) = windows[..count / 2].iter().find(|w| w.ratio.is_infinite()) {
            diagnostic = Some(format!("window {} before the tail has an infinite ratio", w.k));
        }
    }

    let mut cert = EtaCertificate {
        eta: eta.value(),
        t0: params.t0,
        n: params.n,
        tau_max: tau,
        m_a,
        m_b,
        delta,
        windows,
        c_star_est: c_star,
        sum_mu_eta,
        divergence_threshold: threshold,
        verdict,
        epsilon: None,
        c: None,
        lambda0: None,
        alpha: None,
        k_star: None,
        k_prime: None,
        k: None,
        k_tilde: None,
        c_star_mu_plus,
        diagnostic,
    };
    fill_constants(&mut cert);
    Ok(cert)
}

fn fill_constants<T: Scalar>(cert: &mut EtaCertificate<T>) {
    let half = cert.eta / T::lit(2.0);
    if !(cert.c_star_est < half) {
        return;
    }
    let c = (cert.c_star_est + half) / T::lit(2.0);
    cert.c = Some(c);
    let k_star = cert
        .windows
        .iter()
        .rposition(|w| w.ratio > c)
        .map(|i| i + 1)
        .unwrap_or(0);
    cert.k_star = Some(k_star);

    let len = cert.window_len();
    let inv_ma = T::one() / cert.m_a;
    let damp = (-(cert.m_a * len)).exp();
    // a-priori growth of M0(t_k)/M0(t_0) through the windows before k*
    let mut p = T::one();
    let mut k_prime = T::one();
    for w in &cert.windows[..k_star] {
        let factor = (cert.m_b * w.mu_minus).exp() - half * inv_ma.min(w.mu_eta) * damp;
        p = p * factor.max(T::zero());
        k_prime = k_prime.max(p);
    }
    cert.k_prime = Some(k_prime);
    cert.k = Some(k_prime * (cert.m_b * T::from_usize_lossy(cert.n) * cert.tau_max).exp());

    let eps = cert.windows.iter().fold(T::infinity(), |m, w| m.min(w.mu_eta));
    if !(eps > T::zero() && eps.is_finite()) {
        return;
    }
    cert.epsilon = Some(eps);
    let lambda0 = T::one() - (half - c) * inv_ma.min(eps) * damp;
    if !(lambda0 > T::zero() && lambda0 < T::one()) {
        return;
    }
    let alpha = -lambda0.ln() / len;
    cert.lambda0 = Some(lambda0);
    cert.alpha = Some(alpha);
    cert.k_tilde = Some(k_tilde(cert, k_prime, k_star, lambda0, alpha));
}

fn k_tilde<T: Scalar>(cert: &EtaCertificate<T>, k_prime: T, k_star: usize, lambda0: T, alpha: T) -> T {
    let len = cert.window_len();
    let k = k_prime * (cert.m_b * T::from_usize_lossy(cert.n) * cert.tau_max).exp();
    let tail = k_prime * (cert.m_b * len).exp() * lambda0.powi(-(k_star as i32 + 1));
    k.max(tail) * (alpha * T::from_usize_lossy(k_star) * len).exp()
}

/// `K'`, `K` and `K̃` measured on a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem1Constants<T: Scalar> {
    #[serde(rename = "K_prime")]
    pub k_prime: T,
    #[serde(rename = "K")]
    pub k: T,
    #[serde(rename = "K_tilde")]
    pub k_tilde: Option<T>,
}

/// Constants from sampled `M0(t_0), ..., M0(t_{k*})` (extra samples are
/// ignored). `K' = max_k M0(t_k)/M0(t_0)` with `k = 0` included.
pub fn theorem1_constants<T: Scalar>(cert: &EtaCertificate<T>, m0: &[T]) -> Result<Theorem1Constants<T>> {
    if cert.verdict != Verdict::Certified {
        return Err(Error::NotCertified);
    }
    let k_star = cert.k_star.unwrap_or(0);
    if m0.len() < k_star + 1 {
        return Err(Error::InsufficientSamples {
            found: m0.len(),
            required: k_star + 1,
        });
    }
    let k_prime = if m0[0] == T::zero() {
        T::one()
    } else {
        m0[..=k_star].iter().fold(T::one(), |m, &v| m.max(v / m0[0]))
    };
    let k = k_prime * (cert.m_b * T::from_usize_lossy(cert.n) * cert.tau_max).exp();
    let k_tilde = match (cert.lambda0, cert.alpha) {
        (Some(l), Some(a)) => Some(k_tilde(cert, k_prime, k_star, l, a)),
        _ => None,
    };
    Ok(Theorem1Constants { k_prime, k, k_tilde })
}

/// Samples a maximal function on grid step `h` at the window starts `t_k`.
pub fn window_samples<T: Scalar>(cert: &EtaCertificate<T>, m0: &[T], h: T) -> Vec<T> {
    let len = cert.window_len();
    (0..=cert.windows.len())
        .map(|k| cert.t0 + T::from_usize_lossy(k) * len)
        .map(|t| (t / h).round().to_usize().unwrap_or(usize::MAX))
        .take_while(|&i| i < m0.len())
        .map(|i| m0[i])
        .collect()
}

/// Reduces a family of pairs to the pointwise minimum-margin pair.
pub fn common_pair<T: Scalar>(pairs: &[CoefficientPair<T>]) -> Result<CoefficientPair<T>> {
    let first = pairs.first().ok_or(Error::EmptyPairs)?;
    let tau = first.tau_max();
    for p in &pairs[1..] {
        if p.tau_max() != tau {
            return Err(Error::TauMismatch(tau.as_f64(), p.tau_max().as_f64()));
        }
    }
    if pairs.len() == 1 {
        return Ok(first.clone());
    }
    let m_a = pairs.iter().fold(T::zero(), |m, p| m.max(p.m_a()));
    let m_b = pairs.iter().fold(T::zero(), |m, p| m.max(p.m_b()));
    CoefficientPair::from_source(
        Arc::new(MinMarginPair {
            members: pairs.to_vec(),
        }),
        m_a,
        m_b,
        tau,
    )
}

/// One-period check for a periodic network.
#[derive(Debug, Clone, Serialize)]
pub struct PeriodicCheck<T: Scalar> {
    pub omega: T,
    pub p: usize,
    pub eta: T,
    #[serde(rename = "N")]
    pub n: usize,
    pub tau_max: T,
    #[serde(rename = "M_a")]
    pub m_a: T,
    #[serde(rename = "M_b")]
    pub m_b: T,
    pub mu_bar_eta: T,
    pub mu_bar_minus: T,
    pub mu_bar_plus: T,
    #[serde(serialize_with = "ser_extended")]
    pub lhs: T,
    pub verdict: bool,
    pub diagnostic: Option<String>,
}

/// Row-wise labelling of `[0, ω]`: `η` where every row margin reaches `η`,
/// `−` where some row margin is negative, `+` otherwise.
pub fn periodic_region_map<T: Scalar>(
    network: &PeriodicNetworkSpec<T>,
    eta: Eta<T>,
    resolution: T,
) -> Result<RegionMap<T>> {
    let net = &network.network;
    let label = |t: T| {
        let mut all_eta = true;
        for i in 0..net.n() {
            let v = net.row_bound(i, t)?;
            match eta.classify_margin(v.margin(), v.scale) {
                Region::Minus => return Ok(Region::Minus),
                Region::Plus => all_eta = false,
                Region::Eta => {}
            }
        }
        Ok(if all_eta { Region::Eta } else { Region::Plus })
    };
    let omega = network.omega;
    let extra = net.all_breakpoints(0.0, omega.as_f64());
    RegionMap::build(label, T::zero(), omega, resolution, &extra)
}

fn periodic_bounds<T: Scalar>(network: &PeriodicNetworkSpec<T>, resolution: T) -> Result<(T, T)> {
    let (m_a, m_b) = match (network.m_a, network.m_b) {
        (Some(a), Some(b)) => (a, b),
        (a, b) => {
            let (ea, eb) = network.network.estimate_bounds(T::zero(), network.omega, resolution)?;
            (a.unwrap_or(ea), b.unwrap_or(eb))
        }
    };
    if !(m_a > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "row bound M_a = {m_a} must be positive"
        )));
    }
    Ok((m_a, m_b))
}

fn periodic_from_map<T: Scalar>(
    network: &PeriodicNetworkSpec<T>,
    map: &RegionMap<T>,
    eta: Eta<T>,
    n: usize,
    m_a: T,
    m_b: T,
) -> PeriodicCheck<T> {
    let omega = network.omega;
    let tau = network.network.tau_max();
    let p = (tau / omega - T::lit(1e-12)).ceil().to_usize().unwrap_or(1).max(1);
    let total = map.total();
    let pf = T::from_usize_lossy(p);
    let nf = T::from_usize_lossy(n);
    let lhs = ratio_from_measures(
        m_a,
        m_b,
        pf * (nf + T::one()) * omega,
        pf * (nf + T::one()) * total.mu_minus,
        pf * nf * total.mu_eta,
    );
    let verdict = total.mu_eta > T::zero() && lhs < eta.half();
    let diagnostic = if total.mu_eta <= T::zero() && total.mu_minus > T::zero() {
        Some("ratio infinite: no eta-stable time in a period while some row is unstable".to_string())
    } else if total.mu_eta <= T::zero() {
        Some("no eta-stable time in a period".to_string())
    } else if !verdict {
        Some(format!("lhs {lhs} is not below eta/2 = {}", eta.half()))
    } else {
        None
    };
    PeriodicCheck {
        omega,
        p,
        eta: eta.value(),
        n,
        tau_max: tau,
        m_a,
        m_b,
        mu_bar_eta: total.mu_eta,
        mu_bar_minus: total.mu_minus,
        mu_bar_plus: total.mu_plus,
        lhs,
        verdict,
        diagnostic,
    }
}

pub fn check_periodic_condition<T: Scalar>(
    network: &PeriodicNetworkSpec<T>,
    eta: Eta<T>,
    n: usize,
    resolution: T,
) -> Result<PeriodicCheck<T>> {
    check_n(n)?;
    let (m_a, m_b) = periodic_bounds(network, resolution)?;
    let map = periodic_region_map(network, eta, resolution)?;
    Ok(periodic_from_map(network, &map, eta, n, m_a, m_b))
}

/// Tries every `η` in `etas` (in order) against `N = 1..=n_max` and returns
/// the first passing check, or the last one tried when none passes.
pub fn sweep_periodic_condition<T: Scalar>(
    network: &PeriodicNetworkSpec<T>,
    etas: &[Eta<T>],
    n_max: usize,
    resolution: T,
) -> Result<PeriodicCheck<T>> {
    check_n(n_max)?;
    let (m_a, m_b) = periodic_bounds(network, resolution)?;
    let mut last = None;
    for &eta in etas {
        let map = periodic_region_map(network, eta, resolution)?;
        for n in 1..=n_max {
            let check = periodic_from_map(network, &map, eta, n, m_a, m_b);
            if check.verdict {
                return Ok(check);
            }
            last = Some(check);
        }
    }
    last.ok_or_else(|| Error::InvalidParameter("empty eta grid".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn stated_window_ratio() {
        let r = ratio_from_measures(1.0, 1.2, 2.0, 0.004, 0.5);
        assert_abs_diff_eq!(r, 0.0711, epsilon = 5e-4);
        let r = ratio_from_measures(1.0, 1.2, 2.0, 0.002, 0.5);
        assert_abs_diff_eq!(r, 0.03552, epsilon = 5e-5);
    }

    #[test]
    fn zero_over_zero_is_zero() {
        assert_eq!(ratio_from_measures(1.0, 1.2, 2.0, 0.0, 0.0), 0.0);
        assert_eq!(ratio_from_measures(1.0, 1.2, 2.0, 0.0, 0.3), 0.0);
        assert!(ratio_from_measures(1.0f64, 1.2, 2.0, 0.1, 0.0).is_infinite());
    }

    #[test]
    fn infinite_ratio_serializes_as_string() {
        let w = WindowStats {
            k: 0,
            t_k: 0.0,
            t_k_minus: -1.0,
            mu_eta: 0.0,
            mu_eta_full: 0.0,
            mu_minus: 2.0,
            mu_plus: 0.0,
            ratio: f64::INFINITY,
            ratio_mu_plus: f64::INFINITY,
        };
        let s = serde_json::to_string(&w).unwrap();
        assert!(s.contains("\"ratio\":\"inf\""));
    }
}
