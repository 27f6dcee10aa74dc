use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coeff::{extrema, CoefficientPair, PairSource, PairValue};
use crate::error::{Error, EvalError, Result};
use crate::piecewise::PiecewiseFunction;
use crate::scalar::Scalar;

/// Inner functions available to network right-hand sides. Each has global
/// Lipschitz constant 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Arctan,
    Identity,
    Sin,
}

impl Activation {
    pub fn apply<T: Scalar>(self, x: T) -> T {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Arctan => x.atan(),
            Activation::Identity => x,
            Activation::Sin => x.sin(),
        }
    }

    pub fn lipschitz(self) -> f64 {
        1.0
    }
}

/// What to do when a lag falls below four integration steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DelayFloor {
    /// raise the lag to `4h` and count the occurrence
    #[default]
    Clamp,
    Reject,
}

#[derive(Debug, Clone)]
pub enum DelayKind {
    /// `τ(t)`; the delayed state is `x(t - τ(t))`
    Lag(PiecewiseFunction),
    /// the delayed argument itself, e.g. `floor(t)`
    Argument(PiecewiseFunction),
}

/// A bounded time-varying delay, `0 < τ(t) <= tau_max`.
#[derive(Debug, Clone)]
pub struct DelaySpec<T> {
    pub kind: DelayKind,
    pub tau_max: T,
    pub floor: DelayFloor,
}

impl<T: Scalar> DelaySpec<T> {
    pub fn lag(tau: PiecewiseFunction, tau_max: T) -> Self {
        DelaySpec {
            kind: DelayKind::Lag(tau),
            tau_max,
            floor: DelayFloor::Clamp,
        }
    }

    pub fn constant(tau: f64) -> Self {
        Self::lag(PiecewiseFunction::constant(tau), T::lit(tau))
    }

    pub fn argument(arg: PiecewiseFunction, tau_max: T) -> Self {
        DelaySpec {
            kind: DelayKind::Argument(arg),
            tau_max,
            floor: DelayFloor::Clamp,
        }
    }

    pub fn with_floor(mut self, floor: DelayFloor) -> Self {
        self.floor = floor;
        self
    }

    /// Delayed time for the state read at `t` with step `h`. The flag reports
    /// whether the lag was clamped.
    pub(crate) fn delayed_time(&self, t: T, h: T) -> Result<(T, bool)> {
        let tol = T::lit(1e-9) * self.tau_max.max(T::one());
        match &self.kind {
            DelayKind::Lag(tau) => {
                let lag = tau.eval(t)?;
                if lag > self.tau_max + tol {
                    return Err(Error::Delay {
                        t: t.as_f64(),
                        what: format!("delay {lag} exceeds tau_max {}", self.tau_max),
                    });
                }
                let floor = T::lit(4.0) * h;
                if lag < floor {
                    if self.floor == DelayFloor::Reject {
                        return Err(Error::Delay {
                            t: t.as_f64(),
                            what: format!("delay {lag} is below 4h = {floor}"),
                        });
                    }
                    if floor > self.tau_max + tol {
                        return Err(Error::Delay {
                            t: t.as_f64(),
                            what: format!("step too large: 4h = {floor} exceeds tau_max"),
                        });
                    }
                    return Ok((t - floor, true));
                }
                Ok((t - lag, false))
            }
            DelayKind::Argument(arg) => {
                let s = arg.eval(t)?;
                if s > t + tol || t - s > self.tau_max + tol {
                    return Err(Error::Delay {
                        t: t.as_f64(),
                        what: format!("delayed argument {s} is outside [t - tau_max, t]"),
                    });
                }
                Ok((s.min(t), false))
            }
        }
    }
}

/// Which scalar equation to integrate for a coefficient pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarForm {
    /// `x' = -a(t) x + b(t) x(t - τ(t))`
    #[default]
    Delayed,
    /// `x' = -a(t) x + |b(t)| M0(t)`, the worst case of the inequality
    SupEnvelope,
}

#[derive(Debug, Clone)]
pub struct ScalarDde<T: Scalar> {
    pub pair: CoefficientPair<T>,
    pub delay: DelaySpec<T>,
    pub form: ScalarForm,
}

impl<T: Scalar> ScalarDde<T> {
    pub fn new(pair: CoefficientPair<T>, delay: DelaySpec<T>) -> Result<Self> {
        if delay.tau_max > pair.tau_max() * (T::one() + T::lit(1e-12)) {
            return Err(Error::InvalidParameter(format!(
                "delay bound {} exceeds the pair's tau_max {}",
                delay.tau_max,
                pair.tau_max()
            )));
        }
        Ok(ScalarDde {
            pair,
            delay,
            form: ScalarForm::Delayed,
        })
    }

    pub fn with_form(mut self, form: ScalarForm) -> Self {
        self.form = form;
        self
    }
}

/// `u_i' = -d_i u_i + Σ_j a_ij g_j(u_j) + Σ_j b_ij f_j(u_j(t - τ_ij)) + I_i`.
#[derive(Debug, Clone)]
pub struct NetworkSpec<T> {
    n: usize,
    d: Vec<PiecewiseFunction>,
    a: Vec<Vec<PiecewiseFunction>>,
    b: Vec<Vec<PiecewiseFunction>>,
    g: Vec<Activation>,
    f: Vec<Activation>,
    inputs: Vec<PiecewiseFunction>,
    delays: Vec<Vec<DelaySpec<T>>>,
    lipschitz_g: Vec<T>,
    lipschitz_f: Vec<T>,
    tau_max: T,
    // entries of `b` that are identically zero
    b_zero: Vec<Vec<bool>>,
    a_zero: Vec<Vec<bool>>,
}

/// Ingredients of a [`NetworkSpec`].
#[derive(Debug, Clone)]
pub struct NetworkParts<T> {
    pub d: Vec<PiecewiseFunction>,
    pub a: Vec<Vec<PiecewiseFunction>>,
    pub b: Vec<Vec<PiecewiseFunction>>,
    pub g: Vec<Activation>,
    pub f: Vec<Activation>,
    pub inputs: Vec<PiecewiseFunction>,
    pub delays: Vec<Vec<DelaySpec<T>>>,
    /// defaults to each activation's own constant
    pub lipschitz_g: Option<Vec<T>>,
    pub lipschitz_f: Option<Vec<T>>,
    pub tau_max: T,
}

fn is_zero(f: &PiecewiseFunction) -> bool {
    f.as_constant() == Some(0.0)
}

impl<T: Scalar> NetworkSpec<T> {
    pub fn new(parts: NetworkParts<T>) -> Result<Self> {
        let n = parts.d.len();
        if n == 0 {
            return Err(Error::InvalidParameter("network needs at least one node".into()));
        }
        let square = |m: &[Vec<PiecewiseFunction>]| m.len() == n && m.iter().all(|r| r.len() == n);
        if !square(&parts.a) || !square(&parts.b) {
            return Err(Error::InvalidParameter(format!("gain matrices must be {n}x{n}")));
        }
        if parts.delays.len() != n || parts.delays.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter(format!("delay matrix must be {n}x{n}")));
        }
        if parts.g.len() != n || parts.f.len() != n || parts.inputs.len() != n {
            return Err(Error::InvalidParameter(format!(
                "g, f and inputs need {n} entries each"
            )));
        }
        if !(parts.tau_max > T::zero()) {
            return Err(Error::InvalidParameter("tau_max must be positive".into()));
        }
        for row in &parts.delays {
            for dl in row {
                if dl.tau_max > parts.tau_max * (T::one() + T::lit(1e-12)) {
                    return Err(Error::InvalidParameter(format!(
                        "delay bound {} exceeds network tau_max {}",
                        dl.tau_max, parts.tau_max
                    )));
                }
            }
        }
        let own = |acts: &[Activation]| acts.iter().map(|a| T::lit(a.lipschitz())).collect::<Vec<_>>();
        let lipschitz_g = parts.lipschitz_g.unwrap_or_else(|| own(&parts.g));
        let lipschitz_f = parts.lipschitz_f.unwrap_or_else(|| own(&parts.f));
        for (name, consts, acts) in [("G", &lipschitz_g, &parts.g), ("F", &lipschitz_f, &parts.f)] {
            if consts.len() != n {
                return Err(Error::InvalidParameter(format!("{name} needs {n} entries")));
            }
            for (j, (&c, act)) in consts.iter().zip(acts.iter()).enumerate() {
                if c < T::lit(act.lipschitz()) {
                    return Err(Error::InvalidParameter(format!(
                        "{name}_{} = {c} is below the Lipschitz constant of {act:?}",
                        j + 1
                    )));
                }
            }
        }
        let b_zero = parts.b.iter().map(|r| r.iter().map(is_zero).collect()).collect();
        let a_zero = parts.a.iter().map(|r| r.iter().map(is_zero).collect()).collect();
        Ok(NetworkSpec {
            n,
            d: parts.d,
            a: parts.a,
            b: parts.b,
            g: parts.g,
            f: parts.f,
            inputs: parts.inputs,
            delays: parts.delays,
            lipschitz_g,
            lipschitz_f,
            tau_max: parts.tau_max,
            b_zero,
            a_zero,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tau_max(&self) -> T {
        self.tau_max
    }

    pub(crate) fn delay(&self, i: usize, j: usize) -> &DelaySpec<T> {
        &self.delays[i][j]
    }

    pub(crate) fn coupled_delay(&self, i: usize, j: usize) -> bool {
        !self.b_zero[i][j]
    }

    /// True when every input is identically zero.
    pub fn is_unforced(&self) -> bool {
        self.inputs.iter().all(is_zero)
    }

    /// Right-hand side for node `i`, given current states `u` and delayed
    /// states `ud[j] = u_j(t - τ_ij(t))`.
    pub(crate) fn rhs(&self, i: usize, t: T, u: &[T], ud: &[T]) -> Result<T, EvalError> {
        let mut acc = -self.d[i].eval(t)? * u[i] + self.inputs[i].eval(t)?;
        for j in 0..self.n {
            if !self.a_zero[i][j] {
                acc = acc + self.a[i][j].eval(t)? * self.g[j].apply(u[j]);
            }
            if !self.b_zero[i][j] {
                acc = acc + self.b[i][j].eval(t)? * self.f[j].apply(ud[j]);
            }
        }
        Ok(acc)
    }

    /// Row bound of node `i`: `a = d_i - Σ_j G_j |a_ij|`, `b = Σ_j F_j |b_ij|`.
    pub fn row_bound(&self, i: usize, t: T) -> Result<PairValue<T>, EvalError> {
        let d = self.d[i].eval(t)?;
        let mut scale = d.abs();
        let mut ga = T::zero();
        let mut fb = T::zero();
        for j in 0..self.n {
            if !self.a_zero[i][j] {
                let v = self.lipschitz_g[j] * self.a[i][j].eval(t)?.abs();
                ga = ga + v;
                scale = scale + v;
            }
            if !self.b_zero[i][j] {
                let v = self.lipschitz_f[j] * self.b[i][j].eval(t)?.abs();
                fb = fb + v;
                scale = scale + v;
            }
        }
        Ok(PairValue {
            a: d - ga,
            b: fb,
            scale,
        })
    }

    /// Grid estimates of `max_i sup a_i` and `max_i sup b_i` for the row bounds.
    pub fn estimate_bounds(&self, t1: T, t2: T, resolution: T) -> Result<(T, T)> {
        let mut m_a = T::zero();
        let mut m_b = T::zero();
        for i in 0..self.n {
            let (_, sa) = extrema(|t| self.row_bound(i, t).map(|v| v.a), t1, t2, resolution)?;
            let (_, sb) = extrema(|t| self.row_bound(i, t).map(|v| v.b), t1, t2, resolution)?;
            m_a = m_a.max(sa);
            m_b = m_b.max(sb);
        }
        Ok((m_a, m_b))
    }

    /// One coefficient pair per node, built from the row bounds; the common
    /// condition applies to their pointwise minimum-margin reduction.
    pub fn row_pairs(self: &Arc<Self>, m_a: T, m_b: T) -> Result<Vec<CoefficientPair<T>>> {
        (0..self.n)
            .map(|row| {
                CoefficientPair::from_source(
                    Arc::new(NetworkRow {
                        network: Arc::clone(self),
                        row,
                    }),
                    m_a,
                    m_b,
                    self.tau_max,
                )
            })
            .collect()
    }

    pub(crate) fn all_breakpoints(&self, t1: f64, t2: f64) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for i in 0..self.n {
            out.extend(self.d[i].breakpoints(t1, t2));
            for j in 0..self.n {
                out.extend(self.a[i][j].breakpoints(t1, t2));
                out.extend(self.b[i][j].breakpoints(t1, t2));
            }
        }
        out
    }

    /// Largest deviation `|c(t + ω) - c(t)|` over all coefficients and inputs
    /// on a grid of `[0, ω]`.
    pub fn periodicity_defect(&self, omega: T, resolution: T) -> Result<T> {
        let mut worst = T::zero();
        let mut check = |f: &PiecewiseFunction, t: T| -> Result<()> {
            worst = worst.max((f.eval(t + omega)? - f.eval(t)?).abs());
            Ok(())
        };
        for t in crate::coeff::grid_points(T::zero(), omega, resolution)? {
            for i in 0..self.n {
                check(&self.d[i], t)?;
                check(&self.inputs[i], t)?;
                for j in 0..self.n {
                    check(&self.a[i][j], t)?;
                    check(&self.b[i][j], t)?;
                    if let DelayKind::Lag(tau) = &self.delays[i][j].kind {
                        check(tau, t)?;
                    }
                }
            }
        }
        Ok(worst)
    }
}

#[derive(Debug)]
struct NetworkRow<T> {
    network: Arc<NetworkSpec<T>>,
    row: usize,
}

impl<T: Scalar> PairSource<T> for NetworkRow<T> {
    fn eval(&self, t: T) -> Result<PairValue<T>, EvalError> {
        self.network.row_bound(self.row, t)
    }

    fn breakpoints(&self, t1: f64, t2: f64) -> Vec<f64> {
        self.network.all_breakpoints(t1, t2)
    }
}

/// A network whose coefficients, delays and inputs share period `omega`.
#[derive(Debug, Clone)]
pub struct PeriodicNetworkSpec<T> {
    pub network: Arc<NetworkSpec<T>>,
    pub omega: T,
    /// declared bounds; estimated on `[0, ω]` when absent
    pub m_a: Option<T>,
    pub m_b: Option<T>,
}

impl<T: Scalar> PeriodicNetworkSpec<T> {
    pub fn new(network: NetworkSpec<T>, omega: T) -> Result<Self> {
        if !(omega > T::zero() && omega.is_finite()) {
            return Err(Error::InvalidParameter(format!("period must be positive, got {omega}")));
        }
        Ok(PeriodicNetworkSpec {
            network: Arc::new(network),
            omega,
            m_a: None,
            m_b: None,
        })
    }

    pub fn with_bounds(mut self, m_a: Option<T>, m_b: Option<T>) -> Self {
        self.m_a = m_a;
        self.m_b = m_b;
        self
    }
}

/// A system to integrate.
#[derive(Debug, Clone)]
pub enum SystemSpec<T: Scalar> {
    Scalar(ScalarDde<T>),
    Network(Arc<NetworkSpec<T>>),
    Periodic(PeriodicNetworkSpec<T>),
}

impl<T: Scalar> SystemSpec<T> {
    pub fn dim(&self) -> usize {
        match self {
            SystemSpec::Scalar(_) => 1,
            SystemSpec::Network(n) => n.n(),
            SystemSpec::Periodic(p) => p.network.n(),
        }
    }

    pub fn tau_max(&self) -> T {
        match self {
            SystemSpec::Scalar(s) => s.pair.tau_max(),
            SystemSpec::Network(n) => n.tau_max(),
            SystemSpec::Periodic(p) => p.network.tau_max(),
        }
    }

    pub fn network(&self) -> Option<&Arc<NetworkSpec<T>>> {
        match self {
            SystemSpec::Scalar(_) => None,
            SystemSpec::Network(n) => Some(n),
            SystemSpec::Periodic(p) => Some(&p.network),
        }
    }

    pub fn omega(&self) -> Option<T> {
        match self {
            SystemSpec::Periodic(p) => Some(p.omega),
            _ => None,
        }
    }
}
