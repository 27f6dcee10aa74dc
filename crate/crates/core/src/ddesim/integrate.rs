//! Fixed-step RK4 for delay systems. Delayed states come from cubic Hermite
//! interpolation of the already computed grid (values and derivatives), or
//! from the initial function for non-positive times.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::history::HistorySegment;
use super::system::{ScalarForm, SystemSpec};

/// Solution on the uniform grid `t_i = i h`, `i = 0..=M`.
#[derive(Debug, Clone)]
pub struct Trajectory<T: Scalar> {
    h: T,
    dim: usize,
    states: Vec<T>,
    derivs: Vec<T>,
    history: HistorySegment<T>,
    tau_max: T,
    clamp_count: usize,
    system: SystemSpec<T>,
}

struct Past<'a, T: Scalar> {
    h: T,
    dim: usize,
    n: usize,
    states: &'a [T],
    derivs: &'a [T],
    history: &'a HistorySegment<T>,
    tau_max: T,
    stage_t: T,
    stage_x: &'a [T],
}

fn hermite<T: Scalar>(theta: T, h: T, x0: T, x1: T, f0: T, f1: T) -> T {
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let t2 = theta * theta;
    let t3 = t2 * theta;
    let h00 = two * t3 - three * t2 + T::one();
    let h10 = t3 - two * t2 + theta;
    let h01 = three * t2 - two * t3;
    let h11 = t3 - t2;
    h00 * x0 + h10 * h * f0 + h01 * x1 + h11 * h * f1
}

/// Reads `x_c(s)` for `s <= t_n` from grid data (Hermite when both end
/// derivatives exist, linear otherwise) or from the initial function.
#[allow(clippy::too_many_arguments)]
fn grid_value<T: Scalar>(
    h: T,
    dim: usize,
    n: usize,
    states: &[T],
    derivs: &[T],
    history: &HistorySegment<T>,
    tau_max: T,
    c: usize,
    s: T,
) -> Result<T> {
    if s <= T::zero() {
        let tol = T::lit(1e-9) * tau_max.max(T::one());
        if s < -tau_max - tol {
            return Err(Error::Delay {
                t: s.as_f64(),
                what: format!("lookup before the initial segment [-{tau_max}, 0]"),
            });
        }
        return Ok(history.eval(c, s.max(-tau_max), tau_max)?);
    }
    let pos = s / h;
    let j = pos.floor().to_usize().unwrap_or(usize::MAX);
    if j >= n {
        return Ok(states[n * dim + c]);
    }
    let theta = pos - T::from_usize_lossy(j);
    let x0 = states[j * dim + c];
    if theta == T::zero() {
        return Ok(x0);
    }
    let x1 = states[(j + 1) * dim + c];
    if (j + 2) * dim <= derivs.len() {
        Ok(hermite(
            theta,
            h,
            x0,
            x1,
            derivs[j * dim + c],
            derivs[(j + 1) * dim + c],
        ))
    } else {
        Ok(x0 + theta * (x1 - x0))
    }
}

impl<T: Scalar> Past<'_, T> {
    fn value(&self, c: usize, s: T) -> Result<T> {
        let tn = self.h * T::from_usize_lossy(self.n);
        if s <= tn {
            return grid_value(
                self.h,
                self.dim,
                self.n,
                self.states,
                self.derivs,
                self.history,
                self.tau_max,
                c,
                s,
            );
        }
        // inside the current step: linear between the last grid state and the stage
        let tol = T::lit(1e-9) * self.h;
        if s > self.stage_t + tol {
            return Err(Error::Delay {
                t: s.as_f64(),
                what: "delayed argument lies ahead of the current stage".into(),
            });
        }
        let xn = self.states[self.n * self.dim + c];
        let span = self.stage_t - tn;
        if span <= T::zero() {
            return Ok(xn);
        }
        let theta = ((s - tn) / span).min(T::one());
        Ok(xn + theta * (self.stage_x[c] - xn))
    }
}

/// Sliding maximum of `|x|` over grid indices, including the initial segment
/// at negative indices.
struct WindowMax<T> {
    items: VecDeque<(i64, T)>,
}

impl<T: Scalar> WindowMax<T> {
    fn push(&mut self, idx: i64, v: T) {
        while matches!(self.items.back(), Some(&(_, b)) if b <= v) {
            self.items.pop_back();
        }
        self.items.push_back((idx, v));
    }

    fn max_from(&mut self, lo: i64) -> T {
        while self.items.len() > 1 && self.items.front().map(|f| f.0 < lo).unwrap_or(false) {
            self.items.pop_front();
        }
        self.items.front().map(|f| f.1).unwrap_or(T::zero())
    }
}

struct Stepper<'a, T: Scalar> {
    system: &'a SystemSpec<T>,
    h: T,
    tau_max: T,
    clamps: usize,
    scratch: Vec<T>,
    window: Option<WindowMax<T>>,
}

impl<T: Scalar> Stepper<'_, T> {
    fn window_lo(&self, t: T) -> i64 {
        let v = ((t - self.tau_max) / self.h - T::lit(1e-9)).ceil();
        v.to_i64().unwrap_or(i64::MIN)
    }

    fn rhs(&mut self, t: T, x: &[T], past: &Past<'_, T>, count: bool, out: &mut [T]) -> Result<()> {
        match self.system {
            SystemSpec::Scalar(s) => {
                let v = s.pair.eval(t)?;
                let pull = match s.form {
                    ScalarForm::Delayed => {
                        let (at, clamped) = s.delay.delayed_time(t, self.h)?;
                        if clamped && count {
                            self.clamps += 1;
                        }
                        v.b * past.value(0, at)?
                    }
                    ScalarForm::SupEnvelope => {
                        let lo = self.window_lo(t);
                        let w = self.window.as_mut().expect("window tracked for envelope form");
                        v.b.abs() * w.max_from(lo).max(x[0].abs())
                    }
                };
                out[0] = -v.a * x[0] + pull;
            }
            SystemSpec::Network(_) | SystemSpec::Periodic(_) => {
                let net = self.system.network().expect("network system");
                let n = net.n();
                self.scratch.resize(n, T::zero());
                for (i, slot) in out.iter_mut().enumerate().take(n) {
                    for j in 0..n {
                        if net.coupled_delay(i, j) {
                            let (at, clamped) = net.delay(i, j).delayed_time(t, self.h)?;
                            if clamped && count {
                                self.clamps += 1;
                            }
                            self.scratch[j] = past.value(j, at)?;
                        }
                    }
                    *slot = net.rhs(i, t, x, &self.scratch)?;
                }
            }
        }
        Ok(())
    }
}

/// Integrates `system` from `history` up to `horizon` with step `h`.
pub fn integrate<T: Scalar>(
    system: &SystemSpec<T>,
    history: &HistorySegment<T>,
    horizon: T,
    h: T,
) -> Result<Trajectory<T>> {
    if !(h > T::zero() && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {h}")));
    }
    if !(horizon > T::zero() && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let dim = system.dim();
    if history.dim() != dim {
        return Err(Error::InvalidParameter(format!(
            "history has {} components, system has {dim}",
            history.dim()
        )));
    }
    let tau_max = system.tau_max();
    let steps = (horizon / h).round().to_usize().unwrap_or(0).max(1);

    let mut states = Vec::with_capacity((steps + 1) * dim);
    for c in 0..dim {
        states.push(history.eval(c, T::zero(), tau_max)?);
    }
    let mut derivs: Vec<T> = Vec::with_capacity((steps + 1) * dim);

    let envelope = matches!(system, SystemSpec::Scalar(s) if s.form == ScalarForm::SupEnvelope);
    let mut stepper = Stepper {
        system,
        h,
        tau_max,
        clamps: 0,
        scratch: Vec::new(),
        window: envelope.then(|| WindowMax { items: VecDeque::new() }),
    };
    if let Some(w) = stepper.window.as_mut() {
        let lag = (tau_max / h).floor().to_i64().unwrap_or(0);
        for i in -lag..=0 {
            let s = h * T::from_i64(i).expect("index converts");
            w.push(i, history.eval(0, s, tau_max)?.abs());
        }
    }

    let half = h / T::lit(2.0);
    let sixth = h / T::lit(6.0);
    let two = T::lit(2.0);
    let eps = h * T::lit(1e-9);
    let nudge = [eps, T::zero(), T::zero(), -eps];
    let mut k = vec![vec![T::zero(); dim]; 4];
    let mut stage = vec![T::zero(); dim];
    let mut xn = vec![T::zero(); dim];

    for n in 0..steps {
        let tn = h * T::from_usize_lossy(n);
        xn.copy_from_slice(&states[n * dim..(n + 1) * dim]);

        let offsets = [T::zero(), half, half, h];
        for s in 0..4 {
            if s == 0 {
                stage.copy_from_slice(&xn);
            } else {
                let w = offsets[s];
                for c in 0..dim {
                    stage[c] = xn[c] + w * k[s - 1][c];
                }
            }
            // coefficients and delays are read strictly inside the step so
            // jumps at grid points take the value of the step they bound
            let t_stage = tn + offsets[s];
            let t_eval = t_stage + nudge[s];
            let past = Past {
                h,
                dim,
                n,
                states: &states,
                derivs: &derivs,
                history,
                tau_max,
                stage_t: t_stage,
                stage_x: &stage,
            };
            let mut out = std::mem::take(&mut k[s]);
            stepper.rhs(t_eval, &stage, &past, s == 0, &mut out)?;
            k[s] = out;
            if s == 0 {
                derivs.extend_from_slice(&k[0]);
            }
        }

        for c in 0..dim {
            let next = xn[c] + sixth * (k[0][c] + two * k[1][c] + two * k[2][c] + k[3][c]);
            if !next.is_finite() {
                return Err(Error::Overflow {
                    last_valid: tn.as_f64(),
                });
            }
            states.push(next);
        }
        if let Some(w) = stepper.window.as_mut() {
            w.push((n + 1) as i64, states[(n + 1) * dim].abs());
        }
    }

    // derivative at the final grid point
    let n = steps;
    let tn = h * T::from_usize_lossy(n);
    xn.copy_from_slice(&states[n * dim..(n + 1) * dim]);
    let past = Past {
        h,
        dim,
        n,
        states: &states,
        derivs: &derivs,
        history,
        tau_max,
        stage_t: tn,
        stage_x: &xn,
    };
    let mut out = vec![T::zero(); dim];
    stepper.rhs(tn, &xn, &past, true, &mut out)?;
    derivs.extend_from_slice(&out);

    Ok(Trajectory {
        h,
        dim,
        states,
        derivs,
        history: history.clone(),
        tau_max,
        clamp_count: stepper.clamps,
        system: system.clone(),
    })
}

impl<T: Scalar> Trajectory<T> {
    pub fn h(&self) -> T {
        self.h
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.states.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn time(&self, i: usize) -> T {
        self.h * T::from_usize_lossy(i)
    }

    pub fn end_time(&self) -> T {
        self.time(self.len() - 1)
    }

    pub fn state(&self, i: usize) -> &[T] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn component(&self, c: usize) -> Vec<T> {
        self.states.iter().skip(c).step_by(self.dim).copied().collect()
    }

    /// Max-norm of the state at every grid point.
    pub fn norms(&self) -> Vec<T> {
        self.states
            .chunks(self.dim)
            .map(|x| x.iter().fold(T::zero(), |m, v| m.max(v.abs())))
            .collect()
    }

    pub fn history(&self) -> &HistorySegment<T> {
        &self.history
    }

    pub fn tau_max(&self) -> T {
        self.tau_max
    }

    /// Number of grid evaluations where a lag was raised to `4h`.
    pub fn clamp_count(&self) -> usize {
        self.clamp_count
    }

    pub fn system(&self) -> &SystemSpec<T> {
        &self.system
    }

    /// `x_c(s)` for `s` in `[-tau_max, end]`, interpolated between grid points.
    pub fn value_at(&self, c: usize, s: T) -> Result<T> {
        let n = self.len() - 1;
        grid_value(
            self.h,
            self.dim,
            n,
            &self.states,
            &self.derivs,
            &self.history,
            self.tau_max,
            c,
            s,
        )
    }

    /// Index of the grid point nearest to `t`.
    pub fn index_of(&self, t: T) -> usize {
        (t / self.h).round().to_usize().unwrap_or(0).min(self.len() - 1)
    }

    /// `t,x1,...,xn` header and one row per grid point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for c in 0..self.dim {
            out.push_str(&format!(",x{}", c + 1));
        }
        out.push('\n');
        for i in 0..self.len() {
            out.push_str(&self.time(i).to_string());
            for v in self.state(i) {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}
