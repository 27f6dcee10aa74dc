//! Derived scalar series: maximal function, synchronization error,
//! periodicity residual, and the empirical decay rate.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::integrate::Trajectory;

/// Sampled scalar series `(t, value)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series<T> {
    pub times: Vec<T>,
    pub values: Vec<T>,
}

impl<T: Scalar> Series<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last(&self) -> Option<(T, T)> {
        Some((*self.times.last()?, *self.values.last()?))
    }

    /// Value at the sample nearest to `t`.
    pub fn at(&self, t: T) -> Option<T> {
        if self.is_empty() {
            return None;
        }
        let idx = self.times.partition_point(|&x| x < t).min(self.len() - 1);
        let best = if idx > 0 && (t - self.times[idx - 1]).abs() < (self.times[idx] - t).abs() {
            idx - 1
        } else {
            idx
        };
        Some(self.values[best])
    }

    pub fn max(&self) -> T {
        self.values.iter().fold(T::zero(), |m, &v| m.max(v))
    }

    /// `t,value` header and one row per sample.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,value\n");
        for (t, v) in self.times.iter().zip(&self.values) {
            out.push_str(&format!("{t},{v}\n"));
        }
        out
    }
}

/// Nonnegative scalar path `|x(t)|` on the grid `t_i = i h`, with the
/// initial segment sampled at `s = -ih`. This is the object the lemma and
/// theorem estimates talk about; it can come from a scalar solution, the
/// max-norm of a vector solution, or the distance between two solutions.
#[derive(Debug, Clone)]
pub struct MagnitudePath<T> {
    pub h: T,
    pub tau_max: T,
    /// `|φ(-ih)|` for `i = L..1`, oldest first
    pub initial: Vec<T>,
    /// `|x(t_i)|` for `i = 0..=M`
    pub values: Vec<T>,
}

impl<T: Scalar> MagnitudePath<T> {
    fn lag_steps(tau_max: T, h: T) -> usize {
        (tau_max / h + T::lit(1e-9)).floor().to_usize().unwrap_or(0)
    }

    fn sample_initial<F: Fn(T) -> Result<T>>(tau_max: T, h: T, f: F) -> Result<Vec<T>> {
        let lag = Self::lag_steps(tau_max, h);
        (1..=lag).rev().map(|i| f(-(h * T::from_usize_lossy(i)))).collect()
    }

    /// Max-norm of a trajectory.
    pub fn from_trajectory(traj: &Trajectory<T>) -> Result<Self> {
        let (h, tau) = (traj.h(), traj.tau_max());
        let hist = traj.history();
        let initial = Self::sample_initial(tau, h, |s| {
            let mut m = T::zero();
            for c in 0..hist.dim() {
                m = m.max(hist.eval(c, s, tau)?.abs());
            }
            Ok(m)
        })?;
        Ok(MagnitudePath {
            h,
            tau_max: tau,
            initial,
            values: traj.norms(),
        })
    }

    /// Max-norm of the difference of two trajectories on the same grid.
    pub fn from_difference(a: &Trajectory<T>, b: &Trajectory<T>) -> Result<Self> {
        check_same_grid(a, b)?;
        let (h, tau) = (a.h(), a.tau_max());
        let (ha, hb) = (a.history(), b.history());
        let initial = Self::sample_initial(tau, h, |s| {
            let mut m = T::zero();
            for c in 0..ha.dim() {
                m = m.max((ha.eval(c, s, tau)? - hb.eval(c, s, tau)?).abs());
            }
            Ok(m)
        })?;
        Ok(MagnitudePath {
            h,
            tau_max: tau,
            initial,
            values: sync_error(a, b)?.values,
        })
    }

    pub fn time(&self, i: usize) -> T {
        self.h * T::from_usize_lossy(i)
    }

    /// `max_{-tau_max <= s <= 0} |φ(s)|` on the sampled grid.
    pub fn initial_sup(&self) -> T {
        self.initial.iter().fold(self.values[0], |m, &v| m.max(v))
    }

    /// `M0(t_i) = max_{t_i - tau_max <= s <= t_i} |x(s)|` at every grid point,
    /// by a monotone deque in linear time.
    pub fn maximal(&self) -> Vec<T> {
        let lag = self.initial.len();
        let all: Vec<T> = self.initial.iter().chain(self.values.iter()).copied().collect();
        let mut dq: VecDeque<usize> = VecDeque::new();
        let mut out = Vec::with_capacity(self.values.len());
        for (k, &v) in all.iter().enumerate() {
            while matches!(dq.back(), Some(&b) if all[b] <= v) {
                dq.pop_back();
            }
            dq.push_back(k);
            if k >= lag {
                let lo = k - lag;
                while matches!(dq.front(), Some(&f) if f < lo) {
                    dq.pop_front();
                }
                out.push(all[*dq.front().expect("window holds the newest sample")]);
            }
        }
        out
    }
}

fn check_same_grid<T: Scalar>(a: &Trajectory<T>, b: &Trajectory<T>) -> Result<()> {
    if a.h() != b.h() || a.len() != b.len() || a.dim() != b.dim() || a.tau_max() != b.tau_max() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Sliding-window maximum `M0(t) = sup_{t - tau_max <= s <= t} |x(s)|` on the
/// trajectory grid. The initial segment supplies the window for `t < tau_max`.
pub fn maximal_function<T: Scalar>(traj: &Trajectory<T>, tau_max: T) -> Result<Series<T>> {
    let mut path = MagnitudePath::from_trajectory(traj)?;
    if tau_max != traj.tau_max() {
        let hist = traj.history();
        let tau = traj.tau_max();
        path.tau_max = tau_max;
        path.initial = MagnitudePath::sample_initial(tau_max, traj.h(), |s| {
            let mut m = T::zero();
            for c in 0..hist.dim() {
                m = m.max(hist.eval(c, s.max(-tau), tau)?.abs());
            }
            Ok(m)
        })?;
    }
    let values = path.maximal();
    Ok(Series {
        times: (0..values.len()).map(|i| traj.time(i)).collect(),
        values,
    })
}

/// `z(t) = max_i |x_i(t) - y_i(t)|` on a shared grid.
pub fn sync_error<T: Scalar>(a: &Trajectory<T>, b: &Trajectory<T>) -> Result<Series<T>> {
    check_same_grid(a, b)?;
    let values = (0..a.len())
        .map(|i| {
            a.state(i)
                .iter()
                .zip(b.state(i))
                .fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()))
        })
        .collect();
    Ok(Series {
        times: (0..a.len()).map(|i| a.time(i)).collect(),
        values,
    })
}

/// `v(t) = max_i |u_i(t) - u_i(t - ω)|` for grid times `t >= ω`.
pub fn periodic_residual<T: Scalar>(traj: &Trajectory<T>, omega: T) -> Result<Series<T>> {
    if !(omega > T::zero()) {
        return Err(Error::InvalidParameter(format!("period must be positive, got {omega}")));
    }
    if traj.end_time() < omega {
        return Err(Error::InvalidParameter(format!(
            "trajectory ends at {} before one period {omega}",
            traj.end_time()
        )));
    }
    let start = (omega / traj.h() - T::lit(1e-9)).ceil().to_usize().unwrap_or(0);
    let mut times = Vec::with_capacity(traj.len() - start);
    let mut values = Vec::with_capacity(traj.len() - start);
    for i in start..traj.len() {
        let t = traj.time(i);
        let mut v = T::zero();
        for c in 0..traj.dim() {
            v = v.max((traj.state(i)[c] - traj.value_at(c, t - omega)?).abs());
        }
        times.push(t);
        values.push(v);
    }
    Ok(Series { times, values })
}

/// The last full period of a trajectory, re-based to start at 0.
#[derive(Debug, Clone)]
pub struct Orbit<T> {
    pub times: Vec<T>,
    pub states: Vec<Vec<T>>,
}

impl<T: Scalar> Orbit<T> {
    pub fn to_csv(&self) -> String {
        let dim = self.states.first().map(|s| s.len()).unwrap_or(0);
        let mut out = String::from("t");
        for c in 0..dim {
            out.push_str(&format!(",x{}", c + 1));
        }
        out.push('\n');
        for (t, s) in self.times.iter().zip(&self.states) {
            out.push_str(&t.to_string());
            for v in s {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Extracts the orbit over the final period `[T - ω, T]` and reports the
/// largest difference between it and the period before, `max v(t)` over the
/// final period.
pub fn extract_orbit<T: Scalar>(traj: &Trajectory<T>, omega: T) -> Result<(Orbit<T>, T)> {
    let end = traj.end_time();
    if end < omega + omega {
        return Err(Error::InvalidParameter(format!(
            "need two full periods, trajectory ends at {end}"
        )));
    }
    let first = traj.index_of(end - omega);
    let mut orbit = Orbit {
        times: Vec::new(),
        states: Vec::new(),
    };
    let mut repeat = T::zero();
    for i in first..traj.len() {
        let t = traj.time(i);
        orbit.times.push(traj.h() * T::from_usize_lossy(i - first));
        orbit.states.push(traj.state(i).to_vec());
        for c in 0..traj.dim() {
            repeat = repeat.max((traj.state(i)[c] - traj.value_at(c, t - omega)?).abs());
        }
    }
    Ok((orbit, repeat))
}

/// Negated least-squares slope of `ln(value)` against `t` over samples with
/// `t >= t_start`. Values are clipped below at `1e-15`.
pub fn fit_decay_rate<T: Scalar>(samples: &Series<T>, t_start: T) -> Result<T> {
    let floor = T::lit(1e-15);
    let pts: Vec<(T, T)> = samples
        .times
        .iter()
        .zip(&samples.values)
        .filter(|(t, _)| **t >= t_start)
        .map(|(&t, &v)| (t, v.max(floor).ln()))
        .collect();
    if pts.len() < 10 {
        return Err(Error::InsufficientSamples {
            found: pts.len(),
            required: 10,
        });
    }
    let n = T::from_usize_lossy(pts.len());
    let (st, sy) = pts
        .iter()
        .fold((T::zero(), T::zero()), |(a, b), &(t, y)| (a + t, b + y));
    let (mt, my) = (st / n, sy / n);
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for &(t, y) in &pts {
        sxy = sxy + (t - mt) * (y - my);
        sxx = sxx + (t - mt) * (t - mt);
    }
    if sxx == T::zero() {
        return Err(Error::InsufficientSamples { found: 1, required: 10 });
    }
    Ok(-(sxy / sxx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn series(h: f64, n: usize, f: impl Fn(f64) -> f64) -> Series<f64> {
        let times: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let values = times.iter().map(|&t| f(t)).collect();
        Series { times, values }
    }

    #[test]
    fn exact_exponential_rate() {
        let s = series(0.01, 1001, |t| (-2.0 * t).exp());
        assert_abs_diff_eq!(fit_decay_rate(&s, 0.0).unwrap(), 2.0, epsilon = 1e-3);
    }

    #[test]
    fn modulated_exponential_rate() {
        let s = series(0.01, 3001, |t| (1.0 + 0.1 * t.sin()) * (-t).exp());
        assert_abs_diff_eq!(fit_decay_rate(&s, 0.0).unwrap(), 1.0, epsilon = 0.05);
    }

    #[test]
    fn too_few_samples() {
        let s = series(0.1, 20, |t| (-t).exp());
        assert!(matches!(
            fit_decay_rate(&s, 1.5),
            Err(Error::InsufficientSamples { found: 5, required: 10 })
        ));
    }

    #[test]
    fn zeros_are_clipped() {
        let s = series(0.1, 20, |_| 0.0);
        assert!(fit_decay_rate(&s, 0.0).unwrap().abs() < 1e-12);
    }

    fn path(h: f64, tau: f64, initial: Vec<f64>, f: impl Fn(f64) -> f64, n: usize) -> MagnitudePath<f64> {
        MagnitudePath {
            h,
            tau_max: tau,
            initial,
            values: (0..n).map(|i| f(i as f64 * h).abs()).collect(),
        }
    }

    #[test]
    fn maximal_of_constant() {
        let p = path(0.1, 1.0, vec![2.5; 10], |_| -2.5, 50);
        assert!(p.maximal().iter().all(|&m| m == 2.5));
    }

    #[test]
    fn maximal_of_decreasing_reads_left_edge() {
        let p = path(
            0.1,
            1.0,
            (1..=10).rev().map(|i| 10.0 + i as f64).collect(),
            |t| 10.0 - t,
            60,
        );
        let m0 = p.maximal();
        for (i, m) in m0.iter().enumerate().take(60).skip(10) {
            assert_abs_diff_eq!(*m, p.values[i - 10], epsilon = 1e-12);
        }
    }

    #[test]
    fn maximal_of_sine_window() {
        use std::f64::consts::PI;
        let h = PI / 2000.0;
        let p = path(h, PI / 2.0, vec![0.0; 1000], f64::sin, 2001);
        // window [π/2, π] contains the peak
        assert_abs_diff_eq!(p.maximal()[2000], 1.0, epsilon = 1e-12);
        // window [π/4, 3π/4] as well
        assert_abs_diff_eq!(p.maximal()[1500], 1.0, epsilon = 1e-12);
    }
}
