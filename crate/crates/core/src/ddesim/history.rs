use crate::error::{EvalError, Result};
use crate::piecewise::PiecewiseFunction;
use crate::scalar::Scalar;

/// Initial function of one state component on `[-tau_max, 0]`.
#[derive(Debug, Clone)]
pub enum History<T> {
    Constant(T),
    Function(PiecewiseFunction),
    /// piecewise constant over equal sub-intervals of `[-tau_max, 0]`
    Steps(Vec<T>),
}

impl<T: Scalar> History<T> {
    fn eval(&self, s: T, tau_max: T) -> Result<T, EvalError> {
        match self {
            History::Constant(c) => Ok(*c),
            History::Function(f) => f.eval(s),
            History::Steps(v) => {
                let k = T::from_usize_lossy(v.len());
                let pos = ((s + tau_max) / tau_max * k).floor();
                let idx = pos.to_usize().unwrap_or(0).min(v.len() - 1);
                Ok(v[idx])
            }
        }
    }
}

/// Initial data `φ(s)`, `s ∈ [-tau_max, 0]`, one function per component.
#[derive(Debug, Clone)]
pub struct HistorySegment<T> {
    pub components: Vec<History<T>>,
}

impl<T: Scalar> HistorySegment<T> {
    pub fn constant(values: &[T]) -> Self {
        HistorySegment {
            components: values.iter().map(|&c| History::Constant(c)).collect(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::constant(&vec![T::zero(); dim])
    }

    pub fn steps(values: Vec<Vec<T>>) -> Self {
        HistorySegment {
            components: values.into_iter().map(History::Steps).collect(),
        }
    }

    /// `knots` uniform values in `[-amplitude, amplitude]` per component.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R, dim: usize, knots: usize, amplitude: f64) -> Self {
        Self::steps(
            (0..dim)
                .map(|_| {
                    (0..knots.max(1))
                        .map(|_| T::lit(rng.gen_range(-amplitude..=amplitude)))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn eval(&self, comp: usize, s: T, tau_max: T) -> Result<T, EvalError> {
        self.components[comp].eval(s, tau_max)
    }

    /// `max |φ(s)|` sampled on the grid `s = -ih` together with the step
    /// values and `s = -tau_max`.
    pub fn sup_norm(&self, tau_max: T, h: T) -> Result<T> {
        let mut m = T::zero();
        let steps = (tau_max / h).floor().to_usize().unwrap_or(0);
        for c in 0..self.dim() {
            if let History::Steps(v) = &self.components[c] {
                m = v.iter().fold(m, |m, x| m.max(x.abs()));
            }
            for i in 0..=steps {
                let s = -(h * T::from_usize_lossy(i));
                m = m.max(self.eval(c, s, tau_max)?.abs());
            }
            m = m.max(self.eval(c, -tau_max, tau_max)?.abs());
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steps_cover_the_segment() {
        let h = History::Steps(vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(h.eval(-1.0, 1.0).unwrap(), 1.0);
        assert_eq!(h.eval(-0.74, 1.0).unwrap(), 2.0);
        assert_eq!(h.eval(-0.3, 1.0).unwrap(), 3.0);
        assert_eq!(h.eval(0.0, 1.0).unwrap(), 4.0);
    }

    #[test]
    fn sup_norm_sees_every_step() {
        let seg = HistorySegment::steps(vec![vec![0.1, -0.9, 0.2], vec![0.5, 0.0, 0.0]]);
        assert_eq!(seg.sup_norm(1.0, 0.25).unwrap(), 0.9);
    }
}
