#![allow(dead_code)]

use halanay::ddesim::{Activation, DelaySpec, NetworkParts, NetworkSpec, PeriodicNetworkSpec};
use halanay::{CoefficientPair, Expr, PiecewiseFunction, Segment};

pub fn pf(s: &str) -> PiecewiseFunction {
    PiecewiseFunction::parse(s).unwrap()
}

/// `b = 0.8` on `[2k, 2k+0.5)`, `1.2` on `[2k+1, 2k+1.002)`, `1` otherwise.
pub fn sawtooth_b() -> PiecewiseFunction {
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

pub fn sawtooth_pair() -> CoefficientPair<f64> {
    CoefficientPair::new(pf("1"), sawtooth_b(), 1.0, 1.2, 1.0).unwrap()
}

/// Three-neuron ring with period-2 coefficients and inputs.
pub fn ring3() -> PeriodicNetworkSpec<f64> {
    let a_diag = "abs(sin(pi*t))^3";
    let s2 = "sin(2*pi*t)^2";
    let c2 = "cos(2*pi*t)^2";
    let s4 = "sin(4*pi*t)^2";
    let c4 = "cos(4*pi*t)^2";
    let mut a = vec![vec![pf("0"); 3]; 3];
    let mut b = vec![vec![pf("0"); 3]; 3];
    let mut delays = vec![vec![DelaySpec::constant(1.0); 3]; 3];
    for i in 0..3 {
        a[i][i] = pf(a_diag);
        a[i][(i + 1) % 3] = pf(s2);
        a[i][(i + 2) % 3] = pf(c2);
        b[i][(i + 1) % 3] = pf(s4);
        b[i][(i + 2) % 3] = pf(c4);
        delays[i][(i + 1) % 3] = DelaySpec::lag(pf("abs(sin(2*pi*t))"), 1.0);
        delays[i][(i + 2) % 3] = DelaySpec::lag(pf("abs(cos(2*pi*t))"), 1.0);
    }
    let net = NetworkSpec::new(NetworkParts {
        d: vec![pf("2 + sin(pi*t)^2"); 3],
        a,
        b,
        g: vec![Activation::Tanh; 3],
        f: vec![Activation::Arctan; 3],
        inputs: (1..=3).map(|i| pf(&format!("sin({i}*pi*t)"))).collect(),
        delays,
        lipschitz_g: None,
        lipschitz_f: None,
        tau_max: 1.0,
    })
    .unwrap();
    PeriodicNetworkSpec::new(net, 2.0).unwrap()
}
