mod common;

use common::{pf, sawtooth_b, sawtooth_pair};
use halanay::ddesim::{integrate, DelaySpec, HistorySegment, MagnitudePath, ScalarDde, SystemSpec};
use halanay::oracle::{
    check_decay_rate, check_lemma1, check_lemma2, check_lemma3, check_lemma4, check_theorem1_envelope, run_battery,
    sample_pairs, synth, OracleInput, Tolerance,
};
use halanay::{
    check_eta_condition, CertifyParams, CoefficientPair, Error, Eta, Expr, PiecewiseFunction, Region, Segment, Verdict,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn input_for(
    pair: &CoefficientPair<f64>,
    delay: DelaySpec<f64>,
    hist: &HistorySegment<f64>,
    horizon: f64,
    h: f64,
    eta: f64,
) -> OracleInput<f64> {
    let sys = SystemSpec::Scalar(ScalarDde::new(pair.clone(), delay).unwrap());
    let traj = integrate(&sys, hist, horizon, h).unwrap();
    let path = MagnitudePath::from_trajectory(&traj).unwrap();
    OracleInput::new(path, pair, Eta::new(eta).unwrap(), 1e-3).unwrap()
}

fn sawtooth_input(hist: &HistorySegment<f64>, horizon: f64) -> OracleInput<f64> {
    input_for(
        &sawtooth_pair(),
        DelaySpec::argument(pf("floor(t)"), 1.0),
        hist,
        horizon,
        1e-3,
        0.2,
    )
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn classical_lemma1_never_fires() {
    let pair = CoefficientPair::constant(2.0, 1.0, 1.0).unwrap();
    let hist = HistorySegment::random(&mut rng(1), 1, 8, 1.0);
    let input = input_for(&pair, DelaySpec::constant(1.0), &hist, 50.0, 0.01, 0.5);
    let rep = check_lemma1(&input, Tolerance::default());
    assert!(rep.passed, "{:?}", rep.violations.first());
    assert_eq!(rep.checks, 5000);
    assert_eq!(rep.skipped, 0);
}

#[test]
fn sawtooth_lemma1_and_excluded_bursts() {
    let hist = HistorySegment::random(&mut rng(2), 1, 8, 1.0);
    let input = sawtooth_input(&hist, 20.0);
    let rep = check_lemma1(&input, Tolerance::default());
    assert!(rep.passed);
    // the 1.2 bursts are unstable time and are not checked
    assert!(rep.skipped >= 10 * 2);
    assert_eq!(rep.checks + rep.skipped, 20_000);
}

#[test]
fn lemma2_across_a_burst_has_room() {
    let hist = HistorySegment::constant(&[1.0]);
    let input = sawtooth_input(&hist, 10.0);
    // (0.9, 1.1) contains the burst [1, 1.002)
    let rep = check_lemma2(&input, &[(900, 1100), (2900, 3100)], Tolerance::default());
    assert!(rep.passed);
    assert!(rep.min_slack > 0.0);
    let rep = check_lemma2(&input, &[(100, 400)], Tolerance::default());
    assert!(rep.passed);
}

#[test]
fn lemma2_and_lemma4_on_random_pairs() {
    let mut r = rng(3);
    let hist = HistorySegment::random(&mut r, 1, 8, 1.0);
    let input = sawtooth_input(&hist, 30.0);
    let pairs = sample_pairs(&input, 200, 4.0, &mut r);
    let straddle = pairs
        .iter()
        .filter(|&&(i, j)| input.map.measures(i as f64 * 1e-3, j as f64 * 1e-3).mu_minus > 0.0)
        .count();
    assert!(straddle * 4 >= pairs.len());
    let l2 = check_lemma2(&input, &pairs, Tolerance::default());
    let l4 = check_lemma4(&input, &pairs, Tolerance::default());
    assert!(
        l2.passed && l4.passed,
        "{:?} {:?}",
        l2.violations.first(),
        l4.violations.first()
    );
    assert_eq!(l4.checks, 200);
}

#[test]
fn lemma3_cases_hold_on_sawtooth_runs() {
    let hist = HistorySegment::random(&mut rng(4), 1, 8, 1.0);
    let input = sawtooth_input(&hist, 20.0);
    let rep = check_lemma3(&input, 20, Tolerance::default());
    assert!(rep.passed, "{:?}", rep.violations.first());
    let minus_runs = input.map.runs().iter().filter(|r| r.region == Region::Minus).count();
    assert_eq!(minus_runs, 10);
    assert!(rep.checks > 10 * 20);
}

#[test]
fn lemma3_eta_case_on_classical_system() {
    let pair = CoefficientPair::constant(2.0, 1.0, 1.0).unwrap();
    let hist = HistorySegment::random(&mut rng(5), 1, 8, 1.0);
    let input = input_for(&pair, DelaySpec::constant(1.0), &hist, 20.0, 0.01, 0.5);
    assert_eq!(input.map.runs().len(), 1);
    let rep = check_lemma3(&input, 500, Tolerance::default());
    assert!(rep.passed);
    assert!(rep.checks >= 500);
}

#[test]
fn lemma3_plus_case_on_balanced_pair() {
    let pair = CoefficientPair::constant(1.0, 1.0, 1.0).unwrap();
    let hist = HistorySegment::random(&mut rng(6), 1, 8, 1.0);
    let input = input_for(&pair, DelaySpec::constant(1.0), &hist, 20.0, 0.01, 0.5);
    assert_eq!(input.map.runs()[0].region, Region::Plus);
    let rep = check_lemma3(&input, 500, Tolerance::default());
    assert!(rep.passed);
}

#[test]
fn zero_solution_meets_every_bound_with_equality() {
    let input = sawtooth_input(&HistorySegment::zero(1), 10.0);
    let mut r = rng(7);
    let pairs = sample_pairs(&input, 50, 4.0, &mut r);
    let rep = check_lemma4(&input, &pairs, Tolerance::new(0.0));
    assert!(rep.passed);
    assert_eq!(rep.min_slack, 0.0);
    let cert = check_eta_condition(&sawtooth_pair(), &CertifyParams::new(Eta::new(0.2).unwrap(), 1, 40.0)).unwrap();
    assert!(
        check_theorem1_envelope(&input, &cert, Tolerance::default())
            .unwrap()
            .passed
    );
}

#[test]
fn sawtooth_envelope_over_twenty_histories() {
    let cert = check_eta_condition(&sawtooth_pair(), &CertifyParams::new(Eta::new(0.2).unwrap(), 1, 40.0)).unwrap();
    assert_eq!(cert.verdict, Verdict::Certified);
    let mut r = rng(8);
    for _ in 0..20 {
        let hist = HistorySegment::random(&mut r, 1, 8, 1.0);
        let input = sawtooth_input(&hist, 40.0);
        let env = check_theorem1_envelope(&input, &cert, Tolerance::default()).unwrap();
        assert!(env.passed, "{:?}", env.violations.first());
        let (rate, fitted) = check_decay_rate(&input, &cert, 5.0).unwrap();
        assert!(rate.passed, "fitted {fitted:?} vs alpha {:?}", cert.alpha);
    }
}

#[test]
fn forged_certificate_is_caught() {
    let pair = CoefficientPair::constant(1.0, 1.2, 1.0).unwrap();
    let honest = sawtooth_pair();
    let params = CertifyParams::new(Eta::new(0.2).unwrap(), 1, 40.0);
    let real = check_eta_condition(&pair, &params).unwrap();
    assert_eq!(real.verdict, Verdict::Refuted);
    // borrow the constants of a genuinely certified pair
    let template = check_eta_condition(&honest, &params).unwrap();
    let mut forged = real.clone();
    forged.verdict = Verdict::Certified;
    forged.c = template.c;
    forged.lambda0 = template.lambda0;
    forged.alpha = template.alpha;
    forged.k_star = Some(0);
    let hist = HistorySegment::constant(&[1.0]);
    let input = input_for(&pair, DelaySpec::constant(1.0), &hist, 40.0, 0.01, 0.2);
    let rep = check_theorem1_envelope(&input, &forged, Tolerance::default()).unwrap();
    assert!(!rep.passed);
    assert!(rep.violation_count >= 1);
    let v = rep.violations[0];
    assert!(v.lhs > v.rhs && v.slack < 0.0);
    // the honest path refuses to build constants for it
    assert_eq!(
        check_theorem1_envelope(&input, &real, Tolerance::default()).unwrap_err(),
        Error::NotCertified
    );
}

#[test]
fn injected_unstable_segment_is_not_checked_by_lemma1() {
    let b = PiecewiseFunction::new(
        vec![Segment {
            from: 3.0,
            to: 4.0,
            expr: Expr::Const(1.2),
        }],
        Expr::Const(0.5),
        None,
    )
    .unwrap();
    let pair = CoefficientPair::new(pf("1"), b, 1.0, 1.2, 1.0).unwrap();
    let input = input_for(
        &pair,
        DelaySpec::constant(1.0),
        &HistorySegment::constant(&[1.0]),
        10.0,
        0.01,
        0.2,
    );
    let rep = check_lemma1(&input, Tolerance::default());
    assert!(rep.passed);
    assert_eq!(rep.skipped, 100);
}

#[test]
fn battery_on_random_certified_pairs() {
    let mut r = rng(9);
    for _ in 0..4 {
        let pair = synth::certified_pair::<f64, _>(&mut r, 0.5).unwrap();
        let cert = check_eta_condition(&pair, &CertifyParams::new(Eta::new(0.5).unwrap(), 1, 80.0)).unwrap();
        assert_eq!(cert.verdict, Verdict::Certified, "{:?}", cert.diagnostic);
        for _ in 0..2 {
            let hist = HistorySegment::random(&mut r, 1, 8, 1.0);
            let input = input_for(&pair, DelaySpec::constant(1.0), &hist, 40.0, 0.005, 0.5);
            let reports = run_battery(&input, Some(&cert), 100, Tolerance::default(), &mut r).unwrap();
            assert_eq!(reports.len(), 5);
            for rep in reports {
                assert!(rep.passed, "{} {:?}", rep.name, rep.violations.first());
            }
        }
    }
}

#[test]
fn sawtooth_b_matches_stated_values() {
    let b = sawtooth_b();
    assert_eq!(b.eval(0.2).unwrap(), 0.8);
    assert_eq!(b.eval(1.001).unwrap(), 1.2);
    assert_eq!(b.eval(1.5).unwrap(), 1.0);
    assert_eq!(b.eval(41.0005).unwrap(), 1.2);
}
