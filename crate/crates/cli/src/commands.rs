use std::path::PathBuf;

use halanay::certifier::{check_periodic_condition, ratio_from_measures};
use halanay::ddesim::{
    extract_orbit, fit_decay_rate, maximal_function, periodic_residual, polyline_svg, sync_error, ScalarForm, Series,
};
use halanay::oracle::{check_decay_rate, run_battery};
use halanay::{
    check_eta_condition, integrate, CertifyParams, CoefficientPair, Error, Eta, EtaCertificate, MagnitudePath,
    OracleInput, OracleReport, PeriodicCheck, SystemSpec, Tolerance, Trajectory, Verdict, WindowStats,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::output::Sink;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Measure,
    Certify,
    Simulate,
    Sync,
    Periodic,
}

#[derive(Debug, Clone)]
pub struct Options {
    pub out: PathBuf,
    pub seed: u64,
    pub tolerance: Tolerance<f64>,
}

/// Exit code and the summary lines for standard output.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: u8,
    pub lines: Vec<String>,
    pub report: Value,
}

pub fn run(command: Command, cfg: &Config, opts: &Options) -> CliResult<Outcome> {
    let mut sink = Sink::new(&opts.out, &cfg.outputs.formats);
    match command {
        Command::Measure => measure(cfg, &mut sink),
        Command::Certify => certify(cfg, &mut sink),
        Command::Simulate => simulate(cfg, opts, &mut sink),
        Command::Sync => sync(cfg, opts, &mut sink),
        Command::Periodic => periodic(cfg, opts, &mut sink),
    }
}

fn windows_csv(windows: &[WindowStats<f64>], footer: Option<f64>) -> String {
    let mut out = String::from("k,t_k,mu_eta,mu_eta_full,mu_minus,mu_plus,ratio\n");
    for w in windows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            w.k, w.t_k, w.mu_eta, w.mu_eta_full, w.mu_minus, w.mu_plus, w.ratio
        ));
    }
    if let Some(span) = footer {
        let sum = |f: fn(&WindowStats<f64>) -> f64| windows.iter().map(f).sum::<f64>();
        let (eta, full, minus, plus) = (
            sum(|w| w.mu_eta),
            sum(|w| w.mu_eta_full),
            sum(|w| w.mu_minus),
            sum(|w| w.mu_plus),
        );
        out.push_str(&format!(
            "total,{span},{eta},{full},{minus},{plus},{}\n",
            full + minus + plus
        ));
    }
    out
}

fn window_table(windows: &[WindowStats<f64>]) -> Vec<String> {
    let mut lines = vec![format!(
        "{:>4} {:>10} {:>12} {:>12} {:>12} {:>12}",
        "k", "t_k", "mu_eta", "mu_minus", "mu_plus", "ratio"
    )];
    for w in windows {
        lines.push(format!(
            "{:>4} {:>10.4} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
            w.k, w.t_k, w.mu_eta, w.mu_minus, w.mu_plus, w.ratio
        ));
    }
    lines
}

fn ratio_svg(title: &str, windows: &[WindowStats<f64>], half: f64) -> String {
    let t: Vec<f64> = windows.iter().map(|w| w.t_k).collect();
    let r: Vec<f64> = windows.iter().map(|w| w.ratio).collect();
    let h = vec![half; t.len()];
    polyline_svg(title, &[(&t, &r), (&t, &h)])
}

fn measure(cfg: &Config, sink: &mut Sink) -> CliResult<Outcome> {
    let c = cfg.certify()?;
    let eta = cfg.etas()?[0];
    let n = cfg.ns()?[0];
    let pair = cfg.certify_pair()?;
    let len = (n + 1) as f64 * pair.tau_max();
    let count = (c.horizon / len + 1e-9).floor() as usize;
    if count == 0 {
        return Err(CliError::TooShort(format!(
            "horizon {} is shorter than one window of length {len}",
            c.horizon
        )));
    }
    let span = count as f64 * len;
    pair.validate_on_grid(c.t0, c.t0 + span, c.resolution)?;
    let windows = (0..count)
        .into_par_iter()
        .map(|k| halanay::window_ratio(&pair, eta, c.t0, n, k, c.resolution))
        .collect::<Result<Vec<_>, Error>>()?;

    sink.csv("measure.csv", &windows_csv(&windows, Some(span)))?;
    sink.svg("measure_ratio.svg", &ratio_svg("window ratio", &windows, eta.half()))?;
    let total = |f: fn(&WindowStats<f64>) -> f64| windows.iter().map(f).sum::<f64>();
    let report = json!({
        "command": "measure",
        "eta": eta.value(),
        "N": n,
        "t0": c.t0,
        "tau_max": pair.tau_max(),
        "M_a": pair.m_a(),
        "M_b": pair.m_b(),
        "span": span,
        "windows": windows,
        "totals": {
            "mu_eta": total(|w| w.mu_eta),
            "mu_eta_full": total(|w| w.mu_eta_full),
            "mu_minus": total(|w| w.mu_minus),
            "mu_plus": total(|w| w.mu_plus),
        },
    });
    sink.json("measure.json", &report)?;
    let mut lines = window_table(&windows);
    lines.push(format!(
        "{count} windows of length {len} over [{}, {}]",
        c.t0,
        c.t0 + span
    ));
    Ok(Outcome { code: 0, lines, report })
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Certified => 0,
        Verdict::Refuted => 1,
        Verdict::Inconclusive => 4,
    }
}

/// Certified with the largest rate, else inconclusive, else refuted, each
/// preferring the smallest `C_star_est`; earlier entries win ties.
fn best_certificate(certs: &[EtaCertificate<f64>]) -> &EtaCertificate<f64> {
    let rank = |c: &EtaCertificate<f64>| match c.verdict {
        Verdict::Certified => 0,
        Verdict::Inconclusive => 1,
        Verdict::Refuted => 2,
    };
    let mut best = &certs[0];
    for c in &certs[1..] {
        let better = match rank(c).cmp(&rank(best)) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal if c.verdict == Verdict::Certified => {
                c.alpha.unwrap_or(f64::NEG_INFINITY) > best.alpha.unwrap_or(f64::NEG_INFINITY)
            }
            std::cmp::Ordering::Equal => c.c_star_est < best.c_star_est,
        };
        if better {
            best = c;
        }
    }
    best
}

fn params(cfg: &Config, eta: Eta<f64>, n: usize) -> CliResult<CertifyParams<f64>> {
    let c = cfg.certify()?;
    Ok(CertifyParams {
        eta,
        t0: c.t0,
        n,
        horizon: c.horizon,
        resolution: c.resolution,
        divergence_threshold: c.divergence_threshold,
    })
}

/// Runs every `(η, N)` combination; combinations whose horizon is too short
/// are listed but skipped.
fn certificates(cfg: &Config, pair: &CoefficientPair<f64>) -> CliResult<(Vec<EtaCertificate<f64>>, Vec<Value>)> {
    let mut combos = Vec::new();
    for eta in cfg.etas()? {
        for n in cfg.ns()? {
            combos.push((eta, n));
        }
    }
    let results: Vec<_> = combos
        .par_iter()
        .map(|&(eta, n)| params(cfg, eta, n).map(|p| check_eta_condition(pair, &p)))
        .collect();
    let mut certs = Vec::new();
    let mut skipped = Vec::new();
    let mut short = None;
    for (&(eta, n), r) in combos.iter().zip(results) {
        match r? {
            Ok(c) => certs.push(c),
            Err(e @ Error::HorizonTooShort { .. }) => {
                skipped.push(json!({ "eta": eta.value(), "N": n, "skipped": e.to_string() }));
                short = Some(e);
            }
            Err(e) => return Err(e.into()),
        }
    }
    if certs.is_empty() {
        return Err(short
            .map(CliError::from)
            .unwrap_or_else(|| CliError::Config("nothing to certify".into())));
    }
    Ok((certs, skipped))
}

fn certify(cfg: &Config, sink: &mut Sink) -> CliResult<Outcome> {
    let c = cfg.certify()?;
    let pair = cfg.certify_pair()?;
    let (certs, skipped) = certificates(cfg, &pair)?;
    let best = best_certificate(&certs);

    let mut report = serde_json::to_value(best)?;
    let obj = report.as_object_mut().expect("certificate serializes to an object");
    obj.insert("command".into(), json!("certify"));
    if let Some(s) = c.stated {
        let len = (best.n + 1) as f64 * best.tau_max;
        let ratio = ratio_from_measures(best.m_a, best.m_b, len, s.mu_minus, s.mu_eta);
        obj.insert(
            "stated".into(),
            json!({
                "mu_minus": s.mu_minus,
                "mu_eta": s.mu_eta,
                "ratio": ratio,
                "below_half_eta": ratio < best.eta / 2.0,
            }),
        );
    }
    let mut candidates: Vec<Value> = certs
        .iter()
        .map(|c| {
            json!({
                "eta": c.eta,
                "N": c.n,
                "verdict": c.verdict,
                "C_star_est": if c.c_star_est.is_finite() { json!(c.c_star_est) } else { json!("inf") },
                "alpha": c.alpha,
            })
        })
        .collect();
    candidates.extend(skipped);
    obj.insert("candidates".into(), Value::Array(candidates));

    sink.json("certificate.json", &report)?;
    sink.csv("certificate_windows.csv", &windows_csv(&best.windows, None))?;
    sink.svg(
        "certificate_ratio.svg",
        &ratio_svg("window ratio", &best.windows, best.eta / 2.0),
    )?;

    let fmt_opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.6}"));
    let mut lines = vec![
        format!(
            "verdict: {}",
            serde_json::to_value(best.verdict)?.as_str().unwrap_or("?")
        ),
        format!(
            "eta = {}, N = {}, tau_max = {}, M_a = {}, M_b = {}",
            best.eta, best.n, best.tau_max, best.m_a, best.m_b
        ),
        format!("C_star_est = {:.6} (eta/2 = {})", best.c_star_est, best.eta / 2.0),
        format!(
            "sum mu_eta = {:.6}, threshold = {:.6}",
            best.sum_mu_eta, best.divergence_threshold
        ),
        format!(
            "alpha = {}, lambda0 = {}, K = {}, K_tilde = {}",
            fmt_opt(best.alpha),
            fmt_opt(best.lambda0),
            fmt_opt(best.k),
            fmt_opt(best.k_tilde)
        ),
    ];
    if let Some(s) = report.get("stated") {
        lines.push(format!("stated measures give ratio {}", s["ratio"]));
    }
    if let Some(d) = &best.diagnostic {
        lines.push(format!("note: {d}"));
    }
    Ok(Outcome {
        code: verdict_code(best.verdict),
        lines,
        report,
    })
}

fn run_histories(cfg: &Config, opts: &Options, system: &SystemSpec<f64>) -> CliResult<Vec<Trajectory<f64>>> {
    let sim = cfg.simulate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let histories = cfg.histories(system.dim(), &mut rng)?;
    let trajs = histories
        .par_iter()
        .map(|h| integrate(system, h, sim.t_end, sim.h))
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(trajs)
}

/// `η` for the lemma oracles and, when certified, the certificate for the
/// envelope oracle.
type OracleSetup = Option<(Eta<f64>, Option<EtaCertificate<f64>>)>;

/// Certificate used by the oracles: the first `(η, N)` of the certify block.
fn oracle_certificate(cfg: &Config, pair: &CoefficientPair<f64>, notes: &mut Vec<String>) -> CliResult<OracleSetup> {
    if cfg.certify.is_none() {
        notes.push("no [certify] section: lemma oracles need eta and are skipped".into());
        return Ok(None);
    }
    let eta = cfg.etas()?[0];
    let n = cfg.ns()?[0];
    match check_eta_condition(pair, &params(cfg, eta, n)?) {
        Ok(c) if c.verdict == Verdict::Certified => Ok(Some((eta, Some(c)))),
        Ok(c) => {
            notes.push(format!(
                "certificate verdict is {}; envelope oracle skipped",
                format!("{:?}", c.verdict).to_lowercase()
            ));
            Ok(Some((eta, None)))
        }
        Err(e @ Error::HorizonTooShort { .. }) => {
            notes.push(format!("{e}; envelope oracle skipped"));
            Ok(Some((eta, None)))
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize)]
struct Battery {
    oracles: Vec<OracleReport<f64>>,
    fitted_rate: Option<f64>,
}

fn battery(
    path: MagnitudePath<f64>,
    pair: &CoefficientPair<f64>,
    eta: Eta<f64>,
    cert: Option<&EtaCertificate<f64>>,
    cfg: &Config,
    opts: &Options,
    stream: u64,
) -> CliResult<Battery> {
    let sim = cfg.simulate()?;
    let res = cfg.certify()?.resolution;
    let input = OracleInput::new(path, pair, eta, res)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(stream);
    let mut oracles = run_battery(&input, cert, sim.oracle_pairs, opts.tolerance, &mut rng)?;
    let mut fitted_rate = None;
    if let Some(cert) = cert {
        let (rep, fitted) = check_decay_rate(&input, cert, sim.t_end / 2.0)?;
        oracles.push(rep);
        fitted_rate = fitted;
    }
    Ok(Battery { oracles, fitted_rate })
}

fn series_svg(title: &str, series: &[&Series<f64>]) -> String {
    let parts: Vec<(&[f64], &[f64])> = series
        .iter()
        .map(|s| (s.times.as_slice(), s.values.as_slice()))
        .collect();
    polyline_svg(title, &parts)
}

fn simulate(cfg: &Config, opts: &Options, sink: &mut Sink) -> CliResult<Outcome> {
    let sim = cfg.simulate()?;
    let system = cfg.system_spec()?;
    let trajs = run_histories(cfg, opts, &system)?;
    let mut notes = Vec::new();
    let oracle_setup = match &system {
        SystemSpec::Scalar(s) => oracle_certificate(cfg, &s.pair, &mut notes)?.map(|(eta, c)| (s.pair.clone(), eta, c)),
        _ => {
            notes.push("lemma oracles apply to scalar systems only".into());
            None
        }
    };

    let batteries = trajs
        .par_iter()
        .enumerate()
        .map(|(i, traj)| match &oracle_setup {
            Some((pair, eta, cert)) => {
                let path = MagnitudePath::from_trajectory(traj)?;
                battery(path, pair, *eta, cert.as_ref(), cfg, opts, i as u64 + 1).map(Some)
            }
            None => Ok(None),
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut runs = Vec::new();
    let mut all_passed = true;
    let mut lines = Vec::new();
    for (i, (traj, bat)) in trajs.iter().zip(batteries).enumerate() {
        let id = i + 1;
        let m0 = maximal_function(traj, traj.tau_max())?;
        sink.csv(&format!("trajectory_{id}.csv"), &traj.to_csv())?;
        sink.csv(&format!("m0_{id}.csv"), &m0.to_csv())?;
        let times: Vec<f64> = (0..traj.len()).map(|k| traj.time(k)).collect();
        let comps: Vec<Vec<f64>> = (0..traj.dim()).map(|c| traj.component(c)).collect();
        let mut plot: Vec<(&[f64], &[f64])> = comps.iter().map(|c| (times.as_slice(), c.as_slice())).collect();
        plot.push((&m0.times, &m0.values));
        sink.svg(
            &format!("trajectory_{id}.svg"),
            &polyline_svg(&format!("history {id}"), &plot),
        )?;

        let last = traj.len() - 1;
        let final_norm = traj.norms()[last];
        let m0_rate = fit_decay_rate(&m0, sim.t_end / 2.0).ok();
        let passed = bat.as_ref().is_none_or(|b| b.oracles.iter().all(|o| o.passed));
        all_passed &= passed;
        lines.push(format!(
            "history {id}: |x(T)| = {final_norm:.3e}, M0(T) = {:.3e}, fitted rate {}{}",
            m0.values[last],
            m0_rate.map_or("-".into(), |r| format!("{r:.4}")),
            match &bat {
                Some(b) => format!(
                    ", oracles {}",
                    b.oracles
                        .iter()
                        .map(|o| format!("{}:{}", o.name, if o.passed { "ok" } else { "FAIL" }))
                        .collect::<Vec<_>>()
                        .join(" ")
                ),
                None => String::new(),
            }
        ));
        runs.push(json!({
            "history": id,
            "final_state": traj.state(last),
            "final_norm": final_norm,
            "m0_final": m0.values[last],
            "m0_fitted_rate": m0_rate,
            "clamp_count": traj.clamp_count(),
            "oracles": bat.as_ref().map(|b| &b.oracles),
            "oracle_fitted_rate": bat.as_ref().and_then(|b| b.fitted_rate),
        }));
    }
    let cert = oracle_setup.as_ref().and_then(|(_, _, c)| c.as_ref());
    let report = json!({
        "command": "simulate",
        "seed": opts.seed,
        "T": sim.t_end,
        "h": sim.h,
        "dim": system.dim(),
        "certificate": cert.map(|c| json!({ "eta": c.eta, "N": c.n, "alpha": c.alpha, "K_tilde": c.k_tilde })),
        "runs": runs,
        "passed": all_passed,
        "notes": notes,
    });
    sink.json("simulate.json", &report)?;
    lines.extend(notes.iter().map(|n| format!("note: {n}")));
    Ok(Outcome {
        code: if all_passed { 0 } else { 1 },
        lines,
        report,
    })
}

fn sync(cfg: &Config, opts: &Options, sink: &mut Sink) -> CliResult<Outcome> {
    let sim = cfg.simulate()?;
    let system = cfg.system_spec()?;
    let trajs = run_histories(cfg, opts, &system)?;
    if trajs.len() < 2 {
        return Err(CliError::Config(format!(
            "sync needs at least 2 histories, got {}",
            trajs.len()
        )));
    }
    let mut notes = Vec::new();
    // differences of two solutions solve the same equation only when it is linear
    let oracle_setup = match &system {
        SystemSpec::Scalar(s) if s.form == ScalarForm::Delayed => {
            oracle_certificate(cfg, &s.pair, &mut notes)?.map(|(eta, c)| (s.pair.clone(), eta, c))
        }
        SystemSpec::Scalar(_) => {
            notes.push("the sup-envelope form is nonlinear; no oracles on differences".into());
            None
        }
        _ => {
            notes.push("lemma oracles apply to scalar systems only".into());
            None
        }
    };
    let mut pairs = Vec::new();
    for i in 0..trajs.len() {
        for j in i + 1..trajs.len() {
            pairs.push((i, j));
        }
    }
    let results = pairs
        .par_iter()
        .enumerate()
        .map(|(k, &(i, j))| {
            let z = sync_error(&trajs[i], &trajs[j])?;
            let bat = match &oracle_setup {
                Some((pair, eta, cert)) => {
                    let path = MagnitudePath::from_difference(&trajs[i], &trajs[j])?;
                    Some(battery(path, pair, *eta, cert.as_ref(), cfg, opts, k as u64 + 1)?)
                }
                None => None,
            };
            Ok((z, bat))
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut entries = Vec::new();
    let mut lines = Vec::new();
    let mut all_passed = true;
    for (&(i, j), (z, bat)) in pairs.iter().zip(&results) {
        let (a, b) = (i + 1, j + 1);
        sink.csv(&format!("z_{a}_{b}.csv"), &z.to_csv())?;
        let (_, z_final) = z.last().expect("nonempty trajectory");
        let rate = fit_decay_rate(z, sim.t_end / 2.0).ok();
        let passed = bat.as_ref().is_none_or(|b| b.oracles.iter().all(|o| o.passed));
        all_passed &= passed;
        lines.push(format!(
            "z_{a}_{b}(T) = {z_final:.3e}, max z = {:.3e}, fitted rate {}{}",
            z.max(),
            rate.map_or("-".into(), |r| format!("{r:.4}")),
            if bat.is_some() {
                if passed {
                    ", oracles ok"
                } else {
                    ", oracles FAIL"
                }
            } else {
                ""
            }
        ));
        entries.push(json!({
            "histories": [a, b],
            "z_final": z_final,
            "z_max": z.max(),
            "fitted_rate": rate,
            "oracles": bat.as_ref().map(|b| &b.oracles),
        }));
    }
    let all: Vec<&Series<f64>> = results.iter().map(|(z, _)| z).collect();
    sink.svg("sync.svg", &series_svg("sync error", &all))?;
    let report = json!({
        "command": "sync",
        "seed": opts.seed,
        "T": sim.t_end,
        "h": sim.h,
        "pairs": entries,
        "passed": all_passed,
        "notes": notes,
    });
    sink.json("sync.json", &report)?;
    lines.extend(notes.iter().map(|n| format!("note: {n}")));
    Ok(Outcome {
        code: if all_passed { 0 } else { 1 },
        lines,
        report,
    })
}

/// First passing `(η, N)` in configuration order, else the last one tried.
fn periodic_check(
    cfg: &Config,
    spec: &halanay::ddesim::PeriodicNetworkSpec<f64>,
) -> CliResult<Option<PeriodicCheck<f64>>> {
    let Some(c) = &cfg.certify else { return Ok(None) };
    let mut last = None;
    for eta in cfg.etas()? {
        for n in cfg.ns()? {
            let check = check_periodic_condition(spec, eta, n, c.resolution)?;
            if check.verdict {
                return Ok(Some(check));
            }
            last = Some(check);
        }
    }
    Ok(last)
}

fn periodic(cfg: &Config, opts: &Options, sink: &mut Sink) -> CliResult<Outcome> {
    let sim = cfg.simulate()?;
    let Some(spec) = cfg.periodic_spec()? else {
        return Err(CliError::Config("periodic needs a network with omega".into()));
    };
    let omega = spec.omega;
    let check = periodic_check(cfg, &spec)?;
    let system = SystemSpec::Periodic(spec);
    let trajs = run_histories(cfg, opts, &system)?;

    let results = trajs
        .par_iter()
        .map(|traj| {
            let v = periodic_residual(traj, omega)?;
            let (orbit, repeat) = extract_orbit(traj, omega)?;
            Ok((v, orbit, repeat))
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut runs = Vec::new();
    let mut lines = Vec::new();
    for (i, (v, orbit, repeat)) in results.iter().enumerate() {
        let id = i + 1;
        sink.csv(&format!("v_{id}.csv"), &v.to_csv())?;
        sink.csv(&format!("orbit_{id}.csv"), &orbit.to_csv())?;
        sink.svg(
            &format!("v_{id}.svg"),
            &series_svg(&format!("periodic residual, history {id}"), &[v]),
        )?;
        let (_, v_final) = v.last().expect("nonempty residual");
        let rate = fit_decay_rate(v, omega).ok();
        lines.push(format!(
            "history {id}: v(T) = {v_final:.3e}, fitted rate {}, orbit repeat {repeat:.3e}",
            rate.map_or("-".into(), |r| format!("{r:.4}"))
        ));
        runs.push(json!({
            "history": id,
            "v_final": v_final,
            "v_max": v.max(),
            "fitted_rate": rate,
            "orbit_repeat": repeat,
        }));
    }
    if let Some(c) = &check {
        lines.push(format!(
            "periodic condition: {} (eta = {}, N = {}, p = {}, lhs = {}, mu_bar_eta = {:.6}, mu_bar_minus = {:.6})",
            if c.verdict { "holds" } else { "fails" },
            c.eta,
            c.n,
            c.p,
            c.lhs,
            c.mu_bar_eta,
            c.mu_bar_minus
        ));
    }
    let report = json!({
        "command": "periodic",
        "seed": opts.seed,
        "T": sim.t_end,
        "h": sim.h,
        "omega": omega,
        "check": check,
        "runs": runs,
    });
    sink.json("periodic.json", &report)?;
    let code = match &check {
        Some(c) if !c.verdict => 1,
        _ => 0,
    };
    Ok(Outcome { code, lines, report })
}
