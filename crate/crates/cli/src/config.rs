//! Declarative run configuration. One TOML file fully determines a run;
//! unknown keys anywhere are rejected.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use halanay::ddesim::{
    Activation, DelayFloor, DelaySpec, NetworkParts, NetworkSpec, PeriodicNetworkSpec, ScalarDde, ScalarForm,
};
use halanay::{
    bound_estimates, common_pair, Boundary, CoefficientPair, Eta, HistorySegment, PiecewiseDef, PiecewiseFunction,
    SystemSpec,
};
use rand::Rng;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

/// Knots of a generated random history.
pub const RANDOM_KNOTS: usize = 8;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub system: SystemConfig,
    pub certify: Option<CertifyConfig>,
    pub simulate: Option<SimulateConfig>,
    #[serde(default)]
    pub outputs: OutputsConfig,
    #[serde(default)]
    pub seed: u64,
}

/// Exactly one of `scalar` and `network`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub scalar: Option<ScalarConfig>,
    pub network: Option<NetworkConfig>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DelayMode {
    /// `delay` is the lag `τ(t)`
    #[default]
    Lag,
    /// `delay` is the delayed argument itself
    Argument,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarConfig {
    pub a: PiecewiseDef,
    pub b: PiecewiseDef,
    #[serde(rename = "M_a")]
    pub m_a: Option<f64>,
    #[serde(rename = "M_b")]
    pub m_b: Option<f64>,
    pub tau_max: f64,
    /// defaults to the constant lag `tau_max`
    pub delay: Option<PiecewiseDef>,
    #[serde(default)]
    pub delay_mode: DelayMode,
    #[serde(default)]
    pub delay_floor: DelayFloor,
    #[serde(default)]
    pub form: ScalarForm,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub d: Vec<PiecewiseDef>,
    pub a: Vec<Vec<PiecewiseDef>>,
    pub b: Vec<Vec<PiecewiseDef>>,
    pub g: Vec<Activation>,
    pub f: Vec<Activation>,
    /// zero when absent
    pub inputs: Option<Vec<PiecewiseDef>>,
    /// lag matrix `τ_ij(t)`
    pub delays: Vec<Vec<PiecewiseDef>>,
    pub tau_max: f64,
    #[serde(rename = "G")]
    pub lipschitz_g: Option<Vec<f64>>,
    #[serde(rename = "F")]
    pub lipschitz_f: Option<Vec<f64>>,
    #[serde(default)]
    pub delay_floor: DelayFloor,
    /// common period of all coefficients; makes the system periodic
    pub omega: Option<f64>,
    #[serde(rename = "M_a")]
    pub m_a: Option<f64>,
    #[serde(rename = "M_b")]
    pub m_b: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    pub eta: Option<f64>,
    pub eta_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub t0: f64,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "N_max")]
    pub n_max: Option<usize>,
    pub horizon: f64,
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    pub divergence_threshold: Option<f64>,
    #[serde(default)]
    pub boundary: Boundary,
    /// externally quoted window measures, evaluated alongside the geometry
    pub stated: Option<StatedMeasures>,
}

fn default_resolution() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatedMeasures {
    pub mu_minus: f64,
    pub mu_eta: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(rename = "T")]
    pub t_end: f64,
    pub h: f64,
    pub histories: Vec<HistoryConfig>,
    /// sampled `(t1, t2)` pairs per lemma oracle
    #[serde(default = "default_oracle_pairs")]
    pub oracle_pairs: usize,
}

fn default_oracle_pairs() -> usize {
    300
}

/// `"random:k:amplitude"`, a constant per component, or one function per
/// component.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum HistoryConfig {
    Spec(String),
    Constant(Vec<f64>),
    Functions(Vec<PiecewiseDef>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Svg,
    Json,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    pub dir: Option<PathBuf>,
    #[serde(default = "all_formats")]
    pub formats: Vec<Format>,
}

impl Default for OutputsConfig {
    fn default() -> Self {
        OutputsConfig {
            dir: None,
            formats: all_formats(),
        }
    }
}

fn all_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Svg, Format::Json]
}

fn positive(name: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be positive, got {v}")))
    }
}

fn function(def: &PiecewiseDef, what: &str) -> CliResult<PiecewiseFunction> {
    PiecewiseFunction::try_from(def).map_err(|e| CliError::Config(format!("{what}: {e}")))
}

fn matrix(rows: &[Vec<PiecewiseDef>], what: &str) -> CliResult<Vec<Vec<PiecewiseFunction>>> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            r.iter()
                .enumerate()
                .map(|(j, d)| function(d, &format!("{what}[{}][{}]", i + 1, j + 1)))
                .collect()
        })
        .collect()
}

impl Config {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: Config = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> CliResult<()> {
        match (&self.system.scalar, &self.system.network) {
            (Some(s), None) => positive("system.scalar.tau_max", s.tau_max)?,
            (None, Some(n)) => {
                positive("system.network.tau_max", n.tau_max)?;
                if let Some(w) = n.omega {
                    positive("system.network.omega", w)?;
                }
            }
            _ => {
                return Err(CliError::Config(
                    "system needs exactly one of [system.scalar] and [system.network]".into(),
                ))
            }
        }
        if let Some(c) = &self.certify {
            match (&c.eta, &c.eta_grid) {
                (Some(e), None) => positive("certify.eta", *e)?,
                (None, Some(g)) if !g.is_empty() => {
                    for &e in g {
                        positive("certify.eta_grid entry", e)?;
                    }
                }
                _ => {
                    return Err(CliError::Config(
                        "certify needs exactly one of eta and a nonempty eta_grid".into(),
                    ))
                }
            }
            match (c.n, c.n_max) {
                (Some(n), None) | (None, Some(n)) if n >= 1 => {}
                (Some(_), Some(_)) => return Err(CliError::Config("certify takes N or N_max, not both".into())),
                (None, None) => return Err(CliError::Config("certify needs N or N_max".into())),
                _ => return Err(CliError::Config("N must be at least 1".into())),
            }
            positive("certify.horizon", c.horizon)?;
            positive("certify.resolution", c.resolution)?;
            if !c.t0.is_finite() {
                return Err(CliError::Config("certify.t0 must be finite".into()));
            }
            if let Some(d) = c.divergence_threshold {
                positive("certify.divergence_threshold", d)?;
            }
        }
        if let Some(s) = &self.simulate {
            positive("simulate.T", s.t_end)?;
            positive("simulate.h", s.h)?;
            if s.histories.is_empty() {
                return Err(CliError::Config("simulate.histories is empty".into()));
            }
        }
        Ok(())
    }

    pub fn certify(&self) -> CliResult<&CertifyConfig> {
        self.certify
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [certify] section".into()))
    }

    pub fn simulate(&self) -> CliResult<&SimulateConfig> {
        self.simulate
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [simulate] section".into()))
    }

    pub fn wants(&self, f: Format) -> bool {
        self.outputs.formats.contains(&f)
    }

    /// Latest time any configured command looks at.
    fn reach(&self) -> f64 {
        let c = self.certify.as_ref().map_or(0.0, |c| c.t0 + c.horizon);
        let s = self.simulate.as_ref().map_or(0.0, |s| s.t_end);
        c.max(s).max(1.0)
    }

    fn resolution(&self) -> f64 {
        self.certify.as_ref().map_or(1e-3, |c| c.resolution)
    }

    pub fn omega(&self) -> Option<f64> {
        self.system.network.as_ref().and_then(|n| n.omega)
    }

    pub fn tau_max(&self) -> f64 {
        match (&self.system.scalar, &self.system.network) {
            (Some(s), _) => s.tau_max,
            (_, Some(n)) => n.tau_max,
            _ => unreachable!("validated"),
        }
    }

    /// Coefficient pair of the scalar system; missing bounds are estimated
    /// over every time the configuration reaches.
    pub fn scalar_pair(&self) -> CliResult<Option<CoefficientPair<f64>>> {
        let Some(s) = &self.system.scalar else { return Ok(None) };
        let a = function(&s.a, "system.scalar.a")?;
        let b = function(&s.b, "system.scalar.b")?;
        let (lo, hi) = (self.certify.as_ref().map_or(0.0, |c| c.t0.min(0.0)), self.reach());
        let res = self.resolution();
        let m_a = match s.m_a {
            Some(v) => v,
            None => bound_estimates(&a, lo, hi, res)?.1,
        };
        let m_b = match s.m_b {
            Some(v) => v,
            None => {
                let (inf, sup) = bound_estimates(&b, lo, hi, res)?;
                inf.abs().max(sup.abs())
            }
        };
        positive("M_a", m_a)?;
        Ok(Some(CoefficientPair::new(a, b, m_a, m_b, s.tau_max)?))
    }

    fn network_spec(&self) -> CliResult<Option<NetworkSpec<f64>>> {
        let Some(n) = &self.system.network else { return Ok(None) };
        let size = n.d.len();
        let d =
            n.d.iter()
                .enumerate()
                .map(|(i, v)| function(v, &format!("d[{}]", i + 1)))
                .collect::<CliResult<Vec<_>>>()?;
        let inputs = match &n.inputs {
            Some(v) => v
                .iter()
                .enumerate()
                .map(|(i, v)| function(v, &format!("inputs[{}]", i + 1)))
                .collect::<CliResult<Vec<_>>>()?,
            None => vec![PiecewiseFunction::constant(0.0); size],
        };
        let delays = matrix(&n.delays, "delays")?
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|tau| DelaySpec::lag(tau, n.tau_max).with_floor(n.delay_floor))
                    .collect()
            })
            .collect();
        let spec = NetworkSpec::new(NetworkParts {
            d,
            a: matrix(&n.a, "a")?,
            b: matrix(&n.b, "b")?,
            g: n.g.clone(),
            f: n.f.clone(),
            inputs,
            delays,
            lipschitz_g: n.lipschitz_g.clone(),
            lipschitz_f: n.lipschitz_f.clone(),
            tau_max: n.tau_max,
        })?;
        Ok(Some(spec))
    }

    pub fn periodic_spec(&self) -> CliResult<Option<PeriodicNetworkSpec<f64>>> {
        let (Some(cfg), Some(spec)) = (&self.system.network, self.network_spec()?) else {
            return Ok(None);
        };
        let Some(omega) = cfg.omega else { return Ok(None) };
        let periodic = PeriodicNetworkSpec::new(spec, omega)?.with_bounds(cfg.m_a, cfg.m_b);
        let defect = periodic.network.periodicity_defect(omega, self.resolution())?;
        if defect > 1e-9 {
            return Err(CliError::Config(format!(
                "coefficients are not {omega}-periodic (deviation {defect:e})"
            )));
        }
        Ok(Some(periodic))
    }

    pub fn system_spec(&self) -> CliResult<SystemSpec<f64>> {
        if let Some(s) = &self.system.scalar {
            let pair = self.scalar_pair()?.expect("scalar system");
            let delay_fn = match &s.delay {
                Some(d) => function(d, "system.scalar.delay")?,
                None => PiecewiseFunction::constant(s.tau_max),
            };
            let delay = match s.delay_mode {
                DelayMode::Lag => DelaySpec::lag(delay_fn, s.tau_max),
                DelayMode::Argument => DelaySpec::argument(delay_fn, s.tau_max),
            }
            .with_floor(s.delay_floor);
            return Ok(SystemSpec::Scalar(ScalarDde::new(pair, delay)?.with_form(s.form)));
        }
        if let Some(p) = self.periodic_spec()? {
            return Ok(SystemSpec::Periodic(p));
        }
        let net = self.network_spec()?.expect("network system");
        Ok(SystemSpec::Network(Arc::new(net)))
    }

    /// The pair the η-condition is checked on: the scalar pair itself, or the
    /// minimum-margin reduction of the network's row bounds.
    pub fn certify_pair(&self) -> CliResult<CoefficientPair<f64>> {
        if let Some(pair) = self.scalar_pair()? {
            return Ok(pair);
        }
        let cfg = self.system.network.as_ref().expect("validated");
        let net = Arc::new(self.network_spec()?.expect("network system"));
        let (lo, hi) = (self.certify.as_ref().map_or(0.0, |c| c.t0.min(0.0)), self.reach());
        let (ea, eb) = match (cfg.m_a, cfg.m_b) {
            (Some(a), Some(b)) => (a, b),
            _ => net.estimate_bounds(lo, hi, self.resolution())?,
        };
        let (m_a, m_b) = (cfg.m_a.unwrap_or(ea), cfg.m_b.unwrap_or(eb));
        positive("M_a", m_a)?;
        Ok(common_pair(&net.row_pairs(m_a, m_b)?)?)
    }

    /// η values to try, in configuration order.
    pub fn etas(&self) -> CliResult<Vec<Eta<f64>>> {
        let c = self.certify()?;
        let values = match (&c.eta, &c.eta_grid) {
            (Some(e), _) => vec![*e],
            (_, Some(g)) => g.clone(),
            _ => unreachable!("validated"),
        };
        values
            .into_iter()
            .map(|v| Eta::with_boundary(v, c.boundary).map_err(CliError::from))
            .collect()
    }

    /// `N` values to try: the fixed `N`, or `1..=N_max`.
    pub fn ns(&self) -> CliResult<Vec<usize>> {
        let c = self.certify()?;
        Ok(match (c.n, c.n_max) {
            (Some(n), _) => vec![n],
            (_, Some(m)) => (1..=m).collect(),
            _ => unreachable!("validated"),
        })
    }

    /// Expands the history list; random entries draw from `rng` in order.
    pub fn histories<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> CliResult<Vec<HistorySegment<f64>>> {
        let mut out = Vec::new();
        for (i, h) in self.simulate()?.histories.iter().enumerate() {
            match h {
                HistoryConfig::Spec(s) => {
                    let (count, amplitude) = parse_random(s)?;
                    out.extend((0..count).map(|_| HistorySegment::random(rng, dim, RANDOM_KNOTS, amplitude)));
                }
                HistoryConfig::Constant(v) => {
                    if v.len() != dim {
                        return Err(CliError::Config(format!(
                            "history {} has {} values, system has {dim} components",
                            i + 1,
                            v.len()
                        )));
                    }
                    out.push(HistorySegment::constant(v));
                }
                HistoryConfig::Functions(defs) => {
                    if defs.len() != dim {
                        return Err(CliError::Config(format!(
                            "history {} has {} functions, system has {dim} components",
                            i + 1,
                            defs.len()
                        )));
                    }
                    let components = defs
                        .iter()
                        .map(|d| function(d, &format!("history {}", i + 1)).map(halanay::ddesim::History::Function))
                        .collect::<CliResult<Vec<_>>>()?;
                    out.push(HistorySegment { components });
                }
            }
        }
        Ok(out)
    }
}

/// Parses `"random:k:amplitude"`.
pub fn parse_random(s: &str) -> CliResult<(usize, f64)> {
    let bad = || CliError::Config(format!("history \"{s}\" is not of the form random:k:amplitude"));
    let mut parts = s.split(':');
    if parts.next() != Some("random") {
        return Err(bad());
    }
    let count: usize = parts.next().and_then(|p| p.trim().parse().ok()).ok_or_else(bad)?;
    let amplitude: f64 = parts.next().and_then(|p| p.trim().parse().ok()).ok_or_else(bad)?;
    if parts.next().is_some() || count == 0 || !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(bad());
    }
    Ok((count, amplitude))
}
