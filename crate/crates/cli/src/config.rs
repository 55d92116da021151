//! Flat `key = value` run configuration with a canonical serialization.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use sparse_ias::experiments::{ExperimentName, ExperimentSpec};
use sparse_ias::solver::PhaseSwitch;

use crate::CliError;

/// Default threshold for the majority vote.
pub const DEFAULT_TAU: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Emit {
    pub csv: bool,
    pub pgm: bool,
    pub svg: bool,
}

impl Emit {
    pub fn all() -> Self {
        Emit { csv: true, pgm: true, svg: true }
    }
}

impl FromStr for Emit {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let mut e = Emit::default();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match item {
                "csv" => e.csv = true,
                "pgm" => e.pgm = true,
                "svg" => e.svg = true,
                "none" => {}
                other => return Err(CliError::Config(format!("unknown emit kind {other:?}"))),
            }
        }
        Ok(e)
    }
}

impl std::fmt::Display for Emit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kinds: Vec<&str> = [(self.csv, "csv"), (self.pgm, "pgm"), (self.svg, "svg")]
            .iter()
            .filter(|(on, _)| *on)
            .map(|(_, k)| *k)
            .collect();
        f.write_str(if kinds.is_empty() { "none" } else { "" })?;
        f.write_str(&kinds.join(","))
    }
}

/// Everything one invocation needs, fully resolved.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub spec: ExperimentSpec,
    pub exact_alpha: bool,
    pub nonneg: bool,
    /// Majority-vote threshold (dictlearn).
    pub tau: f64,
    /// Clean image (2-D experiments) replacing the bundled one.
    pub image: Option<PathBuf>,
    /// Atom and test matrix files (dictlearn) replacing the synthetic set.
    pub atoms: Option<PathBuf>,
    pub tests: Option<PathBuf>,
    pub out: PathBuf,
    pub emit: Emit,
}

impl RunConfig {
    pub fn defaults(name: ExperimentName) -> Self {
        RunConfig {
            spec: ExperimentSpec::defaults(name),
            exact_alpha: false,
            nonneg: name == ExperimentName::DictLearn,
            tau: DEFAULT_TAU,
            image: None,
            atoms: None,
            tests: None,
            out: PathBuf::from("."),
            emit: Emit::all(),
        }
    }

    /// Canonical text: fixed key order, shortest round-trip number format.
    pub fn to_canonical(&self) -> String {
        let s = &self.spec;
        let h = &s.hyper;
        let opt_f = |v: Option<f64>| v.map_or("none".to_string(), |x| x.to_string());
        let opt_p = |v: &Option<PathBuf>| v.as_ref().map_or("none".to_string(), |p| p.display().to_string());
        let (switch_after, switch_rtol) = match s.stop.phase_switch {
            PhaseSwitch::AfterFixed(k) => (Some(k), None),
            PhaseSwitch::OnThetaRtol(t) => (None, Some(t)),
            PhaseSwitch::WhicheverFirst(k, t) => (Some(k), Some(t)),
        };
        let mut out = String::new();
        let mut put = |k: &str, v: String| writeln!(out, "{k} = {v}").unwrap();
        put("experiment", s.name.as_str().to_string());
        put("n", s.n.to_string());
        put("m", s.m.to_string());
        put("n_dense", s.n_dense.to_string());
        put("w", opt_f(s.blur_width));
        put("sigma_frac", s.noise_frac.to_string());
        put("seed", s.seed.to_string());
        put("r1", h.r1.to_string());
        put("eta1", h.eta1.to_string());
        put("r2", h.r2.to_string());
        put("eta2", h.eta2.to_string());
        put("sensitivity", h.sensitivity.to_string());
        put("uniform_scale", opt_f(h.uniform_scale));
        put("local_hybrid", h.local.to_string());
        put("switch_after", switch_after.map_or("none".to_string(), |k| k.to_string()));
        put("switch_rtol", opt_f(switch_rtol));
        put("theta_rtol", s.stop.theta_rtol.to_string());
        put("max_outer", s.stop.max_outer.to_string());
        put("exact_alpha", self.exact_alpha.to_string());
        put("nonneg", self.nonneg.to_string());
        put("tau", self.tau.to_string());
        put("image", opt_p(&self.image));
        put("atoms", opt_p(&self.atoms));
        put("tests", opt_p(&self.tests));
        put("out", self.out.display().to_string());
        put("emit", self.emit.to_string());
        out
    }

    /// Parses a config file. `experiment` must be present; every other key
    /// defaults to that experiment's settings.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut pairs = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let k = k.trim().to_string();
            if pairs.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(CliError::Config(format!("line {}: duplicate key {k:?}", lineno + 1)));
            }
        }
        let name: ExperimentName = pairs
            .remove("experiment")
            .ok_or_else(|| CliError::Config("missing key `experiment`".into()))?
            .parse()
            .map_err(|e: sparse_ias::Error| CliError::Config(e.to_string()))?;
        let mut cfg = RunConfig::defaults(name);
        let mut overrides = Overrides::default();
        for (k, v) in pairs {
            overrides.set(&k, &v)?;
        }
        overrides.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Rejects values no experiment can use; solver-level checks happen later.
    pub fn validate(&self) -> Result<(), CliError> {
        let s = &self.spec;
        if s.n == 0 || s.m == 0 {
            return Err(CliError::Config("n and m must be positive".into()));
        }
        if !(0.0..1.0).contains(&s.noise_frac) {
            return Err(CliError::Config(format!("sigma_frac must lie in [0, 1), got {}", s.noise_frac)));
        }
        if s.name == ExperimentName::DictLearn && !(s.noise_frac > 0.0) {
            return Err(CliError::Config("dictlearn needs a positive sigma_frac".into()));
        }
        if let Some(w) = s.blur_width {
            if !(w > 0.0) {
                return Err(CliError::Config(format!("w must be positive, got {w}")));
            }
        }
        if !(self.tau > 0.0) {
            return Err(CliError::Config(format!("tau must be positive, got {}", self.tau)));
        }
        if s.stop.max_outer == 0 {
            return Err(CliError::Config("max_outer must be positive".into()));
        }
        Ok(())
    }
}

/// Optional values from flags or a config file, layered over defaults.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub n_dense: Option<usize>,
    pub w: Option<Option<f64>>,
    pub sigma_frac: Option<f64>,
    pub seed: Option<u64>,
    pub r1: Option<f64>,
    pub eta1: Option<f64>,
    pub r2: Option<f64>,
    pub eta2: Option<f64>,
    pub sensitivity: Option<f64>,
    pub uniform_scale: Option<Option<f64>>,
    pub local_hybrid: Option<bool>,
    pub switch_after: Option<Option<usize>>,
    pub switch_rtol: Option<Option<f64>>,
    pub theta_rtol: Option<f64>,
    pub max_outer: Option<usize>,
    pub exact_alpha: Option<bool>,
    pub nonneg: Option<bool>,
    pub tau: Option<f64>,
    pub image: Option<Option<PathBuf>>,
    pub atoms: Option<Option<PathBuf>>,
    pub tests: Option<Option<PathBuf>>,
    pub out: Option<PathBuf>,
    pub emit: Option<Emit>,
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::Config(format!("bad value {v:?} for `{key}`")))
}

fn maybe<T: FromStr>(key: &str, v: &str) -> Result<Option<T>, CliError> {
    if v == "none" {
        Ok(None)
    } else {
        num(key, v).map(Some)
    }
}

fn path(v: &str) -> Option<PathBuf> {
    (v != "none").then(|| PathBuf::from(v))
}

impl Overrides {
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), CliError> {
        match key {
            "n" => self.n = Some(num(key, v)?),
            "m" => self.m = Some(num(key, v)?),
            "n_dense" => self.n_dense = Some(num(key, v)?),
            "w" => self.w = Some(maybe(key, v)?),
            "sigma_frac" => self.sigma_frac = Some(num(key, v)?),
            "seed" => self.seed = Some(num(key, v)?),
            "r1" => self.r1 = Some(num(key, v)?),
            "eta1" => self.eta1 = Some(num(key, v)?),
            "r2" => self.r2 = Some(num(key, v)?),
            "eta2" => self.eta2 = Some(num(key, v)?),
            "sensitivity" => self.sensitivity = Some(num(key, v)?),
            "uniform_scale" => self.uniform_scale = Some(maybe(key, v)?),
            "local_hybrid" => self.local_hybrid = Some(num(key, v)?),
            "switch_after" => self.switch_after = Some(maybe(key, v)?),
            "switch_rtol" => self.switch_rtol = Some(maybe(key, v)?),
            "theta_rtol" => self.theta_rtol = Some(num(key, v)?),
            "max_outer" => self.max_outer = Some(num(key, v)?),
            "exact_alpha" => self.exact_alpha = Some(num(key, v)?),
            "nonneg" => self.nonneg = Some(num(key, v)?),
            "tau" => self.tau = Some(num(key, v)?),
            "image" => self.image = Some(path(v)),
            "atoms" => self.atoms = Some(path(v)),
            "tests" => self.tests = Some(path(v)),
            "out" => self.out = Some(PathBuf::from(v)),
            "emit" => self.emit = Some(v.parse()?),
            other => return Err(CliError::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn apply(&self, cfg: &mut RunConfig) {
        let s = &mut cfg.spec;
        macro_rules! take {
            ($field:ident => $target:expr) => {
                if let Some(v) = self.$field.clone() {
                    $target = v;
                }
            };
        }
        take!(n => s.n);
        take!(m => s.m);
        take!(n_dense => s.n_dense);
        take!(w => s.blur_width);
        take!(sigma_frac => s.noise_frac);
        take!(seed => s.seed);
        take!(r1 => s.hyper.r1);
        take!(eta1 => s.hyper.eta1);
        take!(r2 => s.hyper.r2);
        take!(eta2 => s.hyper.eta2);
        take!(sensitivity => s.hyper.sensitivity);
        take!(uniform_scale => s.hyper.uniform_scale);
        take!(local_hybrid => s.hyper.local);
        take!(theta_rtol => s.stop.theta_rtol);
        take!(max_outer => s.stop.max_outer);
        take!(exact_alpha => cfg.exact_alpha);
        take!(nonneg => cfg.nonneg);
        take!(tau => cfg.tau);
        take!(image => cfg.image);
        take!(atoms => cfg.atoms);
        take!(tests => cfg.tests);
        take!(out => cfg.out);
        take!(emit => cfg.emit);
        if self.switch_after.is_some() || self.switch_rtol.is_some() {
            let (after, rtol) = match s.stop.phase_switch {
                PhaseSwitch::AfterFixed(k) => (Some(k), None),
                PhaseSwitch::OnThetaRtol(t) => (None, Some(t)),
                PhaseSwitch::WhicheverFirst(k, t) => (Some(k), Some(t)),
            };
            let after = self.switch_after.unwrap_or(after);
            let rtol = self.switch_rtol.unwrap_or(rtol);
            s.stop.phase_switch = match (after, rtol) {
                (Some(k), Some(t)) => PhaseSwitch::WhicheverFirst(k, t),
                (None, Some(t)) => PhaseSwitch::OnThetaRtol(t),
                // with neither, switch immediately after the first iteration
                (k, None) => PhaseSwitch::AfterFixed(k.unwrap_or(0)),
            };
        }
    }
}
