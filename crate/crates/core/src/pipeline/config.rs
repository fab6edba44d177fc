use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::{IterationConfig, Mode, RhoPolicy, T0Policy};
use crate::classical::DEFAULT_LAMBDA2;
use crate::error::{Error, Result};
use crate::qsim::MAX_QUBITS;
use crate::spectral::Companion;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    Classical,
    #[default]
    Spectral,
    QuantumMatrix,
    QuantumGate,
    /// Classical (no normalization), spectral and matrix-level quantum on the
    /// same data, cross-checked.
    Compare,
}

impl FromStr for RunMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "classical" => RunMode::Classical,
            "spectral" => RunMode::Spectral,
            "quantum-matrix" => RunMode::QuantumMatrix,
            "quantum-gate" => RunMode::QuantumGate,
            "compare" => RunMode::Compare,
            _ => {
                return Err(Error::Configuration(format!(
                    "unknown mode {s:?} (classical, spectral, quantum-matrix, quantum-gate, compare)"
                )))
            }
        })
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunMode::Classical => "classical",
            RunMode::Spectral => "spectral",
            RunMode::QuantumMatrix => "quantum-matrix",
            RunMode::QuantumGate => "quantum-gate",
            RunMode::Compare => "compare",
        })
    }
}

/// Where the data matrix comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputSource {
    Csv(String),
    /// Standard normal `n x m` data drawn from the run seed.
    Random { n: usize, m: usize },
}

impl FromStr for InputSource {
    type Err = Error;

    /// A path, or `random:NxM`.
    fn from_str(s: &str) -> Result<Self> {
        let Some(shape) = s.strip_prefix("random:") else {
            return Ok(InputSource::Csv(s.to_string()));
        };
        let bad = || Error::Configuration(format!("expected random:NxM, got {s:?}"));
        let (n, m) = shape.split_once('x').ok_or_else(bad)?;
        Ok(InputSource::Random {
            n: n.parse().map_err(|_| bad())?,
            m: m.parse().map_err(|_| bad())?,
        })
    }
}

impl fmt::Display for InputSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputSource::Csv(p) => f.write_str(p),
            InputSource::Random { n, m } => write!(f, "random:{n}x{m}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub input: Option<InputSource>,
    /// Reduced dimension.
    pub k: usize,
    /// Neighbors per point in the affinity graph.
    pub k_nn: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Frobenius radius for the classical learner; `None` skips normalization.
    pub rho0: Option<f64>,
    pub s: usize,
    pub s_prime: u32,
    pub b: u32,
    pub d: u32,
    pub p: u32,
    pub n_terms: usize,
    pub t0: T0Policy,
    pub rho: RhoPolicy,
    pub companion: Companion,
    pub qubit_budget: usize,
    pub mode: RunMode,
    pub seed: u64,
    pub output: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let it = IterationConfig::default();
        Self {
            input: None,
            k: 2,
            k_nn: 5,
            lambda1: 0.0,
            lambda2: DEFAULT_LAMBDA2,
            rho0: None,
            s: 5,
            s_prime: it.s_prime,
            b: it.b,
            d: it.d,
            p: it.p,
            n_terms: it.n_terms,
            t0: it.t0,
            rho: it.rho,
            companion: it.companion,
            qubit_budget: MAX_QUBITS,
            mode: RunMode::default(),
            seed: 0,
            output: None,
        }
    }
}

/// Keys accepted by [`RunConfig::set`].
pub const CONFIG_KEYS: &[&str] = &[
    "input", "k", "k_nn", "lambda1", "lambda2", "rho0", "s", "s_prime", "b", "d", "p", "n_terms", "t0", "rho",
    "companion", "qubit_budget", "mode", "seed", "output",
];

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Configuration(format!("{key}: cannot parse {v:?}")))
}

/// `none` or a number.
fn optional(key: &str, v: &str) -> Result<Option<f64>> {
    match v {
        "none" | "" => Ok(None),
        _ => num(key, v).map(Some),
    }
}

impl RunConfig {
    /// Sets one field from its textual form. Keys use underscores; dashes
    /// are accepted too.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let v = value.trim();
        match key.as_str() {
            "input" => self.input = Some(v.parse()?),
            "k" => self.k = num(&key, v)?,
            "k_nn" => self.k_nn = num(&key, v)?,
            "lambda1" => self.lambda1 = num(&key, v)?,
            "lambda2" => self.lambda2 = num(&key, v)?,
            "rho0" => self.rho0 = optional(&key, v)?,
            "s" => self.s = num(&key, v)?,
            "s_prime" => self.s_prime = num(&key, v)?,
            "b" => self.b = num(&key, v)?,
            "d" => self.d = num(&key, v)?,
            "p" => self.p = num(&key, v)?,
            "n_terms" => self.n_terms = num(&key, v)?,
            "t0" => self.t0 = if v == "auto" { T0Policy::Auto } else { T0Policy::Fixed(num(&key, v)?) },
            "rho" => self.rho = if v == "auto" { RhoPolicy::Auto } else { RhoPolicy::Fixed(num(&key, v)?) },
            "companion" => {
                self.companion = match v {
                    "column-index" => Companion::ColumnIndex,
                    "right-singular" => Companion::RightSingular,
                    _ => {
                        return Err(Error::Configuration(format!(
                            "companion: expected column-index or right-singular, got {v:?}"
                        )))
                    }
                }
            }
            "qubit_budget" => self.qubit_budget = num(&key, v)?,
            "mode" => self.mode = v.parse()?,
            "seed" => self.seed = num(&key, v)?,
            "output" => self.output = Some(v.to_string()),
            _ => return Err(Error::Configuration(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines on top of the defaults. Blank lines and
    /// `#` comments are ignored.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_kv(text)?;
        Ok(cfg)
    }

    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                row: i + 1,
                col: 1,
                msg: "expected key = value".into(),
            })?;
            self.set(k, v).map_err(|e| Error::Parse {
                row: i + 1,
                col: 1,
                msg: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_kv(&text)
    }

    /// The inverse of [`RunConfig::from_kv`].
    pub fn to_kv(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("none".to_string(), |x| x.to_string());
        let mut out = String::new();
        if let Some(i) = &self.input {
            out += &format!("input = {i}\n");
        }
        out += &format!(
            "k = {}\nk_nn = {}\nlambda1 = {}\nlambda2 = {}\nrho0 = {}\ns = {}\ns_prime = {}\nb = {}\nd = {}\np = {}\nn_terms = {}\n",
            self.k, self.k_nn, self.lambda1, self.lambda2, opt(self.rho0), self.s, self.s_prime, self.b, self.d, self.p, self.n_terms
        );
        out += &format!(
            "t0 = {}\nrho = {}\n",
            match self.t0 {
                T0Policy::Auto => "auto".into(),
                T0Policy::Fixed(t) => t.to_string(),
            },
            match self.rho {
                RhoPolicy::Auto => "auto".into(),
                RhoPolicy::Fixed(r) => r.to_string(),
            }
        );
        let companion = match self.companion {
            Companion::ColumnIndex => "column-index",
            Companion::RightSingular => "right-singular",
        };
        out += &format!(
            "companion = {companion}\nqubit_budget = {}\nmode = {}\nseed = {}\n",
            self.qubit_budget, self.mode, self.seed
        );
        if let Some(o) = &self.output {
            out += &format!("output = {o}\n");
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("k", self.k), ("k_nn", self.k_nn), ("n_terms", self.n_terms), ("qubit_budget", self.qubit_budget)];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Configuration(format!("{name} must be positive")));
            }
        }
        if !(self.lambda1 >= 0.0 && self.lambda1.is_finite()) {
            return Err(Error::Configuration(format!("lambda1 must be >= 0, got {}", self.lambda1)));
        }
        if !(self.lambda2 >= 0.0 && self.lambda2.is_finite()) {
            return Err(Error::Configuration(format!("lambda2 must be >= 0, got {}", self.lambda2)));
        }
        if let Some(r) = self.rho0 {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Configuration(format!("rho0 must be > 0, got {r}")));
            }
        }
        if matches!(self.mode, RunMode::QuantumMatrix | RunMode::QuantumGate | RunMode::Compare) {
            self.iteration_config(self.mode == RunMode::QuantumGate).validate()?;
        }
        Ok(())
    }

    /// Circuit parameters for the quantum modes.
    pub fn iteration_config(&self, gate_level: bool) -> IterationConfig {
        IterationConfig {
            t0: self.t0,
            b: self.b,
            d: self.d,
            p: self.p,
            rho: self.rho,
            lambda2: self.lambda2,
            s: self.s,
            s_prime: self.s_prime,
            n_terms: self.n_terms,
            mode: if gate_level { Mode::GateLevel } else { Mode::MatrixLevel },
            companion: self.companion,
            qubit_budget: self.qubit_budget,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_round_trip() {
        let mut c = RunConfig::default();
        c.set("input", "random:8x12").unwrap();
        c.set("rho0", "10").unwrap();
        c.set("t0", "3.5").unwrap();
        c.set("mode", "quantum-gate").unwrap();
        c.set("companion", "right-singular").unwrap();
        c.set("output", "out.json").unwrap();
        let back = RunConfig::from_kv(&c.to_kv()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn comments_and_dashes() {
        let c = RunConfig::from_kv("# run\nk = 3  # reduced dim\n\nk-nn=4\nrho = auto\n").unwrap();
        assert_eq!((c.k, c.k_nn, c.rho), (3, 4, RhoPolicy::Auto));
    }

    #[test]
    fn errors_carry_line() {
        match RunConfig::from_kv("k = 2\nbogus = 1\n") {
            Err(Error::Parse { row: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(RunConfig::from_kv("k 2\n").is_err());
        assert!(RunConfig::from_kv("mode = fast\n").is_err());
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::default();
        assert!(c.validate().is_ok());
        c.k = 0;
        assert!(c.validate().is_err());
        c.k = 2;
        c.mode = RunMode::QuantumGate;
        c.b = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn random_source() {
        assert_eq!("random:8x12".parse::<InputSource>().unwrap(), InputSource::Random { n: 8, m: 12 });
        assert!("random:8by12".parse::<InputSource>().is_err());
        assert_eq!("data.csv".parse::<InputSource>().unwrap(), InputSource::Csv("data.csv".into()));
    }
}
