//! Experiment configuration: a flat TOML document whose keys mirror
//! [`ExperimentConfig`], optionally overridden from the command line.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer};

use crate::bell::{BellCalibration, BELL_MAX_QUBITS};
use crate::error::{Error, Result};
use crate::metric::PenaltySchedule;
use crate::operator::MAX_QUBITS;
use crate::states::StateSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ShadowConverge,
    BellConverge,
    W1locEval,
    Props,
    GibbsCheck,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::ShadowConverge => "shadow-converge",
            ExperimentKind::BellConverge => "bell-converge",
            ExperimentKind::W1locEval => "w1loc-eval",
            ExperimentKind::Props => "props",
            ExperimentKind::GibbsCheck => "gibbs-check",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::deserialize(serde::de::value::StrDeserializer::<serde::de::value::Error>::new(s))
            .map_err(|_| Error::Parse(format!("unknown experiment {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    #[default]
    Geometric,
    ConstantOne,
}

impl ScheduleKind {
    pub fn name(self) -> &'static str {
        match self {
            ScheduleKind::Geometric => "geometric",
            ScheduleKind::ConstantOne => "constant-one",
        }
    }
}

/// How the campaign metric is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricMode {
    /// Exact LP value; registers above `lp_cap` are rejected.
    #[default]
    Exact,
    /// Exact LP value up to `lp_cap`, the LP-free upper bound (labelled
    /// `w1loc_ub`) above it.
    UpperBound,
}

fn state_spec<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<StateSpec>, D::Error> {
    let s: Option<String> = Option::deserialize(d)?;
    s.map(|s| s.parse().map_err(serde::de::Error::custom)).transpose()
}

fn default_c() -> f64 {
    4.0
}
fn default_delta() -> f64 {
    0.1
}
fn default_trials() -> usize {
    100
}
fn default_c1() -> f64 {
    BellCalibration::default().c1
}
fn default_c2() -> f64 {
    BellCalibration::default().c2
}
fn default_lp_cap() -> usize {
    8
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n: usize,
    /// The state under study; defaults to `haar:<n>:<seed>`.
    #[serde(default, deserialize_with = "state_spec")]
    pub state: Option<StateSpec>,
    /// Second state for `w1loc-eval`.
    #[serde(default, deserialize_with = "state_spec")]
    pub reference: Option<StateSpec>,
    #[serde(default)]
    pub schedule: ScheduleKind,
    #[serde(default = "default_c")]
    pub c: f64,
    /// Target accuracies; each sets the sample size from the theory.
    #[serde(default)]
    pub w: Vec<f64>,
    /// Explicit shadow counts (shadow campaign only); overrides `w`.
    #[serde(default, rename = "N")]
    pub shadow_counts: Vec<u64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "default_c1")]
    pub c1: f64,
    #[serde(default = "default_c2")]
    pub c2: f64,
    /// Truncation weight for explicit-`N` shadow runs and shadow-file evaluation.
    #[serde(default)]
    pub k_cut: Option<usize>,
    #[serde(default = "default_lp_cap")]
    pub lp_cap: usize,
    #[serde(default)]
    pub metric: MetricMode,
    /// Shadow record file evaluated by `w1loc-eval`.
    #[serde(default)]
    pub shadows: Option<PathBuf>,
}

/// Command-line overrides; `None` leaves the file value in place.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub experiment: Option<ExperimentKind>,
    pub n: Option<usize>,
    pub c: Option<f64>,
    pub w: Option<Vec<f64>>,
    pub delta: Option<f64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Defaults for `experiment` on `n` qubits.
    pub fn new(experiment: ExperimentKind, n: usize) -> Self {
        Self {
            experiment,
            n,
            state: None,
            reference: None,
            schedule: ScheduleKind::Geometric,
            c: default_c(),
            w: Vec::new(),
            shadow_counts: Vec::new(),
            delta: default_delta(),
            trials: default_trials(),
            seed: 0,
            out: None,
            c1: default_c1(),
            c2: default_c2(),
            k_cut: None,
            lp_cap: default_lp_cap(),
            metric: MetricMode::Exact,
            shadows: None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.experiment {
            self.experiment = v;
        }
        if let Some(v) = o.n {
            self.n = v;
        }
        if let Some(v) = o.c {
            self.c = v;
        }
        if let Some(v) = &o.w {
            self.w = v.clone();
        }
        if let Some(v) = o.delta {
            self.delta = v;
        }
        if let Some(v) = o.trials {
            self.trials = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = &o.out {
            self.out = Some(v.clone());
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n == 0 || self.n > MAX_QUBITS {
            return bad(format!("n must lie in 1..={MAX_QUBITS}, got {}", self.n));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.w.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return bad("every w must be positive".into());
        }
        if self.shadow_counts.contains(&0) {
            return bad("every N must be positive".into());
        }
        if self.k_cut.is_some_and(|k| k > self.n) {
            return bad(format!("k_cut exceeds n = {}", self.n));
        }
        if !(self.c1 > 0.0 && self.c2 > 0.0) {
            return bad("c1 and c2 must be positive".into());
        }
        if let Some(s) = &self.state {
            if s.num_qubits() != self.n {
                return bad(format!("state {s} has {} qubits, n = {}", s.num_qubits(), self.n));
            }
        }
        if let Some(s) = &self.reference {
            if s.num_qubits() != self.n {
                return bad(format!("reference {s} has {} qubits, n = {}", s.num_qubits(), self.n));
            }
        }
        self.schedule()?;
        match self.experiment {
            ExperimentKind::BellConverge if self.n > BELL_MAX_QUBITS => {
                bad(format!("bell-converge needs n ≤ {BELL_MAX_QUBITS}"))
            }
            ExperimentKind::GibbsCheck if !(2..=6).contains(&self.n) => bad("gibbs-check needs 2 ≤ n ≤ 6".into()),
            _ if self.n > self.lp_cap && self.metric == MetricMode::Exact && self.experiment != ExperimentKind::Props => {
                bad(format!(
                    "n = {} exceeds lp_cap = {}; set metric = \"upper-bound\" to report the w1loc_ub bound instead",
                    self.n, self.lp_cap
                ))
            }
            _ => Ok(()),
        }
    }

    pub fn schedule(&self) -> Result<PenaltySchedule> {
        match self.schedule {
            ScheduleKind::Geometric => PenaltySchedule::geometric(self.c, self.n),
            ScheduleKind::ConstantOne => Ok(PenaltySchedule::constant_one(self.n)),
        }
    }

    pub fn calibration(&self) -> BellCalibration {
        BellCalibration { c1: self.c1, c2: self.c2 }
    }

    pub fn state_spec(&self) -> StateSpec {
        self.state.clone().unwrap_or(StateSpec::HaarPure { n: self.n, seed: self.seed })
    }

    /// Target accuracies, `[0.5]` when none are given.
    pub fn targets(&self) -> Vec<f64> {
        if self.w.is_empty() {
            vec![0.5]
        } else {
            self.w.clone()
        }
    }

    /// Text recorded in the manifest row; `;`-separated `key=value` pairs.
    pub fn manifest(&self) -> String {
        let list = |v: &[String]| v.join("/");
        let ws: Vec<String> = self.targets().iter().map(|w| w.to_string()).collect();
        let ns: Vec<String> = self.shadow_counts.iter().map(|n| n.to_string()).collect();
        let mut parts = vec![
            format!("experiment={}", self.experiment),
            format!("schedule={}", self.schedule.name()),
            format!("c={}", self.c),
            format!("delta={}", self.delta),
            format!("trials={}", self.trials),
            format!("state={}", self.state_spec()),
            format!("w={}", list(&ws)),
            format!("c1={}", self.c1),
            format!("c2={}", self.c2),
            format!("lp_cap={}", self.lp_cap),
        ];
        if !ns.is_empty() {
            parts.push(format!("N={}", list(&ns)));
        }
        if let Some(k) = self.k_cut {
            parts.push(format!("k_cut={k}"));
        }
        if let Some(r) = &self.reference {
            parts.push(format!("reference={r}"));
        }
        parts.push(format!("version={}", env!("CARGO_PKG_VERSION")));
        format!("manifest:{}", parts.join(";"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_document() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
            experiment = "shadow-converge"
            n = 4
            state = "ghz+:4"
            w = [0.5, 0.3]
            delta = 0.1
            trials = 20
            seed = 7
            "#,
        )
        .unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::ShadowConverge);
        assert_eq!(cfg.state, Some(StateSpec::GhzPlus(4)));
        assert_eq!(cfg.c, 4.0);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(ExperimentConfig::from_toml_str("experiment = \"props\"\nn = 3\ncolour = 1\n").is_err());
        let mut cfg = ExperimentConfig::new(ExperimentKind::Props, 3);
        cfg.delta = 1.5;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::new(ExperimentKind::ShadowConverge, 9);
        assert!(cfg.validate().is_err());
        cfg.metric = MetricMode::UpperBound;
        cfg.validate().unwrap();
    }

    #[test]
    fn overrides_win() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Props, 3);
        cfg.apply(&Overrides { seed: Some(11), w: Some(vec![0.2]), ..Default::default() });
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.targets(), vec![0.2]);
        assert_eq!("gibbs-check".parse::<ExperimentKind>().unwrap(), ExperimentKind::GibbsCheck);
    }
}
