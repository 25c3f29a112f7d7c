//! Scenario files.
//!
//! A scenario is a TOML document with top-level keys and one level of
//! sections. Rates carry an explicit unit suffix (`"1 Gb/s"`,
//! `"2500 bits/slot"`) and are converted to bits per slot with the slot
//! length of the `[server]` section before anything reaches the library.

use std::path::Path;

use fbm_netcalc::netcalc::{CrossTraffic, ThroughTraffic};
use fbm_netcalc::traffic::{CbrTraffic, EbbOnOffAggregate, FbmTraffic};
use fbm_netcalc::units::SlotDuration;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Subcommand to run when none is given on the command line.
    pub command: Option<String>,
    pub title: Option<String>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub server: ServerBlock,
    pub traffic: Option<TrafficBlock>,
    pub ebb: Option<TrafficBlock>,
    pub cross: Option<TrafficBlock>,
    #[serde(default)]
    pub through: Vec<TrafficBlock>,
    pub sweep: Option<SweepBlock>,
    pub envelope: Option<EnvelopeBlock>,
    pub backlog: Option<BacklogBlock>,
    pub tail: Option<TailBlock>,
    pub delay: Option<DelayBlock>,
    pub e2e: Option<E2eBlock>,
    pub simulate: Option<SimulateBlock>,
    #[serde(default)]
    pub search: SearchBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServerBlock {
    pub capacity: Option<String>,
    /// Slot length, 10 µs when absent.
    pub slot: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficBlock {
    #[serde(rename = "type")]
    pub kind: TrafficKind,
    /// Number of identical independent sources in the aggregate.
    #[serde(default = "one")]
    pub sources: usize,
    /// Mean rate of one source.
    pub mean: String,
    /// fBm standard deviation of one source over one slot, given as a rate.
    pub sigma: Option<String>,
    pub hurst: Option<f64>,
    /// On-off peak rate of one source.
    pub peak: Option<String>,
    /// On-off burstiness `T = 1/p12 + 1/p21` in slots.
    pub burstiness: Option<f64>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrafficKind {
    Fbm,
    Ebb,
    Cbr,
}

impl TrafficKind {
    pub fn name(self) -> &'static str {
        match self {
            TrafficKind::Fbm => "fbm",
            TrafficKind::Ebb => "ebb",
            TrafficKind::Cbr => "cbr",
        }
    }
}

/// A number, or a string carrying a unit.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub variable: String,
    pub values: Option<Vec<Quantity>>,
    pub from: Option<Quantity>,
    pub to: Option<Quantity>,
    pub points: Option<usize>,
    #[serde(default)]
    pub scale: Scale,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeBlock {
    pub eta: f64,
    #[serde(default)]
    pub betas: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BacklogBlock {
    #[serde(default = "default_backlog_epsilon")]
    pub epsilon: f64,
}

fn default_backlog_epsilon() -> f64 {
    1e-9
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailBlock {
    #[serde(default)]
    pub hurst: Vec<f64>,
    #[serde(default)]
    pub burstiness: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayBlock {
    pub delay: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct E2eBlock {
    pub epsilon: f64,
    /// Cross traffic Hurst parameters, one curve each.
    #[serde(default)]
    pub hurst: Vec<f64>,
    /// Cross traffic burstiness values, one curve each.
    #[serde(default)]
    pub burstiness: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateBlock {
    pub beta: f64,
    pub eta: f64,
    pub horizon: usize,
    pub trials: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchBlock {
    /// Fixed cross envelope rate instead of optimizing it.
    pub r_cr: Option<String>,
    /// Fixed total network slack instead of optimizing it.
    pub delta: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    /// File name stem, the command name when absent.
    pub prefix: Option<String>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn slot(&self) -> Result<SlotDuration, CliError> {
        match &self.server.slot {
            None => Ok(SlotDuration::default()),
            Some(s) => {
                // the slot itself is parsed against the default 1 ns grid
                let ns = SlotDuration::from_nanos(1.0)
                    .and_then(|one| one.parse_duration(s))
                    .map_err(|e| config_err("server.slot", e))?;
                SlotDuration::from_nanos(ns).map_err(|e| config_err("server.slot", e))
            }
        }
    }

    pub fn capacity(&self) -> Result<f64, CliError> {
        let text = self
            .server
            .capacity
            .as_deref()
            .ok_or_else(|| missing("server.capacity"))?;
        positive_rate(&self.slot()?, text, "server.capacity")
    }

    pub fn traffic(&self) -> Result<&TrafficBlock, CliError> {
        self.traffic.as_ref().ok_or_else(|| missing("[traffic]"))
    }

    pub fn sweep(&self) -> Result<&SweepBlock, CliError> {
        self.sweep.as_ref().ok_or_else(|| missing("[sweep]"))
    }

    pub fn section<'a, T>(&self, block: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        block.as_ref().ok_or_else(|| missing(name))
    }
}

pub fn missing(key: &str) -> CliError {
    CliError::Config(format!("missing {key}"))
}

pub fn config_err(key: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {e}"))
}

pub fn positive_rate(slot: &SlotDuration, text: &str, key: &str) -> Result<f64, CliError> {
    let r = slot.parse_rate(text).map_err(|e| config_err(key, e))?;
    if !(r > 0.0) {
        return Err(CliError::Config(format!("{key}: rate must be positive, got {text:?}")));
    }
    Ok(r)
}

impl TrafficBlock {
    fn require<'a, T>(&self, field: &'a Option<T>, key: &str) -> Result<&'a T, CliError> {
        field
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("{} traffic needs `{key}`", self.kind.name())))
    }

    fn check_sources(&self) -> Result<f64, CliError> {
        if self.sources == 0 {
            return Err(CliError::Config("sources must be at least 1".into()));
        }
        Ok(self.sources as f64)
    }

    /// Aggregate of `sources` independent fBm flows: means add, variances add.
    pub fn fbm(&self, slot: &SlotDuration) -> Result<FbmTraffic, CliError> {
        if self.kind != TrafficKind::Fbm {
            return Err(CliError::Config(format!("expected fbm traffic, got {}", self.kind.name())));
        }
        let m = self.check_sources()?;
        let mean = positive_rate(slot, &self.mean, "mean")?;
        let sigma = positive_rate(slot, self.require(&self.sigma, "sigma")?, "sigma")?;
        let hurst = *self.require(&self.hurst, "hurst")?;
        let t = FbmTraffic::new(m * mean, m.sqrt() * sigma, hurst).map_err(|e| config_err("fbm", e))?;
        t.check_rigorous().map_err(|e| config_err("fbm", e))?;
        Ok(t)
    }

    pub fn ebb(&self, slot: &SlotDuration) -> Result<EbbOnOffAggregate, CliError> {
        if self.kind != TrafficKind::Ebb {
            return Err(CliError::Config(format!("expected ebb traffic, got {}", self.kind.name())));
        }
        self.check_sources()?;
        let mean = positive_rate(slot, &self.mean, "mean")?;
        let peak = positive_rate(slot, self.require(&self.peak, "peak")?, "peak")?;
        let t = *self.require(&self.burstiness, "burstiness")?;
        EbbOnOffAggregate::from_mean_and_burstiness(self.sources, mean, peak, t).map_err(|e| config_err("ebb", e))
    }

    pub fn cbr(&self, slot: &SlotDuration) -> Result<CbrTraffic, CliError> {
        let m = self.check_sources()?;
        let mean = positive_rate(slot, &self.mean, "mean")?;
        CbrTraffic::new(m * mean).map_err(|e| config_err("cbr", e))
    }

    pub fn as_cross(&self, slot: &SlotDuration) -> Result<CrossTraffic, CliError> {
        match self.kind {
            TrafficKind::Fbm => Ok(CrossTraffic::Fbm(self.fbm(slot)?)),
            TrafficKind::Ebb => Ok(CrossTraffic::Ebb(self.ebb(slot)?)),
            TrafficKind::Cbr => Err(CliError::Config("cross traffic must be fbm or ebb".into())),
        }
    }

    pub fn as_through(&self, slot: &SlotDuration) -> Result<ThroughTraffic, CliError> {
        match self.kind {
            TrafficKind::Fbm => Ok(ThroughTraffic::Fbm(self.fbm(slot)?)),
            TrafficKind::Ebb => Ok(ThroughTraffic::Ebb(self.ebb(slot)?)),
            TrafficKind::Cbr => Ok(ThroughTraffic::Cbr(self.cbr(slot)?)),
        }
    }

    pub fn with_hurst(&self, h: f64) -> Self {
        TrafficBlock {
            hurst: Some(h),
            ..self.clone()
        }
    }

    pub fn with_burstiness(&self, t: f64) -> Self {
        TrafficBlock {
            burstiness: Some(t),
            ..self.clone()
        }
    }
}

/// Physical dimension of a sweep variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    /// Plain number.
    Plain,
    /// Positive integer.
    Count,
    /// Bits; bare numbers are bits.
    Data,
    /// Slots; bare numbers are slots.
    Time,
    /// Bits per slot; a unit suffix is required.
    Rate,
}

impl SweepBlock {
    /// Sweep points converted to slot units.
    pub fn points(&self, dim: Dimension, slot: &SlotDuration) -> Result<Vec<f64>, CliError> {
        let convert = |q: &Quantity| -> Result<f64, CliError> {
            let key = "sweep";
            match (q, dim) {
                (Quantity::Number(x), Dimension::Rate) => Err(CliError::Config(format!(
                    "{key}: rate {x} needs a unit suffix such as \"Gb/s\" or \"bits/slot\""
                ))),
                (Quantity::Number(x), _) => Ok(*x),
                (Quantity::Text(s), Dimension::Rate) => slot.parse_rate(s).map_err(|e| config_err(key, e)),
                (Quantity::Text(s), Dimension::Data) => SlotDuration::parse_bits(s).map_err(|e| config_err(key, e)),
                (Quantity::Text(s), Dimension::Time) => slot.parse_duration(s).map_err(|e| config_err(key, e)),
                (Quantity::Text(s), _) => s.trim().parse().map_err(|e| config_err(key, format!("{s:?}: {e}"))),
            }
        };
        let pts: Vec<f64> = match (&self.values, &self.from, &self.to) {
            (Some(v), None, None) => v.iter().map(convert).collect::<Result<_, _>>()?,
            (None, Some(a), Some(b)) => {
                let (a, b) = (convert(a)?, convert(b)?);
                let n = self.points.ok_or_else(|| missing("sweep.points"))?;
                grid(a, b, n, self.scale)?
            }
            _ => {
                return Err(CliError::Config(
                    "sweep needs either `values` or `from`, `to` and `points`".into(),
                ))
            }
        };
        if pts.is_empty() {
            return Err(CliError::Config("sweep is empty".into()));
        }
        if pts.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Config("sweep contains non-finite values".into()));
        }
        if dim == Dimension::Count && pts.iter().any(|x| *x < 1.0 || x.fract() != 0.0) {
            return Err(CliError::Config(format!("sweep.{}: expected positive integers", self.variable)));
        }
        Ok(pts)
    }
}

fn grid(a: f64, b: f64, n: usize, scale: Scale) -> Result<Vec<f64>, CliError> {
    if n == 0 {
        return Err(CliError::Config("sweep.points must be at least 1".into()));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    let step = |i: usize| i as f64 / (n - 1) as f64;
    match scale {
        Scale::Linear => Ok((0..n).map(|i| a + (b - a) * step(i)).collect()),
        Scale::Log => {
            if !(a > 0.0 && b > 0.0) {
                return Err(CliError::Config("log-scale sweep needs positive bounds".into()));
            }
            let (la, lb) = (a.ln(), b.ln());
            Ok((0..n)
                .map(|i| match i {
                    0 => a,
                    _ if i == n - 1 => b,
                    _ => (la + (lb - la) * step(i)).exp(),
                })
                .collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let e = ScenarioConfig::parse("[server]\ncapacity = \"1 Gb/s\"\nspeed = 3\n").unwrap_err();
        assert!(matches!(e, CliError::Config(ref m) if m.contains("speed")), "{e:?}");
        assert!(ScenarioConfig::parse("colour = 1\n").is_err());
    }

    #[test]
    fn rates_need_units() {
        let cfg = ScenarioConfig::parse("[server]\ncapacity = \"10000\"\n").unwrap();
        assert!(cfg.capacity().is_err());
        let cfg = ScenarioConfig::parse("[server]\ncapacity = \"1 Gb/s\"\n").unwrap();
        assert_eq!(cfg.capacity().unwrap(), 10_000.0);
        let cfg = ScenarioConfig::parse("[server]\ncapacity = \"1 Gb/s\"\nslot = \"1 us\"\n").unwrap();
        assert_eq!(cfg.capacity().unwrap(), 1_000.0);
    }

    #[test]
    fn fbm_aggregate_adds_variances() {
        let cfg = ScenarioConfig::parse(
            "[traffic]\ntype = \"fbm\"\nsources = 4\nmean = \"250 Mb/s\"\nsigma = \"125 Mb/s\"\nhurst = 0.7\n",
        )
        .unwrap();
        let t = cfg.traffic().unwrap().fbm(&SlotDuration::default()).unwrap();
        assert_eq!(t.mean_rate(), 10_000.0);
        assert_eq!(t.sigma(), 2_500.0);
    }

    #[test]
    fn sweep_grids() {
        let s = SweepBlock {
            variable: "b".into(),
            values: None,
            from: Some(Quantity::Text("1 kb".into())),
            to: Some(Quantity::Number(1e6)),
            points: Some(4),
            scale: Scale::Log,
        };
        let p = s.points(Dimension::Data, &SlotDuration::default()).unwrap();
        assert_eq!((p[0], p[3]), (1e3, 1e6));
        assert!((p[1] / 1e4 - 1.0).abs() < 1e-12 && (p[2] / 1e5 - 1.0).abs() < 1e-12);
        let r = SweepBlock {
            variable: "capacity".into(),
            values: Some(vec![Quantity::Number(1.0)]),
            from: None,
            to: None,
            points: None,
            scale: Scale::Linear,
        };
        assert!(r.points(Dimension::Rate, &SlotDuration::default()).is_err());
    }
}
