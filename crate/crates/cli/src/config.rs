//! Run configuration: defaults, config-file parsing and flag merging.
//!
//! Precedence is defaults < config file < command-line flags. The config
//! file holds `key=value` lines with the same keys as the long flags;
//! blank lines and `#` comments are skipped.

use std::path::PathBuf;

use ipd_lab::payoff::PayoffValues;
use ipd_lab::strategy::StrategyKind;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid payoffs: expected T,R,P,S as four numbers, got {0:?}")]
    BadPayoffs(String),
    #[error("invalid mix entry {0:?}: expected KIND:FRACTION")]
    BadMixEntry(String),
    #[error("mix names {0} twice")]
    DuplicateMixKind(StrategyKind),
    #[error("{0}")]
    BadKind(String),
    #[error("invalid number {0:?}")]
    BadNumber(String),
    #[error("invalid boolean {0:?}: expected true/false or on/off")]
    BadBool(String),
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("workers must be at least 1")]
    ZeroWorkers,
}

/// Raw values from one source (config file or flags); `None` means unset.
#[derive(Clone, Debug, Default)]
pub struct ConfigLayer {
    pub width: Option<u32>,
    pub height: Option<u32>,
    pub rounds: Option<u32>,
    pub generations: Option<u64>,
    pub payoffs: Option<(f64, f64, f64, f64)>,
    pub mix: Option<Vec<(StrategyKind, f64)>>,
    pub p_slave: Option<f64>,
    pub seed: Option<u64>,
    pub snapshot_every: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub freeze_roles: Option<bool>,
    pub stop_on_fixation: Option<bool>,
}

impl ConfigLayer {
    /// Fields set in `over` win over fields set in `self`.
    pub fn overridden_by(self, over: ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            width: over.width.or(self.width),
            height: over.height.or(self.height),
            rounds: over.rounds.or(self.rounds),
            generations: over.generations.or(self.generations),
            payoffs: over.payoffs.or(self.payoffs),
            mix: over.mix.or(self.mix),
            p_slave: over.p_slave.or(self.p_slave),
            seed: over.seed.or(self.seed),
            snapshot_every: over.snapshot_every.or(self.snapshot_every),
            workers: over.workers.or(self.workers),
            out: over.out.or(self.out),
            freeze_roles: over.freeze_roles.or(self.freeze_roles),
            stop_on_fixation: over.stop_on_fixation.or(self.stop_on_fixation),
        }
    }

    /// Parses a config file body.
    pub fn from_config_text(text: &str) -> Result<ConfigLayer, ConfigError> {
        let mut layer = ConfigLayer::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
                line: line_no,
                message: format!("expected key=value, got {line:?}"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let located = |e: ConfigError| ConfigError::Parse {
                line: line_no,
                message: e.to_string(),
            };
            match key {
                "width" => layer.width = Some(parse_number(value).map_err(located)?),
                "height" => layer.height = Some(parse_number(value).map_err(located)?),
                "rounds" => layer.rounds = Some(parse_number(value).map_err(located)?),
                "generations" => layer.generations = Some(parse_number(value).map_err(located)?),
                "payoffs" => layer.payoffs = Some(parse_payoffs(value).map_err(located)?),
                "mix" => layer.mix = Some(parse_mix(value).map_err(located)?),
                "p_slave" => layer.p_slave = Some(parse_number(value).map_err(located)?),
                "seed" => layer.seed = Some(parse_number(value).map_err(located)?),
                "snapshot_every" => {
                    layer.snapshot_every = Some(parse_number(value).map_err(located)?)
                }
                "workers" => layer.workers = Some(parse_number(value).map_err(located)?),
                "out" => layer.out = Some(PathBuf::from(value)),
                "freeze_roles" => layer.freeze_roles = Some(parse_bool(value).map_err(located)?),
                "stop_on_fixation" => {
                    layer.stop_on_fixation = Some(parse_bool(value).map_err(located)?)
                }
                other => {
                    return Err(ConfigError::Parse {
                        line: line_no,
                        message: ConfigError::UnknownKey(other.to_string()).to_string(),
                    })
                }
            }
        }
        Ok(layer)
    }
}

fn parse_number<T: std::str::FromStr>(s: &str) -> Result<T, ConfigError> {
    s.parse().map_err(|_| ConfigError::BadNumber(s.to_string()))
}

fn parse_bool(s: &str) -> Result<bool, ConfigError> {
    match s {
        "true" | "on" => Ok(true),
        "false" | "off" => Ok(false),
        other => Err(ConfigError::BadBool(other.to_string())),
    }
}

/// Parses `T,R,P,S`.
pub fn parse_payoffs(s: &str) -> Result<(f64, f64, f64, f64), ConfigError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(ConfigError::BadPayoffs(s.to_string()));
    }
    let mut values = [0.0; 4];
    for (slot, part) in values.iter_mut().zip(&parts) {
        *slot = part
            .parse()
            .map_err(|_| ConfigError::BadPayoffs(s.to_string()))?;
    }
    Ok((values[0], values[1], values[2], values[3]))
}

/// Parses `KIND:f,KIND:f,...`, preserving entry order (the order fixes the
/// cumulative draw, so it is part of the reproducible configuration).
pub fn parse_mix(s: &str) -> Result<Vec<(StrategyKind, f64)>, ConfigError> {
    let mut mix = Vec::new();
    for entry in s.split(',') {
        let entry = entry.trim();
        let (kind, fraction) = entry
            .split_once(':')
            .ok_or_else(|| ConfigError::BadMixEntry(entry.to_string()))?;
        let kind: StrategyKind = kind
            .trim()
            .parse()
            .map_err(|e| ConfigError::BadKind(format!("{e}")))?;
        let fraction: f64 = fraction
            .trim()
            .parse()
            .map_err(|_| ConfigError::BadMixEntry(entry.to_string()))?;
        if mix.iter().any(|&(k, _)| k == kind) {
            return Err(ConfigError::DuplicateMixKind(kind));
        }
        mix.push((kind, fraction));
    }
    Ok(mix)
}

/// A fully resolved run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub width: u32,
    pub height: u32,
    pub rounds: u32,
    pub generations: u64,
    pub payoffs: PayoffValues,
    pub mix: Vec<(StrategyKind, f64)>,
    pub p_slave: f64,
    pub seed: u64,
    pub snapshot_every: u64,
    pub workers: usize,
    pub out: PathBuf,
    pub freeze_roles: bool,
    pub stop_on_fixation: bool,
}

impl RunConfig {
    /// Canonical defaults: 200x200 grid, 50 rounds, payoffs 5,3,1,0, slave
    /// probability 0.7, 200 generations, an even CSMSM/TFT mix, output to
    /// ./out.
    pub fn resolve(layer: ConfigLayer) -> Result<RunConfig, ConfigError> {
        let workers = layer.workers.unwrap_or(1);
        if workers == 0 {
            return Err(ConfigError::ZeroWorkers);
        }
        let (t, r, p, s) = layer.payoffs.unwrap_or((5.0, 3.0, 1.0, 0.0));
        let payoffs =
            PayoffValues::new(t, r, p, s).map_err(|e| ConfigError::BadPayoffs(e.to_string()))?;
        Ok(RunConfig {
            width: layer.width.unwrap_or(200),
            height: layer.height.unwrap_or(200),
            rounds: layer.rounds.unwrap_or(50),
            generations: layer.generations.unwrap_or(200),
            payoffs,
            mix: layer
                .mix
                .unwrap_or_else(|| vec![(StrategyKind::Csmsm, 0.5), (StrategyKind::Tft, 0.5)]),
            p_slave: layer.p_slave.unwrap_or(0.7),
            seed: layer.seed.unwrap_or(0),
            snapshot_every: layer.snapshot_every.unwrap_or(0),
            workers,
            out: layer.out.unwrap_or_else(|| PathBuf::from("out")),
            freeze_roles: layer.freeze_roles.unwrap_or(false),
            stop_on_fixation: layer.stop_on_fixation.unwrap_or(false),
        })
    }
}
