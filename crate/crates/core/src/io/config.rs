//! Flat, ordered `key = value` pipeline description.
//!
//! ```text
//! # comments start with '#'
//! timestamp = time          # optional, defaults to the first column
//! columns = price, volume   # optional, defaults to every other column
//! seed = 0                  # optional
//!
//! op = ewma
//! alpha = 0.5
//! adjust = false
//!
//! op = lag
//! periods = 1
//! ```
//!
//! Each `op = NAME` line starts a stage; the keys after it, up to the next
//! `op`, are that stage's parameters. Stages run top to bottom.

use crate::error::{Error, Result};
use crate::ops::{Buffer, Diff, EwSpec, EwmVar, Ewma, Lag, PctChange, RollingMean, WindowSpec};
use crate::transform::{chain, BoxedTransform};

#[derive(Debug, Clone, PartialEq)]
pub enum OpConfig {
    Lag { periods: usize },
    Diff { periods: usize },
    PctChange { periods: usize },
    Buffer { size: usize },
    RollingMean(WindowSpec),
    Ewma(EwSpec),
    EwmVar(EwSpec),
}

pub const OP_NAMES: &[&str] = &[
    "lag",
    "diff",
    "pct_change",
    "buffer",
    "rolling_mean",
    "ewma",
    "ewmvar",
];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineConfig {
    pub timestamp: Option<String>,
    pub columns: Option<Vec<String>>,
    pub seed: u64,
    pub ops: Vec<OpConfig>,
}

impl OpConfig {
    pub fn build(&self) -> Result<BoxedTransform> {
        Ok(match *self {
            OpConfig::Lag { periods } => Box::new(Lag::new(periods)?),
            OpConfig::Diff { periods } => Box::new(Diff::new(periods)?),
            OpConfig::PctChange { periods } => Box::new(PctChange::new(periods)?),
            OpConfig::Buffer { size } => Box::new(Buffer::new(size)?),
            OpConfig::RollingMean(spec) => Box::new(RollingMean::new(spec)),
            OpConfig::Ewma(spec) => Box::new(Ewma::new(spec)),
            OpConfig::EwmVar(spec) => Box::new(EwmVar::new(spec)),
        })
    }

    /// Builds an operator from its name and raw parameters; `line` is used
    /// in error messages.
    pub fn from_params(name: &str, params: &[(String, String)], line: u64) -> Result<Self> {
        let mut p = Params {
            items: params,
            line,
            used: vec![false; params.len()],
        };
        let op = match name {
            "lag" => OpConfig::Lag {
                periods: p.periods()?,
            },
            "diff" => OpConfig::Diff {
                periods: p.periods()?,
            },
            "pct_change" => OpConfig::PctChange {
                periods: p.periods()?,
            },
            "buffer" => OpConfig::Buffer {
                size: p.get("size")?.ok_or_else(|| p.missing("size"))?,
            },
            "rolling_mean" => {
                let window = p.get("window")?.ok_or_else(|| p.missing("window"))?;
                let spec = match p.get("min_periods")? {
                    Some(m) => WindowSpec::with_min_periods(window, m),
                    None => WindowSpec::new(window),
                };
                OpConfig::RollingMean(spec.map_err(|e| p.wrap(e))?)
            }
            "ewma" | "ewmvar" => {
                let alpha = p.get("alpha")?.ok_or_else(|| p.missing("alpha"))?;
                let adjust = p.get("adjust")?.unwrap_or(true);
                let ignore_na = p.get("ignore_na")?.unwrap_or(false);
                let spec = EwSpec::with_flags(alpha, adjust, ignore_na).map_err(|e| p.wrap(e))?;
                if name == "ewma" {
                    OpConfig::Ewma(spec)
                } else {
                    OpConfig::EwmVar(spec)
                }
            }
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!(
                        "unknown operator {other:?}; expected one of {}",
                        OP_NAMES.join(", ")
                    ),
                })
            }
        };
        if let Some(i) = p.used.iter().position(|u| !u) {
            return Err(Error::Parse {
                line,
                message: format!("operator {name:?} does not take {:?}", params[i].0),
            });
        }
        op.build().map_err(|e| p.wrap(e))?;
        Ok(op)
    }
}

struct Params<'a> {
    items: &'a [(String, String)],
    line: u64,
    used: Vec<bool>,
}

impl Params<'_> {
    fn get<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        let Some(i) = self.items.iter().position(|(k, _)| k == key) else {
            return Ok(None);
        };
        self.used[i] = true;
        let raw = &self.items[i].1;
        raw.parse().map(Some).map_err(|_| Error::Parse {
            line: self.line,
            message: format!("invalid value {raw:?} for {key}"),
        })
    }

    /// `periods`, or its alias `lag`; defaults to 1.
    fn periods(&mut self) -> Result<usize> {
        Ok(match self.get("periods")? {
            Some(k) => k,
            None => self.get("lag")?.unwrap_or(1),
        })
    }

    fn missing(&self, key: &str) -> Error {
        Error::Parse {
            line: self.line,
            message: format!("missing required parameter {key}"),
        }
    }

    fn wrap(&self, e: Error) -> Error {
        let message = match e {
            Error::Parameter(m) => m,
            other => other.to_string(),
        };
        Error::Parse {
            line: self.line,
            message,
        }
    }
}

/// `(name, line, params)` of a stage still being collected.
type PendingStage = (String, u64, Vec<(String, String)>);

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = PipelineConfig::default();
        let mut stage: Option<PendingStage> = None;
        let mut stages = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i as u64 + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::Parse {
                    line,
                    message: format!("expected key = value, got {content:?}"),
                })?;
            if key.is_empty() {
                return Err(Error::Parse {
                    line,
                    message: "empty key".into(),
                });
            }
            if key == "op" {
                stages.extend(stage.take());
                stage = Some((value.to_string(), line, Vec::new()));
                continue;
            }
            if let Some((_, _, params)) = stage.as_mut() {
                if params.iter().any(|(k, _)| k == key) {
                    return Err(Error::Parse {
                        line,
                        message: format!("duplicate parameter {key}"),
                    });
                }
                params.push((key.to_string(), value.to_string()));
                continue;
            }
            match key {
                "timestamp" => config.timestamp = Some(value.to_string()),
                "columns" => {
                    let cols: Vec<String> = value
                        .split(',')
                        .map(|c| c.trim().to_string())
                        .filter(|c| !c.is_empty())
                        .collect();
                    if cols.is_empty() {
                        return Err(Error::Parse {
                            line,
                            message: "columns list is empty".into(),
                        });
                    }
                    config.columns = Some(cols);
                }
                "seed" => {
                    config.seed = value.parse().map_err(|_| Error::Parse {
                        line,
                        message: format!("invalid seed {value:?}"),
                    })?
                }
                other => {
                    return Err(Error::Parse {
                        line,
                        message: format!("unknown setting {other:?}"),
                    })
                }
            }
        }
        stages.extend(stage);
        for (name, line, params) in stages {
            config.ops.push(OpConfig::from_params(&name, &params, line)?);
        }
        Ok(config)
    }

    /// The whole pipeline as one transform (identity when empty).
    pub fn build(&self) -> Result<BoxedTransform> {
        Ok(chain(
            self.ops.iter().map(OpConfig::build).collect::<Result<_>>()?,
        ))
    }
}
