//! Fan-in schedules: an ordered list of `(S, solver)` phases, each entered
//! when its trigger fires.
//!
//! Text form, comma separated: `S:solver[@trigger]`, where `solver` is
//! `dmp`, `rs`, `rs<Q>` or `brute` and `trigger` is `gain<dB[/window]` or
//! `resid<ratio`. The first phase has no trigger. Example:
//! `2:dmp,3:rs16@gain<0.05`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Step;
use crate::error::{LccError, Result};
use crate::wiring::{Solver, DEFAULT_BEAM_WIDTH};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Trigger {
    Start,
    /// SQNR gain per added vertex over the last `window` vertices (default
    /// `2 * N`) dropped below `db_per_vertex`.
    MarginalGainBelow {
        db_per_vertex: f64,
        window: Option<usize>,
    },
    /// Every row's squared error relative to its squared norm is below `ratio`.
    ResidualBelow { ratio: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Phase {
    pub trigger: Trigger,
    pub s: usize,
    pub solver: Solver,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Schedule(Vec<Phase>);

impl Default for Schedule {
    fn default() -> Self {
        Schedule(vec![
            Phase {
                trigger: Trigger::Start,
                s: 2,
                solver: Solver::Dmp,
            },
            Phase {
                trigger: Trigger::MarginalGainBelow {
                    db_per_vertex: 0.05,
                    window: None,
                },
                s: 3,
                solver: Solver::rs_default(),
            },
        ])
    }
}

impl Schedule {
    pub fn new(phases: Vec<Phase>) -> Result<Self> {
        let s = Schedule(phases);
        s.validate()?;
        Ok(s)
    }

    /// One phase for the whole run.
    pub fn fixed(s: usize, solver: Solver) -> Self {
        Schedule(vec![Phase {
            trigger: Trigger::Start,
            s,
            solver,
        }])
    }

    pub fn phases(&self) -> &[Phase] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.0.first() else {
            return Err(LccError::Config("schedule needs at least one phase".into()));
        };
        if first.trigger != Trigger::Start {
            return Err(LccError::Config("the first phase cannot have a trigger".into()));
        }
        for (i, p) in self.0.iter().enumerate() {
            if p.s == 0 {
                return Err(LccError::Config(format!("phase {}: S must be at least 1", i + 1)));
            }
            if let Solver::Rs { q: 0 } = p.solver {
                return Err(LccError::Config(format!("phase {}: Q must be at least 1", i + 1)));
            }
            match p.trigger {
                Trigger::Start if i > 0 => {
                    return Err(LccError::Config(format!("phase {} needs a trigger", i + 1)));
                }
                Trigger::MarginalGainBelow { db_per_vertex, window } => {
                    if !db_per_vertex.is_finite() || window == Some(0) {
                        return Err(LccError::Config(format!("phase {}: bad gain trigger", i + 1)));
                    }
                }
                Trigger::ResidualBelow { ratio } if !(ratio.is_finite() && ratio >= 0.0) => {
                    return Err(LccError::Config(format!("phase {}: bad residual trigger", i + 1)));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

impl Trigger {
    /// `log` holds the steps taken since the current phase began, oldest first.
    pub(crate) fn fires(&self, log: &[Step], rows: usize, max_relative_residual: f64) -> bool {
        match *self {
            Trigger::Start => false,
            Trigger::ResidualBelow { ratio } => max_relative_residual < ratio,
            Trigger::MarginalGainBelow { db_per_vertex, window } => {
                let window = window.unwrap_or(2 * rows).max(1);
                let Some(now) = log.last() else {
                    return false;
                };
                let Some(then) = log.iter().rev().find(|s| s.len + window <= now.len) else {
                    return false;
                };
                let gain = (now.sqnr_db - then.sqnr_db) / (now.len - then.len) as f64;
                gain < db_per_vertex
            }
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.s)?;
        match self.solver {
            Solver::Dmp => f.write_str("dmp")?,
            Solver::Rs { q } => write!(f, "rs{q}")?,
            Solver::Brute => f.write_str("brute")?,
        }
        match self.trigger {
            Trigger::Start => Ok(()),
            Trigger::MarginalGainBelow {
                db_per_vertex,
                window: None,
            } => write!(f, "@gain<{db_per_vertex}"),
            Trigger::MarginalGainBelow {
                db_per_vertex,
                window: Some(w),
            } => write!(f, "@gain<{db_per_vertex}/{w}"),
            Trigger::ResidualBelow { ratio } => write!(f, "@resid<{ratio}"),
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

fn parse_solver(s: &str) -> Result<Solver> {
    let s = s.trim().to_ascii_lowercase();
    match s.as_str() {
        "dmp" => Ok(Solver::Dmp),
        "brute" => Ok(Solver::Brute),
        "rs" => Ok(Solver::Rs {
            q: DEFAULT_BEAM_WIDTH,
        }),
        _ => match s.strip_prefix("rs").map(str::parse::<usize>) {
            Some(Ok(q)) => Ok(Solver::Rs { q }),
            _ => Err(LccError::Config(format!("unknown solver '{s}'"))),
        },
    }
}

fn parse_number(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| LccError::Config(format!("bad {what} '{s}'")))
}

fn parse_trigger(s: &str) -> Result<Trigger> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("gain<") {
        let (value, window) = match rest.split_once('/') {
            Some((v, w)) => (
                v,
                Some(
                    w.trim()
                        .parse::<usize>()
                        .map_err(|_| LccError::Config(format!("bad window '{w}'")))?,
                ),
            ),
            None => (rest, None),
        };
        Ok(Trigger::MarginalGainBelow {
            db_per_vertex: parse_number(value, "gain")?,
            window,
        })
    } else if let Some(rest) = s.strip_prefix("resid<") {
        Ok(Trigger::ResidualBelow {
            ratio: parse_number(rest, "residual ratio")?,
        })
    } else {
        Err(LccError::Config(format!("unknown trigger '{s}'")))
    }
}

impl FromStr for Schedule {
    type Err = LccError;

    fn from_str(text: &str) -> Result<Self> {
        let mut phases = Vec::new();
        for part in text.split(',') {
            let part = part.trim();
            let (body, trigger) = match part.split_once('@') {
                Some((b, t)) => (b, parse_trigger(t)?),
                None => (part, Trigger::Start),
            };
            let (s, solver) = body
                .split_once(':')
                .ok_or_else(|| LccError::Config(format!("phase '{part}' is not S:solver")))?;
            let s = s
                .trim()
                .parse::<usize>()
                .map_err(|_| LccError::Config(format!("bad fan-in '{s}'")))?;
            phases.push(Phase {
                trigger,
                s,
                solver: parse_solver(solver)?,
            });
        }
        Schedule::new(phases)
    }
}

impl Serialize for Schedule {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Schedule {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
