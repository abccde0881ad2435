//! Run configuration: a JSON document whose fields may each be omitted,
//! layered over built-in defaults and under command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::moment_ode::MomentInit;
use crate::sampler::InitSpec;
use crate::simulator::{Dynamics, RunOptions, Schedule};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    pub disable_exchange: bool,
    pub disable_kac: bool,
    pub record_snapshots: bool,
}

/// Fully resolved configuration of one command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub params: ModelParams,
    pub init: InitSpec,
    pub schedule: Schedule,
    pub replicas: usize,
    pub flags: Flags,
    pub output_path: PathBuf,
    /// Overrides the initial moments used by the `moments` command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_moments: Option<MomentInit>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.init.validate()?;
        self.schedule.validate()?;
        self.dynamics().validate()?;
        if self.replicas == 0 {
            return Err(Error::Config("replicas must be at least 1".into()));
        }
        Ok(())
    }

    pub fn dynamics(&self) -> Dynamics {
        Dynamics {
            exchange: !self.flags.disable_exchange,
            kac: !self.flags.disable_kac,
            renormalize: true,
        }
    }

    pub fn options(&self) -> RunOptions {
        RunOptions {
            dynamics: self.dynamics(),
            record_snapshots: self.flags.record_snapshots,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartialParams {
    pub n_passive: Option<usize>,
    pub n_active: Option<usize>,
    pub lambda: Option<f64>,
    pub seed: Option<u64>,
}

/// Either explicit `sample_times` or a uniform spacing `sample_dt`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartialSchedule {
    pub t_end: Option<f64>,
    pub sample_dt: Option<f64>,
    pub sample_times: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartialFlags {
    pub disable_exchange: Option<bool>,
    pub disable_kac: Option<bool>,
    pub record_snapshots: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartialConfig {
    pub params: PartialParams,
    pub init: Option<InitSpec>,
    pub schedule: PartialSchedule,
    pub replicas: Option<usize>,
    pub flags: PartialFlags,
    pub output_path: Option<PathBuf>,
    pub initial_moments: Option<MomentInit>,
}

fn pick<T>(base: Option<T>, over: Option<T>) -> Option<T> {
    over.or(base)
}

impl PartialConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("bad config JSON: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Layers `over` on top of `self`; every field set in `over` wins.
    pub fn merge(self, over: PartialConfig) -> Self {
        let schedule = if over.schedule.sample_times.is_some() || over.schedule.sample_dt.is_some() {
            PartialSchedule {
                t_end: pick(self.schedule.t_end, over.schedule.t_end),
                sample_dt: over.schedule.sample_dt,
                sample_times: over.schedule.sample_times,
            }
        } else {
            PartialSchedule {
                t_end: pick(self.schedule.t_end, over.schedule.t_end),
                ..self.schedule
            }
        };
        Self {
            params: PartialParams {
                n_passive: pick(self.params.n_passive, over.params.n_passive),
                n_active: pick(self.params.n_active, over.params.n_active),
                lambda: pick(self.params.lambda, over.params.lambda),
                seed: pick(self.params.seed, over.params.seed),
            },
            init: pick(self.init, over.init),
            schedule,
            replicas: pick(self.replicas, over.replicas),
            flags: PartialFlags {
                disable_exchange: pick(self.flags.disable_exchange, over.flags.disable_exchange),
                disable_kac: pick(self.flags.disable_kac, over.flags.disable_kac),
                record_snapshots: pick(self.flags.record_snapshots, over.flags.record_snapshots),
            },
            output_path: pick(self.output_path, over.output_path),
            initial_moments: pick(self.initial_moments, over.initial_moments),
        }
    }

    /// Produces a validated [`RunConfig`]; every field must be set.
    pub fn resolve(&self) -> Result<RunConfig> {
        fn need<T: Clone>(v: &Option<T>, name: &str) -> Result<T> {
            v.clone()
                .ok_or_else(|| Error::Config(format!("missing configuration field `{name}`")))
        }
        let params = ModelParams {
            n_passive: need(&self.params.n_passive, "params.n_passive")?,
            n_active: need(&self.params.n_active, "params.n_active")?,
            lambda: need(&self.params.lambda, "params.lambda")?,
            seed: need(&self.params.seed, "params.seed")?,
        };
        let t_end = need(&self.schedule.t_end, "schedule.t_end")?;
        let schedule = match (&self.schedule.sample_times, self.schedule.sample_dt) {
            (Some(times), _) => Schedule::new(t_end, times.clone())?,
            (None, Some(dt)) => Schedule::uniform(t_end, dt)?,
            (None, None) => {
                return Err(Error::Config(
                    "schedule needs `sample_times` or `sample_dt`".into(),
                ))
            }
        };
        let flags = Flags {
            disable_exchange: self.flags.disable_exchange.unwrap_or(false),
            disable_kac: self.flags.disable_kac.unwrap_or(false),
            record_snapshots: self.flags.record_snapshots.unwrap_or(false),
        };
        let config = RunConfig {
            params,
            init: need(&self.init, "init")?,
            schedule,
            replicas: need(&self.replicas, "replicas")?,
            flags,
            output_path: need(&self.output_path, "output_path")?,
            initial_moments: self.initial_moments,
        };
        config.validate()?;
        Ok(config)
    }
}

impl From<&RunConfig> for PartialConfig {
    fn from(c: &RunConfig) -> Self {
        Self {
            params: PartialParams {
                n_passive: Some(c.params.n_passive),
                n_active: Some(c.params.n_active),
                lambda: Some(c.params.lambda),
                seed: Some(c.params.seed),
            },
            init: Some(c.init),
            schedule: PartialSchedule {
                t_end: Some(c.schedule.t_end),
                sample_dt: None,
                sample_times: Some(c.schedule.sample_times.clone()),
            },
            replicas: Some(c.replicas),
            flags: PartialFlags {
                disable_exchange: Some(c.flags.disable_exchange),
                disable_kac: Some(c.flags.disable_kac),
                record_snapshots: Some(c.flags.record_snapshots),
            },
            output_path: Some(c.output_path.clone()),
            initial_moments: c.initial_moments,
        }
    }
}

/// Defaults of `simulate` and `moments`.
pub fn default_config() -> PartialConfig {
    PartialConfig {
        params: PartialParams {
            n_passive: Some(20),
            n_active: Some(5),
            lambda: Some(1.0),
            seed: Some(42),
        },
        init: Some(InitSpec::uniform()),
        schedule: PartialSchedule {
            t_end: Some(1.0),
            sample_dt: Some(0.1),
            sample_times: None,
        },
        replicas: Some(10),
        flags: PartialFlags::default(),
        output_path: Some(PathBuf::from("out")),
        initial_moments: None,
    }
}
