use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Which p-values are adjusted together by the Benjamini–Hochberg step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BhScope {
    /// One family holding every ordered comparison on every problem.
    #[default]
    Global,
    /// One family per problem.
    PerProblem,
}

impl fmt::Display for BhScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BhScope::Global => "global",
            BhScope::PerProblem => "per-problem",
        })
    }
}

impl FromStr for BhScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(BhScope::Global),
            "per-problem" => Ok(BhScope::PerProblem),
            other => Err(Error::Config(format!(
                "unknown BH scope '{other}' (expected 'global' or 'per-problem')"
            ))),
        }
    }
}

/// Parameters of one ranking run.
///
/// The defaults are the case-study settings: α = 0.05, S = 0.8,
/// δ_p = 500 evaluations and 10 000 bootstrap resamples. `delta_p` is
/// metric dependent, so front ends should always ask for it explicitly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingConfig {
    pub alpha: f64,
    pub severity: f64,
    pub delta_p: f64,
    pub resamples: usize,
    pub seed: u64,
    pub bh_scope: BhScope,
    /// Upper cap applied to run values (e.g. the evaluation budget).
    pub budget: Option<f64>,
    /// Replace values above `budget`, and empty values, by `budget`.
    pub cap_to_budget: bool,
}

impl Default for RankingConfig {
    fn default() -> Self {
        RankingConfig {
            alpha: 0.05,
            severity: 0.8,
            delta_p: 500.0,
            resamples: 10_000,
            seed: 0,
            bh_scope: BhScope::Global,
            budget: None,
            cap_to_budget: true,
        }
    }
}

/// Smallest number of resamples accepted by [`RankingConfig::validate`].
pub const MIN_RESAMPLES: usize = 100;

impl RankingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 0.5) {
            return Err(Error::Config(format!(
                "alpha must be in (0, 0.5], got {}",
                self.alpha
            )));
        }
        check_severity(self.severity).map_err(|_| {
            Error::Config(format!(
                "severity must be in [0.5, 1), got {}",
                self.severity
            ))
        })?;
        check_delta_p(self.delta_p)
            .map_err(|_| Error::Config(format!("delta-p must be > 0, got {}", self.delta_p)))?;
        if self.resamples < MIN_RESAMPLES {
            return Err(Error::Config(format!(
                "resamples must be >= {MIN_RESAMPLES}, got {}",
                self.resamples
            )));
        }
        if let Some(b) = self.budget {
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::Config(format!("budget must be > 0, got {b}")));
            }
        }
        Ok(())
    }

    /// One-line summary of the statistical settings, used in report headers.
    pub fn describe(&self) -> String {
        format!(
            "alpha = {}, S = {}, delta_p = {}, n_b = {}, seed = {}, BH scope = {}",
            self.alpha, self.severity, self.delta_p, self.resamples, self.seed, self.bh_scope
        )
    }
}

pub(crate) fn check_severity(s: f64) -> Result<()> {
    if (0.5..1.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "severity threshold must be in [0.5, 1), got {s}"
        )))
    }
}

pub(crate) fn check_delta_p(delta_p: f64) -> Result<()> {
    if delta_p.is_finite() && delta_p > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "practical relevance delta_p must be > 0, got {delta_p}"
        )))
    }
}
