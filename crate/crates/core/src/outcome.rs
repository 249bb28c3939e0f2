use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Reject,
    NotReject,
}

impl Decision {
    pub fn from_adjusted_p(p_adj: f64, alpha: f64) -> Self {
        if p_adj <= alpha {
            Decision::Reject
        } else {
            Decision::NotReject
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Reject => "reject",
            Decision::NotReject => "not_reject",
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of one ordered comparison on one problem.
///
/// The test is `H0: mean(opponent) - mean(candidate) <= 0`; rejecting it is a
/// win for `candidate`, which used fewer resources than `opponent`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseOutcome {
    pub candidate: String,
    pub opponent: String,
    pub problem: String,
    /// `mean(opponent) - mean(candidate)`
    pub t_obs: f64,
    pub p_raw: f64,
    pub p_adj: f64,
    pub decision: Decision,
    /// Supported discrepancy at the configured severity.
    pub delta_star: f64,
    pub points: u32,
    pub gd: i64,
}
