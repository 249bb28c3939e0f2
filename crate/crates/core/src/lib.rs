//! Ranking stochastic optimizers as a football league.
//!
//! Each ordered pair of algorithms plays one match per problem. A match is a
//! one-sided pooled-bootstrap test on the difference of mean performance
//! (lower is better, e.g. evaluations to reach a target). The winner is
//! judged by the post-decision *severity* of the claim, which yields a
//! supported discrepancy δ*; comparing δ* with a practical-relevance
//! threshold δ_p gives points (3 / 1 / 0) and a goal difference ⌊δ*/δ_p⌋.
//!
//! ```
//! use severity_league::{build_table, run_tournament, RankingConfig, RunMatrix};
//!
//! let mut runs = RunMatrix::new(None);
//! runs.insert_cell("fast", "sphere", vec![120.0, 130.0, 110.0, 125.0, 118.0])?;
//! runs.insert_cell("slow", "sphere", vec![900.0, 940.0, 870.0, 910.0, 925.0])?;
//!
//! let config = RankingConfig { delta_p: 100.0, resamples: 2000, ..Default::default() };
//! let outcomes = run_tournament(&runs, &config)?;
//! let table = build_table(&outcomes, &config)?;
//! assert_eq!(table.rows[0].algorithm, "fast");
//! assert_eq!(table.rows[0].points, 3);
//! # Ok::<(), severity_league::Error>(())
//! ```
//!
//! The guide in `book/` walks through each step; its code blocks are
//! compiled and run as doctests of this crate.

pub mod benchgen;
pub mod config;
pub mod data;
pub mod error;
pub mod league;
pub mod multiplicity;
pub mod outcome;
pub mod report;
pub mod resampling;
pub mod seed;
pub mod sensitivity;
pub mod severity;

pub use config::{BhScope, RankingConfig};
pub use data::{load_runs, parse_runs, validate, Diagnostic, RunMatrix};
pub use error::{Error, ErrorKind, Result};
pub use league::{
    build_table, classical_table, run_tournament, score_comparison, ClassicalTable, LeagueTable,
    Tournament,
};
pub use multiplicity::{bh_adjust, PValueFamily};
pub use outcome::{Decision, PairwiseOutcome};
pub use resampling::{observed_stat, pooled_null, BootstrapNull, ComparisonSeed};
pub use sensitivity::{sweep, SensitivityGrid};
pub use severity::{
    normal_theory_severity, severity_curve, severity_nonreject, severity_reject, supported_delta,
    SeverityCurve,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/bootstrap.md")]
    mod bootstrap {}
    #[doc = include_str!("../../../book/src/severity.md")]
    mod severity {}
    #[doc = include_str!("../../../book/src/multiplicity.md")]
    mod multiplicity {}
    #[doc = include_str!("../../../book/src/league.md")]
    mod league {}
    #[doc = include_str!("../../../book/src/sensitivity.md")]
    mod sensitivity {}
    #[doc = include_str!("../../../book/src/benchgen.md")]
    mod benchgen {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
