//! Serialization of ranking results.
//!
//! All output is a pure function of the bundle: no timestamps, no host
//! names, floats printed in their shortest round-trip form. Emitting the
//! same bundle twice produces identical bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::config::RankingConfig;
use crate::data::RunMatrix;
use crate::error::{Error, Result};
use crate::league::{
    build_table, classical_table, tally, ClassicalTable, LeagueRow, LeagueTable, Tournament,
};
use crate::outcome::{Decision, PairwiseOutcome};
use crate::severity::{default_delta_grid, severity_curve, supported_delta, SeverityCurve};

pub const TOOL_NAME: &str = "severity-league";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Format {
    Csv,
    Markdown,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            other => Err(Error::Config(format!(
                "unknown format '{other}' (expected csv or markdown)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerFunctionRow {
    pub algorithm: String,
    pub problem: String,
    pub points: i64,
    pub gd: i64,
}

/// Box-plot summary of the points an algorithm won on each problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointsSummary {
    pub algorithm: String,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub alpha: f64,
    pub severity: f64,
    pub delta_p: f64,
    pub resamples: usize,
    pub seed: u64,
    pub bh_scope: String,
    pub budget: Option<f64>,
    pub cap_to_budget: bool,
    pub input_digest: String,
    pub algorithms: usize,
    pub problems: usize,
    pub comparisons: usize,
    pub notes: Vec<String>,
}

impl Metadata {
    pub fn new(config: &RankingConfig, matrix: &RunMatrix, comparisons: usize) -> Self {
        Metadata {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            alpha: config.alpha,
            severity: config.severity,
            delta_p: config.delta_p,
            resamples: config.resamples,
            seed: config.seed,
            bh_scope: config.bh_scope.to_string(),
            budget: config.budget,
            cap_to_budget: config.cap_to_budget,
            input_digest: matrix.digest(),
            algorithms: matrix.algorithms().len(),
            problems: matrix.problems().len(),
            comparisons,
            notes: Vec::new(),
        }
    }
}

/// A severity curve for one named comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedCurve {
    pub candidate: String,
    pub opponent: String,
    pub problem: String,
    pub t_obs: f64,
    pub delta_star: f64,
    pub severity_level: f64,
    pub curve: SeverityCurve,
}

impl NamedCurve {
    pub fn file_name(&self) -> String {
        format!(
            "{}__vs__{}__on__{}.csv",
            sanitize(&self.candidate),
            sanitize(&self.opponent),
            sanitize(&self.problem)
        )
    }

    pub fn header_comments(&self) -> Vec<String> {
        vec![
            format!(
                "candidate={} opponent={} problem={}",
                self.candidate, self.opponent, self.problem
            ),
            format!(
                "decision={} t_obs={} S={} delta_star={}",
                self.curve.decision, self.t_obs, self.severity_level, self.delta_star
            ),
        ]
    }
}

impl NamedCurve {
    /// Curve of one tested comparison over the default grid, at the
    /// tournament's severity level.
    pub fn from_tournament(
        tournament: &Tournament,
        candidate: &str,
        opponent: &str,
        problem: &str,
        grid_points: usize,
    ) -> Result<Self> {
        if grid_points == 0 {
            return Err(Error::InvalidArgument("grid needs at least one point".into()));
        }
        let c = tournament.find(candidate, opponent, problem).ok_or_else(|| {
            Error::UnknownComparison(format!("{candidate} vs {opponent} on {problem}"))
        })?;
        let s = tournament.config().severity;
        let grid = default_delta_grid(&c.null, c.t_obs, grid_points);
        Ok(NamedCurve {
            candidate: c.candidate.clone(),
            opponent: c.opponent.clone(),
            problem: c.problem.clone(),
            t_obs: c.t_obs,
            delta_star: supported_delta(&c.null, c.t_obs, s, c.decision)?,
            severity_level: s,
            curve: severity_curve(&c.null, c.t_obs, c.decision, &grid)?,
        })
    }
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub league: LeagueTable,
    pub classical: ClassicalTable,
    pub per_function: Vec<PerFunctionRow>,
    pub distribution: Vec<PointsSummary>,
    pub metadata: Metadata,
    pub curves: Vec<NamedCurve>,
    pub outcomes: Vec<PairwiseOutcome>,
}

/// Linear-interpolation quantile of sorted data (R type 7).
fn interpolated_quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl ReportBundle {
    pub fn new(
        matrix: &RunMatrix,
        config: &RankingConfig,
        outcomes: Vec<PairwiseOutcome>,
    ) -> Result<Self> {
        let league = build_table(&outcomes, config)?;
        let classical = classical_table(&outcomes)?;
        let t = tally(&outcomes)?;

        let mut per_function = Vec::new();
        let mut distribution = Vec::new();
        for (algorithm, per_problem) in &t.cells {
            for (problem, &(points, gd, _)) in per_problem {
                per_function.push(PerFunctionRow {
                    algorithm: algorithm.clone(),
                    problem: problem.clone(),
                    points,
                    gd,
                });
            }
            let mut pts: Vec<f64> = per_problem.values().map(|c| c.0 as f64).collect();
            pts.sort_by(f64::total_cmp);
            let row = league.row(algorithm).expect("same tally");
            distribution.push(PointsSummary {
                algorithm: algorithm.clone(),
                min: pts[0],
                q1: interpolated_quantile(&pts, 0.25),
                median: interpolated_quantile(&pts, 0.5),
                q3: interpolated_quantile(&pts, 0.75),
                max: pts[pts.len() - 1],
                mean: row.points_mean,
                sd: row.points_sd,
            });
        }

        Ok(ReportBundle {
            metadata: Metadata::new(config, matrix, outcomes.len()),
            league,
            classical,
            per_function,
            distribution,
            curves: Vec::new(),
            outcomes,
        })
    }

    /// `rank_proposed - rank_classical` for an algorithm.
    pub fn rank_change(&self, algorithm: &str) -> i64 {
        let proposed = self.league.rank_of(algorithm).unwrap_or(0) as i64;
        let classical = self.classical.rank_of(algorithm).unwrap_or(0) as i64;
        proposed - classical
    }

    pub fn league_csv(&self) -> String {
        league_csv(&self.league)
    }

    pub fn league_markdown(&self) -> String {
        let mut s = format!("# League table\n\n{}\n\n", self.league.config.describe());
        s.push_str("| Rank | Algorithm | Points | Goal Difference | Mean points | SD points |\n");
        s.push_str("|---:|---|---:|---:|---:|---:|\n");
        for r in &self.league.rows {
            s.push_str(&format!(
                "| {} | {} | {} | {} | {} | {} |\n",
                r.rank, r.algorithm, r.points, r.gd, r.points_mean, r.points_sd
            ));
        }
        s
    }

    /// Classical points next to the proposed ranking, in proposed order.
    pub fn classical_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "algorithm",
            "points",
            "gd",
            "rank",
            "classical_points",
            "classical_rank",
            "rank_change",
        ])
        .expect("in-memory write");
        for r in &self.league.rows {
            let c = self
                .classical
                .rows
                .iter()
                .find(|c| c.algorithm == r.algorithm)
                .expect("same algorithms");
            w.write_record([
                r.algorithm.clone(),
                r.points.to_string(),
                r.gd.to_string(),
                r.rank.to_string(),
                c.points.to_string(),
                c.rank.to_string(),
                self.rank_change(&r.algorithm).to_string(),
            ])
            .expect("in-memory write");
        }
        finish(w)
    }

    pub fn classical_markdown(&self) -> String {
        let mut s = format!(
            "# Proposed ranking vs classical bootstrap test\n\n{}\n\n\
             Classical scoring: one point per rejected null hypothesis. \
             Change: rank movement in the classical ranking relative to the proposed one.\n\n",
            self.league.config.describe()
        );
        s.push_str("| Algorithm | Points | Goal Difference | Classical points | Change |\n");
        s.push_str("|---|---:|---:|---:|:---:|\n");
        for r in &self.league.rows {
            let c = self
                .classical
                .rows
                .iter()
                .find(|c| c.algorithm == r.algorithm)
                .expect("same algorithms");
            // classical rank better (smaller) than proposed: moved up
            let change = match self.rank_change(&r.algorithm) {
                0 => "-".to_string(),
                d if d > 0 => format!("↑ {d}"),
                d => format!("↓ {}", -d),
            };
            s.push_str(&format!(
                "| {} | {} | {} | {} | {} |\n",
                r.algorithm, r.points, r.gd, c.points, change
            ));
        }
        s
    }

    pub fn per_function_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["algorithm", "problem", "points", "gd"]).expect("in-memory write");
        for r in &self.per_function {
            w.write_record([
                r.algorithm.clone(),
                r.problem.clone(),
                r.points.to_string(),
                r.gd.to_string(),
            ])
            .expect("in-memory write");
        }
        finish(w)
    }

    pub fn distribution_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["algorithm", "min", "q1", "median", "q3", "max", "mean", "sd"])
            .expect("in-memory write");
        for d in &self.distribution {
            w.write_record([
                d.algorithm.clone(),
                d.min.to_string(),
                d.q1.to_string(),
                d.median.to_string(),
                d.q3.to_string(),
                d.max.to_string(),
                d.mean.to_string(),
                d.sd.to_string(),
            ])
            .expect("in-memory write");
        }
        finish(w)
    }

    /// Every ordered comparison with its test result and score.
    pub fn outcomes_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "problem",
            "candidate",
            "opponent",
            "t_obs",
            "p_raw",
            "p_adj",
            "decision",
            "delta_star",
            "points",
            "gd",
        ])
        .expect("in-memory write");
        for o in &self.outcomes {
            w.write_record([
                o.problem.clone(),
                o.candidate.clone(),
                o.opponent.clone(),
                o.t_obs.to_string(),
                o.p_raw.to_string(),
                o.p_adj.to_string(),
                o.decision.to_string(),
                o.delta_star.to_string(),
                o.points.to_string(),
                o.gd.to_string(),
            ])
            .expect("in-memory write");
        }
        finish(w)
    }

    pub fn metadata_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.metadata).expect("plain data");
        s.push('\n');
        s
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

pub fn league_csv(table: &LeagueTable) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["rank", "algorithm", "points", "gd", "points_mean", "points_sd"])
        .expect("in-memory write");
    for r in &table.rows {
        w.write_record(league_fields(r)).expect("in-memory write");
    }
    finish(w)
}

/// The league.csv fields of one row, as printed.
pub fn league_fields(r: &LeagueRow) -> [String; 6] {
    [
        r.rank.to_string(),
        r.algorithm.clone(),
        r.points.to_string(),
        r.gd.to_string(),
        r.points_mean.to_string(),
        r.points_sd.to_string(),
    ]
}

/// Parses a league.csv back into rows.
pub fn parse_league_csv(text: &str) -> Result<Vec<LeagueRow>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| rec.get(i).unwrap_or("");
        let bad = |what: &str| Error::Parse {
            line,
            message: format!("bad {what}"),
        };
        rows.push(LeagueRow {
            rank: field(0).parse().map_err(|_| bad("rank"))?,
            algorithm: field(1).to_owned(),
            points: field(2).parse().map_err(|_| bad("points"))?,
            gd: field(3).parse().map_err(|_| bad("gd"))?,
            points_mean: field(4).parse().map_err(|_| bad("points_mean"))?,
            points_sd: field(5).parse().map_err(|_| bad("points_sd"))?,
        });
    }
    Ok(rows)
}

/// Writes the bundle into `out_dir` and returns the written paths in
/// writing order.
///
/// `metadata.json` is always written; tables follow `formats`. The
/// per-function, distribution and outcome files are CSV only, and severity
/// curves go to `severity_curves/` when the bundle has any.
pub fn emit(bundle: &ReportBundle, out_dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    if formats.is_empty() {
        return Err(Error::Config("no output format selected".into()));
    }
    let formats: BTreeSet<Format> = formats.iter().copied().collect();
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, body: String| -> Result<()> {
        let path = out_dir.join(name);
        std::fs::write(&path, body)?;
        written.push(path);
        Ok(())
    };

    if formats.contains(&Format::Csv) {
        put("league.csv", bundle.league_csv())?;
        put("classical.csv", bundle.classical_csv())?;
        put("per_function.csv", bundle.per_function_csv())?;
        put("points_distribution.csv", bundle.distribution_csv())?;
        put("outcomes.csv", bundle.outcomes_csv())?;
    }
    if formats.contains(&Format::Markdown) {
        put("league.md", bundle.league_markdown())?;
        put("classical.md", bundle.classical_markdown())?;
    }
    put("metadata.json", bundle.metadata_json())?;

    if !bundle.curves.is_empty() {
        let dir = out_dir.join("severity_curves");
        std::fs::create_dir_all(&dir)?;
        for c in &bundle.curves {
            let path = dir.join(c.file_name());
            c.curve.write_csv(&path, &c.header_comments())?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Per-algorithm sums of the per-function rows, for cross-checking against
/// the league totals.
pub fn per_function_totals(rows: &[PerFunctionRow]) -> BTreeMap<String, (i64, i64)> {
    let mut out: BTreeMap<String, (i64, i64)> = BTreeMap::new();
    for r in rows {
        let e = out.entry(r.algorithm.clone()).or_default();
        e.0 += r.points;
        e.1 += r.gd;
    }
    out
}

/// Whether every classical point coincides with a scoring outcome of the
/// proposed scheme (points >= 1).
pub fn classical_consistent(outcomes: &[PairwiseOutcome]) -> bool {
    outcomes
        .iter()
        .all(|o| (o.decision == Decision::Reject) == (o.points >= 1))
}
