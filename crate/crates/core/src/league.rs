//! The league: every ordered pair of algorithms meets on every problem.
//!
//! A tournament runs in two passes. The first builds one pooled-bootstrap
//! null per unordered pair and problem and computes the raw p-values of both
//! directions from it. The raw p-values are then BH-adjusted as one family
//! (or one per problem) and turned into decisions. Only then are δ*, points
//! and goal difference derived, which is why the decisions can be reused
//! for any severity level or practical-relevance threshold.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{check_delta_p, check_severity, BhScope, RankingConfig};
use crate::data::RunMatrix;
use crate::error::{Error, Result};
use crate::multiplicity::bh_adjust;
use crate::outcome::{Decision, PairwiseOutcome};
use crate::resampling::{observed_stat, pooled_null, BootstrapNull, ComparisonSeed};
use crate::severity::supported_delta;

/// Points and goal difference for one ordered comparison.
///
/// | decision   | δ*          | points | GD                  |
/// |------------|-------------|--------|---------------------|
/// | reject     | δ* > δ_p    | 3      | ⌊δ*/δ_p⌋ (≥ 1)      |
/// | reject     | δ* ≤ δ_p    | 1      | 0                   |
/// | not reject | any         | 0      | min(⌊δ*/δ_p⌋, 0)    |
pub fn score_comparison(decision: Decision, delta_star: f64, delta_p: f64) -> Result<(u32, i64)> {
    check_delta_p(delta_p)?;
    let goals = (delta_star / delta_p).floor() as i64;
    Ok(match decision {
        Decision::Reject if delta_star > delta_p => (3, goals),
        Decision::Reject => (1, 0),
        Decision::NotReject => (0, goals.min(0)),
    })
}

/// One ordered comparison after the hypothesis test, before scoring.
#[derive(Debug, Clone)]
pub struct TestedComparison {
    pub candidate: String,
    pub opponent: String,
    pub problem: String,
    pub t_obs: f64,
    pub p_raw: f64,
    pub p_adj: f64,
    pub decision: Decision,
    /// Null of `mean(opponent) - mean(candidate)`.
    pub null: BootstrapNull,
}

impl TestedComparison {
    pub fn score(&self, severity: f64, delta_p: f64) -> Result<PairwiseOutcome> {
        let delta_star = supported_delta(&self.null, self.t_obs, severity, self.decision)?;
        let (points, gd) = score_comparison(self.decision, delta_star, delta_p)?;
        Ok(PairwiseOutcome {
            candidate: self.candidate.clone(),
            opponent: self.opponent.clone(),
            problem: self.problem.clone(),
            t_obs: self.t_obs,
            p_raw: self.p_raw,
            p_adj: self.p_adj,
            decision: self.decision,
            delta_star,
            points,
            gd,
        })
    }
}

/// Tested comparisons of a whole tournament, ordered by problem, candidate
/// and opponent.
#[derive(Debug, Clone)]
pub struct Tournament {
    config: RankingConfig,
    comparisons: Vec<TestedComparison>,
}

impl Tournament {
    /// Runs both hypothesis-testing passes over a complete design.
    pub fn evaluate(matrix: &RunMatrix, config: &RankingConfig) -> Result<Self> {
        config.validate()?;
        matrix.check_complete()?;
        let algorithms = matrix.algorithms();
        let problems = matrix.problems();
        if algorithms.len() < 2 {
            return Err(Error::InconsistentDesign(
                "a tournament needs at least two algorithms".into(),
            ));
        }

        let mut jobs = Vec::new();
        for problem in &problems {
            for (i, a) in algorithms.iter().enumerate() {
                for b in &algorithms[i + 1..] {
                    jobs.push((problem, a, b));
                }
            }
        }

        // pass 1: one null per unordered pair, both directions read from it
        let tested: Vec<[TestedComparison; 2]> = jobs
            .par_iter()
            .map(|&(problem, a, b)| -> Result<[TestedComparison; 2]> {
                let ya = matrix.cell(a, problem).expect("complete design");
                let yb = matrix.cell(b, problem).expect("complete design");
                let seed = ComparisonSeed::new(config.seed, problem, a, b);
                // null of mean(a) - mean(b): opponent a, candidate b
                let null = pooled_null(ya, yb, config.resamples, &seed)?;
                let t_ab = observed_stat(ya, yb)?;
                let t_ba = observed_stat(yb, ya)?;
                let reversed = null.negated();
                Ok([
                    TestedComparison {
                        candidate: b.clone(),
                        opponent: a.clone(),
                        problem: problem.clone(),
                        t_obs: t_ab,
                        p_raw: null.p_value(t_ab),
                        p_adj: f64::NAN,
                        decision: Decision::NotReject,
                        null,
                    },
                    TestedComparison {
                        candidate: a.clone(),
                        opponent: b.clone(),
                        problem: problem.clone(),
                        t_obs: t_ba,
                        p_raw: reversed.p_value(t_ba),
                        p_adj: f64::NAN,
                        decision: Decision::NotReject,
                        null: reversed,
                    },
                ])
            })
            .collect::<Result<_>>()?;

        let mut comparisons: Vec<TestedComparison> = tested.into_iter().flatten().collect();
        comparisons.sort_by(|x, y| {
            (&x.problem, &x.candidate, &x.opponent).cmp(&(&y.problem, &y.candidate, &y.opponent))
        });

        // pass 2: multiplicity adjustment, then decisions
        let families: BTreeMap<Option<&str>, Vec<usize>> = {
            let mut f: BTreeMap<Option<&str>, Vec<usize>> = BTreeMap::new();
            for (i, c) in comparisons.iter().enumerate() {
                let key = match config.bh_scope {
                    BhScope::Global => None,
                    BhScope::PerProblem => Some(c.problem.as_str()),
                };
                f.entry(key).or_default().push(i);
            }
            f
        };
        let mut adjusted = vec![f64::NAN; comparisons.len()];
        for members in families.values() {
            let entries: Vec<(usize, f64)> =
                members.iter().map(|&i| (i, comparisons[i].p_raw)).collect();
            for (i, p) in bh_adjust(&entries)? {
                adjusted[i] = p;
            }
        }
        for (c, p_adj) in comparisons.iter_mut().zip(adjusted) {
            c.p_adj = p_adj;
            c.decision = Decision::from_adjusted_p(p_adj, config.alpha);
        }

        Ok(Tournament {
            config: config.clone(),
            comparisons,
        })
    }

    pub fn config(&self) -> &RankingConfig {
        &self.config
    }

    pub fn comparisons(&self) -> &[TestedComparison] {
        &self.comparisons
    }

    pub fn find(&self, candidate: &str, opponent: &str, problem: &str) -> Option<&TestedComparison> {
        self.comparisons
            .iter()
            .find(|c| c.candidate == candidate && c.opponent == opponent && c.problem == problem)
    }

    /// Scores every comparison at the given severity and δ_p.
    pub fn score(&self, severity: f64, delta_p: f64) -> Result<Vec<PairwiseOutcome>> {
        check_severity(severity)?;
        check_delta_p(delta_p)?;
        self.comparisons
            .par_iter()
            .map(|c| c.score(severity, delta_p))
            .collect()
    }

    /// Scores at the configured severity and δ_p.
    pub fn outcomes(&self) -> Result<Vec<PairwiseOutcome>> {
        self.score(self.config.severity, self.config.delta_p)
    }
}

/// All `k (k - 1) m` ordered comparisons of a complete design.
pub fn run_tournament(matrix: &RunMatrix, config: &RankingConfig) -> Result<Vec<PairwiseOutcome>> {
    Tournament::evaluate(matrix, config)?.outcomes()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeagueRow {
    pub rank: usize,
    pub algorithm: String,
    pub points: i64,
    pub gd: i64,
    /// Mean over problems of the points won on each problem.
    pub points_mean: f64,
    /// Sample standard deviation of the same per-problem points (0 for a
    /// single problem).
    pub points_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeagueTable {
    pub rows: Vec<LeagueRow>,
    pub config: RankingConfig,
}

impl LeagueTable {
    pub fn row(&self, algorithm: &str) -> Option<&LeagueRow> {
        self.rows.iter().find(|r| r.algorithm == algorithm)
    }

    pub fn rank_of(&self, algorithm: &str) -> Option<usize> {
        self.row(algorithm).map(|r| r.rank)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalRow {
    pub rank: usize,
    pub algorithm: String,
    pub points: i64,
}

/// One point per rejection, nothing otherwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalTable {
    pub rows: Vec<ClassicalRow>,
}

impl ClassicalTable {
    pub fn rank_of(&self, algorithm: &str) -> Option<usize> {
        self.rows.iter().find(|r| r.algorithm == algorithm).map(|r| r.rank)
    }
}

/// Per-algorithm, per-problem sums of candidate-side points and GD, after
/// checking that the outcomes form a full design.
pub(crate) struct Tally {
    /// algorithm → problem → (points, gd, rejections)
    pub cells: BTreeMap<String, BTreeMap<String, (i64, i64, i64)>>,
}

pub(crate) fn tally(outcomes: &[PairwiseOutcome]) -> Result<Tally> {
    if outcomes.is_empty() {
        return Err(Error::InconsistentDesign("no outcomes".into()));
    }
    let algorithms: BTreeSet<&str> = outcomes
        .iter()
        .flat_map(|o| [o.candidate.as_str(), o.opponent.as_str()])
        .collect();
    let problems: BTreeSet<&str> = outcomes.iter().map(|o| o.problem.as_str()).collect();

    let mut seen = BTreeSet::new();
    for o in outcomes {
        if o.candidate == o.opponent {
            return Err(Error::InconsistentDesign(format!(
                "{} compared with itself on {}",
                o.candidate, o.problem
            )));
        }
        if !seen.insert((&o.candidate, &o.opponent, &o.problem)) {
            return Err(Error::InconsistentDesign(format!(
                "duplicate outcome ({}, {}, {})",
                o.candidate, o.opponent, o.problem
            )));
        }
    }
    let k = algorithms.len();
    let expected = k * (k - 1) * problems.len();
    if seen.len() != expected {
        return Err(Error::InconsistentDesign(format!(
            "expected {expected} ordered comparisons for {k} algorithms on {} problems, found {}",
            problems.len(),
            seen.len()
        )));
    }

    let mut cells: BTreeMap<String, BTreeMap<String, (i64, i64, i64)>> = BTreeMap::new();
    for a in &algorithms {
        let row = cells.entry(a.to_string()).or_default();
        for p in &problems {
            row.insert(p.to_string(), (0, 0, 0));
        }
    }
    for o in outcomes {
        let cell = cells
            .get_mut(&o.candidate)
            .and_then(|r| r.get_mut(&o.problem))
            .expect("initialised above");
        cell.0 += i64::from(o.points);
        cell.1 += o.gd;
        cell.2 += i64::from(o.decision == Decision::Reject);
    }
    Ok(Tally { cells })
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Sorts by points, then GD (both descending), then id; equal `(points, gd)`
/// share the better rank.
pub(crate) fn order_league(rows: &mut [LeagueRow]) {
    rows.sort_by(|a, b| {
        b.points
            .cmp(&a.points)
            .then(b.gd.cmp(&a.gd))
            .then_with(|| a.algorithm.cmp(&b.algorithm))
    });
    for i in 0..rows.len() {
        rows[i].rank = if i > 0 && (rows[i - 1].points, rows[i - 1].gd) == (rows[i].points, rows[i].gd) {
            rows[i - 1].rank
        } else {
            i + 1
        };
    }
}

pub fn build_table(outcomes: &[PairwiseOutcome], config: &RankingConfig) -> Result<LeagueTable> {
    let tally = tally(outcomes)?;
    let mut rows: Vec<LeagueRow> = tally
        .cells
        .iter()
        .map(|(algorithm, per_problem)| {
            let per: Vec<f64> = per_problem.values().map(|c| c.0 as f64).collect();
            let (points_mean, points_sd) = mean_sd(&per);
            LeagueRow {
                rank: 0,
                algorithm: algorithm.clone(),
                points: per_problem.values().map(|c| c.0).sum(),
                gd: per_problem.values().map(|c| c.1).sum(),
                points_mean,
                points_sd,
            }
        })
        .collect();
    order_league(&mut rows);
    Ok(LeagueTable {
        rows,
        config: config.clone(),
    })
}

pub fn classical_table(outcomes: &[PairwiseOutcome]) -> Result<ClassicalTable> {
    let tally = tally(outcomes)?;
    let mut rows: Vec<ClassicalRow> = tally
        .cells
        .iter()
        .map(|(algorithm, per_problem)| ClassicalRow {
            rank: 0,
            algorithm: algorithm.clone(),
            points: per_problem.values().map(|c| c.2).sum(),
        })
        .collect();
    rows.sort_by(|a, b| b.points.cmp(&a.points).then_with(|| a.algorithm.cmp(&b.algorithm)));
    for i in 0..rows.len() {
        rows[i].rank = if i > 0 && rows[i - 1].points == rows[i].points {
            rows[i - 1].rank
        } else {
            i + 1
        };
    }
    Ok(ClassicalTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(c: &str, o: &str, p: &str, decision: Decision, points: u32, gd: i64) -> PairwiseOutcome {
        PairwiseOutcome {
            candidate: c.into(),
            opponent: o.into(),
            problem: p.into(),
            t_obs: 0.0,
            p_raw: 0.5,
            p_adj: 0.5,
            decision,
            delta_star: 0.0,
            points,
            gd,
        }
    }

    #[test]
    fn scoring_rules() {
        assert_eq!(score_comparison(Decision::Reject, 1200.0, 500.0).unwrap(), (3, 2));
        assert_eq!(score_comparison(Decision::Reject, 300.0, 500.0).unwrap(), (1, 0));
        assert_eq!(score_comparison(Decision::NotReject, -950.0, 500.0).unwrap(), (0, -2));
        // boundary and clamping decisions
        assert_eq!(score_comparison(Decision::Reject, 500.0, 500.0).unwrap(), (1, 0));
        assert_eq!(score_comparison(Decision::Reject, -20.0, 500.0).unwrap(), (1, 0));
        assert_eq!(score_comparison(Decision::NotReject, 720.0, 500.0).unwrap(), (0, 0));
        assert!(score_comparison(Decision::Reject, 1.0, 0.0).is_err());
        assert!(score_comparison(Decision::Reject, 1.0, -5.0).is_err());
    }

    fn row(algorithm: &str, points: i64, gd: i64) -> LeagueRow {
        LeagueRow {
            rank: 0,
            algorithm: algorithm.into(),
            points,
            gd,
            points_mean: 0.0,
            points_sd: 0.0,
        }
    }

    #[test]
    fn points_dominate_goal_difference() {
        let mut rows = vec![row("B", 251, 889), row("A", 259, -755)];
        order_league(&mut rows);
        assert_eq!((rows[0].algorithm.as_str(), rows[0].rank), ("A", 1));
        assert_eq!((rows[1].algorithm.as_str(), rows[1].rank), ("B", 2));

        let mut rows = vec![row("B", 177, 3685), row("A", 178, -7877)];
        order_league(&mut rows);
        assert_eq!(rows[0].algorithm, "A");
    }

    #[test]
    fn goal_difference_breaks_ties_then_ids_share_rank() {
        let mut rows = vec![row("B", 10, -3), row("A", 10, 5)];
        order_league(&mut rows);
        assert_eq!(rows[0].algorithm, "A");
        assert_eq!(rows[1].rank, 2);

        let mut rows = vec![row("Z", 4, 1), row("Y", 4, 1), row("X", 9, 0)];
        order_league(&mut rows);
        let got: Vec<_> = rows.iter().map(|r| (r.algorithm.as_str(), r.rank)).collect();
        assert_eq!(got, vec![("X", 1), ("Y", 2), ("Z", 2)]);
    }

    #[test]
    fn table_totals_and_per_problem_stats() {
        let outcomes = vec![
            outcome("A", "B", "F1", Decision::Reject, 3, 4),
            outcome("B", "A", "F1", Decision::NotReject, 0, -4),
            outcome("A", "B", "F2", Decision::Reject, 1, 0),
            outcome("B", "A", "F2", Decision::NotReject, 0, 0),
        ];
        let t = build_table(&outcomes, &RankingConfig::default()).unwrap();
        let a = t.row("A").unwrap();
        assert_eq!((a.rank, a.points, a.gd), (1, 4, 4));
        assert_eq!(a.points_mean, 2.0);
        assert!((a.points_sd - 2f64.sqrt()).abs() < 1e-12);
        let b = t.row("B").unwrap();
        assert_eq!((b.rank, b.points, b.gd), (2, 0, -4));

        let c = classical_table(&outcomes).unwrap();
        assert_eq!(c.rows[0].algorithm, "A");
        assert_eq!(c.rows[0].points, 2);
        assert_eq!(c.rows[1].points, 0);
    }

    #[test]
    fn classical_all_zero() {
        let outcomes = vec![
            outcome("A", "B", "F1", Decision::NotReject, 0, 0),
            outcome("B", "A", "F1", Decision::NotReject, 0, 0),
        ];
        let c = classical_table(&outcomes).unwrap();
        assert!(c.rows.iter().all(|r| r.points == 0 && r.rank == 1));
    }

    #[test]
    fn incomplete_outcomes_rejected() {
        let outcomes = vec![
            outcome("A", "B", "F1", Decision::NotReject, 0, 0),
            outcome("B", "A", "F1", Decision::NotReject, 0, 0),
            outcome("A", "B", "F2", Decision::NotReject, 0, 0),
        ];
        assert!(matches!(
            build_table(&outcomes, &RankingConfig::default()),
            Err(Error::InconsistentDesign(_))
        ));
        assert!(classical_table(&outcomes).is_err());
        assert!(classical_table(&[]).is_err());
        let dup = vec![
            outcome("A", "B", "F1", Decision::NotReject, 0, 0),
            outcome("A", "B", "F1", Decision::NotReject, 0, 0),
        ];
        assert!(build_table(&dup, &RankingConfig::default()).is_err());
    }

    fn matrix(cells: &[(&str, &str, Vec<f64>)]) -> RunMatrix {
        let mut m = RunMatrix::new(None);
        for (a, p, v) in cells {
            m.insert_cell(*a, *p, v.clone()).unwrap();
        }
        m
    }

    fn quick_config() -> RankingConfig {
        RankingConfig {
            resamples: 2000,
            seed: 3,
            delta_p: 50.0,
            ..Default::default()
        }
    }

    #[test]
    fn dominant_candidate_scores_three() {
        let good: Vec<f64> = (0..50).map(|i| 100.0 + (i % 7) as f64).collect();
        let bad: Vec<f64> = (0..50).map(|i| 100.0 + 10.0 * 50.0 + (i % 11) as f64).collect();
        let m = matrix(&[("good", "F", good), ("bad", "F", bad)]);
        let outcomes = run_tournament(&m, &quick_config()).unwrap();
        let win = outcomes.iter().find(|o| o.candidate == "good").unwrap();
        assert_eq!(win.decision, Decision::Reject);
        assert_eq!(win.points, 3);
        assert!(win.gd >= 1);
        let loss = outcomes.iter().find(|o| o.candidate == "bad").unwrap();
        assert_eq!(loss.points, 0);
        assert!(loss.gd <= 0);
    }

    #[test]
    fn identical_samples_do_not_reject() {
        let v: Vec<f64> = (0..30).map(|i| (i * 13 % 17) as f64).collect();
        let m = matrix(&[("x", "F", v.clone()), ("y", "F", v)]);
        let outcomes = run_tournament(&m, &quick_config()).unwrap();
        assert_eq!(outcomes.len(), 2);
        for o in &outcomes {
            assert_eq!(o.decision, Decision::NotReject);
            assert_eq!(o.points, 0);
            assert_eq!(o.t_obs, 0.0);
            assert!((o.p_raw - 0.5).abs() < 0.1, "{}", o.p_raw);
        }
    }

    #[test]
    fn outcome_count_is_k_k1_m() {
        let mut cells = Vec::new();
        for a in ["a", "b", "c"] {
            for p in ["F1", "F2"] {
                cells.push((a, p, (0..10).map(|i| (i * a.len()) as f64 + 1.0).collect()));
            }
        }
        let outcomes = run_tournament(&matrix(&cells), &quick_config()).unwrap();
        assert_eq!(outcomes.len(), 3 * 2 * 2);
    }

    #[test]
    fn per_problem_scope_changes_only_family() {
        let mut cells = Vec::new();
        for (a, shift) in [("a", 0.0), ("b", 3.0), ("c", 9.0)] {
            for p in ["F1", "F2"] {
                cells.push((a, p, (0..20).map(|i| shift + (i % 5) as f64).collect()));
            }
        }
        let m = matrix(&cells);
        let global = Tournament::evaluate(&m, &quick_config()).unwrap();
        let local = Tournament::evaluate(
            &m,
            &RankingConfig { bh_scope: BhScope::PerProblem, ..quick_config() },
        )
        .unwrap();
        for (g, l) in global.comparisons().iter().zip(local.comparisons()) {
            assert_eq!(g.p_raw, l.p_raw);
            assert!(l.p_adj <= g.p_adj);
        }
    }

    #[test]
    fn rejects_incomplete_matrix() {
        let m = matrix(&[("a", "F1", vec![1.0]), ("b", "F1", vec![1.0]), ("a", "F2", vec![1.0])]);
        assert!(matches!(
            run_tournament(&m, &quick_config()),
            Err(Error::IncompleteDesign { .. })
        ));
        let single = matrix(&[("a", "F1", vec![1.0])]);
        assert!(run_tournament(&single, &quick_config()).is_err());
    }
}
