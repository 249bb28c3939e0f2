//! Re-scoring one tournament across grids of severity and δ_p.

use crate::config::{check_delta_p, check_severity, RankingConfig};
use crate::data::RunMatrix;
use crate::error::{Error, Result};
use crate::league::{build_table, LeagueTable, Tournament};
use crate::outcome::PairwiseOutcome;

/// Severity levels examined by default.
pub const DEFAULT_SEVERITIES: [f64; 4] = [0.5, 0.65, 0.8, 0.95];
/// δ_p values examined by default (in evaluations).
pub const DEFAULT_DELTA_PS: [f64; 4] = [50.0, 100.0, 250.0, 500.0];

#[derive(Debug, Clone)]
pub struct SensitivityCell {
    pub severity: f64,
    pub delta_p: f64,
    pub outcomes: Vec<PairwiseOutcome>,
    pub table: LeagueTable,
}

/// One league table per `(S, δ_p)` pair, all scored from the same decisions
/// and bootstrap nulls.
#[derive(Debug, Clone)]
pub struct SensitivityGrid {
    pub severities: Vec<f64>,
    pub delta_ps: Vec<f64>,
    /// Row-major over `severities` × `delta_ps`.
    pub cells: Vec<SensitivityCell>,
    /// Table at the configured `(S, δ_p)`, the reference for rank changes.
    pub base: LeagueTable,
    /// Whether either input list had to be sorted or deduplicated.
    pub reordered_input: bool,
}

fn normalise(values: &[f64]) -> (Vec<f64>, bool) {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    let changed = v.as_slice() != values;
    (v, changed)
}

/// Tests once, then scores every grid cell.
pub fn sweep(
    matrix: &RunMatrix,
    config: &RankingConfig,
    severities: &[f64],
    delta_ps: &[f64],
) -> Result<SensitivityGrid> {
    let tournament = Tournament::evaluate(matrix, config)?;
    sweep_tournament(&tournament, severities, delta_ps)
}

pub fn sweep_tournament(
    tournament: &Tournament,
    severities: &[f64],
    delta_ps: &[f64],
) -> Result<SensitivityGrid> {
    if severities.is_empty() || delta_ps.is_empty() {
        return Err(Error::InvalidArgument("sensitivity grids must be non-empty".into()));
    }
    severities.iter().try_for_each(|&s| check_severity(s))?;
    delta_ps.iter().try_for_each(|&d| check_delta_p(d))?;
    let (severities, s_changed) = normalise(severities);
    let (delta_ps, d_changed) = normalise(delta_ps);

    let config = tournament.config();
    let base = build_table(&tournament.outcomes()?, config)?;
    let mut cells = Vec::with_capacity(severities.len() * delta_ps.len());
    for &s in &severities {
        for &d in &delta_ps {
            let cell_config = RankingConfig {
                severity: s,
                delta_p: d,
                ..config.clone()
            };
            let outcomes = tournament.score(s, d)?;
            let table = build_table(&outcomes, &cell_config)?;
            cells.push(SensitivityCell {
                severity: s,
                delta_p: d,
                outcomes,
                table,
            });
        }
    }
    Ok(SensitivityGrid {
        severities,
        delta_ps,
        cells,
        base,
        reordered_input: s_changed || d_changed,
    })
}

impl SensitivityGrid {
    pub fn cell(&self, severity: f64, delta_p: f64) -> Option<&SensitivityCell> {
        self.cells
            .iter()
            .find(|c| c.severity == severity && c.delta_p == delta_p)
    }

    /// `rank_base - rank_cell`: positive when the algorithm moved up.
    pub fn rank_change(&self, cell: &SensitivityCell, algorithm: &str) -> i64 {
        let base = self.base.rank_of(algorithm).unwrap_or(0) as i64;
        let here = cell.table.rank_of(algorithm).unwrap_or(0) as i64;
        base - here
    }

    /// Summary with one row per `(s, delta_p, algorithm)`.
    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["s", "delta_p", "algorithm", "points", "gd", "rank", "rank_change_vs_base"])
            .expect("in-memory write");
        for cell in &self.cells {
            for row in &cell.table.rows {
                w.write_record([
                    cell.severity.to_string(),
                    cell.delta_p.to_string(),
                    row.algorithm.clone(),
                    row.points.to_string(),
                    row.gd.to_string(),
                    row.rank.to_string(),
                    self.rank_change(cell, &row.algorithm).to_string(),
                ])
                .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}
