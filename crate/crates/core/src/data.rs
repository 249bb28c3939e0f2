//! Run data: the per-(algorithm, problem) samples a tournament is played on.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io::Read;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::config::RankingConfig;
use crate::error::{Error, Result};

/// Header of the long-format run CSV, in its fixed column order.
pub const RUN_CSV_HEADER: [&str; 4] = ["algorithm", "problem", "run", "value"];

/// Performance samples keyed by `(algorithm, problem)`.
///
/// Values are non-negative reals (for fixed-target data: evaluations to
/// target) kept in run order. Once built the matrix is never mutated by the
/// ranking pipeline.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunMatrix {
    cells: BTreeMap<(String, String), Vec<f64>>,
    budget: Option<f64>,
}

impl RunMatrix {
    pub fn new(budget: Option<f64>) -> Self {
        RunMatrix {
            cells: BTreeMap::new(),
            budget,
        }
    }

    /// Inserts (or replaces) one cell. Values must be finite, non-negative
    /// and, when a budget is set, not above it.
    pub fn insert_cell(
        &mut self,
        algorithm: impl Into<String>,
        problem: impl Into<String>,
        values: Vec<f64>,
    ) -> Result<()> {
        let algorithm = algorithm.into();
        let problem = problem.into();
        for &v in &values {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "({algorithm}, {problem}): value {v} is not a finite non-negative number"
                )));
            }
            if let Some(b) = self.budget {
                if v > b {
                    return Err(Error::InvalidArgument(format!(
                        "({algorithm}, {problem}): value {v} exceeds budget {b}"
                    )));
                }
            }
        }
        self.cells.insert((algorithm, problem), values);
        Ok(())
    }

    pub fn budget(&self) -> Option<f64> {
        self.budget
    }

    pub fn cell(&self, algorithm: &str, problem: &str) -> Option<&[f64]> {
        self.cells
            .get(&(algorithm.to_owned(), problem.to_owned()))
            .map(Vec::as_slice)
    }

    pub fn cells(&self) -> impl Iterator<Item = (&str, &str, &[f64])> {
        self.cells
            .iter()
            .map(|((a, p), v)| (a.as_str(), p.as_str(), v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Algorithm ids in ascending order.
    pub fn algorithms(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.cells.keys().map(|(a, _)| a).collect();
        set.into_iter().cloned().collect()
    }

    /// Problem ids in ascending order.
    pub fn problems(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.cells.keys().map(|(_, p)| p).collect();
        set.into_iter().cloned().collect()
    }

    /// Checks that every algorithm has a non-empty cell on every problem.
    pub fn check_complete(&self) -> Result<()> {
        for algorithm in self.algorithms() {
            for problem in self.problems() {
                match self.cell(&algorithm, &problem) {
                    None => return Err(Error::IncompleteDesign { algorithm, problem }),
                    Some([]) => return Err(Error::EmptyCell { algorithm, problem }),
                    Some(_) => {}
                }
            }
        }
        Ok(())
    }

    /// Canonical long-format CSV: header, then rows ordered by algorithm,
    /// problem and run (runs renumbered from 1). Values use the shortest
    /// representation that reads back to the same `f64`.
    pub fn to_csv_string(&self) -> String {
        let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
        writer.write_record(RUN_CSV_HEADER).expect("in-memory write");
        for ((algorithm, problem), values) in &self.cells {
            for (i, v) in values.iter().enumerate() {
                writer
                    .write_record([
                        algorithm.as_str(),
                        problem.as_str(),
                        &(i + 1).to_string(),
                        &v.to_string(),
                    ])
                    .expect("in-memory write");
            }
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    /// Hex SHA-256 of the canonical CSV.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_csv_string().as_bytes()))
    }
}

/// Loads a long-format run CSV (`algorithm,problem,run,value`).
///
/// When `config.budget` is set and `config.cap_to_budget` is true, values
/// above the budget and empty values are replaced by the budget. The design
/// must be complete: every algorithm needs runs on every problem.
pub fn load_runs(path: impl AsRef<Path>, config: &RankingConfig) -> Result<RunMatrix> {
    let file = std::fs::File::open(path)?;
    parse_runs(file, config)
}

pub fn parse_runs<R: Read>(reader: R, config: &RankingConfig) -> Result<RunMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = match records.next() {
        Some(rec) => rec?,
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "empty file".into(),
            })
        }
    };
    if header.iter().ne(RUN_CSV_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header '{}', found '{}'",
                RUN_CSV_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let budget = config.budget;
    let capping = config.cap_to_budget && budget.is_some();
    let mut seen = HashSet::new();
    let mut rows: BTreeMap<(String, String), Vec<(u64, f64)>> = BTreeMap::new();

    for rec in records {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let parse_err = |message: String| Error::Parse { line, message };

        if rec.len() != 4 {
            return Err(parse_err(format!("expected 4 fields, found {}", rec.len())));
        }
        let algorithm = rec[0].to_owned();
        let problem = rec[1].to_owned();
        if algorithm.is_empty() || problem.is_empty() {
            return Err(parse_err("empty algorithm or problem id".into()));
        }
        let run: u64 = rec[2]
            .parse()
            .ok()
            .filter(|&r| r >= 1)
            .ok_or_else(|| parse_err(format!("run index '{}' is not a positive integer", &rec[2])))?;

        let raw = &rec[3];
        let value = if raw.is_empty() {
            match (capping, budget) {
                (true, Some(b)) => b,
                _ => return Err(parse_err("missing value and no budget cap configured".into())),
            }
        } else {
            let v: f64 = raw
                .parse()
                .map_err(|_| parse_err(format!("value '{raw}' is not a number")))?;
            if !v.is_finite() || v < 0.0 {
                return Err(parse_err(format!(
                    "value '{raw}' is not a finite non-negative number"
                )));
            }
            match budget {
                Some(b) if v > b && capping => b,
                Some(b) if v > b => {
                    return Err(parse_err(format!("value {v} exceeds budget {b}")));
                }
                _ => v,
            }
        };

        if !seen.insert((algorithm.clone(), problem.clone(), run)) {
            return Err(Error::DuplicateRun {
                line,
                algorithm,
                problem,
                run,
            });
        }
        rows.entry((algorithm, problem)).or_default().push((run, value));
    }

    let mut matrix = RunMatrix::new(budget);
    for ((algorithm, problem), mut runs) in rows {
        runs.sort_by_key(|&(run, _)| run);
        matrix.insert_cell(algorithm, problem, runs.into_iter().map(|(_, v)| v).collect())?;
    }
    matrix.check_complete()?;
    Ok(matrix)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticLevel {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    /// Error: a cell has no values.
    EmptyCell { algorithm: String, problem: String },
    /// Error: an algorithm has no cell on a problem that others have.
    MissingCell { algorithm: String, problem: String },
    /// Warning: run counts differ between algorithms on one problem.
    UnequalRunCounts { problem: String, min: usize, max: usize },
    /// Warning: every value in a cell is identical.
    ZeroVariance { algorithm: String, problem: String },
    /// Warning: fewer than [`FEW_RUNS`] runs in a cell.
    FewRuns { algorithm: String, problem: String, runs: usize },
}

/// Cells with fewer runs than this get a warning.
pub const FEW_RUNS: usize = 10;

impl Diagnostic {
    pub fn level(&self) -> DiagnosticLevel {
        match self {
            Diagnostic::EmptyCell { .. } | Diagnostic::MissingCell { .. } => DiagnosticLevel::Error,
            _ => DiagnosticLevel::Warning,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::EmptyCell { algorithm, problem } => {
                write!(f, "error: cell ({algorithm}, {problem}) is empty")
            }
            Diagnostic::MissingCell { algorithm, problem } => {
                write!(f, "error: cell ({algorithm}, {problem}) is missing")
            }
            Diagnostic::UnequalRunCounts { problem, min, max } => write!(
                f,
                "warning: run counts on problem {problem} range from {min} to {max}"
            ),
            Diagnostic::ZeroVariance { algorithm, problem } => {
                write!(f, "warning: cell ({algorithm}, {problem}) has zero variance")
            }
            Diagnostic::FewRuns { algorithm, problem, runs } => write!(
                f,
                "warning: cell ({algorithm}, {problem}) has only {runs} runs"
            ),
        }
    }
}

/// Reports structural problems in a matrix without touching it.
pub fn validate(matrix: &RunMatrix) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let algorithms = matrix.algorithms();
    for problem in matrix.problems() {
        let mut counts = Vec::new();
        for algorithm in &algorithms {
            let Some(values) = matrix.cell(algorithm, &problem) else {
                out.push(Diagnostic::MissingCell {
                    algorithm: algorithm.clone(),
                    problem: problem.clone(),
                });
                continue;
            };
            if values.is_empty() {
                out.push(Diagnostic::EmptyCell {
                    algorithm: algorithm.clone(),
                    problem: problem.clone(),
                });
                continue;
            }
            counts.push(values.len());
            if values.iter().all(|&v| v == values[0]) {
                out.push(Diagnostic::ZeroVariance {
                    algorithm: algorithm.clone(),
                    problem: problem.clone(),
                });
            }
            if values.len() < FEW_RUNS {
                out.push(Diagnostic::FewRuns {
                    algorithm: algorithm.clone(),
                    problem: problem.clone(),
                    runs: values.len(),
                });
            }
        }
        if let (Some(&min), Some(&max)) = (counts.iter().min(), counts.iter().max()) {
            if min != max {
                out.push(Diagnostic::UnequalRunCounts {
                    problem: problem.clone(),
                    min,
                    max,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(budget: Option<f64>) -> RankingConfig {
        RankingConfig {
            budget,
            ..Default::default()
        }
    }

    fn csv_of(rows: &[(&str, &str, u64, &str)]) -> String {
        let mut s = String::from("algorithm,problem,run,value\n");
        for (a, p, r, v) in rows {
            s.push_str(&format!("{a},{p},{r},{v}\n"));
        }
        s
    }

    #[test]
    fn loads_full_design() {
        let mut rows = Vec::new();
        for a in ["A", "B", "C"] {
            for p in ["F1", "F2"] {
                for r in 1..=5u64 {
                    rows.push((a, p, r, "10.5"));
                }
            }
        }
        let m = parse_runs(csv_of(&rows).as_bytes(), &cfg(None)).unwrap();
        assert_eq!(m.len(), 6);
        assert!(m.cells().all(|(_, _, v)| v.len() == 5));
    }

    #[test]
    fn caps_at_budget() {
        let text = csv_of(&[("A", "F1", 1, "61000"), ("A", "F1", 2, ""), ("A", "F1", 3, "10")]);
        let m = parse_runs(text.as_bytes(), &cfg(Some(50_000.0))).unwrap();
        assert_eq!(m.cell("A", "F1").unwrap(), &[50_000.0, 50_000.0, 10.0]);
    }

    #[test]
    fn over_budget_without_capping_is_an_error() {
        let text = csv_of(&[("A", "F1", 1, "61000")]);
        let config = RankingConfig {
            budget: Some(50_000.0),
            cap_to_budget: false,
            ..Default::default()
        };
        let err = parse_runs(text.as_bytes(), &config).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn incomplete_design_matches_enumeration() {
        let text = csv_of(&[
            ("X", "F1", 1, "1"),
            ("Y", "F1", 1, "1"),
            ("Y", "F2", 1, "1"),
        ]);
        // full design = {X, Y} x {F1, F2}; only (X, F2) is absent
        let mut missing = Vec::new();
        for a in ["X", "Y"] {
            for p in ["F1", "F2"] {
                if !text.contains(&format!("{a},{p},")) {
                    missing.push((a, p));
                }
            }
        }
        assert_eq!(missing, vec![("X", "F2")]);
        match parse_runs(text.as_bytes(), &cfg(None)).unwrap_err() {
            Error::IncompleteDesign { algorithm, problem } => {
                assert_eq!((algorithm.as_str(), problem.as_str()), missing[0]);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn reports_line_numbers() {
        let text = "algorithm,problem,run,value\nA,F1,1,3\nA,F1,2,abc\n";
        match parse_runs(text.as_bytes(), &cfg(None)).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
        let text = "algorithm,problem,run,value\nA,F1,1,-3\n";
        assert!(matches!(
            parse_runs(text.as_bytes(), &cfg(None)),
            Err(Error::Parse { line: 2, .. })
        ));
        let text = "algorithm,problem,run,value\nA,F1,0,3\n";
        assert!(parse_runs(text.as_bytes(), &cfg(None)).is_err());
    }

    #[test]
    fn duplicate_triple() {
        let text = csv_of(&[("A", "F1", 1, "1"), ("A", "F1", 1, "2")]);
        assert!(matches!(
            parse_runs(text.as_bytes(), &cfg(None)),
            Err(Error::DuplicateRun { line: 3, run: 1, .. })
        ));
    }

    #[test]
    fn wrong_header() {
        let text = "Algorithm,problem,run,value\nA,F1,1,1\n";
        assert!(matches!(
            parse_runs(text.as_bytes(), &cfg(None)),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn runs_are_ordered_by_index() {
        let text = csv_of(&[("A", "F1", 3, "30"), ("A", "F1", 1, "10"), ("A", "F1", 2, "20")]);
        let m = parse_runs(text.as_bytes(), &cfg(None)).unwrap();
        assert_eq!(m.cell("A", "F1").unwrap(), &[10.0, 20.0, 30.0]);
    }

    #[test]
    fn validate_equal_counts_is_clean() {
        let mut m = RunMatrix::new(None);
        for a in ["A", "B"] {
            m.insert_cell(a, "F1", (0..100).map(f64::from).collect()).unwrap();
        }
        assert!(validate(&m).is_empty());
    }

    #[test]
    fn validate_flags_degenerate_cells() {
        let mut m = RunMatrix::new(None);
        m.insert_cell("A", "F1", vec![7.0; 100]).unwrap();
        m.insert_cell("B", "F1", (0..80).map(f64::from).collect()).unwrap();
        let before = m.clone();
        let d = validate(&m);
        assert_eq!(m, before);
        assert!(d.contains(&Diagnostic::ZeroVariance {
            algorithm: "A".into(),
            problem: "F1".into()
        }));
        assert!(d.contains(&Diagnostic::UnequalRunCounts {
            problem: "F1".into(),
            min: 80,
            max: 100
        }));
        assert!(d.iter().all(|x| x.level() == DiagnosticLevel::Warning));
    }

    #[test]
    fn validate_reports_errors() {
        let mut m = RunMatrix::new(None);
        m.insert_cell("A", "F1", vec![]).unwrap();
        m.insert_cell("B", "F1", vec![1.0; 3]).unwrap();
        m.insert_cell("B", "F2", vec![1.0; 3]).unwrap();
        let d = validate(&m);
        assert!(d.contains(&Diagnostic::EmptyCell { algorithm: "A".into(), problem: "F1".into() }));
        assert!(d.contains(&Diagnostic::MissingCell { algorithm: "A".into(), problem: "F2".into() }));
        assert!(d.iter().any(|x| matches!(x, Diagnostic::FewRuns { runs: 3, .. })));
    }

    #[test]
    fn digest_tracks_content() {
        let mut m = RunMatrix::new(None);
        m.insert_cell("A", "F1", vec![1.0, 2.0]).unwrap();
        let d1 = m.digest();
        assert_eq!(d1, m.clone().digest());
        m.insert_cell("A", "F1", vec![1.0, 2.5]).unwrap();
        assert_ne!(d1, m.digest());
    }
}
