use severity_league::benchgen::{generate_matrix, HeuristicSpec, ProblemKind, ProblemSpec};
use severity_league::report::{self, emit, parse_league_csv, per_function_totals, Format, ReportBundle};
use severity_league::{
    build_table, load_runs, observed_stat, pooled_null, run_tournament, supported_delta,
    ComparisonSeed, Decision, RankingConfig, RunMatrix, Tournament,
};

fn generated() -> RunMatrix {
    let problems = [
        ProblemSpec::new(ProblemKind::OneMax, 16, 16).unwrap(),
        ProblemSpec::new(ProblemKind::LeadingOnes, 10, 10).unwrap(),
    ];
    let heuristics: Vec<HeuristicSpec> = ["rls", "one_plus_one_ea", "random_search"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    generate_matrix(&problems, &heuristics, 20, 3000, 11).unwrap()
}

fn config() -> RankingConfig {
    RankingConfig {
        delta_p: 30.0,
        resamples: 2000,
        budget: Some(3000.0),
        seed: 5,
        ..Default::default()
    }
}

#[test]
fn csv_file_round_trip() {
    let m = generated();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("runs.csv");
    m.write_csv(&path).unwrap();
    let back = load_runs(&path, &config()).unwrap();
    assert_eq!(back, m);
    assert_eq!(back.digest(), m.digest());
}

#[test]
fn report_files_agree_with_each_other() {
    let m = generated();
    let outcomes = run_tournament(&m, &config()).unwrap();
    let bundle = ReportBundle::new(&m, &config(), outcomes).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit(&bundle, dir.path(), &[Format::Csv, Format::Markdown]).unwrap();

    let league_text = std::fs::read_to_string(dir.path().join("league.csv")).unwrap();
    let parsed = parse_league_csv(&league_text).unwrap();
    assert_eq!(parsed, bundle.league.rows);

    for (alg, (points, gd)) in per_function_totals(&bundle.per_function) {
        let row = bundle.league.row(&alg).unwrap();
        assert_eq!((row.points, row.gd), (points, gd));
    }
    assert!(report::classical_consistent(&bundle.outcomes));
    assert_eq!(bundle.league.rows.last().unwrap().algorithm, "random_search");
}

#[test]
fn metadata_digest_follows_the_input() {
    let m = generated();
    let mut changed = m.clone();
    let mut v = changed.cell("rls", "onemax-16").unwrap().to_vec();
    v[0] += 1.0;
    changed.insert_cell("rls", "onemax-16", v).unwrap();

    let digest = |m: &RunMatrix| {
        let outcomes = run_tournament(m, &config()).unwrap();
        ReportBundle::new(m, &config(), outcomes).unwrap().metadata.input_digest
    };
    assert_eq!(digest(&m), digest(&m.clone()));
    assert_ne!(digest(&m), digest(&changed));
}

#[test]
fn shifting_one_sample_shifts_delta_star() {
    let a = [120.0, 135.0, 128.0, 140.0, 131.0, 126.0, 133.0, 129.0];
    let b = [101.0, 97.0, 110.0, 104.0, 99.0, 106.0, 95.0, 108.0];
    let null = pooled_null(&a, &b, 4000, &ComparisonSeed::new(1, "p", "a", "b")).unwrap();
    let t = observed_stat(&a, &b).unwrap();
    let c = 7.0;
    let shifted: Vec<f64> = a.iter().map(|v| v + c).collect();
    let t_shift = observed_stat(&shifted, &b).unwrap();
    assert!((t_shift - (t + c)).abs() < 1e-9);
    for decision in [Decision::Reject, Decision::NotReject] {
        let d = supported_delta(&null, t, 0.8, decision).unwrap();
        let d_shift = supported_delta(&null, t_shift, 0.8, decision).unwrap();
        assert!((d_shift - (d + c)).abs() < 1e-9);
    }
}

#[test]
fn ranking_order_ignores_algorithm_names() {
    let m = generated();
    let mut renamed = RunMatrix::new(m.budget());
    for (alg, prob, values) in m.cells() {
        renamed.insert_cell(format!("z_{alg}"), prob, values.to_vec()).unwrap();
    }
    let order = |m: &RunMatrix| -> Vec<String> {
        let outcomes = run_tournament(m, &config()).unwrap();
        build_table(&outcomes, &config())
            .unwrap()
            .rows
            .into_iter()
            .map(|r| r.algorithm.trim_start_matches("z_").to_string())
            .collect()
    };
    assert_eq!(order(&m), order(&renamed));
}

#[test]
fn rescoring_matches_a_fresh_run() {
    let m = generated();
    let t = Tournament::evaluate(&m, &config()).unwrap();
    let rescored = t.score(0.65, 100.0).unwrap();
    let fresh = run_tournament(
        &m,
        &RankingConfig {
            severity: 0.65,
            delta_p: 100.0,
            ..config()
        },
    )
    .unwrap();
    assert_eq!(rescored, fresh);
}
