//! Fixed-target run data from toy pseudo-Boolean problems.
//!
//! Three textbook heuristics are run on OneMax or LeadingOnes until they
//! first reach a fitness target or exhaust an evaluation budget. Every
//! fitness evaluation counts, the initial one included, and runs that miss
//! the target are recorded at the budget.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::RunMatrix;
use crate::error::{Error, Result};
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    OneMax,
    LeadingOnes,
}

impl ProblemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::OneMax => "onemax",
            ProblemKind::LeadingOnes => "leadingones",
        }
    }

    pub fn fitness(self, bits: &[bool]) -> usize {
        match self {
            ProblemKind::OneMax => bits.iter().filter(|&&b| b).count(),
            ProblemKind::LeadingOnes => bits.iter().take_while(|&&b| b).count(),
        }
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "onemax" => Ok(ProblemKind::OneMax),
            "leadingones" => Ok(ProblemKind::LeadingOnes),
            other => Err(Error::Config(format!("unknown problem '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub dimension: usize,
    pub target: usize,
}

impl ProblemSpec {
    pub fn new(kind: ProblemKind, dimension: usize, target: usize) -> Result<Self> {
        let spec = ProblemSpec {
            kind,
            dimension,
            target,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::Config("dimension must be >= 1".into()));
        }
        if self.target == 0 || self.target > self.dimension {
            return Err(Error::Config(format!(
                "target must be in 1..={}, got {}",
                self.dimension, self.target
            )));
        }
        Ok(())
    }

    /// `onemax-30`, or `onemax-30-t25` when the target is below the optimum.
    pub fn id(&self) -> String {
        if self.target == self.dimension {
            format!("{}-{}", self.kind.as_str(), self.dimension)
        } else {
            format!("{}-{}-t{}", self.kind.as_str(), self.dimension, self.target)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HeuristicKind {
    /// Randomized local search: flip one uniformly chosen bit, keep the
    /// offspring if it is not worse.
    Rls,
    /// (1+1) EA with standard bit mutation.
    OnePlusOneEa,
    /// Independent uniform samples.
    RandomSearch,
}

impl HeuristicKind {
    pub fn as_str(self) -> &'static str {
        match self {
            HeuristicKind::Rls => "rls",
            HeuristicKind::OnePlusOneEa => "one_plus_one_ea",
            HeuristicKind::RandomSearch => "random_search",
        }
    }
}

impl FromStr for HeuristicKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rls" => Ok(HeuristicKind::Rls),
            "one_plus_one_ea" => Ok(HeuristicKind::OnePlusOneEa),
            "random_search" => Ok(HeuristicKind::RandomSearch),
            other => Err(Error::Config(format!("unknown heuristic '{other}'"))),
        }
    }
}

impl fmt::Display for HeuristicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicSpec {
    pub kind: HeuristicKind,
    /// Per-bit flip probability of the (1+1) EA; `1 / dimension` if unset.
    pub mutation_rate: Option<f64>,
}

impl HeuristicSpec {
    pub fn new(kind: HeuristicKind) -> Self {
        HeuristicSpec {
            kind,
            mutation_rate: None,
        }
    }

    pub fn with_rate(kind: HeuristicKind, rate: f64) -> Result<Self> {
        let spec = HeuristicSpec {
            kind,
            mutation_rate: Some(rate),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(rate) = self.mutation_rate {
            if self.kind != HeuristicKind::OnePlusOneEa {
                return Err(Error::Config(format!(
                    "mutation rate only applies to one_plus_one_ea, not {}",
                    self.kind
                )));
            }
            if !(rate > 0.0 && rate < 1.0) {
                return Err(Error::Config(format!("mutation rate must be in (0, 1), got {rate}")));
            }
        }
        Ok(())
    }

    pub fn id(&self) -> String {
        match self.mutation_rate {
            Some(rate) => format!("{}_p{rate}", self.kind),
            None => self.kind.to_string(),
        }
    }
}

impl FromStr for HeuristicSpec {
    type Err = Error;

    /// `rls`, `random_search`, `one_plus_one_ea` or `one_plus_one_ea:0.05`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None => Ok(HeuristicSpec::new(s.parse()?)),
            Some((kind, rate)) => {
                let rate: f64 = rate
                    .parse()
                    .map_err(|_| Error::Config(format!("bad mutation rate in '{s}'")))?;
                HeuristicSpec::with_rate(kind.parse()?, rate)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialResult {
    /// Evaluations until the target was first reached; the budget when it
    /// was not.
    pub evaluations_to_target: u64,
    pub hit: bool,
}

/// One run of `heuristic` on `problem` from a uniform random start.
///
/// A target reached on the budget-th evaluation counts as a hit.
pub fn run_trial(
    problem: &ProblemSpec,
    heuristic: &HeuristicSpec,
    budget: u64,
    seed: u64,
) -> Result<TrialResult> {
    problem.validate()?;
    heuristic.validate()?;
    if budget == 0 {
        return Err(Error::Config("budget must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = problem.dimension;
    let target = problem.target;
    let kind = problem.kind;

    let mut x: Vec<bool> = (0..n).map(|_| rng.random()).collect();
    let mut fx = kind.fitness(&x);
    let mut evals = 1u64;
    if fx >= target {
        return Ok(TrialResult { evaluations_to_target: evals, hit: true });
    }

    let rate = heuristic.mutation_rate.unwrap_or(1.0 / n as f64);
    let mut y = x.clone();
    while evals < budget {
        match heuristic.kind {
            HeuristicKind::Rls => {
                y.copy_from_slice(&x);
                let i = rng.random_range(0..n);
                y[i] = !y[i];
            }
            HeuristicKind::OnePlusOneEa => {
                y.copy_from_slice(&x);
                for bit in y.iter_mut() {
                    if rng.random_bool(rate) {
                        *bit = !*bit;
                    }
                }
            }
            HeuristicKind::RandomSearch => {
                for bit in y.iter_mut() {
                    *bit = rng.random();
                }
            }
        }
        let fy = kind.fitness(&y);
        evals += 1;
        if fy >= target {
            return Ok(TrialResult { evaluations_to_target: evals, hit: true });
        }
        if heuristic.kind != HeuristicKind::RandomSearch && fy >= fx {
            std::mem::swap(&mut x, &mut y);
            fx = fy;
        }
    }
    Ok(TrialResult {
        evaluations_to_target: budget,
        hit: false,
    })
}

/// Seed of one trial, keyed by problem, heuristic and run index.
pub fn trial_seed(master: u64, problem: &ProblemSpec, heuristic: &HeuristicSpec, run: usize) -> u64 {
    derive_seed(master, "trial", &[&problem.id(), &heuristic.id(), &run.to_string()])
}

/// Full-design run matrix with `runs` trials per (heuristic, problem) cell.
pub fn generate_matrix(
    problems: &[ProblemSpec],
    heuristics: &[HeuristicSpec],
    runs: usize,
    budget: u64,
    master_seed: u64,
) -> Result<RunMatrix> {
    if runs == 0 {
        return Err(Error::Config("runs must be >= 1".into()));
    }
    if problems.is_empty() || heuristics.is_empty() {
        return Err(Error::Config("need at least one problem and one heuristic".into()));
    }
    let mut matrix = RunMatrix::new(Some(budget as f64));
    for problem in problems {
        for heuristic in heuristics {
            let values = (0..runs)
                .into_par_iter()
                .map(|run| {
                    let seed = trial_seed(master_seed, problem, heuristic, run);
                    run_trial(problem, heuristic, budget, seed)
                        .map(|t| t.evaluations_to_target as f64)
                })
                .collect::<Result<Vec<f64>>>()?;
            matrix.insert_cell(heuristic.id(), problem.id(), values)?;
        }
    }
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn onemax(n: usize) -> ProblemSpec {
        ProblemSpec::new(ProblemKind::OneMax, n, n).unwrap()
    }

    const ALL: [HeuristicKind; 3] = [
        HeuristicKind::Rls,
        HeuristicKind::OnePlusOneEa,
        HeuristicKind::RandomSearch,
    ];

    #[test]
    fn fitness_functions() {
        let bits = [true, true, false, true];
        assert_eq!(ProblemKind::OneMax.fitness(&bits), 3);
        assert_eq!(ProblemKind::LeadingOnes.fitness(&bits), 2);
        assert_eq!(ProblemKind::LeadingOnes.fitness(&[true; 5]), 5);
    }

    #[test]
    fn single_bit_space() {
        let p = onemax(1);
        for kind in [HeuristicKind::Rls, HeuristicKind::OnePlusOneEa] {
            for seed in 0..200 {
                let t = run_trial(&p, &HeuristicSpec::new(kind), 2, seed).unwrap();
                assert!(t.hit);
                assert!((1..=2).contains(&t.evaluations_to_target));
            }
        }
        // random search needs a geometric number of draws
        let mut hits = 0;
        for seed in 0..200 {
            let t = run_trial(&p, &HeuristicSpec::new(HeuristicKind::RandomSearch), 64, seed).unwrap();
            assert!(t.evaluations_to_target >= 1);
            hits += usize::from(t.hit);
        }
        assert_eq!(hits, 200);
    }

    /// Expected evaluations of RLS on OneMax from a uniform start:
    /// `1 + n * E[H_Z]` with `Z ~ Bin(n, 1/2)` zeros to collect.
    fn rls_onemax_expectation(n: usize) -> f64 {
        let mut expect = 0.0;
        let mut binom = 1.0f64; // C(n, z)
        for z in 0..=n {
            if z > 0 {
                binom = binom * (n - z + 1) as f64 / z as f64;
            }
            let harmonic: f64 = (1..=z).map(|i| 1.0 / i as f64).sum();
            expect += binom * 0.5f64.powi(n as i32) * n as f64 * harmonic;
        }
        1.0 + expect
    }

    #[test]
    fn rls_matches_coupon_collector() {
        let p = onemax(20);
        let h = HeuristicSpec::new(HeuristicKind::Rls);
        let runs = 1000;
        let total: u64 = (0..runs)
            .map(|s| run_trial(&p, &h, 100_000, s).unwrap().evaluations_to_target)
            .sum();
        let mean = total as f64 / runs as f64;
        let oracle = rls_onemax_expectation(20);
        assert!((oracle - 59.4).abs() < 1.0, "oracle {oracle}");
        assert!((mean - oracle).abs() / oracle < 0.15, "mean {mean} vs {oracle}");
    }

    #[test]
    fn random_search_rarely_hits() {
        let p = onemax(20);
        let h = HeuristicSpec::new(HeuristicKind::RandomSearch);
        let hits = (0..300)
            .filter(|&s| run_trial(&p, &h, 1000, s).unwrap().hit)
            .count();
        assert!(hits < 3, "{hits}");
    }

    #[test]
    fn misses_record_budget() {
        let p = ProblemSpec::new(ProblemKind::LeadingOnes, 40, 40).unwrap();
        for kind in ALL {
            for seed in 0..20 {
                let t = run_trial(&p, &HeuristicSpec::new(kind), 50, seed).unwrap();
                assert!((1..=50).contains(&t.evaluations_to_target));
                if !t.hit {
                    assert_eq!(t.evaluations_to_target, 50);
                }
            }
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(ProblemSpec::new(ProblemKind::OneMax, 10, 11).is_err());
        assert!(ProblemSpec::new(ProblemKind::OneMax, 0, 0).is_err());
        assert!(HeuristicSpec::with_rate(HeuristicKind::OnePlusOneEa, 1.0).is_err());
        assert!(HeuristicSpec::with_rate(HeuristicKind::Rls, 0.1).is_err());
        assert!(run_trial(&onemax(5), &HeuristicSpec::new(HeuristicKind::Rls), 0, 1).is_err());
        assert_eq!(
            "one_plus_one_ea:0.05".parse::<HeuristicSpec>().unwrap().id(),
            "one_plus_one_ea_p0.05"
        );
        assert!("hill_climber".parse::<HeuristicSpec>().is_err());
    }

    #[test]
    fn generated_matrix_shape_and_determinism() {
        let problems = [onemax(30), ProblemSpec::new(ProblemKind::LeadingOnes, 10, 10).unwrap()];
        let heuristics: Vec<_> = ALL.iter().map(|&k| HeuristicSpec::new(k)).collect();
        let a = generate_matrix(&problems, &heuristics, 50, 50_000, 9).unwrap();
        assert_eq!(a.len(), 6);
        assert!(a.cells().all(|(_, _, v)| v.len() == 50));
        assert!(a.cells().flat_map(|(_, _, v)| v.iter()).all(|&v| (1.0..=50_000.0).contains(&v)));
        let b = generate_matrix(&problems, &heuristics, 50, 50_000, 9).unwrap();
        assert_eq!(a, b);

        let mean = |alg: &str| {
            let v = a.cell(alg, "onemax-30").unwrap();
            v.iter().sum::<f64>() / v.len() as f64
        };
        assert!(mean("rls") * 10.0 < mean("random_search"));
        assert!(generate_matrix(&problems, &heuristics, 0, 10, 9).is_err());
    }
}
