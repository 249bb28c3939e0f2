//! Post-decision severity and the supported discrepancy δ*.
//!
//! For a comparison with observed statistic `t_obs` and bootstrap null `t*`,
//! severity at discrepancy δ is read off the null shifted to mean δ:
//!
//! * after a rejection (a win), `S_r(δ) = #{t* <= t_obs - δ} / n_b`, the
//!   probability of a statistic no larger than the observed one if the true
//!   improvement were δ. It falls from 1 to 0 as δ grows.
//! * after a non-rejection, `S_nr(δ) = #{t* > t_obs - δ} / n_b`, which rises
//!   from 0 to 1.
//!
//! The two are complementary counts, so `S_r + S_nr = 1` exactly.
//!
//! δ* is where the relevant curve crosses the desired severity `S`: the
//! largest δ with `S_r(δ) >= S` after a win, the smallest δ with
//! `S_nr(δ) >= S` otherwise. Both are computed from order statistics of the
//! null, without a search.

use std::cmp::Ordering::{Equal, Less};
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::config::check_severity;
use crate::error::{Error, Result};
use crate::outcome::Decision;
use crate::resampling::{min_count_reaching, BootstrapNull};

/// Number of points in the default curve grid.
pub const DEFAULT_GRID_POINTS: usize = 101;

/// `#{t* <= t_obs - δ} / n_b`
pub fn severity_reject(null: &BootstrapNull, t_obs: f64, delta: f64) -> f64 {
    null.count_le(t_obs - delta) as f64 / null.len() as f64
}

/// `#{t* > t_obs - δ} / n_b`
pub fn severity_nonreject(null: &BootstrapNull, t_obs: f64, delta: f64) -> f64 {
    null.count_gt(t_obs - delta) as f64 / null.len() as f64
}

pub fn severity(null: &BootstrapNull, t_obs: f64, delta: f64, decision: Decision) -> f64 {
    match decision {
        Decision::Reject => severity_reject(null, t_obs, delta),
        Decision::NotReject => severity_nonreject(null, t_obs, delta),
    }
}

/// Discrepancy at which the severity for `decision` crosses `s`.
///
/// After a rejection this is `t_obs - quantile(s)`; after a non-rejection it
/// is `t_obs - y`, where `y` is the largest replicate value leaving at least
/// `ceil(s * n_b)` replicates strictly above it. The returned value is
/// nudged by a few ulps so that `t_obs - δ*`, evaluated in floating point,
/// falls on the intended side of each replicate.
pub fn supported_delta(
    null: &BootstrapNull,
    t_obs: f64,
    s: f64,
    decision: Decision,
) -> Result<f64> {
    check_severity(s)?;
    let n = null.len();
    let needed = min_count_reaching(s, n);
    match decision {
        Decision::Reject => {
            // S_r(δ) >= s iff t_obs - δ >= q; take the largest such δ
            let q = null.order_stat(needed);
            let at_or_above = |d: f64| t_obs - d >= q;
            Ok(last_holding(seek(t_obs - q, Dir::Down, at_or_above), Dir::Up, at_or_above))
        }
        Decision::NotReject => {
            // at most `allowed` replicates may sit at or below t_obs - δ
            let allowed = n - needed;
            let y = if allowed == 0 {
                null.min().next_down()
            } else {
                let v = null.order_stat(allowed);
                if null.count_le(v) <= allowed {
                    v
                } else {
                    // v is tied past the allowance; fall back to the next
                    // smaller distinct value, or below the minimum
                    let below = null.count_lt(v);
                    if below == 0 {
                        null.min().next_down()
                    } else {
                        null.order_stat(below)
                    }
                }
            };
            // S_nr(δ) >= s iff t_obs - δ < next, the first replicate above y.
            // Land t_obs - δ as close above y as floats allow; if no δ maps
            // into [y, next), keep the nearest δ that still meets s.
            let at_or_below = null.count_le(y);
            let next = if at_or_below < n {
                null.order_stat(at_or_below + 1)
            } else {
                f64::INFINITY
            };
            let not_below_y = |d: f64| t_obs - d >= y;
            let delta = last_holding(seek(t_obs - y, Dir::Down, not_below_y), Dir::Up, not_below_y);
            Ok(seek(delta, Dir::Up, |d| t_obs - d < next))
        }
    }
}

#[derive(Clone, Copy)]
enum Dir {
    Up,
    Down,
}

/// Position of `x` in the total order of finite floats.
fn float_key(x: f64) -> i64 {
    let b = x.to_bits() as i64;
    b ^ ((((b >> 63) as u64) >> 1) as i64)
}

fn from_key(k: i64) -> f64 {
    f64::from_bits((k ^ ((((k >> 63) as u64) >> 1) as i64)) as u64)
}

/// Starting from `x`, where `holds` is true, the farthest float in direction
/// `dir` up to which `holds` stays true. `holds` must switch at most once
/// along the way. Galloping plus bisection over the float order, so the cost
/// is logarithmic in the number of floats skipped.
fn last_holding(x: f64, dir: Dir, holds: impl Fn(f64) -> bool) -> f64 {
    let (sign, limit) = match dir {
        Dir::Up => (1i128, float_key(f64::MAX) as i128),
        Dir::Down => (-1i128, float_key(f64::MIN) as i128),
    };
    let mut good = float_key(x) as i128;
    let mut step = 1i128;
    let bad = loop {
        let cand = if sign > 0 { (good + step).min(limit) } else { (good - step).max(limit) };
        if cand == good {
            return from_key(good as i64);
        }
        if holds(from_key(cand as i64)) {
            good = cand;
            step *= 2;
        } else {
            break cand;
        }
    };
    let mut bad = bad;
    while (bad - good).abs() > 1 {
        let mid = good + (bad - good) / 2;
        if holds(from_key(mid as i64)) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    from_key(good as i64)
}

/// `x` itself if `holds(x)`, otherwise the nearest float in direction `dir`
/// where `holds` becomes true.
fn seek(x: f64, dir: Dir, holds: impl Fn(f64) -> bool) -> f64 {
    if holds(x) {
        return x;
    }
    let last_failing = last_holding(x, dir, |d| !holds(d));
    let k = float_key(last_failing);
    from_key(match dir {
        Dir::Up => k + 1,
        Dir::Down => k - 1,
    })
}

/// Severity evaluated over a grid of discrepancies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeverityCurve {
    pub deltas: Vec<f64>,
    pub values: Vec<f64>,
    pub decision: Decision,
}

impl SeverityCurve {
    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("delta,severity,decision\n");
        for (d, v) in self.deltas.iter().zip(&self.values) {
            s.push_str(&format!("{d},{v},{}\n", self.decision));
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>, comments: &[String]) -> Result<()> {
        let mut out = std::fs::File::create(path)?;
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        out.write_all(self.to_csv_string().as_bytes())?;
        Ok(())
    }
}

pub fn severity_curve(
    null: &BootstrapNull,
    t_obs: f64,
    decision: Decision,
    delta_grid: &[f64],
) -> Result<SeverityCurve> {
    if delta_grid.is_empty() {
        return Err(Error::InvalidArgument("empty delta grid".into()));
    }
    // NaN counts as out of order
    if delta_grid.windows(2).any(|w| !matches!(w[0].partial_cmp(&w[1]), Some(Less | Equal))) {
        return Err(Error::InvalidArgument("delta grid must be ascending".into()));
    }
    Ok(SeverityCurve {
        deltas: delta_grid.to_vec(),
        values: delta_grid
            .iter()
            .map(|&d| severity(null, t_obs, d, decision))
            .collect(),
        decision,
    })
}

/// Evenly spaced grid centred on `t_obs` that contains every possible
/// crossing `t_obs - t*`.
///
/// The half-width is the larger of the null's range and its largest
/// absolute replicate (equal to the range whenever the null straddles zero);
/// a degenerate null gets half-width 1. A single-point grid is `[t_obs]`.
pub fn default_delta_grid(null: &BootstrapNull, t_obs: f64, points: usize) -> Vec<f64> {
    let (lo, hi) = (null.min(), null.max());
    let mut half = (hi - lo).max(lo.abs()).max(hi.abs());
    if half == 0.0 {
        half = 1.0;
    }
    match points {
        0 => Vec::new(),
        1 => vec![t_obs],
        _ => {
            let step = 2.0 * half / (points - 1) as f64;
            (0..points)
                .map(|i| t_obs - half + step * i as f64)
                .collect()
        }
    }
}

/// Normal-theory counterpart of the bootstrap procedure, for NIID data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalSeverity {
    pub decision: Decision,
    /// `1 - Φ(d)` with `d = mean_diff / std_err`
    pub p_value: f64,
    pub severity: f64,
    /// Closed-form δ* at the requested severity level.
    pub supported_delta: f64,
}

fn std_normal() -> Normal {
    Normal::standard()
}

/// Gaussian severity for a given branch: `Φ((mean_diff - δ) / std_err)`
/// after a rejection, its complement otherwise.
pub fn gaussian_severity(mean_diff: f64, std_err: f64, delta: f64, decision: Decision) -> f64 {
    let phi = std_normal().cdf((mean_diff - delta) / std_err);
    match decision {
        Decision::Reject => phi,
        Decision::NotReject => 1.0 - phi,
    }
}

/// Upper-tail z-test of `mean_diff` followed by Gaussian severity at δ.
///
/// Rejects when `mean_diff / std_err > u_{1-α}`.
pub fn normal_theory_severity(
    mean_diff: f64,
    std_err: f64,
    alpha: f64,
    s: f64,
    delta: f64,
) -> Result<NormalSeverity> {
    if !(std_err > 0.0 && std_err.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "standard error must be > 0, got {std_err}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must be in (0, 1), got {alpha}")));
    }
    check_severity(s)?;
    let normal = std_normal();
    let d = mean_diff / std_err;
    let cutoff = normal.inverse_cdf(1.0 - alpha);
    let decision = if d <= cutoff {
        Decision::NotReject
    } else {
        Decision::Reject
    };
    let supported_delta = match decision {
        Decision::Reject => mean_diff - normal.inverse_cdf(s) * std_err,
        Decision::NotReject => mean_diff - normal.inverse_cdf(1.0 - s) * std_err,
    };
    Ok(NormalSeverity {
        decision,
        p_value: 1.0 - normal.cdf(d),
        severity: gaussian_severity(mean_diff, std_err, delta, decision),
        supported_delta,
    })
}
