//! Benjamini–Hochberg step-up adjustment.

use std::collections::HashSet;
use std::hash::Hash;

use crate::config::BhScope;
use crate::error::{Error, Result};

/// A family of raw p-values adjusted together.
#[derive(Debug, Clone, PartialEq)]
pub struct PValueFamily<K> {
    pub entries: Vec<(K, f64)>,
    pub scope: BhScope,
}

impl<K: Ord + Hash + Clone> PValueFamily<K> {
    pub fn new(entries: Vec<(K, f64)>, scope: BhScope) -> Self {
        PValueFamily { entries, scope }
    }

    pub fn adjust(&self) -> Result<Vec<(K, f64)>> {
        bh_adjust(&self.entries)
    }
}

/// BH-adjusted p-values, returned in input order.
///
/// With `m` entries sorted ascending as `p_(1..m)` (ties broken by key),
/// `adj_(i) = max(p_(i), min(1, min_{j >= i} m * p_(j) / j))`; the outer
/// `max` only guards against `m * p / m` rounding below `p`.
pub fn bh_adjust<K: Ord + Hash + Clone>(entries: &[(K, f64)]) -> Result<Vec<(K, f64)>> {
    if entries.is_empty() {
        return Err(Error::InvalidArgument("empty p-value family".into()));
    }
    let mut keys = HashSet::with_capacity(entries.len());
    for (k, p) in entries {
        if !(0.0..=1.0).contains(p) {
            return Err(Error::InvalidArgument(format!("p-value {p} outside [0, 1]")));
        }
        if !keys.insert(k) {
            return Err(Error::InvalidArgument("duplicate key in p-value family".into()));
        }
    }

    let m = entries.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        entries[a]
            .1
            .total_cmp(&entries[b].1)
            .then_with(|| entries[a].0.cmp(&entries[b].0))
    });

    let mut adjusted = vec![0.0; m];
    let mut running = 1.0f64;
    for (pos, &idx) in order.iter().enumerate().rev() {
        let rank = pos + 1;
        let scaled = m as f64 * entries[idx].1 / rank as f64;
        running = running.min(scaled);
        adjusted[idx] = running.max(entries[idx].1);
    }

    Ok(entries
        .iter()
        .zip(adjusted)
        .map(|((k, _), p)| (k.clone(), p))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn adj(ps: &[f64]) -> Vec<f64> {
        let entries: Vec<(usize, f64)> = ps.iter().copied().enumerate().collect();
        bh_adjust(&entries).unwrap().into_iter().map(|(_, p)| p).collect()
    }

    #[test]
    fn single_entry_unchanged() {
        assert_eq!(adj(&[0.03]), vec![0.03]);
    }

    #[test]
    fn constant_vector_unchanged() {
        assert_eq!(adj(&[0.04; 10]), vec![0.04; 10]);
    }

    #[test]
    fn hand_worked_step_up() {
        let got = adj(&[0.05, 0.01, 0.02]);
        let want = [0.05, 0.03, 0.03];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-15, "{got:?}");
        }
    }

    #[test]
    fn clips_at_one() {
        assert_eq!(adj(&[0.9, 0.95, 1.0]), vec![1.0, 1.0, 1.0]);
        assert_eq!(adj(&[0.6, 0.0]), vec![0.6, 0.0]);
    }

    #[test]
    fn rejects_bad_families() {
        assert!(bh_adjust::<u8>(&[]).is_err());
        assert!(bh_adjust(&[(1, 1.2)]).is_err());
        assert!(bh_adjust(&[(1, f64::NAN)]).is_err());
        assert!(bh_adjust(&[(1, 0.1), (1, 0.2)]).is_err());
    }

    proptest! {
        #[test]
        fn permutation_equivariant(ps in prop::collection::vec(0.0f64..=1.0, 1..40), rot in 0usize..40) {
            let entries: Vec<(usize, f64)> = ps.iter().copied().enumerate().collect();
            let base = bh_adjust(&entries).unwrap();
            let mut shuffled = entries.clone();
            let r = rot % shuffled.len();
            shuffled.rotate_left(r);
            shuffled.reverse();
            let moved = bh_adjust(&shuffled).unwrap();
            for (k, p) in moved {
                prop_assert_eq!(p.to_bits(), base[k].1.to_bits());
            }
        }

        #[test]
        fn monotone_and_dominating(ps in prop::collection::vec(0.0f64..=1.0, 1..40)) {
            let a = adj(&ps);
            for i in 0..ps.len() {
                prop_assert!(a[i] >= ps[i]);
                prop_assert!(a[i] <= 1.0);
                for j in 0..ps.len() {
                    if ps[i] <= ps[j] {
                        prop_assert!(a[i] <= a[j]);
                    }
                }
            }
        }
    }
}
