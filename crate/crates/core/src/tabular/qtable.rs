use std::fmt;

use crate::error::{Error, Result};

/// Dense state-action value table, row-major `[state][action]`.
#[derive(Clone, PartialEq)]
pub struct QTable {
    n_states: usize,
    n_actions: usize,
    values: Vec<f64>,
}

impl QTable {
    pub fn zeros(n_states: usize, n_actions: usize) -> Self {
        QTable {
            n_states,
            n_actions,
            values: vec![0.0; n_states * n_actions],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_states = rows.len();
        let n_actions = rows.first().map_or(0, Vec::len);
        if n_states == 0 || n_actions == 0 {
            return Err(Error::invalid("q-table needs at least one state and one action"));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n_actions) {
            return Err(Error::shape(n_actions, bad.len()));
        }
        Ok(QTable {
            n_states,
            n_actions,
            values: rows.into_iter().flatten().collect(),
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    #[inline]
    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.values[s * self.n_actions + a]
    }

    #[inline]
    pub fn set(&mut self, s: usize, a: usize, v: f64) {
        self.values[s * self.n_actions + a] = v;
    }

    #[inline]
    pub fn row(&self, s: usize) -> &[f64] {
        &self.values[s * self.n_actions..(s + 1) * self.n_actions]
    }

    pub fn row_mut(&mut self, s: usize) -> &mut [f64] {
        &mut self.values[s * self.n_actions..(s + 1) * self.n_actions]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `max_a Q[s, a]`.
    pub fn max_value(&self, s: usize) -> f64 {
        self.row(s).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Greedy action in `s`; ties go to the lowest action index.
    pub fn greedy_action(&self, s: usize) -> usize {
        argmax_lowest(self.row(s))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub(crate) fn check_index(&self, s: usize, a: usize) -> Result<()> {
        if s >= self.n_states {
            return Err(Error::IndexOutOfRange {
                what: "state",
                index: s,
                size: self.n_states,
            });
        }
        if a >= self.n_actions {
            return Err(Error::IndexOutOfRange {
                what: "action",
                index: a,
                size: self.n_actions,
            });
        }
        Ok(())
    }
}

impl fmt::Debug for QTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = (0..self.n_states).map(|s| self.row(s)).collect();
        f.debug_struct("QTable").field("values", &rows).finish()
    }
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax_lowest(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// `max |Q - Q*|` over all entries.
pub fn sup_error(q: &QTable, q_star: &QTable) -> Result<f64> {
    if q.n_states != q_star.n_states || q.n_actions != q_star.n_actions {
        return Err(Error::shape(
            format!("{}x{}", q_star.n_states, q_star.n_actions),
            format!("{}x{}", q.n_states, q.n_actions),
        ));
    }
    Ok(q.values
        .iter()
        .zip(&q_star.values)
        .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sup_error_of_identical_tables_is_zero() {
        let q = QTable::from_rows(vec![vec![1.0, -2.0], vec![0.5, 3.0]]).unwrap();
        assert_eq!(sup_error(&q, &q).unwrap(), 0.0);
    }

    #[test]
    fn sup_error_sees_single_perturbation() {
        let q = QTable::from_rows(vec![vec![1.0, -2.0], vec![0.5, 3.0]]).unwrap();
        let mut p = q.clone();
        p.set(1, 0, 0.5 + 0.25);
        assert_eq!(sup_error(&p, &q).unwrap(), 0.25);
    }

    #[test]
    fn sup_error_matches_exhaustive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let (ns, na) = (rng.gen_range(1..7), rng.gen_range(1..5));
            let mut a = QTable::zeros(ns, na);
            let mut b = QTable::zeros(ns, na);
            let mut expected = 0.0f64;
            for s in 0..ns {
                for act in 0..na {
                    let (x, y) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
                    a.set(s, act, x);
                    b.set(s, act, y);
                    if (x - y).abs() > expected {
                        expected = (x - y).abs();
                    }
                }
            }
            assert_eq!(sup_error(&a, &b).unwrap(), expected);
        }
    }

    #[test]
    fn sup_error_rejects_shape_mismatch() {
        assert!(matches!(
            sup_error(&QTable::zeros(2, 2), &QTable::zeros(2, 3)),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn greedy_breaks_ties_low() {
        let q = QTable::from_rows(vec![vec![0.0, 0.0, 0.0], vec![1.0, 3.0, 3.0]]).unwrap();
        assert_eq!(q.greedy_action(0), 0);
        assert_eq!(q.greedy_action(1), 1);
    }
}
