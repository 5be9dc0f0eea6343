//! Q-learning and Q-SMR update rules on a single transition.
//!
//! All updates touch only the entry `(s, a)` of the transition.

use super::QTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TabularTransition {
    pub s: usize,
    pub a: usize,
    pub r: f64,
    pub s_next: usize,
}

/// Intermediate values of one SMR inner loop.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SmrTrace {
    /// `Q^(0) .. Q^(M)` at `(s, a)`; `Q^(0)` is the pre-update value.
    pub intermediates: Vec<f64>,
    /// Empirical Bellman targets `T Q^(0) .. T Q^(M-1)` at `(s, a)`.
    pub targets: Vec<f64>,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("learning rate must lie in [0, 1], got {alpha}")));
    }
    Ok(())
}

fn check_ratio(m: usize) -> Result<()> {
    if m < 1 {
        return Err(Error::invalid("SMR ratio M must be at least 1"));
    }
    Ok(())
}

fn check_transition(q: &QTable, tr: &TabularTransition) -> Result<()> {
    q.check_index(tr.s, tr.a)?;
    q.check_index(tr.s_next, 0)
}

/// Empirical Bellman target `r + gamma * max_a' Q[s', a']`.
#[inline]
pub fn empirical_target(q: &QTable, tr: &TabularTransition, gamma: f64) -> f64 {
    tr.r + gamma * q.max_value(tr.s_next)
}

/// One Q-learning step: `Q[s,a] <- (1 - alpha) Q[s,a] + alpha (r + gamma max Q[s',.])`.
pub fn q_update(q: &mut QTable, tr: &TabularTransition, alpha: f64, gamma: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_transition(q, tr)?;
    Ok(apply_q_update(q, tr, alpha, gamma))
}

#[inline]
pub(crate) fn apply_q_update(q: &mut QTable, tr: &TabularTransition, alpha: f64, gamma: f64) -> f64 {
    let target = empirical_target(q, tr, gamma);
    let v = (1.0 - alpha) * q.get(tr.s, tr.a) + alpha * target;
    q.set(tr.s, tr.a, v);
    v
}

/// The literal Q-SMR inner loop: `M` Q-learning steps on the same
/// transition. Optionally records every intermediate value and target.
pub fn q_smr_loop_update(
    q: &mut QTable,
    tr: &TabularTransition,
    alpha: f64,
    gamma: f64,
    m: usize,
    mut trace: Option<&mut SmrTrace>,
) -> Result<f64> {
    check_alpha(alpha)?;
    check_ratio(m)?;
    check_transition(q, tr)?;
    if let Some(t) = trace.as_deref_mut() {
        t.intermediates.clear();
        t.targets.clear();
        t.intermediates.push(q.get(tr.s, tr.a));
    }
    let mut v = q.get(tr.s, tr.a);
    for _ in 0..m {
        if let Some(t) = trace.as_deref_mut() {
            t.targets.push(empirical_target(q, tr, gamma));
        }
        v = apply_q_update(q, tr, alpha, gamma);
        if let Some(t) = trace.as_deref_mut() {
            t.intermediates.push(v);
        }
    }
    Ok(v)
}

/// Q-SMR through its expanded form
///
/// `Q' = (1-alpha)^M Q + sum_{i=0}^{M-1} alpha (1-alpha)^i T Q^(M-1-i)`.
///
/// The targets `T Q^(j)` depend on the intermediate values whenever
/// `s' = s` (the max may move between iterations), so they are materialized
/// by a shadow recursion on a scalar rather than read off a closed form.
pub fn q_smr_expansion(
    q: &mut QTable,
    tr: &TabularTransition,
    alpha: f64,
    gamma: f64,
    m: usize,
) -> Result<(f64, SmrTrace)> {
    check_alpha(alpha)?;
    check_ratio(m)?;
    check_transition(q, tr)?;

    let q0 = q.get(tr.s, tr.a);
    let trace = shadow_trace(q, tr, alpha, gamma, m);
    let keep = 1.0 - alpha;
    let mut value = keep.powi(m as i32) * q0;
    for i in 0..m {
        value += alpha * keep.powi(i as i32) * trace.targets[m - 1 - i];
    }
    q.set(tr.s, tr.a, value);
    Ok((value, trace))
}

/// Intermediate values and targets without mutating `q`.
fn shadow_trace(q: &QTable, tr: &TabularTransition, alpha: f64, gamma: f64, m: usize) -> SmrTrace {
    let mut trace = SmrTrace {
        intermediates: Vec::with_capacity(m + 1),
        targets: Vec::with_capacity(m),
    };
    let mut current = q.get(tr.s, tr.a);
    trace.intermediates.push(current);
    // max over the successor row with (s, a) replaced by the current value
    let row_max_without = |row: &[f64], skip: Option<usize>| {
        row.iter()
            .enumerate()
            .filter(|&(b, _)| Some(b) != skip)
            .map(|(_, &v)| v)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let self_loop = tr.s_next == tr.s;
    let rest = row_max_without(q.row(tr.s_next), self_loop.then_some(tr.a));
    for _ in 0..m {
        let next_max = if self_loop { rest.max(current) } else { rest };
        let target = tr.r + gamma * next_max;
        trace.targets.push(target);
        current = (1.0 - alpha) * current + alpha * target;
        trace.intermediates.push(current);
    }
    trace
}

/// Effective single-step learning rate `1 - (1 - alpha)^M` of `M` reuses.
///
/// Evaluated as the geometric sum `alpha * sum_{i<M} (1 - alpha)^i`, which
/// is exactly `alpha` for `M = 1` and avoids cancellation for small `alpha`.
pub fn effective_rate(alpha: f64, m: usize) -> Result<f64> {
    check_alpha(alpha)?;
    check_ratio(m)?;
    let keep = 1.0 - alpha;
    let series = (1..m).fold(1.0, |acc, _| 1.0 + keep * acc);
    Ok(alpha * series)
}

/// Closed-form Q-SMR update, valid when the transition leaves its state:
/// `Q' = (1-alpha)^M Q + (1 - (1-alpha)^M) (r + gamma max Q[s',.])`.
pub fn q_smr_nonreturnable_update(
    q: &mut QTable,
    tr: &TabularTransition,
    alpha: f64,
    gamma: f64,
    m: usize,
) -> Result<f64> {
    check_alpha(alpha)?;
    check_ratio(m)?;
    check_transition(q, tr)?;
    if tr.s_next == tr.s {
        return Err(Error::invalid(format!(
            "closed-form update needs s' != s, got s = s' = {}",
            tr.s
        )));
    }
    let keep = (1.0 - alpha).powi(m as i32);
    let v = keep * q.get(tr.s, tr.a) + effective_rate(alpha, m)? * empirical_target(q, tr, gamma);
    q.set(tr.s, tr.a, v);
    Ok(v)
}
