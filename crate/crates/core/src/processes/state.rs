use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on enumerated state spaces.
pub const MAX_STATES: u128 = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnumerationMode {
    /// `Σ k_i = N`.
    Conserved,
    /// `Σ k_i ≤ N`.
    DownClosed,
}

/// Enumerated occupation vectors with a reverse index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateIndex {
    pub d: usize,
    pub n: u64,
    pub mode: EnumerationMode,
    states: Vec<Vec<u64>>,
    index: HashMap<Vec<u64>, usize>,
}

impl StateIndex {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Vec<u64>] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &[u64] {
        &self.states[i]
    }

    pub fn position(&self, k: &[u64]) -> Option<usize> {
        self.index.get(k).copied()
    }

    pub fn require(&self, k: &[u64]) -> Result<usize> {
        self.position(k)
            .ok_or_else(|| Error::Domain(format!("state {k:?} is not in the enumerated state space")))
    }
}

/// `C(n + d - 1, d - 1)` in u128, saturating.
fn simplex_count(d: usize, n: u64) -> u128 {
    if d == 0 {
        return u128::from(n == 0);
    }
    let r = (d - 1) as u128;
    let top = n as u128 + r;
    let mut acc: u128 = 1;
    for j in 0..r {
        acc = match acc.checked_mul(top - j) {
            Some(v) => v / (j + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of states the enumeration would produce.
pub fn state_count(d: usize, n: u64, mode: EnumerationMode) -> u128 {
    match mode {
        EnumerationMode::Conserved => simplex_count(d, n),
        // Σ_{j≤N} C(j+d-1, d-1) = C(N+d, d)
        EnumerationMode::DownClosed => simplex_count(d + 1, n),
    }
}

/// Lexicographically ascending compositions of `total` into `d` parts.
fn compositions(d: usize, total: u64, out: &mut Vec<Vec<u64>>) {
    fn rec(prefix: &mut Vec<u64>, d: usize, remaining: u64, out: &mut Vec<Vec<u64>>) {
        if prefix.len() + 1 == d {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for v in 0..=remaining {
            prefix.push(v);
            rec(prefix, d, remaining - v, out);
            prefix.pop();
        }
    }
    if d == 0 {
        if total == 0 {
            out.push(vec![]);
        }
        return;
    }
    rec(&mut Vec::with_capacity(d), d, total, out);
}

/// Enumerates `{k ∈ ℕ^d : Σk = n}` (conserved) or `{Σk ≤ n}` (down-closed).
///
/// Conserved states come in ascending lexicographic order; down-closed states
/// are grouped by total, ascending, each group in lexicographic order.
pub fn enumerate_states(d: usize, n: u64, mode: EnumerationMode) -> Result<StateIndex> {
    if d < 1 {
        return Err(Error::InvalidParameter("d must be >= 1".into()));
    }
    let count = state_count(d, n, mode);
    if count > MAX_STATES {
        return Err(Error::StateSpaceTooLarge(count, MAX_STATES));
    }
    let mut states = Vec::with_capacity(count as usize);
    match mode {
        EnumerationMode::Conserved => compositions(d, n, &mut states),
        EnumerationMode::DownClosed => {
            for total in 0..=n {
                compositions(d, total, &mut states);
            }
        }
    }
    let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    Ok(StateIndex { d, n, mode, states, index })
}
