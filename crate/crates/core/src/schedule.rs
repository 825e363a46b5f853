//! Piecewise-constant parameter schedules keyed by step index.

use crate::error::{Error, Result};

/// A piecewise-constant schedule: each piece starts at a step index and
/// holds until the next piece begins (the last piece extends forever).
/// The first piece must start at step 0 so the domain has no gap.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule<T> {
    pieces: Vec<(usize, T)>,
}

impl<T> Schedule<T> {
    pub fn constant(value: T) -> Self {
        Self {
            pieces: vec![(0, value)],
        }
    }

    pub fn new(pieces: Vec<(usize, T)>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Schedule("schedule has no pieces".into()));
        }
        if pieces[0].0 != 0 {
            return Err(Error::Schedule(format!(
                "first piece starts at step {}, leaving a gap before it; schedules must start at 0",
                pieces[0].0
            )));
        }
        for w in pieces.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Schedule(format!(
                    "piece starts must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        Ok(Self { pieces })
    }

    /// Value in effect at step `k`.
    pub fn at(&self, k: usize) -> &T {
        let idx = match self.pieces.binary_search_by_key(&k, |(start, _)| *start) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        &self.pieces[idx].1
    }

    pub fn pieces(&self) -> &[(usize, T)] {
        &self.pieces
    }

    /// Pieces overlapping `[0, horizon]` as (start, end_exclusive, value),
    /// where the last piece is clipped at `horizon + 1`.
    pub fn pieces_within(&self, horizon: usize) -> Vec<(usize, usize, &T)> {
        let mut out = Vec::new();
        for (i, (start, value)) in self.pieces.iter().enumerate() {
            if *start > horizon {
                break;
            }
            let end = self
                .pieces
                .get(i + 1)
                .map_or(horizon + 1, |(next, _)| (*next).min(horizon + 1));
            out.push((*start, end, value));
        }
        out
    }

    pub fn starts(&self) -> impl Iterator<Item = usize> + '_ {
        self.pieces.iter().map(|(s, _)| *s)
    }
}
