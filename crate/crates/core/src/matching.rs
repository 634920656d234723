use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;

/// A set of left/right pairs, injective in both coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matching {
    left: Vec<Option<usize>>,
    right: Vec<Option<usize>>,
    size: usize,
}

impl Matching {
    pub fn empty(n: usize) -> Self {
        Self {
            left: vec![None; n],
            right: vec![None; n],
            size: 0,
        }
    }

    pub fn from_pairs<I>(n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut m = Self::empty(n);
        for (u, v) in pairs {
            if u >= n || v >= n {
                return Err(Error::InvalidMatching(format!(
                    "pair ({u}, {v}) out of range for n = {n}"
                )));
            }
            if m.left[u].is_some() || m.right[v].is_some() {
                return Err(Error::InvalidMatching(format!(
                    "pair ({u}, {v}) reuses a matched vertex"
                )));
            }
            m.insert(u, v);
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.left.len()
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn is_perfect(&self) -> bool {
        self.size == self.n()
    }

    pub fn mate_of_left(&self, u: usize) -> Option<usize> {
        self.left[u]
    }

    pub fn mate_of_right(&self, v: usize) -> Option<usize> {
        self.right[v]
    }

    /// Matched pairs in ascending left order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.left
            .iter()
            .enumerate()
            .filter_map(|(u, v)| v.map(|v| (u, v)))
    }

    /// Matches `u` with `v`, dropping any previous partner of either, and returns the
    /// left vertex previously matched to `v`.
    pub(crate) fn insert(&mut self, u: usize, v: usize) -> Option<usize> {
        if let Some(old_v) = self.left[u].take() {
            self.right[old_v] = None;
            self.size -= 1;
        }
        let evicted = self.right[v].take();
        if let Some(old_u) = evicted {
            self.left[old_u] = None;
            self.size -= 1;
        }
        self.left[u] = Some(v);
        self.right[v] = Some(u);
        self.size += 1;
        evicted
    }

    /// Checks that every pair is an edge of `g` and that both directions agree.
    pub fn validate(&self, g: &BipartiteGraph) -> Result<()> {
        if self.n() != g.n() || self.right.len() != g.n() {
            return Err(Error::InvalidMatching(format!(
                "matching on {} vertices used with a graph on {}",
                self.n(),
                g.n()
            )));
        }
        let mut count = 0;
        for (u, v) in self.pairs() {
            if v >= g.n() || self.right[v] != Some(u) {
                return Err(Error::InvalidMatching(format!(
                    "pair ({u}, {v}) is not mirrored on the right side"
                )));
            }
            if !g.has_edge(u, v) {
                return Err(Error::InvalidMatching(format!("({u}, {v}) is not an edge")));
            }
            count += 1;
        }
        let right_count = self.right.iter().flatten().count();
        if count != self.size || right_count != self.size {
            return Err(Error::InvalidMatching("size bookkeeping is inconsistent".into()));
        }
        Ok(())
    }
}
