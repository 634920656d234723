//! Correctness oracles and structural checkers for auction states.
//!
//! Two independent maximum-matching routines are provided so that neither is trusted
//! alone: Hopcroft-Karp and a plain one-path-at-a-time augmenting matcher. The checkers
//! take [`Snapshot`]s and never touch live solver state.

use std::collections::VecDeque;

use crate::auction::Snapshot;
use crate::error::Result;
use crate::graph::BipartiteGraph;
use crate::matching::Matching;

const UNREACHED: u32 = u32::MAX;

/// Maximum-cardinality matching by Hopcroft-Karp.
///
/// Each phase layers the graph with a BFS from all free left vertices and then augments
/// along a maximal set of vertex-disjoint shortest paths. Vertices are visited in
/// ascending order, so the result is a deterministic function of the graph.
pub fn hopcroft_karp(g: &BipartiteGraph) -> Matching {
    let n = g.n();
    let mut mate_u: Vec<Option<usize>> = vec![None; n];
    let mut mate_v: Vec<Option<usize>> = vec![None; n];
    let mut dist = vec![UNREACHED; n];
    let mut queue = VecDeque::with_capacity(n);
    let mut next_edge = vec![0usize; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut vias: Vec<usize> = Vec::new();

    loop {
        // BFS layering
        queue.clear();
        for u in 0..n {
            if mate_u[u].is_none() {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = UNREACHED;
            }
        }
        let mut limit = UNREACHED;
        while let Some(u) = queue.pop_front() {
            if dist[u] >= limit {
                continue;
            }
            for &v in g.neighbors_u(u) {
                match mate_v[v] {
                    None => limit = limit.min(dist[u] + 1),
                    Some(w) if dist[w] == UNREACHED => {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                    Some(_) => {}
                }
            }
        }
        if limit == UNREACHED {
            break;
        }

        // DFS along the layers
        next_edge.iter_mut().for_each(|e| *e = 0);
        for root in 0..n {
            if mate_u[root].is_some() {
                continue;
            }
            stack.clear();
            vias.clear();
            stack.push(root);
            while let Some(&top) = stack.last() {
                let adj = g.neighbors_u(top);
                if next_edge[top] == adj.len() {
                    dist[top] = UNREACHED;
                    stack.pop();
                    vias.pop();
                    continue;
                }
                let v = adj[next_edge[top]];
                next_edge[top] += 1;
                match mate_v[v] {
                    None if dist[top] + 1 == limit => {
                        vias.push(v);
                        for (&u, &v) in stack.iter().zip(&vias) {
                            mate_u[u] = Some(v);
                            mate_v[v] = Some(u);
                        }
                        break;
                    }
                    Some(w) if dist[w] != UNREACHED && dist[w] == dist[top] + 1 => {
                        vias.push(v);
                        stack.push(w);
                    }
                    _ => {}
                }
            }
        }
    }

    to_matching(n, &mate_u)
}

/// Maximum matching by repeated single augmenting-path search (Kuhn's method).
///
/// Slower than [`hopcroft_karp`] and structured differently; used to cross-check it.
pub fn augmenting_path_matching(g: &BipartiteGraph) -> Matching {
    let n = g.n();
    let mut mate_u: Vec<Option<usize>> = vec![None; n];
    let mut mate_v: Vec<Option<usize>> = vec![None; n];
    let mut visited = vec![usize::MAX; n];
    let mut next_edge = vec![0usize; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut vias: Vec<usize> = Vec::new();

    for root in 0..n {
        stack.clear();
        vias.clear();
        stack.push(root);
        next_edge[root] = 0;
        while let Some(&top) = stack.last() {
            let adj = g.neighbors_u(top);
            if next_edge[top] == adj.len() {
                stack.pop();
                vias.pop();
                continue;
            }
            let v = adj[next_edge[top]];
            next_edge[top] += 1;
            if visited[v] == root {
                continue;
            }
            visited[v] = root;
            vias.push(v);
            match mate_v[v] {
                None => {
                    for (&u, &v) in stack.iter().zip(&vias) {
                        mate_u[u] = Some(v);
                        mate_v[v] = Some(u);
                    }
                    break;
                }
                Some(w) => {
                    next_edge[w] = 0;
                    stack.push(w);
                }
            }
        }
    }

    to_matching(n, &mate_u)
}

fn to_matching(n: usize, mate_u: &[Option<usize>]) -> Matching {
    Matching::from_pairs(
        n,
        mate_u
            .iter()
            .enumerate()
            .filter_map(|(u, v)| v.map(|v| (u, v))),
    )
    .expect("matcher keeps both directions in sync")
}

/// Length in edges of the shortest augmenting path for `m`, or `None` if `m` is maximum.
pub fn shortest_augmenting_path(g: &BipartiteGraph, m: &Matching) -> Result<Option<usize>> {
    m.validate(g)?;
    let sources = (0..g.n()).filter(|&u| m.mate_of_left(u).is_none());
    Ok(alternating_bfs(g, m, sources))
}

/// As [`shortest_augmenting_path`], restricted to paths that start at free left vertex `u`.
pub fn shortest_augmenting_path_from(g: &BipartiteGraph, m: &Matching, u: usize) -> Option<usize> {
    if m.mate_of_left(u).is_some() {
        return None;
    }
    alternating_bfs(g, m, std::iter::once(u))
}

fn alternating_bfs<I>(g: &BipartiteGraph, m: &Matching, sources: I) -> Option<usize>
where
    I: IntoIterator<Item = usize>,
{
    let n = g.n();
    let mut depth = vec![UNREACHED; n];
    let mut queue = VecDeque::new();
    for u in sources {
        depth[u] = 0;
        queue.push_back(u);
    }
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors_u(u) {
            if m.mate_of_left(u) == Some(v) {
                continue;
            }
            match m.mate_of_right(v) {
                None => return Some(2 * depth[u] as usize + 1),
                Some(w) if depth[w] == UNREACHED => {
                    depth[w] = depth[u] + 1;
                    queue.push_back(w);
                }
                Some(_) => {}
            }
        }
    }
    None
}

/// For every matched `(u, v0)` with `l = h_{v0}`, every `v` in `n_u` has `h_v ≥ l − 1`.
pub fn check_level_lemma(g: &BipartiteGraph, s: &Snapshot) -> bool {
    s.matching.pairs().all(|(u, v0)| {
        let l = s.h[v0];
        g.neighbors_u(u).iter().all(|&v| s.h[v] + 1 >= l)
    })
}

/// For every free left vertex `u` with `l = min over n_u of h_v`, no augmenting path from
/// `u` is shorter than `2l + 1`.
pub fn check_path_length_lemma(g: &BipartiteGraph, s: &Snapshot) -> bool {
    s.free.iter().all(|&u| {
        let Some(l) = g.neighbors_u(u).iter().map(|&v| s.h[v]).min() else {
            return true;
        };
        match shortest_augmenting_path_from(g, &s.matching, u) {
            Some(len) => len >= 2 * l as usize + 1,
            None => true,
        }
    })
}

/// The nested family `D_l = { v : h_v ≥ l }` for `l = 0..=max h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSets {
    n: usize,
    sets: Vec<Vec<usize>>,
}

impl LevelSets {
    pub fn from_levels(h: &[u32]) -> Self {
        let top = h.iter().copied().max().unwrap_or(0) as usize;
        let sets = (0..=top)
            .map(|l| (0..h.len()).filter(|&v| h[v] as usize >= l).collect())
            .collect();
        Self { n: h.len(), sets }
    }

    /// `D_l`, empty above the highest level.
    pub fn level(&self, l: usize) -> &[usize] {
        self.sets.get(l).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn max_level(&self) -> usize {
        self.sets.len() - 1
    }

    /// `D_0` is everything and `D_{l+1} ⊆ D_l` for all `l`.
    pub fn is_nested(&self) -> bool {
        self.level(0).len() == self.n
            && self
                .sets
                .windows(2)
                .all(|w| w[1].iter().all(|v| w[0].binary_search(v).is_ok()))
    }

    /// `D_l(self) ⊆ D_l(later)` for every `l`.
    pub fn is_subset_of(&self, later: &LevelSets) -> bool {
        self.sets.iter().enumerate().all(|(l, set)| {
            let other = later.level(l);
            set.iter().all(|v| other.binary_search(v).is_ok())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn hk_small_cases() {
        assert_eq!(hopcroft_karp(&BipartiteGraph::complete(3)).len(), 3);
        let shared = BipartiteGraph::from_edges(2, [(0, 0), (1, 0)]).unwrap();
        assert_eq!(hopcroft_karp(&shared).len(), 1);
        assert_eq!(hopcroft_karp(&BipartiteGraph::empty(4)).len(), 0);
        // greedy on u0 -> v0 must be undone through an augmenting path
        let g = BipartiteGraph::from_edges(2, [(0, 0), (0, 1), (1, 0)]).unwrap();
        let m = hopcroft_karp(&g);
        assert!(m.is_perfect());
        m.validate(&g).unwrap();
    }

    #[test]
    fn reference_matcher_small_cases() {
        let g = BipartiteGraph::from_edges(3, [(0, 0), (0, 1), (1, 0), (2, 1), (2, 2)]).unwrap();
        let m = augmenting_path_matching(&g);
        assert_eq!(m.len(), 3);
        m.validate(&g).unwrap();
    }

    #[test]
    fn shortest_path_examples() {
        let k22 = BipartiteGraph::complete(2);
        assert_eq!(shortest_augmenting_path(&k22, &Matching::empty(2)).unwrap(), Some(1));
        let perfect = Matching::from_pairs(2, [(0, 0), (1, 1)]).unwrap();
        assert_eq!(shortest_augmenting_path(&k22, &perfect).unwrap(), None);

        let path = BipartiteGraph::from_edges(2, [(0, 0), (1, 0), (1, 1)]).unwrap();
        let m = Matching::from_pairs(2, [(0, 0)]).unwrap();
        assert_eq!(shortest_augmenting_path(&path, &m).unwrap(), Some(1));

        // u1 - v0 = u0 - v1 is the only augmenting path
        let zig = BipartiteGraph::from_edges(2, [(0, 0), (0, 1), (1, 0)]).unwrap();
        assert_eq!(shortest_augmenting_path(&zig, &m).unwrap(), Some(3));
    }

    #[test]
    fn shortest_path_rejects_non_edges() {
        let g = BipartiteGraph::from_edges(2, [(0, 0)]).unwrap();
        let m = Matching::from_pairs(2, [(1, 1)]).unwrap();
        assert!(matches!(
            shortest_augmenting_path(&g, &m),
            Err(Error::InvalidMatching(_))
        ));
    }

    fn snapshot(h: Vec<u32>, pairs: &[(usize, usize)], free: Vec<usize>) -> Snapshot {
        let n = h.len();
        Snapshot {
            iteration: h.iter().map(|&x| u64::from(x)).sum(),
            h,
            matching: Matching::from_pairs(n, pairs.iter().copied()).unwrap(),
            free,
        }
    }

    #[test]
    fn level_lemma_examples() {
        let g = BipartiteGraph::complete(2);
        assert!(check_level_lemma(&g, &snapshot(vec![0, 0], &[], vec![0, 1])));
        assert!(!check_level_lemma(&g, &snapshot(vec![3, 0], &[(0, 0)], vec![1])));
        assert!(check_level_lemma(&g, &snapshot(vec![1, 0], &[(0, 0)], vec![1])));
    }

    #[test]
    fn path_length_lemma_examples() {
        let g = BipartiteGraph::complete(2);
        assert!(check_path_length_lemma(&g, &snapshot(vec![0, 0], &[], vec![0, 1])));

        // u1 sees only v0 at level 2, but u1 - v0 = u0 - v1 has length 3 < 5
        let zig = BipartiteGraph::from_edges(2, [(0, 0), (0, 1), (1, 0)]).unwrap();
        let bad = snapshot(vec![2, 0], &[(0, 0)], vec![1]);
        assert!(!check_level_lemma(&zig, &bad));
        assert!(!check_path_length_lemma(&zig, &bad));
    }

    #[test]
    fn level_sets_nesting() {
        let d = LevelSets::from_levels(&[2, 0, 1, 3]);
        assert_eq!(d.level(0), &[0, 1, 2, 3]);
        assert_eq!(d.level(2), &[0, 3]);
        assert_eq!(d.level(9), &[] as &[usize]);
        assert_eq!(d.max_level(), 3);
        assert!(d.is_nested());

        let later = LevelSets::from_levels(&[2, 1, 1, 3]);
        assert!(d.is_subset_of(&later));
        assert!(!later.is_subset_of(&d));
    }
}
