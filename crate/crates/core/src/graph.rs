//! Bipartite graphs `G = (U, V, E)` with `|U| = |V| = n`.
//!
//! Adjacency is stored twice in compressed sparse row form: once from the left side
//! (`n_u`, the right neighbours of each left vertex) and once from the right side.
//! Both neighbour lists are sorted ascending and duplicate free, which the auction relies
//! on for reproducible smallest-index tie-breaking.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const HEADER_TAG: &str = "bmcm";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BipartiteGraph {
    n: usize,
    u_offsets: Vec<usize>,
    u_targets: Vec<usize>,
    v_offsets: Vec<usize>,
    v_targets: Vec<usize>,
}

/// Parameters of a `B(n, p)` random bipartite graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphGenSpec {
    n: usize,
    p: f64,
    seed: u64,
}

impl GraphGenSpec {
    pub fn new(n: usize, p: f64, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "edge probability {p} is outside [0, 1]"
            )));
        }
        Ok(Self { n, p, seed })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl BipartiteGraph {
    /// Builds a graph from left-to-right edges `(u, v)`.
    ///
    /// Fails on out-of-range indices and on repeated edges; `line` in those errors is the
    /// 1-based position of the offending edge in `edges`.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        // (v, position) per left vertex so duplicates can be reported by position
        let mut tagged: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (i, (u, v)) in edges.into_iter().enumerate() {
            for index in [u, v] {
                if index >= n {
                    return Err(Error::IndexOutOfRange {
                        line: i + 1,
                        index,
                        n,
                    });
                }
            }
            tagged[u].push((v, i + 1));
        }
        let mut lists = Vec::with_capacity(n);
        for (u, mut list) in tagged.into_iter().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(Error::DuplicateEdge {
                    line: w[1].1,
                    u,
                    v: w[0].0,
                });
            }
            lists.push(list.into_iter().map(|(v, _)| v).collect::<Vec<_>>());
        }
        Ok(Self::from_sorted_lists(n, &lists))
    }

    fn from_sorted_lists(n: usize, lists: &[Vec<usize>]) -> Self {
        let m: usize = lists.iter().map(Vec::len).sum();
        let mut u_offsets = Vec::with_capacity(n + 1);
        let mut u_targets = Vec::with_capacity(m);
        u_offsets.push(0);
        let mut v_degree = vec![0usize; n];
        for list in lists {
            u_targets.extend_from_slice(list);
            u_offsets.push(u_targets.len());
            for &v in list {
                v_degree[v] += 1;
            }
        }

        let mut v_offsets = Vec::with_capacity(n + 1);
        v_offsets.push(0);
        for d in &v_degree {
            v_offsets.push(v_offsets.last().unwrap() + d);
        }
        // Filling in ascending u keeps each right-side list sorted.
        let mut cursor = v_offsets[..n].to_vec();
        let mut v_targets = vec![0usize; m];
        for (u, list) in lists.iter().enumerate() {
            for &v in list {
                v_targets[cursor[v]] = u;
                cursor[v] += 1;
            }
        }

        Self {
            n,
            u_offsets,
            u_targets,
            v_offsets,
            v_targets,
        }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_sorted_lists(n, &vec![Vec::new(); n])
    }

    /// The complete bipartite graph `K_{n,n}`.
    pub fn complete(n: usize) -> Self {
        let lists: Vec<Vec<usize>> = (0..n).map(|_| (0..n).collect()).collect();
        Self::from_sorted_lists(n, &lists)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.u_targets.len()
    }

    /// Right neighbours of left vertex `u`, ascending.
    pub fn neighbors_u(&self, u: usize) -> &[usize] {
        &self.u_targets[self.u_offsets[u]..self.u_offsets[u + 1]]
    }

    /// Left neighbours of right vertex `v`, ascending.
    pub fn neighbors_v(&self, v: usize) -> &[usize] {
        &self.v_targets[self.v_offsets[v]..self.v_offsets[v + 1]]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.neighbors_u(u).binary_search(&v).is_ok()
    }

    /// All edges in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| self.neighbors_u(u).iter().map(move |&v| (u, v)))
    }

    /// Full scan of the structural invariants: indices in range, sorted duplicate-free
    /// lists, and both adjacency directions describing the same edge set.
    pub fn is_consistent(&self) -> bool {
        let n = self.n;
        let sorted_in_range = |list: &[usize]| {
            list.windows(2).all(|w| w[0] < w[1]) && list.iter().all(|&x| x < n)
        };
        if self.u_offsets.len() != n + 1 || self.v_offsets.len() != n + 1 {
            return false;
        }
        if self.u_targets.len() != self.v_targets.len() {
            return false;
        }
        (0..n).all(|u| {
            sorted_in_range(self.neighbors_u(u))
                && self
                    .neighbors_u(u)
                    .iter()
                    .all(|&v| self.neighbors_v(v).binary_search(&u).is_ok())
        }) && (0..n).all(|v| sorted_in_range(self.neighbors_v(v)))
    }
}

/// Draws a graph from `B(n, p)`: every one of the `n²` potential edges is included
/// independently with probability `p`.
///
/// One draw is taken per potential edge in row-major order from a ChaCha8 stream seeded
/// with `spec.seed()`, so equal specs give identical graphs.
pub fn generate_bnp(spec: &GraphGenSpec) -> BipartiteGraph {
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let lists: Vec<Vec<usize>> = (0..n)
        .map(|_| (0..n).filter(|_| rng.gen::<f64>() < spec.p).collect())
        .collect();
    BipartiteGraph::from_sorted_lists(n, &lists)
}

/// Edge retention probability `c·ln(n) / (n·p)` used by [`sparsify`].
///
/// When `p` is `None` it is estimated as `|E| / n²`.
pub fn retention_probability(g: &BipartiteGraph, c: f64, p: Option<f64>) -> Result<f64> {
    if !c.is_finite() || c < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sparsification constant {c} must be finite and non-negative"
        )));
    }
    if g.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let n = g.n() as f64;
    let p = match p {
        Some(p) if p > 0.0 && p <= 1.0 => p,
        Some(p) => {
            return Err(Error::InvalidParameter(format!(
                "model probability {p} must lie in (0, 1]"
            )))
        }
        None => g.edge_count() as f64 / (n * n),
    };
    Ok(c * n.ln() / (n * p))
}

/// Keeps each edge of `g` independently with probability `c·ln(n) / (n·p)`.
///
/// If that probability is at least one the graph is returned unchanged. The number of
/// retained edges is `Binomial(|E|, q)`.
pub fn sparsify(g: &BipartiteGraph, c: f64, seed: u64, p: Option<f64>) -> Result<BipartiteGraph> {
    let q = retention_probability(g, c, p)?;
    if q >= 1.0 {
        return Ok(g.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lists: Vec<Vec<usize>> = (0..g.n())
        .map(|u| {
            g.neighbors_u(u)
                .iter()
                .copied()
                .filter(|_| rng.gen::<f64>() < q)
                .collect()
        })
        .collect();
    Ok(BipartiteGraph::from_sorted_lists(g.n(), &lists))
}

/// Serializes `g` in the line-oriented text format:
///
/// ```text
/// bmcm <n> <edge_count>
/// <u> <v>
/// ...
/// ```
pub fn to_text(g: &BipartiteGraph) -> String {
    let mut out = String::with_capacity(16 + 12 * g.edge_count());
    writeln!(out, "{HEADER_TAG} {} {}", g.n(), g.edge_count()).unwrap();
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}").unwrap();
    }
    out
}

pub fn parse_text(text: &str) -> Result<BipartiteGraph> {
    let mut header: Option<(usize, usize)> = None;
    let mut lists: Vec<Vec<usize>> = Vec::new();
    let mut seen = 0usize;
    let mut last_line = 0usize;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let parse_index = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("expected a non-negative integer, found {s:?}"),
            })
        };

        let Some((n, _)) = header else {
            if fields.len() != 3 || fields[0] != HEADER_TAG {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected header `{HEADER_TAG} <n> <edge_count>`"),
                });
            }
            let n = parse_index(fields[1])?;
            let m = parse_index(fields[2])?;
            header = Some((n, m));
            lists = vec![Vec::new(); n];
            continue;
        };

        if fields.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                message: "expected an edge `<u> <v>`".into(),
            });
        }
        let u = parse_index(fields[0])?;
        let v = parse_index(fields[1])?;
        for index in [u, v] {
            if index >= n {
                return Err(Error::IndexOutOfRange {
                    line: line_no,
                    index,
                    n,
                });
            }
        }
        if lists[u].contains(&v) {
            return Err(Error::DuplicateEdge { line: line_no, u, v });
        }
        lists[u].push(v);
        seen += 1;
    }

    let Some((n, m)) = header else {
        return Err(Error::Parse {
            line: last_line.max(1),
            message: "missing header".into(),
        });
    };
    if seen != m {
        return Err(Error::Parse {
            line: last_line.max(1),
            message: format!("header declares {m} edges but {seen} were listed"),
        });
    }
    for list in &mut lists {
        list.sort_unstable();
    }
    Ok(BipartiteGraph::from_sorted_lists(n, &lists))
}

pub fn write_graph(g: &BipartiteGraph, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_text(g))?;
    Ok(())
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<BipartiteGraph> {
    parse_text(&fs::read_to_string(path)?)
}
