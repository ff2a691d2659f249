//! Graph representation, benchmark-graph generators, and all-pairs
//! shortest-path computation of ideal distances.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Undirected edge between `u` and `v` with a positive length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub length: f64,
}

impl Edge {
    pub fn unit(u: usize, v: usize) -> Self {
        Edge { u, v, length: 1.0 }
    }
}

/// An undirected graph with `n` vertices (ids `0..n`) and positive edge lengths.
///
/// Construction validates well-formedness: ids in range, no self-loops, no
/// duplicate undirected pairs, finite positive lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph {
                reason: "vertex count must be positive".into(),
            });
        }
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        for e in &edges {
            if e.u >= n || e.v >= n {
                return Err(Error::InvalidGraph {
                    reason: format!("edge {}-{} out of range for {} vertices", e.u, e.v, n),
                });
            }
            if e.u == e.v {
                return Err(Error::SelfLoop { vertex: e.u });
            }
            if !e.length.is_finite() || e.length <= 0.0 {
                return Err(Error::InvalidGraph {
                    reason: format!("edge {}-{} has nonpositive length {}", e.u, e.v, e.length),
                });
            }
            let key = (e.u.min(e.v), e.u.max(e.v));
            if !seen.insert(key) {
                return Err(Error::DuplicateEdge { u: key.0, v: key.1 });
            }
        }
        Ok(Graph { n, edges })
    }

    /// Convenience constructor for unit-length edges.
    pub fn unit(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::new(n, pairs.iter().map(|&(u, v)| Edge::unit(u, v)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// True when every edge has length exactly 1.
    pub fn is_unit_length(&self) -> bool {
        self.edges.iter().all(|e| e.length == 1.0)
    }

    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.u].push((e.v, e.length));
            adj[e.v].push((e.u, e.length));
        }
        adj
    }

    /// Number of connected components.
    pub fn component_count(&self) -> usize {
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut components = 0;
        let mut stack = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &(w, _) in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        components
    }
}

/// Succeeds iff the graph is connected; layout is refused otherwise.
pub fn validate_connected(g: &Graph) -> Result<()> {
    match g.component_count() {
        1 => Ok(()),
        components => Err(Error::DisconnectedGraph { components }),
    }
}

/// Symmetric matrix of ideal pairwise distances: zero diagonal, positive
/// finite off-diagonal entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(n: usize, d: Vec<f64>) -> Result<Self> {
        if d.len() != n * n {
            return Err(Error::InvalidGraph {
                reason: format!("distance matrix storage {} != {}x{}", d.len(), n, n),
            });
        }
        for i in 0..n {
            if d[i * n + i] != 0.0 {
                return Err(Error::InvalidGraph {
                    reason: format!("distance matrix diagonal entry {} is nonzero", i),
                });
            }
            for j in 0..i {
                let v = d[i * n + j];
                if v != d[j * n + i] {
                    return Err(Error::InvalidGraph {
                        reason: format!("distance matrix not symmetric at ({}, {})", i, j),
                    });
                }
                if !v.is_finite() || v <= 0.0 {
                    return Err(Error::InvalidGraph {
                        reason: format!("distance d({}, {}) = {} must be positive finite", i, j, v),
                    });
                }
            }
        }
        Ok(DistanceMatrix { n, d })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    #[inline]
    pub(crate) fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }
}

/// All-pairs shortest-path ideal distances: BFS level counts when every edge
/// has unit length, Dijkstra otherwise.
pub fn shortest_path_distances(g: &Graph) -> Result<DistanceMatrix> {
    validate_connected(g)?;
    let n = g.n();
    let adj = g.adjacency();
    let mut d = vec![0.0; n * n];
    if g.is_unit_length() {
        let mut queue = std::collections::VecDeque::new();
        for src in 0..n {
            let row = &mut d[src * n..(src + 1) * n];
            let mut level = vec![usize::MAX; n];
            level[src] = 0;
            queue.clear();
            queue.push_back(src);
            while let Some(v) = queue.pop_front() {
                for &(w, _) in &adj[v] {
                    if level[w] == usize::MAX {
                        level[w] = level[v] + 1;
                        queue.push_back(w);
                    }
                }
            }
            for (j, &l) in level.iter().enumerate() {
                row[j] = l as f64;
            }
        }
    } else {
        for src in 0..n {
            let row = dijkstra(&adj, src);
            d[src * n..(src + 1) * n].copy_from_slice(&row);
        }
        // Opposite-direction runs sum the same path in different orders and
        // can disagree by an ulp; force exact symmetry from the upper triangle.
        for i in 0..n {
            for j in (i + 1)..n {
                d[j * n + i] = d[i * n + j];
            }
        }
    }
    DistanceMatrix::new(n, d)
}

#[derive(PartialEq)]
struct HeapEntry {
    dist: f64,
    vertex: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Min-heap on distance; distances are finite so partial_cmp never fails.
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap()
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(adj: &[Vec<(usize, f64)>], src: usize) -> Vec<f64> {
    let n = adj.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(HeapEntry {
        dist: 0.0,
        vertex: src,
    });
    while let Some(HeapEntry { dist: dv, vertex: v }) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        for &(w, len) in &adj[v] {
            let cand = dv + len;
            if cand < dist[w] {
                dist[w] = cand;
                heap.push(HeapEntry {
                    dist: cand,
                    vertex: w,
                });
            }
        }
    }
    dist
}

/// "Band" benchmark graph: a 2-row ladder (2 x ceil(n/2) grid strip)
/// truncated to exactly `n` vertices, unit edge lengths.
///
/// Vertex ids are column-major: column c holds ids 2c and 2c+1.
pub fn generate_band(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidSize {
            family: "band",
            size: n,
            min: 2,
        });
    }
    let cols = n.div_ceil(2);
    let id = |r: usize, c: usize| 2 * c + r;
    let mut pairs = Vec::new();
    for c in 0..cols {
        // rung
        if id(1, c) < n {
            pairs.push((id(0, c), id(1, c)));
        }
        // rails to the next column
        if c + 1 < cols {
            for r in 0..2 {
                if id(r, c + 1) < n {
                    pairs.push((id(r, c), id(r, c + 1)));
                }
            }
        }
    }
    Graph::unit(n, &pairs)
}

/// "Grid" benchmark graph: a near-square r x c mesh with r = floor(sqrt(n)),
/// c = ceil(n/r), truncated to exactly `n` vertices, unit edge lengths.
///
/// Vertex ids are row-major.
pub fn generate_grid(n: usize) -> Result<Graph> {
    if n < 1 {
        return Err(Error::InvalidSize {
            family: "grid",
            size: n,
            min: 1,
        });
    }
    let rows = (n as f64).sqrt().floor() as usize;
    let cols = n.div_ceil(rows);
    let id = |r: usize, c: usize| r * cols + c;
    let mut pairs = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = id(r, c);
            if v >= n {
                break;
            }
            if c + 1 < cols && id(r, c + 1) < n {
                pairs.push((v, id(r, c + 1)));
            }
            if r + 1 < rows && id(r + 1, c) < n {
                pairs.push((v, id(r + 1, c)));
            }
        }
    }
    Graph::unit(n, &pairs)
}
