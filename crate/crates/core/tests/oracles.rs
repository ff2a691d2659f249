//! Independent brute-force oracles for the distance computation.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use sorlayout_core::*;

/// Floyd-Warshall on the adjacency lengths; quadratic-memory reference
/// implementation, independent of the BFS/Dijkstra path.
fn floyd_warshall(g: &Graph) -> Vec<f64> {
    let n = g.n();
    let mut d = vec![f64::INFINITY; n * n];
    for i in 0..n {
        d[i * n + i] = 0.0;
    }
    for e in g.edges() {
        d[e.u * n + e.v] = e.length;
        d[e.v * n + e.u] = e.length;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i * n + k] + d[k * n + j];
                if via < d[i * n + j] {
                    d[i * n + j] = via;
                }
            }
        }
    }
    d
}

/// Random connected graph: a random spanning tree plus extra random edges,
/// optionally with random lengths.
fn random_connected(rng: &mut ChaCha8Rng, n: usize, extra: usize, weighted: bool) -> Graph {
    let mut pairs = std::collections::HashSet::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        pairs.insert((u, v));
    }
    for _ in 0..extra {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v {
            pairs.insert((u.min(v), u.max(v)));
        }
    }
    let edges = pairs
        .into_iter()
        .map(|(u, v)| Edge {
            u,
            v,
            length: if weighted {
                0.1 + 2.0 * rng.random::<f64>()
            } else {
                1.0
            },
        })
        .collect();
    Graph::new(n, edges).unwrap()
}

#[test]
fn distances_match_floyd_warshall() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for trial in 0..40 {
        let n = rng.random_range(2..=64);
        let weighted = trial % 2 == 1;
        let g = random_connected(&mut rng, n, n / 2, weighted);
        let fast = shortest_path_distances(&g).unwrap();
        let slow = floyd_warshall(&g);
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (fast.get(i, j), slow[i * n + j]);
                assert!(
                    (a - b).abs() <= 1e-12 * (1.0 + b),
                    "n={} ({}, {}): {} vs {}",
                    n,
                    i,
                    j,
                    a,
                    b
                );
            }
        }
    }
}

#[test]
fn unit_graphs_equal_bfs_levels() {
    // On unit-length graphs the distances are integer level counts.
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for _ in 0..20 {
        let n = rng.random_range(2..=64);
        let g = random_connected(&mut rng, n, n, false);
        let d = shortest_path_distances(&g).unwrap();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(d.get(i, j).fract(), 0.0);
            }
        }
    }
}

#[test]
fn triangle_inequality_exhaustive() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for trial in 0..12 {
        let n = rng.random_range(3..=64);
        let g = random_connected(&mut rng, n, n, trial % 2 == 0);
        let d = shortest_path_distances(&g).unwrap();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    assert!(
                        d.get(i, j) <= d.get(i, k) + d.get(k, j) + 1e-12,
                        "triangle violated at ({}, {}, {})",
                        i,
                        j,
                        k
                    );
                }
            }
        }
    }
}
