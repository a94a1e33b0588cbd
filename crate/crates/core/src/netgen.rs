//! Seeded synthetic networks: ring lattices with random shortcuts and
//! preferential-attachment graphs. Both return symmetric 0/1 adjacency
//! matrices with an empty diagonal.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spmat::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Smallw,
    Pref,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub kind: GraphKind,
    pub n: usize,
    /// Ring neighbours per side (small world).
    pub k: usize,
    /// Per-node shortcut probability (small world).
    pub p: f64,
    /// Edges per new node (preferential attachment).
    pub d: usize,
    pub seed: u64,
}

impl GraphSpec {
    pub fn smallw(n: usize, seed: u64) -> Self {
        Self {
            kind: GraphKind::Smallw,
            n,
            k: 2,
            p: 0.1,
            d: 2,
            seed,
        }
    }

    pub fn pref(n: usize, seed: u64) -> Self {
        Self {
            kind: GraphKind::Pref,
            ..Self::smallw(n, seed)
        }
    }

    pub fn generate(&self) -> Result<SparseMatrix> {
        match self.kind {
            GraphKind::Smallw => smallw(self.n, self.k, self.p, self.seed),
            GraphKind::Pref => pref(self.n, self.d, self.seed),
        }
    }
}

fn to_matrix(n: usize, adjacency: &[Vec<u32>]) -> SparseMatrix {
    let entries = adjacency
        .iter()
        .enumerate()
        .flat_map(|(i, nbrs)| nbrs.iter().map(move |&j| (i, j as usize, 1.0)));
    SparseMatrix::from_triplets(n, n, entries).expect("generated indices are in range")
}

/// Ring lattice joining every node to its `k` nearest neighbours on each
/// side; then each node independently, with probability `p`, gains one edge
/// to a uniformly chosen non-neighbour.
pub fn smallw(n: usize, k: usize, p: f64, seed: u64) -> Result<SparseMatrix> {
    if n < 3 {
        return Err(Error::Config(format!("small world needs n >= 3, got {n}")));
    }
    if k < 1 || 2 * k >= n {
        return Err(Error::Config(format!("need 1 <= k < n / 2, got k = {k}, n = {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Config(format!("shortcut probability must lie in [0, 1], got {p}")));
    }
    let mut adj: Vec<Vec<u32>> = (0..n)
        .map(|i| {
            (1..=k)
                .flat_map(|s| [(i + s) % n, (i + n - s) % n])
                .map(|j| j as u32)
                .collect()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..n {
        if !rng.gen_bool(p) || adj[i].len() + 1 >= n {
            continue;
        }
        let j = loop {
            let j = rng.gen_range(0..n);
            if j != i && !adj[i].contains(&(j as u32)) {
                break j;
            }
        };
        adj[i].push(j as u32);
        adj[j].push(i as u32);
    }
    Ok(to_matrix(n, &adj))
}

/// Preferential attachment: a `d`-clique, then every new node links to `d`
/// distinct existing nodes chosen with probability proportional to degree.
pub fn pref(n: usize, d: usize, seed: u64) -> Result<SparseMatrix> {
    if d < 1 {
        return Err(Error::Config("pref needs d >= 1".into()));
    }
    if n < 3 || n <= d {
        return Err(Error::Config(format!("pref needs n >= 3 and n > d, got n = {n}, d = {d}")));
    }
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    // each edge contributes both endpoints, so a uniform pick is degree-biased
    let mut endpoints: Vec<u32> = Vec::with_capacity(2 * n * d);
    for i in 0..d {
        for j in 0..i {
            adj[i].push(j as u32);
            adj[j].push(i as u32);
            endpoints.extend([i as u32, j as u32]);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<u32> = Vec::with_capacity(d);
    for v in d..n {
        chosen.clear();
        while chosen.len() < d {
            let t = if endpoints.is_empty() {
                rng.gen_range(0..v) as u32
            } else {
                endpoints[rng.gen_range(0..endpoints.len())]
            };
            if !chosen.contains(&t) {
                chosen.push(t);
            }
        }
        for &t in &chosen {
            adj[v].push(t);
            adj[t as usize].push(v as u32);
            endpoints.extend([v as u32, t]);
        }
    }
    Ok(to_matrix(n, &adj))
}
