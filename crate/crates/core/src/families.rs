//! Deterministic and seeded chain generators: cycles, complete graphs,
//! hypercubes, random regular graphs (configuration model), random
//! symmetric-support chains, and simple random walk from an edge list.
//!
//! Random families use ChaCha8 seeded from a 64-bit integer, so the same
//! spec always yields the same chain.

use crate::chain::Chain;
use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

pub const CONFIG_MODEL_MAX_ROUNDS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyId {
    LazyTwoState,
    Cycle,
    Complete,
    Hypercube,
    RandomRegular,
    RandomSymmetric,
    SrwFromEdgelist,
}

impl std::str::FromStr for FamilyId {
    type Err = Error;
    fn from_str(s: &str) -> Result<FamilyId> {
        Ok(match s {
            "lazy-two-state" => FamilyId::LazyTwoState,
            "cycle" => FamilyId::Cycle,
            "complete" => FamilyId::Complete,
            "hypercube" => FamilyId::Hypercube,
            "random-regular" => FamilyId::RandomRegular,
            "random-symmetric" => FamilyId::RandomSymmetric,
            "srw-from-edgelist" => FamilyId::SrwFromEdgelist,
            other => return Err(Error::InvalidParams(format!("unknown family `{other}`"))),
        })
    }
}

impl std::fmt::Display for FamilyId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FamilyId::LazyTwoState => "lazy-two-state",
            FamilyId::Cycle => "cycle",
            FamilyId::Complete => "complete",
            FamilyId::Hypercube => "hypercube",
            FamilyId::RandomRegular => "random-regular",
            FamilyId::RandomSymmetric => "random-symmetric",
            FamilyId::SrwFromEdgelist => "srw-from-edgelist",
        };
        f.write_str(s)
    }
}

/// Everything needed to generate one family member deterministically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: FamilyId,
    /// State count, or dimension for the hypercube.
    pub size: usize,
    /// Degree for random-regular.
    pub degree: usize,
    /// Edge density for random-symmetric.
    pub density: f64,
    /// Laziness: K becomes (1-alpha) K + alpha I.
    pub alpha: f64,
    pub seed: u64,
    /// Undirected edge list for srw-from-edgelist, as (u, v) pairs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(usize, usize)>>,
}

impl FamilySpec {
    pub fn new(family: FamilyId, size: usize) -> FamilySpec {
        FamilySpec {
            family,
            size,
            degree: 3,
            density: 0.3,
            alpha: 0.0,
            seed: 0,
            edges: None,
        }
    }
}

fn lazify(chain: Chain, alpha: f64) -> Result<Chain> {
    if alpha == 0.0 {
        return Ok(chain);
    }
    let n = chain.n();
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|x| {
            let mut row: Vec<(usize, f64)> = chain
                .row(x)
                .iter()
                .map(|&(y, v)| (y, (1.0 - alpha) * v))
                .collect();
            match row.binary_search_by_key(&x, |&(j, _)| j) {
                Ok(k) => row[k].1 += alpha,
                Err(k) => row.insert(k, (x, alpha)),
            }
            row
        })
        .collect();
    Chain::from_sparse_rows(n, rows, true)
}

fn srw_from_adjacency(n: usize, adj: &[BTreeSet<usize>]) -> Result<Chain> {
    let rows: Vec<Vec<(usize, f64)>> = adj
        .iter()
        .map(|nb| {
            let d = nb.len() as f64;
            nb.iter().map(|&y| (y, 1.0 / d)).collect()
        })
        .collect();
    Chain::from_sparse_rows(n, rows, false)
}

fn cycle_chain(n: usize, alpha: f64) -> Result<Chain> {
    let mut rows = vec![Vec::new(); n];
    let half = (1.0 - alpha) / 2.0;
    for (x, row) in rows.iter_mut().enumerate() {
        let up = (x + 1) % n;
        let down = (x + n - 1) % n;
        if up == down {
            // n = 2: both neighbors coincide.
            row.push((up, 1.0 - alpha));
        } else {
            row.push((up, half));
            row.push((down, half));
        }
        if alpha > 0.0 {
            row.push((x, alpha));
        }
        row.sort_by_key(|&(j, _)| j);
    }
    Chain::from_sparse_rows(n, rows, false)
}

fn complete_chain(n: usize) -> Result<Chain> {
    let off = 1.0 / (n - 1) as f64;
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|x| (0..n).filter(|&y| y != x).map(|y| (y, off)).collect())
        .collect();
    Chain::from_sparse_rows(n, rows, false)
}

fn hypercube_chain(dim: usize) -> Result<Chain> {
    let n = 1usize << dim;
    let step = 1.0 / dim as f64;
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|x| (0..dim).map(|b| (x ^ (1 << b), step)).collect())
        .collect();
    Chain::from_sparse_rows(n, rows, false)
}

/// Configuration model with rejection of self-loops, multi-edges, and
/// disconnected outcomes, followed by the SRW transition matrix.
fn random_regular_chain(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<Chain> {
    if n * d % 2 != 0 || d < 3 {
        return Err(Error::InvalidParams(format!(
            "random-regular needs n*d even and d >= 3, got n={n}, d={d}"
        )));
    }
    'rounds: for _ in 0..CONFIG_MODEL_MAX_ROUNDS {
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
        stubs.shuffle(rng);
        let mut adj = vec![BTreeSet::new(); n];
        for pair in stubs.chunks(2) {
            let (u, v) = (pair[0], pair[1]);
            if u == v || adj[u].contains(&v) {
                continue 'rounds;
            }
            adj[u].insert(v);
            adj[v].insert(u);
        }
        match srw_from_adjacency(n, &adj) {
            Ok(chain) => return Ok(chain),
            Err(Error::NotIrreducible { .. }) => continue 'rounds,
            Err(e) => return Err(e),
        }
    }
    Err(Error::GenerationFailed(format!(
        "configuration model exceeded {CONFIG_MODEL_MAX_ROUNDS} rejection rounds (n={n}, d={d})"
    )))
}

/// Random symmetric support (a random tree for connectivity plus extra
/// pairs at the given density) with independent positive weights per
/// direction, rows normalized.
fn random_symmetric(n: usize, density: f64, rng: &mut ChaCha8Rng) -> Result<Chain> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidParams(format!("density {density} outside [0,1]")));
    }
    let mut adj = vec![BTreeSet::new(); n];
    for v in 1..n {
        let u = rng.gen_range(0..v);
        adj[u].insert(v);
        adj[v].insert(u);
    }
    for x in 0..n {
        for y in (x + 1)..n {
            if !adj[x].contains(&y) && rng.gen::<f64>() < density {
                adj[x].insert(y);
                adj[y].insert(x);
            }
        }
    }
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    for x in 0..n {
        let mut row: Vec<(usize, f64)> = adj[x]
            .iter()
            .map(|&y| (y, rng.gen_range(0.5..1.5)))
            .collect();
        let sum: f64 = row.iter().map(|&(_, w)| w).sum();
        for e in row.iter_mut() {
            e.1 /= sum;
        }
        // Exact row sum 1: fold rounding into the largest entry.
        let err: f64 = 1.0 - row.iter().map(|&(_, w)| w).sum::<f64>();
        let argmax = row
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        row[argmax].1 += err;
        rows.push(row);
    }
    Chain::from_sparse_rows(n, rows, false)
}

/// Seeded random symmetric-support chain (test corpora use this heavily).
pub fn random_symmetric_chain(n: usize, density: f64, seed: u64) -> Result<Chain> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_symmetric(n, density, &mut rng)
}

/// SRW on an undirected simple graph given by an edge list.
pub fn srw_from_edges(edges: &[(usize, usize)]) -> Result<Chain> {
    if edges.is_empty() {
        return Err(Error::InvalidParams("empty edge list".into()));
    }
    let n = edges.iter().map(|&(u, v)| u.max(v)).max().unwrap() + 1;
    let mut adj = vec![BTreeSet::new(); n];
    for (i, &(u, v)) in edges.iter().enumerate() {
        if u == v {
            return Err(Error::Parse { line: i + 1, msg: format!("self-loop {u} {v}") });
        }
        if !adj[u].insert(v) {
            return Err(Error::Parse { line: i + 1, msg: format!("duplicate edge {u} {v}") });
        }
        adj[v].insert(u);
    }
    srw_from_adjacency(n, &adj)
}

/// Generate one chain from a spec. Pure in the spec: same seed, same chain.
pub fn generate(spec: &FamilySpec) -> Result<Chain> {
    let chain = match spec.family {
        FamilyId::LazyTwoState => {
            return cycle_chain(2, 0.5);
        }
        FamilyId::Cycle => {
            require_size(spec.size)?;
            cycle_chain(spec.size, 0.0)?
        }
        FamilyId::Complete => {
            require_size(spec.size)?;
            complete_chain(spec.size)?
        }
        FamilyId::Hypercube => {
            if spec.size < 1 {
                return Err(Error::InvalidParams("hypercube dimension must be >= 1".into()));
            }
            hypercube_chain(spec.size)?
        }
        FamilyId::RandomRegular => {
            require_size(spec.size)?;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            random_regular_chain(spec.size, spec.degree, &mut rng)?
        }
        FamilyId::RandomSymmetric => {
            require_size(spec.size)?;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            random_symmetric(spec.size, spec.density, &mut rng)?
        }
        FamilyId::SrwFromEdgelist => {
            let edges = spec
                .edges
                .as_ref()
                .ok_or_else(|| Error::InvalidParams("srw-from-edgelist needs edges".into()))?;
            srw_from_edges(edges)?
        }
    };
    lazify(chain, spec.alpha)
}

fn require_size(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParams(format!("size must be >= 2, got {n}")));
    }
    Ok(())
}

/// One chain per size; random families advance the seed as seed + index.
pub fn family_sequence(template: &FamilySpec, sizes: &[usize]) -> Result<Vec<(usize, Chain)>> {
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParams("sizes must be strictly increasing".into()));
    }
    sizes
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let mut spec = template.clone();
            spec.size = n;
            spec.seed = template.seed.wrapping_add(i as u64);
            generate(&spec).map(|c| (n, c))
        })
        .collect()
}
