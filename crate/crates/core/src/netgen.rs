//! Sampling finite two-type inhomogeneous random networks.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelParams, ReceiverType};
use crate::rng::RngSpec;

pub const DEFAULT_EDGE_BUDGET: u64 = 50_000_000;

/// Undirected simple graph in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkInstance {
    pub node_type: Vec<ReceiverType>,
    pub node_lambda: Vec<f64>,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl NetworkInstance {
    /// Builds a network from an explicit edge list, rejecting self-loops,
    /// duplicates and out-of-range endpoints.
    pub fn from_edges(
        node_type: Vec<ReceiverType>,
        node_lambda: Vec<f64>,
        edges: &[(u32, u32)],
    ) -> Result<Self> {
        let n = node_type.len();
        if node_lambda.len() != n {
            return Err(Error::InvalidNetwork(format!(
                "{} types but {} connectedness values",
                n,
                node_lambda.len()
            )));
        }
        for &(u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::InvalidNetwork(format!("edge ({u},{v}) out of range for n={n}")));
            }
            if u == v {
                return Err(Error::InvalidNetwork(format!("self-loop at {u}")));
            }
        }
        let net = Self::build(node_type, node_lambda, edges);
        for i in 0..n {
            if net.neighbors(i).windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidNetwork(format!("duplicate edge at node {i}")));
            }
        }
        Ok(net)
    }

    fn build(node_type: Vec<ReceiverType>, node_lambda: Vec<f64>, edges: &[(u32, u32)]) -> Self {
        let n = node_type.len();
        let mut offsets = vec![0usize; n + 1];
        for &(u, v) in edges {
            offsets[u as usize + 1] += 1;
            offsets[v as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut neighbors = vec![0u32; offsets[n]];
        for &(u, v) in edges {
            neighbors[fill[u as usize]] = v;
            fill[u as usize] += 1;
            neighbors[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        for i in 0..n {
            neighbors[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        NetworkInstance {
            node_type,
            node_lambda,
            offsets,
            neighbors,
        }
    }

    pub fn n(&self) -> usize {
        self.node_type.len()
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    /// Edges `(u, v)` with `u < v`, in increasing order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.n()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| (v as usize) > u)
                .map(move |&v| (u as u32, v))
        })
    }

    pub fn write_edges(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        for (u, v) in self.edges() {
            writeln!(w, "{u} {v}")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_nodes(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        for (i, (t, l)) in self.node_type.iter().zip(&self.node_lambda).enumerate() {
            writeln!(w, "{i} {t} {l}")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read(edges_path: &Path, nodes_path: &Path) -> Result<Self> {
        let mut node_type = Vec::new();
        let mut node_lambda = Vec::new();
        for (lineno, line) in BufReader::new(File::open(nodes_path)?).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = || Error::InvalidNetwork(format!("node table line {}: '{line}'", lineno + 1));
            let mut it = line.split_whitespace();
            let id: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let t = match it.next() {
                Some("h") => ReceiverType::H,
                Some("l") => ReceiverType::L,
                _ => return Err(bad()),
            };
            let lambda: f64 = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            if id != node_type.len() {
                return Err(Error::InvalidNetwork(format!(
                    "node table line {}: expected id {}, found {id}",
                    lineno + 1,
                    node_type.len()
                )));
            }
            node_type.push(t);
            node_lambda.push(lambda);
        }
        let mut edges = Vec::new();
        for (lineno, line) in BufReader::new(File::open(edges_path)?).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace().map(str::parse::<u32>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(u)), Some(Ok(v)), None) => edges.push((u, v)),
                _ => {
                    return Err(Error::InvalidNetwork(format!(
                        "edge list line {}: '{line}'",
                        lineno + 1
                    )))
                }
            }
        }
        Self::from_edges(node_type, node_lambda, &edges)
    }
}

/// Draws i.i.d. types and connectedness values for `n` nodes.
pub fn sample_nodes(params: &ModelParams, n: usize, rng: &RngSpec) -> (Vec<ReceiverType>, Vec<f64>) {
    let mut r = rng.stream("nodes", 0);
    let cdf_h = params.f_h.cdf();
    let cdf_l = params.f_l.cdf();
    let mut types = Vec::with_capacity(n);
    let mut lambdas = Vec::with_capacity(n);
    for _ in 0..n {
        let t = if r.random::<f64>() < params.gamma_h {
            ReceiverType::H
        } else {
            ReceiverType::L
        };
        let (cdf, atoms) = match t {
            ReceiverType::H => (&cdf_h, params.f_h.atoms()),
            ReceiverType::L => (&cdf_l, params.f_l.atoms()),
        };
        let u: f64 = r.random();
        let k = cdf.iter().position(|&c| u < c).unwrap_or(atoms.len() - 1);
        types.push(t);
        lambdas.push(atoms[k].lambda);
    }
    (types, lambdas)
}

struct BucketPair {
    a: usize,
    b: usize,
    p: f64,
}

/// Samples the edges between nodes with given types and connectedness.
///
/// Nodes are grouped by `(type, λ)`; within each group pair the link
/// probability is constant, so edges are drawn by geometric skipping over the
/// pair index space, which is exact and costs time proportional to the number
/// of edges.
pub fn sample_edges(
    node_type: Vec<ReceiverType>,
    node_lambda: Vec<f64>,
    q: f64,
    rng: &RngSpec,
    edge_budget: u64,
) -> Result<NetworkInstance> {
    let n = node_type.len();
    let mut keys: Vec<(ReceiverType, u64)> = node_type
        .iter()
        .zip(&node_lambda)
        .map(|(&t, &l)| (t, l.to_bits()))
        .collect();
    keys.sort_unstable();
    keys.dedup();
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); keys.len()];
    for i in 0..n {
        let k = keys
            .binary_search(&(node_type[i], node_lambda[i].to_bits()))
            .expect("key present");
        members[k].push(i as u32);
    }

    let nf = n as f64;
    let mut pairs = Vec::new();
    let mut expected = 0.0;
    for a in 0..keys.len() {
        for b in a..keys.len() {
            let (ta, la) = (keys[a].0, f64::from_bits(keys[a].1));
            let (tb, lb) = (keys[b].0, f64::from_bits(keys[b].1));
            let c = if ta == tb { 1.0 } else { q };
            let p = (c * la * lb / nf).min(1.0);
            let (ma, mb) = (members[a].len() as f64, members[b].len() as f64);
            let count = if a == b { ma * (ma - 1.0) / 2.0 } else { ma * mb };
            expected += p * count;
            if p > 0.0 && count > 0.0 {
                pairs.push(BucketPair { a, b, p });
            }
        }
    }
    if expected > edge_budget as f64 {
        return Err(Error::EdgeBudget {
            expected,
            budget: edge_budget,
        });
    }

    let chunks: Vec<Vec<(u32, u32)>> = pairs
        .par_iter()
        .enumerate()
        .map(|(idx, bp)| {
            let mut r = rng.stream("edges", idx as u64);
            let mut out = Vec::new();
            let (ma, mb) = (&members[bp.a], &members[bp.b]);
            if bp.a == bp.b {
                for_each_lower_pair(ma.len() as u64, bp.p, &mut r, |v, w| {
                    out.push((ma[w as usize], ma[v as usize]));
                });
            } else {
                let cols = mb.len() as u64;
                for_each_index(ma.len() as u64 * cols, bp.p, &mut r, |k| {
                    out.push((ma[(k / cols) as usize], mb[(k % cols) as usize]));
                });
            }
            out
        })
        .collect();
    let edges: Vec<(u32, u32)> = chunks.into_iter().flatten().collect();
    Ok(NetworkInstance::build(node_type, node_lambda, &edges))
}

/// Geometric gap to the next success of Bernoulli(p) trials.
fn skip<R: Rng>(rng: &mut R, log_q: f64) -> u64 {
    let u: f64 = rng.random();
    let g = ((1.0 - u).ln() / log_q).floor();
    if g >= u64::MAX as f64 {
        u64::MAX
    } else {
        g as u64
    }
}

/// Calls `f(k)` for each index in `0..total` included independently with probability `p`.
fn for_each_index<R: Rng>(total: u64, p: f64, rng: &mut R, mut f: impl FnMut(u64)) {
    if p >= 1.0 {
        (0..total).for_each(f);
        return;
    }
    let log_q = (-p).ln_1p();
    let mut k = skip(rng, log_q);
    while k < total {
        f(k);
        k = k.saturating_add(1).saturating_add(skip(rng, log_q));
    }
}

/// Calls `f(v, w)` with `w < v < m` for each unordered pair included with probability `p`.
fn for_each_lower_pair<R: Rng>(m: u64, p: f64, rng: &mut R, mut f: impl FnMut(u64, u64)) {
    if m < 2 {
        return;
    }
    let total = m * (m - 1) / 2;
    // Row v holds pairs (v, 0..v) and starts at index v(v-1)/2.
    let mut v = 1u64;
    let mut row_start = 0u64;
    for_each_index(total, p, rng, |k| {
        while k >= row_start + v {
            row_start += v;
            v += 1;
        }
        f(v, k - row_start);
    });
}

pub fn sample_network(
    params: &ModelParams,
    n: usize,
    rng: &RngSpec,
    edge_budget: u64,
) -> Result<NetworkInstance> {
    params.validate()?;
    if n < 2 {
        return Err(Error::InvalidParams(format!("n = {n} must be at least 2")));
    }
    if n > u32::MAX as usize {
        return Err(Error::InvalidParams(format!("n = {n} exceeds the u32 node index")));
    }
    let (types, lambdas) = sample_nodes(params, n, rng);
    sample_edges(types, lambdas, params.q, rng, edge_budget)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeStats {
    pub count: usize,
    pub mean_degree: f64,
    /// Normalised degree histogram indexed by degree.
    pub degree_hist: Vec<f64>,
    /// Share of edge endpoints at type-t nodes whose other end has the same type.
    pub same_type_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalStats {
    pub n: usize,
    pub edges: usize,
    /// `None` when no node of that type was sampled.
    pub h: Option<TypeStats>,
    pub l: Option<TypeStats>,
}

impl EmpiricalStats {
    pub fn of(&self, t: ReceiverType) -> Option<&TypeStats> {
        match t {
            ReceiverType::H => self.h.as_ref(),
            ReceiverType::L => self.l.as_ref(),
        }
    }
}

pub fn empirical_stats(net: &NetworkInstance) -> EmpiricalStats {
    let per_type = |t: ReceiverType| -> Option<TypeStats> {
        let mut count = 0usize;
        let mut hist: Vec<u64> = Vec::new();
        let mut same = 0u64;
        let mut ends = 0u64;
        for i in 0..net.n() {
            if net.node_type[i] != t {
                continue;
            }
            count += 1;
            let d = net.degree(i);
            if hist.len() <= d {
                hist.resize(d + 1, 0);
            }
            hist[d] += 1;
            ends += d as u64;
            same += net
                .neighbors(i)
                .iter()
                .filter(|&&j| net.node_type[j as usize] == t)
                .count() as u64;
        }
        (count > 0).then(|| TypeStats {
            count,
            mean_degree: ends as f64 / count as f64,
            degree_hist: hist.iter().map(|&c| c as f64 / count as f64).collect(),
            same_type_fraction: if ends > 0 { same as f64 / ends as f64 } else { 0.0 },
        })
    };
    EmpiricalStats {
        n: net.n(),
        edges: net.edge_count(),
        h: per_type(ReceiverType::H),
        l: per_type(ReceiverType::L),
    }
}
