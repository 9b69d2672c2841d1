//! t-nearest-neighbor graphs and all-pairs shortest paths over them.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix::{DistanceKind, DistanceMatrix};
use crate::error::{Error, Result};

/// How directed t-nn lists become undirected edges.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetrization {
    /// Edge `{i, j}` when either endpoint lists the other.
    #[default]
    Union,
    /// Edge `{i, j}` only when both endpoints list each other.
    Mutual,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphOptions {
    pub symmetrization: Symmetrization,
    /// Join disconnected components by their cheapest base-distance edges
    /// instead of failing.
    pub bridge: bool,
}

/// Weighted undirected graph; adjacency lists are sorted by neighbor index.
#[derive(Clone, Debug, PartialEq)]
pub struct NeighborGraph {
    t: usize,
    base_kind: DistanceKind,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl NeighborGraph {
    /// A graph from explicit undirected edges (duplicates keep the last weight).
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)], base_kind: DistanceKind) -> Result<Self> {
        let mut g = Self {
            t: 0,
            base_kind,
            adjacency: vec![Vec::new(); n],
        };
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange(format!("edge ({i}, {j}) in a {n}-node graph")));
            }
            if i == j {
                return Err(Error::invalid(format!("self-loop at {i}")));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::invalid(format!("edge ({i}, {j}) has weight {w}")));
            }
            g.insert(i, j, w);
        }
        Ok(g)
    }

    fn insert(&mut self, i: usize, j: usize, w: f64) {
        for (a, b) in [(i, j), (j, i)] {
            let list = &mut self.adjacency[a];
            match list.binary_search_by_key(&b, |&(v, _)| v) {
                Ok(pos) => list[pos].1 = w,
                Err(pos) => list.insert(pos, (b, w)),
            }
        }
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn base_kind(&self) -> DistanceKind {
        self.base_kind
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn edge_weight(&self, i: usize, j: usize) -> Option<f64> {
        self.adjacency[i]
            .binary_search_by_key(&j, |&(v, _)| v)
            .ok()
            .map(|pos| self.adjacency[i][pos].1)
    }

    /// Undirected edges `(i, j, w)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().filter(move |&&(j, _)| j > i).map(move |&(j, w)| (i, j, w)))
            .collect()
    }

    /// Connected components, each sorted, ordered by their smallest node.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut comp = Vec::new();
            while let Some(v) = stack.pop() {
                comp.push(v);
                for &(u, _) in &self.adjacency[v] {
                    if !seen[u] {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Repeatedly joins the two closest components with their single
    /// cheapest `base` edge until the graph is connected. Returns the added
    /// edges in insertion order.
    pub fn bridge_components(&mut self, base: &DistanceMatrix) -> Result<Vec<(usize, usize, f64)>> {
        if base.n() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "{}-point matrix for a {}-node graph",
                base.n(),
                self.n()
            )));
        }
        let mut added = Vec::new();
        loop {
            let comps = self.components();
            if comps.len() <= 1 {
                return Ok(added);
            }
            let mut label = vec![0usize; self.n()];
            for (c, members) in comps.iter().enumerate() {
                for &v in members {
                    label[v] = c;
                }
            }
            let mut best: Option<(usize, usize, f64)> = None;
            for i in 0..self.n() {
                let row = base.row(i);
                for j in (i + 1)..self.n() {
                    if label[i] != label[j] && best.is_none_or(|(_, _, w)| row[j] < w) {
                        best = Some((i, j, row[j]));
                    }
                }
            }
            let (i, j, w) = best.expect("two components always have a cross pair");
            log::info!(
                "bridging components of sizes {} and {} with edge ({i}, {j}), weight {w}",
                comps[label[i]].len(),
                comps[label[j]].len()
            );
            self.insert(i, j, w);
            added.push((i, j, w));
        }
    }
}

/// The `t` nearest neighbors of `i` (self excluded, ties to the lower index).
fn nearest(d: &DistanceMatrix, i: usize, t: usize) -> Vec<usize> {
    let row = d.row(i);
    let mut others: Vec<usize> = (0..d.n()).filter(|&j| j != i).collect();
    others.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
    others.truncate(t);
    others
}

/// t-nn graph with union symmetrization.
pub fn knn_graph(d: &DistanceMatrix, t: usize) -> Result<NeighborGraph> {
    knn_graph_with(d, t, Symmetrization::Union)
}

pub fn knn_graph_with(d: &DistanceMatrix, t: usize, sym: Symmetrization) -> Result<NeighborGraph> {
    let n = d.n();
    if t < 1 || t >= n {
        return Err(Error::invalid(format!("t = {t} must lie in [1, {}]", n.saturating_sub(1))));
    }
    let lists: Vec<Vec<usize>> = (0..n).into_par_iter().map(|i| nearest(d, i, t)).collect();
    let member: Vec<Vec<bool>> = if sym == Symmetrization::Mutual {
        lists
            .iter()
            .map(|l| {
                let mut m = vec![false; n];
                for &j in l {
                    m[j] = true;
                }
                m
            })
            .collect()
    } else {
        Vec::new()
    };
    let mut g = NeighborGraph {
        t,
        base_kind: d.kind(),
        adjacency: vec![Vec::new(); n],
    };
    for (i, list) in lists.iter().enumerate() {
        for &j in list {
            if sym == Symmetrization::Mutual && !member[j][i] {
                continue;
            }
            g.insert(i, j, d.get(i, j));
        }
    }
    Ok(g)
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem {
    dist: f64,
    node: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest path lengths; unreachable nodes are `INFINITY`.
pub fn dijkstra(g: &NeighborGraph, source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.n()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapItem { dist: 0.0, node: source });
    while let Some(HeapItem { dist: d, node }) = heap.pop() {
        if d > dist[node] {
            continue;
        }
        for &(next, w) in g.neighbors(node) {
            let nd = d + w;
            if nd < dist[next] {
                dist[next] = nd;
                heap.push(HeapItem { dist: nd, node: next });
            }
        }
    }
    dist
}

/// Shortest-path distances between every pair of nodes, one Dijkstra run per
/// source (in parallel). Fails with [`Error::DisconnectedGraph`] when some
/// pair is unreachable.
pub fn all_pairs_geodesic(g: &NeighborGraph) -> Result<DistanceMatrix> {
    let comps = g.components();
    if comps.len() > 1 {
        let mut sizes: Vec<usize> = comps.iter().map(Vec::len).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        return Err(Error::DisconnectedGraph { component_sizes: sizes });
    }
    let n = g.n();
    let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|s| dijkstra(g, s)).collect();
    // both directions of a path may round differently; keep the smaller
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rows[i][j].min(rows[j][i]);
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    Ok(DistanceMatrix::from_parts_unchecked(n, values, g.base_kind().geodesic_of()))
}

/// Base matrix → t-nn graph (optionally bridged) → geodesic matrix.
pub fn geodesic_matrix(base: &DistanceMatrix, t: usize, opts: &GraphOptions) -> Result<DistanceMatrix> {
    let mut g = knn_graph_with(base, t, opts.symmetrization)?;
    if opts.bridge {
        let added = g.bridge_components(base)?;
        if !added.is_empty() {
            log::warn!("added {} bridge edge(s) to connect the {} graph", added.len(), base.kind());
        }
    }
    all_pairs_geodesic(&g)
}
