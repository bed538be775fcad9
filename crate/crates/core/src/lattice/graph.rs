use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Rational;

pub type VertexId = u32;
pub type EdgeId = u32;

const ABSENT: u32 = u32::MAX;

/// Memory cap for lattice construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryBudget {
    pub megabytes: u64,
}

impl Default for MemoryBudget {
    fn default() -> Self {
        Self { megabytes: 64 }
    }
}

impl MemoryBudget {
    pub fn unlimited() -> Self {
        Self { megabytes: u64::MAX / (1 << 20) }
    }

    /// Rough footprint of a lattice with `points` candidate sites: vertex
    /// coordinates and index, plus `d` edges per site with their capacities,
    /// residual arcs and adjacency entries.
    pub fn estimate_bytes(dim: usize, points: u64) -> u64 {
        let per_vertex = 8 * dim as u64 + 24;
        let per_edge = 64;
        points.saturating_mul(per_vertex + dim as u64 * per_edge)
    }

    pub fn check(&self, dim: usize, points: u64) -> Result<()> {
        let needed = Self::estimate_bytes(dim, points);
        let budget = self.megabytes.saturating_mul(1 << 20);
        if needed > budget {
            return Err(Error::Capacity {
                needed_mb: needed.div_ceil(1 << 20),
                budget_mb: self.megabytes,
            });
        }
        Ok(())
    }
}

/// Dense lookup from integer points of a bounding box to vertex ids.
#[derive(Debug, Clone, PartialEq, Eq)]
struct GridIndex {
    origin: Vec<i64>,
    extent: Vec<i64>,
    slots: Vec<u32>,
}

impl GridIndex {
    fn linear(&self, z: &[i64]) -> Option<usize> {
        let mut idx: usize = 0;
        for ((&zi, &origin), &extent) in z.iter().zip(&self.origin).zip(&self.extent) {
            let off = zi - origin;
            if off < 0 || off >= extent {
                return None;
            }
            idx = idx * extent as usize + off as usize;
        }
        Some(idx)
    }
}

/// A finite induced subgraph of the nearest-neighbour lattice `ℤ^d`, at
/// scale `n` (vertex `z` sits at `z/n`). Vertices and edges are stored in
/// lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeGraph {
    dim: usize,
    scale: u32,
    coords: Vec<i64>,
    edges: Vec<[VertexId; 2]>,
    index: GridIndex,
    adj_start: Vec<u32>,
    adj: Vec<(VertexId, EdgeId)>,
}

impl LatticeGraph {
    /// Keeps every integer point of the box `lo..=hi` accepted by `keep`.
    pub fn from_predicate(
        dim: usize,
        scale: u32,
        lo: Vec<i64>,
        hi: Vec<i64>,
        budget: MemoryBudget,
        mut keep: impl FnMut(&[i64]) -> Result<bool>,
    ) -> Result<Self> {
        if scale == 0 {
            return Err(Error::InvalidArgument("scale n must be >= 1".into()));
        }
        let extent: Vec<i64> = lo.iter().zip(&hi).map(|(a, b)| (b - a + 1).max(0)).collect();
        let total: u64 = extent.iter().map(|&e| e as u64).product();
        budget.check(dim, total)?;
        let mut index = GridIndex { origin: lo.clone(), extent: extent.clone(), slots: vec![ABSENT; total as usize] };
        let mut coords = Vec::new();
        let mut z = lo.clone();
        let mut count: u32 = 0;
        for slot in 0..total as usize {
            if keep(&z)? {
                index.slots[slot] = count;
                coords.extend_from_slice(&z);
                count += 1;
            }
            // odometer increment, last coordinate fastest
            for i in (0..dim).rev() {
                z[i] += 1;
                if z[i] <= hi[i] {
                    break;
                }
                z[i] = lo[i];
            }
        }
        let mut graph = Self {
            dim,
            scale,
            coords,
            edges: Vec::new(),
            index,
            adj_start: Vec::new(),
            adj: Vec::new(),
        };
        graph.build_edges();
        Ok(graph)
    }

    fn build_edges(&mut self) {
        let nv = self.num_vertices();
        let mut edges = Vec::new();
        let mut z = vec![0i64; self.dim];
        for v in 0..nv as u32 {
            z.copy_from_slice(self.coord(v));
            for axis in 0..self.dim {
                z[axis] += 1;
                if let Some(w) = self.vertex_at(&z) {
                    edges.push([v, w]);
                }
                z[axis] -= 1;
            }
        }
        edges.sort_unstable();
        let mut degree = vec![0u32; nv + 1];
        for e in &edges {
            degree[e[0] as usize] += 1;
            degree[e[1] as usize] += 1;
        }
        let mut start = vec![0u32; nv + 1];
        for v in 0..nv {
            start[v + 1] = start[v] + degree[v];
        }
        let mut fill = start.clone();
        let mut adj = vec![(0u32, 0u32); 2 * edges.len()];
        for (id, e) in edges.iter().enumerate() {
            adj[fill[e[0] as usize] as usize] = (e[1], id as u32);
            fill[e[0] as usize] += 1;
            adj[fill[e[1] as usize] as usize] = (e[0], id as u32);
            fill[e[1] as usize] += 1;
        }
        self.edges = edges;
        self.adj_start = start;
        self.adj = adj;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn num_vertices(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn coord(&self, v: VertexId) -> &[i64] {
        let i = v as usize * self.dim;
        &self.coords[i..i + self.dim]
    }

    pub fn position(&self, v: VertexId) -> Vec<f64> {
        let n = self.scale as f64;
        self.coord(v).iter().map(|&c| c as f64 / n).collect()
    }

    pub fn position_exact(&self, v: VertexId) -> Vec<Rational> {
        self.coord(v)
            .iter()
            .map(|&c| Rational::new(c as i128, self.scale as i128))
            .collect()
    }

    pub fn vertex_at(&self, z: &[i64]) -> Option<VertexId> {
        let slot = self.index.linear(z)?;
        match self.index.slots[slot] {
            ABSENT => None,
            v => Some(v),
        }
    }

    pub fn edges(&self) -> &[[VertexId; 2]] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> [VertexId; 2] {
        self.edges[e as usize]
    }

    /// `(neighbour, edge)` pairs inside the graph.
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        let a = self.adj_start[v as usize] as usize;
        let b = self.adj_start[v as usize + 1] as usize;
        &self.adj[a..b]
    }

    /// Whether some `ℤ^d` neighbour of `v` is not a vertex of this graph.
    pub fn has_outside_neighbor(&self, v: VertexId) -> bool {
        self.neighbors(v).len() < 2 * self.dim
    }

    /// The `2d` lattice neighbours of `v` as integer points.
    pub fn lattice_neighbors(&self, v: VertexId) -> Vec<Vec<i64>> {
        let z = self.coord(v);
        let mut out = Vec::with_capacity(2 * self.dim);
        for axis in 0..self.dim {
            for step in [-1i64, 1] {
                let mut w = z.to_vec();
                w[axis] += step;
                out.push(w);
            }
        }
        out
    }

    /// Edge midpoint in doubled integer coordinates (`2n · c(e)`).
    pub fn edge_midpoint_doubled(&self, e: EdgeId) -> Vec<i64> {
        let [a, b] = self.edge(e);
        self.coord(a).iter().zip(self.coord(b)).map(|(x, y)| x + y).collect()
    }

    pub fn edge_midpoint(&self, e: EdgeId) -> Vec<f64> {
        let two_n = 2.0 * self.scale as f64;
        self.edge_midpoint_doubled(e).iter().map(|&c| c as f64 / two_n).collect()
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> {
        0..self.num_vertices() as u32
    }

    pub fn dump(&self) -> GraphDump {
        GraphDump {
            d: self.dim,
            n: self.scale,
            vertices: self.vertex_ids().map(|v| self.coord(v).to_vec()).collect(),
            edges: self.edges.clone(),
        }
    }
}

/// Diagnostic JSON form of a lattice graph.
#[derive(Debug, Clone, Serialize)]
pub struct GraphDump {
    pub d: usize,
    pub n: u32,
    pub vertices: Vec<Vec<i64>>,
    pub edges: Vec<[u32; 2]>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full_box(d: usize, n: u32, side: i64) -> LatticeGraph {
        LatticeGraph::from_predicate(d, n, vec![0; d], vec![side; d], MemoryBudget::default(), |_| Ok(true)).unwrap()
    }

    #[test]
    fn box_counts_closed_form() {
        for d in 2..=3 {
            for n in 1..=5u32 {
                let g = full_box(d, n, n as i64);
                let n1 = (n + 1) as usize;
                assert_eq!(g.num_vertices(), n1.pow(d as u32));
                assert_eq!(g.num_edges(), d * n as usize * n1.pow(d as u32 - 1));
            }
        }
    }

    #[test]
    fn order_is_lexicographic() {
        let g = full_box(2, 2, 2);
        let coords: Vec<Vec<i64>> = g.vertex_ids().map(|v| g.coord(v).to_vec()).collect();
        let mut sorted = coords.clone();
        sorted.sort();
        assert_eq!(coords, sorted);
        let mut edges = g.edges().to_vec();
        edges.sort();
        assert_eq!(edges, g.edges());
    }

    #[test]
    fn interior_vertex_has_full_degree() {
        let g = full_box(2, 2, 2);
        let center = g.vertex_at(&[1, 1]).unwrap();
        assert_eq!(g.neighbors(center).len(), 4);
        assert!(!g.has_outside_neighbor(center));
        assert!(g.has_outside_neighbor(g.vertex_at(&[0, 1]).unwrap()));
    }

    #[test]
    fn budget_rejects_large_boxes() {
        let err = LatticeGraph::from_predicate(
            3,
            64,
            vec![0; 3],
            vec![200; 3],
            MemoryBudget { megabytes: 1 },
            |_| Ok(true),
        );
        assert!(matches!(err, Err(Error::Capacity { .. })));
    }
}
