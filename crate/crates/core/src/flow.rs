//! Exact maximal flows between vertex sets of a lattice graph, with the
//! canonical minimal cutset, cutset predicates and a brute-force oracle.

use std::collections::VecDeque;

use crate::capacity::CapacityField;
use crate::error::{Error, Result};
use crate::lattice::{EdgeId, LatticeGraph, VertexId};

/// Largest edge count accepted by [`brute_force_min_cut`].
pub const BRUTE_FORCE_EDGE_LIMIT: usize = 22;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowResult {
    /// Flow value as a numerator over the capacity denominator.
    pub value: i64,
    /// Edge boundary of `source_side`, sorted.
    pub cut: Vec<EdgeId>,
    /// Vertices reachable from the sources in the final residual graph, sorted.
    pub source_side: Vec<VertexId>,
    /// Net flow along each edge from its first to its second endpoint.
    pub edge_flow: Vec<i64>,
}

impl FlowResult {
    /// Re-derives every max-flow invariant from scratch: capacity bounds,
    /// conservation away from terminals, cut capacity equal to the flow
    /// value, the cut being a cutset and the cut being the boundary of the
    /// source side.
    pub fn verify(&self, graph: &LatticeGraph, caps: &[i64], sources: &[VertexId], sinks: &[VertexId]) -> Result<()> {
        let fail = |msg: String| Err(Error::InvariantViolation(msg));
        let mut terminal = vec![false; graph.num_vertices()];
        for &v in sources.iter().chain(sinks) {
            terminal[v as usize] = true;
        }
        let mut excess = vec![0i64; graph.num_vertices()];
        for (e, &[a, b]) in graph.edges().iter().enumerate() {
            let f = self.edge_flow[e];
            if f.abs() > caps[e] {
                return fail(format!("edge {e} carries {f} over capacity {}", caps[e]));
            }
            excess[a as usize] -= f;
            excess[b as usize] += f;
        }
        if let Some(v) = (0..excess.len()).find(|&v| !terminal[v] && excess[v] != 0) {
            return fail(format!("flow not conserved at vertex {v}"));
        }
        let out: i64 = sources.iter().map(|&s| -excess[s as usize]).sum();
        if out != self.value {
            return fail(format!("net outflow {out} differs from flow value {}", self.value));
        }
        let cut_value: i64 = self.cut.iter().map(|&e| caps[e as usize]).sum();
        if cut_value != self.value {
            return fail(format!("cut capacity {cut_value} differs from flow value {}", self.value));
        }
        if !is_cutset(graph, &self.cut, sources, sinks) {
            return fail("minimal cut does not separate sources from sinks".into());
        }
        let mut side = vec![false; graph.num_vertices()];
        for &v in &self.source_side {
            side[v as usize] = true;
        }
        if edge_boundary(graph, &side) != self.cut {
            return fail("cut is not the boundary of the source side".into());
        }
        Ok(())
    }
}

/// A set of distinct edges with its total capacity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutSet {
    pub edges: Vec<EdgeId>,
    pub capacity: i64,
    pub denominator: i64,
}

impl CutSet {
    pub fn new(mut edges: Vec<EdgeId>, field: &CapacityField) -> Self {
        edges.sort_unstable();
        edges.dedup();
        let capacity = edges.iter().map(|&e| field.numerators[e as usize]).sum();
        Self { edges, capacity, denominator: field.denominator }
    }

    pub fn capacity_f64(&self) -> f64 {
        self.capacity as f64 / self.denominator as f64
    }
}

fn check_terminals(graph: &LatticeGraph, sources: &[VertexId], sinks: &[VertexId]) -> Result<Vec<u8>> {
    if sources.is_empty() || sinks.is_empty() {
        return Err(Error::InvalidFlowProblem("sources and sinks must be nonempty".into()));
    }
    // 1 = source, 2 = sink
    let mut role = vec![0u8; graph.num_vertices()];
    for &s in sources {
        if s as usize >= role.len() {
            return Err(Error::InvalidFlowProblem(format!("source {s} is not a vertex")));
        }
        role[s as usize] = 1;
    }
    for &t in sinks {
        if t as usize >= role.len() {
            return Err(Error::InvalidFlowProblem(format!("sink {t} is not a vertex")));
        }
        if role[t as usize] == 1 {
            return Err(Error::InvalidFlowProblem(format!("vertex {t} is both a source and a sink")));
        }
        role[t as usize] = 2;
    }
    Ok(role)
}

/// Residual network in compressed form. Arc `2e` runs from the first to the
/// second endpoint of edge `e`, arc `2e + 1` back; both start at the edge
/// capacity. Terminal arcs follow the edge arcs, each paired with a
/// zero-capacity reverse arc.
struct Residual {
    to: Vec<u32>,
    res: Vec<i64>,
    start: Vec<u32>,
    arcs: Vec<u32>,
    source: u32,
    sink: u32,
}

impl Residual {
    fn new(graph: &LatticeGraph, caps: &[i64], role: &[u8]) -> Self {
        let nv = graph.num_vertices();
        let m = graph.num_edges();
        let source = nv as u32;
        let sink = nv as u32 + 1;
        let inf: i64 = caps.iter().sum::<i64>() + 1;
        let terminals = role.iter().filter(|&&r| r != 0).count();
        let mut to = Vec::with_capacity(2 * m + 2 * terminals);
        let mut res = Vec::with_capacity(2 * m + 2 * terminals);
        let mut tail = Vec::with_capacity(2 * m + 2 * terminals);
        for (e, &[a, b]) in graph.edges().iter().enumerate() {
            to.extend([b, a]);
            tail.extend([a, b]);
            res.extend([caps[e], caps[e]]);
        }
        for (v, &r) in role.iter().enumerate() {
            let v = v as u32;
            match r {
                1 => {
                    to.extend([v, source]);
                    tail.extend([source, v]);
                    res.extend([inf, 0]);
                }
                2 => {
                    to.extend([sink, v]);
                    tail.extend([v, sink]);
                    res.extend([inf, 0]);
                }
                _ => {}
            }
        }
        let nodes = nv + 2;
        let mut start = vec![0u32; nodes + 1];
        for &t in &tail {
            start[t as usize + 1] += 1;
        }
        for i in 0..nodes {
            start[i + 1] += start[i];
        }
        let mut fill = start.clone();
        let mut arcs = vec![0u32; tail.len()];
        for (a, &t) in tail.iter().enumerate() {
            arcs[fill[t as usize] as usize] = a as u32;
            fill[t as usize] += 1;
        }
        Self { to, res, start, arcs, source, sink }
    }

    fn bfs_levels(&self, level: &mut [i32]) -> bool {
        level.fill(-1);
        level[self.source as usize] = 0;
        let mut queue = VecDeque::from([self.source]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.arcs[self.start[u as usize] as usize..self.start[u as usize + 1] as usize] {
                let v = self.to[a as usize];
                if self.res[a as usize] > 0 && level[v as usize] < 0 {
                    level[v as usize] = level[u as usize] + 1;
                    queue.push_back(v);
                }
            }
        }
        level[self.sink as usize] >= 0
    }

    /// Blocking flow on the level graph, augmenting one path at a time and
    /// retreating to the first saturated arc after each augmentation.
    fn blocking_flow(&mut self, level: &mut [i32]) -> i64 {
        let mut iter: Vec<u32> = self.start[..self.start.len() - 1].to_vec();
        let mut path: Vec<u32> = Vec::new();
        let mut total = 0i64;
        let mut u = self.source;
        loop {
            if u == self.sink {
                let f = path.iter().map(|&a| self.res[a as usize]).min().unwrap_or(0);
                for &a in &path {
                    self.res[a as usize] -= f;
                    self.res[(a ^ 1) as usize] += f;
                }
                total += f;
                let k = path.iter().position(|&a| self.res[a as usize] == 0).unwrap_or(0);
                path.truncate(k);
                u = path.last().map_or(self.source, |&a| self.to[a as usize]);
                continue;
            }
            let end = self.start[u as usize + 1];
            let mut advanced = false;
            while iter[u as usize] < end {
                let a = self.arcs[iter[u as usize] as usize];
                let v = self.to[a as usize];
                if self.res[a as usize] > 0 && level[v as usize] == level[u as usize] + 1 {
                    path.push(a);
                    u = v;
                    advanced = true;
                    break;
                }
                iter[u as usize] += 1;
            }
            if !advanced {
                if u == self.source {
                    return total;
                }
                level[u as usize] = -1;
                let a = path.pop().expect("non-source node has an incoming path arc");
                u = self.to[(a ^ 1) as usize];
                iter[u as usize] += 1;
            }
        }
    }

    fn reachable_from_source(&self) -> Vec<bool> {
        let mut seen = vec![false; self.start.len() - 1];
        seen[self.source as usize] = true;
        let mut queue = VecDeque::from([self.source]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.arcs[self.start[u as usize] as usize..self.start[u as usize + 1] as usize] {
                let v = self.to[a as usize];
                if self.res[a as usize] > 0 && !seen[v as usize] {
                    seen[v as usize] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }
}

/// Maximal flow from `sources` to `sinks` with per-edge capacities `caps`
/// (numerators over a common denominator). The returned cut is the edge
/// boundary of the residual-reachable side of the sources.
pub fn max_flow(graph: &LatticeGraph, caps: &[i64], sources: &[VertexId], sinks: &[VertexId]) -> Result<FlowResult> {
    if caps.len() != graph.num_edges() {
        return Err(Error::InvalidFlowProblem(format!(
            "{} capacities for {} edges",
            caps.len(),
            graph.num_edges()
        )));
    }
    if let Some(e) = caps.iter().position(|&c| c < 0) {
        return Err(Error::InvalidFlowProblem(format!("edge {e} has negative capacity")));
    }
    caps.iter()
        .try_fold(0i64, |acc, &c| acc.checked_add(c))
        .and_then(|s| s.checked_add(1))
        .ok_or_else(|| Error::InvalidFlowProblem("capacity total overflows".into()))?;
    let role = check_terminals(graph, sources, sinks)?;
    let mut net = Residual::new(graph, caps, &role);
    let mut level = vec![-1i32; graph.num_vertices() + 2];
    let mut value = 0i64;
    while net.bfs_levels(&mut level) {
        value += net.blocking_flow(&mut level);
    }
    let seen = net.reachable_from_source();
    let side = &seen[..graph.num_vertices()];
    let source_side = (0..graph.num_vertices() as u32).filter(|&v| side[v as usize]).collect();
    let cut = edge_boundary(graph, side);
    let edge_flow = (0..graph.num_edges()).map(|e| caps[e] - net.res[2 * e]).collect();
    Ok(FlowResult { value, cut, source_side, edge_flow })
}

/// Minimum number of edges in a cutset between `sources` and `sinks`.
pub fn min_cardinality_cut(graph: &LatticeGraph, sources: &[VertexId], sinks: &[VertexId]) -> Result<i64> {
    Ok(max_flow(graph, &vec![1; graph.num_edges()], sources, sinks)?.value)
}

/// Edges of `graph` with exactly one endpoint in the set marked by `inside`.
pub fn edge_boundary(graph: &LatticeGraph, inside: &[bool]) -> Vec<EdgeId> {
    graph
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, &[a, b])| inside[a as usize] != inside[b as usize])
        .map(|(e, _)| e as EdgeId)
        .collect()
}

/// Every nearest-neighbour edge of `ℤ^d` leaving the marked set, including
/// edges whose outer endpoint is not a vertex of `graph`. Each edge is given
/// by its inner and outer integer endpoints.
pub fn full_edge_boundary(graph: &LatticeGraph, inside: &[bool]) -> Vec<(Vec<i64>, Vec<i64>)> {
    let mut out = Vec::new();
    for v in graph.vertex_ids() {
        if !inside[v as usize] {
            continue;
        }
        for z in graph.lattice_neighbors(v) {
            let outer_in = graph.vertex_at(&z).is_some_and(|w| inside[w as usize]);
            if !outer_in {
                out.push((graph.coord(v).to_vec(), z));
            }
        }
    }
    out
}

/// Whether removing `edges` leaves no path from `sources` to `sinks`.
pub fn is_cutset(graph: &LatticeGraph, edges: &[EdgeId], sources: &[VertexId], sinks: &[VertexId]) -> bool {
    let mut removed = vec![false; graph.num_edges()];
    for &e in edges {
        removed[e as usize] = true;
    }
    let mut is_sink = vec![false; graph.num_vertices()];
    for &t in sinks {
        is_sink[t as usize] = true;
    }
    let mut seen = vec![false; graph.num_vertices()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if !seen[s as usize] {
            seen[s as usize] = true;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        if is_sink[u as usize] {
            return false;
        }
        for &(w, e) in graph.neighbors(u) {
            if !removed[e as usize] && !seen[w as usize] {
                seen[w as usize] = true;
                queue.push_back(w);
            }
        }
    }
    true
}

/// `V(edges) ≤ φ + ε n^{d-1}`, with `φ` the maximal flow for this field.
pub fn is_epsilon_cutset(
    graph: &LatticeGraph,
    field: &CapacityField,
    edges: &[EdgeId],
    sources: &[VertexId],
    sinks: &[VertexId],
    epsilon: f64,
) -> Result<bool> {
    if !is_cutset(graph, edges, sources, sinks) {
        return Err(Error::NotACutset);
    }
    let cut = CutSet::new(edges.to_vec(), field);
    let phi = max_flow(graph, &field.numerators, sources, sinks)?.value;
    let slack = epsilon * (graph.scale() as f64).powi(graph.dim() as i32 - 1) * field.denominator as f64;
    Ok(((cut.capacity - phi) as f64) <= slack + 1e-9)
}

/// Whether the sorted edge list of `a` precedes that of `b`.
fn mask_lex_less(a: u32, b: u32) -> bool {
    let diff = a ^ b;
    if diff == 0 {
        return false;
    }
    let k = diff.trailing_zeros();
    let above = !(2u32 << k).wrapping_sub(1);
    if a >> k & 1 == 1 {
        // `a` continues with k; `b` continues with something larger or ends
        b & above != 0
    } else {
        a & above == 0
    }
}

/// Exhaustive minimum-capacity cutset; ties go to the lexicographically
/// least sorted edge list.
pub fn brute_force_min_cut(
    graph: &LatticeGraph,
    field: &CapacityField,
    sources: &[VertexId],
    sinks: &[VertexId],
) -> Result<CutSet> {
    let m = graph.num_edges();
    if m > BRUTE_FORCE_EDGE_LIMIT {
        return Err(Error::OracleTooLarge { edges: m, limit: BRUTE_FORCE_EDGE_LIMIT });
    }
    check_terminals(graph, sources, sinks)?;
    let caps = &field.numerators;
    let mut best: Option<(i64, u32)> = None;
    for mask in 0u32..(1u32 << m) {
        let cap: i64 = (0..m).filter(|&e| mask >> e & 1 == 1).map(|e| caps[e]).sum();
        if let Some((bc, bm)) = best {
            if cap > bc || (cap == bc && !mask_lex_less(mask, bm)) {
                continue;
            }
        }
        let edges: Vec<EdgeId> = (0..m as u32).filter(|&e| mask >> e & 1 == 1).collect();
        if is_cutset(graph, &edges, sources, sinks) {
            best = Some((cap, mask));
        }
    }
    let (_, mask) = best.expect("the full edge set is always a cutset");
    let edges = (0..m as u32).filter(|&e| mask >> e & 1 == 1).collect();
    Ok(CutSet::new(edges, field))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::MemoryBudget;

    fn grid(w: i64, h: i64) -> LatticeGraph {
        LatticeGraph::from_predicate(2, 1, vec![0, 0], vec![w, h], MemoryBudget::default(), |_| Ok(true)).unwrap()
    }

    fn column(g: &LatticeGraph, x: i64) -> Vec<VertexId> {
        g.vertex_ids().filter(|&v| g.coord(v)[0] == x).collect()
    }

    #[test]
    fn single_edge() {
        let g = grid(1, 0);
        let r = max_flow(&g, &[3], &[0], &[1]).unwrap();
        assert_eq!(r.value, 3);
        assert_eq!(r.cut, vec![0]);
        r.verify(&g, &[3], &[0], &[1]).unwrap();
    }

    #[test]
    fn box_left_to_right() {
        let g = grid(2, 2);
        let (s, t) = (column(&g, 0), column(&g, 2));
        let r = max_flow(&g, &[1; 12], &s, &t).unwrap();
        assert_eq!(r.value, 3);
        assert_eq!(r.cut.len(), 3);
        // the canonical cut sits next to the sources
        assert_eq!(r.source_side, s);
        r.verify(&g, &[1; 12], &s, &t).unwrap();
        assert_eq!(min_cardinality_cut(&g, &s, &t).unwrap(), 3);
    }

    #[test]
    fn disconnected_terminals() {
        let g = LatticeGraph::from_predicate(2, 1, vec![0, 0], vec![3, 0], MemoryBudget::default(), |z| Ok(z[0] != 2))
            .unwrap();
        let a = g.vertex_at(&[0, 0]).unwrap();
        let b = g.vertex_at(&[3, 0]).unwrap();
        let r = max_flow(&g, &vec![1; g.num_edges()], &[a], &[b]).unwrap();
        assert_eq!(r.value, 0);
        assert!(r.cut.is_empty());
        assert_eq!(min_cardinality_cut(&g, &[a], &[b]).unwrap(), 0);
    }

    #[test]
    fn overlapping_terminals_rejected() {
        let g = grid(1, 0);
        assert!(matches!(max_flow(&g, &[1], &[0], &[0, 1]), Err(Error::InvalidFlowProblem(_))));
    }

    #[test]
    fn boundary_examples() {
        let g = grid(2, 2);
        assert!(edge_boundary(&g, &[true; 9]).is_empty());
        assert_eq!(full_edge_boundary(&g, &[true; 9]).len(), 12);
        let mut centre = [false; 9];
        centre[g.vertex_at(&[1, 1]).unwrap() as usize] = true;
        assert_eq!(edge_boundary(&g, &centre).len(), 4);
        let left: Vec<bool> = g.vertex_ids().map(|v| g.coord(v)[0] == 0).collect();
        let crossing = edge_boundary(&g, &left);
        assert_eq!(crossing.len(), 3);
        assert!(crossing.iter().all(|&e| {
            let [a, b] = g.edge(e);
            g.coord(a)[1] == g.coord(b)[1]
        }));
    }

    #[test]
    fn cutset_predicates() {
        let g = grid(2, 2);
        let (s, t) = (column(&g, 0), column(&g, 2));
        assert!(!is_cutset(&g, &[], &s, &t));
        let all: Vec<EdgeId> = (0..12).collect();
        assert!(is_cutset(&g, &all, &s, &t));
        let field = CapacityField::constant(12, 1, 1);
        let cut = max_flow(&g, &field.numerators, &s, &t).unwrap().cut;
        assert!(is_epsilon_cutset(&g, &field, &cut, &s, &t, 0.0).unwrap());
        let extra = (0..12).find(|e| !cut.contains(e)).unwrap();
        let mut bigger = cut.clone();
        bigger.push(extra);
        assert!(is_epsilon_cutset(&g, &field, &bigger, &s, &t, 2.0 / 2.0).unwrap());
        assert!(!is_epsilon_cutset(&g, &field, &bigger, &s, &t, 0.0).unwrap());
        assert!(matches!(is_epsilon_cutset(&g, &field, &[], &s, &t, 1.0), Err(Error::NotACutset)));
    }

    #[test]
    fn brute_force_cases() {
        let g = grid(1, 0);
        let one = brute_force_min_cut(&g, &CapacityField::constant(1, 5, 1), &[0], &[1]).unwrap();
        assert_eq!(one.edges, vec![0]);
        let g = grid(2, 2);
        let (s, t) = (column(&g, 0), column(&g, 2));
        let cut = brute_force_min_cut(&g, &CapacityField::constant(12, 1, 1), &s, &t).unwrap();
        assert_eq!(cut.capacity, 3);
        let big = grid(5, 4);
        assert!(matches!(
            brute_force_min_cut(&big, &CapacityField::constant(big.num_edges(), 1, 1), &[0], &[1]),
            Err(Error::OracleTooLarge { .. })
        ));
    }

    #[test]
    fn lexicographic_mask_order() {
        // {0,2} < {1}; {0} < {0,1}; {0,1} < {0,2}
        assert!(mask_lex_less(0b101, 0b010));
        assert!(mask_lex_less(0b001, 0b011));
        assert!(!mask_lex_less(0b011, 0b001));
        assert!(mask_lex_less(0b011, 0b101));
        assert!(!mask_lex_less(0b101, 0b101));
    }
}
