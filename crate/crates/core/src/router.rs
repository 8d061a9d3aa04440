//! Coupling-graph modeling and a deliberately simple SWAP-insertion router:
//! no gate reordering, no logical remapping, deterministic tie-breaks.

use std::collections::VecDeque;

use serde::Serialize;

use crate::circuit::{Circuit, DepthReport, Gate};
use crate::error::{Error, Result};

/// Undirected physical connectivity of a device.
#[derive(Debug, Clone)]
pub struct CouplingGraph {
    pub n_physical: usize,
    pub edges: Vec<(usize, usize)>,
    pub name: String,
    adjacency: Vec<Vec<usize>>,
}

impl CouplingGraph {
    pub fn new(n_physical: usize, mut edges: Vec<(usize, usize)>, name: &str) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n_physical];
        edges.retain(|&(u, v)| u != v);
        for &(u, v) in &edges {
            if u >= n_physical || v >= n_physical {
                return Err(Error::Routing(format!(
                    "edge ({u}, {v}) references a node outside 0..{n_physical}"
                )));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in adjacency.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }
        Ok(CouplingGraph { n_physical, edges, name: name.to_string(), adjacency })
    }

    /// Parse an edge-list file: one `u v` pair per line, `#` comments.
    pub fn from_edge_list(text: &str, name: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max_node = 0usize;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let parse = |f: Option<&str>| -> Result<usize> {
                f.and_then(|s| s.parse().ok()).ok_or_else(|| Error::Parse {
                    line: idx + 1,
                    message: format!("bad edge line `{line}`"),
                })
            };
            let u = parse(parts.next())?;
            let v = parse(parts.next())?;
            if parts.next().is_some() {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("trailing tokens on edge line `{line}`"),
                });
            }
            max_node = max_node.max(u).max(v);
            edges.push((u, v));
        }
        if edges.is_empty() {
            return Err(Error::Parse { line: 0, message: "no edges in file".into() });
        }
        Self::new(max_node + 1, edges, name)
    }

    pub fn line(n: usize) -> Result<Self> {
        Self::new(n, (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect(), "line")
    }

    pub fn ring(n: usize) -> Result<Self> {
        let mut edges: Vec<_> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        if n > 2 {
            edges.push((n - 1, 0));
        }
        Self::new(n, edges, "ring")
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Self::new(n, edges, "complete")
    }

    /// Parametric heavy-hex-style lattice: horizontal chains of length
    /// 4·cols joined by bridge qubits every fourth column, with the bridge
    /// columns offset by two on alternating row pairs. Every node has
    /// degree ≤ 3.
    pub fn heavy_hex(rows: usize, cols: usize) -> Result<Self> {
        if rows < 1 || cols < 1 {
            return Err(Error::Routing("heavy-hex needs rows >= 1 and cols >= 1".into()));
        }
        let width = 4 * cols;
        let mut edges = Vec::new();
        let row_base = |r: usize| r * width;
        for r in 0..rows {
            for c in 0..width - 1 {
                edges.push((row_base(r) + c, row_base(r) + c + 1));
            }
        }
        let mut next = rows * width;
        for r in 0..rows.saturating_sub(1) {
            let offset = if r % 2 == 0 { 0 } else { 2 };
            let mut c = offset;
            while c < width {
                let bridge = next;
                next += 1;
                edges.push((row_base(r) + c, bridge));
                edges.push((bridge, row_base(r + 1) + c));
                c += 4;
            }
        }
        Self::new(next, edges, "heavy-hex")
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn is_connected(&self) -> bool {
        if self.n_physical == 0 {
            return true;
        }
        let mut seen = vec![false; self.n_physical];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// BFS distances from `from`; `usize::MAX` marks unreachable nodes.
    fn distances_from(&self, from: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n_physical];
        dist[from] = 0;
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

/// Injective map of logical qubits onto physical nodes, with a module tag
/// per logical qubit.
#[derive(Debug, Clone)]
pub struct LayoutAssignment {
    pub logical_to_physical: Vec<usize>,
    pub module_tags: Vec<String>,
    pub name: String,
}

impl LayoutAssignment {
    pub fn new(logical_to_physical: Vec<usize>, module_tags: Vec<String>, name: &str) -> Result<Self> {
        if logical_to_physical.len() != module_tags.len() {
            return Err(Error::Routing("one module tag per logical qubit required".into()));
        }
        let mut sorted = logical_to_physical.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != logical_to_physical.len() {
            return Err(Error::Routing("layout maps two logical qubits to one node".into()));
        }
        Ok(LayoutAssignment { logical_to_physical, module_tags, name: name.to_string() })
    }

    /// Parse `logical physical module` triples, one per line, `#` comments.
    pub fn from_text(text: &str, name: &str) -> Result<Self> {
        let mut triples: Vec<(usize, usize, String)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected `logical physical module`, got `{line}`"),
                });
            }
            let logical = parts[0].parse().map_err(|_| Error::Parse {
                line: idx + 1,
                message: format!("bad logical index `{}`", parts[0]),
            })?;
            let physical = parts[1].parse().map_err(|_| Error::Parse {
                line: idx + 1,
                message: format!("bad physical index `{}`", parts[1]),
            })?;
            triples.push((logical, physical, parts[2].to_string()));
        }
        triples.sort_by_key(|t| t.0);
        for (want, (got, _, _)) in triples.iter().enumerate() {
            if *got != want {
                return Err(Error::Routing(format!(
                    "logical indices must cover 0..{} exactly; missing {want}",
                    triples.len()
                )));
            }
        }
        let (map, tags) = triples.into_iter().map(|(_, p, m)| (p, m)).unzip();
        Self::new(map, tags, name)
    }

    pub fn validate_for(&self, graph: &CouplingGraph) -> Result<()> {
        for &p in &self.logical_to_physical {
            if p >= graph.n_physical {
                return Err(Error::Routing(format!(
                    "layout targets node {p} but graph `{}` has {} nodes",
                    graph.name, graph.n_physical
                )));
            }
        }
        Ok(())
    }
}

/// A routed circuit over physical qubits plus routing bookkeeping.
#[derive(Debug, Clone)]
pub struct RoutedCircuit {
    pub circuit: Circuit,
    pub inserted_swaps: usize,
    /// Where each logical qubit's state lives after routing.
    pub final_permutation: Vec<usize>,
    pub depth: DepthReport,
    /// Always true: this router never remaps module tags.
    pub modularity_preserved: bool,
}

fn remap_gate(gate: &Gate, perm: &[usize]) -> Gate {
    let mut g = gate.clone();
    match &mut g {
        Gate::Hadamard { target }
        | Gate::PauliX { target }
        | Gate::PauliY { target }
        | Gate::PauliZ { target }
        | Gate::Phase { target, .. }
        | Gate::Unitary { target, .. } => *target = perm[*target],
        Gate::Cnot { control, target }
        | Gate::Cz { control, target }
        | Gate::ControlledPhase { control, target, .. }
        | Gate::ControlledUnitary { control, target, .. } => {
            *control = perm[*control];
            *target = perm[*target];
        }
        Gate::Swap { a, b } => {
            *a = perm[*a];
            *b = perm[*b];
        }
    }
    g
}

/// Greedy SWAP-insertion routing: gates are emitted in order; a two-qubit
/// gate with non-adjacent endpoints first walks its first operand along a
/// shortest path toward the second (lowest-numbered neighbor on ties).
pub fn route(
    logical: &Circuit,
    graph: &CouplingGraph,
    layout: &LayoutAssignment,
) -> Result<RoutedCircuit> {
    layout.validate_for(graph)?;
    if logical.n_qubits() > layout.logical_to_physical.len() {
        return Err(Error::Routing(format!(
            "circuit uses {} qubits but the layout assigns {}",
            logical.n_qubits(),
            layout.logical_to_physical.len()
        )));
    }
    // perm[l] = physical home of logical l; occupant[p] = logical on node p.
    let mut perm = layout.logical_to_physical.clone();
    let mut occupant = vec![usize::MAX; graph.n_physical];
    for (l, &p) in perm.iter().enumerate() {
        occupant[p] = l;
    }

    let mut routed = Circuit::new(graph.n_physical);
    let mut inserted_swaps = 0usize;
    for gate in logical.gates() {
        let qubits = gate.qubits();
        if qubits.len() == 2 {
            let (a, b) = (qubits[0], qubits[1]);
            loop {
                let dist = graph.distances_from(perm[b]);
                if dist[perm[a]] == usize::MAX {
                    return Err(Error::Routing(format!(
                        "nodes {} and {} are disconnected in `{}`",
                        perm[a], perm[b], graph.name
                    )));
                }
                if dist[perm[a]] <= 1 {
                    break;
                }
                let step = *graph
                    .neighbors(perm[a])
                    .iter()
                    .min_by_key(|&&n| (dist[n], n))
                    .expect("connected node has neighbors");
                routed.append(Gate::Swap { a: perm[a], b: step })?;
                inserted_swaps += 1;
                let displaced = occupant[step];
                occupant[perm[a]] = displaced;
                if displaced != usize::MAX {
                    perm[displaced] = perm[a];
                }
                occupant[step] = a;
                perm[a] = step;
            }
        }
        routed.append(remap_gate(gate, &perm))?;
    }
    let depth = routed.depth_report();
    Ok(RoutedCircuit {
        circuit: routed,
        inserted_swaps,
        final_permutation: perm,
        depth,
        modularity_preserved: true,
    })
}

/// One row of a layout comparison table.
#[derive(Debug, Clone, Serialize)]
pub struct LayoutComparison {
    pub layout: String,
    pub inserted_swaps: usize,
    pub depth: usize,
    pub two_qubit_count: usize,
    pub modularity_preserved: bool,
}

/// Route the same circuit under several layouts and order the results by
/// depth (then by swap count).
pub fn compare_layouts(
    logical: &Circuit,
    graph: &CouplingGraph,
    layouts: &[LayoutAssignment],
) -> Result<Vec<LayoutComparison>> {
    if layouts.len() < 2 {
        return Err(Error::Routing("compare_layouts needs at least two layouts".into()));
    }
    let mut rows = Vec::with_capacity(layouts.len());
    for layout in layouts {
        let r = route(logical, graph, layout)?;
        rows.push(LayoutComparison {
            layout: layout.name.clone(),
            inserted_swaps: r.inserted_swaps,
            depth: r.depth.depth,
            two_qubit_count: r.depth.two_qubit_count,
            modularity_preserved: r.modularity_preserved,
        });
    }
    rows.sort_by_key(|r| (r.depth, r.inserted_swaps));
    Ok(rows)
}
