//! Labelled transition diagrams of pile lattices.
//!
//! A `Diagram` is the graph of the covering relation: nodes are interned
//! piles, edges carry the column label of the grain fall that produced them.
//! The same type holds a single-`n` lattice and the stacked `<= n` filter
//! (where labels follow the infinite-column convention, see `infinite`).

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::partition::Partition;

/// Default cap on interned nodes; the reachable sets grow quickly in `n`.
pub const DEFAULT_NODE_BUDGET: usize = 10_000_000;

#[derive(Debug, Error)]
pub enum DiagramError {
    #[error("node budget of {budget} exceeded while building {context}")]
    BudgetExceeded { budget: usize, context: String },
    #[error("grain counts differ: {left} vs {right}")]
    GrainMismatch { left: u64, right: u64 },
    #[error("partition ({0}) is not a node of the diagram")]
    NodeNotFound(Partition),
    #[error("lattice violation: {0}")]
    LatticeViolation(String),
    #[error("malformed diagram serialization: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: usize,
    pub label: usize,
    pub dst: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiagramKind {
    /// All piles reachable from a single column of `n` grains.
    Single,
    /// Every lattice from 0 to `n` grains stacked with grain-addition edges.
    UpTo,
}

/// Coordinate convention used when presenting an `UpTo` diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coords {
    /// Plain piles; intra-level labels as in the finite lattices, the
    /// grain-addition edge labelled 0.
    Finite,
    /// Implicit infinite first column: every label shifted up by one, the
    /// grain-addition edge labelled 1.
    Infinite,
}

/// Outcome of comparing two piles in the reachability order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderRel {
    Equal,
    /// First argument is strictly above: the second is reachable from it.
    Greater,
    /// First argument is strictly below.
    Less,
    Incomparable,
}

#[derive(Clone)]
pub struct Diagram {
    kind: DiagramKind,
    n: u64,
    nodes: Vec<Partition>,
    edges: Vec<Edge>,
    index: HashMap<Partition, usize>,
    out: Vec<Vec<(usize, usize)>>,
    inn: Vec<Vec<(usize, usize)>>,
}

impl PartialEq for Diagram {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.n == other.n
            && self.nodes == other.nodes
            && self.edges == other.edges
    }
}

impl Eq for Diagram {}

impl std::fmt::Debug for Diagram {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Diagram({:?}, n={}, {} nodes, {} edges)",
            self.kind,
            self.n,
            self.nodes.len(),
            self.edges.len()
        )
    }
}

impl Diagram {
    /// Builds a diagram from raw parts: sorts edges, interns nodes, derives
    /// adjacency. Node order is preserved as given.
    pub(crate) fn assemble(
        kind: DiagramKind,
        n: u64,
        nodes: Vec<Partition>,
        mut edges: Vec<Edge>,
    ) -> Diagram {
        edges.sort_unstable();
        edges.dedup();
        let mut index = HashMap::with_capacity(nodes.len());
        for (id, p) in nodes.iter().enumerate() {
            let prev = index.insert(p.clone(), id);
            debug_assert!(prev.is_none(), "duplicate node {p}");
        }
        let mut out = vec![Vec::new(); nodes.len()];
        let mut inn = vec![Vec::new(); nodes.len()];
        for e in &edges {
            out[e.src].push((e.label, e.dst));
            inn[e.dst].push((e.label, e.src));
        }
        for l in inn.iter_mut() {
            l.sort_unstable();
        }
        Diagram {
            kind,
            n,
            nodes,
            edges,
            index,
            out,
            inn,
        }
    }

    pub fn kind(&self) -> DiagramKind {
        self.kind
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[Partition] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn partition(&self, id: usize) -> &Partition {
        &self.nodes[id]
    }

    pub fn id_of(&self, p: &Partition) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn contains(&self, p: &Partition) -> bool {
        self.index.contains_key(p)
    }

    /// Outgoing `(label, dst)` pairs in ascending label order.
    pub fn successors_of(&self, id: usize) -> &[(usize, usize)] {
        &self.out[id]
    }

    /// Incoming `(label, src)` pairs.
    pub fn predecessors_of(&self, id: usize) -> &[(usize, usize)] {
        &self.inn[id]
    }

    /// Follows the edge with the given label, if present.
    pub fn step(&self, id: usize, label: usize) -> Option<usize> {
        self.out[id]
            .iter()
            .find(|&&(l, _)| l == label)
            .map(|&(_, d)| d)
    }

    /// Ids of nodes with no incoming edge.
    pub fn sources(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&id| self.inn[id].is_empty())
            .collect()
    }

    /// Ids of nodes with no outgoing edge.
    pub fn sinks(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&id| self.out[id].is_empty())
            .collect()
    }
}

/// Breadth-first construction of the single-`n` lattice from the column
/// `(n)`, expanding successors in ascending label order. Node ids are
/// discovery order, which makes two runs bit-identical.
pub fn build_bfs(n: u64) -> Result<Diagram, DiagramError> {
    build_bfs_budgeted(n, DEFAULT_NODE_BUDGET)
}

pub fn build_bfs_budgeted(n: u64, budget: usize) -> Result<Diagram, DiagramError> {
    let root = Partition::column(n);
    let mut nodes = vec![root.clone()];
    let mut index = HashMap::new();
    index.insert(root, 0usize);
    let mut edges = Vec::new();
    let mut head = 0usize;
    while head < nodes.len() {
        let s = nodes[head].clone();
        for (label, t) in s.successors() {
            let dst = match index.get(&t) {
                Some(&id) => id,
                None => {
                    let id = nodes.len();
                    if id >= budget {
                        return Err(DiagramError::BudgetExceeded {
                            budget,
                            context: format!("single lattice for n={n}"),
                        });
                    }
                    nodes.push(t.clone());
                    index.insert(t, id);
                    id
                }
            };
            edges.push(Edge {
                src: head,
                label,
                dst,
            });
        }
        head += 1;
    }
    Ok(Diagram::assemble(DiagramKind::Single, n, nodes, edges))
}

/// Renumbers an edge soup into canonical BFS discovery order from `root`,
/// so that diagrams built by different methods compare structurally equal.
pub(crate) fn canonicalize(
    kind: DiagramKind,
    n: u64,
    nodes: Vec<Partition>,
    edges: Vec<Edge>,
    root: usize,
) -> Diagram {
    let mut out = vec![Vec::new(); nodes.len()];
    for e in &edges {
        out[e.src].push((e.label, e.dst));
    }
    for l in out.iter_mut() {
        l.sort_unstable();
    }
    let mut order = vec![usize::MAX; nodes.len()];
    let mut queue = vec![root];
    order[root] = 0;
    let mut head = 0;
    while head < queue.len() {
        let u = queue[head];
        head += 1;
        for &(_, v) in &out[u] {
            if order[v] == usize::MAX {
                order[v] = queue.len();
                queue.push(v);
            }
        }
    }
    assert!(
        queue.len() == nodes.len(),
        "diagram is not connected from its root"
    );
    let mut new_nodes = vec![Partition::empty(); nodes.len()];
    for (old, p) in nodes.into_iter().enumerate() {
        new_nodes[order[old]] = p;
    }
    let new_edges = edges
        .into_iter()
        .map(|e| Edge {
            src: order[e.src],
            label: e.label,
            dst: order[e.dst],
        })
        .collect();
    Diagram::assemble(kind, n, new_nodes, new_edges)
}

/// Compares two piles of equal grain count by prefix-sum domination:
/// `a` is above `b` exactly when every prefix sum of `a` is at least the
/// corresponding prefix sum of `b`.
pub fn compare(a: &Partition, b: &Partition) -> Result<OrderRel, DiagramError> {
    if a.grains() != b.grains() {
        return Err(DiagramError::GrainMismatch {
            left: a.grains(),
            right: b.grains(),
        });
    }
    let len = a.len().max(b.len());
    let (mut sa, mut sb) = (0u64, 0u64);
    let (mut ge, mut le) = (true, true);
    for j in 0..len {
        sa += a.parts().get(j).copied().unwrap_or(0) as u64;
        sb += b.parts().get(j).copied().unwrap_or(0) as u64;
        ge &= sa >= sb;
        le &= sa <= sb;
    }
    Ok(match (ge, le) {
        (true, true) => OrderRel::Equal,
        (true, false) => OrderRel::Greater,
        (false, true) => OrderRel::Less,
        (false, false) => OrderRel::Incomparable,
    })
}

/// Greatest common descendant by the prefix-sum minimum formula. The
/// pointwise minimum of two concave prefix-sum profiles is concave, so the
/// decoded difference sequence is always a partition.
pub fn infimum(a: &Partition, b: &Partition) -> Result<Partition, DiagramError> {
    if a.grains() != b.grains() {
        return Err(DiagramError::GrainMismatch {
            left: a.grains(),
            right: b.grains(),
        });
    }
    let len = a.len().max(b.len());
    let mut parts = Vec::with_capacity(len);
    let (mut sa, mut sb, mut prev) = (0u64, 0u64, 0u64);
    for j in 0..len {
        sa += a.parts().get(j).copied().unwrap_or(0) as u64;
        sb += b.parts().get(j).copied().unwrap_or(0) as u64;
        let m = sa.min(sb);
        let part = m - prev;
        prev = m;
        if part > 0 {
            parts.push(part as u32);
        }
    }
    Ok(Partition::new(parts).expect("prefix minima decode to a partition"))
}

/// Least common ancestor of two nodes, computed over the diagram. Unique by
/// the lattice property; a failure of uniqueness is reported as an error.
pub fn supremum(a: &Partition, b: &Partition, d: &Diagram) -> Result<Partition, DiagramError> {
    let ia = d
        .id_of(a)
        .ok_or_else(|| DiagramError::NodeNotFound(a.clone()))?;
    let ib = d
        .id_of(b)
        .ok_or_else(|| DiagramError::NodeNotFound(b.clone()))?;
    let tables = OrderTables::build(d);
    let id = tables
        .join_id(ia, ib)
        .map_err(DiagramError::LatticeViolation)?;
    Ok(d.partition(id).clone())
}

/// Dense reachability rows, one bit per node.
#[derive(Clone, PartialEq, Eq)]
pub struct BitRow(Vec<u64>);

impl BitRow {
    fn new(len: usize) -> Self {
        BitRow(vec![0; len.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn or_with(&mut self, other: &BitRow) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }

    fn and(a: &BitRow, b: &BitRow) -> BitRow {
        BitRow(a.0.iter().zip(&b.0).map(|(x, y)| x & y).collect())
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &bits)| {
            (0..64).filter_map(move |b| {
                if bits >> b & 1 == 1 {
                    Some(w * 64 + b)
                } else {
                    None
                }
            })
        })
    }
}

/// Reflexive reachability closure in both directions. Node ids are in rank
/// order (every edge raises the grading by one), so a single sweep each way
/// suffices.
pub struct OrderTables {
    /// `desc[u]` holds every node reachable from `u`, including `u`.
    pub desc: Vec<BitRow>,
    /// `anc[u]` holds every node that reaches `u`, including `u`.
    pub anc: Vec<BitRow>,
    rank: Vec<u64>,
}

impl OrderTables {
    pub fn build(d: &Diagram) -> OrderTables {
        let len = d.node_count();
        let order = {
            // Every edge raises the rank by exactly 1, in both diagram
            // kinds, so rank order is a topological order.
            let mut ids: Vec<usize> = (0..len).collect();
            ids.sort_by_key(|&id| d.partition(id).rank());
            ids
        };
        let mut desc = vec![BitRow::new(len); len];
        let mut anc = vec![BitRow::new(len); len];
        for &u in order.iter().rev() {
            desc[u].set(u);
            let mut acc = BitRow::new(len);
            for &(_, v) in d.successors_of(u) {
                acc.or_with(&desc[v]);
            }
            desc[u].or_with(&acc);
        }
        for &u in order.iter() {
            anc[u].set(u);
            let mut acc = BitRow::new(len);
            for &(_, v) in d.predecessors_of(u) {
                acc.or_with(&anc[v]);
            }
            anc[u].or_with(&acc);
        }
        let rank = (0..len).map(|id| d.partition(id).rank()).collect();
        OrderTables { desc, anc, rank }
    }

    pub fn reaches(&self, from: usize, to: usize) -> bool {
        self.desc[from].get(to)
    }

    /// Greatest lower bound over the diagram: the minimum-rank common
    /// descendant, provided it dominates the whole set.
    pub fn meet_id(&self, a: usize, b: usize) -> Result<usize, String> {
        let common = BitRow::and(&self.desc[a], &self.desc[b]);
        self.extremum(common, a, b, true)
    }

    /// Least upper bound over the diagram.
    pub fn join_id(&self, a: usize, b: usize) -> Result<usize, String> {
        let common = BitRow::and(&self.anc[a], &self.anc[b]);
        self.extremum(common, a, b, false)
    }

    fn extremum(&self, common: BitRow, a: usize, b: usize, meet: bool) -> Result<usize, String> {
        let side = if meet { "descendant" } else { "ancestor" };
        let mut best: Option<usize> = None;
        let mut tie = false;
        for u in common.ones() {
            match best {
                None => best = Some(u),
                Some(v) => {
                    let better = if meet {
                        self.rank[u] < self.rank[v]
                    } else {
                        self.rank[u] > self.rank[v]
                    };
                    if self.rank[u] == self.rank[v] {
                        tie = true;
                    } else if better {
                        best = Some(u);
                        tie = false;
                    }
                }
            }
        }
        let best = best.ok_or_else(|| format!("nodes {a} and {b} share no common {side}"))?;
        if tie {
            return Err(format!(
                "nodes {a} and {b} have several extremal common {side}s"
            ));
        }
        // The candidate must bound every other common element: the meet
        // reaches every common descendant, every common ancestor reaches
        // the join.
        for u in common.ones() {
            let ok = if meet {
                self.reaches(best, u)
            } else {
                self.reaches(u, best)
            };
            if !ok {
                return Err(format!(
                    "common {side} {u} of {a},{b} is incomparable with the extremum {best}"
                ));
            }
        }
        Ok(best)
    }
}

/// Report of the exhaustive lattice verification of a single-`n` diagram.
#[derive(Debug)]
pub struct LatticeReport {
    pub n: u64,
    pub node_count: usize,
    pub pairs_checked: usize,
    pub unique_source: bool,
    pub unique_sink: bool,
    pub sink_is_fixed_point: bool,
    pub violations: Vec<String>,
}

impl LatticeReport {
    pub fn passed(&self) -> bool {
        self.unique_source
            && self.unique_sink
            && self.sink_is_fixed_point
            && self.violations.is_empty()
    }
}

/// Checks, over all node pairs: unique top and bottom, existence and
/// uniqueness of meets and joins in the diagram, and agreement of the
/// diagram meet with the prefix-sum formula. Failures are report entries,
/// not errors.
pub fn check_lattice(d: &Diagram) -> LatticeReport {
    let tables = OrderTables::build(d);
    let len = d.node_count();
    let mut violations = Vec::new();
    let sources = d.sources();
    let sinks = d.sinks();
    let unique_source = sources.len() == 1 && d.partition(sources[0]) == &Partition::column(d.n());
    let unique_sink = sinks.len() == 1;
    let sink_is_fixed_point =
        unique_sink && d.partition(sinks[0]) == &Partition::fixed_point(d.n());
    let mut pairs = 0;
    for a in 0..len {
        for b in (a + 1)..len {
            pairs += 1;
            match tables.meet_id(a, b) {
                Ok(m) => {
                    let formula = infimum(d.partition(a), d.partition(b))
                        .expect("equal grain counts inside one diagram");
                    if &formula != d.partition(m) {
                        violations.push(format!(
                            "meet mismatch for ({}),({}): diagram ({}) vs formula ({})",
                            d.partition(a),
                            d.partition(b),
                            d.partition(m),
                            formula
                        ));
                    }
                }
                Err(e) => violations.push(format!("meet failure: {e}")),
            }
            if let Err(e) = tables.join_id(a, b) {
                violations.push(format!("join failure: {e}"));
            }
        }
    }
    LatticeReport {
        n: d.n(),
        node_count: len,
        pairs_checked: pairs,
        unique_source,
        unique_sink,
        sink_is_fixed_point,
        violations,
    }
}

/// Verifies that a marked node subset is closed under the diagram meet and
/// join. Returns the first offending pair as an error string.
pub fn sublattice_closed(d: &Diagram, members: &[usize]) -> Result<(), String> {
    let tables = OrderTables::build(d);
    let mut inside = vec![false; d.node_count()];
    for &id in members {
        inside[id] = true;
    }
    for (ia, &a) in members.iter().enumerate() {
        for &b in &members[ia + 1..] {
            let m = tables.meet_id(a, b)?;
            if !inside[m] {
                return Err(format!(
                    "meet of ({}) and ({}) escapes the subset: ({})",
                    d.partition(a),
                    d.partition(b),
                    d.partition(m)
                ));
            }
            let j = tables.join_id(a, b)?;
            if !inside[j] {
                return Err(format!(
                    "join of ({}) and ({}) escapes the subset: ({})",
                    d.partition(a),
                    d.partition(b),
                    d.partition(j)
                ));
            }
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct DiagramJson {
    kind: DiagramKind,
    n: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coords: Option<Coords>,
    nodes: Vec<Partition>,
    edges: Vec<(usize, usize, usize)>,
}

fn presented_edges(d: &Diagram, coords: Coords) -> Vec<(usize, usize, usize)> {
    let shift = matches!(d.kind(), DiagramKind::UpTo) && coords == Coords::Finite;
    d.edges()
        .iter()
        .map(|e| {
            let label = if shift { e.label - 1 } else { e.label };
            (e.src, label, e.dst)
        })
        .collect()
}

/// Deterministic JSON image: nodes in id order, edges sorted
/// lexicographically. Single diagrams omit the `coords` field.
pub fn to_json(d: &Diagram, coords: Coords) -> String {
    let doc = DiagramJson {
        kind: d.kind(),
        n: d.n(),
        coords: match d.kind() {
            DiagramKind::Single => None,
            DiagramKind::UpTo => Some(coords),
        },
        nodes: d.nodes().to_vec(),
        edges: presented_edges(d, coords),
    };
    serde_json::to_string(&doc).expect("diagram serialization cannot fail")
}

/// Inverse of `to_json`; labels are normalized back to the stored
/// convention.
pub fn from_json(s: &str) -> Result<Diagram, DiagramError> {
    let doc: DiagramJson =
        serde_json::from_str(s).map_err(|e| DiagramError::Parse(e.to_string()))?;
    let shift = doc.kind == DiagramKind::UpTo && doc.coords == Some(Coords::Finite);
    let node_count = doc.nodes.len();
    let mut edges = Vec::with_capacity(doc.edges.len());
    for (src, label, dst) in doc.edges {
        if src >= node_count || dst >= node_count {
            return Err(DiagramError::Parse(format!(
                "edge ({src},{label},{dst}) points outside the node table"
            )));
        }
        let label = if shift { label + 1 } else { label };
        edges.push(Edge { src, label, dst });
    }
    Ok(Diagram::assemble(doc.kind, doc.n, doc.nodes, edges))
}

fn node_label(d: &Diagram, coords: Coords, id: usize) -> String {
    let p = d.partition(id);
    match (d.kind(), coords) {
        (DiagramKind::UpTo, Coords::Infinite) => {
            if p.is_empty() {
                "~".to_string()
            } else {
                format!("~,{p}")
            }
        }
        _ => p.to_string(),
    }
}

/// Deterministic DOT image with one node and one edge per line.
pub fn to_dot(d: &Diagram, coords: Coords) -> String {
    let mut s = String::new();
    s.push_str("digraph spm {\n");
    for id in 0..d.node_count() {
        let _ = writeln!(s, "p_{id} [label=\"{}\"];", node_label(d, coords, id));
    }
    for (src, label, dst) in presented_edges(d, coords) {
        let _ = writeln!(s, "p_{src} -> p_{dst} [label=\"{label}\"];");
    }
    s.push_str("}\n");
    s
}
