//! The infinite-column model and its finite filters.
//!
//! Starting from an infinitely tall first column, every reachable state is
//! the infinite column followed by a finite tail that satisfies the usual
//! membership characterization. Reachability is governed by shot vectors
//! (per-column firing counts), which turn order comparisons, meets and
//! joins into componentwise vector arithmetic.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::diagram::{
    build_bfs_budgeted, canonicalize, Diagram, DiagramError, DiagramKind, Edge, OrderRel,
    OrderTables, DEFAULT_NODE_BUDGET,
};
use crate::incremental::build_next_budgeted;
use crate::partition::{all_partitions, Partition};

#[derive(Debug, Error)]
pub enum InfiniteError {
    #[error("tail ({0}) violates the membership characterization")]
    CharacterizationViolation(Partition),
    #[error("invalid infinite-pile literal {literal:?}: {reason}")]
    Parse { literal: String, reason: String },
}

/// A state of the infinite model: an implicit infinite first column and a
/// finite tail of ordinary columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InfinitePartition {
    tail: Partition,
}

impl InfinitePartition {
    /// Wraps a tail, enforcing the membership characterization (the
    /// infinite column itself imposes nothing).
    pub fn new(tail: Partition) -> Result<Self, InfiniteError> {
        if tail.is_spm() {
            Ok(InfinitePartition { tail })
        } else {
            Err(InfiniteError::CharacterizationViolation(tail))
        }
    }

    /// The top element: nothing has fallen yet.
    pub fn top() -> Self {
        InfinitePartition {
            tail: Partition::empty(),
        }
    }

    pub fn tail(&self) -> &Partition {
        &self.tail
    }

    /// Grains that have left the infinite column.
    pub fn grains(&self) -> u64 {
        self.tail.grains()
    }
}

impl fmt::Display for InfinitePartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.tail.is_empty() {
            write!(f, "~")
        } else {
            write!(f, "~,{}", self.tail)
        }
    }
}

impl FromStr for InfinitePartition {
    type Err = InfiniteError;

    /// Parses `~` or `~,<tail>` where the tail is a finite pile literal.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let rest = t.strip_prefix('~').ok_or_else(|| InfiniteError::Parse {
            literal: s.to_string(),
            reason: "expected a leading '~'".to_string(),
        })?;
        let tail_str = rest.strip_prefix(',').unwrap_or(rest);
        let tail: Partition = tail_str.parse().map_err(|e| InfiniteError::Parse {
            literal: s.to_string(),
            reason: format!("{e}"),
        })?;
        InfinitePartition::new(tail)
    }
}

/// Per-column firing counts from the top element; component `i` counts the
/// grains that crossed from column `i` to column `i+1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotVector(Vec<u64>);

impl ShotVector {
    pub fn counts(&self) -> &[u64] {
        &self.0
    }

    pub fn component(&self, i: usize) -> u64 {
        debug_assert!(i >= 1);
        self.0.get(i - 1).copied().unwrap_or(0)
    }

    fn len(&self) -> usize {
        self.0.len()
    }

    /// True when every component is bounded by the other vector's.
    pub fn dominated_by(&self, other: &ShotVector) -> bool {
        (1..=self.len().max(other.len())).all(|i| self.component(i) <= other.component(i))
    }

    fn trim(mut v: Vec<u64>) -> Vec<u64> {
        while v.last() == Some(&0) {
            v.pop();
        }
        v
    }

    /// Decodes the difference sequence back into a tail. `None` when the
    /// differences do not form a partition (they must be non-negative and
    /// weakly decreasing, so that zeros form a suffix).
    pub fn to_tail(&self) -> Option<Partition> {
        let mut diffs = Vec::with_capacity(self.len());
        for i in 1..=self.len() {
            diffs.push(self.component(i).checked_sub(self.component(i + 1))?);
        }
        if diffs.windows(2).any(|w| w[0] < w[1]) {
            return None;
        }
        let parts: Vec<u32> = diffs
            .into_iter()
            .take_while(|&d| d > 0)
            .map(|d| d as u32)
            .collect();
        Partition::new(parts).ok()
    }
}

/// Suffix sums of the tail.
pub fn shot_vector(s: &InfinitePartition) -> ShotVector {
    let tail = s.tail().parts();
    let mut counts = vec![0u64; tail.len()];
    let mut acc = 0u64;
    for (i, &part) in tail.iter().enumerate().rev() {
        acc += part as u64;
        counts[i] = acc;
    }
    ShotVector(ShotVector::trim(counts))
}

/// Reachability comparison: higher means fewer grains have fallen, so the
/// order reverses the componentwise order on shot vectors.
pub fn compare_infinite(s: &InfinitePartition, t: &InfinitePartition) -> OrderRel {
    let (ks, kt) = (shot_vector(s), shot_vector(t));
    let ge = ks.dominated_by(&kt);
    let le = kt.dominated_by(&ks);
    match (ge, le) {
        (true, true) => OrderRel::Equal,
        (true, false) => OrderRel::Greater,
        (false, true) => OrderRel::Less,
        (false, false) => OrderRel::Incomparable,
    }
}

/// Greatest common descendant: the state whose shot vector is the
/// componentwise maximum, which is always realizable.
pub fn inf_infinite(s: &InfinitePartition, t: &InfinitePartition) -> InfinitePartition {
    let (ks, kt) = (shot_vector(s), shot_vector(t));
    let len = ks.len().max(kt.len());
    let m: Vec<u64> = (1..=len)
        .map(|i| ks.component(i).max(kt.component(i)))
        .collect();
    let tail = ShotVector(ShotVector::trim(m))
        .to_tail()
        .expect("componentwise max of shot vectors is realizable");
    InfinitePartition::new(tail).expect("meet of valid states is valid")
}

/// How a join was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupRoute {
    /// The componentwise minimum of the shot vectors decoded to a valid
    /// state directly.
    MinVector,
    /// The minimum vector was not realizable; the join was found by
    /// scanning all upper bounds below the vector bound.
    Fallback,
}

/// Least common ancestor, with the route taken.
///
/// The componentwise minimum of two shot vectors need not decode to a valid
/// state; when it does not, every state dominated by the bound is
/// enumerated and the componentwise maximum of their shot vectors is the
/// join (the upper-bound set is closed under meets).
pub fn sup_infinite_traced(
    s: &InfinitePartition,
    t: &InfinitePartition,
) -> (InfinitePartition, SupRoute) {
    let (ks, kt) = (shot_vector(s), shot_vector(t));
    let len = ks.len().min(kt.len());
    let bound: Vec<u64> = (1..=len)
        .map(|i| ks.component(i).min(kt.component(i)))
        .collect();
    let bound = ShotVector(ShotVector::trim(bound));
    if let Some(tail) = bound.to_tail() {
        if tail.is_spm() {
            let u = InfinitePartition { tail };
            debug_assert!(matches!(
                compare_infinite(&u, s),
                OrderRel::Greater | OrderRel::Equal
            ));
            return (u, SupRoute::MinVector);
        }
    }
    let mut best = vec![0u64; bound.len()];
    for grains in 0..=bound.component(1) {
        for tail in all_partitions(grains) {
            if !tail.is_spm() {
                continue;
            }
            let cand = InfinitePartition { tail };
            let kc = shot_vector(&cand);
            if kc.dominated_by(&bound) {
                for (i, slot) in best.iter_mut().enumerate() {
                    *slot = (*slot).max(kc.component(i + 1));
                }
            }
        }
    }
    let tail = ShotVector(ShotVector::trim(best))
        .to_tail()
        .expect("upper bounds are closed under meets");
    let u = InfinitePartition::new(tail).expect("join of valid states is valid");
    (u, SupRoute::Fallback)
}

pub fn sup_infinite(s: &InfinitePartition, t: &InfinitePartition) -> InfinitePartition {
    sup_infinite_traced(s, t).0
}

/// Lattice embedding of a single-`n` lattice: forgets the first column.
pub fn embed_pi(s: &Partition) -> Result<InfinitePartition, InfiniteError> {
    if !s.is_spm() {
        return Err(InfiniteError::CharacterizationViolation(s.clone()));
    }
    let tail = Partition::new(s.parts().iter().skip(1).copied().collect())
        .expect("suffix of a partition is a partition");
    InfinitePartition::new(tail)
}

/// Lattice isomorphism from the stacked finite lattices: the whole pile
/// becomes the tail behind the infinite column.
pub fn chi(s: &Partition) -> Result<InfinitePartition, InfiniteError> {
    if !s.is_spm() {
        return Err(InfiniteError::CharacterizationViolation(s.clone()));
    }
    Ok(InfinitePartition { tail: s.clone() })
}

/// Inverse of `chi`: strips the infinite column.
pub fn chi_inverse(t: &InfinitePartition) -> Partition {
    t.tail().clone()
}

/// How the stacked filter diagram is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UptoMode {
    /// Each level is generated by the incremental step and linked.
    Direct,
    /// Each level is re-extracted from the partial diagram by a
    /// depth-first sweep over its own transition edges before stepping.
    Extract,
}

/// Builds the filter of all states with at most `n` fallen grains, in
/// infinite coordinates: intra-level labels are shifted up by one and each
/// pile links to itself-plus-a-grain-on-column-1 with label 1.
pub fn build_upto(n: u64) -> Result<Diagram, DiagramError> {
    build_upto_with(n, UptoMode::Direct, DEFAULT_NODE_BUDGET)
}

pub fn build_upto_with(n: u64, mode: UptoMode, budget: usize) -> Result<Diagram, DiagramError> {
    let mut nodes: Vec<Partition> = Vec::new();
    let mut index: HashMap<Partition, usize> = HashMap::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut level = build_bfs_budgeted(0, budget)?;
    for m in 0..=n {
        if m > 0 {
            let base = match mode {
                UptoMode::Direct => level,
                UptoMode::Extract => extract_level(&nodes, &edges, &index, m - 1),
            };
            level = build_next_budgeted(&base, budget)?;
        }
        let offset = nodes.len();
        if offset + level.node_count() > budget {
            return Err(DiagramError::BudgetExceeded {
                budget,
                context: format!("filter up to n={n}"),
            });
        }
        for s in level.nodes() {
            index.insert(s.clone(), nodes.len());
            nodes.push(s.clone());
        }
        for e in level.edges() {
            edges.push(Edge {
                src: offset + e.src,
                label: e.label + 1,
                dst: offset + e.dst,
            });
        }
        if m > 0 {
            for (id, s) in nodes.iter().enumerate().take(offset) {
                if s.grains() == m - 1 {
                    let up = s.add_grain(1).expect("column 1 always accepts a grain");
                    edges.push(Edge {
                        src: id,
                        label: 1,
                        dst: index[&up],
                    });
                }
            }
        }
    }
    Ok(Diagram::assemble(DiagramKind::UpTo, n, nodes, edges))
}

/// Recovers the single-`m` diagram from the partial filter by walking the
/// connected component of the column pile over intra-level edges, then
/// renumbering canonically.
fn extract_level(
    nodes: &[Partition],
    edges: &[Edge],
    index: &HashMap<Partition, usize>,
    m: u64,
) -> Diagram {
    let root = index[&Partition::column(m)];
    let mut adj: HashMap<usize, Vec<Edge>> = HashMap::new();
    for e in edges {
        if nodes[e.src].grains() == m && nodes[e.dst].grains() == m {
            adj.entry(e.src).or_default().push(*e);
            adj.entry(e.dst).or_default().push(*e);
        }
    }
    let mut seen = vec![root];
    let mut marked: HashMap<usize, usize> = HashMap::new();
    marked.insert(root, 0);
    let mut head = 0;
    while head < seen.len() {
        let u = seen[head];
        head += 1;
        for e in adj.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
            for v in [e.src, e.dst] {
                if let std::collections::hash_map::Entry::Vacant(slot) = marked.entry(v) {
                    slot.insert(seen.len());
                    seen.push(v);
                }
            }
        }
    }
    let level_nodes: Vec<Partition> = seen.iter().map(|&id| nodes[id].clone()).collect();
    let level_edges: Vec<Edge> = edges
        .iter()
        .filter(|e| marked.contains_key(&e.src) && marked.contains_key(&e.dst))
        .map(|e| Edge {
            src: marked[&e.src],
            label: e.label - 1,
            dst: marked[&e.dst],
        })
        .collect();
    canonicalize(DiagramKind::Single, m, level_nodes, level_edges, 0)
}

/// Verification of the filter and sublattice properties of a stacked
/// diagram: upward closure of the sub-filter with at most `n` grains
/// inside the larger diagram, meet/join closure of that sub-filter, of
/// each embedded level, and the grain laws for cross-level meets and
/// joins.
#[derive(Debug)]
pub struct FilterReport {
    pub n: u64,
    pub ambient_n: u64,
    pub violations: Vec<String>,
    pub pairs_checked: usize,
}

impl FilterReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_filter_sublattice(big: &Diagram, n: u64) -> FilterReport {
    assert!(matches!(big.kind(), DiagramKind::UpTo));
    assert!(n <= big.n());
    let mut violations = Vec::new();
    let tables = OrderTables::build(big);
    let member_ids: Vec<usize> = (0..big.node_count())
        .filter(|&id| big.partition(id).grains() <= n)
        .collect();

    // Upward closure: ancestors never gain grains beyond the bound.
    for &id in &member_ids {
        for anc in tables.anc[id].ones() {
            if big.partition(anc).grains() > n {
                violations.push(format!(
                    "ancestor ({}) of ({}) escapes the {n}-grain filter",
                    big.partition(anc),
                    big.partition(id)
                ));
            }
        }
    }

    let mut pairs = 0;
    for (pos, &a) in member_ids.iter().enumerate() {
        for &b in &member_ids[pos + 1..] {
            pairs += 1;
            let (pa, pb) = (big.partition(a), big.partition(b));
            let (ga, gb) = (pa.grains(), pb.grains());
            let sa = InfinitePartition::new(pa.clone()).expect("diagram nodes are valid");
            let sb = InfinitePartition::new(pb.clone()).expect("diagram nodes are valid");
            let meet = inf_infinite(&sa, &sb);
            let join = sup_infinite(&sa, &sb);
            if !big.contains(meet.tail()) || meet.grains() > n {
                violations.push(format!("meet of ({pa}) and ({pb}) escapes the filter"));
            }
            if !big.contains(join.tail()) || join.grains() > n {
                violations.push(format!("join of ({pa}) and ({pb}) escapes the filter"));
            }
            if meet.grains() != ga.max(gb) {
                violations.push(format!(
                    "meet of ({pa}) and ({pb}) has {} grains, expected {}",
                    meet.grains(),
                    ga.max(gb)
                ));
            }
            if join.grains() > ga.min(gb) {
                violations.push(format!(
                    "join of ({pa}) and ({pb}) has {} grains, above {}",
                    join.grains(),
                    ga.min(gb)
                ));
            }
            if ga == gb {
                // Each embedded level is a sublattice: meets and joins of
                // equal-grain states keep the grain count.
                if join.grains() != ga {
                    violations.push(format!(
                        "join of level-{ga} pair ({pa}),({pb}) left the level"
                    ));
                }
            }
        }
    }
    FilterReport {
        n,
        ambient_n: big.n(),
        violations,
        pairs_checked: pairs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::build_bfs;

    fn inf(s: &str) -> InfinitePartition {
        s.parse().unwrap()
    }

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    #[test]
    fn shot_vector_examples() {
        assert_eq!(shot_vector(&inf("~,2,1")).counts(), &[3, 1]);
        assert_eq!(
            shot_vector(&InfinitePartition::top()).counts(),
            &[] as &[u64]
        );
        assert_eq!(shot_vector(&inf("~,4")).counts(), &[4]);
    }

    #[test]
    fn compare_examples() {
        assert_eq!(
            compare_infinite(&inf("~,3,1"), &inf("~,2,2")),
            OrderRel::Greater
        );
        assert_eq!(
            compare_infinite(&inf("~,4"), &inf("~,2,1")),
            OrderRel::Incomparable
        );
        assert_eq!(
            compare_infinite(&inf("~,1"), &inf("~,2")),
            OrderRel::Greater
        );
        assert_eq!(
            compare_infinite(&inf("~,2,1"), &inf("~,2,1")),
            OrderRel::Equal
        );
    }

    #[test]
    fn inf_examples() {
        assert_eq!(inf_infinite(&inf("~,3,1"), &inf("~,2,2")), inf("~,2,2"));
        assert_eq!(inf_infinite(&inf("~,4"), &inf("~,2,1")), inf("~,3,1"));
        assert_eq!(inf_infinite(&inf("~,2,2"), &inf("~,2,2")), inf("~,2,2"));
    }

    #[test]
    fn sup_examples() {
        let (u, route) = sup_infinite_traced(&inf("~,4"), &inf("~,2,1"));
        assert_eq!(u, inf("~,3"));
        assert_eq!(route, SupRoute::MinVector);
        assert_eq!(sup_infinite(&inf("~,3,1"), &inf("~,2,2")), inf("~,3,1"));
        for x in ["~", "~,4", "~,3,2,1"] {
            assert_eq!(
                sup_infinite(&InfinitePartition::top(), &inf(x)),
                InfinitePartition::top()
            );
        }
    }

    #[test]
    fn sup_fallback_is_exercised() {
        // Shot vectors (8,4) and (7,4,1) have componentwise minimum (7,4),
        // whose differences (3,4) are not a tail; the join is (~,4,3).
        let (u, route) = sup_infinite_traced(&inf("~,4,4"), &inf("~,3,3,1"));
        assert_eq!(route, SupRoute::Fallback);
        assert_eq!(u, inf("~,4,3"));
    }

    #[test]
    fn sup_minimal_among_upper_bounds_exhaustive() {
        let big = build_upto(8).unwrap();
        let states: Vec<InfinitePartition> = big
            .nodes()
            .iter()
            .map(|t| InfinitePartition::new(t.clone()).unwrap())
            .collect();
        for s in &states {
            for t in &states {
                let join = sup_infinite(s, t);
                let mut minimal = None;
                for u in &states {
                    let ge_s =
                        matches!(compare_infinite(u, s), OrderRel::Greater | OrderRel::Equal);
                    let ge_t =
                        matches!(compare_infinite(u, t), OrderRel::Greater | OrderRel::Equal);
                    if ge_s && ge_t {
                        let better = match &minimal {
                            None => true,
                            Some(m) => compare_infinite(u, m) == OrderRel::Less,
                        };
                        if better {
                            minimal = Some(u.clone());
                        }
                    }
                }
                assert_eq!(minimal.as_ref(), Some(&join), "sup({s}, {t})");
            }
        }
    }

    #[test]
    fn embed_and_chi_examples() {
        assert_eq!(embed_pi(&p("3,1")).unwrap(), inf("~,1"));
        assert_eq!(embed_pi(&p("7")).unwrap(), InfinitePartition::top());
        assert_eq!(chi(&p("2,1")).unwrap(), inf("~,2,1"));
        assert_eq!(chi_inverse(&inf("~,2,1")), p("2,1"));
        assert!(embed_pi(&p("3,3,2,2")).is_err());
        for n in 0..=10u64 {
            for s in build_bfs(n).unwrap().nodes() {
                assert_eq!(chi_inverse(&chi(s).unwrap()), *s);
            }
        }
    }

    #[test]
    fn upto_examples() {
        let d = build_upto(3).unwrap();
        assert_eq!(d.node_count(), 6);
        assert_eq!(d.edge_count(), 6);
        let d0 = build_upto(0).unwrap();
        assert_eq!((d0.node_count(), d0.edge_count()), (1, 0));
        assert_eq!(build_upto(7).unwrap().node_count(), 30);
    }

    #[test]
    fn upto_modes_agree() {
        for n in 0..=10u64 {
            let direct = build_upto_with(n, UptoMode::Direct, DEFAULT_NODE_BUDGET).unwrap();
            let extract = build_upto_with(n, UptoMode::Extract, DEFAULT_NODE_BUDGET).unwrap();
            assert_eq!(direct, extract, "modes diverge at n={n}");
        }
    }

    #[test]
    fn upto_counts_decompose() {
        // Nodes: sum of level sizes. Edges: intra transitions plus one
        // grain-addition edge per node below the top level.
        for n in 0..=9u64 {
            let d = build_upto(n).unwrap();
            let mut nodes = 0usize;
            let mut edges = 0usize;
            for m in 0..=n {
                let lvl = build_bfs(m).unwrap();
                nodes += lvl.node_count();
                edges += lvl.edge_count();
                if m < n {
                    edges += lvl.node_count();
                }
            }
            assert_eq!(d.node_count(), nodes);
            assert_eq!(d.edge_count(), edges);
        }
    }

    #[test]
    fn reachability_matches_shot_domination() {
        let d = build_upto(10).unwrap();
        let tables = OrderTables::build(&d);
        let states: Vec<InfinitePartition> = d
            .nodes()
            .iter()
            .map(|t| InfinitePartition::new(t.clone()).unwrap())
            .collect();
        for a in 0..d.node_count() {
            for b in 0..d.node_count() {
                let dominated = shot_vector(&states[a]).dominated_by(&shot_vector(&states[b]));
                assert_eq!(
                    tables.reaches(a, b),
                    dominated,
                    "a={} b={}",
                    states[a],
                    states[b]
                );
            }
        }
    }

    #[test]
    fn filter_checks_pass() {
        let big = build_upto(8).unwrap();
        for n in 0..=5u64 {
            let report = check_filter_sublattice(&big, n);
            assert!(report.passed(), "n={n}: {:?}", report.violations);
        }
    }

    #[test]
    fn grading_in_infinite_coordinates() {
        let d = build_upto(9).unwrap();
        for e in d.edges() {
            assert_eq!(d.partition(e.dst).rank(), d.partition(e.src).rank() + 1);
        }
    }

    #[test]
    fn upto_json_round_trips_in_both_coordinates() {
        let d = build_upto(5).unwrap();
        for coords in [
            crate::diagram::Coords::Infinite,
            crate::diagram::Coords::Finite,
        ] {
            let s = crate::diagram::to_json(&d, coords);
            assert_eq!(crate::diagram::from_json(&s).unwrap(), d);
        }
    }

    #[test]
    fn parse_and_display() {
        for lit in ["~", "~,1", "~,4,2,1"] {
            assert_eq!(lit.parse::<InfinitePartition>().unwrap().to_string(), lit);
        }
        assert!("4,2".parse::<InfinitePartition>().is_err());
        assert!("~,2,3".parse::<InfinitePartition>().is_err());
        assert!("~,3,3,2,2".parse::<InfinitePartition>().is_err());
    }
}
