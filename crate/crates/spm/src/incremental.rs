//! Incremental construction of the `n+1` lattice from the `n` lattice.
//!
//! The lattice for `n+1` grains is the image of the `n` lattice under a
//! grain added on column 1, completed stratum by stratum: at step `i` the
//! piles that begin with stairs of length at least `i` (the set `P_i`)
//! receive a copy shifted to column `i+1`, connector edges, and back edges
//! where a cliff sits right of the stairs.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::Serialize;

use crate::diagram::{
    self, build_bfs_budgeted, canonicalize, compare, Diagram, DiagramError, DiagramKind, Edge,
    OrderRel, DEFAULT_NODE_BUDGET,
};
use crate::partition::Partition;

/// Nodes of a single-`n` diagram that begin with stairs of length at least
/// `i`, in node id order.
pub fn p_set(d: &Diagram, i: usize) -> Vec<Partition> {
    d.nodes()
        .iter()
        .filter(|s| s.stair_length() >= i)
        .cloned()
        .collect()
}

/// The strata driving one incremental step, together with their images:
/// `i_sets[j]` is `P_{j+1}` with a grain on column `j+1` (the piles gaining
/// a new successor), `c_sets[j]` the same piles with a grain on column
/// `j+2` (the new nodes).
#[derive(Debug, Clone, Serialize)]
pub struct Stratification {
    pub n: u64,
    pub p_sets: Vec<Vec<Partition>>,
    pub i_sets: Vec<Vec<Partition>>,
    pub c_sets: Vec<Vec<Partition>>,
}

pub fn stratify(d: &Diagram) -> Stratification {
    let mut p_sets = Vec::new();
    let mut i_sets = Vec::new();
    let mut c_sets = Vec::new();
    let mut i = 1;
    loop {
        let p = p_set(d, i);
        if p.is_empty() {
            break;
        }
        i_sets.push(
            p.iter()
                .map(|s| s.add_grain(i).expect("stairs allow the increment"))
                .collect(),
        );
        c_sets.push(
            p.iter()
                .map(|s| s.add_grain(i + 1).expect("stairs allow the increment"))
                .collect(),
        );
        p_sets.push(p);
        i += 1;
    }
    Stratification {
        n: d.n(),
        p_sets,
        i_sets,
        c_sets,
    }
}

/// One incremental step: builds the `n+1` diagram from the `n` diagram.
///
/// The output is renumbered into canonical BFS discovery order, so it is
/// structurally identical to `build_bfs(n + 1)` when the construction is
/// correct — tests compare the two for equality.
pub fn build_next(d: &Diagram) -> Result<Diagram, DiagramError> {
    build_next_budgeted(d, DEFAULT_NODE_BUDGET)
}

pub fn build_next_budgeted(d: &Diagram, budget: usize) -> Result<Diagram, DiagramError> {
    assert!(
        matches!(d.kind(), DiagramKind::Single),
        "incremental step expects a single-n diagram"
    );
    let n = d.n();
    let mut nodes: Vec<Partition> = Vec::with_capacity(d.node_count() * 2);
    let mut index: HashMap<Partition, usize> = HashMap::new();
    let mut edges: Vec<Edge> = Vec::new();
    let intern = |nodes: &mut Vec<Partition>,
                  index: &mut HashMap<Partition, usize>,
                  p: Partition|
     -> Result<usize, DiagramError> {
        if let Some(&id) = index.get(&p) {
            return Ok(id);
        }
        let id = nodes.len();
        if id >= budget {
            return Err(DiagramError::BudgetExceeded {
                budget,
                context: format!("incremental step {} -> {}", n, n + 1),
            });
        }
        index.insert(p.clone(), id);
        nodes.push(p);
        Ok(id)
    };

    // Image of the whole lattice under a grain on column 1; ids align with
    // the input diagram's ids.
    for s in d.nodes() {
        let lifted = s.add_grain(1).expect("column 1 always accepts a grain");
        intern(&mut nodes, &mut index, lifted)?;
    }
    edges.extend_from_slice(d.edges());

    // prev[u] is the id of the input node u with a grain on column i.
    let mut prev: Vec<usize> = (0..d.node_count()).collect();
    let mut i = 1usize;
    loop {
        let stratum: Vec<usize> = (0..d.node_count())
            .filter(|&u| d.partition(u).stair_length() >= i)
            .collect();
        if stratum.is_empty() {
            break;
        }
        let in_stratum: HashSet<usize> = stratum.iter().copied().collect();
        let mut cur: HashMap<usize, usize> = HashMap::with_capacity(stratum.len());
        for &u in &stratum {
            let c = d.partition(u).add_grain(i + 1).expect("stairs allow it");
            let id = intern(&mut nodes, &mut index, c)?;
            cur.insert(u, id);
        }
        // The new stratum copies the internal order structure of P_i.
        for e in d.edges() {
            if in_stratum.contains(&e.src) && in_stratum.contains(&e.dst) {
                edges.push(Edge {
                    src: cur[&e.src],
                    label: e.label,
                    dst: cur[&e.dst],
                });
            }
        }
        for &u in &stratum {
            // Connector: the pile with a grain on column i gains its new
            // successor on column i.
            edges.push(Edge {
                src: prev[u],
                label: i,
                dst: cur[&u],
            });
            // Back edge: a cliff right of the stairs fires into a node that
            // already exists in the image.
            let s = d.partition(u);
            if s.diff_at(i + 1) >= 2 {
                let target = s.add_grain(i + 2).expect("cliff keeps the shape");
                let dst = *index
                    .get(&target)
                    .expect("back edge target must already be present");
                edges.push(Edge {
                    src: cur[&u],
                    label: i + 1,
                    dst,
                });
            }
        }
        let mut next_prev = vec![usize::MAX; d.node_count()];
        for (&u, &id) in &cur {
            next_prev[u] = id;
        }
        prev = next_prev;
        i += 1;
    }

    let root = index[&Partition::column(n + 1)];
    Ok(canonicalize(DiagramKind::Single, n + 1, nodes, edges, root))
}

/// Builds the single-`n` diagram by iterating the incremental step from the
/// empty pile.
pub fn build_incremental(n: u64) -> Result<Diagram, DiagramError> {
    build_incremental_budgeted(n, DEFAULT_NODE_BUDGET)
}

pub fn build_incremental_budgeted(n: u64, budget: usize) -> Result<Diagram, DiagramError> {
    let mut d = build_bfs_budgeted(0, budget)?;
    for _ in 0..n {
        d = build_next_budgeted(&d, budget)?;
    }
    Ok(d)
}

/// One class of the stair stratification: the piles of `P_i` whose leading
/// part is `k`, verified to form a lattice generated from its maximum.
#[derive(Debug, Clone)]
pub struct QClass {
    pub k: u32,
    pub members: Vec<Partition>,
    pub maximum: Partition,
    /// Meets and joins of members stay in the class.
    pub lattice_ok: bool,
    /// Internal covering edges carry labels greater than `i + 1`.
    pub labels_ok: bool,
    /// The class is exactly what the maximum reaches through transitions on
    /// columns right of the fixed prefix.
    pub reachability_ok: bool,
}

#[derive(Debug, Clone)]
pub struct QClasses {
    pub i: usize,
    pub classes: Vec<QClass>,
}

impl QClasses {
    pub fn all_verified(&self) -> bool {
        self.classes
            .iter()
            .all(|c| c.lattice_ok && c.labels_ok && c.reachability_ok)
    }
}

/// Partitions `P_i` by leading part and verifies, per class: unique
/// maximum, meet/join closure, internal labels, and generation from the
/// maximum.
pub fn q_classes(d: &Diagram, i: usize) -> QClasses {
    assert!(i >= 1);
    let mut by_k: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (id, s) in d.nodes().iter().enumerate() {
        if s.stair_length() >= i {
            by_k.entry(s.parts()[0]).or_default().push(id);
        }
    }
    let mut classes = Vec::new();
    for (k, ids) in by_k {
        let in_class: HashSet<usize> = ids.iter().copied().collect();
        // Unique maximum under prefix-sum domination.
        let mut maxima: Vec<usize> = Vec::new();
        'outer: for &a in &ids {
            for &b in &ids {
                if a != b
                    && compare(d.partition(b), d.partition(a)).expect("same grain count")
                        == OrderRel::Greater
                {
                    continue 'outer;
                }
            }
            maxima.push(a);
        }
        let (maximum, reachability_ok_base) = if maxima.len() == 1 {
            (d.partition(maxima[0]).clone(), true)
        } else {
            (d.partition(ids[0]).clone(), false)
        };
        let lattice_ok = diagram::sublattice_closed(d, &ids).is_ok();
        let labels_ok = d
            .edges()
            .iter()
            .filter(|e| in_class.contains(&e.src) && in_class.contains(&e.dst))
            .all(|e| e.label > i + 1);
        // Reach only through transitions that keep the first i+1 columns
        // fixed, i.e. labels at least i+2.
        let reachability_ok = reachability_ok_base && {
            let start = maxima[0];
            let mut seen = BTreeSet::new();
            seen.insert(start);
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for &(label, v) in d.successors_of(u) {
                    if label > i + 1 && !seen.contains(&v) {
                        seen.insert(v);
                        stack.push(v);
                    }
                }
            }
            seen == ids.iter().copied().collect::<BTreeSet<_>>()
        };
        classes.push(QClass {
            k,
            members: ids.iter().map(|&id| d.partition(id).clone()).collect(),
            maximum,
            lattice_ok,
            labels_ok,
            reachability_ok,
        });
    }
    QClasses { i, classes }
}

/// A maximal element of a `Q_{1,k}` class: leading part `k`, a doubled
/// `k-1`, a descending run to `k-l`, and a remainder below it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratingPartition {
    pub k: u32,
    pub l: usize,
    pub r: u32,
    pub body: Partition,
}

/// Enumerates the generating partitions of the `n`-grain lattice by solving
/// the bound system `2k - 1 <= n <= k - 1 + k(k+1)/2` directly.
pub fn generating_partitions(n: u64) -> Vec<GeneratingPartition> {
    let mut out = Vec::new();
    if n < 3 {
        return out;
    }
    for k in 2..=n.div_ceil(2) {
        if 2 * k - 1 > n || (k - 1) + k * (k + 1) / 2 < n {
            continue;
        }
        let mut parts: Vec<u32> = vec![k as u32, k as u32 - 1];
        let mut sum = 2 * k - 1;
        let mut l: u64 = 0;
        loop {
            let rem = n - sum;
            let bound = k - l - 1;
            if rem <= bound {
                if rem > 0 {
                    parts.push(rem as u32);
                }
                let body = Partition::new(parts).expect("generating shape is a partition");
                debug_assert!(body.is_spm() && body.grains() == n);
                out.push(GeneratingPartition {
                    k: k as u32,
                    l: l as usize,
                    r: rem as u32,
                    body,
                });
                break;
            }
            l += 1;
            parts.push((k - l) as u32);
            sum += k - l;
        }
    }
    out
}

/// The two typographic readings of the printed closed-form count,
/// `floor(n/2 + 2 - sqrt(R))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrintedRadicand {
    /// R = 17/4 + 2n, the radicand that matches the solved bound system.
    Sum,
    /// R = (17/4) * 2n, the radicand under a literal product reading.
    Product,
}

/// Exact evaluation of `floor((a - sqrt(b)) / 2)` with `a = n + 4` and
/// `b` the radicand scaled by 4; integer arithmetic only.
pub fn generating_count_printed(n: u64, radicand: PrintedRadicand) -> i64 {
    let a = n as i64 + 4;
    let b = match radicand {
        PrintedRadicand::Sum => 8 * n as i64 + 17,
        PrintedRadicand::Product => 34 * n as i64,
    };
    let mut m = a.div_euclid(2);
    loop {
        let t = a - 2 * m;
        if t >= 0 && t * t >= b {
            return m;
        }
        m -= 1;
    }
}

/// Stair strata of every lattice up to a bound, in deterministic node
/// order. The base tables for the stratum recurrences and the multiset
/// decomposition.
pub struct PSetTable {
    max_n: u64,
    /// `piles[n]` is the node list of the `n`-grain lattice.
    piles: Vec<Vec<Partition>>,
    /// `strata[n][j]` is `P_{j+1}(n)`.
    strata: Vec<Vec<Vec<Partition>>>,
}

impl PSetTable {
    pub fn build(max_n: u64) -> Result<PSetTable, DiagramError> {
        Self::build_budgeted(max_n, DEFAULT_NODE_BUDGET)
    }

    pub fn build_budgeted(max_n: u64, budget: usize) -> Result<PSetTable, DiagramError> {
        let mut piles = Vec::with_capacity(max_n as usize + 1);
        let mut strata = Vec::with_capacity(max_n as usize + 1);
        let mut d = build_bfs_budgeted(0, budget)?;
        for n in 0..=max_n {
            if n > 0 {
                d = build_next_budgeted(&d, budget)?;
            }
            let mut per_i = Vec::new();
            let mut i = 1;
            loop {
                let p = p_set(&d, i);
                if p.is_empty() {
                    break;
                }
                per_i.push(p);
                i += 1;
            }
            piles.push(d.nodes().to_vec());
            strata.push(per_i);
        }
        Ok(PSetTable {
            max_n,
            piles,
            strata,
        })
    }

    pub fn max_n(&self) -> u64 {
        self.max_n
    }

    /// `P_i(n)`; empty outside the tabulated range or for `i` beyond the
    /// deepest stairs. `P_0(n)` is the whole lattice.
    pub fn p(&self, i: usize, n: i64) -> &[Partition] {
        if n < 0 || n as u64 > self.max_n {
            return &[];
        }
        if i == 0 {
            return &self.piles[n as usize];
        }
        self.strata[n as usize]
            .get(i - 1)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn count(&self, i: usize, n: i64) -> u64 {
        self.p(i, n).len() as u64
    }

    /// Largest stair length occurring anywhere up to `max_n`.
    pub fn deepest_stratum(&self) -> usize {
        self.strata.iter().map(Vec::len).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnionStatus {
    Ok,
    MultisetMismatch,
}

/// Outcome of evaluating the stratum decomposition
/// `P_i(n) = T(n) ⊔ image ⊔ higher-strata images` as a multiset, so that
/// double counting is observable rather than silently collapsed.
#[derive(Debug, Clone, Serialize)]
pub struct StratumUnionReport {
    pub i: usize,
    /// Grain count of the compared stratum.
    pub n: u64,
    pub status: UnionStatus,
    pub duplicates: Vec<Partition>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub missing: Vec<Partition>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub extra: Vec<Partition>,
    #[serde(skip)]
    pub rhs_size: usize,
    #[serde(skip)]
    pub lhs_size: usize,
}

impl StratumUnionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }
}

/// Evaluates the right-hand side of the stratum decomposition for the
/// `n2`-grain stratum `P_i(n2)` and compares it, as a multiset, with the
/// true stratum. Requires `i(i+1)/2 <= n2` and tables covering `n2`.
pub fn decompose_stratum(
    i: usize,
    n2: u64,
    tables: &PSetTable,
) -> Result<StratumUnionReport, DiagramError> {
    assert!(i >= 1, "strata start at i = 1");
    let ti = (i as u64) * (i as u64 + 1) / 2;
    assert!(
        ti <= n2,
        "stratum {i} is infeasible below {ti} grains (asked for {n2})"
    );
    assert!(
        n2 <= tables.max_n(),
        "tables cover only up to {}",
        tables.max_n()
    );

    let mut multiset: BTreeMap<Partition, usize> = BTreeMap::new();
    let mut push = |p: Partition| *multiset.entry(p).or_insert(0) += 1;

    // Staircase term: present exactly when n2 is triangular.
    let mut k = 1u64;
    while k * (k + 1) / 2 < n2 {
        k += 1;
    }
    if k * (k + 1) / 2 == n2 {
        push(Partition::fixed_point(n2));
    }
    // Image of the same stratum with one grain on each of the first i+1
    // columns.
    for s in tables.p(i, n2 as i64 - i as i64 - 1) {
        let mut t = s.clone();
        for col in 1..=(i + 1) {
            t = t.add_grain(col).expect("stairs absorb the diagonal bump");
        }
        push(t);
    }
    // Higher strata of the previous level, bumped right of their stairs.
    let mut j = i + 1;
    while (j as u64) * (j as u64 + 1) / 2 <= n2 {
        for s in tables.p(j, n2 as i64 - 1) {
            push(s.add_grain(j + 1).expect("stairs absorb the bump"));
        }
        j += 1;
    }

    let lhs: BTreeSet<Partition> = tables.p(i, n2 as i64).iter().cloned().collect();
    let duplicates: Vec<Partition> = multiset
        .iter()
        .filter(|&(_, &c)| c >= 2)
        .map(|(p, _)| p.clone())
        .collect();
    let missing: Vec<Partition> = lhs
        .iter()
        .filter(|p| !multiset.contains_key(*p))
        .cloned()
        .collect();
    let extra: Vec<Partition> = multiset
        .keys()
        .filter(|p| !lhs.contains(*p))
        .cloned()
        .collect();
    let rhs_size = multiset.values().sum::<usize>();
    let status = if duplicates.is_empty() && missing.is_empty() && extra.is_empty() {
        UnionStatus::Ok
    } else {
        UnionStatus::MultisetMismatch
    };
    Ok(StratumUnionReport {
        i,
        n: n2,
        status,
        duplicates,
        missing,
        extra,
        rhs_size,
        lhs_size: lhs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::build_bfs;

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    #[test]
    fn p_set_examples() {
        let d4 = build_bfs(4).unwrap();
        assert_eq!(p_set(&d4, 1), vec![p("2,1,1")]);
        assert!(p_set(&d4, 5).is_empty());
        let d7 = build_bfs(7).unwrap();
        let got: BTreeSet<_> = p_set(&d7, 1).into_iter().collect();
        let want: BTreeSet<_> = [p("4,3"), p("3,2,2"), p("3,2,1,1")].into_iter().collect();
        assert_eq!(got, want);
    }

    #[test]
    fn build_next_matches_bfs() {
        for n in 0..=14u64 {
            let step = build_next(&build_bfs(n).unwrap()).unwrap();
            let oracle = build_bfs(n + 1).unwrap();
            assert_eq!(step, oracle, "incremental step diverges at n={n}");
        }
    }

    #[test]
    fn build_next_zero_to_one() {
        let d = build_next(&build_bfs(0).unwrap()).unwrap();
        assert_eq!(d.node_count(), 1);
        assert_eq!(d.edge_count(), 0);
        assert!(d.contains(&p("1")));
    }

    #[test]
    fn build_next_six_to_seven_sizes() {
        let d6 = build_bfs(6).unwrap();
        let added: usize = (1..=3).map(|i| p_set(&d6, i).len()).sum();
        assert_eq!(added, 3);
        assert_eq!(build_next(&d6).unwrap().node_count(), 9);
    }

    #[test]
    fn completion_oracle_matches_strata() {
        // Generic completion: repeatedly add the missing successors of the
        // last layer of new elements, checking the layers against the
        // stratification's images.
        for n in 0..=12u64 {
            let d = build_bfs(n).unwrap();
            let strat = stratify(&d);
            let mut present: BTreeSet<Partition> =
                d.nodes().iter().map(|s| s.add_grain(1).unwrap()).collect();
            let mut frontier: Vec<Partition> = present.iter().cloned().collect();
            let mut step = 0usize;
            loop {
                let gaining: BTreeSet<Partition> = frontier
                    .iter()
                    .filter(|u| u.successors().iter().any(|(_, t)| !present.contains(t)))
                    .cloned()
                    .collect();
                let mut fresh: BTreeSet<Partition> = BTreeSet::new();
                for u in &gaining {
                    for (_, t) in u.successors() {
                        if !present.contains(&t) {
                            fresh.insert(t);
                        }
                    }
                }
                if step < strat.p_sets.len() {
                    let want_i: BTreeSet<Partition> = strat.i_sets[step].iter().cloned().collect();
                    let want_c: BTreeSet<Partition> = strat.c_sets[step].iter().cloned().collect();
                    assert_eq!(gaining, want_i, "I layer {} at n={n}", step + 1);
                    assert_eq!(fresh, want_c, "C layer {} at n={n}", step + 1);
                } else {
                    assert!(gaining.is_empty(), "completion outlives strata at n={n}");
                }
                if fresh.is_empty() {
                    break;
                }
                present.extend(fresh.iter().cloned());
                frontier = fresh.into_iter().collect();
                step += 1;
            }
            assert_eq!(step, strat.p_sets.len(), "layer count at n={n}");
            let oracle: BTreeSet<Partition> =
                build_bfs(n + 1).unwrap().nodes().iter().cloned().collect();
            assert_eq!(present, oracle, "completed node set at n={n}");
        }
    }

    #[test]
    fn q_classes_examples() {
        let d10 = build_bfs(10).unwrap();
        let q = q_classes(&d10, 1);
        assert!(q.all_verified());
        let ks: Vec<u32> = q.classes.iter().map(|c| c.k).collect();
        assert_eq!(ks, vec![4, 5]);
        assert_eq!(q.classes[0].maximum, p("4,3,3"));
        assert_eq!(q.classes[1].maximum, p("5,4,1"));

        let d4 = build_bfs(4).unwrap();
        let q = q_classes(&d4, 1);
        assert_eq!(q.classes.len(), 1);
        assert_eq!(q.classes[0].k, 2);
        assert_eq!(q.classes[0].members, vec![p("2,1,1")]);
    }

    #[test]
    fn q_classes_partition_p_i() {
        for n in 3..=14u64 {
            let d = build_bfs(n).unwrap();
            for i in 1..=3usize {
                let q = q_classes(&d, i);
                assert!(q.all_verified(), "n={n} i={i}");
                let mut union: Vec<Partition> = Vec::new();
                for c in &q.classes {
                    union.extend(c.members.iter().cloned());
                }
                let mut want = p_set(&d, i);
                union.sort();
                want.sort();
                assert_eq!(union, want, "classes must partition P_{i} at n={n}");
            }
        }
    }

    #[test]
    fn generating_partition_examples() {
        let g10 = generating_partitions(10);
        let bodies: Vec<&Partition> = g10.iter().map(|g| &g.body).collect();
        assert_eq!(bodies, vec![&p("4,3,3"), &p("5,4,1")]);
        assert_eq!(g10.len(), 2);

        let g3 = generating_partitions(3);
        assert_eq!(g3.len(), 1);
        assert_eq!(g3[0].body, p("2,1"));
        assert_eq!(g3[0].k, 2);
    }

    #[test]
    fn generating_partitions_are_class_maxima() {
        for n in 3..=20u64 {
            let d = build_bfs(n).unwrap();
            let q = q_classes(&d, 1);
            let maxima: Vec<Partition> = q.classes.iter().map(|c| c.maximum.clone()).collect();
            let bodies: Vec<Partition> = generating_partitions(n)
                .into_iter()
                .map(|g| g.body)
                .collect();
            assert_eq!(bodies, maxima, "n={n}");
        }
    }

    #[test]
    fn printed_count_disagrees_somewhere() {
        // The enumeration is ground truth; both printed readings drift.
        let mut sum_hits = 0;
        for n in 4..=60u64 {
            let truth = generating_partitions(n).len() as i64;
            if generating_count_printed(n, PrintedRadicand::Sum) == truth {
                sum_hits += 1;
            }
            assert!(
                generating_count_printed(n, PrintedRadicand::Product) <= truth,
                "product reading should undershoot at n={n}"
            );
        }
        assert!(sum_hits < 57, "sum reading should not match everywhere");
    }

    #[test]
    fn stratum_union_examples() {
        let tables = PSetTable::build(8).unwrap();
        let r = decompose_stratum(1, 4, &tables).unwrap();
        assert_eq!(r.status, UnionStatus::Ok);
        assert!(r.duplicates.is_empty());

        let r = decompose_stratum(1, 6, &tables).unwrap();
        assert_eq!(r.status, UnionStatus::MultisetMismatch);
        assert_eq!(r.duplicates, vec![p("3,2,1")]);
        assert!(r.missing.is_empty() && r.extra.is_empty());

        let r = decompose_stratum(3, 6, &tables).unwrap();
        assert_eq!(r.status, UnionStatus::Ok);
    }

    #[test]
    fn stratum_union_json_schema() {
        let tables = PSetTable::build(6).unwrap();
        let r = decompose_stratum(1, 6, &tables).unwrap();
        assert_eq!(
            r.to_json(),
            r#"{"i":1,"n":6,"status":"multiset-mismatch","duplicates":[[3,2,1]]}"#
        );
    }

    #[test]
    fn stratum_union_only_staircase_duplicates() {
        // Every mismatch in range is a doubled staircase at a triangular
        // grain count; nothing is ever missing or spurious.
        let tables = PSetTable::build(16).unwrap();
        for i in 1..=4usize {
            let ti = (i * (i + 1) / 2) as u64;
            for n2 in ti.max(3)..=16 {
                let r = decompose_stratum(i, n2, &tables).unwrap();
                assert!(r.missing.is_empty(), "i={i} n={n2}");
                assert!(r.extra.is_empty(), "i={i} n={n2}");
                for dup in &r.duplicates {
                    assert_eq!(dup, &Partition::fixed_point(n2));
                    assert_eq!(
                        dup.stair_length() as u64 * (dup.stair_length() as u64 + 1) / 2,
                        n2
                    );
                }
            }
        }
    }
}
