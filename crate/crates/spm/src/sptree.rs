//! The grain-addition tree over all pile lattices.
//!
//! Nodes are every pile of every grain count; the `i`-th son of a pile is
//! the pile with one more grain on column `i`, for `i` up to one past the
//! stairs. Level `n` of the tree is exactly the `n`-grain lattice. The
//! tree is self-similar: two subtree families (rooted at cliff-after-stairs
//! shapes and at stairs shapes) tile it, and the rightmost chain visits the
//! fixed points.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::diagram::DEFAULT_NODE_BUDGET;
use crate::partition::Partition;

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("node budget of {budget} exceeded while materializing depth {depth}")]
    BudgetExceeded { budget: usize, depth: usize },
    #[error("partition ({0}) is not a node of the materialized tree")]
    NodeNotFound(Partition),
    #[error("need depth {needed} but the tree is materialized to {available}")]
    InsufficientDepth { needed: usize, available: usize },
}

pub type TreeNodeId = usize;

/// True when `s` roots an `N_k` subtree: stairs of length `k-2`, a plateau
/// at `k-1`, then a cliff at `k`. For `k = 1` only the leading cliff
/// remains.
pub fn is_nk_root(s: &Partition, k: usize) -> bool {
    if k == 0 {
        return false;
    }
    if k == 1 {
        return s.diff_at(1) >= 2;
    }
    (1..=k - 2).all(|j| s.diff_at(j) == 1) && s.diff_at(k - 1) == 0 && s.diff_at(k) >= 2
}

/// True when the first `k` sons of `s` root `N_1 .. N_k` subtrees: steps on
/// the first `k-1` columns and a non-plateau at `k`. Stairs of length `k`
/// are the common case; the variant with a cliff directly at `k` also
/// qualifies and closes the self-similar description.
pub fn is_xk_root(s: &Partition, k: usize) -> bool {
    if k == 0 {
        return false;
    }
    (1..k).all(|j| s.diff_at(j) == 1) && s.diff_at(k) >= 1
}

/// The largest `k` for which `s` roots an `X_k` subtree (0 when none).
pub fn x_max(s: &Partition) -> usize {
    let e = s.stair_length();
    if s.diff_at(e + 1) >= 2 {
        e + 1
    } else {
        e
    }
}

/// The `N_k` annotation of a pile, if any. At most one `k` fits: the first
/// non-step column must be a plateau followed directly by a cliff (or a
/// leading cliff for `k = 1`).
pub fn n_root_of(s: &Partition) -> Option<usize> {
    if s.diff_at(1) >= 2 {
        return Some(1);
    }
    let e = s.stair_length();
    let k = e + 2;
    if s.diff_at(e + 1) == 0 && s.diff_at(k) >= 2 {
        Some(k)
    } else {
        None
    }
}

/// Father of a pile in the tree: the unique pile one grain lighter of
/// which it is a legal son. `None` for the empty pile or a pile outside
/// the reachable sets.
pub fn father_of(s: &Partition) -> Option<(Partition, usize)> {
    if s.is_empty() || !s.is_spm() {
        return None;
    }
    let mut found = None;
    for j in 1..=s.len() {
        let mut parts: Vec<u32> = s.parts().to_vec();
        parts[j - 1] -= 1;
        if parts[j - 1] == 0 {
            if j != s.len() {
                continue;
            }
            parts.pop();
        } else if j < s.len() && parts[j - 1] < parts[j] {
            continue;
        }
        let f = Partition::new(parts).expect("decrement kept the shape");
        if f.is_spm() && j <= f.stair_length() + 1 {
            debug_assert!(found.is_none(), "two fathers for ({s})");
            found = Some((f, j));
        }
    }
    found
}

/// Sorted `k`s of the `N_k` subtrees containing `s`, found by walking the
/// father chain: a subtree contains all descendants of its root, so
/// membership is inherited downward and never lost.
pub fn n_memberships(s: &Partition) -> Vec<usize> {
    let mut ks = Vec::new();
    let mut cur = s.clone();
    loop {
        if let Some(k) = n_root_of(&cur) {
            if !ks.contains(&k) {
                ks.push(k);
            }
        }
        match father_of(&cur) {
            Some((f, _)) => cur = f,
            None => break,
        }
    }
    ks.sort_unstable();
    ks
}

/// The tree materialized level by level to a fixed depth.
pub struct TreeLevels {
    depth: usize,
    levels: Vec<Vec<TreeNodeId>>,
    parts: Vec<Partition>,
    father: Vec<Option<(TreeNodeId, usize)>>,
    children: Vec<Vec<TreeNodeId>>,
    stair: Vec<usize>,
    n_root: Vec<Option<usize>>,
    x_top: Vec<usize>,
    memberships: Vec<Vec<usize>>,
    index: HashMap<Partition, TreeNodeId>,
}

pub fn build_tree(depth: usize) -> Result<TreeLevels, TreeError> {
    build_tree_budgeted(depth, DEFAULT_NODE_BUDGET)
}

pub fn build_tree_budgeted(depth: usize, budget: usize) -> Result<TreeLevels, TreeError> {
    let mut t = TreeLevels {
        depth,
        levels: Vec::with_capacity(depth + 1),
        parts: Vec::new(),
        father: Vec::new(),
        children: Vec::new(),
        stair: Vec::new(),
        n_root: Vec::new(),
        x_top: Vec::new(),
        memberships: Vec::new(),
        index: HashMap::new(),
    };
    let root = Partition::empty();
    t.push_node(root, None);
    t.levels.push(vec![0]);
    for lvl in 1..=depth {
        let prev: Vec<TreeNodeId> = t.levels[lvl - 1].clone();
        let mut cur = Vec::new();
        for id in prev {
            let sons = t.stair[id] + 1;
            for i in 1..=sons {
                let child = t.parts[id].add_grain(i).expect("sons stay partitions");
                if t.parts.len() >= budget {
                    return Err(TreeError::BudgetExceeded { budget, depth });
                }
                let cid = t.push_node(child, Some((id, i)));
                t.children[id].push(cid);
                cur.push(cid);
            }
        }
        t.levels.push(cur);
    }
    Ok(t)
}

impl TreeLevels {
    fn push_node(&mut self, p: Partition, father: Option<(TreeNodeId, usize)>) -> TreeNodeId {
        let id = self.parts.len();
        let displaced = self.index.insert(p.clone(), id);
        assert!(
            displaced.is_none(),
            "pile ({p}) generated twice: not a tree"
        );
        self.stair.push(p.stair_length());
        self.n_root.push(n_root_of(&p));
        self.x_top.push(x_max(&p));
        let mut mem = match father {
            Some((f, _)) => self.memberships[f].clone(),
            None => Vec::new(),
        };
        if let Some(k) = self.n_root[id] {
            if !mem.contains(&k) {
                mem.push(k);
                mem.sort_unstable();
            }
        }
        self.memberships.push(mem);
        self.father.push(father);
        self.children.push(Vec::new());
        self.parts.push(p);
        id
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn node_count(&self) -> usize {
        self.parts.len()
    }

    /// Node ids of a level, in generation order.
    pub fn level(&self, n: usize) -> &[TreeNodeId] {
        &self.levels[n]
    }

    pub fn partition(&self, id: TreeNodeId) -> &Partition {
        &self.parts[id]
    }

    pub fn id_of(&self, p: &Partition) -> Option<TreeNodeId> {
        self.index.get(p).copied()
    }

    pub fn father(&self, id: TreeNodeId) -> Option<(TreeNodeId, usize)> {
        self.father[id]
    }

    /// Children in label order; the label of child `j` is `j + 1`.
    pub fn children(&self, id: TreeNodeId) -> &[TreeNodeId] {
        &self.children[id]
    }

    pub fn level_of(&self, id: TreeNodeId) -> usize {
        self.parts[id].grains() as usize
    }

    pub fn n_root(&self, id: TreeNodeId) -> Option<usize> {
        self.n_root[id]
    }

    pub fn x_top(&self, id: TreeNodeId) -> usize {
        self.x_top[id]
    }

    pub fn memberships(&self, id: TreeNodeId) -> &[usize] {
        &self.memberships[id]
    }
}

/// Labels of the outgoing transitions of the infinite-column image of `s`,
/// derived from tree membership alone: the infinite column always fires,
/// and column `i + 1` fires exactly when `s` sits in an `N_i` subtree.
pub fn successors_via_tree(t: &TreeLevels, s: &Partition) -> Result<Vec<usize>, TreeError> {
    let id = t
        .id_of(s)
        .ok_or_else(|| TreeError::NodeNotFound(s.clone()))?;
    let mut labels = vec![1usize];
    labels.extend(t.memberships(id).iter().map(|&k| k + 1));
    Ok(labels)
}

/// Number of descending paths of length exactly `l` from `root`, restricted
/// to its `X_k` subtree: the first step may only use the first `k` sons,
/// everything below is unrestricted.
pub fn count_paths_oracle(
    t: &TreeLevels,
    root: &Partition,
    k: usize,
    l: usize,
) -> Result<u64, TreeError> {
    let id = t
        .id_of(root)
        .ok_or_else(|| TreeError::NodeNotFound(root.clone()))?;
    count_from(t, id, l, Some(k))
}

/// Number of descending paths of length exactly `l` from `root` with no
/// restriction (the whole-subtree count used for the `N_k` families).
pub fn subtree_path_count(t: &TreeLevels, root: &Partition, l: usize) -> Result<u64, TreeError> {
    let id = t
        .id_of(root)
        .ok_or_else(|| TreeError::NodeNotFound(root.clone()))?;
    count_from(t, id, l, None)
}

fn count_from(
    t: &TreeLevels,
    id: TreeNodeId,
    l: usize,
    first_step_limit: Option<usize>,
) -> Result<u64, TreeError> {
    let needed = t.level_of(id) + l;
    if needed > t.depth() {
        return Err(TreeError::InsufficientDepth {
            needed,
            available: t.depth(),
        });
    }
    if l == 0 {
        return Ok(1);
    }
    let mut frontier: Vec<TreeNodeId> = match first_step_limit {
        Some(k) => t.children(id).iter().take(k).copied().collect(),
        None => t.children(id).to_vec(),
    };
    for _ in 1..l {
        let mut next = Vec::new();
        for u in frontier {
            next.extend_from_slice(t.children(u));
        }
        frontier = next;
    }
    Ok(frontier.len() as u64)
}

/// One node of the rightmost chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainNode {
    pub level: usize,
    pub partition: Partition,
    /// Edge label from the previous chain node; 0 for the root.
    pub label: usize,
}

/// An `X_k` subtree hanging off the chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainAttachment {
    pub level: usize,
    pub k: usize,
    pub root: Partition,
}

/// The rightmost chain (iterated last sons of the root) with its subtree
/// attachments. The chain visits the fixed points; an `X_k` subtree hangs
/// at every triangular level `T_k` and an `X_m` at `T_k + (k - m)` for
/// `m < k`.
#[derive(Debug, Clone)]
pub struct ChainDecomposition {
    pub chain: Vec<ChainNode>,
    pub attachments: Vec<ChainAttachment>,
}

pub fn chain_decomposition(depth: usize) -> ChainDecomposition {
    let mut chain = vec![ChainNode {
        level: 0,
        partition: Partition::empty(),
        label: 0,
    }];
    let mut attachments = Vec::new();
    let mut cur = Partition::empty();
    for level in 1..=depth {
        let label = cur.stair_length() + 1;
        cur = cur.add_grain(label).expect("last son always exists");
        chain.push(ChainNode {
            level,
            partition: cur.clone(),
            label,
        });
    }
    for node in &chain {
        let k = x_max(&node.partition);
        if k >= 1 {
            attachments.push(ChainAttachment {
                level: node.level,
                k,
                root: node.partition.clone(),
            });
        }
    }
    ChainDecomposition { chain, attachments }
}

impl ChainDecomposition {
    /// Verifies the chain against its closed-form description: fixed points
    /// at every level, entering labels cycling `k+1, k, ..., 1` between
    /// consecutive staircases, and the attachment pattern `X_k` at `T_k`,
    /// `X_m` at `T_k + (k - m)`.
    pub fn verify(&self) -> Result<(), String> {
        for node in &self.chain {
            let fp = Partition::fixed_point(node.level as u64);
            if node.partition != fp {
                return Err(format!(
                    "chain node at level {} is ({}), not the fixed point ({fp})",
                    node.level, node.partition
                ));
            }
        }
        for node in self.chain.iter().skip(1) {
            // With k the largest staircase level strictly below, level
            // T_k + j is entered by label k + 2 - j (j runs 1..=k+1).
            let mut k = 0usize;
            while (k + 1) * (k + 2) / 2 < node.level {
                k += 1;
            }
            let j = node.level - k * (k + 1) / 2;
            let expected = k + 2 - j;
            if node.label != expected {
                return Err(format!(
                    "chain label into level {} is {}, expected {}",
                    node.level, node.label, expected
                ));
            }
        }
        let mut expected = Vec::new();
        let mut k = 1usize;
        while k * (k + 1) / 2 < self.chain.len() {
            let tk = k * (k + 1) / 2;
            expected.push((tk, k));
            for m in (1..k).rev() {
                let lvl = tk + (k - m);
                if lvl < self.chain.len() {
                    expected.push((lvl, m));
                }
            }
            k += 1;
        }
        expected.sort_unstable();
        let got: Vec<(usize, usize)> = self.attachments.iter().map(|a| (a.level, a.k)).collect();
        if got != expected {
            return Err(format!(
                "attachment pattern mismatch: got {got:?}, expected {expected:?}"
            ));
        }
        Ok(())
    }
}

/// Deterministic DOT image of the materialized tree, same conventions as
/// the diagram export.
pub fn to_dot(t: &TreeLevels) -> String {
    let mut s = String::new();
    s.push_str("digraph spt {\n");
    for id in 0..t.node_count() {
        let _ = writeln!(s, "p_{id} [label=\"{}\"];", t.partition(id));
    }
    for id in 0..t.node_count() {
        if let Some((f, label)) = t.father(id) {
            let _ = writeln!(s, "p_{f} -> p_{id} [label=\"{label}\"];");
        }
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::build_bfs;
    use crate::infinite::chi;
    use std::collections::BTreeSet;

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    #[test]
    fn sons_examples() {
        let t = build_tree(5).unwrap();
        let id = t.id_of(&p("2,1")).unwrap();
        let sons: Vec<&Partition> = t.children(id).iter().map(|&c| t.partition(c)).collect();
        assert_eq!(sons, vec![&p("3,1"), &p("2,2"), &p("2,1,1")]);
        let id = t.id_of(&p("2,2")).unwrap();
        let sons: Vec<&Partition> = t.children(id).iter().map(|&c| t.partition(c)).collect();
        assert_eq!(sons, vec![&p("3,2")]);
    }

    #[test]
    fn levels_match_lattices() {
        let t = build_tree(12).unwrap();
        for n in 0..=12usize {
            let level: BTreeSet<Partition> = t
                .level(n)
                .iter()
                .map(|&id| t.partition(id).clone())
                .collect();
            let lattice: BTreeSet<Partition> = build_bfs(n as u64)
                .unwrap()
                .nodes()
                .iter()
                .cloned()
                .collect();
            assert_eq!(level, lattice, "level {n}");
        }
    }

    #[test]
    fn root_predicates_examples() {
        assert!(is_nk_root(&p("2,2"), 2));
        assert_eq!(n_root_of(&p("2,2")), Some(2));
        assert!(is_nk_root(&p("4,2,1"), 1));
        assert!(is_xk_root(&p("3,2,1"), 3));
        assert!(!is_xk_root(&p("3,2,1"), 4));
        assert!(!is_xk_root(&p("2,2"), 1));
        // Stairs of length k-1 with a cliff at k also root an X_k.
        assert!(is_xk_root(&p("4,3,2"), 3));
        assert_eq!(x_max(&p("4,3,2")), 3);
        assert_eq!(x_max(&p("3,2,1")), 3);
        assert_eq!(x_max(&p("2,2")), 0);
        assert!(!is_xk_root(&p("4,2"), 2));
        assert!(is_xk_root(&p("4,2"), 1));
    }

    #[test]
    fn father_examples() {
        assert_eq!(father_of(&p("3,2,1")), Some((p("2,2,1"), 1)));
        assert_eq!(father_of(&p("2,2")), Some((p("2,1"), 2)));
        assert_eq!(father_of(&p("2,1,1")), Some((p("2,1"), 3)));
        assert_eq!(father_of(&p("1")), Some((Partition::empty(), 1)));
        assert_eq!(father_of(&Partition::empty()), None);
    }

    #[test]
    fn father_agrees_with_tree() {
        let t = build_tree(10).unwrap();
        for id in 0..t.node_count() {
            if let Some((f, label)) = t.father(id) {
                assert_eq!(
                    father_of(t.partition(id)),
                    Some((t.partition(f).clone(), label))
                );
            }
        }
    }

    #[test]
    fn memberships_examples() {
        let t = build_tree(8).unwrap();
        assert_eq!(successors_via_tree(&t, &p("4,2")).unwrap(), vec![1, 2, 3]);
        assert_eq!(successors_via_tree(&t, &p("3,2,1")).unwrap(), vec![1]);
        assert_eq!(successors_via_tree(&t, &p("2,2")).unwrap(), vec![1, 3]);
        assert!(successors_via_tree(&t, &p("9,9")).is_err());
    }

    #[test]
    fn memberships_match_cliffs_of_chi_image() {
        let t = build_tree(12).unwrap();
        for id in 0..t.node_count() {
            let s = t.partition(id);
            let image = chi(s).unwrap();
            // Column j+1 of the image sits over tail column j; the infinite
            // column is always a cliff.
            let mut expected = vec![1usize];
            for j in 1..=s.len() {
                if s.diff_at(j) >= 2 {
                    expected.push(j + 1);
                }
            }
            assert_eq!(
                successors_via_tree(&t, s).unwrap(),
                expected,
                "node ({s}), image ({image})"
            );
        }
    }

    #[test]
    fn path_count_examples() {
        let t = build_tree(10).unwrap();
        assert_eq!(count_paths_oracle(&t, &p("2,1"), 2, 2).unwrap(), 2);
        assert_eq!(count_paths_oracle(&t, &p("2,1"), 2, 3).unwrap(), 3);
        assert_eq!(count_paths_oracle(&t, &p("3,2,1"), 3, 2).unwrap(), 4);
        assert!(matches!(
            count_paths_oracle(&t, &p("3,2,1"), 3, 20),
            Err(TreeError::InsufficientDepth { .. })
        ));
    }

    #[test]
    fn chain_examples() {
        let c = chain_decomposition(7);
        let nodes: Vec<String> = c.chain.iter().map(|n| n.partition.to_string()).collect();
        assert_eq!(
            nodes,
            vec!["", "1", "1,1", "2,1", "2,1,1", "2,2,1", "3,2,1", "3,2,1,1"]
        );
        let attach: Vec<(usize, usize)> = c.attachments.iter().map(|a| (a.level, a.k)).collect();
        assert_eq!(attach, vec![(1, 1), (3, 2), (4, 1), (6, 3), (7, 2)]);
        assert_eq!(c.chain[6].partition, Partition::fixed_point(6));
        c.verify().unwrap();
    }

    #[test]
    fn chain_labels_between_staircases() {
        let c = chain_decomposition(10);
        let labels: Vec<usize> = c.chain[4..=6].iter().map(|n| n.label).collect();
        assert_eq!(labels, vec![3, 2, 1]);
        c.verify().unwrap();
    }

    #[test]
    fn chain_verifies_deep() {
        chain_decomposition(40).verify().unwrap();
    }

    #[test]
    fn n1_subtrees_are_label1_chains() {
        let t = build_tree(10).unwrap();
        for id in 0..t.node_count() {
            if t.n_root(id) == Some(1) {
                let mut cur = id;
                while !t.children(cur).is_empty() {
                    assert_eq!(t.children(cur).len(), 1, "({})", t.partition(cur));
                    cur = t.children(cur)[0];
                    assert!(t.partition(cur).diff_at(1) >= 2);
                }
            }
        }
    }

    #[test]
    fn budget_error() {
        assert!(matches!(
            build_tree_budgeted(10, 5),
            Err(TreeError::BudgetExceeded { .. })
        ));
    }
}
