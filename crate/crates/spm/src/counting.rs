//! Cardinality recurrences, printed and structure-derived, against
//! brute-force oracles.
//!
//! Two printed recurrences drift from the dynamics at small arguments (the
//! stratum recurrence's staircase correction and the tree path counts).
//! Both are evaluated literally, side by side with repaired variants, and
//! every comparison lands in a deterministic reconciliation report; the
//! oracles are the single source of truth and nothing is silently
//! substituted.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::diagram::DEFAULT_NODE_BUDGET;
use crate::incremental::{
    decompose_stratum, generating_count_printed, generating_partitions, PSetTable, PrintedRadicand,
    UnionStatus,
};
use crate::partition::Partition;
use crate::sptree::{build_tree_budgeted, count_paths_oracle};

/// Stratum count table: `p(i, n)` is the number of `n`-grain piles that
/// begin with stairs of length at least `i`; row 0 is the lattice size.
#[derive(Debug, Clone)]
pub struct PTable {
    max_n: u64,
    rows: Vec<Vec<u64>>,
}

impl PTable {
    pub fn max_n(&self) -> u64 {
        self.max_n
    }

    /// Zero outside the tabulated range.
    pub fn p(&self, i: usize, n: i64) -> u64 {
        if n < 0 || n as u64 > self.max_n {
            return 0;
        }
        self.rows
            .get(i)
            .and_then(|row| row.get(n as usize))
            .copied()
            .unwrap_or(0)
    }

    fn stratum_bound(max_n: u64) -> usize {
        let mut i = 1usize;
        while (i as u64 + 1) * (i as u64 + 2) / 2 <= max_n {
            i += 1;
        }
        i + 1
    }
}

/// Exact table read off the diagrams.
pub fn p_table_oracle(max_n: u64) -> Result<PTable, crate::diagram::DiagramError> {
    Ok(p_table_from_sets(&PSetTable::build(max_n)?))
}

pub fn p_table_from_sets(sets: &PSetTable) -> PTable {
    let max_n = sets.max_n();
    let imax = sets.deepest_stratum();
    let mut rows = vec![vec![0u64; max_n as usize + 1]; imax + 1];
    for n in 0..=max_n {
        for (i, row) in rows.iter_mut().enumerate() {
            row[n as usize] = sets.count(i, n as i64);
        }
    }
    PTable { max_n, rows }
}

/// The staircase correction of the stratum recurrence. The two printed
/// readings disagree with each other and with the dynamics; the corrected
/// variant fires only where the staircase is not already produced by the
/// diagonal image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaVariant {
    /// +1 whenever `n` is triangular, the argument sitting two below the
    /// row being computed.
    PrintedCorollary,
    /// +1 whenever `n + 2` is triangular with `i <= k`.
    PrintedTheorem3,
    /// +1 whenever `n + 2` is triangular with `i = k` exactly.
    Corrected,
}

impl DeltaVariant {
    pub fn name(self) -> &'static str {
        match self {
            DeltaVariant::PrintedCorollary => "printed-corollary",
            DeltaVariant::PrintedTheorem3 => "printed-theorem3",
            DeltaVariant::Corrected => "corrected",
        }
    }

    fn delta(self, i: usize, n2: u64) -> u64 {
        let triangular = |m: u64| -> Option<u64> {
            let mut k = 0u64;
            while k * (k + 1) / 2 < m {
                k += 1;
            }
            (k * (k + 1) / 2 == m).then_some(k)
        };
        match self {
            DeltaVariant::PrintedCorollary => u64::from(n2 >= 2 && triangular(n2 - 2).is_some()),
            DeltaVariant::PrintedTheorem3 => {
                u64::from(triangular(n2).is_some_and(|k| i as u64 <= k))
            }
            DeltaVariant::Corrected => u64::from(triangular(n2).is_some_and(|k| i as u64 == k)),
        }
    }
}

/// Evaluates the stratum recurrence
/// `p(i, n+2) = p(i, n-i+1) + sum_{j>i} p(j, n+1) + delta` under the chosen
/// correction, from the printed initial conditions (read as `p(i, 1) = 0`
/// for `i > 1`). Row 0 is chained by the size identity, which carries no
/// correction term.
pub fn p_recursion(max_n: u64, variant: DeltaVariant) -> PTable {
    let imax = PTable::stratum_bound(max_n);
    let mut rows = vec![vec![0u64; max_n as usize + 1]; imax + 1];
    if max_n >= 1 {
        rows[1][1] = 1;
    }
    for n2 in 3..=max_n as usize {
        for i in 1..=imax {
            let older = n2 as i64 - i as i64 - 1;
            let mut v = if older >= 0 {
                rows[i].get(older as usize).copied().unwrap_or(0)
            } else {
                0
            };
            for row in rows.iter().take(imax + 1).skip(i + 1) {
                v += row[n2 - 1];
            }
            v += variant.delta(i, n2 as u64);
            rows[i][n2] = v;
        }
    }
    // Size chain: |SPM(n)| = |SPM(n-1)| + sum_{i>=1} p(i, n-1).
    rows[0][0] = 1;
    for n in 1..=max_n as usize {
        let prev: u64 = (1..=imax).map(|i| rows[i][n - 1]).sum();
        rows[0][n] = rows[0][n - 1] + prev;
    }
    PTable { max_n, rows }
}

/// `|SPM(n)| = |SPM(n-1)| + sum_{i>=1} p(i, n-1)` over any table.
pub fn spm_size_via_p(n: u64, table: &PTable) -> u64 {
    if n == 0 {
        return 1;
    }
    let prev = n as i64 - 1;
    table.p(0, prev) + (1..table.rows.len()).map(|i| table.p(i, prev)).sum::<u64>()
}

/// Literal evaluation of the printed path-count recurrence for paths of
/// length `l` in an `X_k` subtree. The printed case split leaves `l <= 0`
/// with `k > 0` undefined; the evaluation reads those as 0, which is the
/// only reading under which the recursion terminates.
pub fn c_printed(l: i64, k: i64) -> u64 {
    fn eval(l: i64, k: i64, memo: &mut HashMap<(i64, i64), u64>) -> u64 {
        if l <= 0 || k <= 0 {
            return 0;
        }
        if k == 1 {
            return 1;
        }
        if l == 1 {
            return k as u64;
        }
        if let Some(&v) = memo.get(&(l, k)) {
            return v;
        }
        let mut v = eval(l - k, k, memo);
        for i in 1..k {
            v += eval(l - i + 1, k - i, memo);
        }
        if k <= l {
            v += 1;
        }
        memo.insert((l, k), v);
        v
    }
    eval(l, k, &mut HashMap::new())
}

/// Path counts by the subtree grammar: a path of length `l` from an `X_k`
/// root enters one of the sons' `N_i` subtrees; a path in an `N_k` subtree
/// walks the spine and may enter the hanging `X` subtrees, ending on the
/// spine only while it lasts.
pub struct StructuralCounts {
    c: HashMap<(i64, i64), u64>,
    d: HashMap<(i64, i64), u64>,
}

impl StructuralCounts {
    pub fn new() -> Self {
        StructuralCounts {
            c: HashMap::new(),
            d: HashMap::new(),
        }
    }

    /// Paths of length `l` from the root of an `X_k` subtree.
    pub fn c(&mut self, l: i64, k: i64) -> u64 {
        if l <= 0 || k <= 0 {
            return 0;
        }
        if let Some(&v) = self.c.get(&(l, k)) {
            return v;
        }
        let v = (1..=k).map(|i| self.d(l - 1, i)).sum();
        self.c.insert((l, k), v);
        v
    }

    /// Paths of length `m` from the root of an `N_k` subtree (length 0
    /// counts the terminus).
    pub fn d(&mut self, m: i64, k: i64) -> u64 {
        if m < 0 || k <= 0 {
            return 0;
        }
        if m == 0 || k == 1 {
            return 1;
        }
        if let Some(&v) = self.d.get(&(m, k)) {
            return v;
        }
        // Spine of k nodes with X subtrees hanging at each: X_{k-1-j} at
        // node j for j <= k-2, X_k at node k; plus the path that dies on
        // the spine.
        let mut v = u64::from(m < k);
        for j in 1..=(k - 2) {
            v += self.c(m - j + 1, k - 1 - j);
        }
        v += self.c(m - k + 1, k);
        self.d.insert((m, k), v);
        v
    }
}

impl Default for StructuralCounts {
    fn default() -> Self {
        Self::new()
    }
}

pub fn c_structural(l: i64, k: i64) -> u64 {
    StructuralCounts::new().c(l, k)
}

pub fn d_structural(m: i64, k: i64) -> u64 {
    StructuralCounts::new().d(m, k)
}

/// Which shape of the level-size-from-the-tree formula to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeSizeMode {
    /// The printed double sum over `i, j` with triangular offset `T_{i-1}`.
    Printed,
    /// The sum over chain attachments: an `X_k` at `T_k` and an `X_m` at
    /// `T_k + (k - m)` for `m < k`.
    Structural,
}

impl TreeSizeMode {
    pub fn name(self) -> &'static str {
        match self {
            TreeSizeMode::Printed => "printed",
            TreeSizeMode::Structural => "structural",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CVariant {
    Printed,
    Structural,
}

impl CVariant {
    pub fn name(self) -> &'static str {
        match self {
            CVariant::Printed => "printed-c",
            CVariant::Structural => "structural-c",
        }
    }
}

/// Lattice size read off the tree: 1 for the chain walk plus path counts
/// into the subtrees hanging off the chain.
pub fn spm_size_via_tree(n: u64, mode: TreeSizeMode, cvar: CVariant) -> u64 {
    let mut structural = StructuralCounts::new();
    let mut c = |l: i64, k: i64| -> u64 {
        match cvar {
            CVariant::Printed => c_printed(l, k),
            CVariant::Structural => structural.c(l, k),
        }
    };
    let n = n as i64;
    match mode {
        TreeSizeMode::Printed => {
            let mut k = 0i64;
            while (k + 1) * (k + 2) / 2 <= n {
                k += 1;
            }
            let mut total = 1u64;
            for i in 1..=k {
                for j in 1..=i {
                    total += c(n - i * (i - 1) / 2 - j + 1, i - j + 1);
                }
            }
            total
        }
        TreeSizeMode::Structural => {
            let mut total = 1u64;
            let mut k = 1i64;
            while k * (k + 1) / 2 <= n {
                let tk = k * (k + 1) / 2;
                total += c(n - tk, k);
                for m in 1..k {
                    total += c(n - tk - (k - m), m);
                }
                k += 1;
            }
            total
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    Mismatch,
}

/// One comparison row: a formula value against the oracle value for one
/// argument tuple.
#[derive(Debug, Clone, Serialize)]
pub struct ReconRow {
    pub formula: String,
    pub variant: String,
    pub args: String,
    pub formula_value: i64,
    pub oracle_value: i64,
    pub status: RowStatus,
}

/// Deterministic comparison record of every formula against its oracle.
/// Mismatches are findings, not failures.
#[derive(Debug, Clone, Serialize)]
pub struct ReconciliationReport {
    pub notes: Vec<String>,
    pub rows: Vec<ReconRow>,
}

impl ReconciliationReport {
    pub fn mismatches(&self) -> impl Iterator<Item = &ReconRow> {
        self.rows.iter().filter(|r| r.status == RowStatus::Mismatch)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for note in &self.notes {
            let _ = writeln!(s, "# {note}");
        }
        s.push_str("formula,variant,args,formula_value,oracle_value,status\n");
        for r in &self.rows {
            let status = match r.status {
                RowStatus::Ok => "ok",
                RowStatus::Mismatch => "mismatch",
            };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.formula, r.variant, r.args, r.formula_value, r.oracle_value, status
            );
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

fn row(
    rows: &mut Vec<ReconRow>,
    formula: &str,
    variant: &str,
    args: String,
    formula_value: i64,
    oracle_value: i64,
) {
    rows.push(ReconRow {
        formula: formula.to_string(),
        variant: variant.to_string(),
        args,
        formula_value,
        oracle_value,
        status: if formula_value == oracle_value {
            RowStatus::Ok
        } else {
            RowStatus::Mismatch
        },
    });
}

/// Runs every formula-versus-oracle comparison in range and assembles the
/// report: stratum recurrences under all three corrections, both path-count
/// recursions against explicit tree walks, every size formula against the
/// diagram sizes, the printed generating-partition count against direct
/// enumeration, and the multiset status of the stratum decomposition.
pub fn reconcile(
    max_n: u64,
    max_l: usize,
    max_k: usize,
) -> Result<ReconciliationReport, ReconcileError> {
    let notes = vec![
        "stratum recurrence initial conditions read as p(i,1) = 0 for i > 1; the \
         alternative reading p(1,j) = 0 for all j > 1 contradicts p(1,3) = 1"
            .to_string(),
        "printed path count evaluated with c(l,k) = 0 for l <= 0 or k <= 0; the printed case \
         split leaves these undefined and no other reading terminates"
            .to_string(),
        "delta variants: printed-corollary fires at triangular n (two below the computed row), \
         printed-theorem3 at triangular n+2 with i <= k, corrected at triangular n+2 with i = k"
            .to_string(),
        "generating-partition count compared under both radicand readings: 17/4 + 2n \
         (sum form) and (17/4)*2n (product form); enumeration is ground truth"
            .to_string(),
    ];
    let mut rows: Vec<ReconRow> = Vec::new();

    let sets = PSetTable::build(max_n)?;
    let oracle = p_table_from_sets(&sets);
    let imax = PTable::stratum_bound(max_n);

    // Stratum recurrence, all three corrections.
    for variant in [
        DeltaVariant::PrintedCorollary,
        DeltaVariant::PrintedTheorem3,
        DeltaVariant::Corrected,
    ] {
        let table = p_recursion(max_n, variant);
        for i in 1..=imax {
            for n in 1..=max_n {
                row(
                    &mut rows,
                    "p-recurrence",
                    variant.name(),
                    format!("i={i};n={n}"),
                    table.p(i, n as i64) as i64,
                    oracle.p(i, n as i64) as i64,
                );
            }
        }
    }

    // Path counts against explicit walks from the staircase roots.
    let depth = max_k * (max_k + 1) / 2 + max_l;
    let tree = build_tree_budgeted(depth, DEFAULT_NODE_BUDGET)?;
    let mut structural = StructuralCounts::new();
    for k in 1..=max_k {
        let root = Partition::fixed_point((k * (k + 1) / 2) as u64);
        for l in 1..=max_l {
            let oracle_paths = count_paths_oracle(&tree, &root, k, l)? as i64;
            row(
                &mut rows,
                "c",
                "printed",
                format!("l={l};k={k}"),
                c_printed(l as i64, k as i64) as i64,
                oracle_paths,
            );
            row(
                &mut rows,
                "c",
                "structural",
                format!("l={l};k={k}"),
                structural.c(l as i64, k as i64) as i64,
                oracle_paths,
            );
        }
    }

    // Lattice sizes by every route.
    for n in 0..=max_n {
        let truth = sets.p(0, n as i64).len() as i64;
        if n >= 1 {
            row(
                &mut rows,
                "spm-size",
                "via-p-oracle",
                format!("n={n}"),
                spm_size_via_p(n, &oracle) as i64,
                truth,
            );
        }
        for mode in [TreeSizeMode::Printed, TreeSizeMode::Structural] {
            for cvar in [CVariant::Printed, CVariant::Structural] {
                row(
                    &mut rows,
                    "spm-size",
                    &format!("tree-{}-{}", mode.name(), cvar.name()),
                    format!("n={n}"),
                    spm_size_via_tree(n, mode, cvar) as i64,
                    truth,
                );
            }
        }
    }

    // Generating partitions: closed form vs enumeration, both readings.
    for n in 4..=200u64 {
        let truth = generating_partitions(n).len() as i64;
        for (variant, radicand) in [
            ("sqrt(17/4+2n)", PrintedRadicand::Sum),
            ("sqrt(17/4*2n)", PrintedRadicand::Product),
        ] {
            row(
                &mut rows,
                "generating-count",
                variant,
                format!("n={n}"),
                generating_count_printed(n, radicand),
                truth,
            );
        }
    }

    // Multiset status of the stratum decomposition.
    for i in 1..=imax {
        let ti = (i as u64) * (i as u64 + 1) / 2;
        for n2 in ti.max(3)..=max_n {
            let report = decompose_stratum(i, n2, &sets)?;
            rows.push(ReconRow {
                formula: "stratum-union".to_string(),
                variant: "multiset".to_string(),
                args: format!("i={i};n={n2}"),
                formula_value: report.rhs_size as i64,
                oracle_value: report.lhs_size as i64,
                status: match report.status {
                    UnionStatus::Ok => RowStatus::Ok,
                    UnionStatus::MultisetMismatch => RowStatus::Mismatch,
                },
            });
        }
    }

    Ok(ReconciliationReport { notes, rows })
}

#[derive(Debug, thiserror::Error)]
pub enum ReconcileError {
    #[error(transparent)]
    Diagram(#[from] crate::diagram::DiagramError),
    #[error(transparent)]
    Tree(#[from] crate::sptree::TreeError),
}
