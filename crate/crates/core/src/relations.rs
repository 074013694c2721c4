//! Exact checks of the anticommutation relations among the subset Casimirs.
//!
//! For subsets `A`, `B` of `[n]`:
//!
//! ```text
//! {Γ_A, Γ_B} = Γ_{(A∪B)\(A∩B)} + 2 Γ_{A∩B} Γ_{A∪B} + 2 Γ_{A\(A∩B)} Γ_{B\(A∩B)}
//! ```
//!
//! A failing relation is reported, not raised.

use std::time::{Duration, Instant};

use crate::error::{BiError, Result};
use crate::exec::{self, Execution};
use crate::linalg::{bracket, int, BracketKind, Rational, SparseRatMatrix};
use crate::subset::SubsetLabel;
use crate::tensor::{op_algebra, subset_casimir, LeveledOperator, OpKind, TensorSpace};

/// `[Γ_A, Γ_B] = 0` is forced when one subset contains the other or they are
/// disjoint.
pub fn commutes_trivially(a: SubsetLabel, b: SubsetLabel) -> bool {
    a.is_subset_of(b) || b.is_subset_of(a) || a.is_disjoint(b)
}

#[derive(Clone, Debug, PartialEq)]
pub enum PairStatus {
    Zero,
    Violation {
        level: usize,
        row: usize,
        col: usize,
        value: Rational,
    },
}

impl PairStatus {
    pub fn is_zero(&self) -> bool {
        matches!(self, PairStatus::Zero)
    }

    fn of(residual: &LeveledOperator) -> Self {
        match residual.first_nonzero() {
            None => PairStatus::Zero,
            Some((level, row, col, value)) => PairStatus::Violation {
                level,
                row,
                col,
                value,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairResult {
    pub a: SubsetLabel,
    pub b: SubsetLabel,
    pub status: PairStatus,
}

#[derive(Clone, Debug)]
pub struct RelationReport {
    pub n: usize,
    pub max_level: usize,
    pub pairs: Vec<PairResult>,
    pub centrality: Vec<PairResult>,
    pub elapsed: Duration,
}

impl RelationReport {
    pub fn passes(&self) -> bool {
        self.pairs
            .iter()
            .chain(&self.centrality)
            .all(|p| p.status.is_zero())
    }

    pub fn failures(&self) -> impl Iterator<Item = &PairResult> {
        self.pairs
            .iter()
            .chain(&self.centrality)
            .filter(|p| !p.status.is_zero())
    }

    /// First failure in pair order, then by level.
    pub fn first_failure(&self) -> Option<&PairResult> {
        self.failures().next()
    }
}

/// `{Γ_A, Γ_B} - Γ_{AΔB} - 2Γ_{A∩B}Γ_{A∪B} - 2Γ_{A\B}Γ_{B\A}`, blockwise.
pub fn bi_residual(space: &TensorSpace, a: SubsetLabel, b: SubsetLabel) -> Result<LeveledOperator> {
    let ga = subset_casimir(space, a)?;
    let gb = subset_casimir(space, b)?;
    residual_of(space, &ga, &gb, a, b)
}

fn residual_of(
    space: &TensorSpace,
    ga: &LeveledOperator,
    gb: &LeveledOperator,
    a: SubsetLabel,
    b: SubsetLabel,
) -> Result<LeveledOperator> {
    let meet = a.intersection(b);
    let join = a.union(b);
    let sym = subset_casimir(space, a.symmetric_difference(b))?;
    let g_meet = subset_casimir(space, meet)?;
    let g_join = subset_casimir(space, join)?;
    let g_left = subset_casimir(space, a.difference(meet))?;
    let g_right = subset_casimir(space, b.difference(meet))?;

    let anti = op_algebra(OpKind::Anticommutator, &[ga, gb], &[])?;
    let mixed = op_algebra(OpKind::Product, &[&g_meet, &g_join], &[])?;
    let apart = op_algebra(OpKind::Product, &[&g_left, &g_right], &[])?;
    op_algebra(
        OpKind::LinearCombination,
        &[&anti, &sym, &mixed, &apart],
        &[int(1), int(-1), int(-2), int(-2)],
    )
}

fn check_disjoint(k: SubsetLabel, l: SubsetLabel, m: SubsetLabel) -> Result<()> {
    if !(k.is_disjoint(l) && l.is_disjoint(m) && k.is_disjoint(m)) || k.union(l).union(m).is_empty() {
        return Err(BiError::Overlap(k, l, m));
    }
    Ok(())
}

/// The three cyclic instances of
/// `{Γ_{K∪L}, Γ_{L∪M}} = Γ_{K∪M} + 2Γ_L Γ_{K∪L∪M} + 2Γ_K Γ_M`
/// for pairwise disjoint `K`, `L`, `M`, evaluated level by level.
pub fn b3_embedding_check(
    space: &TensorSpace,
    k: SubsetLabel,
    l: SubsetLabel,
    m: SubsetLabel,
) -> Result<RelationReport> {
    check_disjoint(k, l, m)?;
    let start = Instant::now();
    let all = k.union(l).union(m);
    let mut pairs = Vec::with_capacity(3);
    for (x, y, z) in [(k, l, m), (l, m, k), (m, k, l)] {
        let left = x.union(y);
        let right = y.union(z);
        let mut blocks = std::collections::BTreeMap::new();
        for level in 0..=space.max_level() {
            let g = |s: SubsetLabel| space.casimir_block(s, level);
            let lhs = bracket(BracketKind::Anticommutator, &*g(left)?, &*g(right)?)?;
            let rhs = g(x.union(z))?
                .add(&g(y)?.mul(&*g(all)?)?.scale(&int(2)))?
                .add(&g(x)?.mul(&*g(z)?)?.scale(&int(2)))?;
            blocks.insert(level, lhs.sub(&rhs)?);
        }
        let residual = LeveledOperator::from_blocks(
            space,
            crate::tensor::OperatorTag::Derived("embedding".into()),
            blocks,
        )?;
        pairs.push(PairResult {
            a: left,
            b: right,
            status: PairStatus::of(&residual),
        });
    }
    Ok(RelationReport {
        n: space.n(),
        max_level: space.max_level(),
        pairs,
        centrality: Vec::new(),
        elapsed: start.elapsed(),
    })
}

/// Every ordered pair of nonempty subsets, plus centrality of `Γ_{i}` and
/// `Γ_{[n]}`.
pub fn verify_all(space: &TensorSpace) -> Result<RelationReport> {
    verify_all_with(space, Execution::default())
}

pub fn verify_all_with(space: &TensorSpace, exec: Execution) -> Result<RelationReport> {
    let start = Instant::now();
    let n = space.n();
    let subsets: Vec<SubsetLabel> = SubsetLabel::all_nonempty(n).collect();
    // warm the block cache once per subset so pair workers only read it
    let casimirs: Vec<LeveledOperator> = exec::map(exec, &SubsetLabel::all(n).collect::<Vec<_>>(), |&a| {
        subset_casimir(space, a)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let by_subset = |a: SubsetLabel| &casimirs[a.bits() as usize];

    let pairs: Vec<(SubsetLabel, SubsetLabel)> = subsets
        .iter()
        .flat_map(|&a| subsets.iter().map(move |&b| (a, b)))
        .collect();
    let results = exec::map(exec, &pairs, |&(a, b)| -> Result<PairResult> {
        let residual = residual_of(space, by_subset(a), by_subset(b), a, b)?;
        Ok(PairResult {
            a,
            b,
            status: PairStatus::of(&residual),
        })
    });
    let pairs = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut central_checks = Vec::new();
    let mut centrals: Vec<SubsetLabel> = (1..=n).map(SubsetLabel::single).collect();
    if n > 1 {
        centrals.push(SubsetLabel::full(n));
    }
    for &c in &centrals {
        for &a in &subsets {
            central_checks.push((c, a));
        }
    }
    let centrality = exec::map(exec, &central_checks, |&(c, a)| -> Result<PairResult> {
        let comm = op_algebra(OpKind::Commutator, &[by_subset(c), by_subset(a)], &[])?;
        Ok(PairResult {
            a: c,
            b: a,
            status: PairStatus::of(&comm),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    Ok(RelationReport {
        n,
        max_level: space.max_level(),
        pairs,
        centrality,
        elapsed: start.elapsed(),
    })
}

/// `ω_{ik} = 2Γ_j Γ_{ijk} + 2Γ_i Γ_k` for `{i, j, k} = [3]`, blockwise.
pub fn omega(space: &TensorSpace, i: usize, j: usize, k: usize) -> Result<LeveledOperator> {
    let s = SubsetLabel::single;
    let gj = subset_casimir(space, s(j))?;
    let gall = subset_casimir(space, s(i).union(s(j)).union(s(k)))?;
    let gi = subset_casimir(space, s(i))?;
    let gk = subset_casimir(space, s(k))?;
    let p1 = op_algebra(OpKind::Product, &[&gj, &gall], &[])?;
    let p2 = op_algebra(OpKind::Product, &[&gi, &gk], &[])?;
    op_algebra(OpKind::LinearCombination, &[&p1, &p2], &[int(2), int(2)])
}

/// Flips the sign of one entry of one block; used to exercise failure
/// localization.
pub fn inject_fault(op: LeveledOperator, level: usize, row: usize, col: usize) -> LeveledOperator {
    let mut block: SparseRatMatrix = op
        .block(level)
        .cloned()
        .expect("level present in operator");
    let v = block.get(row, col);
    let flipped = if v == int(0) { int(1) } else { -v };
    block.set(row, col, flipped);
    op.with_block(level, block)
}

/// Anticommutation residual for caller-supplied operators standing in for
/// `Γ_A` and `Γ_B`.
pub fn bi_residual_of(
    space: &TensorSpace,
    ga: &LeveledOperator,
    gb: &LeveledOperator,
    a: SubsetLabel,
    b: SubsetLabel,
) -> Result<LeveledOperator> {
    residual_of(space, ga, gb, a, b)
}
