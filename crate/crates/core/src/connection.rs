//! Overlaps between chain eigenbases and their composition along
//! adjacent-transposition paths.
//!
//! Convention: `B[k][s] = ⟨ψ_k, φ_s⟩` with `φ` the source basis and `ψ` the
//! target basis, so `ψ_k = Σ_s B[k][s] φ_s`. Rows follow the target basis,
//! columns the source basis.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{BiError, Result};
use crate::spectral::{
    bi_cmp, joint_eigenbasis, max_abs, tuples_match, validate_permutation, ChainAlgebra,
    EigenBasis, Tolerances, TridiagonalAction,
};
use crate::subset::SubsetLabel;
use crate::tensor::TensorSpace;

/// Swap of the entries at 1-based positions `position` and `position + 1`.
///
/// Only `π[position]` changes. For `position == 1` the two chains define the
/// same subalgebra and `change` is `None`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwapStep {
    pub position: usize,
    pub before: ChainAlgebra,
    pub after: ChainAlgebra,
    /// `(Γ_{C∪{a}}, Γ_{C∪{b}})` with `C = π[position - 1]`.
    pub change: Option<(SubsetLabel, SubsetLabel)>,
}

impl SwapStep {
    pub fn apply(perm: &[usize], position: usize) -> Result<Self> {
        if position == 0 || position >= perm.len() {
            return Err(BiError::Step(format!(
                "position {position} invalid for n = {}",
                perm.len()
            )));
        }
        let before = ChainAlgebra::new(perm)?;
        let mut swapped = perm.to_vec();
        swapped.swap(position - 1, position);
        let after = ChainAlgebra::new(&swapped)?;
        let change = (position >= 2).then(|| {
            let g = position - 2;
            (before.generators()[g], after.generators()[g])
        });
        Ok(Self {
            position,
            before,
            after,
            change,
        })
    }

    pub fn is_trivial(&self) -> bool {
        self.change.is_none()
    }

    /// Index of the changed generator in the chain label tuple.
    pub fn label_slot(&self) -> Option<usize> {
        self.change.map(|_| self.position - 2)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    pub start: Vec<usize>,
    pub steps: Vec<SwapStep>,
}

impl Path {
    pub fn end(&self) -> &[usize] {
        self.steps
            .last()
            .map_or(&self.start, |s| s.after.perm())
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn positions(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.position).collect()
    }
}

/// Path from explicit swap positions.
pub fn path_from_positions(start: &[usize], positions: &[usize]) -> Result<Path> {
    validate_permutation(start)?;
    let mut perm = start.to_vec();
    let mut steps = Vec::with_capacity(positions.len());
    for &p in positions {
        let step = SwapStep::apply(&perm, p)?;
        perm = step.after.perm().to_vec();
        steps.push(step);
    }
    Ok(Path {
        start: start.to_vec(),
        steps,
    })
}

fn check_pair(pi: &[usize], sigma: &[usize]) -> Result<()> {
    validate_permutation(pi)?;
    validate_permutation(sigma)?;
    if pi.len() != sigma.len() {
        return Err(BiError::Permutation(sigma.to_vec()));
    }
    Ok(())
}

/// Bubble-sort path from `pi` to `sigma`, placing `sigma(1)`, `sigma(2)`, …
/// in turn. Its length is the inversion count of `sigma ∘ pi⁻¹`.
pub fn adjacent_path(pi: &[usize], sigma: &[usize]) -> Result<Path> {
    check_pair(pi, sigma)?;
    let mut cur = pi.to_vec();
    let mut positions = Vec::new();
    for (target, want) in sigma.iter().enumerate() {
        let mut q = cur.iter().position(|x| x == want).unwrap();
        while q > target {
            cur.swap(q - 1, q);
            positions.push(q);
            q -= 1;
        }
    }
    path_from_positions(pi, &positions)
}

/// Same endpoints as [`adjacent_path`], but fills positions from the back.
pub fn adjacent_path_from_back(pi: &[usize], sigma: &[usize]) -> Result<Path> {
    check_pair(pi, sigma)?;
    let n = sigma.len();
    let mut cur = pi.to_vec();
    let mut positions = Vec::new();
    for target in (0..n).rev() {
        let mut q = cur.iter().position(|&x| x == sigma[target]).unwrap();
        while q < target {
            cur.swap(q, q + 1);
            positions.push(q + 1);
            q += 1;
        }
    }
    path_from_positions(pi, &positions)
}

/// Number of inversions of `sigma ∘ pi⁻¹`.
pub fn inversion_count(pi: &[usize], sigma: &[usize]) -> usize {
    let pos: HashMap<usize, usize> = pi.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let seq: Vec<usize> = sigma.iter().map(|x| pos[x]).collect();
    (0..seq.len())
        .flat_map(|i| (i + 1..seq.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| seq[i] > seq[j])
        .count()
}

/// Overlaps between the vectors of two bases that share one common-label
/// tuple.
#[derive(Clone, Debug)]
pub struct CcBlock {
    pub common_labels: Vec<f64>,
    pub source_indices: Vec<usize>,
    pub target_indices: Vec<usize>,
    /// Rows follow `target_indices`, columns `source_indices`.
    pub matrix: DMatrix<f64>,
}

#[derive(Clone, Debug)]
pub struct ConnectionMatrix {
    pub source: Vec<usize>,
    pub target: Vec<usize>,
    pub level: usize,
    pub blocks: Vec<CcBlock>,
    /// Full overlap matrix, rows in target-basis order, columns in
    /// source-basis order.
    pub assembled: DMatrix<f64>,
    /// Worst `‖BᵀB - I‖∞` over blocks.
    pub orthogonality_residual: f64,
    /// Largest overlap between vectors with different common labels.
    pub off_block_residual: f64,
}

/// Pairs of `(source slot, target slot)` for operators labeling both bases.
fn common_slots(source: &ChainAlgebra, target: &ChainAlgebra) -> Vec<(usize, usize)> {
    let t = target.labeled_subsets();
    source
        .labeled_subsets()
        .iter()
        .enumerate()
        .filter_map(|(i, a)| t.iter().position(|b| b == a).map(|j| (i, j)))
        .collect()
}

fn sort_group(members: &mut [usize], basis: &EigenBasis, shared: &[usize], tol: f64) {
    let free: Vec<usize> = (0..basis.label_subsets().len())
        .filter(|e| !shared.contains(e))
        .collect();
    members.sort_by(|&a, &b| {
        free.iter()
            .map(|&e| bi_cmp(basis.labels[a][e], basis.labels[b][e], tol))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

fn grouped(basis: &EigenBasis, slots: &[usize], tol: f64) -> Vec<(Vec<f64>, Vec<usize>)> {
    let mut groups: Vec<(Vec<f64>, Vec<usize>)> = Vec::new();
    for (k, labels) in basis.labels.iter().enumerate() {
        let key: Vec<f64> = slots.iter().map(|&e| labels[e]).collect();
        match groups.iter_mut().find(|(g, _)| tuples_match(g, &key, tol)) {
            Some((_, m)) => m.push(k),
            None => groups.push((key, vec![k])),
        }
    }
    for (_, m) in groups.iter_mut() {
        sort_group(m, basis, slots, tol);
    }
    groups
}

/// Splits a full overlap matrix into common-label blocks and checks them.
fn assemble(
    source: &EigenBasis,
    target: &EigenBasis,
    assembled: DMatrix<f64>,
    tol: &Tolerances,
) -> Result<ConnectionMatrix> {
    let slots = common_slots(&source.chain, &target.chain);
    let src_slots: Vec<usize> = slots.iter().map(|s| s.0).collect();
    let tgt_slots: Vec<usize> = slots.iter().map(|s| s.1).collect();
    let src_groups = grouped(source, &src_slots, tol.label_match);
    let mut tgt_groups = grouped(target, &tgt_slots, tol.label_match);

    let mut blocks = Vec::with_capacity(src_groups.len());
    let mut block_of_target = vec![usize::MAX; target.dim()];
    let mut block_of_source = vec![usize::MAX; source.dim()];
    for (b, (labels, src)) in src_groups.into_iter().enumerate() {
        let pos = tgt_groups
            .iter()
            .position(|(l, _)| tuples_match(l, &labels, tol.label_match))
            .ok_or_else(|| BiError::Pairing {
                labels: labels.clone(),
            })?;
        let (_, tgt) = tgt_groups.swap_remove(pos);
        if tgt.len() != src.len() {
            return Err(BiError::Pairing { labels });
        }
        for &t in &tgt {
            block_of_target[t] = b;
        }
        for &s in &src {
            block_of_source[s] = b;
        }
        let matrix = DMatrix::from_fn(tgt.len(), src.len(), |r, c| assembled[(tgt[r], src[c])]);
        blocks.push(CcBlock {
            common_labels: labels,
            source_indices: src,
            target_indices: tgt,
            matrix,
        });
    }
    if let Some((labels, _)) = tgt_groups.into_iter().next() {
        return Err(BiError::Pairing { labels });
    }

    let orthogonality_residual = blocks
        .iter()
        .map(|b| {
            let k = b.matrix.ncols();
            max_abs(&(b.matrix.transpose() * &b.matrix - DMatrix::<f64>::identity(k, k)))
        })
        .fold(0.0, f64::max);
    let mut off_block_residual: f64 = 0.0;
    for t in 0..target.dim() {
        for s in 0..source.dim() {
            if block_of_target[t] != block_of_source[s] {
                off_block_residual = off_block_residual.max(assembled[(t, s)].abs());
            }
        }
    }
    if orthogonality_residual > tol.cc_orthogonality {
        return Err(BiError::Numerical {
            what: "connection block orthogonality",
            residual: orthogonality_residual,
            tolerance: tol.cc_orthogonality,
        });
    }
    if off_block_residual > tol.cc_orthogonality {
        return Err(BiError::Numerical {
            what: "connection block-diagonality",
            residual: off_block_residual,
            tolerance: tol.cc_orthogonality,
        });
    }
    Ok(ConnectionMatrix {
        source: source.chain.perm().to_vec(),
        target: target.chain.perm().to_vec(),
        level: source.level,
        blocks,
        assembled,
        orthogonality_residual,
        off_block_residual,
    })
}

/// Direct overlap `Wᵀ V` of two bases on the same level block.
pub fn direct_overlap(source: &EigenBasis, target: &EigenBasis, tol: &Tolerances) -> Result<ConnectionMatrix> {
    if source.level != target.level || source.vectors.shape() != target.vectors.shape() {
        return Err(BiError::Shape(format!(
            "bases live on levels {} and {}",
            source.level, target.level
        )));
    }
    let assembled = target.vectors.transpose() * &source.vectors;
    assemble(source, target, assembled, tol)
}

/// Overlap between the bases on either side of one swap step.
pub fn block_overlap(
    source: &EigenBasis,
    target: &EigenBasis,
    step: &SwapStep,
    tol: &Tolerances,
) -> Result<ConnectionMatrix> {
    if !source.chain.same_algebra(&step.before) || !target.chain.same_algebra(&step.after) {
        return Err(BiError::Step(format!(
            "step {:?} -> {:?} applied to bases of {:?} and {:?}",
            step.before.perm(),
            step.after.perm(),
            source.chain.perm(),
            target.chain.perm()
        )));
    }
    direct_overlap(source, target, tol)
}

/// Joint eigenbases keyed by the subalgebra they diagonalize.
pub struct BasisCache<'a> {
    space: &'a TensorSpace,
    level: usize,
    tol: Tolerances,
    bases: HashMap<Vec<SubsetLabel>, EigenBasis>,
}

impl<'a> BasisCache<'a> {
    pub fn new(space: &'a TensorSpace, level: usize, tol: &Tolerances) -> Self {
        Self {
            space,
            level,
            tol: tol.clone(),
            bases: HashMap::new(),
        }
    }

    pub fn get(&mut self, chain: &ChainAlgebra) -> Result<&EigenBasis> {
        let key = chain.generators().to_vec();
        if !self.bases.contains_key(&key) {
            let basis = joint_eigenbasis(self.space, chain, self.level, &self.tol)?;
            self.bases.insert(key.clone(), basis);
        }
        Ok(&self.bases[&key])
    }
}

/// Per-step connection matrices along a path; trivial steps are skipped.
pub fn step_connections(
    space: &TensorSpace,
    path: &Path,
    level: usize,
    tol: &Tolerances,
) -> Result<Vec<(SwapStep, ConnectionMatrix)>> {
    let mut cache = BasisCache::new(space, level, tol);
    let mut out = Vec::new();
    for step in path.steps.iter().filter(|s| !s.is_trivial()) {
        let src = cache.get(&step.before)?.clone();
        let tgt = cache.get(&step.after)?;
        out.push((step.clone(), block_overlap(&src, tgt, step, tol)?));
    }
    Ok(out)
}

/// Product of the per-step overlaps, regrouped by the labels common to the
/// endpoint bases.
pub fn compose_path(space: &TensorSpace, path: &Path, level: usize, tol: &Tolerances) -> Result<ConnectionMatrix> {
    let start = ChainAlgebra::new(&path.start)?;
    let end = ChainAlgebra::new(path.end())?;
    let mut cache = BasisCache::new(space, level, tol);
    let source = cache.get(&start)?.clone();
    let d = source.dim();
    let mut acc = DMatrix::<f64>::identity(d, d);
    for (_, cc) in step_connections(space, path, level, tol)? {
        acc = &cc.assembled * acc;
    }
    let mut target = cache.get(&end)?.clone();
    // keep the permutation the caller asked for even when an earlier one
    // defines the same subalgebra
    target.chain = end;
    let mut source = source;
    source.chain = start;
    assemble(&source, &target, acc, tol)
}

#[derive(Clone, Debug)]
pub struct ThreeTermReport {
    pub per_block: Vec<f64>,
    pub max_residual: f64,
}

impl ThreeTermReport {
    pub fn passes(&self, tol: &Tolerances) -> bool {
        self.max_residual <= tol.recurrence
    }
}

/// Checks `λ_k B_ks = T[s][s-1] B_{k,s-1} + T[s][s] B_ks + T[s][s+1] B_{k,s+1}`
/// in every block, where `T` is the action of the target's distinguished
/// generator in the source basis and `λ` its eigenvalues on the target basis
/// (indexed by target-basis column). Out-of-range neighbours are dropped.
pub fn check_three_term(
    cc: &ConnectionMatrix,
    tri: &TridiagonalAction,
    target_labels: &[f64],
) -> Result<ThreeTermReport> {
    let scale = tri.norm.max(1.0);
    let mut per_block = Vec::with_capacity(cc.blocks.len());
    for block in &cc.blocks {
        let mut sorted = block.source_indices.clone();
        sorted.sort_unstable();
        let band = tri
            .blocks
            .iter()
            .find(|b| {
                let mut idx = b.indices.clone();
                idx.sort_unstable();
                idx == sorted
            })
            .ok_or_else(|| {
                BiError::Shape(format!(
                    "no tridiagonal group covers source vectors {:?}",
                    block.source_indices
                ))
            })?;
        let col_of: HashMap<usize, usize> = block
            .source_indices
            .iter()
            .enumerate()
            .map(|(c, &s)| (s, c))
            .collect();
        let cols: Vec<usize> = band.indices.iter().map(|s| col_of[s]).collect();
        let m = cols.len();
        let mut worst: f64 = 0.0;
        for (k, &t) in block.target_indices.iter().enumerate() {
            let lambda = *target_labels.get(t).ok_or_else(|| {
                BiError::Shape(format!("no target label for basis vector {t}"))
            })?;
            let b = |s: usize| block.matrix[(k, cols[s])];
            for s in 0..m {
                let mut rhs = band.diagonal[s] * b(s);
                if s > 0 {
                    rhs += band.lower[s - 1] * b(s - 1);
                }
                if s + 1 < m {
                    rhs += band.upper[s] * b(s + 1);
                }
                worst = worst.max((lambda * b(s) - rhs).abs() / scale);
            }
        }
        per_block.push(worst);
    }
    let max_residual = per_block.iter().copied().fold(0.0, f64::max);
    Ok(ThreeTermReport {
        per_block,
        max_residual,
    })
}

/// Three-term check of every nontrivial step of a path: the target's new
/// generator acts tridiagonally in the source basis, sorted by the source's
/// outgoing generator.
pub fn recurrence_along_path(
    space: &TensorSpace,
    path: &Path,
    level: usize,
    tol: &Tolerances,
) -> Result<Vec<(SwapStep, ThreeTermReport)>> {
    let mut cache = BasisCache::new(space, level, tol);
    let mut out = Vec::new();
    for (step, cc) in step_connections(space, path, level, tol)? {
        let (slot, (_, incoming)) = match (step.label_slot(), step.change) {
            (Some(slot), Some(change)) => (slot, change),
            _ => continue,
        };
        let source = cache.get(&step.before)?.clone();
        let target = cache.get(&step.after)?;
        let tri = crate::spectral::tridiagonal_action(space, incoming, &source, slot, tol)?;
        let lambda: Vec<f64> = target.labels.iter().map(|l| l[slot]).collect();
        let report = check_three_term(&cc, &tri, &lambda)?;
        out.push((step, report));
    }
    Ok(out)
}

/// `Bᵀ diag(λ) B` per block: the action, in the source basis, of an operator
/// diagonal in the target basis with eigenvalues `target_labels`.
pub fn act_in_basis(cc: &ConnectionMatrix, target_labels: &[f64]) -> DMatrix<f64> {
    let d = cc.assembled.ncols();
    let mut out = DMatrix::zeros(d, d);
    for block in &cc.blocks {
        let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            block.target_indices.len(),
            block.target_indices.iter().map(|&t| target_labels[t]),
        ));
        let local = block.matrix.transpose() * lam * &block.matrix;
        for (r, &sr) in block.source_indices.iter().enumerate() {
            for (c, &sc) in block.source_indices.iter().enumerate() {
                out[(sr, sc)] = local[(r, c)];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;
    use crate::spectral::{operator_in_basis, tridiagonal_action};

    fn label(s: &[usize]) -> SubsetLabel {
        SubsetLabel::from_sites(s).unwrap()
    }

    fn space3(level: usize) -> TensorSpace {
        TensorSpace::uniform(&[rat(1, 2), rat(1, 3), rat(1, 4)], level).unwrap()
    }

    #[test]
    fn paths() {
        assert!(adjacent_path(&[1, 2, 3], &[1, 2, 3]).unwrap().is_empty());
        let p = adjacent_path(&[1, 2, 3], &[1, 3, 2]).unwrap();
        assert_eq!(p.positions(), vec![2]);
        assert_eq!(p.steps[0].change, Some((label(&[1, 2]), label(&[1, 3]))));

        let p = adjacent_path(&[1, 2, 3, 4], &[3, 1, 2, 4]).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.end(), &[3, 1, 2, 4]);
        assert_eq!(p.steps[0].change, Some((label(&[1, 2]), label(&[1, 3]))));
        // swapping the first two entries leaves every π[k], k ≥ 2, alone
        assert!(p.steps[1].is_trivial());
        for s in &p.steps {
            let differing = s
                .before
                .generators()
                .iter()
                .zip(s.after.generators())
                .filter(|(a, b)| a != b)
                .count();
            assert_eq!(differing, usize::from(!s.is_trivial()));
        }

        let front = adjacent_path(&[1, 2, 3, 4], &[4, 3, 2, 1]).unwrap();
        let back = adjacent_path_from_back(&[1, 2, 3, 4], &[4, 3, 2, 1]).unwrap();
        assert_eq!(front.len(), 6);
        assert_eq!(back.len(), 6);
        assert_ne!(front.positions(), back.positions());
        assert_eq!(back.end(), &[4, 3, 2, 1]);
        assert!(adjacent_path(&[1, 2], &[1, 2, 3]).is_err());
    }

    #[test]
    fn inversions_match_path_length() {
        let perms = [[2, 4, 1, 3], [4, 1, 3, 2], [1, 2, 3, 4], [3, 4, 2, 1]];
        for pi in &perms {
            for sigma in &perms {
                let p = adjacent_path(pi, sigma).unwrap();
                assert_eq!(p.len(), inversion_count(pi, sigma));
                assert_eq!(p.end(), sigma);
            }
        }
    }

    #[test]
    fn identity_and_permutation_overlaps() {
        let tol = Tolerances::default();
        let s = space3(3);
        let b = joint_eigenbasis(&s, &ChainAlgebra::standard(3).unwrap(), 3, &tol).unwrap();
        let cc = direct_overlap(&b, &b, &tol).unwrap();
        assert!((&cc.assembled - DMatrix::<f64>::identity(10, 10)).amax() < 1e-12);

        // same level block, columns reversed: a permutation matrix
        let s2 = TensorSpace::uniform(&[rat(1, 2), rat(1, 2)], 2).unwrap();
        let b = joint_eigenbasis(&s2, &ChainAlgebra::standard(2).unwrap(), 2, &tol).unwrap();
        let mut rev = b.clone();
        rev.labels.reverse();
        let cols: Vec<_> = (0..b.dim()).rev().map(|k| b.vectors.column(k).into_owned()).collect();
        rev.vectors = DMatrix::from_columns(&cols);
        let cc = direct_overlap(&b, &rev, &tol).unwrap();
        for r in 0..b.dim() {
            for c in 0..b.dim() {
                let expected = if r + c == b.dim() - 1 { 1.0 } else { 0.0 };
                assert!((cc.assembled[(r, c)] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn racah_blocks_and_recurrence() {
        let tol = Tolerances::default();
        let s = space3(3);
        let phi = joint_eigenbasis(&s, &ChainAlgebra::new(&[1, 2, 3]).unwrap(), 3, &tol).unwrap();
        let psi = joint_eigenbasis(&s, &ChainAlgebra::new(&[2, 3, 1]).unwrap(), 3, &tol).unwrap();
        let cc = direct_overlap(&phi, &psi, &tol).unwrap();
        // one block per Γ_123 value
        assert_eq!(cc.blocks.len(), 4);
        let sizes: Vec<usize> = cc.blocks.iter().map(|b| b.matrix.nrows()).collect();
        assert_eq!(sizes.iter().sum::<usize>(), 10);
        assert!(sizes.contains(&4));
        assert!(cc.orthogonality_residual < 1e-9);

        let tri = tridiagonal_action(&s, label(&[2, 3]), &phi, 0, &tol).unwrap();
        let lambda = psi.labels_of(label(&[2, 3])).unwrap();
        let rep = check_three_term(&cc, &tri, &lambda).unwrap();
        assert!(rep.max_residual < 1e-8, "{rep:?}");

        let transported = act_in_basis(&cc, &lambda);
        let direct = operator_in_basis(&s, label(&[2, 3]), &phi).unwrap();
        assert!((transported - direct).amax() < 1e-9);
    }

    #[test]
    fn scalar_block_recurrence() {
        let tol = Tolerances::default();
        let s = space3(1);
        let phi = joint_eigenbasis(&s, &ChainAlgebra::standard(3).unwrap(), 0, &tol).unwrap();
        let psi = joint_eigenbasis(&s, &ChainAlgebra::new(&[1, 3, 2]).unwrap(), 0, &tol).unwrap();
        let cc = direct_overlap(&phi, &psi, &tol).unwrap();
        let tri = tridiagonal_action(&s, label(&[1, 3]), &phi, 0, &tol).unwrap();
        assert_eq!(tri.blocks[0].diagonal.len(), 1);
        let lambda = psi.labels_of(label(&[1, 3])).unwrap();
        assert!((lambda[0] - tri.blocks[0].diagonal[0]).abs() < 1e-12);
        assert!(check_three_term(&cc, &tri, &lambda).unwrap().max_residual < 1e-12);
    }

    #[test]
    fn single_step_composition_is_the_step() {
        let tol = Tolerances::default();
        let s = space3(2);
        let path = adjacent_path(&[1, 2, 3], &[1, 3, 2]).unwrap();
        let composed = compose_path(&s, &path, 2, &tol).unwrap();
        let steps = step_connections(&s, &path, 2, &tol).unwrap();
        assert_eq!(steps.len(), 1);
        assert!((&composed.assembled - &steps[0].1.assembled).amax() < 1e-14);
        let empty = compose_path(&s, &adjacent_path(&[1, 2, 3], &[1, 2, 3]).unwrap(), 2, &tol).unwrap();
        assert!((&empty.assembled - DMatrix::<f64>::identity(6, 6)).amax() < 1e-14);
    }

    #[test]
    fn mismatched_step_is_rejected() {
        let tol = Tolerances::default();
        let s = space3(2);
        let phi = joint_eigenbasis(&s, &ChainAlgebra::standard(3).unwrap(), 2, &tol).unwrap();
        let step = SwapStep::apply(&[2, 3, 1], 2).unwrap();
        assert!(matches!(
            block_overlap(&phi, &phi, &step, &tol),
            Err(BiError::Step(_))
        ));
    }
}
