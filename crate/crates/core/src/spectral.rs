//! Orthonormal gauge, chain subalgebras and their joint eigenbases.
//!
//! In the monomial basis the norm of `e_n` is `c_1 ⋯ c_n`, so conjugating an
//! exact level block by `D = diag(∏_i sqrt(c_1^(i) ⋯ c_{n_i}^(i)))` makes every
//! `Γ_A` symmetric. All spectral work happens on these `f64` blocks.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_traits::One;

use crate::error::{BiError, Result};
use crate::linalg::{rat, to_f64, Rational};
use crate::subset::SubsetLabel;
use crate::tensor::TensorSpace;

/// Numerical tolerances shared by the spectral and connection layers.
#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    /// `‖VᵀV - I‖∞` of an eigenbasis.
    pub orthonormality: f64,
    /// `‖Γv - λv‖₂`, relative to `max(1, ‖Γ‖)`.
    pub eigen_residual: f64,
    /// Eigenvalue grouping gap, relative to `max(1, ‖Γ‖)`.
    pub cluster: f64,
    /// Off-band magnitude of a tridiagonal action, relative to `max(1, ‖Γ‖)`.
    pub tridiagonal: f64,
    /// `‖BᵀB - I‖∞` of a connection block, and its off-block leakage.
    pub cc_orthogonality: f64,
    /// Entrywise gap between a composed path and the direct overlap.
    pub composition: f64,
    /// Three-term recurrence residual, relative to `max(1, ‖Γ‖)`.
    pub recurrence: f64,
    /// Entrywise gap between a transported and a directly computed action.
    pub transport: f64,
    /// Matching of eigenvalue labels across bases.
    pub label_match: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            orthonormality: 1e-12,
            eigen_residual: 1e-10,
            cluster: 1e-8,
            tridiagonal: 1e-9,
            cc_orthogonality: 1e-9,
            composition: 1e-8,
            recurrence: 1e-8,
            transport: 1e-9,
            label_match: 1e-7,
        }
    }
}

/// Maximum absolute row sum.
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// `πY_n = ⟨Γ_{π[2]}, …, Γ_{π[n-1]}⟩` with `π[k] = {π(1), …, π(k)}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainAlgebra {
    perm: Vec<usize>,
    generators: Vec<SubsetLabel>,
}

pub fn validate_permutation(perm: &[usize]) -> Result<()> {
    let n = perm.len();
    let mut seen = vec![false; n + 1];
    for &p in perm {
        if p == 0 || p > n || seen[p] {
            return Err(BiError::Permutation(perm.to_vec()));
        }
        seen[p] = true;
    }
    if n == 0 || n > crate::subset::MAX_SITES {
        return Err(BiError::Permutation(perm.to_vec()));
    }
    Ok(())
}

impl ChainAlgebra {
    /// `perm` lists `π(1), …, π(n)` as 1-based sites.
    pub fn new(perm: &[usize]) -> Result<Self> {
        validate_permutation(perm)?;
        let n = perm.len();
        let generators = (2..n)
            .map(|k| SubsetLabel::from_sites(&perm[..k]))
            .collect::<Result<_>>()?;
        Ok(Self {
            perm: perm.to_vec(),
            generators,
        })
    }

    /// `Y_n`, the identity permutation.
    pub fn standard(n: usize) -> Result<Self> {
        Self::new(&(1..=n).collect::<Vec<_>>())
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn generators(&self) -> &[SubsetLabel] {
        &self.generators
    }

    /// Chain generators followed by the total Casimir `Γ_{[n]}`; one label
    /// per entry.
    pub fn labeled_subsets(&self) -> Vec<SubsetLabel> {
        let mut out = self.generators.clone();
        out.push(SubsetLabel::full(self.n()));
        out
    }

    /// Two permutations can define the same subalgebra.
    pub fn same_algebra(&self, other: &Self) -> bool {
        self.generators == other.generators
    }
}

fn check_gauge(space: &TensorSpace) -> Result<()> {
    let bound = rat(-1, 2);
    for site in 1..=space.n() {
        if *space.mu(site) <= bound {
            return Err(BiError::Gauge {
                site,
                mu: space.mu(site).to_string(),
            });
        }
    }
    Ok(())
}

/// Squared norms `∏_i c_1^(i) ⋯ c_{n_i}^(i)` of the level's monomial basis.
pub fn gauge_weights(space: &TensorSpace, level: usize) -> Result<Vec<Rational>> {
    check_gauge(space)?;
    Ok(space
        .level_states(level)?
        .iter()
        .map(|state| {
            let mut w = Rational::one();
            for (i, &k) in state.iter().enumerate() {
                for j in 1..=k {
                    w *= space.weight(i + 1, j);
                }
            }
            w
        })
        .collect())
}

/// `D Γ_A D⁻¹` on the level block, in `f64`.
pub fn normalized_block(space: &TensorSpace, a: SubsetLabel, level: usize) -> Result<DMatrix<f64>> {
    let weights = gauge_weights(space, level)?;
    let exact = space.casimir_block(a, level)?;
    let d = weights.len();
    let mut m = DMatrix::zeros(d, d);
    for (i, j, v) in exact.iter() {
        let scale = if i == j {
            1.0
        } else {
            to_f64(&(&weights[i] / &weights[j])).sqrt()
        };
        m[(i, j)] = to_f64(v) * scale;
    }
    Ok(m)
}

fn symmetrized(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Makes the largest-magnitude coordinate positive; near-ties go to the
/// lowest index.
pub fn apply_sign_convention(v: &mut DVector<f64>) {
    let peak = v.amax();
    if peak == 0.0 {
        return;
    }
    let lead = v
        .iter()
        .position(|x| x.abs() >= peak - 1e-9 * peak.max(1.0))
        .unwrap();
    if v[lead] < 0.0 {
        v.neg_mut();
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignConvention {
    LargestCoordinatePositive,
}

/// Joint eigenvectors of a chain subalgebra on one level block.
///
/// Column `k` of `vectors` carries `labels[k]`, one eigenvalue per entry of
/// [`ChainAlgebra::labeled_subsets`]. Columns are ordered by increasing
/// `|label|`, entry by entry.
#[derive(Clone, Debug)]
pub struct EigenBasis {
    pub chain: ChainAlgebra,
    pub level: usize,
    pub labels: Vec<Vec<f64>>,
    pub vectors: DMatrix<f64>,
    pub sign_convention: SignConvention,
}

impl EigenBasis {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn label_subsets(&self) -> Vec<SubsetLabel> {
        self.chain.labeled_subsets()
    }

    /// Position of `a` in the label tuple.
    pub fn label_index(&self, a: SubsetLabel) -> Option<usize> {
        self.label_subsets().iter().position(|&s| s == a)
    }

    /// Eigenvalues of one labeled operator, in column order.
    pub fn labels_of(&self, a: SubsetLabel) -> Option<Vec<f64>> {
        let idx = self.label_index(a)?;
        Some(self.labels.iter().map(|l| l[idx]).collect())
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Ordering by `|x|`, then by `x`, with tolerance.
pub fn bi_cmp(a: f64, b: f64, tol: f64) -> Ordering {
    if !close(a.abs(), b.abs(), tol) {
        a.abs().total_cmp(&b.abs())
    } else if !close(a, b, tol) {
        a.total_cmp(&b)
    } else {
        Ordering::Equal
    }
}

pub fn tuples_match(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(&x, &y)| close(x, y, tol))
}

fn tuple_cmp(a: &[f64], b: &[f64], tol: f64) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| bi_cmp(x, y, tol))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Diagonalizes the chain generators one after another, refining each
/// eigenvalue cluster of the previous generator, and finishes with `Γ_{[n]}`.
pub fn joint_eigenbasis(
    space: &TensorSpace,
    chain: &ChainAlgebra,
    level: usize,
    tol: &Tolerances,
) -> Result<EigenBasis> {
    if chain.n() != space.n() {
        return Err(BiError::Permutation(chain.perm().to_vec()));
    }
    let d = space.level_dimension(level)?;
    let ops: Vec<DMatrix<f64>> = chain
        .labeled_subsets()
        .iter()
        .map(|&a| normalized_block(space, a, level).map(|m| symmetrized(&m)))
        .collect::<Result<_>>()?;

    let mut clusters: Vec<(DMatrix<f64>, Vec<f64>)> = vec![(DMatrix::identity(d, d), Vec::new())];
    for op in &ops {
        let gap = tol.cluster * inf_norm(op).max(1.0);
        let mut refined = Vec::new();
        for (q, labels) in clusters {
            let restricted = symmetrized(&(q.transpose() * op * &q));
            let eig = SymmetricEigen::new(restricted);
            let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let mut start = 0;
            while start < order.len() {
                let mut end = start + 1;
                while end < order.len()
                    && eig.eigenvalues[order[end]] - eig.eigenvalues[order[end - 1]] <= gap
                {
                    end += 1;
                }
                let members = &order[start..end];
                let sub = DMatrix::from_columns(
                    &members
                        .iter()
                        .map(|&k| eig.eigenvectors.column(k).into_owned())
                        .collect::<Vec<_>>(),
                );
                let mean =
                    members.iter().map(|&k| eig.eigenvalues[k]).sum::<f64>() / members.len() as f64;
                let mut next = labels.clone();
                next.push(mean);
                refined.push((&q * sub, next));
                start = end;
            }
        }
        clusters = refined;
    }

    if let Some((q, labels)) = clusters.iter().find(|(q, _)| q.ncols() > 1) {
        return Err(BiError::Degeneracy {
            level,
            size: q.ncols(),
            labels: labels.clone(),
        });
    }

    let mut states: Vec<(Vec<f64>, DVector<f64>)> = clusters
        .into_iter()
        .map(|(q, labels)| {
            let mut v = q.column(0).into_owned();
            apply_sign_convention(&mut v);
            (labels, v)
        })
        .collect();
    states.sort_by(|a, b| tuple_cmp(&a.0, &b.0, tol.label_match));

    let vectors = DMatrix::from_columns(&states.iter().map(|s| s.1.clone()).collect::<Vec<_>>());
    let labels: Vec<Vec<f64>> = states.into_iter().map(|s| s.0).collect();

    let gram = vectors.transpose() * &vectors - DMatrix::<f64>::identity(d, d);
    let orth = max_abs(&gram);
    if orth > tol.orthonormality {
        return Err(BiError::Numerical {
            what: "eigenbasis orthonormality",
            residual: orth,
            tolerance: tol.orthonormality,
        });
    }
    for (e, op) in ops.iter().enumerate() {
        let scale = inf_norm(op).max(1.0);
        for (k, label) in labels.iter().enumerate() {
            let v = vectors.column(k);
            let r = (op * v - v * label[e]).norm() / scale;
            if r > tol.eigen_residual {
                return Err(BiError::Numerical {
                    what: "eigenvector",
                    residual: r,
                    tolerance: tol.eigen_residual,
                });
            }
        }
    }

    Ok(EigenBasis {
        chain: chain.clone(),
        level,
        labels,
        vectors,
        sign_convention: SignConvention::LargestCoordinatePositive,
    })
}

/// `Vᵀ Γ_A V` for the normalized block of `Γ_A`.
pub fn operator_in_basis(space: &TensorSpace, a: SubsetLabel, basis: &EigenBasis) -> Result<DMatrix<f64>> {
    let m = normalized_block(space, a, basis.level)?;
    if m.nrows() != basis.vectors.nrows() {
        return Err(BiError::Shape(format!(
            "basis has {} rows but the level block has {}",
            basis.vectors.nrows(),
            m.nrows()
        )));
    }
    Ok(basis.vectors.transpose() * m * &basis.vectors)
}

/// Bands of an operator on one group of basis vectors sharing every label
/// except the sort key.
#[derive(Clone, Debug)]
pub struct TridiagonalBlock {
    /// Labels of the group with the sort-key entry removed.
    pub common_labels: Vec<f64>,
    /// Basis columns of the group, sorted by increasing `|sort-key label|`.
    pub indices: Vec<usize>,
    pub keys: Vec<f64>,
    /// `a_{s,s}`
    pub diagonal: Vec<f64>,
    /// `T[s][s+1]`
    pub upper: Vec<f64>,
    /// `T[s+1][s]`
    pub lower: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct TridiagonalAction {
    pub op: SubsetLabel,
    pub sort_key: usize,
    pub blocks: Vec<TridiagonalBlock>,
    pub off_band_residual: f64,
    pub norm: f64,
}

/// Groups basis columns by their labels with entry `skip` removed, keeping
/// first-occurrence order.
pub fn group_by_labels(basis: &EigenBasis, skip: Option<usize>, tol: f64) -> Vec<(Vec<f64>, Vec<usize>)> {
    let mut groups: Vec<(Vec<f64>, Vec<usize>)> = Vec::new();
    for (k, labels) in basis.labels.iter().enumerate() {
        let key: Vec<f64> = labels
            .iter()
            .enumerate()
            .filter(|&(e, _)| Some(e) != skip)
            .map(|(_, &x)| x)
            .collect();
        match groups.iter_mut().find(|(g, _)| tuples_match(g, &key, tol)) {
            Some((_, members)) => members.push(k),
            None => groups.push((key, vec![k])),
        }
    }
    groups
}

/// Action of `Γ_op` in `basis`, banded within each group of vectors that
/// share all labels but `sort_key`.
pub fn tridiagonal_action(
    space: &TensorSpace,
    op: SubsetLabel,
    basis: &EigenBasis,
    sort_key: usize,
    tol: &Tolerances,
) -> Result<TridiagonalAction> {
    if sort_key >= basis.label_subsets().len() {
        return Err(BiError::Shape(format!("sort key {sort_key} out of range")));
    }
    let normalized = normalized_block(space, op, basis.level)?;
    let norm = inf_norm(&normalized);
    let t = basis.vectors.transpose() * &normalized * &basis.vectors;

    let mut slot = vec![(usize::MAX, 0usize); basis.dim()];
    let mut blocks = Vec::new();
    for (g, (common, mut members)) in group_by_labels(basis, Some(sort_key), tol.label_match)
        .into_iter()
        .enumerate()
    {
        members.sort_by(|&a, &b| {
            bi_cmp(basis.labels[a][sort_key], basis.labels[b][sort_key], tol.label_match)
        });
        for (pos, &m) in members.iter().enumerate() {
            slot[m] = (g, pos);
        }
        let m = members.len();
        blocks.push(TridiagonalBlock {
            common_labels: common,
            keys: members.iter().map(|&k| basis.labels[k][sort_key]).collect(),
            diagonal: members.iter().map(|&k| t[(k, k)]).collect(),
            upper: (0..m.saturating_sub(1))
                .map(|s| t[(members[s], members[s + 1])])
                .collect(),
            lower: (0..m.saturating_sub(1))
                .map(|s| t[(members[s + 1], members[s])])
                .collect(),
            indices: members,
        });
    }

    let mut off_band: f64 = 0.0;
    for i in 0..basis.dim() {
        for j in 0..basis.dim() {
            let (gi, pi) = slot[i];
            let (gj, pj) = slot[j];
            if gi != gj || pi.abs_diff(pj) > 1 {
                off_band = off_band.max(t[(i, j)].abs());
            }
        }
    }
    if off_band > tol.tridiagonal * norm.max(1.0) {
        return Err(BiError::NotTridiagonal {
            op,
            residual: off_band,
        });
    }
    Ok(TridiagonalAction {
        op,
        sort_key,
        blocks,
        off_band_residual: off_band,
        norm,
    })
}

/// Snaps `x` to the nearest rational with denominator at most `max_den`,
/// when one lies within `tol`. Diagnostic only.
pub fn snap_rational(x: f64, max_den: i64, tol: f64) -> Option<Rational> {
    (1..=max_den).find_map(|q| {
        let p = (x * q as f64).round();
        ((x - p / q as f64).abs() <= tol).then(|| rat(p as i64, q))
    })
}
