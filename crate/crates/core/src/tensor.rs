//! n-fold tensor products, subset realizations and subset Casimirs.
//!
//! Two independent constructions live here:
//!
//! * [`subset_generators`] builds `J±^A`, `J0^A`, `P^A` on the full truncated
//!   product space out of Kronecker products, and [`coproduct`] rebuilds the
//!   same realizations by iterating the comultiplication;
//! * [`TensorSpace::casimir_block`] applies `Γ_A` directly to the multi-index
//!   states of one level, never forming the ladder matrices.
//!
//! Tests cross-check the two.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::hash::{Hash, Hasher};
use std::sync::{Arc, RwLock};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{BiError, Result};
use crate::linalg::{bracket, int, kron, rat, BracketKind, Rational, SparseRatMatrix};
use crate::osp::{build_site, weight_coeff, GeneratorSet, ModuleSpec};
use crate::subset::{SubsetLabel, MAX_SITES};

/// Largest full product-space dimension [`subset_generators`] will build.
pub const MAX_PRODUCT_DIM: usize = 1 << 16;

/// On-disk description of a tensor space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceConfig {
    pub n: usize,
    pub sites: Vec<ModuleSpec>,
    pub max_level: usize,
}

impl SpaceConfig {
    /// Every site gets truncation `max_level`.
    pub fn uniform(mus: &[Rational], max_level: usize) -> Self {
        Self {
            n: mus.len(),
            sites: mus
                .iter()
                .map(|mu| ModuleSpec::new(mu.clone(), max_level.max(1)))
                .collect(),
            max_level,
        }
    }
}

#[derive(Debug)]
struct LevelBasis {
    states: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

type BlockCache = RwLock<HashMap<(SubsetLabel, usize), Arc<SparseRatMatrix>>>;

/// The truncated space `V_1 ⊗ … ⊗ V_n`, graded by total level.
///
/// Levels `0..=max_level` are retained; `max_level` never exceeds any site
/// truncation, so every retained block of every `Γ_A` is exact.
#[derive(Debug)]
pub struct TensorSpace {
    specs: Vec<ModuleSpec>,
    max_level: usize,
    levels: Vec<LevelBasis>,
    // c_k for k = 0..=truncation, per site
    weights: Vec<Vec<Rational>>,
    fingerprint: u64,
    cache: BlockCache,
}

fn compositions(
    remaining: usize,
    caps: &[usize],
    prefix: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    let site = prefix.len();
    if site + 1 == caps.len() {
        if remaining <= caps[site] {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
        }
        return;
    }
    for k in 0..=remaining.min(caps[site]) {
        prefix.push(k);
        compositions(remaining - k, caps, prefix, out);
        prefix.pop();
    }
}

impl TensorSpace {
    pub fn new(specs: Vec<ModuleSpec>, max_level: usize) -> Result<Self> {
        let n = specs.len();
        if n == 0 || n > MAX_SITES {
            return Err(BiError::Config(format!(
                "site count {n} outside 1..={MAX_SITES}"
            )));
        }
        if let Some((i, s)) = specs.iter().enumerate().find(|(_, s)| s.truncation < 1) {
            return Err(BiError::Config(format!(
                "site {} has truncation {} < 1",
                i + 1,
                s.truncation
            )));
        }
        let min_trunc = specs.iter().map(|s| s.truncation).min().unwrap();
        if max_level > min_trunc {
            return Err(BiError::Config(format!(
                "max_level {max_level} exceeds the smallest site truncation {min_trunc}"
            )));
        }
        let caps: Vec<usize> = specs.iter().map(|s| s.truncation).collect();
        let levels = (0..=max_level)
            .map(|e| {
                let mut states = Vec::new();
                compositions(e, &caps, &mut Vec::with_capacity(n), &mut states);
                let index = states
                    .iter()
                    .enumerate()
                    .map(|(k, s)| (s.clone(), k))
                    .collect();
                LevelBasis { states, index }
            })
            .collect();
        let weights = specs
            .iter()
            .map(|s| (0..=s.truncation).map(|k| weight_coeff(k, &s.mu)).collect())
            .collect();
        let mut hasher = DefaultHasher::new();
        max_level.hash(&mut hasher);
        for s in &specs {
            s.mu.to_string().hash(&mut hasher);
            s.truncation.hash(&mut hasher);
        }
        Ok(Self {
            specs,
            max_level,
            levels,
            weights,
            fingerprint: hasher.finish(),
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn from_config(config: &SpaceConfig) -> Result<Self> {
        if config.n != config.sites.len() {
            return Err(BiError::Config(format!(
                "n = {} but {} sites given",
                config.n,
                config.sites.len()
            )));
        }
        Self::new(config.sites.clone(), config.max_level)
    }

    /// Uniform truncation `max_level` at every site.
    pub fn uniform(mus: &[Rational], max_level: usize) -> Result<Self> {
        Self::from_config(&SpaceConfig::uniform(mus, max_level))
    }

    pub fn config(&self) -> SpaceConfig {
        SpaceConfig {
            n: self.n(),
            sites: self.specs.clone(),
            max_level: self.max_level,
        }
    }

    pub fn n(&self) -> usize {
        self.specs.len()
    }

    pub fn specs(&self) -> &[ModuleSpec] {
        &self.specs
    }

    pub fn mu(&self, site: usize) -> &Rational {
        &self.specs[site - 1].mu
    }

    pub fn max_level(&self) -> usize {
        self.max_level
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn full_subset(&self) -> SubsetLabel {
        SubsetLabel::full(self.n())
    }

    fn check_level(&self, level: usize) -> Result<()> {
        if level > self.max_level {
            return Err(BiError::LevelOutOfRange {
                level,
                max_level: self.max_level,
            });
        }
        Ok(())
    }

    fn check_subset(&self, a: SubsetLabel) -> Result<()> {
        match a.max_site() {
            Some(m) if m > self.n() => Err(BiError::SubsetOutOfRange {
                subset: a,
                n: self.n(),
            }),
            _ => Ok(()),
        }
    }

    pub fn level_dimension(&self, level: usize) -> Result<usize> {
        self.check_level(level)?;
        Ok(self.levels[level].states.len())
    }

    /// Multi-indices of the level block, in basis order.
    pub fn level_states(&self, level: usize) -> Result<&[Vec<usize>]> {
        self.check_level(level)?;
        Ok(&self.levels[level].states)
    }

    pub fn state_index(&self, state: &[usize]) -> Option<usize> {
        let level: usize = state.iter().sum();
        self.levels.get(level)?.index.get(state).copied()
    }

    /// `c_k` at `site` (1-based).
    pub fn weight(&self, site: usize, k: usize) -> &Rational {
        &self.weights[site - 1][k]
    }

    /// Dimension of the full truncated product `∏ (N_i + 1)`.
    pub fn product_dimension(&self) -> usize {
        self.specs.iter().map(|s| s.truncation + 1).product()
    }

    /// Position of a multi-index in the Kronecker-ordered product basis.
    pub fn product_index(&self, state: &[usize]) -> usize {
        state
            .iter()
            .zip(&self.specs)
            .fold(0, |acc, (&k, s)| acc * (s.truncation + 1) + k)
    }

    /// Exact level block of `Γ_A`, cached per `(A, level)`.
    pub fn casimir_block(&self, a: SubsetLabel, level: usize) -> Result<Arc<SparseRatMatrix>> {
        self.check_level(level)?;
        self.check_subset(a)?;
        if let Some(hit) = self.cache.read().unwrap().get(&(a, level)) {
            return Ok(Arc::clone(hit));
        }
        let block = Arc::new(self.build_casimir_block(a, level));
        // first writer wins so every caller sees one canonical block
        let mut cache = self.cache.write().unwrap();
        Ok(Arc::clone(cache.entry((a, level)).or_insert(block)))
    }

    fn parity_string(state: &[usize], from: usize, to: usize) -> bool {
        // sign of ∏_{j=from+1}^{to} P^(j), true means -1
        state[from..to].iter().map(|&k| k & 1).sum::<usize>() % 2 == 1
    }

    fn build_casimir_block(&self, a: SubsetLabel, level: usize) -> SparseRatMatrix {
        let basis = &self.levels[level];
        let dim = basis.states.len();
        if a.is_empty() {
            return SparseRatMatrix::scalar(dim, rat(-1, 2));
        }
        let sites: Vec<usize> = a.to_vec();
        let top = a.max_site().unwrap();
        let half = rat(1, 2);
        let mut out = SparseRatMatrix::zeros(dim, dim);
        for (col, state) in basis.states.iter().enumerate() {
            let odd_a = sites.iter().map(|&s| state[s - 1]).sum::<usize>() % 2 == 1;
            let sign_a = if odd_a { -Rational::one() } else { Rational::one() };

            // J0^A P^A - P^A / 2
            let mut diag = -half.clone();
            for &s in &sites {
                diag += int(state[s - 1] as i64) + &self.specs[s - 1].mu + &half;
            }
            out.add_at(col, col, &(&diag * &sign_a));

            // - J+^A J-^A P^A
            let mut lowered = state.clone();
            for &i in &sites {
                let ni = state[i - 1];
                if ni == 0 {
                    continue;
                }
                let mut down = self.weights[i - 1][ni].clone();
                if Self::parity_string(state, i, top) {
                    down = -down;
                }
                lowered[i - 1] -= 1;
                for &l in &sites {
                    if lowered[l - 1] >= self.specs[l - 1].truncation {
                        continue;
                    }
                    let up_negative = Self::parity_string(&lowered, l, top);
                    lowered[l - 1] += 1;
                    let row = basis.index[&lowered];
                    lowered[l - 1] -= 1;
                    let mut coeff = &down * &sign_a;
                    if !up_negative {
                        coeff = -coeff;
                    }
                    out.add_at(row, col, &coeff);
                }
                lowered[i - 1] += 1;
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OperatorTag {
    Casimir(SubsetLabel),
    Derived(String),
}

/// Operator stored as its diagonal blocks, one per retained level.
#[derive(Clone, Debug)]
pub struct LeveledOperator {
    pub tag: OperatorTag,
    blocks: BTreeMap<usize, Arc<SparseRatMatrix>>,
    fingerprint: u64,
}

impl LeveledOperator {
    pub fn blocks(&self) -> &BTreeMap<usize, Arc<SparseRatMatrix>> {
        &self.blocks
    }

    pub fn block(&self, level: usize) -> Option<&SparseRatMatrix> {
        self.blocks.get(&level).map(|b| b.as_ref())
    }

    /// True iff every block is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.blocks.values().all(|b| b.is_zero())
    }

    /// First nonzero entry by level, then row-major position.
    pub fn first_nonzero(&self) -> Option<(usize, usize, usize, Rational)> {
        self.blocks.iter().find_map(|(&level, b)| {
            b.iter().next().map(|(i, j, v)| (level, i, j, v.clone()))
        })
    }

    pub fn from_blocks(
        space: &TensorSpace,
        tag: OperatorTag,
        blocks: BTreeMap<usize, SparseRatMatrix>,
    ) -> Result<Self> {
        for (&level, b) in &blocks {
            let dim = space.level_dimension(level)?;
            if b.shape() != (dim, dim) {
                return Err(BiError::DimensionMismatch {
                    op: "level block",
                    left: b.shape(),
                    right: (dim, dim),
                });
            }
        }
        Ok(Self {
            tag,
            blocks: blocks.into_iter().map(|(k, v)| (k, Arc::new(v))).collect(),
            fingerprint: space.fingerprint(),
        })
    }

    /// Replaces one block. Intended for fault-injection tests.
    pub fn with_block(mut self, level: usize, block: SparseRatMatrix) -> Self {
        self.blocks.insert(level, Arc::new(block));
        self
    }

    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .blocks
            .iter()
            .map(|(level, b)| (level.to_string(), serde_json::to_value(b.as_ref()).unwrap()))
            .collect();
        serde_json::Value::Object(map)
    }
}

/// `Γ_A` on every retained level; `Γ_∅ = -1/2`.
pub fn subset_casimir(space: &TensorSpace, a: SubsetLabel) -> Result<LeveledOperator> {
    let blocks = (0..=space.max_level())
        .map(|e| Ok((e, space.casimir_block(a, e)?)))
        .collect::<Result<_>>()?;
    Ok(LeveledOperator {
        tag: OperatorTag::Casimir(a),
        blocks,
        fingerprint: space.fingerprint(),
    })
}

pub fn level_dimension(space: &TensorSpace, level: usize) -> Result<usize> {
    space.level_dimension(level)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpKind {
    Commutator,
    Anticommutator,
    /// Left-to-right product of all operands.
    Product,
    /// `Σ coefficients[k] * operands[k]`.
    LinearCombination,
}

/// Blockwise operator algebra on a common space.
pub fn op_algebra(
    kind: OpKind,
    operands: &[&LeveledOperator],
    coefficients: &[Rational],
) -> Result<LeveledOperator> {
    let first = operands
        .first()
        .ok_or_else(|| BiError::Shape("op_algebra needs at least one operand".into()))?;
    if operands.iter().any(|o| o.fingerprint != first.fingerprint) {
        return Err(BiError::SpaceMismatch);
    }
    let levels: Vec<usize> = first.blocks.keys().copied().collect();
    if operands
        .iter()
        .any(|o| o.blocks.keys().copied().ne(levels.iter().copied()))
    {
        return Err(BiError::SpaceMismatch);
    }
    match kind {
        OpKind::Commutator | OpKind::Anticommutator if operands.len() != 2 => {
            return Err(BiError::Shape(format!(
                "bracket takes two operands, got {}",
                operands.len()
            )))
        }
        OpKind::LinearCombination if coefficients.len() != operands.len() => {
            return Err(BiError::Shape(format!(
                "{} coefficients for {} operands",
                coefficients.len(),
                operands.len()
            )))
        }
        _ => {}
    }
    let mut blocks = BTreeMap::new();
    for &level in &levels {
        let get = |k: usize| operands[k].blocks[&level].as_ref();
        let block = match kind {
            OpKind::Commutator => bracket(BracketKind::Commutator, get(0), get(1))?,
            OpKind::Anticommutator => bracket(BracketKind::Anticommutator, get(0), get(1))?,
            OpKind::Product => {
                let mut acc = get(0).clone();
                for k in 1..operands.len() {
                    acc = acc.mul(get(k))?;
                }
                acc
            }
            OpKind::LinearCombination => {
                let (r, c) = get(0).shape();
                let mut acc = SparseRatMatrix::zeros(r, c);
                for (k, coeff) in coefficients.iter().enumerate() {
                    if !coeff.is_zero() {
                        acc = acc.add(&get(k).scale(coeff))?;
                    }
                }
                acc
            }
        };
        blocks.insert(level, Arc::new(block));
    }
    Ok(LeveledOperator {
        tag: OperatorTag::Derived(format!("{kind:?}")),
        blocks,
        fingerprint: first.fingerprint,
    })
}

fn site_sets(space: &TensorSpace) -> Vec<GeneratorSet> {
    space.specs().iter().map(build_site).collect()
}

fn kron_chain(factors: &[&SparseRatMatrix]) -> SparseRatMatrix {
    factors[1..]
        .iter()
        .fold(factors[0].clone(), |acc, f| kron(&acc, f))
}

fn product_levels(space: &TensorSpace) -> Vec<usize> {
    let mut levels = vec![0usize];
    for s in space.specs() {
        levels = levels
            .iter()
            .flat_map(|&l| (0..=s.truncation).map(move |k| l + k))
            .collect();
    }
    levels
}

/// `J±^A = Σ_{a∈A} J±^(a) ∏_{j=a+1}^{max A} P^(j)`, `J0^A = Σ J0^(a)`,
/// `P^A = ∏ P^(a)` on the full truncated product space.
///
/// The parity string covers every site between `a` and `max A`, including
/// sites outside `A`.
pub fn subset_generators(space: &TensorSpace, a: SubsetLabel) -> Result<GeneratorSet> {
    if a.is_empty() {
        return Err(BiError::EmptySubset(a));
    }
    space.check_subset(a)?;
    let dim = space.product_dimension();
    if dim > MAX_PRODUCT_DIM {
        return Err(BiError::Config(format!(
            "product space dimension {dim} exceeds {MAX_PRODUCT_DIM}"
        )));
    }
    let sites = site_sets(space);
    let ids: Vec<SparseRatMatrix> = sites
        .iter()
        .map(|g| SparseRatMatrix::identity(g.dim()))
        .collect();
    let n = space.n();
    let top = a.max_site().unwrap();

    let ladder = |pick: fn(&GeneratorSet) -> &SparseRatMatrix| -> Result<SparseRatMatrix> {
        let mut acc = SparseRatMatrix::zeros(dim, dim);
        for i in a.sites() {
            let factors: Vec<&SparseRatMatrix> = (1..=n)
                .map(|j| {
                    if j == i {
                        pick(&sites[j - 1])
                    } else if j > i && j <= top {
                        &sites[j - 1].parity
                    } else {
                        &ids[j - 1]
                    }
                })
                .collect();
            acc = acc.add(&kron_chain(&factors))?;
        }
        Ok(acc)
    };
    let jplus = ladder(|g| &g.jplus)?;
    let jminus = ladder(|g| &g.jminus)?;

    let mut j0 = SparseRatMatrix::zeros(dim, dim);
    for i in a.sites() {
        let factors: Vec<&SparseRatMatrix> = (1..=n)
            .map(|j| if j == i { &sites[j - 1].j0 } else { &ids[j - 1] })
            .collect();
        j0 = j0.add(&kron_chain(&factors))?;
    }
    let parity_factors: Vec<&SparseRatMatrix> = (1..=n)
        .map(|j| {
            if a.contains(j) {
                &sites[j - 1].parity
            } else {
                &ids[j - 1]
            }
        })
        .collect();
    let parity = kron_chain(&parity_factors);

    Ok(GeneratorSet {
        jplus,
        jminus,
        j0,
        parity,
        levels: product_levels(space),
        safe_below: space.max_level(),
    })
}

/// `Δ` applied to a pair of realizations:
/// `Δ(J±) = J± ⊗ P + 1 ⊗ J±`, `Δ(J0) = J0 ⊗ 1 + 1 ⊗ J0`, `Δ(P) = P ⊗ P`.
pub fn coproduct(left: &GeneratorSet, right: &GeneratorSet) -> Result<GeneratorSet> {
    let il = SparseRatMatrix::identity(left.dim());
    let ir = SparseRatMatrix::identity(right.dim());
    let ladder = |l: &SparseRatMatrix, r: &SparseRatMatrix| kron(l, &right.parity).add(&kron(&il, r));
    Ok(GeneratorSet {
        jplus: ladder(&left.jplus, &right.jplus)?,
        jminus: ladder(&left.jminus, &right.jminus)?,
        j0: kron(&left.j0, &ir).add(&kron(&il, &right.j0))?,
        parity: kron(&left.parity, &right.parity),
        levels: left
            .levels
            .iter()
            .flat_map(|&l| right.levels.iter().map(move |&r| l + r))
            .collect(),
        safe_below: left.safe_below.min(right.safe_below),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Association {
    /// `Δ^(k) = (1^{⊗(k-2)} ⊗ Δ) ∘ Δ^(k-1)`: split the last factor each time.
    SplitLast,
    /// `(Δ ⊗ 1^{⊗(k-2)}) ∘ Δ^(k-1)`: split the first factor each time.
    SplitFirst,
}

/// Iterated coproduct over the given site realizations.
pub fn iterated_coproduct(sites: &[GeneratorSet], order: Association) -> Result<GeneratorSet> {
    let (last, rest) = sites
        .split_last()
        .ok_or_else(|| BiError::Config("no sites".into()))?;
    match order {
        // 1 ⊗ (1 ⊗ (… ⊗ Δ)): right fold
        Association::SplitLast => rest
            .iter()
            .rev()
            .try_fold(last.clone(), |acc, s| coproduct(s, &acc)),
        // ((Δ ⊗ 1) ⊗ 1) …: left fold
        Association::SplitFirst => {
            let (first, tail) = sites.split_first().unwrap();
            tail.iter().try_fold(first.clone(), |acc, s| coproduct(&acc, s))
        }
    }
}

/// Site realizations of a space, for [`iterated_coproduct`].
pub fn site_generators(space: &TensorSpace) -> Vec<GeneratorSet> {
    site_sets(space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::osp::{casimir, verify_osp_relations};

    fn space(mus: &[(i64, i64)], max_level: usize) -> TensorSpace {
        let mus: Vec<Rational> = mus.iter().map(|&(p, q)| rat(p, q)).collect();
        TensorSpace::uniform(&mus, max_level).unwrap()
    }

    fn label(s: &[usize]) -> SubsetLabel {
        SubsetLabel::from_sites(s).unwrap()
    }

    #[test]
    fn level_dimensions() {
        let s = space(&[(1, 2), (1, 3), (1, 4)], 2);
        assert_eq!(s.level_dimension(2).unwrap(), 6);
        assert!(matches!(
            s.level_dimension(3),
            Err(BiError::LevelOutOfRange { .. })
        ));
        let s1 = space(&[(1, 2)], 5);
        for e in 0..=5 {
            assert_eq!(s1.level_dimension(e).unwrap(), 1);
        }
        let s4 = space(&[(1, 2), (1, 3), (1, 4), (1, 5)], 6);
        // brute-force count of compositions of 6 into 4 parts
        let mut count = 0;
        for a in 0..=6 {
            for b in 0..=6 {
                for c in 0..=6 {
                    if a + b + c <= 6 {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(count, 84);
        assert_eq!(s4.level_dimension(6).unwrap(), count);
    }

    #[test]
    fn uneven_truncations_bind() {
        let specs = vec![ModuleSpec::new(rat(1, 2), 2), ModuleSpec::new(rat(1, 2), 5)];
        let s = TensorSpace::new(specs.clone(), 2).unwrap();
        assert_eq!(s.level_dimension(2).unwrap(), 3);
        assert!(TensorSpace::new(specs, 3).is_err());
    }

    #[test]
    fn basis_is_lexicographic() {
        let s = space(&[(1, 2), (1, 2)], 1);
        assert_eq!(s.level_states(1).unwrap(), &[vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn two_site_level_one_block() {
        let s = space(&[(1, 2), (1, 2)], 1);
        let b = s.casimir_block(label(&[1, 2]), 1).unwrap();
        let expected = SparseRatMatrix::from_triplets(
            2,
            2,
            vec![
                (0, 0, rat(-1, 2)),
                (0, 1, int(2)),
                (1, 0, int(2)),
                (1, 1, rat(-1, 2)),
            ],
        );
        assert_eq!(*b, expected);
    }

    #[test]
    fn scalar_casimirs() {
        let s = space(&[(1, 2), (-1, 3), (2, 7)], 4);
        let empty = subset_casimir(&s, SubsetLabel::EMPTY).unwrap();
        for e in 0..=4 {
            let d = s.level_dimension(e).unwrap();
            assert_eq!(*empty.block(e).unwrap(), SparseRatMatrix::scalar(d, rat(-1, 2)));
            for i in 1..=3 {
                let g = s.casimir_block(SubsetLabel::single(i), e).unwrap();
                assert_eq!(*g, SparseRatMatrix::scalar(d, s.mu(i).clone()));
            }
        }
    }

    #[test]
    fn direct_blocks_match_kronecker_construction() {
        let s = space(&[(1, 2), (1, 3), (1, 4)], 3);
        for a in SubsetLabel::all_nonempty(3) {
            let gens = subset_generators(&s, a).unwrap();
            let full = casimir(&gens).unwrap();
            // degree preservation on the whole product space
            for (i, j, _) in full.iter() {
                assert_eq!(gens.levels[i], gens.levels[j], "Γ_{a} mixes levels");
            }
            for e in 0..=3 {
                let idx: Vec<usize> = s
                    .level_states(e)
                    .unwrap()
                    .iter()
                    .map(|st| s.product_index(st))
                    .collect();
                let restricted = full.select(&idx, &idx);
                assert_eq!(restricted, *s.casimir_block(a, e).unwrap(), "A={a} E={e}");
            }
        }
    }

    #[test]
    fn non_contiguous_parity_string() {
        let s = space(&[(1, 2), (1, 3), (1, 4)], 2);
        let gens = subset_generators(&s, label(&[1, 3])).unwrap();
        let sites = site_generators(&s);
        let i = |k: usize| SparseRatMatrix::identity(sites[k].dim());
        let expected = kron_chain(&[&sites[0].jplus, &sites[1].parity, &sites[2].parity])
            .add(&kron_chain(&[&i(0), &i(1), &sites[2].jplus]))
            .unwrap();
        assert_eq!(gens.jplus, expected);
        assert!(verify_osp_relations(&gens).unwrap().passes());
    }

    #[test]
    fn two_site_realization_is_the_coproduct() {
        let s = space(&[(1, 2), (1, 5)], 3);
        let gens = subset_generators(&s, label(&[1, 2])).unwrap();
        let sites = site_generators(&s);
        assert_eq!(gens, coproduct(&sites[0], &sites[1]).unwrap());
    }

    #[test]
    fn coassociativity() {
        let s = space(&[(1, 2), (1, 3), (1, 4)], 3);
        let sites = site_generators(&s);
        let last = iterated_coproduct(&sites, Association::SplitLast).unwrap();
        let first = iterated_coproduct(&sites, Association::SplitFirst).unwrap();
        assert_eq!(last, first);
        assert_eq!(last, subset_generators(&s, SubsetLabel::full(3)).unwrap());
    }

    #[test]
    fn op_algebra_cases() {
        let s = space(&[(1, 2), (1, 3), (1, 4)], 3);
        let ga = subset_casimir(&s, label(&[1, 2])).unwrap();
        let anti = op_algebra(OpKind::Anticommutator, &[&ga, &ga], &[]).unwrap();
        let sq = op_algebra(OpKind::Product, &[&ga, &ga], &[]).unwrap();
        let twice = op_algebra(OpKind::LinearCombination, &[&sq], &[int(2)]).unwrap();
        for e in 0..=3 {
            assert_eq!(anti.block(e), twice.block(e));
        }
        let empty = subset_casimir(&s, SubsetLabel::EMPTY).unwrap();
        assert!(op_algebra(OpKind::Commutator, &[&empty, &ga], &[]).unwrap().is_zero());
        let g1 = subset_casimir(&s, label(&[1])).unwrap();
        let g3 = subset_casimir(&s, label(&[3])).unwrap();
        let p = op_algebra(OpKind::Product, &[&g1, &g3], &[]).unwrap();
        for e in 0..=3 {
            let d = s.level_dimension(e).unwrap();
            assert_eq!(*p.block(e).unwrap(), SparseRatMatrix::scalar(d, rat(1, 8)));
        }
        let other = space(&[(1, 2), (1, 3), (1, 5)], 3);
        let gx = subset_casimir(&other, label(&[1, 2])).unwrap();
        assert!(matches!(
            op_algebra(OpKind::Product, &[&ga, &gx], &[]),
            Err(BiError::SpaceMismatch)
        ));
    }

    #[test]
    fn empty_subset_generators_rejected() {
        let s = space(&[(1, 2), (1, 3)], 2);
        assert!(matches!(
            subset_generators(&s, SubsetLabel::EMPTY),
            Err(BiError::EmptySubset(_))
        ));
        assert!(s.casimir_block(label(&[3]), 1).is_err());
    }

    #[test]
    fn config_json() {
        let text = r#"{"n": 2, "sites": [{"mu": "1/2", "truncation": 4}, {"mu": "-1/3", "truncation": 5}], "max_level": 3}"#;
        let cfg: SpaceConfig = serde_json::from_str(text).unwrap();
        let s = TensorSpace::from_config(&cfg).unwrap();
        assert_eq!(s.mu(2), &rat(-1, 3));
        assert_eq!(s.config(), cfg);
        let bad: SpaceConfig = serde_json::from_str(
            r#"{"n": 3, "sites": [{"mu": "1/2", "truncation": 4}], "max_level": 3}"#,
        )
        .unwrap();
        assert!(TensorSpace::from_config(&bad).is_err());
    }
}
