//! Truncated lowest-weight modules of osp(1,2) in the monomial basis.
//!
//! Basis vectors `e_0 .. e_N` with
//!
//! ```text
//! J+ e_n = e_{n+1}          (J+ e_N = 0)
//! J- e_n = c_n e_{n-1}      c_n = n + mu (1 - (-1)^n)
//! J0 e_n = (n + mu + 1/2) e_n
//! P  e_n = (-1)^n e_n
//! ```
//!
//! All entries are rational. The Casimir acts as `mu` on every retained
//! vector; the anticommutator `{J+, J-} = 2 J0` only breaks at level `N`.

use std::fmt;

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{bracket, int, rat, BracketKind, Rational, SparseRatMatrix};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleSpec {
    #[serde(with = "crate::linalg::serde_rational")]
    pub mu: Rational,
    pub truncation: usize,
}

impl ModuleSpec {
    pub fn new(mu: Rational, truncation: usize) -> Self {
        Self { mu, truncation }
    }
}

/// Matrices of `J+`, `J-`, `J0`, `P` for one realization, together with the
/// level of each basis vector. Relation checks are only meaningful on levels
/// below `safe_below`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSet {
    pub jplus: SparseRatMatrix,
    pub jminus: SparseRatMatrix,
    pub j0: SparseRatMatrix,
    pub parity: SparseRatMatrix,
    pub levels: Vec<usize>,
    pub safe_below: usize,
}

impl GeneratorSet {
    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    pub fn is_safe_level(&self, level: usize) -> bool {
        level < self.safe_below
    }
}

/// Solution of `c_n + c_{n+1} = 2(n + mu + 1/2)` with `c_0 = 0`.
pub fn weight_coeff(n: usize, mu: &Rational) -> Rational {
    if n.is_multiple_of(2) {
        int(n as i64)
    } else {
        int(n as i64) + mu * int(2)
    }
}

pub fn build_site(spec: &ModuleSpec) -> GeneratorSet {
    let dim = spec.truncation + 1;
    let half = rat(1, 2);
    let mut jplus = SparseRatMatrix::zeros(dim, dim);
    let mut jminus = SparseRatMatrix::zeros(dim, dim);
    for n in 0..spec.truncation {
        jplus.set(n + 1, n, Rational::one());
        jminus.set(n, n + 1, weight_coeff(n + 1, &spec.mu));
    }
    let j0 = SparseRatMatrix::from_diagonal(
        (0..dim)
            .map(|n| int(n as i64) + &spec.mu + &half)
            .collect(),
    );
    let parity = SparseRatMatrix::from_diagonal(
        (0..dim)
            .map(|n| if n.is_multiple_of(2) { int(1) } else { int(-1) })
            .collect(),
    );
    GeneratorSet {
        jplus,
        jminus,
        j0,
        parity,
        levels: (0..dim).collect(),
        safe_below: spec.truncation,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OspRelation {
    /// `[J0, J+] = J+` and `[J0, J-] = -J-`
    J0Ladder,
    /// `{J+, J-} = 2 J0`
    LadderAnticommutator,
    /// `[J0, P] = 0`
    J0Parity,
    /// `{J+, P} = 0` and `{J-, P} = 0`
    LadderParity,
    /// `P^2 = 1`
    ParitySquare,
}

impl fmt::Display for OspRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OspRelation::J0Ladder => "[J0, J±] = ±J±",
            OspRelation::LadderAnticommutator => "{J+, J-} = 2J0",
            OspRelation::J0Parity => "[J0, P] = 0",
            OspRelation::LadderParity => "{J±, P} = 0",
            OspRelation::ParitySquare => "P² = 1",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationResidual {
    pub relation: OspRelation,
    /// Highest level carrying a nonzero residual column, if any.
    pub max_violating_level: Option<usize>,
    /// Lowest safe level carrying a nonzero residual column, if any.
    pub first_safe_violation: Option<usize>,
}

impl RelationResidual {
    pub fn passes(&self) -> bool {
        self.first_safe_violation.is_none()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OspRelationReport {
    pub residuals: Vec<RelationResidual>,
    pub safe_below: usize,
}

impl OspRelationReport {
    pub fn passes(&self) -> bool {
        self.residuals.iter().all(RelationResidual::passes)
    }

    pub fn violated(&self) -> Vec<OspRelation> {
        self.residuals
            .iter()
            .filter(|r| !r.passes())
            .map(|r| r.relation)
            .collect()
    }
}

fn residual_levels(gens: &GeneratorSet, residuals: &[SparseRatMatrix]) -> (Option<usize>, Option<usize>) {
    let mut max_level = None;
    let mut first_safe = None;
    for m in residuals {
        for (_, col, _) in m.iter() {
            let level = gens.levels[col];
            max_level = max_level.max(Some(level));
            if gens.is_safe_level(level) {
                first_safe = Some(first_safe.map_or(level, |l: usize| l.min(level)));
            }
        }
    }
    (max_level, first_safe)
}

/// Exact residuals of the defining relations, localized by the level of the
/// offending column.
pub fn verify_osp_relations(gens: &GeneratorSet) -> Result<OspRelationReport> {
    use BracketKind::*;
    let id = SparseRatMatrix::identity(gens.dim());
    let two = int(2);

    let j0_ladder = vec![
        bracket(Commutator, &gens.j0, &gens.jplus)?.sub(&gens.jplus)?,
        bracket(Commutator, &gens.j0, &gens.jminus)?.add(&gens.jminus)?,
    ];
    let ladder_anti = vec![
        bracket(Anticommutator, &gens.jplus, &gens.jminus)?.sub(&gens.j0.scale(&two))?,
    ];
    let j0_parity = vec![bracket(Commutator, &gens.j0, &gens.parity)?];
    let ladder_parity = vec![
        bracket(Anticommutator, &gens.jplus, &gens.parity)?,
        bracket(Anticommutator, &gens.jminus, &gens.parity)?,
    ];
    let parity_square = vec![gens.parity.mul(&gens.parity)?.sub(&id)?];

    let residuals = [
        (OspRelation::J0Ladder, j0_ladder),
        (OspRelation::LadderAnticommutator, ladder_anti),
        (OspRelation::J0Parity, j0_parity),
        (OspRelation::LadderParity, ladder_parity),
        (OspRelation::ParitySquare, parity_square),
    ]
    .into_iter()
    .map(|(relation, ms)| {
        let (max_violating_level, first_safe_violation) = residual_levels(gens, &ms);
        RelationResidual {
            relation,
            max_violating_level,
            first_safe_violation,
        }
    })
    .collect();

    Ok(OspRelationReport {
        residuals,
        safe_below: gens.safe_below,
    })
}

/// `Γ = J0 P - J+ J- P - P/2`.
pub fn casimir(gens: &GeneratorSet) -> Result<SparseRatMatrix> {
    let j0p = gens.j0.mul(&gens.parity)?;
    let ladder = gens.jplus.mul(&gens.jminus)?.mul(&gens.parity)?;
    j0p.sub(&ladder)?.sub(&gens.parity.scale(&rat(1, 2)))
}

/// Single-site Casimir; equals `mu * I` on a module from [`build_site`].
pub fn casimir_single(gens: &GeneratorSet) -> Result<SparseRatMatrix> {
    casimir(gens)
}

/// Symbolic oracle: `Γ e_n = (-1)^n (n + mu - c_n) e_n`.
#[cfg(test)]
fn casimir_diagonal_oracle(n: usize, mu: &Rational) -> Rational {
    let v = int(n as i64) + mu - weight_coeff(n, mu);
    if n.is_multiple_of(2) {
        v
    } else {
        -v
    }
}
