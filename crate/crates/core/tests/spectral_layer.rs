use bi_core::connection::{
    act_in_basis, adjacent_path, adjacent_path_from_back, compose_path, direct_overlap,
    inversion_count, recurrence_along_path, BasisCache,
};
use bi_core::linalg::{rat, to_f64, Rational};
use bi_core::spectral::{
    apply_sign_convention, joint_eigenbasis, max_abs, normalized_block, operator_in_basis,
    ChainAlgebra, Tolerances,
};
use bi_core::tensor::{op_algebra, subset_casimir, OpKind};
use bi_core::{SubsetLabel, TensorSpace};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn mus4() -> Vec<Rational> {
    vec![rat(1, 2), rat(1, 3), rat(1, 4), rat(1, 5)]
}

fn perm(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((1..=n).collect::<Vec<_>>()).prop_shuffle()
}

fn commutes(space: &TensorSpace, a: SubsetLabel, b: SubsetLabel) -> bool {
    let ga = subset_casimir(space, a).unwrap();
    let gb = subset_casimir(space, b).unwrap();
    op_algebra(OpKind::Commutator, &[&ga, &gb], &[]).unwrap().is_zero()
}

fn maximality(n: usize, max_level: usize) {
    let mus: Vec<Rational> = (0..n).map(|i| rat(1, i as i64 + 2)).collect();
    let space = TensorSpace::uniform(&mus, max_level).unwrap();
    let full = SubsetLabel::full(n);
    let mut perms = vec![(1..=n).collect::<Vec<_>>(), (1..=n).rev().collect()];
    perms.push((1..=n).map(|i| if i % 2 == 1 { (i + 1).min(n) } else { i - 1 }).collect());
    for p in perms {
        let chain = ChainAlgebra::new(&p).unwrap();
        for &a in chain.generators() {
            for &b in chain.generators() {
                assert!(commutes(&space, a, b), "{p:?}: {a} {b}");
            }
        }
        for b in SubsetLabel::all_nonempty(n) {
            if b.len() == 1 || b == full || chain.generators().contains(&b) {
                continue;
            }
            let witnessed = chain.generators().iter().any(|&a| !commutes(&space, a, b));
            assert!(witnessed, "{p:?}: Γ_{b} commutes with the whole chain");
        }
    }
}

#[test]
fn chains_are_maximal_at_four_sites() {
    maximality(4, 3);
}

#[test]
fn chains_are_maximal_at_five_sites() {
    maximality(5, 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn eigenbasis_residual_and_reconstruction(p in perm(4), level in 1usize..=4) {
        let tol = Tolerances::default();
        let space = TensorSpace::uniform(&mus4(), level).unwrap();
        let basis = joint_eigenbasis(&space, &ChainAlgebra::new(&p).unwrap(), level, &tol).unwrap();
        let v = &basis.vectors;
        let gram = v.transpose() * v;
        prop_assert!(max_abs(&(gram - DMatrix::identity(v.ncols(), v.ncols()))) < 1e-12);
        for (slot, a) in basis.label_subsets().into_iter().enumerate() {
            let m = normalized_block(&space, a, level).unwrap();
            let lambda = DVector::from_iterator(basis.dim(), basis.labels.iter().map(|l| l[slot]));
            for k in 0..basis.dim() {
                let col = v.column(k);
                let r = (&m * col - col * lambda[k]).norm();
                prop_assert!(r < 1e-10, "{a} vector {k}: {r:e}");
            }
            let rebuilt = v * DMatrix::from_diagonal(&lambda) * v.transpose();
            prop_assert!(max_abs(&(rebuilt - m)) < 1e-10);
        }
    }

    #[test]
    fn sign_convention_is_idempotent(xs in proptest::collection::vec(-1.0f64..1.0, 1..8)) {
        let mut v = DVector::from_vec(xs);
        apply_sign_convention(&mut v);
        let once = v.clone();
        apply_sign_convention(&mut v);
        prop_assert_eq!(once, v);
    }

    #[test]
    fn composed_paths_match_direct_overlap(from in perm(4), to in perm(4), level in 2usize..=3) {
        let tol = Tolerances::default();
        let space = TensorSpace::uniform(&mus4(), level).unwrap();
        let front = adjacent_path(&from, &to).unwrap();
        let back = adjacent_path_from_back(&from, &to).unwrap();
        prop_assert_eq!(front.len(), inversion_count(&from, &to));
        prop_assert_eq!(back.len(), front.len());

        let mut cache = BasisCache::new(&space, level, &tol);
        let src = cache.get(&ChainAlgebra::new(&from).unwrap()).unwrap().clone();
        let tgt = cache.get(&ChainAlgebra::new(&to).unwrap()).unwrap().clone();
        let direct = direct_overlap(&src, &tgt, &tol).unwrap();
        prop_assert!(direct.orthogonality_residual < 1e-9);
        for path in [&front, &back] {
            let composed = compose_path(&space, path, level, &tol).unwrap();
            prop_assert!(composed.orthogonality_residual < 1e-9);
            prop_assert!(max_abs(&(&composed.assembled - &direct.assembled)) < 1e-8);
            for (step, report) in recurrence_along_path(&space, path, level, &tol).unwrap() {
                prop_assert!(report.max_residual < 1e-8, "step at {}: {:e}", step.position, report.max_residual);
            }
        }
    }

    #[test]
    fn transport_into_random_chain(p in perm(3), level in 2usize..=4) {
        let tol = Tolerances::default();
        let n = 3;
        let space = TensorSpace::uniform(&mus4()[..n], level).unwrap();
        let mut cache = BasisCache::new(&space, level, &tol);
        let basis = cache.get(&ChainAlgebra::new(&p).unwrap()).unwrap().clone();
        for a in SubsetLabel::all_nonempty(n) {
            let direct = operator_in_basis(&space, a, &basis).unwrap();
            if a.len() == 1 {
                let mu = to_f64(space.mu(a.to_vec()[0]));
                prop_assert!(max_abs(&(direct - DMatrix::identity(basis.dim(), basis.dim()) * mu)) < 1e-9);
                continue;
            }
            let mut target: Vec<usize> = a.to_vec();
            target.extend((1..=n).filter(|&s| !a.contains(s)));
            let cc = compose_path(&space, &adjacent_path(&p, &target).unwrap(), level, &tol).unwrap();
            let labels = cache.get(&ChainAlgebra::new(&target).unwrap()).unwrap().labels_of(a).unwrap();
            let moved = act_in_basis(&cc, &labels);
            prop_assert!(max_abs(&(moved - direct)) < 1e-9, "{a}");
        }
    }
}

