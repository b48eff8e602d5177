use num_complex::Complex64;
use proptest::prelude::*;
use toda_core::lie::{
    automorphism_defect, build_chevalley_basis, build_root_system, invariant_poly_eval, sigma0, CartanSign,
    CartanType, LieData, Representation,
};

const TYPES: &[(CartanType, usize)] = &[
    (CartanType::A, 1),
    (CartanType::A, 2),
    (CartanType::A, 3),
    (CartanType::A, 4),
    (CartanType::B, 2),
    (CartanType::B, 3),
    (CartanType::B, 4),
    (CartanType::C, 2),
    (CartanType::C, 3),
    (CartanType::C, 4),
    (CartanType::D, 4),
    (CartanType::G, 2),
];

fn c(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

#[test]
fn root_counts_and_coxeter_numbers() {
    // (type, rank, |Δ|, Coxeter number) from the classification tables.
    let table = [
        (CartanType::A, 1, 2, 2),
        (CartanType::A, 2, 6, 3),
        (CartanType::A, 3, 12, 4),
        (CartanType::A, 4, 20, 5),
        (CartanType::B, 2, 8, 4),
        (CartanType::B, 3, 18, 6),
        (CartanType::B, 4, 32, 8),
        (CartanType::C, 2, 8, 4),
        (CartanType::C, 3, 18, 6),
        (CartanType::C, 4, 32, 8),
        (CartanType::D, 4, 24, 6),
        (CartanType::G, 2, 12, 6),
    ];
    for (kind, rank, count, d) in table {
        let rs = build_root_system(kind, rank).unwrap();
        assert_eq!(rs.num_roots(), count, "{kind:?}{rank}");
        assert_eq!(rs.coxeter_number(), d, "{kind:?}{rank}");
        let max_height = rs.heights.iter().copied().max().unwrap();
        assert_eq!(max_height as usize, d - 1);
        assert_eq!(rs.heights.iter().filter(|&&h| h == max_height).count(), 1);
        for root in &rs.roots {
            let neg: Vec<i64> = root.iter().map(|x| -x).collect();
            assert!(rs.index_of(&neg).is_some());
            assert!(root.iter().all(|&x| x >= 0) || root.iter().all(|&x| x <= 0));
        }
    }
}

#[test]
fn unsupported_types_are_rejected() {
    assert!(build_root_system(CartanType::A, 5).is_err());
    assert!(build_root_system(CartanType::G, 3).is_err());
    assert!(build_root_system(CartanType::B, 1).is_err());
    assert!(build_root_system(CartanType::A, 0).is_err());
}

#[test]
fn cartan_matrices_match_known_tables() {
    let a2 = build_root_system(CartanType::A, 2).unwrap();
    assert_eq!(a2.cartan_matrix, vec![vec![2, -1], vec![-1, 2]]);
    // α₁ short, α₂ long.
    let c2 = build_root_system(CartanType::C, 2).unwrap();
    assert_eq!(c2.cartan_matrix, vec![vec![2, -1], vec![-2, 2]]);
    let g2 = build_root_system(CartanType::G, 2).unwrap();
    assert_eq!(g2.cartan_matrix, vec![vec![2, -1], vec![-3, 2]]);
}

#[test]
fn jacobi_identity_is_exact_for_all_supported_types() {
    for &(kind, rank) in TYPES {
        let rs = build_root_system(kind, rank).unwrap();
        let cb = build_chevalley_basis(&rs).unwrap();
        assert_eq!(cb.jacobi_defect(), 0, "{kind:?}{rank}");
        for &(a, b, n) in &cb.n_table {
            let sum: Vec<i64> = rs.roots[a].iter().zip(&rs.roots[b]).map(|(x, y)| x + y).collect();
            // |N| = p + 1 where p is the length of the string below b.
            let mut p = 0;
            let mut cur = rs.roots[b].clone();
            loop {
                cur = cur.iter().zip(&rs.roots[a]).map(|(x, y)| x - y).collect();
                if rs.index_of(&cur).is_some() {
                    p += 1;
                } else {
                    break;
                }
            }
            assert!(rs.index_of(&sum).is_some());
            assert_eq!(n.abs(), p + 1);
        }
    }
}

#[test]
fn chevalley_relations_in_x_basis() {
    for &(kind, rank) in TYPES {
        let lie = LieData::new(kind, rank).unwrap();
        let cb = &lie.basis;
        let rs = &cb.roots;
        for g in 0..rs.num_positive {
            // [x_γ, x_{−γ}] = −h_γ.
            let br = cb.bracket(&cb.unit(g), &cb.unit(rs.negative_of(g)));
            let coeffs = rs.coroot_coefficients(&rs.roots[g]);
            for i in 0..rank {
                assert_eq!(br[cb.cartan(i)].re, -(coeffs[i] as f64));
            }
        }
        // [x_δ, x_α] = 0 for simple α.
        for i in 0..rank {
            let br = cb.bracket(&cb.unit(cb.highest()), &cb.unit(cb.simple(i)));
            assert!(br.iter().all(|z| z.norm() == 0.0));
        }
        // Extended simple system: [x_α, x_{−β}] = −ε_{αβ} h_α.
        let mut ext: Vec<usize> = (0..rank).map(|i| cb.simple(i)).collect();
        ext.push(cb.neg_highest());
        for &a in &ext {
            for &b in &ext {
                let br = cb.bracket(&cb.unit(a), &cb.unit(rs.negative_of(b)));
                if a != b {
                    assert!(br.iter().all(|z| z.norm() == 0.0));
                }
            }
        }
    }
}

#[test]
fn a1_basis_has_three_dimensional_adjoint() {
    let lie = LieData::new(CartanType::A, 1).unwrap();
    let ads = lie.basis.adjoint_matrices();
    assert_eq!(ads.len(), 3);
    assert!(ads.iter().all(|m| m.nrows() == 3 && m.ncols() == 3));
    let h = lie.basis.cartan(0);
    let br = lie.basis.bracket(&lie.basis.unit(0), &lie.basis.unit(1));
    assert_eq!(br[h], c(-1.0));
}

#[test]
fn principal_triple_coefficients() {
    // Oracle: α_i(x) = 1 for every simple root, i.e. A r = (1,…,1).
    for &(kind, rank) in TYPES {
        let lie = LieData::new(kind, rank).unwrap();
        let a = &lie.basis.roots.cartan_matrix;
        for i in 0..rank {
            let s: f64 = (0..rank).map(|j| a[i][j] as f64 * lie.triple.r[j]).sum();
            assert!((s - 1.0).abs() < 1e-14, "{kind:?}{rank}");
            assert_eq!((2.0 * lie.triple.r[i]).fract(), 0.0);
        }
        assert!(lie.triple.sl2_defect(&lie.basis) <= 1e-12);
    }
    let r = |k, l| LieData::new(k, l).unwrap().triple.r;
    assert_eq!(r(CartanType::A, 1), vec![0.5]);
    assert_eq!(r(CartanType::A, 2), vec![1.0, 1.0]);
    // Coroot sum of the four positive roots: (1,0)+(0,1)+(1,2)+(1,1) = (3,4).
    assert_eq!(r(CartanType::C, 2), vec![1.5, 2.0]);
    // Six coroots: (1,0)+(0,1)+(1,3)+(2,3)+(1,1)+(1,2) = (6,10).
    assert_eq!(r(CartanType::G, 2), vec![3.0, 5.0]);
}

#[test]
fn grading_and_centralizer() {
    for &(kind, rank) in TYPES {
        let lie = LieData::new(kind, rank).unwrap();
        let cb = &lie.basis;
        for g in 0..cb.roots.num_roots() {
            let br = cb.bracket(&lie.triple.x, &cb.unit(g));
            let h = cb.roots.heights[g] as f64;
            for (k, z) in br.iter().enumerate() {
                let expect = if k == g { h } else { 0.0 };
                assert!((z.re - expect).abs() <= 1e-12 && z.im.abs() <= 1e-12);
            }
        }
        let ad_e = cb.ad(&lie.triple.e).map(|z| z.re);
        let sv = ad_e.svd(false, false).singular_values;
        let kernel = sv.iter().filter(|&&s| s < 1e-9).count();
        assert_eq!(kernel, rank, "{kind:?}{rank}");
        assert_eq!(lie.hw.vectors.len(), rank);
        for (v, &m) in lie.hw.vectors.iter().zip(&lie.hw.exponents) {
            let br = cb.bracket(&lie.triple.e, v);
            assert!(br.iter().all(|z| z.norm() < 1e-10));
            for (k, z) in v.iter().enumerate() {
                if z.norm() > 0.0 {
                    assert_eq!(cb.grade(k), m as i64 - 1);
                }
            }
        }
        assert_eq!(*lie.hw.exponents.last().unwrap(), lie.toda.d);
    }
}

#[test]
fn toda_coefficients_low_rank() {
    let a1 = LieData::new(CartanType::A, 1).unwrap().toda;
    assert_eq!(a1.a, vec![vec![2.0, 2.0]]);
    assert_eq!(a1.n, vec![1]);
    assert_eq!(a1.d, 2);
    let a2 = LieData::new(CartanType::A, 2).unwrap().toda;
    assert_eq!(a2.d, 3);
    assert_eq!(a2.n, vec![1, 1]);
    assert_eq!(a2.xi, vec![1, 0]);
    assert_eq!(a2.a, vec![vec![2.0, -1.0, 1.0], vec![-1.0, 2.0, 1.0]]);
    let lit = LieData::with_options(CartanType::A, 2, CartanSign::Unsigned, 1.0).unwrap().toda;
    assert_eq!(lit.a, vec![vec![2.0, 1.0, 1.0], vec![1.0, 2.0, 1.0]]);
}

#[test]
fn xi_is_trivial_except_for_a_series() {
    for &(kind, rank) in TYPES {
        let lie = LieData::new(kind, rank).unwrap();
        let expect: Vec<usize> = if kind == CartanType::A {
            (0..rank).rev().collect()
        } else {
            (0..rank).collect()
        };
        assert_eq!(lie.toda.xi, expect, "{kind:?}{rank}");
        let s0 = sigma0(&lie.basis, &lie.triple, &lie.hw).unwrap();
        assert!(automorphism_defect(&lie.basis, &s0) < 1e-9);
    }
}

#[test]
fn affine_numbers_do_not_depend_on_form_scale() {
    for &(kind, rank) in TYPES {
        let a = LieData::with_options(kind, rank, CartanSign::Standard, 1.0).unwrap();
        let b = LieData::with_options(kind, rank, CartanSign::Standard, 7.25).unwrap();
        assert_eq!(a.toda.a, b.toda.a);
        let ratio = b.killing[(0, a.basis.roots.negative_of(0))] / a.killing[(0, a.basis.roots.negative_of(0))];
        assert!((ratio - 7.25).abs() < 1e-12);
    }
}

#[test]
fn killing_form_basic_values() {
    for &(kind, rank) in TYPES {
        let lie = LieData::new(kind, rank).unwrap();
        let cb = &lie.basis;
        let nr = cb.roots.num_roots();
        for a in 0..nr {
            for b in 0..nr {
                let v = lie.killing_form(&cb.unit(a), &cb.unit(b));
                if b != cb.roots.negative_of(a) {
                    assert_eq!(v.norm(), 0.0);
                }
            }
        }
        let nd = lie.killing_form(&cb.unit(cb.highest()), &cb.unit(cb.neg_highest()));
        assert!(nd.norm() > 0.0);
        for i in 0..rank {
            let h = cb.unit(cb.cartan(i));
            assert!(lie.killing_form(&h, &h).re > 0.0);
        }
    }
}

#[test]
fn defining_representations_are_homomorphisms() {
    for &(kind, rank) in TYPES {
        let rs = build_root_system(kind, rank).unwrap();
        let cb = build_chevalley_basis(&rs).unwrap();
        match kind {
            CartanType::A | CartanType::C => {
                let rep = Representation::defining(&cb).unwrap();
                assert!(rep.homomorphism_defect(&cb) < 1e-12);
                let size = if kind == CartanType::A { rank + 1 } else { 2 * rank };
                assert_eq!(rep.size, size);
            }
            _ => assert!(Representation::defining(&cb).is_err()),
        }
        let adj = Representation::adjoint(&cb);
        assert!(adj.homomorphism_defect(&cb) < 1e-12);
    }
}

#[test]
fn invariant_polynomials_on_hitchin_section() {
    let q = Complex64::new(0.7, -0.3);
    for &(kind, rank) in &[(CartanType::A, 2), (CartanType::A, 3), (CartanType::C, 2)] {
        let lie = LieData::new(kind, rank).unwrap();
        let cb = &lie.basis;
        let mut x = lie.triple.e_tilde.clone();
        x[cb.highest()] += q;
        let p = invariant_poly_eval(cb, &x).unwrap();
        assert!(p[0].norm() < 1e-14, "p1 vanishes for d >= 3");
        let zero = vec![c(0.0); cb.dim()];
        assert!(invariant_poly_eval(cb, &zero).unwrap().iter().all(|z| z.norm() == 0.0));
        // The top generator is linear in q.
        let mut x2 = lie.triple.e_tilde.clone();
        x2[cb.highest()] += q * 2.0;
        let p2 = invariant_poly_eval(cb, &x2).unwrap();
        let top = p.len() - 1;
        assert!(p[top].norm() > 1e-6);
        assert!((p2[top] - p[top] * 2.0).norm() < 1e-12);
    }
    // tr((ẽ + q x_δ)^3) for sl3 is 3·(product of the cycle entries) = 3q.
    let lie = LieData::new(CartanType::A, 2).unwrap();
    let mut x = lie.triple.e_tilde.clone();
    x[lie.basis.highest()] += q;
    let p = invariant_poly_eval(&lie.basis, &x).unwrap();
    assert!((p[1].norm() - 3.0 * q.norm()).abs() < 1e-12);
    let g2 = LieData::new(CartanType::G, 2).unwrap();
    assert!(g2.invariant_poly_eval(&g2.triple.e).is_err());
}

fn arb_type() -> impl Strategy<Value = (CartanType, usize)> {
    prop::sample::select(TYPES.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn killing_form_is_invariant_and_symmetric(
        t in arb_type(),
        seed in prop::collection::vec(-1.0f64..1.0, 3 * 72),
    ) {
        let lie = LieData::new(t.0, t.1).unwrap();
        let dim = lie.dim();
        let take = |k: usize| -> Vec<Complex64> {
            (0..dim).map(|i| Complex64::new(seed[(k * dim + i) % seed.len()], seed[(k * dim + 2 * i + 1) % seed.len()])).collect()
        };
        let (x, y, z) = (take(0), take(1), take(2));
        let cb = &lie.basis;
        let lhs = lie.killing_form(&cb.bracket(&z, &x), &y) + lie.killing_form(&x, &cb.bracket(&z, &y));
        prop_assert!(lhs.norm() < 1e-9);
        prop_assert_eq!(lie.killing_form(&x, &y), lie.killing_form(&y, &x));
        let xy = cb.bracket(&x, &y);
        let yx = cb.bracket(&y, &x);
        for k in 0..dim {
            prop_assert!((xy[k] + yx[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn chevalley_involution_is_an_automorphism(t in arb_type(), i in 0usize..36, j in 0usize..36) {
        let lie = LieData::new(t.0, t.1).unwrap();
        let cb = &lie.basis;
        let (i, j) = (i % cb.dim(), j % cb.dim());
        let lhs = cb.apply_chevalley_involution(&cb.bracket(&cb.unit(i), &cb.unit(j)));
        let rhs = cb.bracket(
            &cb.apply_chevalley_involution(&cb.unit(i)),
            &cb.apply_chevalley_involution(&cb.unit(j)),
        );
        for k in 0..cb.dim() {
            prop_assert!((lhs[k] - rhs[k]).norm() < 1e-12);
        }
    }
}
