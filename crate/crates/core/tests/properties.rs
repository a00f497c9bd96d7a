use proptest::prelude::*;

use qecverify::channels::{
    ampliate_channel, apply, build_eta1, build_eta2, compose, gamma_map, haar_isometry,
    random_ampliate_channel, random_channel, validate_cptp,
};
use qecverify::conditions::{
    check_ampliate_noiseless, check_correctable, check_normal_noiseless, check_quadruple,
    lambda_normalization,
};
use qecverify::hilbert::{a_block, block_projectors, projector_pkl};
use qecverify::linalg::{c, frobenius, frobenius_diff, hermitian_residual, identity, trace, zeros};
use qecverify::recovery::{build_gram, synthesize_recovery, transfer_operators};
use qecverify::states::{
    factor_product, ginibre, partial_trace_a, partial_trace_b, restrict_to_c, sample_density,
    seeded_rng, tensor,
};
use qecverify::{CMatrix, KrausChannel, SpaceDecomposition};

fn decomposition() -> impl Strategy<Value = SpaceDecomposition> {
    (1usize..=3, 1usize..=3, 0usize..=2)
        .prop_flat_map(|(a, b, p)| (Just(a), Just(b), 1..=b, Just(p)))
        .prop_map(|(a, b, b1, p)| SpaceDecomposition::new(a, b, b1, p).unwrap())
}

fn small_decomposition() -> impl Strategy<Value = SpaceDecomposition> {
    decomposition().prop_filter("total_dim <= 12", |d| d.total_dim() <= 12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn matrix_unit_algebra(d in decomposition()) {
        let r = d.dim_b();
        for k in 0..r {
            for l in 0..r {
                let pkl = projector_pkl(&d, k, l).unwrap();
                prop_assert_eq!(pkl.adjoint(), projector_pkl(&d, l, k).unwrap());
                for i in 0..r {
                    for j in 0..r {
                        let prod = &pkl * projector_pkl(&d, i, j).unwrap();
                        let expected = if l == i {
                            projector_pkl(&d, k, j).unwrap()
                        } else {
                            zeros(d.total_dim(), d.total_dim())
                        };
                        prop_assert_eq!(prod, expected);
                    }
                }
            }
        }
        let bp = block_projectors(&d);
        prop_assert_eq!(&bp.p_b * &bp.p_b1, bp.p_b1.clone());
    }

    #[test]
    fn a_block_reconstruction(d in decomposition(), seed in any::<u64>()) {
        let n = d.total_dim();
        let e = ginibre(&mut seeded_rng(seed), n, n);
        let r = d.dim_b();
        for k in 0..r {
            for l in 0..r {
                for i in 0..r {
                    for j in 0..r {
                        let lhs = projector_pkl(&d, k, l).unwrap() * &e * projector_pkl(&d, i, j).unwrap();
                        let g = a_block(&e, &d, l, i).unwrap();
                        let unit = qecverify::linalg::matrix_unit(r, k, j);
                        let rhs = d.embed_code_block(&g.kronecker(&unit)).unwrap();
                        prop_assert!(frobenius_diff(&lhs, &rhs) <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn product_states_factor(da in 1usize..=4, db in 1usize..=4, seed in any::<u64>()) {
        let d = SpaceDecomposition::new(da, db, 1, 0).unwrap();
        let mut rng = seeded_rng(seed);
        let rho = sample_density(&mut rng, da);
        let sigma = sample_density(&mut rng, db);
        let prod = tensor(&rho, &sigma);
        let check = factor_product(prod.matrix(), &d, 1e-10).unwrap();
        prop_assert!(check.holds);
        prop_assert!(check.residual <= 1e-10);
        prop_assert!(frobenius_diff(&partial_trace_a(prod.matrix(), &d).unwrap(), sigma.matrix()) <= 1e-12);
        prop_assert!(frobenius_diff(&partial_trace_b(prod.matrix(), &d).unwrap(), rho.matrix()) <= 1e-12);
    }

    #[test]
    fn partial_trace_linear_and_trace_preserving(da in 1usize..=3, db in 1usize..=3, seed in any::<u64>()) {
        let d = SpaceDecomposition::new(da, db, 1, 0).unwrap();
        let mut rng = seeded_rng(seed);
        let x = ginibre(&mut rng, da * db, da * db);
        let y = ginibre(&mut rng, da * db, da * db);
        let sum = &x + &y;
        for pt in [partial_trace_a, partial_trace_b] {
            let lhs = pt(&sum, &d).unwrap();
            let rhs = pt(&x, &d).unwrap() + pt(&y, &d).unwrap();
            prop_assert!(frobenius_diff(&lhs, &rhs) <= 1e-12);
            prop_assert!((trace(&pt(&x, &d).unwrap()) - trace(&x)).norm() <= 1e-12);
        }
    }

    #[test]
    fn restriction_bounds(d in decomposition(), seed in any::<u64>()) {
        let rho = sample_density(&mut seeded_rng(seed), d.total_dim());
        let r = restrict_to_c(rho.matrix(), &d).unwrap();
        prop_assert!(r.leak >= -1e-12 && r.leak <= 1.0 + 1e-12);
        prop_assert!(qecverify::linalg::min_eigenvalue(&r.block) >= -1e-12);
    }

    #[test]
    fn apply_preserves_trace_and_is_linear(dim in 1usize..=6, count in 1usize..=3, seed in any::<u64>(), x in 0.0f64..1.0) {
        let ch = random_channel(dim, count, seed).unwrap();
        let mut rng = seeded_rng(seed ^ 0x5eed);
        let rho = sample_density(&mut rng, dim);
        let sigma = sample_density(&mut rng, dim);
        let out = apply(&ch, rho.matrix()).unwrap();
        prop_assert!(hermitian_residual(&out) <= 1e-12);
        prop_assert!((trace(&out) - c(1.0, 0.0)).norm() <= 1e-12);
        let mix = rho.matrix() * c(x, 0.0) + sigma.matrix() * c(1.0 - x, 0.0);
        let lhs = apply(&ch, &mix).unwrap();
        let rhs = out * c(x, 0.0) + apply(&ch, sigma.matrix()).unwrap() * c(1.0 - x, 0.0);
        prop_assert!(frobenius_diff(&lhs, &rhs) <= 1e-12);
    }

    #[test]
    fn transformers_are_cptp(d in decomposition().prop_filter("<= 16", |d| d.total_dim() <= 16)) {
        prop_assert!(validate_cptp(build_eta1(&d).operators(), 1e-12).unwrap().ok);
        prop_assert!(validate_cptp(build_eta2(&d).operators(), 1e-12).unwrap().ok);
    }

    #[test]
    fn ampliate_family_passes_all_checks(d in small_decomposition(), env in 1usize..=3, seed in any::<u64>()) {
        prop_assume!(env * d.dim_b() >= d.dim_b1());
        let e = random_ampliate_channel(&d, env, seed).unwrap();
        prop_assert!(validate_cptp(e.operators(), 1e-10).unwrap().ok);
        prop_assert!(check_ampliate_noiseless(&e, &d, 1e-9).unwrap().holds);

        let corr = check_correctable(&e, &d, 1e-9).unwrap();
        prop_assert!(corr.holds);
        for (key, lambda) in &corr.lambda_table {
            let mirror = corr.lambda(&[key[1], key[0], key[3], key[2]]).unwrap();
            prop_assert!((lambda.conj() - mirror).norm() <= 1e-12);
        }
        for total in lambda_normalization(&corr, e.len(), d.dim_b1()) {
            prop_assert!((total - c(1.0, 0.0)).norm() <= 1e-10);
        }
    }

    #[test]
    fn gamma_sandwich_is_proportional(d in small_decomposition(), seed in any::<u64>()) {
        let e = random_ampliate_channel(&d, 2, seed).unwrap();
        let gamma = gamma_map(&d);
        let mut rng = seeded_rng(seed.wrapping_add(1));
        let mut factors = Vec::new();
        for _ in 0..5 {
            let rho = sample_density(&mut rng, d.total_dim());
            let g = apply(&gamma, rho.matrix()).unwrap();
            let sandwich = apply(&gamma, &apply(&e, &g).unwrap()).unwrap();
            let norm_sq = frobenius(&g).powi(2);
            prop_assume!(norm_sq > 1e-6);
            let factor = g.iter().zip(sandwich.iter()).map(|(x, y)| x.conj() * y).sum::<num_complex::Complex64>() / norm_sq;
            prop_assert!(frobenius_diff(&sandwich, &(&g * factor)) <= 1e-10);
            factors.push(factor);
        }
        for f in &factors {
            prop_assert!((f - factors[0]).norm() <= 1e-10);
        }
    }

    #[test]
    fn recovery_certified(d in small_decomposition(), env in 1usize..=3, seed in any::<u64>()) {
        prop_assume!(env * d.dim_b() >= d.dim_b1());
        let e = random_ampliate_channel(&d, env, seed).unwrap();
        let tol = 1e-9;
        let rec = synthesize_recovery(&e, &d, tol).unwrap();
        prop_assert!(validate_cptp(rec.channel.operators(), 10.0 * tol).unwrap().ok);
        let q = check_quadruple(&rec.channel, &e, &d, 10.0 * tol).unwrap();
        prop_assert!(q.holds, "residual {}", q.residual);
        let landing = qecverify::linalg::matrix_unit(d.dim_b(), 0, 0);
        prop_assert!(frobenius_diff(q.sigma.as_ref().unwrap(), &landing) <= 10.0 * tol);

        for (m, s) in rec.isometries.iter().enumerate() {
            for (n, t) in rec.isometries.iter().enumerate() {
                let expected = if m == n { identity(d.dim_a()) } else { zeros(d.dim_a(), d.dim_a()) };
                prop_assert!(frobenius_diff(&s.ad_mul(t), &expected) <= 10.0 * tol);
            }
        }
        let mass: f64 = rec.eigenvalues.iter().sum();
        prop_assert!((mass - d.dim_b1() as f64).abs() <= 1e-10);

        let rho = sample_density(&mut seeded_rng(seed ^ 7), d.dim_a());
        let mut lhs = zeros(d.total_dim(), d.total_dim());
        for t in transfer_operators(&e, &d).unwrap() {
            lhs += &t * rho.matrix() * t.adjoint();
        }
        let mut rhs = zeros(d.total_dim(), d.total_dim());
        for (s, dm) in rec.isometries.iter().zip(&rec.eigenvalues) {
            rhs += s * rho.matrix() * s.adjoint() * c(*dm, 0.0);
        }
        prop_assert!(frobenius_diff(&lhs, &rhs) <= 10.0 * tol);

        let g = build_gram(&e, &d, tol).unwrap();
        prop_assert!(g.hermitian_residual() <= 1e-12);
        prop_assert!(g.min_eigenvalue() >= -1e-10);
        prop_assert!((g.trace() - d.dim_b1() as f64).abs() <= 1e-10);
    }

    #[test]
    fn normal_implies_ampliate(d in small_decomposition(), seed in any::<u64>()) {
        // Channels acting as I^A ⊗ U on B1 and arbitrarily elsewhere are normal noiseless.
        let (reduced, perm) = d.b1_reading();
        let e_reduced = random_ampliate_channel(&reduced, 1, seed).unwrap();
        let back = perm.matrix();
        let ops: Vec<CMatrix> = e_reduced.operators().iter().map(|k| back.adjoint() * k * &back).collect();
        let e = KrausChannel::new(ops, 1e-10).unwrap();
        let normal = check_normal_noiseless(&e, &d, 1e-9).unwrap();
        prop_assert!(normal.holds);
        prop_assert!(check_ampliate_noiseless(&e, &d, 1e-9).unwrap().holds);
    }

    #[test]
    fn quadruple_implies_correctable(d in small_decomposition(), seed in any::<u64>(), structured in any::<bool>()) {
        let e = if structured {
            random_ampliate_channel(&d, 2, seed).unwrap()
        } else {
            random_channel(d.total_dim(), 2, seed).unwrap()
        };
        let recovery = random_channel(d.total_dim(), 1, seed ^ 3).unwrap();
        for r in [KrausChannel::identity(d.total_dim()), recovery] {
            if check_quadruple(&r, &e, &d, 1e-9).unwrap().holds {
                prop_assert!(check_correctable(&e, &d, 1e-9).unwrap().holds);
            }
        }
    }

    #[test]
    fn transformer_round_trips(d in small_decomposition(), seed in any::<u64>()) {
        let tol = 1e-9;
        let e = random_ampliate_channel(&d, 2, seed).unwrap();
        let (reduced, perm) = d.b1_reading();

        // Recovery correct with B := B1, lifted by η₁ to the enlarged B.
        let r = synthesize_recovery(&e, &d, tol).unwrap().channel;
        prop_assert!(check_quadruple(&r.permuted(&perm), &e.permuted(&perm), &reduced, 10.0 * tol).unwrap().holds);
        let lifted = compose(&build_eta1(&d), &r).unwrap();
        prop_assert!(check_quadruple(&lifted, &e, &d, 10.0 * tol).unwrap().holds);

        // Identity recovery is correct with the enlarged B; η₂ folds it back onto B1.
        let id = KrausChannel::identity(d.total_dim());
        prop_assert!(check_quadruple(&id, &e, &d, tol).unwrap().holds);
        let folded = compose(&build_eta2(&d), &id).unwrap();
        prop_assert!(check_quadruple(&folded.permuted(&perm), &e.permuted(&perm), &reduced, tol).unwrap().holds);
    }
}

#[test]
fn single_block_ampliate_channel_reports_block_entries() {
    let d = SpaceDecomposition::new(2, 3, 2, 1).unwrap();
    let mut rng = seeded_rng(12);
    let m = haar_isometry(&mut rng, 3, 2);
    let e = ampliate_channel(&d, std::slice::from_ref(&m), &mut rng).unwrap();
    let report = check_ampliate_noiseless(&e, &d, 1e-9).unwrap();
    assert!(report.holds);
    for l in 0..3 {
        for i in 0..2 {
            assert!((report.lambda(&[0, l, i]).unwrap() - m[(l, i)]).norm() < 1e-12);
        }
    }
}

#[test]
fn example_channel_action_on_b1_is_in_the_ampliate_family() {
    let ex = qecverify::channels::example_channel(0.25).unwrap();
    // Blocks read off the example's Kraus operators on the B1 column: only E₂ acts, as |1⟩⟨0|.
    let blocks: Vec<CMatrix> = ex
        .channel
        .operators()
        .iter()
        .map(|op| CMatrix::from_fn(2, 1, |l, i| a_block(op, &ex.decomp, l, i).unwrap()[(0, 0)]))
        .collect();
    let rebuilt = ampliate_channel(&ex.decomp, &blocks, &mut seeded_rng(1)).unwrap();
    let d = ex.decomp;
    let mut rng = seeded_rng(2);
    for _ in 0..10 {
        let rho_a = sample_density(&mut rng, 2);
        let input = d.embed_product(rho_a.matrix(), &d.uniform_b1()).unwrap();
        let lhs = apply(&ex.channel, &input).unwrap();
        let rhs = apply(&rebuilt, &input).unwrap();
        assert!(frobenius_diff(&lhs, &rhs) < 1e-12);
    }
}

#[test]
fn ampliate_generator_passes_checker_across_seeds() {
    let d = SpaceDecomposition::new(2, 3, 2, 1).unwrap();
    for seed in 0..100 {
        let e = random_ampliate_channel(&d, 2, seed).unwrap();
        assert!(
            check_ampliate_noiseless(&e, &d, 1e-9).unwrap().holds,
            "seed {seed}"
        );
    }
}

#[test]
fn gamma_properties_on_products() {
    let d = SpaceDecomposition::new(2, 3, 2, 1).unwrap();
    let mut rng = seeded_rng(9);
    let rho_a = sample_density(&mut rng, 2);
    let rho_b = sample_density(&mut rng, 3);
    let out = apply(
        &gamma_map(&d),
        &d.embed_product(rho_a.matrix(), rho_b.matrix()).unwrap(),
    )
    .unwrap();
    let normalized = &out / trace(&out);
    let expected = d.embed_product(rho_a.matrix(), &d.uniform_b1()).unwrap();
    assert!(frobenius_diff(&normalized, &expected) < 1e-12);
    assert!(qecverify::linalg::min_eigenvalue(&out) > -1e-12);
}
