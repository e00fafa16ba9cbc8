//! Property tests for scalar, weight, braiding, level, groupoid and report invariants.

use std::sync::OnceLock;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fusionq::braiding::{hecke_relation_residual, r_matrix, yang_baxter_residual, BraidOperators};
use fusionq::groupoid::GroupoidElement;
use fusionq::linalg::{diff_abs, mm, LegTensor};
use fusionq::scalars::{q_int, q_power};
use fusionq::suite::{oracle_dims, run, RunConfig, Suite};
use fusionq::weights::{
    classical_power_multiplicities, classical_successors, conjugate, dim_classical, enumerate_alcove, fusion_step,
    thresholds, Weight,
};
use fusionq::wenzl::{random_word, LevelOptions, Levels};
use fusionq::QContext;

/// (N, ℓ) with N ∈ 2..=4 and ℓ ∈ N+1..=N+5.
fn config() -> impl Strategy<Value = QContext> {
    (2usize..=4, 1usize..=5).prop_map(|(n, d)| QContext::new(n, n + d).unwrap())
}

fn pick_weight(ctx: &QContext, i: usize) -> Weight {
    let ws = enumerate_alcove(ctx);
    ws[i % ws.len()].clone()
}

const LEVEL_CONFIGS: [(usize, usize, usize); 3] = [(2, 4, 5), (3, 4, 4), (2, 5, 6)];

fn levels(i: usize) -> &'static Levels {
    static CACHE: [OnceLock<Levels>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    CACHE[i].get_or_init(|| {
        let (n, ell, top) = LEVEL_CONFIGS[i];
        Levels::build(&QContext::new(n, ell).unwrap(), &LevelOptions::new(top)).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantum_integers_are_reflection_symmetric(ctx in config(), k in 0i64..=9) {
        let ell = ctx.ell as i64;
        let k = k.min(ell);
        prop_assert!((q_int(&ctx, k) - q_int(&ctx, ell - k)).norm() < 1e-9);
    }

    #[test]
    fn quantum_integers_are_positive_inside_the_level(ctx in config(), k in 1i64..=9) {
        let k = 1 + (k - 1) % (ctx.ell as i64 - 1);
        let v = q_int(&ctx, k);
        prop_assert!(v.re > 1e-9 && v.im.abs() < 1e-9);
    }

    #[test]
    fn q_power_is_a_homomorphism(ctx in config(), a in -200i64..200, b in -200i64..200) {
        let (x, y) = (ctx.exp(a), ctx.exp(b));
        let lhs = q_power(&ctx, x + y);
        prop_assert!((lhs - q_power(&ctx, x) * q_power(&ctx, y)).norm() < 1e-9);
        prop_assert!((lhs.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fusion_steps_are_multiplicity_free(ctx in config(), i in 0usize..64) {
        let w = pick_weight(&ctx, i);
        let s = fusion_step(&ctx, &w).unwrap();
        let mut all: Vec<Weight> = s.kept.iter().chain(&s.negligible).cloned().collect();
        let count = all.len();
        all.sort();
        all.dedup();
        prop_assert_eq!(all.len(), count);
        let z = w.to_zn();
        let dominant = (0..z.len())
            .filter(|&j| {
                let mut x = z.clone();
                x[j] += 1;
                x.windows(2).all(|p| p[0] >= p[1])
            })
            .count();
        prop_assert_eq!(count, dominant);
        prop_assert_eq!(all, classical_successors(&w));
    }

    #[test]
    fn conjugate_degrees_add_up(ctx in config(), i in 0usize..64) {
        let w = pick_weight(&ctx, i);
        prop_assert_eq!(w.deg() + conjugate(&w).deg(), ctx.n as i64 * w.first());
        prop_assert_eq!(dim_classical(&conjugate(&w)), dim_classical(&w));
    }

    #[test]
    fn classical_powers_have_full_dimension(n in 2usize..=4, t in 0usize..=6) {
        let m = classical_power_multiplicities(&Weight::zero(n), t);
        let total: usize = m.iter().map(|(w, k)| k * dim_classical(w)).sum();
        prop_assert_eq!(total, n.pow(t as u32));
    }

    #[test]
    fn negligible_starts_avoid_the_trivial_weight_early(ctx in config(), i in 0usize..64, t in 0usize..12) {
        let top: Vec<Weight> = enumerate_alcove(&ctx)
            .into_iter()
            .filter(|w| w.first() == (ctx.ell - ctx.n) as i64)
            .collect();
        let lam = &top[i % top.len()];
        let mut start = lam.clone();
        start.parts[0] += 1;
        let mt = thresholds(&ctx).m_tilde;
        prop_assume!(t + (lam.deg() as usize) < mt);
        let m = classical_power_multiplicities(&start, t);
        prop_assert_eq!(m.get(&Weight::zero(ctx.n)).copied().unwrap_or(0), 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn hecke_and_yang_baxter_relations(n in 2usize..=3, d in 1usize..=5, legs in 2usize..=4) {
        let ctx = QContext::new(n, n + d).unwrap();
        let ops = BraidOperators::new(&ctx);
        prop_assert!(hecke_relation_residual(&ctx, &ops, legs) < 1e-9);
        prop_assert!(yang_baxter_residual(&ctx, &r_matrix(&ctx)) < 1e-9);
    }

    #[test]
    fn level_dimensions_match_the_weight_oracle(i in 0usize..3) {
        let lv = levels(i);
        prop_assert_eq!(lv.dims(), oracle_dims(&lv.ctx, lv.n_max()));
        for lvl in &lv.levels {
            for c in &lvl.copies {
                prop_assert_eq!(c.dim, dim_classical(&c.weight));
            }
        }
    }

    #[test]
    fn compression_is_functorial(i in 0usize..3, seed in any::<u64>(), n in 2usize..=4, len in 1usize..8) {
        let lv = levels(i);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (random_word(&mut rng, n, len), random_word(&mut rng, n, len));
        let ab: Vec<i32> = a.iter().chain(&b).copied().collect();
        let (bm, lm) = (lv.b(n).unwrap(), lv.l(n).unwrap());
        let amb = lv.braid.apply_word(&LegTensor::from_matrix(vec![lv.ctx.n; n], bm), &ab, 0).into_matrix();
        let whole = lv.truncated_braiding(&ab, n).unwrap();
        prop_assert!(diff_abs(&mm(lm, &amb), &whole) < 1e-9);
        let split = mm(&lv.truncated_braiding(&a, n).unwrap(), &lv.truncated_braiding(&b, n).unwrap());
        prop_assert!(diff_abs(&split, &whole) < 1e-9);
    }

    #[test]
    fn groupoid_elements_satisfy_the_cstar_identity(i in 0usize..3, seed in any::<u64>()) {
        let lv = levels(i);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = GroupoidElement::random(lv, &mut rng);
        let n = w.norm();
        prop_assert!((w.adjoint().mul(&w).norm() - n * n).abs() < 1e-9 * n.max(1.0).powi(2));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn reports_are_deterministic_up_to_timings(seed in any::<u64>()) {
        let cfg = RunConfig { seed, ..RunConfig::new(2, 4) };
        let strip = |s: String| s.lines().filter(|l| !l.trim_start().starts_with("\"ms\"")).collect::<Vec<_>>().join("\n");
        let a = run(&cfg, Suite::Levels).unwrap();
        let b = run(&cfg, Suite::Levels).unwrap();
        prop_assert!(a.ok());
        prop_assert_eq!(strip(a.to_json()), strip(b.to_json()));
    }
}
