//! Property tests for the model algebra, the trajectory sampler and the
//! post-processing statistics.

use jsmix::inference::{mauc, overlap_index, rhat, waic};
use jsmix::io::{parse_capture_csv, write_capture_csv};
use jsmix::model::enumerate::{admissible_paths, enumerated_loglik};
use jsmix::model::likelihood::{inclusion_prob, transition_matrix};
use jsmix::model::params::recentre;
use jsmix::model::{
    compound_survival, expected_nsuper, forward_loglik, CaptureData, GroupKernel, LatentState,
};
use jsmix::sampler::ffbs_individual;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn prob() -> impl Strategy<Value = f64> {
    0.01f64..0.99
}

/// A kernel and a capture history of the same length.
fn kernel_and_history(max_t: usize) -> impl Strategy<Value = (GroupKernel, Vec<u8>)> {
    (1..=max_t).prop_flat_map(|n| {
        (
            prop::collection::vec(prob(), n),
            prop::collection::vec(prob(), n),
            prop::collection::vec(prob(), n),
            prop::collection::vec(0u8..=1, n),
        )
            .prop_map(|(r, mut s, p, y)| {
                s[0] = 1.0;
                (GroupKernel::new(r, s, p), y)
            })
    })
}

proptest! {
    #[test]
    fn forward_equals_enumeration((k, y) in kernel_and_history(6)) {
        let f = forward_loglik(&y, &k);
        let e = enumerated_loglik(&y, &k);
        prop_assert!((f - e).exp_m1().abs() <= 1e-12, "{} vs {}", f, e);
    }

    #[test]
    fn histories_form_a_distribution((k, _) in kernel_and_history(5)) {
        let n = k.len();
        let total: f64 = (0..1u32 << n)
            .map(|code| {
                let y: Vec<u8> = (0..n).map(|t| ((code >> t) & 1) as u8).collect();
                forward_loglik(&y, &k).exp()
            })
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transitions_are_stochastic(rho in 0.0f64..=1.0, phi in 0.0f64..=1.0) {
        let m = transition_matrix(rho, phi);
        for row in m {
            prop_assert!(row.iter().all(|&v| (0.0..=1.0).contains(&v)));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
        // No re-entry and no resurrection.
        prop_assert_eq!(m[1][0], 0.0);
        prop_assert_eq!(m[2][0], 0.0);
        prop_assert_eq!(m[2][1], 0.0);
    }

    #[test]
    fn ffbs_paths_are_admissible((k, y) in kernel_and_history(8), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let path = ffbs_individual(&y, &k, &mut rng).unwrap();
        prop_assert!(admissible_paths(y.len()).contains(&path));
        for (s, c) in path.iter().zip(&y) {
            if *c == 1 {
                prop_assert_eq!(*s, 1);
            }
        }
        let mut latent = LatentState::empty(1, y.len());
        latent.set_path(0, &path);
        prop_assert!(latent.check(|_| false).is_ok());
    }

    #[test]
    fn inclusion_is_monotone(rho in prop::collection::vec(0.0f64..=1.0, 1..12), extra in 0.0f64..=1.0) {
        let psi = inclusion_prob(&rho);
        prop_assert!((0.0..=1.0).contains(&psi));
        let mut longer = rho.clone();
        longer.push(extra);
        prop_assert!(inclusion_prob(&longer) >= psi - 1e-15);
        let direct = 1.0 - rho.iter().map(|r| 1.0 - r).product::<f64>();
        prop_assert!((psi - direct).abs() < 1e-12);
    }

    #[test]
    fn expected_size_is_bounded(m in 1.0f64..5000.0, w in prop::collection::vec(0.01f64..1.0, 1..5), seed in 0.0f64..=1.0) {
        let s: f64 = w.iter().sum();
        let w: Vec<f64> = w.iter().map(|v| v / s).collect();
        let psi: Vec<f64> = (0..w.len()).map(|g| (seed + g as f64 * 0.37) % 1.0).collect();
        let e = expected_nsuper(m, &w, &psi);
        prop_assert!(e >= 0.0 && e <= m * (1.0 + 1e-12));
    }

    #[test]
    fn survival_compounds_over_lags(phi in 0.001f64..1.0, a in 0.0f64..5.0, b in 0.0f64..5.0) {
        let joint = compound_survival(phi, a + b);
        let split = compound_survival(phi, a) * compound_survival(phi, b);
        prop_assert!((joint - split).abs() <= 1e-12 * joint.max(1e-300) + 1e-300);
        prop_assert!(joint <= 1.0);
    }

    #[test]
    fn recentred_effects_sum_to_zero(mut v in prop::collection::vec(-5.0f64..5.0, 1..40)) {
        recentre(&mut v);
        prop_assert!(v.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn overlap_is_symmetric_bounded_and_affine_invariant(
        a in prop::collection::vec(-3.0f64..3.0, 20..80),
        b in prop::collection::vec(-1.0f64..6.0, 20..80),
        scale in 0.1f64..10.0,
        shift in -50.0f64..50.0,
    ) {
        prop_assume!(a.iter().any(|x| (x - a[0]).abs() > 1e-3));
        prop_assume!(b.iter().any(|x| (x - b[0]).abs() > 1e-3));
        let ab = overlap_index(&a, &b).unwrap();
        let ba = overlap_index(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!((-1e-9..=1.0 + 1e-9).contains(&ab));
        let t = |v: &[f64]| v.iter().map(|x| scale * x + shift).collect::<Vec<_>>();
        let moved = overlap_index(&t(&a), &t(&b)).unwrap();
        prop_assert!((ab - moved).abs() < 1e-6, "{} vs {}", ab, moved);
        prop_assert!((overlap_index(&a, &a).unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn mauc_ignores_monotone_rescaling(
        rows in prop::collection::vec((prop::collection::vec(0.01f64..1.0, 3), 0usize..3), 6..40),
    ) {
        let truth: Vec<usize> = rows.iter().map(|r| r.1).collect();
        prop_assume!((0..3).all(|g| truth.contains(&g)));
        let membership: Vec<Vec<f64>> = rows
            .iter()
            .map(|(w, _)| {
                let s: f64 = w.iter().sum();
                w.iter().map(|v| v / s).collect()
            })
            .collect();
        let a = mauc(&membership, &truth).unwrap().value;
        prop_assert!((0.0..=1.0).contains(&a));
        let warped: Vec<Vec<f64>> = membership.iter().map(|r| r.iter().map(|v| v.powi(3)).collect()).collect();
        prop_assert!((mauc(&warped, &truth).unwrap().value - a).abs() < 1e-12);
    }

    #[test]
    fn waic_ignores_draw_and_unit_order(
        cols in prop::collection::vec(prop::collection::vec(-8.0f64..-0.01, 6), 2..10),
        rot in 0usize..6,
    ) {
        // `cols[j][s]`: unit j, draw s.
        let by_draw = |cols: &[Vec<f64>], order: &[usize]| -> Vec<Vec<f64>> {
            order.iter().map(|&s| cols.iter().map(|c| c[s]).collect()).collect()
        };
        let order: Vec<usize> = (0..6).collect();
        let rotated: Vec<usize> = (0..6).map(|s| (s + rot) % 6).collect();
        let base = by_draw(&cols, &order);
        let mut rev_cols = cols.clone();
        rev_cols.reverse();
        let other = by_draw(&rev_cols, &rotated);
        let r1: Vec<&[f64]> = base.iter().map(Vec::as_slice).collect();
        let r2: Vec<&[f64]> = other.iter().map(Vec::as_slice).collect();
        let (w1, w2) = (waic(&r1, None).unwrap(), waic(&r2, None).unwrap());
        prop_assert!((w1.waic - w2.waic).abs() < 1e-9 * w1.waic.abs().max(1.0));
        prop_assert!(w1.p_waic >= 0.0);
    }

    #[test]
    fn rhat_is_affine_invariant(
        c1 in prop::collection::vec(-2.0f64..2.0, 40),
        c2 in prop::collection::vec(-1.0f64..3.0, 40),
        scale in 0.1f64..10.0,
        shift in -10.0f64..10.0,
    ) {
        prop_assume!(c1.iter().chain(&c2).any(|x| (x - c1[0]).abs() > 1e-6));
        let r = rhat(&[c1.clone(), c2.clone()]).unwrap().value;
        let t = |v: &[f64]| v.iter().map(|x| scale * x + shift).collect::<Vec<_>>();
        let moved = rhat(&[t(&c1), t(&c2)]).unwrap().value;
        prop_assert!((r - moved).abs() < 1e-9 * r);
    }

    #[test]
    fn capture_csv_round_trips(rows in prop::collection::vec(prop::collection::vec(0u8..=1, 4), 1..20)) {
        let rows: Vec<Vec<u8>> = rows.into_iter().filter(|r| r.contains(&1)).collect();
        prop_assume!(!rows.is_empty());
        let data = CaptureData::from_rows(rows).unwrap();
        let mut buf = Vec::new();
        write_capture_csv(&data, &mut buf).unwrap();
        let back = parse_capture_csv(buf.as_slice(), "mem").unwrap();
        prop_assert_eq!(back, data);
    }
}
