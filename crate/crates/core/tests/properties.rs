use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sqkd3::attack::{compose_f_from_ek, ternary_channel_apply, unitarity_defect};
use sqkd3::linalg::{shannon_entropy3, tensor, von_neumann_entropy3, CMat, CVec};
use sqkd3::stats::{basis_error_direct, basis_error_expanded, joint_and_marginal, p_table_from_attack, p_table_symmetric, t_values};
use sqkd3::verify::random_density;
use sqkd3::*;

fn attack_strategy() -> impl Strategy<Value = AttackModel> {
    (1usize..=4, 1usize..=3, any::<u64>()).prop_map(|(d_f, d_r, seed)| AttackModel::random(d_f, d_r, seed).unwrap())
}

fn vec_strategy(dim: usize) -> impl Strategy<Value = CVec> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim)
        .prop_map(|v| CVec::new(v.into_iter().map(|(re, im)| C64::new(re, im)).collect()))
}

fn mat_strategy(rows: usize, cols: usize) -> impl Strategy<Value = CMat> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), rows * cols)
        .prop_map(move |v| CMat::new(rows, cols, v.into_iter().map(|(re, im)| C64::new(re, im)).collect()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn attack_families_satisfy_sum_rules(attack in attack_strategy()) {
        let fams = VectorFamilies::from_attack(&attack);
        for family in [&fams.e, &fams.f, &fams.g, &fams.h] {
            prop_assert!(unitarity_defect(family) < 1e-10);
        }
        let h_total: f64 = fams.h.iter().map(CVec::norm_sqr).sum();
        prop_assert!((h_total - 3.0).abs() < 1e-10);
        for (a, b) in fams.f.iter().zip(compose_f_from_ek(&fams.ek)) {
            prop_assert!(a.max_abs_diff(&b) < 1e-12);
        }
    }

    #[test]
    fn attack_tables_are_distributions(attack in attack_strategy(), phi2 in any::<bool>()) {
        let variant = if phi2 { Variant::Phi2 } else { Variant::Phi1 };
        let fams = VectorFamilies::from_attack(&attack);
        let p = p_table_from_attack(&fams);
        for plane in p {
            prop_assert!((plane.iter().flatten().sum::<f64>() - 1.0).abs() < 1e-10);
        }
        let direct = basis_error_direct(&fams, variant);
        let expanded = basis_error_expanded(&fams.f_gram(), variant);
        for (d, e) in direct.iter().zip(expanded) {
            prop_assert!((0.0..=1.0 + 1e-12).contains(d));
            prop_assert!((d - e).abs() < 1e-10);
        }
        let t = t_values(&p);
        prop_assert!((t.iter().sum::<f64>() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn attack_json_round_trip(attack in attack_strategy()) {
        prop_assert_eq!(AttackModel::from_json(&attack.to_json().unwrap()).unwrap(), attack);
    }

    #[test]
    fn ternary_channel_keeps_states_valid(seed in any::<u64>(), q in 0.0f64..=(1.0 / 3.0)) {
        let rho = random_density(3, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let out = ternary_channel_apply(&rho, q).unwrap();
        prop_assert!((out.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(out.hermiticity_defect() < 1e-12);
        let s_in = von_neumann_entropy3(&rho).unwrap();
        let s_out = von_neumann_entropy3(&out).unwrap();
        prop_assert!(s_out >= s_in - 1e-10);
        prop_assert!(s_out <= 1.0 + 1e-12);
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn symmetric_table_structure(qf in 0.0f64..0.375, qr in 0.0f64..0.375) {
        let p = p_table_symmetric(qf, qr).unwrap();
        prop_assert!((t_values(&p).iter().sum::<f64>() - 3.0).abs() < 1e-12);
        // entries depend only on the (m == i, i == k) pattern
        for m in 0..3 {
            for i in 0..3 {
                for k in 0..3 {
                    let rep_i = if m == i { m } else { (m + 1) % 3 };
                    let rep_k = if i == k { rep_i } else { (rep_i + 1) % 3 };
                    prop_assert!((p[m][i][k] - p[m][rep_i][rep_k]).abs() < 1e-15);
                }
            }
        }
        let normalized = joint_and_marginal(&p, Weighting::Normalized);
        prop_assert!((normalized.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn report_invariants_under_physical_conventions(q in 0.0f64..0.375, phi2 in any::<bool>(), indep in any::<bool>()) {
        let variant = if phi2 { Variant::Phi2 } else { Variant::Phi1 };
        let model = if indep { ChannelModel::Independent } else { ChannelModel::Dependent };
        let r = key_rate(&ChannelScenario::new(q, model, variant, Conventions::physical()).unwrap()).unwrap();
        prop_assert!((r.lambda1 + r.lambda2 - 1.0).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&r.lambda1) && (0.0..=1.0).contains(&r.lambda2));
        prop_assert!(r.s_bec >= 0.0 && r.s_ec_upper >= 0.0 && r.h_b_given_a >= -1e-12);
        prop_assert!((r.t.iter().sum::<f64>() - 3.0).abs() < 1e-9);
        prop_assert!((r.r - (r.s_bec - r.s_ec_upper - r.h_b_given_a)).abs() < 1e-15);
    }

    #[test]
    fn shannon_entropy_bounds(raw in prop::collection::vec(0.0f64..1.0, 1..12)) {
        let total: f64 = raw.iter().sum();
        prop_assume!(total > 1e-6);
        let p: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let h = shannon_entropy3(&p).unwrap();
        prop_assert!(h >= -1e-15);
        prop_assert!(h <= (p.len() as f64).ln() / 3f64.ln() + 1e-12);
    }

    #[test]
    fn tensor_product_is_multiplicative(a in mat_strategy(2, 3), b in mat_strategy(3, 2), x in vec_strategy(3), y in vec_strategy(2)) {
        let lhs = tensor(&a, &b).mul_vec(&tensor(&x, &y));
        let rhs = tensor(&a.mul_vec(&x), &b.mul_vec(&y));
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn adjoint_reverses_products(a in mat_strategy(3, 4), b in mat_strategy(4, 2)) {
        let lhs = a.matmul(&b).adjoint();
        let rhs = b.adjoint().matmul(&a.adjoint());
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        prop_assert!(a.adjoint().adjoint().max_abs_diff(&a) == 0.0);
    }

    #[test]
    fn partial_traces_preserve_trace(m in mat_strategy(6, 6)) {
        let tr = m.trace();
        let a = m.partial_trace_second(2, 3).unwrap().trace();
        let b = m.partial_trace_first(2, 3).unwrap().trace();
        prop_assert!((a - tr).norm() < 1e-12 && (b - tr).norm() < 1e-12);
    }
}
