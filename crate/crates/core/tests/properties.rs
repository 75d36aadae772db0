use std::f64::consts::{PI, TAU};

use entropic_nc::entropy::{binary_entropy, JointTable};
use entropic_nc::inequality::{pair_distribution, EXCLUSIVITY_TOL};
use entropic_nc::model::Vec4;
use entropic_nc::oracle::{
    check_joint_extension, marginalize_pair_exclusive, sample_dirichlet, sample_exclusive,
};
use entropic_nc::{
    classical_m, default_observables, evaluate_m, normalize, FamilyKind, StateVector,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random_table(rng: &mut ChaCha8Rng) -> JointTable {
    let rows = rng.random_range(1..=5);
    let cols = rng.random_range(1..=5);
    // sparse cells exercise the 0 log 0 convention
    let mut cells: Vec<f64> = (0..rows * cols)
        .map(|_| {
            if rng.random_bool(0.2) {
                0.0
            } else {
                rng.random::<f64>()
            }
        })
        .collect();
    if cells.iter().all(|&c| c == 0.0) {
        cells[0] = 1.0;
    }
    let total: f64 = cells.iter().sum();
    cells.iter_mut().for_each(|c| *c /= total);
    JointTable::new(rows, cols, cells).unwrap()
}

#[test]
fn entropy_axioms_on_random_tables() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10_000 {
        let t = random_table(&mut rng);
        let (hxy, hx, hy) = (t.joint_entropy(), t.entropy_x(), t.entropy_y());
        let hx_given_y = t.conditional_entropy_x_given_y();
        assert!((hxy - (hy + hx_given_y)).abs() < 1e-10, "chain rule");
        assert!(
            (hxy - (hx + t.conditional_entropy_y_given_x())).abs() < 1e-10,
            "chain rule, other order"
        );
        assert!(hxy <= hx + hy + 1e-12, "subadditivity");
        assert!(hx_given_y <= hx + 1e-12, "conditioning");
        assert!(hx <= hxy + 1e-12 && hy <= hxy + 1e-12, "monotonicity");
    }
}

fn random_state(rng: &mut ChaCha8Rng, complex: bool) -> StateVector {
    let mut c = [Complex64::new(0.0, 0.0); 4];
    for z in c.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = if complex {
            rng.sample(StandardNormal)
        } else {
            0.0
        };
        *z = Complex64::new(re, im);
    }
    normalize(&Vec4::new(c).unwrap()).unwrap()
}

#[test]
fn random_states_give_consistent_reports() {
    let set = default_observables();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 0..10_000 {
        let psi = random_state(&mut rng, n % 2 == 1);
        let r = evaluate_m(&set, &psi).unwrap();
        assert!((r.recompute_m() - r.m_value).abs() < 1e-12);
        assert_eq!(r.violated, r.m_value > 0.0);
        for i in 0..5 {
            assert!(
                r.single_probabilities[i] + r.single_probabilities[(i + 1) % 5]
                    <= 1.0 + EXCLUSIVITY_TOL
            );
        }
        let phase = rng.random_range(0.0..TAU);
        let rotated = evaluate_m(&set, &psi.with_global_phase(phase)).unwrap();
        assert!((rotated.m_value - r.m_value).abs() < 1e-12);
    }
}

#[test]
fn relabeled_cycles_give_well_formed_reports() {
    let set = default_observables();
    let psi = FamilyKind::Entangled.state(3.4899, 2.9012).unwrap();
    let mut values = Vec::new();
    for k in 0..5 {
        let r = evaluate_m(&set.rotated(k), &psi).unwrap();
        assert!((r.recompute_m() - r.m_value).abs() < 1e-12);
        assert!(r.m_value.is_finite());
        values.push(r.m_value);
    }
    println!("M under cyclic relabeling: {values:?}");
}

#[test]
fn classical_bound_on_arbitrary_and_exclusive_joints() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for n in 0..20_000 {
        let c = [0.1, 1.0, 10.0][n % 3];
        let jd = if n % 2 == 0 {
            sample_dirichlet(&mut rng, c).unwrap()
        } else {
            sample_exclusive(&mut rng, c).unwrap()
        };
        assert!(classical_m(&jd) <= 1e-12);
    }
}

#[test]
fn joint_extension_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for n in 0..50 {
        let jd = sample_exclusive(&mut rng, [0.3, 1.0, 5.0][n % 3]).unwrap();
        let targets: [_; 5] =
            std::array::from_fn(|k| marginalize_pair_exclusive(&jd, k + 1).unwrap());
        let verdict = check_joint_extension(&targets).unwrap();
        assert!(verdict.feasible, "residual {}", verdict.residual);
        let witness = verdict.witness.unwrap();
        for (k, t) in targets.iter().enumerate() {
            let back = marginalize_pair_exclusive(&witness, k + 1).unwrap();
            assert!((back.p_mm() - t.p_mm()).abs() <= 1e-7);
            assert!((back.p_mp() - t.p_mp()).abs() <= 1e-7);
            assert!((back.p_pm() - t.p_pm()).abs() <= 1e-7);
        }
    }
}

#[test]
fn entropic_violation_implies_no_joint_extension() {
    let set = default_observables();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut violating = 0;
    for n in 0..4000 {
        let psi = if n % 2 == 0 {
            random_state(&mut rng, n % 4 == 0)
        } else {
            let kind = if n % 4 == 1 {
                FamilyKind::Entangled
            } else {
                FamilyKind::Product
            };
            match kind.state(rng.random_range(-TAU..TAU), rng.random_range(-TAU..TAU)) {
                Ok(psi) => psi,
                Err(_) => continue,
            }
        };
        if evaluate_m(&set, &psi).unwrap().m_value <= 1e-6 {
            continue;
        }
        violating += 1;
        let targets: [_; 5] =
            std::array::from_fn(|k| pair_distribution(&set, k + 1, &psi).unwrap());
        assert!(!check_joint_extension(&targets).unwrap().feasible);
    }
    assert!(violating > 0);
}

#[test]
fn family_periodicity() {
    let set = default_observables();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..500 {
        let (a, b) = (rng.random_range(-TAU..TAU), rng.random_range(-TAU..TAU));
        for kind in [FamilyKind::Entangled, FamilyKind::Product] {
            let (Ok(s), Ok(t)) = (kind.state(a, b), kind.state(a + TAU, b + TAU)) else {
                continue;
            };
            let m0 = evaluate_m(&set, &s).unwrap().m_value;
            assert!((m0 - evaluate_m(&set, &t).unwrap().m_value).abs() < 1e-12);
        }
        let s = FamilyKind::Entangled.state(a, b).unwrap();
        let t = FamilyKind::Entangled.state(a + PI, b + PI).unwrap();
        let diff = evaluate_m(&set, &s).unwrap().m_value - evaluate_m(&set, &t).unwrap().m_value;
        assert!(diff.abs() < 1e-12);
    }
}

fn real_vec() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(-10.0f64..10.0)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-6)
}

proptest! {
    #[test]
    fn normalize_is_idempotent(v in real_vec()) {
        let once = normalize(&Vec4::from_real(v).unwrap()).unwrap();
        let twice = normalize(&once.as_vec4()).unwrap();
        for (a, b) in once.components().iter().zip(twice.components()) {
            prop_assert!((a - b).norm() <= 1e-15);
        }
        prop_assert!((once.as_vec4().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_family_has_rank_one(a in -10.0f64..10.0, b in -10.0f64..10.0) {
        if let Ok(psi) = FamilyKind::Product.state(a, b) {
            let c = psi.components();
            prop_assert!((c[0] * c[3] - c[1] * c[2]).norm() < 1e-12);
        }
    }

    #[test]
    fn entangled_family_is_always_valid(a in -10.0f64..10.0, b in -10.0f64..10.0) {
        let psi = FamilyKind::Entangled.state(a, b).unwrap();
        prop_assert!((psi.as_vec4().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn binary_entropy_symmetry(p in 0.0f64..=1.0) {
        let h = binary_entropy(p).unwrap();
        prop_assert!((h - binary_entropy(1.0 - p).unwrap()).abs() < 1e-14);
        prop_assert!((0.0..=1.0).contains(&h));
    }
}
