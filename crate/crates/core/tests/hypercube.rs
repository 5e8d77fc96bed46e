use hyperlab::hypercube::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `T_ρ f(x) = Σ_y Π_k (1 + ρ x_k y_k)/2 · f(y)`, straight from the
/// definition as an average over independent bit flips.
fn noise_brute_force(values: &[f64], n: usize, rho: f64) -> Vec<f64> {
    let size = 1usize << n;
    (0..size)
        .map(|x| {
            (0..size)
                .map(|y| {
                    let kernel: f64 = (0..n)
                        .map(|k| 0.5 * (1.0 + rho * coordinate(x, k) * coordinate(y, k)))
                        .product();
                    kernel * values[y]
                })
                .sum()
        })
        .collect()
}

fn random_values(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..1usize << n).map(|_| rng.gen_range(lo..hi)).collect()
}

proptest! {
    #[test]
    fn parseval_and_round_trip(n in 1usize..=8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = random_values(&mut rng, n, -3.0, 3.0);
        let f = walsh_analyze(&values).unwrap();
        let mean_sq = values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64;
        prop_assert!((f.norm_sq() - mean_sq).abs() <= 1e-12 * mean_sq.max(1.0));
        for (a, b) in f.synthesize().iter().zip(&values) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        let again = walsh_analyze(&f.synthesize()).unwrap();
        for (a, b) in again.coeffs().iter().zip(f.coeffs()) {
            prop_assert!((a - b).abs() <= 1e-13);
        }
    }

    #[test]
    fn noise_matches_bit_flip_average(n in 1usize..=4, rho in -1.0f64..=1.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = random_values(&mut rng, n, -2.0, 2.0);
        let f = walsh_analyze(&values).unwrap();
        let fast = noise_operator(&f, rho).unwrap().synthesize();
        for (a, b) in fast.iter().zip(noise_brute_force(&values, n, rho)) {
            prop_assert!((a - b).abs() <= 1e-13);
        }
    }

    #[test]
    fn semigroup_law(n in 1usize..=6, rho in -1.0f64..=1.0, sigma in -1.0f64..=1.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = walsh_analyze(&random_values(&mut rng, n, -2.0, 2.0)).unwrap();
        let twice = noise_operator(&noise_operator(&f, sigma).unwrap(), rho).unwrap();
        let once = noise_operator(&f, rho * sigma).unwrap();
        for (a, b) in twice.coeffs().iter().zip(once.coeffs()) {
            prop_assert!((a - b).abs() <= 1e-15 * a.abs().max(1.0));
        }
    }
}

#[test]
fn two_point_noise_closed_form() {
    for eps in [0.1, 0.3, 0.9] {
        for rho in [0.0, 0.25, 0.8] {
            let v = noise_operator(&two_point(eps), rho).unwrap().synthesize();
            // f(±1) averaged with weights (1 ± ρ)/2.
            let plus = 0.5 * (1.0 + rho) * (1.0 + eps) + 0.5 * (1.0 - rho) * (1.0 - eps);
            let minus = 0.5 * (1.0 - rho) * (1.0 + eps) + 0.5 * (1.0 + rho) * (1.0 - eps);
            assert!((v[0] - plus).abs() < 1e-15 && (v[1] - minus).abs() < 1e-15);
        }
    }
}

#[test]
fn example_ratio_at_critical_rho() {
    let rho = (1.0f64 / 3.0).sqrt();
    assert!(boolean_hyper_check(&two_point(0.3), 2.0, 4.0, rho)
        .unwrap()
        .holds());
    let above = two_point_sweep(2.0, 4.0, 1.05 * rho).unwrap();
    assert!(above.iter().any(|(_, r)| r.ratio > 1.0));
}

#[test]
fn forward_sharpness_on_one_bit() {
    let rho_grid: Vec<f64> = (1..100).map(|k| k as f64 / 100.0).collect();
    for (p, q) in [(2.0, 4.0), (1.5, 3.0), (2.0, 10.0)] {
        let rho = critical_rho(p, q).unwrap();
        assert!(
            two_point_sweep(p, q, rho)
                .unwrap()
                .iter()
                .all(|(_, r)| r.holds()),
            "({p}, {q})"
        );
        let over = two_point_sweep(p, q, 1.02 * rho).unwrap();
        assert!(
            over.iter().any(|(_, r)| !r.holds()),
            "({p}, {q}) survives 1.02·ρ*"
        );
        let empirical = empirical_critical_rho(p, q, &rho_grid).unwrap().unwrap();
        assert!(
            empirical <= rho && rho - empirical < 0.01,
            "({p}, {q}): {empirical} vs {rho}"
        );
    }
}

#[test]
fn reverse_on_small_cubes() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (p, q) = (0.5, 0.25);
    let rho = critical_rho(p, q).unwrap();
    for trial in 0..200 {
        let n = 1 + trial % 3;
        let f = walsh_analyze(&random_values(&mut rng, n, 0.01, 5.0)).unwrap();
        let r = boolean_hyper_check(&f, p, q, rho).unwrap();
        assert!(r.ratio >= 1.0 - 1e-12, "trial {trial}: ratio {}", r.ratio);
    }
}

#[test]
fn tensorization() {
    for (p, q) in [(2.0, 4.0), (1.5, 3.0), (0.5, 0.25)] {
        let rho = critical_rho(p, q).unwrap();
        for eps in [0.2, 0.5, 0.9] {
            let g = two_point(eps);
            let one = boolean_hyper_check(&g, p, q, rho).unwrap();
            assert!(one.holds());
            for n in 1..=6 {
                let f = tensor_power(&g, n).unwrap();
                let r = boolean_hyper_check(&f, p, q, rho).unwrap();
                let k = n as i32;
                assert!((r.lhs - one.lhs.powi(k)).abs() <= 1e-12 * r.lhs);
                assert!((r.rhs - one.rhs.powi(k)).abs() <= 1e-12 * r.rhs);
                assert!(r.holds(), "({p}, {q}) eps {eps} n {n}");
            }
        }
    }
}

#[test]
fn constant_function_on_every_regime() {
    let f = walsh_analyze(&[2.5; 16]).unwrap();
    for (p, q) in [(2.0, 4.0), (-1.0, -2.0), (0.5, 0.0), (0.0, -1.0)] {
        let rho = critical_rho(p, q).unwrap();
        let r = boolean_hyper_check(&f, p, q, rho).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-14);
    }
}
