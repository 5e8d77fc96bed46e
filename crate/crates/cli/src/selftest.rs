//! The invariant battery behind `hyperlab selftest`.
//!
//! Every check reduces to one worst-case statistic compared against a pinned
//! bound. The battery is seeded, so its output is reproducible byte for byte.

use hyperlab::flow::{
    closure_check, critical_time, endpoint_check, heat_flow, hyper_ratio, log_grid, q_curve,
    q_curve_with, ExponentPair, Normalization, Solution, T_MAX, T_MIN,
};
use hyperlab::function::{positive_battery, Preset, RealFn};
use hyperlab::hermite::{gauss_hermite_rule, hermite_values, lp_norm_gamma, SpectralFn};
use hyperlab::hypercube::{
    boolean_hyper_check, critical_rho, empirical_critical_rho, noise_operator, tensor_power,
    two_point, two_point_sweep, walsh_analyze,
};
use hyperlab::ou::{
    carre_du_champ, gamma2, generator, gradient_bound_residual, semigroup_quadrature,
    semigroup_spectral, OuContext, NODE_WINDOW,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::commands::Outcome;
use crate::output::Table;

const SEED: u64 = 20_240_611;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Relation {
    AtMost,
    AtLeast,
}

struct Check {
    name: &'static str,
    value: f64,
    relation: Relation,
    bound: f64,
    error: Option<String>,
}

impl Check {
    fn passed(&self) -> bool {
        self.error.is_none()
            && match self.relation {
                Relation::AtMost => self.value <= self.bound,
                Relation::AtLeast => self.value >= self.bound,
            }
    }
}

type Stat = hyperlab::Result<f64>;

fn at_most(name: &'static str, bound: f64, stat: Stat) -> Check {
    make(name, Relation::AtMost, bound, stat)
}

fn at_least(name: &'static str, bound: f64, stat: Stat) -> Check {
    make(name, Relation::AtLeast, bound, stat)
}

fn make(name: &'static str, relation: Relation, bound: f64, stat: Stat) -> Check {
    match stat {
        Ok(value) => Check {
            name,
            value,
            relation,
            bound,
            error: None,
        },
        Err(e) => Check {
            name,
            value: f64::NAN,
            relation,
            bound,
            error: Some(e.to_string()),
        },
    }
}

fn random_fn(rng: &mut ChaCha8Rng, degree: usize) -> SpectralFn {
    SpectralFn::new((0..=degree).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

fn catalogue() -> Vec<Preset> {
    let mut all = positive_battery();
    all.insert(1, Preset::affine());
    all
}

fn q_context() -> hyperlab::Result<OuContext> {
    OuContext::new(48, 128, 23)
}

fn closure_context() -> hyperlab::Result<OuContext> {
    OuContext::new(48, 96, 23)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn quadrature_weights() -> Stat {
    let mut worst: f64 = 0.0;
    for order in (1..=64).chain([128, 256, 512]) {
        let rule = gauss_hermite_rule(order)?;
        worst = worst.max((rule.weights().iter().sum::<f64>() - 1.0).abs());
    }
    Ok(worst)
}

fn quadrature_moments() -> Stat {
    let rule = gauss_hermite_rule(16)?;
    let mut worst: f64 = 0.0;
    for k in 0..=31 {
        let got = rule.integrate(|x| x.powi(k));
        let want = if k % 2 == 1 {
            0.0
        } else {
            (1..k).step_by(2).map(|j| j as f64).product()
        };
        let scale = rule.integrate(|x| x.abs().powi(k));
        worst = worst.max((got - want).abs() / scale);
    }
    Ok(worst)
}

fn quadrature_symmetry() -> Stat {
    let mut worst: f64 = 0.0;
    for order in [7, 50, 201, 512] {
        let rule = gauss_hermite_rule(order)?;
        let x = rule.nodes();
        if !x.windows(2).all(|w| w[0] < w[1]) {
            return Ok(f64::INFINITY);
        }
        for j in 0..order {
            worst = worst.max((x[j] + x[order - 1 - j]).abs());
        }
    }
    Ok(worst)
}

fn round_trip() -> Stat {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let degree = rng.gen_range(0..=40);
        let f = random_fn(&mut rng, degree);
        let rule = gauss_hermite_rule(degree + 41)?;
        let back = SpectralFn::analyze(&f.synthesize(rule.nodes()), &rule, degree)?;
        worst = worst.max(max_abs_diff(back.coeffs(), f.coeffs()));
    }
    Ok(worst)
}

fn parseval() -> Stat {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let degree = rng.gen_range(0..=40);
        let f = random_fn(&mut rng, degree);
        let rule = gauss_hermite_rule(degree + 41)?;
        let l2 = rule.integrate(|x| f.eval(x).powi(2));
        worst = worst.max((f.norm_sq() - l2).abs() / l2);
    }
    Ok(worst)
}

fn two_representations() -> Stat {
    let wide = gauss_hermite_rule(200)?;
    let ctx = q_context()?;
    let window: Vec<f64> = ctx
        .rule()
        .window(NODE_WINDOW)
        .iter()
        .map(|&j| ctx.nodes()[j])
        .collect();
    let mut worst: f64 = 0.0;
    for preset in catalogue() {
        let f = preset.to_spectral(&wide, 99)?;
        for s in [0.1, 0.549306, 2.0] {
            let spectral = semigroup_spectral(&f, s)?.synthesize(&window);
            let quad = semigroup_quadrature(&preset, s, &window, &ctx)?;
            worst = worst.max(max_abs_diff(&spectral, &quad));
        }
    }
    Ok(worst)
}

fn semigroup_law() -> Stat {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let f = random_fn(&mut rng, 20);
        let (s, t) = (rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0));
        let a = semigroup_spectral(&semigroup_spectral(&f, s)?, t)?;
        let b = semigroup_spectral(&f, s + t)?;
        worst = worst.max(max_abs_diff(a.coeffs(), b.coeffs()));
    }
    Ok(worst)
}

fn eigenrelation() -> Stat {
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for k in 0..=10 {
        let hk = |x: f64| hermite_values(x, k)[k];
        let lh = generator(&SpectralFn::basis(k));
        for x in [-2.0, -0.7, 0.0, 0.4, 1.9] {
            let fd = (hk(x + h) - 2.0 * hk(x) + hk(x - h)) / (h * h)
                - x * (hk(x + h) - hk(x - h)) / (2.0 * h);
            worst = worst.max((fd - lh.eval(x)).abs() / lh.eval(x).abs().max(1.0));
        }
    }
    Ok(worst)
}

fn invariance() -> Stat {
    let rule = gauss_hermite_rule(60)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let f = random_fn(&mut rng, 14);
        worst = worst.max(
            rule.integrate_values(&generator(&f).synthesize(rule.nodes()))
                .abs(),
        );
    }
    Ok(worst)
}

fn integration_by_parts() -> Stat {
    let rule = gauss_hermite_rule(60)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let f = random_fn(&mut rng, 14);
        let g = random_fn(&mut rng, 14);
        let lg = generator(&g);
        let lhs = rule.integrate(|x| f.eval(x) * lg.eval(x));
        let rhs = -rule.integrate_values(&carre_du_champ(&f, &g, &rule)?);
        worst = worst.max((lhs - rhs).abs() / lhs.abs().max(1.0));
    }
    Ok(worst)
}

/// `2 + x²/4`
fn positive_quadratic() -> SpectralFn {
    SpectralFn::new(vec![2.25, 0.0, 0.25 * std::f64::consts::SQRT_2])
}

fn diffusion_power() -> Stat {
    let rule = gauss_hermite_rule(300)?;
    let f = positive_quadratic();
    let lf = generator(&f);
    let gamma = carre_du_champ(&f, &f, &rule)?;
    let mut worst: f64 = 0.0;
    for lambda in [0.5, 1.0 / 3.0, 2.0, 3.0] {
        let power = SpectralFn::from_fn(|x| f.eval(x).powf(lambda), &rule, 149)?;
        let lhs = generator(&power);
        for j in rule.window(NODE_WINDOW) {
            let x = rule.nodes()[j];
            let fx = f.eval(x);
            let rhs = lambda * fx.powf(lambda - 1.0) * lf.eval(x)
                + lambda * (lambda - 1.0) * fx.powf(lambda - 2.0) * gamma[j];
            worst = worst.max((lhs.eval(x) - rhs).abs() / rhs.abs().max(1.0));
        }
    }
    Ok(worst)
}

fn gamma_power() -> Stat {
    let rule = gauss_hermite_rule(300)?;
    let u = positive_quadratic();
    let gamma_u = carre_du_champ(&u, &u, &rule)?;
    let mut worst: f64 = 0.0;
    for p in [2.0, 3.0, 4.0, -2.0] {
        let root = SpectralFn::from_fn(|x| u.eval(x).powf(1.0 / p), &rule, 149)?.differentiate();
        for j in rule.window(NODE_WINDOW) {
            let x = rule.nodes()[j];
            let rhs = u.eval(x).powf(2.0 / p - 2.0) * gamma_u[j] / (p * p);
            worst = worst.max((root.eval(x).powi(2) - rhs).abs() / rhs.abs().max(1.0));
        }
    }
    Ok(worst)
}

fn curvature() -> Stat {
    let rule = gauss_hermite_rule(40)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let mut worst = f64::INFINITY;
    for _ in 0..100 {
        let degree = rng.gen_range(1..=12);
        let f = random_fn(&mut rng, degree);
        let g2 = gamma2(&f, &rule)?;
        let g1 = carre_du_champ(&f, &f, &rule)?;
        worst = g2.iter().zip(&g1).map(|(a, b)| a - b).fold(worst, f64::min);
    }
    Ok(worst)
}

fn gradient_bound() -> Stat {
    let wide = gauss_hermite_rule(200)?;
    let ctx = OuContext::new(64, 64, 40)?;
    let mut worst = f64::INFINITY;
    for preset in catalogue() {
        let f = preset.to_spectral(&wide, 60)?;
        for s in [0.2, 0.5, 1.0] {
            worst = gradient_bound_residual(&f, s, 1.0, &ctx)?
                .into_iter()
                .fold(worst, f64::min);
        }
    }
    Ok(worst)
}

fn nelson_relation() -> Stat {
    let mut worst: f64 = 0.0;
    for (p, q) in [
        (2.0, 4.0),
        (1.5, 3.0),
        (3.0, 6.0),
        (-1.0, -2.0),
        (0.5, 0.25),
        (0.5, -1.0),
    ] {
        for c in [0.5, 1.0, 2.0] {
            let s = critical_time(p, q, c)?;
            worst = worst.max(((2.0 * c * s).exp() - (q - 1.0) / (p - 1.0)).abs());
        }
    }
    Ok(worst)
}

fn q_monotone(pairs: &[(f64, f64)]) -> Stat {
    let ctx = q_context()?;
    let times = log_grid(T_MIN, T_MAX, 60);
    let mut worst = f64::INFINITY;
    for &(p, q) in pairs {
        let pair = ExponentPair::new(p, q)?;
        for f in positive_battery() {
            let curve = q_curve(&f, &pair, &times, &ctx)?;
            for (m, prev) in curve.step_margins().iter().zip(&curve.q_values) {
                worst = worst.min(m / prev.abs().max(1.0));
            }
        }
    }
    Ok(worst)
}

fn initial_data(
    rule: &hyperlab::hermite::QuadratureRule,
    base: f64,
) -> hyperlab::Result<Vec<SpectralFn>> {
    let r2 = std::f64::consts::SQRT_2;
    Ok(vec![
        SpectralFn::constant(base),
        SpectralFn::new(vec![base + 0.25, 0.0, 0.25 * r2]),
        SpectralFn::new(vec![base + 1.25, 0.5, 0.25 * r2]),
        SpectralFn::from_fn(|x| base + x * x / 4.0 + x.powi(4) / 64.0, rule, 4)?,
    ])
}

/// Worst conclusion margin; a violated hypothesis counts as failure.
fn closure(pairs: &[(f64, f64)], base: f64) -> Stat {
    let ctx = closure_context()?;
    let times = log_grid(T_MIN, T_MAX, 60);
    let mut worst = f64::INFINITY;
    for &(p, q) in pairs {
        let pair = ExponentPair::new(p, q)?;
        let sign = match pair.regime().hypothesis() {
            Solution::Super => 1.0,
            Solution::Sub => -1.0,
        };
        for f in initial_data(ctx.rule(), base)? {
            let flow = heat_flow(&f, &times, ctx.rule())?;
            for eps in [0.0, 0.05, 0.2] {
                let report = closure_check(&flow.with_ramp(sign * eps)?, &pair, &ctx)?;
                if !report.passed() {
                    return Ok(f64::NEG_INFINITY);
                }
                for r in &report.rows {
                    let m = match report.conclusion {
                        Solution::Super => r.conclusion_min + r.conclusion_tol,
                        Solution::Sub => r.conclusion_tol - r.conclusion_max,
                    };
                    worst = worst.min(m);
                }
            }
        }
    }
    Ok(worst)
}

fn normalizations() -> Stat {
    let ctx = q_context()?;
    let times = log_grid(1e-2, 5.0, 7);
    let mut worst: f64 = 0.0;
    for (p, q) in [(2.0, 4.0), (1.5, 3.0)] {
        let pair = ExponentPair::new(p, q)?;
        let f = Preset::shifted_quadratic();
        let a = q_curve_with(&f, &pair, &times, &ctx, Normalization::Integral)?;
        let b = q_curve_with(&f, &pair, &times, &ctx, Normalization::Root)?;
        for (x, y) in a.q_values.iter().zip(&b.q_values) {
            worst = worst.max((x.powf(1.0 / q) - y).abs() / y);
        }
    }
    Ok(worst)
}

fn endpoints() -> Stat {
    let ctx = q_context()?;
    let mut worst: f64 = 0.0;
    for (f, p, q) in [
        (Preset::constant(), 2.0, 4.0),
        (Preset::quadratic(), 2.0, 4.0),
        (Preset::bump(), 3.0, 6.0),
    ] {
        let r = endpoint_check(&f, &ExponentPair::new(p, q)?, &ctx)?;
        worst = worst.max(r.rel_err_start).max(r.rel_err_end);
    }
    Ok(worst)
}

fn criticality_at() -> Stat {
    let ctx = q_context()?;
    let pair = ExponentPair::new(2.0, 4.0)?;
    Ok((hyper_ratio(&Preset::exp(0.8), &pair, pair.critical_time(), &ctx)? - 1.0).abs())
}

fn criticality_below() -> Stat {
    let ctx = q_context()?;
    let pair = ExponentPair::new(2.0, 4.0)?;
    hyper_ratio(&Preset::exp(0.8), &pair, 0.9 * pair.critical_time(), &ctx)
}

fn reverse_ratio() -> Stat {
    let ctx = q_context()?;
    let pair = ExponentPair::new(0.5, 0.25)?;
    let mut worst = f64::INFINITY;
    for f in positive_battery() {
        worst = worst.min(hyper_ratio(&f, &pair, pair.critical_time(), &ctx)?);
    }
    Ok(worst)
}

fn lp_monotone_in_p() -> Stat {
    let rule = gauss_hermite_rule(32)?;
    let values = rule.sample(|x| RealFn::eval(&Preset::bump(), x) + 0.1);
    let mut worst = f64::INFINITY;
    let ps: Vec<f64> = (-20..=20).map(|k| k as f64 / 5.0).collect();
    for w in ps.windows(2) {
        let lo = lp_norm_gamma(&values, &rule, w[0])?;
        let hi = lp_norm_gamma(&values, &rule, w[1])?;
        worst = worst.min((hi - lo) / lo);
    }
    Ok(worst)
}

fn walsh_parseval() -> Stat {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    let mut worst: f64 = 0.0;
    for n in 1..=12 {
        let values: Vec<f64> = (0..1usize << n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let f = walsh_analyze(&values)?;
        let mean_sq = values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64;
        worst = worst
            .max((f.norm_sq() - mean_sq).abs())
            .max(max_abs_diff(&f.synthesize(), &values));
    }
    Ok(worst)
}

fn noise_semigroup() -> Stat {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    let mut worst: f64 = 0.0;
    for n in 1..=8 {
        let values: Vec<f64> = (0..1usize << n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let f = walsh_analyze(&values)?;
        let (rho, sigma) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let a = noise_operator(&noise_operator(&f, sigma)?, rho)?;
        let b = noise_operator(&f, rho * sigma)?;
        worst = worst.max(max_abs_diff(a.coeffs(), b.coeffs()));
    }
    Ok(worst)
}

fn noise_brute_force() -> Stat {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 8);
    let mut worst: f64 = 0.0;
    for n in 1..=4 {
        let size = 1usize << n;
        let values: Vec<f64> = (0..size).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let rho = rng.gen_range(-1.0..1.0);
        let fast = noise_operator(&walsh_analyze(&values)?, rho)?.synthesize();
        for (x, got) in fast.iter().enumerate() {
            let want: f64 = (0..size)
                .map(|y| {
                    let agree = n as u32 - (x ^ y).count_ones();
                    let kernel = (0.5 * (1.0 + rho)).powi(agree as i32)
                        * (0.5 * (1.0 - rho)).powi((n as u32 - agree) as i32);
                    kernel * values[y]
                })
                .sum();
            worst = worst.max((got - want).abs());
        }
    }
    Ok(worst)
}

/// Distance from the formula to the largest passing grid `ρ`, or infinity if
/// the sweep fails at the formula or survives `1.02·ρ*`.
fn boolean_sharpness() -> Stat {
    let grid: Vec<f64> = (1..100).map(|k| k as f64 / 100.0).collect();
    let mut worst: f64 = 0.0;
    for (p, q) in [(2.0, 4.0), (1.5, 3.0), (2.0, 10.0)] {
        let rho = critical_rho(p, q)?;
        let at = two_point_sweep(p, q, rho)?.iter().all(|(_, r)| r.holds());
        let over = two_point_sweep(p, q, 1.02 * rho)?
            .iter()
            .all(|(_, r)| r.holds());
        let empirical = empirical_critical_rho(p, q, &grid)?;
        match empirical {
            Some(e) if at && !over => worst = worst.max((rho - e).abs()),
            _ => return Ok(f64::INFINITY),
        }
    }
    Ok(worst)
}

fn boolean_reverse() -> Stat {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 9);
    let rho = critical_rho(0.5, 0.25)?;
    let mut worst = f64::INFINITY;
    for trial in 0..200 {
        let n = 1 + trial % 3;
        let values: Vec<f64> = (0..1usize << n).map(|_| rng.gen_range(0.01..5.0)).collect();
        worst = worst.min(boolean_hyper_check(&walsh_analyze(&values)?, 0.5, 0.25, rho)?.ratio);
    }
    Ok(worst)
}

/// Worst relative mismatch between the `n`-fold norms and the `n`-th power
/// of the one-bit norms; infinity if any product fails the check.
fn tensorization() -> Stat {
    let mut worst: f64 = 0.0;
    for (p, q) in [(2.0, 4.0), (1.5, 3.0), (0.5, 0.25)] {
        let rho = critical_rho(p, q)?;
        for eps in [0.2, 0.5, 0.9] {
            let g = two_point(eps);
            let one = boolean_hyper_check(&g, p, q, rho)?;
            for n in 1..=6 {
                let r = boolean_hyper_check(&tensor_power(&g, n)?, p, q, rho)?;
                if !r.holds() {
                    return Ok(f64::INFINITY);
                }
                worst = worst
                    .max((r.lhs / one.lhs.powi(n as i32) - 1.0).abs())
                    .max((r.rhs / one.rhs.powi(n as i32) - 1.0).abs());
            }
        }
    }
    Ok(worst)
}

fn checks() -> Vec<Check> {
    let forward = [(2.0, 4.0), (1.5, 3.0), (3.0, 6.0)];
    let reverse = [(-1.0, -2.0), (0.5, 0.25), (0.5, -1.0)];
    vec![
        at_most("quadrature_weights_sum_to_one", 1e-14, quadrature_weights()),
        at_most("quadrature_moments_exact", 1e-12, quadrature_moments()),
        at_most("quadrature_nodes_symmetric", 1e-13, quadrature_symmetry()),
        at_most("spectral_round_trip", 1e-12, round_trip()),
        at_most("spectral_parseval", 1e-10, parseval()),
        at_least("lp_norm_monotone_in_p", -1e-13, lp_monotone_in_p()),
        at_most("semigroup_two_representations", 1e-8, two_representations()),
        at_most("semigroup_law", 1e-14, semigroup_law()),
        at_most("generator_eigenrelation", 1e-5, eigenrelation()),
        at_most("generator_invariance", 1e-12, invariance()),
        at_most("integration_by_parts", 1e-10, integration_by_parts()),
        at_most("diffusion_power_identity", 1e-8, diffusion_power()),
        at_most("gamma_power_identity", 1e-8, gamma_power()),
        at_least("curvature_gamma2_ge_gamma", -1e-9, curvature()),
        at_least("gradient_bound", -1e-9, gradient_bound()),
        at_most("nelson_relation", 1e-12, nelson_relation()),
        at_least("q_monotone_forward", -1e-8, q_monotone(&forward)),
        at_least("q_monotone_derived_directions", -1e-8, q_monotone(&reverse)),
        at_least(
            "closure_forward",
            0.0,
            closure(&[(2.0, 4.0), (1.5, 3.0)], 1.0),
        ),
        at_least(
            "closure_regime_table",
            0.0,
            closure(&[(-1.0, -2.0), (0.5, 0.25), (0.5, -1.0), (0.5, 0.0)], 3.0),
        ),
        at_most("normalization_consistency", 1e-12, normalizations()),
        at_most("endpoint_limits", 1e-3, endpoints()),
        at_most("criticality_ratio_at_critical_time", 1e-8, criticality_at()),
        at_least(
            "criticality_ratio_below_critical_time",
            1.0 + 1e-3,
            criticality_below(),
        ),
        at_least("reverse_ratio", 1.0 - 1e-9, reverse_ratio()),
        at_most("walsh_parseval_round_trip", 1e-12, walsh_parseval()),
        at_most("noise_semigroup_law", 1e-15, noise_semigroup()),
        at_most("noise_bit_flip_average", 1e-13, noise_brute_force()),
        at_most("boolean_forward_sharpness", 0.01, boolean_sharpness()),
        at_least("boolean_reverse", 1.0 - 1e-12, boolean_reverse()),
        at_most("boolean_tensorization", 1e-12, tensorization()),
    ]
}

pub fn run() -> Outcome {
    let mut table = Table::new(&["check", "passed", "value", "relation", "bound", "error"]);
    let mut failures = Vec::new();
    for c in checks() {
        let passed = c.passed();
        if !passed {
            failures.push(c.name);
        }
        let relation = match c.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        };
        table.push(vec![
            c.name.into(),
            passed.into(),
            c.value.into(),
            relation.into(),
            c.bound.into(),
            c.error.unwrap_or_default().into(),
        ]);
    }
    let total = table.rows.len();
    let summary = if failures.is_empty() {
        format!("selftest: all {total} checks passed")
    } else {
        format!(
            "selftest: {} of {total} checks failed: {}",
            failures.len(),
            failures.join(", ")
        )
    };
    Outcome {
        table,
        passed: failures.is_empty(),
        summary,
    }
}
