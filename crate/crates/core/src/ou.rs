//! The Ornstein-Uhlenbeck semigroup `P_s = e^{sL}` with generator
//! `L = Δ - x·∇`, its carré du champ and iterated carré du champ, and the
//! gradient bound `√Γ(P_s f) <= e^{-cs} P_s √Γ(f)`.
//!
//! The semigroup has two independent implementations: the spectral one
//! (`P_s h_k = e^{-sk} h_k`) and the Mehler average
//! `P_s f(x) = ∫ f(e^{-s}x + √(1 - e^{-2s}) y) dγ(y)` evaluated by quadrature.

use crate::error::{Error, Result};
use crate::function::RealFn;
use crate::hermite::{gauss_hermite_rule, QuadratureRule, SpectralFn};

/// Pointwise identities are only checked on nodes with `|x|` at most this.
/// Outer nodes amplify rounding in high-degree polynomials.
pub const NODE_WINDOW: f64 = 4.0;

/// Relative discrepancy at which the two Γ formulas are declared inconsistent.
const CONSISTENCY_TOL: f64 = 1e-6;

/// Quadrature configuration for semigroup computations.
#[derive(Debug, Clone, PartialEq)]
pub struct OuContext {
    rule: QuadratureRule,
    inner_rule: QuadratureRule,
    max_degree: usize,
}

impl OuContext {
    /// `rule` integrates in `x`, `inner_rule` in the Mehler variable `y`.
    pub fn new(order: usize, inner_order: usize, max_degree: usize) -> Result<Self> {
        OuContext::from_rules(
            gauss_hermite_rule(order)?,
            gauss_hermite_rule(inner_order)?,
            max_degree,
        )
    }

    pub fn from_rules(
        rule: QuadratureRule,
        inner_rule: QuadratureRule,
        max_degree: usize,
    ) -> Result<Self> {
        if inner_rule.order() < rule.order() {
            return Err(Error::parameter(
                "inner_order",
                format!(
                    "inner rule order {} is below the outer order {}",
                    inner_rule.order(),
                    rule.order()
                ),
            ));
        }
        if max_degree >= rule.order() {
            return Err(Error::parameter(
                "max_degree",
                format!(
                    "spectral degree {max_degree} must be below the rule order {}",
                    rule.order()
                ),
            ));
        }
        Ok(OuContext {
            rule,
            inner_rule,
            max_degree,
        })
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn inner_rule(&self) -> &QuadratureRule {
        &self.inner_rule
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn nodes(&self) -> &[f64] {
        self.rule.nodes()
    }
}

fn check_time(s: f64) -> Result<()> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::parameter(
            "s",
            format!("semigroup time must be finite and nonnegative, got {s}"),
        ));
    }
    Ok(())
}

/// Mehler coefficients `(e^{-s}, √(1 - e^{-2s}))`.
pub(crate) fn mehler_coefficients(s: f64) -> (f64, f64) {
    ((-s).exp(), (-(-2.0 * s).exp_m1()).sqrt())
}

/// `P_s f`: coefficient `k` is multiplied by `e^{-sk}`.
pub fn semigroup_spectral(f: &SpectralFn, s: f64) -> Result<SpectralFn> {
    check_time(s)?;
    Ok(f.map_coeffs(|k| (-s * k as f64).exp()))
}

/// `P_s f(x) = Σ_j w_j f(e^{-s}x + √(1 - e^{-2s}) y_j)` on `rule`.
pub fn mehler_average<F: RealFn + ?Sized>(
    f: &F,
    s: f64,
    x: f64,
    rule: &QuadratureRule,
) -> Result<f64> {
    check_time(s)?;
    let (rho, sigma) = mehler_coefficients(s);
    let mut acc = 0.0;
    for (&y, &w) in rule.nodes().iter().zip(rule.weights()) {
        let z = rho * x + sigma * y;
        let v = f.eval(z);
        if !v.is_finite() {
            return Err(Error::Evaluation { x: z, value: v });
        }
        acc += w * v;
    }
    Ok(acc)
}

/// The Mehler-quadrature semigroup at each of `points`, integrating in `y`
/// with the context's inner rule.
pub fn semigroup_quadrature<F: RealFn + ?Sized>(
    f: &F,
    s: f64,
    points: &[f64],
    ctx: &OuContext,
) -> Result<Vec<f64>> {
    points
        .iter()
        .map(|&x| mehler_average(f, s, x, ctx.inner_rule()))
        .collect()
}

/// Tensorised Mehler average on ℝ^d for `d ∈ {1, 2, 3}`.
pub fn semigroup_quadrature_nd<F>(f: F, s: f64, x: &[f64], rule: &QuadratureRule) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    check_time(s)?;
    let d = x.len();
    if !(1..=3).contains(&d) {
        return Err(Error::parameter(
            "x",
            format!("tensor quadrature supports dimensions 1 to 3, got {d}"),
        ));
    }
    let (rho, sigma) = mehler_coefficients(s);
    let n = rule.order();
    let mut index = vec![0usize; d];
    let mut z = vec![0.0; d];
    let mut acc = 0.0;
    loop {
        let mut w = 1.0;
        for a in 0..d {
            z[a] = rho * x[a] + sigma * rule.nodes()[index[a]];
            w *= rule.weights()[index[a]];
        }
        let v = f(&z);
        if !v.is_finite() {
            return Err(Error::Evaluation { x: z[0], value: v });
        }
        acc += w * v;

        let mut a = 0;
        loop {
            index[a] += 1;
            if index[a] < n {
                break;
            }
            index[a] = 0;
            a += 1;
            if a == d {
                return Ok(acc);
            }
        }
    }
}

/// Transition density of `P_s` with respect to Lebesgue measure in `y`:
/// `exp(-(ρx - y)² / (2(1 - ρ²))) / √(2π(1 - ρ²))`, `ρ = e^{-s}`.
pub fn mehler_density(s: f64, x: f64, y: f64) -> Result<f64> {
    if s == 0.0 {
        return Err(Error::SingularKernel { s });
    }
    check_time(s)?;
    let rho = (-s).exp();
    let var = -(-2.0 * s).exp_m1();
    let d = rho * x - y;
    Ok((-d * d / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt())
}

/// `L f`: coefficient `k` is multiplied by `-k`.
pub fn generator(f: &SpectralFn) -> SpectralFn {
    f.map_coeffs(|k| -(k as f64))
}

/// Product `f·g` re-analyzed on `rule` at degree `deg f + deg g`; exact when
/// `rule.order() > deg f + deg g`.
pub fn multiply(f: &SpectralFn, g: &SpectralFn, rule: &QuadratureRule) -> Result<SpectralFn> {
    let degree = f.degree() + g.degree();
    let values: Vec<f64> = rule
        .nodes()
        .iter()
        .map(|&x| f.eval(x) * g.eval(x))
        .collect();
    SpectralFn::analyze(&values, rule, degree)
}

/// `Γ(f, g) = ½(L(fg) - f Lg - g Lf)` as a spectral function.
pub fn carre_du_champ_bracket(
    f: &SpectralFn,
    g: &SpectralFn,
    rule: &QuadratureRule,
) -> Result<SpectralFn> {
    let fg = multiply(f, g, rule)?;
    let f_lg = multiply(f, &generator(g), rule)?;
    let g_lf = multiply(g, &generator(f), rule)?;
    Ok(generator(&fg)
        .add(&f_lg.scale(-1.0))
        .add(&g_lf.scale(-1.0))
        .scale(0.5))
}

/// Γ(f, g) at the nodes of `rule`.
///
/// Computed both from the bracket `½(L(fg) - f Lg - g Lf)` and as `f'g'`;
/// the two must agree on the node window. The gradient form is returned.
pub fn carre_du_champ(f: &SpectralFn, g: &SpectralFn, rule: &QuadratureRule) -> Result<Vec<f64>> {
    let bracket = carre_du_champ_bracket(f, g, rule)?;
    let (df, dg) = (f.differentiate(), g.differentiate());
    let gradient: Vec<f64> = rule
        .nodes()
        .iter()
        .map(|&x| df.eval(x) * dg.eval(x))
        .collect();

    for (&x, &grad) in rule.nodes().iter().zip(&gradient) {
        if x.abs() > NODE_WINDOW {
            continue;
        }
        let b = bracket.eval(x);
        let scale = 1f64.max(f.eval(x).abs() * g.eval(x).abs()).max(grad.abs());
        let discrepancy = (b - grad).abs();
        if discrepancy > CONSISTENCY_TOL * scale {
            return Err(Error::Consistency {
                check: "carre_du_champ",
                x,
                discrepancy,
            });
        }
    }
    Ok(gradient)
}

/// Γ₂(f) at the nodes of `rule`.
///
/// Computed both from `½(LΓ(f) - 2Γ(f, Lf))` and as `(f'')² + (f')²`; the
/// second form is returned. Requires `rule.order() > 2 deg f`.
pub fn gamma2(f: &SpectralFn, rule: &QuadratureRule) -> Result<Vec<f64>> {
    let lf = generator(f);
    let gamma_f = carre_du_champ_bracket(f, f, rule)?;
    let gamma_f_lf = carre_du_champ_bracket(f, &lf, rule)?;
    let bracket = generator(&gamma_f).add(&gamma_f_lf.scale(-2.0)).scale(0.5);

    let d1 = f.differentiate();
    let d2 = d1.differentiate();
    let hessian_form: Vec<f64> = rule
        .nodes()
        .iter()
        .map(|&x| {
            let (a, b) = (d2.eval(x), d1.eval(x));
            a * a + b * b
        })
        .collect();

    for (&x, &h) in rule.nodes().iter().zip(&hessian_form) {
        if x.abs() > NODE_WINDOW {
            continue;
        }
        let b = bracket.eval(x);
        let scale = 1f64
            .max(h.abs())
            .max(f.eval(x).powi(2))
            .max(lf.eval(x).abs() * f.eval(x).abs());
        let discrepancy = (b - h).abs();
        if discrepancy > CONSISTENCY_TOL * scale {
            return Err(Error::Consistency {
                check: "gamma2",
                x,
                discrepancy,
            });
        }
    }
    Ok(hessian_form)
}

/// `e^{-cs} P_s[√Γ(f)](x) - √Γ(P_s f)(x)` at the nodes of the context rule.
///
/// The left term uses the Mehler quadrature of `|f'|`, the right term the
/// spectral semigroup, so the two sides come from independent code paths.
pub fn gradient_bound_residual(
    f: &SpectralFn,
    s: f64,
    c: f64,
    ctx: &OuContext,
) -> Result<Vec<f64>> {
    if !(s > 0.0) {
        return Err(Error::parameter("s", format!("must be positive, got {s}")));
    }
    let df = f.differentiate();
    let abs_grad = |y: f64| df.eval(y).abs();
    let averaged = semigroup_quadrature(&abs_grad, s, ctx.nodes(), ctx)?;
    let flowed_grad = semigroup_spectral(f, s)?.differentiate();
    let decay = (-c * s).exp();
    Ok(ctx
        .nodes()
        .iter()
        .zip(averaged)
        .map(|(&x, avg)| decay * avg - flowed_grad.eval(x).abs())
        .collect())
}
