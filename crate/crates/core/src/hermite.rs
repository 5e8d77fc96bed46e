//! Gauss-Hermite quadrature against the standard Gaussian measure and the
//! orthonormal (probabilists') Hermite transform.
//!
//! Every Gaussian integral in the crate goes through [`QuadratureRule`]:
//!
//! ```text
//! ∫ f dγ ≈ Σ_j w_j f(x_j),     dγ(y) = e^{-y²/2} dy / √(2π)
//! ```
//!
//! Functions on ℝ are represented by [`SpectralFn`], the coefficients of `f`
//! in the basis `h_k = He_k / √(k!)`, which is orthonormal in `L²(γ)`.

use crate::error::{Error, Result};

/// Largest supported quadrature order.
pub const MAX_ORDER: usize = 512;

/// Nodes and weights of an `order`-point Gauss rule for the standard
/// Gaussian probability measure.
///
/// Nodes are strictly increasing and symmetric about zero; weights sum to one.
/// Weights of the outermost nodes underflow to zero for orders above ~370.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ_j w_j f(x_j)`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Quadrature of values already sampled at the nodes.
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.order());
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    /// Indices of the nodes with `|x| <= radius`.
    pub fn window(&self, radius: f64) -> Vec<usize> {
        (0..self.order())
            .filter(|&j| self.nodes[j].abs() <= radius)
            .collect()
    }
}

/// Builds the `order`-point Gauss-Hermite rule for `dγ`.
///
/// Nodes are the eigenvalues of the Jacobi matrix of the orthonormal
/// recurrence (zero diagonal, off-diagonal `√k`), isolated by Sturm-sequence
/// bisection and polished with one Newton step on `h_order`. Weights come from
/// the Christoffel formula `w = 1 / (n h_{n-1}(x)²)`.
pub fn gauss_hermite_rule(order: usize) -> Result<QuadratureRule> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::parameter(
            "order",
            format!("must lie in 1..={MAX_ORDER}, got {order}"),
        ));
    }
    let n = order;
    let offdiag_sq: Vec<f64> = (0..n).map(|k| k as f64).collect();
    // Gershgorin: |λ| <= 2√(n-1).
    let bound = 2.0 * ((n - 1) as f64).sqrt() + 1.0;

    let mut nodes = vec![0.0; n];
    let half = n / 2;
    for i in half..n {
        let mut lo = if i == half && n % 2 == 1 { -0.5 } else { 0.0 };
        let mut hi = bound;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sturm_count(&offdiag_sq, mid) > i {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let mut x = 0.5 * (lo + hi);
        if n % 2 == 1 && i == half {
            x = 0.0;
        } else {
            let (prev, last, _) = hermite_tail_scaled(n, x);
            let step = last / ((n as f64).sqrt() * prev);
            if step.is_finite() && step.abs() < 1e-8 * x.abs().max(1.0) {
                x -= step;
            }
        }
        nodes[i] = x;
    }
    for i in 0..half {
        nodes[i] = -nodes[n - 1 - i];
    }

    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            let (prev, _, log_scale) = hermite_tail_scaled(n, x);
            let log_w = -(n as f64).ln() - 2.0 * (prev.abs().ln() + log_scale);
            log_w.exp()
        })
        .collect();
    for i in 0..half {
        let w = 0.5 * (weights[i] + weights[n - 1 - i]);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);

    Ok(QuadratureRule { nodes, weights })
}

/// Number of Jacobi-matrix eigenvalues strictly below `x`.
fn sturm_count(offdiag_sq: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for (k, &b2) in offdiag_sq.iter().enumerate() {
        d = if k == 0 { -x } else { -x - b2 / d };
        if d == 0.0 {
            d = -f64::EPSILON * (x.abs() + 1.0);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// `(h_{n-1}(x), h_n(x), log_scale)` with both values divided by
/// `exp(log_scale)` so the recurrence never overflows.
fn hermite_tail_scaled(n: usize, x: f64) -> (f64, f64, f64) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut log_scale = 0.0;
    for k in 0..n {
        let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > 1e150 {
            prev *= 1e-150;
            cur *= 1e-150;
            log_scale += 150.0 * std::f64::consts::LN_10;
        }
    }
    (prev, cur, log_scale)
}

/// Fills `out[k] = h_k(x)` for `k < out.len()`.
pub fn hermite_values_into(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for k in 1..out.len().saturating_sub(1) {
        out[k + 1] = (x * out[k] - (k as f64).sqrt() * out[k - 1]) / ((k + 1) as f64).sqrt();
    }
}

/// `h_k(x)` for `k = 0..=degree`.
pub fn hermite_values(x: f64, degree: usize) -> Vec<f64> {
    let mut out = vec![0.0; degree + 1];
    hermite_values_into(x, &mut out);
    out
}

/// A function on ℝ given by its orthonormal Hermite coefficients,
/// `f = Σ_k coeffs[k] h_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFn {
    coeffs: Vec<f64>,
}

impl SpectralFn {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let coeffs = if coeffs.is_empty() { vec![0.0] } else { coeffs };
        SpectralFn { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        SpectralFn { coeffs: vec![c] }
    }

    /// The single basis function `h_k`.
    pub fn basis(k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = 1.0;
        SpectralFn { coeffs }
    }

    /// Projects node samples onto `h_0..=h_degree`:
    /// `coeffs[k] = Σ_j w_j values[j] h_k(x_j)`.
    ///
    /// Exact for polynomial samples of degree `d` whenever
    /// `d + degree <= 2·order - 1`; `degree >= order` is rejected because the
    /// discrete inner product no longer separates the basis.
    pub fn analyze(values: &[f64], rule: &QuadratureRule, degree: usize) -> Result<Self> {
        if degree >= rule.order() {
            return Err(Error::parameter(
                "degree",
                format!(
                    "degree {degree} aliases on a rule of order {}",
                    rule.order()
                ),
            ));
        }
        if values.len() != rule.order() {
            return Err(Error::parameter(
                "values",
                format!(
                    "expected {} node values, got {}",
                    rule.order(),
                    values.len()
                ),
            ));
        }
        let mut coeffs = vec![0.0; degree + 1];
        let mut h = vec![0.0; degree + 1];
        for ((&x, &w), &v) in rule.nodes().iter().zip(rule.weights()).zip(values) {
            if w == 0.0 {
                continue;
            }
            hermite_values_into(x, &mut h);
            let wv = w * v;
            for (c, hk) in coeffs.iter_mut().zip(&h) {
                *c += wv * hk;
            }
        }
        Ok(SpectralFn { coeffs })
    }

    /// Projects `f` sampled at the nodes of `rule`.
    pub fn from_fn<F: Fn(f64) -> f64>(f: F, rule: &QuadratureRule, degree: usize) -> Result<Self> {
        SpectralFn::analyze(&rule.sample(f), rule, degree)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Highest index with a nonzero coefficient (0 for the zero function).
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Evaluates the expansion at `x` by the forward three-term recurrence.
    pub fn eval(&self, x: f64) -> f64 {
        let mut prev = 0.0;
        let mut cur = 1.0;
        let mut acc = self.coeffs[0];
        for (k, &c) in self.coeffs.iter().enumerate().skip(1) {
            let km1 = (k - 1) as f64;
            let next = (x * cur - km1.sqrt() * prev) / (k as f64).sqrt();
            prev = cur;
            cur = next;
            acc += c * cur;
        }
        acc
    }

    pub fn synthesize(&self, points: &[f64]) -> Vec<f64> {
        points.iter().map(|&x| self.eval(x)).collect()
    }

    /// `h_k' = √k h_{k-1}`, so `(f')_{k-1} = √k f_k`.
    pub fn differentiate(&self) -> SpectralFn {
        if self.coeffs.len() == 1 {
            return SpectralFn::constant(0.0);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| (k as f64).sqrt() * c)
            .collect();
        SpectralFn { coeffs }
    }

    /// Multiplies coefficient `k` by `factor(k)`.
    pub fn map_coeffs<F: Fn(usize) -> f64>(&self, factor: F) -> SpectralFn {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| c * factor(k))
            .collect();
        SpectralFn { coeffs }
    }

    pub fn scale(&self, a: f64) -> SpectralFn {
        self.map_coeffs(|_| a)
    }

    pub fn add(&self, other: &SpectralFn) -> SpectralFn {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| {
                self.coeffs.get(k).copied().unwrap_or(0.0)
                    + other.coeffs.get(k).copied().unwrap_or(0.0)
            })
            .collect();
        SpectralFn { coeffs }
    }

    /// Zeroes coefficients below `rel_tol · max_k |coeffs[k]|`. Re-analysis
    /// of exact polynomial samples leaves rounding noise in the high
    /// coefficients, which grows like `h_k(z)` when evaluated far from the nodes.
    pub fn chop(&self, rel_tol: f64) -> SpectralFn {
        let peak = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let cut = rel_tol * peak;
        let coeffs = self
            .coeffs
            .iter()
            .map(|&c| if c.abs() <= cut { 0.0 } else { c })
            .collect();
        SpectralFn { coeffs }
    }

    /// `Σ_k coeffs[k]²`, the squared `L²(γ)` norm.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Mean against `γ`.
    pub fn mean(&self) -> f64 {
        self.coeffs[0]
    }
}

/// `L^p(γ)` norm of node samples: `(Σ w_j f_j^p)^{1/p}` for `p != 0`, the
/// geometric mean `exp(Σ w_j log f_j)` for `p = 0`.
///
/// For `p >= 1` the absolute value is used. For `0 < p < 1` values must be
/// nonnegative, for `p <= 0` strictly positive.
pub fn lp_norm_gamma(values: &[f64], rule: &QuadratureRule, p: f64) -> Result<f64> {
    if values.len() != rule.order() {
        return Err(Error::parameter(
            "values",
            format!(
                "expected {} node values, got {}",
                rule.order(),
                values.len()
            ),
        ));
    }
    weighted_lp_norm(values, rule.weights(), Some(rule.nodes()), p)
}

/// Shared by the Gaussian and the uniform (hypercube) norms. `points` only
/// serves to label domain errors.
pub(crate) fn weighted_lp_norm(
    values: &[f64],
    weights: &[f64],
    points: Option<&[f64]>,
    p: f64,
) -> Result<f64> {
    if !p.is_finite() {
        return Err(Error::parameter(
            "p",
            format!("exponent must be finite, got {p}"),
        ));
    }
    let label = |j: usize| match points {
        Some(xs) => format!("node {j} (x = {})", xs[j]),
        None => format!("point {j}"),
    };
    for (j, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::domain(label(j), format!("non-finite value {v}")));
        }
        if p <= 0.0 && v <= 0.0 {
            return Err(Error::domain(
                label(j),
                format!("value {v} is not strictly positive, required for p = {p}"),
            ));
        }
        if p > 0.0 && p < 1.0 && v < 0.0 {
            return Err(Error::domain(
                label(j),
                format!("value {v} is negative, required nonnegative for p = {p}"),
            ));
        }
    }
    if p == 0.0 {
        let mean_log: f64 = values.iter().zip(weights).map(|(v, w)| w * v.ln()).sum();
        return Ok(mean_log.exp());
    }
    let moment: f64 = values
        .iter()
        .zip(weights)
        .map(|(v, w)| w * v.abs().powf(p))
        .sum();
    Ok(moment.powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn double_factorial(n: i64) -> f64 {
        (1..=n).rev().step_by(2).map(|k| k as f64).product()
    }

    #[test]
    fn order_one_is_the_mean() {
        let rule = gauss_hermite_rule(1).unwrap();
        assert_eq!(rule.nodes(), &[0.0]);
        assert_eq!(rule.weights(), &[1.0]);
    }

    #[test]
    fn order_two_matches_moments() {
        let rule = gauss_hermite_rule(2).unwrap();
        assert_relative_eq!(rule.nodes()[0], -1.0, epsilon = 1e-15);
        assert_relative_eq!(rule.nodes()[1], 1.0, epsilon = 1e-15);
        assert_relative_eq!(rule.weights()[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(rule.weights()[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn sixth_moment_against_dense_integration() {
        // Trapezoid on [-40, 40] with the Gaussian density.
        let n = 400_000;
        let h = 80.0 / n as f64;
        let dense: f64 = (0..=n)
            .map(|i| {
                let y = -40.0 + i as f64 * h;
                let end = if i == 0 || i == n { 0.5 } else { 1.0 };
                end * y.powi(6) * (-0.5 * y * y).exp()
            })
            .sum::<f64>()
            * h
            / (2.0 * std::f64::consts::PI).sqrt();
        assert_relative_eq!(dense, 15.0, max_relative = 1e-10);

        let rule = gauss_hermite_rule(16).unwrap();
        let quad = rule.integrate(|x| x.powi(6));
        assert_relative_eq!(quad, 15.0, max_relative = 1e-12);
        assert_relative_eq!(quad, double_factorial(5), max_relative = 1e-12);
    }

    #[test]
    fn moment_exactness_up_to_two_order_minus_one() {
        for order in [3, 8, 20, 40] {
            let rule = gauss_hermite_rule(order).unwrap();
            assert!((rule.weights().iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for k in 0..2 * order {
                let quad = rule.integrate(|x| x.powi(k as i32));
                if k % 2 == 1 {
                    let scale = rule.integrate(|x| x.abs().powi(k as i32));
                    assert!(quad.abs() <= 1e-12 * scale.max(1.0), "order {order} k {k}");
                } else {
                    let exact = double_factorial(k as i64 - 1);
                    assert_relative_eq!(quad, exact, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn nodes_are_sorted_and_symmetric() {
        for order in [1, 2, 5, 64, 129, 300, MAX_ORDER] {
            let rule = gauss_hermite_rule(order).unwrap();
            let x = rule.nodes();
            assert!(x.windows(2).all(|w| w[0] < w[1]), "order {order}");
            for j in 0..order {
                assert_eq!(x[j], -x[order - 1 - j]);
            }
            assert!(rule.weights().iter().all(|&w| w >= 0.0));
            assert!((rule.weights().iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn large_order_low_moments() {
        let rule = gauss_hermite_rule(MAX_ORDER).unwrap();
        for m in 1..=10 {
            let quad = rule.integrate(|x| x.powi(2 * m));
            assert_relative_eq!(
                quad,
                double_factorial(2 * m as i64 - 1),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn order_out_of_range() {
        assert!(matches!(
            gauss_hermite_rule(0),
            Err(Error::Parameter { .. })
        ));
        assert!(matches!(
            gauss_hermite_rule(MAX_ORDER + 1),
            Err(Error::Parameter { .. })
        ));
    }

    #[test]
    fn analyze_examples() {
        let rule = gauss_hermite_rule(12).unwrap();
        let one = SpectralFn::from_fn(|_| 1.0, &rule, 6).unwrap();
        assert_relative_eq!(one.coeffs()[0], 1.0, epsilon = 1e-14);
        assert!(one.coeffs()[1..].iter().all(|c| c.abs() < 1e-13));

        let sq = SpectralFn::from_fn(|x| x * x, &rule, 6).unwrap();
        let expected = [1.0, 0.0, 2f64.sqrt(), 0.0, 0.0, 0.0, 0.0];
        for (c, e) in sq.coeffs().iter().zip(expected) {
            assert!((c - e).abs() < 1e-13);
        }

        let cube = SpectralFn::from_fn(|x| x * x * x, &rule, 6).unwrap();
        let expected = [0.0, 3.0, 0.0, 6f64.sqrt(), 0.0, 0.0, 0.0];
        for (c, e) in cube.coeffs().iter().zip(expected) {
            assert!((c - e).abs() < 1e-13);
        }
    }

    #[test]
    fn analyze_rejects_aliasing_degree() {
        let rule = gauss_hermite_rule(8).unwrap();
        let values = rule.sample(|x| x);
        assert!(matches!(
            SpectralFn::analyze(&values, &rule, 8),
            Err(Error::Parameter { name: "degree", .. })
        ));
        assert!(SpectralFn::analyze(&values, &rule, 7).is_ok());
    }

    #[test]
    fn synthesize_examples() {
        assert_eq!(SpectralFn::constant(1.0).synthesize(&[3.7]), vec![1.0]);
        assert_eq!(SpectralFn::new(vec![0.0, 1.0]).eval(2.0), 2.0);
        let f = SpectralFn::new(vec![0.0, 0.0, 2f64.sqrt()]);
        assert_relative_eq!(f.eval(2.0), 3.0, epsilon = 1e-14);
    }

    #[test]
    fn degree_ignores_trailing_zeros() {
        assert_eq!(SpectralFn::new(vec![1.0, 2.0, 0.0, 0.0]).degree(), 1);
        assert_eq!(SpectralFn::constant(0.0).degree(), 0);
    }

    fn central_difference(f: &SpectralFn, x: f64) -> f64 {
        let h = 1e-5;
        (f.eval(x + h) - f.eval(x - h)) / (2.0 * h)
    }

    #[test]
    fn differentiate_examples() {
        let d = SpectralFn::basis(1).differentiate();
        assert_eq!(d.coeffs(), &[1.0]);

        let sq = SpectralFn::new(vec![1.0, 0.0, 2f64.sqrt()]);
        let d = sq.differentiate();
        assert_relative_eq!(d.coeffs()[0], 0.0);
        assert_relative_eq!(d.coeffs()[1], 2.0, epsilon = 1e-15);
        for x in [-2.1, -0.7, 0.0, 0.4, 1.9, 3.3] {
            assert!((d.eval(x) - central_difference(&sq, x)).abs() < 1e-8);
        }

        let h5 = SpectralFn::basis(5);
        let d = h5.differentiate();
        let expected = SpectralFn::basis(4).scale(5f64.sqrt());
        assert_eq!(d.coeffs(), expected.coeffs());
        for x in [-1.5, -0.3, 0.8, 2.2] {
            assert!((d.eval(x) - central_difference(&h5, x)).abs() < 1e-8);
        }
    }

    #[test]
    fn lp_norm_examples() {
        let rule = gauss_hermite_rule(60).unwrap();
        let three = vec![3.0; 60];
        assert_relative_eq!(
            lp_norm_gamma(&three, &rule, 7.0).unwrap(),
            3.0,
            max_relative = 1e-14
        );

        let a: f64 = 0.5;
        let f = rule.sample(|x| (a * x).exp());
        assert_relative_eq!(
            lp_norm_gamma(&f, &rule, 2.0).unwrap(),
            (0.25f64).exp(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            lp_norm_gamma(&f, &rule, 0.0).unwrap(),
            1.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn lp_norm_names_offending_node() {
        let rule = gauss_hermite_rule(4).unwrap();
        let values = vec![1.0, 2.0, 0.0, 1.0];
        let err = lp_norm_gamma(&values, &rule, 0.0).unwrap_err();
        match err {
            Error::Domain { location, .. } => assert!(location.starts_with("node 2")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(lp_norm_gamma(&values, &rule, -1.0).is_err());
        assert!(lp_norm_gamma(&values, &rule, 2.0).is_ok());
    }
}
