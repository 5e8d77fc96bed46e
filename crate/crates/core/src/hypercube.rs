//! Fourier–Walsh analysis on `{-1, 1}^n` under the uniform measure.
//!
//! Point `i` of the cube has `x_k = -1` when bit `k` of `i` is set, and
//! coefficient `S` is stored at the index whose set bits are the members of `S`.

use crate::error::{Error, Result};
use crate::flow::Regime;
use crate::hermite::weighted_lp_norm;

pub const MAX_DIM: usize = 12;

/// Slack for the Boolean inequalities; the checks are exhaustive, so only
/// rounding is tolerated.
pub const BOOLEAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct WalshFn {
    n: usize,
    coeffs: Vec<f64>,
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::parameter(
            "n",
            format!("dimension must lie in 1..={MAX_DIM}, got {n}"),
        ));
    }
    Ok(())
}

/// Unnormalized in-place Walsh–Hadamard transform.
fn fwht(a: &mut [f64]) {
    let mut h = 1;
    while h < a.len() {
        for block in a.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*x, *y);
                *x = u + v;
                *y = u - v;
            }
        }
        h *= 2;
    }
}

/// Coordinate `k` of cube point `point`.
pub fn coordinate(point: usize, k: usize) -> f64 {
    if point >> k & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

impl WalshFn {
    pub fn new(n: usize, coeffs: Vec<f64>) -> Result<Self> {
        check_dim(n)?;
        if coeffs.len() != 1 << n {
            return Err(Error::parameter(
                "coeffs",
                format!(
                    "expected {} coefficients, got {}",
                    1usize << n,
                    coeffs.len()
                ),
            ));
        }
        Ok(WalshFn { n, coeffs })
    }

    pub fn from_fn<F: Fn(&[f64]) -> f64>(n: usize, f: F) -> Result<Self> {
        check_dim(n)?;
        let values: Vec<f64> = (0..1usize << n)
            .map(|i| {
                let x: Vec<f64> = (0..n).map(|k| coordinate(i, k)).collect();
                f(&x)
            })
            .collect();
        walsh_analyze(&values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, mask: usize) -> f64 {
        self.coeffs[mask]
    }

    /// Values at the `2^n` points.
    pub fn synthesize(&self) -> Vec<f64> {
        let mut v = self.coeffs.clone();
        fwht(&mut v);
        v
    }

    /// `Σ_S f̂(S)²`
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0]
    }
}

/// Fourier–Walsh coefficients `f̂(S) = E[f·χ_S]` of the `2^n` values.
pub fn walsh_analyze(values: &[f64]) -> Result<WalshFn> {
    let len = values.len();
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::parameter(
            "values",
            format!("length must be a power of two of at least 2, got {len}"),
        ));
    }
    let n = len.trailing_zeros() as usize;
    check_dim(n)?;
    let mut coeffs = values.to_vec();
    fwht(&mut coeffs);
    let scale = 1.0 / len as f64;
    coeffs.iter_mut().for_each(|c| *c *= scale);
    Ok(WalshFn { n, coeffs })
}

/// `T_ρ`: scales level `|S|` by `ρ^{|S|}`.
pub fn noise_operator(f: &WalshFn, rho: f64) -> Result<WalshFn> {
    if !(rho.abs() <= 1.0) {
        return Err(Error::parameter(
            "rho",
            format!("correlation must lie in [-1, 1], got {rho}"),
        ));
    }
    let coeffs = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(mask, c)| c * rho.powi(mask.count_ones() as i32))
        .collect();
    Ok(WalshFn { n: f.n, coeffs })
}

/// Uniform-measure `L^p` norm of cube values.
pub fn uniform_lp_norm(values: &[f64], p: f64) -> Result<f64> {
    let w = vec![1.0 / values.len() as f64; values.len()];
    weighted_lp_norm(values, &w, None, p)
}

/// `ρ = e^{-s}` at the critical time: `√((p-1)/(q-1))`, which is
/// `√((1-p)/(1-q))` in the reverse regimes.
pub fn critical_rho(p: f64, q: f64) -> Result<f64> {
    let regime = Regime::classify(p, q).ok_or_else(|| {
        Error::parameter("p,q", format!("({p}, {q}) lies in no admissible regime"))
    })?;
    let ratio = if regime.is_forward() {
        (p - 1.0) / (q - 1.0)
    } else {
        (1.0 - p) / (1.0 - q)
    };
    Ok(ratio.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BooleanReport {
    pub p: f64,
    pub q: f64,
    pub rho: f64,
    pub regime: Regime,
    /// `‖T_ρ f‖_q`
    pub lhs: f64,
    /// `‖f‖_p`
    pub rhs: f64,
    pub ratio: f64,
}

impl BooleanReport {
    /// `ratio <= 1` forward, `ratio >= 1` reverse, within [`BOOLEAN_TOL`].
    pub fn holds(&self) -> bool {
        if self.regime.is_forward() {
            self.ratio <= 1.0 + BOOLEAN_TOL
        } else {
            self.ratio >= 1.0 - BOOLEAN_TOL
        }
    }
}

/// `‖T_ρ f‖_q / ‖f‖_p` under the uniform measure, exhaustively.
pub fn boolean_hyper_check(f: &WalshFn, p: f64, q: f64, rho: f64) -> Result<BooleanReport> {
    let regime = Regime::classify(p, q).ok_or_else(|| {
        Error::parameter("p,q", format!("({p}, {q}) lies in no admissible regime"))
    })?;
    let lhs = uniform_lp_norm(&noise_operator(f, rho)?.synthesize(), q)?;
    let rhs = uniform_lp_norm(&f.synthesize(), p)?;
    Ok(BooleanReport {
        p,
        q,
        rho,
        regime,
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}

/// `ε = k/100` for `k = 1..=99`.
pub fn epsilon_grid() -> Vec<f64> {
    (1..100).map(|k| k as f64 / 100.0).collect()
}

/// `f = 1 + εx` on one bit.
pub fn two_point(epsilon: f64) -> WalshFn {
    WalshFn {
        n: 1,
        coeffs: vec![1.0, epsilon],
    }
}

/// Reports for `1 + εx` over [`epsilon_grid`] at a fixed `ρ`.
pub fn two_point_sweep(p: f64, q: f64, rho: f64) -> Result<Vec<(f64, BooleanReport)>> {
    epsilon_grid()
        .into_iter()
        .map(|eps| boolean_hyper_check(&two_point(eps), p, q, rho).map(|r| (eps, r)))
        .collect()
}

/// Largest `ρ` on `rho_grid` (ascending) at which every two-point function
/// of the sweep passes; `None` if even the first fails.
pub fn empirical_critical_rho(p: f64, q: f64, rho_grid: &[f64]) -> Result<Option<f64>> {
    let mut best = None;
    for &rho in rho_grid {
        let all = two_point_sweep(p, q, rho)?.iter().all(|(_, r)| r.holds());
        if !all {
            break;
        }
        best = Some(rho);
    }
    Ok(best)
}

/// `F(x) = Π_k g(x_k)` for `g` on one bit.
pub fn tensor_power(g: &WalshFn, n: usize) -> Result<WalshFn> {
    if g.n != 1 {
        return Err(Error::parameter("g", "tensor factor must live on one bit"));
    }
    check_dim(n)?;
    let gv = g.synthesize();
    let values: Vec<f64> = (0..1usize << n)
        .map(|i| (0..n).map(|k| gv[i >> k & 1]).product())
        .collect();
    walsh_analyze(&values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::critical_time;
    use approx::assert_relative_eq;

    #[test]
    fn analyze_examples() {
        let one = walsh_analyze(&[1.0; 8]).unwrap();
        assert_eq!(one.coeffs(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let x = WalshFn::from_fn(1, |x| x[0]).unwrap();
        assert_eq!(x.coeffs(), &[0.0, 1.0]);
        let x1x2 = WalshFn::from_fn(2, |x| x[0] * x[1]).unwrap();
        assert_eq!(x1x2.coeffs(), &[0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn bad_lengths() {
        assert!(walsh_analyze(&[1.0; 6]).is_err());
        assert!(walsh_analyze(&[1.0]).is_err());
        assert!(walsh_analyze(&vec![1.0; 1 << 13]).is_err());
        assert!(WalshFn::new(2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn noise_examples() {
        let f = WalshFn::from_fn(3, |x| 1.0 + x[0] - 2.0 * x[1] * x[2]).unwrap();
        assert_eq!(noise_operator(&f, 1.0).unwrap(), f);
        let flat = noise_operator(&f, 0.0).unwrap().synthesize();
        assert!(flat.iter().all(|v| (v - 1.0).abs() < 1e-15));
        let g = noise_operator(&two_point(0.3), 0.5).unwrap();
        assert_relative_eq!(g.coeff(1), 0.15, epsilon = 1e-16);
        assert!(noise_operator(&f, 1.5).is_err());
    }

    #[test]
    fn critical_rho_examples() {
        assert_relative_eq!(
            critical_rho(2.0, 4.0).unwrap(),
            (1.0f64 / 3.0).sqrt(),
            epsilon = 1e-15
        );
        assert_relative_eq!(critical_rho(2.0, 4.0).unwrap(), 0.57735, epsilon = 1e-5);
        assert_relative_eq!(
            critical_rho(0.5, 0.25).unwrap(),
            (2.0f64 / 3.0).sqrt(),
            epsilon = 1e-15
        );
        assert_relative_eq!(
            critical_rho(1.0 + 1e-6, 1.0 + 1.000001e-6).unwrap(),
            1.0,
            epsilon = 1e-6
        );
        assert_relative_eq!(
            critical_rho(1.0 - 1e-6, 1.0 - 1.000001e-6).unwrap(),
            1.0,
            epsilon = 1e-6
        );
        assert!(critical_rho(4.0, 2.0).is_err());
        for (p, q) in [(2.0, 4.0), (1.5, 3.0), (-1.0, -2.0), (0.5, -1.0)] {
            let s = critical_time(p, q, 1.0).unwrap();
            assert_relative_eq!(
                critical_rho(p, q).unwrap(),
                (-s).exp(),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn constant_ratio_is_one() {
        let one = walsh_analyze(&[1.0; 4]).unwrap();
        for (p, q) in [(2.0, 4.0), (0.5, 0.25), (0.5, 0.0), (-1.0, -2.0)] {
            for rho in [0.0, 0.3, 1.0] {
                let r = boolean_hyper_check(&one, p, q, rho).unwrap();
                assert_relative_eq!(r.ratio, 1.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn reverse_needs_positive_values() {
        let f = WalshFn::from_fn(1, |x| x[0]).unwrap();
        assert!(matches!(
            boolean_hyper_check(&f, 0.5, 0.25, 0.5),
            Err(Error::Domain { .. })
        ));
    }
}
