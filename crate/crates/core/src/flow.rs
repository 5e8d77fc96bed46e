//! Supersolution closure and the monotone quantity along the OU heat flow.
//!
//! For exponents `(p, q)` in one of the admissible regimes and
//! `s = log((q-1)/(p-1)) / (2c)`, the transform
//!
//! ```text
//! ũ = P_s[u^{1/p}]^q      (p, q != 0)
//! ũ = P_s[e^u]^q          (p = 0)
//! ũ = log P_s[u^{1/p}]    (q = 0)
//! ```
//!
//! maps super- or subsolutions of `∂_t u = Lu` to super- or subsolutions
//! according to the regime. Integrating `ũ` against `γ` gives the monotone
//! quantity `Q(t)`, whose limits at `t → 0` and `t → ∞` are the two sides of
//! the (forward or reverse) hypercontractivity inequality.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function::RealFn;
use crate::hermite::{lp_norm_gamma, QuadratureRule, SpectralFn};
use crate::ou::{
    generator, mehler_average, mehler_coefficients, semigroup_quadrature, semigroup_spectral,
    OuContext, NODE_WINDOW,
};

/// Values below this are treated as nonpositive.
pub const POSITIVITY_FLOOR: f64 = 1e-300;

/// Absolute floor of the residual sign tolerance.
pub const RESIDUAL_TOL_FLOOR: f64 = 1e-6;

/// Multiplier of the discretization estimate `h₋h₊ max|∂_ttt u|`.
pub const DISCRETIZATION_SAFETY: f64 = 4.0;

/// Relative cut applied to re-analyzed rows before off-node evaluation.
const CHOP_TOL: f64 = 1e-13;

/// Default time window of the Q-curve batteries.
pub const T_MIN: f64 = 1e-3;
pub const T_MAX: f64 = 12.0;

/// Time endpoints used to approximate the limits of `Q`.
pub const ENDPOINT_T_MIN: f64 = 1e-4;
pub const ENDPOINT_T_MAX: f64 = 12.0;
pub const ENDPOINT_REL_TOL: f64 = 1e-3;

/// Tolerance of the hypercontractivity ratio checks.
pub const RATIO_TOL: f64 = 1e-9;

/// The four exponent ranges for which the closure property holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `1 < p < q < ∞`
    Forward,
    /// `-∞ < q < p < 0`
    NegativeReverse,
    /// `0 <= q < p < 1`
    SubunitReverse,
    /// `-∞ < q < 0 <= p < 1`
    MixedReverse,
}

/// Sign of `∂_t u - Lu`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Solution {
    /// `∂_t u >= Lu`
    Super,
    /// `∂_t u <= Lu`
    Sub,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Nondecreasing,
    Nonincreasing,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Nondecreasing => 1.0,
            Direction::Nonincreasing => -1.0,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Direction::Nondecreasing => "nondecreasing",
            Direction::Nonincreasing => "nonincreasing",
        }
    }
}

impl Regime {
    pub fn classify(p: f64, q: f64) -> Option<Regime> {
        if !(p.is_finite() && q.is_finite()) {
            return None;
        }
        if 1.0 < p && p < q {
            Some(Regime::Forward)
        } else if q < p && p < 0.0 {
            Some(Regime::NegativeReverse)
        } else if 0.0 <= q && q < p && p < 1.0 {
            Some(Regime::SubunitReverse)
        } else if q < 0.0 && 0.0 <= p && p < 1.0 {
            Some(Regime::MixedReverse)
        } else {
            None
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Regime::Forward => "forward",
            Regime::NegativeReverse => "negative_reverse",
            Regime::SubunitReverse => "subunit_reverse",
            Regime::MixedReverse => "mixed_reverse",
        }
    }

    pub fn is_forward(self) -> bool {
        self == Regime::Forward
    }

    /// The sign the input flow must have.
    pub fn hypothesis(self) -> Solution {
        match self {
            Regime::Forward | Regime::NegativeReverse => Solution::Super,
            Regime::SubunitReverse | Regime::MixedReverse => Solution::Sub,
        }
    }

    /// The sign transported to `ũ`.
    pub fn conclusion(self) -> Solution {
        match self {
            Regime::Forward | Regime::NegativeReverse | Regime::MixedReverse => Solution::Super,
            Regime::SubunitReverse => Solution::Sub,
        }
    }

    /// Direction of `Q`. `∫ Lũ dγ = 0`, so `∫ ũ dγ` inherits the conclusion
    /// sign; the outer power `1/q` flips it when `q < 0`.
    pub fn direction(self) -> Direction {
        match self {
            Regime::Forward => Direction::Nondecreasing,
            _ => Direction::Nonincreasing,
        }
    }
}

/// `s = log((q-1)/(p-1)) / (2c)`.
pub fn critical_time(p: f64, q: f64, c: f64) -> Result<f64> {
    if Regime::classify(p, q).is_none() {
        return Err(Error::parameter(
            "p,q",
            format!("({p}, {q}) lies in none of the admissible regimes"),
        ));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::parameter(
            "c",
            format!("curvature must be positive, got {c}"),
        ));
    }
    // (q-1)/(p-1) = 1 + (q-p)/(p-1); log1p keeps q → p accurate.
    let excess = (q - p) / (p - 1.0);
    if !(excess > 0.0) {
        return Err(Error::parameter(
            "p,q",
            format!("(q-1)/(p-1) = {} is not above 1", 1.0 + excess),
        ));
    }
    Ok(excess.ln_1p() / (2.0 * c))
}

/// Exponents with curvature and the derived critical time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentPair {
    p: f64,
    q: f64,
    curvature: f64,
    regime: Regime,
    critical_time: f64,
}

impl ExponentPair {
    /// Curvature 1, the Ornstein-Uhlenbeck value.
    pub fn new(p: f64, q: f64) -> Result<Self> {
        ExponentPair::with_curvature(p, q, 1.0)
    }

    pub fn with_curvature(p: f64, q: f64, curvature: f64) -> Result<Self> {
        let critical_time = critical_time(p, q, curvature)?;
        let regime = Regime::classify(p, q).expect("classified by critical_time");
        Ok(ExponentPair {
            p,
            q,
            curvature,
            regime,
            critical_time,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn curvature(&self) -> f64 {
        self.curvature
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn critical_time(&self) -> f64 {
        self.critical_time
    }

    /// Initial datum of the flow driving `Q`: `f^p`, or `f` itself when
    /// `p = 0` (the transform exponentiates).
    pub fn initial_datum(&self, f_value: f64) -> f64 {
        if self.p == 0.0 {
            f_value
        } else {
            pow(f_value, self.p)
        }
    }
}

/// `x^e` with the integer and square-root exponents of the batteries taken
/// on faster paths.
#[inline]
pub(crate) fn pow(x: f64, e: f64) -> f64 {
    if e == 0.5 {
        x.sqrt()
    } else if e == e.trunc() && e.abs() <= 16.0 {
        x.powi(e as i32)
    } else {
        x.powf(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ExactHeatFlow,
    External,
}

/// Samples of a positive function `u(t, x)` on a time grid × quadrature nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
    rule: QuadratureRule,
    provenance: Provenance,
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::parameter("times", "time grid is empty"));
    }
    if !times.iter().all(|&t| t > 0.0 && t.is_finite()) {
        return Err(Error::parameter(
            "times",
            "times must be positive and finite",
        ));
    }
    if !times.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::parameter(
            "times",
            "times must be strictly increasing",
        ));
    }
    Ok(())
}

fn check_positive_row(row: &[f64], rule: &QuadratureRule, time: f64) -> Result<()> {
    for (&x, &v) in rule.nodes().iter().zip(row) {
        if !(v >= POSITIVITY_FLOOR) || !v.is_finite() {
            return Err(Error::domain(
                format!("t = {time}, x = {x}"),
                format!("flow value {v} is not strictly positive"),
            ));
        }
    }
    Ok(())
}

impl FlowState {
    /// Wraps externally produced samples; rows are indexed by time.
    pub fn external(times: Vec<f64>, values: Vec<Vec<f64>>, rule: QuadratureRule) -> Result<Self> {
        check_times(&times)?;
        if values.len() != times.len() {
            return Err(Error::parameter(
                "values",
                format!("{} rows for {} times", values.len(), times.len()),
            ));
        }
        for (row, &t) in values.iter().zip(&times) {
            if row.len() != rule.order() {
                return Err(Error::parameter(
                    "values",
                    format!(
                        "row has {} entries, rule has {} nodes",
                        row.len(),
                        rule.order()
                    ),
                ));
            }
            check_positive_row(row, &rule, t)?;
        }
        Ok(FlowState {
            times,
            values,
            rule,
            provenance: Provenance::External,
        })
    }

    /// Adds the ramp `epsilon·t`. Nonnegative ramps turn a solution into a
    /// supersolution, negative ones into a subsolution.
    pub fn with_ramp(&self, epsilon: f64) -> Result<FlowState> {
        let values = self
            .values
            .iter()
            .zip(&self.times)
            .map(|(row, &t)| row.iter().map(|v| v + epsilon * t).collect())
            .collect();
        FlowState::external(self.times.clone(), values, self.rule.clone())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn row(&self, index: usize) -> &[f64] {
        &self.values[index]
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }
}

/// Exact OU heat flow `u(t) = P_t f` sampled at the nodes of `rule`.
pub fn heat_flow(
    f_initial: &SpectralFn,
    times: &[f64],
    rule: &QuadratureRule,
) -> Result<FlowState> {
    check_times(times)?;
    check_positive_row(&f_initial.synthesize(rule.nodes()), rule, 0.0)?;
    let values = times
        .iter()
        .map(|&t| {
            let row = semigroup_spectral(f_initial, t)?.synthesize(rule.nodes());
            check_positive_row(&row, rule, t)?;
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FlowState {
        times: times.to_vec(),
        values,
        rule: rule.clone(),
        provenance: Provenance::ExactHeatFlow,
    })
}

/// Second-order weights for `u'(t_i)` from `u_{i-1}, u_i, u_{i+1}` with
/// spacings `h₋ = t_i - t_{i-1}` and `h₊ = t_{i+1} - t_i`.
pub fn central_difference_weights(h_minus: f64, h_plus: f64) -> [f64; 3] {
    let sum = h_minus + h_plus;
    [
        -h_plus / (h_minus * sum),
        (h_plus - h_minus) / (h_minus * h_plus),
        h_minus / (h_plus * sum),
    ]
}

/// `∂_t v - Lv` at the nodes for time index `index` of arbitrary rows
/// (not necessarily positive); `L` acts on the re-analysis at `degree`.
fn residual_rows(
    times: &[f64],
    rows: &[Vec<f64>],
    rule: &QuadratureRule,
    degree: usize,
    index: usize,
) -> Result<Vec<f64>> {
    if index == 0 || index + 1 >= times.len() {
        return Err(Error::parameter(
            "index",
            format!(
                "central differences need an interior index in 1..={}, got {index}",
                times.len().saturating_sub(2)
            ),
        ));
    }
    let w = central_difference_weights(
        times[index] - times[index - 1],
        times[index + 1] - times[index],
    );
    let lv = generator(&SpectralFn::analyze(&rows[index], rule, degree)?);
    Ok(rule
        .nodes()
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let dt = w[0] * rows[index - 1][j] + w[1] * rows[index][j] + w[2] * rows[index + 1][j];
            dt - lv.eval(x)
        })
        .collect())
}

/// Spectral degree used when re-analyzing a flow row: half the rule order,
/// so products and powers stay unaliased.
pub fn oversampled_degree(rule: &QuadratureRule) -> usize {
    (rule.order() - 1) / 2
}

/// `∂_t u - Lu` at every node, for interior time `index`.
///
/// `∂_t` is the second-order central difference on the (nonuniform) grid,
/// `L` the generator applied to the re-analysis of the row. For exact heat
/// flows the residual is `O(h₋h₊ ∂_ttt u)`.
pub fn supersolution_residual(flow: &FlowState, index: usize) -> Result<Vec<f64>> {
    residual_rows(
        &flow.times,
        &flow.values,
        &flow.rule,
        oversampled_degree(&flow.rule),
        index,
    )
}

/// Sign tolerance for the residual at `index`:
/// `max(1e-6, 4·h₋h₊·max|∂_ttt v|)` over the node window, with the third
/// derivative estimated from the neighboring divided differences.
pub fn discretization_tolerance(
    times: &[f64],
    rows: &[Vec<f64>],
    rule: &QuadratureRule,
    index: usize,
) -> f64 {
    let n = times.len();
    let h_minus = times[index] - times[index - 1];
    let h_plus = times[index + 1] - times[index];
    let window = rule.window(NODE_WINDOW);

    let third = |start: usize| -> f64 {
        // Third divided difference over times[start..start + 4], times 6.
        let t = &times[start..start + 4];
        window
            .iter()
            .map(|&j| {
                let v: Vec<f64> = (0..4).map(|k| rows[start + k][j]).collect();
                let d1: Vec<f64> = (0..3)
                    .map(|k| (v[k + 1] - v[k]) / (t[k + 1] - t[k]))
                    .collect();
                let d2: Vec<f64> = (0..2)
                    .map(|k| (d1[k + 1] - d1[k]) / (t[k + 2] - t[k]))
                    .collect();
                6.0 * ((d2[1] - d2[0]) / (t[3] - t[0])).abs()
            })
            .fold(0.0, f64::max)
    };
    let mut estimate: f64 = 0.0;
    if n >= 4 {
        if index >= 2 {
            estimate = estimate.max(third(index - 2));
        }
        if index + 2 < n {
            estimate = estimate.max(third(index - 1));
        }
    }
    RESIDUAL_TOL_FLOOR.max(DISCRETIZATION_SAFETY * h_minus * h_plus * estimate)
}

/// Pointwise `ũ` at `points` for a function `u` evaluable anywhere,
/// integrating the Mehler average with `inner`.
pub fn tilde_at<F: RealFn + ?Sized>(
    u: &F,
    pair: &ExponentPair,
    s: f64,
    points: &[f64],
    inner: &QuadratureRule,
) -> Result<Vec<f64>> {
    if !(s > 0.0) {
        return Err(Error::parameter(
            "s",
            format!("transform time must be positive, got {s}"),
        ));
    }
    let p = pair.p();
    let q = pair.q();
    let (rho, sigma) = mehler_coefficients(s);
    points
        .iter()
        .map(|&x| {
            let mut avg = 0.0;
            for (&y, &w) in inner.nodes().iter().zip(inner.weights()) {
                let z = rho * x + sigma * y;
                let uz = u.eval(z);
                let g = if p == 0.0 {
                    uz.exp()
                } else {
                    if !(uz >= POSITIVITY_FLOOR) {
                        return Err(Error::domain(
                            format!("u^(1/p) stage, z = {z}"),
                            format!("u = {uz} is not strictly positive"),
                        ));
                    }
                    pow(uz, 1.0 / p)
                };
                if !g.is_finite() {
                    return Err(Error::Evaluation { x: z, value: g });
                }
                avg += w * g;
            }
            if !(avg >= POSITIVITY_FLOOR) {
                return Err(Error::domain(
                    format!("outer stage, x = {x}"),
                    format!("P_s average {avg} is not strictly positive"),
                ));
            }
            let out = if q == 0.0 { avg.ln() } else { pow(avg, q) };
            if !out.is_finite() {
                return Err(Error::Evaluation { x, value: out });
            }
            Ok(out)
        })
        .collect()
}

/// `ũ` at the nodes of the context rule for one time slice of `u` given by
/// its node values. The row is re-analyzed at `ctx.max_degree()` so the
/// Mehler average can evaluate `u` off the nodes.
pub fn tilde_transform(
    u_row: &[f64],
    pair: &ExponentPair,
    s: f64,
    ctx: &OuContext,
) -> Result<Vec<f64>> {
    let u = SpectralFn::analyze(u_row, ctx.rule(), ctx.max_degree())?.chop(CHOP_TOL);
    tilde_at(&u, pair, s, ctx.nodes(), ctx.inner_rule())
}

/// Residual extrema at one interior time of a closure check, over the node window.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosureRow {
    pub index: usize,
    pub time: f64,
    pub hypothesis_min: f64,
    pub hypothesis_max: f64,
    pub hypothesis_tol: f64,
    pub conclusion_min: f64,
    pub conclusion_max: f64,
    pub conclusion_tol: f64,
    /// Node with the least margin in the conclusion.
    pub worst_x: f64,
}

impl ClosureRow {
    /// Margin of a residual range against the required sign: positive means satisfied.
    fn margin(sign: Solution, min: f64, max: f64, tol: f64) -> f64 {
        match sign {
            Solution::Super => min + tol,
            Solution::Sub => tol - max,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClosureOutcome {
    Passed,
    /// The input does not satisfy the regime's hypothesis; nothing is concluded.
    HypothesisViolated {
        index: usize,
        time: f64,
    },
    ConclusionViolated {
        index: usize,
        time: f64,
        x: f64,
        margin: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosureReport {
    pub regime: Regime,
    pub s: f64,
    pub hypothesis: Solution,
    pub conclusion: Solution,
    pub rows: Vec<ClosureRow>,
    pub outcome: ClosureOutcome,
}

impl ClosureReport {
    pub fn passed(&self) -> bool {
        self.outcome == ClosureOutcome::Passed
    }

    /// Largest conclusion residual on the node window over all times,
    /// signed so that positive means strictly inside the conclusion.
    pub fn best_conclusion_margin(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| match self.conclusion {
                Solution::Super => r.conclusion_max,
                Solution::Sub => -r.conclusion_min,
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Transforms every time slice of `flow` at the critical time of `pair` and
/// checks that the regime's hypothesis on `u` is carried to `ũ`.
pub fn closure_check(
    flow: &FlowState,
    pair: &ExponentPair,
    ctx: &OuContext,
) -> Result<ClosureReport> {
    if flow.rule() != ctx.rule() {
        return Err(Error::parameter(
            "flow",
            "flow must be sampled on the context rule",
        ));
    }
    if flow.times().len() < 3 {
        return Err(Error::parameter(
            "times",
            "closure needs at least three times",
        ));
    }
    let s = pair.critical_time();
    let regime = pair.regime();
    let tilde_rows = flow
        .values()
        .par_iter()
        .map(|row| tilde_transform(row, pair, s, ctx))
        .collect::<Result<Vec<_>>>()?;

    let window = ctx.rule().window(NODE_WINDOW);
    let times = flow.times();
    let extrema = |v: &[f64]| {
        window
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &j| {
                (lo.min(v[j]), hi.max(v[j]))
            })
    };

    let rows = (1..times.len() - 1)
        .into_par_iter()
        .map(|i| {
            let hyp = residual_rows(times, flow.values(), ctx.rule(), ctx.max_degree(), i)?;
            let con = residual_rows(times, &tilde_rows, ctx.rule(), ctx.max_degree(), i)?;
            let (hypothesis_min, hypothesis_max) = extrema(&hyp);
            let (conclusion_min, conclusion_max) = extrema(&con);
            let worst = window
                .iter()
                .copied()
                .min_by(|&a, &b| {
                    let key = |j: usize| match regime.conclusion() {
                        Solution::Super => con[j],
                        Solution::Sub => -con[j],
                    };
                    key(a).total_cmp(&key(b))
                })
                .unwrap_or(0);
            Ok(ClosureRow {
                index: i,
                time: times[i],
                hypothesis_min,
                hypothesis_max,
                hypothesis_tol: discretization_tolerance(times, flow.values(), ctx.rule(), i),
                conclusion_min,
                conclusion_max,
                conclusion_tol: discretization_tolerance(times, &tilde_rows, ctx.rule(), i),
                worst_x: ctx.nodes()[worst],
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut outcome = ClosureOutcome::Passed;
    for r in &rows {
        let m = ClosureRow::margin(
            regime.hypothesis(),
            r.hypothesis_min,
            r.hypothesis_max,
            r.hypothesis_tol,
        );
        if m < 0.0 {
            outcome = ClosureOutcome::HypothesisViolated {
                index: r.index,
                time: r.time,
            };
            break;
        }
    }
    if outcome == ClosureOutcome::Passed {
        for r in &rows {
            let m = ClosureRow::margin(
                regime.conclusion(),
                r.conclusion_min,
                r.conclusion_max,
                r.conclusion_tol,
            );
            if m < 0.0 {
                outcome = ClosureOutcome::ConclusionViolated {
                    index: r.index,
                    time: r.time,
                    x: r.worst_x,
                    margin: m,
                };
                break;
            }
        }
    }
    Ok(ClosureReport {
        regime,
        s,
        hypothesis: regime.hypothesis(),
        conclusion: regime.conclusion(),
        rows,
        outcome,
    })
}

/// How `∫ ũ dγ` is turned into `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// `Q = ∫ ũ dγ`
    Integral,
    /// `Q = (∫ ũ dγ)^{1/q}`, or `exp(∫ ũ dγ)` when `q = 0`.
    Root,
}

impl Normalization {
    /// The integral form for the forward regime, the root form otherwise.
    pub fn for_regime(regime: Regime) -> Self {
        if regime.is_forward() {
            Normalization::Integral
        } else {
            Normalization::Root
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QCurve {
    pub times: Vec<f64>,
    pub q_values: Vec<f64>,
    pub regime: Regime,
    pub direction: Direction,
    pub normalization: Normalization,
}

impl QCurve {
    /// `direction·(Q_i - Q_{i-1})` for `i >= 1`; nonnegative when monotone.
    pub fn step_margins(&self) -> Vec<f64> {
        let sign = self.direction.sign();
        self.q_values
            .windows(2)
            .map(|w| sign * (w[1] - w[0]))
            .collect()
    }

    /// Every step satisfies `direction·ΔQ >= -rel_tol·max(1, |Q_{i-1}|)`.
    pub fn is_monotone(&self, rel_tol: f64) -> bool {
        self.step_margins()
            .iter()
            .zip(&self.q_values)
            .all(|(m, q)| *m >= -rel_tol * q.abs().max(1.0))
    }
}

/// Log- or linearly spaced grid of `count` points in `[min, max]`.
pub fn log_grid(min: f64, max: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![min];
    }
    let (a, b) = (min.ln(), max.ln());
    (0..count)
        .map(|i| {
            if i == 0 {
                min
            } else if i + 1 == count {
                max
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

pub fn linear_grid(min: f64, max: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![min];
    }
    (0..count)
        .map(|i| {
            if i + 1 == count {
                max
            } else {
                min + (max - min) * i as f64 / (count - 1) as f64
            }
        })
        .collect()
}

/// `∫ ũ(t, ·) dγ` for the heat flow `u(t) = P_t[u_0]`, where `u_0` is the
/// regime's initial datum built from `f`. All three integrals (heat flow,
/// transform, outer integral) are Gauss-Hermite quadratures.
fn tilde_integral<F: RealFn + ?Sized>(
    f: &F,
    pair: &ExponentPair,
    t: f64,
    ctx: &OuContext,
) -> Result<f64> {
    let initial = |z: f64| pair.initial_datum(f.eval(z));
    let inner = ctx.inner_rule();
    let u = |z: f64| mehler_average(&initial, t, z, inner).unwrap_or(f64::NAN);
    let tilde = tilde_at(&u, pair, pair.critical_time(), ctx.nodes(), inner)?;
    Ok(ctx.rule().integrate_values(&tilde))
}

fn normalize(integral: f64, q: f64, normalization: Normalization) -> f64 {
    match normalization {
        Normalization::Integral => integral,
        Normalization::Root if q == 0.0 => integral.exp(),
        Normalization::Root => integral.powf(1.0 / q),
    }
}

/// `Q(t)` along the heat flow started from the regime's initial datum.
pub fn q_curve_with<F: RealFn + ?Sized>(
    f: &F,
    pair: &ExponentPair,
    times: &[f64],
    ctx: &OuContext,
    normalization: Normalization,
) -> Result<QCurve> {
    check_times(times)?;
    let q_values = times
        .par_iter()
        .map(|&t| tilde_integral(f, pair, t, ctx).map(|i| normalize(i, pair.q(), normalization)))
        .collect::<Result<Vec<_>>>()?;
    Ok(QCurve {
        times: times.to_vec(),
        q_values,
        regime: pair.regime(),
        direction: pair.regime().direction(),
        normalization,
    })
}

/// `Q(t)` with the regime's default normalization: `∫ ũ dγ` for the forward
/// regime, `(∫ ũ dγ)^{1/q}` (or `exp(∫ ũ dγ)`) otherwise.
pub fn q_curve<F: RealFn + ?Sized>(
    f: &F,
    pair: &ExponentPair,
    times: &[f64],
    ctx: &OuContext,
) -> Result<QCurve> {
    q_curve_with(
        f,
        pair,
        times,
        ctx,
        Normalization::for_regime(pair.regime()),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndpointReport {
    pub t_min: f64,
    pub t_max: f64,
    pub q_start: f64,
    pub q_end: f64,
    /// `‖P_s f‖_q^q`
    pub semigroup_norm: f64,
    /// `‖f‖_p^q`
    pub initial_norm: f64,
    pub rel_err_start: f64,
    pub rel_err_end: f64,
    pub tolerance: f64,
}

impl EndpointReport {
    pub fn passed(&self) -> bool {
        self.rel_err_start <= self.tolerance && self.rel_err_end <= self.tolerance
    }
}

/// Compares `Q(1e-4)` with `‖P_s f‖_q^q` and `Q(12)` with `‖f‖_p^q`.
/// The norms are computed directly from `f`, not through the flow.
pub fn endpoint_check<F: RealFn + ?Sized>(
    f: &F,
    pair: &ExponentPair,
    ctx: &OuContext,
) -> Result<EndpointReport> {
    if !pair.regime().is_forward() {
        return Err(Error::parameter(
            "p,q",
            "endpoint limits are checked in the forward regime",
        ));
    }
    let (p, q) = (pair.p(), pair.q());
    let curve = q_curve(f, pair, &[ENDPOINT_T_MIN, ENDPOINT_T_MAX], ctx)?;
    let flowed = semigroup_quadrature(f, pair.critical_time(), ctx.nodes(), ctx)?;
    let semigroup_norm = lp_norm_gamma(&flowed, ctx.rule(), q)?.powf(q);
    let initial_norm = lp_norm_gamma(&ctx.rule().sample(|x| f.eval(x)), ctx.rule(), p)?.powf(q);
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
    Ok(EndpointReport {
        t_min: ENDPOINT_T_MIN,
        t_max: ENDPOINT_T_MAX,
        q_start: curve.q_values[0],
        q_end: curve.q_values[1],
        semigroup_norm,
        initial_norm,
        rel_err_start: rel(curve.q_values[0], semigroup_norm),
        rel_err_end: rel(curve.q_values[1], initial_norm),
        tolerance: ENDPOINT_REL_TOL,
    })
}

/// `‖P_s f‖_{L^q(γ)} / ‖f‖_{L^p(γ)}`, with geometric means for zero exponents.
pub fn hyper_ratio<F: RealFn + ?Sized>(
    f: &F,
    pair: &ExponentPair,
    s: f64,
    ctx: &OuContext,
) -> Result<f64> {
    let flowed = semigroup_quadrature(f, s, ctx.nodes(), ctx)?;
    let lhs = lp_norm_gamma(&flowed, ctx.rule(), pair.q())?;
    let rhs = lp_norm_gamma(&ctx.rule().sample(|x| f.eval(x)), ctx.rule(), pair.p())?;
    Ok(lhs / rhs)
}

/// Whether `ratio` satisfies the inequality of the regime: `<= 1` forward,
/// `>= 1` reverse, within [`RATIO_TOL`].
pub fn ratio_holds(regime: Regime, ratio: f64) -> bool {
    if regime.is_forward() {
        ratio <= 1.0 + RATIO_TOL
    } else {
        ratio >= 1.0 - RATIO_TOL
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::gauss_hermite_rule;
    use approx::assert_relative_eq;

    #[test]
    fn regime_classification() {
        assert_eq!(Regime::classify(2.0, 4.0), Some(Regime::Forward));
        assert_eq!(Regime::classify(-1.0, -2.0), Some(Regime::NegativeReverse));
        assert_eq!(Regime::classify(0.5, 0.25), Some(Regime::SubunitReverse));
        assert_eq!(Regime::classify(0.5, 0.0), Some(Regime::SubunitReverse));
        assert_eq!(Regime::classify(0.5, -1.0), Some(Regime::MixedReverse));
        assert_eq!(Regime::classify(0.0, -1.0), Some(Regime::MixedReverse));
        for (p, q) in [
            (4.0, 2.0),
            (1.0, 2.0),
            (0.5, 2.0),
            (-1.0, 0.5),
            (2.0, 2.0),
            (0.0, 0.0),
            (1.5, f64::INFINITY),
        ] {
            assert_eq!(Regime::classify(p, q), None, "({p}, {q})");
        }
    }

    #[test]
    fn critical_time_examples() {
        assert_relative_eq!(
            critical_time(2.0, 4.0, 1.0).unwrap(),
            0.5 * 3f64.ln(),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            critical_time(2.0, 4.0, 1.0).unwrap(),
            0.549306,
            epsilon = 1e-6
        );
        let tiny = critical_time(2.0, 2.0 + 1e-9, 1.0).unwrap();
        assert!(tiny > 0.0 && tiny < 1e-9);
        assert_relative_eq!(
            critical_time(0.5, 0.25, 1.0).unwrap(),
            0.5 * 1.5f64.ln(),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            critical_time(0.5, 0.25, 1.0).unwrap(),
            0.202733,
            epsilon = 1e-6
        );
        assert_relative_eq!(
            critical_time(2.0, 4.0, 2.0).unwrap(),
            0.25 * 3f64.ln(),
            max_relative = 1e-15
        );
        assert!(critical_time(4.0, 2.0, 1.0).is_err());
        assert!(critical_time(2.0, 4.0, 0.0).is_err());
        assert!(critical_time(2.0, 4.0, -1.0).is_err());
    }

    #[test]
    fn critical_time_satisfies_nelson_relation() {
        for (p, q) in [
            (1.5, 3.0),
            (-1.0, -2.0),
            (0.5, 0.25),
            (0.5, -1.0),
            (0.0, -3.0),
            (0.75, 0.0),
        ] {
            let pair = ExponentPair::new(p, q).unwrap();
            let s = pair.critical_time();
            assert!(s > 0.0);
            assert_relative_eq!((2.0 * s).exp(), (q - 1.0) / (p - 1.0), max_relative = 1e-14);
        }
    }

    #[test]
    fn heat_flow_examples() {
        let rule = gauss_hermite_rule(16).unwrap();
        let times = [0.1, 0.5, 2.0];
        let flow = heat_flow(&SpectralFn::constant(1.0), &times, &rule).unwrap();
        assert!(flow
            .values()
            .iter()
            .flatten()
            .all(|&v| (v - 1.0).abs() < 1e-15));
        assert_eq!(flow.provenance(), Provenance::ExactHeatFlow);

        // 2 + x is positive on the nodes of a three-point rule.
        let small = gauss_hermite_rule(3).unwrap();
        let flow = heat_flow(&SpectralFn::new(vec![2.0, 1.0]), &times, &small).unwrap();
        for (row, &t) in flow.values().iter().zip(&times) {
            for (v, &x) in row.iter().zip(small.nodes()) {
                assert_relative_eq!(*v, 2.0 + (-t).exp() * x, epsilon = 1e-14);
            }
        }
        assert!(matches!(
            heat_flow(&SpectralFn::new(vec![2.0, 1.0]), &times, &rule),
            Err(Error::Domain { .. })
        ));

        let f = SpectralFn::new(vec![1.25, 0.3, 0.25 * 2f64.sqrt()]);
        let flow = heat_flow(&f, &times, &rule).unwrap();
        for row in flow.values() {
            assert_relative_eq!(rule.integrate_values(row), 1.25, max_relative = 1e-14);
        }
    }

    #[test]
    fn flow_rejects_bad_grids() {
        let rule = gauss_hermite_rule(4).unwrap();
        let f = SpectralFn::constant(1.0);
        assert!(heat_flow(&f, &[0.2, 0.1], &rule).is_err());
        assert!(heat_flow(&f, &[0.0, 0.1], &rule).is_err());
        assert!(
            FlowState::external(vec![1.0], vec![vec![1.0, 1.0, -1.0, 1.0]], rule.clone()).is_err()
        );
        assert!(FlowState::external(vec![1.0], vec![vec![1.0; 3]], rule).is_err());
    }

    #[test]
    fn central_difference_is_exact_on_quadratics() {
        let (a, b) = (0.3, 0.7);
        let w = central_difference_weights(a, b);
        let t = 1.1;
        let g = |s: f64| 2.0 - 3.0 * s + 0.5 * s * s;
        let d = w[0] * g(t - a) + w[1] * g(t) + w[2] * g(t + b);
        assert_relative_eq!(d, -3.0 + t, epsilon = 1e-13);
    }

    #[test]
    fn residual_examples() {
        let rule = gauss_hermite_rule(24).unwrap();
        let f = SpectralFn::new(vec![1.25, 0.0, 0.25 * 2f64.sqrt()]);
        let times = linear_grid(0.5, 0.502, 3);
        let flow = heat_flow(&f, &times, &rule).unwrap();
        let r = supersolution_residual(&flow, 1).unwrap();
        let window = rule.window(NODE_WINDOW);
        assert!(window.iter().all(|&j| r[j].abs() <= 1e-5));

        let up = supersolution_residual(&flow.with_ramp(0.1).unwrap(), 1).unwrap();
        assert!(window.iter().all(|&j| (up[j] - 0.1).abs() <= 1e-5));
        let down = supersolution_residual(&flow.with_ramp(-0.1).unwrap(), 1).unwrap();
        assert!(window.iter().all(|&j| (down[j] + 0.1).abs() <= 1e-5));

        assert!(supersolution_residual(&flow, 0).is_err());
        assert!(supersolution_residual(&flow, 2).is_err());
    }

    #[test]
    fn tilde_examples() {
        let ctx = OuContext::new(40, 64, 19).unwrap();
        let ones = vec![1.0; 40];
        for (p, q) in [(2.0, 4.0), (-1.0, -2.0), (0.5, 0.25), (0.5, -1.0)] {
            let pair = ExponentPair::new(p, q).unwrap();
            let t = tilde_transform(&ones, &pair, pair.critical_time(), &ctx).unwrap();
            assert!(t.iter().all(|&v| (v - 1.0).abs() < 1e-13));
        }
        let pair = ExponentPair::new(0.5, 0.0).unwrap();
        let t = tilde_transform(&ones, &pair, pair.critical_time(), &ctx).unwrap();
        assert!(t.iter().all(|&v| v.abs() < 1e-13));

        // u = e^{2ax}: ũ^{1/4} = exp(a e^{-s} x + a²(1 - e^{-2s})/2).
        let pair = ExponentPair::new(2.0, 4.0).unwrap();
        let (a, s) = (0.3, pair.critical_time());
        let u = |x: f64| (2.0 * a * x).exp();
        let xs = [-2.0, -0.5, 0.0, 1.0, 3.0];
        let t = tilde_at(&u, &pair, s, &xs, ctx.inner_rule()).unwrap();
        for (&x, v) in xs.iter().zip(t) {
            let expected = (a * (-s).exp() * x + a * a * (1.0 - (-2.0 * s).exp()) / 2.0).exp();
            assert_relative_eq!(v.powf(0.25), expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn tilde_reports_stage_of_domain_error() {
        let ctx = OuContext::new(20, 20, 10).unwrap();
        let pair = ExponentPair::new(2.0, 4.0).unwrap();
        let err = tilde_at(&|x: f64| x, &pair, 0.5, &[0.0], ctx.inner_rule()).unwrap_err();
        match err {
            Error::Domain { location, .. } => assert!(location.contains("u^(1/p)")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn exponential_tilde_with_zero_p() {
        // p = 0: ũ = (P_s e^u)^q; for u = a x this is exp(q(aρx + a²σ²/2)).
        let ctx = OuContext::new(30, 60, 10).unwrap();
        let pair = ExponentPair::new(0.0, -1.0).unwrap();
        let (a, s) = (0.4, pair.critical_time());
        let (rho, sigma) = mehler_coefficients(s);
        let t = tilde_at(
            &|x: f64| a * x,
            &pair,
            s,
            &[-1.0, 0.5, 2.0],
            ctx.inner_rule(),
        )
        .unwrap();
        for (&x, v) in [-1.0, 0.5, 2.0].iter().zip(t) {
            let expected = (-(a * rho * x + a * a * sigma * sigma / 2.0)).exp();
            assert_relative_eq!(v, expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn grids() {
        let g = log_grid(1e-3, 12.0, 60);
        assert_eq!(g.len(), 60);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[59], 12.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        let l = linear_grid(0.0, 1.0, 5);
        assert_eq!(l, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn direction_tags() {
        assert_eq!(Regime::Forward.direction(), Direction::Nondecreasing);
        for r in [
            Regime::NegativeReverse,
            Regime::SubunitReverse,
            Regime::MixedReverse,
        ] {
            assert_eq!(r.direction(), Direction::Nonincreasing);
        }
    }
}
