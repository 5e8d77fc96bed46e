//! The experiment commands.

use hyperlab::flow::{
    closure_check, heat_flow, hyper_ratio, q_curve, ratio_holds, ClosureOutcome, ClosureRow,
    ExponentPair, Solution,
};
use hyperlab::function::RealFn;
use hyperlab::hermite::SpectralFn;
use hyperlab::hypercube::{
    boolean_hyper_check, critical_rho, empirical_critical_rho, epsilon_grid, two_point,
};
use hyperlab::ou::OuContext;
use thiserror::Error;

use crate::config::{Command, ConfigError, ExperimentConfig};
use crate::output::{Cell, Table};
use crate::selftest;

/// Monotonicity slack of the Q column, relative to `max(1, |Q|)`.
pub const Q_SLACK: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Library(#[from] hyperlab::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    /// Whether the property the command examines held.
    pub passed: bool,
    pub summary: String,
}

fn context(config: &ExperimentConfig) -> Result<OuContext, RunError> {
    Ok(OuContext::new(
        config.order,
        config.inner,
        (config.order - 1) / 2,
    )?)
}

fn pair(config: &ExperimentConfig) -> Result<ExponentPair, RunError> {
    Ok(ExponentPair::with_curvature(config.p, config.q, config.c)?)
}

pub fn run(config: &ExperimentConfig) -> Result<Outcome, RunError> {
    match config.command {
        Command::Qcurve => qcurve(config),
        Command::Closure => closure(config),
        Command::Hyper => hyper(config),
        Command::Boolean => boolean(config),
        Command::Selftest => Ok(selftest::run()),
    }
}

fn qcurve(config: &ExperimentConfig) -> Result<Outcome, RunError> {
    let ctx = context(config)?;
    let pair = pair(config)?;
    let curve = q_curve(&config.preset, &pair, &config.times.points(), &ctx)?;
    let direction = curve.direction.tag();
    let sign = curve.direction.sign();
    let mut table = Table::new(&["t", "q_value", "direction", "slack"]);
    let mut passed = true;
    for (i, (&t, &q)) in curve.times.iter().zip(&curve.q_values).enumerate() {
        // Signed room left in the monotonicity test against the previous point.
        let slack = if i == 0 {
            0.0
        } else {
            let prev = curve.q_values[i - 1];
            sign * (q - prev) + Q_SLACK * prev.abs().max(1.0)
        };
        passed &= slack >= 0.0;
        table.push(vec![t.into(), q.into(), direction.into(), slack.into()]);
    }
    Ok(Outcome {
        table,
        passed,
        summary: format!(
            "Q is {} within {Q_SLACK:e}: {passed} ({} regime)",
            direction,
            curve.regime.tag()
        ),
    })
}

fn closure(config: &ExperimentConfig) -> Result<Outcome, RunError> {
    let ctx = context(config)?;
    let pair = pair(config)?;
    let initial = SpectralFn::from_fn(
        |x| pair.initial_datum(config.preset.eval(x)),
        ctx.rule(),
        ctx.max_degree(),
    )?
    .chop(1e-14);
    let flow = heat_flow(&initial, &config.times.points(), ctx.rule())?.with_ramp(config.ramp)?;
    let report = closure_check(&flow, &pair, &ctx)?;

    let row_ok = |r: &ClosureRow| {
        let hyp = match report.hypothesis {
            Solution::Super => r.hypothesis_min + r.hypothesis_tol >= 0.0,
            Solution::Sub => r.hypothesis_max - r.hypothesis_tol <= 0.0,
        };
        let con = match report.conclusion {
            Solution::Super => r.conclusion_min + r.conclusion_tol >= 0.0,
            Solution::Sub => r.conclusion_max - r.conclusion_tol <= 0.0,
        };
        hyp && con
    };
    let mut table = Table::new(&[
        "index",
        "t",
        "hypothesis_min",
        "hypothesis_max",
        "hypothesis_tol",
        "conclusion_min",
        "conclusion_max",
        "conclusion_tol",
        "worst_x",
        "passed",
    ]);
    for r in &report.rows {
        table.push(vec![
            r.index.into(),
            r.time.into(),
            r.hypothesis_min.into(),
            r.hypothesis_max.into(),
            r.hypothesis_tol.into(),
            r.conclusion_min.into(),
            r.conclusion_max.into(),
            r.conclusion_tol.into(),
            r.worst_x.into(),
            row_ok(r).into(),
        ]);
    }
    let summary = match &report.outcome {
        ClosureOutcome::Passed => format!(
            "closure holds at s = {:.6}: {:?} carried to {:?} ({} regime)",
            report.s,
            report.hypothesis,
            report.conclusion,
            report.regime.tag()
        ),
        ClosureOutcome::HypothesisViolated { index, time } => format!(
            "input is not a {:?}solution at index {index} (t = {time}); nothing to conclude",
            report.hypothesis
        ),
        ClosureOutcome::ConclusionViolated {
            index,
            time,
            x,
            margin,
        } => format!(
            "conclusion violated at index {index} (t = {time}, x = {x}) by {:e}",
            -margin
        ),
    };
    Ok(Outcome {
        table,
        passed: report.passed(),
        summary,
    })
}

fn hyper(config: &ExperimentConfig) -> Result<Outcome, RunError> {
    let ctx = context(config)?;
    let pair = pair(config)?;
    let critical = pair.critical_time();
    let s_values: Vec<f64> = match config.s {
        Some(s) => vec![s],
        None => {
            let lo = config.s_sweep.lo.resolve(critical);
            let hi = config.s_sweep.hi.resolve(critical);
            if !(lo > 0.0 && hi > lo) {
                return Err(ConfigError::new(
                    "s-sweep",
                    format!("needs 0 < lo < hi, got {lo}:{hi}"),
                )
                .into());
            }
            hyperlab::flow::linear_grid(lo, hi, config.s_sweep.count)
        }
    };
    let mut table = Table::new(&["s", "s_over_critical", "ratio", "holds"]);
    let mut at_or_past = true;
    for &s in &s_values {
        let ratio = hyper_ratio(&config.preset, &pair, s, &ctx)?;
        let holds = ratio_holds(pair.regime(), ratio);
        if s >= critical {
            at_or_past &= holds;
        }
        table.push(vec![
            s.into(),
            (s / critical).into(),
            ratio.into(),
            holds.into(),
        ]);
    }
    Ok(Outcome {
        table,
        passed: at_or_past,
        summary: format!(
            "critical time {critical:.9}; inequality holds for every s >= critical: {at_or_past}"
        ),
    })
}

fn boolean(config: &ExperimentConfig) -> Result<Outcome, RunError> {
    let (p, q) = (config.p, config.q);
    let formula = critical_rho(p, q)?;
    let rhos: Vec<f64> = match config.rho {
        Some(r) => vec![r],
        None => (1..100).map(|k| k as f64 / 100.0).collect(),
    };
    let mut table = Table::new(&["rho", "epsilon", "lhs", "rhs", "ratio", "holds"]);
    for &rho in &rhos {
        for eps in epsilon_grid() {
            let r = boolean_hyper_check(&two_point(eps), p, q, rho)?;
            table.push(vec![
                rho.into(),
                eps.into(),
                r.lhs.into(),
                r.rhs.into(),
                r.ratio.into(),
                r.holds().into(),
            ]);
        }
    }
    let at_formula = epsilon_grid()
        .into_iter()
        .map(|eps| boolean_hyper_check(&two_point(eps), p, q, formula).map(|r| r.holds()))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .all(|h| h);
    let summary = if config.rho.is_none() {
        let empirical = empirical_critical_rho(p, q, &rhos)?;
        format!(
            "critical rho {formula:.9}; largest passing grid rho {}; sweep passes at the formula value: {at_formula}",
            empirical.map_or("none".to_string(), |r| format!("{r:.2}"))
        )
    } else {
        format!("critical rho {formula:.9}; sweep passes at the formula value: {at_formula}")
    };
    Ok(Outcome {
        table,
        passed: at_formula,
        summary,
    })
}

/// Runs `config` and encodes the resulting table.
pub fn run_to_bytes(config: &ExperimentConfig) -> Result<(Vec<u8>, Outcome), RunError> {
    let outcome = run(config)?;
    let bytes = outcome.table.render(config)?;
    Ok((bytes, outcome))
}

/// Cell accessor used by the tests and the acceptance suite.
pub fn num(cell: &Cell) -> Option<f64> {
    match cell {
        Cell::Num(x) => Some(*x),
        Cell::Int(i) => Some(*i as f64),
        _ => None,
    }
}
