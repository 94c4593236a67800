use std::fmt;

use crate::error::Result;
use crate::mlsl::ast::Formula;
use crate::mlsl::critical::{critical_times, CriticalTimes};
use crate::mlsl::eval::eval;
use crate::model::{Model, Scenario};
use crate::rational::{display_rational, Rational};

#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Violated {
        time: Rational,
        model: Model,
        explanation: String,
    },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn violation_time(&self) -> Option<&Rational> {
        match self {
            Verdict::Holds => None,
            Verdict::Violated { time, .. } => Some(time),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds => f.write_str("HOLDS"),
            Verdict::Violated { time, .. } => write!(f, "VIOLATED at t = {}", display_rational(time)),
        }
    }
}

/// Outcome of [`global_check_direct`].
#[derive(Clone, Debug)]
pub struct DirectCheck {
    pub verdict: Verdict,
    pub critical: CriticalTimes,
    /// Instants actually evaluated before the verdict was known.
    pub tested: usize,
}

impl DirectCheck {
    /// Irrational crossings were only bracketed, so truth exactly at those
    /// instants was not tested.
    pub fn inexact(&self) -> bool {
        self.critical.inexact()
    }
}

/// Decides `M ⊨ G φ` by evaluating `φ` at every critical instant and one
/// instant per gap between them, earliest first.
pub fn global_check_direct(scenario: &Scenario, formula: &Formula) -> Result<DirectCheck> {
    formula.ensure_closed(&scenario.valuation)?;
    let critical = critical_times(scenario, formula)?;
    let mut tested = 0;
    for t in &critical.samples {
        tested += 1;
        let model = scenario.model_at(t)?;
        if !eval(&model, formula) {
            let explanation = format!(
                "formula is false at t = {} with view {}",
                display_rational(t),
                model.view
            );
            return Ok(DirectCheck {
                verdict: Verdict::Violated { time: t.clone(), model, explanation },
                critical,
                tested,
            });
        }
    }
    Ok(DirectCheck { verdict: Verdict::Holds, critical, tested })
}
