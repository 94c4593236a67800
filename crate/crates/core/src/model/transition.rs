use std::fmt;

use num_traits::Zero;

use crate::error::Result;
use crate::model::snapshot::TrafficSnapshot;
use crate::model::view::Model;
use crate::model::word::{Action, TimedWord};
use crate::rational::{display_rational, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Label {
    Delay(Rational),
    Discrete(Action),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Delay(z) => write!(f, "{}s", display_rational(z)),
            Label::Discrete(a) => write!(f, "{a}"),
        }
    }
}

/// `TS₁ →τ₁ TS₂ →σ₁ TS₃ → … →τₙ−τₙ₋₁ TS₂ₙ →0 TS₂ₙ`.
///
/// The last step is the zero delay standing for the end marker, so its
/// target repeats the preceding snapshot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionSequence {
    pub initial: TrafficSnapshot,
    pub steps: Vec<(Label, TrafficSnapshot)>,
}

impl TransitionSequence {
    /// Applies `word` to `initial`: delay to each stamp, then the action.
    pub fn from_word(word: &TimedWord, initial: &TrafficSnapshot, max_decel: &Rational) -> Result<Self> {
        let mut steps = Vec::with_capacity(2 * word.len());
        let mut current = initial.clone();
        let mut now = Rational::zero();
        for event in word.events() {
            let z = &event.time - &now;
            current = current.apply_delay(&z, max_decel)?;
            steps.push((Label::Delay(z), current.clone()));
            if !event.action.is_end() {
                current = current.apply_discrete(&event.action)?;
                steps.push((Label::Discrete(event.action.clone()), current.clone()));
            }
            now = event.time.clone();
        }
        steps.push((Label::Delay(Rational::zero()), current));
        Ok(TransitionSequence { initial: initial.clone(), steps })
    }

    /// The distinct snapshots `TS₁ … TS₂ₙ`.
    pub fn snapshots(&self) -> Vec<&TrafficSnapshot> {
        std::iter::once(&self.initial)
            .chain(self.steps[..self.steps.len() - 1].iter().map(|(_, ts)| ts))
            .collect()
    }

    pub fn last(&self) -> &TrafficSnapshot {
        &self.steps.last().expect("at least the closing delay").1
    }
}

impl fmt::Display for TransitionSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("TS1")?;
        for (i, (label, _)) in self.steps.iter().enumerate() {
            let target = (i + 2).min(self.steps.len());
            write!(f, " -[{label}]-> TS{target}")?;
        }
        Ok(())
    }
}

/// Snapshot reached at time `t`: the end of the sequence of the
/// time-bounded prefix up to `t`.
pub fn snapshot_at(
    word: &TimedWord,
    initial: &TrafficSnapshot,
    t: &Rational,
    max_decel: &Rational,
) -> Result<TrafficSnapshot> {
    let prefix = word.time_bounded_prefix(t)?;
    Ok(TransitionSequence::from_word(&prefix, initial, max_decel)?.last().clone())
}

/// Model at time `t`; the view moves along with its owner.
pub fn model_at(word: &TimedWord, model: &Model, t: &Rational, max_decel: &Rational) -> Result<Model> {
    let snapshot = snapshot_at(word, &model.snapshot, t, max_decel)?;
    let owner = &model.view.owner;
    let moved = match (snapshot.car(owner), model.snapshot.car(owner)) {
        (Some(now), Some(before)) => &now.pos - &before.pos,
        _ => Rational::zero(),
    };
    Ok(Model {
        snapshot,
        view: model.view.shifted(&moved),
        valuation: model.valuation.clone(),
    })
}
