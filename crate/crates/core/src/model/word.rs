use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::model::snapshot::{CarId, LaneId};
use crate::rational::{display_rational, Rational};

/// A discrete car action, or the end marker closing every timed word.
///
/// `WithdrawReservation` names the lane the car *keeps*: applying it to a car
/// reserving `{2, 3}` with `keep = 3` leaves the reservation `{3}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    SetClaim { car: CarId, lane: LaneId },
    SetReservation { car: CarId },
    WithdrawClaim { car: CarId },
    WithdrawReservation { car: CarId, keep: LaneId },
    SetAcceleration { car: CarId, value: Rational },
    End,
}

impl Action {
    pub fn car(&self) -> Option<&CarId> {
        match self {
            Action::SetClaim { car, .. }
            | Action::SetReservation { car }
            | Action::WithdrawClaim { car }
            | Action::WithdrawReservation { car, .. }
            | Action::SetAcceleration { car, .. } => Some(car),
            Action::End => None,
        }
    }

    pub fn is_end(&self) -> bool {
        matches!(self, Action::End)
    }

    pub fn is_acceleration(&self) -> bool {
        matches!(self, Action::SetAcceleration { .. })
    }

    pub fn belongs_to(&self, car: &CarId) -> bool {
        self.car() == Some(car)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::SetClaim { car, lane } => write!(f, "c({car},{lane})"),
            Action::SetReservation { car } => write!(f, "r({car})"),
            Action::WithdrawClaim { car } => write!(f, "wc({car})"),
            Action::WithdrawReservation { car, keep } => write!(f, "wr({car},{keep})"),
            Action::SetAcceleration { car, value } => {
                write!(f, "acc({car},{})", display_rational(value))
            }
            Action::End => f.write_str("end"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub action: Action,
    pub time: Rational,
}

impl Event {
    pub fn new(action: Action, time: Rational) -> Self {
        Event { action, time }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.action, display_rational(&self.time))
    }
}

/// A finite sequence of actions with weakly increasing, non-negative time
/// stamps, terminated by exactly one end marker.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimedWord {
    events: Vec<Event>,
}

impl TimedWord {
    pub fn new(events: Vec<Event>) -> Result<Self> {
        let Some(last) = events.last() else {
            return Err(Error::Word("a timed word contains at least the end marker".into()));
        };
        if !last.action.is_end() {
            return Err(Error::Word("the last letter must be the end marker".into()));
        }
        if events[..events.len() - 1].iter().any(|e| e.action.is_end()) {
            return Err(Error::Word("the end marker may only occur last".into()));
        }
        if let Some(e) = events.iter().find(|e| e.time.is_negative()) {
            return Err(Error::Word(format!("negative time stamp in {e}")));
        }
        if let Some(w) = events.windows(2).find(|w| w[1].time < w[0].time) {
            return Err(Error::Word(format!("time stamps decrease from {} to {}", w[0], w[1])));
        }
        Ok(TimedWord { events })
    }

    /// Appends the end marker at the last stamp (or 0 for an empty list).
    pub fn closed(mut actions: Vec<Event>) -> Result<Self> {
        let end = actions.last().map(|e| e.time.clone()).unwrap_or_else(Rational::zero);
        actions.push(Event::new(Action::End, end));
        TimedWord::new(actions)
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Discrete actions, i.e. all letters except the end marker.
    pub fn actions(&self) -> &[Event] {
        &self.events[..self.events.len() - 1]
    }

    /// Right end of the timespan `[0, τ_n]`.
    pub fn end_time(&self) -> &Rational {
        &self.events.last().expect("nonempty").time
    }

    pub fn contains_time(&self, t: &Rational) -> bool {
        !t.is_negative() && t <= self.end_time()
    }

    fn check_time(&self, t: &Rational) -> Result<()> {
        if self.contains_time(t) {
            Ok(())
        } else {
            Err(Error::OutsideTimespan {
                time: display_rational(t),
                end: display_rational(self.end_time()),
            })
        }
    }

    /// Letters satisfying `keep`, plus the end marker, with original stamps.
    pub fn project_by(&self, keep: impl Fn(&Action) -> bool) -> TimedWord {
        let events = self
            .events
            .iter()
            .filter(|e| e.action.is_end() || keep(&e.action))
            .cloned()
            .collect();
        TimedWord { events }
    }

    pub fn project(&self, car: &CarId) -> TimedWord {
        self.project_by(|a| a.belongs_to(car))
    }

    /// Projection onto the acceleration actions of all cars.
    pub fn project_acceleration(&self) -> TimedWord {
        self.project_by(Action::is_acceleration)
    }

    /// All events with stamp `<= t`, closed by `(end, t)`.
    pub fn time_bounded_prefix(&self, t: &Rational) -> Result<TimedWord> {
        self.check_time(t)?;
        let mut events: Vec<Event> =
            self.actions().iter().take_while(|e| &e.time <= t).cloned().collect();
        events.push(Event::new(Action::End, t.clone()));
        Ok(TimedWord { events })
    }

    /// Cars mentioned by some action, in order.
    pub fn cars(&self) -> Vec<CarId> {
        let mut cars: Vec<CarId> = self.events.iter().filter_map(|e| e.action.car().cloned()).collect();
        cars.sort();
        cars.dedup();
        cars
    }

    /// Untimed word without the end marker.
    pub fn letters(&self) -> Vec<Action> {
        self.actions().iter().map(|e| e.action.clone()).collect()
    }
}

impl fmt::Display for TimedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.events.iter().map(|e| e.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}
