//! Scenario files: constants, initial snapshot, view, valuation, timed word.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::snapshot::{CarId, CarState, LaneId, TrafficSnapshot};
use crate::model::transition::{model_at, snapshot_at, TransitionSequence};
use crate::model::view::{Model, Valuation, View, EGO};
use crate::model::word::{Action, Event, TimedWord};
use crate::rational::{display_rational, Rational, RationalString};

/// A validated monitoring input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub max_decel: Rational,
    pub lanes: (u32, u32),
    pub initial: TrafficSnapshot,
    pub word: TimedWord,
    pub view: View,
    pub valuation: Valuation,
}

impl Scenario {
    pub fn new(
        max_decel: Rational,
        lanes: (u32, u32),
        initial: TrafficSnapshot,
        word: TimedWord,
        view: View,
        valuation: Valuation,
    ) -> Result<Self> {
        let scenario = Scenario { max_decel, lanes, initial, word, view, valuation };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        file.into_scenario()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Scenario::from_json(&text).map_err(|e| match e {
            Error::Json(j) => Error::Scenario(format!("{}: {j}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ScenarioFile::from(self)).expect("scenario serializes")
    }

    pub fn initial_model(&self) -> Model {
        Model {
            snapshot: self.initial.clone(),
            view: self.view.clone(),
            valuation: self.valuation.clone(),
        }
    }

    pub fn cars(&self) -> Vec<CarId> {
        self.initial.ids().cloned().collect()
    }

    pub fn end_time(&self) -> &Rational {
        self.word.end_time()
    }

    pub fn transition_sequence(&self) -> Result<TransitionSequence> {
        TransitionSequence::from_word(&self.word, &self.initial, &self.max_decel)
    }

    pub fn snapshot_at(&self, t: &Rational) -> Result<TrafficSnapshot> {
        snapshot_at(&self.word, &self.initial, t, &self.max_decel)
    }

    pub fn model_at(&self, t: &Rational) -> Result<Model> {
        model_at(&self.word, &self.initial_model(), t, &self.max_decel)
    }

    /// Same scenario with another timed word, revalidated.
    pub fn with_word(&self, word: TimedWord) -> Result<Scenario> {
        Scenario::new(
            self.max_decel.clone(),
            self.lanes,
            self.initial.clone(),
            word,
            self.view.clone(),
            self.valuation.clone(),
        )
    }

    fn lane_ok(&self, lane: LaneId) -> bool {
        (self.lanes.0..=self.lanes.1).contains(&lane.get())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Scenario(msg));
        if !self.max_decel.is_positive() {
            return bad("maximum deceleration must be positive".into());
        }
        if self.lanes.0 == 0 || self.lanes.0 > self.lanes.1 {
            return bad(format!("bad lane interval [{}, {}]", self.lanes.0, self.lanes.1));
        }
        if self.initial.cars.is_empty() {
            return bad("a scenario needs at least one car".into());
        }
        for (id, car) in &self.initial.cars {
            if !car.phys_len.is_positive() {
                return bad(format!("car {id}: physical length must be positive"));
            }
            let expected = CarState::reservation_length(&car.spd, &self.max_decel, &car.phys_len);
            if car.sf != expected {
                return bad(format!(
                    "car {id}: reservation length {} differs from spd²/A + L = {}",
                    display_rational(&car.sf),
                    display_rational(&expected)
                ));
            }
            if let Err(why) = car.check_lanes() {
                return bad(format!("car {id}: {why}"));
            }
            if !car.res.iter().chain(car.clm.iter()).all(|&l| self.lane_ok(l)) {
                return bad(format!("car {id}: lane outside [{}, {}]", self.lanes.0, self.lanes.1));
            }
        }
        let v = &self.view;
        if self.initial.car(&v.owner).is_none() {
            return bad(format!("view owner {} is not a car", v.owner));
        }
        if v.lane_lo <= v.lane_hi && (v.lane_lo < self.lanes.0 as i64 || v.lane_hi > self.lanes.1 as i64) {
            return bad("view lanes leave the lane interval".into());
        }
        match self.valuation.get(EGO) {
            Some(e) if e == &v.owner => {}
            Some(e) => return bad(format!("ego is {e} but the view belongs to {}", v.owner)),
            None => return bad("valuation must map ego".into()),
        }
        if let Some((var, car)) = self.valuation.iter().find(|(_, c)| self.initial.car(c).is_none()) {
            return bad(format!("valuation maps {var} to unknown car {car}"));
        }
        let mut last_stamp: BTreeMap<&CarId, &Rational> = BTreeMap::new();
        for e in self.word.actions() {
            let car = e.action.car().expect("discrete action");
            if self.initial.car(car).is_none() {
                return bad(format!("{e} mentions unknown car {car}"));
            }
            let lane = match &e.action {
                Action::SetClaim { lane, .. } => Some(*lane),
                Action::WithdrawReservation { keep, .. } => Some(*keep),
                _ => None,
            };
            if lane.is_some_and(|l| !self.lane_ok(l)) {
                return bad(format!("{e} names a lane outside the lane interval"));
            }
            if let Some(prev) = last_stamp.insert(car, &e.time) {
                if prev == &e.time {
                    return bad(format!("car {car} has two actions at time {}", display_rational(prev)));
                }
            }
        }
        // replays the word, surfacing guard violations
        self.transition_sequence()?;
        Ok(())
    }
}

// ---- file format -------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ScenarioFile {
    pub max_deceleration: RationalString,
    pub lanes: [u32; 2],
    pub cars: Vec<CarFile>,
    pub view: ViewFile,
    #[serde(default)]
    pub valuation: BTreeMap<String, String>,
    #[serde(default)]
    pub word: Vec<EventFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CarFile {
    pub id: String,
    pub pos: RationalString,
    pub speed: RationalString,
    #[serde(default = "zero")]
    pub acc: RationalString,
    pub physical_length: RationalString,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sf: Option<RationalString>,
    pub res: Vec<u32>,
    #[serde(default)]
    pub clm: Vec<u32>,
}

fn zero() -> RationalString {
    RationalString(Rational::zero())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewFile {
    pub owner: String,
    pub lanes: [i64; 2],
    pub extension: [RationalString; 2],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventFile {
    pub action: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub car: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lane: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<RationalString>,
    pub time: RationalString,
}

impl EventFile {
    fn into_event(self) -> Result<Event> {
        let what = self.action.clone();
        let car = || -> Result<CarId> {
            CarId::new(self.car.clone().ok_or_else(|| Error::Scenario(format!("{what} needs a car")))?)
        };
        let lane = || -> Result<LaneId> {
            LaneId::new(self.lane.ok_or_else(|| Error::Scenario(format!("{what} needs a lane")))?)
        };
        let action = match self.action.as_str() {
            "setClaim" => Action::SetClaim { car: car()?, lane: lane()? },
            "setReservation" => Action::SetReservation { car: car()? },
            "wdClaim" => Action::WithdrawClaim { car: car()? },
            "wdReservation" => Action::WithdrawReservation { car: car()?, keep: lane()? },
            "setAcc" => Action::SetAcceleration {
                car: car()?,
                value: self
                    .value
                    .clone()
                    .ok_or_else(|| Error::Scenario("setAcc needs a value".into()))?
                    .0,
            },
            "end" => Action::End,
            other => return Err(Error::Scenario(format!("unknown action {other:?}"))),
        };
        Ok(Event::new(action, self.time.0))
    }

    fn from_event(e: &Event) -> Self {
        let (action, lane, value) = match &e.action {
            Action::SetClaim { lane, .. } => ("setClaim", Some(lane.get()), None),
            Action::SetReservation { .. } => ("setReservation", None, None),
            Action::WithdrawClaim { .. } => ("wdClaim", None, None),
            Action::WithdrawReservation { keep, .. } => ("wdReservation", Some(keep.get()), None),
            Action::SetAcceleration { value, .. } => ("setAcc", None, Some(RationalString(value.clone()))),
            Action::End => ("end", None, None),
        };
        EventFile {
            action: action.into(),
            car: e.action.car().map(|c| c.to_string()),
            lane,
            value,
            time: RationalString(e.time.clone()),
        }
    }
}

impl ScenarioFile {
    pub fn into_scenario(self) -> Result<Scenario> {
        let max_decel = self.max_deceleration.0;
        let mut initial = TrafficSnapshot::default();
        for car in self.cars {
            let id = CarId::new(car.id)?;
            let lanes = |ls: &[u32]| -> Result<BTreeSet<LaneId>> {
                ls.iter().map(|&l| LaneId::new(l)).collect()
            };
            let res = lanes(&car.res)?;
            if res.len() != car.res.len() {
                return Err(Error::Scenario(format!("car {id}: duplicate reserved lane")));
            }
            let clm = match car.clm.as_slice() {
                [] => None,
                [l] => Some(LaneId::new(*l)?),
                _ => return Err(Error::Scenario(format!("car {id}: at most one claim"))),
            };
            let sf = CarState::reservation_length(&car.speed.0, &max_decel, &car.physical_length.0);
            if let Some(given) = car.sf {
                if given.0 != sf {
                    return Err(Error::Scenario(format!(
                        "car {id}: given sf {} but spd²/A + L = {}",
                        display_rational(&given.0),
                        display_rational(&sf)
                    )));
                }
            }
            let state = CarState {
                pos: car.pos.0,
                sf,
                spd: car.speed.0,
                acc: car.acc.0,
                phys_len: car.physical_length.0,
                res,
                clm,
            };
            if initial.cars.insert(id.clone(), state).is_some() {
                return Err(Error::Scenario(format!("duplicate car {id}")));
            }
        }
        let owner = CarId::new(self.view.owner)?;
        let [lo, hi] = self.view.lanes;
        let [left, right] = self.view.extension;
        let view = View::new((lo, hi), (left.0, right.0), owner.clone())?;
        let mut valuation = Valuation::ego(owner);
        for (var, car) in self.valuation {
            let car = CarId::new(car)?;
            if var == EGO && Some(&car) != valuation.get(EGO) {
                return Err(Error::Scenario(format!("ego must map to the view owner, not {car}")));
            }
            valuation = valuation.with(&var, car);
        }
        let mut events = self.word.into_iter().map(EventFile::into_event).collect::<Result<Vec<_>>>()?;
        let word = match events.last() {
            Some(e) if e.action.is_end() => TimedWord::new(events)?,
            _ => {
                if events.iter().any(|e| e.action.is_end()) {
                    return Err(Error::Word("the end marker may only occur last".into()));
                }
                let end = events.last().map(|e| e.time.clone()).unwrap_or_else(Rational::zero);
                events.push(Event::new(Action::End, end));
                TimedWord::new(events)?
            }
        };
        Scenario::new(max_decel, (self.lanes[0], self.lanes[1]), initial, word, view, valuation)
    }
}

impl From<&Scenario> for ScenarioFile {
    fn from(s: &Scenario) -> Self {
        let cars = s
            .initial
            .cars
            .iter()
            .map(|(id, c)| CarFile {
                id: id.to_string(),
                pos: RationalString(c.pos.clone()),
                speed: RationalString(c.spd.clone()),
                acc: RationalString(c.acc.clone()),
                physical_length: RationalString(c.phys_len.clone()),
                sf: Some(RationalString(c.sf.clone())),
                res: c.res.iter().map(|l| l.get()).collect(),
                clm: c.clm.iter().map(|l| l.get()).collect(),
            })
            .collect();
        ScenarioFile {
            max_deceleration: RationalString(s.max_decel.clone()),
            lanes: [s.lanes.0, s.lanes.1],
            cars,
            view: ViewFile {
                owner: s.view.owner.to_string(),
                lanes: [s.view.lane_lo, s.view.lane_hi],
                extension: [RationalString(s.view.left.clone()), RationalString(s.view.right.clone())],
            },
            valuation: s.valuation.iter().map(|(k, v)| (k.clone(), v.to_string())).collect(),
            word: s.word.events().iter().map(EventFile::from_event).collect(),
        }
    }
}
