use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::word::Action;
use crate::rational::{display_rational, half, Rational};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CarId(String);

impl CarId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::Scenario("car identifiers must be nonempty".into()));
        }
        Ok(CarId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for CarId {
    fn from(s: &str) -> Self {
        CarId::new(s).expect("nonempty car id")
    }
}

/// A lane number; lanes are counted from 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LaneId(u32);

impl LaneId {
    pub fn new(lane: u32) -> Result<Self> {
        if lane == 0 {
            return Err(Error::Scenario("lanes are numbered from 1".into()));
        }
        Ok(LaneId(lane))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn is_adjacent(self, other: LaneId) -> bool {
        self.0.abs_diff(other.0) == 1
    }
}

impl fmt::Display for LaneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// State of a single car in a traffic snapshot.
///
/// `sf` is the reservation length: braking distance plus the physical length
/// `phys_len`, which is constant over the lifetime of the car.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CarState {
    pub pos: Rational,
    pub sf: Rational,
    pub spd: Rational,
    pub acc: Rational,
    pub phys_len: Rational,
    pub res: BTreeSet<LaneId>,
    pub clm: Option<LaneId>,
}

impl CarState {
    /// Reservation length `spd²/A + L`.
    pub fn reservation_length(spd: &Rational, max_decel: &Rational, phys_len: &Rational) -> Rational {
        spd * spd / max_decel + phys_len
    }

    pub fn front(&self) -> Rational {
        &self.pos + &self.sf
    }

    pub fn occupies(&self, lane: LaneId) -> bool {
        self.res.contains(&lane) || self.clm == Some(lane)
    }

    fn describe(&self) -> String {
        let res: Vec<String> = self.res.iter().map(|l| l.to_string()).collect();
        let clm = self.clm.map(|l| l.to_string()).unwrap_or_else(|| "none".into());
        format!("res = {{{}}}, clm = {}", res.join(","), clm)
    }

    /// Checks the lane-set invariants of a single car.
    pub fn check_lanes(&self) -> std::result::Result<(), String> {
        if self.sf <= Rational::zero() {
            return Err("reservation length must be positive".into());
        }
        match self.res.len() {
            1 => {
                if let Some(c) = self.clm {
                    let r = *self.res.iter().next().unwrap();
                    if !c.is_adjacent(r) {
                        return Err(format!("claim {c} is not adjacent to reservation {r}"));
                    }
                }
            }
            2 => {
                let lanes: Vec<LaneId> = self.res.iter().copied().collect();
                if !lanes[0].is_adjacent(lanes[1]) {
                    return Err(format!("reservations {} and {} are not adjacent", lanes[0], lanes[1]));
                }
                if self.clm.is_some() {
                    return Err("a car with two reservations cannot hold a claim".into());
                }
            }
            n => return Err(format!("a car reserves 1 or 2 lanes, found {n}")),
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TrafficSnapshot {
    pub cars: BTreeMap<CarId, CarState>,
}

impl TrafficSnapshot {
    pub fn car(&self, id: &CarId) -> Option<&CarState> {
        self.cars.get(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &CarId> {
        self.cars.keys()
    }

    /// Lets `z` time units pass. Acceleration is constant during the delay.
    pub fn apply_delay(&self, z: &Rational, max_decel: &Rational) -> Result<TrafficSnapshot> {
        if z.is_negative() {
            return Err(Error::NegativeDelay(display_rational(z)));
        }
        let cars = self
            .cars
            .iter()
            .map(|(id, c)| {
                let spd = &c.spd + &c.acc * z;
                let next = CarState {
                    pos: &c.pos + &c.spd * z + half() * &c.acc * z * z,
                    sf: CarState::reservation_length(&spd, max_decel, &c.phys_len),
                    spd,
                    acc: c.acc.clone(),
                    phys_len: c.phys_len.clone(),
                    res: c.res.clone(),
                    clm: c.clm,
                };
                (id.clone(), next)
            })
            .collect();
        Ok(TrafficSnapshot { cars })
    }

    /// Performs a discrete action, checking its guard.
    pub fn apply_discrete(&self, action: &Action) -> Result<TrafficSnapshot> {
        let Some(id) = action.car() else {
            return Ok(self.clone());
        };
        let state = self.cars.get(id).ok_or_else(|| Error::Guard {
            car: id.to_string(),
            action: action.to_string(),
            state: "no such car".into(),
        })?;
        let guard = |why: &str| Error::Guard {
            car: id.to_string(),
            action: action.to_string(),
            state: format!("{} ({why})", state.describe()),
        };
        let mut next = state.clone();
        match action {
            Action::SetClaim { lane, .. } => {
                if state.clm.is_some() {
                    return Err(guard("car already holds a claim"));
                }
                let single = state.res.len() == 1 && state.res.iter().all(|r| r.is_adjacent(*lane));
                if !single {
                    return Err(guard("claims need a single reservation on an adjacent lane"));
                }
                next.clm = Some(*lane);
            }
            Action::SetReservation { .. } => {
                let Some(c) = state.clm else {
                    return Err(guard("no claim to turn into a reservation"));
                };
                next.res.insert(c);
                next.clm = None;
            }
            Action::WithdrawClaim { .. } => {
                if state.clm.is_none() {
                    return Err(guard("no claim to withdraw"));
                }
                next.clm = None;
            }
            Action::WithdrawReservation { keep, .. } => {
                if state.res.len() != 2 || !state.res.contains(keep) {
                    return Err(guard("needs two reservations including the retained lane"));
                }
                next.res = BTreeSet::from([*keep]);
            }
            Action::SetAcceleration { value, .. } => next.acc = value.clone(),
            Action::End => unreachable!("end marker has no car"),
        }
        let mut ts = self.clone();
        ts.cars.insert(id.clone(), next);
        Ok(ts)
    }
}
