use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::snapshot::{CarId, TrafficSnapshot};
use crate::rational::{display_rational, Rational};

pub const EGO: &str = "ego";

/// A window on the road: lanes `[lane_lo, lane_hi]` (empty when `lo > hi`)
/// times the extension `[left, right]`, owned by one car.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct View {
    pub lane_lo: i64,
    pub lane_hi: i64,
    pub left: Rational,
    pub right: Rational,
    pub owner: CarId,
}

impl View {
    pub fn new(lanes: (i64, i64), extension: (Rational, Rational), owner: CarId) -> Result<Self> {
        if extension.0 > extension.1 {
            return Err(Error::Scenario(format!(
                "view extension [{}, {}] is reversed",
                display_rational(&extension.0),
                display_rational(&extension.1)
            )));
        }
        Ok(View {
            lane_lo: lanes.0,
            lane_hi: lanes.1,
            left: extension.0,
            right: extension.1,
            owner,
        })
    }

    pub fn shifted(&self, by: &Rational) -> View {
        View {
            left: &self.left + by,
            right: &self.right + by,
            ..self.clone()
        }
    }
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "lanes [{}, {}] x [{}, {}] owned by {}",
            self.lane_lo,
            self.lane_hi,
            display_rational(&self.left),
            display_rational(&self.right),
            self.owner
        )
    }
}

/// Assignment of car variables (including `ego`) to cars.
#[derive(Clone, Debug, PartialEq, Eq, Default, Hash)]
pub struct Valuation(BTreeMap<String, CarId>);

impl Valuation {
    pub fn new(entries: impl IntoIterator<Item = (String, CarId)>) -> Self {
        Valuation(entries.into_iter().collect())
    }

    /// A valuation mapping only `ego` to `owner`.
    pub fn ego(owner: CarId) -> Self {
        Valuation::new([(EGO.to_string(), owner)])
    }

    pub fn get(&self, var: &str) -> Option<&CarId> {
        self.0.get(var)
    }

    pub fn contains(&self, var: &str) -> bool {
        self.0.contains_key(var)
    }

    pub fn with(&self, var: &str, car: CarId) -> Valuation {
        let mut next = self.0.clone();
        next.insert(var.to_string(), car);
        Valuation(next)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &CarId)> {
        self.0.iter()
    }
}

/// An MLSL model: snapshot, view, and valuation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    pub snapshot: TrafficSnapshot,
    pub view: View,
    pub valuation: Valuation,
}
