//! Bundled scenarios shared by unit tests.

use crate::model::Scenario;

pub const RUNNING_EXAMPLE_JSON: &str = include_str!("../../../scenarios/running_example.json");
pub const FIGURE1_JSON: &str = include_str!("../../../scenarios/figure1.json");

pub fn running_example() -> Scenario {
    Scenario::from_json(RUNNING_EXAMPLE_JSON).expect("bundled scenario is valid")
}

pub fn figure1() -> Scenario {
    Scenario::from_json(FIGURE1_JSON).expect("bundled scenario is valid")
}
