use std::collections::{BTreeMap, BTreeSet};

use crate::model::{Action, CarId, TimedWord};
use crate::rational::Rational;

/// Names of the seven per-instant variables of one car.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataVars {
    pub res: String,
    pub res2: String,
    pub pos: String,
    pub sf: String,
    pub clm: String,
    pub acc: String,
    pub spd: String,
}

impl DataVars {
    fn new(prefix: &str, index: &str) -> Self {
        let name = |field: &str| format!("{prefix}_{index}_{field}");
        DataVars {
            res: name("res"),
            res2: name("res2"),
            pos: name("pos"),
            sf: name("sf"),
            clm: name("clm"),
            acc: name("acc"),
            spd: name("spd"),
        }
    }

    pub fn all(&self) -> [&String; 7] {
        [&self.res, &self.res2, &self.pos, &self.sf, &self.clm, &self.acc, &self.spd]
    }
}

/// Variables of one car: a data column before the first and after every
/// letter of its projection (end marker included), and the matching time
/// variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CarLayout {
    pub car: CarId,
    /// Symbol prefix, the car name made safe for SMT-LIB.
    pub prefix: String,
    pub letters: Vec<Action>,
    /// `τ_{C,i}` for each letter.
    pub stamps: Vec<Rational>,
    pub columns: Vec<DataVars>,
    /// `t_{C,1} … t_{C,n+1}`.
    pub times: Vec<String>,
}

impl CarLayout {
    pub fn initial(&self) -> &DataVars {
        &self.columns[0]
    }

    /// The "f" column: the state frozen at `t_f`.
    pub fn last(&self) -> &DataVars {
        self.columns.last().expect("at least two columns")
    }
}

/// Names of the perturbed copies used by the robust encoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerturbedVars {
    /// `t̃_{C,1} … t̃_{C,n+1}`, per car.
    pub times: BTreeMap<CarId, Vec<String>>,
    pub pos: BTreeMap<CarId, String>,
    pub sf: BTreeMap<CarId, String>,
    pub x_l: String,
    pub x_r: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarLayout {
    pub cars: BTreeMap<CarId, CarLayout>,
    pub t_f: String,
    pub x_l: String,
    pub x_r: String,
    pub perturbed: Option<PerturbedVars>,
}

fn sanitize(id: &str) -> String {
    let mut s: String = id.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
    if !s.starts_with(|c: char| c.is_ascii_alphabetic()) {
        s.insert_str(0, "car");
    }
    s
}

impl VarLayout {
    /// Lays out variables for `word` over `cars`; each car gets
    /// `|σ_C| + 1` columns.
    pub fn new(word: &TimedWord, cars: &[CarId]) -> VarLayout {
        let mut used = BTreeSet::new();
        let mut layouts = BTreeMap::new();
        for (k, car) in cars.iter().enumerate() {
            let mut prefix = sanitize(car.as_str());
            if !used.insert(prefix.clone()) {
                prefix = format!("{prefix}_{k}");
                used.insert(prefix.clone());
            }
            let projection = word.project(car);
            let letters: Vec<Action> = projection.events().iter().map(|e| e.action.clone()).collect();
            let stamps: Vec<Rational> = projection.events().iter().map(|e| e.time.clone()).collect();
            let columns = (1..=letters.len() + 1).map(|i| DataVars::new(&prefix, &i.to_string())).collect();
            let times = (1..=letters.len() + 1).map(|i| format!("t_{prefix}_{i}")).collect();
            layouts.insert(car.clone(), CarLayout { car: car.clone(), prefix, letters, stamps, columns, times });
        }
        VarLayout {
            cars: layouts,
            t_f: "t_f".into(),
            x_l: "x_f_l".into(),
            x_r: "x_f_r".into(),
            perturbed: None,
        }
    }

    /// Adds the perturbed time stamps, final positions, fronts and view.
    pub fn with_perturbation(mut self) -> VarLayout {
        let times = self
            .cars
            .iter()
            .map(|(id, c)| (id.clone(), (1..=c.times.len()).map(|i| format!("tp_{}_{i}", c.prefix)).collect()))
            .collect();
        let pos = self.cars.iter().map(|(id, c)| (id.clone(), format!("{}_f_pos_p", c.prefix))).collect();
        let sf = self.cars.iter().map(|(id, c)| (id.clone(), format!("{}_f_sf_p", c.prefix))).collect();
        self.perturbed = Some(PerturbedVars { times, pos, sf, x_l: "x_f_l_p".into(), x_r: "x_f_r_p".into() });
        self
    }

    /// Every layout variable, in a fixed order: data columns, times,
    /// `t_f`, the view pair, then perturbed copies.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in self.cars.values() {
            for col in &c.columns {
                out.extend(col.all().into_iter().cloned());
            }
        }
        for c in self.cars.values() {
            out.extend(c.times.iter().cloned());
        }
        out.push(self.t_f.clone());
        out.push(self.x_l.clone());
        out.push(self.x_r.clone());
        if let Some(p) = &self.perturbed {
            for ts in p.times.values() {
                out.extend(ts.iter().cloned());
            }
            out.extend(p.pos.values().cloned());
            out.extend(p.sf.values().cloned());
            out.push(p.x_l.clone());
            out.push(p.x_r.clone());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testdata::running_example;

    #[test]
    fn column_counts() {
        let s = running_example();
        let layout = VarLayout::new(&s.word, &s.cars());
        let len = |c: &str| layout.cars[&CarId::from(c)].columns.len();
        assert_eq!((len("C"), len("D"), len("E")), (2, 3, 4));
        let columns: usize = layout.cars.values().map(|c| c.columns.len()).sum();
        assert_eq!(layout.variables().len(), 7 * columns + columns + 3);
        let unique: BTreeSet<_> = layout.variables().into_iter().collect();
        assert_eq!(unique.len(), layout.variables().len());
        assert_eq!(layout.cars[&CarId::from("E")].last().pos, "E_4_pos");
    }

    #[test]
    fn names_are_sanitized() {
        let word = TimedWord::closed(vec![]).unwrap();
        let layout = VarLayout::new(&word, &[CarId::from("9 lives"), CarId::from("9_lives")]);
        let prefixes: Vec<_> = layout.cars.values().map(|c| c.prefix.clone()).collect();
        assert_eq!(prefixes, vec!["car9_lives".to_string(), "car9_lives_1".to_string()]);
    }
}
