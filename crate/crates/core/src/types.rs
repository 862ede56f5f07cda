//! Domain values shared by every module: object attributes, object sets,
//! panels, observation encoding and the two halves of an action.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard upper bound on objects per episode; sets are stored as `u16` bitmasks.
pub const MAX_OBJECTS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Cube,
    Sphere,
    Cylinder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Material {
    Metal,
    Rubber,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Gray,
    Red,
    Blue,
    Green,
    Brown,
    Cyan,
    Purple,
    Yellow,
}

impl Shape {
    pub const ALL: [Shape; 3] = [Shape::Cube, Shape::Sphere, Shape::Cylinder];
}

impl Material {
    pub const ALL: [Material; 2] = [Material::Metal, Material::Rubber];
}

impl Color {
    pub const ALL: [Color; 8] = [
        Color::Gray,
        Color::Red,
        Color::Blue,
        Color::Green,
        Color::Brown,
        Color::Cyan,
        Color::Purple,
        Color::Yellow,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub shape: Shape,
    pub material: Material,
    pub color: Color,
}

impl ObjectSpec {
    /// Number of distinct attribute combinations.
    pub const POOL_SIZE: usize = Shape::ALL.len() * Material::ALL.len() * Color::ALL.len();

    /// The `index`-th combination of the pool, in shape-major order.
    pub fn from_pool_index(index: usize) -> ObjectSpec {
        assert!(index < Self::POOL_SIZE, "pool index {index} out of range");
        let per_shape = Material::ALL.len() * Color::ALL.len();
        ObjectSpec {
            shape: Shape::ALL[index / per_shape],
            material: Material::ALL[(index % per_shape) / Color::ALL.len()],
            color: Color::ALL[index % Color::ALL.len()],
        }
    }
}

/// A set of object indices, stored as a bitmask.
///
/// Used both for the hidden Blicket assignment and for the objects placed on
/// the machine in a panel. Serializes as a sorted list of indices.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectSet(u16);

/// Hidden ground truth, or one hypothesis of the oracle.
pub type BlicketAssignment = ObjectSet;

impl ObjectSet {
    pub const EMPTY: ObjectSet = ObjectSet(0);

    pub fn from_bits(bits: u16) -> Self {
        ObjectSet(bits)
    }

    /// `{0, 1, ..., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_OBJECTS);
        ObjectSet(((1u32 << n) - 1) as u16)
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_OBJECTS && self.0 & (1 << i) != 0
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < MAX_OBJECTS, "object index {i} out of range");
        self.0 |= 1 << i;
    }

    pub fn remove(&mut self, i: usize) {
        if i < MAX_OBJECTS {
            self.0 &= !(1 << i);
        }
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn intersects(self, other: ObjectSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn union(self, other: ObjectSet) -> ObjectSet {
        ObjectSet(self.0 | other.0)
    }

    pub fn intersection(self, other: ObjectSet) -> ObjectSet {
        ObjectSet(self.0 & other.0)
    }

    pub fn difference(self, other: ObjectSet) -> ObjectSet {
        ObjectSet(self.0 & !other.0)
    }

    /// Largest member index plus one (0 for the empty set).
    pub fn span(self) -> usize {
        MAX_OBJECTS - self.0.leading_zeros() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..MAX_OBJECTS).filter(move |&i| self.contains(i))
    }
}

impl FromIterator<usize> for ObjectSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = ObjectSet::EMPTY;
        for i in iter {
            set.insert(i);
        }
        set
    }
}

impl fmt::Debug for ObjectSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for ObjectSet {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for ObjectSet {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let indices = Vec::<usize>::deserialize(deserializer)?;
        let mut set = ObjectSet::EMPTY;
        for i in indices {
            if i >= MAX_OBJECTS {
                return Err(serde::de::Error::custom(format!(
                    "object index {i} out of range"
                )));
            }
            set.insert(i);
        }
        Ok(set)
    }
}

/// One experiment: objects placed on the machine and whether it lit up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Panel {
    pub objects: ObjectSet,
    pub machine_on: bool,
}

impl Panel {
    pub fn new(objects: ObjectSet, machine_on: bool) -> Self {
        Panel {
            objects,
            machine_on,
        }
    }

    /// The panel the disjunctive machine produces for `objects` under `truth`.
    pub fn observe(objects: ObjectSet, truth: BlicketAssignment) -> Self {
        Panel {
            objects,
            machine_on: objects.intersects(truth),
        }
    }
}

/// Presence bits for each object followed by one machine-status bit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObservationVector(Vec<u8>);

impl ObservationVector {
    pub fn encode(panel: &Panel, num_objects: usize) -> Result<Self> {
        if num_objects > MAX_OBJECTS || panel.objects.span() > num_objects {
            return Err(Error::Contract(format!(
                "panel {:?} does not fit in {num_objects} objects",
                panel.objects
            )));
        }
        let mut bits: Vec<u8> = (0..num_objects)
            .map(|i| panel.objects.contains(i) as u8)
            .collect();
        bits.push(panel.machine_on as u8);
        Ok(ObservationVector(bits))
    }

    pub fn decode(&self) -> Result<Panel> {
        let (status, presence) = self
            .0
            .split_last()
            .ok_or_else(|| Error::Contract("empty observation vector".into()))?;
        if presence.len() > MAX_OBJECTS {
            return Err(Error::Contract(format!(
                "observation has {} objects",
                presence.len()
            )));
        }
        let mut objects = ObjectSet::EMPTY;
        for (i, &bit) in presence.iter().enumerate() {
            match bit {
                0 => {}
                1 => objects.insert(i),
                other => {
                    return Err(Error::Contract(format!(
                        "non-binary observation entry {other}"
                    )))
                }
            }
        }
        let machine_on = match status {
            0 => false,
            1 => true,
            other => {
                return Err(Error::Contract(format!(
                    "non-binary machine status {other}"
                )))
            }
        };
        Ok(Panel {
            objects,
            machine_on,
        })
    }

    pub fn zeros(num_objects: usize) -> Self {
        ObservationVector(vec![0; num_objects + 1])
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn check_probabilities(what: &str, values: &[f64]) -> Result<()> {
    for (i, &p) in values.iter().enumerate() {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Contract(format!(
                "{what}[{i}] = {p} is outside [0, 1]"
            )));
        }
    }
    Ok(())
}

macro_rules! probability_vector {
    ($(#[$meta:meta])* $name:ident, $what:literal) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
        #[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
        pub struct $name(Vec<f64>);

        impl $name {
            pub fn new(values: Vec<f64>) -> Result<Self> {
                check_probabilities($what, &values)?;
                Ok($name(values))
            }

            pub fn uniform(num_objects: usize, value: f64) -> Self {
                assert!((0.0..=1.0).contains(&value));
                $name(vec![value; num_objects])
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }
        }

        impl TryFrom<Vec<f64>> for $name {
            type Error = Error;

            fn try_from(values: Vec<f64>) -> Result<Self> {
                $name::new(values)
            }
        }

        impl From<$name> for Vec<f64> {
            fn from(v: $name) -> Vec<f64> {
                v.0
            }
        }
    };
}

probability_vector!(
    /// Per-object probability of being a Blicket.
    BeliefVector,
    "belief"
);

probability_vector!(
    /// Per-object probability of placing the object on the machine next.
    TrialVector,
    "trial"
);

impl BeliefVector {
    /// Hard 0/1 belief matching an assignment exactly.
    pub fn indicator(set: ObjectSet, num_objects: usize) -> Self {
        BeliefVector(
            (0..num_objects)
                .map(|i| if set.contains(i) { 1.0 } else { 0.0 })
                .collect(),
        )
    }
}

impl TrialVector {
    pub fn indicator(set: ObjectSet, num_objects: usize) -> Self {
        TrialVector(
            (0..num_objects)
                .map(|i| if set.contains(i) { 1.0 } else { 0.0 })
                .collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub trial: TrialVector,
    pub belief: BeliefVector,
}

impl Action {
    pub fn new(trial: TrialVector, belief: BeliefVector) -> Result<Self> {
        if trial.len() != belief.len() {
            return Err(Error::Contract(format!(
                "trial has {} entries but belief has {}",
                trial.len(),
                belief.len()
            )));
        }
        Ok(Action { trial, belief })
    }

    /// Parses the flat wire layout: `trial[0..n]` followed by `belief[0..n]`.
    pub fn from_wire(values: &[f64], num_objects: usize) -> Result<Self> {
        if values.len() != 2 * num_objects {
            return Err(Error::Contract(format!(
                "action needs {} floats (trial then belief), got {}",
                2 * num_objects,
                values.len()
            )));
        }
        let (trial, belief) = values.split_at(num_objects);
        Action::new(
            TrialVector::new(trial.to_vec())?,
            BeliefVector::new(belief.to_vec())?,
        )
    }

    pub fn to_wire(&self) -> Vec<f64> {
        self.trial
            .as_slice()
            .iter()
            .chain(self.belief.as_slice())
            .copied()
            .collect()
    }

    pub fn num_objects(&self) -> usize {
        self.belief.len()
    }
}

/// Thresholded reading of one belief entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    Blicket,
    NonBlicket,
    Undecided,
}

/// Strict 0.5 threshold; an entry of exactly 0.5 stays undecided.
pub fn threshold_decisions(belief: &BeliefVector) -> Vec<Decision> {
    belief
        .as_slice()
        .iter()
        .map(|&p| {
            if p > 0.5 {
                Decision::Blicket
            } else if p < 0.5 {
                Decision::NonBlicket
            } else {
                Decision::Undecided
            }
        })
        .collect()
}
