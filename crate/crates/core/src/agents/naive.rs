use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::Agent;
use crate::rng::SeededRng;
use crate::types::{Action, BeliefVector, ObjectSet, Panel, TrialVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Knowledge {
    Unknown,
    Blicket,
    NonBlicket,
}

/// Tests one untested, unresolved object per step.
///
/// A lone object on a lit machine is a Blicket. Members of an inactive panel
/// are non-Blickets; with `inactive_evidence` off this is only applied to
/// single-object panels.
pub struct NaiveAgent {
    num_objects: usize,
    inactive_evidence: bool,
    knowledge: Vec<Knowledge>,
    tested: ObjectSet,
    rng: SeededRng,
}

impl NaiveAgent {
    pub fn new(num_objects: usize, inactive_evidence: bool) -> Self {
        NaiveAgent {
            num_objects,
            inactive_evidence,
            knowledge: vec![Knowledge::Unknown; num_objects],
            tested: ObjectSet::EMPTY,
            rng: SeededRng::seed_from_u64(0),
        }
    }

    pub fn knowledge(&self) -> &[Knowledge] {
        &self.knowledge
    }

    fn learn(&mut self, panel: &Panel) {
        let single = panel.objects.len() == 1;
        if single {
            self.tested = self.tested.union(panel.objects);
        }
        for i in panel.objects.iter().filter(|&i| i < self.num_objects) {
            let update = match (panel.machine_on, single) {
                (true, true) => Some(Knowledge::Blicket),
                (false, true) => Some(Knowledge::NonBlicket),
                (false, false) if self.inactive_evidence => Some(Knowledge::NonBlicket),
                _ => None,
            };
            if let (Some(k), Knowledge::Unknown) = (update, self.knowledge[i]) {
                self.knowledge[i] = k;
            }
        }
    }

    fn belief(&self) -> BeliefVector {
        let probs = self
            .knowledge
            .iter()
            .map(|k| match k {
                Knowledge::Blicket => 1.0,
                Knowledge::NonBlicket => 0.0,
                Knowledge::Unknown => 0.5,
            })
            .collect();
        BeliefVector::new(probs).expect("0, 0.5 and 1 are probabilities")
    }
}

impl Agent for NaiveAgent {
    fn name(&self) -> &'static str {
        "naive"
    }

    fn reset(&mut self, context: &[Panel], rng: SeededRng) {
        self.knowledge = vec![Knowledge::Unknown; self.num_objects];
        self.tested = ObjectSet::EMPTY;
        self.rng = rng;
        for panel in context {
            self.learn(panel);
        }
    }

    fn act(&mut self) -> Action {
        let candidates: Vec<usize> = (0..self.num_objects)
            .filter(|&i| self.knowledge[i] == Knowledge::Unknown && !self.tested.contains(i))
            .collect();
        let trial = candidates
            .choose(&mut self.rng)
            .map_or(ObjectSet::EMPTY, |&i| [i].into_iter().collect());
        Action {
            trial: TrialVector::indicator(trial, self.num_objects),
            belief: self.belief(),
        }
    }

    fn observe(&mut self, panel: &Panel) {
        self.learn(panel);
    }
}
