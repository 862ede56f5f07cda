use rand::SeedableRng;

use super::random::uniform_trial;
use super::Agent;
use crate::oracle::FeasibleSet;
use crate::rng::SeededRng;
use crate::types::{Action, BeliefVector, Panel, TrialVector};

/// Object whose belief is strictly inside (0, 1) and closest to 0.5; ties go
/// to the lowest index.
pub fn most_uncertain(belief: &BeliefVector) -> Option<usize> {
    belief
        .as_slice()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0 && p < 1.0)
        .fold(None, |best: Option<(usize, f64)>, (i, &p)| {
            let d = (p - 0.5).abs();
            match best {
                Some((_, bd)) if bd <= d => best,
                _ => Some((i, d)),
            }
        })
        .map(|(i, _)| i)
}

struct Tracker {
    num_objects: usize,
    prior: Option<[usize; 2]>,
    feasible: FeasibleSet,
}

impl Tracker {
    fn new(num_objects: usize, prior: Option<[usize; 2]>) -> Self {
        Tracker {
            num_objects,
            prior,
            feasible: FeasibleSet::new(num_objects),
        }
    }

    fn reset(&mut self, context: &[Panel]) {
        self.feasible = FeasibleSet::new(self.num_objects);
        for panel in context {
            self.observe(panel);
        }
    }

    fn observe(&mut self, panel: &Panel) {
        // Environment panels always leave the truth feasible; a contradiction
        // means a corrupted history, and the agent keeps its last consistent set.
        let _ = self.feasible.filter(panel);
    }

    fn belief(&self) -> BeliefVector {
        self.feasible
            .oracle_belief(self.prior)
            .unwrap_or_else(|_| BeliefVector::uniform(self.num_objects, 0.5))
    }
}

/// Oracle belief from its own feasible set, random trials.
pub struct SearchRandomAgent {
    tracker: Tracker,
    rng: SeededRng,
}

impl SearchRandomAgent {
    pub fn new(num_objects: usize, prior: Option<[usize; 2]>) -> Self {
        SearchRandomAgent {
            tracker: Tracker::new(num_objects, prior),
            rng: SeededRng::seed_from_u64(0),
        }
    }
}

impl Agent for SearchRandomAgent {
    fn name(&self) -> &'static str {
        "search-random"
    }

    fn reset(&mut self, context: &[Panel], rng: SeededRng) {
        self.tracker.reset(context);
        self.rng = rng;
    }

    fn act(&mut self) -> Action {
        Action {
            trial: uniform_trial(&mut self.rng, self.tracker.num_objects),
            belief: self.tracker.belief(),
        }
    }

    fn observe(&mut self, panel: &Panel) {
        self.tracker.observe(panel);
    }
}

/// Oracle belief from its own feasible set; tests the single most uncertain object.
pub struct SearchNaiveAgent {
    tracker: Tracker,
}

impl SearchNaiveAgent {
    pub fn new(num_objects: usize, prior: Option<[usize; 2]>) -> Self {
        SearchNaiveAgent {
            tracker: Tracker::new(num_objects, prior),
        }
    }
}

impl Agent for SearchNaiveAgent {
    fn name(&self) -> &'static str {
        "search-naive"
    }

    fn reset(&mut self, context: &[Panel], _rng: SeededRng) {
        self.tracker.reset(context);
    }

    fn act(&mut self) -> Action {
        let belief = self.tracker.belief();
        let trial = most_uncertain(&belief).into_iter().collect();
        Action {
            trial: TrialVector::indicator(trial, self.tracker.num_objects),
            belief,
        }
    }

    fn observe(&mut self, panel: &Panel) {
        self.tracker.observe(panel);
    }
}
