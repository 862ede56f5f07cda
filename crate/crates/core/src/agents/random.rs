use rand::Rng;
use rand::SeedableRng;

use super::Agent;
use crate::rng::SeededRng;
use crate::types::{Action, BeliefVector, Panel, TrialVector};

/// Ignores every observation; each of the 2n action entries is uniform on `[0, 1]`.
pub struct RandomAgent {
    num_objects: usize,
    rng: SeededRng,
}

impl RandomAgent {
    pub fn new(num_objects: usize) -> Self {
        RandomAgent {
            num_objects,
            rng: SeededRng::seed_from_u64(0),
        }
    }
}

/// `n` independent uniform draws, used for every "random trial" in this module tree.
pub(super) fn uniform_trial(rng: &mut SeededRng, n: usize) -> TrialVector {
    TrialVector::new((0..n).map(|_| rng.gen::<f64>()).collect())
        .expect("uniform draws lie in [0, 1)")
}

impl Agent for RandomAgent {
    fn name(&self) -> &'static str {
        "random"
    }

    fn reset(&mut self, _context: &[Panel], rng: SeededRng) {
        self.rng = rng;
    }

    fn act(&mut self) -> Action {
        let trial = uniform_trial(&mut self.rng, self.num_objects);
        let belief = BeliefVector::new(
            (0..self.num_objects)
                .map(|_| self.rng.gen::<f64>())
                .collect(),
        )
        .expect("uniform draws lie in [0, 1)");
        Action { trial, belief }
    }

    fn observe(&mut self, _panel: &Panel) {}
}
