use rand::SeedableRng;

use super::random::uniform_trial;
use super::Agent;
use crate::rng::SeededRng;
use crate::types::{Action, BeliefVector, Panel};

const SMOOTHING: f64 = 1.0;

/// Bernoulli naive Bayes over panels: features are the presence bits, the
/// class is the machine status. Entry `i` of the result is the posterior of
/// "machine on" for the input where only object `i` is present.
///
/// Class priors and per-feature likelihoods both use Laplace smoothing, so the
/// posterior is defined even when one class was never observed.
pub fn naive_bayes_belief(panels: &[Panel], num_objects: usize) -> BeliefVector {
    let mut rows = [0usize; 2];
    let mut present = [vec![0usize; num_objects], vec![0usize; num_objects]];
    for panel in panels {
        let class = panel.machine_on as usize;
        rows[class] += 1;
        for i in panel.objects.iter().filter(|&i| i < num_objects) {
            present[class][i] += 1;
        }
    }
    let total = (rows[0] + rows[1]) as f64;

    // log P(class) + sum_j log P(x_j | class) for each single-object query.
    let log_joint = |class: usize, query: usize| -> f64 {
        let n_c = rows[class] as f64;
        let mut acc = ((n_c + SMOOTHING) / (total + 2.0 * SMOOTHING)).ln();
        for (j, &count) in present[class].iter().enumerate().take(num_objects) {
            let p_one = (count as f64 + SMOOTHING) / (n_c + 2.0 * SMOOTHING);
            acc += if j == query {
                p_one.ln()
            } else {
                (1.0 - p_one).ln()
            };
        }
        acc
    };

    let probs = (0..num_objects)
        .map(|i| {
            let on = log_joint(1, i);
            let off = log_joint(0, i);
            // Logistic of the log-odds; stays inside [0, 1].
            1.0 / (1.0 + (off - on).exp())
        })
        .collect();
    BeliefVector::new(probs).expect("posterior is a probability")
}

/// Naive-Bayes belief with random trials.
pub struct BayesAgent {
    num_objects: usize,
    panels: Vec<Panel>,
    rng: SeededRng,
}

impl BayesAgent {
    pub fn new(num_objects: usize) -> Self {
        BayesAgent {
            num_objects,
            panels: Vec::new(),
            rng: SeededRng::seed_from_u64(0),
        }
    }
}

impl Agent for BayesAgent {
    fn name(&self) -> &'static str {
        "bayes"
    }

    fn reset(&mut self, context: &[Panel], rng: SeededRng) {
        self.panels = context.to_vec();
        self.rng = rng;
    }

    fn act(&mut self) -> Action {
        Action {
            trial: uniform_trial(&mut self.rng, self.num_objects),
            belief: naive_bayes_belief(&self.panels, self.num_objects),
        }
    }

    fn observe(&mut self, panel: &Panel) {
        self.panels.push(*panel);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::ObjectSet;

    fn set(items: &[usize]) -> ObjectSet {
        items.iter().copied().collect()
    }

    /// Hand-written counterpart using plain probabilities instead of logs.
    fn posterior_on(panels: &[Panel], n: usize, query: usize) -> f64 {
        let n_on = panels.iter().filter(|p| p.machine_on).count() as f64;
        let n_off = panels.len() as f64 - n_on;
        let mut joint = [0.0; 2];
        for (class, n_c) in [(0usize, n_off), (1, n_on)] {
            let mut lik = (n_c + 1.0) / (panels.len() as f64 + 2.0);
            for j in 0..n {
                let c = panels
                    .iter()
                    .filter(|p| p.machine_on == (class == 1) && p.objects.contains(j))
                    .count() as f64;
                let p1 = (c + 1.0) / (n_c + 2.0);
                lik *= if j == query { p1 } else { 1.0 - p1 };
            }
            joint[class] = lik;
        }
        joint[1] / (joint[0] + joint[1])
    }

    #[test]
    fn two_panel_example() {
        // On class: x0 = 1 w.p. 2/3, all other bits 1 w.p. 1/3; off class mirrors
        // that for x1. The query "only 0" has likelihood ratio 4 : 1, so 0.8.
        let panels = [Panel::new(set(&[0]), true), Panel::new(set(&[1]), false)];
        let b = naive_bayes_belief(&panels, 9);
        assert!((b.as_slice()[0] - 0.8).abs() < 1e-12);
        assert!((b.as_slice()[1] - 0.2).abs() < 1e-12);
        assert!(b.as_slice()[1] < 0.5);
        for i in 0..9 {
            assert!((b.as_slice()[i] - posterior_on(&panels, 9, i)).abs() < 1e-12);
        }
    }

    #[test]
    fn only_inactive_panels_push_everything_below_half() {
        let panels = [Panel::new(set(&[1, 2]), false)];
        let b = naive_bayes_belief(&panels, 9);
        assert!(b.as_slice().iter().all(|&p| p < 0.5), "{b:?}");
    }

    #[test]
    fn matches_direct_computation_on_generated_context() {
        let spec =
            crate::sampler::generate_episode(3, 1, &crate::config::Config::default()).unwrap();
        let b = naive_bayes_belief(&spec.context, 9);
        for i in 0..9 {
            assert!((b.as_slice()[i] - posterior_on(&spec.context, 9, i)).abs() < 1e-12);
        }
    }
}
