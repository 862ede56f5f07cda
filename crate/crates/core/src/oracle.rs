//! Exact hypothesis tracking for the disjunctive Blicket machine.
//!
//! Every subset of the objects is a candidate assignment. A [`FeasibleSet`]
//! keeps one bit per subset (512 bits for nine objects) and clears the bits
//! of hypotheses an observed panel rules out.

use serde::{Deserialize, Serialize};

use crate::divergence::belief_divergence;
use crate::error::{Error, Result};
use crate::types::{
    threshold_decisions, BeliefVector, BlicketAssignment, Decision, ObjectSet, Panel, MAX_OBJECTS,
};

/// Per-object membership frequency over the feasible set.
pub type OracleBelief = BeliefVector;

/// A panel is explained by a hypothesis iff the machine fires exactly when
/// some hypothesised Blicket is on it.
pub fn is_consistent(hypothesis: BlicketAssignment, panel: &Panel) -> bool {
    panel.objects.intersects(hypothesis) == panel.machine_on
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibleSet {
    num_objects: usize,
    words: Vec<u64>,
    observations: Vec<Panel>,
}

impl FeasibleSet {
    /// All `2^n` assignments, no observations.
    pub fn new(num_objects: usize) -> Self {
        assert!(num_objects <= MAX_OBJECTS, "at most {MAX_OBJECTS} objects");
        let hypotheses = 1usize << num_objects;
        let mut words = vec![u64::MAX; hypotheses.div_ceil(64)];
        let tail = hypotheses % 64;
        if tail != 0 {
            *words.last_mut().unwrap() = (1u64 << tail) - 1;
        }
        FeasibleSet {
            num_objects,
            words,
            observations: Vec::new(),
        }
    }

    pub fn from_panels<'a>(
        num_objects: usize,
        panels: impl IntoIterator<Item = &'a Panel>,
    ) -> Result<Self> {
        let mut set = FeasibleSet::new(num_objects);
        for panel in panels {
            set.filter(panel)?;
        }
        Ok(set)
    }

    pub fn num_objects(&self) -> usize {
        self.num_objects
    }

    pub fn observations(&self) -> &[Panel] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn contains(&self, hypothesis: BlicketAssignment) -> bool {
        let h = hypothesis.bits() as usize;
        h >> self.num_objects == 0 && self.words[h / 64] & (1 << (h % 64)) != 0
    }

    pub fn iter(&self) -> impl Iterator<Item = BlicketAssignment> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(ObjectSet::from_bits((w * 64 + bit) as u16))
            })
        })
    }

    /// Keeps exactly the hypotheses consistent with `panel` and records it.
    ///
    /// Fails without modifying `self` if nothing would survive.
    pub fn filter(&mut self, panel: &Panel) -> Result<()> {
        if panel.objects.span() > self.num_objects {
            return Err(Error::Contract(format!(
                "panel {:?} mentions objects beyond {}",
                panel.objects, self.num_objects
            )));
        }
        let mut next = self.words.clone();
        for (w, word) in next.iter_mut().enumerate() {
            if *word == 0 {
                continue;
            }
            let mut keep = 0u64;
            let mut rest = *word;
            while rest != 0 {
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let h = ObjectSet::from_bits((w * 64 + bit) as u16);
                if is_consistent(h, panel) {
                    keep |= 1 << bit;
                }
            }
            *word = keep;
        }
        if next.iter().all(|&w| w == 0) {
            return Err(Error::Inconsistent(format!(
                "panel {panel:?} contradicts all hypotheses left after {} observations",
                self.observations.len()
            )));
        }
        self.words = next;
        self.observations.push(*panel);
        Ok(())
    }

    /// Membership frequency of each object over the feasible hypotheses,
    /// optionally restricted to cardinalities in `cardinality` (inclusive).
    pub fn oracle_belief(&self, cardinality: Option<[usize; 2]>) -> Result<OracleBelief> {
        let mut counts = vec![0u64; self.num_objects];
        let mut total = 0u64;
        for h in self.iter() {
            if let Some([lo, hi]) = cardinality {
                if !(lo..=hi).contains(&h.len()) {
                    continue;
                }
            }
            total += 1;
            for i in h.iter() {
                counts[i] += 1;
            }
        }
        if total == 0 {
            return Err(Error::Inconsistent(
                "no feasible assignment left for the oracle".into(),
            ));
        }
        BeliefVector::new(
            counts
                .into_iter()
                .map(|c| c as f64 / total as f64)
                .collect(),
        )
    }

    /// Number of hypotheses the oracle averages over under `cardinality`.
    pub fn count_with(&self, cardinality: Option<[usize; 2]>) -> usize {
        match cardinality {
            None => self.len(),
            Some([lo, hi]) => self.iter().filter(|h| (lo..=hi).contains(&h.len())).count(),
        }
    }
}

/// True iff the thresholded belief names exactly the members of `truth`.
pub fn is_solved(belief: &BeliefVector, truth: BlicketAssignment) -> bool {
    threshold_decisions(belief)
        .iter()
        .enumerate()
        .all(|(i, d)| match d {
            Decision::Blicket => truth.contains(i),
            Decision::NonBlicket => !truth.contains(i),
            Decision::Undecided => false,
        })
}

/// Reward of one step: the solve bonus alone when solved, otherwise the step
/// penalty minus the belief's divergence from the oracle.
pub fn step_reward(
    solved: bool,
    belief: &BeliefVector,
    oracle: &OracleBelief,
    solve_bonus: f64,
    step_penalty: f64,
) -> Result<f64> {
    if solved {
        return Ok(solve_bonus);
    }
    Ok(step_penalty - belief_divergence(belief, oracle)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(items: &[usize]) -> ObjectSet {
        items.iter().copied().collect()
    }

    fn brute_force(n: usize, panels: &[Panel]) -> Vec<ObjectSet> {
        (0u16..(1 << n))
            .map(ObjectSet::from_bits)
            .filter(|h| panels.iter().all(|p| is_consistent(*h, p)))
            .collect()
    }

    #[test]
    fn consistency_examples() {
        assert!(is_consistent(set(&[1]), &Panel::new(set(&[0, 1]), true)));
        assert!(!is_consistent(set(&[1]), &Panel::new(set(&[1]), false)));
        assert!(is_consistent(
            ObjectSet::EMPTY,
            &Panel::new(ObjectSet::EMPTY, false)
        ));
    }

    #[test]
    fn filter_examples() {
        let mut fs = FeasibleSet::new(9);
        assert_eq!(fs.len(), 512);
        fs.filter(&Panel::new(set(&[0]), false)).unwrap();
        assert_eq!(fs.len(), 256);
        assert!(fs.iter().all(|h| !h.contains(0)));

        let mut fs = FeasibleSet::new(9);
        fs.filter(&Panel::new(set(&[0, 1]), true)).unwrap();
        fs.filter(&Panel::new(set(&[0]), false)).unwrap();
        assert_eq!(fs.len(), 128);
        assert!(fs.iter().all(|h| !h.contains(0) && h.contains(1)));
        let belief = fs.oracle_belief(None).unwrap();
        assert_eq!(
            belief.as_slice(),
            &[0.0, 1.0, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5]
        );

        let before = fs.clone();
        fs.filter(&Panel::new(set(&[0]), false)).unwrap();
        assert_eq!(
            fs.iter().collect::<Vec<_>>(),
            before.iter().collect::<Vec<_>>()
        );
    }

    #[test]
    fn oracle_examples() {
        let fs = FeasibleSet::new(9);
        assert_eq!(fs.oracle_belief(None).unwrap().as_slice(), &[0.5; 9]);

        let fs = FeasibleSet::from_panels(9, &[Panel::new(set(&[0]), true)]).unwrap();
        assert_eq!(fs.len(), 256);
        let b = fs.oracle_belief(None).unwrap();
        assert_eq!(b.as_slice()[0], 1.0);
        assert!(b.as_slice()[1..].iter().all(|&p| p == 0.5));
    }

    #[test]
    fn cardinality_prior_restricts_hypotheses() {
        let fs = FeasibleSet::new(9);
        // Subsets of size 3..=8: 512 - C(9,0) - C(9,1) - C(9,2) - C(9,9) = 512 - 1 - 9 - 36 - 1.
        assert_eq!(fs.count_with(Some([3, 8])), 465);
        let b = fs.oracle_belief(Some([3, 8])).unwrap();
        // Each object lies in sum_{k=3..8} C(8, k-1) = 2^8 - C(8,0) - C(8,1) - C(8,8) = 246 of them.
        assert!(b
            .as_slice()
            .iter()
            .all(|&p| (p - 246.0 / 465.0).abs() < 1e-15));

        let fs = FeasibleSet::from_panels(3, &[Panel::new(set(&[0, 1, 2]), false)]).unwrap();
        assert!(fs.oracle_belief(Some([1, 3])).is_err());
    }

    #[test]
    fn contradiction_is_an_error_and_leaves_the_set_unchanged() {
        let mut fs = FeasibleSet::from_panels(9, &[Panel::new(set(&[3]), true)]).unwrap();
        let before = fs.clone();
        let err = fs.filter(&Panel::new(set(&[3, 4]), false)).unwrap_err();
        assert!(matches!(err, Error::Inconsistent(_)));
        assert_eq!(fs, before);
    }

    #[test]
    fn solvedness() {
        let truth = set(&[0, 4]);
        let mut v = vec![0.1; 9];
        v[0] = 0.9;
        v[4] = 0.9;
        assert!(is_solved(&BeliefVector::new(v.clone()).unwrap(), truth));
        v[7] = 0.5;
        assert!(!is_solved(&BeliefVector::new(v).unwrap(), truth));
        assert!(is_solved(&BeliefVector::indicator(truth, 9), truth));
        assert!(!is_solved(&BeliefVector::indicator(set(&[0]), 9), truth));
    }

    #[test]
    fn reward_examples() {
        let oracle = BeliefVector::indicator(set(&[1, 2]), 9);
        assert_eq!(
            step_reward(true, &BeliefVector::uniform(9, 0.5), &oracle, 20.0, -1.0).unwrap(),
            20.0
        );
        assert_eq!(
            step_reward(false, &oracle, &oracle, 20.0, -1.0).unwrap(),
            -1.0
        );
        let complement = BeliefVector::indicator(ObjectSet::full(9).difference(set(&[1, 2])), 9);
        assert!(
            (step_reward(false, &complement, &oracle, 20.0, -1.0).unwrap() + 2.0).abs() < 1e-12
        );
    }

    fn panel_strategy(n: usize) -> impl Strategy<Value = (u16, bool)> {
        (0u16..(1 << n), any::<bool>())
    }

    proptest! {
        #[test]
        fn incremental_filter_matches_enumeration(
            truth in 0u16..512,
            raw in proptest::collection::vec(panel_strategy(9), 0..12),
        ) {
            let truth = ObjectSet::from_bits(truth);
            let panels: Vec<Panel> = raw.iter().map(|&(bits, _)| Panel::observe(ObjectSet::from_bits(bits), truth)).collect();
            let mut fs = FeasibleSet::new(9);
            let mut last = fs.len();
            for (k, p) in panels.iter().enumerate() {
                fs.filter(p).unwrap();
                prop_assert!(fs.len() <= last);
                last = fs.len();
                prop_assert!(fs.contains(truth));
                prop_assert_eq!(fs.iter().collect::<Vec<_>>(), brute_force(9, &panels[..=k]));
            }
            let belief = fs.oracle_belief(None).unwrap();
            for (i, &p) in belief.as_slice().iter().enumerate() {
                if p == 1.0 { prop_assert!(truth.contains(i)); }
                if p == 0.0 { prop_assert!(!truth.contains(i)); }
            }
        }

        #[test]
        fn small_universes_match_enumeration(
            n in 1usize..=7,
            raw in proptest::collection::vec(panel_strategy(7), 0..6),
        ) {
            let mask = ((1u32 << n) - 1) as u16;
            let panels: Vec<Panel> = raw.iter().map(|&(b, on)| Panel::new(ObjectSet::from_bits(b & mask), on)).collect();
            let expected = brute_force(n, &panels);
            match FeasibleSet::from_panels(n, &panels) {
                Ok(fs) => prop_assert_eq!(fs.iter().collect::<Vec<_>>(), expected),
                Err(_) => prop_assert!(expected.is_empty()),
            }
        }
    }
}
