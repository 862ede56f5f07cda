//! Seeded episode generation.
//!
//! Objects, the hidden assignment and the context panels are drawn from a
//! stream derived from `(master_seed, episode_index)`. Contexts are produced
//! by rejection: panel sets are drawn uniformly (uniform size, then a uniform
//! subset of that size) and kept only if they pass four checks:
//!
//! * C1 informative: at least one activated and one inactive panel;
//! * C2 unsolvable: the context oracle leaves some object strictly uncertain;
//! * C3 anti-covariation: the co-occurrence vote gets at least one object wrong;
//! * C4 query richness: some non-Blicket appears only in activated panels.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::oracle::FeasibleSet;
use crate::rng::{seeded_rng, SeededRng, STREAM_EPISODE};
use crate::types::{BlicketAssignment, ObjectSet, ObjectSpec, Panel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryLabel {
    Direct,
    Indirect,
    ScreeningOff,
    BackwardBlocking,
    Undetermined,
}

impl QueryLabel {
    pub const ALL: [QueryLabel; 5] = [
        QueryLabel::Direct,
        QueryLabel::Indirect,
        QueryLabel::ScreeningOff,
        QueryLabel::BackwardBlocking,
        QueryLabel::Undetermined,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            QueryLabel::Direct => "direct",
            QueryLabel::Indirect => "indirect",
            QueryLabel::ScreeningOff => "screening-off",
            QueryLabel::BackwardBlocking => "backward-blocking",
            QueryLabel::Undetermined => "undetermined",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeSpec {
    /// Master seed of the stream this episode was drawn from.
    pub seed: u64,
    pub episode_index: u64,
    pub objects: Vec<ObjectSpec>,
    pub ground_truth: BlicketAssignment,
    pub context: Vec<Panel>,
    pub query_labels: Vec<QueryLabel>,
}

/// The rejection check a candidate context failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContextViolation {
    Informative,
    Unsolvable,
    AntiCovariation,
    QueryRichness,
}

/// Distinct attribute combinations drawn uniformly without replacement.
pub fn sample_objects(rng: &mut SeededRng, num_objects: usize) -> Vec<ObjectSpec> {
    index::sample(rng, ObjectSpec::POOL_SIZE, num_objects)
        .into_iter()
        .map(ObjectSpec::from_pool_index)
        .collect()
}

/// Blicket count uniform over the configured range, then a uniform subset.
pub fn sample_assignment(rng: &mut SeededRng, config: &Config) -> BlicketAssignment {
    let [lo, hi] = config.blicket_count_range;
    let count = rng.gen_range(lo..=hi);
    index::sample(rng, config.num_objects, count)
        .into_iter()
        .collect()
}

fn sample_panel(rng: &mut SeededRng, config: &Config, truth: BlicketAssignment) -> Panel {
    let [lo, hi] = config.context_panel_size_range;
    let size = rng.gen_range(lo..=hi);
    let objects: ObjectSet = index::sample(rng, config.num_objects, size)
        .into_iter()
        .collect();
    Panel::observe(objects, truth)
}

/// Objects the co-occurrence vote calls Blickets: seen in strictly more
/// activated than inactive panels. Unseen objects are voted non-Blicket.
pub fn covariation_classify(context: &[Panel], num_objects: usize) -> ObjectSet {
    (0..num_objects)
        .filter(|&i| {
            let (on, off) = context.iter().filter(|p| p.objects.contains(i)).fold(
                (0usize, 0usize),
                |(on, off), p| {
                    if p.machine_on {
                        (on + 1, off)
                    } else {
                        (on, off + 1)
                    }
                },
            );
            on > off
        })
        .collect()
}

/// Non-Blickets that appear in at least one panel and only in activated ones.
/// Every activated panel holds a Blicket, so each such object sits next to one.
pub fn screening_off_candidates(
    context: &[Panel],
    truth: BlicketAssignment,
    num_objects: usize,
) -> ObjectSet {
    (0..num_objects)
        .filter(|&i| !truth.contains(i))
        .filter(|&i| {
            let mut containing = context.iter().filter(|p| p.objects.contains(i)).peekable();
            containing.peek().is_some() && containing.all(|p| p.machine_on)
        })
        .collect()
}

pub fn check_context(
    context: &[Panel],
    truth: BlicketAssignment,
    config: &Config,
) -> std::result::Result<(), ContextViolation> {
    let n = config.num_objects;
    if !(context.iter().any(|p| p.machine_on) && context.iter().any(|p| !p.machine_on)) {
        return Err(ContextViolation::Informative);
    }
    if screening_off_candidates(context, truth, n).is_empty() {
        return Err(ContextViolation::QueryRichness);
    }
    if covariation_classify(context, n) == truth {
        return Err(ContextViolation::AntiCovariation);
    }
    let prior = config
        .oracle_cardinality_prior
        .then_some(config.blicket_count_range);
    let interior = FeasibleSet::from_panels(n, context)
        .and_then(|fs| fs.oracle_belief(prior))
        .map(|b| b.as_slice().iter().any(|&p| p > 0.0 && p < 1.0))
        .unwrap_or(false);
    if !interior {
        return Err(ContextViolation::Unsolvable);
    }
    Ok(())
}

/// Necessary conditions for C1 and C4 to be jointly satisfiable under `truth`.
///
/// An inactive panel needs at least `min_size` non-Blickets, and C4 needs one
/// more non-Blicket that never appears in an inactive panel. With nine objects
/// and a minimum panel size of two this rules out seven or more Blickets.
pub fn context_satisfiable(truth: BlicketAssignment, config: &Config) -> bool {
    let [lo, hi] = config.context_panel_size_range;
    let non_blickets = config.num_objects - truth.len();
    config.num_context_panels >= 2 && !truth.is_empty() && hi >= 2 && non_blickets > lo
}

/// Draws panel sets until one passes C1-C4 or the panel budget runs out.
pub fn sample_context(
    rng: &mut SeededRng,
    truth: BlicketAssignment,
    config: &Config,
) -> Result<Vec<Panel>> {
    if !context_satisfiable(truth, config) {
        return Err(Error::Generation(format!(
            "no context can satisfy the constraints for assignment {truth:?}"
        )));
    }
    for _ in 0..config.panel_attempt_budget {
        let context: Vec<Panel> = (0..config.num_context_panels)
            .map(|_| sample_panel(rng, config, truth))
            .collect();
        if check_context(&context, truth, config).is_ok() {
            return Ok(context);
        }
    }
    Err(Error::Generation(format!(
        "panel budget of {} exhausted for assignment {truth:?}",
        config.panel_attempt_budget
    )))
}

/// Tries `initial` (or a fresh draw) and re-draws the assignment whenever its
/// context budget runs out.
pub fn sample_truth_and_context(
    rng: &mut SeededRng,
    config: &Config,
    initial: Option<BlicketAssignment>,
) -> Result<(BlicketAssignment, Vec<Panel>)> {
    let mut truth = initial.unwrap_or_else(|| sample_assignment(rng, config));
    for _ in 0..config.assignment_attempt_budget {
        match sample_context(rng, truth, config) {
            Ok(context) => return Ok((truth, context)),
            Err(Error::Generation(_)) => truth = sample_assignment(rng, config),
            Err(e) => return Err(e),
        }
    }
    Err(Error::Generation(format!(
        "no valid context after {} assignments",
        config.assignment_attempt_budget
    )))
}

/// Labels each object by the kind of inference the context supports for it.
///
/// Precedence: direct, indirect, backward-blocking, screening-off, undetermined.
/// * direct: a single panel settles it (member of an inactive panel, or alone on an activated one);
/// * indirect: the panels together settle it;
/// * backward-blocking: unsettled, and shares an activated panel with an object
///   that a single panel proves to be a Blicket;
/// * screening-off: a non-Blicket seen only in activated panels, each holding a
///   provable Blicket;
/// * undetermined: everything else.
pub fn classify_query_types(
    context: &[Panel],
    truth: BlicketAssignment,
    num_objects: usize,
) -> Result<Vec<QueryLabel>> {
    let oracle = FeasibleSet::from_panels(num_objects, context)?.oracle_belief(None)?;
    let p = oracle.as_slice();
    let directly_blicket: ObjectSet = context
        .iter()
        .filter(|panel| panel.machine_on && panel.objects.len() == 1)
        .map(|panel| panel.objects)
        .fold(ObjectSet::EMPTY, ObjectSet::union);
    let provable_blicket: ObjectSet = (0..num_objects).filter(|&i| p[i] == 1.0).collect();

    let labels = (0..num_objects)
        .map(|i| {
            let containing: Vec<&Panel> = context
                .iter()
                .filter(|panel| panel.objects.contains(i))
                .collect();
            let direct = containing
                .iter()
                .any(|panel| !panel.machine_on || panel.objects.len() == 1);
            let settled = p[i] == 0.0 || p[i] == 1.0;
            let others = |panel: &Panel| {
                let mut rest = panel.objects;
                rest.remove(i);
                rest
            };
            if direct {
                QueryLabel::Direct
            } else if settled {
                QueryLabel::Indirect
            } else if containing
                .iter()
                .any(|panel| panel.machine_on && others(panel).intersects(directly_blicket))
            {
                QueryLabel::BackwardBlocking
            } else if !truth.contains(i)
                && !containing.is_empty()
                && containing
                    .iter()
                    .all(|panel| panel.machine_on && others(panel).intersects(provable_blicket))
            {
                QueryLabel::ScreeningOff
            } else {
                QueryLabel::Undetermined
            }
        })
        .collect();
    Ok(labels)
}

/// Deterministic episode for `(master_seed, episode_index)`.
pub fn generate_episode(
    master_seed: u64,
    episode_index: u64,
    config: &Config,
) -> Result<EpisodeSpec> {
    config.validate()?;
    let mut rng = seeded_rng(master_seed, episode_index, STREAM_EPISODE);
    let objects = sample_objects(&mut rng, config.num_objects);
    let (ground_truth, context) = sample_truth_and_context(&mut rng, config, None)?;
    let query_labels = classify_query_types(&context, ground_truth, config.num_objects)?;
    Ok(EpisodeSpec {
        seed: master_seed,
        episode_index,
        objects,
        ground_truth,
        context,
        query_labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use std::collections::HashSet;

    fn set(items: &[usize]) -> ObjectSet {
        items.iter().copied().collect()
    }

    #[test]
    fn objects_are_distinct_and_deterministic() {
        let a = sample_objects(&mut seeded_rng(42, 0, 0), 9);
        let b = sample_objects(&mut seeded_rng(42, 0, 0), 9);
        assert_eq!(a, b);
        assert_eq!(a.iter().collect::<HashSet<_>>().len(), 9);
    }

    #[test]
    fn object_attribute_marginals_are_uniform() {
        // 9 draws per sample, 10^4 samples. Each value's count is compared with
        // its binomial expectation at 3 sigma.
        let samples = 10_000;
        let total = (samples * 9) as f64;
        let mut shapes = [0usize; 3];
        let mut materials = [0usize; 2];
        let mut colors = [0usize; 8];
        for k in 0..samples {
            for o in sample_objects(&mut seeded_rng(7, k as u64, 0), 9) {
                shapes[o.shape as usize] += 1;
                materials[o.material as usize] += 1;
                colors[o.color as usize] += 1;
            }
        }
        let check = |counts: &[usize]| {
            let p = 1.0 / counts.len() as f64;
            let sigma = (total * p * (1.0 - p)).sqrt();
            for &c in counts {
                assert!((c as f64 - total * p).abs() < 3.0 * sigma, "{counts:?}");
            }
        };
        check(&shapes);
        check(&materials);
        check(&colors);
    }

    #[test]
    fn assignment_sizes_are_uniform_over_the_range() {
        let config = Config::default();
        let mut rng = seeded_rng(1, 0, 0);
        let draws = 100_000;
        let mut sum = 0usize;
        for _ in 0..draws {
            let a = sample_assignment(&mut rng, &config);
            assert!((3..=8).contains(&a.len()));
            assert!(a.span() <= 9);
            sum += a.len();
        }
        // Mean of the uniform distribution on {3,...,8} is 5.5.
        assert!((sum as f64 / draws as f64 - 5.5).abs() < 0.05);
        assert_eq!(
            sample_assignment(&mut seeded_rng(3, 3, 0), &config),
            sample_assignment(&mut seeded_rng(3, 3, 0), &config)
        );
    }

    #[test]
    fn satisfiability_bound() {
        let config = Config::default();
        assert!(context_satisfiable(ObjectSet::full(6), &config));
        assert!(!context_satisfiable(ObjectSet::full(7), &config));
        assert!(!context_satisfiable(ObjectSet::full(8), &config));
    }

    #[test]
    fn eight_blickets_fall_back_to_a_redrawn_assignment() {
        let config = Config::default();
        let truth = ObjectSet::full(8);
        assert!(matches!(
            sample_context(&mut seeded_rng(0, 0, 0), truth, &config),
            Err(Error::Generation(_))
        ));
        for k in 0..1_000 {
            let mut rng = seeded_rng(11, k, 0);
            let (t, ctx) = sample_truth_and_context(&mut rng, &config, Some(truth)).unwrap();
            assert!((3..=6).contains(&t.len()));
            assert_eq!(check_context(&ctx, t, &config), Ok(()));
        }
    }

    #[test]
    fn emitted_contexts_pass_every_check() {
        let config = Config::default();
        for k in 0..500 {
            let spec = generate_episode(42, k, &config).unwrap();
            assert_eq!(spec.context.len(), 4);
            assert_eq!(
                check_context(&spec.context, spec.ground_truth, &config),
                Ok(())
            );
            for p in &spec.context {
                assert!((2..=6).contains(&p.objects.len()));
                assert_eq!(p.machine_on, p.objects.intersects(spec.ground_truth));
            }
            assert_ne!(covariation_classify(&spec.context, 9), spec.ground_truth);
        }
    }

    #[test]
    fn generation_is_deterministic_and_order_independent() {
        let config = Config::default();
        let forward: Vec<_> = (0..20)
            .map(|k| generate_episode(42, k, &config).unwrap())
            .collect();
        let backward: Vec<_> = (0..20)
            .rev()
            .map(|k| generate_episode(42, k, &config).unwrap())
            .collect();
        for (a, b) in forward.iter().zip(backward.iter().rev()) {
            assert_eq!(a, b);
        }
        assert_ne!(forward[0], forward[1]);
        assert_eq!(
            serde_json::to_string(&forward[0]).unwrap(),
            serde_json::to_string(&generate_episode(42, 0, &config).unwrap()).unwrap()
        );
    }

    #[test]
    fn covariation_vote() {
        let ctx = [
            Panel::new(set(&[0, 1]), true),
            Panel::new(set(&[1, 2]), true),
            Panel::new(set(&[2, 3]), false),
        ];
        // 0: 1 on / 0 off, 1: 2/0, 2: 1/1 (tie is not a majority), 3: 0/1, others unseen.
        assert_eq!(covariation_classify(&ctx, 9), set(&[0, 1]));
    }

    #[test]
    fn query_label_examples() {
        let truth = set(&[0, 5]);
        let ctx = [
            Panel::new(set(&[1, 2]), false),
            Panel::observe(set(&[0, 5]), truth),
        ];
        let labels = classify_query_types(&ctx, truth, 9).unwrap();
        assert_eq!(labels[1], QueryLabel::Direct);
        assert_eq!(labels[2], QueryLabel::Direct);
        assert_eq!(labels[8], QueryLabel::Undetermined);

        // {0,1} lit, then 0 alone lit: 1 is no longer needed to explain the first panel.
        let ctx = [Panel::new(set(&[0, 1]), true), Panel::new(set(&[0]), true)];
        let labels = classify_query_types(&ctx, set(&[0]), 9).unwrap();
        assert_eq!(labels[0], QueryLabel::Direct);
        assert_eq!(labels[1], QueryLabel::BackwardBlocking);
        let oracle = FeasibleSet::from_panels(9, &ctx)
            .unwrap()
            .oracle_belief(None)
            .unwrap();
        assert_eq!(oracle.as_slice()[1], 0.5);
    }

    #[test]
    fn indirect_and_screening_off_labels() {
        // {1,2} off proves 1 and 2 directly; {0,1} on then needs 0 (indirect);
        // 3 only ever sits next to the provable Blicket 0 (screening-off).
        let truth = set(&[0]);
        let ctx = [
            Panel::observe(set(&[1, 2]), truth),
            Panel::observe(set(&[0, 1]), truth),
            Panel::observe(set(&[0, 3]), truth),
        ];
        let labels = classify_query_types(&ctx, truth, 9).unwrap();
        assert_eq!(labels[0], QueryLabel::Indirect);
        assert_eq!(labels[3], QueryLabel::ScreeningOff);
        assert_eq!(labels[4], QueryLabel::Undetermined);
    }
}
