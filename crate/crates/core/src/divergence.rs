//! Jensen-Shannon divergence between Bernoulli distributions (base 2, so
//! every value lies in `[0, 1]`) and its per-object mean over belief vectors.

use crate::error::{Error, Result};
use crate::types::BeliefVector;

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {p} is not a probability")))
    }
}

/// Binary entropy in bits with `0 log 0 = 0`.
fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// JSD(Bernoulli(p) || Bernoulli(q)) in bits.
///
/// Computed as `H(m) - (H(p) + H(q)) / 2` with `m = (p + q) / 2`. Identical
/// inputs give exactly zero and swapping the inputs is bit-for-bit symmetric.
pub fn jsd_bernoulli(p: f64, q: f64) -> Result<f64> {
    check_probability("p", p)?;
    check_probability("q", q)?;
    if p == q {
        return Ok(0.0);
    }
    let m = (p + q) / 2.0;
    let value = binary_entropy(m) - (binary_entropy(p) + binary_entropy(q)) / 2.0;
    Ok(value.clamp(0.0, 1.0))
}

/// Mean of [`jsd_bernoulli`] over the coordinates of two belief vectors.
pub fn belief_divergence(belief: &BeliefVector, oracle: &BeliefVector) -> Result<f64> {
    if belief.len() != oracle.len() {
        return Err(Error::Contract(format!(
            "belief has {} entries, oracle has {}",
            belief.len(),
            oracle.len()
        )));
    }
    if belief.is_empty() {
        return Err(Error::Contract("cannot compare empty beliefs".into()));
    }
    let mut total = 0.0;
    for (&p, &q) in belief.as_slice().iter().zip(oracle.as_slice()) {
        total += jsd_bernoulli(p, q)?;
    }
    Ok(total / belief.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent route: half KL of each side against the mixture, summed
    /// over the two outcomes directly.
    fn jsd_by_kl(p: f64, q: f64) -> f64 {
        let kl = |a: [f64; 2], b: [f64; 2]| -> f64 {
            a.iter()
                .zip(b.iter())
                .filter(|(x, _)| **x > 0.0)
                .map(|(x, y)| x * (x / y).log2())
                .sum()
        };
        let pd = [p, 1.0 - p];
        let qd = [q, 1.0 - q];
        let md = [(pd[0] + qd[0]) / 2.0, (pd[1] + qd[1]) / 2.0];
        0.5 * kl(pd, md) + 0.5 * kl(qd, md)
    }

    #[test]
    fn known_values() {
        assert_eq!(jsd_bernoulli(0.5, 0.5).unwrap(), 0.0);
        assert!((jsd_bernoulli(1.0, 0.0).unwrap() - 1.0).abs() < 1e-12);
        // Frozen from the KL-form oracle above.
        assert!((jsd_by_kl(0.5, 0.0) - 0.311_278_124_459_132_8).abs() < 1e-12);
        assert!((jsd_bernoulli(0.5, 0.0).unwrap() - 0.311_278_124_459_132_8).abs() < 1e-12);
        assert!((jsd_bernoulli(0.3, 0.8).unwrap() - 0.191_164_956_928_780_8).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_probabilities() {
        assert!(jsd_bernoulli(-0.1, 0.5).is_err());
        assert!(jsd_bernoulli(0.5, 1.01).is_err());
        assert!(jsd_bernoulli(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn aggregate_examples() {
        let half = BeliefVector::uniform(9, 0.5);
        assert_eq!(belief_divergence(&half, &half).unwrap(), 0.0);
        let ones = BeliefVector::uniform(9, 1.0);
        let zeros = BeliefVector::uniform(9, 0.0);
        assert!((belief_divergence(&ones, &zeros).unwrap() - 1.0).abs() < 1e-12);

        let mut v = vec![0.5; 9];
        v[0] = 1.0;
        v[1] = 0.0;
        let b = BeliefVector::new(v).unwrap();
        assert_eq!(belief_divergence(&b, &b.clone()).unwrap(), 0.0);

        assert!(belief_divergence(&half, &BeliefVector::uniform(8, 0.5)).is_err());
    }

    proptest! {
        #[test]
        fn symmetric_bounded_and_matches_kl_form(p in 0.0f64..=1.0, q in 0.0f64..=1.0) {
            let a = jsd_bernoulli(p, q).unwrap();
            prop_assert_eq!(a, jsd_bernoulli(q, p).unwrap());
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!((a - jsd_by_kl(p, q)).abs() < 1e-9);
            prop_assert_eq!(jsd_bernoulli(p, p).unwrap(), 0.0);
        }

        #[test]
        fn aggregate_is_mean_of_coordinates(
            a in proptest::collection::vec(0.0f64..=1.0, 9),
            b in proptest::collection::vec(0.0f64..=1.0, 9),
        ) {
            let direct: f64 = a.iter().zip(&b).map(|(&p, &q)| jsd_by_kl(p, q)).sum::<f64>() / 9.0;
            let agg = belief_divergence(
                &BeliefVector::new(a.clone()).unwrap(),
                &BeliefVector::new(b.clone()).unwrap(),
            ).unwrap();
            prop_assert!((agg - direct).abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&agg));
        }
    }
}
