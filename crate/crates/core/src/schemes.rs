//! Finite weighted alternatives ("schemes") and their Shannon entropy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `Σ w_i = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// `−Σ w ln w` in nats, with `0 ln 0 = 0`.
pub fn shannon_entropy(weights: &[f64]) -> f64 {
    weights
        .iter()
        .filter(|&&w| w > 0.0)
        .fold(0.0, |acc, &w| acc - w * w.ln())
}

/// A finite set of mutually exclusive events with probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SchemeRepr")]
pub struct Scheme {
    events: Vec<String>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct SchemeRepr {
    events: Vec<String>,
    weights: Vec<f64>,
}

impl TryFrom<SchemeRepr> for Scheme {
    type Error = Error;

    fn try_from(r: SchemeRepr) -> Result<Self> {
        Scheme::new(r.events, r.weights)
    }
}

impl Scheme {
    pub fn new(events: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::InvalidScheme("a scheme needs at least one event".into()));
        }
        if events.len() != weights.len() {
            return Err(Error::InvalidScheme(format!(
                "{} events but {} weights",
                events.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::InvalidScheme(format!("weight {w} outside [0, 1]")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidScheme(format!("weights sum to {total}")));
        }
        Ok(Self { events, weights })
    }

    /// Scheme with events labelled `0, 1, …`.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let events = (0..weights.len()).map(|i| i.to_string()).collect();
        Self::new(events, weights)
    }

    pub fn events(&self) -> &[String] {
        &self.events
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.weights)
    }
}

pub fn entropy(s: &Scheme) -> f64 {
    s.entropy()
}

/// Disjoint groups of event indices (0-based) covering a scheme.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub groups: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(groups: Vec<Vec<usize>>) -> Self {
        Self { groups }
    }

    pub fn singletons(n: usize) -> Self {
        Self::new((0..n).map(|i| vec![i]).collect())
    }

    pub fn whole(n: usize) -> Self {
        Self::new(vec![(0..n).collect()])
    }

    /// Checks that the groups are nonempty, disjoint, and cover `0..n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for g in &self.groups {
            if g.is_empty() {
                return Err(Error::InvalidPartition("empty group".into()));
            }
            for &i in g {
                match seen.get_mut(i) {
                    None => return Err(Error::InvalidPartition(format!("index {i} out of range 0..{n}"))),
                    Some(true) => return Err(Error::InvalidPartition(format!("index {i} appears twice"))),
                    Some(s) => *s = true,
                }
            }
        }
        if let Some(gap) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidPartition(format!("index {gap} is not covered")));
        }
        Ok(())
    }
}

/// Merges the events of `fine` group by group; the new event labels join
/// the member labels with `|`.
pub fn coarsen(fine: &Scheme, p: &Partition) -> Result<Scheme> {
    p.validate(fine.len())?;
    let events = p
        .groups
        .iter()
        .map(|g| g.iter().map(|&i| fine.events[i].as_str()).collect::<Vec<_>>().join("|"))
        .collect();
    let weights: Vec<f64> = p
        .groups
        .iter()
        .map(|g| g.iter().map(|&i| fine.weights[i]).sum::<f64>().min(1.0))
        .collect();
    Ok(Scheme { events, weights })
}

/// True iff grouping `fine` by `p` reproduces the weights of `coarse`
/// (within 1e-12, group by group).
pub fn is_finer(fine: &Scheme, coarse: &Scheme, p: &Partition) -> Result<bool> {
    let merged = coarsen(fine, p)?;
    Ok(merged.len() == coarse.len()
        && merged
            .weights
            .iter()
            .zip(&coarse.weights)
            .all(|(a, b)| (a - b).abs() <= 1e-12))
}

/// Validates a chain `schemes[0] ⊃ schemes[1] ⊃ …` where `partitions[k]`
/// groups `schemes[k]` into `schemes[k + 1]`.
pub fn is_refinement_chain(schemes: &[Scheme], partitions: &[Partition]) -> Result<bool> {
    if schemes.len() != partitions.len() + 1 {
        return Err(Error::InvalidPartition(format!(
            "{} schemes need {} partitions, got {}",
            schemes.len(),
            schemes.len().saturating_sub(1),
            partitions.len()
        )));
    }
    for (pair, p) in schemes.windows(2).zip(partitions) {
        if !is_finer(&pair[0], &pair[1], p)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn example() -> Scheme {
        Scheme::from_weights(vec![0.2, 0.3, 0.1, 0.4]).unwrap()
    }

    #[test]
    fn entropy_of_certain_and_uniform_schemes() {
        assert_eq!(Scheme::from_weights(vec![1.0]).unwrap().entropy(), 0.0);
        for n in 1..20 {
            let s = Scheme::from_weights(vec![1.0 / n as f64; n]).unwrap();
            assert!((s.entropy() - (n as f64).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn entropy_reference_value() {
        assert!((example().entropy() - 1.2798542258336676).abs() < 1e-14);
    }

    #[test]
    fn zero_weights_do_not_contribute() {
        let s = Scheme::from_weights(vec![0.5, 0.0, 0.5]).unwrap();
        assert!((s.entropy() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn coarsen_examples() {
        let s = example();
        let c = coarsen(&s, &Partition::new(vec![vec![0, 1], vec![2, 3]])).unwrap();
        assert_eq!(c.weights(), &[0.5, 0.5]);
        assert_eq!(c.events(), &["0|1".to_string(), "2|3".to_string()]);
        assert_eq!(coarsen(&s, &Partition::singletons(4)).unwrap().weights(), s.weights());
        assert_eq!(coarsen(&s, &Partition::whole(4)).unwrap().weights(), &[1.0]);
    }

    #[test]
    fn invalid_partitions() {
        let s = example();
        let overlap = Partition::new(vec![vec![0, 1], vec![1, 2, 3]]);
        let gap = Partition::new(vec![vec![0, 1], vec![3]]);
        let out = Partition::new(vec![vec![0, 1, 2, 3, 4]]);
        let empty = Partition::new(vec![vec![0, 1, 2, 3], vec![]]);
        for p in [overlap, gap, out, empty] {
            assert!(matches!(coarsen(&s, &p), Err(Error::InvalidPartition(_))));
            assert!(is_finer(&s, &s, &p).is_err());
        }
    }

    #[test]
    fn finer_relation() {
        let s = example();
        let half = Scheme::from_weights(vec![0.5, 0.5]).unwrap();
        assert!(is_finer(&s, &half, &Partition::new(vec![vec![0, 1], vec![2, 3]])).unwrap());
        let other = Scheme::from_weights(vec![0.6, 0.4]).unwrap();
        assert!(!is_finer(&half, &other, &Partition::singletons(2)).unwrap());
        let trivial = Scheme::from_weights(vec![1.0]).unwrap();
        assert!(is_finer(&s, &trivial, &Partition::whole(4)).unwrap());
    }

    #[test]
    fn chains() {
        let s = example();
        let half = Scheme::from_weights(vec![0.5, 0.5]).unwrap();
        let trivial = Scheme::from_weights(vec![1.0]).unwrap();
        let parts = [Partition::new(vec![vec![0, 1], vec![2, 3]]), Partition::whole(2)];
        assert!(is_refinement_chain(&[s.clone(), half.clone(), trivial.clone()], &parts).unwrap());
        assert!(!is_refinement_chain(&[s.clone(), trivial.clone(), trivial.clone()], &[Partition::whole(4), Partition::new(vec![vec![0, 1]])]).is_ok_and(|b| b));
        assert!(is_refinement_chain(&[s, half], &parts).is_err());
    }

    #[test]
    fn rejects_invalid_schemes() {
        assert!(Scheme::from_weights(vec![]).is_err());
        assert!(Scheme::from_weights(vec![0.5, 0.4]).is_err());
        assert!(Scheme::from_weights(vec![1.5, -0.5]).is_err());
        assert!(Scheme::new(vec!["a".into()], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn json_shape() {
        let s = Scheme::new(vec!["up".into(), "down".into()], vec![0.25, 0.75]).unwrap();
        let v: serde_json::Value = serde_json::to_value(&s).unwrap();
        assert_eq!(v, serde_json::json!({"events": ["up", "down"], "weights": [0.25, 0.75]}));
        let back: Scheme = serde_json::from_value(v).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<Scheme>(r#"{"events":["a"],"weights":[0.3]}"#).is_err());
    }

    fn scheme_and_partition() -> impl Strategy<Value = (Vec<f64>, Vec<usize>)> {
        (1usize..12).prop_flat_map(|n| {
            (
                prop::collection::vec(0.0f64..1.0, n),
                prop::collection::vec(0usize..n, n),
            )
        })
    }

    fn build(raw: &[f64], labels: &[usize]) -> (Scheme, Partition) {
        let total: f64 = raw.iter().sum::<f64>();
        let weights: Vec<f64> = if total > 0.0 {
            raw.iter().map(|w| w / total).collect()
        } else {
            vec![1.0 / raw.len() as f64; raw.len()]
        };
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); raw.len()];
        for (i, &g) in labels.iter().enumerate() {
            groups[g].push(i);
        }
        groups.retain(|g| !g.is_empty());
        let weights = renormalize(weights);
        (Scheme::from_weights(weights).unwrap(), Partition::new(groups))
    }

    // pins the sum to 1 within rounding so construction never fails
    fn renormalize(mut w: Vec<f64>) -> Vec<f64> {
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        w
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn coarsening_never_increases_entropy((raw, labels) in scheme_and_partition()) {
            let (s, p) = build(&raw, &labels);
            let c = coarsen(&s, &p).unwrap();
            prop_assert!(c.entropy() <= s.entropy() + 1e-12);
            prop_assert!(is_finer(&s, &c, &p).unwrap());
        }

        #[test]
        fn entropy_is_bounded((raw, labels) in scheme_and_partition()) {
            let (s, _) = build(&raw, &labels);
            let h = s.entropy();
            prop_assert!(h >= 0.0);
            prop_assert!(h <= (s.len() as f64).ln() + 1e-12);
        }

        #[test]
        fn singleton_coarsening_is_exact((raw, labels) in scheme_and_partition()) {
            let (s, _) = build(&raw, &labels);
            let c = coarsen(&s, &Partition::singletons(s.len())).unwrap();
            prop_assert_eq!(c.entropy(), s.entropy());
        }
    }
}
