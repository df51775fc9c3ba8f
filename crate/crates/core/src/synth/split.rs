use super::rng::SeedStream;
use super::SynthError;
use crate::flow::{Flow, FlowId};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

/// Flow ids per split. Each list is sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub ratios: [f64; 3],
    pub train: Vec<FlowId>,
    pub valid: Vec<FlowId>,
    pub test: Vec<FlowId>,
}

impl SplitManifest {
    pub fn split_of(&self, id: &FlowId) -> Option<Split> {
        [
            (Split::Train, &self.train),
            (Split::Valid, &self.valid),
            (Split::Test, &self.test),
        ]
        .into_iter()
        .find(|(_, ids)| ids.binary_search(id).is_ok())
        .map(|(s, _)| s)
    }

    pub fn len(&self) -> usize {
        self.train.len() + self.valid.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn split_dataset(flows: &[Flow], ratios: [f64; 3], seed: u64) -> Result<SplitManifest, SynthError> {
    split_ids(flows.iter().map(Flow::content_id), ratios, seed)
}

/// Partitions distinct ids: `valid = round(n * r[1])`, `test = round(n * r[2])`
/// and train takes the rest. Assignment depends only on the id and the seed,
/// so equal flows always share a split.
pub fn split_ids(
    ids: impl IntoIterator<Item = FlowId>,
    ratios: [f64; 3],
    seed: u64,
) -> Result<SplitManifest, SynthError> {
    if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-6 {
        return Err(SynthError::InvalidRatios(ratios));
    }
    let distinct: BTreeSet<FlowId> = ids.into_iter().collect();
    let n = distinct.len();
    let stream = SeedStream::new(seed).named("split");
    let mut keyed: Vec<(u64, FlowId)> = distinct.into_iter().map(|id| (stream.named(&id.0).key(), id)).collect();
    keyed.sort();

    let n_valid = ((n as f64) * ratios[1]).round() as usize;
    let n_test = (((n as f64) * ratios[2]).round() as usize).min(n - n_valid.min(n));
    let n_valid = n_valid.min(n);
    let mut ordered = keyed.into_iter().map(|(_, id)| id);
    let mut take = |k: usize| {
        let mut v: Vec<FlowId> = ordered.by_ref().take(k).collect();
        v.sort();
        v
    };
    let valid = take(n_valid);
    let test = take(n_test);
    let train = take(usize::MAX);
    Ok(SplitManifest {
        seed,
        ratios,
        train,
        valid,
        test,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<FlowId> {
        (0..n).map(|i| FlowId(format!("{i:016x}"))).collect()
    }

    #[test]
    fn sizes_and_disjointness() {
        let m = split_ids(
            ids(14_376),
            [12_376.0 / 14_376.0, 1000.0 / 14_376.0, 1000.0 / 14_376.0],
            7,
        )
        .unwrap();
        assert_eq!((m.train.len(), m.valid.len(), m.test.len()), (12_376, 1000, 1000));
        let all: BTreeSet<_> = m.train.iter().chain(&m.valid).chain(&m.test).collect();
        assert_eq!(all.len(), 14_376);
    }

    #[test]
    fn duplicates_collapse_and_seed_matters() {
        let mut v = ids(100);
        v.extend(ids(100));
        let a = split_ids(v.clone(), [0.8, 0.1, 0.1], 1).unwrap();
        assert_eq!(a.len(), 100);
        assert_eq!(a, split_ids(v.clone(), [0.8, 0.1, 0.1], 1).unwrap());
        assert_ne!(a.valid, split_ids(v, [0.8, 0.1, 0.1], 2).unwrap().valid);
        assert_eq!(a.split_of(&a.test[0]), Some(Split::Test));
        assert_eq!(a.split_of(&FlowId("zz".into())), None);
    }

    #[test]
    fn bad_ratios() {
        assert!(split_ids(ids(3), [0.5, 0.5, 0.5], 0).is_err());
        assert!(split_ids(ids(3), [1.2, -0.1, -0.1], 0).is_err());
        let m = split_ids(Vec::new(), [0.8, 0.1, 0.1], 0).unwrap();
        assert!(m.is_empty());
    }
}
