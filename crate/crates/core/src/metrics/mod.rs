//! Similarity metrics between a candidate flow and a reference flow.
//!
//! * `flow_sim`: `1 - TED(F, R) / (|F| + |R|)` over weighted trees.
//! * `tree_bleu`: share of the candidate's 1-height subtrees present in the
//!   reference.
//! * `trigger_match`: 1 when both triggers agree.
//! * `component_match`: Jaccard overlap of component identities.
//!
//! Scores are exact rationals; [`MetricResult`] carries their `f64` values.

mod oracle;
mod ted;

pub use oracle::{ted_oracle, SizeExceeded, ORACLE_MAX_NODES};
pub use ted::ted;

use crate::flow::{canonicalize, ComponentIdentity, Flow, ParseError};
use crate::tree::{build_tree_with, subtrees_height1, tree_size, FlowTree, NodeWeights, TreeNode, TreeOptions, Weight};
use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

pub type Score = Rational64;

pub trait EditCosts {
    fn insert(&self, node: &TreeNode) -> Weight;
    fn delete(&self, node: &TreeNode) -> Weight;
    fn relabel(&self, from: &TreeNode, to: &TreeNode) -> Weight;
}

/// Insert/delete cost a node's weight; relabeling two different labels
/// costs the larger of the two weights.
#[derive(Debug, Clone, Copy, Default)]
pub struct WeightedCosts;

impl EditCosts for WeightedCosts {
    fn insert(&self, node: &TreeNode) -> Weight {
        node.weight
    }

    fn delete(&self, node: &TreeNode) -> Weight {
        node.weight
    }

    fn relabel(&self, from: &TreeNode, to: &TreeNode) -> Weight {
        if from.label == to.label {
            Weight::zero()
        } else {
            from.weight.max(to.weight)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriggerMatchMode {
    /// Compare trigger presence and type.
    #[default]
    TypeOnly,
    /// Also require identical (canonical) trigger inputs.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentMatchMode {
    /// Duplicates count: intersection takes the min count, union the max.
    #[default]
    Multiset,
    Set,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricConfig {
    pub weights: NodeWeights,
    pub trigger_mode: TriggerMatchMode,
    pub component_mode: ComponentMatchMode,
}

/// The six per-sample scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub flow_sim_with_inputs: f64,
    pub flow_sim_no_inputs: f64,
    pub tree_bleu_with_inputs: f64,
    pub tree_bleu_no_inputs: f64,
    pub trigger_match: f64,
    pub component_match: f64,
}

impl MetricResult {
    pub const COLUMNS: [&'static str; 6] = [
        "FlowSim w/ inputs",
        "FlowSim no inputs",
        "TreeBLEU w/ inputs",
        "TreeBLEU no inputs",
        "Trigger match",
        "Component match",
    ];

    pub fn zero() -> Self {
        MetricResult::from_values([0.0; 6])
    }

    /// Values in column order.
    pub fn values(&self) -> [f64; 6] {
        [
            self.flow_sim_with_inputs,
            self.flow_sim_no_inputs,
            self.tree_bleu_with_inputs,
            self.tree_bleu_no_inputs,
            self.trigger_match,
            self.component_match,
        ]
    }

    pub fn from_values(v: [f64; 6]) -> Self {
        MetricResult {
            flow_sim_with_inputs: v[0],
            flow_sim_no_inputs: v[1],
            tree_bleu_with_inputs: v[2],
            tree_bleu_no_inputs: v[3],
            trigger_match: v[4],
            component_match: v[5],
        }
    }
}

pub fn to_f64(score: Score) -> f64 {
    *score.numer() as f64 / *score.denom() as f64
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Evaluator {
    pub config: MetricConfig,
}

impl Evaluator {
    pub fn new(config: MetricConfig) -> Self {
        Evaluator { config }
    }

    pub fn tree(&self, flow: &Flow, include_inputs: bool) -> FlowTree {
        build_tree_with(
            flow,
            &TreeOptions {
                weights: self.config.weights,
                include_inputs,
            },
        )
    }

    pub fn flow_sim(&self, candidate: &Flow, reference: &Flow, include_inputs: bool) -> Score {
        let a = self.tree(candidate, include_inputs);
        let b = self.tree(reference, include_inputs);
        flow_sim_trees(&a, &b)
    }

    pub fn tree_bleu(&self, candidate: &Flow, reference: &Flow, include_inputs: bool) -> Score {
        let a = self.tree(candidate, include_inputs);
        let b = self.tree(reference, include_inputs);
        tree_bleu_trees(&a, &b)
    }

    pub fn trigger_match(&self, candidate: &Flow, reference: &Flow) -> bool {
        let (c, r) = (canonicalize(candidate), canonicalize(reference));
        match (&c.trigger, &r.trigger) {
            (None, None) => true,
            (Some(a), Some(b)) => {
                a.trigger_type == b.trigger_type
                    && (self.config.trigger_mode == TriggerMatchMode::TypeOnly || a.inputs == b.inputs)
            }
            _ => false,
        }
    }

    pub fn component_match(&self, candidate: &Flow, reference: &Flow) -> Score {
        let counts = |f: &Flow| {
            let mut m: HashMap<ComponentIdentity, i64> = HashMap::new();
            for c in &f.components {
                *m.entry(c.identity()).or_default() += 1;
            }
            if self.config.component_mode == ComponentMatchMode::Set {
                m.values_mut().for_each(|n| *n = 1);
            }
            m
        };
        let (a, b) = (counts(candidate), counts(reference));
        let mut intersection = 0i64;
        let mut union = 0i64;
        for (id, &n) in &a {
            let m = b.get(id).copied().unwrap_or(0);
            intersection += n.min(m);
            union += n.max(m);
        }
        union += b
            .iter()
            .filter(|(id, _)| !a.contains_key(*id))
            .map(|(_, n)| n)
            .sum::<i64>();
        if union == 0 {
            return Score::one();
        }
        Score::new(intersection, union)
    }

    /// All six scores. A candidate that failed to parse scores zero
    /// everywhere.
    pub fn evaluate_pair(&self, candidate: Result<&Flow, &ParseError>, reference: &Flow) -> MetricResult {
        let Ok(candidate) = candidate else {
            return MetricResult::zero();
        };
        let with = (self.tree(candidate, true), self.tree(reference, true));
        let without = (self.tree(candidate, false), self.tree(reference, false));
        MetricResult {
            flow_sim_with_inputs: to_f64(flow_sim_trees(&with.0, &with.1)),
            flow_sim_no_inputs: to_f64(flow_sim_trees(&without.0, &without.1)),
            tree_bleu_with_inputs: to_f64(tree_bleu_trees(&with.0, &with.1)),
            tree_bleu_no_inputs: to_f64(tree_bleu_trees(&without.0, &without.1)),
            trigger_match: if self.trigger_match(candidate, reference) {
                1.0
            } else {
                0.0
            },
            component_match: to_f64(self.component_match(candidate, reference)),
        }
    }
}

pub fn flow_sim_trees(a: &FlowTree, b: &FlowTree) -> Score {
    let distance = ted(a, b, &WeightedCosts);
    Score::one() - distance / (tree_size(a) + tree_size(b))
}

pub fn tree_bleu_trees(candidate: &FlowTree, reference: &FlowTree) -> Score {
    let s = subtrees_height1(candidate);
    if s.is_empty() {
        return Score::zero();
    }
    let r = subtrees_height1(reference);
    let shared = s.intersection(&r).count();
    Score::new(shared as i64, s.len() as i64)
}

pub fn flow_sim(candidate: &Flow, reference: &Flow, include_inputs: bool) -> Score {
    Evaluator::default().flow_sim(candidate, reference, include_inputs)
}

pub fn tree_bleu(candidate: &Flow, reference: &Flow, include_inputs: bool) -> Score {
    Evaluator::default().tree_bleu(candidate, reference, include_inputs)
}

pub fn trigger_match(candidate: &Flow, reference: &Flow) -> bool {
    Evaluator::default().trigger_match(candidate, reference)
}

pub fn component_match(candidate: &Flow, reference: &Flow) -> Score {
    Evaluator::default().component_match(candidate, reference)
}

pub fn evaluate_pair(candidate: Result<&Flow, &ParseError>, reference: &Flow) -> MetricResult {
    Evaluator::default().evaluate_pair(candidate, reference)
}
