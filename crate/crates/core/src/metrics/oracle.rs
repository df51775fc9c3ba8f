//! Exhaustive forest-distance recursion, used to cross-check [`super::ted`].
//!
//! No keyroots, no leftmost-leaf tables: every pair of reachable forests is
//! memoized directly. Exponential in the worst case, hence the size bound.

use super::EditCosts;
use crate::tree::{FlowTree, NodeId, Weight};
use num_traits::Zero;
use std::collections::HashMap;
use thiserror::Error;

pub const ORACLE_MAX_NODES: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("oracle supports at most {ORACLE_MAX_NODES} combined nodes, got {0}")]
pub struct SizeExceeded(pub usize);

pub fn ted_oracle(a: &FlowTree, b: &FlowTree, costs: &impl EditCosts) -> Result<Weight, SizeExceeded> {
    let total = a.len() + b.len();
    if total > ORACLE_MAX_NODES {
        return Err(SizeExceeded(total));
    }
    let mut search = Search {
        a,
        b,
        costs,
        memo: HashMap::new(),
    };
    Ok(search.distance(vec![a.root()], vec![b.root()]))
}

struct Search<'a, C> {
    a: &'a FlowTree,
    b: &'a FlowTree,
    costs: &'a C,
    memo: HashMap<(Vec<NodeId>, Vec<NodeId>), Weight>,
}

impl<C: EditCosts> Search<'_, C> {
    /// Distance between two ordered forests given by their root sequences.
    fn distance(&mut self, f: Vec<NodeId>, g: Vec<NodeId>) -> Weight {
        if f.is_empty() && g.is_empty() {
            return Weight::zero();
        }
        if let Some(d) = self.memo.get(&(f.clone(), g.clone())) {
            return *d;
        }

        let mut candidates = Vec::with_capacity(3);
        if let Some((&v, rest)) = f.split_last() {
            // delete rightmost root of f: its children take its place
            let mut smaller = rest.to_vec();
            smaller.extend_from_slice(self.a.children(v));
            let d = self.distance(smaller, g.clone()) + self.costs.delete(self.a.node(v));
            candidates.push(d);
        }
        if let Some((&w, rest)) = g.split_last() {
            let mut smaller = rest.to_vec();
            smaller.extend_from_slice(self.b.children(w));
            let d = self.distance(f.clone(), smaller) + self.costs.insert(self.b.node(w));
            candidates.push(d);
        }
        if let (Some((&v, f_rest)), Some((&w, g_rest))) = (f.split_last(), g.split_last()) {
            // map v to w: their subtrees align, the remaining forests align
            let inner = self.distance(self.a.children(v).to_vec(), self.b.children(w).to_vec());
            let outer = self.distance(f_rest.to_vec(), g_rest.to_vec());
            candidates.push(inner + outer + self.costs.relabel(self.a.node(v), self.b.node(w)));
        }

        let best = candidates.into_iter().min().expect("at least one forest is non-empty");
        self.memo.insert((f, g), best);
        best
    }
}
