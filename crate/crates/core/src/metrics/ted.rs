//! Zhang-Shasha ordered tree edit distance.

use super::EditCosts;
use crate::tree::{FlowTree, TreeNode, Weight};
use num_traits::Zero;

/// Postorder view: `lml[i]` is the postorder index of the leftmost leaf
/// descendant of node `i`.
struct Indexed<'t> {
    nodes: Vec<&'t TreeNode>,
    lml: Vec<usize>,
    keyroots: Vec<usize>,
}

impl<'t> Indexed<'t> {
    fn new(tree: &'t FlowTree) -> Self {
        let order = tree.postorder();
        let mut position = vec![0usize; tree.len()];
        for (i, id) in order.iter().enumerate() {
            position[id.0] = i;
        }
        let mut lml = vec![0usize; order.len()];
        for (i, id) in order.iter().enumerate() {
            lml[i] = match tree.children(*id).first() {
                Some(first) => lml[position[first.0]],
                None => i,
            };
        }
        // keyroot: highest node of each distinct leftmost leaf
        let mut keyroots: Vec<usize> = (0..order.len())
            .filter(|&i| !(i + 1..order.len()).any(|j| lml[j] == lml[i]))
            .collect();
        keyroots.sort_unstable();
        Indexed {
            nodes: order.iter().map(|id| tree.node(*id)).collect(),
            lml,
            keyroots,
        }
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }
}

/// Minimum cost of insertions, deletions and relabelings turning `a` into
/// `b`.
pub fn ted(a: &FlowTree, b: &FlowTree, costs: &impl EditCosts) -> Weight {
    let a = Indexed::new(a);
    let b = Indexed::new(b);
    let (n, m) = (a.len(), b.len());
    let mut tree_dist = vec![vec![Weight::zero(); m]; n];
    // forest_dist is offset by one: row/col 0 stands for the empty forest
    // preceding a keyroot's leftmost leaf.
    let mut forest = vec![vec![Weight::zero(); m + 1]; n + 1];

    for &i in &a.keyroots {
        for &j in &b.keyroots {
            let (li, lj) = (a.lml[i], b.lml[j]);
            forest[li][lj] = Weight::zero();
            for di in li..=i {
                forest[di + 1][lj] = forest[di][lj] + costs.delete(a.nodes[di]);
            }
            for dj in lj..=j {
                forest[li][dj + 1] = forest[li][dj] + costs.insert(b.nodes[dj]);
            }
            for di in li..=i {
                for dj in lj..=j {
                    let delete = forest[di][dj + 1] + costs.delete(a.nodes[di]);
                    let insert = forest[di + 1][dj] + costs.insert(b.nodes[dj]);
                    let best = if a.lml[di] == li && b.lml[dj] == lj {
                        let relabel = forest[di][dj] + costs.relabel(a.nodes[di], b.nodes[dj]);
                        let d = delete.min(insert).min(relabel);
                        tree_dist[di][dj] = d;
                        d
                    } else {
                        let subtree = forest[a.lml[di]][b.lml[dj]] + tree_dist[di][dj];
                        delete.min(insert).min(subtree)
                    };
                    forest[di + 1][dj + 1] = best;
                }
            }
        }
    }
    tree_dist[n - 1][m - 1]
}
