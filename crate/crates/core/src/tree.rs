//! Ordered, labeled tree decomposition of a flow.
//!
//! ```text
//! flow
//! ├── trigger:<type>
//! │   └── input:<name>=<value> ...
//! └── components
//!     └── <category>:<definition>:<scope>
//!         ├── input:<name>=<value> ...
//!         └── <nested components> ...
//! ```
//!
//! Both tree-edit-distance similarity and 1-height subtree recall are
//! computed over this shape.

use crate::flow::{canonicalize, Component, Flow, InputBinding};
use crate::render::dot::{DotGraph, DotNode};
use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use std::collections::{BTreeSet, HashMap};
use std::fmt;

pub type Weight = Rational64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Flow,
    Trigger,
    Components,
    Component,
    Input,
}

impl NodeKind {
    pub const ALL: [NodeKind; 5] = [
        NodeKind::Flow,
        NodeKind::Trigger,
        NodeKind::Components,
        NodeKind::Component,
        NodeKind::Input,
    ];
}

/// Per-kind node cost used by edit distance and weighted size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct NodeWeights {
    #[serde(with = "rational_serde")]
    pub flow: Weight,
    #[serde(with = "rational_serde")]
    pub trigger: Weight,
    #[serde(with = "rational_serde")]
    pub components: Weight,
    #[serde(with = "rational_serde")]
    pub component: Weight,
    #[serde(with = "rational_serde")]
    pub input: Weight,
}

impl Default for NodeWeights {
    /// Structural nodes cost 1, inputs cost 1/4.
    fn default() -> Self {
        NodeWeights {
            flow: Weight::one(),
            trigger: Weight::one(),
            components: Weight::one(),
            component: Weight::one(),
            input: Weight::new(1, 4),
        }
    }
}

impl NodeWeights {
    pub fn unit() -> Self {
        NodeWeights {
            flow: Weight::one(),
            trigger: Weight::one(),
            components: Weight::one(),
            component: Weight::one(),
            input: Weight::one(),
        }
    }

    pub fn of(&self, kind: NodeKind) -> Weight {
        match kind {
            NodeKind::Flow => self.flow,
            NodeKind::Trigger => self.trigger,
            NodeKind::Components => self.components,
            NodeKind::Component => self.component,
            NodeKind::Input => self.input,
        }
    }

    /// Every weight must be strictly positive.
    pub fn validate(&self) -> Result<(), String> {
        for kind in NodeKind::ALL {
            if self.of(kind) <= Weight::zero() {
                return Err(format!("weight for {kind:?} must be positive"));
            }
        }
        Ok(())
    }
}

/// Parses `"3"`, `"0.25"` or `"1/4"` into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational64> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        return (d != 0).then(|| Rational64::new(n, d));
    }
    let (negative, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let denom = 10i64.checked_pow(frac_part.len() as u32)?;
    let whole: i64 = if int_part.is_empty() { 0 } else { int_part.parse().ok()? };
    let frac: i64 = if frac_part.is_empty() {
        0
    } else {
        frac_part.parse().ok()?
    };
    let numer = whole.checked_mul(denom)?.checked_add(frac)?;
    Some(Rational64::new(if negative { -numer } else { numer }, denom))
}

mod rational_serde {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Rational64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&value.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Number(f64),
        }
        let text = match Repr::deserialize(d)? {
            Repr::Text(t) => t,
            Repr::Number(n) => n.to_string(),
        };
        parse_rational(&text).ok_or_else(|| de::Error::custom(format!("invalid weight {text:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TreeNode {
    pub label: String,
    pub kind: NodeKind,
    pub weight: Weight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

/// Arena-backed ordered tree. Node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowTree {
    nodes: Vec<TreeNode>,
    children: Vec<Vec<NodeId>>,
}

impl FlowTree {
    pub fn new(root: TreeNode) -> Self {
        FlowTree {
            nodes: vec![root],
            children: vec![Vec::new()],
        }
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    /// Appends `node` as the last child of `parent`.
    pub fn push_child(&mut self, parent: NodeId, node: TreeNode) -> NodeId {
        let id = NodeId(self.nodes.len());
        self.nodes.push(node);
        self.children.push(Vec::new());
        self.children[parent.0].push(id);
        id
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id.0]
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.children[id.0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &TreeNode)> {
        self.nodes.iter().enumerate().map(|(i, n)| (NodeId(i), n))
    }

    /// Node ids in left-to-right postorder.
    pub fn postorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root(), false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded {
                out.push(id);
            } else {
                stack.push((id, true));
                for &child in self.children(id).iter().rev() {
                    stack.push((child, false));
                }
            }
        }
        out
    }

    /// Same shape and labels with weights taken from `weights`.
    pub fn reweighted(&self, weights: &NodeWeights) -> FlowTree {
        let mut tree = self.clone();
        for node in &mut tree.nodes {
            node.weight = weights.of(node.kind);
        }
        tree
    }

    /// Graphviz rendering for inspection.
    pub fn to_dot(&self) -> String {
        let mut graph = DotGraph::new("flow_tree");
        graph.graph_attr("rankdir", "TB");
        for (id, node) in self.nodes() {
            graph.node(DotNode::new(format!("n{}", id.0)).attr("label", &node.label));
        }
        for (id, _) in self.nodes() {
            for child in self.children(id) {
                graph.edge(format!("n{}", id.0), format!("n{}", child.0));
            }
        }
        graph.render()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeOptions {
    pub weights: NodeWeights,
    pub include_inputs: bool,
}

impl Default for TreeOptions {
    fn default() -> Self {
        TreeOptions {
            weights: NodeWeights::default(),
            include_inputs: true,
        }
    }
}

pub fn build_tree(flow: &Flow) -> FlowTree {
    build_tree_with(flow, &TreeOptions::default())
}

/// Decomposes `flow` (canonicalized first) into its labeled tree.
pub fn build_tree_with(flow: &Flow, options: &TreeOptions) -> FlowTree {
    let flow = canonicalize(flow);
    let w = &options.weights;
    let mk = |label: String, kind: NodeKind| TreeNode {
        label,
        kind,
        weight: w.of(kind),
    };

    let mut tree = FlowTree::new(mk("flow".into(), NodeKind::Flow));
    let root = tree.root();
    if let Some(trigger) = &flow.trigger {
        let t = tree.push_child(root, mk(format!("trigger:{}", trigger.trigger_type), NodeKind::Trigger));
        if options.include_inputs {
            push_inputs(&mut tree, t, &trigger.inputs, &mk);
        }
    }
    let components = tree.push_child(root, mk("components".into(), NodeKind::Components));

    // block order -> nested components, in list order
    let mut nested: HashMap<Option<u32>, Vec<&Component>> = HashMap::new();
    for c in &flow.components {
        nested.entry(c.block).or_default().push(c);
    }

    let mut stack: Vec<(NodeId, &Component)> = nested
        .get(&None)
        .map(|top| top.iter().rev().map(|c| (components, *c)).collect())
        .unwrap_or_default();
    while let Some((parent, c)) = stack.pop() {
        let id = tree.push_child(parent, mk(component_label(c), NodeKind::Component));
        if options.include_inputs {
            push_inputs(&mut tree, id, &c.inputs, &mk);
        }
        if let Some(kids) = nested.get(&Some(c.order)) {
            stack.extend(kids.iter().rev().map(|k| (id, *k)));
        }
    }
    tree
}

fn push_inputs(
    tree: &mut FlowTree,
    parent: NodeId,
    inputs: &[InputBinding],
    mk: &impl Fn(String, NodeKind) -> TreeNode,
) {
    for input in inputs {
        tree.push_child(
            parent,
            mk(format!("input:{}={}", input.name, input.value), NodeKind::Input),
        );
    }
}

fn component_label(c: &Component) -> String {
    format!("{}:{}:{}", c.category, c.definition, c.scope)
}

/// A node label with the ordered labels of its children.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subtree1 {
    pub parent_label: String,
    pub child_labels: Vec<String>,
}

impl fmt::Display for Subtree1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> [{}]", self.parent_label, self.child_labels.join(", "))
    }
}

/// Distinct 1-height subtrees, skipping the root's own pair (its
/// trigger/components edges are present in every flow).
pub fn subtrees_height1(tree: &FlowTree) -> BTreeSet<Subtree1> {
    tree.nodes()
        .filter(|(id, _)| *id != tree.root())
        .filter(|(id, _)| !tree.children(*id).is_empty())
        .map(|(id, node)| Subtree1 {
            parent_label: node.label.clone(),
            child_labels: tree.children(id).iter().map(|c| tree.node(*c).label.clone()).collect(),
        })
        .collect()
}

/// Sum of node weights.
pub fn tree_size(tree: &FlowTree) -> Weight {
    tree.nodes.iter().map(|n| n.weight).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{parse_flow, Category, FlowKind, Trigger};

    fn trigger_only(inputs: Vec<InputBinding>) -> Flow {
        Flow {
            kind: FlowKind::Flow,
            scope: "global".into(),
            trigger: Some(Trigger {
                annotation: String::new(),
                trigger_type: "daily".into(),
                inputs,
            }),
            components: vec![],
        }
    }

    #[test]
    fn single_node_size() {
        let t = FlowTree::new(TreeNode {
            label: "x".into(),
            kind: NodeKind::Flow,
            weight: Weight::one(),
        });
        assert_eq!(tree_size(&t), Weight::one());
        assert_eq!(t.postorder(), vec![NodeId(0)]);
    }

    #[test]
    fn trigger_only_structure_and_size() {
        let f = trigger_only(vec![InputBinding::new("time", "08:00"), InputBinding::new("day", "1")]);
        let t = build_tree(&f);
        assert_eq!(t.len(), 2 + 2 + 1);
        // flow + trigger + components at 1, two inputs at 1/4
        assert_eq!(tree_size(&t), Weight::new(7, 2));
        assert_eq!(tree_size(&t.reweighted(&NodeWeights::unit())), Weight::from_integer(5));
        let trigger = t.children(t.root())[0];
        let labels: Vec<_> = t.children(trigger).iter().map(|c| t.node(*c).label.as_str()).collect();
        assert_eq!(labels, ["input:day=1", "input:time=08:00"]);
    }

    #[test]
    fn one_component_one_input_has_two_subtrees() {
        let f = parse_flow(
            r#"{"type":"flow","scope":"global","trigger":{"type":"daily"},"components":[
              {"category":"action","definition":"send_email","scope":"global","order":1,
               "inputs":[{"name":"to","value":"me"}]}]}"#,
        )
        .unwrap();
        let s = subtrees_height1(&build_tree(&f));
        let expected: BTreeSet<Subtree1> = [
            Subtree1 {
                parent_label: "components".into(),
                child_labels: vec!["action:send_email:global".into()],
            },
            Subtree1 {
                parent_label: "action:send_email:global".into(),
                child_labels: vec!["input:to=me".into()],
            },
        ]
        .into_iter()
        .collect();
        assert_eq!(s, expected);
    }

    #[test]
    fn empty_flow_has_no_subtrees() {
        assert!(subtrees_height1(&build_tree(&trigger_only(vec![]))).is_empty());
    }

    #[test]
    fn subflow_root_has_only_components() {
        let f = Flow {
            kind: FlowKind::Subflow,
            scope: "global".into(),
            trigger: None,
            components: vec![Component {
                annotation: String::new(),
                category: Category::Action,
                definition: "x".into(),
                scope: "global".into(),
                order: 1,
                block: None,
                inputs: vec![],
            }],
        };
        let t = build_tree(&f);
        assert_eq!(t.children(t.root()).len(), 1);
        assert_eq!(t.node(t.children(t.root())[0]).label, "components");
    }

    #[test]
    fn excluding_inputs_drops_input_nodes() {
        let f = trigger_only(vec![InputBinding::new("time", "08:00")]);
        let t = build_tree_with(
            &f,
            &TreeOptions {
                include_inputs: false,
                ..TreeOptions::default()
            },
        );
        assert!(t.nodes().all(|(_, n)| n.kind != NodeKind::Input));
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn parses_rational_weights() {
        assert_eq!(parse_rational("0.25"), Some(Weight::new(1, 4)));
        assert_eq!(parse_rational("1/4"), Some(Weight::new(1, 4)));
        assert_eq!(parse_rational("2"), Some(Weight::from_integer(2)));
        assert_eq!(parse_rational(".5"), Some(Weight::new(1, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational(""), None);
    }

    #[test]
    fn weights_deserialize_from_numbers_and_strings() {
        let w: NodeWeights = serde_json::from_str(r#"{"input": 0.5, "component": "3/2"}"#).unwrap();
        assert_eq!(w.input, Weight::new(1, 2));
        assert_eq!(w.component, Weight::new(3, 2));
        assert_eq!(w.flow, Weight::one());
        let back: NodeWeights = serde_json::from_str(&serde_json::to_string(&w).unwrap()).unwrap();
        assert_eq!(back, w);
        let bad = NodeWeights {
            input: Weight::zero(),
            ..NodeWeights::default()
        };
        assert!(bad.validate().is_err());
    }
}
