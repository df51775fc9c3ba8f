//! Graphviz diagrams of flows, plus the image stratifiers used in reports.

pub mod dot;

use crate::flow::{Category, Component, Flow, FlowLogic};
use dot::{DotGraph, DotNode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io;
use std::path::Path;
use std::process::Command;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    TopToBottom,
    LeftToRight,
}

impl Orientation {
    pub fn rankdir(self) -> &'static str {
        match self {
            Orientation::TopToBottom => "TB",
            Orientation::LeftToRight => "LR",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeStyle {
    Straight,
    Curved,
    Orthogonal,
}

impl EdgeStyle {
    pub const ALL: [EdgeStyle; 3] = [EdgeStyle::Straight, EdgeStyle::Curved, EdgeStyle::Orthogonal];

    pub fn splines(self) -> &'static str {
        match self {
            EdgeStyle::Straight => "line",
            EdgeStyle::Curved => "curved",
            EdgeStyle::Orthogonal => "ortho",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeShapes {
    pub trigger: String,
    pub action: String,
    pub flowlogic: String,
    pub subflow: String,
}

impl Default for NodeShapes {
    fn default() -> Self {
        NodeShapes {
            trigger: "oval".into(),
            action: "box".into(),
            flowlogic: "diamond".into(),
            subflow: "box3d".into(),
        }
    }
}

impl NodeShapes {
    fn for_category(&self, category: Category) -> &str {
        match category {
            Category::Action => &self.action,
            Category::Flowlogic => &self.flowlogic,
            Category::Subflow => &self.subflow,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderStyle {
    pub orientation: Orientation,
    pub edge_style: EdgeStyle,
    pub node_shapes: NodeShapes,
    pub seed: u64,
}

/// Uniform over orientations and edge styles; deterministic per seed.
pub fn sample_style(seed: u64) -> RenderStyle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let orientation = if rng.gen_bool(0.5) {
        Orientation::TopToBottom
    } else {
        Orientation::LeftToRight
    };
    let edge_style = EdgeStyle::ALL[rng.gen_range(0..EdgeStyle::ALL.len())];
    RenderStyle {
        orientation,
        edge_style,
        node_shapes: NodeShapes::default(),
        seed,
    }
}

fn node_id(c: &Component) -> String {
    format!("c{}", c.order)
}

fn display_label(annotation: &str, fallback: &str) -> String {
    if annotation.trim().is_empty() {
        fallback.to_string()
    } else {
        annotation.to_string()
    }
}

/// Builds the diagram graph: one node per trigger and component, edges in
/// execution order.
pub fn flow_graph(flow: &Flow, style: &RenderStyle) -> DotGraph {
    let mut graph = DotGraph::new("flow");
    graph
        .graph_attr("rankdir", style.orientation.rankdir())
        .graph_attr("splines", style.edge_style.splines());

    if let Some(trigger) = &flow.trigger {
        graph.node(
            DotNode::new("trigger")
                .attr("label", display_label(&trigger.annotation, &trigger.trigger_type))
                .attr("shape", &style.node_shapes.trigger),
        );
    }
    for c in &flow.components {
        graph.node(
            DotNode::new(node_id(c))
                .attr("label", display_label(&c.annotation, &c.definition))
                .attr("shape", style.node_shapes.for_category(c.category)),
        );
    }

    let mut nested: HashMap<Option<u32>, Vec<&Component>> = HashMap::new();
    for c in &flow.components {
        nested.entry(c.block).or_default().push(c);
    }
    let top = nested.get(&None).cloned().unwrap_or_default();
    if let (Some(_), Some(first)) = (&flow.trigger, top.first()) {
        graph.edge("trigger", node_id(first));
    }
    link_sequence(&mut graph, &top, &nested);
    graph
}

fn link_sequence(graph: &mut DotGraph, siblings: &[&Component], nested: &HashMap<Option<u32>, Vec<&Component>>) {
    for pair in siblings.windows(2) {
        let label = match pair[1].flow_logic() {
            Some(FlowLogic::Else | FlowLogic::ElseIf) => Some("else"),
            _ => None,
        };
        graph.labeled_edge(node_id(pair[0]), node_id(pair[1]), label);
    }
    for parent in siblings {
        let Some(children) = nested.get(&Some(parent.order)) else {
            continue;
        };
        match parent.flow_logic() {
            Some(FlowLogic::Parallel) => {
                for child in children {
                    graph.labeled_edge(node_id(parent), node_id(child), Some("branch"));
                    link_sequence(graph, std::slice::from_ref(child), nested);
                }
            }
            logic => {
                let label = match logic {
                    Some(FlowLogic::If | FlowLogic::ElseIf) => Some("then"),
                    Some(FlowLogic::ForEach | FlowLogic::DoUntil) => Some("loop"),
                    _ => None,
                };
                graph.labeled_edge(node_id(parent), node_id(children[0]), label);
                link_sequence(graph, children, nested);
            }
        }
    }
}

pub fn to_dot(flow: &Flow, style: &RenderStyle) -> String {
    flow_graph(flow, style).render()
}

/// Runs the Graphviz `dot` executable. Returns `Ok(false)` when it is not
/// installed.
pub fn rasterize(dot_file: &Path, png_file: &Path) -> io::Result<bool> {
    let status = Command::new("dot")
        .arg("-Tpng")
        .arg(dot_file)
        .arg("-o")
        .arg(png_file)
        .status();
    match status {
        Ok(s) if s.success() => Ok(true),
        Ok(s) => Err(io::Error::other(format!("dot exited with {s}"))),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(false),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageOrientation {
    Landscape,
    Portrait,
}

impl ImageOrientation {
    pub fn as_str(self) -> &'static str {
        match self {
            ImageOrientation::Landscape => "landscape",
            ImageOrientation::Portrait => "portrait",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResolutionClass {
    Small,
    Medium,
    Large,
}

impl ResolutionClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ResolutionClass::Small => "small",
            ResolutionClass::Medium => "medium",
            ResolutionClass::Large => "large",
        }
    }
}

/// Landscape when the image is at least twice as wide as tall.
pub fn classify_orientation(width: u32, height: u32) -> ImageOrientation {
    if u64::from(width) >= 2 * u64::from(height) {
        ImageOrientation::Landscape
    } else {
        ImageOrientation::Portrait
    }
}

pub const SMALL_MAX_PIXELS: u64 = 400_000;
pub const LARGE_MIN_PIXELS: u64 = 1_000_000;

/// Small below 400k pixels, large above 1M, medium otherwise (both
/// boundaries are medium).
pub fn classify_resolution(width: u32, height: u32) -> ResolutionClass {
    let pixels = u64::from(width) * u64::from(height);
    if pixels < SMALL_MAX_PIXELS {
        ResolutionClass::Small
    } else if pixels > LARGE_MIN_PIXELS {
        ResolutionClass::Large
    } else {
        ResolutionClass::Medium
    }
}
