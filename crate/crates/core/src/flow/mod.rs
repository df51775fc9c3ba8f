//! Workflow data model.
//!
//! A [`Flow`] is either a triggered workflow or a trigger-less subflow made of
//! an ordered list of [`Component`]s. Nesting is expressed through the
//! `block` field: a component with `block = k` lives inside the flow-logic
//! component whose `order` is `k`.

mod canonical;
mod error;
mod extract;
mod parse;

pub use canonical::canonicalize;
pub use error::ParseError;
pub use extract::{extract_flow_from_model_output, find_json_object};
pub use parse::{parse_flow, parse_flow_value};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowKind {
    Flow,
    Subflow,
}

impl FlowKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FlowKind::Flow => "flow",
            FlowKind::Subflow => "subflow",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Action,
    Flowlogic,
    Subflow,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Action => "action",
            Category::Flowlogic => "flowlogic",
            Category::Subflow => "subflow",
        }
    }

    /// Case-insensitive, whitespace-tolerant lookup.
    pub fn parse(s: &str) -> Option<Category> {
        match s.trim().to_ascii_lowercase().as_str() {
            "action" => Some(Category::Action),
            "flowlogic" => Some(Category::Flowlogic),
            "subflow" => Some(Category::Subflow),
            _ => None,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The closed flow-logic vocabulary accepted as `definition` of a
/// `flowlogic` component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FlowLogic {
    If,
    Else,
    ElseIf,
    ForEach,
    DoUntil,
    Parallel,
    Try,
    Catch,
    End,
}

impl FlowLogic {
    pub const ALL: [FlowLogic; 9] = [
        FlowLogic::If,
        FlowLogic::Else,
        FlowLogic::ElseIf,
        FlowLogic::ForEach,
        FlowLogic::DoUntil,
        FlowLogic::Parallel,
        FlowLogic::Try,
        FlowLogic::Catch,
        FlowLogic::End,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            FlowLogic::If => "IF",
            FlowLogic::Else => "ELSE",
            FlowLogic::ElseIf => "ELSEIF",
            FlowLogic::ForEach => "FOREACH",
            FlowLogic::DoUntil => "DOUNTIL",
            FlowLogic::Parallel => "PARALLEL",
            FlowLogic::Try => "TRY",
            FlowLogic::Catch => "CATCH",
            FlowLogic::End => "END",
        }
    }

    pub fn from_definition(definition: &str) -> Option<FlowLogic> {
        let d = definition.trim();
        FlowLogic::ALL
            .into_iter()
            .find(|fl| fl.keyword().eq_ignore_ascii_case(d))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InputBinding {
    pub name: String,
    pub value: String,
}

impl InputBinding {
    pub fn new(name: impl Into<String>, value: impl Into<String>) -> Self {
        InputBinding {
            name: name.into(),
            value: value.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Trigger {
    pub annotation: String,
    #[serde(rename = "type")]
    pub trigger_type: String,
    pub inputs: Vec<InputBinding>,
}

impl Trigger {
    pub fn input(&self, name: &str) -> Option<&str> {
        find_input(&self.inputs, name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Component {
    pub annotation: String,
    pub category: Category,
    pub definition: String,
    pub scope: String,
    pub order: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block: Option<u32>,
    pub inputs: Vec<InputBinding>,
}

impl Component {
    pub fn flow_logic(&self) -> Option<FlowLogic> {
        match self.category {
            Category::Flowlogic => FlowLogic::from_definition(&self.definition),
            _ => None,
        }
    }

    pub fn identity(&self) -> ComponentIdentity {
        ComponentIdentity::new(self.category, &self.definition, &self.scope)
    }

    pub fn input(&self, name: &str) -> Option<&str> {
        find_input(&self.inputs, name)
    }
}

fn find_input<'a>(inputs: &'a [InputBinding], name: &str) -> Option<&'a str> {
    inputs
        .iter()
        .find(|i| i.name.trim().eq_ignore_ascii_case(name))
        .map(|i| i.value.as_str())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Flow {
    #[serde(rename = "type")]
    pub kind: FlowKind,
    pub scope: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trigger: Option<Trigger>,
    pub components: Vec<Component>,
}

impl Flow {
    /// Stable content identifier: the leading 16 hex digits of the SHA-256
    /// of the canonical serialization. Annotations are part of the content.
    pub fn content_id(&self) -> FlowId {
        let canonical = canonicalize(self);
        let digest = Sha256::digest(serialize_flow(&canonical).as_bytes());
        let hex: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
        FlowId(hex)
    }
}

/// Normalized (category, definition, scope) triple used for
/// component-level set membership.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ComponentIdentity {
    pub category: Category,
    pub definition: String,
    pub scope: String,
}

impl ComponentIdentity {
    pub fn new(category: Category, definition: &str, scope: &str) -> Self {
        ComponentIdentity {
            category,
            definition: normalize(definition),
            scope: normalize(scope),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FlowId(pub String);

impl fmt::Display for FlowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn normalize(s: &str) -> String {
    s.trim().to_lowercase()
}

/// Compact single-line JSON using the wire field names.
pub fn serialize_flow(flow: &Flow) -> String {
    serde_json::to_string(flow).expect("flow serialization is infallible")
}

pub fn serialize_flow_pretty(flow: &Flow) -> String {
    serde_json::to_string_pretty(flow).expect("flow serialization is infallible")
}
