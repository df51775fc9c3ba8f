//! Declarative flow patterns.
//!
//! A pattern is a list of [`GenStep`]s interpreted left to right by the
//! generator. `scheduled_loop` follows a fixed lookup, loop, branch
//! procedure; every other template is a reading of the pattern's name.

use super::catalog::{ActionTag, TriggerClass};
use crate::flow::FlowLogic;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionPick {
    Definition(String),
    Tag(ActionTag),
    /// Any action that does not need a prior lookup.
    Any,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenStep {
    /// Pick a random trigger of the class; `None` draws from every trigger.
    PickTrigger(Option<TriggerClass>),
    AddAction(ActionPick),
    /// Append a flow-logic element and nest the following steps inside it.
    /// ELSE/ELSEIF become siblings of the most recent IF and are skipped when
    /// no IF exists.
    AddFlowLogic(FlowLogic),
    /// Run `steps` with probability `prob`, only if every element in
    /// `requires` is already present.
    Maybe {
        prob: f64,
        requires: Vec<FlowLogic>,
        steps: Vec<GenStep>,
    },
    /// An action acting on the current table, preferring definitions not
    /// used yet.
    PickRelatedAction(Option<ActionTag>),
    /// Leave the innermost flow-logic block.
    EndBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternSpec {
    pub name: String,
    pub steps: Vec<GenStep>,
    /// Relative sampling weight.
    pub weight: u32,
}

impl PatternSpec {
    pub fn validate(&self) -> Result<(), String> {
        fn check(steps: &[GenStep]) -> Result<(), String> {
            for s in steps {
                if let GenStep::Maybe { prob, steps, .. } = s {
                    if !(0.0..=1.0).contains(prob) {
                        return Err(format!("probability {prob} outside [0, 1]"));
                    }
                    check(steps)?;
                }
            }
            Ok(())
        }
        if self.weight == 0 {
            return Err(format!("pattern {} has zero weight", self.name));
        }
        check(&self.steps)
    }
}

/// Branch probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub p_if: f64,
    pub p_else: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams { p_if: 0.5, p_else: 0.5 }
    }
}

/// Pattern names with their observed counts in a 14,376-flow corpus.
pub const PATTERN_COUNTS: [(&str, u32); 17] = [
    ("crud_loop", 2148),
    ("crud_single", 2144),
    ("service_catalog_request_manual", 1102),
    ("scheduled_loop", 1100),
    ("scheduled_single", 1100),
    ("outbound_notification", 1100),
    ("integration_inbound", 1058),
    ("integration_batch_sync", 1000),
    ("single_component", 994),
    ("sla", 660),
    ("parallel", 656),
    ("trigger_only", 624),
    ("misc", 364),
    ("pad", 152),
    ("inbound_email_new", 60),
    ("service_catalog_request_automated", 58),
    ("inbound_email_reply", 56),
];

fn def(name: &str) -> GenStep {
    GenStep::AddAction(ActionPick::Definition(name.into()))
}

fn tag(t: ActionTag) -> GenStep {
    GenStep::AddAction(ActionPick::Tag(t))
}

fn logic(l: FlowLogic) -> GenStep {
    GenStep::AddFlowLogic(l)
}

fn maybe(prob: f64, requires: &[FlowLogic], steps: Vec<GenStep>) -> GenStep {
    GenStep::Maybe {
        prob,
        requires: requires.to_vec(),
        steps,
    }
}

fn trigger(class: TriggerClass) -> GenStep {
    GenStep::PickTrigger(Some(class))
}

/// Steps of the named pattern, or `None` for an unknown name.
pub fn pattern_steps(name: &str, params: &GenParams) -> Option<Vec<GenStep>> {
    use ActionTag::*;
    use FlowLogic::*;
    use GenStep::{EndBlock, PickRelatedAction};
    use TriggerClass::*;

    let related = || PickRelatedAction(None);
    let steps = match name {
        // scheduled trigger, look up records, loop over them, optional IF,
        // related action, optional ELSE with another related action
        "scheduled_loop" => vec![
            trigger(Scheduled),
            def("look_up_records"),
            logic(ForEach),
            maybe(params.p_if, &[], vec![logic(If)]),
            related(),
            maybe(params.p_else, &[If], vec![logic(Else), related()]),
        ],
        "crud_loop" => vec![
            trigger(Record),
            def("look_up_records"),
            logic(ForEach),
            maybe(params.p_if, &[], vec![logic(If)]),
            PickRelatedAction(Some(Crud)),
        ],
        "crud_single" => vec![trigger(Record), PickRelatedAction(Some(Crud))],
        "service_catalog_request_manual" => vec![
            trigger(Catalog),
            def("get_catalog_variables"),
            tag(Approval),
            logic(If),
            tag(Task),
            logic(Else),
            def("update_record"),
        ],
        "service_catalog_request_automated" => vec![
            trigger(Catalog),
            def("get_catalog_variables"),
            tag(IntegrationWrite),
            maybe(params.p_if, &[], vec![tag(IntegrationWrite)]),
            def("update_record"),
        ],
        "scheduled_single" => vec![trigger(Scheduled), def("look_up_record"), related()],
        "outbound_notification" => vec![
            trigger(Record),
            maybe(params.p_if, &[], vec![logic(If)]),
            PickRelatedAction(Some(Notify)),
        ],
        "integration_inbound" => vec![
            trigger(Inbound),
            tag(IntegrationParse),
            logic(If),
            def("create_record"),
            logic(Else),
            def("log"),
        ],
        "integration_batch_sync" => vec![
            trigger(Scheduled),
            tag(IntegrationRead),
            logic(ForEach),
            def("look_up_record"),
            logic(If),
            def("update_record"),
            maybe(params.p_else, &[If], vec![logic(Else), def("create_record")]),
        ],
        "single_component" => vec![GenStep::PickTrigger(None), GenStep::AddAction(ActionPick::Any)],
        "sla" => vec![
            trigger(Sla),
            PickRelatedAction(Some(Notify)),
            maybe(params.p_if, &[], vec![logic(If), def("update_record")]),
        ],
        "parallel" => vec![
            trigger(Record),
            logic(Parallel),
            related(),
            related(),
            maybe(0.5, &[], vec![related()]),
            EndBlock,
            maybe(0.5, &[], vec![def("log")]),
        ],
        "trigger_only" => vec![GenStep::PickTrigger(None)],
        "misc" => vec![
            GenStep::PickTrigger(None),
            GenStep::AddAction(ActionPick::Any),
            maybe(0.5, &[], vec![GenStep::AddAction(ActionPick::Any)]),
            maybe(0.5, &[], vec![GenStep::AddAction(ActionPick::Any)]),
        ],
        // staged case process: work task, approval gate, follow-up
        "pad" => vec![
            trigger(Record),
            tag(Task),
            tag(Approval),
            logic(If),
            related(),
            EndBlock,
            PickRelatedAction(Some(Notify)),
        ],
        "inbound_email_new" => vec![trigger(EmailNew), def("create_record"), def("send_email")],
        "inbound_email_reply" => vec![trigger(EmailReply), def("look_up_record"), def("update_record")],
        _ => return None,
    };
    Some(steps)
}

pub fn pattern(name: &str, params: &GenParams) -> Option<PatternSpec> {
    let weight = PATTERN_COUNTS.iter().find(|(n, _)| *n == name)?.1;
    Some(PatternSpec {
        name: name.to_string(),
        steps: pattern_steps(name, params)?,
        weight,
    })
}

/// All seventeen patterns weighted by their corpus counts.
pub fn default_registry(params: &GenParams) -> Vec<PatternSpec> {
    PATTERN_COUNTS
        .iter()
        .map(|(name, _)| pattern(name, params).expect("every counted pattern has steps"))
        .collect()
}
