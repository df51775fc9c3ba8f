use super::annotate::annotate;
use super::catalog::{ActionSpec, ActionTag, Catalog, TriggerClass, ValueTemplate};
use super::pattern::{ActionPick, GenStep, PatternSpec};
use super::rng::SeedStream;
use crate::flow::{Category, Component, Flow, FlowKind, FlowLogic, InputBinding, Trigger};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const RELATED_TAGS: [ActionTag; 4] = [ActionTag::Crud, ActionTag::Notify, ActionTag::Task, ActionTag::Approval];

/// Runs `pattern` against `catalog`. Deterministic in all three arguments;
/// the result is annotated.
pub fn generate_flow(pattern: &PatternSpec, catalog: &Catalog, seed: u64) -> Flow {
    let stream = SeedStream::new(seed).named(&pattern.name);
    let mut draft = Draft::new(catalog);
    draft.run(&pattern.steps, stream);
    annotate(&draft.finish())
}

struct Draft<'c> {
    catalog: &'c Catalog,
    trigger: Option<Trigger>,
    components: Vec<Component>,
    /// Enclosing flow-logic orders, innermost last.
    open: Vec<u32>,
    table: Option<String>,
    /// Pill prefix of the record in scope, e.g. `2.item` or `trigger.current`.
    record: Option<String>,
    /// Order of the latest step returning a record set.
    records: Option<u32>,
    /// Latest IF and the block stack it was opened in.
    last_if: Option<Vec<u32>>,
    catalog_vars: Option<u32>,
    used: Vec<String>,
}

impl<'c> Draft<'c> {
    fn new(catalog: &'c Catalog) -> Self {
        Draft {
            catalog,
            trigger: None,
            components: Vec::new(),
            open: Vec::new(),
            table: None,
            record: None,
            records: None,
            last_if: None,
            catalog_vars: None,
            used: Vec::new(),
        }
    }

    fn finish(self) -> Flow {
        Flow {
            kind: if self.trigger.is_some() {
                FlowKind::Flow
            } else {
                FlowKind::Subflow
            },
            scope: "global".into(),
            trigger: self.trigger,
            components: self.components,
        }
    }

    fn run(&mut self, steps: &[GenStep], stream: SeedStream) {
        for (i, step) in steps.iter().enumerate() {
            let stream = stream.index(i as u64);
            let mut rng = stream.rng();
            match step {
                GenStep::PickTrigger(class) => self.pick_trigger(*class, &mut rng),
                GenStep::AddAction(pick) => {
                    if let Some(spec) = self.choose_action(pick, &mut rng) {
                        self.push_action(spec, &mut rng);
                    }
                }
                GenStep::AddFlowLogic(logic) => self.push_logic(*logic, &mut rng),
                GenStep::Maybe { prob, requires, steps } => {
                    let ready = requires.iter().all(|r| self.contains(*r));
                    // always draw so the stream is consumed the same way
                    let coin = rng.gen::<f64>() < *prob;
                    if ready && coin {
                        self.run(steps, stream);
                    }
                }
                GenStep::PickRelatedAction(tag) => {
                    if let Some(spec) = self.related_action(*tag, &mut rng) {
                        self.push_action(spec, &mut rng);
                    }
                }
                GenStep::EndBlock => {
                    self.open.pop();
                }
            }
        }
    }

    fn contains(&self, logic: FlowLogic) -> bool {
        self.components.iter().any(|c| c.flow_logic() == Some(logic))
    }

    fn next_order(&self) -> u32 {
        self.components.len() as u32 + 1
    }

    fn pick_trigger(&mut self, class: Option<TriggerClass>, rng: &mut ChaCha8Rng) {
        let pool: Vec<_> = self
            .catalog
            .triggers
            .iter()
            .filter(|t| class.is_none_or(|c| t.class == c))
            .collect();
        let Some(spec) = pool.choose(rng) else {
            return;
        };
        match spec.class {
            TriggerClass::Record => {
                self.table = self.catalog.tables.choose(rng).map(|t| t.name.clone());
                self.record = Some("trigger.current".into());
            }
            TriggerClass::Catalog => {
                self.table = Some("sc_req_item".into());
                self.record = Some("trigger.request_item".into());
            }
            TriggerClass::Sla => {
                self.table = Some("task_sla".into());
                self.record = Some("trigger.task_sla".into());
            }
            TriggerClass::EmailReply => self.record = Some("trigger.current".into()),
            _ => {}
        }
        let inputs = spec
            .inputs
            .iter()
            .map(|t| InputBinding::new(t.name.clone(), self.instantiate(&t.value, rng)))
            .collect::<Vec<_>>();
        if spec.class == TriggerClass::EmailReply {
            self.table = inputs
                .iter()
                .find(|i| i.name == "target_table")
                .map(|i| i.value.clone());
        }
        self.trigger = Some(Trigger {
            annotation: String::new(),
            trigger_type: spec.trigger_type.clone(),
            inputs,
        });
    }

    fn usable(&self, spec: &ActionSpec) -> bool {
        let needs_record = spec.inputs.iter().any(|i| i.value == ValueTemplate::Record);
        !needs_record || self.record.is_some()
    }

    fn choose_action(&self, pick: &ActionPick, rng: &mut ChaCha8Rng) -> Option<&'c ActionSpec> {
        match pick {
            ActionPick::Definition(name) => self.catalog.action(name),
            ActionPick::Tag(tag) => {
                let pool: Vec<_> = self
                    .catalog
                    .actions
                    .iter()
                    .filter(|a| a.has_tag(*tag) && self.usable(a))
                    .collect();
                pool.choose(rng).copied()
            }
            ActionPick::Any => {
                let pool: Vec<_> = self.catalog.actions.iter().filter(|a| self.usable(a)).collect();
                pool.choose(rng).copied()
            }
        }
    }

    fn related_action(&self, tag: Option<ActionTag>, rng: &mut ChaCha8Rng) -> Option<&'c ActionSpec> {
        let pool: Vec<&ActionSpec> = self
            .catalog
            .actions
            .iter()
            .filter(|a| match tag {
                Some(t) => a.has_tag(t),
                None => a.is_table_bound() && RELATED_TAGS.iter().any(|t| a.has_tag(*t)),
            })
            .filter(|a| self.table.as_deref().is_none_or(|t| a.accepts_table(t)))
            .filter(|a| self.usable(a))
            .collect();
        let fresh: Vec<&ActionSpec> = pool
            .iter()
            .copied()
            .filter(|a| !self.used.contains(&a.definition))
            .collect();
        if fresh.is_empty() {
            pool.choose(rng).copied()
        } else {
            fresh.choose(rng).copied()
        }
    }

    fn push_action(&mut self, spec: &ActionSpec, rng: &mut ChaCha8Rng) {
        let order = self.next_order();
        let looks_up = spec.has_tag(ActionTag::LookupMany) || spec.has_tag(ActionTag::LookupOne);
        let has_table_slot = spec.inputs.iter().any(|i| i.value == ValueTemplate::Table);
        let keep_table = self.table.as_deref().is_some_and(|t| spec.accepts_table(t));
        if has_table_slot && (looks_up || !keep_table) {
            let choices: Vec<&str> = match &spec.tables {
                Some(ts) => ts.iter().map(String::as_str).collect(),
                None => self.catalog.tables.iter().map(|t| t.name.as_str()).collect(),
            };
            self.table = choices.choose(rng).map(|s| s.to_string());
        }
        let inputs = spec
            .inputs
            .iter()
            .map(|t| InputBinding::new(t.name.clone(), self.instantiate(&t.value, rng)))
            .collect();
        self.components.push(Component {
            annotation: String::new(),
            category: Category::Action,
            definition: spec.definition.clone(),
            scope: spec.scope.clone(),
            order,
            block: self.open.last().copied(),
            inputs,
        });
        self.used.push(spec.definition.clone());
        if spec.has_tag(ActionTag::LookupMany) {
            self.records = Some(order);
        } else if spec.has_tag(ActionTag::LookupOne) {
            self.record = Some(format!("{order}.Record"));
        }
        if spec.has_tag(ActionTag::CatalogVariables) {
            self.catalog_vars = Some(order);
        }
    }

    fn push_logic(&mut self, logic: FlowLogic, rng: &mut ChaCha8Rng) {
        let order = self.next_order();
        let (block, inputs) = match logic {
            FlowLogic::Else | FlowLogic::ElseIf => {
                let Some(stack) = self.last_if.clone() else {
                    return;
                };
                self.open = stack;
                let inputs = if logic == FlowLogic::ElseIf {
                    vec![InputBinding::new("condition", self.condition(rng))]
                } else {
                    vec![]
                };
                (self.open.last().copied(), inputs)
            }
            FlowLogic::ForEach => {
                let Some(source) = self.records else {
                    return;
                };
                (
                    self.open.last().copied(),
                    vec![InputBinding::new("items", format!("{{{{{source}.Records}}}}"))],
                )
            }
            FlowLogic::If | FlowLogic::DoUntil => {
                self.last_if = (logic == FlowLogic::If).then(|| self.open.clone());
                (
                    self.open.last().copied(),
                    vec![InputBinding::new("condition", self.condition(rng))],
                )
            }
            _ => (self.open.last().copied(), vec![]),
        };
        self.components.push(Component {
            annotation: String::new(),
            category: Category::Flowlogic,
            definition: logic.keyword().to_string(),
            scope: "global".into(),
            order,
            block,
            inputs,
        });
        if logic == FlowLogic::ForEach {
            self.record = Some(format!("{order}.item"));
        }
        self.open.push(order);
    }

    /// Condition over the previous step's outcome when it has one, else
    /// over a field of the record in scope.
    fn condition(&self, rng: &mut ChaCha8Rng) -> String {
        if let Some(prev) = self.components.last() {
            if let Some(outcome) = self.catalog.action(&prev.definition).and_then(|a| a.outcome.as_ref()) {
                let value = outcome.values.choose(rng).expect("outcome values are non-empty");
                return format!("{{{{{}.{}}}}}={value}", prev.order, outcome.name);
            }
        }
        let (field, value) = self.field_value(rng);
        match &self.record {
            Some(r) => format!("{{{{{r}.{field}}}}}={value}"),
            None => format!("{field}={value}"),
        }
    }

    fn field_value(&self, rng: &mut ChaCha8Rng) -> (String, String) {
        let table = self.table.as_deref().and_then(|t| self.catalog.table(t));
        match table.and_then(|t| t.fields.choose(rng)) {
            Some(f) => (f.name.clone(), f.values.choose(rng).cloned().unwrap_or_default()),
            None => ("active".into(), if rng.gen_bool(0.5) { "true" } else { "false" }.into()),
        }
    }

    fn instantiate(&self, template: &ValueTemplate, rng: &mut ChaCha8Rng) -> String {
        match template {
            ValueTemplate::Literal(s) => s.clone(),
            ValueTemplate::OneOf(options) => options.choose(rng).cloned().unwrap_or_default(),
            ValueTemplate::Table => self.table.clone().unwrap_or_default(),
            ValueTemplate::Record => self.record.as_ref().map(|r| format!("{{{{{r}}}}}")).unwrap_or_default(),
            ValueTemplate::FieldValues | ValueTemplate::Condition => {
                let (field, value) = self.field_value(rng);
                format!("{field}={value}")
            }
            ValueTemplate::CatalogVariable(name) => match self.catalog_vars {
                Some(k) => format!("{{{{{k}.{name}}}}}"),
                None => format!("{{{{trigger.request_item.variables.{name}}}}}"),
            },
            ValueTemplate::DayOfWeek => rng.gen_range(1..=7).to_string(),
            ValueTemplate::DayOfMonth => rng.gen_range(1..=28).to_string(),
            ValueTemplate::TimeOfDay => {
                let minutes = rng.gen_range(0..96) * 15;
                format!("1970-01-01 {:02}:{:02}:00", minutes / 60, minutes % 60)
            }
        }
    }
}
