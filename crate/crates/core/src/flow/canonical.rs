use super::{normalize, Flow, InputBinding};
use std::collections::HashMap;

/// Normalizes identifiers, sorts inputs by name and renumbers orders to
/// `1..=n`, remapping `block` references. Idempotent.
///
/// Input values and annotations are left untouched.
pub fn canonicalize(flow: &Flow) -> Flow {
    let mut out = flow.clone();
    out.scope = normalize(&out.scope);
    if let Some(trigger) = out.trigger.as_mut() {
        trigger.trigger_type = normalize(&trigger.trigger_type);
        canonical_inputs(&mut trigger.inputs);
    }

    let renumber: HashMap<u32, u32> = out
        .components
        .iter()
        .enumerate()
        .map(|(i, c)| (c.order, i as u32 + 1))
        .collect();
    for component in &mut out.components {
        component.definition = normalize(&component.definition);
        component.scope = normalize(&component.scope);
        component.order = renumber[&component.order];
        component.block = component.block.and_then(|b| renumber.get(&b).copied());
        canonical_inputs(&mut component.inputs);
    }
    out
}

fn canonical_inputs(inputs: &mut [InputBinding]) {
    for input in inputs.iter_mut() {
        input.name = normalize(&input.name);
    }
    inputs.sort_by(|a, b| a.name.cmp(&b.name));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{Category, Component, FlowKind, Trigger};

    fn component(order: u32, block: Option<u32>, category: Category, definition: &str) -> Component {
        Component {
            annotation: String::new(),
            category,
            definition: definition.into(),
            scope: "Global".into(),
            order,
            block,
            inputs: vec![],
        }
    }

    #[test]
    fn renumbers_and_remaps_blocks() {
        let flow = Flow {
            kind: FlowKind::Subflow,
            scope: "global".into(),
            trigger: None,
            components: vec![
                component(2, None, Category::Action, "a"),
                component(4, None, Category::Flowlogic, "IF"),
                component(6, Some(4), Category::Action, "b"),
            ],
        };
        let c = canonicalize(&flow);
        let orders: Vec<u32> = c.components.iter().map(|c| c.order).collect();
        assert_eq!(orders, vec![1, 2, 3]);
        assert_eq!(c.components[2].block, Some(2));
    }

    #[test]
    fn normalizes_identifiers_and_sorts_inputs() {
        let mut flow = Flow {
            kind: FlowKind::Flow,
            scope: " GLOBAL".into(),
            trigger: Some(Trigger {
                annotation: "Keep Me".into(),
                trigger_type: " Weekly ".into(),
                inputs: vec![InputBinding::new("Time", "X"), InputBinding::new("day", "3")],
            }),
            components: vec![component(1, None, Category::Action, " Look_Up_Records ")],
        };
        flow.components[0].inputs = vec![InputBinding::new("Table", "Incident_Task")];
        let c = canonicalize(&flow);
        assert_eq!(c.components[0].definition, "look_up_records");
        assert_eq!(c.components[0].scope, "global");
        assert_eq!(c.components[0].inputs[0], InputBinding::new("table", "Incident_Task"));
        let t = c.trigger.as_ref().unwrap();
        assert_eq!(t.trigger_type, "weekly");
        assert_eq!(t.annotation, "Keep Me");
        assert_eq!(t.inputs[0].name, "day");
        assert_eq!(t.inputs[1].name, "time");
        assert_eq!(canonicalize(&c), c);
    }
}
