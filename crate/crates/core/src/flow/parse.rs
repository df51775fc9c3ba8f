use super::{Category, Component, Flow, FlowKind, FlowLogic, InputBinding, ParseError, Trigger};
use serde_json::{Map, Value};
use std::collections::{HashMap, HashSet};

/// Parses and validates a flow from JSON text.
///
/// Unknown keys are ignored. The returned error names the first invariant
/// that failed, in document order.
pub fn parse_flow(text: &str) -> Result<Flow, ParseError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ParseError::MalformedJson(e.to_string()))?;
    parse_flow_value(&value)
}

pub fn parse_flow_value(value: &Value) -> Result<Flow, ParseError> {
    let obj = as_object(value, "$")?;

    let kind = match required_str(obj, "$", "type")?.trim().to_ascii_lowercase().as_str() {
        "flow" => FlowKind::Flow,
        "subflow" => FlowKind::Subflow,
        other => {
            return Err(ParseError::violation(
                "$.type",
                format!("expected \"flow\" or \"subflow\", got {other:?}"),
            ))
        }
    };
    let scope = required_str(obj, "$", "scope")?.to_string();

    let trigger = match obj.get("trigger") {
        None | Some(Value::Null) => None,
        Some(v) => Some(parse_trigger(v)?),
    };
    match (kind, &trigger) {
        (FlowKind::Flow, None) => return Err(ParseError::violation("$.trigger", "a flow requires a trigger")),
        (FlowKind::Subflow, Some(_)) => {
            return Err(ParseError::violation("$.trigger", "a subflow must not have a trigger"))
        }
        _ => {}
    }

    let raw_components = match obj.get("components") {
        Some(Value::Array(items)) => items,
        Some(_) => return Err(ParseError::violation("$.components", "expected an array")),
        None => return Err(ParseError::violation("$.components", "missing field")),
    };

    let mut components = Vec::with_capacity(raw_components.len());
    // order -> category of every component seen so far
    let mut seen: HashMap<u32, Category> = HashMap::new();
    let mut last_order = 0u32;
    for (i, raw) in raw_components.iter().enumerate() {
        let path = format!("$.components[{i}]");
        let component = parse_component(raw, &path)?;
        if component.order <= last_order {
            return Err(ParseError::violation(
                format!("{path}.order"),
                format!(
                    "order {} must be greater than the previous order {last_order}",
                    component.order
                ),
            ));
        }
        if let Some(block) = component.block {
            match seen.get(&block) {
                Some(Category::Flowlogic) => {}
                Some(other) => {
                    return Err(ParseError::violation(
                        format!("{path}.block"),
                        format!("block {block} refers to a {other} component, not flowlogic"),
                    ))
                }
                None => {
                    return Err(ParseError::violation(
                        format!("{path}.block"),
                        format!("block {block} does not match the order of an earlier component"),
                    ))
                }
            }
        }
        last_order = component.order;
        seen.insert(component.order, component.category);
        components.push(component);
    }

    Ok(Flow {
        kind,
        scope,
        trigger,
        components,
    })
}

fn parse_trigger(value: &Value) -> Result<Trigger, ParseError> {
    let path = "$.trigger";
    let obj = as_object(value, path)?;
    let annotation = optional_str(obj, path, "annotation")?;
    let trigger_type = required_str(obj, path, "type")?;
    if trigger_type.trim().is_empty() {
        return Err(ParseError::violation(
            format!("{path}.type"),
            "trigger type must be non-empty",
        ));
    }
    let inputs = parse_inputs(obj, path)?;
    Ok(Trigger {
        annotation,
        trigger_type: trigger_type.to_string(),
        inputs,
    })
}

fn parse_component(value: &Value, path: &str) -> Result<Component, ParseError> {
    let obj = as_object(value, path)?;
    let annotation = optional_str(obj, path, "annotation")?;
    let category_raw = required_str(obj, path, "category")?;
    let category = Category::parse(category_raw).ok_or_else(|| {
        ParseError::violation(
            format!("{path}.category"),
            format!("expected action, flowlogic or subflow, got {category_raw:?}"),
        )
    })?;
    let definition = required_str(obj, path, "definition")?;
    if definition.trim().is_empty() {
        return Err(ParseError::violation(
            format!("{path}.definition"),
            "definition must be non-empty",
        ));
    }
    if category == Category::Flowlogic && FlowLogic::from_definition(definition).is_none() {
        return Err(ParseError::violation(
            format!("{path}.definition"),
            format!("{definition:?} is not a known flow-logic element"),
        ));
    }
    let scope = required_str(obj, path, "scope")?.to_string();
    let order = positive_int(obj.get("order"), &format!("{path}.order"))?
        .ok_or_else(|| ParseError::violation(format!("{path}.order"), "missing field"))?;
    let block = positive_int(obj.get("block"), &format!("{path}.block"))?;
    let inputs = parse_inputs(obj, path)?;
    Ok(Component {
        annotation,
        category,
        definition: definition.to_string(),
        scope,
        order,
        block,
        inputs,
    })
}

fn parse_inputs(obj: &Map<String, Value>, parent: &str) -> Result<Vec<InputBinding>, ParseError> {
    let items = match obj.get("inputs") {
        None | Some(Value::Null) => return Ok(Vec::new()),
        Some(Value::Array(items)) => items,
        Some(_) => return Err(ParseError::violation(format!("{parent}.inputs"), "expected an array")),
    };
    let mut names = HashSet::new();
    let mut inputs = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let path = format!("{parent}.inputs[{i}]");
        let obj = as_object(item, &path)?;
        let name = required_str(obj, &path, "name")?;
        if name.trim().is_empty() {
            return Err(ParseError::violation(
                format!("{path}.name"),
                "input name must be non-empty",
            ));
        }
        if !names.insert(super::normalize(name)) {
            return Err(ParseError::violation(
                format!("{path}.name"),
                format!("duplicate input name {name:?}"),
            ));
        }
        let value = match obj.get("value") {
            Some(Value::String(s)) => s.clone(),
            Some(v @ (Value::Number(_) | Value::Bool(_))) => v.to_string(),
            Some(_) => return Err(ParseError::violation(format!("{path}.value"), "expected a string")),
            None => return Err(ParseError::violation(format!("{path}.value"), "missing field")),
        };
        inputs.push(InputBinding {
            name: name.to_string(),
            value,
        });
    }
    Ok(inputs)
}

fn as_object<'a>(value: &'a Value, path: &str) -> Result<&'a Map<String, Value>, ParseError> {
    value
        .as_object()
        .ok_or_else(|| ParseError::violation(path, "expected an object"))
}

fn required_str<'a>(obj: &'a Map<String, Value>, parent: &str, key: &str) -> Result<&'a str, ParseError> {
    match obj.get(key) {
        Some(Value::String(s)) => Ok(s),
        Some(_) => Err(ParseError::violation(format!("{parent}.{key}"), "expected a string")),
        None => Err(ParseError::violation(format!("{parent}.{key}"), "missing field")),
    }
}

fn optional_str(obj: &Map<String, Value>, parent: &str, key: &str) -> Result<String, ParseError> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(String::new()),
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(ParseError::violation(format!("{parent}.{key}"), "expected a string")),
    }
}

fn positive_int(value: Option<&Value>, path: &str) -> Result<Option<u32>, ParseError> {
    match value {
        None | Some(Value::Null) => Ok(None),
        Some(v) => match v.as_u64() {
            Some(n) if n >= 1 && n <= u32::MAX as u64 => Ok(Some(n as u32)),
            _ => Err(ParseError::violation(path, "expected a positive integer")),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn violation_path(text: &str) -> String {
        match parse_flow(text) {
            Err(ParseError::SchemaViolation { path, .. }) => path,
            other => panic!("expected schema violation, got {other:?}"),
        }
    }

    #[test]
    fn minimal_flow_is_valid() {
        let f =
            parse_flow(r#"{"type":"flow","scope":"global","trigger":{"type":"daily","inputs":[]},"components":[]}"#)
                .unwrap();
        assert_eq!(f.kind, FlowKind::Flow);
        assert!(f.components.is_empty());
        assert_eq!(f.trigger.unwrap().trigger_type, "daily");
    }

    #[test]
    fn malformed_json() {
        assert!(matches!(parse_flow("{\"type\":"), Err(ParseError::MalformedJson(_))));
        assert!(matches!(parse_flow(""), Err(ParseError::MalformedJson(_))));
    }

    #[test]
    fn dangling_block_is_rejected() {
        let text = r#"{"type":"flow","scope":"global","trigger":{"type":"daily"},
            "components":[
              {"category":"flowlogic","definition":"IF","scope":"global","order":1},
              {"category":"action","definition":"x","scope":"global","order":2,"block":5}
            ]}"#;
        assert_eq!(violation_path(text), "$.components[1].block");
    }

    #[test]
    fn block_must_point_at_flowlogic() {
        let text = r#"{"type":"flow","scope":"global","trigger":{"type":"daily"},
            "components":[
              {"category":"action","definition":"a","scope":"global","order":1},
              {"category":"action","definition":"b","scope":"global","order":2,"block":1}
            ]}"#;
        assert_eq!(violation_path(text), "$.components[1].block");
    }

    #[test]
    fn block_cannot_point_forward() {
        let text = r#"{"type":"flow","scope":"global","trigger":{"type":"daily"},
            "components":[
              {"category":"action","definition":"a","scope":"global","order":1,"block":2},
              {"category":"flowlogic","definition":"IF","scope":"global","order":2}
            ]}"#;
        assert_eq!(violation_path(text), "$.components[0].block");
    }

    #[test]
    fn trigger_presence_follows_kind() {
        assert_eq!(
            violation_path(r#"{"type":"flow","scope":"global","components":[]}"#),
            "$.trigger"
        );
        assert_eq!(
            violation_path(r#"{"type":"subflow","scope":"global","trigger":{"type":"daily"},"components":[]}"#),
            "$.trigger"
        );
        assert!(parse_flow(r#"{"type":"subflow","scope":"global","trigger":null,"components":[]}"#).is_ok());
    }

    #[test]
    fn non_increasing_orders_are_rejected() {
        let text = r#"{"type":"subflow","scope":"global","components":[
              {"category":"action","definition":"a","scope":"global","order":2},
              {"category":"action","definition":"b","scope":"global","order":2}
            ]}"#;
        assert_eq!(violation_path(text), "$.components[1].order");
        let zero = r#"{"type":"subflow","scope":"global","components":[
              {"category":"action","definition":"a","scope":"global","order":0}]}"#;
        assert_eq!(violation_path(zero), "$.components[0].order");
    }

    #[test]
    fn unknown_flow_logic_is_rejected() {
        let text = r#"{"type":"subflow","scope":"global","components":[
              {"category":"flowlogic","definition":"TIMER","scope":"global","order":1}]}"#;
        assert_eq!(violation_path(text), "$.components[0].definition");
    }

    #[test]
    fn duplicate_input_names_are_rejected() {
        let text = r#"{"type":"flow","scope":"global","trigger":{"type":"daily","inputs":[
              {"name":"time","value":"1"},{"name":" TIME","value":"2"}]},"components":[]}"#;
        assert_eq!(violation_path(text), "$.trigger.inputs[1].name");
    }

    #[test]
    fn empty_trigger_type_is_rejected() {
        assert_eq!(
            violation_path(r#"{"type":"flow","scope":"g","trigger":{"type":"  "},"components":[]}"#),
            "$.trigger.type"
        );
    }

    #[test]
    fn unknown_keys_and_key_order_do_not_matter() {
        let a = parse_flow(
            r#"{"components":[],"extra":{"nested":1},"trigger":{"inputs":[],"type":"daily","x":2},"scope":"global","type":"flow"}"#,
        )
        .unwrap();
        let b =
            parse_flow(r#"{"type":"flow","scope":"global","trigger":{"type":"daily","inputs":[]},"components":[]}"#)
                .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scalar_input_values_are_stringified() {
        let f = parse_flow(
            r#"{"type":"flow","scope":"g","trigger":{"type":"weekly","inputs":[{"name":"day_of_week","value":3}]},"components":[]}"#,
        )
        .unwrap();
        assert_eq!(f.trigger.unwrap().input("day_of_week"), Some("3"));
    }
}
