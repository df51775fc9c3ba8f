//! Template annotations for generated flows.
//!
//! Only empty annotations are filled, so `annotate` is idempotent and never
//! overwrites text supplied by a user.

use crate::flow::{Component, Flow, FlowLogic, Trigger};

pub fn annotate(flow: &Flow) -> Flow {
    let mut out = flow.clone();
    if let Some(t) = out.trigger.as_mut() {
        if t.annotation.trim().is_empty() {
            t.annotation = trigger_text(t);
        }
    }
    for i in 0..out.components.len() {
        if out.components[i].annotation.trim().is_empty() {
            let text = component_text(&out, &out.components[i]);
            out.components[i].annotation = text;
        }
    }
    out
}

fn spaced(s: &str) -> String {
    s.replace('_', " ")
}

const WEEKDAYS: [&str; 7] = [
    "mondays",
    "tuesdays",
    "wednesdays",
    "thursdays",
    "fridays",
    "saturdays",
    "sundays",
];

fn clock(value: &str) -> Option<(u32, u32)> {
    let time = value.split_whitespace().last()?;
    let mut parts = time.split(':');
    let h = parts.next()?.parse().ok()?;
    let m = parts.next()?.parse().ok()?;
    (h < 24 && m < 60).then_some((h, m))
}

fn hour12(h: u32) -> (u32, &'static str) {
    let suffix = if h < 12 { "am" } else { "pm" };
    let h = h % 12;
    (if h == 0 { 12 } else { h }, suffix)
}

/// "16:45" reads "a quarter to 5 pm".
fn time_phrase(value: &str) -> String {
    let Some((h, m)) = clock(value) else {
        return value.to_string();
    };
    match (h, m) {
        (0, 0) => "midnight".into(),
        (12, 0) => "noon".into(),
        (_, 0) => {
            let (h, s) = hour12(h);
            format!("{h} {s}")
        }
        (_, 15) => {
            let (h, s) = hour12(h);
            format!("a quarter past {h} {s}")
        }
        (_, 30) => {
            let (h, s) = hour12(h);
            format!("half past {h} {s}")
        }
        (23, 45) => "a quarter to midnight".into(),
        (11, 45) => "a quarter to noon".into(),
        (_, 45) => {
            let (h, s) = hour12(h + 1);
            format!("a quarter to {h} {s}")
        }
        _ => {
            let (h12, s) = hour12(h);
            format!("{h12}:{m:02} {s}")
        }
    }
}

fn interval_phrase(value: &str) -> String {
    match clock(value) {
        Some((0, m)) if m > 0 => format!("{m} minutes"),
        Some((1, 0)) => "hour".into(),
        Some((h, 0)) => format!("{h} hours"),
        _ => value.to_string(),
    }
}

fn trigger_text(t: &Trigger) -> String {
    let get = |name: &str| t.input(name).unwrap_or_default();
    match t.trigger_type.as_str() {
        "weekly" => {
            let day = get("day_of_week")
                .parse::<usize>()
                .ok()
                .and_then(|d| WEEKDAYS.get(d.wrapping_sub(1)))
                .copied()
                .unwrap_or("the chosen day");
            format!("on {day} at {}", time_phrase(get("time")))
        }
        "daily" => format!("every day at {}", time_phrase(get("time"))),
        "monthly" => format!(
            "on day {} of every month at {}",
            get("day_of_month"),
            time_phrase(get("time"))
        ),
        "repeat" => format!("every {}", interval_phrase(get("repeat"))),
        "record_create" => format!("when a {} record is created", get("table")),
        "record_update" => format!("when a {} record is updated", get("table")),
        "record_create_or_update" => format!("when a {} record is created or updated", get("table")),
        "inbound_email" if get("email_type") == "reply" => {
            format!("when a reply to a {} email arrives", get("target_table"))
        }
        "inbound_email" => "when a new email arrives".into(),
        "service_catalog" => format!("when {} is requested", spaced(get("catalog_item"))),
        "sla_task" => format!(
            "when the {} sla reaches {}%",
            spaced(get("sla_definition")),
            get("percentage")
        ),
        "inbound_rest_api" => format!("when a {} request hits {}", get("http_method"), get("resource_path")),
        other => format!("when {} fires", spaced(other)),
    }
}

/// "{{2.item.active}}=false" reads "active is false".
fn condition_phrase(condition: &str) -> String {
    let Some((lhs, rhs)) = condition.split_once('=') else {
        return condition.to_string();
    };
    let field = lhs
        .trim_start_matches("{{")
        .trim_end_matches("}}")
        .rsplit('.')
        .next()
        .unwrap_or(lhs);
    format!("{} is {rhs}", spaced(field))
}

/// Order of the component a `{{k.…}}` pill points at.
fn pill_source(value: &str) -> Option<u32> {
    value.strip_prefix("{{")?.split('.').next()?.parse().ok()
}

/// Table a component works on, following record pills back to a lookup.
fn table_of(flow: &Flow, c: &Component) -> Option<String> {
    if let Some(t) = c.input("table") {
        return Some(t.to_string());
    }
    let pill = c.input("record").or_else(|| c.input("items"))?;
    if pill.starts_with("{{trigger.") {
        let t = flow.trigger.as_ref()?;
        return t.input("table").or_else(|| t.input("target_table")).map(str::to_string);
    }
    let source = pill_source(pill)?;
    let source = flow
        .components
        .iter()
        .find(|s| s.order == source && s.order < c.order)?;
    table_of(flow, source)
}

fn component_text(flow: &Flow, c: &Component) -> String {
    if let Some(logic) = c.flow_logic() {
        let cond = || condition_phrase(c.input("condition").unwrap_or_default());
        return match logic {
            FlowLogic::If => format!("if {}", cond()),
            FlowLogic::ElseIf => format!("else if {}", cond()),
            FlowLogic::Else => "otherwise".into(),
            FlowLogic::DoUntil => format!("repeat until {}", cond()),
            FlowLogic::ForEach => match table_of(flow, c) {
                Some(t) => format!("for each {t} record"),
                None => "for each item".into(),
            },
            FlowLogic::Parallel => "run in parallel".into(),
            FlowLogic::Try => "try".into(),
            FlowLogic::Catch => "on error".into(),
            FlowLogic::End => "end".into(),
        };
    }
    let table = table_of(flow, c);
    let t = table.as_deref().unwrap_or("");
    match (c.definition.as_str(), table.is_some()) {
        ("look_up_records", true) => format!("look up {t} records"),
        ("look_up_record", true) => format!("look up a {t} record"),
        ("update_record", true) => format!("update the {t} record"),
        ("create_record", true) => format!("create a {t} record"),
        ("delete_record", true) => format!("delete the {t} record"),
        ("create_task", true) => format!("create a {t} task"),
        (d, true) => format!("{} for the {t} record", spaced(d)),
        (d, false) => spaced(d),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::parse_flow;

    #[test]
    fn time_phrases() {
        assert_eq!(time_phrase("1970-01-01 16:45:00"), "a quarter to 5 pm");
        assert_eq!(time_phrase("1970-01-01 00:00:00"), "midnight");
        assert_eq!(time_phrase("1970-01-01 12:00:00"), "noon");
        assert_eq!(time_phrase("1970-01-01 09:30:00"), "half past 9 am");
        assert_eq!(time_phrase("1970-01-01 23:45:00"), "a quarter to midnight");
        assert_eq!(time_phrase("1970-01-01 13:10:00"), "1:10 pm");
        assert_eq!(interval_phrase("1970-01-01 00:15:00"), "15 minutes");
        assert_eq!(interval_phrase("1970-01-01 04:00:00"), "4 hours");
    }

    #[test]
    fn fills_blank_annotations_only() {
        let text = include_str!("../../tests/fixtures/scheduled_loop.json");
        let mut flow = parse_flow(text).unwrap();
        let original = flow.trigger.as_ref().unwrap().annotation.clone();
        for c in &mut flow.components {
            c.annotation.clear();
        }
        let once = annotate(&flow);
        assert_eq!(once.trigger.as_ref().unwrap().annotation, original);
        let notes: Vec<&str> = once.components.iter().map(|c| c.annotation.as_str()).collect();
        assert_eq!(
            notes,
            [
                "look up incident_task records",
                "for each incident_task record",
                "if active is false",
                "post incident details"
            ]
        );
        assert_eq!(annotate(&once), once);

        flow.trigger.as_mut().unwrap().annotation.clear();
        assert_eq!(
            annotate(&flow).trigger.unwrap().annotation,
            "on wednesdays at a quarter to 5 pm"
        );
    }
}
