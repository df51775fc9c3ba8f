use flowkit::flow::{canonicalize, parse_flow, serialize_flow, serialize_flow_pretty, Flow, ParseError};
use flowkit::synth::{default_registry, generate_flow, Catalog, GenParams};
use proptest::prelude::*;

const FIXTURE: &str = include_str!("fixtures/scheduled_loop.json");

/// A generated flow with its orders spread out and names re-cased, so
/// canonicalization has work to do.
fn messy_flow() -> impl Strategy<Value = Flow> {
    let registry = default_registry(&GenParams::default());
    (0..registry.len(), any::<u64>(), 1u32..5, any::<bool>()).prop_map(move |(p, seed, stride, upper)| {
        let mut flow = generate_flow(&registry[p], &Catalog::default(), seed);
        for c in &mut flow.components {
            c.order *= stride;
            c.block = c.block.map(|b| b * stride);
            if upper {
                c.scope = format!("  {} ", c.scope.to_uppercase());
            }
        }
        flow
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn canonicalize_is_idempotent(flow in messy_flow()) {
        let once = canonicalize(&flow);
        prop_assert_eq!(canonicalize(&once), once);
    }

    #[test]
    fn serialization_round_trips(flow in messy_flow()) {
        let text = serialize_flow(&flow);
        let back = parse_flow(&text).unwrap();
        prop_assert_eq!(&back, &flow);
        prop_assert_eq!(parse_flow(&serialize_flow_pretty(&flow)).unwrap(), flow.clone());
        prop_assert_eq!(back.content_id(), flow.content_id());
    }

    #[test]
    fn canonical_orders_are_dense(flow in messy_flow()) {
        let c = canonicalize(&flow);
        for (i, comp) in c.components.iter().enumerate() {
            prop_assert_eq!(comp.order as usize, i + 1);
            if let Some(b) = comp.block {
                prop_assert!(b < comp.order);
                prop_assert!(c.components[b as usize - 1].flow_logic().is_some());
            }
        }
    }
}

#[test]
fn fixture_round_trip_is_byte_stable() {
    let flow = parse_flow(FIXTURE).unwrap();
    let canonical = serialize_flow(&canonicalize(&flow));
    assert_eq!(
        serialize_flow(&canonicalize(&parse_flow(&canonical).unwrap())),
        canonical
    );
    assert_eq!(
        flow.trigger.as_ref().unwrap().annotation,
        "on wednesdays at a quarter to 5 pm"
    );
    assert_eq!(flow.components[3].scope, "sn_ms_teams_ah");
}

#[test]
fn violations_name_a_path() {
    let mut v: serde_json::Value = serde_json::from_str(FIXTURE).unwrap();
    v["components"][3]["block"] = 4.into();
    match parse_flow(&v.to_string()) {
        Err(ParseError::SchemaViolation { path, .. }) => assert_eq!(path, "$.components[3].block"),
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse_flow("{not json"), Err(ParseError::MalformedJson(_))));
}
