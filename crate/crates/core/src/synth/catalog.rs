//! Pools of tables, triggers and actions that generation draws from.
//!
//! A few real platform names (`incident_task`, `look_up_records`,
//! `post_incident_details`, `create_a_user`, `update_record`, the
//! `activity` table) anchor the default catalog; the remaining entries are
//! plausible names added for variety.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriggerClass {
    Scheduled,
    Record,
    EmailNew,
    EmailReply,
    Catalog,
    Sla,
    Inbound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionTag {
    /// Reads a set of records; the output can drive a FOREACH.
    LookupMany,
    LookupOne,
    Crud,
    Notify,
    Approval,
    Task,
    CatalogVariables,
    IntegrationRead,
    IntegrationWrite,
    IntegrationParse,
    Utility,
}

/// How an input value is instantiated during generation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueTemplate {
    Literal(String),
    OneOf(Vec<String>),
    /// The table the flow currently works on.
    Table,
    /// Pill pointing at the record in scope (loop item, looked-up record or
    /// triggering record).
    Record,
    /// `field=value` assignment on the current table.
    FieldValues,
    /// `{{ref.field}}=value` over the record in scope.
    Condition,
    /// Pill to a variable read by the latest catalog-variables step.
    CatalogVariable(String),
    DayOfWeek,
    DayOfMonth,
    TimeOfDay,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputTemplate {
    pub name: String,
    pub value: ValueTemplate,
}

fn input(name: &str, value: ValueTemplate) -> InputTemplate {
    InputTemplate {
        name: name.into(),
        value,
    }
}

fn one_of(values: &[&str]) -> ValueTemplate {
    ValueTemplate::OneOf(values.iter().map(|s| s.to_string()).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub name: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableSpec {
    pub name: String,
    pub fields: Vec<FieldSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriggerSpec {
    pub trigger_type: String,
    pub class: TriggerClass,
    pub inputs: Vec<InputTemplate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSpec {
    pub definition: String,
    pub scope: String,
    pub tags: Vec<ActionTag>,
    /// `None`: any table. Only meaningful when an input uses
    /// [`ValueTemplate::Table`] or [`ValueTemplate::Record`].
    pub tables: Option<Vec<String>>,
    pub inputs: Vec<InputTemplate>,
    /// Output field a following IF can test, with its possible values.
    pub outcome: Option<FieldSpec>,
}

impl ActionSpec {
    pub fn has_tag(&self, tag: ActionTag) -> bool {
        self.tags.contains(&tag)
    }

    /// Acts on a record or table of the flow, or declares table affinity.
    pub fn is_table_bound(&self) -> bool {
        self.tables.is_some()
            || self
                .inputs
                .iter()
                .any(|i| matches!(i.value, ValueTemplate::Table | ValueTemplate::Record))
    }

    pub fn accepts_table(&self, table: &str) -> bool {
        self.tables.as_ref().is_none_or(|ts| ts.iter().any(|t| t == table))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catalog {
    pub tables: Vec<TableSpec>,
    pub triggers: Vec<TriggerSpec>,
    pub actions: Vec<ActionSpec>,
}

impl Catalog {
    pub fn table(&self, name: &str) -> Option<&TableSpec> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn action(&self, definition: &str) -> Option<&ActionSpec> {
        self.actions.iter().find(|a| a.definition == definition)
    }

    /// Non-empty pools, at most one table slot per action, and every table
    /// restriction names a known table.
    pub fn validate(&self) -> Result<(), String> {
        if self.tables.is_empty() || self.triggers.is_empty() || self.actions.is_empty() {
            return Err("catalog pools must be non-empty".into());
        }
        for t in &self.tables {
            if t.fields.is_empty() || t.fields.iter().any(|f| f.values.is_empty()) {
                return Err(format!("table {} needs fields with values", t.name));
            }
        }
        for a in &self.actions {
            let slots = a.inputs.iter().filter(|i| i.value == ValueTemplate::Table).count();
            if slots > 1 {
                return Err(format!("action {} has {slots} table slots", a.definition));
            }
            for t in a.tables.iter().flatten() {
                if self.table(t).is_none() {
                    return Err(format!("action {} names unknown table {t}", a.definition));
                }
            }
        }
        Ok(())
    }
}

fn fields(spec: &[(&str, &[&str])]) -> Vec<FieldSpec> {
    spec.iter()
        .map(|(name, values)| FieldSpec {
            name: name.to_string(),
            values: values.iter().map(|v| v.to_string()).collect(),
        })
        .collect()
}

fn table(name: &str, extra: &[(&str, &[&str])]) -> TableSpec {
    let mut f = fields(&[
        ("active", &["true", "false"]),
        ("state", &["1", "2", "3", "6", "7"]),
        ("priority", &["1", "2", "3", "4"]),
    ]);
    f.extend(fields(extra));
    TableSpec {
        name: name.into(),
        fields: f,
    }
}

fn action(
    definition: &str,
    scope: &str,
    tags: &[ActionTag],
    tables: Option<&[&str]>,
    inputs: Vec<InputTemplate>,
) -> ActionSpec {
    ActionSpec {
        definition: definition.into(),
        scope: scope.into(),
        tags: tags.to_vec(),
        tables: tables.map(|ts| ts.iter().map(|t| t.to_string()).collect()),
        inputs,
        outcome: None,
    }
}

impl Default for Catalog {
    fn default() -> Self {
        use ActionTag::*;
        use ValueTemplate as V;

        let tables = vec![
            table(
                "incident_task",
                &[("assignment_group", &["network", "service_desk", "database"])],
            ),
            table("incident", &[("category", &["software", "hardware", "network"])]),
            table("activity", &[("type", &["call", "email", "meeting"])]),
            table("sc_req_item", &[("approval", &["requested", "approved", "rejected"])]),
            table("sc_task", &[("assignment_group", &["fulfillment", "service_desk"])]),
            table("change_request", &[("risk", &["high", "moderate", "low"])]),
            table("problem", &[("known_error", &["true", "false"])]),
            table("sys_user", &[("locked_out", &["true", "false"])]),
            table("task_sla", &[("stage", &["in_progress", "paused", "breached"])]),
            table("cmdb_ci", &[("operational_status", &["1", "2", "6"])]),
            table("sn_hr_core_case", &[("hr_service", &["onboarding", "offboarding"])]),
        ];

        let scheduled = |t: &str, inputs: Vec<InputTemplate>| TriggerSpec {
            trigger_type: t.into(),
            class: TriggerClass::Scheduled,
            inputs,
        };
        let record = |t: &str| TriggerSpec {
            trigger_type: t.into(),
            class: TriggerClass::Record,
            inputs: vec![input("table", V::Table), input("condition", V::Condition)],
        };
        let triggers = vec![
            scheduled(
                "weekly",
                vec![input("day_of_week", V::DayOfWeek), input("time", V::TimeOfDay)],
            ),
            scheduled("daily", vec![input("time", V::TimeOfDay)]),
            scheduled(
                "monthly",
                vec![input("day_of_month", V::DayOfMonth), input("time", V::TimeOfDay)],
            ),
            scheduled(
                "repeat",
                vec![input(
                    "repeat",
                    one_of(&[
                        "1970-01-01 00:15:00",
                        "1970-01-01 00:30:00",
                        "1970-01-01 01:00:00",
                        "1970-01-01 04:00:00",
                        "1970-01-01 12:00:00",
                    ]),
                )],
            ),
            record("record_create"),
            record("record_update"),
            record("record_create_or_update"),
            TriggerSpec {
                trigger_type: "inbound_email".into(),
                class: TriggerClass::EmailNew,
                inputs: vec![
                    input("email_type", V::Literal("new".into())),
                    input(
                        "condition",
                        one_of(&[
                            "subject CONTAINS outage",
                            "subject CONTAINS access request",
                            "from ENDSWITH @example.com",
                            "body CONTAINS urgent",
                        ]),
                    ),
                ],
            },
            TriggerSpec {
                trigger_type: "inbound_email".into(),
                class: TriggerClass::EmailReply,
                inputs: vec![
                    input("email_type", V::Literal("reply".into())),
                    input("target_table", one_of(&["incident", "sc_req_item", "change_request"])),
                ],
            },
            TriggerSpec {
                trigger_type: "service_catalog".into(),
                class: TriggerClass::Catalog,
                inputs: vec![input(
                    "catalog_item",
                    one_of(&[
                        "new_laptop",
                        "software_license",
                        "vpn_access",
                        "new_hire_account",
                        "mobile_phone",
                        "shared_mailbox",
                    ]),
                )],
            },
            TriggerSpec {
                trigger_type: "sla_task".into(),
                class: TriggerClass::Sla,
                inputs: vec![
                    input(
                        "sla_definition",
                        one_of(&["p1_resolution", "p2_resolution", "response_time", "request_fulfillment"]),
                    ),
                    input("percentage", one_of(&["50", "75", "90", "100"])),
                ],
            },
            TriggerSpec {
                trigger_type: "inbound_rest_api".into(),
                class: TriggerClass::Inbound,
                inputs: vec![
                    input(
                        "resource_path",
                        one_of(&[
                            "/api/alerts",
                            "/api/orders",
                            "/api/events",
                            "/api/users",
                            "/api/tickets",
                        ]),
                    ),
                    input("http_method", one_of(&["POST", "PUT"])),
                ],
            },
        ];

        let teams_tables: &[&str] = &["incident", "incident_task"];
        let mut approval = action(
            "ask_for_approval",
            "global",
            &[Approval],
            None,
            vec![
                input("record", V::Record),
                input("rules", one_of(&["manager", "group", "any_of_group"])),
            ],
        );
        approval.outcome = Some(FieldSpec {
            name: "approval_state".into(),
            values: vec!["approved".into(), "rejected".into()],
        });
        let mut rest = action(
            "parse_rest_payload",
            "sn_ih",
            &[IntegrationParse],
            None,
            vec![input("format", one_of(&["json", "xml"]))],
        );
        rest.outcome = Some(FieldSpec {
            name: "status".into(),
            values: vec!["valid".into(), "invalid".into()],
        });

        let actions = vec![
            action(
                "look_up_records",
                "global",
                &[LookupMany],
                None,
                vec![input("table", V::Table)],
            ),
            action(
                "look_up_record",
                "global",
                &[LookupOne],
                None,
                vec![input("table", V::Table), input("conditions", V::Condition)],
            ),
            action(
                "update_record",
                "global",
                &[Crud],
                None,
                vec![input("record", V::Record), input("values", V::FieldValues)],
            ),
            action(
                "create_record",
                "global",
                &[Crud],
                None,
                vec![input("table", V::Table), input("values", V::FieldValues)],
            ),
            action(
                "delete_record",
                "global",
                &[Crud],
                None,
                vec![input("record", V::Record)],
            ),
            action(
                "post_incident_details",
                "sn_ms_teams_ah",
                &[Notify],
                Some(teams_tables),
                vec![],
            ),
            action(
                "send_email",
                "global",
                &[Notify],
                None,
                vec![
                    input(
                        "to",
                        one_of(&[
                            "{{trigger.current.assigned_to}}",
                            "it-ops@example.com",
                            "service-desk@example.com",
                        ]),
                    ),
                    input(
                        "subject",
                        one_of(&["record updated", "action required", "status change"]),
                    ),
                ],
            ),
            action(
                "send_notification",
                "global",
                &[Notify],
                None,
                vec![
                    input("record", V::Record),
                    input(
                        "notification",
                        one_of(&["assignment_notice", "escalation_notice", "resolution_notice"]),
                    ),
                ],
            ),
            action(
                "post_message",
                "sn_slack_ah",
                &[Notify],
                None,
                vec![
                    input("channel", one_of(&["#it-ops", "#alerts", "#service-desk"])),
                    input("record", V::Record),
                ],
            ),
            approval,
            action(
                "create_task",
                "global",
                &[Task],
                Some(&["sc_task", "incident_task"]),
                vec![input("table", V::Table), input("values", V::FieldValues)],
            ),
            action(
                "get_catalog_variables",
                "global",
                &[CatalogVariables],
                None,
                vec![input("requested_item", V::Literal("{{trigger.request_item}}".into()))],
            ),
            action(
                "create_a_user",
                "sn_ms_ad_spoke",
                &[IntegrationWrite],
                None,
                vec![
                    input("user_name", V::CatalogVariable("user_name".into())),
                    input("account_enabled", one_of(&["true", "false"])),
                ],
            ),
            action(
                "add_user_to_group",
                "sn_ms_ad_spoke",
                &[IntegrationWrite],
                None,
                vec![input("group", one_of(&["vpn_users", "engineering", "finance"]))],
            ),
            action(
                "get_users",
                "sn_ms_ad_spoke",
                &[IntegrationRead, LookupMany],
                None,
                vec![input(
                    "filter",
                    one_of(&["accountEnabled eq true", "department eq 'IT'", "all"]),
                )],
            ),
            action(
                "list_issues",
                "sn_jira_spoke",
                &[IntegrationRead, LookupMany],
                None,
                vec![input("project", one_of(&["OPS", "INFRA", "SEC"]))],
            ),
            rest,
            action(
                "log",
                "global",
                &[Utility],
                None,
                vec![input(
                    "message",
                    one_of(&["flow started", "record processed", "sync complete"]),
                )],
            ),
            action(
                "wait_for_condition",
                "global",
                &[Utility],
                None,
                vec![input("record", V::Record), input("condition", V::Condition)],
            ),
        ];

        Catalog {
            tables,
            triggers,
            actions,
        }
    }
}
