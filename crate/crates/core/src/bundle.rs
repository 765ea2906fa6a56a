use std::collections::HashMap;

use crate::dsl::SourceSpan;
use crate::dynamics::{validate_behavior_with, BehaviorModel, Event, EventId};
use crate::model::{ActionId, StaticModel, ThimacId};
use crate::report::ValidationReport;
use crate::validate::{validate_static_with, CheckOptions, RuleTable};

/// Where parsed elements were declared. Empty for bundles built in code.
#[derive(Debug, Clone, Default)]
pub struct SpanTable {
    pub thimacs: HashMap<ThimacId, SourceSpan>,
    pub actions: HashMap<ActionId, SourceSpan>,
    pub events: HashMap<EventId, SourceSpan>,
}

/// A static model together with its events and behavior.
///
/// Equality is structural and ignores source spans.
#[derive(Debug, Clone, Default)]
pub struct ModelBundle {
    pub model: StaticModel,
    pub events: Vec<Event>,
    pub behavior: BehaviorModel,
    pub spans: SpanTable,
}

impl PartialEq for ModelBundle {
    fn eq(&self, other: &Self) -> bool {
        self.model == other.model && self.events == other.events && self.behavior == other.behavior
    }
}

impl Eq for ModelBundle {}

impl ModelBundle {
    /// A bundle without events.
    pub fn new(model: StaticModel) -> Self {
        ModelBundle {
            model,
            ..Default::default()
        }
    }

    /// Appends an event and registers it with the behavior.
    pub fn add_event(&mut self, event: Event) -> EventId {
        let id = EventId(self.events.len());
        self.events.push(event);
        self.behavior.events.push(id);
        id
    }

    pub fn event(&self, id: EventId) -> &Event {
        &self.events[id.0]
    }

    pub fn event_id(&self, name: &str) -> Option<EventId> {
        self.events.iter().position(|e| e.name == name).map(EventId)
    }

    pub fn event_name(&self, id: EventId) -> &str {
        &self.events[id.0].name
    }

    /// Static validation under `table` followed by behavior validation,
    /// merged into one canonically sorted report. Behavior checks are
    /// skipped when the static model is referentially broken.
    pub fn validate(&self, table: &RuleTable, options: CheckOptions) -> ValidationReport {
        let mut report = validate_static_with(&self.model, table);
        let broken = report.violations.iter().any(|v| {
            matches!(
                v.rule,
                crate::report::Rule::Dangling | crate::report::Rule::Forest
            )
        });
        if !broken {
            report.extend(validate_behavior_with(
                &self.behavior,
                &self.events,
                &self.model,
                options,
            ));
        }
        report.sort();
        report
    }
}
