//! Hand-authored demonstration runs, one per bundled scenario.
//!
//! Each scenario ships a head-pose script and the trace recorded from it.
//! The trace is what `simulate --emit-trace` writes for the script under the
//! default configuration; a test keeps the two in sync.

use crate::scenario::ScenarioId;
use crate::script::Script;
use crate::trace::Trace;

pub fn script_source(id: ScenarioId) -> &'static str {
    match id {
        ScenarioId::Cup => include_str!("../assets/scripts/cup.script"),
        ScenarioId::Trash => include_str!("../assets/scripts/trash.script"),
        ScenarioId::Blanket => include_str!("../assets/scripts/blanket.script"),
        ScenarioId::Cleaning => include_str!("../assets/scripts/cleaning.script"),
        ScenarioId::Practice => include_str!("../assets/scripts/practice.script"),
    }
}

pub fn trace_source(id: ScenarioId) -> &'static str {
    match id {
        ScenarioId::Cup => include_str!("../assets/traces/cup.trace"),
        ScenarioId::Trash => include_str!("../assets/traces/trash.trace"),
        ScenarioId::Blanket => include_str!("../assets/traces/blanket.trace"),
        ScenarioId::Cleaning => include_str!("../assets/traces/cleaning.trace"),
        ScenarioId::Practice => include_str!("../assets/traces/practice.trace"),
    }
}

pub fn script(id: ScenarioId) -> Script {
    Script::parse(script_source(id)).expect("bundled scripts parse")
}

pub fn trace(id: ScenarioId) -> Trace {
    Trace::parse(trace_source(id)).expect("bundled traces parse")
}
