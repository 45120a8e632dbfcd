//! Machine-readable run reports: every command emits a structured record
//! of its inputs, the convention assignment in force, and one entry per
//! executed check with a witness payload on failure.

use crate::conventions::ConventionSet;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

impl Check {
    pub fn pass(name: &str) -> Check {
        Check {
            name: name.into(),
            status: CheckStatus::Pass,
            witness: None,
        }
    }

    pub fn fail(name: &str, witness: Value) -> Check {
        Check {
            name: name.into(),
            status: CheckStatus::Fail,
            witness: Some(witness),
        }
    }

    pub fn skipped(name: &str, reason: &str) -> Check {
        Check {
            name: name.into(),
            status: CheckStatus::Skipped,
            witness: Some(Value::String(reason.into())),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Value,
    pub conventions: ConventionSet,
    pub checks: Vec<Check>,
    pub wall_time_ms: u64,
}

impl RunReport {
    /// True when no executed check failed (skipped checks do not count
    /// against the run).
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
