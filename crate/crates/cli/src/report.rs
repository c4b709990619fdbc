use serde::Serialize;
use serde_json::Value;

pub const FORMAT_VERSION: &str = "1";

pub const RADIUS_WARNING: &str = "labels are exact sign conditions on the slope polynomials; \
they match actual stability only inside an unknown ball around omega, and the sampling radius \
is not a certified bound";

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub version: &'static str,
    pub command: CommandEcho,
    pub input_digest: String,
    pub results: Value,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CommandEcho {
    pub name: String,
    pub args: Vec<String>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
