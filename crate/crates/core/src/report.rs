//! Text and JSON renderings of a synthesis run, plus the priorities file
//! that `transform` reads back.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Rational, Value};
use crate::model::{Configuration, Ident, Network, Priority, StateFormula, StatefulPriority};
use crate::synthesis::{Outcome, SynthesisReport};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema version {0} (expected {SCHEMA_VERSION})")]
    Schema(u32),
    #[error("bad identifier: {0}")]
    Ident(String),
    #[error("bad real value `{0}`")]
    Real(String),
}

/// A variable value. Reals are written as `"n/d"` strings so that they
/// survive the round trip exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonValue {
    Bool(bool),
    Int(i64),
    Real(String),
}

impl From<Value> for JsonValue {
    fn from(v: Value) -> Self {
        match v {
            Value::Int(i) => JsonValue::Int(i),
            Value::Bool(b) => JsonValue::Bool(b),
            Value::Real(r) => JsonValue::Real(format!("{}/{}", r.numer(), r.denom())),
        }
    }
}

impl TryFrom<&JsonValue> for Value {
    type Error = ReportError;

    fn try_from(v: &JsonValue) -> Result<Self, ReportError> {
        Ok(match v {
            JsonValue::Int(i) => Value::Int(*i),
            JsonValue::Bool(b) => Value::Bool(*b),
            JsonValue::Real(s) => Value::Real(
                s.parse::<Rational>()
                    .map_err(|_| ReportError::Real(s.clone()))?,
            ),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigRecord {
    pub loc: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub loc_excluded: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub var: BTreeMap<String, JsonValue>,
    pub step: usize,
}

fn ident(s: &str) -> Result<Ident, ReportError> {
    Ident::new(s).map_err(|e| ReportError::Ident(e.0))
}

fn location(s: &str) -> Result<Ident, ReportError> {
    Ident::location(s).map_err(|e| ReportError::Ident(e.0))
}

impl From<&Configuration> for ConfigRecord {
    fn from(c: &Configuration) -> Self {
        ConfigRecord {
            loc: c
                .loc
                .iter()
                .map(|(a, l)| (a.to_string(), l.to_string()))
                .collect(),
            loc_excluded: c
                .loc_excluded
                .iter()
                .map(|(a, ls)| (a.to_string(), ls.iter().map(Ident::to_string).collect()))
                .collect(),
            var: c
                .var
                .iter()
                .map(|(v, val)| (v.to_string(), JsonValue::from(*val)))
                .collect(),
            step: c.stp,
        }
    }
}

impl ConfigRecord {
    pub fn to_configuration(&self) -> Result<Configuration, ReportError> {
        let mut c = Configuration {
            stp: self.step,
            ..Configuration::default()
        };
        for (a, l) in &self.loc {
            c.loc.insert(ident(a)?, location(l)?);
        }
        for (a, ls) in &self.loc_excluded {
            let set = ls.iter().map(|l| location(l)).collect::<Result<_, _>>()?;
            c.loc_excluded.insert(ident(a)?, set);
        }
        for (v, val) in &self.var {
            c.var.insert(ident(v)?, Value::try_from(val)?);
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatefulRecord {
    pub pre: ConfigRecord,
    pub blockee: String,
    pub blocker: String,
}

impl From<&StatefulPriority> for StatefulRecord {
    fn from(s: &StatefulPriority) -> Self {
        StatefulRecord {
            pre: ConfigRecord::from(&s.pre),
            blockee: s.prio.blockee.to_string(),
            blocker: s.prio.blocker.to_string(),
        }
    }
}

impl StatefulRecord {
    pub fn to_stateful(&self) -> Result<StatefulPriority, ReportError> {
        Ok(StatefulPriority {
            pre: self.pre.to_configuration()?,
            prio: Priority {
                blockee: ident(&self.blockee)?,
                blocker: ident(&self.blocker)?,
            },
        })
    }
}

/// Counters that do not depend on wall-clock time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsRecord {
    pub solver_calls: usize,
    pub sat: usize,
    pub unsat: usize,
    pub explore_calls: usize,
    pub max_recursion_depth: usize,
    pub preerrors_found: usize,
}

/// The structured report of one synthesis run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub schema_version: u32,
    pub network: String,
    pub query: String,
    pub max: usize,
    pub outcome: Outcome,
    pub stateful: Vec<StatefulRecord>,
    pub errors: Vec<ConfigRecord>,
    #[serde(default)]
    pub circular: Vec<StatefulRecord>,
    pub stats: StatsRecord,
}

impl ReportFile {
    pub fn new(net: &Network, f: &StateFormula, r: &SynthesisReport) -> Self {
        ReportFile {
            schema_version: SCHEMA_VERSION,
            network: net.name.to_string(),
            query: f.to_string(),
            max: r.max,
            outcome: r.outcome,
            stateful: r.stateful.iter().map(StatefulRecord::from).collect(),
            errors: r.errors.iter().map(ConfigRecord::from).collect(),
            circular: r.circular.iter().map(StatefulRecord::from).collect(),
            stats: StatsRecord {
                solver_calls: r.stats.solver.calls,
                sat: r.stats.solver.sat,
                unsat: r.stats.solver.unsat,
                explore_calls: r.stats.explore_calls,
                max_recursion_depth: r.stats.max_recursion_depth,
                preerrors_found: r.stats.preerrors_found,
            },
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        let r: ReportFile = serde_json::from_str(text)?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(ReportError::Schema(r.schema_version));
        }
        Ok(r)
    }

    pub fn stateful(&self) -> Result<Vec<StatefulPriority>, ReportError> {
        self.stateful.iter().map(StatefulRecord::to_stateful).collect()
    }
}

/// Just the stateful priorities of a run, as consumed by `transform`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrioritiesFile {
    pub schema_version: u32,
    pub network: String,
    pub stateful: Vec<StatefulRecord>,
}

impl PrioritiesFile {
    pub fn new(net: &Network, sp: &[StatefulPriority]) -> Self {
        PrioritiesFile {
            schema_version: SCHEMA_VERSION,
            network: net.name.to_string(),
            stateful: sp.iter().map(StatefulRecord::from).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("priorities serialize");
        s.push('\n');
        s
    }

    /// Reads a priorities file, or the priorities out of a full report.
    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        let p = match serde_json::from_str::<PrioritiesFile>(text) {
            Ok(p) => p,
            Err(e) => match ReportFile::from_json(text) {
                Ok(r) => PrioritiesFile {
                    schema_version: r.schema_version,
                    network: r.network,
                    stateful: r.stateful,
                },
                Err(ReportError::Json(_)) => return Err(e.into()),
                Err(other) => return Err(other),
            },
        };
        if p.schema_version != SCHEMA_VERSION {
            return Err(ReportError::Schema(p.schema_version));
        }
        Ok(p)
    }

    pub fn stateful(&self) -> Result<Vec<StatefulPriority>, ReportError> {
        self.stateful.iter().map(StatefulRecord::to_stateful).collect()
    }
}

/// The human-readable report.
pub fn text_report(net: &Network, f: &StateFormula, r: &SynthesisReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "network {}, query {}, bound {}", net.name, f, r.max);
    let _ = writeln!(out, "outcome: {}", r.outcome);
    match r.outcome {
        Outcome::ErrorUnreachable => {
            let _ = writeln!(out, "error unreachable up to bound {}", r.max);
        }
        Outcome::InitialIsError => {
            let _ = writeln!(out, "the initial state cannot be kept away from the error");
        }
        Outcome::BoundExhausted => {
            let _ = writeln!(out, "preErrors found, but none admits a priority");
        }
        _ => {}
    }
    let _ = writeln!(out, "stateful priorities ({}):", r.stateful.len());
    for s in &r.stateful {
        let _ = writeln!(out, "  {} at {}", s.prio, s.pre.snapshot_text());
    }
    if !r.circular.is_empty() {
        let _ = writeln!(out, "circular candidates ({}):", r.circular.len());
        for s in &r.circular {
            let _ = writeln!(out, "  {} at {}", s.prio, s.pre.snapshot_text());
        }
    }
    let _ = writeln!(out, "errors ({}):", r.errors.len());
    for e in &r.errors {
        let _ = writeln!(out, "  {}", e.snapshot_text());
    }
    let st = &r.stats;
    let _ = writeln!(
        out,
        "solver: {} calls ({} sat, {} unsat), {} ms",
        st.solver.calls, st.solver.sat, st.solver.unsat, st.solver.millis
    );
    let _ = writeln!(
        out,
        "exploration: {} explore calls, nesting depth {}, {} preErrors",
        st.explore_calls, st.max_recursion_depth, st.preerrors_found
    );
    out
}

trait SnapshotText {
    fn snapshot_text(&self) -> String;
}

impl SnapshotText for Configuration {
    /// `<A0=4, A1=5, x=0>`, without the step.
    fn snapshot_text(&self) -> String {
        let full = self.to_string();
        match full.rfind("; step") {
            Some(i) => format!("{}>", &full[..i]),
            None => full,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, n1_state};

    fn n1_priorities(net: &Network) -> Vec<StatefulPriority> {
        vec![
            StatefulPriority {
                pre: Configuration::from_state(net, &n1_state(net, "4", "5", 0), 2),
                prio: Priority::new("a", "d"),
            },
            StatefulPriority {
                pre: Configuration::from_state(net, &n1_state(net, "5", "4", 0), 2),
                prio: Priority::new("c", "b"),
            },
        ]
    }

    #[test]
    fn priorities_round_trip() {
        let net = fixtures::n1();
        let sp = n1_priorities(&net);
        let text = PrioritiesFile::new(&net, &sp).to_json();
        assert!(text.contains("\"blockee\": \"a\""));
        let back = PrioritiesFile::from_json(&text).unwrap().stateful().unwrap();
        assert_eq!(back, sp);
    }

    #[test]
    fn unknown_fields_and_versions_are_rejected() {
        let net = fixtures::n1();
        let text = PrioritiesFile::new(&net, &n1_priorities(&net)).to_json();
        let extra = text.replacen("\"network\"", "\"colour\": 1, \"network\"", 1);
        assert!(matches!(PrioritiesFile::from_json(&extra), Err(ReportError::Json(_))));
        let v2 = text.replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(matches!(PrioritiesFile::from_json(&v2), Err(ReportError::Schema(2))));
    }

    #[test]
    fn reals_are_exact_strings() {
        let v = Value::Real(Rational::new(-1, 6));
        let j = JsonValue::from(v);
        assert_eq!(serde_json::to_string(&j).unwrap(), "\"-1/6\"");
        assert_eq!(Value::try_from(&j).unwrap(), v);
        let back: JsonValue = serde_json::from_str("3").unwrap();
        assert_eq!(Value::try_from(&back).unwrap(), Value::Int(3));
    }

    #[test]
    fn snapshot_text_drops_the_step() {
        let net = fixtures::n1();
        let c = Configuration::from_state(&net, &n1_state(&net, "4", "5", 0), 2);
        assert_eq!(c.snapshot_text(), "<A0=4, A1=5, x=0>");
    }
}
