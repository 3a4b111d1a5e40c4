//! Configuration documents and resolved run plans.
//!
//! A document is one flat JSON object: `command`, optional `out` and `emit`,
//! and the command's parameter keys.

use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::config::{
    AuxConfig, ExponentsConfig, LemmaConfig, ReportConfig, SolveConfig, SweepConfig,
};
use crate::error::{CliError, CliResult};

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "WAVELAB_OUT";

/// Output root when neither `--out` nor [`OUT_ENV`] is given.
pub const DEFAULT_OUT_ROOT: &str = "wavelab-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Exponents,
    Aux,
    Solve,
    Sweep,
    Lemma,
    Report,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Exponents => "exponents",
            Command::Aux => "aux",
            Command::Solve => "solve",
            Command::Sweep => "sweep",
            Command::Lemma => "lemma",
            Command::Report => "report",
        }
    }

    fn parse(s: &str) -> CliResult<Self> {
        Ok(match s {
            "exponents" => Command::Exponents,
            "aux" => Command::Aux,
            "solve" => Command::Solve,
            "sweep" => Command::Sweep,
            "lemma" => Command::Lemma,
            "report" => Command::Report,
            other => {
                return Err(CliError::config(
                    "command",
                    format!("unknown command `{other}`"),
                ))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Exponents(ExponentsConfig),
    Aux(AuxConfig),
    Solve(SolveConfig),
    Sweep(SweepConfig),
    Lemma(LemmaConfig),
    Report(ReportConfig),
}

impl Payload {
    pub fn command(&self) -> Command {
        match self {
            Payload::Exponents(_) => Command::Exponents,
            Payload::Aux(_) => Command::Aux,
            Payload::Solve(_) => Command::Solve,
            Payload::Sweep(_) => Command::Sweep,
            Payload::Lemma(_) => Command::Lemma,
            Payload::Report(_) => Command::Report,
        }
    }

    fn to_value(&self) -> Value {
        let v = match self {
            Payload::Exponents(c) => serde_json::to_value(c),
            Payload::Aux(c) => serde_json::to_value(c),
            Payload::Solve(c) => serde_json::to_value(c),
            Payload::Sweep(c) => serde_json::to_value(c),
            Payload::Lemma(c) => serde_json::to_value(c),
            Payload::Report(c) => serde_json::to_value(c),
        };
        v.expect("config records serialize")
    }

    /// Runs the owning module's precondition checks without computing anything.
    pub fn validate(&self) -> CliResult<()> {
        match self {
            Payload::Exponents(c) => c.resolve().map(|_| ()),
            Payload::Aux(c) => c.validate(),
            Payload::Solve(c) => c.resolve().map(|_| ()),
            Payload::Sweep(c) => c.resolve(1).map(|_| ()),
            Payload::Lemma(c) => c.validate(),
            Payload::Report(_) => Ok(()),
        }
        .map_err(CliError::from)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Emit {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Default for Emit {
    fn default() -> Self {
        Self {
            csv: true,
            json: true,
            svg: true,
        }
    }
}

impl Emit {
    /// Comma-separated list of `csv`, `json`, `svg`.
    pub fn parse_list(s: &str) -> CliResult<Self> {
        let mut e = Emit {
            csv: false,
            json: false,
            svg: false,
        };
        for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            match item {
                "csv" => e.csv = true,
                "json" => e.json = true,
                "svg" => e.svg = true,
                other => {
                    return Err(CliError::config(
                        "emit",
                        format!("unknown artifact kind `{other}`"),
                    ))
                }
            }
        }
        Ok(e)
    }

    fn to_value(self) -> Value {
        let mut kinds = Vec::new();
        for (on, name) in [(self.csv, "csv"), (self.json, "json"), (self.svg, "svg")] {
            if on {
                kinds.push(Value::from(name));
            }
        }
        Value::Array(kinds)
    }

    fn from_value(v: &Value) -> CliResult<Self> {
        match v {
            Value::String(s) => Self::parse_list(s),
            Value::Array(items) => {
                let names: Option<Vec<&str>> = items.iter().map(Value::as_str).collect();
                let names = names
                    .ok_or_else(|| CliError::config("emit", "expected a list of strings"))?;
                Self::parse_list(&names.join(","))
            }
            _ => Err(CliError::config("emit", "expected a list of strings")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub payload: Payload,
    pub out: PathBuf,
    pub emit: Emit,
}

impl RunPlan {
    pub fn command(&self) -> Command {
        self.payload.command()
    }

    /// Flat document with every default materialized.
    pub fn to_value(&self) -> Value {
        let mut map = Map::new();
        map.insert("command".into(), Value::from(self.command().name()));
        map.insert("out".into(), Value::from(self.out.to_string_lossy().as_ref()));
        map.insert("emit".into(), self.emit.to_value());
        if let Value::Object(fields) = self.payload.to_value() {
            map.extend(fields);
        }
        Value::Object(map)
    }

    /// The plan without its output location; this is what manifests record.
    pub fn portable_value(&self) -> Value {
        let mut v = self.to_value();
        if let Value::Object(map) = &mut v {
            map.remove("out");
        }
        v
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("plan serializes")
    }
}

/// Output root from [`OUT_ENV`], else [`DEFAULT_OUT_ROOT`].
pub fn default_out_root() -> PathBuf {
    std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_ROOT))
}

fn typed<T: DeserializeOwned>(fields: Map<String, Value>) -> CliResult<T> {
    serde_path_to_error::deserialize(Value::Object(fields)).map_err(|e| {
        let path = e.path().to_string();
        CliError::config(path, e.into_inner().to_string())
    })
}

/// Resolves a parsed document. A missing `out` becomes `<out_root>/<command>`.
pub fn plan_from_value(doc: Value, out_root: &std::path::Path) -> CliResult<RunPlan> {
    let Value::Object(mut fields) = doc else {
        return Err(CliError::config(".", "the document must be a JSON object"));
    };
    let command = match fields.remove("command") {
        Some(Value::String(s)) => Command::parse(&s)?,
        Some(_) => return Err(CliError::config("command", "expected a string")),
        None => return Err(CliError::config("command", "missing required key")),
    };
    let out = match fields.remove("out") {
        Some(Value::String(s)) => PathBuf::from(s),
        Some(_) => return Err(CliError::config("out", "expected a path string")),
        None => out_root.join(command.name()),
    };
    let emit = match fields.remove("emit") {
        Some(v) => Emit::from_value(&v)?,
        None => Emit::default(),
    };
    let payload = match command {
        Command::Exponents => Payload::Exponents(typed(fields)?),
        Command::Aux => Payload::Aux(typed(fields)?),
        Command::Solve => Payload::Solve(typed(fields)?),
        Command::Sweep => Payload::Sweep(typed(fields)?),
        Command::Lemma => Payload::Lemma(typed(fields)?),
        Command::Report => Payload::Report(typed(fields)?),
    };
    payload.validate()?;
    Ok(RunPlan { payload, out, emit })
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str, out_root: &std::path::Path) -> CliResult<RunPlan> {
    let doc: Value = serde_json::from_str(text).map_err(|e| {
        CliError::config(
            format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    plan_from_value(doc, out_root)
}

/// `key=value` override; the value is read as JSON when possible, else as a string.
pub fn apply_override(doc: &mut Map<String, Value>, assignment: &str) -> CliResult<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::config(assignment, "override must look like key=value"))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(CliError::config(assignment, "empty key"));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::from(raw));
    // dotted keys reach into nested records such as `weights.u0`
    let mut parts = key.split('.').peekable();
    let mut node = doc;
    while let Some(part) = parts.next() {
        if parts.peek().is_none() {
            node.insert(part.to_string(), value);
            break;
        }
        let child = node
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
        node = child
            .as_object_mut()
            .ok_or_else(|| CliError::config(key, format!("`{part}` is not a record")))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    fn root() -> &'static Path {
        Path::new("/tmp/wl")
    }

    #[test]
    fn minimal_exponents_defaults() {
        let plan = parse_config(
            r#"{"command": "exponents", "kind": "SS", "n": 3, "p": 2, "q": 2}"#,
            root(),
        )
        .unwrap();
        let Payload::Exponents(c) = &plan.payload else {
            panic!("wrong payload")
        };
        assert_eq!(c.tie_tolerance, 1e-9);
        assert_eq!(plan.out, root().join("exponents"));
        assert_eq!(plan.emit, Emit::default());
        assert_eq!(plan.to_value()["tie_tolerance"], Value::from(1e-9));
    }

    #[test]
    fn round_trip_is_identity() {
        let docs = [
            r#"{"command": "exponents", "kind": "GG", "n": 4, "p": 1.5, "q": 2.5}"#,
            r#"{"command": "solve", "kind": "SG", "p": 1.5, "q": 2, "epsilon": 0.5, "t_max": 3}"#,
            r#"{"command": "sweep", "kind": "SS", "p": 1.5, "q": 1.5, "damping_amplitude": 1}"#,
            r#"{"command": "lemma", "p1": 2, "p2": 2, "emit": "csv"}"#,
            r#"{"command": "aux", "damping_amplitude": 0.5}"#,
            r#"{"command": "report", "sweep": "a/sweep.json"}"#,
        ];
        for d in docs {
            let plan = parse_config(d, root()).unwrap();
            let again = parse_config(&plan.to_json(), root()).unwrap();
            assert_eq!(plan, again, "{d}");
        }
    }

    #[test]
    fn bad_exponent_names_key() {
        let err = parse_config(
            r#"{"command": "exponents", "kind": "SS", "n": 3, "p": 0.5, "q": 2}"#,
            root(),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            CliError::Module(wavelab::Error::InvalidExponent { name: "p", .. })
        ));
        assert_eq!(err.exit_code(), crate::error::exit::CONFIG);
    }

    #[test]
    fn unknown_and_missing_keys() {
        let err = parse_config(
            r#"{"command": "exponents", "kind": "SS", "n": 3, "p": 2, "q": 2, "pp": 1}"#,
            root(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("pp"), "{err}");
        let err = parse_config(r#"{"command": "exponents", "kind": "SS", "n": 3, "p": 2}"#, root())
            .unwrap_err();
        assert!(err.to_string().contains("`q`"), "{err}");
        let err = parse_config(
            r#"{"command": "solve", "kind": "SS", "p": 2, "q": 2, "epsilon": 1, "t_max": 1,
                "weights": {"u0": 1, "u1": 1, "v0": 1, "v2": 1}}"#,
            root(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("weights"), "{err}");
        assert!(parse_config(r#"{"kind": "SS"}"#, root()).is_err());
    }

    #[test]
    fn forwarded_regime_and_grid_errors() {
        let ps = wavelab::exponents::strauss_exponent(wavelab::exponents::Dimension::new(3).unwrap());
        let doc = format!(r#"{{"command": "sweep", "kind": "SS", "p": {ps}, "q": {ps}}}"#);
        let err = parse_config(&doc, root()).unwrap_err();
        assert_eq!(err.exit_code(), crate::error::exit::UNSUPPORTED_REGIME);
        let err = parse_config(
            r#"{"command": "solve", "kind": "SS", "p": 2, "q": 2, "epsilon": 1, "t_max": 1, "cfl": 2.0}"#,
            root(),
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), crate::error::exit::CONFIG);
    }

    #[test]
    fn overrides() {
        let mut doc = Map::new();
        apply_override(&mut doc, "p=1.5").unwrap();
        apply_override(&mut doc, "kind=SS").unwrap();
        apply_override(&mut doc, "weights.u0=0").unwrap();
        assert_eq!(doc["p"], Value::from(1.5));
        assert_eq!(doc["kind"], Value::from("SS"));
        assert_eq!(doc["weights"]["u0"], Value::from(0));
        assert!(apply_override(&mut doc, "novalue").is_err());
    }

    #[test]
    fn emit_lists() {
        let e = Emit::parse_list("csv, svg").unwrap();
        assert!(e.csv && e.svg && !e.json);
        assert!(Emit::parse_list("png").is_err());
    }
}
