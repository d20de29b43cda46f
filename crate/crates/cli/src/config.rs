use crate::CliError;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use std::path::Path;

/// Effective configuration: the file's fields, then every flag that was
/// given. Unknown fields are rejected by the target type.
pub fn resolve<C: DeserializeOwned>(command: &str, file: Option<&Path>, flags: &impl Serialize) -> Result<C, CliError> {
    let mut base = match file {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(format!("{}: {e}", p.display())))?;
            match serde_json::from_str(&text) {
                Ok(Value::Object(m)) => m,
                Ok(_) => return Err(CliError::config(format!("{}: expected a JSON object", p.display()))),
                Err(e) => return Err(CliError::config(format!("{}: {e}", p.display()))),
            }
        }
        None => Map::new(),
    };
    if let Some(c) = base.remove("command") {
        if c != Value::String(command.into()) {
            return Err(CliError::config(format!("config is for command {c}, not {command:?}")));
        }
    }
    let flags = serde_json::to_value(flags).map_err(|e| CliError::config(e.to_string()))?;
    if let Value::Object(f) = flags {
        base.extend(f.into_iter().filter(|(_, v)| !v.is_null()));
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| CliError::config(format!("invalid configuration: {e}")))
}

pub fn parse_pair<A: std::str::FromStr, B: std::str::FromStr>(s: &str) -> Result<(A, B), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected A,B, got {s:?}"))?;
    Ok((
        a.trim().parse().map_err(|_| format!("bad value {a:?}"))?,
        b.trim().parse().map_err(|_| format!("bad value {b:?}"))?,
    ))
}

/// Parses a value through its serde string form.
pub fn parse_serde<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(Value::String(s.into())).map_err(|e| e.to_string())
}
