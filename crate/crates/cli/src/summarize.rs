use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

/// Merges verdict files into one object keyed by scenario. Repeated
/// scenarios get `#2`, `#3`, ... suffixes. The top-level `pass` is the
/// conjunction of all verdicts.
pub fn summarize(files: &[(String, String)]) -> CliResult<Value> {
    if files.is_empty() {
        return Err(CliError::parse("summarize needs at least one result file"));
    }
    let mut out = Map::new();
    let mut all = true;
    for (path, text) in files {
        let v: Value =
            serde_json::from_str(text).map_err(|e| CliError::parse(format!("{path}: {e}")))?;
        let scenario = v
            .get("scenario")
            .and_then(Value::as_str)
            .ok_or_else(|| CliError::parse(format!("{path}: missing string field \"scenario\"")))?
            .to_string();
        let pass = v
            .get("pass")
            .and_then(Value::as_bool)
            .ok_or_else(|| CliError::parse(format!("{path}: missing boolean field \"pass\"")))?;
        all &= pass;
        let mut key = scenario.clone();
        let mut n = 1;
        while out.contains_key(&key) || key == "pass" {
            n += 1;
            key = format!("{scenario}#{n}");
        }
        out.insert(key, v);
    }
    out.insert("pass".into(), Value::Bool(all));
    Ok(Value::Object(out))
}
