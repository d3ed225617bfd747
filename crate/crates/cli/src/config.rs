//! `--config FILE`: a JSON object keyed by long flag names, expanded into
//! flags placed before the ones typed on the command line, so typed flags
//! win. Arrays become repeated flags, inner arrays comma lists, `true` a
//! bare switch; `false` and `null` are dropped.

use std::path::Path;

use roughdisc::{Error, Result};
use serde_json::Value;

fn scalar(v: &Value) -> Result<String> {
    match v {
        Value::Number(n) => Ok(n.to_string()),
        Value::String(s) => Ok(s.clone()),
        Value::Array(items) => Ok(items
            .iter()
            .map(scalar)
            .collect::<Result<Vec<_>>>()?
            .join(",")),
        other => Err(Error::invalid(format!("unsupported config value {other}"))),
    }
}

pub fn to_flags(config: &Value) -> Result<Vec<String>> {
    let Value::Object(map) = config else {
        return Err(Error::invalid("config must be a JSON object"));
    };
    let mut out = Vec::new();
    for (key, v) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => out.push(flag),
            Value::Array(items) => {
                for item in items {
                    out.push(flag.clone());
                    out.push(scalar(item)?);
                }
            }
            other => {
                out.push(flag);
                out.push(scalar(other)?);
            }
        }
    }
    Ok(out)
}

/// Splices the flags of every `--config FILE` right after the subcommand.
pub fn expand(args: Vec<String>) -> Result<Vec<String>> {
    let Some(k) = args.iter().position(|a| a == "--config") else {
        return Ok(args);
    };
    let path = args
        .get(k + 1)
        .ok_or_else(|| Error::invalid("--config needs a file"))?;
    let text = std::fs::read_to_string(Path::new(path))
        .map_err(|e| Error::invalid(format!("cannot read config {path}: {e}")))?;
    let value: Value = serde_json::from_str(&text)?;
    let mut rest: Vec<String> = args[..k].to_vec();
    rest.extend_from_slice(&args[k + 2..]);
    let sub = rest
        .iter()
        .skip(1)
        .position(|a| !a.starts_with('-'))
        .map(|p| p + 2)
        .unwrap_or(rest.len());
    let mut out = rest[..sub].to_vec();
    out.extend(to_flags(&value)?);
    out.extend_from_slice(&rest[sub..]);
    expand(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flags_from_json() {
        let v = json!({"h": 0.05, "hollow": "mushroom", "interval": [[1.2, 1.3], [1.35, 1.4]], "no_mirrors": true, "hollow_file": null, "x": false});
        let f = to_flags(&v).unwrap();
        let want = [
            "--h",
            "0.05",
            "--hollow",
            "mushroom",
            "--interval",
            "1.2,1.3",
            "--interval",
            "1.35,1.4",
            "--no-mirrors",
        ];
        assert_eq!(f, want);
    }
}
