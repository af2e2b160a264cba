//! `key=value` files: the run configuration that pre-seeds CLI flags, and
//! the store manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::Error;

/// Environment variable naming the default catalog directory.
pub const CATALOG_ENV: &str = "STARID_CATALOG";

/// Parses `key=value` lines. Blank lines and `#` comments are skipped;
/// keys and values are trimmed. A repeated key keeps its last value.
pub fn parse_key_values(text: &str, path: &Path) -> Result<BTreeMap<String, String>, Error> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::parse(path, n + 1, "expected key=value"));
        };
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::parse(path, n + 1, "empty key"));
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_key_values(&text, path)
}

/// Turns config entries into command-line tokens for the flags a subcommand
/// accepts. `flags` maps a long flag name to whether it takes a value.
/// Boolean flags are emitted only when the value is `true`; keys may use
/// `_` or `-`. Unknown keys are returned separately so the caller can warn.
pub fn config_args(entries: &BTreeMap<String, String>, flags: &BTreeMap<String, bool>) -> (Vec<String>, Vec<String>) {
    let mut args = Vec::new();
    let mut unknown = Vec::new();
    for (k, v) in entries {
        let name = k.replace('_', "-");
        match flags.get(&name) {
            Some(true) => {
                args.push(format!("--{name}"));
                args.push(v.clone());
            }
            Some(false) => {
                if v.eq_ignore_ascii_case("true") || v == "1" {
                    args.push(format!("--{name}"));
                }
            }
            None => unknown.push(k.clone()),
        }
    }
    (args, unknown)
}
