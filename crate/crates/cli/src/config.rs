//! `key = value` files that fill in flags the command line left unset.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::Path;

use clap::parser::ValueSource;
use clap::{ArgAction, ArgMatches, Command};

#[derive(Debug)]
pub struct ConfigError(pub String);

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// `_` in keys is read as `-` so `emit_profile` and `emit-profile` agree.
pub fn parse(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError(format!("line {}: expected key = value", i + 1)));
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(ConfigError(format!("line {}: empty key", i + 1)));
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(ConfigError(format!("line {}: duplicate key {key}", i + 1)));
        }
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text)
}

fn explicit(m: &ArgMatches, id: &str) -> bool {
    m.try_contains_id(id).unwrap_or(false) && m.value_source(id) == Some(ValueSource::CommandLine)
}

/// Appends the file's entries to `argv` as flags of the chosen subcommand,
/// skipping any flag already given on the command line. Keys naming no flag
/// of the subcommand (or the global `output`/`format`) are rejected.
pub fn merge(
    cmd: &Command,
    matches: &ArgMatches,
    mut argv: Vec<OsString>,
    entries: &BTreeMap<String, String>,
) -> Result<Vec<OsString>, ConfigError> {
    let (sub_name, sub_matches) = matches
        .subcommand()
        .ok_or_else(|| ConfigError("no subcommand".into()))?;
    let sub = cmd
        .find_subcommand(sub_name)
        .ok_or_else(|| ConfigError(format!("unknown subcommand {sub_name}")))?;

    for (key, value) in entries {
        if key == "config" {
            return Err(ConfigError("config files cannot include other config files".into()));
        }
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()) && !a.is_global_set())
            .or_else(|| cmd.get_arguments().find(|a| a.get_long() == Some(key.as_str())));
        let Some(arg) = arg else {
            return Err(ConfigError(format!("unknown key `{key}` for `{sub_name}`")));
        };
        let id = arg.get_id().as_str();
        if explicit(sub_matches, id) || explicit(matches, id) {
            continue;
        }
        match arg.get_action() {
            ArgAction::SetTrue => match value.as_str() {
                "true" => argv.push(format!("--{key}").into()),
                "false" => {}
                other => {
                    return Err(ConfigError(format!("`{key}` takes true or false, got `{other}`")))
                }
            },
            _ => argv.push(format!("--{key}={value}").into()),
        }
    }
    Ok(argv)
}
