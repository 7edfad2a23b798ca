//! `--config` files: `key=value` lines mirroring long flags.
//!
//! The file's flags are spliced in right after the subcommand name, ahead of
//! anything given on the command line, so explicit flags win.

use std::ffi::OsString;
use std::path::Path;

use crate::error::CliError;

pub fn parse_config(text: &str) -> Result<Vec<OsString>, CliError> {
    let mut args = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "config line {}: expected key=value, got {line:?}",
                n + 1
            )));
        };
        let key = key.trim().trim_start_matches("--");
        let value = value.trim();
        if key.is_empty() || key == "config" {
            return Err(CliError::Usage(format!("config line {}: invalid key", n + 1)));
        }
        match value {
            "true" => args.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                args.push(format!("--{key}").into());
                args.push(value.into());
            }
        }
    }
    Ok(args)
}

fn config_path(args: &[OsString]) -> Result<Option<(usize, usize, OsString)>, CliError> {
    for (i, a) in args.iter().enumerate() {
        let Some(s) = a.to_str() else { continue };
        if s == "--" {
            break;
        }
        if s == "--config" {
            let path = args
                .get(i + 1)
                .cloned()
                .ok_or_else(|| CliError::Usage("--config needs a path".into()))?;
            return Ok(Some((i, 2, path)));
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Ok(Some((i, 1, p.into())));
        }
    }
    Ok(None)
}

/// Removes `--config PATH` from `args` and splices the file's flags in after
/// the subcommand.
pub fn expand_config(mut args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some((at, len, path)) = config_path(&args)? else {
        return Ok(args);
    };
    args.drain(at..at + len);
    let text = std::fs::read_to_string(Path::new(&path)).map_err(|e| {
        CliError::Io(format!("cannot read config {}: {e}", Path::new(&path).display()))
    })?;
    let extra = parse_config(&text)?;
    let sub = args
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|i| i + 2)
        .unwrap_or(args.len());
    args.splice(sub..sub, extra);
    Ok(args)
}
