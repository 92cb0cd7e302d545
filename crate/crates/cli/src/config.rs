//! `key = value` configuration files merged underneath the command line.

use std::ffi::OsString;

use crate::args::SUBCOMMANDS;
use crate::error::{usage, CliResult};

/// Entries of a configuration file.
///
/// Blank lines and lines without `=` are ignored, as is a leading `#`, so the
/// header block of an output file is itself a valid configuration.
pub fn parse(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim().trim_start_matches('#').trim();
        let Some((k, v)) = line.split_once('=') else {
            continue;
        };
        let key = k.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            if raw.trim_start().starts_with('#') {
                continue;
            }
            return Err(usage(format!("config line {}: bad key {key:?}", i + 1)));
        }
        out.push((key.replace('_', "-"), v.trim().to_string()));
    }
    Ok(out)
}

fn take_config(argv: &mut Vec<OsString>) -> CliResult<Option<String>> {
    let mut i = 1;
    while i < argv.len() {
        let a = argv[i].to_string_lossy().into_owned();
        if a == "--config" {
            if i + 1 >= argv.len() {
                return Err(usage("--config needs a path"));
            }
            let p = argv.remove(i + 1).to_string_lossy().into_owned();
            argv.remove(i);
            return Ok(Some(p));
        }
        if let Some(p) = a.strip_prefix("--config=") {
            let p = p.to_string();
            argv.remove(i);
            return Ok(Some(p));
        }
        i += 1;
    }
    Ok(None)
}

/// Rewrites `argv` so that config entries precede the user's own flags.
pub fn merge_argv(mut argv: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let Some(path) = take_config(&mut argv)? else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path)?;
    let entries = parse(&text)?;
    let pos = argv
        .iter()
        .skip(1)
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()))
        .map(|p| p + 1);
    let sub = match pos {
        Some(p) => argv.remove(p).to_string_lossy().into_owned(),
        None => match entries.iter().find(|(k, _)| k == "subcommand") {
            Some((_, v)) => v.clone(),
            None => return Err(usage(format!("{path}: no subcommand given"))),
        },
    };
    let mut out = vec![argv[0].clone(), sub.into()];
    for (k, v) in entries {
        if k == "subcommand" || v == "false" {
            continue;
        }
        out.push(format!("--{k}").into());
        if v != "true" {
            out.push(v.into());
        }
    }
    out.extend(argv.into_iter().skip(1));
    Ok(out)
}
