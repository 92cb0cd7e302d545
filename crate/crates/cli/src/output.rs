use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::args::{Command, Format};
use crate::error::CliResult;

pub const VERSION: &str = concat!("trotterr ", env!("CARGO_PKG_VERSION"));

/// Resolved configuration as `(flag, value)` pairs, subcommand first.
pub fn config_echo(cmd: &Command) -> CliResult<Vec<(String, String)>> {
    let mut out = vec![("subcommand".to_string(), cmd.name().to_string())];
    if let Value::Object(map) = cmd.echo()? {
        for (k, v) in map {
            let v = match v {
                Value::Null => continue,
                Value::String(s) => s,
                other => other.to_string(),
            };
            out.push((k.replace('_', "-"), v));
        }
    }
    Ok(out)
}

fn render_csv<T: Serialize>(echo: &[(String, String)], rows: &[T]) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    writeln!(buf, "# {VERSION}")?;
    for (k, v) in echo {
        writeln!(buf, "# {k} = {v}")?;
    }
    let mut w = csv::Writer::from_writer(buf);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

fn render_json<T: Serialize>(echo: &[(String, String)], rows: &[T]) -> CliResult<Vec<u8>> {
    let config: serde_json::Map<String, Value> =
        echo.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
    let doc = serde_json::json!({ "version": VERSION, "config": config, "rows": rows });
    let mut buf = serde_json::to_vec_pretty(&doc)?;
    buf.push(b'\n');
    Ok(buf)
}

pub fn emit<T: Serialize>(cmd: &Command, rows: &[T]) -> CliResult<()> {
    let echo = config_echo(cmd)?;
    let common = cmd.common();
    let bytes = match common.format {
        Format::Csv => render_csv(&echo, rows)?,
        Format::Json => render_json(&echo, rows)?,
    };
    match &common.out {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}

/// Writes a preformatted document, used for the Hamiltonian JSON dump.
pub fn emit_raw(cmd: &Command, text: &str) -> CliResult<()> {
    match &cmd.common().out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
