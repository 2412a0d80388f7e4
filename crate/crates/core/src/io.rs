//! On-disk formats: TOML experiment configs with dotted-key overrides, CSV
//! traces with a versioned header, and JSON summaries.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::experiment::{ExperimentConfig, Summary, SUMMARY_SCHEMA};
use crate::optim::{RunTrace, TraceRecord};

pub const TRACE_SCHEMA: &str = "bgda-trace/1";

const TAIL_COLUMNS: [&str; 7] =
    ["grad_theta_norm", "grad_phi_norm", "chi", "phi", "bregman_to_best_response", "l2re", "stepsize_theta"];

/// Writes `bytes` to a sibling temporary file and renames it over `path`, so
/// readers never observe a half-written file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("{} has no file name", path.display())))?
        .to_string_lossy();
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    let written = (|| -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if written.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(written?)
}

// ---------------------------------------------------------------- config

fn config_err(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string().trim_end().to_string())
}

/// Splits `a.b.c=value` into its key path and a TOML value. Values that do not
/// parse as TOML (bare words such as `adam+adam`) are taken as strings.
pub fn parse_override(spec: &str) -> Result<(Vec<String>, toml::Value)> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| config_err(format!("override `{spec}` is not key=value")))?;
    let path: Vec<String> = key.trim().split('.').map(str::to_string).collect();
    let bare = |s: &str| !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    if !path.iter().all(|p| bare(p)) {
        return Err(config_err(format!("override key `{}` is not a dotted path", key.trim())));
    }
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) if t.len() == 1 => t.remove("v").expect("single key"),
        _ => toml::Value::String(raw.to_string()),
    };
    Ok((path, value))
}

fn apply_override(table: &mut toml::Table, path: &[String], value: toml::Value) -> Result<()> {
    let (last, parents) = path.split_last().expect("override path is never empty");
    let mut cur = table;
    for (depth, key) in parents.iter().enumerate() {
        let slot = cur.entry(key.clone()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = slot
            .as_table_mut()
            .ok_or_else(|| config_err(format!("`{}` is not a section", path[..=depth].join("."))))?;
    }
    cur.insert(last.clone(), value);
    Ok(())
}

/// Parses a TOML config, applies `key=value` overrides in order, and validates.
pub fn load_config<S: AsRef<str>>(text: &str, overrides: &[S]) -> Result<ExperimentConfig> {
    let mut table: toml::Table = text.parse().map_err(config_err)?;
    for o in overrides {
        let (path, value) = parse_override(o.as_ref())?;
        apply_override(&mut table, &path, value)?;
    }
    let cfg = ExperimentConfig::deserialize(toml::Value::Table(table)).map_err(config_err)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    load_config::<&str>(text, &[])
}

pub fn emit_config(cfg: &ExperimentConfig) -> Result<String> {
    toml::to_string(cfg).map_err(config_err)
}

// ---------------------------------------------------------------- trace

fn header(m: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=m).map(|i| format!("L_{i}")));
    h.extend((1..=m).map(|i| format!("pi_{i}")));
    h.extend(TAIL_COLUMNS.iter().map(|s| s.to_string()));
    h
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    Error::invalid(format!("csv: {e}"))
}

/// Serializes a trace. Every float is printed with 17 significant digits so
/// that parsing recovers it exactly. Wall-clock times are not written.
pub fn write_trace<W: Write>(trace: &RunTrace, mut out: W) -> Result<()> {
    writeln!(out, "#schema={TRACE_SCHEMA}")?;
    for (k, v) in &trace.meta {
        if k.is_empty() || k.contains(['=', '\n', '\r']) || v.contains(['\n', '\r']) {
            return Err(Error::invalid(format!("trace annotation `{k}` cannot be written on one line")));
        }
        writeln!(out, "# {k}={v}")?;
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header(trace.m)).map_err(csv_err)?;
    for r in &trace.records {
        if r.losses.len() != trace.m || r.pi.len() != trace.m {
            return Err(Error::DimensionMismatch { expected: trace.m, got: r.losses.len().max(r.pi.len()) });
        }
        let mut row = vec![r.t.to_string()];
        row.extend(r.losses.iter().map(|&v| fmt(v)));
        row.extend(r.pi.iter().map(|&v| fmt(v)));
        row.extend([
            fmt(r.grad_theta_norm),
            fmt_opt(r.grad_phi_norm),
            fmt_opt(r.chi),
            fmt_opt(r.phi),
            fmt_opt(r.bregman_to_best_response),
            fmt_opt(r.l2re),
            fmt(r.stepsize_theta),
        ]);
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn trace_to_string(trace: &RunTrace) -> Result<String> {
    let mut buf = Vec::new();
    write_trace(trace, &mut buf)?;
    Ok(String::from_utf8(buf).expect("trace output is ASCII"))
}

fn parse_err(line: u64, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Parses a trace written by [`write_trace`]. Errors carry the 1-based line.
pub fn parse_trace(text: &str) -> Result<RunTrace> {
    let mut lines = text.split_inclusive('\n');
    let first_raw = lines.next().unwrap_or("");
    let first = first_raw.trim_end_matches(['\n', '\r']);
    match first.strip_prefix("#schema=") {
        Some(TRACE_SCHEMA) => {}
        Some(other) => return Err(parse_err(1, format!("unsupported trace schema `{other}`"))),
        None => return Err(parse_err(1, format!("missing `#schema={TRACE_SCHEMA}` line"))),
    }
    let mut consumed = first_raw.len();
    let mut line_no = 1u64;
    let mut meta = Vec::new();
    for raw in lines {
        if !raw.starts_with('#') {
            break;
        }
        line_no += 1;
        consumed += raw.len();
        let body = raw.trim_end_matches(['\n', '\r']);
        let (k, v) = body
            .strip_prefix("# ")
            .and_then(|kv| kv.split_once('='))
            .ok_or_else(|| parse_err(line_no, "header annotation is not `# key=value`"))?;
        if k.is_empty() {
            return Err(parse_err(line_no, "empty annotation key"));
        }
        if body.contains('\r') {
            return Err(parse_err(line_no, "stray carriage return in annotation"));
        }
        meta.push((k.to_string(), v.to_string()));
    }
    let body = text.get(consumed.min(text.len())..).unwrap_or("");
    let offset = line_no;

    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
    let line_of = |pos: Option<&csv::Position>| offset + pos.map_or(1, |p| p.line());
    let head = reader.headers().map_err(|e| parse_err(line_of(e.position()), e.to_string()))?.clone();
    if head.is_empty() || (head.len() == 1 && head[0].is_empty()) {
        return Err(parse_err(offset + 1, "missing column header"));
    }
    let m = head.iter().filter(|c| c.starts_with("L_")).count();
    if m == 0 || head.iter().ne(header(m).iter().map(String::as_str)) {
        return Err(parse_err(offset + 1, format!("unexpected columns; expected {}", header(m.max(1)).join(","))));
    }

    let mut trace = RunTrace::new(m);
    trace.meta = meta;
    for row in reader.records() {
        let row = row.map_err(|e| parse_err(line_of(e.position()), e.to_string()))?;
        let line = line_of(row.position());
        let value = |i: usize| -> Result<Option<f64>> {
            let cell = row[i].trim();
            if cell.is_empty() {
                return Ok(None);
            }
            cell.parse::<f64>().map(Some).map_err(|_| parse_err(line, format!("column `{}`: `{cell}` is not a number", &head[i])))
        };
        let required = |i: usize| value(i)?.ok_or_else(|| parse_err(line, format!("column `{}` is empty", &head[i])));
        let t: usize = row[0].trim().parse().map_err(|_| parse_err(line, format!("bad iteration index `{}`", &row[0])))?;
        if t != trace.records.len() {
            return Err(parse_err(line, format!("iteration {t} out of order; expected {}", trace.records.len())));
        }
        let tail = 1 + 2 * m;
        trace.records.push(TraceRecord {
            t,
            losses: (1..=m).map(required).collect::<Result<_>>()?,
            pi: (m + 1..=2 * m).map(required).collect::<Result<_>>()?,
            grad_theta_norm: required(tail)?,
            grad_phi_norm: value(tail + 1)?,
            chi: value(tail + 2)?,
            phi: value(tail + 3)?,
            bregman_to_best_response: value(tail + 4)?,
            l2re: value(tail + 5)?,
            stepsize_theta: required(tail + 6)?,
            wall_time: None,
        });
    }
    if trace.records.is_empty() {
        return Err(parse_err(offset + 2, "trace has no rows"));
    }
    Ok(trace)
}

pub fn read_trace(path: &Path) -> Result<RunTrace> {
    let bytes = fs::read(path)?;
    let text = std::str::from_utf8(&bytes).map_err(|e| parse_err(1, format!("not UTF-8: {e}")))?;
    parse_trace(text)
}

// ---------------------------------------------------------------- summary

pub fn summary_to_json(summary: &Summary) -> Result<String> {
    let mut s = serde_json::to_string_pretty(summary).map_err(|e| Error::invalid(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn parse_summary(text: &str) -> Result<Summary> {
    let s: Summary = serde_json::from_str(text).map_err(|e| parse_err(e.line() as u64, e.to_string()))?;
    if s.schema != SUMMARY_SCHEMA {
        return Err(parse_err(1, format!("unsupported summary schema `{}`", s.schema)));
    }
    Ok(s)
}
