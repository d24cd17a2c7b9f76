//! Tensor serialization.
//!
//! Two formats are supported:
//!
//! * long-form CSV with header `obs,var,ctx,value`, one row per non-missing
//!   cell. Axis labels are indexed in first-appearance order. The writer
//!   prepends a `# trisig ` comment line carrying the axis labels, the
//!   temporal flag and the variable domains as JSON so that reading it back
//!   is lossless. Without that line, domains are inferred: a variable whose
//!   values all parse as numbers is real-valued, otherwise it is ordinal
//!   with categories sorted lexicographically.
//! * tensor JSON:
//!   `{"obs":[..],"vars":[..],"ctxs":[..],"temporal":b,"domains":[..],"cells":[[i,j,k,value],..]}`.

use std::collections::HashMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use super::{Category, Tensor3, TensorBuilder, Value, VariableDomain};
use crate::error::{Error, Result};

const META_PREFIX: &str = "# trisig ";
const CSV_HEADER: [&str; 4] = ["obs", "var", "ctx", "value"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorFormat {
    Csv,
    Json,
}

impl TensorFormat {
    /// `.json` selects JSON; anything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => TensorFormat::Json,
            _ => TensorFormat::Csv,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Meta {
    obs: Vec<String>,
    vars: Vec<String>,
    ctxs: Vec<String>,
    temporal: bool,
    domains: Vec<VariableDomain>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TensorDoc {
    obs: Vec<String>,
    vars: Vec<String>,
    ctxs: Vec<String>,
    temporal: bool,
    domains: Vec<VariableDomain>,
    cells: Vec<(usize, usize, usize, Json)>,
}

pub fn read_tensor(path: &Path) -> Result<Tensor3> {
    let text = fs::read_to_string(path)?;
    match TensorFormat::from_path(path) {
        TensorFormat::Json => read_tensor_json(text.as_bytes()),
        TensorFormat::Csv => read_tensor_csv(text.as_bytes()),
    }
}

pub fn write_tensor(t: &Tensor3, path: &Path) -> Result<()> {
    let mut out = Vec::new();
    match TensorFormat::from_path(path) {
        TensorFormat::Json => write_tensor_json(t, &mut out)?,
        TensorFormat::Csv => write_tensor_csv(t, &mut out)?,
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_tensor_json<W: Write>(t: &Tensor3, sink: W) -> Result<()> {
    let mut cells = Vec::with_capacity(t.count_present());
    for_each_present(t, |i, j, k, v| {
        let value = match v {
            Value::Cat(c) => Json::String(t.domain(j).categories()[c as usize].clone()),
            Value::Real(x) => Json::from(x),
        };
        cells.push((i, j, k, value));
    });
    let doc = TensorDoc {
        obs: t.obs.clone(),
        vars: t.vars.clone(),
        ctxs: t.ctxs.clone(),
        temporal: t.temporal,
        domains: t.domains.clone(),
        cells,
    };
    serde_json::to_writer(sink, &doc)?;
    Ok(())
}

pub fn read_tensor_json<R: Read>(source: R) -> Result<Tensor3> {
    let doc: TensorDoc = serde_json::from_reader(source).map_err(|e| {
        Error::parse(
            format!("line {}, column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    let mut b = TensorBuilder::new(doc.obs, doc.vars, doc.ctxs, doc.domains, doc.temporal)?;
    let (n, m, p) = {
        let t = b.tensor();
        (t.n_obs(), t.n_vars(), t.n_ctx())
    };
    for (idx, (i, j, k, value)) in doc.cells.into_iter().enumerate() {
        let locus = || format!("cell record {idx}");
        if i >= n || j >= m || k >= p {
            return Err(Error::parse(
                locus(),
                format!("index ({i}, {j}, {k}) out of bounds"),
            ));
        }
        let domain = b.tensor().domain(j).clone();
        match (&domain, &value) {
            (VariableDomain::Ordinal { .. }, Json::String(label)) => b.set_label(i, j, k, label)?,
            (VariableDomain::Ordinal { .. }, Json::Number(num)) => {
                let c = num
                    .as_u64()
                    .filter(|&c| (c as usize) < domain.cardinality().unwrap_or(0))
                    .ok_or_else(|| Error::DomainMismatch {
                        var: b.tensor().vars[j].clone(),
                        value: num.to_string(),
                    })?;
                b.set(i, j, k, Value::Cat(c as Category))?
            }
            (VariableDomain::Real, Json::Number(num)) => {
                let x = num
                    .as_f64()
                    .ok_or_else(|| Error::parse(locus(), "non-finite number"))?;
                b.set(i, j, k, Value::Real(x))?
            }
            (_, Json::Null) => {}
            (_, other) => {
                return Err(Error::DomainMismatch {
                    var: b.tensor().vars[j].clone(),
                    value: other.to_string(),
                })
            }
        }
    }
    Ok(b.build())
}

pub fn write_tensor_csv<W: Write>(t: &Tensor3, mut sink: W) -> Result<()> {
    let meta = Meta {
        obs: t.obs.clone(),
        vars: t.vars.clone(),
        ctxs: t.ctxs.clone(),
        temporal: t.temporal,
        domains: t.domains.clone(),
    };
    writeln!(sink, "{META_PREFIX}{}", serde_json::to_string(&meta)?)?;
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    let mut result = Ok(());
    for_each_present(t, |i, j, k, v| {
        if result.is_ok() {
            result = w.write_record([
                t.obs[i].as_str(),
                t.vars[j].as_str(),
                t.ctxs[k].as_str(),
                t.format_value(j, v).as_str(),
            ]);
        }
    });
    result.map_err(csv_err)?;
    w.flush()?;
    Ok(())
}

pub fn read_tensor_csv<R: Read>(mut source: R) -> Result<Tensor3> {
    let mut text = String::new();
    source
        .read_to_string(&mut text)
        .map_err(|e| Error::parse("input", e.to_string()))?;

    let mut meta: Option<Meta> = None;
    let mut body_start = 0;
    let mut skipped_lines = 0u64;
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if let Some(json) = trimmed.strip_prefix(META_PREFIX) {
            meta =
                Some(serde_json::from_str(json).map_err(|e| {
                    Error::parse(format!("line {}", skipped_lines + 1), e.to_string())
                })?);
        } else if !trimmed.starts_with('#') {
            break;
        }
        body_start += line.len();
        skipped_lines += 1;
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(&text.as_bytes()[body_start..]);
    let headers = reader.headers().map_err(csv_err)?.clone();
    if headers.iter().map(str::trim).ne(CSV_HEADER) {
        return Err(Error::parse(
            format!("line {}", skipped_lines + 1),
            format!(
                "expected header `obs,var,ctx,value`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line()) + skipped_lines;
        if rec.len() != 4 {
            return Err(Error::parse(
                format!("line {line}"),
                format!("expected 4 fields, found {}", rec.len()),
            ));
        }
        rows.push((
            line,
            [
                rec[0].to_string(),
                rec[1].to_string(),
                rec[2].to_string(),
                rec[3].to_string(),
            ],
        ));
    }

    let meta = match meta {
        Some(m) => m,
        None => infer_meta(&rows),
    };
    let index = |labels: &[String]| -> HashMap<String, usize> {
        labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect()
    };
    let (obs_ix, var_ix, ctx_ix) = (index(&meta.obs), index(&meta.vars), index(&meta.ctxs));
    let mut b = TensorBuilder::new(meta.obs, meta.vars, meta.ctxs, meta.domains, meta.temporal)?;
    let mut seen = std::collections::HashSet::new();
    for (line, [o, v, c, value]) in rows {
        let locus = || format!("line {line}");
        let lookup = |ix: &HashMap<String, usize>, label: &str, axis: &str| {
            ix.get(label)
                .copied()
                .ok_or_else(|| Error::parse(locus(), format!("unknown {axis} label `{label}`")))
        };
        let (i, j, k) = (
            lookup(&obs_ix, &o, "obs")?,
            lookup(&var_ix, &v, "var")?,
            lookup(&ctx_ix, &c, "ctx")?,
        );
        if !seen.insert((i, j, k)) {
            return Err(Error::parse(
                locus(),
                format!("duplicate cell ({o}, {v}, {c})"),
            ));
        }
        match b.tensor().domain(j) {
            VariableDomain::Ordinal { .. } => b.set_label(i, j, k, &value)?,
            VariableDomain::Real => {
                let x: f64 = value.trim().parse().map_err(|_| Error::DomainMismatch {
                    var: v.clone(),
                    value: value.clone(),
                })?;
                b.set(i, j, k, Value::Real(x))?;
            }
        }
    }
    Ok(b.build())
}

fn infer_meta(rows: &[(u64, [String; 4])]) -> Meta {
    fn push(labels: &mut Vec<String>, ix: &mut HashMap<String, usize>, s: &str) -> usize {
        *ix.entry(s.to_string()).or_insert_with(|| {
            labels.push(s.to_string());
            labels.len() - 1
        })
    }
    let (mut obs, mut vars, mut ctxs) = (Vec::new(), Vec::new(), Vec::new());
    let (mut oi, mut vi, mut ci) = (HashMap::new(), HashMap::new(), HashMap::new());
    let mut values: Vec<Vec<&str>> = Vec::new();
    for (_, [o, v, c, value]) in rows {
        push(&mut obs, &mut oi, o);
        let j = push(&mut vars, &mut vi, v);
        push(&mut ctxs, &mut ci, c);
        if values.len() <= j {
            values.resize_with(j + 1, Vec::new);
        }
        values[j].push(value);
    }
    let domains = values
        .into_iter()
        .map(|vals| {
            if vals
                .iter()
                .all(|s| s.trim().parse::<f64>().is_ok_and(f64::is_finite))
            {
                VariableDomain::Real
            } else {
                let mut cats: Vec<String> = vals.iter().map(|s| s.to_string()).collect();
                cats.sort();
                cats.dedup();
                VariableDomain::ordinal(cats)
            }
        })
        .collect();
    Meta {
        obs,
        vars,
        ctxs,
        temporal: false,
        domains,
    }
}

fn for_each_present(t: &Tensor3, mut f: impl FnMut(usize, usize, usize, Value)) {
    for i in 0..t.n_obs() {
        for j in 0..t.n_vars() {
            for k in 0..t.n_ctx() {
                if let Some(v) = t.get(i, j, k) {
                    f(i, j, k, v);
                }
            }
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    let locus = e
        .position()
        .map_or_else(|| "csv".to_string(), |p| format!("line {}", p.line()));
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::parse(locus, format!("{kind:?}")),
    }
}
