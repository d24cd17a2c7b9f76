//! Tricluster JSON: `{"triclusters": [{"I": [..], "J": [..], "K": [..], "contiguous": b}]}`.
//!
//! Indices may be integers or axis labels; labels are resolved against the
//! tensor. Any further fields on an entry (such as a planted `pattern`) are
//! ignored on read.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Tensor3, Tricluster};
use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Index {
    Position(usize),
    Label(String),
}

#[derive(Debug, Deserialize)]
struct RawTricluster {
    #[serde(rename = "I")]
    obs: Vec<Index>,
    #[serde(rename = "J")]
    vars: Vec<Index>,
    #[serde(rename = "K")]
    ctxs: Vec<Index>,
    #[serde(default)]
    contiguous: bool,
}

#[derive(Debug, Deserialize)]
struct RawFile {
    triclusters: Vec<RawTricluster>,
}

/// Entry layout shared by the writer and the planting manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriclusterRecord {
    #[serde(rename = "I")]
    pub obs: Vec<usize>,
    #[serde(rename = "J")]
    pub vars: Vec<usize>,
    #[serde(rename = "K")]
    pub ctxs: Vec<usize>,
    pub contiguous: bool,
}

impl From<&Tricluster> for TriclusterRecord {
    fn from(tc: &Tricluster) -> Self {
        Self {
            obs: tc.obs.clone(),
            vars: tc.vars.clone(),
            ctxs: tc.ctxs.clone(),
            contiguous: tc.contiguous,
        }
    }
}

#[derive(Serialize)]
struct OutFile {
    triclusters: Vec<TriclusterRecord>,
}

struct Axis<'a> {
    name: &'static str,
    len: usize,
    labels: HashMap<&'a str, usize>,
}

impl<'a> Axis<'a> {
    fn new(name: &'static str, labels: &'a [String]) -> Self {
        Self {
            name,
            len: labels.len(),
            labels: labels
                .iter()
                .enumerate()
                .map(|(i, l)| (l.as_str(), i))
                .collect(),
        }
    }

    /// JSON integers are positions and strings are labels, so a label that
    /// looks numeric still resolves as a label.
    fn resolve(&self, entry: usize, idx: &[Index]) -> Result<Vec<usize>> {
        idx.iter()
            .map(|ix| match ix {
                Index::Position(p) if *p < self.len => Ok(*p),
                Index::Position(p) => Err(Error::parse(
                    format!("tricluster {entry}, {}", self.name),
                    format!("index {p} out of bounds ({})", self.len),
                )),
                Index::Label(l) => self.labels.get(l.as_str()).copied().ok_or_else(|| {
                    Error::parse(
                        format!("tricluster {entry}, {}", self.name),
                        format!("unknown label `{l}`"),
                    )
                }),
            })
            .collect()
    }
}

/// Reads triclusters and resolves them against `t`.
pub fn read_triclusters<R: Read>(source: R, t: &Tensor3) -> Result<Vec<Tricluster>> {
    let raw: RawFile = serde_json::from_reader(source)
        .map_err(|e| Error::parse(format!("line {}", e.line()), e.to_string()))?;
    let axes = [
        Axis::new("I", t.obs_labels()),
        Axis::new("J", t.var_labels()),
        Axis::new("K", t.ctx_labels()),
    ];
    raw.triclusters
        .iter()
        .enumerate()
        .map(|(n, r)| {
            let tc = Tricluster::new(
                axes[0].resolve(n, &r.obs)?,
                axes[1].resolve(n, &r.vars)?,
                axes[2].resolve(n, &r.ctxs)?,
                r.contiguous,
            )
            .map_err(|e| Error::parse(format!("tricluster {n}"), e.to_string()))?;
            Ok(tc)
        })
        .collect()
}

/// Writes triclusters with integer indices.
pub fn write_triclusters<W: Write>(triclusters: &[Tricluster], sink: W) -> Result<()> {
    let out = OutFile {
        triclusters: triclusters.iter().map(TriclusterRecord::from).collect(),
    };
    serde_json::to_writer_pretty(sink, &out)?;
    Ok(())
}
