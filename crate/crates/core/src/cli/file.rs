//! JSON network files.
//!
//! ```json
//! {"S": 2, "D": 2,
//!  "edges": [[1,1],[1,2],[2,2]],
//!  "messages": [[1,1],[1,2],[2,2]],
//!  "channel": {"F": 1, "powers": [3.0, 1.0],
//!              "gains": [{"rx": 1, "tx": 1, "carrier": 1, "re": 1.0, "im": 0.0}]}}
//! ```
//!
//! Pairs are `[rx, tx]`, all indices 1-based. `channel` is optional.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{ChannelInstance, InstanceError, Link, NetworkTopology, Violation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    #[serde(rename = "S")]
    pub sources: usize,
    #[serde(rename = "D")]
    pub destinations: usize,
    pub edges: Vec<[usize; 2]>,
    pub messages: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    #[serde(rename = "F")]
    pub carriers: usize,
    pub powers: Vec<f64>,
    pub gains: Vec<GainEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainEntry {
    pub rx: usize,
    pub tx: usize,
    pub carrier: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Error)]
pub enum FileError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed network file at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("field `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error("invalid network: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Validation(Vec<Violation>),
    #[error("invalid channel: {0}")]
    Instance(InstanceError),
}

impl FileError {
    /// True for content that parsed but breaks a network or channel invariant.
    pub fn is_validation(&self) -> bool {
        matches!(self, FileError::Validation(_) | FileError::Instance(_))
    }
}

pub struct ParsedNetwork {
    pub file: NetworkFile,
    pub topology: NetworkTopology,
    pub instance: Option<ChannelInstance>,
}

pub fn parse_network_file(path: &Path) -> Result<ParsedNetwork, FileError> {
    let text = std::fs::read_to_string(path).map_err(|source| FileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_network_str(&text)
}

fn links(field: &str, pairs: &[[usize; 2]]) -> Result<Vec<Link>, FileError> {
    let mut seen = BTreeSet::new();
    pairs
        .iter()
        .enumerate()
        .map(|(k, &[rx, tx])| {
            let l = Link::new(rx, tx);
            if !seen.insert(l) {
                return Err(FileError::Schema {
                    field: format!("{field}[{k}]"),
                    message: format!("duplicate pair {l}"),
                });
            }
            Ok(l)
        })
        .collect()
}

pub fn parse_network_str(text: &str) -> Result<ParsedNetwork, FileError> {
    let file: NetworkFile = serde_json::from_str(text).map_err(|e| FileError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let (topology, instance) = file_to_network(&file)?;
    Ok(ParsedNetwork {
        file,
        topology,
        instance,
    })
}

pub fn file_to_network(
    file: &NetworkFile,
) -> Result<(NetworkTopology, Option<ChannelInstance>), FileError> {
    let topology = NetworkTopology::new(
        file.sources,
        file.destinations,
        links("edges", &file.edges)?,
        links("messages", &file.messages)?,
    );
    topology.validate().map_err(FileError::Validation)?;
    let Some(ch) = &file.channel else {
        return Ok((topology, None));
    };
    let mut gains = BTreeMap::new();
    for (k, g) in ch.gains.iter().enumerate() {
        if gains
            .insert((g.rx, g.tx, g.carrier), Complex64::new(g.re, g.im))
            .is_some()
        {
            return Err(FileError::Schema {
                field: format!("channel.gains[{k}]"),
                message: format!(
                    "duplicate gain for rx={}, tx={}, carrier={}",
                    g.rx, g.tx, g.carrier
                ),
            });
        }
    }
    let instance = ChannelInstance::new(topology.clone(), ch.carriers, ch.powers.clone(), gains)
        .map_err(FileError::Instance)?;
    Ok((topology, Some(instance)))
}

pub fn topology_to_file(topology: &NetworkTopology) -> NetworkFile {
    NetworkFile {
        sources: topology.num_sources(),
        destinations: topology.num_destinations(),
        edges: topology.edges().iter().map(|l| [l.rx, l.tx]).collect(),
        messages: topology.messages().iter().map(|l| [l.rx, l.tx]).collect(),
        channel: None,
    }
}

pub fn instance_to_file(instance: &ChannelInstance) -> NetworkFile {
    NetworkFile {
        channel: Some(ChannelFile {
            carriers: instance.num_carriers(),
            powers: instance.power_budget().to_vec(),
            gains: instance
                .gains()
                .iter()
                .map(|(&(rx, tx, carrier), g)| GainEntry {
                    rx,
                    tx,
                    carrier,
                    re: g.re,
                    im: g.im,
                })
                .collect(),
        }),
        ..topology_to_file(instance.topology())
    }
}
