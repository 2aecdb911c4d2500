//! Channel arguments: `kind:param` shorthand or a TOML channel file.

use std::path::Path;

use lnmc::{Channel, StandardKind};
use serde::{Deserialize, Serialize};

use crate::Failure;

/// On-disk channel description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub name: String,
    pub input_size: usize,
    pub output_size: usize,
    pub rows: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<StandardKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<f64>,
}

impl ChannelFile {
    pub fn to_channel(&self) -> Result<Channel, Failure> {
        let ch = match (self.kind, self.param) {
            (Some(kind), Some(param)) => {
                let ch = Channel::standard(kind, param).map_err(Failure::parse)?;
                if !self.rows.is_empty() && ch.to_rows() != self.rows {
                    return Err(Failure::Parse(format!(
                        "channel '{}': rows differ from the canonical {} channel",
                        self.name,
                        kind.name()
                    )));
                }
                ch
            }
            (None, None) => Channel::new(&self.rows).map_err(Failure::parse)?,
            _ => return Err(Failure::Parse(format!("channel '{}': kind and param go together", self.name))),
        };
        if self.rows.len() != self.input_size {
            return Err(Failure::Parse(format!(
                "channel '{}': input_size {} but {} rows",
                self.name,
                self.input_size,
                self.rows.len()
            )));
        }
        if self.rows.iter().any(|r| r.len() != self.output_size) {
            return Err(Failure::Parse(format!("channel '{}': rows must have output_size entries", self.name)));
        }
        Ok(ch)
    }
}

/// Parses `bsc:p`, `bec:p`, `z:e`, `id:n`, or a path to a TOML channel file.
pub fn parse_channel(arg: &str) -> Result<Channel, Failure> {
    if let Some((kind, param)) = arg.split_once(':') {
        let kind = kind.to_ascii_lowercase();
        if kind == "id" || kind == "identity" {
            let n: usize = param.parse().map_err(|_| Failure::Parse(format!("bad alphabet size in '{arg}'")))?;
            if n == 0 {
                return Err(Failure::Parse(format!("empty alphabet in '{arg}'")));
            }
            return Ok(Channel::identity(n));
        }
        let value: f64 = param.parse().map_err(|_| Failure::Parse(format!("bad parameter in '{arg}'")))?;
        let kind = match kind.as_str() {
            "bsc" => StandardKind::Bsc,
            "bec" => StandardKind::Bec,
            "z" => StandardKind::Zchannel,
            _ => return Err(Failure::Parse(format!("unknown channel kind in '{arg}'"))),
        };
        return Channel::standard(kind, value).map_err(Failure::parse);
    }
    let path = Path::new(arg);
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Parse(format!("cannot read '{arg}': {e}")))?;
    let file: ChannelFile = toml::from_str(&text).map_err(|e| Failure::Parse(format!("{arg}: {e}")))?;
    file.to_channel()
}
