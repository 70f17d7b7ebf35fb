//! Splicing measured values from earlier reports into bound inputs.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde_json::Value;

use super::{read_file, CliError};
use crate::bound::BoundInputs;

/// `[K=]report.json#dot.separated.path`. Numeric segments index into arrays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldRef {
    pub layer: Option<usize>,
    pub path: PathBuf,
    pub pointer: Vec<String>,
}

impl FromStr for FieldRef {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (layer, rest) = match s.split_once('=') {
            Some((k, rest)) if !k.is_empty() && k.bytes().all(|b| b.is_ascii_digit()) => {
                (Some(k.parse::<usize>().map_err(|e| e.to_string())?), rest)
            }
            _ => (None, s),
        };
        let (path, pointer) = rest
            .rsplit_once('#')
            .ok_or_else(|| format!("expected [K=]FILE#field.path, got {s:?}"))?;
        if path.is_empty() || pointer.is_empty() {
            return Err(format!("expected [K=]FILE#field.path, got {s:?}"));
        }
        let pointer: Vec<String> = pointer.split('.').map(str::to_owned).collect();
        if pointer.iter().any(String::is_empty) {
            return Err(format!("empty segment in field path {s:?}"));
        }
        Ok(Self {
            layer,
            path: PathBuf::from(path),
            pointer,
        })
    }
}

impl fmt::Display for FieldRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(k) = self.layer {
            write!(f, "{k}=")?;
        }
        write!(f, "{}#{}", self.path.display(), self.pointer.join("."))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpliceTarget {
    Dimension,
    Diameter,
    TailLipschitz,
}

impl SpliceTarget {
    pub fn key(self) -> &'static str {
        match self {
            SpliceTarget::Dimension => "d",
            SpliceTarget::Diameter => "Ddiam",
            SpliceTarget::TailLipschitz => "L_F",
        }
    }
}

pub(crate) fn lookup<'a>(root: &'a Value, pointer: &[String]) -> Option<&'a Value> {
    pointer.iter().try_fold(root, |v, seg| match v {
        Value::Object(map) => map.get(seg),
        Value::Array(items) => seg.parse::<usize>().ok().and_then(|i| items.get(i)),
        _ => None,
    })
}

pub(crate) fn apply(inputs: &mut BoundInputs, target: SpliceTarget, r: &FieldRef) -> Result<(), CliError> {
    let layers = inputs.layers.len();
    let k = match r.layer {
        Some(k) if k < layers => k,
        Some(k) => {
            return Err(CliError::Config(format!(
                "{r}: layer {k} out of range for {layers} layers"
            )))
        }
        None if layers == 1 => 0,
        None => {
            return Err(CliError::Config(format!(
                "{r}: a layer index is required when there are {layers} layers"
            )))
        }
    };
    let bytes = read_file(&r.path)?;
    let doc: Value =
        serde_json::from_slice(&bytes).map_err(|e| CliError::Config(format!("{}: {e}", r.path.display())))?;
    let value = lookup(&doc, &r.pointer)
        .ok_or_else(|| CliError::Config(format!("{r}: no such field")))?
        .as_f64()
        .ok_or_else(|| CliError::Config(format!("{r}: field is not a number")))?;
    let layer = &mut inputs.layers[k];
    match target {
        SpliceTarget::Dimension => layer.d = value,
        SpliceTarget::Diameter => layer.diameter = value,
        SpliceTarget::TailLipschitz => layer.l_f = value,
    }
    layer.provenance.insert(
        target.key().to_string(),
        format!("measured:{}#{}", r.path.display(), r.pointer.join(".")),
    );
    Ok(())
}
