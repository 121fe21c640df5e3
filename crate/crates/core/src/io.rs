//! Versioned JSON artifacts and CSV dumps.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::folding::{FoldingPattern, Mark};
use crate::geometry::ConvexPolygon;
use crate::henon::CriticalCandidate;
use crate::kneading::{KneadingError, KneadingSequence, KneadingSet};
use crate::manifold::fmt17;
use crate::symbolic::{Symbol, SymbolWord};
use crate::tree::{MarkedTree, PrunedTree};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format_version {0}")]
    UnsupportedVersion(u32),
    #[error("expected a {expected} artifact, found {found}")]
    WrongKind { expected: &'static str, found: &'static str },
    #[error("vertex id {0:?} is not an integer")]
    BadVertex(String),
    #[error(transparent)]
    Kneading(#[from] KneadingError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Lozi,
    Henon,
}

/// Map and parameters an artifact was computed from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Source {
    pub map: MapKind,
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KneadingEntry {
    pub index: i64,
    pub arc_code: SymbolWord,
    pub tail: SymbolWord,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeBody {
    pub levels: Vec<Vec<i64>>,
    /// Keyed by the decimal vertex id; JSON object keys are strings.
    pub children: BTreeMap<String, Vec<i64>>,
    pub marks: Vec<Vec<Mark>>,
    pub signs: Vec<Vec<Symbol>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Payload {
    Kneading { entries: Vec<KneadingEntry> },
    Folding(FoldingPattern),
    Tree(TreeBody),
}

impl Payload {
    fn kind(&self) -> &'static str {
        match self {
            Payload::Kneading { .. } => "kneading",
            Payload::Folding(_) => "folding",
            Payload::Tree(_) => "tree",
        }
    }
}

/// A file on disk: envelope plus one payload.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub format_version: u32,
    #[serde(default)]
    pub heuristic: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<Source>,
    #[serde(flatten)]
    pub payload: Payload,
}

impl Artifact {
    pub fn new(payload: Payload) -> Self {
        Artifact { format_version: FORMAT_VERSION, heuristic: false, source: None, payload }
    }

    pub fn with_source(mut self, source: Source) -> Self {
        self.heuristic = source.map == MapKind::Henon;
        self.source = Some(source);
        self
    }

    pub fn kneading(k: &KneadingSet) -> Self {
        let entries = k
            .iter()
            .map(|(index, s)| KneadingEntry { index, arc_code: s.arc_code.clone(), tail: s.tail.clone() })
            .collect();
        Artifact::new(Payload::Kneading { entries })
    }

    pub fn folding(fp: &FoldingPattern) -> Self {
        Artifact::new(Payload::Folding(fp.clone()))
    }

    pub fn tree(mt: &MarkedTree) -> Self {
        Artifact::new(Payload::Tree(TreeBody {
            levels: mt.tree.levels.clone(),
            children: mt.tree.children.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            marks: mt.marks.clone(),
            signs: mt.signs.clone(),
        }))
    }

    pub fn kind(&self) -> &'static str {
        self.payload.kind()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("artifacts serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        let version = v.get("format_version").and_then(|x| x.as_u64()).unwrap_or(0) as u32;
        if version != FORMAT_VERSION {
            return Err(IoError::UnsupportedVersion(version));
        }
        Ok(serde_json::from_value(v)?)
    }

    pub fn into_kneading(self) -> Result<KneadingSet, IoError> {
        match self.payload {
            Payload::Kneading { entries } => {
                let items = entries
                    .into_iter()
                    .map(|e| Ok((e.index, KneadingSequence::new(e.arc_code, e.tail)?)))
                    .collect::<Result<Vec<_>, KneadingError>>()?;
                Ok(KneadingSet::from_indexed(items)?)
            }
            p => Err(IoError::WrongKind { expected: "kneading", found: p.kind() }),
        }
    }

    pub fn into_folding(self) -> Result<FoldingPattern, IoError> {
        match self.payload {
            Payload::Folding(fp) => Ok(fp),
            p => Err(IoError::WrongKind { expected: "folding", found: p.kind() }),
        }
    }

    pub fn into_tree(self) -> Result<MarkedTree, IoError> {
        match self.payload {
            Payload::Tree(t) => {
                let children = t
                    .children
                    .into_iter()
                    .map(|(k, v)| k.parse::<i64>().map(|k| (k, v)).map_err(|_| IoError::BadVertex(k)))
                    .collect::<Result<_, _>>()?;
                Ok(MarkedTree { tree: PrunedTree { levels: t.levels, children }, marks: t.marks, signs: t.signs })
            }
            p => Err(IoError::WrongKind { expected: "tree", found: p.kind() }),
        }
    }
}

/// Polygons as `polygon,vertex,x,y` rows.
pub fn regions_csv(polys: &[ConvexPolygon]) -> String {
    let mut s = String::from("polygon,vertex,x,y\n");
    for (i, p) in polys.iter().enumerate() {
        for (j, v) in p.vertices.iter().enumerate() {
            let _ = writeln!(s, "{i},{j},{},{}", fmt17(v.x), fmt17(v.y));
        }
    }
    s
}

/// Critical candidates as `index,x,y,arclength,score,heuristic` rows.
pub fn candidates_csv(cands: &[CriticalCandidate]) -> String {
    let mut s = String::from("index,x,y,arclength,score,heuristic\n");
    for c in cands {
        let _ = writeln!(
            s,
            "{},{},{},{},{},true",
            c.index,
            fmt17(c.location.x),
            fmt17(c.location.y),
            fmt17(c.phi),
            fmt17(c.contraction_score)
        );
    }
    s
}
