//! DOT and JSON renderings of level digraphs.

use std::fmt::Write as _;
use std::str::FromStr;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::digraph::{LevelDigraph, SubsidiaryEdgeData};
use crate::domain::Ball;
use crate::error::{Error, Result};
use crate::padic::{fmt_rational, ExtInt, Prime};

/// Graphviz DOT: one node per ball labeled `"c (t)"`, one edge per vertex.
/// Edges failing the subsidiary test are dashed.
pub fn to_dot(g: &LevelDigraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph G {{");
    let _ = writeln!(out, "  // p = {}, level = {}", g.prime, g.level);
    for (i, v) in g.vertices.iter().enumerate() {
        let _ = writeln!(
            out,
            "  v{i} [label=\"{} ({})\"];",
            fmt_rational(v.key()),
            v.level()
        );
    }
    for (i, &j) in g.edges.iter().enumerate() {
        let dashed = g.subsidiary.as_ref().is_some_and(|d| !d[i].passes);
        let style = if dashed { " [style=dashed]" } else { "" };
        let _ = writeln!(out, "  v{i} -> v{j}{style};");
    }
    out.push_str("}\n");
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexJson {
    pub key: String,
    pub center: String,
    pub rep: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub from: String,
    pub to: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub s: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub passes: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bounds: Option<[String; 4]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigraphJson {
    pub prime: u32,
    pub level: i64,
    pub vertices: Vec<VertexJson>,
    pub edges: Vec<EdgeJson>,
    pub cycles: Vec<Vec<String>>,
}

impl From<&LevelDigraph> for DigraphJson {
    fn from(g: &LevelDigraph) -> Self {
        let key = |i: usize| fmt_rational(g.vertices[i].key());
        let vertices = (0..g.len())
            .map(|i| VertexJson {
                key: key(i),
                center: key(i),
                rep: key(i),
            })
            .collect();
        let edges = (0..g.len())
            .map(|i| {
                let d = g.subsidiary.as_ref().map(|d| &d[i]);
                EdgeJson {
                    from: key(i),
                    to: key(g.edges[i]),
                    s: d.map(|d| d.s_exponent),
                    passes: d.map(|d| d.passes),
                    bounds: d.map(|d| d.bound_exponents.map(|b| b.to_string())),
                }
            })
            .collect();
        let cycles = g
            .cycles()
            .cycles
            .iter()
            .map(|c| c.iter().map(|&i| key(i)).collect())
            .collect();
        DigraphJson {
            prime: g.prime.get(),
            level: g.level,
            vertices,
            edges,
            cycles,
        }
    }
}

pub fn to_json(g: &LevelDigraph) -> String {
    let mut s = serde_json::to_string_pretty(&DigraphJson::from(g)).expect("plain data serializes");
    s.push('\n');
    s
}

fn bad(message: impl Into<String>) -> Error {
    Error::InvalidDigraph(message.into())
}

/// Reads a digraph back from [`to_json`] output.
pub fn from_json(text: &str) -> Result<LevelDigraph> {
    let doc: DigraphJson = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    let prime = Prime::new(doc.prime as u64)?;
    let parse = |s: &str| -> Result<BigRational> {
        BigRational::from_str(s).map_err(|_| bad(format!("invalid rational {s:?}")))
    };
    let mut vertices = Vec::with_capacity(doc.vertices.len());
    for v in &doc.vertices {
        vertices.push(Ball::new(prime, &parse(&v.key)?, doc.level));
    }
    if vertices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad("vertices must be distinct balls in key order"));
    }
    let index = |s: &str| -> Result<usize> {
        let b = Ball::new(prime, &parse(s)?, doc.level);
        vertices
            .binary_search(&b)
            .map_err(|_| bad(format!("edge endpoint {s} is not a vertex")))
    };
    let mut edges = vec![usize::MAX; vertices.len()];
    let mut data: Vec<Option<SubsidiaryEdgeData>> = vec![None; vertices.len()];
    for e in &doc.edges {
        let i = index(&e.from)?;
        edges[i] = index(&e.to)?;
        if let (Some(s), Some(passes), Some(bounds)) = (e.s, e.passes, &e.bounds) {
            let mut parsed = [ExtInt::PosInf; 4];
            for (slot, b) in parsed.iter_mut().zip(bounds) {
                *slot = ExtInt::from_str(b).map_err(|_| bad(format!("invalid bound {b:?}")))?;
            }
            data[i] = Some(SubsidiaryEdgeData {
                s_exponent: s,
                bound_exponents: parsed,
                passes,
            });
        }
    }
    if edges.contains(&usize::MAX) {
        return Err(bad("every vertex needs exactly one out-edge"));
    }
    let subsidiary = if data.iter().all(Option::is_some) && !data.is_empty() {
        Some(data.into_iter().map(Option::unwrap).collect())
    } else {
        None
    };
    Ok(LevelDigraph {
        prime,
        level: doc.level,
        vertices,
        edges,
        subsidiary,
    })
}
