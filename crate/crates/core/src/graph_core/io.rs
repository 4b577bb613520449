use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Value};

use super::{edge_of, AGraph, Dart, Graph, Wedge};
use crate::error::{Error, Result};
use crate::free_group::BasisSpec;

const PALETTE: [&str; 8] = [
    "red", "blue", "green4", "orange", "purple", "brown", "magenta", "cyan4",
];

pub fn wedge_color(j: usize) -> &'static str {
    PALETTE[j % PALETTE.len()]
}

pub fn agraph_to_json(g: &AGraph) -> Value {
    let graph = &g.graph;
    let darts: Vec<Value> = (0..graph.num_darts())
        .map(|d| json!({"id": d, "vertex": graph.tail(d), "reverse": d ^ 1}))
        .collect();
    let wedges: Vec<Value> = g
        .wedges
        .iter()
        .enumerate()
        .map(|(j, w)| json!({"j": j + 1, "base": w.base, "circles": w.circles}))
        .collect();
    json!({
        "n": g.basis.n(),
        "s": g.basis.s(),
        "vertices": (0..graph.num_vertices()).collect::<Vec<_>>(),
        "darts": darts,
        "wedges": wedges,
    })
}

fn perr(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse { location: location.into(), message: message.into() }
}

fn id_of(v: &Value, location: &str) -> Result<String> {
    match v {
        Value::Number(n) => Ok(n.to_string()),
        Value::String(s) => Ok(s.clone()),
        _ => Err(perr(location, "expected a number or string id")),
    }
}

fn array<'a>(v: &'a Value, key: &str, location: &str) -> Result<&'a Vec<Value>> {
    v.get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| perr(format!("{location}{key}"), "missing array"))
}

/// Reads a graph; `n` defaults to the rank and the factor ranks to the
/// circle counts of the wedges, ordered by `j`.
pub fn agraph_from_json(v: &Value) -> Result<AGraph> {
    let vertices = array(v, "vertices", "")?;
    let mut vindex = BTreeMap::new();
    for (i, x) in vertices.iter().enumerate() {
        if vindex.insert(id_of(x, &format!("vertices[{i}]"))?, i).is_some() {
            return Err(perr(format!("vertices[{i}]"), "duplicate vertex id"));
        }
    }
    let darts = array(v, "darts", "")?;
    let mut raw = Vec::new();
    let mut pos = BTreeMap::new();
    for (i, d) in darts.iter().enumerate() {
        let loc = format!("darts[{i}]");
        let id = id_of(d.get("id").unwrap_or(&Value::Null), &format!("{loc}.id"))?;
        let vid = id_of(d.get("vertex").unwrap_or(&Value::Null), &format!("{loc}.vertex"))?;
        let rid = id_of(d.get("reverse").unwrap_or(&Value::Null), &format!("{loc}.reverse"))?;
        let vertex = *vindex
            .get(&vid)
            .ok_or_else(|| perr(format!("{loc}.vertex"), format!("unknown vertex {vid}")))?;
        if pos.insert(id.clone(), i).is_some() {
            return Err(perr(format!("{loc}.id"), "duplicate dart id"));
        }
        raw.push((id, vertex, rid));
    }
    let mut internal: BTreeMap<String, Dart> = BTreeMap::new();
    let mut edges = Vec::new();
    for (i, (id, vertex, rid)) in raw.iter().enumerate() {
        if internal.contains_key(id) {
            continue;
        }
        let loc = format!("darts[{i}].reverse");
        if rid == id {
            return Err(perr(loc, "a dart cannot be its own reverse"));
        }
        let j = *pos.get(rid).ok_or_else(|| perr(&loc, format!("unknown dart {rid}")))?;
        if raw[j].2 != *id {
            return Err(perr(loc, "reverse is not an involution"));
        }
        let e = edges.len();
        edges.push((*vertex, raw[j].1));
        internal.insert(id.clone(), 2 * e);
        internal.insert(rid.clone(), 2 * e + 1);
    }
    let graph = Graph::new(vertices.len(), &edges);
    let mut wedges: Vec<(i64, Wedge)> = Vec::new();
    let empty = Vec::new();
    let wedge_values = match v.get("wedges") {
        None => &empty,
        Some(_) => array(v, "wedges", "")?,
    };
    for (i, w) in wedge_values.iter().enumerate() {
        let loc = format!("wedges[{i}]");
        let j = w
            .get("j")
            .and_then(Value::as_i64)
            .ok_or_else(|| perr(format!("{loc}.j"), "missing integer"))?;
        let bid = id_of(w.get("base").unwrap_or(&Value::Null), &format!("{loc}.base"))?;
        let base = *vindex
            .get(&bid)
            .ok_or_else(|| perr(format!("{loc}.base"), format!("unknown vertex {bid}")))?;
        let mut circles = Vec::new();
        for (c, circ) in array(w, "circles", &format!("{loc}."))?.iter().enumerate() {
            let cl = format!("{loc}.circles[{c}]");
            let ds = circ.as_array().ok_or_else(|| perr(&cl, "expected an array"))?;
            let mut path = Vec::new();
            for (p, d) in ds.iter().enumerate() {
                let id = id_of(d, &format!("{cl}[{p}]"))?;
                path.push(
                    *internal
                        .get(&id)
                        .ok_or_else(|| perr(format!("{cl}[{p}]"), format!("unknown dart {id}")))?,
                );
            }
            circles.push(path);
        }
        wedges.push((j, Wedge { base, circles }));
    }
    wedges.sort_by_key(|(j, _)| *j);
    // factors of rank one go last, as in the basis
    let mut ordered: Vec<Wedge> = Vec::new();
    ordered.extend(wedges.iter().filter(|(_, w)| w.circles.len() > 1).map(|(_, w)| w.clone()));
    ordered.extend(wedges.iter().filter(|(_, w)| w.circles.len() <= 1).map(|(_, w)| w.clone()));
    let s: Vec<usize> = ordered.iter().map(|w| w.circles.len()).collect();
    if let Some(given) = v.get("s") {
        let mut given: Vec<usize> = serde_json::from_value(given.clone())
            .map_err(|e| perr("s", e.to_string()))?;
        let mut have = s.clone();
        given.sort_unstable();
        have.sort_unstable();
        if given != have {
            return Err(perr("s", "factor ranks disagree with the wedge circles"));
        }
    }
    let n = match v.get("n") {
        Some(x) => x.as_u64().ok_or_else(|| perr("n", "expected an integer"))? as usize,
        None => graph.rank()?,
    };
    let basis = BasisSpec::new(n, &s)?;
    Ok(AGraph::new(graph, ordered, basis))
}

/// Graphviz rendering; wedge `j` is drawn in colour `j`, other edges black.
pub fn to_dot(g: &AGraph, name: &str) -> String {
    let graph = &g.graph;
    let mut owner = vec![None; graph.num_edges()];
    for (j, w) in g.wedges.iter().enumerate() {
        for &d in w.circles.iter().flatten() {
            owner[edge_of(d)] = Some(j);
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "graph \"{name}\" {{");
    let _ = writeln!(out, "  node [shape=circle, width=0.25, fontsize=10];");
    for v in 0..graph.num_vertices() {
        let _ = writeln!(out, "  v{v} [label=\"{v}\"];");
    }
    for e in 0..graph.num_edges() {
        let (u, v) = graph.endpoints(e);
        let color = owner[e].map_or("black", wedge_color);
        let _ = writeln!(out, "  v{u} -- v{v} [label=\"e{e}\", color={color}];");
    }
    out.push_str("}\n");
    out
}
