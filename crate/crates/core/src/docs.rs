//! JSON documents for spaces, covers, complexes, maps, set families and
//! subsets.
//!
//! Objects are `serde_json::Map`s, which keep keys sorted, so every emitted
//! document is canonical. Point and vertex identifiers are strings; numeric
//! identifiers are accepted on input and converted with their JSON text.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::{json, Map, Value};

use crate::covers::Cover;
use crate::error::{Error, Result};
use crate::metric_space::{FiniteMetricSpace, PointSet, SpaceFormat};
use crate::property_a::{SetFamily, Tagged};
use crate::pu_maps::PUMap;
use crate::simplicial::{Complex, SimplexPoint, Vertex};

fn malformed(msg: impl Into<String>) -> Error {
    Error::Malformed(msg.into())
}

fn ident(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(malformed(format!("expected an identifier, got {other}"))),
    }
}

fn number(v: &Value, what: &str) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| malformed(format!("{what} is not a real"))),
        Value::String(s) if matches!(s.as_str(), "inf" | "+inf" | "Infinity") => Ok(f64::INFINITY),
        other => Err(malformed(format!("{what}: expected a number, got {other}"))),
    }
}

fn object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| malformed(format!("{what} must be a JSON object")))
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| malformed(format!("{what} must be a JSON array")))
}

fn field<'a>(o: &'a Map<String, Value>, key: &str, what: &str) -> Result<&'a Value> {
    o.get(key).ok_or_else(|| malformed(format!("{what} has no \"{key}\" field")))
}

fn real_rows(v: &Value, what: &str) -> Result<Vec<Vec<f64>>> {
    array(v, what)?
        .iter()
        .map(|row| array(row, what)?.iter().map(|c| number(c, what)).collect())
        .collect()
}

/// Parses a space document `{"format", "ids", "data"}`.
pub fn parse_space(v: &Value) -> Result<FiniteMetricSpace> {
    let o = object(v, "space")?;
    let format = field(o, "format", "space")?
        .as_str()
        .ok_or_else(|| malformed("space format must be a string"))?;
    let ids = array(field(o, "ids", "space")?, "ids")?
        .iter()
        .map(ident)
        .collect::<Result<Vec<_>>>()?;
    let data = field(o, "data", "space")?;
    match format {
        "matrix" => FiniteMetricSpace::from_matrix(ids, real_rows(data, "matrix data")?),
        "euclidean" => FiniteMetricSpace::from_euclidean(ids, real_rows(data, "coordinates")?),
        "graph" => {
            let edges = array(field(object(data, "graph data")?, "edges", "graph data")?, "edges")?
                .iter()
                .map(|e| {
                    let e = array(e, "edge")?;
                    if e.len() != 3 {
                        return Err(malformed("edges are [id, id, weight]"));
                    }
                    Ok((ident(&e[0])?, ident(&e[1])?, number(&e[2], "edge weight")?))
                })
                .collect::<Result<Vec<_>>>()?;
            FiniteMetricSpace::from_graph(ids, edges)
        }
        other => Err(malformed(format!("unknown space format {other}"))),
    }
}

/// Euclidean spaces are written with coordinates; every other space as its
/// distance matrix.
pub fn space_to_json(space: &FiniteMetricSpace) -> Value {
    let n = space.len();
    let (format, data) = match space.format() {
        SpaceFormat::Euclidean => (
            "euclidean",
            Value::from((0..n).map(|i| space.coords(i).unwrap().to_vec()).collect::<Vec<_>>()),
        ),
        _ => (
            "matrix",
            Value::from((0..n).map(|i| (0..n).map(|j| space.dist(i, j)).collect::<Vec<_>>()).collect::<Vec<_>>()),
        ),
    };
    json!({ "format": format, "ids": space.ids(), "data": data })
}

/// How a document refers to its space.
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceRef {
    Path(String),
    Inline(Value),
}

/// The `"space"` field of a cover, map or family document, if any.
pub fn space_ref(v: &Value) -> Option<SpaceRef> {
    match v.get("space")? {
        Value::String(p) => Some(SpaceRef::Path(p.clone())),
        Value::Object(_) => Some(SpaceRef::Inline(v["space"].clone())),
        _ => None,
    }
}

fn point_list(space: &FiniteMetricSpace, v: &Value, what: &str) -> Result<Vec<usize>> {
    array(v, what)?.iter().map(|p| space.index_of(&ident(p)?)).collect()
}

/// Parses `{"elements": {"label": [ids]}}`. Elements are ordered by label.
pub fn parse_cover(v: &Value, space: &Arc<FiniteMetricSpace>) -> Result<Cover> {
    let o = object(v, "cover")?;
    let elements = object(field(o, "elements", "cover")?, "elements")?
        .iter()
        .map(|(label, members)| Ok((label.clone(), point_list(space, members, "cover element")?)))
        .collect::<Result<Vec<_>>>()?;
    let label = o.get("label").and_then(Value::as_str).unwrap_or("cover");
    Cover::new(space.clone(), label, elements)
}

pub fn cover_to_json(cover: &Cover) -> Value {
    let space = cover.space();
    let elements: Map<String, Value> = (0..cover.len())
        .map(|s| {
            let ids: Vec<&str> = cover.element(s).iter().map(|&x| space.id(x)).collect();
            (cover.labels()[s].clone(), Value::from(ids))
        })
        .collect();
    json!({ "label": cover.label(), "elements": elements })
}

/// `{"vertices": [...], "maximal_simplices": [[...]]}`; without
/// `maximal_simplices` the complex is the full simplex.
pub fn parse_complex(v: &Value) -> Result<Complex> {
    let o = object(v, "complex")?;
    let labels = array(field(o, "vertices", "complex")?, "vertices")?
        .iter()
        .map(ident)
        .collect::<Result<Vec<_>>>()?;
    let Some(ms) = o.get("maximal_simplices") else {
        return Ok(Complex::full(labels));
    };
    let index: BTreeMap<&str, Vertex> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i as Vertex)).collect();
    let simplices = array(ms, "maximal_simplices")?
        .iter()
        .map(|s| {
            array(s, "simplex")?
                .iter()
                .map(|l| {
                    let l = ident(l)?;
                    index.get(l.as_str()).copied().ok_or_else(|| malformed(format!("unknown vertex {l}")))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Complex::from_simplices(labels, simplices)
}

pub fn complex_to_json(k: &Complex) -> Value {
    if k.is_full() {
        return json!({ "vertices": k.labels() });
    }
    let ms: Vec<Vec<&str>> = k
        .maximal_simplices()
        .iter()
        .map(|s| s.iter().map(|&v| k.label(v)).collect())
        .collect();
    json!({ "vertices": k.labels(), "maximal_simplices": ms })
}

fn weight_object(v: &Value) -> Result<&Map<String, Value>> {
    let o = object(v, "simplex point")?;
    match o.get("weights") {
        Some(Value::Object(w)) if o.len() == 1 => Ok(w),
        _ => Ok(o),
    }
}

/// Parses `{"weights": {"v": w}}` against a vertex labelling.
pub fn parse_simplex_point(v: &Value, complex: &Complex) -> Result<SimplexPoint> {
    let w = weight_object(v)?
        .iter()
        .map(|(label, x)| {
            let vert = complex.vertex_of(label).ok_or_else(|| malformed(format!("unknown vertex {label}")))?;
            Ok((vert, number(x, "weight")?))
        })
        .collect::<Result<Vec<_>>>()?;
    SimplexPoint::new(w)
}

pub fn simplex_point_to_json(p: &SimplexPoint, complex: &Complex) -> Value {
    let w: Map<String, Value> = p
        .weights()
        .iter()
        .map(|&(v, x)| (complex.label(v).to_string(), Value::from(x)))
        .collect();
    json!({ "weights": w })
}

/// Parses `{"complex", "values": {"pid": {"v": w}}}`. Points missing from
/// `values` are outside the domain. Without a complex the target is the
/// full simplex on the sorted labels that occur.
pub fn parse_pu_map(v: &Value, space: &Arc<FiniteMetricSpace>) -> Result<PUMap> {
    let o = object(v, "map")?;
    let values = object(field(o, "values", "map")?, "values")?;
    let complex = match o.get("complex") {
        Some(c) => parse_complex(c)?,
        None => {
            let mut labels = std::collections::BTreeSet::new();
            for w in values.values() {
                labels.extend(weight_object(w)?.keys().cloned());
            }
            Complex::full(labels.into_iter().collect())
        }
    };
    let mut out = vec![None; space.len()];
    for (pid, w) in values {
        let x = space.index_of(pid)?;
        out[x] = Some(parse_simplex_point(w, &complex)?);
    }
    PUMap::new(space.clone(), Arc::new(complex), out)
}

pub fn pu_map_to_json(f: &PUMap) -> Value {
    let k = f.target();
    let space = f.space();
    let values: Map<String, Value> = f
        .domain()
        .iter()
        .map(|&x| {
            let w: Map<String, Value> = f
                .value(x)
                .unwrap()
                .weights()
                .iter()
                .map(|&(v, a)| (k.label(v).to_string(), Value::from(a)))
                .collect();
            (space.id(x).to_string(), Value::Object(w))
        })
        .collect();
    json!({ "complex": complex_to_json(k), "values": values })
}

/// Parses `{"S": s, "sets": {"x": [["y", i], ...]}}`.
pub fn parse_set_family(v: &Value, space: &Arc<FiniteMetricSpace>) -> Result<SetFamily> {
    let o = object(v, "set family")?;
    let s = number(field(o, "S", "set family")?, "S")?;
    let sets_obj = object(field(o, "sets", "set family")?, "sets")?;
    let mut sets: Vec<Tagged> = vec![Vec::new(); space.len()];
    for (x, entries) in sets_obj {
        let xi = space.index_of(x)?;
        for e in array(entries, "set")? {
            let e = array(e, "set entry")?;
            if e.len() != 2 {
                return Err(malformed("set entries are [id, tag]"));
            }
            let y = ident(&e[0])?;
            let yi = space.index_of(&y).map_err(|_| Error::ForeignPoint(y.clone()))?;
            let tag = e[1].as_u64().filter(|&t| t >= 1 && t <= u32::MAX as u64).ok_or_else(|| {
                malformed(format!("tag of ({y}, ..) in A_{x} must be a positive integer"))
            })?;
            sets[xi].push((yi, tag as u32));
        }
    }
    SetFamily::new(space.clone(), s, sets)
}

pub fn set_family_to_json(f: &SetFamily) -> Value {
    let space = f.space();
    let sets: Map<String, Value> = (0..space.len())
        .map(|x| {
            let entries: Vec<Value> = f.set(x).iter().map(|&(y, i)| json!([space.id(y), i])).collect();
            (space.id(x).to_string(), Value::from(entries))
        })
        .collect();
    json!({ "S": f.s_radius(), "sets": sets })
}

/// `{"members": [...]}` or a bare list of identifiers.
pub fn parse_subset(v: &Value, space: &FiniteMetricSpace) -> Result<PointSet> {
    let list = match v {
        Value::Array(_) => v,
        Value::Object(o) => field(o, "members", "subset")?,
        _ => return Err(malformed("subset must be a list or {\"members\": [...]}")),
    };
    let ids = array(list, "members")?.iter().map(ident).collect::<Result<Vec<_>>>()?;
    space.subset(ids.iter().map(String::as_str))
}

pub fn subset_to_json(set: &PointSet, space: &FiniteMetricSpace) -> Value {
    json!({ "members": set.iter().map(|x| space.id(x)).collect::<Vec<_>>() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn space_formats() {
        let m = parse_space(&json!({"format":"matrix","ids":["a","b"],"data":[[0,1],[1,0]]})).unwrap();
        assert_eq!(m.dist(0, 1), 1.0);
        let g = parse_space(&json!({"format":"graph","ids":[1,2,3],"data":{"edges":[[1,2,1.5],[2,3,1]]}})).unwrap();
        assert_eq!(g.dist(0, 2), 2.5);
        assert_eq!(g.id(0), "1");
        let e = parse_space(&json!({"format":"euclidean","ids":["p","q"],"data":[[0,0],[3,4]]})).unwrap();
        assert_eq!(e.dist(0, 1), 5.0);
        assert_eq!(parse_space(&space_to_json(&e)).unwrap().dist(0, 1), 5.0);
        assert_eq!(parse_space(&json!({"format":"torus"})).unwrap_err().code(), "MALFORMED");
    }

    #[test]
    fn map_round_trip_and_default_complex() {
        let x = Arc::new(parse_space(&json!({"format":"euclidean","ids":["a","b"],"data":[[0],[1]]})).unwrap());
        let doc = json!({"values": {"a": {"v": 1.0}, "b": {"weights": {"u": 0.5, "v": 0.5}}}});
        let f = parse_pu_map(&doc, &x).unwrap();
        assert_eq!(f.target().labels(), &["u".to_string(), "v".to_string()]);
        let again = parse_pu_map(&pu_map_to_json(&f), &x).unwrap();
        assert_eq!(again.values(), f.values());
        let partial = parse_pu_map(&json!({"values": {"a": {"v": 1.0}}}), &x).unwrap();
        assert_eq!(partial.domain(), &[0]);
    }

    #[test]
    fn subsets_and_families() {
        let x = Arc::new(parse_space(&json!({"format":"euclidean","ids":["a","b","c"],"data":[[0],[1],[2]]})).unwrap());
        assert_eq!(parse_subset(&json!(["c", "a"]), &x).unwrap().members(), &[0, 2]);
        assert_eq!(parse_subset(&json!({"members": ["b"]}), &x).unwrap().members(), &[1]);
        let fam = parse_set_family(&json!({"S": 1.5, "sets": {"a": [["a",1],["b",1]], "b": [["b",2]], "c": [["c",1]]}}), &x)
            .unwrap();
        assert_eq!(fam.set(0), &vec![(0, 1), (1, 1)]);
        let bad = json!({"S": 1.5, "sets": {"a": [["z",1]], "b": [["b",1]], "c": [["c",1]]}});
        assert_eq!(parse_set_family(&bad, &x).unwrap_err().code(), "FOREIGN_POINT");
    }
}
