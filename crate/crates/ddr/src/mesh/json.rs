//! JSON mesh files.
//!
//! Layout: `{n, vertices, extra_points, cells: {"d": [{id, boundary: [{id, sign}],
//! frame, x_f, orientation, submesh}]}}`. Rationals are written as `"p/q"`
//! strings; plain JSON numbers are accepted on input and read exactly.

use std::path::Path;

use num_bigint::BigInt;
use serde_json::{json, Map, Value};

use super::{Mesh, RawCell};
use crate::scalar::{rat_from_f64, Rat};
use crate::{Error, Result};

fn rat_str(q: &Rat) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn point_json(p: &[Rat]) -> Value {
    Value::Array(p.iter().map(|x| Value::String(rat_str(x))).collect())
}

pub fn mesh_to_json(mesh: &Mesh) -> Value {
    let mut cells = Map::new();
    for d in 0..=mesh.n {
        let list: Vec<Value> = mesh.cells[d]
            .iter()
            .map(|c| {
                let mut frame = c.frame.clone();
                if c.orientation < 0 {
                    for x in frame[0].iter_mut() {
                        *x = -x.clone();
                    }
                }
                json!({
                    "id": c.id,
                    "boundary": c.boundary.iter().map(|(b, s)| json!({"id": b, "sign": s})).collect::<Vec<_>>(),
                    "frame": frame.iter().map(|v| point_json(v)).collect::<Vec<_>>(),
                    "x_f": point_json(&c.center),
                    "orientation": c.orientation,
                    "submesh": c.submesh,
                })
            })
            .collect();
        cells.insert(d.to_string(), Value::Array(list));
    }
    json!({
        "n": mesh.n,
        "vertices": mesh.points[..mesh.nverts].iter().map(|p| point_json(p)).collect::<Vec<_>>(),
        "extra_points": mesh.points[mesh.nverts..].iter().map(|p| point_json(p)).collect::<Vec<_>>(),
        "cells": Value::Object(cells),
    })
}

pub fn save_json(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(&mesh_to_json(mesh))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

pub fn load_json(path: impl AsRef<Path>) -> Result<Mesh> {
    let text = std::fs::read_to_string(path)?;
    let v: Value = serde_json::from_str(&text)?;
    mesh_from_json(&v)
}

fn schema(path: &str, msg: impl Into<String>) -> Error {
    Error::Schema { path: path.to_string(), msg: msg.into() }
}

fn field<'a>(obj: &'a Value, path: &str, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| schema(&format!("{path}.{key}"), "missing field"))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| schema(path, "expected an array"))
}

fn uint(v: &Value, path: &str) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| schema(path, "expected a non-negative integer"))
}

fn int(v: &Value, path: &str) -> Result<i64> {
    v.as_i64().ok_or_else(|| schema(path, "expected an integer"))
}

fn rational(v: &Value, path: &str) -> Result<Rat> {
    match v {
        Value::String(s) => {
            let parse = |t: &str| t.trim().parse::<BigInt>().map_err(|_| schema(path, format!("bad rational '{s}'")));
            match s.split_once('/') {
                Some((a, b)) => {
                    let den = parse(b)?;
                    if den == BigInt::from(0) {
                        return Err(schema(path, "zero denominator"));
                    }
                    Ok(Rat::new(parse(a)?, den))
                }
                None => Ok(Rat::from_integer(parse(s)?)),
            }
        }
        Value::Number(x) => {
            if let Some(i) = x.as_i64() {
                return Ok(Rat::from_integer(i.into()));
            }
            x.as_f64().and_then(rat_from_f64).ok_or_else(|| schema(path, "non-finite number"))
        }
        _ => Err(schema(path, "expected a number or rational string")),
    }
}

fn point(v: &Value, path: &str, n: usize) -> Result<Vec<Rat>> {
    let a = array(v, path)?;
    if a.len() != n {
        return Err(schema(path, format!("expected {n} coordinates")));
    }
    a.iter().enumerate().map(|(i, x)| rational(x, &format!("{path}[{i}]"))).collect()
}

pub fn mesh_from_json(v: &Value) -> Result<Mesh> {
    let n = uint(field(v, "$", "n")?, "n")?;
    if !(1..=3).contains(&n) {
        return Err(schema("n", "dimension must be 1, 2 or 3"));
    }
    let verts = array(field(v, "$", "vertices")?, "vertices")?;
    let mut points: Vec<Vec<Rat>> =
        verts.iter().enumerate().map(|(i, p)| point(p, &format!("vertices[{i}]"), n)).collect::<Result<_>>()?;
    let nverts = points.len();
    if let Some(extra) = v.get("extra_points") {
        for (i, p) in array(extra, "extra_points")?.iter().enumerate() {
            points.push(point(p, &format!("extra_points[{i}]"), n)?);
        }
    }
    let cells = field(v, "$", "cells")?;
    let mut raw: Vec<Vec<RawCell>> = Vec::with_capacity(n + 1);
    let mut orient: Vec<Vec<i32>> = Vec::with_capacity(n + 1);
    let mut given: Vec<Vec<(Vec<i32>, Option<Vec<Vec<Rat>>>, Option<Vec<Rat>>)>> = Vec::new();
    for d in 0..=n {
        let list = array(field(cells, "cells", &d.to_string())?, &format!("cells[{d}]"))?;
        let mut rc = Vec::with_capacity(list.len());
        let mut od = Vec::with_capacity(list.len());
        let mut gd = Vec::with_capacity(list.len());
        for (i, c) in list.iter().enumerate() {
            let path = format!("cells[{d}][{i}]");
            let id = uint(field(c, &path, "id")?, &format!("{path}.id"))?;
            if id != i {
                return Err(schema(&format!("{path}.id"), format!("expected id {i}")));
            }
            let o = int(field(c, &path, "orientation")?, &format!("{path}.orientation"))?;
            if o != 1 && o != -1 {
                return Err(schema(&format!("{path}.orientation"), "must be +1 or -1"));
            }
            let mut bids = Vec::new();
            let mut signs = Vec::new();
            for (j, b) in array(field(c, &path, "boundary")?, &format!("{path}.boundary"))?.iter().enumerate() {
                let bp = format!("{path}.boundary[{j}]");
                bids.push(uint(field(b, &bp, "id")?, &format!("{bp}.id"))?);
                let s = int(field(b, &bp, "sign")?, &format!("{bp}.sign"))?;
                if s != 1 && s != -1 {
                    return Err(schema(&format!("{bp}.sign"), "must be +1 or -1"));
                }
                signs.push(s as i32);
            }
            let sm = array(field(c, &path, "submesh")?, &format!("{path}.submesh"))?;
            let submesh = sm
                .iter()
                .enumerate()
                .map(|(j, s)| {
                    let sp = format!("{path}.submesh[{j}]");
                    array(s, &sp)?.iter().enumerate().map(|(q, x)| uint(x, &format!("{sp}[{q}]"))).collect()
                })
                .collect::<Result<Vec<Vec<usize>>>>()?;
            let frame = match c.get("frame") {
                Some(f) => Some(
                    array(f, &format!("{path}.frame"))?
                        .iter()
                        .enumerate()
                        .map(|(j, x)| point(x, &format!("{path}.frame[{j}]"), n))
                        .collect::<Result<Vec<_>>>()?,
                ),
                None => None,
            };
            let center = match c.get("x_f") {
                Some(x) => Some(point(x, &format!("{path}.x_f"), n)?),
                None => None,
            };
            rc.push(RawCell { boundary: bids, submesh });
            od.push(o as i32);
            gd.push((signs, frame, center));
        }
        raw.push(rc);
        orient.push(od);
        given.push(gd);
    }
    let mesh = Mesh::assemble_oriented(n, points, nverts, raw, Some(orient))?;
    for d in 0..=n {
        for (i, (signs, frame, center)) in given[d].iter().enumerate() {
            let c = &mesh.cells[d][i];
            let path = format!("cells[{d}][{i}]");
            for (j, ((_, s), t)) in c.boundary.iter().zip(signs).enumerate() {
                if s != t {
                    return Err(schema(&format!("{path}.boundary[{j}].sign"), "does not match the geometry"));
                }
            }
            if let Some(f) = frame {
                let mut expect = c.frame.clone();
                if c.orientation < 0 {
                    for x in expect[0].iter_mut() {
                        *x = -x.clone();
                    }
                }
                if *f != expect {
                    return Err(schema(&format!("{path}.frame"), "does not match the canonical frame of the cell"));
                }
            }
            if let Some(x) = center {
                if *x != c.center {
                    return Err(schema(&format!("{path}.x_f"), "must be the vertex centroid"));
                }
            }
        }
    }
    Ok(mesh)
}
