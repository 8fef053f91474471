//! Built-in refinable mesh families on the unit square and cube.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::{fan_submesh, Mesh, RawCell};
use crate::scalar::{rat, rint, Rat};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Triangular,
    CartesianPolygonal,
    HexagonalDominant,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "triangular" => Ok(Family::Triangular),
            "cartesian-polygonal" => Ok(Family::CartesianPolygonal),
            "hexagonal-dominant" => Ok(Family::HexagonalDominant),
            _ => Err(Error::Config(format!("unknown mesh family '{s}'"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Triangular => "triangular",
            Family::CartesianPolygonal => "cartesian-polygonal",
            Family::HexagonalDominant => "hexagonal-dominant",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FamilySpec {
    pub family: Family,
    pub n: usize,
    pub level: usize,
}

impl FamilySpec {
    pub fn new(family: Family, n: usize, level: usize) -> Self {
        FamilySpec { family, n, level }
    }
}

pub fn build_family(spec: FamilySpec) -> Result<Mesh> {
    if spec.level > 8 {
        return Err(Error::Unsupported(format!("refinement level {} is too large", spec.level)));
    }
    let n_div = 1usize << spec.level;
    match (spec.family, spec.n) {
        (Family::Triangular, 1) => {
            let points = (0..=n_div).map(|i| vec![rat(i as i64, n_div as i64)]).collect();
            let tops = (0..n_div).map(|i| vec![i, i + 1]).collect();
            simplicial(1, points, tops)
        }
        (Family::Triangular, 2) => {
            let (points, id) = grid2(n_div);
            let mut tops = Vec::new();
            for j in 0..n_div {
                for i in 0..n_div {
                    let (v00, v10, v11, v01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                    tops.push(vec![v00, v10, v11]);
                    tops.push(vec![v00, v11, v01]);
                }
            }
            simplicial(2, points, tops)
        }
        (Family::Triangular, 3) => kuhn(n_div),
        (Family::CartesianPolygonal, 2) => {
            let (points, id) = grid2(n_div);
            let mut polys = Vec::new();
            for j in 0..n_div {
                for i in 0..n_div {
                    polys.push((vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)], SubmeshPolicy::Diagonal));
                }
            }
            polygonal(points, polys)
        }
        (Family::HexagonalDominant, 2) => bricks(2 * n_div),
        (f, n) => Err(Error::Unsupported(format!("family {f} in dimension {n}"))),
    }
}

fn grid2(m: usize) -> (Vec<Vec<Rat>>, impl Fn(usize, usize) -> usize) {
    let mut points = Vec::with_capacity((m + 1) * (m + 1));
    for j in 0..=m {
        for i in 0..=m {
            points.push(vec![rat(i as i64, m as i64), rat(j as i64, m as i64)]);
        }
    }
    (points, move |i: usize, j: usize| j * (m + 1) + i)
}

/// Kuhn subdivision of an `m^3` cube grid: six tetrahedra per cube.
fn kuhn(m: usize) -> Result<Mesh> {
    let id = |i: usize, j: usize, k: usize| (k * (m + 1) + j) * (m + 1) + i;
    let mut points = Vec::new();
    for k in 0..=m {
        for j in 0..=m {
            for i in 0..=m {
                points.push(vec![rat(i as i64, m as i64), rat(j as i64, m as i64), rat(k as i64, m as i64)]);
            }
        }
    }
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut tops = Vec::new();
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                for p in &perms {
                    let mut c = [i, j, k];
                    let mut tet = vec![id(c[0], c[1], c[2])];
                    for &axis in p {
                        c[axis] += 1;
                        tet.push(id(c[0], c[1], c[2]));
                    }
                    tops.push(tet);
                }
            }
        }
    }
    simplicial(3, points, tops)
}

/// Mesh whose cells are the simplices of a simplicial complex.
pub fn simplicial(n: usize, points: Vec<Vec<Rat>>, tops: Vec<Vec<usize>>) -> Result<Mesh> {
    let mut by_dim: Vec<BTreeMap<Vec<usize>, usize>> = vec![BTreeMap::new(); n + 1];
    for t in &tops {
        if t.len() != n + 1 {
            return Err(Error::Mesh("top simplex with wrong vertex count".into()));
        }
        let mut t = t.clone();
        t.sort_unstable();
        for mask in 1u32..(1u32 << t.len()) {
            let s: Vec<usize> = t.iter().enumerate().filter(|(j, _)| mask & (1 << j) != 0).map(|(_, &p)| p).collect();
            by_dim[s.len() - 1].insert(s, 0);
        }
    }
    for m in by_dim.iter_mut() {
        for (k, v) in m.values_mut().enumerate() {
            *v = k;
        }
    }
    let nverts = points.len();
    if by_dim[0].len() != nverts {
        return Err(Error::Mesh("every point must be a vertex of some simplex".into()));
    }
    let mut raw: Vec<Vec<RawCell>> = Vec::with_capacity(n + 1);
    for d in 0..=n {
        let mut cells = Vec::with_capacity(by_dim[d].len());
        for s in by_dim[d].keys() {
            let boundary = if d == 0 {
                Vec::new()
            } else {
                (0..=d)
                    .map(|o| {
                        let f: Vec<usize> = s.iter().enumerate().filter(|(j, _)| *j != o).map(|(_, &p)| p).collect();
                        by_dim[d - 1][&f]
                    })
                    .collect()
            };
            cells.push(RawCell { boundary, submesh: vec![s.clone()] });
        }
        raw.push(cells);
    }
    Mesh::assemble(n, points, nverts, raw)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubmeshPolicy {
    /// Fan from the first vertex of the cycle (no added points).
    Diagonal,
    /// Fan from an added point at the vertex centroid.
    Fan,
}

/// Planar mesh from counterclockwise vertex cycles of convex polygons.
pub fn polygonal(mut points: Vec<Vec<Rat>>, polys: Vec<(Vec<usize>, SubmeshPolicy)>) -> Result<Mesh> {
    let nverts = points.len();
    let mut edges: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for (cycle, _) in &polys {
        for j in 0..cycle.len() {
            let mut e = vec![cycle[j], cycle[(j + 1) % cycle.len()]];
            e.sort_unstable();
            edges.insert(e, 0);
        }
    }
    for (k, v) in edges.values_mut().enumerate() {
        *v = k;
    }
    let verts: Vec<RawCell> = (0..nverts).map(|i| RawCell { boundary: Vec::new(), submesh: vec![vec![i]] }).collect();
    let edge_cells: Vec<RawCell> =
        edges.keys().map(|e| RawCell { boundary: e.clone(), submesh: vec![e.clone()] }).collect();
    let mut faces = Vec::with_capacity(polys.len());
    for (cycle, policy) in &polys {
        let boundary = (0..cycle.len())
            .map(|j| {
                let mut e = vec![cycle[j], cycle[(j + 1) % cycle.len()]];
                e.sort_unstable();
                edges[&e]
            })
            .collect();
        let submesh = match policy {
            SubmeshPolicy::Diagonal => (1..cycle.len() - 1).map(|j| vec![cycle[0], cycle[j], cycle[j + 1]]).collect(),
            SubmeshPolicy::Fan => {
                let m = rint(cycle.len() as i64);
                let c = (0..2).map(|a| cycle.iter().fold(rint(0), |acc, &v| acc + &points[v][a]) / &m).collect();
                points.push(c);
                fan_submesh(cycle, points.len() - 1)
            }
        };
        faces.push(RawCell { boundary, submesh });
    }
    Mesh::assemble(2, points, nverts, vec![verts, edge_cells, faces])
}

/// Brick layout with `m` rows (m even): full bricks are hexagons with two
/// vertices in the middle of their long sides; row ends are half bricks.
fn bricks(m: usize) -> Result<Mesh> {
    let (points, id) = grid2(m);
    let mut polys = Vec::new();
    for j in 0..m {
        let mut starts: Vec<usize> = Vec::new();
        let mut x = 0;
        if j % 2 == 1 {
            polys.push((vec![id(0, j), id(1, j), id(1, j + 1), id(0, j + 1)], SubmeshPolicy::Fan));
            x = 1;
        }
        while x + 2 <= m {
            starts.push(x);
            x += 2;
        }
        for &x0 in &starts {
            polys.push((
                vec![id(x0, j), id(x0 + 1, j), id(x0 + 2, j), id(x0 + 2, j + 1), id(x0 + 1, j + 1), id(x0, j + 1)],
                SubmeshPolicy::Fan,
            ));
        }
        if x < m {
            polys.push((vec![id(x, j), id(x + 1, j), id(x + 1, j + 1), id(x, j + 1)], SubmeshPolicy::Fan));
        }
    }
    polygonal(points, polys)
}
