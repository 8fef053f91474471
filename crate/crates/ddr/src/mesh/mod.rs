//! Polytopal meshes with cells of every dimension, rational frames, relative
//! orientations and simplicial submeshes.

mod families;
mod json;

pub use families::{build_family, polygonal, simplicial, Family, FamilySpec, SubmeshPolicy};
pub use json::{load_json, mesh_from_json, mesh_to_json, save_json};

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::exterior::form::{det, Form};
use crate::exterior::quadrature::simplex_volume_factor;
use crate::scalar::{rat_to_f64, rint, Rat, Scalar};
use crate::{Error, Result};

/// A cell of dimension `dim` with its frame and submesh.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub dim: usize,
    pub id: usize,
    /// Sorted vertex ids.
    pub verts: Vec<usize>,
    /// Boundary `(dim-1)`-cells with their relative orientations.
    pub boundary: Vec<(usize, i32)>,
    /// Oriented, pairwise orthogonal frame vectors (not normalized).
    pub frame: Vec<Vec<Rat>>,
    /// Squared lengths of the frame vectors.
    pub metric: Vec<Rat>,
    /// Base point `x_f`.
    pub center: Vec<Rat>,
    /// Diameter.
    pub h: f64,
    /// Top simplices of the submesh as sorted point ids.
    pub submesh: Vec<Vec<usize>>,
    /// `+1`, or `-1` when the first frame vector was flipped.
    pub orientation: i32,
    pub on_boundary: bool,
}

impl Cell {
    /// Frame coordinates `s_i = v_i . (x - x_f) / |v_i|^2`.
    pub fn local_coords(&self, x: &[Rat]) -> Vec<Rat> {
        let dx = sub(x, &self.center);
        self.frame.iter().zip(&self.metric).map(|(v, g)| dot(v, &dx) / g).collect()
    }

    /// Frame components of an ambient direction.
    pub fn local_direction(&self, v: &[Rat]) -> Vec<Rat> {
        self.frame.iter().zip(&self.metric).map(|(u, g)| dot(u, v) / g).collect()
    }

    /// Ambient point with the given frame coordinates.
    pub fn ambient(&self, s: &[f64]) -> Vec<f64> {
        let mut x: Vec<f64> = self.center.iter().map(rat_to_f64).collect();
        for (v, si) in self.frame.iter().zip(s) {
            for (xj, vj) in x.iter_mut().zip(v) {
                *xj += si * rat_to_f64(vj);
            }
        }
        x
    }

    /// `sqrt(prod g)`: ratio between true and scaled Hodge quantities.
    pub fn volume_factor(&self) -> f64 {
        self.metric.iter().map(rat_to_f64).product::<f64>().sqrt()
    }

    pub fn metric_as<S: Scalar>(&self) -> Vec<S> {
        self.metric.iter().map(S::from_rat).collect()
    }
}

/// Lower bounds of the two regularity ratios.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Regularity {
    /// `min r_F / h_F` over submesh simplices.
    pub inradius_ratio: f64,
    /// `min h_F / h_f` over submesh simplices of each cell.
    pub diameter_ratio: f64,
    pub h: f64,
}

/// Description of a cell before frames and orientations are computed.
#[derive(Clone, Debug)]
pub struct RawCell {
    pub boundary: Vec<usize>,
    pub submesh: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub n: usize,
    /// Mesh vertices followed by auxiliary submesh points.
    pub points: Vec<Vec<Rat>>,
    pub nverts: usize,
    pub cells: Vec<Vec<Cell>>,
    closure: Vec<Vec<Vec<Vec<usize>>>>,
}

pub(crate) fn sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).fold(rint(0), |acc, (x, y)| acc + x * y)
}

fn norm_f64(v: &[Rat]) -> f64 {
    rat_to_f64(&dot(v, v)).sqrt()
}

fn centroid(pts: &[&Vec<Rat>]) -> Vec<Rat> {
    let n = pts[0].len();
    let m = rint(pts.len() as i64);
    (0..n).map(|i| pts.iter().fold(rint(0), |acc, p| acc + &p[i]) / &m).collect()
}

fn diameter(pts: &[&Vec<Rat>]) -> f64 {
    let mut best = rint(0);
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            let d = sub(a, b);
            let v = dot(&d, &d);
            if v > best {
                best = v;
            }
        }
    }
    rat_to_f64(&best).sqrt()
}

/// Orthogonal frame for the affine hull of `pts`, of dimension `dim`.
fn canonical_frame(n: usize, dim: usize, pts: &[&Vec<Rat>]) -> Result<Vec<Vec<Rat>>> {
    if dim == n {
        return Ok((0..n).map(|i| (0..n).map(|j| rint((i == j) as i64)).collect()).collect());
    }
    let mut frame: Vec<Vec<Rat>> = Vec::new();
    for p in &pts[1..] {
        let mut w = sub(p, pts[0]);
        for u in &frame {
            let c = dot(&w, u) / dot(u, u);
            w = w.iter().zip(u).map(|(a, b)| a - &c * b).collect();
        }
        if w.iter().any(|x| *x != rint(0)) {
            frame.push(w);
        }
        if frame.len() == dim {
            break;
        }
    }
    if frame.len() != dim {
        return Err(Error::Mesh(format!("cell of dimension {dim} has a degenerate vertex set")));
    }
    Ok(frame)
}

/// Scales each vector by the power of two closest to `h / |v|`.
fn scale_frame(frame: &mut [Vec<Rat>], h: f64) {
    for v in frame.iter_mut() {
        let m = ((h / norm_f64(v)).log2() + 0.5).floor() as i32;
        let s = if m >= 0 { rint(1i64 << m) } else { Rat::new(1.into(), (1i64 << (-m)).into()) };
        for x in v.iter_mut() {
            *x = &*x * &s;
        }
    }
}

impl Mesh {
    /// Builds a mesh from raw cells; frames, centers, diameters and relative
    /// orientations are derived from the geometry.
    pub fn assemble(n: usize, points: Vec<Vec<Rat>>, nverts: usize, raw: Vec<Vec<RawCell>>) -> Result<Mesh> {
        Self::assemble_oriented(n, points, nverts, raw, None)
    }

    pub(crate) fn assemble_oriented(
        n: usize,
        points: Vec<Vec<Rat>>,
        nverts: usize,
        raw: Vec<Vec<RawCell>>,
        orientation: Option<Vec<Vec<i32>>>,
    ) -> Result<Mesh> {
        if raw.len() != n + 1 {
            return Err(Error::Mesh(format!("expected cells of dimensions 0..={n}")));
        }
        if raw[0].len() != nverts {
            return Err(Error::Mesh("0-cells must match the mesh vertices".into()));
        }
        if points.iter().any(|p| p.len() != n) {
            return Err(Error::Mesh("point of wrong dimension".into()));
        }
        let mut closure: Vec<Vec<Vec<Vec<usize>>>> = Vec::with_capacity(n + 1);
        for (d, cells) in raw.iter().enumerate() {
            let mut cl_d = Vec::with_capacity(cells.len());
            for (i, c) in cells.iter().enumerate() {
                let mut levels: Vec<Vec<usize>> = vec![Vec::new(); d + 1];
                levels[d] = vec![i];
                if d > 0 {
                    for &b in &c.boundary {
                        if b >= raw[d - 1].len() {
                            return Err(Error::Mesh(format!("cell ({d}, {i}) references missing boundary cell {b}")));
                        }
                        for (dd, ids) in closure[d - 1][b].iter().enumerate() {
                            levels[dd].extend(ids);
                        }
                    }
                    for l in levels.iter_mut().take(d) {
                        l.sort_unstable();
                        l.dedup();
                    }
                    if c.boundary.len() < d + 1 {
                        return Err(Error::Mesh(format!("cell ({d}, {i}) has too few boundary cells")));
                    }
                }
                cl_d.push(levels);
            }
            closure.push(cl_d);
        }
        let mut cells: Vec<Vec<Cell>> = Vec::with_capacity(n + 1);
        for (d, raws) in raw.iter().enumerate() {
            let mut out = Vec::with_capacity(raws.len());
            for (i, rc) in raws.iter().enumerate() {
                let verts = if d == 0 { vec![i] } else { closure[d][i][0].clone() };
                let vp: Vec<&Vec<Rat>> = verts.iter().map(|&v| &points[v]).collect();
                let center = centroid(&vp);
                let h = diameter(&vp);
                let mut frame = canonical_frame(n, d, &vp)?;
                scale_frame(&mut frame, h);
                let o = orientation.as_ref().map(|o| o[d][i]).unwrap_or(1);
                if o != 1 && o != -1 {
                    return Err(Error::Mesh(format!("orientation of cell ({d}, {i}) must be +1 or -1")));
                }
                if o < 0 {
                    for x in frame[0].iter_mut() {
                        *x = -x.clone();
                    }
                }
                let metric = frame.iter().map(|v| dot(v, v)).collect();
                let mut submesh: Vec<Vec<usize>> = rc
                    .submesh
                    .iter()
                    .map(|s| {
                        let mut s = s.clone();
                        s.sort_unstable();
                        s
                    })
                    .collect();
                if d == 0 {
                    submesh = vec![vec![i]];
                }
                for s in &submesh {
                    if s.len() != d + 1 || s.iter().any(|&p| p >= points.len()) {
                        return Err(Error::Mesh(format!("cell ({d}, {i}) has an invalid submesh simplex {s:?}")));
                    }
                }
                out.push(Cell {
                    dim: d,
                    id: i,
                    verts,
                    boundary: rc.boundary.iter().map(|&b| (b, 0)).collect(),
                    frame,
                    metric,
                    center,
                    h,
                    submesh,
                    orientation: o,
                    on_boundary: false,
                });
            }
            cells.push(out);
        }
        let mut mesh = Mesh { n, points, nverts, cells, closure };
        for d in 1..=n {
            for i in 0..mesh.cells[d].len() {
                let signs: Vec<(usize, i32)> = mesh.cells[d][i]
                    .boundary
                    .iter()
                    .map(|&(b, _)| mesh.geometric_orientation(d, i, b).map(|s| (b, s)))
                    .collect::<Result<_>>()?;
                mesh.cells[d][i].boundary = signs;
            }
        }
        mesh.mark_boundary();
        mesh.validate()?;
        Ok(mesh)
    }

    fn mark_boundary(&mut self) {
        let n = self.n;
        if n == 0 {
            return;
        }
        let mut count = vec![0usize; self.cells[n - 1].len()];
        for c in &self.cells[n] {
            for &(b, _) in &c.boundary {
                count[b] += 1;
            }
        }
        for (b, &c) in count.iter().enumerate() {
            if c == 1 {
                for d in 0..n {
                    for &j in &self.closure[n - 1][b][d].clone() {
                        self.cells[d][j].on_boundary = true;
                    }
                }
            }
        }
    }

    /// Sign of the orientation induced on `(d-1, j)` by `(d, i)` relative to
    /// the intrinsic orientation of `(d-1, j)`: outward direction first.
    fn geometric_orientation(&self, d: usize, i: usize, j: usize) -> Result<i32> {
        let f = &self.cells[d][i];
        let fp = &self.cells[d - 1][j];
        let mut cols: Vec<Vec<Rat>> = vec![f.local_coords(&fp.center)];
        for v in &fp.frame {
            cols.push(f.local_direction(v));
        }
        // rows: coordinates; columns: outward vector then face frame
        let m: Vec<Vec<Rat>> = (0..d).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect();
        let v = det(&m);
        if v == rint(0) {
            return Err(Error::Mesh(format!("cell ({d}, {i}) is not star-shaped with respect to its base point")));
        }
        Ok(if v > rint(0) { 1 } else { -1 })
    }

    pub fn cell(&self, d: usize, i: usize) -> &Cell {
        &self.cells[d][i]
    }

    pub fn num_cells(&self, d: usize) -> usize {
        self.cells[d].len()
    }

    /// Ids of the `dd`-cells in the closure of `(d, i)`.
    pub fn closure(&self, d: usize, i: usize, dd: usize) -> &[usize] {
        &self.closure[d][i][dd]
    }

    /// Mesh diameter `max h_f` over top cells.
    pub fn h(&self) -> f64 {
        self.cells[self.n].iter().map(|c| c.h).fold(0.0, f64::max)
    }

    /// Relative orientation of `(d-1, j)` in the boundary of `(d, i)`.
    pub fn relative_orientation(&self, d: usize, i: usize, j: usize) -> Result<i32> {
        self.cells[d][i]
            .boundary
            .iter()
            .find(|(b, _)| *b == j)
            .map(|(_, s)| *s)
            .ok_or_else(|| Error::Mesh(format!("cell ({}, {j}) is not on the boundary of ({d}, {i})", d - 1)))
    }

    pub fn simplicial_submesh(&self, d: usize, i: usize) -> &[Vec<usize>] {
        &self.cells[d][i].submesh
    }

    /// Affine map `s = a + m t` from the frame coordinates `t` of `(dd, j)` to
    /// those of `(d, i)`.
    pub fn sub_map<S: Scalar>(&self, d: usize, i: usize, dd: usize, j: usize) -> (Vec<S>, Vec<Vec<S>>) {
        let f = &self.cells[d][i];
        let g = &self.cells[dd][j];
        let a = f.local_coords(&g.center).iter().map(S::from_rat).collect();
        let cols: Vec<Vec<Rat>> = g.frame.iter().map(|v| f.local_direction(v)).collect();
        let m = (0..d).map(|r| (0..dd).map(|c| S::from_rat(&cols[c][r])).collect()).collect();
        (a, m)
    }

    /// Trace of a form on `(d, i)` onto the subcell `(dd, j)`.
    pub fn trace<S: Scalar>(&self, d: usize, i: usize, dd: usize, j: usize, w: &Form<S>) -> Form<S> {
        if d == dd {
            debug_assert_eq!(i, j);
            return w.clone();
        }
        let (a, m) = self.sub_map::<S>(d, i, dd, j);
        w.pullback(&a, &m, dd)
    }

    /// Point coordinates in the frame of `(d, i)`.
    pub fn local_point<S: Scalar>(&self, d: usize, i: usize, p: usize) -> Vec<S> {
        self.cells[d][i].local_coords(&self.points[p]).iter().map(S::from_rat).collect()
    }

    /// Submesh simplices of `(d, i)` in local coordinates, with the sign of
    /// their vertex order relative to the cell orientation.
    pub fn local_simplices<S: Scalar>(&self, d: usize, i: usize) -> Vec<(Vec<Vec<S>>, i32)> {
        self.cells[d][i]
            .submesh
            .iter()
            .map(|s| {
                let verts: Vec<Vec<Rat>> = s.iter().map(|&p| self.cells[d][i].local_coords(&self.points[p])).collect();
                let m: Vec<Vec<Rat>> = (0..d).map(|r| (0..d).map(|c| &verts[c + 1][r] - &verts[0][r]).collect()).collect();
                let sign = if det(&m) > rint(0) { 1 } else { -1 };
                (verts.iter().map(|v| v.iter().map(S::from_rat).collect()).collect(), sign)
            })
            .collect()
    }

    /// Integral of a top-degree form over `(d, i)` with the cell orientation.
    pub fn integrate<S: Scalar>(&self, d: usize, i: usize, w: &Form<S>) -> S {
        let mut acc = S::zero();
        for (verts, sign) in self.local_simplices::<S>(d, i) {
            let v = w.integrate_simplex(&verts);
            acc = if sign > 0 { acc + v } else { acc - v };
        }
        acc
    }

    /// Volume of `(d, i)` summed over its submesh.
    pub fn volume(&self, d: usize, i: usize) -> f64 {
        self.cells[d][i].submesh.iter().map(|s| self.simplex_volume(s)).sum()
    }

    pub fn simplex_volume(&self, s: &[usize]) -> f64 {
        if s.len() == 1 {
            return 1.0;
        }
        let verts: Vec<Vec<f64>> = s.iter().map(|&p| self.points[p].iter().map(rat_to_f64).collect()).collect();
        let d = s.len() - 1;
        simplex_volume_factor(&verts) / (1..=d).product::<usize>() as f64
    }

    fn simplex_diameter(&self, s: &[usize]) -> f64 {
        let vp: Vec<&Vec<Rat>> = s.iter().map(|&p| &self.points[p]).collect();
        diameter(&vp)
    }

    fn simplex_inradius(&self, s: &[usize]) -> f64 {
        let d = s.len() - 1;
        if d == 1 {
            return self.simplex_volume(s) / 2.0;
        }
        let faces: f64 = (0..=d)
            .map(|o| {
                let f: Vec<usize> = s.iter().enumerate().filter(|(j, _)| *j != o).map(|(_, &p)| p).collect();
                self.simplex_volume(&f)
            })
            .sum();
        d as f64 * self.simplex_volume(s) / faces
    }

    /// The two regularity ratios over every cell of dimension at least one.
    pub fn regularity_report(&self) -> Regularity {
        let mut inr = f64::INFINITY;
        let mut dia = f64::INFINITY;
        for d in 1..=self.n {
            for c in &self.cells[d] {
                for s in &c.submesh {
                    let hf = self.simplex_diameter(s);
                    inr = inr.min(self.simplex_inradius(s) / hf);
                    dia = dia.min(hf / c.h);
                }
            }
        }
        Regularity { inradius_ratio: inr, diameter_ratio: dia, h: self.h() }
    }

    /// All submesh simplices of `(d, i)` of every dimension, as sorted point ids.
    pub fn sub_simplices(&self, d: usize, i: usize) -> BTreeSet<Vec<usize>> {
        let mut out = BTreeSet::new();
        for s in &self.cells[d][i].submesh {
            for m in 1u32..(1u32 << s.len()) {
                out.insert(s.iter().enumerate().filter(|(j, _)| m & (1 << j) != 0).map(|(_, &p)| p).collect());
            }
        }
        out
    }

    fn validate(&self) -> Result<()> {
        for d in 2..=self.n {
            for (i, c) in self.cells[d].iter().enumerate() {
                let mut acc: BTreeMap<usize, i32> = BTreeMap::new();
                for &(b, s) in &c.boundary {
                    for &(e, t) in &self.cells[d - 1][b].boundary {
                        *acc.entry(e).or_default() += s * t;
                    }
                }
                if acc.values().any(|v| *v != 0) {
                    return Err(Error::Mesh(format!("boundary of boundary of cell ({d}, {i}) does not vanish")));
                }
            }
        }
        for d in 1..=self.n {
            for (i, c) in self.cells[d].iter().enumerate() {
                // submesh boundary must coincide with the boundary cells' submeshes
                let mut faces: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
                for s in &c.submesh {
                    for o in 0..s.len() {
                        let f: Vec<usize> = s.iter().enumerate().filter(|(j, _)| *j != o).map(|(_, &p)| p).collect();
                        *faces.entry(f).or_default() += 1;
                    }
                }
                if faces.values().any(|&v| v > 2) {
                    return Err(Error::Mesh(format!("submesh of cell ({d}, {i}) is not a manifold")));
                }
                let outer: BTreeSet<Vec<usize>> = faces.into_iter().filter(|(_, v)| *v == 1).map(|(f, _)| f).collect();
                let expected: BTreeSet<Vec<usize>> =
                    c.boundary.iter().flat_map(|&(b, _)| self.cells[d - 1][b].submesh.iter().cloned()).collect();
                if outer != expected {
                    return Err(Error::Mesh(format!("submesh of cell ({d}, {i}) does not match its boundary cells")));
                }
                for s in &c.submesh {
                    if self.simplex_volume(s) <= 0.0 {
                        return Err(Error::Mesh(format!("cell ({d}, {i}) has a degenerate submesh simplex")));
                    }
                    for &p in s {
                        let x = &self.points[p];
                        let back = {
                            let loc = c.local_coords(x);
                            let mut y = c.center.clone();
                            for (v, si) in c.frame.iter().zip(&loc) {
                                for (yj, vj) in y.iter_mut().zip(v) {
                                    *yj = &*yj + si * vj;
                                }
                            }
                            y
                        };
                        if &back != x {
                            return Err(Error::Mesh(format!("submesh point {p} lies outside the hull of cell ({d}, {i})")));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Volume of `(d, i)` from its boundary: `(1/d) sum |f'| dist(x_f, f')`.
    pub fn volume_from_boundary(&self, d: usize, i: usize) -> f64 {
        let f = &self.cells[d][i];
        let mut acc = 0.0;
        for &(b, _) in &f.boundary {
            let fp = &self.cells[d - 1][b];
            let mut cols: Vec<Vec<Rat>> = vec![f.local_coords(&fp.center)];
            for v in &fp.frame {
                cols.push(f.local_direction(v));
            }
            let m: Vec<Vec<Rat>> = (0..d).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect();
            let height = rat_to_f64(&det(&m)).abs() * f.volume_factor() / fp.volume_factor();
            acc += height * self.volume(d - 1, b);
        }
        acc / d as f64
    }

    /// Copy of the mesh with one relative orientation negated (fault injection).
    pub fn with_flipped_sign(&self, d: usize, i: usize, j: usize) -> Mesh {
        let mut m = self.clone();
        for (b, s) in m.cells[d][i].boundary.iter_mut() {
            if *b == j {
                *s = -*s;
            }
        }
        m
    }

    /// Copy of the mesh with the orientation of `(d, i)` reversed; relative
    /// orientations are updated consistently.
    pub fn with_reversed_cell(&self, d: usize, i: usize) -> Mesh {
        let mut m = self.clone();
        let c = &mut m.cells[d][i];
        for x in c.frame[0].iter_mut() {
            *x = -x.clone();
        }
        c.orientation = -c.orientation;
        for s in c.boundary.iter_mut() {
            s.1 = -s.1;
        }
        if d < m.n {
            for p in m.cells[d + 1].iter_mut() {
                for s in p.boundary.iter_mut() {
                    if s.0 == i {
                        s.1 = -s.1;
                    }
                }
            }
        }
        m
    }

    /// Top cells containing `(d, i)` in their closure.
    pub fn cofaces(&self, d: usize, i: usize, dd: usize) -> Vec<usize> {
        (0..self.cells[dd].len()).filter(|&j| self.closure[dd][j][d].binary_search(&i).is_ok()).collect()
    }
}

/// Fan triangulation of a convex polygon given by its vertex cycle, from an
/// added center point with id `center`.
pub fn fan_submesh(cycle: &[usize], center: usize) -> Vec<Vec<usize>> {
    (0..cycle.len()).map(|j| vec![center, cycle[j], cycle[(j + 1) % cycle.len()]]).collect()
}

#[cfg(test)]
mod tests;
