//! Quadrature of smooth and polynomial forms on top cells, in frame coordinates.

use crate::exterior::form::{indices, merge_sign, minor_det, subsets, Form};
use crate::exterior::quadrature::{simplex_rule, simplex_volume_factor};
use crate::exterior::SmoothForm;
use crate::mesh::Mesh;
use crate::scalar::rat_to_f64;

/// Quadrature nodes of a top cell with the data needed to pull ambient forms back.
#[derive(Clone, Debug)]
pub struct TopQuad {
    pub n: usize,
    /// Frame coordinates of the nodes.
    pub points: Vec<Vec<f64>>,
    /// Ambient coordinates of the nodes.
    pub ambient: Vec<Vec<f64>>,
    /// Weights for the Lebesgue measure of the frame coordinates.
    pub weights: Vec<f64>,
    /// Sign of the frame relative to the ambient orientation.
    pub orient: f64,
    pub metric: Vec<f64>,
    /// `sqrt(prod g)`, the Jacobian of the frame.
    pub vf: f64,
    /// `frame[r][c]`: ambient component `r` of frame vector `c`.
    frame: Vec<Vec<f64>>,
}

impl TopQuad {
    pub fn new(mesh: &Mesh, i: usize, order: usize) -> Self {
        let n = mesh.n;
        let cell = mesh.cell(n, i);
        let frame: Vec<Vec<f64>> = (0..n).map(|r| (0..n).map(|c| rat_to_f64(&cell.frame[c][r])).collect()).collect();
        let all: Vec<usize> = (0..n).collect();
        let orient = minor_det(&frame, &all, &all).signum();
        let rule = simplex_rule(n, order);
        let (mut points, mut ambient, mut weights) = (Vec::new(), Vec::new(), Vec::new());
        for (verts, _) in mesh.local_simplices::<f64>(n, i) {
            let jac = simplex_volume_factor(&verts);
            for (t, w) in rule.points.iter().zip(&rule.weights) {
                let s: Vec<f64> = (0..n)
                    .map(|a| verts[0][a] + t.iter().enumerate().map(|(j, tj)| tj * (verts[j + 1][a] - verts[0][a])).sum::<f64>())
                    .collect();
                ambient.push(cell.ambient(&s));
                points.push(s);
                weights.push(w * jac);
            }
        }
        TopQuad { n, points, ambient, weights, orient, metric: cell.metric.iter().map(rat_to_f64).collect(), vf: cell.volume_factor(), frame }
    }

    /// Frame components of an ambient `k`-form from its ambient components.
    pub fn pull(&self, k: usize, vals: &[f64]) -> Vec<f64> {
        let amb = subsets(self.n, k);
        subsets(self.n, k)
            .iter()
            .map(|mj| {
                let cols = indices(*mj);
                amb.iter().zip(vals).map(|(mi, v)| v * minor_det(&self.frame, &indices(*mi), &cols)).sum()
            })
            .collect()
    }

    /// Frame components of a smooth form at every node.
    pub fn sample(&self, w: &SmoothForm) -> Vec<Vec<f64>> {
        self.ambient.iter().map(|x| self.pull(w.k, &w.eval(x))).collect()
    }

    /// Frame components of a polynomial frame form at every node.
    pub fn sample_poly(&self, w: &Form<f64>) -> Vec<Vec<f64>> {
        self.points.iter().map(|s| w.eval_f64(s)).collect()
    }

    /// Pointwise squared norm of frame components for the cell metric.
    pub fn norm2_at(&self, k: usize, a: &[f64]) -> f64 {
        self.dot_at(k, a, a)
    }

    pub fn dot_at(&self, k: usize, a: &[f64], b: &[f64]) -> f64 {
        subsets(self.n, k)
            .iter()
            .zip(a.iter().zip(b))
            .map(|(m, (x, y))| x * y / indices(*m).iter().map(|&j| self.metric[j]).product::<f64>())
            .sum()
    }

    /// True L2 inner product of two sampled `k`-forms over the cell.
    pub fn inner(&self, k: usize, a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
        self.vf * self.weights.iter().enumerate().map(|(q, w)| w * self.dot_at(k, &a[q], &b[q])).sum::<f64>()
    }

    /// Squared L2 norm of the difference of two sampled `k`-forms.
    pub fn dist2(&self, k: usize, a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
        self.vf
            * self
                .weights
                .iter()
                .enumerate()
                .map(|(q, w)| {
                    let diff: Vec<f64> = a[q].iter().zip(&b[q]).map(|(x, y)| x - y).collect();
                    w * self.norm2_at(k, &diff)
                })
                .sum::<f64>()
    }

    /// `int_f a ^ b` for sampled forms of degrees `k` and `n - k`, with the ambient orientation.
    pub fn wedge(&self, k: usize, a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
        let n = self.n;
        let full = ((1u32 << n) - 1) as u8;
        let left = subsets(n, k);
        let right = subsets(n, n - k);
        let pairs: Vec<(usize, usize, f64)> = left
            .iter()
            .enumerate()
            .map(|(p, m)| (p, right.iter().position(|c| *c == full & !m).unwrap(), merge_sign(*m, full & !m) as f64))
            .collect();
        self.orient
            * self
                .weights
                .iter()
                .enumerate()
                .map(|(q, w)| w * pairs.iter().map(|(p, c, s)| s * a[q][*p] * b[q][*c]).sum::<f64>())
                .sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::smooth::{library, Factor, Term};
    use crate::mesh::{build_family, Family, FamilySpec};

    #[test]
    fn area_and_orientation() {
        for fam in [Family::Triangular, Family::CartesianPolygonal, Family::HexagonalDominant] {
            let mesh = build_family(FamilySpec::new(fam, 2, 1)).unwrap();
            let mut area = 0.0;
            let mut signed = 0.0;
            for i in 0..mesh.num_cells(2) {
                let q = TopQuad::new(&mesh, i, 4);
                let one = vec![vec![1.0]; q.weights.len()];
                area += q.inner(0, &one, &one);
                signed += q.wedge(0, &one, &q.sample(&dxdy()));
            }
            assert!((area - 1.0).abs() < 1e-12, "{fam}: {area}");
            assert!((signed - 1.0).abs() < 1e-12, "{fam}: {signed}");
        }
    }

    fn dxdy() -> SmoothForm {
        let mut w = SmoothForm::zero(2, 2);
        w.add_term(0b11, Term { coef: 1.0, factors: vec![Factor::constant(1.0), Factor::constant(1.0)] });
        w
    }

    #[test]
    fn stokes_on_the_square() {
        // int d(alpha) = 0 for a 1-form with zero boundary trace
        let mesh = build_family(FamilySpec::new(Family::CartesianPolygonal, 2, 2)).unwrap();
        let a = library::bump(2, 1).d();
        let total: f64 = (0..mesh.num_cells(2))
            .map(|i| {
                let q = TopQuad::new(&mesh, i, 10);
                let one = vec![vec![1.0]; q.weights.len()];
                q.wedge(0, &one, &q.sample(&a))
            })
            .sum();
        assert!(total.abs() < 1e-10, "{total}");
    }
}
