//! One-dimensional meshes on [0,1] and their difference operators.
//!
//! Two families are supported: uniform meshes and piecewise-uniform
//! meshes that refine near the endpoints `x = 0, 1` where the models
//! develop boundary layers. Difference operators use the standard
//! three-point stencil, which on a nonuniform mesh coincides with the
//! vertex-centred finite-volume form
//! `((u_{i+1}-u_i)/h_i - (u_i-u_{i-1})/h_{i-1}) / hbar_i`
//! with dual cell widths `hbar_i = (h_{i-1}+h_i)/2`.

use crate::error::{Error, Result};
use crate::tridiag::Tridiag;
use nalgebra::DMatrix;

const COMMENSURATE_TOL: f64 = 1e-9;

/// Strictly increasing node set on [0,1].
#[derive(Clone, Debug)]
pub struct Mesh {
    nodes: Vec<f64>,
    widths: Vec<f64>,
    dual: Vec<f64>,
    id: String,
}

impl Mesh {
    /// Uniform mesh with `n_cells` cells (`n_cells + 1` nodes).
    pub fn uniform(n_cells: usize) -> Result<Mesh> {
        if n_cells < 2 {
            return Err(Error::invalid(format!(
                "uniform mesh needs at least 2 cells, got {n_cells}"
            )));
        }
        let nodes: Vec<f64> = (0..=n_cells).map(|i| i as f64 / n_cells as f64).collect();
        let widths = vec![1.0 / n_cells as f64; n_cells];
        Ok(Mesh::from_parts(nodes, widths, format!("uniform-{n_cells}")))
    }

    /// Piecewise-uniform mesh: spacing `dx_edge` on `[0, edge_frac]` and
    /// `[1 - edge_frac, 1]`, spacing `dx_bulk` in between. The spacings
    /// must tile their intervals exactly.
    pub fn piecewise(edge_frac: f64, dx_edge: f64, dx_bulk: f64) -> Result<Mesh> {
        if !(edge_frac > 0.0 && edge_frac < 0.5) {
            return Err(Error::invalid(format!(
                "edge_frac must lie in (0, 1/2), got {edge_frac}"
            )));
        }
        if dx_edge <= 0.0 || dx_bulk <= 0.0 {
            return Err(Error::invalid("mesh spacings must be positive"));
        }
        let n_edge = integer_count(edge_frac, dx_edge).ok_or_else(|| {
            Error::invalid(format!(
                "edge_frac/dx_edge = {} is not an integer",
                edge_frac / dx_edge
            ))
        })?;
        let bulk_len = 1.0 - 2.0 * edge_frac;
        let n_bulk = integer_count(bulk_len, dx_bulk).ok_or_else(|| {
            Error::invalid(format!(
                "(1 - 2 edge_frac)/dx_bulk = {} is not an integer",
                bulk_len / dx_bulk
            ))
        })?;
        let mut nodes = Vec::with_capacity(2 * n_edge + n_bulk + 1);
        for i in 0..=n_edge {
            nodes.push(i as f64 * dx_edge);
        }
        for j in 1..=n_bulk {
            nodes.push(edge_frac + j as f64 * dx_bulk);
        }
        for k in 1..=n_edge {
            nodes.push((1.0 - edge_frac) + k as f64 * dx_edge);
        }
        let n = nodes.len();
        nodes[n - 1] = 1.0;
        let mut widths = Vec::with_capacity(n - 1);
        widths.extend(std::iter::repeat_n(dx_edge, n_edge));
        widths.extend(std::iter::repeat_n(dx_bulk, n_bulk));
        widths.extend(std::iter::repeat_n(dx_edge, n_edge));
        let id = format!("piecewise-{edge_frac}-{dx_edge:.4e}-{dx_bulk:.4e}");
        Ok(Mesh::from_parts(nodes, widths, id))
    }

    /// `widths` are supplied by the builders rather than re-derived by
    /// node subtraction so that equal cells carry bitwise-equal widths.
    fn from_parts(nodes: Vec<f64>, widths: Vec<f64>, id: String) -> Mesh {
        debug_assert_eq!(widths.len() + 1, nodes.len());
        debug_assert!(nodes
            .windows(2)
            .zip(&widths)
            .all(|(w, h)| (w[1] - w[0] - h).abs() <= 1e-12));
        let n = nodes.len();
        let mut dual = vec![0.0; n];
        dual[0] = widths[0] / 2.0;
        dual[n - 1] = widths[n - 2] / 2.0;
        for i in 1..n - 1 {
            dual[i] = (widths[i - 1] + widths[i]) / 2.0;
        }
        Mesh {
            nodes,
            widths,
            dual,
            id,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_cells(&self) -> usize {
        self.widths.len()
    }

    /// Cell widths `h_i = x_{i+1} - x_i`.
    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    /// Dual cell widths; these are also the trapezoid quadrature weights.
    pub fn dual_widths(&self) -> &[f64] {
        &self.dual
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Trapezoid quadrature of nodal values over [0,1].
    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.n_nodes());
        self.dual.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// One node position per line, with a header row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x\n");
        for x in &self.nodes {
            s.push_str(&format!("{x:.16e}\n"));
        }
        s
    }
}

fn integer_count(length: f64, dx: f64) -> Option<usize> {
    let ratio = length / dx;
    let rounded = ratio.round();
    if rounded >= 1.0 && (ratio - rounded).abs() <= COMMENSURATE_TOL * ratio.max(1.0) {
        Some(rounded as usize)
    } else {
        None
    }
}

/// How the rows at the two boundary nodes are closed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryPolicy {
    /// Eliminate ghost nodes with a homogeneous-flux closure; the
    /// boundary row of the second difference becomes
    /// `2 (u_1 - u_0) / h_0^2` (and mirrored on the right).
    GhostClosed,
    /// Leave the boundary rows zero for the caller to overwrite.
    InteriorOnly,
}

/// Banded difference operator on mesh nodes.
#[derive(Clone, Debug)]
pub struct DiffOp {
    rows: Tridiag,
    policy: BoundaryPolicy,
}

impl DiffOp {
    /// Second-difference operator `D_xx` with the three-point stencil
    /// `2/(h_l (h_l + h_r)), -2/(h_l h_r), 2/(h_r (h_l + h_r))` on
    /// interior rows.
    pub fn second_difference(mesh: &Mesh, policy: BoundaryPolicy) -> DiffOp {
        let n = mesh.n_nodes();
        let h = mesh.widths();
        let mut rows = Tridiag::zeros(n);
        for i in 1..n - 1 {
            let (hl, hr) = (h[i - 1], h[i]);
            rows.sub[i - 1] = 2.0 / (hl * (hl + hr));
            rows.sup[i] = 2.0 / (hr * (hl + hr));
            // equals -2/(hl*hr); the negative row sum keeps constants in
            // the kernel to the last bit
            rows.diag[i] = -(rows.sub[i - 1] + rows.sup[i]);
        }
        if policy == BoundaryPolicy::GhostClosed {
            let h0 = h[0];
            rows.diag[0] = -2.0 / (h0 * h0);
            rows.sup[0] = 2.0 / (h0 * h0);
            let hn = h[n - 2];
            rows.diag[n - 1] = -2.0 / (hn * hn);
            rows.sub[n - 2] = 2.0 / (hn * hn);
        }
        DiffOp { rows, policy }
    }

    /// Centred first-difference operator `D_x`; boundary rows use the
    /// one-sided second-order formulas regardless of policy orientation.
    pub fn first_difference(mesh: &Mesh, policy: BoundaryPolicy) -> DiffOp {
        let n = mesh.n_nodes();
        let h = mesh.widths();
        let mut rows = Tridiag::zeros(n);
        for i in 1..n - 1 {
            let (hl, hr) = (h[i - 1], h[i]);
            rows.sub[i - 1] = -hr / (hl * (hl + hr));
            rows.diag[i] = (hr - hl) / (hl * hr);
            rows.sup[i] = hl / (hr * (hl + hr));
        }
        if policy == BoundaryPolicy::GhostClosed {
            // One-sided 2nd-order formulas need the second band; with a
            // tridiagonal store we fall back to first order at the two
            // boundary rows. These rows are only used for diagnostics.
            rows.diag[0] = -1.0 / h[0];
            rows.sup[0] = 1.0 / h[0];
            rows.sub[n - 2] = -1.0 / h[n - 2];
            rows.diag[n - 1] = 1.0 / h[n - 2];
        }
        DiffOp { rows, policy }
    }

    pub fn policy(&self) -> BoundaryPolicy {
        self.policy
    }

    pub fn rows(&self) -> &Tridiag {
        &self.rows
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows.apply(x)
    }

    /// Eigenvalues of the Dirichlet-reduced operator (boundary rows and
    /// columns dropped), sorted ascending (most negative first). The
    /// reduced matrix is similar to a symmetric tridiagonal matrix, so
    /// the symmetric eigensolver applies after a diagonal similarity
    /// transform.
    pub fn dirichlet_eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.rows.len();
        if n < 3 {
            return Err(Error::invalid("mesh too small for a Dirichlet reduction"));
        }
        let m = n - 2;
        // interior block in tridiagonal form
        let diag: Vec<f64> = (0..m).map(|i| self.rows.diag[i + 1]).collect();
        let sup: Vec<f64> = (0..m - 1).map(|i| self.rows.sup[i + 1]).collect();
        let sub: Vec<f64> = (0..m - 1).map(|i| self.rows.sub[i + 1]).collect();
        let mut sym = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            sym[(i, i)] = diag[i];
        }
        for i in 0..m - 1 {
            let prod = sup[i] * sub[i];
            if prod <= 0.0 {
                return Err(Error::numeric(
                    "second-difference off-diagonals changed sign; cannot symmetrize",
                ));
            }
            let off = prod.sqrt();
            sym[(i, i + 1)] = off;
            sym[(i + 1, i)] = off;
        }
        let eig = sym.symmetric_eigen();
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(vals)
    }

    /// `(lambda_1, lambda_n)` of the Dirichlet-reduced operator:
    /// the eigenvalue closest to zero and the most negative one.
    pub fn extreme_eigenvalues(&self) -> Result<(f64, f64)> {
        let vals = self.dirichlet_eigenvalues()?;
        let lambda_n = vals[0];
        let lambda_1 = *vals.last().unwrap();
        Ok((lambda_1, lambda_n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn uniform_90_matches_expected_spacing() {
        let m = Mesh::uniform(90).unwrap();
        assert_eq!(m.n_nodes(), 91);
        for h in m.widths() {
            assert_relative_eq!(*h, 1.0 / 90.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn uniform_small_cases() {
        let m = Mesh::uniform(2).unwrap();
        assert_eq!(m.nodes(), &[0.0, 0.5, 1.0]);
        let m = Mesh::uniform(10).unwrap();
        assert_relative_eq!(m.nodes()[3], 0.3, max_relative = 1e-14);
        assert!(Mesh::uniform(1).is_err());
    }

    #[test]
    fn piecewise_spacings() {
        // dx = 1/150 in [0, 0.1] and [0.9, 1], dx = 4/75 elsewhere
        let m = Mesh::piecewise(0.1, 1.0 / 150.0, 4.0 / 75.0).unwrap();
        assert_eq!(m.n_cells(), 15 + 15 + 15);
        for (i, h) in m.widths().iter().enumerate() {
            let expect = if i < 15 || i >= 30 { 1.0 / 150.0 } else { 4.0 / 75.0 };
            assert_relative_eq!(*h, expect, max_relative = 1e-10);
        }
        assert_eq!(*m.nodes().last().unwrap(), 1.0);

        let m = Mesh::piecewise(0.1, 1.0 / 300.0, 2.0 / 75.0).unwrap();
        assert_eq!(m.widths().iter().filter(|h| **h < 0.01).count(), 60);

        let m = Mesh::piecewise(0.25, 0.25, 0.5).unwrap();
        assert_eq!(m.nodes(), &[0.0, 0.25, 0.75, 1.0]);
    }

    #[test]
    fn piecewise_rejects_non_commensurate() {
        assert!(Mesh::piecewise(0.1, 0.03, 0.1).is_err());
        assert!(Mesh::piecewise(0.6, 0.1, 0.1).is_err());
    }

    #[test]
    fn nodes_strictly_increasing_two_width_values() {
        for m in [
            Mesh::uniform(17).unwrap(),
            Mesh::piecewise(0.1, 1.0 / 450.0, 4.0 / 225.0).unwrap(),
        ] {
            assert_eq!(m.nodes()[0], 0.0);
            assert_eq!(*m.nodes().last().unwrap(), 1.0);
            for w in m.nodes().windows(2) {
                assert!(w[1] > w[0]);
            }
            let mut distinct: Vec<f64> = Vec::new();
            for h in m.widths() {
                if !distinct.iter().any(|d| (d - h).abs() <= 1e-12 * d.abs()) {
                    distinct.push(*h);
                }
            }
            assert!(distinct.len() <= 2, "{} distinct widths", distinct.len());
        }
    }

    #[test]
    fn dxx_uniform_interior_row() {
        let m = Mesh::uniform(4).unwrap();
        let op = DiffOp::second_difference(&m, BoundaryPolicy::InteriorOnly);
        // 1/dx^2 = 16
        assert_relative_eq!(op.rows().sub[0], 16.0, max_relative = 1e-14);
        assert_relative_eq!(op.rows().diag[1], -32.0, max_relative = 1e-14);
        assert_relative_eq!(op.rows().sup[1], 16.0, max_relative = 1e-14);
    }

    #[test]
    fn dxx_annihilates_constants_and_linears() {
        for m in [
            Mesh::uniform(20).unwrap(),
            Mesh::piecewise(0.1, 1.0 / 150.0, 4.0 / 75.0).unwrap(),
        ] {
            let op = DiffOp::second_difference(&m, BoundaryPolicy::InteriorOnly);
            let ones = vec![1.0; m.n_nodes()];
            let lin: Vec<f64> = m.nodes().to_vec();
            let dc = op.apply(&ones);
            let dl = op.apply(&lin);
            for i in 1..m.n_nodes() - 1 {
                assert!(dc[i].abs() < 1e-12, "constant row {i}: {}", dc[i]);
                assert!(dl[i].abs() < 1e-10, "linear row {i}: {}", dl[i]);
            }
        }
    }

    #[test]
    fn dirichlet_spectrum_matches_closed_form() {
        let n = 20usize;
        let m = Mesh::uniform(n).unwrap();
        let op = DiffOp::second_difference(&m, BoundaryPolicy::InteriorOnly);
        let vals = op.dirichlet_eigenvalues().unwrap();
        let dx = 1.0 / n as f64;
        let mut expect: Vec<f64> = (1..n)
            .map(|k| 2.0 * ((k as f64 * std::f64::consts::PI / n as f64).cos() - 1.0) / (dx * dx))
            .collect();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (v, e) in vals.iter().zip(&expect) {
            assert_relative_eq!(v, e, max_relative = 1e-8);
        }
    }

    #[test]
    fn extreme_eigenvalues_small_case() {
        // 3x3 Dirichlet matrix for n_cells = 4: eigenvalues 16(-2 ± sqrt(2)), -32
        let m = Mesh::uniform(4).unwrap();
        let op = DiffOp::second_difference(&m, BoundaryPolicy::InteriorOnly);
        let (l1, ln) = op.extreme_eigenvalues().unwrap();
        assert_relative_eq!(l1, 16.0 * (-2.0 + 2.0f64.sqrt()), max_relative = 1e-12);
        assert_relative_eq!(ln, 16.0 * (-2.0 - 2.0f64.sqrt()), max_relative = 1e-12);
        assert!(ln <= l1 && l1 < 0.0);
    }

    #[test]
    fn lambda_1_near_pi_squared() {
        let m = Mesh::uniform(20).unwrap();
        let op = DiffOp::second_difference(&m, BoundaryPolicy::InteriorOnly);
        let (l1, _) = op.extreme_eigenvalues().unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((l1 + pi2).abs() / pi2 < 0.02, "lambda_1 = {l1}");
    }

    #[test]
    fn low_mode_insensitive_to_edge_refinement() {
        let coarse = Mesh::piecewise(0.1, 1.0 / 150.0, 4.0 / 75.0).unwrap();
        let fine = Mesh::piecewise(0.1, 1.0 / 300.0, 4.0 / 75.0).unwrap();
        let l1_c = DiffOp::second_difference(&coarse, BoundaryPolicy::InteriorOnly)
            .extreme_eigenvalues()
            .unwrap()
            .0;
        let l1_f = DiffOp::second_difference(&fine, BoundaryPolicy::InteriorOnly)
            .extreme_eigenvalues()
            .unwrap()
            .0;
        assert!((l1_c - l1_f).abs() / l1_c.abs() < 0.01);
    }

    #[test]
    fn ghost_closed_boundary_rows() {
        let m = Mesh::uniform(5).unwrap();
        let op = DiffOp::second_difference(&m, BoundaryPolicy::GhostClosed);
        let ones = vec![1.0; 6];
        let out = op.apply(&ones);
        for v in out {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn first_difference_exact_on_linears() {
        for m in [
            Mesh::uniform(12).unwrap(),
            Mesh::piecewise(0.25, 0.125, 0.25).unwrap(),
        ] {
            let op = DiffOp::first_difference(&m, BoundaryPolicy::InteriorOnly);
            let lin: Vec<f64> = m.nodes().iter().map(|x| 3.0 * x - 0.4).collect();
            let d = op.apply(&lin);
            for i in 1..m.n_nodes() - 1 {
                assert_relative_eq!(d[i], 3.0, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn trapezoid_weights_sum_to_one() {
        let m = Mesh::piecewise(0.1, 1.0 / 300.0, 2.0 / 75.0).unwrap();
        let total: f64 = m.dual_widths().iter().sum();
        assert_relative_eq!(total, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn csv_has_header_and_all_nodes() {
        let m = Mesh::uniform(4).unwrap();
        let csv = m.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x");
        assert_eq!(lines.len(), 6);
    }
}
