//! Poisson-Nernst-Planck transport with Frumkin-Butler-Volmer electrode
//! kinetics, as an [`ImexProblem`].
//!
//! Two ion species with charges +1/-1 evolve by
//! `dc/dt = -(J)_x` with total flux `J = -c_x - z c phi_x`. The
//! potential is an elliptic slave variable: `-eps^2 phi_xx =
//! (c_+ - c_-)/2` with Stern-layer Robin boundary conditions, re-solved
//! from the concentrations at every evaluation of the explicit term.
//!
//! Splitting: diffusion `c_xx` is the implicit `g` (one constant
//! tridiagonal operator per species, closed with zero diffusive flux at
//! the walls); electromigration and the nonlinear electrode fluxes make
//! up the explicit `f`. The boundary rows of `f` impose the full
//! Butler-Volmer flux for `c_+` and zero total flux for `c_-`, so `f+g`
//! discretizes the true flux balance while `g` stays linear and
//! constant.
//!
//! Fluxes live on half nodes and each nodal rate is a flux difference
//! over the dual cell, so trapezoid mass obeys a discrete conservation
//! law: the mass of `c_-` is invariant, and the mass of `c_+` changes
//! exactly by the electrode fluxes.
//!
//! The device is driven either by a constant cathode voltage or a
//! constant external current; in current mode the state grows one
//! auxiliary variable `q = phi_x(1,t)` with an explicit rate equation,
//! and the voltage is recovered a posteriori.

use crate::error::{Error, Result};
use crate::imex::ImexProblem;
use crate::mesh::Mesh;
use crate::tridiag::Tridiag;
use nalgebra::DVector;

/// Exponent guard: `exp(0.5 * 700)` is near the f64 overflow edge.
const MAX_STERN_DROP: f64 = 700.0;

/// Externally controlled drive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Drive {
    /// Constant cathode voltage `v`.
    Voltage(f64),
    /// Constant external current `j_ext`.
    Current(f64),
}

impl Drive {
    pub fn is_current(&self) -> bool {
        matches!(self, Drive::Current(_))
    }

    pub fn value(&self) -> f64 {
        match self {
            Drive::Voltage(v) => *v,
            Drive::Current(j) => *j,
        }
    }
}

/// Physical parameters of the nondimensionalized model.
#[derive(Clone, Copy, Debug)]
pub struct PnpParams {
    /// Debye length over electrode gap.
    pub eps: f64,
    /// Stern layer thickness over electrode gap.
    pub delta: f64,
    /// Anode deposition rate.
    pub k_ca: f64,
    /// Cathode deposition rate.
    pub k_cc: f64,
    /// Anode dissolution rate.
    pub j_ra: f64,
    /// Cathode dissolution rate.
    pub j_rc: f64,
    pub drive: Drive,
}

impl PnpParams {
    /// All rate constants and the Stern ratio set to one.
    pub fn with_voltage(eps: f64, v: f64) -> Self {
        PnpParams {
            eps,
            delta: 1.0,
            k_ca: 1.0,
            k_cc: 1.0,
            j_ra: 1.0,
            j_rc: 1.0,
            drive: Drive::Voltage(v),
        }
    }

    pub fn with_current(eps: f64, j_ext: f64) -> Self {
        PnpParams {
            drive: Drive::Current(j_ext),
            ..PnpParams::with_voltage(eps, 0.0)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::invalid(format!("eps = {} must be positive", self.eps)));
        }
        if self.delta < 0.0 {
            return Err(Error::invalid(format!(
                "delta = {} must be nonnegative",
                self.delta
            )));
        }
        for (name, v) in [
            ("k_ca", self.k_ca),
            ("k_cc", self.k_cc),
            ("j_ra", self.j_ra),
            ("j_rc", self.j_rc),
        ] {
            if !(v >= 0.0) {
                return Err(Error::invalid(format!("rate {name} = {v} must be nonnegative")));
            }
        }
        Ok(())
    }
}

/// Unpacked state: nodal concentrations plus, in current mode, the
/// auxiliary gradient variable `q = phi_x(1,t)`.
#[derive(Clone, Debug)]
pub struct PnpState {
    pub c_plus: DVector<f64>,
    pub c_minus: DVector<f64>,
    pub q: Option<f64>,
}

/// Solved potential with the Stern-layer drops at the two electrodes.
#[derive(Clone, Debug)]
pub struct Potential {
    pub phi: DVector<f64>,
    /// `-phi(0)`.
    pub dphi_left: f64,
    /// `v - phi(1)` in voltage mode, `eps * delta * q` in current mode.
    pub dphi_right: f64,
}

impl Potential {
    /// Cathode voltage; in current mode this is the a-posteriori value.
    pub fn cathode_voltage(&self) -> f64 {
        self.phi[self.phi.len() - 1] + self.dphi_right
    }
}

/// Butler-Volmer electrode fluxes
/// `F = 4 k_ca c_+(0) exp(-dphi_l/2) - 4 j_ra exp(dphi_l/2)` and
/// `G = 4 k_cc c_+(1) exp(-dphi_r/2) - 4 j_rc exp(dphi_r/2)`.
pub fn fbv_fluxes(
    params: &PnpParams,
    c_plus_at_0: f64,
    c_plus_at_1: f64,
    dphi_left: f64,
    dphi_right: f64,
) -> Result<(f64, f64)> {
    if dphi_left.abs() > MAX_STERN_DROP || dphi_right.abs() > MAX_STERN_DROP {
        return Err(Error::numeric(format!(
            "Stern-layer drop overflow: |{dphi_left:.3e}|, |{dphi_right:.3e}|"
        )));
    }
    let f = 4.0 * params.k_ca * c_plus_at_0 * (-0.5 * dphi_left).exp()
        - 4.0 * params.j_ra * (0.5 * dphi_left).exp();
    let g = 4.0 * params.k_cc * c_plus_at_1 * (-0.5 * dphi_right).exp()
        - 4.0 * params.j_rc * (0.5 * dphi_right).exp();
    Ok((f, g))
}

/// The model bound to a mesh; immutable configuration, safe to share.
pub struct PnpModel {
    params: PnpParams,
    mesh: Mesh,
    /// Ghost-closed diffusion operator shared by both species.
    lap: Tridiag,
    /// Constant part of the Poisson matrix.
    poisson: Tridiag,
}

impl PnpModel {
    pub fn new(params: PnpParams, mesh: Mesh) -> Result<Self> {
        params.validate()?;
        if mesh.n_nodes() < 4 {
            return Err(Error::invalid("PNP model needs at least 4 mesh nodes"));
        }
        let lap = ghost_closed_laplacian(&mesh);
        let poisson = poisson_matrix(&params, &mesh)?;
        Ok(PnpModel {
            params,
            mesh,
            lap,
            poisson,
        })
    }

    pub fn params(&self) -> &PnpParams {
        &self.params
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn n_nodes(&self) -> usize {
        self.mesh.n_nodes()
    }

    /// `[c_plus | c_minus | (q)]`.
    pub fn pack(&self, state: &PnpState) -> DVector<f64> {
        let n = self.n_nodes();
        assert_eq!(state.c_plus.len(), n);
        assert_eq!(state.c_minus.len(), n);
        assert_eq!(state.q.is_some(), self.params.drive.is_current());
        let mut u = DVector::zeros(self.dim());
        u.rows_mut(0, n).copy_from(&state.c_plus);
        u.rows_mut(n, n).copy_from(&state.c_minus);
        if let Some(q) = state.q {
            u[2 * n] = q;
        }
        u
    }

    pub fn unpack(&self, u: &DVector<f64>) -> PnpState {
        let n = self.n_nodes();
        assert_eq!(u.len(), self.dim());
        PnpState {
            c_plus: u.rows(0, n).into_owned(),
            c_minus: u.rows(n, n).into_owned(),
            q: if self.params.drive.is_current() {
                Some(u[2 * n])
            } else {
                None
            },
        }
    }

    /// `c_pm(x,0) = 1 + 0.1 sin(2 pi x)`, and `q = 0` in current mode.
    pub fn default_initial_state(&self) -> PnpState {
        let two_pi = 2.0 * std::f64::consts::PI;
        let c: DVector<f64> = DVector::from_iterator(
            self.n_nodes(),
            self.mesh.nodes().iter().map(|x| 1.0 + 0.1 * (two_pi * x).sin()),
        );
        PnpState {
            c_plus: c.clone(),
            c_minus: c,
            q: if self.params.drive.is_current() {
                Some(0.0)
            } else {
                None
            },
        }
    }

    /// Solve the discrete Poisson problem for given concentrations; in
    /// current mode `q` supplies the right-hand Neumann value.
    pub fn solve_poisson(
        &self,
        c_plus: &[f64],
        c_minus: &[f64],
        q: Option<f64>,
    ) -> Result<Potential> {
        let n = self.n_nodes();
        assert_eq!(c_plus.len(), n);
        assert_eq!(c_minus.len(), n);
        let p = &self.params;
        let h = self.mesh.widths();
        let hn = h[n - 2];
        let mut rhs: Vec<f64> = (0..n).map(|i| 0.5 * (c_plus[i] - c_minus[i])).collect();
        if p.delta == 0.0 {
            rhs[0] = 0.0;
        }
        match (p.drive, q) {
            (Drive::Voltage(v), None) => {
                if p.delta == 0.0 {
                    rhs[n - 1] = v;
                } else {
                    rhs[n - 1] += 2.0 * p.eps / (p.delta * hn) * v;
                }
            }
            (Drive::Current(_), Some(qv)) => {
                rhs[n - 1] += 2.0 * p.eps * p.eps / hn * qv;
            }
            _ => {
                return Err(Error::invalid(
                    "solve_poisson: q must be supplied exactly in current mode",
                ));
            }
        }
        let phi = self.poisson.solve(&rhs)?;
        let resid = self.poisson.residual(&phi, &rhs);
        if resid > 1e-10 {
            return Err(Error::numeric(format!(
                "Poisson residual {resid:.3e} exceeds 1e-10"
            )));
        }
        let dphi_left = -phi[0];
        let dphi_right = match (p.drive, q) {
            (Drive::Voltage(v), _) => v - phi[n - 1],
            (Drive::Current(_), Some(qv)) => p.eps * p.delta * qv,
            _ => unreachable!(),
        };
        Ok(Potential {
            phi: DVector::from_vec(phi),
            dphi_left,
            dphi_right,
        })
    }

    /// Potential for a packed state.
    pub fn potential(&self, u: &DVector<f64>) -> Result<Potential> {
        let st = self.unpack(u);
        self.solve_poisson(st.c_plus.as_slice(), st.c_minus.as_slice(), st.q)
    }

    /// Max-norm of `f(u) + g(u)`.
    pub fn steady_residual(&self, u: &DVector<f64>) -> Result<f64> {
        crate::imex::steady_residual(self, u)
    }

    /// Trapezoid masses of the two species.
    pub fn species_masses(&self, u: &DVector<f64>) -> (f64, f64) {
        let n = self.n_nodes();
        let mp = self.mesh.trapezoid(u.rows(0, n).as_slice());
        let mm = self.mesh.trapezoid(u.rows(n, n).as_slice());
        (mp, mm)
    }

    /// Mass flow rate of `c_+` out of the electrode fluxes, `-(F + G)`;
    /// the trapezoid mass of `c_+` satisfies the stepped-in-time
    /// relation driven by this quantity, and `c_-` has none.
    pub fn plus_mass_rate(&self, u: &DVector<f64>) -> Result<f64> {
        let st = self.unpack(u);
        let pot = self.solve_poisson(st.c_plus.as_slice(), st.c_minus.as_slice(), st.q)?;
        let n = self.n_nodes();
        let (f, g) = fbv_fluxes(
            &self.params,
            st.c_plus[0],
            st.c_plus[n - 1],
            pot.dphi_left,
            pot.dphi_right,
        )?;
        Ok(-(f + g))
    }

    /// Smallest concentration value; negative values are diagnostic,
    /// not an error.
    pub fn min_concentration(&self, u: &DVector<f64>) -> f64 {
        let n = self.n_nodes();
        u.rows(0, 2 * n).min()
    }

    /// Snapshot CSV rows `x, c_plus, c_minus, phi`.
    pub fn snapshot_csv(&self, u: &DVector<f64>) -> Result<String> {
        let st = self.unpack(u);
        let pot = self.solve_poisson(st.c_plus.as_slice(), st.c_minus.as_slice(), st.q)?;
        let mut out = String::from("x,c_plus,c_minus,phi\n");
        for (i, x) in self.mesh.nodes().iter().enumerate() {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e}\n",
                x, st.c_plus[i], st.c_minus[i], pot.phi[i]
            ));
        }
        Ok(out)
    }

    /// Explicit rates of one species: divergence of the migration flux
    /// with the given total boundary fluxes imposed.
    fn species_rates(
        &self,
        c: &[f64],
        z: f64,
        phi: &DVector<f64>,
        flux_left: f64,
        flux_right: f64,
        out: &mut [f64],
    ) {
        let n = c.len();
        let h = self.mesh.widths();
        let dual = self.mesh.dual_widths();
        // migration flux on half nodes: -z * cbar * phi_x
        let mut jm = vec![0.0; n - 1];
        for i in 0..n - 1 {
            let cbar = 0.5 * (c[i] + c[i + 1]);
            let dphi = (phi[i + 1] - phi[i]) / h[i];
            jm[i] = -z * cbar * dphi;
        }
        out[0] = -(jm[0] - flux_left) / dual[0];
        for i in 1..n - 1 {
            out[i] = -(jm[i] - jm[i - 1]) / dual[i];
        }
        out[n - 1] = -(flux_right - jm[n - 2]) / dual[n - 1];
    }
}

impl ImexProblem for PnpModel {
    fn dim(&self) -> usize {
        2 * self.n_nodes() + usize::from(self.params.drive.is_current())
    }

    fn eval_f(&self, u: &DVector<f64>, _t: f64) -> Result<DVector<f64>> {
        let n = self.n_nodes();
        let st = self.unpack(u);
        let pot = self.solve_poisson(st.c_plus.as_slice(), st.c_minus.as_slice(), st.q)?;
        let (bv_f, bv_g) = fbv_fluxes(
            &self.params,
            st.c_plus[0],
            st.c_plus[n - 1],
            pot.dphi_left,
            pot.dphi_right,
        )?;
        let mut out = DVector::zeros(self.dim());
        {
            let slices = out.as_mut_slice();
            let (plus, rest) = slices.split_at_mut(n);
            // boundary total fluxes: J(0) = -F and J(1) = G for c_+,
            // zero for c_-
            self.species_rates(st.c_plus.as_slice(), 1.0, &pot.phi, -bv_f, bv_g, plus);
            self.species_rates(st.c_minus.as_slice(), -1.0, &pot.phi, 0.0, 0.0, &mut rest[..n]);
        }
        if let Drive::Current(j_ext) = self.params.drive {
            let reaction = self.params.k_cc * st.c_plus[n - 1] * (-0.5 * pot.dphi_right).exp()
                - self.params.j_rc * (0.5 * pot.dphi_right).exp();
            out[2 * n] = -(2.0 / (self.params.eps * self.params.eps)) * (j_ext - reaction);
        }
        Ok(out)
    }

    fn apply_g(&self, u: &DVector<f64>) -> DVector<f64> {
        let n = self.n_nodes();
        let mut out = DVector::zeros(self.dim());
        let gp = self.lap.apply(u.rows(0, n).as_slice());
        let gm = self.lap.apply(u.rows(n, n).as_slice());
        out.rows_mut(0, n).copy_from_slice(&gp);
        out.rows_mut(n, n).copy_from_slice(&gm);
        // q row has no implicit part
        out
    }

    fn solve_shifted(&self, c: f64, dt: f64, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.n_nodes();
        let shifted = self.lap.scaled_shift(c, -dt);
        let xp = shifted.solve(rhs.rows(0, n).as_slice()).map_err(|e| match e {
            Error::NumericFailure { what, .. } => Error::numeric_at(what, dt),
            other => other,
        })?;
        let xm = shifted.solve(rhs.rows(n, n).as_slice()).map_err(|e| match e {
            Error::NumericFailure { what, .. } => Error::numeric_at(what, dt),
            other => other,
        })?;
        let mut out = DVector::zeros(self.dim());
        out.rows_mut(0, n).copy_from_slice(&xp);
        out.rows_mut(n, n).copy_from_slice(&xm);
        if self.params.drive.is_current() {
            out[2 * n] = rhs[2 * n] / c;
        }
        Ok(out)
    }
}

/// Finite-volume diffusion operator with zero diffusive flux imposed at
/// both walls (boundary transport enters through the explicit term).
fn ghost_closed_laplacian(mesh: &Mesh) -> Tridiag {
    let n = mesh.n_nodes();
    let h = mesh.widths();
    let dual = mesh.dual_widths();
    let mut t = Tridiag::zeros(n);
    t.sup[0] = 1.0 / (h[0] * dual[0]);
    t.diag[0] = -t.sup[0];
    for i in 1..n - 1 {
        t.sub[i - 1] = 1.0 / (h[i - 1] * dual[i]);
        t.sup[i] = 1.0 / (h[i] * dual[i]);
        t.diag[i] = -(t.sub[i - 1] + t.sup[i]);
    }
    t.sub[n - 2] = 1.0 / (h[n - 2] * dual[n - 1]);
    t.diag[n - 1] = -t.sub[n - 2];
    t
}

/// Constant matrix of the discrete Poisson problem
/// `-eps^2 phi_xx = (c_+ - c_-)/2` with the mode's boundary closures;
/// ghost nodes are eliminated through the centred boundary-condition
/// stencils, keeping second order.
fn poisson_matrix(params: &PnpParams, mesh: &Mesh) -> Result<Tridiag> {
    let n = mesh.n_nodes();
    let h = mesh.widths();
    let eps = params.eps;
    let delta = params.delta;
    let mut t = Tridiag::zeros(n);
    for i in 1..n - 1 {
        let (hl, hr) = (h[i - 1], h[i]);
        t.sub[i - 1] = -eps * eps * 2.0 / (hl * (hl + hr));
        t.sup[i] = -eps * eps * 2.0 / (hr * (hl + hr));
        t.diag[i] = -(t.sub[i - 1] + t.sup[i]);
    }
    let h0 = h[0];
    let hn = h[n - 2];
    if delta == 0.0 {
        // Stern layer absent: Dirichlet anode value
        t.diag[0] = 1.0;
        t.sup[0] = 0.0;
    } else {
        t.diag[0] = 2.0 * eps * eps / (h0 * h0) + 2.0 * eps / (delta * h0);
        t.sup[0] = -2.0 * eps * eps / (h0 * h0);
    }
    match params.drive {
        Drive::Voltage(_) => {
            if delta == 0.0 {
                t.diag[n - 1] = 1.0;
                t.sub[n - 2] = 0.0;
            } else {
                t.diag[n - 1] = 2.0 * eps * eps / (hn * hn) + 2.0 * eps / (delta * hn);
                t.sub[n - 2] = -2.0 * eps * eps / (hn * hn);
            }
        }
        Drive::Current(_) => {
            t.diag[n - 1] = 2.0 * eps * eps / (hn * hn);
            t.sub[n - 2] = -2.0 * eps * eps / (hn * hn);
        }
    }
    Ok(t)
}
