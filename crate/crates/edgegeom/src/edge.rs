//! Composition of an edge worldline with its host sheet: tangents, the
//! outward conormal, the adapted frame, edge extrinsic curvatures and frame
//! twist, plus the scalar projections the boundary dynamics runs on.
//!
//! The edge conormal eta is oriented outward: stepping along +eta leaves the
//! sheet domain. All edges here are one-dimensional, so edge tensors carry a
//! single parameter index u.

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};
use crate::families::{EdgeEmbedding, Family};
use crate::numdiff;
use crate::worldsheet::{align_signs, Worldsheet, WorldsheetJet};

/// Algebraic cross-checks (no differencing) must close to this.
const ALGEBRAIC_TOL: f64 = 1e-9;
/// Cross-checks with one differencing layer on each side.
const FD_TOL: f64 = 1e-6;

/// An edge worldline paired with the sheet it bounds.
#[derive(Clone)]
pub struct EdgeContext {
    pub sheet: Worldsheet,
    pub edge: EdgeEmbedding,
}

/// Tangent-level composition data at one edge point.
#[derive(Clone, Debug)]
pub struct Composition {
    pub u: f64,
    pub xi: Vec<f64>,
    pub sheet_jet: WorldsheetJet,
    pub dchi: Vec<f64>,
    pub ddchi: Vec<f64>,
    /// Ambient edge tangent f^mu = e^mu_a dchi^a.
    pub f: DVector<f64>,
    /// Induced edge metric component h_uu, negative for a timelike edge.
    pub h: f64,
    /// Gap between the ambient and sheet routes to h_uu.
    pub route_gap: f64,
}

/// Full first-order edge geometry at one point.
#[derive(Clone, Debug)]
pub struct EdgeJet {
    pub u: f64,
    pub xi: Vec<f64>,
    pub sheet: WorldsheetJet,
    pub dchi: Vec<f64>,
    pub ddchi: Vec<f64>,
    pub f: DVector<f64>,
    pub h: f64,
    /// Outward unit conormal in sheet coordinates.
    pub eta_sheet: Vec<f64>,
    /// The same vector pushed to the ambient space.
    pub eta: DVector<f64>,
    /// Adapted frame columns: eta first, then the sheet normals.
    pub m: DMatrix<f64>,
    /// Edge extrinsic curvatures L^I_uu; index 0 is the conormal direction.
    pub l: Vec<f64>,
    /// Frame twist sigma_u^{IJ} = g(m^J, D_u m^I), antisymmetric.
    pub sigma: DMatrix<f64>,
    /// Connection coefficient of the edge metric, Gamma^u_uu.
    pub edge_gamma: f64,
    /// Worst violation among the internal consistency identities.
    pub worst_identity: f64,
}

/// Scalar projections of the edge data onto the unit tangent v and the
/// conormal eta.
#[derive(Clone, Debug)]
pub struct BoundaryProjections {
    pub u: f64,
    /// Unit timelike edge tangent in sheet coordinates.
    pub v_sheet: Vec<f64>,
    /// Trace h^{AB} k_AB = g(eta, a), the conormal acceleration.
    pub k_trace: f64,
    pub k_uu: f64,
    pub h: f64,
    /// K^i_{ab} eta^a v^b per normal.
    pub kperp_par: Vec<f64>,
    /// K^i_{ab} eta^a eta^b per normal.
    pub kperp_perp: Vec<f64>,
    /// K^i_{ab} v^a v^b per normal.
    pub kpar_par: Vec<f64>,
    /// Normal twist pulled back along v: v^a omega_a^{ij}.
    pub omega_par: DMatrix<f64>,
    /// The same pullback through the edge-frame route sigma/sqrt(-h).
    pub sigma_v: DMatrix<f64>,
    /// Worst error reconstructing K^i_{ab} from its three projections.
    pub recon_residual: f64,
}

impl EdgeContext {
    pub fn new(sheet: Worldsheet, edge: EdgeEmbedding) -> Self {
        EdgeContext { sheet, edge }
    }

    pub fn from_family(fam: &Family) -> Result<Self> {
        let edge = fam
            .edge
            .clone()
            .ok_or_else(|| GeomError::MissingInput(format!("family {} has no edge", fam.name)))?;
        Ok(EdgeContext {
            sheet: fam.sheet.clone(),
            edge,
        })
    }

    pub fn compose(&self, u: f64) -> Result<Composition> {
        let ej = self.edge.jet(u);
        let sheet_jet = self.sheet.jet(&ej.xi)?;
        let d = self.sheet.embedding.dim_sheet;
        let n = self.sheet.embedding.dim_ambient;

        let mut f = DVector::zeros(n);
        for mu in 0..n {
            for a in 0..d {
                f[mu] += sheet_jet.e[(mu, a)] * ej.dchi[a];
            }
        }
        let g = self.sheet.provider.metric_at(&sheet_jet.x)?;
        let h_ambient = (&g * &f).dot(&f);
        let mut h_sheet = 0.0;
        for a in 0..d {
            for b in 0..d {
                h_sheet += sheet_jet.gamma[(a, b)] * ej.dchi[a] * ej.dchi[b];
            }
        }
        let route_gap = (h_ambient - h_sheet).abs();
        if route_gap > 1e-11 * h_ambient.abs().max(1.0) {
            return Err(GeomError::Consistency {
                identity: "edge metric: ambient vs sheet route".into(),
                residual: route_gap,
                tolerance: 1e-11,
            });
        }
        if h_ambient >= -1e-10 {
            return Err(GeomError::Signature {
                point: ej.xi.clone(),
                negatives: 0,
            });
        }
        if self.edge.proper_time && (h_ambient + 1.0).abs() > 1e-9 {
            return Err(GeomError::Consistency {
                identity: "edge parameter declared proper time".into(),
                residual: (h_ambient + 1.0).abs(),
                tolerance: 1e-9,
            });
        }
        Ok(Composition {
            u,
            xi: ej.xi,
            sheet_jet,
            dchi: ej.dchi,
            ddchi: ej.ddchi,
            f,
            h: h_ambient,
            route_gap,
        })
    }

    /// Outward unit conormal in sheet coordinates, oriented by stepping
    /// across the domain boundary.
    fn conormal(&self, comp: &Composition) -> Result<Vec<f64>> {
        let d = self.sheet.embedding.dim_sheet;
        if d != 2 {
            return Err(GeomError::InvalidInput(
                "conormal construction expects a two-dimensional sheet".into(),
            ));
        }
        let gamma = &comp.sheet_jet.gamma;
        let gamma_inv = &comp.sheet_jet.gamma_inv;
        // Covector normal to the tangent: N_a = eps_{ab} dchi^b, then raise.
        let n_cov = [comp.dchi[1], -comp.dchi[0]];
        let mut eta = [0.0; 2];
        for a in 0..2 {
            for b in 0..2 {
                eta[a] += gamma_inv[(a, b)] * n_cov[b];
            }
        }
        let mut norm2 = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                norm2 += gamma[(a, b)] * eta[a] * eta[b];
            }
        }
        if norm2 <= 0.0 {
            return Err(GeomError::DegenerateWorldsheet {
                point: comp.xi.clone(),
            });
        }
        let s = norm2.sqrt();
        let mut eta = vec![eta[0] / s, eta[1] / s];

        let delta = 1e-4 * self.sheet.embedding.domain.diameter().max(1.0);
        let step = |sign: f64| -> bool {
            let p: Vec<f64> = comp
                .xi
                .iter()
                .zip(eta.iter())
                .map(|(x, e)| x + sign * delta * e)
                .collect();
            self.sheet.embedding.domain.contains(&p)
        };
        let (fwd, bwd) = (step(1.0), step(-1.0));
        match (fwd, bwd) {
            (false, true) => {}
            (true, false) => {
                eta[0] = -eta[0];
                eta[1] = -eta[1];
            }
            _ => {
                return Err(GeomError::Orientation {
                    point: comp.xi.clone(),
                });
            }
        }
        Ok(eta)
    }

    pub fn jet(&self, u: f64) -> Result<EdgeJet> {
        let comp = self.compose(u)?;
        self.jet_of_composition(comp, true)
    }

    fn jet_of_composition(&self, comp: Composition, with_sigma: bool) -> Result<EdgeJet> {
        let d = self.sheet.embedding.dim_sheet;
        let n = self.sheet.embedding.dim_ambient;
        let codim = n - d;
        let eta_sheet = self.conormal(&comp)?;
        let mut eta = DVector::zeros(n);
        for mu in 0..n {
            for a in 0..d {
                eta[mu] += comp.sheet_jet.e[(mu, a)] * eta_sheet[a];
            }
        }
        let mut m = DMatrix::zeros(n, 1 + codim);
        for mu in 0..n {
            m[(mu, 0)] = eta[mu];
            for i in 0..codim {
                m[(mu, 1 + i)] = comp.sheet_jet.normals[(mu, i)];
            }
        }

        let g = self.sheet.provider.metric_at(&comp.sheet_jet.x)?;
        let amb_gamma = self.sheet.provider.christoffel_at(&comp.sheet_jet.x)?;

        // Edge acceleration D_u f:
        // df/du = e ddchi + dde dchi dchi, then the ambient connection.
        let mut acc: DVector<f64> = DVector::zeros(n);
        for mu in 0..n {
            for a in 0..d {
                acc[mu] += comp.sheet_jet.e[(mu, a)] * comp.ddchi[a];
                for b in 0..d {
                    acc[mu] += comp.sheet_jet.dde.get(mu, a, b) * comp.dchi[a] * comp.dchi[b];
                }
            }
            for nu in 0..n {
                for lam in 0..n {
                    acc[mu] += amb_gamma.get(mu, nu, lam) * comp.f[nu] * comp.f[lam];
                }
            }
        }
        let mut l = vec![0.0; 1 + codim];
        for cap_i in 0..(1 + codim) {
            let mut v = 0.0;
            for mu in 0..n {
                for nu in 0..n {
                    v -= g[(mu, nu)] * m[(mu, cap_i)] * acc[nu];
                }
            }
            l[cap_i] = v;
        }

        // Cross-check 1: L^i_uu equals the pulled-back sheet curvature.
        let mut worst: f64 = 0.0;
        for i in 0..codim {
            let mut pull = 0.0;
            for a in 0..d {
                for b in 0..d {
                    pull += comp.sheet_jet.k[i][(a, b)] * comp.dchi[a] * comp.dchi[b];
                }
            }
            worst = worst.max((l[1 + i] - pull).abs());
        }
        // Cross-check 2: k_uu through the intrinsic sheet route.
        let mut accel_sheet = vec![0.0; d];
        for a in 0..d {
            accel_sheet[a] = comp.ddchi[a];
            for b in 0..d {
                for c in 0..d {
                    accel_sheet[a] += comp.sheet_jet.ws_gamma.get(a, b, c) * comp.dchi[b] * comp.dchi[c];
                }
            }
        }
        let mut k_intrinsic = 0.0;
        for a in 0..d {
            for b in 0..d {
                k_intrinsic -= comp.sheet_jet.gamma[(a, b)] * eta_sheet[a] * accel_sheet[b];
            }
        }
        worst = worst.max((l[0] - k_intrinsic).abs());
        if worst > ALGEBRAIC_TOL {
            return Err(GeomError::Consistency {
                identity: "edge extrinsic curvature routes".into(),
                residual: worst,
                tolerance: ALGEBRAIC_TOL,
            });
        }

        let sigma = if with_sigma {
            let sig = self.frame_twist(&comp, &m)?;
            // Cross-check 3: normal block of sigma is the pulled-back sheet
            // twist; mixed block is the conormal-tangent curvature slice.
            let mut fd_worst: f64 = 0.0;
            for i in 0..codim {
                for j in 0..codim {
                    let mut pull = 0.0;
                    for a in 0..d {
                        pull += comp.sheet_jet.twist[a][(i, j)] * comp.dchi[a];
                    }
                    fd_worst = fd_worst.max((sig[(1 + i, 1 + j)] - pull).abs());
                }
                let mut mixed = 0.0;
                for a in 0..d {
                    for b in 0..d {
                        mixed += comp.sheet_jet.k[i][(a, b)] * eta_sheet[a] * comp.dchi[b];
                    }
                }
                fd_worst = fd_worst.max((sig[(1 + i, 0)] - mixed).abs());
            }
            if fd_worst > FD_TOL {
                return Err(GeomError::Consistency {
                    identity: "edge frame twist vs sheet pullbacks".into(),
                    residual: fd_worst,
                    tolerance: FD_TOL,
                });
            }
            worst = worst.max(fd_worst);
            sig
        } else {
            DMatrix::zeros(1 + codim, 1 + codim)
        };

        // Gamma^u_uu = h^{uu} h(Du dchi, dchi) from exact sheet data.
        let mut dh = 0.0;
        for a in 0..d {
            for b in 0..d {
                dh += 2.0 * comp.sheet_jet.gamma[(a, b)] * accel_sheet[a] * comp.dchi[b];
            }
        }
        let edge_gamma = 0.5 * dh / comp.h;

        Ok(EdgeJet {
            u: comp.u,
            xi: comp.xi,
            sheet: comp.sheet_jet,
            dchi: comp.dchi,
            ddchi: comp.ddchi,
            f: comp.f,
            h: comp.h,
            eta_sheet,
            eta,
            m,
            l,
            sigma,
            edge_gamma,
            worst_identity: worst,
        })
    }

    /// sigma_u^{IJ} by differencing the adapted frame along the edge, signs
    /// aligned to the base frame.
    fn frame_twist(&self, comp: &Composition, m0: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let d = self.sheet.embedding.dim_sheet;
        let n = self.sheet.embedding.dim_ambient;
        let codim = n - d;
        let cols = 1 + codim;
        let noise = self.sheet.embedding.jet_noise().max(1e-13);
        let h_step = numdiff::step_noisy(comp.u, noise);
        let flat = numdiff::try_central_first(
            |t| {
                let c = self.compose(t)?;
                let eta_s = self.conormal(&c)?;
                let mut m = DMatrix::zeros(n, cols);
                for mu in 0..n {
                    for a in 0..d {
                        m[(mu, 0)] += c.sheet_jet.e[(mu, a)] * eta_s[a];
                    }
                    for i in 0..codim {
                        m[(mu, 1 + i)] = c.sheet_jet.normals[(mu, i)];
                    }
                }
                let signs = align_signs(m0, &m)?;
                let mut out = Vec::with_capacity(n * cols);
                for cap in 0..cols {
                    for mu in 0..n {
                        out.push(signs[cap] * m[(mu, cap)]);
                    }
                }
                Ok(out)
            },
            comp.u,
            h_step,
        )?;
        let g = self.sheet.provider.metric_at(&comp.sheet_jet.x)?;
        let amb_gamma = self.sheet.provider.christoffel_at(&comp.sheet_jet.x)?;
        let mut sigma = DMatrix::zeros(cols, cols);
        for cap_i in 0..cols {
            let mut cov = vec![0.0; n];
            for mu in 0..n {
                cov[mu] = flat[cap_i * n + mu];
                for nu in 0..n {
                    for lam in 0..n {
                        cov[mu] += amb_gamma.get(mu, nu, lam) * comp.f[nu] * m0[(lam, cap_i)];
                    }
                }
            }
            for cap_j in 0..cols {
                let mut v = 0.0;
                for mu in 0..n {
                    for nu in 0..n {
                        v += g[(mu, nu)] * m0[(mu, cap_j)] * cov[nu];
                    }
                }
                sigma[(cap_i, cap_j)] = v;
            }
        }
        sigma = 0.5 * (&sigma - sigma.transpose());
        Ok(sigma)
    }

    /// Scalar projections onto the unit tangent and conormal.
    pub fn projections(&self, u: f64) -> Result<BoundaryProjections> {
        let jet = self.jet(u)?;
        let d = self.sheet.embedding.dim_sheet;
        let codim = jet.sheet.codim();
        let s = (-jet.h).sqrt();
        let v_sheet: Vec<f64> = jet.dchi.iter().map(|c| c / s).collect();

        let project =
            |kmat: &DMatrix<f64>, a_vec: &[f64], b_vec: &[f64]| -> f64 {
                let mut out = 0.0;
                for a in 0..d {
                    for b in 0..d {
                        out += kmat[(a, b)] * a_vec[a] * b_vec[b];
                    }
                }
                out
            };

        let mut kperp_par = Vec::with_capacity(codim);
        let mut kperp_perp = Vec::with_capacity(codim);
        let mut kpar_par = Vec::with_capacity(codim);
        let mut recon: f64 = 0.0;
        // Lower v and eta with the sheet metric for the reconstruction.
        let mut v_low = vec![0.0; d];
        let mut eta_low = vec![0.0; d];
        for a in 0..d {
            for b in 0..d {
                v_low[a] += jet.sheet.gamma[(a, b)] * v_sheet[b];
                eta_low[a] += jet.sheet.gamma[(a, b)] * jet.eta_sheet[b];
            }
        }
        for i in 0..codim {
            let km = &jet.sheet.k[i];
            let pp = project(km, &jet.eta_sheet, &v_sheet);
            let qq = project(km, &jet.eta_sheet, &jet.eta_sheet);
            let vv = project(km, &v_sheet, &v_sheet);
            kperp_par.push(pp);
            kperp_perp.push(qq);
            kpar_par.push(vv);
            for a in 0..d {
                for b in 0..d {
                    let rebuilt = vv * v_low[a] * v_low[b]
                        - pp * (v_low[a] * eta_low[b] + eta_low[a] * v_low[b])
                        + qq * eta_low[a] * eta_low[b];
                    recon = recon.max((km[(a, b)] - rebuilt).abs());
                }
            }
        }
        if recon > ALGEBRAIC_TOL {
            return Err(GeomError::Consistency {
                identity: "curvature reconstruction from projections".into(),
                residual: recon,
                tolerance: ALGEBRAIC_TOL,
            });
        }

        let mut omega_par = DMatrix::zeros(codim, codim);
        for i in 0..codim {
            for j in 0..codim {
                let mut w = 0.0;
                for a in 0..d {
                    w += jet.sheet.twist[a][(i, j)] * v_sheet[a];
                }
                omega_par[(i, j)] = w;
            }
        }
        let mut sigma_v = DMatrix::zeros(codim, codim);
        for i in 0..codim {
            for j in 0..codim {
                sigma_v[(i, j)] = jet.sigma[(1 + i, 1 + j)] / s;
            }
        }

        Ok(BoundaryProjections {
            u,
            v_sheet,
            k_trace: jet.l[0] / jet.h,
            k_uu: jet.l[0],
            h: jet.h,
            kperp_par,
            kperp_perp,
            kpar_par,
            omega_par,
            sigma_v,
            recon_residual: recon,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;

    #[test]
    fn helicoid_edge_scalars_match_closed_forms() {
        let om: f64 = 0.45;
        let r: f64 = 1.0;
        let fam = families::helicoid(om, r).axis_framed();
        let ctx = EdgeContext::from_family(&fam).unwrap();
        let u_speed = om * om * r * r;
        for tau in [-0.8, 0.0, 0.6, 1.3] {
            let p = ctx.projections(tau).unwrap();
            let k_expect = -r * om * om / (1.0 - u_speed);
            let kp_expect = -om / (1.0 - u_speed);
            assert!(
                (p.k_trace - k_expect).abs() < 1e-11,
                "k = {}, expected {k_expect}",
                p.k_trace
            );
            assert!(
                (p.kperp_par[0] - kp_expect).abs() < 1e-11,
                "K_perp_par = {}, expected {kp_expect}",
                p.kperp_par[0]
            );
            assert!(p.kperp_perp[0].abs() < 1e-11);
            assert!(p.kpar_par[0].abs() < 1e-11);
            assert!(p.omega_par.amax() < 1e-8);
            assert!((p.h + 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn helicoid_edge_conormal_points_outward() {
        let fam = families::helicoid(0.45, 1.0);
        let ctx = EdgeContext::from_family(&fam).unwrap();
        let jet = ctx.jet(0.4).unwrap();
        assert!(jet.eta_sheet[0].abs() < 1e-12);
        assert!((jet.eta_sheet[1] - 1.0).abs() < 1e-12, "eta = {:?}", jet.eta_sheet);
    }

    #[test]
    fn hyperbolic_edge_has_constant_conormal_acceleration() {
        let alpha = 0.6;
        let fam = families::hyperbolic_edge(alpha, 2.0);
        let ctx = EdgeContext::from_family(&fam).unwrap();
        for tau in [-1.1, 0.0, 0.9] {
            let p = ctx.projections(tau).unwrap();
            assert!(
                (p.k_trace + alpha).abs() < 1e-10,
                "k = {} at tau = {tau}",
                p.k_trace
            );
            assert!(p.kperp_par[0].abs() < 1e-12);
            assert!(p.kperp_perp[0].abs() < 1e-12);
        }
        // Orientation: eta = (-sinh, cosh) in sheet coordinates.
        let jet = ctx.jet(0.7).unwrap();
        let sh = (alpha * 0.7f64).sinh();
        let ch = (alpha * 0.7f64).cosh();
        assert!((jet.eta_sheet[0] + sh).abs() < 1e-10);
        assert!((jet.eta_sheet[1] - ch).abs() < 1e-10);
    }

    #[test]
    fn moving_edge_matches_closed_form_kpar() {
        let (om, r0, rho, nu) = (0.4, 0.9, 0.15, 0.7);
        let fam = families::helicoid_moving_edge(om, r0, rho, nu).axis_framed();
        let ctx = EdgeContext::from_family(&fam).unwrap();
        for t in [-0.6, 0.2, 1.1] {
            let p = ctx.projections(t).unwrap();
            let r = r0 + rho * (nu * t).sin();
            let dr = rho * nu * (nu * t).cos();
            let u = om * om * r * r;
            let expect = -2.0 * om * dr / ((1.0 - dr * dr - u) * (1.0 - u).sqrt());
            assert!(
                (p.kpar_par[0] - expect).abs() < 1e-10,
                "K_par_par = {}, expected {expect}",
                p.kpar_par[0]
            );
        }
    }

    #[test]
    fn cylinder_edge_has_conormal_curvature() {
        let a = 0.8;
        let fam = families::cylinder(a).axis_framed();
        let ctx = EdgeContext::from_family(&fam).unwrap();
        let p = ctx.projections(0.3).unwrap();
        assert!((p.k_trace).abs() < 1e-11);
        assert!((p.kperp_perp[0] + 1.0 / a).abs() < 1e-11, "K_pp = {}", p.kperp_perp[0]);
        assert!(p.kperp_par[0].abs() < 1e-11);
    }

    #[test]
    fn edge_identities_close_across_ensemble() {
        for fam in families::standard_ensemble() {
            let ctx = EdgeContext::from_family(&fam).unwrap();
            for &u in &fam.edge_samples {
                let jet = ctx.jet(u).unwrap();
                assert!(
                    jet.worst_identity < FD_TOL,
                    "{}: worst identity {}",
                    fam.name,
                    jet.worst_identity
                );
                // Frame orthonormality.
                let g = fam.sheet.provider.metric_at(&jet.sheet.x).unwrap();
                let gram = jet.m.transpose() * &g * &jet.m;
                let mut err: f64 = 0.0;
                for i in 0..gram.nrows() {
                    for j in 0..gram.ncols() {
                        let want = if i == j { 1.0 } else { 0.0 };
                        err = err.max((gram[(i, j)] - want).abs());
                    }
                }
                assert!(err < 1e-10, "{}: frame gram error {err}", fam.name);
                // The frame is orthogonal to the edge tangent.
                let fg = jet.m.transpose() * &g * &jet.f;
                assert!(fg.amax() < 1e-9);
            }
        }
    }

    #[test]
    fn twisted_band_edge_sees_normal_twist() {
        let fam = families::twisted_band();
        let ctx = EdgeContext::from_family(&fam).unwrap();
        let p = ctx.projections(0.1).unwrap();
        assert!(p.omega_par.amax() > 1e-3);
        assert!((&p.omega_par - &p.sigma_v).amax() < 1e-6);
    }

    #[test]
    fn spacelike_edge_is_rejected() {
        let fam = families::half_plane();
        let edge = EdgeEmbedding::new(
            "spacelike",
            std::sync::Arc::new(|u: f64| crate::families::EdgeCurveJet {
                xi: vec![0.0, u + 2.0],
                dchi: vec![0.0, 1.0],
                ddchi: vec![0.0, 0.0],
            }),
            -1.0,
            1.0,
            false,
        );
        let ctx = EdgeContext::new(fam.sheet.clone(), edge);
        match ctx.compose(0.0) {
            Err(GeomError::Signature { .. }) => {}
            other => panic!("expected signature error, got {other:?}"),
        }
    }

    #[test]
    fn interior_curve_has_no_orientation() {
        // A curve buried in the sheet interior bounds nothing.
        let fam = families::helicoid(0.45, 1.0);
        let edge = EdgeEmbedding::new(
            "interior",
            std::sync::Arc::new(|u: f64| crate::families::EdgeCurveJet {
                xi: vec![u, 0.5],
                dchi: vec![1.0, 0.0],
                ddchi: vec![0.0, 0.0],
            }),
            -1.0,
            1.0,
            false,
        );
        let ctx = EdgeContext::new(fam.sheet.clone(), edge);
        match ctx.jet(0.2) {
            Err(GeomError::Orientation { .. }) => {}
            other => panic!("expected orientation error, got {other:?}"),
        }
    }
}
