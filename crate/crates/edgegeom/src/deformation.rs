//! First-order response of edge geometry to a deformation split into sheet
//! normal components phi^i and the in-sheet conormal component psi.
//!
//! Responses come in two flavours. Hatted responses are measured against a
//! frame co-moving with the deformation; plain responses add the frame
//! rotation gamma-hat back in. The trace responses include the variation of
//! the inverse edge metric.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::edge::{EdgeContext, EdgeJet};
use crate::error::Result;
use crate::numdiff;
use crate::worldsheet::align_signs;

/// Edge scalar with two parameter derivatives: u -> (value, d/du, d2/du2).
pub type EdgeScalar = Arc<dyn Fn(f64) -> (f64, f64, f64) + Send + Sync>;
/// Plain scalar of the edge parameter.
pub type EdgeValue = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Deformation data on the edge: conormal part psi, normal parts phi^i, and
/// optionally the conormal derivative of the normal parts (which feeds the
/// frame-rotation prediction; absent means the gauge with zero conormal
/// gradient).
#[derive(Clone)]
pub struct EdgeField {
    pub psi: EdgeScalar,
    pub phi: Vec<EdgeScalar>,
    pub eta_grad_phi: Option<Vec<EdgeValue>>,
}

impl EdgeField {
    pub fn zero(codim: usize) -> Self {
        let z: EdgeScalar = Arc::new(|_u| (0.0, 0.0, 0.0));
        EdgeField {
            psi: z.clone(),
            phi: vec![z; codim],
            eta_grad_phi: None,
        }
    }

    pub fn psi_only(psi: EdgeScalar, codim: usize) -> Self {
        let z: EdgeScalar = Arc::new(|_u| (0.0, 0.0, 0.0));
        EdgeField {
            psi,
            phi: vec![z; codim],
            eta_grad_phi: None,
        }
    }

    /// a*F + b*G, used by the linearity checks.
    pub fn linear_combination(a: f64, f: &EdgeField, b: f64, g: &EdgeField) -> Self {
        let combine = |p: &EdgeScalar, q: &EdgeScalar| -> EdgeScalar {
            let (p, q) = (p.clone(), q.clone());
            Arc::new(move |u| {
                let (v1, d1, dd1) = p(u);
                let (v2, d2, dd2) = q(u);
                (a * v1 + b * v2, a * d1 + b * d2, a * dd1 + b * dd2)
            })
        };
        EdgeField {
            psi: combine(&f.psi, &g.psi),
            phi: f
                .phi
                .iter()
                .zip(g.phi.iter())
                .map(|(p, q)| combine(p, q))
                .collect(),
            eta_grad_phi: match (&f.eta_grad_phi, &g.eta_grad_phi) {
                (Some(fp), Some(gp)) => Some(
                    fp.iter()
                        .zip(gp.iter())
                        .map(|(p, q)| {
                            let (p, q) = (p.clone(), q.clone());
                            let out: EdgeValue = Arc::new(move |u| a * p(u) + b * q(u));
                            out
                        })
                        .collect(),
                ),
                (None, None) => None,
                _ => None,
            },
        }
    }
}

/// Ambient curvature projections entering the curved-space variants:
/// all four contract the edge tangent twice against frame legs.
#[derive(Clone, Debug)]
pub struct CurvedTerms {
    /// R(f, eta, f, eta).
    pub t1: f64,
    /// R(f, eta, f, n_i).
    pub t2: Vec<f64>,
    /// R(f, n_i, f, n_j).
    pub t3: DMatrix<f64>,
    /// R(f, n_i, f, eta).
    pub t4: Vec<f64>,
}

/// Background data needed to evaluate the responses at one edge point.
#[derive(Clone)]
pub struct ResponseInputs {
    pub jet: EdgeJet,
    /// Mixed projection K^i_u = eta^a dchi^b K^i_ab per normal.
    pub k_mixed: Vec<f64>,
    /// Conormal-conormal projection K^i_{perp perp} per normal.
    pub k_perp_perp: Vec<f64>,
    /// Plain parameter derivative d(K^i_u)/du, frame-aligned.
    pub dk_mixed: Vec<f64>,
    /// Parameter derivative of the normal-block twist sigma_u^{ij},
    /// frame-aligned; None when the background carries no twist.
    pub dsigma: Option<DMatrix<f64>>,
    /// None for a constant ambient metric: every projection is exactly zero
    /// and the curved terms are skipped outright.
    pub curved: Option<CurvedTerms>,
}

/// All first-order responses at one edge point.
#[derive(Clone, Debug)]
pub struct EdgeResponses {
    /// delta h_uu.
    pub dh: f64,
    /// Hatted delta k_uu.
    pub dk_hat: f64,
    /// Hatted delta K^i_uu.
    pub dbigk_hat: Vec<f64>,
    /// Hatted variation of the trace h^{AB} k_AB.
    pub dk_trace_hat: f64,
    /// Hatted variation of the traces h^{AB} K^i_AB.
    pub dbigk_trace_hat: Vec<f64>,
    /// Predicted frame rotation gamma-hat^{0i}.
    pub gamma_0i: Vec<f64>,
    /// Predicted frame rotation gamma-hat^{ij} in the transport gauge.
    pub gamma_ij: DMatrix<f64>,
    /// Plain trace variations, gamma-hat added back.
    pub dk_trace_plain: f64,
    pub dbigk_trace_plain: Vec<f64>,
}

/// Assemble the background inputs at edge parameter u, including the
/// edge-parameter derivative of the mixed curvature projection.
pub fn response_inputs(ctx: &EdgeContext, u: f64) -> Result<ResponseInputs> {
    let jet = ctx.jet(u)?;
    let d = ctx.sheet.embedding.dim_sheet;
    let codim = jet.sheet.codim();

    let mixed = |jet: &EdgeJet, signs: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; codim];
        for i in 0..codim {
            let mut v = 0.0;
            for a in 0..d {
                for b in 0..d {
                    v += jet.sheet.k[i][(a, b)] * jet.eta_sheet[a] * jet.dchi[b];
                }
            }
            out[i] = signs[i] * v;
        }
        out
    };
    let base_signs = vec![1.0; codim];
    let k_mixed = mixed(&jet, &base_signs);
    let mut k_perp_perp = vec![0.0; codim];
    for i in 0..codim {
        for a in 0..d {
            for b in 0..d {
                k_perp_perp[i] += jet.sheet.k[i][(a, b)] * jet.eta_sheet[a] * jet.eta_sheet[b];
            }
        }
    }

    let noise = ctx.sheet.embedding.jet_noise().max(1e-13);
    let h_step = numdiff::step_noisy(u, noise);
    let base_normals = jet.sheet.normals.clone();
    let dk_mixed = numdiff::try_central_first(
        |t| {
            let j = ctx.jet(t)?;
            let signs = align_signs(&base_normals, &j.sheet.normals)?;
            Ok(mixed(&j, &signs))
        },
        u,
        h_step,
    )?;

    let dsigma = if jet.sigma.amax() < 1e-12 {
        None
    } else {
        let flat = numdiff::try_central_first(
            |t| {
                let j = ctx.jet(t)?;
                let signs = align_signs(&base_normals, &j.sheet.normals)?;
                let mut v = Vec::with_capacity(codim * codim);
                for i in 0..codim {
                    for jn in 0..codim {
                        v.push(signs[i] * signs[jn] * j.sigma[(1 + i, 1 + jn)]);
                    }
                }
                Ok(v)
            },
            u,
            h_step,
        )?;
        Some(DMatrix::from_fn(codim, codim, |i, j| flat[i * codim + j]))
    };

    let curved = if ctx.sheet.provider.constant {
        None
    } else {
        let r = ctx.sheet.provider.riemann_at(&jet.sheet.x)?;
        let n_amb = ctx.sheet.embedding.dim_ambient;
        let contract = |a_leg: &dyn Fn(usize) -> f64, b_leg: &dyn Fn(usize) -> f64| -> f64 {
            let mut s = 0.0;
            for mu in 0..n_amb {
                for nu in 0..n_amb {
                    for si in 0..n_amb {
                        for rho in 0..n_amb {
                            s += r.get(mu, nu, si, rho)
                                * jet.f[mu]
                                * a_leg(nu)
                                * jet.f[si]
                                * b_leg(rho);
                        }
                    }
                }
            }
            s
        };
        let eta = |mu: usize| jet.eta[mu];
        let t1 = contract(&eta, &eta);
        let mut t2 = vec![0.0; codim];
        let mut t4 = vec![0.0; codim];
        let mut t3 = DMatrix::zeros(codim, codim);
        for i in 0..codim {
            let ni = |mu: usize| jet.sheet.normals[(mu, i)];
            t2[i] = contract(&eta, &ni);
            t4[i] = contract(&ni, &eta);
            for j in 0..codim {
                let nj = |mu: usize| jet.sheet.normals[(mu, j)];
                t3[(i, j)] = contract(&ni, &nj);
            }
        }
        Some(CurvedTerms { t1, t2, t3, t4 })
    };

    Ok(ResponseInputs {
        jet,
        k_mixed,
        k_perp_perp,
        dk_mixed,
        dsigma,
        curved,
    })
}

/// delta h_uu = 2 K^i_uu phi_i + 2 k_uu psi.
pub fn deform_edge_metric(inp: &ResponseInputs, field: &EdgeField, u: f64) -> f64 {
    let codim = inp.jet.sheet.codim();
    let (psi, _, _) = (field.psi)(u);
    let mut out = 2.0 * inp.jet.l[0] * psi;
    for i in 0..codim {
        let (phi, _, _) = (field.phi[i])(u);
        out += 2.0 * inp.jet.l[1 + i] * phi;
    }
    out
}

/// Twist-covariant derivative of a normal-indexed set along the edge:
/// (Dt V)^j = dV^j/du + sigma_u^{ij} V^i.
fn twist_covariant(jet: &EdgeJet, vals: &[f64], derivs: &[f64]) -> Vec<f64> {
    let codim = jet.sheet.codim();
    let mut out = vec![0.0; codim];
    for j in 0..codim {
        out[j] = derivs[j];
        for i in 0..codim {
            out[j] += jet.sigma[(1 + i, 1 + j)] * vals[i];
        }
    }
    out
}

/// Hatted delta k_uu.
pub fn deform_k_ab(inp: &ResponseInputs, field: &EdgeField, u: f64) -> f64 {
    let jet = &inp.jet;
    let codim = jet.sheet.codim();
    let (psi, dpsi, ddpsi) = (field.psi)(u);
    let huu = 1.0 / jet.h;

    // -D_u D_u psi with the edge connection.
    let mut out = -(ddpsi - jet.edge_gamma * dpsi);

    // [K^i_u K^i_u + k_uC k^C_u] psi.
    let mut quad = jet.l[0] * huu * jet.l[0];
    for i in 0..codim {
        quad += inp.k_mixed[i] * inp.k_mixed[i];
    }
    out += quad * psi;

    let phi: Vec<f64> = (0..codim).map(|i| (field.phi[i])(u).0).collect();
    let dphi: Vec<f64> = (0..codim).map(|i| (field.phi[i])(u).1).collect();
    let dt_phi = twist_covariant(jet, &phi, &dphi);
    let dt_k = {
        let covariant: Vec<f64> = (0..codim)
            .map(|i| inp.dk_mixed[i] - jet.edge_gamma * inp.k_mixed[i])
            .collect();
        twist_covariant(jet, &inp.k_mixed, &covariant)
    };
    for i in 0..codim {
        // -2 K^i_(u Dt_u) phi_i - (Dt_u K^i_u) phi_i + k_uC K^C_u i phi^i.
        out += -2.0 * inp.k_mixed[i] * dt_phi[i];
        out += -dt_k[i] * phi[i];
        out += jet.l[0] * huu * jet.l[1 + i] * phi[i];
    }

    if let Some(c) = &inp.curved {
        out -= c.t1 * psi;
        for i in 0..codim {
            out -= c.t2[i] * phi[i];
        }
    }
    out
}

/// Hatted delta K^i_uu per normal.
pub fn deform_big_k(inp: &ResponseInputs, field: &EdgeField, u: f64) -> Vec<f64> {
    let jet = &inp.jet;
    let codim = jet.sheet.codim();
    let (psi, dpsi, _) = (field.psi)(u);
    let huu = 1.0 / jet.h;

    let phi: Vec<f64> = (0..codim).map(|i| (field.phi[i])(u).0).collect();
    let dphi: Vec<f64> = (0..codim).map(|i| (field.phi[i])(u).1).collect();
    let ddphi: Vec<f64> = (0..codim).map(|i| (field.phi[i])(u).2).collect();

    // Dt_u Dt_u phi^j = ddphi^j + 2 sigma^{ij} dphi^i + (dsigma^{ij}) phi^i
    //                 + sigma^{ij} sigma^{li} phi^l - Gamma^u_uu Dt phi^j.
    let dt_phi = twist_covariant(jet, &phi, &dphi);
    let d_dt_phi: Vec<f64> = if inp.dsigma.is_none() && jet.sigma.amax() < 1e-12 {
        (0..codim)
            .map(|j| ddphi[j] - jet.edge_gamma * dt_phi[j])
            .collect()
    } else {
        let zero = DMatrix::zeros(codim, codim);
        let ds = inp.dsigma.as_ref().unwrap_or(&zero);
        let mut out = vec![0.0; codim];
        for j in 0..codim {
            let mut v = ddphi[j] - jet.edge_gamma * dt_phi[j];
            for i in 0..codim {
                v += 2.0 * jet.sigma[(1 + i, 1 + j)] * dphi[i];
                v += ds[(i, j)] * phi[i];
                for l in 0..codim {
                    v += jet.sigma[(1 + i, 1 + j)] * jet.sigma[(1 + l, 1 + i)] * phi[l];
                }
            }
            out[j] = v;
        }
        out
    };

    let mut out = vec![0.0; codim];
    for i in 0..codim {
        let mut v = -d_dt_phi[i];
        // [K^i_uC K^C_u j + K^i_u K_u j] phi^j.
        for j in 0..codim {
            v += (jet.l[1 + i] * huu * jet.l[1 + j] + inp.k_mixed[i] * inp.k_mixed[j]) * phi[j];
        }
        // K^i_uC k^C_u psi + (Dt_u K^i_u) psi + 2 K^i_(u D_u) psi.
        v += jet.l[1 + i] * huu * jet.l[0] * psi;
        let dt_k_i = {
            let mut w = inp.dk_mixed[i] - jet.edge_gamma * inp.k_mixed[i];
            for j in 0..codim {
                w += jet.sigma[(1 + j, 1 + i)] * inp.k_mixed[j];
            }
            w
        };
        v += dt_k_i * psi;
        v += 2.0 * inp.k_mixed[i] * dpsi;
        if let Some(c) = &inp.curved {
            v -= c.t4[i] * psi;
            for j in 0..codim {
                v -= c.t3[(i, j)] * phi[j];
            }
        }
        out[i] = v;
    }
    out
}

/// Hatted variation of the trace h^{AB} k_AB, including the inverse-metric
/// response.
pub fn deform_k_trace(inp: &ResponseInputs, field: &EdgeField, u: f64) -> f64 {
    let huu = 1.0 / inp.jet.h;
    let dh = deform_edge_metric(inp, field, u);
    -huu * dh * huu * inp.jet.l[0] + huu * deform_k_ab(inp, field, u)
}

/// Hatted variation of the traces h^{AB} K^i_AB.
pub fn deform_big_k_trace(inp: &ResponseInputs, field: &EdgeField, u: f64) -> Vec<f64> {
    let huu = 1.0 / inp.jet.h;
    let dh = deform_edge_metric(inp, field, u);
    let dbk = deform_big_k(inp, field, u);
    (0..inp.jet.sheet.codim())
        .map(|i| -huu * dh * huu * inp.jet.l[1 + i] + huu * dbk[i])
        .collect()
}

/// Predicted frame rotation: gamma-hat^{0i} = -K^i_{perp perp} psi
/// + (eta . grad) phi^i, and the transport-gauge gamma-hat^{ij}
/// = psi v^a omega_a^{ij}.
pub fn deformation_connection(
    inp: &ResponseInputs,
    field: &EdgeField,
    u: f64,
) -> (Vec<f64>, DMatrix<f64>) {
    let codim = inp.jet.sheet.codim();
    let (psi, _, _) = (field.psi)(u);
    let mut g0i = vec![0.0; codim];
    for i in 0..codim {
        g0i[i] = -inp.k_perp_perp[i] * psi;
        if let Some(grads) = &field.eta_grad_phi {
            g0i[i] += grads[i](u);
        }
    }
    let s = (-inp.jet.h).sqrt();
    let mut gij = DMatrix::zeros(codim, codim);
    for i in 0..codim {
        for j in 0..codim {
            gij[(i, j)] = psi * inp.jet.sigma[(1 + i, 1 + j)] / s;
        }
    }
    (g0i, gij)
}

/// Full response bundle at one edge point. Plain traces add the frame
/// rotation contributions back onto the hatted ones.
pub fn all_responses(inp: &ResponseInputs, field: &EdgeField, u: f64) -> EdgeResponses {
    let codim = inp.jet.sheet.codim();
    let huu = 1.0 / inp.jet.h;
    let dh = deform_edge_metric(inp, field, u);
    let dk_hat = deform_k_ab(inp, field, u);
    let dbigk_hat = deform_big_k(inp, field, u);
    let dk_trace_hat = -huu * dh * huu * inp.jet.l[0] + huu * dk_hat;
    let dbigk_trace_hat: Vec<f64> = (0..codim)
        .map(|i| -huu * dh * huu * inp.jet.l[1 + i] + huu * dbigk_hat[i])
        .collect();
    let (gamma_0i, gamma_ij) = deformation_connection(inp, field, u);

    let trace_k: f64 = huu * inp.jet.l[0];
    let trace_big: Vec<f64> = (0..codim).map(|i| huu * inp.jet.l[1 + i]).collect();
    let mut dk_trace_plain = dk_trace_hat;
    for i in 0..codim {
        dk_trace_plain += gamma_0i[i] * trace_big[i];
    }
    let mut dbigk_trace_plain = dbigk_trace_hat.clone();
    for i in 0..codim {
        for j in 0..codim {
            dbigk_trace_plain[i] += gamma_ij[(i, j)] * trace_big[j];
        }
        dbigk_trace_plain[i] += -gamma_0i[i] * trace_k;
    }

    EdgeResponses {
        dh,
        dk_hat,
        dbigk_hat,
        dk_trace_hat,
        dbigk_trace_hat,
        gamma_0i,
        gamma_ij,
        dk_trace_plain,
        dbigk_trace_plain,
    }
}

/// The edge as a hypersurface of its own sheet: for a pure-psi deformation
/// the plain k_uu response collapses to
/// -D_u D_u psi + [k_uC k^C_u - Rsheet(dchi, eta, dchi, eta)] psi.
/// Returns (general route, hypersurface route).
pub fn hypersurface_k_response(
    ctx: &EdgeContext,
    inp: &ResponseInputs,
    psi: &EdgeScalar,
    u: f64,
) -> Result<(f64, f64)> {
    let codim = inp.jet.sheet.codim();
    let field = EdgeField::psi_only(psi.clone(), codim);
    let hat = deform_k_ab(inp, &field, u);
    let (g0i, _) = deformation_connection(inp, &field, u);
    let mut general = hat;
    for i in 0..codim {
        general += g0i[i] * inp.jet.l[1 + i];
    }

    let (p, dp, ddp) = psi(u);
    let huu = 1.0 / inp.jet.h;
    let riem = ctx.sheet.intrinsic_riemann(&inp.jet.xi)?;
    let d = ctx.sheet.embedding.dim_sheet;
    let mut proj = 0.0;
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    proj += riem.get(a, b, c, e)
                        * inp.jet.dchi[a]
                        * inp.jet.eta_sheet[b]
                        * inp.jet.dchi[c]
                        * inp.jet.eta_sheet[e];
                }
            }
        }
    }
    let hyper = -(ddp - inp.jet.edge_gamma * dp)
        + (inp.jet.l[0] * huu * inp.jet.l[0] - proj) * p;
    Ok((general, hyper))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;

    fn harmonic(omega: f64, amp: f64) -> EdgeScalar {
        Arc::new(move |u| {
            (
                amp * (omega * u).sin(),
                amp * omega * (omega * u).cos(),
                -amp * omega * omega * (omega * u).sin(),
            )
        })
    }

    #[test]
    fn flat_edge_trace_response_is_psi_ddot() {
        let fam = families::half_plane();
        let ctx = EdgeContext::from_family(&fam).unwrap();
        let u = 0.4;
        let inp = response_inputs(&ctx, u).unwrap();
        let om = 1.7;
        let field = EdgeField::psi_only(harmonic(om, 1.0), 2);
        let dk = deform_k_trace(&inp, &field, u);
        let expect = -om * om * (om * u).sin();
        assert!((dk - expect).abs() < 1e-12, "dk = {dk}, expected {expect}");
    }

    #[test]
    fn responses_vanish_for_zero_field() {
        let fam = families::helicoid(0.45, 1.0);
        let ctx = EdgeContext::from_family(&fam).unwrap();
        let inp = response_inputs(&ctx, 0.3).unwrap();
        let field = EdgeField::zero(2);
        let r = all_responses(&inp, &field, 0.3);
        assert_eq!(r.dh, 0.0);
        assert_eq!(r.dk_hat, 0.0);
        assert!(r.dbigk_hat.iter().all(|v| *v == 0.0));
        assert!(r.dk_trace_plain == 0.0);
    }

    #[test]
    fn responses_are_linear_in_the_field() {
        let fam = families::helicoid(0.45, 1.0);
        let ctx = EdgeContext::from_family(&fam).unwrap();
        let u = 0.6;
        let inp = response_inputs(&ctx, u).unwrap();
        let f1 = EdgeField {
            psi: harmonic(1.3, 0.7),
            phi: vec![harmonic(0.9, 1.1), harmonic(2.1, 0.4)],
            eta_grad_phi: None,
        };
        let f2 = EdgeField {
            psi: harmonic(2.4, -0.5),
            phi: vec![harmonic(1.6, 0.3), harmonic(0.6, -0.8)],
            eta_grad_phi: None,
        };
        let (a, b) = (0.85, -1.4);
        let combo = EdgeField::linear_combination(a, &f1, b, &f2);
        let r1 = all_responses(&inp, &f1, u);
        let r2 = all_responses(&inp, &f2, u);
        let rc = all_responses(&inp, &combo, u);
        assert!((rc.dh - (a * r1.dh + b * r2.dh)).abs() < 1e-12);
        assert!((rc.dk_hat - (a * r1.dk_hat + b * r2.dk_hat)).abs() < 1e-12);
        for i in 0..2 {
            assert!(
                (rc.dbigk_hat[i] - (a * r1.dbigk_hat[i] + b * r2.dbigk_hat[i])).abs() < 1e-12
            );
            assert!(
                (rc.dbigk_trace_plain[i]
                    - (a * r1.dbigk_trace_plain[i] + b * r2.dbigk_trace_plain[i]))
                    .abs()
                    < 1e-12
            );
        }
        assert!(
            (rc.dk_trace_plain - (a * r1.dk_trace_plain + b * r2.dk_trace_plain)).abs() < 1e-12
        );
    }

    #[test]
    fn hypersurface_routes_agree() {
        for fam in [
            families::helicoid(0.45, 1.0),
            families::catenary(1.1),
            families::twisted_band(),
        ] {
            let ctx = EdgeContext::from_family(&fam).unwrap();
            let u = fam.edge_samples[1];
            let inp = response_inputs(&ctx, u).unwrap();
            let psi = harmonic(1.2, 0.9);
            let (general, hyper) = hypersurface_k_response(&ctx, &inp, &psi, u).unwrap();
            assert!(
                (general - hyper).abs() < 1e-7,
                "{}: general {general} vs hypersurface {hyper}",
                fam.name
            );
        }
    }

    #[test]
    fn cylinder_edge_frame_rotation_prediction() {
        let a = 0.8;
        let fam = families::cylinder(a).axis_framed();
        let ctx = EdgeContext::from_family(&fam).unwrap();
        let u = 0.3;
        let inp = response_inputs(&ctx, u).unwrap();
        let field = EdgeField::psi_only(harmonic(1.0, 1.0), 2);
        let (g0i, _) = deformation_connection(&inp, &field, u);
        // K_perp_perp = -1/a on the first normal, so gamma^{01} = psi / a.
        let psi = (1.0f64 * u).sin();
        assert!((g0i[0] - psi / a).abs() < 1e-10, "g0 = {:?}", g0i);
        assert!(g0i[1].abs() < 1e-10);
    }

    #[test]
    fn helicoid_edge_endpoint_structure() {
        // With constant background scalars the trace responses reduce to
        // the closed endpoint form; spot-check the psi channel.
        let om: f64 = 0.45;
        let r: f64 = 1.0;
        let fam = families::helicoid(om, r);
        let ctx = EdgeContext::from_family(&fam).unwrap();
        let u_speed = om * om * r * r;
        let k = -r * om * om / (1.0 - u_speed);
        let b = -om / (1.0 - u_speed);
        let tau = 0.5;
        let inp = response_inputs(&ctx, tau).unwrap();
        let om_f = 1.3;
        let field = EdgeField::psi_only(harmonic(om_f, 1.0), 2);
        let r_all = all_responses(&inp, &field, tau);
        // delta k = psi-ddot - (b^2 + k^2) psi for a psi-only deformation.
        let psi = (om_f * tau).sin();
        let ddpsi = -om_f * om_f * psi;
        let expect = ddpsi - (b * b + k * k) * psi;
        assert!(
            (r_all.dk_trace_plain - expect).abs() < 1e-10,
            "dk trace = {}, expected {expect}",
            r_all.dk_trace_plain
        );
    }
}
