//! Embedded worldsheet geometry: induced metric, normal frame, extrinsic
//! curvature, twist and the intrinsic curvature of the sheet.
//!
//! Conventions: K^i_{ab} = -g(n^i, D_a e_b) and omega_a^{ij} = g(n^j, D_a n^i).
//! Normal frames come from Gram-Schmidt over the coordinate axes taken in
//! index order, with each accepted vector sign-fixed so that its first
//! component above 1e-8 in magnitude is positive.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};
use crate::numdiff;
use crate::spacetime::MetricProvider;
use crate::tensor::{Tensor3, Tensor4};

pub type MapFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type JetFn = Arc<dyn Fn(&[f64]) -> EmbeddingJet + Send + Sync>;
pub type EdgeFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

const SKIP_TOL: f64 = 1e-8;
const SIGN_TOL: f64 = 1e-8;

/// Second-order jet of an embedding map at one sheet point.
#[derive(Clone, Debug)]
pub struct EmbeddingJet {
    /// Ambient position X^mu.
    pub x: Vec<f64>,
    /// Tangents e^mu_a as columns, N x D.
    pub e: DMatrix<f64>,
    /// Coordinate second derivatives d^2 X^mu / dxi^a dxi^b, laid out
    /// (mu, a, b).
    pub dde: Tensor3,
}

/// Parameter-space domain of a sheet: a coordinate box plus an optional edge
/// function, negative or zero inside.
#[derive(Clone)]
pub struct SheetDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub edge: Option<EdgeFn>,
}

impl SheetDomain {
    pub fn rect(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        SheetDomain {
            lo,
            hi,
            edge: None,
        }
    }

    pub fn with_edge(lo: Vec<f64>, hi: Vec<f64>, edge: EdgeFn) -> Self {
        SheetDomain {
            lo,
            hi,
            edge: Some(edge),
        }
    }

    pub fn contains(&self, xi: &[f64]) -> bool {
        let inside_box = xi
            .iter()
            .zip(self.lo.iter().zip(self.hi.iter()))
            .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi);
        if !inside_box {
            return false;
        }
        match &self.edge {
            // Edge worldlines land on f = 0 by construction, but the curve
            // and the edge function round through different routes; admit
            // rounding-level spill so boundary points are never rejected.
            Some(f) => f(xi) <= 1e-12 * self.diameter().max(1.0),
            None => true,
        }
    }

    /// Diameter of the bounding box, clamping unbounded axes to unit size.
    pub fn diameter(&self) -> f64 {
        self.lo
            .iter()
            .zip(self.hi.iter())
            .map(|(lo, hi)| {
                let w = hi - lo;
                if w.is_finite() {
                    w
                } else {
                    1.0
                }
            })
            .fold(0.0f64, |acc, w| (acc * acc + w * w).sqrt())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeMode {
    Analytic,
    Numeric,
}

/// An embedding of a D-dimensional sheet into an N-dimensional spacetime.
#[derive(Clone)]
pub struct Embedding {
    pub name: String,
    pub dim_sheet: usize,
    pub dim_ambient: usize,
    jets: JetFn,
    pub domain: SheetDomain,
    pub mode: DerivativeMode,
}

impl Embedding {
    /// Analytic jets supplied by the caller.
    pub fn from_jets(
        name: impl Into<String>,
        dim_sheet: usize,
        dim_ambient: usize,
        jets: JetFn,
        domain: SheetDomain,
    ) -> Self {
        Embedding {
            name: name.into(),
            dim_sheet,
            dim_ambient,
            jets,
            domain,
            mode: DerivativeMode::Analytic,
        }
    }

    /// Jets built by differencing a bare position map.
    pub fn from_map(
        name: impl Into<String>,
        dim_sheet: usize,
        dim_ambient: usize,
        map: MapFn,
        domain: SheetDomain,
    ) -> Self {
        let d = dim_sheet;
        let n = dim_ambient;
        let jets: JetFn = Arc::new(move |xi: &[f64]| numeric_jet(&map, xi, d, n));
        Embedding {
            name: name.into(),
            dim_sheet,
            dim_ambient,
            jets,
            domain,
            mode: DerivativeMode::Numeric,
        }
    }

    pub fn jet(&self, xi: &[f64]) -> EmbeddingJet {
        (self.jets)(xi)
    }

    /// Same embedding restricted to a different parameter domain.
    pub fn with_domain(&self, domain: SheetDomain) -> Self {
        Embedding {
            name: self.name.clone(),
            dim_sheet: self.dim_sheet,
            dim_ambient: self.dim_ambient,
            jets: self.jets.clone(),
            domain,
            mode: self.mode,
        }
    }

    /// Jet evaluation noise scale, used to size downstream stencils.
    pub fn jet_noise(&self) -> f64 {
        match self.mode {
            DerivativeMode::Analytic => 1e-14,
            DerivativeMode::Numeric => 1e-9,
        }
    }
}

fn numeric_jet(map: &MapFn, xi: &[f64], d: usize, n: usize) -> EmbeddingJet {
    let x = map(xi);
    let mut e = DMatrix::zeros(n, d);
    for a in 0..d {
        let h = numdiff::step_first(xi[a]);
        let col = numdiff::central_first(
            |t| {
                let mut p = xi.to_vec();
                p[a] = t;
                map(&p)
            },
            xi[a],
            h,
        );
        for mu in 0..n {
            e[(mu, a)] = col[mu];
        }
    }
    let mut dde = Tensor3::zeros(n, d, d);
    for a in 0..d {
        let h = numdiff::step_second(xi[a]);
        let col = numdiff::central_second(
            |t| {
                let mut p = xi.to_vec();
                p[a] = t;
                map(&p)
            },
            xi[a],
            h,
        );
        for mu in 0..n {
            dde.set(mu, a, a, col[mu]);
        }
        for b in (a + 1)..d {
            let ha = numdiff::step_second(xi[a]);
            let hb = numdiff::step_second(xi[b]);
            let col = numdiff::central_mixed(
                |s, t| {
                    let mut p = xi.to_vec();
                    p[a] = s;
                    p[b] = t;
                    map(&p)
                },
                xi[a],
                xi[b],
                ha,
                hb,
            );
            for mu in 0..n {
                dde.set(mu, a, b, col[mu]);
                dde.set(mu, b, a, col[mu]);
            }
        }
    }
    EmbeddingJet { x, e, dde }
}

/// Everything local geometry needs at one sheet point.
#[derive(Clone, Debug)]
pub struct WorldsheetJet {
    pub xi: Vec<f64>,
    pub x: Vec<f64>,
    /// Tangents, N x D.
    pub e: DMatrix<f64>,
    pub dde: Tensor3,
    pub gamma: DMatrix<f64>,
    pub gamma_inv: DMatrix<f64>,
    /// Sheet Christoffels Gamma^a_{bc}.
    pub ws_gamma: Tensor3,
    /// Normal frame, N x (N - D), orthonormal and spacelike.
    pub normals: DMatrix<f64>,
    /// Extrinsic curvature, one D x D symmetric matrix per normal.
    pub k: Vec<DMatrix<f64>>,
    /// Mean curvature K^i = gamma^{ab} K^i_{ab}.
    pub mean_k: Vec<f64>,
    /// Twist omega_a^{ij}, one antisymmetric (N-D) x (N-D) matrix per sheet
    /// direction a.
    pub twist: Vec<DMatrix<f64>>,
}

impl WorldsheetJet {
    pub fn codim(&self) -> usize {
        self.normals.ncols()
    }

    /// Scalar K^i_{ab} K_i^{ab}, frame-rotation invariant.
    pub fn k_squared(&self) -> f64 {
        let d = self.gamma.nrows();
        let mut s = 0.0;
        for k in &self.k {
            for a in 0..d {
                for b in 0..d {
                    for c in 0..d {
                        for e in 0..d {
                            s += self.gamma_inv[(a, c)]
                                * self.gamma_inv[(b, e)]
                                * k[(a, b)]
                                * k[(c, e)];
                        }
                    }
                }
            }
        }
        s
    }
}

/// Where the Gram-Schmidt trial directions for the normal frame come from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FrameSeeding {
    /// A fixed well-spread orthonormal bank. No trial direction is ever
    /// structurally tangent to a reasonable sheet, so the frame stays smooth
    /// when the embedding itself is perturbed. The default.
    #[default]
    Generic,
    /// Coordinate axes in index order. For configurations aligned with the
    /// lab axes this reproduces the adapted frame that closed-form component
    /// values are quoted in, but axis directions can sit exactly tangent and
    /// then respond discontinuously to embedding perturbations.
    Axes,
}

/// A sheet paired with the ambient metric it lives in.
#[derive(Clone)]
pub struct Worldsheet {
    pub provider: MetricProvider,
    pub embedding: Embedding,
    pub frame_seeding: FrameSeeding,
}

/// Frame before twist: the cheap, stencil-free part of the jet.
pub(crate) struct FrameData {
    pub x: Vec<f64>,
    pub e: DMatrix<f64>,
    pub dde: Tensor3,
    pub gamma: DMatrix<f64>,
    pub gamma_inv: DMatrix<f64>,
    pub ws_gamma: Tensor3,
    pub normals: DMatrix<f64>,
    pub k: Vec<DMatrix<f64>>,
}

impl Worldsheet {
    pub fn new(provider: MetricProvider, embedding: Embedding) -> Self {
        Worldsheet {
            provider,
            embedding,
            frame_seeding: FrameSeeding::default(),
        }
    }

    /// Same sheet with a different normal-frame seeding policy.
    pub fn with_frame_seeding(mut self, seeding: FrameSeeding) -> Self {
        self.frame_seeding = seeding;
        self
    }

    pub fn jet(&self, xi: &[f64]) -> Result<WorldsheetJet> {
        let d = self.embedding.dim_sheet;
        let seeds: Vec<usize> = (0..self.embedding.dim_ambient).collect();
        self.jet_with_seeds(xi, &seeds, d)
    }

    /// Same as `jet` but with the Gram-Schmidt seed directions tried in the
    /// given order, exposing the normal-frame gauge freedom.
    pub fn jet_with_seeds(&self, xi: &[f64], seeds: &[usize], _d: usize) -> Result<WorldsheetJet> {
        let frame = self.frame_data(xi, seeds)?;
        let twist = self.twist_of_frame(xi, &frame, seeds)?;
        let d = self.embedding.dim_sheet;
        let mean_k = frame
            .k
            .iter()
            .map(|kmat| {
                let mut s = 0.0;
                for a in 0..d {
                    for b in 0..d {
                        s += frame.gamma_inv[(a, b)] * kmat[(a, b)];
                    }
                }
                s
            })
            .collect();
        Ok(WorldsheetJet {
            xi: xi.to_vec(),
            x: frame.x,
            e: frame.e,
            dde: frame.dde,
            gamma: frame.gamma,
            gamma_inv: frame.gamma_inv,
            ws_gamma: frame.ws_gamma,
            normals: frame.normals,
            k: frame.k,
            mean_k,
            twist,
        })
    }

    pub(crate) fn frame_data(&self, xi: &[f64], seeds: &[usize]) -> Result<FrameData> {
        let d = self.embedding.dim_sheet;
        let n = self.embedding.dim_ambient;
        if !self.embedding.domain.contains(xi) {
            return Err(GeomError::OutsideDomain {
                name: self.embedding.name.clone(),
                point: xi.to_vec(),
            });
        }
        let jet = self.embedding.jet(xi);
        let g = self.provider.metric_at(&jet.x)?;
        let gamma = induced_metric(&g, &jet.e);
        let det = gamma.clone().lu().determinant();
        if det.abs() < 1e-12 {
            return Err(GeomError::DegenerateWorldsheet { point: xi.to_vec() });
        }
        let eig = gamma.clone().symmetric_eigen();
        let negatives = eig.eigenvalues.iter().filter(|&&v| v < 0.0).count();
        if negatives != 1 {
            return Err(GeomError::Signature {
                point: xi.to_vec(),
                negatives,
            });
        }
        let gamma_inv = gamma
            .clone()
            .try_inverse()
            .ok_or(GeomError::DegenerateWorldsheet { point: xi.to_vec() })?;
        let bank = match self.frame_seeding {
            FrameSeeding::Generic => seed_directions(n),
            FrameSeeding::Axes => DMatrix::identity(n, n),
        };
        let normals = normal_frame(&g, &jet.e, &gamma_inv, seeds, &bank)?;

        let amb_gamma = self.provider.christoffel_at(&jet.x)?;
        // Covariant tangent derivative D_a e_b, components
        // dde + Gamma^mu_{nu lam} e_a^nu e_b^lam.
        let mut cov = Tensor3::zeros(n, d, d);
        for mu in 0..n {
            for a in 0..d {
                for b in 0..d {
                    let mut v = jet.dde.get(mu, a, b);
                    for nu in 0..n {
                        for lam in 0..n {
                            v += amb_gamma.get(mu, nu, lam) * jet.e[(nu, a)] * jet.e[(lam, b)];
                        }
                    }
                    cov.set(mu, a, b, v);
                }
            }
        }

        let codim = n - d;
        let mut k = Vec::with_capacity(codim);
        for i in 0..codim {
            let mut km = DMatrix::zeros(d, d);
            for a in 0..d {
                for b in 0..d {
                    let mut v = 0.0;
                    for mu in 0..n {
                        for nu in 0..n {
                            v -= g[(mu, nu)] * normals[(mu, i)] * cov.get(nu, a, b);
                        }
                    }
                    km[(a, b)] = v;
                }
            }
            km = 0.5 * (&km + km.transpose());
            k.push(km);
        }

        // Sheet Christoffels by the chain rule: d_c gamma_ab is assembled
        // from exact second derivatives and the ambient metric gradient, so
        // no extra differencing enters here.
        let dg = self.provider.metric_grad_at(&jet.x)?;
        let mut dgamma = Tensor3::zeros(d, d, d);
        for c in 0..d {
            for a in 0..d {
                for b in 0..d {
                    let mut v = 0.0;
                    for mu in 0..n {
                        for nu in 0..n {
                            v += g[(mu, nu)]
                                * (jet.dde.get(mu, c, a) * jet.e[(nu, b)]
                                    + jet.e[(mu, a)] * jet.dde.get(nu, c, b));
                        }
                    }
                    for sig in 0..n {
                        for mu in 0..n {
                            for nu in 0..n {
                                v += dg[sig][(mu, nu)]
                                    * jet.e[(sig, c)]
                                    * jet.e[(mu, a)]
                                    * jet.e[(nu, b)];
                            }
                        }
                    }
                    dgamma.set(c, a, b, v);
                }
            }
        }
        let mut ws_gamma = Tensor3::zeros(d, d, d);
        for a in 0..d {
            for b in 0..d {
                for c in b..d {
                    let mut s = 0.0;
                    for e in 0..d {
                        s += gamma_inv[(a, e)]
                            * (dgamma.get(b, e, c) + dgamma.get(c, e, b) - dgamma.get(e, b, c));
                    }
                    let v = 0.5 * s;
                    ws_gamma.set(a, b, c, v);
                    ws_gamma.set(a, c, b, v);
                }
            }
        }

        Ok(FrameData {
            x: jet.x,
            e: jet.e,
            dde: jet.dde,
            gamma,
            gamma_inv,
            ws_gamma,
            normals,
            k,
        })
    }

    /// Twist via frame differencing along each sheet direction, with signs
    /// aligned to the base frame before the quotient is formed.
    fn twist_of_frame(
        &self,
        xi: &[f64],
        base: &FrameData,
        seeds: &[usize],
    ) -> Result<Vec<DMatrix<f64>>> {
        let d = self.embedding.dim_sheet;
        let n = self.embedding.dim_ambient;
        let codim = n - d;
        let g = self.provider.metric_at(&base.x)?;
        let amb_gamma = self.provider.christoffel_at(&base.x)?;
        let noise = self.embedding.jet_noise();
        let mut twist = Vec::with_capacity(d);
        for a in 0..d {
            let h = numdiff::step_noisy(xi[a], noise);
            let dn_flat = numdiff::try_central_first(
                |t| {
                    let mut p = xi.to_vec();
                    p[a] = t;
                    let f = self.frame_data_unchecked(&p, seeds)?;
                    let aligned = align_frame(&base.normals, &f.normals)?;
                    let mut flat = Vec::with_capacity(n * codim);
                    for i in 0..codim {
                        for mu in 0..n {
                            flat.push(aligned[(mu, i)]);
                        }
                    }
                    Ok(flat)
                },
                xi[a],
                h,
            )?;
            let mut om = DMatrix::zeros(codim, codim);
            for i in 0..codim {
                // D_a n^i = partial_a n^i + Gamma^mu_{nu lam} e_a^nu n^{i lam}.
                let mut cov = vec![0.0; n];
                for mu in 0..n {
                    cov[mu] = dn_flat[i * n + mu];
                    for nu in 0..n {
                        for lam in 0..n {
                            cov[mu] +=
                                amb_gamma.get(mu, nu, lam) * base.e[(nu, a)] * base.normals[(lam, i)];
                        }
                    }
                }
                for j in 0..codim {
                    let mut v = 0.0;
                    for mu in 0..n {
                        for nu in 0..n {
                            v += g[(mu, nu)] * base.normals[(mu, j)] * cov[nu];
                        }
                    }
                    om[(i, j)] = v;
                }
            }
            om = 0.5 * (&om - om.transpose());
            twist.push(om);
        }
        Ok(twist)
    }

    /// Frame data without the sheet-domain check, for stencil legs that may
    /// sit just outside the box.
    fn frame_data_unchecked(&self, xi: &[f64], seeds: &[usize]) -> Result<FrameData> {
        let widened = Worldsheet {
            provider: self.provider.clone(),
            embedding: Embedding {
                name: self.embedding.name.clone(),
                dim_sheet: self.embedding.dim_sheet,
                dim_ambient: self.embedding.dim_ambient,
                jets: self.embedding.jets.clone(),
                domain: SheetDomain::rect(
                    vec![f64::NEG_INFINITY; self.embedding.dim_sheet],
                    vec![f64::INFINITY; self.embedding.dim_sheet],
                ),
                mode: self.embedding.mode,
            },
            frame_seeding: self.frame_seeding,
        };
        widened.frame_data(xi, seeds)
    }

    /// Intrinsic lowered curvature of the sheet metric, one differencing
    /// layer over the exactly assembled sheet Christoffels.
    pub fn intrinsic_riemann(&self, xi: &[f64]) -> Result<Tensor4> {
        let d = self.embedding.dim_sheet;
        let seeds: Vec<usize> = (0..self.embedding.dim_ambient).collect();
        let base = self.frame_data(xi, &seeds)?;
        let noise = self.embedding.jet_noise().max(1e-13);
        let mut dgam = vec![Tensor3::zeros(d, d, d); d];
        for c in 0..d {
            let h = numdiff::step_noisy(xi[c], noise);
            let flat = numdiff::try_central_first(
                |t| {
                    let mut p = xi.to_vec();
                    p[c] = t;
                    let f = self.frame_data_unchecked(&p, &seeds)?;
                    let mut v = Vec::with_capacity(d * d * d);
                    for a in 0..d {
                        for b in 0..d {
                            for e in 0..d {
                                v.push(f.ws_gamma.get(a, b, e));
                            }
                        }
                    }
                    Ok(v)
                },
                xi[c],
                h,
            )?;
            let mut t3 = Tensor3::zeros(d, d, d);
            let mut idx = 0;
            for a in 0..d {
                for b in 0..d {
                    for e in 0..d {
                        t3.set(a, b, e, flat[idx]);
                        idx += 1;
                    }
                }
            }
            dgam[c] = t3;
        }
        let mut upper = Tensor4::zeros(d, d, d, d);
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for e in 0..d {
                        let mut v = dgam[c].get(a, e, b) - dgam[e].get(a, c, b);
                        for f in 0..d {
                            v += base.ws_gamma.get(a, c, f) * base.ws_gamma.get(f, e, b)
                                - base.ws_gamma.get(a, e, f) * base.ws_gamma.get(f, c, b);
                        }
                        upper.set(a, b, c, e, v);
                    }
                }
            }
        }
        let mut lowered = Tensor4::zeros(d, d, d, d);
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for e in 0..d {
                        let mut v = 0.0;
                        for f in 0..d {
                            v += base.gamma[(a, f)] * upper.get(f, b, c, e);
                        }
                        lowered.set(a, b, c, e, v);
                    }
                }
            }
        }
        lowered.antisymmetrise_pairs();
        Ok(lowered)
    }

    /// Worst residual of the Gauss relation
    /// R_abcd(intrinsic) = R(e,e,e,e) + sum_i (K^i_ac K^i_bd - K^i_ad K^i_bc).
    pub fn gauss_residual(&self, xi: &[f64]) -> Result<f64> {
        let d = self.embedding.dim_sheet;
        let n = self.embedding.dim_ambient;
        let seeds: Vec<usize> = (0..n).collect();
        let base = self.frame_data(xi, &seeds)?;
        let intrinsic = self.intrinsic_riemann(xi)?;
        let ambient = self.provider.riemann_at(&base.x)?;
        let codim = n - d;
        let mut worst = 0.0f64;
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for e in 0..d {
                        let mut rhs = 0.0;
                        for mu in 0..n {
                            for nu in 0..n {
                                for sig in 0..n {
                                    for rho in 0..n {
                                        rhs += ambient.get(mu, nu, sig, rho)
                                            * base.e[(mu, a)]
                                            * base.e[(nu, b)]
                                            * base.e[(sig, c)]
                                            * base.e[(rho, e)];
                                    }
                                }
                            }
                        }
                        for i in 0..codim {
                            rhs += base.k[i][(a, c)] * base.k[i][(b, e)]
                                - base.k[i][(a, e)] * base.k[i][(b, c)];
                        }
                        worst = worst.max((intrinsic.get(a, b, c, e) - rhs).abs());
                    }
                }
            }
        }
        Ok(worst)
    }

    /// Worst residual of the Codazzi relation
    /// Dt_a K^j_bc - Dt_b K^j_ac = -R(n^j, e_c, e_a, e_b),
    /// where Dt carries both the sheet connection and the twist.
    pub fn codazzi_residual(&self, xi: &[f64]) -> Result<f64> {
        let d = self.embedding.dim_sheet;
        let n = self.embedding.dim_ambient;
        let codim = n - d;
        let seeds: Vec<usize> = (0..n).collect();
        let base = self.frame_data(xi, &seeds)?;
        let jet = self.jet(xi)?;
        let noise = self.embedding.jet_noise();

        // partial_a K^i_bc with frame alignment across the stencil.
        let mut dk = vec![Tensor3::zeros(codim, d, d); d];
        for a in 0..d {
            let h = numdiff::step_noisy(xi[a], noise);
            let flat = numdiff::try_central_first(
                |t| {
                    let mut p = xi.to_vec();
                    p[a] = t;
                    let f = self.frame_data_unchecked(&p, &seeds)?;
                    let signs = align_signs(&base.normals, &f.normals)?;
                    let mut v = Vec::with_capacity(codim * d * d);
                    for i in 0..codim {
                        for b in 0..d {
                            for c in 0..d {
                                v.push(signs[i] * f.k[i][(b, c)]);
                            }
                        }
                    }
                    Ok(v)
                },
                xi[a],
                h,
            )?;
            let mut t3 = Tensor3::zeros(codim, d, d);
            let mut idx = 0;
            for i in 0..codim {
                for b in 0..d {
                    for c in 0..d {
                        t3.set(i, b, c, flat[idx]);
                        idx += 1;
                    }
                }
            }
            dk[a] = t3;
        }

        let cov_dk = |a: usize, i: usize, b: usize, c: usize| -> f64 {
            let mut v = dk[a].get(i, b, c);
            for f in 0..d {
                v -= jet.ws_gamma.get(f, a, b) * base.k[i][(f, c)];
                v -= jet.ws_gamma.get(f, a, c) * base.k[i][(b, f)];
            }
            for j in 0..codim {
                v += jet.twist[a][(j, i)] * base.k[j][(b, c)];
            }
            v
        };

        let ambient = self.provider.riemann_at(&base.x)?;
        let mut worst = 0.0f64;
        for i in 0..codim {
            for a in 0..d {
                for b in 0..d {
                    for c in 0..d {
                        let lhs = cov_dk(a, i, b, c) - cov_dk(b, i, a, c);
                        let mut rhs = 0.0;
                        for mu in 0..n {
                            for nu in 0..n {
                                for sig in 0..n {
                                    for rho in 0..n {
                                        rhs -= ambient.get(mu, nu, sig, rho)
                                            * base.normals[(mu, i)]
                                            * base.e[(nu, c)]
                                            * base.e[(sig, a)]
                                            * base.e[(rho, b)];
                                    }
                                }
                            }
                        }
                        worst = worst.max((lhs - rhs).abs());
                    }
                }
            }
        }
        Ok(worst)
    }
}

pub fn induced_metric(g: &DMatrix<f64>, e: &DMatrix<f64>) -> DMatrix<f64> {
    let m = e.transpose() * g * e;
    0.5 * (&m + m.transpose())
}

/// Fixed generic seed directions for the normal-frame Gram-Schmidt, one
/// orthonormal bank per ambient dimension.
///
/// Coordinate axes would be a poor seed choice: an embedding aligned with
/// the axes leaves some seed exactly tangent, and deforming the embedding
/// then reactivates that seed with a tiny residual whose direction is
/// noise-dominated and discontinuous in the deformation amplitude. A fixed
/// well-spread bank keeps every seed residual of order one on reasonable
/// sheets, so the frame varies smoothly under both parameter and embedding
/// perturbations.
fn seed_directions(n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for k in 0..n {
        for mu in 0..n {
            let a = (k + 1) as f64;
            let b = (mu + 1) as f64;
            m[(mu, k)] = (0.7 + 1.1 * a * b + 0.37 * b * b + 0.19 * a * a).sin();
        }
    }
    m.qr().q()
}

/// Orthonormal spacelike normal frame by Gram-Schmidt over the columns of
/// `bank`, tried in the order given by `seeds`.
///
/// Each seed is projected off the tangent space (twice, for numerical
/// orthogonality) and off the normals already accepted; seeds whose residual
/// drops below 1e-8 are skipped. Accepted vectors are normalised and
/// sign-fixed: the first component larger than 1e-8 in magnitude is made
/// positive.
pub fn normal_frame(
    g: &DMatrix<f64>,
    e: &DMatrix<f64>,
    gamma_inv: &DMatrix<f64>,
    seeds: &[usize],
    bank: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = g.nrows();
    let d = e.ncols();
    let codim = n - d;
    let mut accepted: Vec<DVector<f64>> = Vec::with_capacity(codim);

    let project_tangent = |v: &DVector<f64>| -> DVector<f64> {
        let mut out = v.clone();
        let gv = g * v;
        let coeffs = e.transpose() * &gv;
        for a in 0..d {
            let mut c = 0.0;
            for b in 0..d {
                c += gamma_inv[(a, b)] * coeffs[b];
            }
            for mu in 0..n {
                out[mu] -= c * e[(mu, a)];
            }
        }
        out
    };

    for &slot in seeds {
        if accepted.len() == codim {
            break;
        }
        let mut v: DVector<f64> = bank.column(slot).into_owned();
        v = project_tangent(&v);
        v = project_tangent(&v);
        for u in &accepted {
            let c = (g * u.clone()).dot(&v);
            v -= c * u;
        }
        for u in &accepted {
            let c = (g * u.clone()).dot(&v);
            v -= c * u;
        }
        let q = (g * v.clone()).dot(&v);
        if q.abs() < SKIP_TOL * SKIP_TOL {
            continue;
        }
        if q < 0.0 {
            return Err(GeomError::Frame {
                point: vec![],
                found: accepted.len(),
                needed: codim,
            });
        }
        v /= q.sqrt();
        if let Some(first) = v.iter().find(|c| c.abs() > SIGN_TOL) {
            if *first < 0.0 {
                v = -v;
            }
        }
        accepted.push(v);
    }

    if accepted.len() != codim {
        return Err(GeomError::Frame {
            point: vec![],
            found: accepted.len(),
            needed: codim,
        });
    }
    let mut out = DMatrix::zeros(n, codim);
    for (i, v) in accepted.iter().enumerate() {
        for mu in 0..n {
            out[(mu, i)] = v[mu];
        }
    }
    Ok(out)
}

/// Flip columns of `other` so each one overlaps its counterpart in `base`
/// positively. Errors when the overlap is too small to decide, which signals
/// a frame discontinuity across a stencil.
pub fn align_signs(base: &DMatrix<f64>, other: &DMatrix<f64>) -> Result<Vec<f64>> {
    let cols = base.ncols();
    if other.ncols() != cols {
        return Err(GeomError::Frame {
            point: vec![],
            found: other.ncols(),
            needed: cols,
        });
    }
    let mut signs = Vec::with_capacity(cols);
    for i in 0..cols {
        let dot = base.column(i).dot(&other.column(i));
        if dot.abs() < 0.5 {
            return Err(GeomError::Frame {
                point: vec![],
                found: i,
                needed: cols,
            });
        }
        signs.push(if dot < 0.0 { -1.0 } else { 1.0 });
    }
    Ok(signs)
}

pub fn align_frame(base: &DMatrix<f64>, other: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let signs = align_signs(base, other)?;
    let mut out = other.clone();
    for (i, s) in signs.iter().enumerate() {
        if *s < 0.0 {
            for mu in 0..out.nrows() {
                out[(mu, i)] = -out[(mu, i)];
            }
        }
    }
    Ok(out)
}
