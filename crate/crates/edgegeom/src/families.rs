//! Catalogue of background configurations: a sheet, its edge worldline, and
//! helpers tying the two together. These back the identity checks and the
//! worked examples.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spacetime::MetricProvider;
use crate::tensor::Tensor3;
use crate::worldsheet::{EmbeddingJet, Embedding, FrameSeeding, JetFn, SheetDomain, Worldsheet};

/// Second-order jet of the edge worldline in sheet coordinates.
#[derive(Clone, Debug)]
pub struct EdgeCurveJet {
    pub xi: Vec<f64>,
    pub dchi: Vec<f64>,
    pub ddchi: Vec<f64>,
}

pub type EdgeJetFn = Arc<dyn Fn(f64) -> EdgeCurveJet + Send + Sync>;
pub type EdgeParamFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// One-dimensional edge curve in the parameter space of a sheet.
#[derive(Clone)]
pub struct EdgeEmbedding {
    pub name: String,
    jet: EdgeJetFn,
    pub lo: f64,
    pub hi: f64,
    /// The parameter is proper time of the induced edge metric.
    pub proper_time: bool,
}

impl EdgeEmbedding {
    pub fn new(
        name: impl Into<String>,
        jet: EdgeJetFn,
        lo: f64,
        hi: f64,
        proper_time: bool,
    ) -> Self {
        EdgeEmbedding {
            name: name.into(),
            jet,
            lo,
            hi,
            proper_time,
        }
    }

    pub fn jet(&self, u: f64) -> EdgeCurveJet {
        (self.jet)(u)
    }
}

/// A named background: sheet, optional edge, and sampling grids.
#[derive(Clone)]
pub struct Family {
    pub name: String,
    pub sheet: Worldsheet,
    pub edge: Option<EdgeEmbedding>,
    /// Maps a sheet point to the edge parameter of its projection onto the
    /// edge, used to extend edge fields into the sheet interior.
    pub edge_param: Option<EdgeParamFn>,
    pub bulk_samples: Vec<Vec<f64>>,
    pub edge_samples: Vec<f64>,
}

impl Family {
    /// Same family with the normal frame seeded on the coordinate axes.
    /// The catalogue backgrounds are built aligned with the lab axes, so
    /// this recovers the adapted frame that closed-form component values
    /// are quoted in.
    pub fn axis_framed(mut self) -> Self {
        self.sheet = self.sheet.with_frame_seeding(FrameSeeding::Axes);
        self
    }
}

fn flat4() -> MetricProvider {
    MetricProvider::minkowski_cartesian(4)
}

fn static_line_edge(t_of_u: f64, coord: f64) -> EdgeCurveJet {
    EdgeCurveJet {
        xi: vec![t_of_u, coord],
        dchi: vec![1.0, 0.0],
        ddchi: vec![0.0, 0.0],
    }
}

/// Static flat sheet occupying sigma >= 0 with its edge on sigma = 0.
pub fn half_plane() -> Family {
    let jets: JetFn = Arc::new(|xi: &[f64]| EmbeddingJet {
        x: vec![xi[0], xi[1], 0.0, 0.0],
        e: DMatrix::from_column_slice(4, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]),
        dde: Tensor3::zeros(4, 2, 2),
    });
    let domain = SheetDomain::with_edge(
        vec![-6.0, -1.0],
        vec![6.0, 8.0],
        Arc::new(|xi: &[f64]| -xi[1]),
    );
    let emb = Embedding::from_jets("half-plane", 2, 4, jets, domain);
    let edge = EdgeEmbedding::new(
        "half-plane-edge",
        Arc::new(|u: f64| static_line_edge(u, 0.0)),
        -5.0,
        5.0,
        true,
    );
    Family {
        name: "half-plane".into(),
        sheet: Worldsheet::new(flat4(), emb),
        edge: Some(edge),
        edge_param: Some(Arc::new(|xi: &[f64]| xi[0])),
        bulk_samples: vec![
            vec![0.2, 0.7],
            vec![-1.1, 1.9],
            vec![2.3, 3.4],
            vec![0.9, 0.4],
        ],
        edge_samples: vec![-1.2, 0.0, 0.8, 2.1],
    }
}

/// Half plane pushed through a seeded boost and rotation: geometry must be
/// identical to the untilted one.
pub fn tilted_plane(seed: u64) -> Family {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zeta: f64 = rng.gen_range(-0.5..0.5);
    let ang: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let shift: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();

    // Boost in (t, x), then rotate in (y, z), then rotate in (x, y).
    let mut boost = DMatrix::identity(4, 4);
    boost[(0, 0)] = zeta.cosh();
    boost[(0, 1)] = zeta.sinh();
    boost[(1, 0)] = zeta.sinh();
    boost[(1, 1)] = zeta.cosh();
    let mut rot = DMatrix::identity(4, 4);
    rot[(2, 2)] = ang.cos();
    rot[(2, 3)] = -ang.sin();
    rot[(3, 2)] = ang.sin();
    rot[(3, 3)] = ang.cos();
    let ang2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let mut rot2 = DMatrix::identity(4, 4);
    rot2[(1, 1)] = ang2.cos();
    rot2[(1, 2)] = -ang2.sin();
    rot2[(2, 1)] = ang2.sin();
    rot2[(2, 2)] = ang2.cos();
    let lambda = rot2 * rot * boost;

    let lam = lambda.clone();
    let sh = shift.clone();
    let jets: JetFn = Arc::new(move |xi: &[f64]| {
        let base = [xi[0], xi[1], 0.0, 0.0];
        let mut x = sh.clone();
        for mu in 0..4 {
            for nu in 0..4 {
                x[mu] += lam[(mu, nu)] * base[nu];
            }
        }
        let mut e = DMatrix::zeros(4, 2);
        for mu in 0..4 {
            e[(mu, 0)] = lam[(mu, 0)];
            e[(mu, 1)] = lam[(mu, 1)];
        }
        EmbeddingJet {
            x,
            e,
            dde: Tensor3::zeros(4, 2, 2),
        }
    });
    let domain = SheetDomain::with_edge(
        vec![-6.0, -1.0],
        vec![6.0, 8.0],
        Arc::new(|xi: &[f64]| -xi[1]),
    );
    let emb = Embedding::from_jets("tilted-plane", 2, 4, jets, domain);
    let edge = EdgeEmbedding::new(
        "tilted-plane-edge",
        Arc::new(|u: f64| static_line_edge(u, 0.0)),
        -5.0,
        5.0,
        true,
    );
    Family {
        name: format!("tilted-plane-{seed}"),
        sheet: Worldsheet::new(flat4(), emb),
        edge: Some(edge),
        edge_param: Some(Arc::new(|xi: &[f64]| xi[0])),
        bulk_samples: vec![vec![0.3, 1.1], vec![-0.8, 2.2], vec![1.7, 0.6]],
        edge_samples: vec![-0.9, 0.4, 1.6],
    }
}

/// Static circular cylinder of radius `a`; the working window of the angular
/// coordinate keeps clear of the frame branch at pi/2. Edge sits at the
/// upper angular bound.
pub fn cylinder(a: f64) -> Family {
    let sigma_edge = 2.2;
    let jets: JetFn = Arc::new(move |xi: &[f64]| {
        let (t, s) = (xi[0], xi[1]);
        let mut dde = Tensor3::zeros(4, 2, 2);
        dde.set(1, 1, 1, -a * s.cos());
        dde.set(2, 1, 1, -a * s.sin());
        EmbeddingJet {
            x: vec![t, a * s.cos(), a * s.sin(), 0.0],
            e: DMatrix::from_column_slice(
                4,
                2,
                &[1.0, 0.0, 0.0, 0.0, 0.0, -a * s.sin(), a * s.cos(), 0.0],
            ),
            dde,
        }
    });
    let domain = SheetDomain::with_edge(
        vec![-6.0, 1.7],
        vec![6.0, 2.6],
        Arc::new(move |xi: &[f64]| xi[1] - sigma_edge),
    );
    let emb = Embedding::from_jets("cylinder", 2, 4, jets, domain);
    let edge = EdgeEmbedding::new(
        "cylinder-edge",
        Arc::new(move |u: f64| static_line_edge(u, sigma_edge)),
        -5.0,
        5.0,
        true,
    );
    Family {
        name: format!("cylinder-a{a}"),
        sheet: Worldsheet::new(flat4(), emb),
        edge: Some(edge),
        edge_param: Some(Arc::new(|xi: &[f64]| xi[0])),
        bulk_samples: vec![
            vec![0.1, 1.9],
            vec![-0.7, 2.05],
            vec![1.3, 2.15],
            vec![0.4, 1.95],
        ],
        edge_samples: vec![-1.1, 0.0, 0.7, 1.9],
    }
}

/// Helicoid-style rotating sheet: X = (t, r cos th(t), r sin th(t), 0).
/// The on-shell phase is th = omega0 t + theta0, a minimal sheet; the edge
/// sits at r = radius and is proper-time parametrized.
pub fn helicoid(omega0: f64, radius: f64) -> Family {
    helicoid_with_phase(
        omega0,
        radius,
        Arc::new(move |t: f64| {
            let th = omega0 * t + 0.3;
            (th, omega0, 0.0)
        }),
        "helicoid",
        true,
    )
}

/// Same sheet with a deliberately non-stationary phase, so the mean
/// curvature no longer vanishes. Useful for exercising residuals off shell.
pub fn helicoid_offshell(omega0: f64, radius: f64) -> Family {
    let q = 0.08;
    let nu = 0.9;
    helicoid_with_phase(
        omega0,
        radius,
        Arc::new(move |t: f64| {
            let th = omega0 * t + 0.3 + q * (nu * t).sin();
            let dth = omega0 + q * nu * (nu * t).cos();
            let ddth = -q * nu * nu * (nu * t).sin();
            (th, dth, ddth)
        }),
        "helicoid-offshell",
        // The wobble changes the edge speed, so the stationary proper-time
        // normalization no longer applies; keep coordinate time.
        false,
    )
}

fn helicoid_with_phase(
    omega0: f64,
    radius: f64,
    phase: Arc<dyn Fn(f64) -> (f64, f64, f64) + Send + Sync>,
    tag: &str,
    proper_edge: bool,
) -> Family {
    let u_edge = omega0 * omega0 * radius * radius;
    assert!(u_edge < 1.0, "edge speed must stay below the light cone");
    let r_hi = (1.2 * radius).min(0.995 / omega0.abs().max(1e-12));

    let ph = phase.clone();
    let jets: JetFn = Arc::new(move |xi: &[f64]| {
        let (t, r) = (xi[0], xi[1]);
        let (th, dth, ddth) = ph(t);
        let (sn, cs) = th.sin_cos();
        let mut e = DMatrix::zeros(4, 2);
        e[(0, 0)] = 1.0;
        e[(1, 0)] = -r * dth * sn;
        e[(2, 0)] = r * dth * cs;
        e[(1, 1)] = cs;
        e[(2, 1)] = sn;
        let mut dde = Tensor3::zeros(4, 2, 2);
        dde.set(1, 0, 0, -r * (ddth * sn + dth * dth * cs));
        dde.set(2, 0, 0, r * (ddth * cs - dth * dth * sn));
        dde.set(1, 0, 1, -dth * sn);
        dde.set(1, 1, 0, -dth * sn);
        dde.set(2, 0, 1, dth * cs);
        dde.set(2, 1, 0, dth * cs);
        EmbeddingJet {
            x: vec![t, r * cs, r * sn, 0.0],
            e,
            dde,
        }
    });
    let domain = SheetDomain::with_edge(
        vec![-8.0, 0.02 * radius],
        vec![8.0, r_hi],
        Arc::new(move |xi: &[f64]| xi[1] - radius),
    );
    let emb = Embedding::from_jets(tag, 2, 4, jets, domain);
    let dt_du = if proper_edge {
        1.0 / (1.0 - u_edge).sqrt()
    } else {
        1.0
    };
    let edge = EdgeEmbedding::new(
        format!("{tag}-edge"),
        Arc::new(move |u: f64| EdgeCurveJet {
            xi: vec![u * dt_du, radius],
            dchi: vec![dt_du, 0.0],
            ddchi: vec![0.0, 0.0],
        }),
        -4.0,
        4.0,
        proper_edge,
    );
    let su = if proper_edge {
        (1.0 - u_edge).sqrt()
    } else {
        1.0
    };
    Family {
        name: format!("{tag}-w{omega0}-R{radius}"),
        sheet: Worldsheet::new(flat4(), emb),
        edge: Some(edge),
        edge_param: Some(Arc::new(move |xi: &[f64]| xi[0] * su)),
        bulk_samples: vec![
            vec![0.2, 0.3 * radius],
            vec![-0.9, 0.55 * radius],
            vec![1.4, 0.8 * radius],
            vec![0.5, 0.95 * radius],
        ],
        edge_samples: vec![-0.8, 0.0, 0.6, 1.3],
    }
}

/// Helicoid sheet whose edge radius oscillates in time; the edge parameter
/// is coordinate time, not proper time.
pub fn helicoid_moving_edge(omega0: f64, r0: f64, rho: f64, nu: f64) -> Family {
    let base = helicoid(omega0, r0 + rho + 0.05);
    let domain = SheetDomain::with_edge(
        base.sheet.embedding.domain.lo.clone(),
        base.sheet.embedding.domain.hi.clone(),
        Arc::new(move |xi: &[f64]| xi[1] - (r0 + rho * (nu * xi[0]).sin())),
    );
    let sheet = Worldsheet::new(
        base.sheet.provider.clone(),
        base.sheet.embedding.with_domain(domain),
    );
    let edge = EdgeEmbedding::new(
        "helicoid-moving-edge",
        Arc::new(move |t: f64| {
            let r = r0 + rho * (nu * t).sin();
            let dr = rho * nu * (nu * t).cos();
            let ddr = -rho * nu * nu * (nu * t).sin();
            EdgeCurveJet {
                xi: vec![t, r],
                dchi: vec![1.0, dr],
                ddchi: vec![0.0, ddr],
            }
        }),
        -3.0,
        3.0,
        false,
    );
    // The enlarged base sheet's deepest sample can poke past the breathing
    // edge at its inward swing; pin that one under the minimum edge radius.
    let mut bulk_samples = base.bulk_samples;
    bulk_samples[3] = vec![0.5, 0.8 * (r0 - rho)];
    Family {
        name: format!("helicoid-moving-edge-w{omega0}"),
        sheet,
        edge: Some(edge),
        edge_param: Some(Arc::new(|xi: &[f64]| xi[0])),
        bulk_samples,
        edge_samples: vec![-0.6, 0.2, 1.1],
    }
}

/// Static catenary sheet X = (t, s, c cosh(s/c), 0); its edge carries a
/// nonzero conormal-conormal curvature component.
pub fn catenary(c: f64) -> Family {
    let s_edge = 0.8 * c;
    let jets: JetFn = Arc::new(move |xi: &[f64]| {
        let (t, s) = (xi[0], xi[1]);
        let mut dde = Tensor3::zeros(4, 2, 2);
        dde.set(2, 1, 1, (s / c).cosh() / c);
        let mut e = DMatrix::zeros(4, 2);
        e[(0, 0)] = 1.0;
        e[(1, 1)] = 1.0;
        e[(2, 1)] = (s / c).sinh();
        EmbeddingJet {
            x: vec![t, s, c * (s / c).cosh(), 0.0],
            e,
            dde,
        }
    });
    let domain = SheetDomain::with_edge(
        vec![-6.0, -2.0 * c],
        vec![6.0, 2.0 * c],
        Arc::new(move |xi: &[f64]| xi[1] - s_edge),
    );
    let emb = Embedding::from_jets("catenary", 2, 4, jets, domain);
    let edge = EdgeEmbedding::new(
        "catenary-edge",
        Arc::new(move |u: f64| static_line_edge(u, s_edge)),
        -5.0,
        5.0,
        true,
    );
    Family {
        name: format!("catenary-c{c}"),
        sheet: Worldsheet::new(flat4(), emb),
        edge: Some(edge),
        edge_param: Some(Arc::new(|xi: &[f64]| xi[0])),
        bulk_samples: vec![
            vec![0.3, -0.4 * c],
            vec![-1.2, 0.2 * c],
            vec![0.8, 0.5 * c],
        ],
        edge_samples: vec![-1.0, 0.2, 1.4],
    }
}

/// Flat sheet whose edge is a uniformly accelerated worldline with proper
/// acceleration `alpha`, receding into the bulk x < x_edge(t).
pub fn hyperbolic_edge(alpha: f64, x0: f64) -> Family {
    let jets: JetFn = Arc::new(|xi: &[f64]| EmbeddingJet {
        x: vec![xi[0], xi[1], 0.0, 0.0],
        e: DMatrix::from_column_slice(4, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]),
        dde: Tensor3::zeros(4, 2, 2),
    });
    let a = alpha;
    let edge_fn = Arc::new(move |xi: &[f64]| {
        let x_edge = x0 - ((1.0 + a * a * xi[0] * xi[0]).sqrt() - 1.0) / a;
        xi[1] - x_edge
    });
    let domain = SheetDomain::with_edge(vec![-6.0, x0 - 12.0], vec![6.0, x0 + 1.0], edge_fn);
    let emb = Embedding::from_jets("hyperbolic-edge-sheet", 2, 4, jets, domain);
    let edge = EdgeEmbedding::new(
        "hyperbolic-edge",
        Arc::new(move |tau: f64| {
            let (sh, ch) = ((a * tau).sinh(), (a * tau).cosh());
            EdgeCurveJet {
                xi: vec![sh / a, x0 - (ch - 1.0) / a],
                dchi: vec![ch, -sh],
                ddchi: vec![a * sh, -a * ch],
            }
        }),
        -2.0,
        2.0,
        true,
    );
    Family {
        name: format!("hyperbolic-edge-a{alpha}"),
        sheet: Worldsheet::new(flat4(), emb),
        edge: Some(edge),
        edge_param: Some(Arc::new(move |xi: &[f64]| (a * xi[0]).asinh() / a)),
        bulk_samples: vec![
            vec![0.2, x0 - 2.0],
            vec![-1.1, x0 - 4.0],
            vec![1.5, x0 - 6.0],
        ],
        edge_samples: vec![-0.9, 0.0, 0.5, 1.2],
    }
}

/// Rippled band with genuinely nonzero normal-frame twist; its edge keeps
/// the coordinate-time parameter.
pub fn twisted_band() -> Family {
    let (a, al, be) = (0.1, 0.7, 0.4);
    let s_edge = 0.9;
    let jets: JetFn = Arc::new(move |xi: &[f64]| {
        let (t, s) = (xi[0], xi[1]);
        let ph = al * t + be * s;
        let mut e = DMatrix::zeros(4, 2);
        e[(0, 0)] = 1.0;
        e[(1, 1)] = 1.0;
        e[(2, 0)] = -a * al * ph.sin();
        e[(2, 1)] = -a * be * ph.sin();
        e[(3, 0)] = a * al * ph.cos();
        e[(3, 1)] = a * be * ph.cos();
        let mut dde = Tensor3::zeros(4, 2, 2);
        for (p, q, w) in [(0usize, 0usize, al * al), (0, 1, al * be), (1, 1, be * be)] {
            dde.set(2, p, q, -a * w * ph.cos());
            dde.set(2, q, p, -a * w * ph.cos());
            dde.set(3, p, q, -a * w * ph.sin());
            dde.set(3, q, p, -a * w * ph.sin());
        }
        EmbeddingJet {
            x: vec![t, s, a * ph.cos(), a * ph.sin()],
            e,
            dde,
        }
    });
    let domain = SheetDomain::with_edge(
        vec![-6.0, -3.0],
        vec![6.0, 2.0],
        Arc::new(move |xi: &[f64]| xi[1] - s_edge),
    );
    let emb = Embedding::from_jets("twisted-band", 2, 4, jets, domain);
    let edge = EdgeEmbedding::new(
        "twisted-band-edge",
        Arc::new(move |u: f64| static_line_edge(u, s_edge)),
        -5.0,
        5.0,
        false,
    );
    Family {
        name: "twisted-band".into(),
        sheet: Worldsheet::new(flat4(), emb),
        edge: Some(edge),
        edge_param: Some(Arc::new(|xi: &[f64]| xi[0])),
        bulk_samples: vec![vec![0.3, -0.2], vec![-0.9, 0.4], vec![1.1, -1.3]],
        edge_samples: vec![-0.7, 0.1, 1.0],
    }
}

/// The deterministic identity-check ensemble.
pub fn standard_ensemble() -> Vec<Family> {
    vec![
        half_plane(),
        cylinder(0.8),
        helicoid(0.45, 1.0),
        catenary(1.1),
        twisted_band(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn helicoid_matches_closed_form_geometry() {
        let om = 0.45;
        let fam = helicoid(om, 1.0).axis_framed();
        let xi = [0.7, 0.6];
        let jet = fam.sheet.jet(&xi).unwrap();
        let u = om * om * xi[1] * xi[1];
        assert!((jet.gamma[(0, 0)] + (1.0 - u)).abs() < 1e-12);
        assert!((jet.gamma[(1, 1)] - 1.0).abs() < 1e-12);
        assert!(jet.gamma[(0, 1)].abs() < 1e-12);
        // Frame is sign-fixed, so the mixed curvature component is pinned.
        let expect = -om / (1.0 - u).sqrt();
        assert!(
            (jet.k[0][(0, 1)] - expect).abs() < 1e-12,
            "K_tr = {}, expected {expect}",
            jet.k[0][(0, 1)]
        );
        assert!(jet.k[0][(0, 0)].abs() < 1e-12 && jet.k[0][(1, 1)].abs() < 1e-12);
        assert!(jet.k[1].amax() < 1e-12);
        // Minimal sheet: both mean curvatures vanish.
        assert!(jet.mean_k[0].abs() < 1e-12 && jet.mean_k[1].abs() < 1e-12);
        // No twist in this configuration.
        assert!(jet.twist[0].amax() < 1e-9 && jet.twist[1].amax() < 1e-9);
    }

    #[test]
    fn offshell_helicoid_is_not_minimal() {
        let fam = helicoid_offshell(0.45, 1.0);
        let jet = fam.sheet.jet(&[0.4, 0.6]).unwrap();
        assert!(jet.mean_k[0].abs() > 1e-4, "mean K = {}", jet.mean_k[0]);
    }

    #[test]
    fn helicoid_edge_is_proper_time() {
        let om = 0.45;
        let fam = helicoid(om, 1.0);
        let edge = fam.edge.as_ref().unwrap();
        let ej = edge.jet(0.9);
        let sj = fam.sheet.jet(&ej.xi).unwrap();
        let mut h = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                h += sj.gamma[(a, b)] * ej.dchi[a] * ej.dchi[b];
            }
        }
        assert!((h + 1.0).abs() < 1e-12, "h_uu = {h}");
        // Field-extension parameter inverts the edge clock.
        let param = fam.edge_param.as_ref().unwrap();
        assert!((param(&ej.xi) - 0.9).abs() < 1e-12);
    }

    #[test]
    fn hyperbolic_edge_is_proper_time_and_invertible() {
        let fam = hyperbolic_edge(0.6, 2.0);
        let edge = fam.edge.as_ref().unwrap();
        for tau in [-1.3, 0.0, 0.7] {
            let ej = edge.jet(tau);
            let sj = fam.sheet.jet(&ej.xi).unwrap();
            let mut h = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    h += sj.gamma[(a, b)] * ej.dchi[a] * ej.dchi[b];
                }
            }
            assert!((h + 1.0).abs() < 1e-12);
            let param = fam.edge_param.as_ref().unwrap();
            assert!((param(&ej.xi) - tau).abs() < 1e-10);
        }
    }

    #[test]
    fn tilted_plane_is_isometric_to_plane() {
        let flat = half_plane();
        let tilted = tilted_plane(42);
        let xi = [0.8, 1.3];
        let j1 = flat.sheet.jet(&xi).unwrap();
        let j2 = tilted.sheet.jet(&xi).unwrap();
        assert!((&j1.gamma - &j2.gamma).amax() < 1e-12);
        assert!(j2.k[0].amax() < 1e-12 && j2.k[1].amax() < 1e-12);
    }

    #[test]
    fn catenary_metric_and_edge_curvature() {
        let c = 1.1;
        let fam = catenary(c);
        let xi = [0.2, 0.5 * c];
        let jet = fam.sheet.jet(&xi).unwrap();
        let expect = (xi[1] / c).cosh().powi(2);
        assert!((jet.gamma[(1, 1)] - expect).abs() < 1e-12);
        // The profile curves, so K cannot vanish identically.
        let kmax = jet.k[0].amax().max(jet.k[1].amax());
        assert!(kmax > 1e-2);
    }

    #[test]
    fn moving_edge_jets_are_consistent() {
        let fam = helicoid_moving_edge(0.4, 0.9, 0.15, 0.7);
        let edge = fam.edge.as_ref().unwrap();
        assert!(!edge.proper_time);
        let j = edge.jet(0.3);
        // dchi must be the t-derivative of the curve to machine accuracy.
        let h = 1e-6;
        let jp = edge.jet(0.3 + h);
        let jm = edge.jet(0.3 - h);
        for a in 0..2 {
            let fd = (jp.xi[a] - jm.xi[a]) / (2.0 * h);
            assert!((fd - j.dchi[a]).abs() < 1e-8);
        }
    }

    #[test]
    fn ensemble_members_satisfy_gauss_codazzi() {
        for fam in standard_ensemble() {
            for xi in &fam.bulk_samples {
                let g = fam.sheet.gauss_residual(xi).unwrap();
                let c = fam.sheet.codazzi_residual(xi).unwrap();
                assert!(g < 1e-7, "{}: gauss residual {g}", fam.name);
                assert!(c < 1e-7, "{}: codazzi residual {c}", fam.name);
            }
        }
    }
}
