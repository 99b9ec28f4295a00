//! Ambient metric providers: metric evaluation with signature checks,
//! Christoffel symbols, and the lowered Riemann tensor.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};
use crate::numdiff;
use crate::tensor::{Tensor3, Tensor4};

pub type MetricFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
pub type MetricGradFn = Arc<dyn Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync>;

const SYMMETRY_TOL: f64 = 1e-14;
const DET_TOL: f64 = 1e-12;

/// Chart domain of a provider, as a coordinate box (unbounded axes use
/// infinities).
#[derive(Clone, Debug)]
pub struct ChartDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ChartDomain {
    pub fn unbounded(dim: usize) -> Self {
        ChartDomain {
            lo: vec![f64::NEG_INFINITY; dim],
            hi: vec![f64::INFINITY; dim],
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(self.hi.iter()))
            .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }
}

/// A spacetime metric given in one chart.
#[derive(Clone)]
pub struct MetricProvider {
    pub name: String,
    pub dim: usize,
    eval: MetricFn,
    grad: Option<MetricGradFn>,
    pub domain: ChartDomain,
    /// Metric components are coordinate-independent; derivatives are exactly
    /// zero and the curvature short-circuits to exact zeros.
    pub constant: bool,
}

impl MetricProvider {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        eval: MetricFn,
        grad: Option<MetricGradFn>,
        domain: ChartDomain,
        constant: bool,
    ) -> Self {
        MetricProvider {
            name: name.into(),
            dim,
            eval,
            grad,
            domain,
            constant,
        }
    }

    /// Minkowski metric in Cartesian coordinates, diag(-1, 1, ..., 1).
    pub fn minkowski_cartesian(dim: usize) -> Self {
        let mut g = DMatrix::identity(dim, dim);
        g[(0, 0)] = -1.0;
        let gc = g.clone();
        let grad_dim = dim;
        MetricProvider::new(
            "minkowski-cartesian",
            dim,
            Arc::new(move |_x: &[f64]| gc.clone()),
            Some(Arc::new(move |_x: &[f64]| {
                vec![DMatrix::zeros(grad_dim, grad_dim); grad_dim]
            })),
            ChartDomain::unbounded(dim),
            true,
        )
    }

    /// Minkowski metric in cylindrical coordinates (t, r, theta, z):
    /// diag(-1, 1, r^2, 1), chart r >= 0.
    pub fn minkowski_cylindrical() -> Self {
        let eval = Arc::new(|x: &[f64]| {
            let r = x[1];
            DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 1.0, r * r, 1.0]))
        });
        let grad = Arc::new(|x: &[f64]| {
            let mut d = vec![DMatrix::zeros(4, 4); 4];
            d[1][(2, 2)] = 2.0 * x[1];
            d
        });
        let mut domain = ChartDomain::unbounded(4);
        domain.lo[1] = 0.0;
        MetricProvider::new("minkowski-cylindrical", 4, eval, Some(grad), domain, false)
    }

    /// Static product metric carrying a unit two-sphere block:
    /// diag(-1, 1, 1, sin^2(theta)) in coordinates (t, r, theta, phi).
    /// Derivatives are left to the difference stencils on purpose.
    pub fn sphere_block() -> Self {
        let eval = Arc::new(|x: &[f64]| {
            let s = x[2].sin();
            DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 1.0, 1.0, s * s]))
        });
        let mut domain = ChartDomain::unbounded(4);
        domain.lo[2] = 1e-3;
        domain.hi[2] = std::f64::consts::PI - 1e-3;
        MetricProvider::new("sphere-block", 4, eval, None, domain, false)
    }

    fn check_domain(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(GeomError::InvalidInput(format!(
                "point has {} coordinates, chart '{}' expects {}",
                x.len(),
                self.name,
                self.dim
            )));
        }
        if !self.domain.contains(x) {
            return Err(GeomError::OutsideDomain {
                name: self.name.clone(),
                point: x.to_vec(),
            });
        }
        Ok(())
    }

    /// Metric components at a point, checked symmetric, non-degenerate and
    /// Lorentzian (exactly one negative eigenvalue).
    pub fn metric_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_domain(x)?;
        let g = (self.eval)(x);
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                if (g[(i, j)] - g[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(GeomError::InvalidInput(format!(
                        "metric '{}' not symmetric at {:?}",
                        self.name, x
                    )));
                }
            }
        }
        let g = 0.5 * (&g + g.transpose());
        let det = g.clone().lu().determinant();
        if det.abs() < DET_TOL {
            return Err(GeomError::DegenerateMetric {
                point: x.to_vec(),
                det,
            });
        }
        let eig = g.clone().symmetric_eigen();
        let negatives = eig.eigenvalues.iter().filter(|&&v| v < 0.0).count();
        if negatives != 1 {
            return Err(GeomError::Signature {
                point: x.to_vec(),
                negatives,
            });
        }
        Ok(g)
    }

    pub fn inverse_metric_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let g = self.metric_at(x)?;
        g.clone().try_inverse().ok_or(GeomError::DegenerateMetric {
            point: x.to_vec(),
            det: 0.0,
        })
    }

    /// Metric gradient d_nu g_{ab}: analytic when the provider carries one,
    /// otherwise central differences with one Richardson level.
    pub fn metric_grad_at(&self, x: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        self.check_domain(x)?;
        if self.constant {
            return Ok(vec![DMatrix::zeros(self.dim, self.dim); self.dim]);
        }
        if let Some(grad) = &self.grad {
            return Ok(grad(x));
        }
        let n = self.dim;
        let mut out = Vec::with_capacity(n);
        for nu in 0..n {
            let h = numdiff::step_first(x[nu]);
            for s in [-1.0, 1.0] {
                let mut p = x.to_vec();
                p[nu] += s * h;
                if !self.domain.contains(&p) {
                    return Err(GeomError::OutsideDomain {
                        name: self.name.clone(),
                        point: p,
                    });
                }
            }
            let eval = &self.eval;
            let flat = numdiff::central_first(
                |t| {
                    let mut p = x.to_vec();
                    p[nu] = t;
                    let g = eval(&p);
                    g.iter().cloned().collect::<Vec<f64>>()
                },
                x[nu],
                h,
            );
            out.push(DMatrix::from_column_slice(n, n, &flat));
        }
        Ok(out)
    }

    /// Accuracy scale of the metric gradient, used to size outer stencils.
    fn grad_noise(&self) -> f64 {
        if self.grad.is_some() || self.constant {
            1e-15
        } else {
            1e-11
        }
    }

    /// Christoffel symbols of the second kind, Gamma^mu_{nu rho}.
    pub fn christoffel_at(&self, x: &[f64]) -> Result<Tensor3> {
        let n = self.dim;
        let mut gamma = Tensor3::zeros(n, n, n);
        if self.constant {
            return Ok(gamma);
        }
        let ginv = self.inverse_metric_at(x)?;
        let dg = self.metric_grad_at(x)?;
        for mu in 0..n {
            for nu in 0..n {
                for rho in nu..n {
                    let mut s = 0.0;
                    for sig in 0..n {
                        s += ginv[(mu, sig)]
                            * (dg[nu][(sig, rho)] + dg[rho][(sig, nu)] - dg[sig][(nu, rho)]);
                    }
                    let v = 0.5 * s;
                    gamma.set(mu, nu, rho, v);
                    gamma.set(mu, rho, nu, v);
                }
            }
        }
        Ok(gamma)
    }

    /// Lowered Riemann tensor R_{mu nu sigma rho}, antisymmetrised in both
    /// pairs; constant providers short-circuit to exact zeros.
    pub fn riemann_at(&self, x: &[f64]) -> Result<Tensor4> {
        let n = self.dim;
        if self.constant {
            return Ok(Tensor4::zeros(n, n, n, n));
        }
        let g = self.metric_at(x)?;
        let gamma0 = self.christoffel_at(x)?;

        // d_sigma Gamma^mu_{rho nu} via central differences over exactly
        // evaluated Christoffels; the step balances their own noise.
        let mut dgamma = vec![Tensor3::zeros(n, n, n); n];
        for sig in 0..n {
            let h = numdiff::step_noisy(x[sig], self.grad_noise());
            let vals = numdiff::try_central_first(
                |t| {
                    let mut p = x.to_vec();
                    p[sig] = t;
                    let gm = self.christoffel_at(&p)?;
                    let mut flat = Vec::with_capacity(n * n * n);
                    for a in 0..n {
                        for b in 0..n {
                            for c in 0..n {
                                flat.push(gm.get(a, b, c));
                            }
                        }
                    }
                    Ok(flat)
                },
                x[sig],
                h,
            )?;
            let mut t3 = Tensor3::zeros(n, n, n);
            let mut idx = 0;
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        t3.set(a, b, c, vals[idx]);
                        idx += 1;
                    }
                }
            }
            dgamma[sig] = t3;
        }

        let mut upper = Tensor4::zeros(n, n, n, n);
        for mu in 0..n {
            for nu in 0..n {
                for sig in 0..n {
                    for rho in 0..n {
                        let mut v =
                            dgamma[sig].get(mu, rho, nu) - dgamma[rho].get(mu, sig, nu);
                        for lam in 0..n {
                            v += gamma0.get(mu, sig, lam) * gamma0.get(lam, rho, nu)
                                - gamma0.get(mu, rho, lam) * gamma0.get(lam, sig, nu);
                        }
                        upper.set(mu, nu, sig, rho, v);
                    }
                }
            }
        }

        let mut lowered = Tensor4::zeros(n, n, n, n);
        for mu in 0..n {
            for nu in 0..n {
                for sig in 0..n {
                    for rho in 0..n {
                        let mut v = 0.0;
                        for lam in 0..n {
                            v += g[(mu, lam)] * upper.get(lam, nu, sig, rho);
                        }
                        lowered.set(mu, nu, sig, rho, v);
                    }
                }
            }
        }
        lowered.antisymmetrise_pairs();
        Ok(lowered)
    }

    /// Full curvature bundle at a point.
    pub fn curvature_at(&self, x: &[f64]) -> Result<CurvatureSample> {
        Ok(CurvatureSample {
            point: x.to_vec(),
            metric: self.metric_at(x)?,
            christoffel: self.christoffel_at(x)?,
            riemann: self.riemann_at(x)?,
        })
    }
}

/// Metric, connection and curvature evaluated at one point.
#[derive(Clone, Debug)]
pub struct CurvatureSample {
    pub point: Vec<f64>,
    pub metric: DMatrix<f64>,
    pub christoffel: Tensor3,
    pub riemann: Tensor4,
}

impl CurvatureSample {
    /// Residuals of the index symmetries that are not imposed by
    /// construction: pair exchange and the first Bianchi identity.
    pub fn symmetry_residuals(&self) -> RiemannSymmetryResiduals {
        let n = self.metric.nrows();
        let r = &self.riemann;
        let mut pair_exchange = 0.0f64;
        let mut bianchi = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        pair_exchange =
                            pair_exchange.max((r.get(a, b, c, d) - r.get(c, d, a, b)).abs());
                        bianchi = bianchi.max(
                            (r.get(a, b, c, d) + r.get(a, c, d, b) + r.get(a, d, b, c)).abs(),
                        );
                    }
                }
            }
        }
        RiemannSymmetryResiduals {
            pair_exchange,
            bianchi,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RiemannSymmetryResiduals {
    pub pair_exchange: f64,
    pub bianchi: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cartesian_metric_is_diagonal_and_flat() {
        let m = MetricProvider::minkowski_cartesian(4);
        let g = m.metric_at(&[0.3, -1.0, 2.0, 5.0]).unwrap();
        assert_eq!(g[(0, 0)], -1.0);
        assert_eq!(g[(2, 2)], 1.0);
        assert!(m.riemann_at(&[0.0, 0.0, 0.0, 0.0]).unwrap().is_zero());
        assert_eq!(m.christoffel_at(&[1.0, 2.0, 3.0, 4.0]).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn cylindrical_christoffels_match_hand_values() {
        // At r = 2: Gamma^r_{theta theta} = -r = -2, Gamma^theta_{r theta} = 1/r = 1/2.
        let m = MetricProvider::minkowski_cylindrical();
        let x = [0.0, 2.0, 0.7, 0.0];
        let gamma = m.christoffel_at(&x).unwrap();
        assert!((gamma.get(1, 2, 2) + 2.0).abs() < 1e-12);
        assert!((gamma.get(2, 1, 2) - 0.5).abs() < 1e-12);
        assert!((gamma.get(2, 2, 1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cylindrical_axis_is_degenerate() {
        let m = MetricProvider::minkowski_cylindrical();
        match m.metric_at(&[0.0, 0.0, 0.0, 0.0]) {
            Err(GeomError::DegenerateMetric { .. }) => {}
            other => panic!("expected degeneracy, got {other:?}"),
        }
    }

    #[test]
    fn christoffel_stencil_respects_chart_domain() {
        let m = MetricProvider::minkowski_cylindrical();
        // Strip the analytic gradient so the stencil actually probes r < 0.
        let numeric = MetricProvider::new(
            "cylindrical-numeric",
            4,
            m.eval.clone(),
            None,
            m.domain.clone(),
            false,
        );
        // r is large enough for a healthy metric but smaller than the stencil.
        match numeric.christoffel_at(&[0.0, 2e-6, 0.0, 0.0]) {
            Err(GeomError::OutsideDomain { .. }) => {}
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn cylindrical_chart_is_flat_numerically() {
        let m = MetricProvider::minkowski_cylindrical();
        let r = m.riemann_at(&[0.1, 1.7, 0.4, -0.2]).unwrap();
        assert!(r.max_abs() < 1e-8, "max |R| = {}", r.max_abs());
    }

    #[test]
    fn sphere_block_reproduces_unit_sphere_curvature() {
        let m = MetricProvider::sphere_block();
        let th: f64 = 1.1;
        let x = [0.0, 0.5, th, 0.3];
        let r = m.riemann_at(&x).unwrap();
        let expect = th.sin().powi(2);
        assert!(
            (r.get(2, 3, 2, 3) - expect).abs() < 1e-6,
            "R_tptp = {}, expected {}",
            r.get(2, 3, 2, 3),
            expect
        );
        let s = m.curvature_at(&x).unwrap().symmetry_residuals();
        assert!(s.pair_exchange < 1e-6 && s.bianchi < 1e-6);
    }

    #[test]
    fn product_of_flat_blocks_is_flat() {
        // 2d Minkowski x flat polar plane: diag(-1, 1, 1, r^2) in (t, x, r, phi).
        let eval: MetricFn = Arc::new(|x: &[f64]| {
            DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 1.0, 1.0, x[2] * x[2]]))
        });
        let mut domain = ChartDomain::unbounded(4);
        domain.lo[2] = 0.1;
        let m = MetricProvider::new("flat-product", 4, eval, None, domain, false);
        let r = m.riemann_at(&[0.0, 0.3, 1.4, 0.8]).unwrap();
        // No analytic gradient here, so the floor is the numeric-provider one.
        assert!(r.max_abs() < 1e-6, "max |R| = {}", r.max_abs());
    }

    #[test]
    fn signature_failure_is_reported() {
        let eval: MetricFn = Arc::new(|_x: &[f64]| {
            DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, -1.0, 1.0, 1.0]))
        });
        let m = MetricProvider::new(
            "two-times",
            4,
            eval,
            None,
            ChartDomain::unbounded(4),
            false,
        );
        match m.metric_at(&[0.0; 4]) {
            Err(GeomError::Signature { negatives: 2, .. }) => {}
            other => panic!("expected signature error, got {other:?}"),
        }
    }
}
