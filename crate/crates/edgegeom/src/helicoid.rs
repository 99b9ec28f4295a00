//! Closed-form reference data for the rotating sheet with a massive edge,
//! plus the mode machinery of its linearized fields: a trigonometric well
//! for the in-plane channel and a free wave for the out-of-plane one, both
//! solved by shooting and by a Sturm-count matrix route.

use num_complex::Complex64;

use crate::error::{GeomError, Result};

/// Rotation state balancing a bulk tension against an edge mass at the
/// given radius.
#[derive(Clone, Copy, Debug)]
pub struct Background {
    pub omega0: f64,
    /// Squared edge speed, in (0, 1) for a timelike edge.
    pub u: f64,
    /// Set when the edge speed is too close to the light cone for the mode
    /// machinery to be trusted.
    pub near_null: bool,
}

pub const NEAR_NULL_CUTOFF: f64 = 0.98;

/// omega0^2 = tension / (radius (mass + tension radius)), the speed balance
/// of a massive endpoint held by a tensioned sheet.
pub fn background_solve(tension: f64, mass: f64, radius: f64) -> Result<Background> {
    if !(tension > 0.0) || !tension.is_finite() {
        return Err(GeomError::InvalidInput(format!(
            "tension must be positive and finite, got {tension}"
        )));
    }
    if !(mass >= 0.0) || !mass.is_finite() {
        return Err(GeomError::InvalidInput(format!(
            "edge mass must be nonnegative, got {mass}"
        )));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(GeomError::InvalidInput(format!(
            "radius must be positive and finite, got {radius}"
        )));
    }
    let u = tension * radius / (mass + tension * radius);
    let omega0 = (tension / (radius * (mass + tension * radius))).sqrt();
    Ok(Background {
        omega0,
        u,
        near_null: u >= NEAR_NULL_CUTOFF,
    })
}

/// Closed-form edge curvature scalars of the rotating sheet.
#[derive(Clone, Copy, Debug)]
pub struct ClosedForms {
    pub u: f64,
    /// Conormal trace k = -R omega0^2 / (1 - u).
    pub k_trace: f64,
    /// Mixed projection K_{perp par} = -omega0 / (1 - u).
    pub kperp_par: f64,
    /// The coordinate-frame reading -omega0 / sqrt(1 - u), which differs
    /// from the projected scalar by the tangent normalization. Kept so the
    /// gap between the two readings can be reported, not used as truth.
    pub kperp_par_coordinate: f64,
}

pub fn closed_form_curvatures(omega0: f64, radius: f64) -> Result<ClosedForms> {
    let u = omega0 * omega0 * radius * radius;
    if u >= 1.0 {
        return Err(GeomError::InvalidInput(format!(
            "edge speed squared {u} is not below one"
        )));
    }
    Ok(ClosedForms {
        u,
        k_trace: -radius * omega0 * omega0 / (1.0 - u),
        kperp_par: -omega0 / (1.0 - u),
        kperp_par_coordinate: -omega0 / (1.0 - u).sqrt(),
    })
}

/// Conformal coordinate X(r) = arcsin(omega0 r) / omega0 flattening the
/// induced metric.
pub fn conformal_x(omega0: f64, r: f64) -> f64 {
    if omega0.abs() < 1e-14 {
        return r;
    }
    (omega0 * r).asin() / omega0
}

/// Inverse map r(X) = sin(omega0 X) / omega0.
pub fn radius_of_x(omega0: f64, x: f64) -> f64 {
    if omega0.abs() < 1e-14 {
        return x;
    }
    (omega0 * x).sin() / omega0
}

/// Conformal half-span X_R of the sheet between its two edges.
pub fn half_span(omega0: f64, radius: f64) -> f64 {
    conformal_x(omega0, radius)
}

/// In-plane channel potential 2 omega0^2 / cos^2(omega0 X).
pub fn pt_potential(omega0: f64, x: f64) -> f64 {
    let c = (omega0 * x).cos();
    2.0 * omega0 * omega0 / (c * c)
}

/// Endpoint mode data from the closed-form curvature scalars.
#[derive(Clone, Debug)]
pub struct EndpointModes {
    /// Coefficients (c2, c0) of x^2 + c2 x + c0 in x = omega^2.
    pub resolvent: (f64, f64),
    /// Discriminant c2^2 - 4 c0 = a (a - 8 b); negative throughout u in
    /// (0, 1), so the endpoint frequencies always come in conjugate pairs.
    pub disc: f64,
    pub frequencies: [Complex64; 4],
}

pub fn endpoint_modes(omega0: f64, radius: f64) -> Result<EndpointModes> {
    let cf = closed_form_curvatures(omega0, radius)?;
    let a = cf.k_trace * cf.k_trace;
    let b = cf.kperp_par * cf.kperp_par;
    let c2 = a - 2.0 * b;
    let c0 = (a + b) * b;
    let disc = c2 * c2 - 4.0 * c0;
    let s = Complex64::new(disc, 0.0).sqrt();
    let x1 = (Complex64::new(-c2, 0.0) + s) / 2.0;
    let x2 = (Complex64::new(-c2, 0.0) - s) / 2.0;
    let w1 = x1.sqrt();
    let w2 = x2.sqrt();
    Ok(EndpointModes {
        resolvent: (c2, c0),
        disc,
        frequencies: [w1, -w1, w2, -w2],
    })
}

/// Exponential rates of the non-rotating limit: the conormal channel obeys
/// psi-ddot = (tension / mass)^2 psi, one growing and one decaying branch.
pub fn straight_string_rates(tension: f64, mass: f64) -> Result<(f64, f64)> {
    if !(tension > 0.0) || !(mass > 0.0) {
        return Err(GeomError::InvalidInput(
            "straight-string rates need positive tension and mass".into(),
        ));
    }
    let r = tension / mass;
    Ok((r, -r))
}

/// Which transverse channel of the rotating sheet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BulkChannel {
    /// In the rotation plane: trigonometric well.
    InPlane,
    /// Out of plane: free wave.
    OutOfPlane,
}

fn channel_potential(channel: BulkChannel, omega0: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| match channel {
        BulkChannel::InPlane => pt_potential(omega0, x),
        BulkChannel::OutOfPlane => 0.0,
    }
}

fn guard_near_null(omega0: f64, radius: f64) -> Result<f64> {
    let u = omega0 * omega0 * radius * radius;
    if u >= NEAR_NULL_CUTOFF {
        return Err(GeomError::NearNullEdge {
            u,
            cutoff: NEAR_NULL_CUTOFF,
        });
    }
    Ok(u)
}

/// Exact out-of-plane frequencies n pi / (2 X_R) for clamped edges.
pub fn out_of_plane_exact(omega0: f64, radius: f64, n: usize) -> f64 {
    n as f64 * std::f64::consts::PI / (2.0 * half_span(omega0, radius))
}

/// Integrate f'' = (V - lambda) f across the span and return f at the far
/// edge, starting from f = 0, f' = 1.
fn shoot_once(
    lambda: f64,
    x_lo: f64,
    x_hi: f64,
    steps: usize,
    v: &impl Fn(f64) -> f64,
) -> (f64, usize) {
    let h = (x_hi - x_lo) / steps as f64;
    let mut f = 0.0f64;
    let mut df = 1.0f64;
    let mut sign_changes = 0usize;
    let mut confirmed_sign = 0.0f64;
    let mut run_max = 0.0f64;
    let rhs = |x: f64, f: f64| (v(x) - lambda) * f;
    for i in 0..steps {
        let x = x_lo + i as f64 * h;
        let k1f = df;
        let k1d = rhs(x, f);
        let k2f = df + 0.5 * h * k1d;
        let k2d = rhs(x + 0.5 * h, f + 0.5 * h * k1f);
        let k3f = df + 0.5 * h * k2d;
        let k3d = rhs(x + 0.5 * h, f + 0.5 * h * k2f);
        let k4f = df + h * k3d;
        let k4d = rhs(x + h, f + h * k3f);
        f += h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
        df += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        run_max = run_max.max(f.abs());
        // Count a node only once the value clears the noise floor again,
        // so a grazing touch of zero at an eigenvalue is not a crossing.
        if f.abs() > 1e-8 * run_max {
            if confirmed_sign != 0.0 && f.signum() != confirmed_sign {
                sign_changes += 1;
            }
            confirmed_sign = f.signum();
        }
    }
    (f, sign_changes)
}

/// First `count` frequencies by shooting with bisection refined to a
/// relative width of 1e-12 in lambda = Omega^2.
pub fn bulk_spectrum_shooting(
    omega0: f64,
    radius: f64,
    channel: BulkChannel,
    count: usize,
) -> Result<Vec<f64>> {
    guard_near_null(omega0, radius)?;
    let xr = half_span(omega0, radius);
    let v = channel_potential(channel, omega0);
    let steps = 4000;
    let base = std::f64::consts::PI / (2.0 * xr);
    let vmax = match channel {
        BulkChannel::InPlane => pt_potential(omega0, xr),
        BulkChannel::OutOfPlane => 0.0,
    };
    let lam_hi = ((count as f64 + 2.0) * base).powi(2) + vmax;
    let scan = 60 * (count + 2);
    let mut out = Vec::with_capacity(count);
    let mut prev_l = 1e-8;
    let (mut prev_f, _) = shoot_once(prev_l, -xr, xr, steps, &v);
    for j in 1..=scan {
        let l = lam_hi * j as f64 / scan as f64;
        let (fv, _) = shoot_once(l, -xr, xr, steps, &v);
        if prev_f != 0.0 && fv != 0.0 && prev_f.signum() != fv.signum() {
            let (mut lo, mut hi) = (prev_l, l);
            let mut flo = prev_f;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let (fm, _) = shoot_once(mid, -xr, xr, steps, &v);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
                if (hi - lo) <= 1e-12 * hi.abs() {
                    break;
                }
            }
            out.push((0.5 * (lo + hi)).sqrt());
            if out.len() == count {
                return Ok(out);
            }
        }
        prev_l = l;
        prev_f = fv;
    }
    Err(GeomError::NonConvergent {
        order: out.len() as f64,
        lo: prev_l,
        hi: lam_hi,
    })
}

/// Interior sign changes of the mode at the given frequency; the n-th mode
/// should show n of them.
pub fn mode_node_count(
    omega0: f64,
    radius: f64,
    channel: BulkChannel,
    omega: f64,
) -> Result<usize> {
    guard_near_null(omega0, radius)?;
    let xr = half_span(omega0, radius);
    let v = channel_potential(channel, omega0);
    let (_, nodes) = shoot_once(omega * omega, -xr, xr, 4000, &v);
    Ok(nodes)
}

/// Count of matrix eigenvalues below lambda for the standard second-order
/// difference discretization, by the signs of the LDL pivots.
fn sturm_count(diag: &[f64], off2: f64, lambda: f64) -> usize {
    let mut count = 0usize;
    let mut d = diag[0] - lambda;
    if d < 0.0 {
        count += 1;
    }
    for a in diag.iter().skip(1) {
        if d.abs() < 1e-300 {
            d = -1e-300;
        }
        d = a - lambda - off2 / d;
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// First `count` frequencies from a tridiagonal discretization with at
/// least 2000 interior points, eigenvalues located by Sturm bisection.
pub fn bulk_spectrum_matrix(
    omega0: f64,
    radius: f64,
    channel: BulkChannel,
    count: usize,
    grid: usize,
) -> Result<Vec<f64>> {
    guard_near_null(omega0, radius)?;
    let n = grid.max(2000);
    let xr = half_span(omega0, radius);
    let v = channel_potential(channel, omega0);
    let h = 2.0 * xr / (n + 1) as f64;
    let diag: Vec<f64> = (1..=n)
        .map(|j| 2.0 / (h * h) + v(-xr + j as f64 * h))
        .collect();
    let off2 = 1.0 / (h * h * h * h);
    let base = std::f64::consts::PI / (2.0 * xr);
    let vmax = match channel {
        BulkChannel::InPlane => pt_potential(omega0, xr),
        BulkChannel::OutOfPlane => 0.0,
    };
    let mut out = Vec::with_capacity(count);
    for k in 1..=count {
        let mut lo = 0.0f64;
        let mut hi = ((count as f64 + 2.0) * base).powi(2) + vmax;
        while sturm_count(&diag, off2, hi) < k {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if sturm_count(&diag, off2, mid) >= k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-13 * hi.max(1.0) {
                break;
            }
        }
        out.push((0.5 * (lo + hi)).sqrt());
    }
    Ok(out)
}

/// Solution of the clamped forced problem
/// f'' + (omega^2 - V) f = source at complex frequency.
#[derive(Clone, Debug)]
pub struct ForcedResponse {
    pub max_abs: f64,
    /// Far-edge value of the homogeneous solution; near zero means the
    /// drive sits on a resonance of the clamped problem.
    pub wronskian_proxy: f64,
}

/// Shoot a homogeneous and a particular solution from the near edge and
/// superpose them to satisfy the far clamp.
pub fn forced_response(
    omega0: f64,
    radius: f64,
    channel: BulkChannel,
    omega: Complex64,
    source: &dyn Fn(f64) -> Complex64,
) -> Result<ForcedResponse> {
    guard_near_null(omega0, radius)?;
    let xr = half_span(omega0, radius);
    let v = channel_potential(channel, omega0);
    let steps = 4000usize;
    let h = 2.0 * xr / steps as f64;
    let lam = omega * omega;

    // State: (f_h, f_h', f_p, f_p').
    let mut s = [
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
    ];
    let rhs = |x: f64, s: &[Complex64; 4]| -> [Complex64; 4] {
        let q = Complex64::new(v(x), 0.0) - lam;
        [s[1], q * s[0], s[3], q * s[2] + source(x)]
    };
    let mut hist = Vec::with_capacity(steps + 1);
    hist.push(s);
    for i in 0..steps {
        let x = -xr + i as f64 * h;
        let k1 = rhs(x, &s);
        let s2 = add(&s, &k1, 0.5 * h);
        let k2 = rhs(x + 0.5 * h, &s2);
        let s3 = add(&s, &k2, 0.5 * h);
        let k3 = rhs(x + 0.5 * h, &s3);
        let s4 = add(&s, &k3, h);
        let k4 = rhs(x + h, &s4);
        for j in 0..4 {
            s[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        hist.push(s);
    }
    let fh_far = s[0];
    let fp_far = s[2];
    let wronskian_proxy = fh_far.norm();
    if wronskian_proxy < 1e-12 {
        return Ok(ForcedResponse {
            max_abs: f64::INFINITY,
            wronskian_proxy,
        });
    }
    let c = -fp_far / fh_far;
    let mut max_abs = 0.0f64;
    for st in &hist {
        let val = st[2] + c * st[0];
        max_abs = max_abs.max(val.norm());
    }
    Ok(ForcedResponse {
        max_abs,
        wronskian_proxy,
    })
}

fn add(s: &[Complex64; 4], k: &[Complex64; 4], h: f64) -> [Complex64; 4] {
    [
        s[0] + h * k[0],
        s[1] + h * k[1],
        s[2] + h * k[2],
        s[3] + h * k[3],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn background_solve_balances_the_edge() {
        let bg = background_solve(1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(bg.omega0 * bg.omega0, 0.5, epsilon = 1e-14);
        assert_relative_eq!(bg.u, 0.5, epsilon = 1e-14);
        assert!(!bg.near_null);
        // u = omega0^2 R^2 consistency.
        assert_relative_eq!(bg.u, bg.omega0 * bg.omega0, epsilon = 1e-14);

        // Heavy tension against a light mass pushes the edge to the cone.
        let fast = background_solve(100.0, 0.1, 1.0).unwrap();
        assert!(fast.near_null);

        assert!(background_solve(-1.0, 1.0, 1.0).is_err());
        assert!(background_solve(1.0, -1.0, 1.0).is_err());
        assert!(background_solve(1.0, 1.0, 0.0).is_err());
        assert!(!background_solve(1.0, 1.0, 0.0)
            .unwrap_err()
            .is_physics());
    }

    #[test]
    fn conformal_map_round_trips() {
        let om = 0.45;
        for r in [0.05, 0.3, 0.7, 0.99, 1.5] {
            let x = conformal_x(om, r);
            assert_relative_eq!(radius_of_x(om, x), r, epsilon = 1e-12);
        }
        // The half-span satisfies sin(omega X_R) = omega R.
        let xr = half_span(om, 1.3);
        assert_relative_eq!((om * xr).sin(), om * 1.3, epsilon = 1e-14);
    }

    #[test]
    fn out_of_plane_shooting_matches_exact_spectrum() {
        let om = 0.45;
        let r = 1.0;
        let got = bulk_spectrum_shooting(om, r, BulkChannel::OutOfPlane, 5).unwrap();
        for (n, w) in got.iter().enumerate() {
            let exact = out_of_plane_exact(om, r, n + 1);
            assert_relative_eq!(*w, exact, max_relative = 1e-8);
        }
    }

    #[test]
    fn in_plane_routes_agree_and_sit_above_free_modes() {
        let om = (0.5f64).sqrt();
        let r = 1.0;
        let shoot = bulk_spectrum_shooting(om, r, BulkChannel::InPlane, 4).unwrap();
        let matr = bulk_spectrum_matrix(om, r, BulkChannel::InPlane, 4, 2000).unwrap();
        for (a, b) in shoot.iter().zip(matr.iter()) {
            assert_relative_eq!(*a, *b, max_relative = 1e-4);
        }
        for (n, w) in shoot.iter().enumerate() {
            assert!(*w > out_of_plane_exact(om, r, n + 1));
        }
        // Ground state has no interior nodes, the next mode has one.
        assert_eq!(
            mode_node_count(om, r, BulkChannel::InPlane, shoot[0]).unwrap(),
            0
        );
        assert_eq!(
            mode_node_count(om, r, BulkChannel::InPlane, shoot[1]).unwrap(),
            1
        );
    }

    #[test]
    fn near_null_edge_is_refused() {
        let err = bulk_spectrum_shooting(0.999, 1.0, BulkChannel::InPlane, 2).unwrap_err();
        match err {
            GeomError::NearNullEdge { u, cutoff } => {
                assert!(u >= cutoff);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn endpoint_modes_reference_point() {
        let om = (0.5f64).sqrt();
        let modes = endpoint_modes(om, 1.0).unwrap();
        assert_relative_eq!(modes.resolvent.0, -3.0, epsilon = 1e-12);
        assert_relative_eq!(modes.resolvent.1, 6.0, epsilon = 1e-12);
        assert_relative_eq!(modes.disc, -15.0, epsilon = 1e-12);
        for w in modes.frequencies {
            assert!(w.im.abs() > 0.1);
            // Residual of the resolvent at omega^2.
            let x = w * w;
            let res = x * x + modes.resolvent.0 * x + modes.resolvent.1;
            assert!(res.norm() < 1e-12);
        }
        // The four roots come as two conjugate-negation pairs.
        let f = modes.frequencies;
        assert_relative_eq!(f[0].re, -f[1].re, epsilon = 1e-12);
        assert_relative_eq!(f[0].im, -f[1].im, epsilon = 1e-12);
    }

    #[test]
    fn straight_string_is_exponentially_unstable() {
        let (up, down) = straight_string_rates(0.7, 2.0).unwrap();
        assert_relative_eq!(up, 0.35, epsilon = 1e-15);
        assert_relative_eq!(down, -0.35, epsilon = 1e-15);
        assert!(up > 0.0, "a growing branch always exists");
    }

    #[test]
    fn bulk_operator_factors_through_the_conformal_well() {
        use crate::eom::{bulk_jacobi_apply, NormalField, SheetFieldJet};
        use crate::families;
        use nalgebra::DMatrix;
        use std::sync::Arc;

        let om: f64 = 0.45;
        let fam = families::helicoid(om, 1.0).axis_framed();
        let big = 1.3f64;
        let freq = 0.9f64;
        let f = move |x: f64| (big * x).sin() + 0.2;
        let fp = move |x: f64| big * (big * x).cos();
        let fpp = move |x: f64| -big * big * (big * x).sin();

        // Phi^1(t, r) = sin(freq t) f(X(r)) with exact jets via the chain
        // rule through X(r).
        let comp: SheetFieldJet = Arc::new(move |xi: &[f64]| {
            let (t, r) = (xi[0], xi[1]);
            let x = conformal_x(om, r);
            let s = 1.0 - om * om * r * r;
            let xr = 1.0 / s.sqrt();
            let xrr = om * om * r / s.powf(1.5);
            let (sn, cs) = (freq * t).sin_cos();
            let val = sn * f(x);
            let grad = vec![freq * cs * f(x), sn * fp(x) * xr];
            let mut hess = DMatrix::zeros(2, 2);
            hess[(0, 0)] = -freq * freq * sn * f(x);
            hess[(0, 1)] = freq * cs * fp(x) * xr;
            hess[(1, 0)] = hess[(0, 1)];
            hess[(1, 1)] = sn * (fpp(x) * xr * xr + fp(x) * xrr);
            (val, grad, hess)
        });
        let zero: SheetFieldJet = Arc::new(|_| (0.0, vec![0.0; 2], DMatrix::zeros(2, 2)));
        let field = NormalField {
            comps: vec![comp, zero],
        };

        for (t, r) in [(0.3, 0.4), (-0.7, 0.8), (1.1, 0.15)] {
            let out = bulk_jacobi_apply(&fam.sheet, &field, &[t, r]).unwrap();
            let x = conformal_x(om, r);
            let c2 = (om * x).cos().powi(2);
            let sn = (freq * t).sin();
            let well = sn * (-freq * freq * f(x) - fpp(x) + pt_potential(om, x) * f(x));
            let expect = -well / c2;
            assert_relative_eq!(out[0], expect, epsilon = 1e-9);
            assert!(out[1].abs() < 1e-10, "out-of-plane leak {}", out[1]);
        }
    }

    #[test]
    fn forced_response_detects_resonance() {
        let om = 0.45;
        let r = 1.0;
        let source = |x: f64| Complex64::new((0.8 * x).cos(), 0.1 * x);
        // Complex endpoint frequency: off the real spectrum, bounded reply.
        let modes = endpoint_modes(om, r).unwrap();
        let resp = forced_response(om, r, BulkChannel::InPlane, modes.frequencies[0], &source)
            .unwrap();
        assert!(resp.max_abs.is_finite());
        assert!(resp.wronskian_proxy > 1e-3, "off resonance");
        // Driving exactly at a clamped eigenfrequency collapses the
        // homogeneous far-edge value.
        let spec = bulk_spectrum_shooting(om, r, BulkChannel::InPlane, 1).unwrap();
        let on = forced_response(
            om,
            r,
            BulkChannel::InPlane,
            Complex64::new(spec[0], 0.0),
            &source,
        )
        .unwrap();
        assert!(
            on.wronskian_proxy < 1e-5 * resp.wronskian_proxy,
            "on resonance: {} vs {}",
            on.wronskian_proxy,
            resp.wronskian_proxy
        );
    }
}
