//! Shared difference-stencil policy: central quotients with one Richardson
//! refinement, steps scaled by the machine epsilon and the coordinate size.

use crate::error::{GeomError, Result};

/// Step for first central differences: eps_mach^(1/3) * max(1, |x|).
pub fn step_first(x: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(1.0)
}

/// Step for second central differences: eps_mach^(1/4) * max(1, |x|).
pub fn step_second(x: f64) -> f64 {
    f64::EPSILON.powf(0.25) * x.abs().max(1.0)
}

/// Step for differencing a quantity that itself carries absolute error
/// `noise`: balances truncation against noise amplification.
pub fn step_noisy(x: f64, noise: f64) -> f64 {
    noise.max(f64::EPSILON).cbrt() * x.abs().max(1.0)
}

/// Central first derivative of a vector-valued function with one Richardson
/// level: (4 D_{h/2} - D_h) / 3.
pub fn central_first<F>(f: F, x: f64, h: f64) -> Vec<f64>
where
    F: Fn(f64) -> Vec<f64>,
{
    let quot = |hh: f64| -> Vec<f64> {
        let p = f(x + hh);
        let m = f(x - hh);
        p.iter()
            .zip(m.iter())
            .map(|(a, b)| (a - b) / (2.0 * hh))
            .collect()
    };
    let d1 = quot(h);
    let d2 = quot(0.5 * h);
    d1.iter()
        .zip(d2.iter())
        .map(|(a, b)| (4.0 * b - a) / 3.0)
        .collect()
}

/// Fallible variant of [`central_first`].
pub fn try_central_first<F>(f: F, x: f64, h: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    let quot = |hh: f64| -> Result<Vec<f64>> {
        let p = f(x + hh)?;
        let m = f(x - hh)?;
        Ok(p.iter()
            .zip(m.iter())
            .map(|(a, b)| (a - b) / (2.0 * hh))
            .collect())
    };
    let d1 = quot(h)?;
    let d2 = quot(0.5 * h)?;
    Ok(d1
        .iter()
        .zip(d2.iter())
        .map(|(a, b)| (4.0 * b - a) / 3.0)
        .collect())
}

/// Second derivative along one coordinate (central three-point).
pub fn central_second<F>(f: F, x: f64, h: f64) -> Vec<f64>
where
    F: Fn(f64) -> Vec<f64>,
{
    let p = f(x + h);
    let c = f(x);
    let m = f(x - h);
    p.iter()
        .zip(c.iter())
        .zip(m.iter())
        .map(|((a, b), d)| (a - 2.0 * b + d) / (h * h))
        .collect()
}

/// Mixed second derivative along two coordinates (four-point cross stencil).
pub fn central_mixed<F>(f: F, x: f64, y: f64, hx: f64, hy: f64) -> Vec<f64>
where
    F: Fn(f64, f64) -> Vec<f64>,
{
    let pp = f(x + hx, y + hy);
    let pm = f(x + hx, y - hy);
    let mp = f(x - hx, y + hy);
    let mm = f(x - hx, y - hy);
    pp.iter()
        .zip(pm.iter())
        .zip(mp.iter())
        .zip(mm.iter())
        .map(|(((a, b), c), d)| (a - b - c + d) / (4.0 * hx * hy))
        .collect()
}

/// Result of an epsilon-family difference quotient.
#[derive(Debug, Clone)]
pub struct QuotientFamily {
    /// Raw central quotients, one per epsilon in the schedule.
    pub quotients: Vec<Vec<f64>>,
    /// Richardson extrapolation of the two smallest epsilons.
    pub extrapolated: Vec<f64>,
    /// Observed convergence order, when a clean signal exists.
    pub order: Option<f64>,
}

/// Assemble central quotients over a geometric epsilon schedule (ratio 2),
/// Richardson-extrapolate, and estimate the convergence order from the
/// component with the strongest signal.
pub fn quotient_family<F>(f: F, schedule: &[f64]) -> Result<QuotientFamily>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    assert!(schedule.len() >= 2, "need at least two epsilons");
    let mut quotients = Vec::with_capacity(schedule.len());
    for &eps in schedule {
        let p = f(eps)?;
        let m = f(-eps)?;
        quotients.push(
            p.iter()
                .zip(m.iter())
                .map(|(a, b)| (a - b) / (2.0 * eps))
                .collect::<Vec<f64>>(),
        );
    }
    let last = &quotients[quotients.len() - 1];
    let prev = &quotients[quotients.len() - 2];
    let extrapolated: Vec<f64> = last
        .iter()
        .zip(prev.iter())
        .map(|(a, b)| (4.0 * a - b) / 3.0)
        .collect();

    let order = if quotients.len() >= 3 {
        estimate_order(&quotients)
    } else {
        None
    };
    Ok(QuotientFamily {
        quotients,
        extrapolated,
        order,
    })
}

/// Order estimate log2(|D1 - D2| / |D2 - D3|) on the component with the
/// largest leading difference; None when the signal sits in roundoff.
fn estimate_order(quotients: &[Vec<f64>]) -> Option<f64> {
    let n = quotients.len();
    let (a, b, c) = (&quotients[n - 3], &quotients[n - 2], &quotients[n - 1]);
    let mut best = None;
    let mut best_mag = 0.0;
    for i in 0..a.len() {
        let d1 = (a[i] - b[i]).abs();
        let d2 = (b[i] - c[i]).abs();
        if d1 > 1e-11 && d2 > 1e-12 && d1 > best_mag {
            best_mag = d1;
            best = Some((d1 / d2).log2());
        }
    }
    best
}

/// Enforce the convergence window on an observed order.
pub fn require_order(order: Option<f64>, lo: f64, hi: f64) -> Result<()> {
    if let Some(p) = order {
        if p < lo || p > hi {
            return Err(GeomError::NonConvergent { order: p, lo, hi });
        }
    }
    Ok(())
}
