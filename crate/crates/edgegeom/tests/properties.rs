//! Randomized invariants. Each test states a structural property that must
//! hold for every input in its range, then lets proptest hunt for a break:
//! frame-gauge covariance of the curvature scalars, linearity of the edge
//! responses, the endpoint balance and mode algebra, and flatness of planes
//! in general position.

use std::sync::{Arc, OnceLock};

use edgegeom::deformation::{self, EdgeField, EdgeScalar, ResponseInputs};
use edgegeom::edge::EdgeContext;
use edgegeom::families;
use edgegeom::helicoid;
use proptest::prelude::*;

/// One sinusoidal edge scalar with its two parameter derivatives.
fn mode(amp: f64, freq: f64, phase: f64) -> EdgeScalar {
    Arc::new(move |u: f64| {
        let s = (freq * u + phase).sin();
        let c = (freq * u + phase).cos();
        (amp * s, amp * freq * c, -amp * freq * freq * s)
    })
}

fn field_from(spec: &[(f64, f64, f64); 3]) -> EdgeField {
    EdgeField {
        psi: mode(spec[0].0, spec[0].1, spec[0].2),
        phi: vec![
            mode(spec[1].0, spec[1].1, spec[1].2),
            mode(spec[2].0, spec[2].1, spec[2].2),
        ],
        eta_grad_phi: None,
    }
}

fn channel() -> impl Strategy<Value = (f64, f64, f64)> {
    (-1.5..1.5f64, 0.3..2.5f64, 0.0..6.3f64)
}

fn field_spec() -> impl Strategy<Value = [(f64, f64, f64); 3]> {
    [channel(), channel(), channel()]
}

/// Background inputs for the linearity check, built once.
fn linearity_inputs() -> &'static ResponseInputs {
    static INPUTS: OnceLock<ResponseInputs> = OnceLock::new();
    INPUTS.get_or_init(|| {
        let fam = families::helicoid(0.6, 1.0);
        let ctx = EdgeContext::from_family(&fam).expect("helicoid family has an edge");
        deformation::response_inputs(&ctx, 0.25).expect("response inputs at a regular point")
    })
}

fn flatten(r: &deformation::EdgeResponses) -> Vec<f64> {
    let mut out = vec![r.dh, r.dk_hat, r.dk_trace_hat, r.dk_trace_plain];
    out.extend_from_slice(&r.dbigk_hat);
    out.extend_from_slice(&r.dbigk_trace_hat);
    out.extend_from_slice(&r.dbigk_trace_plain);
    out.extend_from_slice(&r.gamma_0i);
    out.extend(r.gamma_ij.iter().copied());
    out
}

fn frame_pool() -> Vec<families::Family> {
    let mut fams = families::standard_ensemble();
    fams.push(families::hyperbolic_edge(0.6, 2.0));
    fams.push(families::helicoid_moving_edge(0.4, 0.9, 0.15, 0.7));
    fams
}

/// Family index, a shuffled seed order for its ambient dimension, and a
/// blend parameter between two of its interior samples.
fn frame_case() -> impl Strategy<Value = (usize, Vec<usize>, f64)> {
    let count = frame_pool().len();
    (0..count).prop_flat_map(|idx| {
        let dim = frame_pool()[idx].sheet.embedding.dim_ambient;
        let order: Vec<usize> = (0..dim).collect();
        (Just(idx), Just(order).prop_shuffle(), 0.0..1.0f64)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Reordering the Gram-Schmidt trial directions rotates the normal
    /// frame, so the componentwise data changes; the scalars K^i K_i and
    /// K^i_{ab} K_i^{ab} and the induced metric must not.
    #[test]
    fn curvature_scalars_survive_frame_reseeding((idx, order, t) in frame_case()) {
        let fams = frame_pool();
        let fam = &fams[idx];
        let p0 = &fam.bulk_samples[0];
        let p1 = &fam.bulk_samples[1];
        let xi: Vec<f64> = p0.iter().zip(p1).map(|(a, b)| a + t * (b - a)).collect();
        prop_assume!(fam.sheet.embedding.domain.contains(&xi));

        let d = fam.sheet.embedding.dim_sheet;
        let base = fam.sheet.jet(&xi).expect("jet at an interior point");
        let alt = fam.sheet.jet_with_seeds(&xi, &order, d).expect("jet with reordered seeds");

        let ksq_gap = (base.k_squared() - alt.k_squared()).abs();
        prop_assert!(ksq_gap <= 1e-10, "K.K drifted by {ksq_gap:.3e} for {}", fam.name);

        let kiki = |j: &edgegeom::worldsheet::WorldsheetJet| -> f64 {
            j.mean_k.iter().map(|v| v * v).sum()
        };
        let mean_gap = (kiki(&base) - kiki(&alt)).abs();
        prop_assert!(mean_gap <= 1e-10, "K^i K_i drifted by {mean_gap:.3e} for {}", fam.name);

        let gamma_gap = (&base.gamma - &alt.gamma).amax();
        prop_assert!(gamma_gap <= 1e-10, "metric drifted by {gamma_gap:.3e} for {}", fam.name);
    }

    /// A plane pushed through an arbitrary seeded boost, rotations, and a
    /// shift is still a plane: flat induced metric, zero curvature, zero
    /// twist, and a straight proper-time edge.
    #[test]
    fn general_position_planes_stay_flat(seed in any::<u64>(), t in 0.0..1.0f64, ue in -3.0..3.0f64) {
        let fam = families::tilted_plane(seed);
        let p0 = &fam.bulk_samples[0];
        let p1 = &fam.bulk_samples[1];
        let xi: Vec<f64> = p0.iter().zip(p1).map(|(a, b)| a + t * (b - a)).collect();

        let jet = fam.sheet.jet(&xi).expect("interior jet");
        prop_assert!(jet.k_squared().abs() <= 1e-12);
        prop_assert!(jet.mean_k.iter().all(|v| v.abs() <= 1e-12));
        prop_assert!((jet.gamma[(0, 0)] + 1.0).abs() <= 1e-12);
        prop_assert!((jet.gamma[(1, 1)] - 1.0).abs() <= 1e-12);
        prop_assert!(jet.gamma[(0, 1)].abs() <= 1e-12);
        for w in &jet.twist {
            prop_assert!(w.amax() <= 1e-10);
        }

        let ctx = EdgeContext::from_family(&fam).expect("tilted plane has an edge");
        let pj = ctx.projections(ue).expect("edge projections");
        prop_assert!((pj.h + 1.0).abs() <= 1e-12, "edge clock drifted: h = {}", pj.h);
        prop_assert!(pj.k_trace.abs() <= 1e-10);
        for v in pj.kperp_par.iter().chain(&pj.kperp_perp).chain(&pj.kpar_par) {
            prop_assert!(v.abs() <= 1e-10);
        }
        prop_assert!(pj.recon_residual <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// response(a F + b G) = a response(F) + b response(G), componentwise,
    /// for every response the kernel produces.
    #[test]
    fn responses_are_linear(
        a in -2.0..2.0f64,
        b in -2.0..2.0f64,
        f_spec in field_spec(),
        g_spec in field_spec(),
    ) {
        let inp = linearity_inputs();
        let f = field_from(&f_spec);
        let g = field_from(&g_spec);
        let combo = EdgeField::linear_combination(a, &f, b, &g);

        let rf = flatten(&deformation::all_responses(inp, &f, 0.25));
        let rg = flatten(&deformation::all_responses(inp, &g, 0.25));
        let rc = flatten(&deformation::all_responses(inp, &combo, 0.25));

        for (i, ((cf, cg), cc)) in rf.iter().zip(&rg).zip(&rc).enumerate() {
            let gap = (cc - (a * cf + b * cg)).abs();
            prop_assert!(gap <= 1e-12, "component {i} broke linearity by {gap:.3e}");
        }
    }
}

proptest! {
    /// background_solve returns a timelike edge whose speed balances the
    /// tension against the endpoint mass: M R w0^2 = mu (1 - R^2 w0^2).
    #[test]
    fn solved_backgrounds_balance_the_endpoint(
        tension in 0.1..4.0f64,
        mass in 0.05..4.0f64,
        radius in 0.2..3.0f64,
    ) {
        let bg = helicoid::background_solve(tension, mass, radius).expect("solvable background");
        prop_assert!(bg.u > 0.0 && bg.u < 1.0, "edge speed u = {} not timelike", bg.u);
        prop_assert_eq!(bg.near_null, bg.u >= helicoid::NEAR_NULL_CUTOFF);

        let w2 = bg.omega0 * bg.omega0;
        let balance = mass * radius * w2 - tension * (1.0 - radius * radius * w2);
        prop_assert!(balance.abs() <= 1e-12, "end equation misses by {balance:.3e}");
    }

    /// Endpoint frequencies stay complex across the whole timelike range,
    /// come in conjugate pairs, and re-expand to the quartic they solve.
    #[test]
    fn endpoint_modes_stay_complex_and_solve_their_quartic(
        u in 0.02..0.96f64,
        radius in 0.2..3.0f64,
    ) {
        let omega0 = u.sqrt() / radius;
        let em = helicoid::endpoint_modes(omega0, radius).expect("modes in the timelike range");

        prop_assert!(em.disc < 0.0, "discriminant {} is not negative", em.disc);
        for w in &em.frequencies {
            prop_assert!(
                w.im.abs() > 1e-8 * w.norm(),
                "frequency {w} is too close to real"
            );
            let conj_gap = em
                .frequencies
                .iter()
                .map(|v| (v - w.conj()).norm())
                .fold(f64::INFINITY, f64::min);
            prop_assert!(
                conj_gap <= 1e-10 * w.norm().max(1.0),
                "conjugate of {w} missing from the root set"
            );
        }

        let x1 = em.frequencies[0] * em.frequencies[0];
        let x2 = em.frequencies[2] * em.frequencies[2];
        let (c2, c0) = em.resolvent;
        let scale = c2.abs().max(c0.abs()).max(1.0);
        let sum_gap = (-(x1 + x2) - c2).norm();
        let prod_gap = (x1 * x2 - c0).norm();
        prop_assert!(sum_gap <= 1e-10 * scale, "root sum off by {sum_gap:.3e}");
        prop_assert!(prod_gap <= 1e-10 * scale, "root product off by {prod_gap:.3e}");
    }
}
