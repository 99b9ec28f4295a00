//! The five commands behind the subcommand dispatch. Each returns the
//! finished artifact text so main can write it atomically.

use std::fmt::Write as _;

use edgegeom::edge::EdgeContext;
use edgegeom::eom::{self, BackgroundSettings};
use edgegeom::families::{self, Family};
use edgegeom::helicoid::{self, BulkChannel};
use edgegeom::verify::{self, SuiteConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{linspace, parse_grid_2d, parse_span, CliError, RunConfig};
use crate::metrics;
use crate::output::{self, Artifact, Conventions};

fn tool_line() -> String {
    format!("edgegeom {}", env!("CARGO_PKG_VERSION"))
}

/// Rotation state from the flags: an explicit omega0 wins, otherwise the
/// (mu, mass, radius) balance is solved. Refuses edges at or past the
/// light cone.
fn resolve_rotation(cfg: &RunConfig) -> Result<(f64, f64, f64, String), CliError> {
    let radius = cfg.radius.unwrap_or(1.0);
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(CliError::Config(format!("radius must be positive, got {radius}")));
    }
    let (omega0, u, source) = match cfg.omega0 {
        Some(w) => {
            if !(w > 0.0) || !w.is_finite() {
                return Err(CliError::Config(format!("omega0 must be positive, got {w}")));
            }
            (w, w * w * radius * radius, "given".to_string())
        }
        None => {
            let mu = cfg.mu.unwrap_or(1.0);
            let mass = cfg.mass.unwrap_or(1.0);
            let bg = helicoid::background_solve(mu, mass, radius)?;
            (bg.omega0, bg.u, format!("solved from mu={mu}, mass={mass}"))
        }
    };
    if u >= 1.0 {
        return Err(CliError::Physics(format!(
            "edge speed squared u = {u:.4} reaches the light cone; \
             lower omega0 or radius"
        )));
    }
    Ok((omega0, radius, u, source))
}

/// On-shell edge mass for a rotating sheet: M R w0^2 = mu (1 - u).
fn onshell_mass(mu: f64, omega0: f64, radius: f64, u: f64) -> f64 {
    mu * (1.0 - u) / (radius * omega0 * omega0)
}

struct FamilySetup {
    fam: Family,
    tension: f64,
    edge_mass: f64,
    /// Bulk grid box in sheet parameters.
    box_lo: [f64; 2],
    box_hi: [f64; 2],
    params: Vec<(&'static str, String)>,
}

fn build_family(cfg: &RunConfig, name: &str) -> Result<FamilySetup, CliError> {
    let mu = cfg.mu.unwrap_or(1.0);
    let inset_box = |fam: &Family| -> ([f64; 2], [f64; 2]) {
        let d = &fam.sheet.embedding.domain;
        let w0 = d.hi[0] - d.lo[0];
        let w1 = d.hi[1] - d.lo[1];
        (
            [d.lo[0] + 0.02 * w0, d.lo[1] + 0.02 * w1],
            [d.hi[0] - 0.02 * w0, d.hi[1] - 0.02 * w1],
        )
    };

    match name {
        "helicoid" | "helicoid-offshell" => {
            let (omega0, radius, u, source) = resolve_rotation(cfg)?;
            let fam = if name == "helicoid" {
                families::helicoid(omega0, radius).axis_framed()
            } else {
                families::helicoid_offshell(omega0, radius).axis_framed()
            };
            let edge_mass = cfg
                .mass
                .unwrap_or_else(|| onshell_mass(mu, omega0, radius, u));
            Ok(FamilySetup {
                fam,
                tension: mu,
                edge_mass,
                box_lo: [-2.0, 0.05 * radius],
                box_hi: [2.0, radius],
                params: vec![
                    ("omega0", output::float(omega0)),
                    ("omega0-source", source),
                    ("radius", output::float(radius)),
                    ("u", output::float(u)),
                ],
            })
        }
        "helicoid-moving-edge" => {
            let (w, r0, rho, nu) = (0.4, 0.9, 0.15, 0.7);
            Ok(FamilySetup {
                fam: families::helicoid_moving_edge(w, r0, rho, nu).axis_framed(),
                tension: mu,
                edge_mass: cfg.mass.unwrap_or(1.0),
                box_lo: [-2.0, 0.05 * r0],
                box_hi: [2.0, r0 - rho],
                params: vec![
                    ("omega0", output::float(w)),
                    ("edge-radius", format!("{r0} + {rho} sin({nu} t)")),
                ],
            })
        }
        "hyperbolic-edge" => {
            let mass = cfg.mass.unwrap_or(2.0);
            let mu = cfg.mu.unwrap_or(0.7);
            if !(mu > 0.0) || !(mass > 0.0) {
                return Err(CliError::Config(
                    "hyperbolic-edge needs positive mu and mass".into(),
                ));
            }
            let alpha = mu / mass;
            let x0 = cfg.radius.unwrap_or(2.0);
            let fam = families::hyperbolic_edge(alpha, x0).axis_framed();
            let (box_lo, box_hi) = inset_box(&fam);
            Ok(FamilySetup {
                fam,
                tension: mu,
                edge_mass: mass,
                box_lo,
                box_hi,
                params: vec![
                    ("acceleration", output::float(alpha)),
                    ("apex", output::float(x0)),
                ],
            })
        }
        "half-plane" | "cylinder" | "catenary" | "twisted-band" | "tilted-plane" => {
            let fam = match name {
                "half-plane" => families::half_plane().axis_framed(),
                "cylinder" => families::cylinder(cfg.radius.unwrap_or(0.8)).axis_framed(),
                "catenary" => families::catenary(cfg.radius.unwrap_or(1.1)).axis_framed(),
                "twisted-band" => families::twisted_band(),
                _ => families::tilted_plane(cfg.seed.unwrap_or(7)),
            };
            let (box_lo, box_hi) = inset_box(&fam);
            let mut params: Vec<(&'static str, String)> = Vec::new();
            if matches!(name, "cylinder" | "catenary") {
                params.push(("radius", output::float(cfg.radius.unwrap_or(
                    if name == "cylinder" { 0.8 } else { 1.1 },
                ))));
            }
            if name == "tilted-plane" {
                params.push(("seed", cfg.seed.unwrap_or(7).to_string()));
            }
            Ok(FamilySetup {
                fam,
                tension: mu,
                edge_mass: cfg.mass.unwrap_or(1.0),
                box_lo,
                box_hi,
                params,
            })
        }
        other => Err(CliError::Config(format!(
            "unknown family '{other}'; choose helicoid, helicoid-offshell, \
             helicoid-moving-edge, half-plane, cylinder, catenary, twisted-band, \
             hyperbolic-edge, or tilted-plane"
        ))),
    }
}

fn push_row(rows: &mut String, kind: &str, a: f64, b: Option<f64>, quantity: &str, value: f64) {
    let b = match b {
        Some(v) => output::float(v),
        None => String::new(),
    };
    let _ = writeln!(
        rows,
        "{kind},{},{b},{quantity},{}",
        output::float(a),
        output::float(value)
    );
}

/// Geometry report: per-point jets and field-equation residuals of a family,
/// or the metric/curvature table of a bare chart.
pub fn report(cfg: &RunConfig) -> Result<Artifact, CliError> {
    match (&cfg.family, &cfg.metric) {
        (Some(f), None) => report_family(cfg, f),
        (None, Some(m)) => report_metric(cfg, m),
        (Some(_), Some(_)) => Err(CliError::Config(
            "report takes either --family or --metric, not both".into(),
        )),
        (None, None) => Err(CliError::Config(
            "report needs --family <name> or --metric <name>".into(),
        )),
    }
}

fn report_family(cfg: &RunConfig, name: &str) -> Result<Artifact, CliError> {
    let setup = build_family(cfg, name)?;
    let (nt, nr) = parse_grid_2d(cfg.grid.as_deref().unwrap_or("20x20"))?;
    let fam = &setup.fam;

    let settings = BackgroundSettings {
        tension: setup.tension,
        edge_mass: setup.edge_mass,
    };
    let residuals = eom::background_residuals(fam, settings)?;

    let mut rows = String::new();
    let mut bulk_rows = 0usize;
    for &ta in &linspace(setup.box_lo[0], setup.box_hi[0], nt) {
        for &rb in &linspace(setup.box_lo[1], setup.box_hi[1], nr) {
            let xi = [ta, rb];
            if !fam.sheet.embedding.domain.contains(&xi) {
                continue;
            }
            let jet = fam.sheet.jet(&xi)?;
            bulk_rows += 1;
            for (mu, v) in jet.x.iter().enumerate() {
                push_row(&mut rows, "bulk", ta, Some(rb), &format!("x{mu}"), *v);
            }
            for i in 0..2 {
                for j in 0..=i {
                    push_row(
                        &mut rows,
                        "bulk",
                        ta,
                        Some(rb),
                        &format!("gamma_{i}{j}"),
                        jet.gamma[(i, j)],
                    );
                }
            }
            for (n, k) in jet.k.iter().enumerate() {
                for i in 0..2 {
                    for j in 0..=i {
                        push_row(
                            &mut rows,
                            "bulk",
                            ta,
                            Some(rb),
                            &format!("k{}_{i}{j}", n + 1),
                            k[(i, j)],
                        );
                    }
                }
            }
            for (n, v) in jet.mean_k.iter().enumerate() {
                push_row(&mut rows, "bulk", ta, Some(rb), &format!("mean_k{}", n + 1), *v);
            }
            let twist_max = jet.twist.iter().map(|w| w.amax()).fold(0.0f64, f64::max);
            push_row(&mut rows, "bulk", ta, Some(rb), "twist_max", twist_max);
            let residual = setup.tension
                * jet.mean_k.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
            push_row(&mut rows, "bulk", ta, Some(rb), "bulk_residual", residual);
        }
    }

    let mut edge_rows = 0usize;
    if fam.edge.is_some() {
        let ctx = EdgeContext::from_family(fam)?;
        for (idx, &u) in fam.edge_samples.iter().enumerate() {
            let jet = ctx.jet(u)?;
            let proj = ctx.projections(u)?;
            edge_rows += 1;
            for (mu, v) in jet.sheet.x.iter().enumerate() {
                push_row(&mut rows, "edge", u, None, &format!("x{mu}"), *v);
            }
            push_row(&mut rows, "edge", u, None, "h", jet.h);
            for (leg, v) in jet.l.iter().enumerate() {
                let label = if leg == 0 {
                    "l_eta".to_string()
                } else {
                    format!("l_n{leg}")
                };
                push_row(&mut rows, "edge", u, None, &label, *v);
            }
            push_row(&mut rows, "edge", u, None, "k_trace", proj.k_trace);
            for (i, v) in proj.kperp_par.iter().enumerate() {
                push_row(&mut rows, "edge", u, None, &format!("kperp_par_{}", i + 1), *v);
            }
            for (i, v) in proj.kperp_perp.iter().enumerate() {
                push_row(&mut rows, "edge", u, None, &format!("kperp_perp_{}", i + 1), *v);
            }
            for (i, v) in proj.kpar_par.iter().enumerate() {
                push_row(&mut rows, "edge", u, None, &format!("kpar_par_{}", i + 1), *v);
            }
            push_row(&mut rows, "edge", u, None, "twist_par_max", proj.omega_par.amax());
            let res_max = residuals.edge_residuals[idx]
                .iter()
                .map(|v| v.abs())
                .fold(0.0f64, f64::max);
            push_row(&mut rows, "edge", u, None, "edge_residual", res_max);
        }
    }

    let mut params: Vec<(&str, String)> = vec![
        ("command", "report".into()),
        ("family", fam.name.clone()),
        ("grid", format!("{nt}x{nr}")),
        ("tension", output::float(setup.tension)),
        ("edge-mass", output::float(setup.edge_mass)),
    ];
    params.extend(setup.params.iter().map(|(k, v)| (*k, v.clone())));
    params.push(("mean-curvature-max", output::float(residuals.bulk_max)));
    params.push(("edge-residual-max", output::float(residuals.edge_max)));
    params.push(("edge-route-gap", output::float(residuals.split_gap)));
    params.push(("bulk-rows", bulk_rows.to_string()));
    params.push(("edge-rows", edge_rows.to_string()));

    let mut text = output::csv_header("report", &params);
    text.push_str("kind,a,b,quantity,value\n");
    text.push_str(&rows);

    let summary = format!(
        "report: {} bulk points, {} edge points; mean curvature max {:.3e}, \
         edge residual max {:.3e}",
        bulk_rows, edge_rows, residuals.bulk_max, residuals.edge_max
    );
    Ok(Artifact::passing(text, summary))
}

fn report_metric(cfg: &RunConfig, spec: &str) -> Result<Artifact, CliError> {
    let provider = metrics::provider_by_name(spec)?;
    let (na, nb) = parse_grid_2d(cfg.grid.as_deref().unwrap_or("10x10"))?;
    let dim = provider.dim;
    if dim < 2 {
        return Err(CliError::Config(format!(
            "metric chart has dimension {dim}; the report grid needs at least 2"
        )));
    }

    // Sweep the last two coordinates; anchor the rest inside the chart.
    let anchor = metrics::chart_anchor(&provider.domain);
    let (ia, ib) = (dim - 2, dim - 1);
    let span = |idx: usize| -> (f64, f64) {
        let (lo, hi) = (provider.domain.lo[idx], provider.domain.hi[idx]);
        if lo.is_finite() && hi.is_finite() {
            let w = hi - lo;
            (lo + 0.05 * w, hi - 0.05 * w)
        } else {
            (-1.0, 1.0)
        }
    };
    let (alo, ahi) = span(ia);
    let (blo, bhi) = span(ib);

    let mut rows = String::new();
    let mut worst_pair = 0.0f64;
    let mut worst_bianchi = 0.0f64;
    for &a in &linspace(alo, ahi, na) {
        for &b in &linspace(blo, bhi, nb) {
            let mut x = anchor.clone();
            x[ia] = a;
            x[ib] = b;
            let sample = provider.curvature_at(&x)?;
            for i in 0..dim {
                for j in 0..=i {
                    push_row(
                        &mut rows,
                        "chart",
                        a,
                        Some(b),
                        &format!("g_{i}{j}"),
                        sample.metric[(i, j)],
                    );
                }
            }
            let mut rmax = 0.0f64;
            for p in 0..dim {
                for q in 0..dim {
                    for r in 0..dim {
                        for s in 0..dim {
                            rmax = rmax.max(sample.riemann.get(p, q, r, s).abs());
                        }
                    }
                }
            }
            let sym = sample.symmetry_residuals();
            worst_pair = worst_pair.max(sym.pair_exchange);
            worst_bianchi = worst_bianchi.max(sym.bianchi);
            push_row(&mut rows, "chart", a, Some(b), "riemann_max", rmax);
            push_row(&mut rows, "chart", a, Some(b), "riemann_pair_exchange", sym.pair_exchange);
            push_row(&mut rows, "chart", a, Some(b), "riemann_bianchi", sym.bianchi);
        }
    }

    let anchor_str = anchor
        .iter()
        .map(|v| output::float(*v))
        .collect::<Vec<_>>()
        .join(" ");
    let params: Vec<(&str, String)> = vec![
        ("command", "report".into()),
        ("metric", provider.name.clone()),
        ("dimension", dim.to_string()),
        ("grid", format!("{na}x{nb}")),
        ("swept-coordinates", format!("x{ia} x{ib}")),
        ("anchor", anchor_str),
        ("riemann-pair-exchange-max", output::float(worst_pair)),
        ("riemann-bianchi-max", output::float(worst_bianchi)),
    ];

    let mut text = output::csv_header("report", &params);
    text.push_str("kind,a,b,quantity,value\n");
    text.push_str(&rows);

    let summary = format!(
        "report: chart '{}' on a {na}x{nb} grid; symmetry residuals {:.3e} / {:.3e}",
        provider.name, worst_pair, worst_bianchi
    );
    Ok(Artifact::passing(text, summary))
}

/// Finite-difference verification sweep; JSON lines, one record per check.
pub fn verify(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let preset = cfg.suite.as_deref().unwrap_or("default");
    let mut suite = match preset {
        "default" => SuiteConfig::default(),
        "quick" => SuiteConfig {
            seeded_fields: 2,
            edge_points: 1,
            bulk_points: 1,
            ..SuiteConfig::default()
        },
        other => {
            return Err(CliError::Config(format!(
                "unknown suite '{other}'; choose default or quick"
            )))
        }
    };
    if let Some(seed) = cfg.seed {
        suite.seed = seed;
    }
    if let Some(tol) = cfg.tol {
        if !(tol > 0.0) {
            return Err(CliError::Config(format!("tolerance must be positive, got {tol}")));
        }
        suite.tol_rel = tol;
    }

    let report = verify::run_suite(&suite);

    let header = serde_json::json!({
        "kind": "header",
        "tool": tool_line(),
        "conventions": Conventions::default(),
        "suite": preset,
        "seed": suite.seed,
        "tol_rel": suite.tol_rel,
        "tol_abs": suite.tol_abs,
    });
    let mut buf: Vec<u8> = Vec::new();
    {
        use std::io::Write;
        writeln!(buf, "{header}").map_err(CliError::from)?;
    }
    verify::write_jsonl(&report, &mut buf).map_err(CliError::from)?;
    let text = String::from_utf8(buf)
        .map_err(|e| CliError::Config(format!("report is not UTF-8: {e}")))?;

    let n = report.records.len();
    let ok = n > 0 && report.pass_fraction >= 0.95;
    let summary = format!(
        "verify: {n} checks, {} passed, {} failed, pass fraction {:.4}",
        report.passed, report.failed, report.pass_fraction
    );
    Ok(Artifact {
        text,
        summary,
        ok,
    })
}

#[derive(Serialize)]
struct ResolventOut {
    /// Coefficients of x^2 + c2 x + c0 in x = omega^2, leading first.
    quadratic: [f64; 3],
    discriminant: f64,
}

#[derive(Serialize)]
struct FrequencyOut {
    re: f64,
    im: f64,
    /// |Im omega| / |omega|; positive for a genuinely complex mode.
    im_ratio: f64,
}

#[derive(Serialize)]
struct ModesArtifact {
    tool: String,
    conventions: Conventions,
    parameters: serde_json::Value,
    omega0: f64,
    omega0_sq: f64,
    u: f64,
    near_null: bool,
    resolvent: ResolventOut,
    frequencies: Vec<FrequencyOut>,
}

/// Endpoint mode algebra of the rotating background (JSON).
pub fn modes(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let (omega0, radius, u, source) = resolve_rotation(cfg)?;
    let em = helicoid::endpoint_modes(omega0, radius)?;
    let (c2, c0) = em.resolvent;

    let frequencies: Vec<FrequencyOut> = em
        .frequencies
        .iter()
        .map(|w| FrequencyOut {
            re: w.re,
            im: w.im,
            im_ratio: if w.norm() > 0.0 { w.im.abs() / w.norm() } else { 0.0 },
        })
        .collect();

    let art = ModesArtifact {
        tool: tool_line(),
        conventions: Conventions::default(),
        parameters: serde_json::json!({
            "radius": radius,
            "omega0_source": source,
            "mu": cfg.mu,
            "mass": cfg.mass,
        }),
        omega0,
        omega0_sq: omega0 * omega0,
        u,
        near_null: u >= helicoid::NEAR_NULL_CUTOFF,
        resolvent: ResolventOut {
            quadratic: [1.0, c2, c0],
            discriminant: em.disc,
        },
        frequencies,
    };
    let mut text = serde_json::to_string_pretty(&art)
        .map_err(|e| CliError::Config(format!("cannot serialize modes: {e}")))?;
    text.push('\n');

    let summary = format!(
        "modes: u = {u:.4}, resolvent x^2 + ({c2:.6})x + ({c0:.6}), \
         discriminant {:.6}",
        em.disc
    );
    Ok(Artifact::passing(text, summary))
}

#[derive(Serialize)]
struct ChannelOut {
    name: String,
    eigenvalues: Vec<f64>,
    reference: Vec<f64>,
    reference_kind: String,
    max_abs_gap: f64,
    max_rel_gap: f64,
}

#[derive(Serialize)]
struct SpectrumArtifact {
    tool: String,
    conventions: Conventions,
    parameters: serde_json::Value,
    half_span: f64,
    channels: Vec<ChannelOut>,
    /// Smallest in-plane minus out-of-plane eigenvalue gap, when both ran.
    dominance_margin: Option<f64>,
}

/// Bulk mode spectra (JSON): shooting eigenvalues with an independent
/// reference per channel.
pub fn spectrum(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let (omega0, radius, u, source) = resolve_rotation(cfg)?;
    let count = cfg.count.unwrap_or(5);
    if count == 0 || count > 64 {
        return Err(CliError::Config(format!(
            "count must be between 1 and 64, got {count}"
        )));
    }
    let grid: usize = match cfg.grid.as_deref() {
        None => 4000,
        Some(s) => s.trim().parse().map_err(|_| {
            CliError::Config(format!("spectrum grid '{s}' must be a plain integer"))
        })?,
    };
    if grid < 100 {
        return Err(CliError::Config(format!(
            "matrix grid must have at least 100 points, got {grid}"
        )));
    }

    let choice = cfg.channel.as_deref().unwrap_or("both");
    let run_in = matches!(choice, "both" | "in-plane");
    let run_out = matches!(choice, "both" | "out-of-plane");
    if !run_in && !run_out {
        return Err(CliError::Config(format!(
            "unknown channel '{choice}'; choose in-plane, out-of-plane, or both"
        )));
    }

    let mut channels = Vec::new();
    let mut in_evs = Vec::new();
    let mut out_evs = Vec::new();
    if run_in {
        let evs = helicoid::bulk_spectrum_shooting(omega0, radius, BulkChannel::InPlane, count)?;
        let refv = helicoid::bulk_spectrum_matrix(omega0, radius, BulkChannel::InPlane, count, grid)?;
        let (mut abs_gap, mut rel_gap) = (0.0f64, 0.0f64);
        for (a, b) in evs.iter().zip(&refv) {
            abs_gap = abs_gap.max((a - b).abs());
            rel_gap = rel_gap.max((a - b).abs() / a.abs().max(1e-300));
        }
        in_evs = evs.clone();
        channels.push(ChannelOut {
            name: "in-plane".into(),
            eigenvalues: evs,
            reference: refv,
            reference_kind: format!("matrix-discretization ({grid} points)"),
            max_abs_gap: abs_gap,
            max_rel_gap: rel_gap,
        });
    }
    if run_out {
        let evs = helicoid::bulk_spectrum_shooting(omega0, radius, BulkChannel::OutOfPlane, count)?;
        let refv: Vec<f64> = (1..=count)
            .map(|n| helicoid::out_of_plane_exact(omega0, radius, n))
            .collect();
        let (mut abs_gap, mut rel_gap) = (0.0f64, 0.0f64);
        for (a, b) in evs.iter().zip(&refv) {
            abs_gap = abs_gap.max((a - b).abs());
            rel_gap = rel_gap.max((a - b).abs() / a.abs().max(1e-300));
        }
        out_evs = evs.clone();
        channels.push(ChannelOut {
            name: "out-of-plane".into(),
            eigenvalues: evs,
            reference: refv,
            reference_kind: "dirichlet-exact".into(),
            max_abs_gap: abs_gap,
            max_rel_gap: rel_gap,
        });
    }
    let dominance_margin = if run_in && run_out {
        Some(
            in_evs
                .iter()
                .zip(&out_evs)
                .map(|(a, b)| a - b)
                .fold(f64::INFINITY, f64::min),
        )
    } else {
        None
    };

    let art = SpectrumArtifact {
        tool: tool_line(),
        conventions: Conventions::default(),
        parameters: serde_json::json!({
            "omega0": omega0,
            "omega0_source": source,
            "radius": radius,
            "u": u,
            "count": count,
            "matrix_grid": grid,
        }),
        half_span: helicoid::half_span(omega0, radius),
        channels,
        dominance_margin,
    };
    let mut text = serde_json::to_string_pretty(&art)
        .map_err(|e| CliError::Config(format!("cannot serialize spectrum: {e}")))?;
    text.push('\n');

    let worst = art
        .channels
        .iter()
        .map(|c| c.max_rel_gap)
        .fold(0.0f64, f64::max);
    let summary = format!(
        "spectrum: u = {u:.4}, {} channel(s), {count} modes each, \
         worst reference gap {worst:.3e} relative",
        art.channels.len()
    );
    Ok(Artifact::passing(text, summary))
}

/// Endpoint modes swept across the edge speed range (CSV).
pub fn sweep(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let radius = cfg.radius.unwrap_or(1.0);
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(CliError::Config(format!("radius must be positive, got {radius}")));
    }
    let (lo, hi, count) = parse_span(cfg.grid.as_deref().unwrap_or("0.05:0.95:19"))?;
    if lo <= 0.0 || hi >= 1.0 {
        return Err(CliError::Physics(format!(
            "sweep range [{lo}, {hi}] leaves the timelike window (0, 1) for the \
             edge speed squared"
        )));
    }

    let us = linspace(lo, hi, count);
    let rows: Result<Vec<String>, CliError> = us
        .par_iter()
        .map(|&u| {
            let omega0 = u.sqrt() / radius;
            let em = helicoid::endpoint_modes(omega0, radius)?;
            let (c2, c0) = em.resolvent;
            let min_ratio = em
                .frequencies
                .iter()
                .map(|w| {
                    if w.norm() > 0.0 {
                        w.im.abs() / w.norm()
                    } else {
                        0.0
                    }
                })
                .fold(f64::INFINITY, f64::min);
            let mut line = String::new();
            let _ = write!(
                line,
                "{},{},{},{},{},{}",
                output::float(u),
                output::float(omega0),
                output::float(radius),
                output::float(c2),
                output::float(c0),
                output::float(em.disc)
            );
            for w in &em.frequencies {
                let _ = write!(line, ",{},{}", output::float(w.re), output::float(w.im));
            }
            let _ = write!(line, ",{}", output::float(min_ratio));
            Ok(line)
        })
        .collect();
    let rows = rows?;

    let min_ratio_all = rows
        .iter()
        .map(|r| r.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .fold(f64::INFINITY, f64::min);

    let params: Vec<(&str, String)> = vec![
        ("command", "sweep".into()),
        ("radius", output::float(radius)),
        ("u-span", format!("{lo}:{hi}:{count}")),
        ("min-im-ratio", output::float(min_ratio_all)),
    ];
    let mut text = output::csv_header("sweep", &params);
    text.push_str(
        "u,omega0,radius,c2,c0,discriminant,w1_re,w1_im,w2_re,w2_im,w3_re,w3_im,\
         w4_re,w4_im,min_im_ratio\n",
    );
    for r in &rows {
        text.push_str(r);
        text.push('\n');
    }

    let summary = format!(
        "sweep: {count} rows over u in [{lo}, {hi}], min |Im w|/|w| = {min_ratio_all:.3e}"
    );
    Ok(Artifact::passing(text, summary))
}
