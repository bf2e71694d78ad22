use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use ksurf::analysis::{
    boundary_loop, branch_star_faces, energy_report, frontier_records, hazzidakis_check, periodic_amsler_energy,
    rectangle_faces, reversal_vertices, EnergyReport, FrontierRecord, NodeKind,
};
use ksurf::complex::{cut_depth, validate_complex, AsymptoticComplex, BranchRecord, RunStatus, ValidationReport};
use ksurf::embed::{
    build_spherical_net, closure_residuals, gauss_angle_sum, integrate_lelieuvre, validate_embedding, EmbeddingReport,
    KSurface, Vec3,
};
use ksurf::netgen::{run_greedy, GreedyParams};
use ksurf::reference::{
    alpha_star, bessel_i0, bobbin_energy_bound, bobbin_profile, frontier_f1, frontier_f2, painleve_asymptotic,
    painleve_iii, AsymptoticRegime,
};
use ksurf::topology::Topology;
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{ensure_dir, num, report_path, write_csv, write_json, write_obj, write_scalars};
use crate::CliError;

/// Everything derived from one greedy run.
pub struct Built {
    pub params: GreedyParams,
    pub complex: AsymptoticComplex,
    pub topo: Topology,
    pub surface: KSurface,
    pub embedding: EmbeddingReport,
    pub validation: ValidationReport,
    pub energy: EnergyReport,
    pub max_closure_residual: f64,
    /// max over interior vertices of |Gauss angle sum − 2π(1 − m)|
    pub max_degree_error: f64,
}

fn core(e: ksurf::Error) -> CliError {
    match e {
        ksurf::Error::InvalidParams(m) => CliError::Config(m),
        ksurf::Error::Inconsistent { sector } => CliError::Config(format!(
            "cutoff violated next to the corner of sector {sector}; raise --phi-star or refine --delta"
        )),
        other => CliError::Core(other),
    }
}

pub fn build_surface(params: &GreedyParams) -> Result<Built, CliError> {
    let complex = run_greedy(params).map_err(core)?;
    let topo = Topology::build(&complex);
    let net = build_spherical_net(&complex).map_err(core)?;
    let surface = integrate_lelieuvre(&complex, &net, &topo, Vec3::zeros());
    let embedding = validate_embedding(&complex, &net, &topo, &surface);
    let validation = validate_complex(&complex);
    let energy = energy_report(&complex, &topo).map_err(core)?;
    let max_closure_residual = closure_residuals(&complex, &net).into_iter().fold(0.0, f64::max);
    let mut max_degree_error: f64 = 0.0;
    for v in 0..topo.vertex_count() as u32 {
        if topo.is_interior(v) {
            let m = (topo.degree(v) / 2) as f64;
            let err = (gauss_angle_sum(&topo, &surface, v) - 2.0 * PI * (1.0 - m)).abs();
            max_degree_error = max_degree_error.max(err);
        }
    }
    Ok(Built {
        params: *params,
        complex,
        topo,
        surface,
        embedding,
        validation,
        energy,
        max_closure_residual,
        max_degree_error,
    })
}

#[derive(Serialize)]
struct ValidationSummary<'a> {
    valid: bool,
    n_violations: usize,
    first_violation: Option<&'a ksurf::complex::Violation>,
    max_side_error: f64,
    interior_degrees: &'a BTreeMap<usize, usize>,
}

#[derive(Serialize)]
struct BuildReport<'a> {
    config: &'a RunConfig,
    status: RunStatus,
    n_sectors: usize,
    energy: &'a EnergyReport,
    embedding: &'a EmbeddingReport,
    validation: ValidationSummary<'a>,
    max_closure_residual: f64,
    max_gauss_degree_error: f64,
}

#[derive(Serialize)]
struct BranchTree<'a> {
    status: RunStatus,
    cut_depth: usize,
    branches: &'a [BranchRecord],
}

pub fn cmd_build(cfg: &RunConfig) -> Result<String, CliError> {
    let b = build_surface(&cfg.greedy_params()?)?;
    ensure_dir(&cfg.out)?;
    write_obj(&cfg.out.join("surface.obj"), &b.surface)?;
    write_scalars(&cfg.out.join("scalars.csv"), &b.surface)?;
    let report = BuildReport {
        config: cfg,
        status: b.complex.status,
        n_sectors: b.complex.sectors.len(),
        energy: &b.energy,
        embedding: &b.embedding,
        validation: ValidationSummary {
            valid: b.validation.is_valid(),
            n_violations: b.validation.violations.len(),
            first_violation: b.validation.violations.first(),
            max_side_error: b.validation.max_side_error,
            interior_degrees: &b.validation.degrees,
        },
        max_closure_residual: b.max_closure_residual,
        max_gauss_degree_error: b.max_degree_error,
    };
    write_json(&report_path(&cfg.out, cfg.report.as_ref(), "report.json"), &report)?;
    let tree = BranchTree { status: b.complex.status, cut_depth: cut_depth(&b.complex), branches: &b.complex.branches };
    write_json(&cfg.out.join("branches.json"), &tree)?;
    let first_gen = b.complex.branches.iter().filter(|x| x.generation == 1).count();
    Ok(format!(
        "status {:?}: {} vertices, {} quads, {} sectors, {} branches ({} first generation), cut depth {}, E_inf {:.6}",
        b.complex.status,
        b.energy.n_vertices,
        b.energy.n_quads,
        b.complex.sectors.len(),
        b.complex.branches.len(),
        first_gen,
        b.energy.cut_depth,
        b.energy.e_inf
    ))
}

pub const SCAN_HEADER: [&str; 11] = [
    "R",
    "e_inf_branched",
    "e_willmore",
    "e_inf_bobbin_bound",
    "e_inf_periodic_amsler",
    "cut_depth",
    "n_branches",
    "n_vertices",
    "wall_ms",
    "periodic_amsler_m0",
    "status",
];

pub fn cmd_energy_scan(cfg: &RunConfig) -> Result<String, CliError> {
    ensure_dir(&cfg.out)?;
    let mut rows = Vec::new();
    let mut failures = 0;
    for &r in &cfg.r_list {
        let start = Instant::now();
        let bound = num(bobbin_energy_bound(r).value);
        let periodic = periodic_amsler_energy(r, cfg.delta);
        let (pa_e, pa_m) = match &periodic {
            Ok(p) => (num(p.e_inf), p.m0_min.to_string()),
            Err(_) => (String::new(), String::new()),
        };
        let row = match cfg.greedy_params_at(r).and_then(|p| build_energy_row(&p)) {
            Ok((rep, status)) => vec![
                num(r),
                num(rep.e_inf),
                num(rep.e_willmore),
                bound,
                pa_e,
                rep.cut_depth.to_string(),
                rep.n_branches.to_string(),
                rep.n_vertices.to_string(),
                start.elapsed().as_millis().to_string(),
                pa_m,
                status,
            ],
            Err(e) => {
                failures += 1;
                eprintln!("R = {r}: {e}");
                let mut row = vec![num(r), String::new(), String::new(), bound, pa_e];
                row.extend([String::new(), String::new(), String::new()]);
                row.extend([start.elapsed().as_millis().to_string(), pa_m, format!("error: {e}")]);
                row
            }
        };
        rows.push(row);
    }
    let path = cfg.out.join("energy_scan.csv");
    write_csv(&path, &SCAN_HEADER, rows)?;
    Ok(format!("{} radii scanned ({failures} failed) -> {}", cfg.r_list.len(), path.display()))
}

fn build_energy_row(params: &GreedyParams) -> Result<(EnergyReport, String), CliError> {
    let complex = run_greedy(params).map_err(core)?;
    let topo = Topology::build(&complex);
    let rep = energy_report(&complex, &topo).map_err(core)?;
    let status = match complex.status {
        RunStatus::Terminated => "terminated",
        RunStatus::NonTerminated => "non_terminated",
    };
    Ok((rep, status.to_string()))
}

/// ratio ≥ 0.95·max(1/3, (α/α*)²)
pub fn frontier_ok(r: &FrontierRecord, astar: f64) -> bool {
    r.ratio >= 0.95 * (1.0f64 / 3.0).max(r.alpha_sq / (astar * astar))
}

/// Amsler-diagonal records: ratio ≥ 0.95·I0(2α²)/3
pub fn amsler_ok(r: &FrontierRecord) -> bool {
    r.ratio >= 0.95 * frontier_f1(r.alpha_sq.sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct FrontierSummary {
    pub n_records: usize,
    pub n_amsler: usize,
    pub fraction_above_bound: f64,
    pub fraction_amsler_above_f1: f64,
    pub alpha_star: f64,
    pub too_few_branches: bool,
}

pub fn frontier_summary(records: &[FrontierRecord]) -> FrontierSummary {
    let astar = alpha_star();
    let above = records.iter().filter(|r| frontier_ok(r, astar)).count();
    let amsler: Vec<_> = records.iter().filter(|r| r.node_kind == NodeKind::AmslerDiagonal).collect();
    let amsler_above = amsler.iter().filter(|r| amsler_ok(r)).count();
    let frac = |a: usize, n: usize| if n == 0 { 1.0 } else { a as f64 / n as f64 };
    FrontierSummary {
        n_records: records.len(),
        n_amsler: amsler.len(),
        fraction_above_bound: frac(above, records.len()),
        fraction_amsler_above_f1: frac(amsler_above, amsler.len()),
        alpha_star: astar,
        too_few_branches: records.len() < 10,
    }
}

pub fn cmd_frontier(cfg: &RunConfig) -> Result<String, CliError> {
    let complex = run_greedy(&cfg.greedy_params()?).map_err(core)?;
    let records = frontier_records(&complex);
    let summary = frontier_summary(&records);
    if summary.too_few_branches {
        eprintln!("warning: TOO_FEW_BRANCHES ({} < 10); increase --radius", records.len());
    }
    ensure_dir(&cfg.out)?;
    let astar = summary.alpha_star;
    let rows = records.iter().map(|r| {
        vec![
            r.generation.to_string(),
            r.node_kind.label().to_string(),
            num(r.phi_n),
            num(r.ratio),
            num(r.alpha_sq.sqrt()),
            num(r.alpha_sq),
            num(r.s_n),
            num(r.branch_radius),
            (frontier_ok(r, astar) as u8).to_string(),
        ]
    });
    let header =
        ["generation", "node_kind", "phi_n", "ratio", "alpha", "alpha_sq", "s_n", "branch_radius", "above_bound"];
    write_csv(&cfg.out.join("frontier.csv"), &header, rows)?;
    let curve = (0..=200).map(|i| {
        let a = 1.5 * i as f64 / 200.0;
        vec![num(a), num(frontier_f1(a)), num(frontier_f2(a)), num((1.0f64 / 3.0).max(frontier_f2(a)))]
    });
    write_csv(&cfg.out.join("frontier_curves.csv"), &["alpha", "f1", "f2", "lower_envelope"], curve)?;
    #[derive(Serialize)]
    struct Report<'a> {
        config: &'a RunConfig,
        status: RunStatus,
        summary: &'a FrontierSummary,
    }
    let report = Report { config: cfg, status: complex.status, summary: &summary };
    write_json(&report_path(&cfg.out, cfg.report.as_ref(), "frontier_summary.json"), &report)?;
    Ok(format!(
        "{} records ({} amsler): {:.1}% above max(1/3, (a/a*)^2), {:.1}% of amsler records above f1",
        summary.n_records,
        summary.n_amsler,
        100.0 * summary.fraction_above_bound,
        100.0 * summary.fraction_amsler_above_f1
    ))
}

pub fn cmd_bobbin(cfg: &RunConfig) -> Result<String, CliError> {
    let profile = bobbin_profile(cfg.kappa, cfg.xi_max, cfg.step);
    ensure_dir(&cfg.out)?;
    let rows = profile.samples.iter().map(|p| vec![num(p.xi), num(p.s), num(p.rho), num(p.z_height), num(p.phi)]);
    write_csv(&cfg.out.join("bobbin.csv"), &["xi", "s", "rho", "z_height", "phi"], rows)?;
    let max_s = profile.max_abs_s();
    let max_energy = profile.energy_residuals().fold(0.0f64, |m, r| m.max(r.abs()));
    #[derive(Serialize)]
    struct Report<'a> {
        config: &'a RunConfig,
        max_abs_s: f64,
        arcsinh_kappa: f64,
        max_energy_residual: f64,
    }
    let report =
        Report { config: cfg, max_abs_s: max_s, arcsinh_kappa: profile.half_width, max_energy_residual: max_energy };
    write_json(&report_path(&cfg.out, cfg.report.as_ref(), "bobbin.json"), &report)?;
    Ok(format!("|s|max = {max_s:.10} (arcsinh(kappa) = {:.10})", profile.half_width))
}

pub fn cmd_amsler(cfg: &RunConfig) -> Result<String, CliError> {
    let phi0 = cfg.phi0.unwrap_or(PI / 2.0);
    let sol = painleve_iii(phi0, cfg.z_max, cfg.step);
    ensure_dir(&cfg.out)?;
    let label = |r: AsymptoticRegime| match r {
        AsymptoticRegime::Inner => "inner",
        AsymptoticRegime::Outer => "outer",
        AsymptoticRegime::Pendulum => "pendulum",
    };
    let mut max_dev: f64 = 0.0;
    let rows: Vec<Vec<String>> = sol
        .samples
        .iter()
        .map(|s| {
            let a = painleve_asymptotic(phi0, s.z);
            if sol.z_star.is_none_or(|zs| s.z <= zs) {
                max_dev = max_dev.max((a.phi - s.phi).abs());
            }
            vec![num(s.z), num(s.phi), num(s.dphi), num(a.phi), label(a.regime).into(), num(phi0 * bessel_i0(s.z))]
        })
        .collect();
    write_csv(&cfg.out.join("amsler.csv"), &["z", "phi", "dphi", "phi_asymptotic", "regime", "bessel_upper"], rows)?;
    let predicted = painleve_asymptotic(phi0, 0.0).z_star;
    #[derive(Serialize)]
    struct Report<'a> {
        config: &'a RunConfig,
        phi0: f64,
        z_star: Option<f64>,
        z_star_asymptotic: f64,
        max_asymptotic_deviation: f64,
    }
    let report = Report {
        config: cfg,
        phi0,
        z_star: sol.z_star,
        z_star_asymptotic: predicted,
        max_asymptotic_deviation: max_dev,
    };
    write_json(&report_path(&cfg.out, cfg.report.as_ref(), "amsler.json"), &report)?;
    Ok(match sol.z_star {
        Some(z) => format!("z* = {z:.6} (asymptotic estimate {predicted:.6})"),
        None => format!("phi stays below pi up to z = {} (asymptotic estimate z* = {predicted:.6})", cfg.z_max),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

/// Hazzidakis residuals on one rectangle per sector and on the stars of
/// up to ten branch points, as (worst residual/bound, loops checked).
fn hazzidakis_suite(b: &Built) -> (Check, Check) {
    let (c, topo) = (&b.complex, &b.topo);
    let delta = c.delta();
    let reversed = reversal_vertices(topo);
    let bound = |perimeter: usize| 10.0 * delta * perimeter as f64 * delta;
    let (mut worst, mut n, mut errors) = (0.0f64, 0, Vec::new());
    for s in &c.sectors {
        let (nj, nk) = s.extent();
        let (j0, k0) = (nj / 6, nk / 6);
        let Some(faces) = (1..=8usize).rev().find_map(|w| rectangle_faces(topo, s.id, j0, k0, j0 + w, k0 + w)) else {
            continue;
        };
        let Ok(lp) = boundary_loop(topo, &faces) else { continue };
        if lp.iter().any(|v| reversed.contains(v)) {
            continue;
        }
        match hazzidakis_check(c, topo, &lp) {
            Ok(h) => {
                worst = worst.max(h.residual / bound(h.perimeter));
                n += 1;
            }
            Err(e) => errors.push(format!("sector {}: {e}", s.id)),
        }
    }
    let rect = check(
        "hazzidakis_rectangles",
        errors.is_empty() && worst <= 1.0,
        format!(
            "{n} loops, worst residual/bound {worst:.3e}{}",
            errors.first().map(|e| format!(", {e}")).unwrap_or_default()
        ),
    );
    let (mut worst_b, mut nb, mut errors_b) = (0.0f64, 0, Vec::new());
    for br in 0..c.branches.len() {
        let Some(faces) = branch_star_faces(c, topo, br, 3) else { continue };
        let Ok(lp) = boundary_loop(topo, &faces) else { continue };
        if lp.iter().any(|v| reversed.contains(v)) {
            continue;
        }
        match hazzidakis_check(c, topo, &lp) {
            Ok(h) if h.enclosed_branch_vertices == 1 => {
                worst_b = worst_b.max(h.residual / bound(h.perimeter));
                nb += 1;
            }
            Ok(h) => errors_b.push(format!("branch {br}: {} enclosed branch vertices", h.enclosed_branch_vertices)),
            Err(e) => errors_b.push(format!("branch {br}: {e}")),
        }
        if nb == 10 {
            break;
        }
    }
    let star = check(
        "hazzidakis_branch_stars",
        errors_b.is_empty() && worst_b <= 1.0,
        format!(
            "{nb} loops, worst residual/bound {worst_b:.3e}{}",
            errors_b.first().map(|e| format!(", {e}")).unwrap_or_default()
        ),
    );
    (rect, star)
}

pub fn verify_checks(b: &Built) -> Vec<Check> {
    let p = &b.params;
    let max_phi = b.complex.all_angles().map(|a| a.3.abs()).fold(0.0, f64::max);
    let e = &b.embedding;
    let (rect, star) = hazzidakis_suite(b);
    let sol = painleve_iii(PI / 2.0, 2.5, ksurf::reference::DEFAULT_STEP);
    let pain_ok = sol.samples.iter().all(|s| s.phi <= PI / 2.0 * bessel_i0(s.z) * (1.0 + 1e-12));
    let prof = bobbin_profile(3.0, 6.0, ksurf::reference::DEFAULT_STEP);
    let bob_err = (prof.max_abs_s() - 3f64.asinh()).abs();
    vec![
        check("terminated", b.complex.terminated(), format!("{:?}", b.complex.status)),
        check(
            "complex_valid",
            b.validation.is_valid(),
            b.validation.violations.first().map(|v| format!("{v:?}")).unwrap_or_else(|| "no violations".into()),
        ),
        check(
            "rhombus_sides",
            b.validation.max_side_error <= 1e-9,
            format!("max side error {:.3e}", b.validation.max_side_error),
        ),
        check(
            "angle_cutoff",
            max_phi <= p.phi_star + 2.0 * p.delta,
            format!("max |phi| {max_phi:.6} vs {:.6}", p.phi_star + 2.0 * p.delta),
        ),
        check(
            "lelieuvre_closure",
            b.max_closure_residual < 1e-9,
            format!("max residual {:.3e}", b.max_closure_residual),
        ),
        check(
            "embedding",
            e.passes(1e-9, 5.0 * p.delta),
            format!(
                "chebyshev {:.2e}, length {:.2e}, planarity {:.2e}, edge {:.2e}, angle {:.2e}",
                e.max_chebyshev_error,
                e.max_edge_length_error,
                e.max_planarity_error,
                e.max_edge_residual,
                e.max_angle_discrepancy
            ),
        ),
        check("gauss_map_degree", b.max_degree_error < 1e-6, format!("max error {:.3e}", b.max_degree_error)),
        rect,
        star,
        check("painleve_bessel_bound", pain_ok, format!("{} samples", sol.samples.len())),
        check("bobbin_turning_point", bob_err < 1e-6, format!("error {bob_err:.3e}")),
    ]
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<String, CliError> {
    let b = build_surface(&cfg.greedy_params()?)?;
    let checks = verify_checks(&b);
    for c in &checks {
        println!("{} {:<24} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if let Some(report) = &cfg.report {
        #[derive(Serialize)]
        struct Report<'a> {
            config: &'a RunConfig,
            checks: &'a [Check],
        }
        write_json(report, &Report { config: cfg, checks: &checks })?;
    }
    match checks.iter().find(|c| !c.passed) {
        Some(c) => Err(CliError::Invariant(format!("{}: {}", c.name, c.detail))),
        None => Ok(format!("all {} checks passed", checks.len())),
    }
}
