//! The experiment drivers behind each `domkit` subcommand.
//!
//! Every driver writes deterministic CSV tables (and structured-text
//! certificates where applicable) into `<out>/<subcommand>/`, plus a
//! `manifest.txt` recording the effective configuration, tool version, and
//! wall time.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use domkit::autgroup::{
    enumerate_automorphisms, orbit_probe, semicontinuity_experiment, wong_rosay_classify,
    AutGroupDescriptor, SemicontinuityOptions,
};
use domkit::bergman::{assemble_model, stability_experiment};
use domkit::bumps::{
    bump_center, bump_orbit_centers, defining_grid_slice, eta_eval, levi_form_min_eigen,
    psi_lipschitz_constant, DomainStage, PointC2, SliceSpec,
};
use domkit::curves::{ClosedCurve, SampledDomain};
use domkit::formats::{write_config, DomainSpec, ExperimentConfig};
use domkit::grid::lipschitz_distance;
use domkit::mobius::{Circle, CircleDomain, MobiusMap};
use domkit::uniform::{concentrize, koebe_uniformize, modulus_of_annulus, KoebeOptions};
use domkit::{Error, C};

type Result<T> = std::result::Result<T, Error>;

/// Halves resolutions and family sizes, bounded below so every driver
/// still has something to compute.
pub fn apply_quick(config: &mut ExperimentConfig) {
    let n = &mut config.numerics;
    n.truncation = (n.truncation / 2).max(8);
    n.nodes = (n.nodes / 2).max(64);
    n.probes = (n.probes / 2).max(8);
    n.grid_resolution = ((n.grid_resolution / 2).max(5)) | 1;
    n.stages = (n.stages / 2).max(3);
    n.bumps = (n.bumps / 2).max(4);
    n.epsilons.truncate(1);
}

pub fn run_one(name: &str, config: &ExperimentConfig, out_root: &Path) -> Result<()> {
    let dir = out_root.join(name);
    std::fs::create_dir_all(&dir)?;
    let start = Instant::now();
    match name {
        "bumps" => run_bumps(config, &dir)?,
        "uniformize" => run_uniformize(config, &dir)?,
        "autgroup" => run_autgroup(config, &dir)?,
        "semicont" => run_semicont(config, &dir)?,
        "bergman" => run_bergman(config, &dir)?,
        "stability" => run_stability(config, &dir)?,
        "curvature" => run_curvature(config, &dir)?,
        "wongrosay" => run_wongrosay(config, &dir)?,
        other => {
            return Err(Error::ParameterDomain {
                reason: format!("unknown subcommand {other:?}"),
            })
        }
    }
    write_manifest(name, config, &dir, start)?;
    Ok(())
}

fn write_manifest(
    name: &str,
    config: &ExperimentConfig,
    dir: &Path,
    start: Instant,
) -> Result<()> {
    let mut text = String::new();
    let _ = writeln!(text, "subcommand: {name}");
    let _ = writeln!(text, "version: {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(text, "elapsed_ms: {}", start.elapsed().as_millis());
    let _ = writeln!(text, "--- effective configuration (TOML) ---");
    text.push_str(&write_config(config));
    std::fs::write(dir.join("manifest.txt"), text)?;
    Ok(())
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

fn fmt_f(v: f64) -> String {
    // Fixed scientific notation keeps the files deterministic and diffable.
    format!("{v:.12e}")
}

// ---------------------------------------------------------------------------
// Domain plumbing.
// ---------------------------------------------------------------------------

fn load_domain_spec(config: &ExperimentConfig) -> Result<DomainSpec> {
    if config.domain.kind == "file" {
        let path = config.domain.path.as_ref().ok_or(Error::ParameterDomain {
            reason: "domain.kind = \"file\" requires domain.path".into(),
        })?;
        domkit::formats::parse_domain(&std::fs::read_to_string(path)?)
    } else {
        Ok(DomainSpec::Circles(config.circle_domain()?))
    }
}

/// Interior basepoint with the largest boundary clearance among a
/// deterministic candidate set.
fn pick_basepoint(cd: &CircleDomain) -> Result<C> {
    let mut candidates = vec![cd.outer.center];
    for k in 0..16 {
        let theta = 2.0 * PI * k as f64 / 16.0;
        for frac in [0.25, 0.5, 0.75] {
            candidates.push(cd.outer.center + C::from_polar(frac * cd.outer.radius, theta));
        }
    }
    candidates
        .into_iter()
        .filter(|&z| cd.contains(z))
        .max_by(|a, b| {
            cd.boundary_distance(*a)
                .partial_cmp(&cd.boundary_distance(*b))
                .unwrap()
        })
        .ok_or(Error::InvalidCircleDomain {
            reason: "no interior basepoint found".into(),
        })
}

fn sample_circles(cd: &CircleDomain, nodes: usize) -> Result<SampledDomain> {
    let outer = ClosedCurve::circle(&cd.outer, nodes, true);
    let holes = cd
        .holes
        .iter()
        .map(|h| ClosedCurve::circle(h, nodes, false))
        .collect();
    SampledDomain::new(outer, holes, pick_basepoint(cd)?)
}

/// The circle domain an enumeration-style subcommand should work on:
/// sampled inputs are uniformized, eccentric two-connected domains are
/// brought to the concentric normal form.
fn normalized_circle_domain(config: &ExperimentConfig) -> Result<CircleDomain> {
    let cd = match load_domain_spec(config)? {
        DomainSpec::Circles(cd) => cd,
        DomainSpec::Sampled(sd) => {
            let opts = KoebeOptions {
                nodes: config.numerics.nodes,
                tolerance: config.numerics.tolerance,
                ..KoebeOptions::default()
            };
            koebe_uniformize(&sd, &opts)?.circle_domain
        }
    };
    if cd.connectivity() == 2 && !cd.is_normalized(1e-9) {
        let (concentric, _) = concentrize(&cd)?;
        Ok(concentric)
    } else {
        Ok(cd)
    }
}

// ---------------------------------------------------------------------------
// bumps
// ---------------------------------------------------------------------------

/// Boundary point of the level-k bump along the ray through a direction:
/// bisection on η_k.
fn bump_boundary_point(k: u32, direction: &PointC2) -> Result<PointC2> {
    let dir = direction.scale(1.0 / direction.norm());
    let f = |rho: f64| eta_eval(k, &dir.scale(rho));
    let (mut lo, mut hi) = (0.5, 1.5);
    if !(f(lo) < 0.0 && f(hi) > 0.0) {
        return Err(Error::DegenerateConfiguration {
            reason: format!("no boundary bracket along the sampled ray at level {k}"),
        });
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(dir.scale(0.5 * (lo + hi)))
}

fn run_bumps(config: &ExperimentConfig, dir: &Path) -> Result<()> {
    let n = &config.numerics;
    // Orbit-center table: every bump center lies on the unit sphere, and
    // its orbit under the flow powers accumulates at (±1, 0).
    let mut centers = String::from("k,j,power,z1_re,z1_im,z2_re,z2_im,norm\n");
    for k in 1..=n.bumps as u32 {
        for (j, power, p) in bump_orbit_centers(k, -12..=12) {
            let _ = writeln!(
                centers,
                "{k},{j},{},{},{},{},{},{}",
                fmt_f(power),
                fmt_f(p.z1.re),
                fmt_f(p.z1.im),
                fmt_f(p.z2.re),
                fmt_f(p.z2.im),
                fmt_f(p.norm())
            );
        }
    }
    write_file(dir, "orbit_centers.csv", &centers)?;

    // Levi table: minimum eigenvalue at boundary points of the first bumps.
    let mut levi = String::from("k,probe,min_eigenvalue\n");
    for k in 1..=(n.bumps as u32).min(4) {
        let center = bump_center(k);
        for probe in 0..5 {
            // Small deterministic sways of the center direction.
            let sway = 0.08 * (probe as f64 - 2.0);
            let direction = PointC2::new(
                center.z1 + C::new(sway, 0.3 * sway),
                center.z2 + C::new(-0.5 * sway, sway),
            );
            let p = bump_boundary_point(k, &direction)?;
            let ev = levi_form_min_eigen(k, &p)?;
            let _ = writeln!(levi, "{k},{probe},{}", fmt_f(ev));
        }
    }
    write_file(dir, "levi.csv", &levi)?;

    // Stage-distance table on the default slice: the full [-1.1, 1.1]²
    // window at the standard spacing, orbit truncation J = 12.
    let slice = SliceSpec::default_re_plane();
    let mut stages = String::from("k,distance,bound\n");
    let c_psi = psi_lipschitz_constant();
    let (mins, maxs) = ([-1.1, -1.1], [1.1, 1.1]);
    let res = n.grid_resolution.max(9);
    let counts = [res, res];
    let j = 12;
    for k in 1..n.stages as u32 {
        let g1 = defining_grid_slice(&DomainStage::new(k, j)?, &slice, mins, maxs, counts)?;
        let g2 = defining_grid_slice(&DomainStage::new(k + 1, j)?, &slice, mins, maxs, counts)?;
        let distance = lipschitz_distance(&g1, &g2)?;
        let bound = 10f64.powi(-(k as i32 + 1)) * c_psi;
        let _ = writeln!(stages, "{k},{},{}", fmt_f(distance), fmt_f(bound));
    }
    write_file(dir, "stage_distances.csv", &stages)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// uniformize
// ---------------------------------------------------------------------------

fn circles_csv(cd: &CircleDomain) -> String {
    let mut out = String::from("component,center_re,center_im,radius\n");
    let _ = writeln!(
        out,
        "outer,{},{},{}",
        fmt_f(cd.outer.center.re),
        fmt_f(cd.outer.center.im),
        fmt_f(cd.outer.radius)
    );
    for (i, h) in cd.holes.iter().enumerate() {
        let _ = writeln!(
            out,
            "hole{i},{},{},{}",
            fmt_f(h.center.re),
            fmt_f(h.center.im),
            fmt_f(h.radius)
        );
    }
    out
}

fn run_uniformize(config: &ExperimentConfig, dir: &Path) -> Result<()> {
    let sd = match load_domain_spec(config)? {
        DomainSpec::Sampled(sd) => sd,
        DomainSpec::Circles(cd) => sample_circles(&cd, config.numerics.nodes)?,
    };
    let opts = KoebeOptions {
        nodes: config.numerics.nodes,
        tolerance: config.numerics.tolerance,
        ..KoebeOptions::default()
    };
    let result = koebe_uniformize(&sd, &opts)?;
    write_file(dir, "circles.csv", &circles_csv(&result.circle_domain))?;
    let mut summary = String::new();
    let _ = writeln!(summary, "connectivity: {}", result.circle_domain.connectivity());
    let _ = writeln!(summary, "residual: {}", fmt_f(result.residual));
    let _ = writeln!(summary, "sweeps: {}", result.iterations);
    let _ = writeln!(summary, "converged: {}", result.converged);
    if result.circle_domain.connectivity() == 2 {
        let (concentric, _) = concentrize(&result.circle_domain)?;
        let _ = writeln!(summary, "modulus: {}", fmt_f(modulus_of_annulus(&concentric)?));
    }
    write_file(dir, "summary.txt", &summary)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// autgroup
// ---------------------------------------------------------------------------

fn descriptor_text(group: &AutGroupDescriptor) -> String {
    match group {
        AutGroupDescriptor::FullDiscGroup => {
            "group: full disc group (three-parameter Möbius group)\n".into()
        }
        AutGroupDescriptor::AnnulusGroup { modulus } => {
            format!(
                "group: annulus group (rotations and the radius swap)\nmodulus: {}\n",
                fmt_f(*modulus)
            )
        }
        AutGroupDescriptor::FiniteGroup { elements } => {
            format!("group: finite\norder: {}\n", elements.len())
        }
    }
}

fn elements_csv(elements: &[MobiusMap]) -> String {
    let mut out = String::from("index,a_re,a_im,b_re,b_im,c_re,c_im,d_re,d_im\n");
    for (i, m) in elements.iter().enumerate() {
        let _ = writeln!(
            out,
            "{i},{},{},{},{},{},{},{},{}",
            fmt_f(m.a.re),
            fmt_f(m.a.im),
            fmt_f(m.b.re),
            fmt_f(m.b.im),
            fmt_f(m.c.re),
            fmt_f(m.c.im),
            fmt_f(m.d.re),
            fmt_f(m.d.im)
        );
    }
    out
}

fn run_autgroup(config: &ExperimentConfig, dir: &Path) -> Result<()> {
    let cd = normalized_circle_domain(config)?;
    let group = enumerate_automorphisms(&cd, config.numerics.enumeration_tolerance)?;
    write_file(dir, "group.txt", &descriptor_text(&group))?;
    if let AutGroupDescriptor::FiniteGroup { elements } = &group {
        write_file(dir, "elements.csv", &elements_csv(elements))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// semicont
// ---------------------------------------------------------------------------

/// The symmetric two-hole reference domain of the semicontinuity family.
fn symmetric_pair_domain(hole_radius: f64, nodes: usize) -> Result<SampledDomain> {
    let outer = ClosedCurve::circle(&Circle::unit(), nodes, true);
    let mk_hole = |center: f64| -> Result<ClosedCurve> {
        Ok(ClosedCurve::circle(
            &Circle::new(C::new(center, 0.0), hole_radius)?,
            nodes,
            false,
        ))
    };
    SampledDomain::new(outer, vec![mk_hole(0.5)?, mk_hole(-0.5)?], C::new(0.0, 0.0))
}

fn run_semicont(config: &ExperimentConfig, dir: &Path) -> Result<()> {
    let nodes = config.numerics.nodes.min(128); // two uniformizations per ε
    let base = symmetric_pair_domain(0.15, nodes)?;
    let opts = SemicontinuityOptions {
        enumeration_tol: config.numerics.enumeration_tolerance,
        koebe: KoebeOptions {
            nodes,
            tolerance: config.numerics.tolerance,
            ..KoebeOptions::default()
        },
        ..SemicontinuityOptions::default()
    };
    let mut summary = String::from("epsilon,order,max_matching_distance,composition_defect\n");
    for (i, &eps) in config.numerics.epsilons.iter().enumerate() {
        // Symmetric perturbation: both holes dilate together, preserving
        // the z ↦ −z symmetry of the samples.
        let perturbed = symmetric_pair_domain(0.15 * (1.0 + eps), nodes)?;
        let certificate = semicontinuity_experiment(&base, &perturbed, 1e-6, &opts)?;
        let mut text = String::new();
        let _ = writeln!(text, "epsilon: {}", fmt_f(eps));
        let _ = writeln!(text, "pairs: {}", certificate.pairs.len());
        let _ = writeln!(
            text,
            "max_matching_distance: {}",
            fmt_f(certificate.max_matching_distance)
        );
        let _ = writeln!(
            text,
            "composition_defect: {}",
            fmt_f(certificate.composition_defect)
        );
        for (j, (phi, matched)) in certificate.pairs.iter().enumerate() {
            let _ = writeln!(
                text,
                "pair {j}: ({}, {}, {}, {}) -> ({}, {}, {}, {})",
                phi.a, phi.b, phi.c, phi.d, matched.a, matched.b, matched.c, matched.d
            );
        }
        write_file(dir, &format!("certificate_{i}.txt"), &text)?;
        let _ = writeln!(
            summary,
            "{},{},{},{}",
            fmt_f(eps),
            certificate.pairs.len(),
            fmt_f(certificate.max_matching_distance),
            fmt_f(certificate.composition_defect)
        );
    }
    write_file(dir, "summary.csv", &summary)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// bergman / stability / curvature
// ---------------------------------------------------------------------------

/// Deterministic interior probe points: rings inside the domain, filtered
/// by clearance.
fn interior_probes(cd: &CircleDomain, count: usize) -> Vec<C> {
    let mut probes = Vec::new();
    let mut ring = 0usize;
    while probes.len() < count && ring < 40 {
        let frac = 0.15 + 0.8 * (ring as f64 / 40.0);
        let m = 8;
        for k in 0..m {
            let theta = 2.0 * PI * k as f64 / m as f64 + 0.31 * ring as f64;
            let z = cd.outer.center + C::from_polar(frac * cd.outer.radius, theta);
            if cd.contains(z) && cd.boundary_distance(z) > 0.03 * cd.outer.radius {
                probes.push(z);
                if probes.len() == count {
                    break;
                }
            }
        }
        ring += 1;
    }
    probes
}

fn run_bergman(config: &ExperimentConfig, dir: &Path) -> Result<()> {
    let cd = normalized_circle_domain(config)?;
    let model = assemble_model(&cd, config.numerics.truncation)?;
    let mut out = String::from("z_re,z_im,kernel_diag,metric,curvature\n");
    for z in interior_probes(&cd, config.numerics.probes) {
        let s = model.metric(z)?;
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f(z.re),
            fmt_f(z.im),
            fmt_f(s.kernel_diag),
            fmt_f(s.metric),
            fmt_f(s.curvature)
        );
    }
    write_file(dir, "metric_samples.csv", &out)?;
    let mut summary = String::new();
    let _ = writeln!(summary, "truncation: {}", model.truncation);
    let _ = writeln!(summary, "basis: {}", model.basis_len());
    let _ = writeln!(summary, "dropped: {}", model.dropped);
    let _ = writeln!(summary, "gram_condition: {}", fmt_f(model.condition));
    write_file(dir, "summary.txt", &summary)?;
    Ok(())
}

fn run_stability(config: &ExperimentConfig, dir: &Path) -> Result<()> {
    let r = config.domain.inner_radius;
    let base = CircleDomain::annulus(r)?;
    let probes: Vec<C> = (0..8)
        .map(|k| C::from_polar((1.0 + r) / 2.0, 2.0 * PI * k as f64 / 8.0 + 0.2))
        .collect();
    let mut out = String::from("epsilon,kernel_distance,derivative_distance\n");
    for &eps in &config.numerics.epsilons {
        let perturbed = CircleDomain::annulus(r * (1.0 + eps))?;
        let report =
            stability_experiment(&base, &perturbed, config.numerics.truncation, &probes)?;
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_f(eps),
            fmt_f(report.kernel_distance),
            fmt_f(report.derivative_distance)
        );
    }
    write_file(dir, "stability.csv", &out)?;
    Ok(())
}

fn run_curvature(config: &ExperimentConfig, dir: &Path) -> Result<()> {
    let cd = normalized_circle_domain(config)?;
    let model = assemble_model(&cd, config.numerics.truncation)?;
    // Probes at 10% of the local gap off every boundary circle.
    let gap = {
        let mut g = cd.outer.radius;
        for h in &cd.holes {
            g = g.min(cd.outer.radius - (h.center - cd.outer.center).norm() - h.radius);
        }
        g
    };
    let offset = 0.1 * gap / 2.0;
    let mut out = String::from("component,z_re,z_im,curvature\n");
    let per_circle = (config.numerics.probes / (1 + cd.holes.len())).max(4);
    let scan = |label: &str, point: &dyn Fn(f64) -> C, out: &mut String| -> Result<()> {
        for k in 0..per_circle {
            let theta = 2.0 * PI * k as f64 / per_circle as f64;
            let z = point(theta);
            let s = model.metric(z)?;
            let _ = writeln!(
                out,
                "{label},{},{},{}",
                fmt_f(z.re),
                fmt_f(z.im),
                fmt_f(s.curvature)
            );
        }
        Ok(())
    };
    scan(
        "outer",
        &|theta| cd.outer.center + C::from_polar(cd.outer.radius - offset, theta),
        &mut out,
    )?;
    for (i, h) in cd.holes.iter().enumerate() {
        scan(
            &format!("hole{i}"),
            &|theta| h.center + C::from_polar(h.radius + offset, theta),
            &mut out,
        )?;
    }
    write_file(dir, "curvature.csv", &out)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// wongrosay
// ---------------------------------------------------------------------------

fn run_wongrosay(config: &ExperimentConfig, dir: &Path) -> Result<()> {
    let cd = normalized_circle_domain(config)?;
    let verdict = wong_rosay_classify(&cd);
    let group = enumerate_automorphisms(&cd, config.numerics.enumeration_tolerance)?;
    let x = pick_basepoint(&cd)?;
    let stats = orbit_probe(&cd, &group, x, config.numerics.probes)?;
    let mut text = String::new();
    let _ = writeln!(text, "case: {:?}", verdict.case);
    let _ = writeln!(text, "group_compact: {}", verdict.group_compact);
    let _ = writeln!(text, "accumulation_possible: {}", verdict.accumulation_possible);
    let _ = writeln!(text, "note: {}", verdict.note);
    let _ = writeln!(
        text,
        "orbit_min_boundary_distance: {}",
        fmt_f(stats.min_boundary_distance)
    );
    let _ = writeln!(text, "orbit_max_spread: {}", fmt_f(stats.max_spread));
    write_file(dir, "verdict.txt", &text)?;
    let mut orbit = String::from("index,z_re,z_im\n");
    for (i, p) in stats.points.iter().enumerate() {
        let _ = writeln!(orbit, "{i},{},{}", fmt_f(p.re), fmt_f(p.im));
    }
    write_file(dir, "orbit.csv", &orbit)?;
    Ok(())
}
