//! Conformal automorphism groups of normalized circle domains.
//!
//! The key structural facts: every conformal self-map of a circle domain is
//! a Möbius map (Schwarz reflection across the boundary circles), and once
//! the domain is normalized with unit outer circle, every automorphism
//! restricts to an automorphism of the unit disc, z ↦ e^{iθ}(z−α)/(1−ᾱz).
//! The disc has the full three-real-parameter group; a concentric annulus
//! keeps the rotations together with the radius-swapping inversion; with
//! two or more holes the group is finite and is found by an exhaustive
//! parameter search with exact circle-image verification.

use std::f64::consts::PI;

use crate::curves::SampledDomain;
use crate::error::{Error, Result};
use crate::mobius::{Circle, CircleDomain, CircleOrLine, MobiusMap};
use crate::uniform::{koebe_uniformize, KoebeOptions};
use crate::C;

/// The conformal automorphism group of a normalized circle domain.
#[derive(Debug, Clone)]
pub enum AutGroupDescriptor {
    /// The unit disc: the full three-parameter Möbius group of the disc.
    FullDiscGroup,
    /// A concentric annulus r < |z| < 1 with modulus log(1/r): all
    /// rotations together with their compositions with z ↦ r/z ("two copies
    /// of the unit circle").
    AnnulusGroup { modulus: f64 },
    /// Connectivity ≥ 3: a finite list of Möbius maps.
    FiniteGroup { elements: Vec<MobiusMap> },
}

impl AutGroupDescriptor {
    /// Number of elements for the finite case.
    pub fn order(&self) -> Option<usize> {
        match self {
            AutGroupDescriptor::FiniteGroup { elements } => Some(elements.len()),
            _ => None,
        }
    }
}

/// Hyperbolic radius of a circle contained in the unit disc.
///
/// Disc automorphisms are hyperbolic isometries, so this quantity — unlike
/// the Euclidean radius — is preserved when an automorphism carries one
/// hole onto another, and is the right key for pruning hole permutations.
fn hyperbolic_radius(circle: &Circle) -> f64 {
    let c = circle.center.norm();
    let r = circle.radius;
    // Half the hyperbolic distance between the diametral points nearest and
    // farthest from the origin; the formula also covers circles containing
    // the origin.
    0.5 * ((c + r).atanh() - (c - r).atanh())
}

fn min_boundary_gap(cd: &CircleDomain) -> f64 {
    let mut gap = f64::INFINITY;
    for (i, h) in cd.holes.iter().enumerate() {
        gap = gap.min(cd.outer.radius - ((h.center - cd.outer.center).norm() + h.radius));
        for other in cd.holes.iter().skip(i + 1) {
            gap = gap.min((h.center - other.center).norm() - h.radius - other.radius);
        }
    }
    gap
}

fn circle_match_error(image: &CircleOrLine, target: &Circle) -> f64 {
    match image {
        CircleOrLine::Circle(c) => {
            (c.center - target.center).norm() + (c.radius - target.radius).abs()
        }
        CircleOrLine::Line(_) => f64::INFINITY,
    }
}

/// Residual of the full hole-matching system for a candidate (θ, α) under
/// the hole assignment σ: three real equations (center, radius) per hole.
///
/// The equations for a single hole only pin the map down to the stabilizer
/// of the target circle (a one-parameter family), so the search has to
/// match every hole at once to isolate discrete solutions.
fn matching_residual(
    cd: &CircleDomain,
    sigma: &[usize],
    theta: f64,
    alpha: C,
) -> Option<Vec<f64>> {
    let map = MobiusMap::disc_automorphism(theta, alpha).ok()?;
    let mut out = Vec::with_capacity(3 * cd.holes.len());
    for (i, h) in cd.holes.iter().enumerate() {
        let target = &cd.holes[sigma[i]];
        match map.circle_image(h) {
            CircleOrLine::Circle(c) => {
                out.push(c.center.re - target.center.re);
                out.push(c.center.im - target.center.im);
                out.push(c.radius - target.radius);
            }
            CircleOrLine::Line(_) => return None,
        }
    }
    Some(out)
}

fn residual_norm(f: &[f64]) -> f64 {
    f.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Gauss–Newton polish of (θ, α) on the full hole-matching system, with a
/// finite-difference Jacobian.
fn polish_candidate(cd: &CircleDomain, sigma: &[usize], theta: f64, alpha: C) -> Option<(f64, C)> {
    let mut v = [theta, alpha.re, alpha.im];
    let fd = 1e-6;
    let rows = 3 * cd.holes.len();
    for _ in 0..30 {
        let f = matching_residual(cd, sigma, v[0], C::new(v[1], v[2]))?;
        if residual_norm(&f) < 1e-13 {
            break;
        }
        // Central differences: the Jacobian error would otherwise cap the
        // attainable residual well above the acceptance tolerance.
        let mut jac = nalgebra::DMatrix::<f64>::zeros(rows, 3);
        for k in 0..3 {
            let mut vp = v;
            let mut vm = v;
            vp[k] += fd;
            vm[k] -= fd;
            let fp = matching_residual(cd, sigma, vp[0], C::new(vp[1], vp[2]))?;
            let fm = matching_residual(cd, sigma, vm[0], C::new(vm[1], vm[2]))?;
            for row in 0..rows {
                jac[(row, k)] = (fp[row] - fm[row]) / (2.0 * fd);
            }
        }
        let rhs = nalgebra::DVector::<f64>::from_vec(f);
        let normal = jac.transpose() * &jac;
        let step = normal.lu().solve(&(jac.transpose() * rhs))?;
        let mut next = [v[0] - step[0], v[1] - step[1], v[2] - step[2]];
        // Keep α strictly inside the disc.
        let an = (next[1] * next[1] + next[2] * next[2]).sqrt();
        if an >= 0.999 {
            let s = 0.998 / an;
            next[1] *= s;
            next[2] *= s;
        }
        v = next;
    }
    Some((v[0], C::new(v[1], v[2])))
}

/// Radius-compatible hole permutations: σ is admissible only if each hole
/// and its target have matching hyperbolic radii.
fn admissible_permutations(radii: &[f64], prune_tol: f64) -> Vec<Vec<usize>> {
    let n = radii.len();
    let mut out = Vec::new();
    let mut perm: Vec<usize> = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn rec(
        radii: &[f64],
        prune_tol: f64,
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let i = perm.len();
        if i == radii.len() {
            out.push(perm.clone());
            return;
        }
        for j in 0..radii.len() {
            if !used[j] && (radii[i] - radii[j]).abs() < prune_tol {
                used[j] = true;
                perm.push(j);
                rec(radii, prune_tol, perm, used, out);
                perm.pop();
                used[j] = false;
            }
        }
    }
    rec(radii, prune_tol, &mut perm, &mut used, &mut out);
    out
}

/// Enumerates the conformal automorphism group of a normalized circle
/// domain (unit outer circle).
///
/// Connectivity 1 gives the full disc group and a concentric hole gives the
/// annulus group; both are returned symbolically.  Otherwise the group is
/// finite and is found by a grid search over hole assignments and disc
/// automorphism parameters with Newton polish, accepting a candidate only
/// when the exact circle-image formula carries every hole onto its target
/// within `tol`.
pub fn enumerate_automorphisms(cd: &CircleDomain, tol: f64) -> Result<AutGroupDescriptor> {
    if !cd.is_normalized(1e-9) {
        return Err(Error::Precondition {
            reason: "automorphism enumeration needs a normalized domain (unit outer circle)".into(),
        });
    }
    if min_boundary_gap(cd) < 1e-6 {
        return Err(Error::DegenerateConfiguration {
            reason: "boundary circles are nearly tangent (gap < 1e-6)".into(),
        });
    }
    match cd.connectivity() {
        1 => return Ok(AutGroupDescriptor::FullDiscGroup),
        2 => {
            let hole = &cd.holes[0];
            if hole.center.norm() < 1e-9 {
                return Ok(AutGroupDescriptor::AnnulusGroup {
                    modulus: (1.0 / hole.radius).ln(),
                });
            }
            return Err(Error::Precondition {
                reason: "one-hole domain is not concentric; apply the concentric normal form before enumeration"
                    .into(),
            });
        }
        _ => {}
    }

    let radii: Vec<f64> = cd.holes.iter().map(hyperbolic_radius).collect();
    let permutations = admissible_permutations(&radii, 1e-5);

    // Search grid per the enumeration contract: 720 rotation steps and a
    // 41×41 polar grid for α with |α| bounded away from the hole reach.
    let theta_steps = 720usize;
    let radial_steps = 41usize;
    let angular_steps = 41usize;
    // α = φ⁻¹(0) can sit anywhere in the domain, so the grid covers nearly
    // the whole disc; the Newton polish recovers solutions between nodes.
    let alpha_max = 0.95;

    let coarse = 0.1;
    let mut elements: Vec<MobiusMap> = vec![MobiusMap::identity()];

    for sigma in &permutations {
        let mut seeds: Vec<(f64, C)> = Vec::new();
        for it in 0..theta_steps {
            let theta = 2.0 * PI * it as f64 / theta_steps as f64;
            for ir in 0..radial_steps {
                let rho = alpha_max * ir as f64 / (radial_steps - 1) as f64;
                for ia in 0..angular_steps {
                    let phi = 2.0 * PI * ia as f64 / angular_steps as f64;
                    let alpha = C::from_polar(rho, phi);
                    if let Some(f) = matching_residual(cd, sigma, theta, alpha) {
                        if residual_norm(&f) < coarse {
                            seeds.push((theta, alpha));
                        }
                    }
                    if rho == 0.0 {
                        break; // α = 0 does not depend on the polar angle
                    }
                }
            }
        }
        for (theta, alpha) in seeds {
            let Some((theta, alpha)) = polish_candidate(cd, sigma, theta, alpha) else {
                continue;
            };
            if alpha.norm() >= 1.0 {
                continue;
            }
            let Ok(map) = MobiusMap::disc_automorphism(theta, alpha) else {
                continue;
            };
            // Exact acceptance: every hole must land on its assigned target.
            let ok = cd.holes.iter().enumerate().all(|(i, h)| {
                circle_match_error(&map.circle_image(h), &cd.holes[sigma[i]]) < tol
            });
            // Solutions are isolated, so a dedup radius well above the
            // polish accuracy cannot merge distinct elements.
            if ok && !elements.iter().any(|e| e.approx_eq(&map, 1e-5)) {
                elements.push(map);
            }
        }
    }

    // Deterministic order for serialization and comparison.
    elements.sort_by(|x, y| {
        let kx = (x.a.re, x.a.im, x.b.re, x.b.im);
        let ky = (y.a.re, y.a.im, y.b.re, y.b.im);
        kx.partial_cmp(&ky).unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(AutGroupDescriptor::FiniteGroup { elements })
}

/// Checks whether `m` fixes three pairwise distinct points to 1e-10; a map
/// that does must be the identity, and that implication is asserted.
pub fn three_point_identity_check(m: &MobiusMap, p1: C, p2: C, p3: C) -> Result<bool> {
    if (p1 - p2).norm() < 1e-12 || (p1 - p3).norm() < 1e-12 || (p2 - p3).norm() < 1e-12 {
        return Err(Error::Precondition {
            reason: "three-point check needs pairwise distinct points".into(),
        });
    }
    let fixes = [p1, p2, p3]
        .iter()
        .all(|&p| (m.apply(p) - p).norm() <= 1e-10);
    if fixes && !m.is_identity(1e-9) {
        return Err(Error::ClaimFailed {
            reason: format!(
                "map fixes three distinct points but is not the identity (distance {:.3e})",
                m.distance(&MobiusMap::identity())
            ),
        });
    }
    Ok(fixes)
}

/// Certificate that the automorphism group of a perturbed domain embeds
/// into the automorphism group of the reference domain.
#[derive(Debug, Clone)]
pub struct HomomorphismCertificate {
    /// (element of Aut of perturbed domain, nearest element of Aut of
    /// reference domain), by coefficient distance.
    pub pairs: Vec<(MobiusMap, MobiusMap)>,
    /// Worst coefficient distance within the matched pairs.
    pub max_matching_distance: f64,
    /// Worst defect of match(φ∘ψ) versus match(φ)∘match(ψ).
    pub composition_defect: f64,
}

/// Options for the semicontinuity experiment.
#[derive(Debug, Clone)]
pub struct SemicontinuityOptions {
    /// Bound demanded on the boundary-sample distance between the domains.
    pub boundary_threshold: f64,
    /// Uniformizer settings used for both domains.
    pub koebe: KoebeOptions,
    /// Acceptance tolerance for enumeration.
    pub enumeration_tol: f64,
}

impl Default for SemicontinuityOptions {
    fn default() -> Self {
        SemicontinuityOptions {
            boundary_threshold: 0.1,
            koebe: KoebeOptions::default(),
            enumeration_tol: 1e-6,
        }
    }
}

/// Sup-plus-slope distance between correspondingly sampled boundaries: the
/// sup norm of the sample difference plus the worst divided difference of
/// the difference over adjacent samples.
pub fn boundary_sample_distance(d0: &SampledDomain, d: &SampledDomain) -> Result<f64> {
    if d0.holes.len() != d.holes.len() {
        return Err(Error::GridMismatch {
            reason: "domains have different connectivity".into(),
        });
    }
    let curve_dist = |a: &[C], b: &[C]| -> Result<f64> {
        if a.len() != b.len() {
            return Err(Error::GridMismatch {
                reason: "boundary curves sampled at different resolutions".into(),
            });
        }
        let n = a.len();
        let h = 2.0 * PI / n as f64;
        let mut sup = 0.0f64;
        let mut slope = 0.0f64;
        for i in 0..n {
            let di = a[i] - b[i];
            let dj = a[(i + 1) % n] - b[(i + 1) % n];
            sup = sup.max(di.norm());
            slope = slope.max((dj - di).norm() / h);
        }
        Ok(sup + slope)
    };
    let mut dist = curve_dist(&d0.outer.points, &d.outer.points)?;
    for (h0, h1) in d0.holes.iter().zip(&d.holes) {
        dist = dist.max(curve_dist(&h0.points, &h1.points)?);
    }
    Ok(dist)
}

/// Uniformizes a reference domain and a nearby perturbed domain, enumerates
/// both automorphism groups, and certifies that matching each perturbed
/// element to its nearest reference element is an injective homomorphism.
pub fn semicontinuity_experiment(
    d0: &SampledDomain,
    d: &SampledDomain,
    tol: f64,
    opts: &SemicontinuityOptions,
) -> Result<HomomorphismCertificate> {
    let dist = boundary_sample_distance(d0, d)?;
    if dist > opts.boundary_threshold {
        return Err(Error::Precondition {
            reason: format!(
                "boundary distance {dist:.3e} exceeds the experiment threshold {:.3e}",
                opts.boundary_threshold
            ),
        });
    }
    let u0 = koebe_uniformize(d0, &opts.koebe)?;
    let u = koebe_uniformize(d, &opts.koebe)?;
    let g0 = enumerate_automorphisms(&u0.circle_domain, opts.enumeration_tol)?;
    let g = enumerate_automorphisms(&u.circle_domain, opts.enumeration_tol)?;
    let (AutGroupDescriptor::FiniteGroup { elements: e0 }, AutGroupDescriptor::FiniteGroup { elements: e }) =
        (&g0, &g)
    else {
        return Err(Error::Precondition {
            reason: "semicontinuity experiment needs finite automorphism groups (connectivity ≥ 3)"
                .into(),
        });
    };

    let nearest = |m: &MobiusMap, pool: &[MobiusMap]| -> (usize, f64) {
        let mut best = (0usize, f64::INFINITY);
        for (i, cand) in pool.iter().enumerate() {
            let dd = m.distance(cand);
            if dd < best.1 {
                best = (i, dd);
            }
        }
        best
    };

    let mut pairs = Vec::new();
    let mut match_idx = Vec::new();
    let mut max_matching_distance = 0.0f64;
    for phi in e {
        let (i, dd) = nearest(phi, e0);
        max_matching_distance = max_matching_distance.max(dd);
        match_idx.push(i);
        pairs.push((phi.clone(), e0[i].clone()));
    }
    // Injectivity of the matching.
    for i in 0..match_idx.len() {
        for j in (i + 1)..match_idx.len() {
            if match_idx[i] == match_idx[j] {
                return Err(Error::ClaimFailed {
                    reason: format!(
                        "matching is not injective: perturbed elements {i} and {j} both map to reference element {}",
                        match_idx[i]
                    ),
                });
            }
        }
    }
    // Homomorphism property on the full composition table.
    let mut composition_defect = 0.0f64;
    for (i, phi) in e.iter().enumerate() {
        for (j, psi) in e.iter().enumerate() {
            let prod = phi.compose(psi);
            let (k, dd) = nearest(&prod, e);
            if dd > tol {
                return Err(Error::ClaimFailed {
                    reason: format!(
                        "perturbed group is not closed: product of elements {i} and {j} is {dd:.3e} from the group"
                    ),
                });
            }
            let defect = e0[match_idx[i]]
                .compose(&e0[match_idx[j]])
                .distance(&e0[match_idx[k]]);
            composition_defect = composition_defect.max(defect);
            if defect > tol {
                return Err(Error::ClaimFailed {
                    reason: format!(
                        "homomorphism violated at elements ({i}, {j}): composition defect {defect:.3e}"
                    ),
                });
            }
        }
    }
    Ok(HomomorphismCertificate {
        pairs,
        max_matching_distance,
        composition_defect,
    })
}

/// Case labels for the boundary-orbit-accumulation analysis of circle
/// domains.  The unbounded case is excluded up front because these domains
/// are bounded by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitCase {
    /// Disc: noncompact group, orbits can accumulate at the boundary.
    Disc,
    /// One hole: compact one-dimensional group.
    Annulus,
    /// Two or more holes: finite group.
    HigherConnectivity,
}

/// Classification verdict: case label plus what it implies for the group.
#[derive(Debug, Clone)]
pub struct OrbitClassification {
    pub case: OrbitCase,
    /// True when the group is compact, which rules out orbit accumulation
    /// at the boundary.
    pub group_compact: bool,
    /// True when some orbit can approach the boundary.
    pub accumulation_possible: bool,
    pub note: String,
}

/// Classifies a circle domain by connectivity into the boundary-orbit
/// cases: disc (accumulation possible), annulus (compact group), or finite
/// group.  Unbounded domains cannot be represented here, which the verdict
/// records.
pub fn wong_rosay_classify(cd: &CircleDomain) -> OrbitClassification {
    match cd.connectivity() {
        1 => OrbitClassification {
            case: OrbitCase::Disc,
            group_compact: false,
            accumulation_possible: true,
            note: "disc: full Möbius group of the disc, orbits reach the boundary; unbounded case excluded by construction".into(),
        },
        2 => OrbitClassification {
            case: OrbitCase::Annulus,
            group_compact: true,
            accumulation_possible: false,
            note: "annulus: rotations and the radius swap form a compact group; orbit accumulation at the boundary is impossible".into(),
        },
        _ => OrbitClassification {
            case: OrbitCase::HigherConnectivity,
            group_compact: true,
            accumulation_possible: false,
            note: "connectivity ≥ 3: the automorphism group is finite; orbit accumulation at the boundary is impossible".into(),
        },
    }
}

/// Statistics of a sampled automorphism orbit of an interior point.
#[derive(Debug, Clone)]
pub struct OrbitStats {
    pub points: Vec<C>,
    /// Distance from the orbit to the domain boundary.
    pub min_boundary_distance: f64,
    /// Maximum pairwise distance within the orbit.
    pub max_spread: f64,
}

/// Samples `n` group elements and applies them to an interior point.
///
/// For the disc the sample runs along a boundary-accumulating family of
/// automorphisms (so the minimum boundary distance tends to zero as `n`
/// grows); the annulus samples the rotation circle and its composition
/// with the radius swap; a finite group is applied in full.
pub fn orbit_probe(
    cd: &CircleDomain,
    group: &AutGroupDescriptor,
    x: C,
    n: usize,
) -> Result<OrbitStats> {
    if !cd.contains(x) || cd.boundary_distance(x) <= 0.0 {
        return Err(Error::Precondition {
            reason: "orbit probe needs an interior point".into(),
        });
    }
    let mut points: Vec<C> = Vec::new();
    match group {
        AutGroupDescriptor::FullDiscGroup => {
            // A family φ_j(z) = (z - a_j)/(1 - a_j z) with a_j → 1: the
            // orbit of x marches to the boundary.
            for j in 0..n.max(1) {
                let a = 1.0 - 1.0 / (j + 1) as f64;
                let phi = MobiusMap::disc_automorphism(0.0, C::new(a, 0.0))?;
                points.push(phi.apply(x));
            }
        }
        AutGroupDescriptor::AnnulusGroup { modulus } => {
            let r = (-modulus).exp();
            let half = (n / 2).max(1);
            for k in 0..half {
                let rot = C::from_polar(1.0, 2.0 * PI * k as f64 / half as f64);
                points.push(rot * x);
                points.push(rot * r / x);
            }
        }
        AutGroupDescriptor::FiniteGroup { elements } => {
            for m in elements {
                points.push(m.apply(x));
            }
        }
    }
    let min_boundary_distance = points
        .iter()
        .map(|&p| cd.boundary_distance(p))
        .fold(f64::INFINITY, f64::min);
    let mut max_spread = 0.0f64;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            max_spread = max_spread.max((points[i] - points[j]).norm());
        }
    }
    Ok(OrbitStats {
        points,
        min_boundary_distance,
        max_spread,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::ClosedCurve;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn symmetric_pair_domain() -> CircleDomain {
        CircleDomain::new(
            Circle::unit(),
            vec![
                Circle::new(C::new(0.5, 0.0), 0.15).unwrap(),
                Circle::new(C::new(-0.5, 0.0), 0.15).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn disc_gets_full_group() {
        let g = enumerate_automorphisms(&CircleDomain::disc(), 1e-8).unwrap();
        assert!(matches!(g, AutGroupDescriptor::FullDiscGroup));
    }

    #[test]
    fn concentric_annulus_gets_rotation_family() {
        let g = enumerate_automorphisms(&CircleDomain::annulus(0.4).unwrap(), 1e-8).unwrap();
        match g {
            AutGroupDescriptor::AnnulusGroup { modulus } => {
                assert!((modulus - (1.0f64 / 0.4).ln()).abs() < 1e-12);
            }
            _ => panic!("expected annulus group"),
        }
    }

    #[test]
    fn eccentric_one_hole_domain_is_rejected() {
        let cd = CircleDomain::new(
            Circle::unit(),
            vec![Circle::new(C::new(0.3, 0.0), 0.2).unwrap()],
        )
        .unwrap();
        assert!(matches!(
            enumerate_automorphisms(&cd, 1e-8),
            Err(Error::Precondition { .. })
        ));
    }

    #[test]
    fn symmetric_hole_pair_has_order_two_group() {
        let g = enumerate_automorphisms(&symmetric_pair_domain(), 1e-6).unwrap();
        let AutGroupDescriptor::FiniteGroup { elements } = g else {
            panic!("expected finite group");
        };
        assert_eq!(elements.len(), 2, "expected exactly identity and z ↦ -z");
        let neg = MobiusMap::scaling(C::new(-1.0, 0.0)).unwrap();
        assert!(elements.iter().any(|e| e.is_identity(1e-9)));
        assert!(elements.iter().any(|e| e.approx_eq(&neg, 1e-7)));
    }

    #[test]
    fn generic_two_hole_domain_is_rigid() {
        let cd = CircleDomain::new(
            Circle::unit(),
            vec![
                Circle::new(C::new(0.45, 0.1), 0.12).unwrap(),
                Circle::new(C::new(-0.3, -0.2), 0.18).unwrap(),
            ],
        )
        .unwrap();
        let g = enumerate_automorphisms(&cd, 1e-6).unwrap();
        let AutGroupDescriptor::FiniteGroup { elements } = g else {
            panic!("expected finite group");
        };
        assert_eq!(elements.len(), 1);
        assert!(elements[0].is_identity(1e-9));
    }

    #[test]
    fn finite_group_satisfies_group_axioms() {
        let g = enumerate_automorphisms(&symmetric_pair_domain(), 1e-6).unwrap();
        let AutGroupDescriptor::FiniteGroup { elements } = g else {
            panic!("expected finite group");
        };
        assert!(elements.iter().any(|e| e.is_identity(1e-9)));
        for a in &elements {
            assert!(
                elements.iter().any(|e| e.approx_eq(&a.inverse(), 1e-9)),
                "inverse missing"
            );
            for b in &elements {
                let prod = a.compose(b);
                assert!(
                    elements.iter().any(|e| e.approx_eq(&prod, 1e-9)),
                    "composition escapes the group"
                );
            }
        }
    }

    #[test]
    fn enumeration_is_conjugation_consistent() {
        let cd = symmetric_pair_domain();
        let g = enumerate_automorphisms(&cd, 1e-6).unwrap();
        let AutGroupDescriptor::FiniteGroup { elements } = g else {
            panic!("expected finite group");
        };
        // Move the domain by a disc automorphism; the holes pick up unequal
        // Euclidean radii, exercising the invariant-radius pruning.
        let t = MobiusMap::disc_automorphism(0.3, C::new(0.2, 0.1)).unwrap();
        let holes: Vec<Circle> = cd
            .holes
            .iter()
            .map(|h| t.circle_image(h).circle().unwrap())
            .collect();
        let moved = CircleDomain::new(Circle::unit(), holes).unwrap();
        let g2 = enumerate_automorphisms(&moved, 1e-6).unwrap();
        let AutGroupDescriptor::FiniteGroup { elements: e2 } = g2 else {
            panic!("expected finite group");
        };
        assert_eq!(e2.len(), elements.len());
        for m in &elements {
            let conj = t.compose(m).compose(&t.inverse());
            assert!(
                e2.iter().any(|e| e.approx_eq(&conj, 1e-8)),
                "conjugated element missing from re-enumeration"
            );
        }
    }

    #[test]
    fn three_point_check_basic_cases() {
        let id = MobiusMap::identity();
        let p = (C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(-1.0, 0.0));
        assert!(three_point_identity_check(&id, p.0, p.1, p.2).unwrap());
        let neg = MobiusMap::scaling(C::new(-1.0, 0.0)).unwrap();
        assert!(!three_point_identity_check(&neg, p.0, p.1, p.2).unwrap());
        assert!(three_point_identity_check(&id, p.0, p.0, p.1).is_err());
    }

    #[test]
    fn three_point_check_has_no_false_positives() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut sample = |rng: &mut ChaCha8Rng| {
            C::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)
        };
        let mut checked = 0usize;
        while checked < 1000 {
            let m = match MobiusMap::new(
                sample(&mut rng),
                sample(&mut rng),
                sample(&mut rng),
                sample(&mut rng),
            ) {
                Ok(m) => m,
                Err(_) => continue,
            };
            if m.is_identity(1e-9) {
                continue;
            }
            let (p1, p2, p3) = (sample(&mut rng), sample(&mut rng), sample(&mut rng));
            if (p1 - p2).norm() < 1e-6 || (p1 - p3).norm() < 1e-6 || (p2 - p3).norm() < 1e-6 {
                continue;
            }
            // A non-identity map must never pass the three-fix test.
            assert!(!three_point_identity_check(&m, p1, p2, p3).unwrap());
            checked += 1;
        }
    }

    #[test]
    fn semicontinuity_of_identical_domains_is_identity_isomorphism() {
        let outer = ClosedCurve::circle(&Circle::unit(), 96, true);
        let holes = vec![
            ClosedCurve::circle(&Circle::new(C::new(0.5, 0.0), 0.15).unwrap(), 96, false),
            ClosedCurve::circle(&Circle::new(C::new(-0.5, 0.0), 0.15).unwrap(), 96, false),
        ];
        let d0 = SampledDomain::new(outer, holes, C::new(0.0, 0.3)).unwrap();
        let opts = SemicontinuityOptions {
            koebe: KoebeOptions {
                nodes: 96,
                ..KoebeOptions::default()
            },
            ..SemicontinuityOptions::default()
        };
        let cert = semicontinuity_experiment(&d0, &d0, 1e-6, &opts).unwrap();
        assert_eq!(cert.pairs.len(), 2);
        assert!(cert.max_matching_distance < 1e-9);
        assert!(cert.composition_defect < 1e-9);
    }

    #[test]
    fn classification_by_connectivity() {
        assert_eq!(wong_rosay_classify(&CircleDomain::disc()).case, OrbitCase::Disc);
        let ann = wong_rosay_classify(&CircleDomain::annulus(0.4).unwrap());
        assert_eq!(ann.case, OrbitCase::Annulus);
        assert!(ann.group_compact && !ann.accumulation_possible);
        let two = wong_rosay_classify(&symmetric_pair_domain());
        assert_eq!(two.case, OrbitCase::HigherConnectivity);
        assert!(two.group_compact);
    }

    #[test]
    fn annulus_orbit_stays_on_two_circles() {
        let cd = CircleDomain::annulus(0.4).unwrap();
        let g = enumerate_automorphisms(&cd, 1e-8).unwrap();
        let x = C::new(0.6, 0.0);
        let stats = orbit_probe(&cd, &g, x, 64).unwrap();
        for p in &stats.points {
            let r = p.norm();
            assert!(
                (r - 0.6).abs() < 1e-12 || (r - 0.4 / 0.6).abs() < 1e-12,
                "orbit radius {r} off the two circles"
            );
        }
        // Compact group: the orbit keeps a uniform distance to the boundary.
        let base = cd.boundary_distance(x);
        assert!(stats.min_boundary_distance > 0.5 * base);
    }

    #[test]
    fn disc_orbit_accumulates_at_boundary() {
        let cd = CircleDomain::disc();
        let stats = orbit_probe(&cd, &AutGroupDescriptor::FullDiscGroup, C::new(0.0, 0.0), 200)
            .unwrap();
        assert!(stats.min_boundary_distance < 1e-2);
    }

    #[test]
    fn finite_group_orbit_of_identity_only_is_fixed() {
        let g = AutGroupDescriptor::FiniteGroup {
            elements: vec![MobiusMap::identity()],
        };
        let cd = symmetric_pair_domain();
        let x = C::new(0.0, 0.4);
        let stats = orbit_probe(&cd, &g, x, 8).unwrap();
        assert_eq!(stats.points.len(), 1);
        assert!((stats.points[0] - x).norm() == 0.0);
        assert!(stats.max_spread == 0.0);
    }
}
