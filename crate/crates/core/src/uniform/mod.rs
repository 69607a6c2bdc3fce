//! Conformal uniformization of finitely connected sampled domains onto
//! circle domains.
//!
//! The engine is the classical rounding iteration: every sweep maps each
//! hole boundary, in turn, through the chain
//!
//! ```text
//!     z ↦ 1/(z - p)   →   riemann map of the inverted curve   →   w ↦ 1/w
//! ```
//!
//! (with `p` the fitted center of the hole), which replaces that hole by an
//! exact circle while perturbing the others slightly, and finishes with the
//! Riemann map of the outer boundary, which restores the unit circle as the
//! outer boundary and recenters the tracked basepoint at the origin.  The
//! circularity defect of all boundary curves contracts geometrically, and
//! the iteration stops once the worst defect drops below tolerance.  The
//! composite of all steps is kept as an evaluable conformal map chain.

mod szego;

pub use szego::RiemannMapDisc;

use crate::curves::{ClosedCurve, SampledDomain};
use crate::error::{Error, Result};
use crate::mobius::{Circle, CircleDomain, MobiusMap};
use crate::C;

/// One step of a composite conformal map.
#[derive(Debug, Clone)]
pub enum ChainStep {
    /// A Möbius map, applied by its closed form.
    Mobius(MobiusMap),
    /// A Riemann map onto the unit disc, applied by Cauchy integrals of its
    /// boundary values.
    Disc(Box<RiemannMapDisc>),
}

/// A composite conformal map, evaluated step by step.
///
/// Forward evaluation is defined on the interior of the source domain the
/// chain was built from; the inverse runs the stored step inverses and then
/// polishes with Newton iteration against the forward map.
#[derive(Debug, Clone, Default)]
pub struct ConformalMapChain {
    pub steps: Vec<ChainStep>,
}

impl ConformalMapChain {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Applies every step in order.
    pub fn eval(&self, z: C) -> Result<C> {
        let mut w = z;
        for (k, step) in self.steps.iter().enumerate() {
            w = match step {
                ChainStep::Mobius(m) => {
                    let v = m.apply(w);
                    if !v.re.is_finite() || !v.im.is_finite() {
                        return Err(Error::OutOfDomain {
                            step: k,
                            reason: "point hit a Möbius pole".into(),
                        });
                    }
                    v
                }
                ChainStep::Disc(f) => {
                    if !f.contains(w) {
                        return Err(Error::OutOfDomain {
                            step: k,
                            reason: "point left the source curve of a disc map".into(),
                        });
                    }
                    f.eval(w)
                }
            };
        }
        Ok(w)
    }

    /// Derivative of the composite by the chain rule.
    pub fn derivative(&self, z: C) -> Result<C> {
        let mut w = z;
        let mut acc = C::new(1.0, 0.0);
        for (k, step) in self.steps.iter().enumerate() {
            match step {
                ChainStep::Mobius(m) => {
                    acc *= m.derivative(w);
                    w = m.apply(w);
                    if !w.re.is_finite() || !w.im.is_finite() {
                        return Err(Error::OutOfDomain {
                            step: k,
                            reason: "point hit a Möbius pole".into(),
                        });
                    }
                }
                ChainStep::Disc(f) => {
                    if !f.contains(w) {
                        return Err(Error::OutOfDomain {
                            step: k,
                            reason: "point left the source curve of a disc map".into(),
                        });
                    }
                    acc *= f.eval_derivative(w);
                    w = f.eval(w);
                }
            }
        }
        Ok(acc)
    }

    /// Preimage of `w`: step inverses in reverse order, then Newton against
    /// the forward chain to tolerance 1e-10.
    pub fn eval_inverse(&self, w: C) -> Result<C> {
        let mut z = w;
        for step in self.steps.iter().rev() {
            z = match step {
                ChainStep::Mobius(m) => m.inverse().apply(z),
                ChainStep::Disc(f) => f.eval_inverse(z)?,
            };
        }
        let mut best = z;
        let mut best_res = match self.eval(z) {
            Ok(v) => (v - w).norm(),
            Err(_) => f64::INFINITY,
        };
        for _ in 0..30 {
            let fz = match self.eval(z) {
                Ok(v) => v,
                Err(_) => break,
            };
            let res = (fz - w).norm();
            if res < best_res {
                best_res = res;
                best = z;
            }
            if res < 1e-12 {
                break;
            }
            let dfz = match self.derivative(z) {
                Ok(v) => v,
                Err(_) => break,
            };
            if dfz.norm() < 1e-14 {
                break;
            }
            let mut step = (fz - w) / dfz;
            let mut cand = z - step;
            let mut halvings = 0;
            while self.eval(cand).is_err() && halvings < 20 {
                step *= 0.5;
                cand = z - step;
                halvings += 1;
            }
            if halvings == 20 {
                break;
            }
            z = cand;
        }
        if best_res > 1e-10 {
            return Err(Error::NotConverged {
                iterations: 30,
                residual: best_res,
            });
        }
        Ok(best)
    }
}

/// Riemann map of a Jordan curve interior onto the unit disc with
/// `basepoint ↦ 0` and positive derivative there, packaged as a one-step
/// chain.
pub fn riemann_map_disc(curve: &ClosedCurve, basepoint: C) -> Result<ConformalMapChain> {
    let oriented = ensure_ccw(curve);
    let map = RiemannMapDisc::new(&oriented, basepoint)?;
    Ok(ConformalMapChain {
        steps: vec![ChainStep::Disc(Box::new(map))],
    })
}

/// Options for the rounding iteration.
#[derive(Debug, Clone)]
pub struct KoebeOptions {
    /// Boundary nodes per curve used internally.
    pub nodes: usize,
    /// Target for the worst circularity defect among all boundary curves.
    pub tolerance: f64,
    /// Maximum number of full sweeps.
    pub max_sweeps: usize,
}

impl Default for KoebeOptions {
    fn default() -> Self {
        KoebeOptions {
            nodes: 256,
            tolerance: 1e-8,
            max_sweeps: 30,
        }
    }
}

/// Result of uniformizing a sampled domain onto a circle domain.
#[derive(Debug, Clone)]
pub struct UniformizationResult {
    /// The target circle domain: unit outer circle, basepoint at the origin.
    pub circle_domain: CircleDomain,
    /// Composite conformal map from the source domain onto the circle
    /// domain.
    pub map: ConformalMapChain,
    /// Worst circularity defect of the final boundary curves.
    pub residual: f64,
    /// Number of full sweeps performed.
    pub iterations: usize,
    /// False if the sweep budget ran out before reaching tolerance; the
    /// result then carries the best configuration reached.
    pub converged: bool,
}

fn ensure_ccw(curve: &ClosedCurve) -> ClosedCurve {
    if curve.signed_area() >= 0.0 {
        curve.clone()
    } else {
        curve.reversed()
    }
}

fn map_points(f: &RiemannMapDisc, curve: &ClosedCurve) -> ClosedCurve {
    ClosedCurve {
        points: curve.points.iter().map(|&p| f.eval(p)).collect(),
    }
}

fn mobius_points(m: &MobiusMap, curve: &ClosedCurve) -> ClosedCurve {
    ClosedCurve {
        points: curve.points.iter().map(|&p| m.apply(p)).collect(),
    }
}

/// Uniformizes a finitely connected sampled domain onto a circle domain by
/// the rounding iteration, normalized so the outer boundary is the unit
/// circle, the basepoint maps to the origin, and the derivative of the map
/// at the basepoint is a positive real number.
///
/// If the sweep budget is exhausted before the circularity tolerance is
/// met, the best configuration reached is returned with `converged` unset.
pub fn koebe_uniformize(domain: &SampledDomain, opts: &KoebeOptions) -> Result<UniformizationResult> {
    if opts.nodes < 16 {
        return Err(Error::Precondition {
            reason: "rounding iteration needs at least 16 boundary nodes".into(),
        });
    }
    let mut outer = ensure_ccw(&domain.outer.resample_uniform_arclength(opts.nodes));
    let mut holes: Vec<ClosedCurve> = domain
        .holes
        .iter()
        .map(|h| ensure_ccw(&h.resample_uniform_arclength(opts.nodes)))
        .collect();
    let mut zc = domain.basepoint;
    let mut steps: Vec<ChainStep> = Vec::new();

    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    for sweep in 1..=opts.max_sweeps {
        iterations = sweep;
        // Round each hole in turn.
        for j in 0..holes.len() {
            let p = holes[j].fit_circle().center;
            // z ↦ 1/(z - p): sends the hole interior to the exterior of the
            // inverted curve and ∞ (hence the far field) to the origin.
            let m1 = MobiusMap::new(
                C::new(0.0, 0.0),
                C::new(1.0, 0.0),
                C::new(1.0, 0.0),
                -p,
            )?;
            outer = mobius_points(&m1, &outer);
            for h in holes.iter_mut() {
                *h = mobius_points(&m1, h);
            }
            zc = m1.apply(zc);
            steps.push(ChainStep::Mobius(m1));

            // Riemann map of the inverted hole curve with basepoint 0 (the
            // image of ∞), so the overall hole step fixes ∞ and keeps the
            // outer boundary outermost.
            let inverted = ensure_ccw(&holes[j]);
            let f = RiemannMapDisc::new(&inverted, C::new(0.0, 0.0))?;
            let hole_image = ClosedCurve {
                points: f.boundary_values().to_vec(),
            };
            for (i, h) in holes.iter_mut().enumerate() {
                if i != j {
                    *h = map_points(&f, h);
                }
            }
            holes[j] = hole_image;
            outer = map_points(&f, &outer);
            zc = f.eval(zc);
            steps.push(ChainStep::Disc(Box::new(f)));

            let m2 = MobiusMap::inversion();
            outer = mobius_points(&m2, &outer);
            for h in holes.iter_mut() {
                *h = mobius_points(&m2, h);
            }
            zc = m2.apply(zc);
            steps.push(ChainStep::Mobius(m2));
        }

        // Outer step: the Riemann map of the outer curve restores the unit
        // circle and puts the basepoint at the origin.
        let outer_ccw = ensure_ccw(&outer);
        let f = RiemannMapDisc::new(&outer_ccw, zc)?;
        let outer_image = ClosedCurve {
            points: f.boundary_values().to_vec(),
        };
        for h in holes.iter_mut() {
            *h = map_points(&f, h);
        }
        outer = outer_image;
        zc = C::new(0.0, 0.0);
        steps.push(ChainStep::Disc(Box::new(f)));

        let mut defect = outer.circularity_defect();
        for h in &holes {
            defect = defect.max(h.circularity_defect());
        }
        if defect < residual {
            residual = defect;
        }
        if defect < opts.tolerance {
            converged = true;
            break;
        }
        // Re-equalize the parametrizations before the next sweep; the maps
        // of this sweep have distorted the node spacing.
        outer = ensure_ccw(&outer.resample_uniform_arclength(opts.nodes));
        for h in holes.iter_mut() {
            *h = ensure_ccw(&h.resample_uniform_arclength(opts.nodes));
        }
    }

    // Fix the remaining rotation so the derivative of the chain at the
    // basepoint is a positive real number.
    let chain = ConformalMapChain { steps };
    let d = chain.derivative(domain.basepoint)?;
    if d.norm() < 1e-14 {
        return Err(Error::NumericalDegeneracy {
            reason: "vanishing derivative at the basepoint".into(),
        });
    }
    let rot = MobiusMap::scaling(d.conj() / d.norm())?;
    outer = mobius_points(&rot, &outer);
    for h in holes.iter_mut() {
        *h = mobius_points(&rot, h);
    }
    let mut steps = chain.steps;
    steps.push(ChainStep::Mobius(rot));
    let chain = ConformalMapChain { steps };

    let outer_fit = outer.fit_circle();
    let hole_fits: Vec<Circle> = holes.iter().map(|h| h.fit_circle()).collect();
    let circle_domain = CircleDomain::new(outer_fit, hole_fits)?;

    Ok(UniformizationResult {
        circle_domain,
        map: chain,
        residual,
        iterations,
        converged,
    })
}

/// Möbius map taking a one-hole circle domain to a concentric annulus with
/// unit outer circle, via the common symmetric points of the two boundary
/// circles.  Returns the concentric domain and the map.
pub fn concentrize(domain: &CircleDomain) -> Result<(CircleDomain, MobiusMap)> {
    if domain.holes.len() != 1 {
        return Err(Error::Precondition {
            reason: "concentric normal form needs exactly one hole".into(),
        });
    }
    // Normalize the outer circle to the unit circle.
    let affine = MobiusMap::scaling(C::new(1.0 / domain.outer.radius, 0.0))?
        .compose(&MobiusMap::translation(-domain.outer.center));
    let hole = affine
        .circle_image(&domain.holes[0])
        .circle()
        .ok_or(Error::DegenerateConfiguration {
            reason: "hole mapped to a line".into(),
        })?;

    let pre = if hole.center.norm() < 1e-13 {
        affine
    } else {
        // Rotate the hole center onto the positive real axis.
        let rot = MobiusMap::scaling(hole.center.conj() / hole.center.norm())?;
        rot.compose(&affine)
    };
    let hole = pre
        .circle_image(&domain.holes[0])
        .circle()
        .ok_or(Error::DegenerateConfiguration {
            reason: "hole mapped to a line".into(),
        })?;
    let c = hole.center.re;
    let r = hole.radius;

    let full = if c.abs() < 1e-13 {
        pre
    } else {
        // Common symmetric points of {|z| = 1} and the hole: the roots of
        // c·x² - (c² + 1 - r²)·x + c = 0, real, with product 1.
        let b = c * c + 1.0 - r * r;
        let disc = b * b - 4.0 * c * c;
        if disc <= 0.0 {
            return Err(Error::DegenerateConfiguration {
                reason: "boundary circles are tangent or crossing".into(),
            });
        }
        let x_in = (b - disc.sqrt()) / (2.0 * c);
        let x_out = (b + disc.sqrt()) / (2.0 * c);
        let t0 = MobiusMap::new(
            C::new(1.0, 0.0),
            C::new(-x_in, 0.0),
            C::new(1.0, 0.0),
            C::new(-x_out, 0.0),
        )?;
        let outer_image = t0
            .circle_image(&Circle::unit())
            .circle()
            .ok_or(Error::DegenerateConfiguration {
                reason: "outer circle mapped to a line".into(),
            })?;
        MobiusMap::scaling(C::new(1.0 / outer_image.radius, 0.0))?
            .compose(&t0)
            .compose(&pre)
    };

    let outer_image = full
        .circle_image(&domain.outer)
        .circle()
        .ok_or(Error::DegenerateConfiguration {
            reason: "outer circle mapped to a line".into(),
        })?;
    let hole_image = full
        .circle_image(&domain.holes[0])
        .circle()
        .ok_or(Error::DegenerateConfiguration {
            reason: "hole mapped to a line".into(),
        })?;
    let concentric = CircleDomain::new(outer_image, vec![hole_image])?;
    Ok((concentric, full))
}

/// Conformal modulus log(R/r) of a concentric circular annulus.
pub fn modulus_of_annulus(domain: &CircleDomain) -> Result<f64> {
    if domain.holes.len() != 1 {
        return Err(Error::Precondition {
            reason: "modulus is defined for one-hole domains".into(),
        });
    }
    let hole = &domain.holes[0];
    if (hole.center - domain.outer.center).norm() > 1e-8 * domain.outer.radius {
        return Err(Error::Precondition {
            reason: "annulus modulus needs concentric circles; apply the concentric normal form first".into(),
        });
    }
    Ok((domain.outer.radius / hole.radius).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn unit_circle_curve(n: usize) -> ClosedCurve {
        ClosedCurve::circle(&Circle::unit(), n, true)
    }

    #[test]
    fn riemann_map_of_disc_is_identity() {
        let curve = unit_circle_curve(64);
        let f = RiemannMapDisc::new(&curve, C::new(0.0, 0.0)).unwrap();
        assert!((f.deriv_at_basepoint() - 1.0).abs() < 1e-10);
        for (v, p) in f.boundary_values().iter().zip(&curve.points) {
            assert!((v - p).norm() < 1e-10);
        }
        let z = C::new(0.3, 0.2);
        assert!((f.eval(z) - z).norm() < 1e-10);
        assert!((f.eval_inverse(z).unwrap() - z).norm() < 1e-10);
        assert!(f.boundary_residual() < 1e-10);
    }

    #[test]
    fn riemann_map_of_disc_with_offset_basepoint_is_disc_automorphism() {
        let a = C::new(0.3, 0.1);
        let curve = unit_circle_curve(128);
        let f = RiemannMapDisc::new(&curve, a).unwrap();
        // The normalized map must be z ↦ (z-a)/(1-conj(a)z), whose
        // derivative at a is 1/(1-|a|²) > 0.
        assert!((f.deriv_at_basepoint() - 1.0 / (1.0 - a.norm_sqr())).abs() < 1e-9);
        for (v, &z) in f.boundary_values().iter().zip(&curve.points) {
            let expect = (z - a) / (C::new(1.0, 0.0) - a.conj() * z);
            assert!((v - expect).norm() < 1e-9);
        }
    }

    #[test]
    fn riemann_map_of_perturbed_circle() {
        let curve = ClosedCurve::radial(C::new(0.0, 0.0), 128, |t| 1.0 + 0.05 * (3.0 * t).cos());
        let f = RiemannMapDisc::new(&curve, C::new(0.0, 0.0)).unwrap();
        assert!(f.boundary_residual() < 1e-6);
        assert!(f.eval(C::new(0.0, 0.0)).norm() < 1e-9);
        assert!(f.deriv_at_basepoint() > 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..25 {
            let rho = 0.7 * rng.gen::<f64>().sqrt();
            let th = 2.0 * PI * rng.gen::<f64>();
            let z = C::from_polar(rho, th);
            let w = f.eval(z);
            assert!(w.norm() < 1.0);
            let back = f.eval_inverse(w).unwrap();
            assert!((back - z).norm() < 1e-8, "round trip error {}", (back - z).norm());
        }
    }

    #[test]
    fn chain_derivative_matches_difference_quotient() {
        let curve = ClosedCurve::radial(C::new(0.0, 0.0), 128, |t| 1.0 + 0.05 * (3.0 * t).cos());
        let chain = riemann_map_disc(&curve, C::new(0.1, 0.0)).unwrap();
        let h = 1e-6;
        for &z in &[C::new(0.2, 0.3), C::new(-0.4, 0.1), C::new(0.0, -0.5)] {
            let d = chain.derivative(z).unwrap();
            let dx = (chain.eval(z + C::new(h, 0.0)).unwrap()
                - chain.eval(z - C::new(h, 0.0)).unwrap())
                / (2.0 * h);
            let dy = (chain.eval(z + C::new(0.0, h)).unwrap()
                - chain.eval(z - C::new(0.0, h)).unwrap())
                / (C::new(0.0, 2.0 * h));
            // Cauchy–Riemann: both one-sided difference quotients agree with
            // the complex derivative.
            assert!((d - dx).norm() < 1e-6);
            assert!((d - dy).norm() < 1e-6);
        }
    }

    fn circle_annulus_domain(hole_center: C, hole_radius: f64, n: usize, basepoint: C) -> SampledDomain {
        let outer = unit_circle_curve(n);
        let hole = ClosedCurve::circle(&Circle::new(hole_center, hole_radius).unwrap(), n, false);
        SampledDomain::new(outer, vec![hole], basepoint).unwrap()
    }

    #[test]
    fn koebe_on_circle_annulus_converges_immediately() {
        let domain = circle_annulus_domain(C::new(0.25, 0.0), 0.15, 128, C::new(-0.5, 0.0));
        let opts = KoebeOptions {
            nodes: 128,
            ..KoebeOptions::default()
        };
        let result = koebe_uniformize(&domain, &opts).unwrap();
        assert!(result.converged);
        assert!(result.iterations <= 2, "took {} sweeps", result.iterations);
        assert!(result.residual < 1e-8);
        // Normalization: basepoint at the origin, positive derivative.
        let img = result.map.eval(domain.basepoint).unwrap();
        assert!(img.norm() < 1e-8);
        let d = result.map.derivative(domain.basepoint).unwrap();
        assert!(d.re > 0.0 && d.im.abs() < 1e-8 * d.norm());
        assert!(result.circle_domain.outer.approx_eq(&Circle::unit(), 1e-8));
    }

    #[test]
    fn koebe_modulus_matches_symmetrization_oracle() {
        let (c, r) = (0.3, 0.2);
        let domain = circle_annulus_domain(C::new(c, 0.0), r, 128, C::new(-0.5, 0.0));
        let opts = KoebeOptions {
            nodes: 128,
            ..KoebeOptions::default()
        };
        let result = koebe_uniformize(&domain, &opts).unwrap();
        assert!(result.converged);
        let (concentric, _) = concentrize(&result.circle_domain).unwrap();
        let modulus = modulus_of_annulus(&concentric).unwrap();

        // Independent closed form: the pair of points symmetric about both
        // boundary circles are the roots of c·x² - (c²+1-r²)·x + c = 0, and
        // T(z) = (z-x₁)/(z-x₂) sends both circles to concentric ones.
        let b = c * c + 1.0 - r * r;
        let x1 = (b - (b * b - 4.0 * c * c).sqrt()) / (2.0 * c);
        let x2 = (b + (b * b - 4.0 * c * c).sqrt()) / (2.0 * c);
        let t = |z: f64| (z - x1).abs() / (z - x2).abs();
        let oracle = (t(1.0) / t(c + r)).ln().abs();

        assert!(
            (modulus - oracle).abs() < 1e-6,
            "modulus {modulus} vs oracle {oracle}"
        );
    }

    #[test]
    fn koebe_on_perturbed_two_connected_domain_round_trips() {
        let outer = ClosedCurve::radial(C::new(0.0, 0.0), 128, |t| 1.0 + 0.05 * (3.0 * t).cos());
        let hole = ClosedCurve::circle(&Circle::new(C::new(-0.1, 0.0), 0.2).unwrap(), 128, false);
        let domain = SampledDomain::new(outer, vec![hole], C::new(0.5, 0.0)).unwrap();
        let opts = KoebeOptions {
            nodes: 128,
            ..KoebeOptions::default()
        };
        let result = koebe_uniformize(&domain, &opts).unwrap();
        assert!(result.converged, "residual {}", result.residual);
        assert!(result.residual < 1e-8);
        for &z in &[C::new(0.5, 0.0), C::new(0.3, 0.4), C::new(-0.55, 0.0), C::new(0.2, -0.5)] {
            assert!(domain.contains(z));
            let w = result.map.eval(z).unwrap();
            assert!(result.circle_domain.contains(w));
            let back = result.map.eval_inverse(w).unwrap();
            assert!((back - z).norm() < 1e-6, "round trip error {}", (back - z).norm());
        }
    }

    #[test]
    fn concentric_modulus_is_conformally_invariant() {
        let domain = CircleDomain::new(
            Circle::unit(),
            vec![Circle::new(C::new(0.2, 0.1), 0.25).unwrap()],
        )
        .unwrap();
        let (conc, _) = concentrize(&domain).unwrap();
        let m1 = modulus_of_annulus(&conc).unwrap();

        // Pre-composing with a disc automorphism moves the hole but must not
        // change the modulus.
        let aut = MobiusMap::disc_automorphism(0.7, C::new(-0.3, 0.2)).unwrap();
        let moved_hole = aut.circle_image(&domain.holes[0]).circle().unwrap();
        let moved = CircleDomain::new(Circle::unit(), vec![moved_hole]).unwrap();
        let (conc2, _) = concentrize(&moved).unwrap();
        let m2 = modulus_of_annulus(&conc2).unwrap();
        assert!((m1 - m2).abs() < 1e-10);
    }

    #[test]
    fn concentric_annulus_modulus_reads_off_radii() {
        let domain = CircleDomain::annulus(0.4).unwrap();
        let m = modulus_of_annulus(&domain).unwrap();
        assert!((m - (1.0f64 / 0.4).ln()).abs() < 1e-14);
        let eccentric = CircleDomain::new(
            Circle::unit(),
            vec![Circle::new(C::new(0.3, 0.0), 0.2).unwrap()],
        )
        .unwrap();
        assert!(modulus_of_annulus(&eccentric).is_err());
    }
}
