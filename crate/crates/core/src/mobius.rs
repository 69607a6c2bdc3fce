//! Möbius maps, circles, and their closed-form interaction on the extended
//! plane.

use crate::error::{Error, Result};
use crate::C;
use num_complex::Complex64;

/// A point of the extended complex plane ℂ ∪ {∞}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtC {
    Finite(C),
    Infinity,
}

impl ExtC {
    pub fn finite(self) -> Option<C> {
        match self {
            ExtC::Finite(z) => Some(z),
            ExtC::Infinity => None,
        }
    }
}

impl From<C> for ExtC {
    fn from(z: C) -> Self {
        ExtC::Finite(z)
    }
}

/// A linear fractional transformation z ↦ (az + b)/(cz + d).
///
/// Coefficients are stored normalized so that ad − bc = 1; the quadruple is
/// therefore unique up to a global sign.
#[derive(Debug, Clone, Copy)]
pub struct MobiusMap {
    pub a: C,
    pub b: C,
    pub c: C,
    pub d: C,
}

impl MobiusMap {
    pub fn new(a: C, b: C, c: C, d: C) -> Result<Self> {
        let det = a * d - b * c;
        let scale = (a.norm() + b.norm() + c.norm() + d.norm()).max(1.0);
        if det.norm() < 1e-14 * scale * scale {
            return Err(Error::DegenerateMobius {
                det_abs: det.norm(),
            });
        }
        let s = det.sqrt();
        Ok(MobiusMap {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        })
    }

    pub fn identity() -> Self {
        MobiusMap {
            a: C::new(1.0, 0.0),
            b: C::new(0.0, 0.0),
            c: C::new(0.0, 0.0),
            d: C::new(1.0, 0.0),
        }
    }

    /// z ↦ z + t.
    pub fn translation(t: C) -> Self {
        MobiusMap::new(C::new(1.0, 0.0), t, C::new(0.0, 0.0), C::new(1.0, 0.0)).unwrap()
    }

    /// z ↦ s·z, s ≠ 0.
    pub fn scaling(s: C) -> Result<Self> {
        MobiusMap::new(s, C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0))
    }

    /// z ↦ 1/z.
    pub fn inversion() -> Self {
        MobiusMap::new(
            C::new(0.0, 0.0),
            C::new(1.0, 0.0),
            C::new(1.0, 0.0),
            C::new(0.0, 0.0),
        )
        .unwrap()
    }

    /// Unit-disc automorphism z ↦ e^{iθ}(z − α)/(1 − ᾱz), |α| < 1.
    pub fn disc_automorphism(theta: f64, alpha: C) -> Result<Self> {
        if alpha.norm() >= 1.0 {
            return Err(Error::ParameterDomain {
                reason: format!("|alpha| = {} must be < 1", alpha.norm()),
            });
        }
        let rot = C::from_polar(1.0, theta);
        MobiusMap::new(rot, -rot * alpha, -alpha.conj(), C::new(1.0, 0.0))
    }

    pub fn determinant(&self) -> C {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(&self) -> Self {
        // (az+b)/(cz+d) inverted: (dz−b)/(−cz+a); determinant already 1.
        MobiusMap {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    /// Applies the map with the extended-plane conventions m(∞) = a/c and
    /// m(−d/c) = ∞.
    pub fn apply_ext(&self, z: ExtC) -> ExtC {
        match z {
            ExtC::Infinity => {
                if self.c.norm() == 0.0 {
                    ExtC::Infinity
                } else {
                    ExtC::Finite(self.a / self.c)
                }
            }
            ExtC::Finite(z) => {
                let den = self.c * z + self.d;
                if den.norm() == 0.0 {
                    ExtC::Infinity
                } else {
                    ExtC::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }

    /// Applies the map to a finite point expected to stay finite.
    pub fn apply(&self, z: C) -> C {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    /// Derivative (ad − bc)/(cz + d)² = 1/(cz + d)² for normalized maps.
    pub fn derivative(&self, z: C) -> C {
        let den = self.c * z + self.d;
        self.determinant() / (den * den)
    }

    /// Composition: the result applies `self` after `other`.
    pub fn compose(&self, other: &MobiusMap) -> Self {
        // Matrix product of determinant-1 factors keeps determinant 1.
        MobiusMap {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    /// Coefficient distance up to the global sign ambiguity of the
    /// determinant-1 normalization.
    pub fn distance(&self, other: &MobiusMap) -> f64 {
        let plus = (self.a - other.a).norm()
            + (self.b - other.b).norm()
            + (self.c - other.c).norm()
            + (self.d - other.d).norm();
        let minus = (self.a + other.a).norm()
            + (self.b + other.b).norm()
            + (self.c + other.c).norm()
            + (self.d + other.d).norm();
        plus.min(minus)
    }

    pub fn approx_eq(&self, other: &MobiusMap, tol: f64) -> bool {
        self.distance(other) < tol
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.approx_eq(&MobiusMap::identity(), tol)
    }

    /// Closed-form image of a circle, or a line when the pole lies on it.
    pub fn circle_image(&self, circle: &Circle) -> CircleOrLine {
        if self.c.norm() < 1e-15 {
            // Affine map z ↦ (a/d) z + b/d.
            let s = self.a / self.d;
            return CircleOrLine::Circle(Circle {
                center: self.apply(circle.center),
                radius: s.norm() * circle.radius,
            });
        }
        // m(z) = a/c + mu / (z - q) with q = -d/c, mu = -(ad - bc)/c².
        let q = -self.d / self.c;
        let mu = -self.determinant() / (self.c * self.c);
        let u0 = circle.center - q;
        let dist = u0.norm();
        if (dist - circle.radius).abs() < 1e-13 * (dist + circle.radius).max(1.0) {
            // Pole on the circle: the inversion sends it to the line
            // Re(u0 · v) = 1/2, then w = a/c + mu v.
            let aoc = self.a / self.c;
            // Re((u0/mu) w) = 1/2 + Re(u0 aoc / mu)
            let n = (u0 / mu).conj();
            let offset = 0.5 + (u0 * aoc / mu).re;
            return CircleOrLine::Line(Line { normal: n, offset });
        }
        let denom = dist * dist - circle.radius * circle.radius;
        let vc = u0.conj() / denom;
        let vr = circle.radius / denom.abs();
        CircleOrLine::Circle(Circle {
            center: self.a / self.c + mu * vc,
            radius: mu.norm() * vr,
        })
    }
}

/// A circle with positive radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: C,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: C, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::NonPositiveRadius { radius });
        }
        Ok(Circle { center, radius })
    }

    pub fn unit() -> Self {
        Circle {
            center: C::new(0.0, 0.0),
            radius: 1.0,
        }
    }

    pub fn point_at(&self, t: f64) -> C {
        self.center + Complex64::from_polar(self.radius, t)
    }

    pub fn contains(&self, z: C) -> bool {
        (z - self.center).norm() < self.radius
    }

    /// Signed distance of z to the circle (negative inside).
    pub fn signed_distance(&self, z: C) -> f64 {
        (z - self.center).norm() - self.radius
    }

    pub fn approx_eq(&self, other: &Circle, tol: f64) -> bool {
        (self.center - other.center).norm() < tol && (self.radius - other.radius).abs() < tol
    }
}

/// A line in normal form Re(conj(normal) · z) = offset.
#[derive(Debug, Clone, Copy)]
pub struct Line {
    pub normal: C,
    pub offset: f64,
}

impl Line {
    pub fn distance_to(&self, z: C) -> f64 {
        ((self.normal.conj() * z).re - self.offset).abs() / self.normal.norm()
    }
}

/// Image of a circle under a Möbius map.
#[derive(Debug, Clone, Copy)]
pub enum CircleOrLine {
    Circle(Circle),
    Line(Line),
}

impl CircleOrLine {
    pub fn circle(self) -> Option<Circle> {
        match self {
            CircleOrLine::Circle(c) => Some(c),
            CircleOrLine::Line(_) => None,
        }
    }
}

/// A bounded circle domain: the open disc bounded by `outer` with the closed
/// discs bounded by `holes` removed.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleDomain {
    pub outer: Circle,
    pub holes: Vec<Circle>,
}

impl CircleDomain {
    pub fn new(outer: Circle, holes: Vec<Circle>) -> Result<Self> {
        for (i, h) in holes.iter().enumerate() {
            let sep = (h.center - outer.center).norm() + h.radius;
            if sep >= outer.radius {
                return Err(Error::InvalidCircleDomain {
                    reason: format!("hole {i} is not strictly inside the outer circle"),
                });
            }
        }
        for i in 0..holes.len() {
            for j in (i + 1)..holes.len() {
                let gap = (holes[i].center - holes[j].center).norm()
                    - holes[i].radius
                    - holes[j].radius;
                if gap <= 0.0 {
                    return Err(Error::InvalidCircleDomain {
                        reason: format!("holes {i} and {j} overlap or touch"),
                    });
                }
            }
        }
        Ok(CircleDomain { outer, holes })
    }

    pub fn disc() -> Self {
        CircleDomain {
            outer: Circle::unit(),
            holes: vec![],
        }
    }

    /// Concentric annulus r < |z| < 1.
    pub fn annulus(r: f64) -> Result<Self> {
        CircleDomain::new(
            Circle::unit(),
            vec![Circle::new(C::new(0.0, 0.0), r)?],
        )
    }

    pub fn connectivity(&self) -> usize {
        1 + self.holes.len()
    }

    pub fn contains(&self, z: C) -> bool {
        self.outer.contains(z) && self.holes.iter().all(|h| (z - h.center).norm() > h.radius)
    }

    /// Distance from an interior point to the boundary.
    pub fn boundary_distance(&self, z: C) -> f64 {
        let mut d = self.outer.radius - (z - self.outer.center).norm();
        for h in &self.holes {
            d = d.min((z - h.center).norm() - h.radius);
        }
        d
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        self.outer.center.norm() < tol && (self.outer.radius - 1.0).abs() < tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn random_mobius(rng: &mut impl Rng) -> MobiusMap {
        loop {
            let coeffs: Vec<C> = (0..4)
                .map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
                .collect();
            if let Ok(m) = MobiusMap::new(coeffs[0], coeffs[1], coeffs[2], coeffs[3]) {
                return m;
            }
        }
    }

    #[test]
    fn identity_apply() {
        let m = MobiusMap::identity();
        assert_eq!(m.apply(c(3.0, 4.0)), c(3.0, 4.0));
    }

    #[test]
    fn inversion_apply() {
        let m = MobiusMap::inversion();
        assert!((m.apply(c(2.0, 0.0)) - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn numerator_zero() {
        // z ↦ (z − 0.1)/(1 − 0.1 z) at z = 0.1
        let m = MobiusMap::disc_automorphism(0.0, c(0.1, 0.0)).unwrap();
        assert!(m.apply(c(0.1, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn infinity_conventions() {
        let m = MobiusMap::new(c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(3.0, 0.0)).unwrap();
        assert_eq!(m.apply_ext(ExtC::Infinity), ExtC::Finite(c(2.0, 0.0)));
        assert_eq!(m.apply_ext(ExtC::Finite(c(-3.0, 0.0))), ExtC::Infinity);
    }

    #[test]
    fn compose_translations() {
        let m1 = MobiusMap::translation(c(1.0, 0.0));
        let m2 = MobiusMap::translation(c(2.0, 0.0));
        let m = m1.compose(&m2);
        assert!(m.approx_eq(&MobiusMap::translation(c(3.0, 0.0)), 1e-12));
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let m = random_mobius(&mut rng);
            let id = m.compose(&m.inverse());
            assert!(id.is_identity(1e-12));
            for _ in 0..5 {
                let z = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
                assert!((id.apply(z) - z).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn compose_matches_pointwise_application() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let m1 = random_mobius(&mut rng);
            let m2 = random_mobius(&mut rng);
            let m = m1.compose(&m2);
            for _ in 0..10 {
                let z = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                let direct = m1.apply(m2.apply(z));
                if direct.norm() < 1e6 {
                    assert!((m.apply(z) - direct).norm() < 1e-9 * (1.0 + direct.norm()));
                }
            }
        }
    }

    #[test]
    fn determinant_stays_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let m = random_mobius(&mut rng).compose(&random_mobius(&mut rng));
            assert!((m.determinant() - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn unit_circle_under_inversion() {
        let img = MobiusMap::inversion()
            .circle_image(&Circle::unit())
            .circle()
            .unwrap();
        assert!(img.approx_eq(&Circle::unit(), 1e-12));
    }

    #[test]
    fn circle_image_center_three() {
        // circle(center 3, radius 1) under z ↦ 1/z → circle(center 3/8, radius 1/8)
        let circle = Circle::new(c(3.0, 0.0), 1.0).unwrap();
        let img = MobiusMap::inversion().circle_image(&circle).circle().unwrap();
        assert!(img.approx_eq(&Circle::new(c(3.0 / 8.0, 0.0), 1.0 / 8.0).unwrap(), 1e-12));
    }

    #[test]
    fn circle_image_identity() {
        let circle = Circle::new(c(0.3, -0.2), 0.7).unwrap();
        let img = MobiusMap::identity().circle_image(&circle).circle().unwrap();
        assert!(img.approx_eq(&circle, 1e-12));
    }

    #[test]
    fn circle_image_commutes_with_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let m = random_mobius(&mut rng);
            let circle = Circle::new(
                c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                rng.gen_range(0.2..1.5),
            )
            .unwrap();
            match m.circle_image(&circle) {
                CircleOrLine::Circle(img) => {
                    for i in 0..100 {
                        let t = 2.0 * std::f64::consts::PI * (i as f64) / 100.0;
                        let w = m.apply(circle.point_at(t));
                        assert!(
                            img.signed_distance(w).abs() < 1e-10 * (1.0 + img.radius),
                            "sampled image point off the image circle"
                        );
                    }
                }
                CircleOrLine::Line(line) => {
                    for i in 0..100 {
                        let t = 2.0 * std::f64::consts::PI * (i as f64) / 100.0 + 0.01;
                        let z = circle.point_at(t);
                        let w = m.apply(z);
                        if w.norm() < 1e5 {
                            assert!(line.distance_to(w) < 1e-6 * (1.0 + w.norm().powi(2)));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn pole_on_circle_gives_line() {
        // z ↦ 1/z on a circle through the origin.
        let circle = Circle::new(c(0.5, 0.0), 0.5).unwrap();
        match MobiusMap::inversion().circle_image(&circle) {
            CircleOrLine::Line(line) => {
                // Image is the vertical line Re w = 1.
                assert!(line.distance_to(c(1.0, 5.0)) < 1e-10);
                assert!(line.distance_to(c(1.0, -2.0)) < 1e-10);
            }
            CircleOrLine::Circle(_) => panic!("expected a line"),
        }
    }

    #[test]
    fn circle_domain_validation() {
        let ok = CircleDomain::new(
            Circle::unit(),
            vec![
                Circle::new(c(0.5, 0.0), 0.15).unwrap(),
                Circle::new(c(-0.5, 0.0), 0.15).unwrap(),
            ],
        );
        assert!(ok.is_ok());
        let overlap = CircleDomain::new(
            Circle::unit(),
            vec![
                Circle::new(c(0.1, 0.0), 0.2).unwrap(),
                Circle::new(c(-0.1, 0.0), 0.2).unwrap(),
            ],
        );
        assert!(overlap.is_err());
        let outside = CircleDomain::new(Circle::unit(), vec![Circle::new(c(0.9, 0.0), 0.2).unwrap()]);
        assert!(outside.is_err());
    }
}
