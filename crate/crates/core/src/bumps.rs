//! A family of perturbed-ball domains in ℂ² built from a smooth bump profile
//! attached along orbits of a one-parameter group of ball automorphisms.
//!
//! The k-th defining function is
//! `η_k(z) = −1 + |z₁|² + |z₂|² − 10^{−k} ψ(10^k (z − c_k))`
//! with `c_k = (√((1/2)^{k−1} − (1/2)^{2k}), 1 − (1/2)^k)` on the unit
//! sphere, and the stage-k domain is the union of the ball pieces
//! `Ψ^{m(i,j)}(U_i)` over levels `i ≤ k` and orbit indices `|j| ≤ J`, where
//! `m(i,j) = 2^{j+i−1}` and `Ψ = Ψ_{1/10}` is the standard ball automorphism.
//! Powers are evaluated through the closed-form hyperbolic iterate, so
//! non-integer exponents (from negative `j + i − 1`) are well defined.

use crate::error::{Error, Result};
use crate::grid::DefiningGrid;
use crate::C;

/// A point of ℂ².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointC2 {
    pub z1: C,
    pub z2: C,
}

impl PointC2 {
    pub fn new(z1: C, z2: C) -> Self {
        PointC2 { z1, z2 }
    }

    pub fn from_reals(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        PointC2 {
            z1: C::new(x1, y1),
            z2: C::new(x2, y2),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.z1.norm_sqr() + self.z2.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn sub(&self, other: &PointC2) -> PointC2 {
        PointC2 {
            z1: self.z1 - other.z1,
            z2: self.z2 - other.z2,
        }
    }

    pub fn scale(&self, s: f64) -> PointC2 {
        PointC2 {
            z1: s * self.z1,
            z2: s * self.z2,
        }
    }

    pub fn dist(&self, other: &PointC2) -> f64 {
        self.sub(other).norm()
    }
}

/// Canonical smooth bump: `exp(1 − 1/(1 − |p|²))` for |p| < 1, zero outside.
///
/// Value 1 at the origin, non-negative, supported in the unit ball of ℂ² ≅ ℝ⁴.
pub fn psi_eval(p: &PointC2) -> f64 {
    let s = p.norm_sqr();
    if s >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s)).exp()
    }
}

/// Numerical Lipschitz constant of the bump profile (max |∇ψ| over the
/// support), computed by a dense radial scan.
pub fn psi_lipschitz_constant() -> f64 {
    // ψ = g(r²) with g(s) = exp(1 − 1/(1−s)); |∇ψ| = |g'(r²)|·2r.
    let mut best: f64 = 0.0;
    let n = 200_000;
    for i in 1..n {
        let r = i as f64 / n as f64;
        let s = r * r;
        let g = (1.0 - 1.0 / (1.0 - s)).exp();
        let gp = -g / ((1.0 - s) * (1.0 - s));
        best = best.max((gp * 2.0 * r).abs());
    }
    best
}

/// The ball automorphism
/// `Ψ_a(z₁, z₂) = ((z₁ − a)/(1 − ā z₁), √(1 − |a|²) z₂ / (1 − ā z₁))`
/// raised to a (possibly non-integer) power.
///
/// For real `a` the first coordinate is a hyperbolic disc map with fixed
/// points ±1 and multiplier `μ = (1 − a)/(1 + a)`; the m-th iterate is
/// `Ψ_{a_m}` with `a_m = (1 − μ^m)/(1 + μ^m)`, exact for every real `m`.
#[derive(Debug, Clone, Copy)]
pub struct BallAutomorphism {
    a: C,
    power: f64,
}

impl BallAutomorphism {
    pub fn new(a: C, power: f64) -> Result<Self> {
        if a.norm() >= 1.0 {
            return Err(Error::ParameterDomain {
                reason: format!("|a| = {} must be < 1", a.norm()),
            });
        }
        if power != 0.0 && power != 1.0 && power != -1.0 && a.im != 0.0 {
            return Err(Error::ParameterDomain {
                reason: "closed-form iterates require a real parameter".into(),
            });
        }
        Ok(BallAutomorphism { a, power })
    }

    /// The standard parameter used throughout the construction.
    pub fn standard(power: f64) -> Self {
        BallAutomorphism::new(C::new(0.1, 0.0), power).unwrap()
    }

    pub fn parameter(&self) -> C {
        self.a
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    /// Effective single-application parameter of the m-fold composition.
    fn effective_parameter(&self) -> C {
        if self.power == 0.0 {
            return C::new(0.0, 0.0);
        }
        if self.power == 1.0 {
            return self.a;
        }
        if self.power == -1.0 {
            return -self.a;
        }
        let a = self.a.re;
        let mu = (1.0 - a) / (1.0 + a);
        let mm = mu.powf(self.power);
        C::new((1.0 - mm) / (1.0 + mm), 0.0)
    }

    pub fn apply(&self, p: &PointC2) -> PointC2 {
        let a = self.effective_parameter();
        let den = C::new(1.0, 0.0) - a.conj() * p.z1;
        PointC2 {
            z1: (p.z1 - a) / den,
            z2: (1.0 - a.norm_sqr()).sqrt() * p.z2 / den,
        }
    }

    pub fn inverse(&self) -> Self {
        BallAutomorphism {
            a: self.a,
            power: -self.power,
        }
    }
}

/// Applies the m-fold standard automorphism.
pub fn ball_aut_apply(aut: &BallAutomorphism, p: &PointC2) -> PointC2 {
    aut.apply(p)
}

/// Bump attachment point of level k; lies on the unit sphere.
pub fn bump_center(k: u32) -> PointC2 {
    let half = 0.5f64;
    let x = (half.powi(k as i32 - 1) - half.powi(2 * k as i32)).sqrt();
    let y = 1.0 - half.powi(k as i32);
    PointC2::from_reals(x, 0.0, y, 0.0)
}

/// Level-k defining function
/// `η_k(p) = −1 + |p|² − 10^{−k} ψ(10^k (p − c_k))`.
pub fn eta_eval(k: u32, p: &PointC2) -> f64 {
    assert!(k >= 1, "level must be at least 1");
    let c = bump_center(k);
    let amp = 10f64.powi(-(k as i32));
    let dil = 10f64.powi(k as i32);
    -1.0 + p.norm_sqr() - amp * psi_eval(&p.sub(&c).scale(dil))
}

/// Orbit power `m(i, j) = 2^{j + i − 1}`.
pub fn orbit_power(level: u32, j: i32) -> f64 {
    2f64.powi(j + level as i32 - 1)
}

/// A finite truncation of the stage-k domain: levels i ≤ k, orbit indices
/// |j| ≤ J.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainStage {
    pub k: u32,
    pub truncation: i32,
}

impl DomainStage {
    pub fn new(k: u32, truncation: i32) -> Result<Self> {
        if k < 1 || truncation < 1 {
            return Err(Error::ParameterDomain {
                reason: format!("need k >= 1 and J >= 1, got k = {k}, J = {truncation}"),
            });
        }
        Ok(DomainStage { k, truncation })
    }

    fn pieces(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        (1..=self.k).flat_map(move |i| {
            (-self.truncation..=self.truncation).map(move |j| (i, orbit_power(i, j)))
        })
    }

    /// Pointwise min of the pulled-back piece defining functions; negative
    /// exactly on the truncated union of pieces.
    pub fn defining_value(&self, p: &PointC2) -> f64 {
        let mut best = f64::INFINITY;
        for (i, m) in self.pieces() {
            let pulled = BallAutomorphism::standard(-m).apply(p);
            best = best.min(eta_eval(i, &pulled));
        }
        best
    }

    pub fn contains(&self, p: &PointC2) -> bool {
        self.defining_value(p) < 0.0
    }
}

/// Which 2-plane of ℝ⁴ ≅ ℂ² a grid slice spans; the remaining two real
/// coordinates are held fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlicePlane {
    /// (Re z₁, Re z₂) with Im z₁, Im z₂ fixed.
    ReZ1ReZ2,
    /// (Re z₁, Im z₁) with Re z₂, Im z₂ fixed.
    ReZ1ImZ1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceSpec {
    pub plane: SlicePlane,
    /// Values of the two fixed real coordinates.
    pub fixed: [f64; 2],
}

impl SliceSpec {
    pub fn default_re_plane() -> Self {
        SliceSpec {
            plane: SlicePlane::ReZ1ReZ2,
            fixed: [0.0, 0.0],
        }
    }

    pub fn point(&self, u: f64, v: f64) -> PointC2 {
        match self.plane {
            SlicePlane::ReZ1ReZ2 => PointC2::from_reals(u, self.fixed[0], v, self.fixed[1]),
            SlicePlane::ReZ1ImZ1 => PointC2::from_reals(u, v, self.fixed[0], self.fixed[1]),
        }
    }
}

/// Samples the stage defining function on a 2-plane slice.
pub fn defining_grid_slice(
    stage: &DomainStage,
    slice: &SliceSpec,
    mins: [f64; 2],
    maxs: [f64; 2],
    counts: [usize; 2],
) -> Result<DefiningGrid> {
    if counts[0] < 8 || counts[1] < 8 {
        return Err(Error::ParameterDomain {
            reason: format!("resolution too coarse: need >= 8 nodes per axis, got {counts:?}"),
        });
    }
    DefiningGrid::sample(mins.to_vec(), maxs.to_vec(), counts.to_vec(), |x| {
        stage.defining_value(&slice.point(x[0], x[1]))
    })
}

/// Samples the stage defining function on a full 4-D grid.
pub fn defining_grid_4d(
    stage: &DomainStage,
    mins: [f64; 4],
    maxs: [f64; 4],
    counts: [usize; 4],
) -> Result<DefiningGrid> {
    if counts.iter().any(|&n| n < 8) {
        return Err(Error::ParameterDomain {
            reason: format!("resolution too coarse: need >= 8 nodes per axis, got {counts:?}"),
        });
    }
    DefiningGrid::sample(mins.to_vec(), maxs.to_vec(), counts.to_vec(), |x| {
        stage.defining_value(&PointC2::from_reals(x[0], x[1], x[2], x[3]))
    })
}

/// Orbit of the level-k bump center under the listed powers.
pub fn bump_orbit_centers(k: u32, j_range: std::ops::RangeInclusive<i32>) -> Vec<(i32, f64, PointC2)> {
    let c = bump_center(k);
    j_range
        .map(|j| {
            let m = orbit_power(k, j);
            (j, m, BallAutomorphism::standard(m).apply(&c))
        })
        .collect()
}

fn real_coords(p: &PointC2) -> [f64; 4] {
    [p.z1.re, p.z1.im, p.z2.re, p.z2.im]
}

fn from_real_coords(x: &[f64; 4]) -> PointC2 {
    PointC2::from_reals(x[0], x[1], x[2], x[3])
}

/// Central-difference gradient of η_k with respect to z₁, z₂
/// (∂/∂z_i = (∂/∂x_i − i ∂/∂y_i)/2).
fn eta_gradient(k: u32, p: &PointC2, h: f64) -> [C; 2] {
    let x0 = real_coords(p);
    let mut d = [0.0f64; 4];
    for (axis, slot) in d.iter_mut().enumerate() {
        let mut xp = x0;
        let mut xm = x0;
        xp[axis] += h;
        xm[axis] -= h;
        *slot = (eta_eval(k, &from_real_coords(&xp)) - eta_eval(k, &from_real_coords(&xm))) / (2.0 * h);
    }
    [
        C::new(d[0] / 2.0, -d[1] / 2.0),
        C::new(d[2] / 2.0, -d[3] / 2.0),
    ]
}

fn levi_value_at_step(k: u32, p: &PointC2, h: f64) -> Result<f64> {
    let x0 = real_coords(p);
    let f = |x: &[f64; 4]| eta_eval(k, &from_real_coords(x));
    // full real Hessian by central differences
    let mut hess = [[0.0f64; 4]; 4];
    let f0 = f(&x0);
    for i in 0..4 {
        for j in i..4 {
            let v = if i == j {
                let mut xp = x0;
                let mut xm = x0;
                xp[i] += h;
                xm[i] -= h;
                (f(&xp) - 2.0 * f0 + f(&xm)) / (h * h)
            } else {
                let mut xpp = x0;
                let mut xpm = x0;
                let mut xmp = x0;
                let mut xmm = x0;
                xpp[i] += h;
                xpp[j] += h;
                xpm[i] += h;
                xpm[j] -= h;
                xmp[i] -= h;
                xmp[j] += h;
                xmm[i] -= h;
                xmm[j] -= h;
                (f(&xpp) - f(&xpm) - f(&xmp) + f(&xmm)) / (4.0 * h * h)
            };
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    // complex Hessian L_{ab} = ∂²η/∂z_a ∂z̄_b; axes (x1,y1,x2,y2)
    let idx = |a: usize| (2 * a, 2 * a + 1); // (x, y) axes of z_a
    let mut levi = [[C::new(0.0, 0.0); 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let (xa, ya) = idx(a);
            let (xb, yb) = idx(b);
            levi[a][b] = C::new(
                (hess[xa][xb] + hess[ya][yb]) / 4.0,
                (hess[xa][yb] - hess[ya][xb]) / 4.0,
            );
        }
    }
    let grad = eta_gradient(k, p, h);
    let gnorm = (grad[0].norm_sqr() + grad[1].norm_sqr()).sqrt();
    if gnorm < 1e-8 {
        return Err(Error::DegeneratePoint {
            reason: format!("|grad eta_{k}| = {gnorm:.3e} at the probe point"),
        });
    }
    // complex tangent direction: v ⟂ (∂η/∂z₁, ∂η/∂z₂)
    let v = [-grad[1], grad[0]];
    let vn = v[0].norm_sqr() + v[1].norm_sqr();
    let mut q = C::new(0.0, 0.0);
    for a in 0..2 {
        for b in 0..2 {
            q += levi[a][b] * v[a] * v[b].conj();
        }
    }
    Ok((q / vn).re)
}

/// Minimum eigenvalue of the Levi form of η_k restricted to the complex
/// tangent space at a near-boundary point; positive means strong
/// pseudoconvexity there.
///
/// Central differences at h = 1e−4 with a Richardson step at h/2.
pub fn levi_form_min_eigen(k: u32, p: &PointC2) -> Result<f64> {
    let h = 1e-4;
    let v1 = levi_value_at_step(k, p, h)?;
    let v2 = levi_value_at_step(k, p, h / 2.0)?;
    Ok((4.0 * v2 - v1) / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_ball_point(rng: &mut impl Rng) -> PointC2 {
        loop {
            let p = PointC2::from_reals(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            if p.norm() < 0.999 {
                return p;
            }
        }
    }

    fn random_sphere_point(rng: &mut impl Rng) -> PointC2 {
        let p = random_ball_point(rng);
        let n = p.norm().max(1e-9);
        p.scale(1.0 / n)
    }

    #[test]
    fn psi_at_origin() {
        assert_eq!(psi_eval(&PointC2::from_reals(0.0, 0.0, 0.0, 0.0)), 1.0);
    }

    #[test]
    fn psi_outside_support() {
        assert_eq!(psi_eval(&PointC2::from_reals(1.0, 0.0, 0.0, 0.0)), 0.0);
        assert_eq!(psi_eval(&PointC2::from_reals(0.8, 0.8, 0.0, 0.0)), 0.0);
    }

    #[test]
    fn psi_half_norm_squared() {
        // |p|² = 1/2 → exp(1 − 2) = e^{−1}
        let p = PointC2::from_reals((0.5f64).sqrt(), 0.0, 0.0, 0.0);
        assert!((psi_eval(&p) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn psi_nonnegative_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let p = random_ball_point(&mut rng).scale(1.5);
            let v = psi_eval(&p);
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn ball_aut_zero_of_numerator() {
        let aut = BallAutomorphism::standard(1.0);
        let q = aut.apply(&PointC2::from_reals(0.1, 0.0, 0.0, 0.0));
        assert!(q.norm() < 1e-15);
    }

    #[test]
    fn ball_aut_power_zero_is_identity() {
        let aut = BallAutomorphism::standard(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let p = random_ball_point(&mut rng);
            assert!(aut.apply(&p).dist(&p) < 1e-15);
        }
    }

    #[test]
    fn ball_aut_inverse_round_trip() {
        let fwd = BallAutomorphism::standard(1.0);
        let bwd = BallAutomorphism::standard(-1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = random_ball_point(&mut rng);
            assert!(bwd.apply(&fwd.apply(&p)).dist(&p) < 1e-12);
        }
    }

    #[test]
    fn ball_aut_preserves_sphere() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let p = random_sphere_point(&mut rng);
            let q = BallAutomorphism::standard(7.0).apply(&p);
            assert!((q.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_iterate_matches_repeated_application() {
        let one = BallAutomorphism::standard(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &m in &[2i32, 3, 5, 8, 16] {
            let aut = BallAutomorphism::standard(m as f64);
            for _ in 0..20 {
                let p = random_ball_point(&mut rng);
                let mut q = p;
                for _ in 0..m {
                    q = one.apply(&q);
                }
                assert!(aut.apply(&p).dist(&q) < 1e-10, "power {m} mismatch");
            }
        }
    }

    #[test]
    fn large_power_consistency() {
        // Ψ^1024 = (Ψ^512)² through the closed form.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let big = BallAutomorphism::standard(1024.0);
        let half = BallAutomorphism::standard(512.0);
        for _ in 0..20 {
            let p = random_ball_point(&mut rng);
            assert!(big.apply(&p).dist(&half.apply(&half.apply(&p))) < 1e-10);
        }
    }

    #[test]
    fn bump_centers_on_sphere() {
        for k in 1..=12 {
            assert!(
                (bump_center(k).norm() - 1.0).abs() < 1e-12,
                "|c_{k}| must be 1"
            );
        }
    }

    #[test]
    fn eta_values() {
        let c1 = bump_center(1);
        assert!((c1.z1.re - (0.75f64).sqrt()).abs() < 1e-15);
        assert!((c1.z2.re - 0.5).abs() < 1e-15);
        assert!((eta_eval(1, &c1) + 0.1).abs() < 1e-12, "eta_1(c_1) = -0.1");
        let origin = PointC2::from_reals(0.0, 0.0, 0.0, 0.0);
        assert!((eta_eval(1, &origin) + 1.0).abs() < 1e-15);
        // sphere point away from the bump support
        let far = PointC2::from_reals(-1.0, 0.0, 0.0, 0.0);
        assert!(eta_eval(1, &far).abs() < 1e-15);
    }

    #[test]
    fn membership_basics() {
        let stage = DomainStage::new(2, 3).unwrap();
        assert!(stage.contains(&PointC2::from_reals(0.0, 0.0, 0.0, 0.0)));
        assert!(!stage.contains(&PointC2::from_reals(2.0, 0.0, 0.0, 0.0)));
    }

    #[test]
    fn membership_bump_orbit_point() {
        // image of a point slightly inside U_1 near the bump peak under Ψ^2
        let c1 = bump_center(1);
        let inward = c1.scale(0.999);
        assert!(eta_eval(1, &inward) < 0.0);
        let moved = BallAutomorphism::standard(2.0).apply(&inward);
        for j_max in 1..=3 {
            let stage = DomainStage::new(1, j_max).unwrap();
            assert!(stage.contains(&moved), "J = {j_max}");
        }
    }

    #[test]
    fn membership_monotone_in_k_and_truncation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let small = DomainStage::new(1, 2).unwrap();
        let bigger_k = DomainStage::new(3, 2).unwrap();
        let bigger_j = DomainStage::new(1, 5).unwrap();
        for _ in 0..200 {
            let p = random_ball_point(&mut rng).scale(1.1);
            if small.contains(&p) {
                assert!(bigger_k.contains(&p));
                assert!(bigger_j.contains(&p));
            }
        }
    }

    #[test]
    fn orbit_centers_on_sphere_and_accumulating() {
        let orbit = bump_orbit_centers(1, -3..=21);
        for (_, _, p) in &orbit {
            assert!((p.norm() - 1.0).abs() < 1e-10, "orbit stays on the sphere");
        }
        // large powers accumulate at one of the fixed points (±1, 0)
        for (_, m, p) in &orbit {
            if *m >= 2f64.powi(20) {
                let d = (p.z1 - C::new(-1.0, 0.0))
                    .norm()
                    .min((p.z1 - C::new(1.0, 0.0)).norm());
                assert!(d < 1e-3, "power {m}: first coordinate near ±1");
                assert!(p.z2.norm() < 1e-3, "power {m}: second coordinate small");
            }
        }
        // smallest listed power for k=1, j=0 is m=1
        let c1 = bump_center(1);
        let single = BallAutomorphism::standard(1.0).apply(&c1);
        let found = orbit.iter().find(|(j, _, _)| *j == 0).unwrap();
        assert!(found.2.dist(&single) < 1e-14);
    }

    #[test]
    fn levi_on_pure_sphere_is_one() {
        // the hessian of |z|² is the identity; restricted eigenvalue 1
        let p = PointC2::from_reals(-0.6, 0.3, 0.64156, 0.28);
        let p = p.scale(1.0 / p.norm());
        let ev = levi_form_min_eigen(1, &p).unwrap();
        assert!((ev - 1.0).abs() < 1e-5, "got {ev}");
    }

    #[test]
    fn levi_positive_on_bump_boundary() {
        // walk outward from the bump peak direction to the zero set of η₁
        let c1 = bump_center(1);
        let mut lo = 1.0;
        let mut hi = 1.2;
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if eta_eval(1, &c1.scale(mid)) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let boundary = c1.scale(0.5 * (lo + hi));
        assert!(eta_eval(1, &boundary).abs() < 1e-6);
        let ev = levi_form_min_eigen(1, &boundary).unwrap();
        assert!(ev > 0.0, "Levi eigenvalue {ev} must be positive");
    }

    #[test]
    fn levi_degenerate_gradient_rejected() {
        // gradient of η_k vanishes at the origin only for the ball part;
        // -1+|z|² has gradient zero at 0
        let err = levi_form_min_eigen(1, &PointC2::from_reals(0.0, 0.0, 0.0, 0.0));
        assert!(err.is_err());
    }

    #[test]
    fn grid_slice_respects_resolution_floor() {
        let stage = DomainStage::new(1, 2).unwrap();
        let slice = SliceSpec::default_re_plane();
        assert!(defining_grid_slice(&stage, &slice, [-1.1, -1.1], [1.1, 1.1], [7, 32]).is_err());
        let g = defining_grid_slice(&stage, &slice, [-1.1, -1.1], [1.1, 1.1], [16, 16]).unwrap();
        assert_eq!(g.values().len(), 256);
    }

    #[test]
    fn identical_stages_zero_distance() {
        let stage = DomainStage::new(1, 2).unwrap();
        let slice = SliceSpec::default_re_plane();
        let g1 = defining_grid_slice(&stage, &slice, [-1.1, -1.1], [1.1, 1.1], [24, 24]).unwrap();
        let g2 = defining_grid_slice(&stage, &slice, [-1.1, -1.1], [1.1, 1.1], [24, 24]).unwrap();
        assert_eq!(crate::grid::lipschitz_distance(&g1, &g2).unwrap(), 0.0);
    }

    #[test]
    fn stage_sup_difference_bounded_by_amplitude() {
        // On a bump-resolving grid the sup part of the stage difference is
        // bounded by the new bump amplitude 10^{-(k+1)}.
        let slice = SliceSpec::default_re_plane();
        let c2 = bump_center(2);
        // small box centered at the new bump, resolving its support
        let b = 0.05;
        let mins = [c2.z1.re - b, c2.z2.re - b];
        let maxs = [c2.z1.re + b, c2.z2.re + b];
        let counts = [41, 41];
        let j = 8;
        let g1 = defining_grid_slice(&DomainStage::new(1, j).unwrap(), &slice, mins, maxs, counts)
            .unwrap();
        let g2 = defining_grid_slice(&DomainStage::new(2, j).unwrap(), &slice, mins, maxs, counts)
            .unwrap();
        let diff = g1.difference(&g2).unwrap();
        let sup = diff.sup_norm();
        assert!(sup > 0.0, "grid must actually see the level-2 bump");
        assert!(sup <= 1e-2 + 1e-12, "sup difference {sup} exceeds amplitude bound");
    }

    #[test]
    fn psi_lipschitz_constant_is_stable() {
        let c = psi_lipschitz_constant();
        // interior maximum of |∇ψ|; value is fixed by the canonical profile
        assert!(c > 1.0 && c < 3.0, "got {c}");
    }
}
