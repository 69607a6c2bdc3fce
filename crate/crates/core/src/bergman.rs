//! Bergman kernels, metrics, and curvature on circle domains.
//!
//! The model spans the classical rational basis of a circle domain —
//! monomials for the outer disc and negative powers of (z − c_k) for each
//! hole — and orthonormalizes it against the area inner product.  All Gram
//! entries are computed without two-dimensional quadrature: whenever one
//! factor has a single-valued antiderivative the area integral collapses to
//! boundary circle integrals by the complex Stokes identity
//!
//! ```text
//!     ∫_Ω f conj(g) dA = (1/2i) ∮_∂Ω f conj(G) dz,    G' = g,
//! ```
//!
//! and the only pairs without such an antiderivative — first powers
//! 1/(z − c_j) against 1/(z − c_k) — reduce in polar coordinates about c_j
//! to a one-dimensional angular integral of principal logarithms over the
//! ray segments cut out by the domain.
//!
//! Conventions: metric form g|dz|² with g = ∂²_{z w̄} log K at w = z, and
//! Gaussian curvature κ = −(2/g) ∂²(log g)/∂z∂z̄; the unit disc then has
//! g = 2/(1 − |z|²)² and κ ≡ −2, which calibrates every test.

use nalgebra::DMatrix;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mobius::{Circle, CircleDomain};
use crate::C;

// ---------------------------------------------------------------------------
// Gauss–Legendre rules and ray-segment geometry shared by the special Gram
// entries and the reproducing-property quadrature.
// ---------------------------------------------------------------------------

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1], by
/// Newton iteration on the Legendre recurrence.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-style initial guess.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Evaluate P_n and P_n' by the three-term recurrence.
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Intersection of the ray {c + ρ e^{iθ} : ρ > 0} with the interior of a
/// circle, as an interval in ρ (empty if the ray misses it).
fn ray_circle_interval(c: C, theta: f64, circle: &Circle) -> Option<(f64, f64)> {
    let e = C::from_polar(1.0, theta);
    let d = circle.center - c;
    let b = (e.conj() * d).re;
    let disc = b * b - (d.norm_sqr() - circle.radius * circle.radius);
    if disc <= 0.0 {
        return None;
    }
    let s = disc.sqrt();
    let (lo, hi) = (b - s, b + s);
    if hi <= 0.0 {
        return None;
    }
    Some((lo.max(0.0), hi))
}

/// The portions of the ray from `c` at angle `theta` that lie inside the
/// domain, starting no closer than `rho_start` (used to skip the hole that
/// `c` itself centers).  Returns disjoint increasing (ρ_lo, ρ_hi) segments.
fn ray_segments(cd: &CircleDomain, c: C, theta: f64, rho_start: f64, skip_hole: Option<usize>) -> Vec<(f64, f64)> {
    let Some((_, rho_out)) = ray_circle_interval(c, theta, &cd.outer) else {
        return Vec::new();
    };
    if rho_out <= rho_start {
        return Vec::new();
    }
    let mut segments = vec![(rho_start, rho_out)];
    for (k, hole) in cd.holes.iter().enumerate() {
        if Some(k) == skip_hole {
            continue;
        }
        let Some((lo, hi)) = ray_circle_interval(c, theta, hole) else {
            continue;
        };
        let mut next = Vec::with_capacity(segments.len() + 1);
        for (a, b) in segments {
            if hi <= a || lo >= b {
                next.push((a, b));
            } else {
                if lo > a {
                    next.push((a, lo));
                }
                if hi < b {
                    next.push((hi, b));
                }
            }
        }
        segments = next;
    }
    segments
}

/// Angles at which the ray-segment structure around `c` changes: the
/// tangent directions of every boundary circle the rays can graze.
fn breakpoint_angles(cd: &CircleDomain, c: C, skip_hole: Option<usize>) -> Vec<f64> {
    let mut angles = Vec::new();
    for (k, hole) in cd.holes.iter().enumerate() {
        if Some(k) == skip_hole {
            continue;
        }
        let d = hole.center - c;
        let dist = d.norm();
        if dist > hole.radius {
            let beta = d.arg();
            let gamma = (hole.radius / dist).asin();
            angles.push(beta - gamma);
            angles.push(beta + gamma);
        }
    }
    let two_pi = 2.0 * PI;
    let mut normalized: Vec<f64> = angles
        .into_iter()
        .map(|a| a.rem_euclid(two_pi))
        .collect();
    normalized.push(0.0);
    normalized.sort_by(|x, y| x.partial_cmp(y).unwrap());
    normalized.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    normalized
}

/// Integrates a function of the polar angle over [0, 2π), splitting at the
/// structural breakpoints and grading sub-panels toward the panel ends
/// (where tangency introduces square-root behavior).
fn integrate_angles<F: FnMut(f64) -> C>(breaks: &[f64], mut f: F) -> C {
    let (nodes, weights) = gauss_legendre(16);
    // Geometric grading of each panel toward both endpoints.
    let fractions = [
        0.0, 0.004, 0.012, 0.04, 0.12, 0.3, 0.5, 0.7, 0.88, 0.96, 0.988, 0.996, 1.0,
    ];
    let mut total = C::new(0.0, 0.0);
    let m = breaks.len();
    for i in 0..m {
        let a = breaks[i];
        let b = if i + 1 < m { breaks[i + 1] } else { breaks[0] + 2.0 * PI };
        if b - a < 1e-14 {
            continue;
        }
        for w in fractions.windows(2) {
            let (lo, hi) = (a + (b - a) * w[0], a + (b - a) * w[1]);
            let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            for (x, wt) in nodes.iter().zip(&weights) {
                total += wt * half * f(mid + half * x);
            }
        }
    }
    total
}

// ---------------------------------------------------------------------------
// Basis functions.
// ---------------------------------------------------------------------------

/// One element of the rational basis of a circle domain.
#[derive(Debug, Clone, Copy)]
enum BasisFn {
    /// z^n (the outer-disc part of the basis).
    Monomial { n: u32 },
    /// (r/(z − c))^n for a hole with center c and radius r; the radius
    /// power is a diagonal rescaling for conditioning only.
    HolePower { c: C, r: f64, n: u32 },
}

impl BasisFn {
    fn eval(&self, z: C) -> C {
        match *self {
            BasisFn::Monomial { n } => z.powu(n),
            BasisFn::HolePower { c, r, n } => (r / (z - c)).powu(n),
        }
    }

    fn d1(&self, z: C) -> C {
        match *self {
            BasisFn::Monomial { n } => {
                if n == 0 {
                    C::new(0.0, 0.0)
                } else {
                    C::new(n as f64, 0.0) * z.powu(n - 1)
                }
            }
            BasisFn::HolePower { c, r, n } => {
                let w = z - c;
                -C::new(n as f64, 0.0) * C::new(r, 0.0).powu(n) * w.powu(n + 1).inv()
            }
        }
    }

    fn d2(&self, z: C) -> C {
        match *self {
            BasisFn::Monomial { n } => {
                if n < 2 {
                    C::new(0.0, 0.0)
                } else {
                    C::new((n * (n - 1)) as f64, 0.0) * z.powu(n - 2)
                }
            }
            BasisFn::HolePower { c, r, n } => {
                let w = z - c;
                C::new((n * (n + 1)) as f64, 0.0) * C::new(r, 0.0).powu(n) * w.powu(n + 2).inv()
            }
        }
    }

    /// Antiderivative, when single-valued on the domain (everything except
    /// the first hole powers, whose antiderivative would be a logarithm).
    fn antiderivative(&self, z: C) -> Option<C> {
        match *self {
            BasisFn::Monomial { n } => Some(z.powu(n + 1) / (n + 1) as f64),
            BasisFn::HolePower { n: 1, .. } => None,
            BasisFn::HolePower { c, r, n } => {
                let w = z - c;
                Some(C::new(r, 0.0).powu(n) * w.powu(n - 1).inv() / (1.0 - n as f64))
            }
        }
    }

    fn is_log_power(&self) -> bool {
        matches!(self, BasisFn::HolePower { n: 1, .. })
    }

    fn degree(&self) -> u32 {
        match *self {
            BasisFn::Monomial { n } => n,
            BasisFn::HolePower { n, .. } => n,
        }
    }

    fn hole_data(&self) -> Option<(C, f64)> {
        match *self {
            BasisFn::HolePower { c, r, .. } => Some((c, r)),
            BasisFn::Monomial { .. } => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Gram assembly.
// ---------------------------------------------------------------------------

/// Boundary integral (1/2i) ∮_∂Ω f conj(G) dz by the trapezoid rule on
/// every boundary circle (outer counterclockwise, holes clockwise); the
/// integrand is analytic near each circle, so the rule is spectrally
/// accurate.
fn stokes_inner_product(cd: &CircleDomain, f: &BasisFn, g: &BasisFn) -> C {
    let g_anti = |z: C| g.antiderivative(z).expect("caller checked antiderivative");
    // The trapezoid rule needs to outrun the harmonic content of the pair,
    // which grows with the basis powers involved.
    let m = 512usize.max(4 * (f.degree() + g.degree() + 2) as usize);
    let h = 2.0 * PI / m as f64;
    let mut total = C::new(0.0, 0.0);
    let mut add_circle = |circle: &Circle, ccw: bool| {
        let mut acc = C::new(0.0, 0.0);
        for j in 0..m {
            let t = h * j as f64;
            let e = C::from_polar(1.0, if ccw { t } else { -t });
            let z = circle.center + circle.radius * e;
            // dz/dt = ± i r e^{±it}
            let dz = C::new(0.0, if ccw { circle.radius } else { -circle.radius }) * e;
            acc += f.eval(z) * g_anti(z).conj() * dz;
        }
        total += acc * h;
    };
    add_circle(&cd.outer, true);
    for hole in &cd.holes {
        add_circle(hole, false);
    }
    total / C::new(0.0, 2.0)
}

/// Area inner product of two first hole powers r_j/(z−c_j), r_k/(z−c_k)
/// (possibly the same hole), by polar reduction about c_j:
///
/// ```text
///   ∫_Ω dA/((z−c_j) conj(z−c_k))
///     = ∫_0^{2π} Σ_segments Log((ρ_hi e^{−iθ} + A)/(ρ_lo e^{−iθ} + A)) dθ
/// ```
///
/// with A = conj(c_j − c_k).  Along a ray segment the quantity inside the
/// logarithm traces a straight line avoiding the origin (the segment stays
/// outside hole k), so the subtended angle is below π and the principal
/// logarithm of the endpoint ratio is the correct branch.
fn log_pair_inner_product(cd: &CircleDomain, hole_j: usize, hole_k: usize) -> C {
    let cj = cd.holes[hole_j].center;
    let rj = cd.holes[hole_j].radius;
    let rk = cd.holes[hole_k].radius;
    let a = (cj - cd.holes[hole_k].center).conj();
    let breaks = breakpoint_angles(cd, cj, Some(hole_j));
    let integral = integrate_angles(&breaks, |theta| {
        let e = C::from_polar(1.0, -theta);
        let mut val = C::new(0.0, 0.0);
        for (lo, hi) in ray_segments(cd, cj, theta, rj, Some(hole_j)) {
            val += ((hi * e + a) / (lo * e + a)).ln();
        }
        val
    });
    integral * rj * rk
}

fn build_basis(cd: &CircleDomain, n: usize) -> Vec<BasisFn> {
    let mut basis = Vec::new();
    for k in 0..=n {
        basis.push(BasisFn::Monomial { n: k as u32 });
    }
    for hole in &cd.holes {
        for p in 1..=n {
            basis.push(BasisFn::HolePower {
                c: hole.center,
                r: hole.radius,
                n: p as u32,
            });
        }
    }
    basis
}

fn assemble_gram(cd: &CircleDomain, basis: &[BasisFn]) -> DMatrix<C> {
    let m = basis.len();
    // Map each log power to its hole index for the special pairs.
    let hole_index = |b: &BasisFn| -> usize {
        let (c, _) = b.hole_data().unwrap();
        cd.holes
            .iter()
            .position(|h| (h.center - c).norm() < 1e-14)
            .expect("basis hole matches a domain hole")
    };
    let mut gram = DMatrix::<C>::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let (f, g) = (&basis[i], &basis[j]);
            let value = if !g.is_log_power() {
                stokes_inner_product(cd, f, g)
            } else if !f.is_log_power() {
                // ⟨f, g⟩ = conj(⟨g, f⟩): antidifferentiate f instead.
                stokes_inner_product(cd, g, f).conj()
            } else {
                log_pair_inner_product(cd, hole_index(f), hole_index(g))
            };
            gram[(i, j)] = value;
            gram[(j, i)] = value.conj();
        }
    }
    gram
}

/// Full-pivoted Cholesky factorization of a Hermitian positive semidefinite
/// matrix, dropping pivots below `rel_tol` times the largest diagonal.
/// Returns the selected indices in elimination order and the lower factor L
/// with G[sel, sel] = L L*.
fn pivoted_cholesky(g: &DMatrix<C>, rel_tol: f64) -> (Vec<usize>, DMatrix<C>, f64, f64) {
    let m = g.nrows();
    let mut perm: Vec<usize> = (0..m).collect();
    let mut l = DMatrix::<C>::zeros(m, m);
    let mut diag: Vec<f64> = (0..m).map(|i| g[(i, i)].re).collect();
    let max_diag = diag.iter().cloned().fold(0.0f64, f64::max);
    let threshold = rel_tol * max_diag;
    let mut rank = 0usize;
    let mut first_pivot = 0.0f64;
    let mut last_pivot = 0.0f64;
    for k in 0..m {
        // Pick the largest remaining diagonal entry.
        let (piv, &pval) = diag[k..]
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, v)| (i + k, v))
            .unwrap();
        if pval < threshold || pval <= 0.0 {
            break;
        }
        perm.swap(k, piv);
        diag.swap(k, piv);
        l.swap_rows(k, piv);
        if k == 0 {
            first_pivot = pval;
        }
        last_pivot = pval;
        let lkk = pval.sqrt();
        l[(k, k)] = C::new(lkk, 0.0);
        for i in (k + 1)..m {
            let mut s = g[(perm[i], perm[k])];
            for t in 0..k {
                s -= l[(i, t)] * l[(k, t)].conj();
            }
            let lik = s / lkk;
            l[(i, k)] = lik;
            diag[i] -= lik.norm_sqr();
        }
        rank = k + 1;
    }
    let condition = if last_pivot > 0.0 {
        first_pivot / last_pivot
    } else {
        f64::INFINITY
    };
    let sel = perm[..rank].to_vec();
    let lower = l.view((0, 0), (rank, rank)).into_owned();
    (sel, lower, condition, max_diag)
}

// ---------------------------------------------------------------------------
// The model.
// ---------------------------------------------------------------------------

/// An orthonormalized finite-dimensional Bergman kernel model on a circle
/// domain.  Immutable after assembly.
#[derive(Debug, Clone)]
pub struct BergmanModel {
    pub domain: CircleDomain,
    /// Largest basis power per boundary component.
    pub truncation: usize,
    basis: Vec<BasisFn>,
    gram: DMatrix<C>,
    /// Pivot-selected basis indices, in elimination order.
    sel: Vec<usize>,
    /// Lower-triangular factor of the selected Gram block.
    lower: DMatrix<C>,
    /// Ratio of the extreme accepted pivots (Gram condition estimate).
    pub condition: f64,
    /// Basis elements dropped by the pivot tolerance.
    pub dropped: usize,
}

/// Builds the Bergman model of a circle domain at truncation `n`:
/// assembles the Gram matrix by boundary reduction and factorizes it with
/// drop-tolerant pivoting.
pub fn assemble_model(cd: &CircleDomain, n: usize) -> Result<BergmanModel> {
    if n < 4 {
        return Err(Error::Precondition {
            reason: format!("model truncation must be at least 4, got {n}"),
        });
    }
    let basis = build_basis(cd, n);
    let gram = assemble_gram(cd, &basis);
    let (sel, lower, condition, _) = pivoted_cholesky(&gram, 1e-13);
    if sel.is_empty() {
        return Err(Error::NumericalDegeneracy {
            reason: "Gram matrix has no positive pivot".into(),
        });
    }
    if condition > 1e14 {
        return Err(Error::TruncationTooLarge {
            reason: format!(
                "Gram condition estimate {condition:.3e} exceeds 1e14; reduce the truncation"
            ),
        });
    }
    let dropped = basis.len() - sel.len();
    Ok(BergmanModel {
        domain: cd.clone(),
        truncation: n,
        basis,
        gram,
        sel,
        lower,
        condition,
        dropped,
    })
}

impl BergmanModel {
    /// Raw Gram entry (testing hook for the closed-form oracles).
    pub fn gram_entry(&self, i: usize, j: usize) -> C {
        self.gram[(i, j)]
    }

    pub fn basis_len(&self) -> usize {
        self.basis.len()
    }

    /// Values of the orthonormal functions φ_i(z): the forward substitution
    /// L y = b_sel(z).
    fn phi(&self, z: C, order: usize) -> Vec<C> {
        let k = self.sel.len();
        let mut y = Vec::with_capacity(k);
        for i in 0..k {
            let b = &self.basis[self.sel[i]];
            let mut v = match order {
                0 => b.eval(z),
                1 => b.d1(z),
                _ => b.d2(z),
            };
            for t in 0..i {
                v -= self.lower[(i, t)] * y[t];
            }
            y.push(v / self.lower[(i, i)]);
        }
        y
    }

    fn require_interior(&self, z: C) -> Result<()> {
        if self.domain.contains(z) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                step: 0,
                reason: format!("point {z} is not interior to the model domain"),
            })
        }
    }

    /// Kernel value K(z, w) = Σ φ_i(z) conj(φ_i(w)).
    pub fn kernel(&self, z: C, w: C) -> Result<C> {
        self.require_interior(z)?;
        self.require_interior(w)?;
        let yz = self.phi(z, 0);
        let yw = self.phi(w, 0);
        Ok(yz.iter().zip(&yw).map(|(a, b)| a * b.conj()).sum())
    }

    /// Diagonal kernel derivatives K_{ab}(z) = ∂_z^a ∂_w̄^b K(z, w)|_{w=z}
    /// for a, b ≤ 2, computed by exact basis differentiation.
    fn kernel_jets(&self, z: C) -> [[C; 3]; 3] {
        let y: [Vec<C>; 3] = [self.phi(z, 0), self.phi(z, 1), self.phi(z, 2)];
        let mut out = [[C::new(0.0, 0.0); 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                out[a][b] = y[a].iter().zip(&y[b]).map(|(p, q)| p * q.conj()).sum();
            }
        }
        out
    }

    /// Metric and curvature at an interior point.
    pub fn metric(&self, z: C) -> Result<MetricSample> {
        self.require_interior(z)?;
        let k = self.kernel_jets(z);
        let k00 = k[0][0].re;
        if k00 <= 0.0 {
            return Err(Error::NumericalDegeneracy {
                reason: "kernel diagonal is not positive; increase the truncation".into(),
            });
        }
        // g = (K·K11 − K10·K01)/K², with K01 = conj(K10).
        let n = (k[0][0] * k[1][1] - k[1][0] * k[0][1]).re;
        let g = n / (k00 * k00);
        if g <= 0.0 {
            return Err(Error::NumericalDegeneracy {
                reason: "metric is not positive (truncation artifact); increase the truncation"
                    .into(),
            });
        }
        // Derivatives of N = K00 K11 − K10 K01 and the closed form
        // ∂∂̄ log(K00²) = 2g collapse the curvature to kernel jets:
        let n_z = k[0][0] * k[2][1] - k[2][0] * k[0][1];
        let n_zzbar = (k[0][0] * k[2][2] - k[2][0] * k[0][2]).re;
        let ddbar_log_n = (n * n_zzbar - n_z.norm_sqr()) / (n * n);
        let ddbar_log_g = ddbar_log_n - 2.0 * g;
        let curvature = -(2.0 / g) * ddbar_log_g;
        Ok(MetricSample {
            point: z,
            kernel_diag: k00,
            metric: g,
            curvature,
        })
    }

    /// Laplacian-based cross-check of the curvature step: returns the exact
    /// ∂∂̄ log g alongside a Richardson-extrapolated five-point estimate.
    pub fn curvature_cross_check(&self, z: C, h: f64) -> Result<(f64, f64)> {
        let sample = self.metric(z)?;
        let exact = -sample.curvature * sample.metric / 2.0;
        let log_g = |p: C| -> Result<f64> { Ok(self.metric(p)?.metric.ln()) };
        let laplacian = |h: f64| -> Result<f64> {
            let c = log_g(z)?;
            let s = log_g(z + C::new(h, 0.0))?
                + log_g(z - C::new(h, 0.0))?
                + log_g(z + C::new(0.0, h))?
                + log_g(z - C::new(0.0, h))?;
            Ok((s - 4.0 * c) / (h * h))
        };
        let a_h = laplacian(h)?;
        let a_h2 = laplacian(h / 2.0)?;
        // ∂∂̄ = Δ/4; Richardson removes the leading O(h²) error.
        let fd = (4.0 * a_h2 - a_h) / 3.0 / 4.0;
        Ok((exact, fd))
    }
}

/// Kernel, metric, and curvature values at one interior point.
#[derive(Debug, Clone, Copy)]
pub struct MetricSample {
    pub point: C,
    /// K(z, z) > 0.
    pub kernel_diag: f64,
    /// g(z) = ∂²_{z w̄} log K at w = z, positive on interior points.
    pub metric: f64,
    /// Gaussian curvature κ = −(2/g) ∂∂̄ log g.
    pub curvature: f64,
}

// ---------------------------------------------------------------------------
// Transfer maps and kernel stability.
// ---------------------------------------------------------------------------

/// A smooth correspondence between two circle domains of equal connectivity.
///
/// Each boundary circle of the source is matched to a boundary circle of the
/// target (holes by nearest center) and carried by the affine map between
/// the circles; the affine pieces are blended radially with a smooth
/// partition supported within half the minimal boundary gap, so the map is
/// exactly affine on every boundary circle and exactly the identity deep in
/// the interior.  As the two domains approach each other the map approaches
/// the identity everywhere.
#[derive(Debug, Clone)]
pub struct TransferMap {
    source: CircleDomain,
    /// Target holes reordered to pair with the source holes.
    paired_holes: Vec<Circle>,
    target_outer: Circle,
    width: f64,
}

fn min_boundary_gap(cd: &CircleDomain) -> f64 {
    let mut gap = f64::INFINITY;
    for (i, h) in cd.holes.iter().enumerate() {
        gap = gap.min(cd.outer.radius - (h.center - cd.outer.center).norm() - h.radius);
        for other in &cd.holes[i + 1..] {
            gap = gap.min((h.center - other.center).norm() - h.radius - other.radius);
        }
    }
    if cd.holes.is_empty() {
        cd.outer.radius
    } else {
        gap
    }
}

fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * (3.0 - 2.0 * u)
}

impl TransferMap {
    pub fn new(source: &CircleDomain, target: &CircleDomain) -> Result<Self> {
        if source.holes.len() != target.holes.len() {
            return Err(Error::Precondition {
                reason: format!(
                    "transfer map needs equal connectivity, got {} and {} holes",
                    source.holes.len(),
                    target.holes.len()
                ),
            });
        }
        // Match holes by nearest center and insist the matching is a bijection.
        let mut paired_holes = Vec::with_capacity(source.holes.len());
        let mut used = vec![false; target.holes.len()];
        for sh in &source.holes {
            let (best, _) = target
                .holes
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .map(|(j, th)| (j, (th.center - sh.center).norm()))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .ok_or_else(|| Error::Precondition {
                    reason: "hole matching failed".into(),
                })?;
            used[best] = true;
            paired_holes.push(target.holes[best]);
        }
        let width = 0.5 * min_boundary_gap(source);
        if width <= 0.0 {
            return Err(Error::InvalidCircleDomain {
                reason: "source domain has touching boundary circles".into(),
            });
        }
        Ok(TransferMap {
            source: source.clone(),
            paired_holes,
            target_outer: target.outer,
            width,
        })
    }

    /// The transfer map with source and target exchanged.
    pub fn reversed(&self) -> Result<TransferMap> {
        let target = CircleDomain::new(self.target_outer, self.paired_holes.clone())?;
        TransferMap::new(&target, &self.source)
    }

    pub fn eval(&self, z: C) -> C {
        let src = &self.source;
        // Affine carriers and blend weights, one per boundary circle.
        let mut num = C::new(0.0, 0.0);
        let mut den = 0.0;
        let mut w_id = 1.0;
        let d_outer = src.outer.radius - (z - src.outer.center).norm();
        let w_outer = smoothstep(1.0 - d_outer / self.width);
        let a_outer = self.target_outer.center
            + (self.target_outer.radius / src.outer.radius) * (z - src.outer.center);
        num += w_outer * a_outer;
        den += w_outer;
        w_id *= 1.0 - w_outer;
        for (sh, th) in src.holes.iter().zip(&self.paired_holes) {
            let d = (z - sh.center).norm() - sh.radius;
            let w = smoothstep(1.0 - d / self.width);
            let affine = th.center + (th.radius / sh.radius) * (z - sh.center);
            num += w * affine;
            den += w;
            w_id *= 1.0 - w;
        }
        (num + w_id * z) / (den + w_id)
    }
}

/// Kernel and first-derivative discrepancy between two domains under the
/// transfer correspondence.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    /// sup over probe pairs of |K_pert(z, w) − K_base(Πz, Πw)|.
    pub kernel_distance: f64,
    /// The analogous supremum for finite-difference first derivatives in z.
    pub derivative_distance: f64,
    pub probes_used: usize,
}

/// Measures how far the Bergman kernel of `perturbed` sits from the kernel
/// of `base` after transporting arguments with the transfer map.  The
/// probes are points of the perturbed domain; pairs too close to either
/// boundary are discarded.
pub fn stability_experiment(
    base: &CircleDomain,
    perturbed: &CircleDomain,
    n: usize,
    probes: &[C],
) -> Result<StabilityReport> {
    let transfer = TransferMap::new(perturbed, base)?;
    let model_base = assemble_model(base, n)?;
    let model_pert = assemble_model(perturbed, n)?;
    let margin = 1e-3;
    let usable: Vec<C> = probes
        .iter()
        .copied()
        .filter(|&z| {
            perturbed.contains(z)
                && perturbed.boundary_distance(z) > margin
                && base.contains(transfer.eval(z))
                && base.boundary_distance(transfer.eval(z)) > margin
        })
        .collect();
    if usable.len() < 2 {
        return Err(Error::Precondition {
            reason: "fewer than two probes are interior to both domains".into(),
        });
    }
    let h = 1e-5;
    let mut kernel_distance = 0.0f64;
    let mut derivative_distance = 0.0f64;
    for &z in &usable {
        for &w in &usable {
            let pw = transfer.eval(w);
            let k_p = model_pert.kernel(z, w)?;
            let k_b = model_base.kernel(transfer.eval(z), pw)?;
            kernel_distance = kernel_distance.max((k_p - k_b).norm());
            for dir in [C::new(1.0, 0.0), C::new(0.0, 1.0)] {
                let d_p = (model_pert.kernel(z + h * dir, w)?
                    - model_pert.kernel(z - h * dir, w)?)
                    / (2.0 * h);
                let d_b = (model_base.kernel(transfer.eval(z + h * dir), pw)?
                    - model_base.kernel(transfer.eval(z - h * dir), pw)?)
                    / (2.0 * h);
                derivative_distance = derivative_distance.max((d_p - d_b).norm());
            }
        }
    }
    Ok(StabilityReport {
        kernel_distance,
        derivative_distance,
        probes_used: usable.len(),
    })
}

// ---------------------------------------------------------------------------
// Reproducing-property check by independent two-dimensional quadrature.
// ---------------------------------------------------------------------------

/// Verifies the reproducing property |∫_Ω K(z, w) f(w) dA(w) − f(z)| for a
/// polynomial f given by its coefficients (lowest degree first), using
/// polar quadrature about the outer center — a path entirely independent of
/// the boundary-reduced Gram assembly.  Returns the residual.
pub fn reproducing_check(model: &BergmanModel, coefficients: &[C], z: C) -> Result<f64> {
    if coefficients.is_empty() {
        return Err(Error::Precondition {
            reason: "polynomial must have at least one coefficient".into(),
        });
    }
    if coefficients.len() - 1 > model.truncation / 2 {
        return Err(Error::Precondition {
            reason: format!(
                "polynomial degree {} exceeds half the truncation {}",
                coefficients.len() - 1,
                model.truncation
            ),
        });
    }
    model.require_interior(z)?;
    let cd = &model.domain;
    let center = cd.outer.center;
    // Rays from the outer center decompose the domain whether or not the
    // center sits inside a hole; only a center lying exactly on a boundary
    // circle breaks the segment structure.
    if cd
        .holes
        .iter()
        .any(|h| ((center - h.center).norm() - h.radius).abs() < 1e-9)
    {
        return Err(Error::Precondition {
            reason: "outer center lies on a hole boundary; quadrature layout unavailable".into(),
        });
    }
    let poly = |w: C| -> C {
        let mut acc = C::new(0.0, 0.0);
        for &c in coefficients.iter().rev() {
            acc = acc * w + c;
        }
        acc
    };
    let yz = model.phi(z, 0);
    let (rnodes, rweights) = gauss_legendre(20);
    let breaks = breakpoint_angles(cd, center, None);
    let integral = integrate_angles(&breaks, |theta| {
        let e = C::from_polar(1.0, theta);
        let mut acc = C::new(0.0, 0.0);
        for (lo, hi) in ray_segments(cd, center, theta, 0.0, None) {
            // Four equal radial sub-intervals sharpen the inner boundary layer.
            let step = (hi - lo) / 4.0;
            for s in 0..4 {
                let (a, b) = (lo + s as f64 * step, lo + (s + 1) as f64 * step);
                let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
                for (x, wt) in rnodes.iter().zip(&rweights) {
                    let rho = mid + half * x;
                    let w = center + rho * e;
                    let yw = model.phi(w, 0);
                    let kernel: C = yz.iter().zip(&yw).map(|(p, q)| p * q.conj()).sum();
                    acc += wt * half * rho * kernel * poly(w);
                }
            }
        }
        acc
    });
    Ok((integral - poly(z)).norm())
}
