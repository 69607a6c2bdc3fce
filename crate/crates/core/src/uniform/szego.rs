//! Riemann map of a smooth Jordan curve onto the unit disc.
//!
//! The map is recovered from the Szegő kernel of the region.  Writing
//! `H(w, z) = T(z) / (2πi (z - w))` for the Cauchy kernel with unit tangent
//! `T = z'/|z'|`, the skew-Hermitian part `A(w, z) = H(w, z) - conj(H(z, w))`
//! is a smooth kernel (its diagonal vanishes for any parametrization of a
//! smooth curve), and the boundary values `x(t) = S(z(t), a)` of the Szegő
//! kernel with second argument fixed at the basepoint `a` solve the second
//! kind integral equation
//!
//! ```text
//!     x - A x = conj(H(·, a)).
//! ```
//!
//! The equation is discretized with the Nyström method on the trapezoid
//! rule, which is spectrally accurate here because every kernel involved is
//! smooth and periodic.  From the solved density the conformal map follows
//! pointwise:
//!
//! ```text
//!     f'(z)      = 2π S(z, a)² / S(a, a),
//!     θ'(t)      = 2π |x(t)|² |z'(t)| / S(a, a)   (boundary angle speed),
//!     f(z(t))    = f'(z(t)) z'(t) / (i θ'(t)),
//! ```
//!
//! and interior values are produced by the Cauchy integral of the boundary
//! values.  The construction pins the normalization `f(a) = 0`, `f'(a) > 0`
//! without any free rotation to fix afterwards.

use nalgebra::DMatrix;
use std::f64::consts::PI;

use crate::curves::{fft_derivative, trig_interpolate_many, ClosedCurve};
use crate::error::{Error, Result};
use crate::C;

/// Riemann map from the interior of a smooth Jordan curve onto the unit
/// disc, with `basepoint ↦ 0` and positive derivative at the basepoint.
///
/// All evaluation goes through the stored boundary data: `boundary_values`
/// are the (exactly unimodular) images of the curve samples, and interior
/// values, derivatives and the inverse are Cauchy integrals of those.
#[derive(Debug, Clone)]
pub struct RiemannMapDisc {
    /// Boundary samples of the source curve, positively oriented.
    points: Vec<C>,
    /// Spectral derivative dz/dt at the samples.
    dpoints: Vec<C>,
    /// Point mapped to the origin.
    basepoint: C,
    /// Unimodular boundary values f(z_j).
    boundary_values: Vec<C>,
    /// Angle speed dθ/dt at the samples (positive).
    angle_speed: Vec<f64>,
    /// Derivative of the map at the basepoint (real positive).
    deriv_at_basepoint: f64,
}

impl RiemannMapDisc {
    /// Solves the kernel equation on the given curve and assembles the map.
    ///
    /// The curve must be simple and positively oriented with the basepoint
    /// in its interior.
    pub fn new(curve: &ClosedCurve, basepoint: C) -> Result<Self> {
        if curve.signed_area() <= 0.0 {
            return Err(Error::InvalidCurve {
                reason: "riemann map needs a positively oriented curve".into(),
            });
        }
        if !curve.encloses(basepoint) {
            return Err(Error::OutOfDomain {
                step: 0,
                reason: "riemann map basepoint must lie inside the curve".into(),
            });
        }
        let n = curve.points.len();
        let z = curve.points.clone();
        let dz = fft_derivative(&z);
        let speed: Vec<f64> = dz.iter().map(|d| d.norm()).collect();
        if speed.iter().any(|&s| s < 1e-12) {
            return Err(Error::InvalidCurve {
                reason: "curve parametrization degenerates to zero speed".into(),
            });
        }
        let tangent: Vec<C> = dz.iter().zip(&speed).map(|(d, s)| d / *s).collect();
        let weight: Vec<f64> = speed.iter().map(|s| 2.0 * PI / n as f64 * s).collect();

        // Nyström matrix for (I - A) with the smooth Kerzman–Stein kernel.
        // conj(1/(2πi) u) = -(1/(2πi)) conj(u), so both terms share the
        // 1/(2πi) prefactor with a plus sign on the conjugated part.
        let two_pi_i = C::new(0.0, 2.0 * PI);
        let mut m = DMatrix::<C>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    m[(i, j)] = C::new(1.0, 0.0);
                    continue;
                }
                let a_ij = ((tangent[i] / (z[i] - z[j])).conj()
                    + tangent[j] / (z[j] - z[i]))
                    / two_pi_i;
                m[(i, j)] = -a_ij * weight[j];
            }
        }
        let rhs_vec: Vec<C> = (0..n)
            .map(|i| (tangent[i] / (two_pi_i * (z[i] - basepoint))).conj())
            .collect();
        let rhs = DMatrix::<C>::from_column_slice(n, 1, &rhs_vec);
        let x = m
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::SolverFailure {
                reason: "kernel equation matrix is singular".into(),
                residual: f64::INFINITY,
            })?;
        let x: Vec<C> = x.column(0).iter().copied().collect();

        // S(a,a) = ∫ |x|² ds > 0 gives the derivative at the basepoint.
        let s_aa: f64 = x
            .iter()
            .zip(&weight)
            .map(|(xi, w)| xi.norm_sqr() * w)
            .sum();
        if !(s_aa > 0.0) || !s_aa.is_finite() {
            return Err(Error::NumericalDegeneracy {
                reason: "kernel diagonal value at the basepoint is not positive".into(),
            });
        }
        let deriv_at_basepoint = 2.0 * PI * s_aa;

        // Boundary angle speed, rescaled so the total turn is exactly 2π:
        // the discrete mean of θ' must equal 1 for the boundary values to
        // close up, and the rescaling absorbs the quadrature error in S(a,a).
        let mut angle_speed: Vec<f64> = x
            .iter()
            .zip(&speed)
            .map(|(xi, s)| 2.0 * PI * xi.norm_sqr() * s / s_aa)
            .collect();
        let mean: f64 = angle_speed.iter().sum::<f64>() / n as f64;
        if mean < 1e-12 {
            return Err(Error::NumericalDegeneracy {
                reason: "boundary angle speed collapsed to zero".into(),
            });
        }
        for v in angle_speed.iter_mut() {
            *v /= mean;
        }

        // f(z(t)) = f'(z(t)) z'(t) / (i θ'(t)); the right side is exactly
        // unimodular after the θ' rescaling up to discretization error, and
        // we project onto the circle so downstream Cauchy integrals see
        // boundary values of modulus one.
        let i_unit = C::new(0.0, 1.0);
        let mut boundary_values = Vec::with_capacity(n);
        for j in 0..n {
            let fp = 2.0 * PI * x[j] * x[j] / s_aa;
            let v = fp * dz[j] / (i_unit * angle_speed[j]);
            let r = v.norm();
            if r < 1e-12 {
                return Err(Error::NumericalDegeneracy {
                    reason: "boundary value of the map degenerated".into(),
                });
            }
            boundary_values.push(v / r);
        }

        Ok(RiemannMapDisc {
            points: z,
            dpoints: dz,
            basepoint,
            boundary_values,
            angle_speed,
            deriv_at_basepoint,
        })
    }

    /// Source curve samples.
    pub fn points(&self) -> &[C] {
        &self.points
    }

    /// Unimodular boundary images of the curve samples.
    pub fn boundary_values(&self) -> &[C] {
        &self.boundary_values
    }

    /// The point mapped to the origin.
    pub fn basepoint(&self) -> C {
        self.basepoint
    }

    /// Derivative at the basepoint; real and positive by construction.
    pub fn deriv_at_basepoint(&self) -> f64 {
        self.deriv_at_basepoint
    }

    /// True if `z` lies inside the source curve.
    pub fn contains(&self, z: C) -> bool {
        let curve = ClosedCurve {
            points: self.points.clone(),
        };
        curve.encloses(z)
    }

    /// Value of the map at an interior point, by the Cauchy integral of the
    /// boundary values.  Accuracy degrades within a few node spacings of the
    /// boundary; callers that need boundary values use `boundary_values`.
    pub fn eval(&self, z: C) -> C {
        let n = self.points.len();
        let two_pi_i = C::new(0.0, 2.0 * PI);
        let h = 2.0 * PI / n as f64;
        let mut acc = C::new(0.0, 0.0);
        for j in 0..n {
            acc += self.boundary_values[j] * self.dpoints[j] / (self.points[j] - z);
        }
        acc * h / two_pi_i
    }

    /// Derivative of the map at an interior point.
    pub fn eval_derivative(&self, z: C) -> C {
        let n = self.points.len();
        let two_pi_i = C::new(0.0, 2.0 * PI);
        let h = 2.0 * PI / n as f64;
        let mut acc = C::new(0.0, 0.0);
        for j in 0..n {
            let d = self.points[j] - z;
            acc += self.boundary_values[j] * self.dpoints[j] / (d * d);
        }
        acc * h / two_pi_i
    }

    /// Preimage of a point of the open unit disc, by the Cauchy integral of
    /// the inverse over the image circle followed by Newton refinement
    /// against the forward map.
    pub fn eval_inverse(&self, w: C) -> Result<C> {
        if w.norm() >= 1.0 {
            return Err(Error::OutOfDomain {
                step: 0,
                reason: "inverse riemann map argument must lie in the open unit disc".into(),
            });
        }
        let n = self.points.len();
        let h = 2.0 * PI / n as f64;
        let two_pi_i = C::new(0.0, 2.0 * PI);
        let i_unit = C::new(0.0, 1.0);
        // f⁻¹(w) = 1/(2πi) ∮ f⁻¹(u)/(u-w) du with u = f(z(t)),
        // du = i θ'(t) f(z(t)) dt.
        let mut acc = C::new(0.0, 0.0);
        for j in 0..n {
            let u = self.boundary_values[j];
            acc += self.points[j] * i_unit * self.angle_speed[j] * u / (u - w);
        }
        let mut zk = acc * h / two_pi_i;
        if !self.contains(zk) {
            zk = self.basepoint;
        }
        // Newton against the forward Cauchy evaluation, with step damping to
        // stay inside the curve.
        let mut best = zk;
        let mut best_res = (self.eval(zk) - w).norm();
        for _ in 0..40 {
            let fz = self.eval(zk);
            let res = (fz - w).norm();
            if res < best_res {
                best_res = res;
                best = zk;
            }
            if res < 1e-13 {
                break;
            }
            let dfz = self.eval_derivative(zk);
            if dfz.norm() < 1e-14 {
                break;
            }
            let mut step = (fz - w) / dfz;
            let mut cand = zk - step;
            let mut halvings = 0;
            while !self.contains(cand) && halvings < 20 {
                step *= 0.5;
                cand = zk - step;
                halvings += 1;
            }
            if halvings == 20 {
                break;
            }
            zk = cand;
        }
        if best_res > 1e-6 {
            return Err(Error::NotConverged {
                iterations: 40,
                residual: best_res,
            });
        }
        Ok(best)
    }

    /// Certificate for the solved map: evaluates the boundary values at
    /// parameters halfway between the solver nodes with the principal value
    /// Cauchy integral (the trapezoid rule on staggered nodes is spectrally
    /// accurate for the singular integral) and returns the worst deviation
    /// of `|f|` from one.
    pub fn boundary_residual(&self) -> f64 {
        let n = self.points.len();
        let h = 2.0 * PI / n as f64;
        let pi_i = C::new(0.0, PI);
        // Curve positions at the staggered parameters via trigonometric
        // interpolation of the samples.
        let stag: Vec<f64> = (0..n).map(|j| (j as f64 + 0.5) * h).collect();
        let z_stag = trig_interpolate_many(&self.points, &stag);
        let mut worst = 0.0f64;
        for (i, &w) in z_stag.iter().enumerate() {
            // Boundary value formula f(w) = 1/(πi) PV ∮ f(ζ)/(ζ-w) dζ.
            let mut acc = C::new(0.0, 0.0);
            for j in 0..n {
                acc += self.boundary_values[j] * self.dpoints[j] / (self.points[j] - w);
            }
            let f_w = acc * h / pi_i;
            let dev = (f_w.norm() - 1.0).abs();
            if dev > worst {
                worst = dev;
            }
            let _ = i;
        }
        worst
    }
}
