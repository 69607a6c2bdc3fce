//! Sampled closed curves, finitely connected sampled domains, and the
//! spectral utilities (FFT derivatives, trigonometric interpolation,
//! arclength resampling, circle fitting) shared by the uniformizer.

use crate::error::{Error, Result};
use crate::mobius::Circle;
use crate::C;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// A closed curve sampled at equispaced parameter values t_j = 2πj/N.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedCurve {
    pub points: Vec<C>,
}

impl ClosedCurve {
    pub fn new(points: Vec<C>) -> Result<Self> {
        if points.len() < 8 {
            return Err(Error::InvalidCurve {
                reason: format!("need at least 8 samples, got {}", points.len()),
            });
        }
        if points.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
            return Err(Error::InvalidCurve {
                reason: "non-finite sample".into(),
            });
        }
        let curve = ClosedCurve { points };
        if curve.diameter() < 1e-12 {
            return Err(Error::InvalidCurve {
                reason: "curve degenerates to a point".into(),
            });
        }
        Ok(curve)
    }

    pub fn circle(circle: &Circle, n: usize, counterclockwise: bool) -> Self {
        let points = (0..n)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / n as f64;
                let t = if counterclockwise { t } else { -t };
                circle.point_at(t)
            })
            .collect();
        ClosedCurve { points }
    }

    /// Samples r(θ)·e^{iθ} + center for a radial profile.
    pub fn radial<F: Fn(f64) -> f64>(center: C, n: usize, r: F) -> Self {
        let points = (0..n)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / n as f64;
                center + C::from_polar(r(t), t)
            })
            .collect();
        ClosedCurve { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                d = d.max((self.points[i] - self.points[j]).norm());
            }
        }
        d
    }

    /// Signed area by the shoelace formula; positive for counterclockwise.
    pub fn signed_area(&self) -> f64 {
        let n = self.points.len();
        let mut a = 0.0;
        for j in 0..n {
            let p = self.points[j];
            let q = self.points[(j + 1) % n];
            a += p.re * q.im - q.re * p.im;
        }
        a / 2.0
    }

    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points[1..].reverse();
        ClosedCurve { points }
    }

    /// Winding number around a point (±1 inside for simple curves, 0 outside).
    pub fn winding_number(&self, z: C) -> i32 {
        let n = self.points.len();
        let mut total = 0.0;
        for j in 0..n {
            let a = self.points[j] - z;
            let b = self.points[(j + 1) % n] - z;
            let cross = a.re * b.im - a.im * b.re;
            let dot = a.re * b.re + a.im * b.im;
            total += cross.atan2(dot);
        }
        (total / (2.0 * PI)).round() as i32
    }

    pub fn encloses(&self, z: C) -> bool {
        self.winding_number(z) != 0
    }

    pub fn min_distance_to_point(&self, z: C) -> f64 {
        self.points
            .iter()
            .map(|p| (p - z).norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_distance_to_curve(&self, other: &ClosedCurve) -> f64 {
        let mut d = f64::INFINITY;
        for p in &self.points {
            for q in &other.points {
                d = d.min((p - q).norm());
            }
        }
        d
    }

    /// Checks that no two non-adjacent edges intersect.
    pub fn is_simple(&self) -> bool {
        let n = self.points.len();
        for i in 0..n {
            let a0 = self.points[i];
            let a1 = self.points[(i + 1) % n];
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue; // adjacent around the wrap
                }
                let b0 = self.points[j];
                let b1 = self.points[(j + 1) % n];
                if segments_intersect(a0, a1, b0, b1) {
                    return false;
                }
            }
        }
        true
    }

    pub fn centroid(&self) -> C {
        self.points.iter().sum::<C>() / self.points.len() as f64
    }

    /// Spectral derivative dz/dt at the sample nodes.
    pub fn derivative(&self) -> Vec<C> {
        fft_derivative(&self.points)
    }

    /// Algebraic least-squares circle fit.
    pub fn fit_circle(&self) -> Circle {
        kasa_fit(&self.points)
    }

    /// Max radial deviation from the best-fit circle over its radius.
    pub fn circularity_defect(&self) -> f64 {
        let c = self.fit_circle();
        let mut worst: f64 = 0.0;
        for p in &self.points {
            worst = worst.max(((p - c.center).norm() - c.radius).abs());
        }
        worst / c.radius
    }

    /// Trigonometric interpolation at an arbitrary parameter value.
    pub fn interpolate(&self, t: f64) -> C {
        trig_interpolate(&self.points, t)
    }

    /// Resamples to `n` nodes approximately uniform in arclength, through
    /// band-limited interpolation.
    pub fn resample_uniform_arclength(&self, n: usize) -> ClosedCurve {
        let params = uniform_arclength_params(&self.points, n);
        ClosedCurve {
            points: params.iter().map(|&t| self.interpolate(t)).collect(),
        }
    }
}

fn orient2(a: C, b: C, c: C) -> f64 {
    (b.re - a.re) * (c.im - a.im) - (b.im - a.im) * (c.re - a.re)
}

fn segments_intersect(a0: C, a1: C, b0: C, b1: C) -> bool {
    let d1 = orient2(b0, b1, a0);
    let d2 = orient2(b0, b1, a1);
    let d3 = orient2(a0, a1, b0);
    let d4 = orient2(a0, a1, b1);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// FFT of complex samples (forward, unnormalized).
pub fn fft_forward(samples: &[C]) -> Vec<C> {
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(samples.len()).process(&mut buf);
    buf
}

pub fn fft_inverse(spectrum: &[C]) -> Vec<C> {
    let mut buf = spectrum.to_vec();
    FftPlanner::new()
        .plan_fft_inverse(spectrum.len())
        .process(&mut buf);
    let n = spectrum.len() as f64;
    for v in &mut buf {
        *v /= n;
    }
    buf
}

fn signed_frequency(idx: usize, n: usize) -> i64 {
    if idx <= n / 2 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

/// Spectral derivative of a 2π-periodic sample sequence.
pub fn fft_derivative(samples: &[C]) -> Vec<C> {
    let n = samples.len();
    let mut spec = fft_forward(samples);
    for (idx, v) in spec.iter_mut().enumerate() {
        let k = signed_frequency(idx, n);
        if n % 2 == 0 && idx == n / 2 {
            *v = C::new(0.0, 0.0); // drop the Nyquist mode
        } else {
            *v *= C::new(0.0, k as f64);
        }
    }
    fft_inverse(&spec)
}

/// Antiderivative of the mean-zero part plus mean·t, evaluated at the nodes.
pub fn fft_antiderivative(samples: &[C]) -> (C, Vec<C>) {
    let n = samples.len();
    let mut spec = fft_forward(samples);
    let mean = spec[0] / n as f64;
    spec[0] = C::new(0.0, 0.0);
    for (idx, v) in spec.iter_mut().enumerate() {
        let k = signed_frequency(idx, n);
        if k != 0 {
            *v /= C::new(0.0, k as f64);
        }
    }
    let periodic = fft_inverse(&spec);
    // fix the constant so the antiderivative of the periodic part is zero-mean
    (mean, periodic)
}

/// Trigonometric interpolation of equispaced periodic samples at parameter t.
pub fn trig_interpolate(samples: &[C], t: f64) -> C {
    let n = samples.len();
    let spec = fft_forward(samples);
    let mut acc = C::new(0.0, 0.0);
    for (idx, &c) in spec.iter().enumerate() {
        let k = signed_frequency(idx, n);
        if n % 2 == 0 && idx == n / 2 {
            // split the Nyquist mode symmetrically
            acc += c * C::new((k as f64 * t).cos(), 0.0);
        } else {
            acc += c * C::from_polar(1.0, k as f64 * t);
        }
    }
    acc / n as f64
}

/// Batch trigonometric interpolation (one FFT, many evaluation points).
pub fn trig_interpolate_many(samples: &[C], ts: &[f64]) -> Vec<C> {
    let n = samples.len();
    let spec = fft_forward(samples);
    ts.iter()
        .map(|&t| {
            let mut acc = C::new(0.0, 0.0);
            for (idx, &c) in spec.iter().enumerate() {
                let k = signed_frequency(idx, n);
                if n % 2 == 0 && idx == n / 2 {
                    acc += c * C::new((k as f64 * t).cos(), 0.0);
                } else {
                    acc += c * C::from_polar(1.0, k as f64 * t);
                }
            }
            acc / n as f64
        })
        .collect()
}

/// Parameter values t_0..t_{n-1} at which the curve is uniformly spaced in
/// arclength, found by Newton on the spectral arclength function.
fn uniform_arclength_params(points: &[C], n: usize) -> Vec<f64> {
    let speed: Vec<C> = fft_derivative(points)
        .iter()
        .map(|d| C::new(d.norm(), 0.0))
        .collect();
    let (mean, periodic) = fft_antiderivative(&speed);
    let total = mean.re * 2.0 * PI;
    // s(t) = mean·t + P(t), with P given at nodes; evaluate P by interpolation
    let s_at = |t: f64| mean.re * t + trig_interpolate(&periodic, t).re - periodic[0].re;
    let speed_at = |t: f64| trig_interpolate(&speed, t).re;
    let mut params = Vec::with_capacity(n);
    for i in 0..n {
        let target = total * i as f64 / n as f64;
        // initial guess: uniform parameter
        let mut t = 2.0 * PI * i as f64 / n as f64;
        for _ in 0..20 {
            let f = s_at(t) - target;
            let fp = speed_at(t).max(1e-12);
            let step = f / fp;
            t -= step;
            if step.abs() < 1e-13 {
                break;
            }
        }
        params.push(t);
    }
    params
}

/// Kåsa algebraic circle fit.
pub fn kasa_fit(points: &[C]) -> Circle {
    // minimize Σ (x²+y² + a·x + b·y + c)²
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for p in points {
        let (x, y) = (p.re, p.im);
        let w = [x, y, 1.0];
        let q = -(x * x + y * y);
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += w[i] * w[j];
            }
            rhs[i] += w[i] * q;
        }
    }
    let mat = nalgebra::Matrix3::from_fn(|i, j| m[i][j]);
    let v = nalgebra::Vector3::from_row_slice(&rhs);
    let sol = mat.lu().solve(&v).unwrap_or_else(|| nalgebra::Vector3::zeros());
    let center = C::new(-sol[0] / 2.0, -sol[1] / 2.0);
    let r2 = (center.norm_sqr() - sol[2]).max(1e-300);
    Circle {
        center,
        radius: r2.sqrt(),
    }
}

/// A finitely connected planar domain given by sampled Jordan boundary
/// curves plus a marked interior basepoint.
///
/// The outer curve is stored counterclockwise and the holes clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledDomain {
    pub outer: ClosedCurve,
    pub holes: Vec<ClosedCurve>,
    pub basepoint: C,
}

impl SampledDomain {
    pub fn new(outer: ClosedCurve, holes: Vec<ClosedCurve>, basepoint: C) -> Result<Self> {
        let outer = if outer.signed_area() >= 0.0 {
            outer
        } else {
            outer.reversed()
        };
        let holes: Vec<ClosedCurve> = holes
            .into_iter()
            .map(|h| if h.signed_area() <= 0.0 { h } else { h.reversed() })
            .collect();
        if !outer.is_simple() {
            return Err(Error::InvalidCurve {
                reason: "outer curve is self-intersecting".into(),
            });
        }
        for (i, h) in holes.iter().enumerate() {
            if !h.is_simple() {
                return Err(Error::InvalidCurve {
                    reason: format!("hole curve {i} is self-intersecting"),
                });
            }
            if !outer.encloses(h.centroid()) || outer.min_distance_to_curve(h) <= 0.0 {
                return Err(Error::InvalidDomain {
                    reason: format!("hole {i} is not strictly inside the outer curve"),
                });
            }
        }
        for i in 0..holes.len() {
            for j in (i + 1)..holes.len() {
                if holes[i].min_distance_to_curve(&holes[j]) <= 0.0
                    || holes[i].encloses(holes[j].centroid())
                    || holes[j].encloses(holes[i].centroid())
                {
                    return Err(Error::InvalidDomain {
                        reason: format!("holes {i} and {j} are not disjoint"),
                    });
                }
            }
        }
        if !outer.encloses(basepoint) {
            return Err(Error::InvalidDomain {
                reason: "basepoint is outside the outer curve".into(),
            });
        }
        for (i, h) in holes.iter().enumerate() {
            if h.encloses(basepoint) {
                return Err(Error::InvalidDomain {
                    reason: format!("basepoint lies inside hole {i}"),
                });
            }
        }
        Ok(SampledDomain {
            outer,
            holes,
            basepoint,
        })
    }

    pub fn connectivity(&self) -> usize {
        1 + self.holes.len()
    }

    pub fn contains(&self, z: C) -> bool {
        self.outer.encloses(z) && self.holes.iter().all(|h| !h.encloses(z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_circle(n: usize) -> ClosedCurve {
        ClosedCurve::circle(&Circle::unit(), n, true)
    }

    #[test]
    fn signed_area_orientation() {
        assert!(unit_circle(64).signed_area() > 0.0);
        assert!(unit_circle(64).reversed().signed_area() < 0.0);
    }

    #[test]
    fn winding_numbers() {
        let c = unit_circle(128);
        assert_eq!(c.winding_number(C::new(0.0, 0.0)), 1);
        assert_eq!(c.winding_number(C::new(0.5, -0.3)), 1);
        assert_eq!(c.winding_number(C::new(2.0, 0.0)), 0);
        assert_eq!(c.reversed().winding_number(C::new(0.0, 0.0)), -1);
    }

    #[test]
    fn fft_derivative_of_circle() {
        let c = unit_circle(64);
        let d = c.derivative();
        for (j, dj) in d.iter().enumerate() {
            let t = 2.0 * PI * j as f64 / 64.0;
            let exact = C::new(-t.sin(), t.cos());
            assert!((dj - exact).norm() < 1e-12);
        }
    }

    #[test]
    fn trig_interpolation_between_nodes() {
        let c = unit_circle(64);
        let z = c.interpolate(0.1234);
        let exact = C::from_polar(1.0, 0.1234);
        assert!((z - exact).norm() < 1e-12);
    }

    #[test]
    fn kasa_fit_recovers_circle() {
        let circle = Circle::new(C::new(0.3, -0.7), 1.7).unwrap();
        let c = ClosedCurve::circle(&circle, 100, true);
        let fit = c.fit_circle();
        assert!((fit.center - circle.center).norm() < 1e-10);
        assert!((fit.radius - circle.radius).abs() < 1e-10);
        assert!(c.circularity_defect() < 1e-12);
    }

    #[test]
    fn circularity_defect_of_perturbed_circle() {
        let c = ClosedCurve::radial(C::new(0.0, 0.0), 256, |t| 1.0 + 0.05 * (3.0 * t).cos());
        let d = c.circularity_defect();
        assert!(d > 0.04 && d < 0.06, "defect {d}");
    }

    #[test]
    fn resample_uniform_arclength_on_ellipse() {
        let c = ClosedCurve::radial(C::new(0.0, 0.0), 128, |t| {
            1.0 / ((t.cos() / 1.5).powi(2) + t.sin().powi(2)).sqrt()
        });
        let r = c.resample_uniform_arclength(128);
        let gaps: Vec<f64> = (0..128)
            .map(|j| (r.points[(j + 1) % 128] - r.points[j]).norm())
            .collect();
        let max = gaps.iter().cloned().fold(0.0, f64::max);
        let min = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min < 1.001, "arclength spacing uneven: {min} .. {max}");
    }

    #[test]
    fn simplicity_detection() {
        assert!(unit_circle(64).is_simple());
        // figure-eight
        let fig8 = ClosedCurve::new(
            (0..64)
                .map(|j| {
                    let t = 2.0 * PI * j as f64 / 64.0;
                    C::new(t.sin(), (2.0 * t).sin())
                })
                .collect(),
        )
        .unwrap();
        assert!(!fig8.is_simple());
    }

    #[test]
    fn sampled_domain_validation() {
        let outer = unit_circle(128);
        let hole = ClosedCurve::circle(&Circle::new(C::new(0.4, 0.0), 0.15).unwrap(), 64, false);
        let ok = SampledDomain::new(outer.clone(), vec![hole.clone()], C::new(-0.5, 0.0));
        assert!(ok.is_ok());
        // basepoint inside the hole
        let bad = SampledDomain::new(outer.clone(), vec![hole.clone()], C::new(0.4, 0.0));
        assert!(bad.is_err());
        // hole outside the outer curve
        let far = ClosedCurve::circle(&Circle::new(C::new(3.0, 0.0), 0.2).unwrap(), 64, false);
        assert!(SampledDomain::new(outer, vec![far], C::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn orientation_is_normalized() {
        let outer = unit_circle(64).reversed();
        let d = SampledDomain::new(outer, vec![], C::new(0.0, 0.0)).unwrap();
        assert!(d.outer.signed_area() > 0.0);
    }
}
