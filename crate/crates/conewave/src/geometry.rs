//! Cones, rays, angular operators and diverse source locations.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::fields::ScalarField;
use crate::jet::Jet;
use crate::quad::{self, dot, norm, sub, GlRule, SphereRule};
use crate::{Error, Result};

/// Point source at `xi` switched on at time `tau`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceEvent {
    pub xi: [f64; 3],
    pub tau: f64,
}

impl SourceEvent {
    pub fn new(xi: [f64; 3], tau: f64) -> SourceEvent {
        SourceEvent { xi, tau }
    }

    /// Checks that the source axis {xi} x R keeps distance `eps` from the
    /// coefficient ball of radius `radius`.
    pub fn check_admissible(&self, radius: f64, eps: f64) -> Result<()> {
        if norm(self.xi) <= radius + eps {
            return Err(Error::Domain(format!(
                "source at distance {} from the origin is not outside the support ball of radius {radius} (+{eps})",
                norm(self.xi)
            )));
        }
        Ok(())
    }
}

/// The solid cone |x - xi| + tau <= t <= T.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeRegion {
    pub source: SourceEvent,
    pub horizon: f64,
}

/// Which piece of the boundary of a cone region a point lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryPiece {
    /// The slice t = T (the rim belongs here).
    Hyperplane,
    /// The characteristic surface t = tau + |x - xi|.
    Cone,
}

impl ConeRegion {
    pub fn new(source: SourceEvent, horizon: f64) -> ConeRegion {
        ConeRegion { source, horizon }
    }

    /// Radius of the slice at t = T.
    pub fn height(&self) -> f64 {
        self.horizon - self.source.tau
    }

    pub fn contains(&self, x: [f64; 3], t: f64) -> bool {
        let r = norm(sub(x, self.source.xi));
        r + self.source.tau <= t && t <= self.horizon
    }

    /// Classify a boundary point within `tol`; `None` for points off the
    /// boundary.
    pub fn boundary_piece(&self, x: [f64; 3], t: f64, tol: f64) -> Option<BoundaryPiece> {
        let r = norm(sub(x, self.source.xi));
        let on_h = (t - self.horizon).abs() <= tol && r <= self.height() + tol;
        let on_c = (t - self.source.tau - r).abs() <= tol && t <= self.horizon + tol;
        if on_h {
            Some(BoundaryPiece::Hyperplane)
        } else if on_c {
            Some(BoundaryPiece::Cone)
        } else {
            None
        }
    }
}

/// Unit vector from xi to x and the distance.
pub fn unit_direction(x: [f64; 3], xi: [f64; 3]) -> Result<([f64; 3], f64)> {
    let d = sub(x, xi);
    let r = norm(d);
    if r == 0.0 {
        return Err(Error::Singularity(format!("direction undefined at the source {xi:?}")));
    }
    Ok(([d[0] / r, d[1] / r, d[2] / r], r))
}

/// Resolution of the (r, omega) product rule on a cone surface.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeGridSpec {
    pub r_panels: usize,
    pub r_nodes: usize,
    pub sphere_theta: usize,
}

impl Default for ConeGridSpec {
    fn default() -> Self {
        ConeGridSpec { r_panels: 8, r_nodes: 8, sphere_theta: 8 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeNode {
    pub r: f64,
    pub omega: [f64; 3],
    pub x: [f64; 3],
    pub t: f64,
    /// r^2 dr domega weight; the surface element carries an extra sqrt(2).
    pub w: f64,
}

#[derive(Clone, Debug)]
pub struct ConeSamples {
    pub nodes: Vec<ConeNode>,
}

impl ConeSamples {
    /// Surface integral over the cone piece: sqrt(2) * sum w f.
    pub fn integrate(&self, mut f: impl FnMut(&ConeNode) -> f64) -> f64 {
        std::f64::consts::SQRT_2 * self.nodes.iter().map(|n| n.w * f(n)).sum::<f64>()
    }
}

/// Quadrature nodes on C = {t = tau + |x - xi|, t <= T}.
pub fn cone_trace_parametrization(cone: &ConeRegion, spec: &ConeGridSpec) -> Result<ConeSamples> {
    let h = cone.height();
    if h <= 0.0 {
        return Err(Error::EmptyRegion(format!("tau = {} is not below T = {}", cone.source.tau, cone.horizon)));
    }
    let gl = GlRule::new(spec.r_nodes);
    let sphere = SphereRule::product(spec.sphere_theta);
    let xi = cone.source.xi;
    let mut nodes = Vec::with_capacity(spec.r_panels * spec.r_nodes * sphere.len());
    for p in 0..spec.r_panels {
        let a = h * p as f64 / spec.r_panels as f64;
        let b = h * (p + 1) as f64 / spec.r_panels as f64;
        for (r, wr) in gl.on(a, b) {
            for (om, wo) in sphere.dirs.iter().zip(&sphere.w) {
                nodes.push(ConeNode {
                    r,
                    omega: *om,
                    x: [xi[0] + r * om[0], xi[1] + r * om[1], xi[2] + r * om[2]],
                    t: cone.source.tau + r,
                    w: r * r * wr * wo,
                });
            }
        }
    }
    Ok(ConeSamples { nodes })
}

fn check_index(l: usize) -> Result<usize> {
    if !(1..=3).contains(&l) {
        return Err(Error::Usage(format!("angular index {l} must be 1, 2 or 3")));
    }
    Ok(l - 1)
}

/// Omega_lm f = (x^l - xi^l) d_m f - (x^m - xi^m) d_l f, indices 1..=3.
pub fn angular_derivative(f: &ScalarField, l: usize, m: usize, x: [f64; 3], t: f64, xi: [f64; 3]) -> Result<f64> {
    let (l, m) = (check_index(l)?, check_index(m)?);
    let j = f.jet(x, t, 1)?;
    let y = sub(x, xi);
    let g = j.coeffs();
    Ok(y[l] * g[1 + m] - y[m] * g[1 + l])
}

/// (1 / 2r^2) sum_{l,m} Omega_lm^2 f.
pub fn spherical_laplacian(f: &ScalarField, x: [f64; 3], t: f64, xi: [f64; 3]) -> Result<f64> {
    let y = sub(x, xi);
    if norm(y) == 0.0 {
        return Err(Error::Singularity("spherical Laplacian at the source".into()));
    }
    let j = f.jet(x, t, 2)?;
    Ok(spherical_laplacian_of_jet(&j, y))
}

/// Delta_S applied to a physical jet of order >= 2, with y = x - xi.
pub fn spherical_laplacian_of_jet(j: &Jet, y: [f64; 3]) -> f64 {
    let g = |i: usize| {
        let mut e = [0; 4];
        e[i] = 1;
        j.partial(e)
    };
    let h = |i: usize, k: usize| {
        let mut e = [0; 4];
        e[i] += 1;
        e[k] += 1;
        j.partial(e)
    };
    let mut s = 0.0;
    for l in 0..3 {
        for m in 0..3 {
            if l != m {
                s += y[l] * y[l] * h(m, m) + y[m] * y[m] * h(l, l)
                    - 2.0 * y[l] * y[m] * h(l, m)
                    - y[l] * g(l)
                    - y[m] * g(m);
            }
        }
    }
    s / (2.0 * dot(y, y))
}

/// First row ones, column i below it the direction from xi_i to x.
pub fn diverse_matrix(x: [f64; 3], locations: &[[f64; 3]; 4]) -> Result<[[f64; 4]; 4]> {
    let mut m = [[1.0; 4]; 4];
    for (i, xi) in locations.iter().enumerate() {
        let (th, _) = unit_direction(x, *xi)?;
        for k in 0..3 {
            m[1 + k][i] = th[k];
        }
    }
    Ok(m)
}

fn det4(m: &[[f64; 4]; 4]) -> f64 {
    to_na(m).determinant()
}

fn to_na(m: &[[f64; 4]; 4]) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| m[i][j])
}

fn min_singular(m: &[[f64; 4]; 4]) -> f64 {
    to_na(m).singular_values().min()
}

/// Flat record of a diversity check over the ball of radius `rho`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiverseSetReport {
    pub locations: [[f64; 3]; 4],
    pub rho: f64,
    pub n_samples: usize,
    pub min_abs_det: f64,
    pub min_singular_value: f64,
    pub constant_estimate: f64,
    pub diverse: bool,
    /// A point of the closed ball where det M vanishes, if one was found.
    pub zero_of_det: Option<[f64; 3]>,
}

pub const DEFAULT_DIVERSE_SAMPLES: usize = 4096;
pub const DEFAULT_DIVERSE_THRESHOLD: f64 = 1e-9;

/// Certify invertibility of M(x) on a low-discrepancy sample of the closed
/// ball. A sign change of det M between two samples (the ball is convex)
/// proves a zero, which is then located by bisection.
pub fn is_diverse(locations: &[[f64; 3]; 4], rho: f64, n_samples: usize, threshold: f64) -> Result<DiverseSetReport> {
    for (i, xi) in locations.iter().enumerate() {
        if norm(*xi) <= rho {
            return Err(Error::Domain(format!("location {} = {xi:?} lies in the closed domain of radius {rho}", i + 1)));
        }
    }
    let pts = quad::halton_ball(n_samples.max(2), rho);
    let mut min_det = f64::INFINITY;
    let mut min_sv = f64::INFINITY;
    let (mut pos, mut neg) = (None, None);
    for p in &pts {
        let m = diverse_matrix(*p, locations)?;
        let d = det4(&m);
        min_det = min_det.min(d.abs());
        min_sv = min_sv.min(min_singular(&m));
        if d > 0.0 && pos.is_none() {
            pos = Some(*p);
        }
        if d < 0.0 && neg.is_none() {
            neg = Some(*p);
        }
    }
    let mut zero = None;
    if let (Some(mut p), Some(mut n)) = (pos, neg) {
        for _ in 0..200 {
            let mid = [(p[0] + n[0]) / 2.0, (p[1] + n[1]) / 2.0, (p[2] + n[2]) / 2.0];
            let d = det4(&diverse_matrix(mid, locations)?);
            if d > 0.0 {
                p = mid;
            } else if d < 0.0 {
                n = mid;
            } else {
                p = mid;
                break;
            }
            if norm(sub(p, n)) < 1e-15 {
                break;
            }
        }
        let m = diverse_matrix(p, locations)?;
        min_det = min_det.min(det4(&m).abs());
        min_sv = min_sv.min(min_singular(&m));
        zero = Some(p);
    }
    let diverse = zero.is_none() && min_sv > threshold;
    Ok(DiverseSetReport {
        locations: *locations,
        rho,
        n_samples: pts.len(),
        min_abs_det: min_det,
        min_singular_value: min_sv,
        constant_estimate: 1.0 / min_sv,
        diverse,
        zero_of_det: zero,
    })
}

/// Recipes for four locations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DiverseConstruction {
    /// N e1, N e2, N e3, N (e1 + e2 + e3) / 3 for the ball of radius rho.
    Standard { rho: f64, n: f64 },
    /// Three independent points with a fourth inside their triangle; the
    /// plane through the three must miss the closed ball of radius rho.
    Affine { xi: [[f64; 3]; 3], xi4: [f64; 3], rho: f64 },
    /// Four points whose tetrahedron contains the closed ball in its interior.
    Hull { xi: [[f64; 3]; 4], rho: f64 },
}

pub fn construct_diverse(mode: &DiverseConstruction) -> Result<[[f64; 3]; 4]> {
    match mode {
        DiverseConstruction::Standard { rho, n } => {
            if *n <= rho * 3f64.sqrt() {
                return Err(Error::Construction(format!("standard set needs N > rho sqrt(3); N = {n}, rho = {rho}")));
            }
            let n = *n;
            Ok([[n, 0.0, 0.0], [0.0, n, 0.0], [0.0, 0.0, n], [n / 3.0, n / 3.0, n / 3.0]])
        }
        DiverseConstruction::Affine { xi, xi4, rho } => {
            let det = dot(xi[0], quad::cross(xi[1], xi[2]));
            let scale = norm(xi[0]) * norm(xi[1]) * norm(xi[2]);
            if det.abs() <= 1e-12 * scale.max(1e-300) {
                return Err(Error::Construction("xi_1, xi_2, xi_3 are not linearly independent".into()));
            }
            if xi.iter().any(|p| norm(sub(*p, *xi4)) <= 1e-12 * (1.0 + norm(*p))) {
                return Err(Error::Construction("xi_4 must be different from xi_1, xi_2, xi_3".into()));
            }
            let nrm = quad::cross(sub(xi[1], xi[0]), sub(xi[2], xi[0]));
            let nn = norm(nrm);
            if (dot(nrm, sub(*xi4, xi[0])) / nn).abs() > 1e-9 * (1.0 + norm(*xi4)) {
                return Err(Error::Construction("xi_4 is not in the convex hull of xi_1, xi_2, xi_3 (off their plane)".into()));
            }
            // barycentric coordinates within the triangle
            let lam = barycentric(xi, *xi4);
            if lam.iter().any(|&l| l < -1e-12) {
                return Err(Error::Construction("xi_4 is not in the convex hull of xi_1, xi_2, xi_3".into()));
            }
            let dist = dot(nrm, xi[0]).abs() / nn;
            if dist <= *rho {
                return Err(Error::Construction(format!(
                    "the affine hull of xi_1, xi_2, xi_3 meets the closed ball (distance {dist} <= {rho})"
                )));
            }
            Ok([xi[0], xi[1], xi[2], *xi4])
        }
        DiverseConstruction::Hull { xi, rho } => {
            for (i, p) in xi.iter().enumerate() {
                if norm(*p) <= *rho {
                    return Err(Error::Construction(format!("xi_{} lies in the closed domain", i + 1)));
                }
            }
            for f in 0..4 {
                let idx: Vec<usize> = (0..4).filter(|&k| k != f).collect();
                let (p0, p1, p2) = (xi[idx[0]], xi[idx[1]], xi[idx[2]]);
                let n = quad::cross(sub(p1, p0), sub(p2, p0));
                let nn = norm(n);
                if nn == 0.0 {
                    return Err(Error::Construction("degenerate tetrahedron".into()));
                }
                // signed distances of the origin and of the opposite vertex
                let so = -dot(n, p0) / nn;
                let sv = dot(n, sub(xi[f], p0)) / nn;
                if so * sv <= 0.0 || so.abs() <= *rho {
                    return Err(Error::Construction(format!(
                        "the closed ball is not in the interior of the convex hull (face opposite xi_{})",
                        f + 1
                    )));
                }
            }
            Ok(*xi)
        }
    }
}

fn barycentric(tri: &[[f64; 3]; 3], p: [f64; 3]) -> [f64; 3] {
    let v0 = sub(tri[1], tri[0]);
    let v1 = sub(tri[2], tri[0]);
    let v2 = sub(p, tri[0]);
    let (d00, d01, d11) = (dot(v0, v0), dot(v0, v1), dot(v1, v1));
    let (d20, d21) = (dot(v2, v0), dot(v2, v1));
    let den = d00 * d11 - d01 * d01;
    let l1 = (d11 * d20 - d01 * d21) / den;
    let l2 = (d00 * d21 - d01 * d20) / den;
    [1.0 - l1 - l2, l1, l2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Support;
    use std::f64::consts::PI;

    #[test]
    fn unit_direction_cases() {
        let (th, r) = unit_direction([1.0, 0.0, 0.0], [0.0; 3]).unwrap();
        assert_eq!((th, r), ([1.0, 0.0, 0.0], 1.0));
        let (th, r) = unit_direction([0.0; 3], [2.0, 0.0, 0.0]).unwrap();
        assert_eq!((th, r), ([-1.0, 0.0, 0.0], 2.0));
        assert!(matches!(unit_direction([1.0; 3], [1.0; 3]), Err(Error::Singularity(_))));
    }

    #[test]
    fn cone_volume_and_first_moment() {
        let c = ConeRegion::new(SourceEvent::new([0.3, 0.0, 0.0], 0.0), 1.0);
        let s = cone_trace_parametrization(&c, &ConeGridSpec::default()).unwrap();
        let v = s.integrate(|_| 1.0);
        assert!((v - 2f64.sqrt() * 4.0 * PI / 3.0).abs() < 1e-6);
        let m = s.integrate(|n| n.t);
        assert!((m - 2f64.sqrt() * PI).abs() < 1e-6);
        let empty = ConeRegion::new(SourceEvent::new([0.0; 3], 1.0), 1.0);
        assert!(matches!(cone_trace_parametrization(&empty, &ConeGridSpec::default()), Err(Error::EmptyRegion(_))));
    }

    #[test]
    fn angular_derivatives() {
        let x1 = ScalarField::func(|p| p[0].clone(), Support::UNBOUNDED, 6);
        let v = angular_derivative(&x1, 1, 2, [0.3, 0.7, -0.2], 0.0, [0.0; 3]).unwrap();
        assert!((v + 0.7).abs() < 1e-15);
        let rad = ScalarField::func(
            |p| p[0].add_scalar(-1.0).square() + p[1].square() + p[2].square(),
            Support::UNBOUNDED,
            6,
        );
        for (l, m) in [(1, 2), (2, 3), (3, 1)] {
            assert!(angular_derivative(&rad, l, m, [0.4, 0.2, 0.9], 0.0, [1.0, 0.0, 0.0]).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn spherical_laplacian_degree_one_harmonic() {
        let f = ScalarField::func(
            |p| p[0].div(&(p[0].square() + p[1].square() + p[2].square()).sqrt()),
            Support::UNBOUNDED,
            6,
        );
        let x = [0.3, -0.5, 0.4];
        let r = norm(x);
        let v = spherical_laplacian(&f, x, 0.0, [0.0; 3]).unwrap();
        assert!((v - (-2.0 * x[0] / r / (r * r))).abs() < 1e-12);
    }

    #[test]
    fn standard_set_matrix_at_origin() {
        let locs = construct_diverse(&DiverseConstruction::Standard { rho: 1.0, n: 5.0 }).unwrap();
        let m = diverse_matrix([0.0; 3], &locs).unwrap();
        assert_eq!(m[0], [1.0; 4]);
        assert!((m[1][0] + 1.0).abs() < 1e-15 && (m[2][1] + 1.0).abs() < 1e-15);
        assert!((m[1][3] + 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!(det4(&m).abs() > 1e-3);
    }

    #[test]
    fn construction_errors_name_the_clause() {
        let e = construct_diverse(&DiverseConstruction::Affine {
            xi: [[3.0, 0.0, 0.0], [0.0, 3.0, 0.0], [0.0, 0.0, 3.0]],
            xi4: [3.0, 0.0, 0.0],
            rho: 1.0,
        });
        assert!(matches!(e, Err(Error::Construction(ref s)) if s.contains("different")));
        assert!(construct_diverse(&DiverseConstruction::Standard { rho: 1.0, n: 1.5 }).is_err());
    }
}
