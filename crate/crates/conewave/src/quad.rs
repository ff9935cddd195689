//! Quadrature, sampling and interpolation helpers.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_and_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

fn legendre_all(n: usize, z: f64) -> Vec<f64> {
    let mut p = vec![1.0; n + 1];
    if n >= 1 {
        p[1] = z;
    }
    for k in 2..=n {
        p[k] = ((2 * k - 1) as f64 * z * p[k - 1] - (k - 1) as f64 * p[k - 2]) / k as f64;
    }
    p
}

/// Gauss-Legendre rule with a table for running integrals: the integral of
/// the node interpolant from -1 to any point.
#[derive(Clone, Debug)]
pub struct GlRule {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
    pnodes: Vec<Vec<f64>>,
}

impl GlRule {
    pub fn new(n: usize) -> GlRule {
        let (x, w) = gauss_legendre(n);
        let pnodes = x.iter().map(|&xj| legendre_all(n, xj)).collect();
        GlRule { x, w, pnodes }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Weights r_j with  int_{-1}^{z} f  ~  sum_j r_j f(x_j).
    pub fn running_row(&self, z: f64) -> Vec<f64> {
        let n = self.x.len();
        let pz = legendre_all(n, z);
        (0..n)
            .map(|j| {
                let mut s = 0.5 * (z + 1.0);
                for k in 1..n {
                    s += 0.5 * self.pnodes[j][k] * (pz[k + 1] - pz[k - 1]);
                }
                self.w[j] * s
            })
            .collect()
    }

    /// Nodes and weights mapped to [a, b].
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        self.x.iter().zip(&self.w).map(move |(x, w)| (c + h * x, h * w))
    }
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let d = h * XGK[i];
        let s = f(c - d) + f(c + d);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod (7-15) with absolute tolerance `tol`.
pub fn integrate_adaptive(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let mut stack = vec![(a, b, tol, 0u32)];
    let mut total = 0.0;
    while let Some((lo, hi, t, depth)) = stack.pop() {
        let (v, err) = gk15(&mut f, lo, hi);
        if err <= t || depth >= 40 || (hi - lo).abs() < 1e-14 * (1.0 + lo.abs()) {
            total += v;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, 0.5 * t, depth + 1));
            stack.push((lo, mid, 0.5 * t, depth + 1));
        }
    }
    total
}

/// Integrate over [a, b] after splitting at the given breakpoints.
pub fn integrate_split(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&s| s > a && s < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    let share = tol / (pts.len().max(2) - 1) as f64;
    pts.windows(2).map(|w| integrate_adaptive(&mut f, w[0], w[1], share)).sum()
}

/// Product rule on the unit sphere: Gauss-Legendre in cos(theta) times a
/// uniform rule in phi. Exact for spherical polynomials of degree < 2 n_theta.
#[derive(Clone, Debug)]
pub struct SphereRule {
    pub dirs: Vec<[f64; 3]>,
    pub w: Vec<f64>,
}

impl SphereRule {
    pub fn product(n_theta: usize) -> SphereRule {
        Self::cap([0.0, 0.0, 1.0], PI, n_theta, 2 * n_theta)
    }

    /// Directions within `half_angle` of `axis`.
    pub fn cap(axis: [f64; 3], half_angle: f64, n_theta: usize, n_phi: usize) -> SphereRule {
        let half_angle = half_angle.min(PI);
        let (x, w) = gauss_legendre(n_theta);
        let cmin = half_angle.cos();
        let (e1, e2, e3) = frame(axis);
        let mut dirs = Vec::with_capacity(n_theta * n_phi);
        let mut ws = Vec::with_capacity(n_theta * n_phi);
        for (xi, wi) in x.iter().zip(&w) {
            let ct = 0.5 * (1.0 + cmin) + 0.5 * (1.0 - cmin) * xi;
            let st = (1.0 - ct * ct).max(0.0).sqrt();
            for k in 0..n_phi {
                let ph = 2.0 * PI * (k as f64 + 0.5) / n_phi as f64;
                let (sp, cp) = ph.sin_cos();
                let d: [f64; 3] =
                    std::array::from_fn(|i| st * cp * e1[i] + st * sp * e2[i] + ct * e3[i]);
                dirs.push(d);
                ws.push(wi * 0.5 * (1.0 - cmin) * 2.0 * PI / n_phi as f64);
            }
        }
        SphereRule { dirs, w: ws }
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }
}

/// Orthonormal frame whose third vector is `axis` normalised.
pub fn frame(axis: [f64; 3]) -> ([f64; 3], [f64; 3], [f64; 3]) {
    let n = norm(axis);
    let e3 = [axis[0] / n, axis[1] / n, axis[2] / n];
    let helper = if e3[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = normalize(cross(helper, e3));
    let e2 = cross(e3, e1);
    (e1, e2, e3)
}

pub fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = norm(v);
    [v[0] / n, v[1] / n, v[2] / n]
}

pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Low-discrepancy points filling the closed ball of radius `rho`; one in
/// eight lies on the bounding sphere.
pub fn halton_ball(n: usize, rho: f64) -> Vec<[f64; 3]> {
    let nb = n / 8;
    (0..n)
        .map(|i| {
            let k = i as u64 + 1;
            let (u, v, s) = (radical_inverse(k, 2), radical_inverse(k, 3), radical_inverse(k, 5));
            let r = if i < nb { rho } else { rho * s.cbrt() };
            let ct = 2.0 * u - 1.0;
            let st = (1.0 - ct * ct).max(0.0).sqrt();
            let ph = 2.0 * PI * v;
            [r * st * ph.cos(), r * st * ph.sin(), r * ct]
        })
        .collect()
}

/// Cubic spline through (x_i, y_i) with end slopes from one-sided
/// five-point stencils.
#[derive(Clone, Debug)]
pub struct Spline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

fn lagrange_slope(x: &[f64], y: &[f64], at: usize) -> f64 {
    // derivative at x[at] of the interpolating polynomial through all points
    let n = x.len();
    let mut d = 0.0;
    for j in 0..n {
        let mut lj = 0.0;
        if j == at {
            for k in 0..n {
                if k != j {
                    lj += 1.0 / (x[j] - x[k]);
                }
            }
        } else {
            let mut num = 1.0;
            for k in 0..n {
                if k != j && k != at {
                    num *= x[at] - x[k];
                }
            }
            let mut den = 1.0;
            for k in 0..n {
                if k != j {
                    den *= x[j] - x[k];
                }
            }
            lj = num / den;
        }
        d += lj * y[j];
    }
    d
}

impl Spline {
    pub fn new(x: &[f64], y: &[f64]) -> Spline {
        let n = x.len();
        assert!(n >= 2 && n == y.len());
        if n < 4 {
            // too short for a spline: piecewise linear, zero curvature
            return Spline { x: x.to_vec(), y: y.to_vec(), m: vec![0.0; n] };
        }
        let k = n.min(5);
        let s0 = lagrange_slope(&x[..k], &y[..k], 0);
        let sn = lagrange_slope(&x[n - k..], &y[n - k..], k - 1);
        let h: Vec<f64> = (0..n - 1).map(|i| x[i + 1] - x[i]).collect();
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut r = vec![0.0; n];
        b[0] = h[0] / 3.0;
        c[0] = h[0] / 6.0;
        r[0] = (y[1] - y[0]) / h[0] - s0;
        for i in 1..n - 1 {
            a[i] = h[i - 1] / 6.0;
            b[i] = (h[i - 1] + h[i]) / 3.0;
            c[i] = h[i] / 6.0;
            r[i] = (y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1];
        }
        a[n - 1] = h[n - 2] / 6.0;
        b[n - 1] = h[n - 2] / 3.0;
        r[n - 1] = sn - (y[n - 1] - y[n - 2]) / h[n - 2];
        let m = thomas(&a, &b, &c, &r);
        Spline { x: x.to_vec(), y: y.to_vec(), m }
    }

    fn segment(&self, z: f64) -> usize {
        let n = self.x.len();
        match self.x.binary_search_by(|v| v.partial_cmp(&z).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    pub fn eval(&self, z: f64) -> f64 {
        let i = self.segment(z);
        let h = self.x[i + 1] - self.x[i];
        let (a, b) = ((self.x[i + 1] - z) / h, (z - self.x[i]) / h);
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn deriv(&self, z: f64) -> f64 {
        let i = self.segment(z);
        let h = self.x[i + 1] - self.x[i];
        let (a, b) = ((self.x[i + 1] - z) / h, (z - self.x[i]) / h);
        (self.y[i + 1] - self.y[i]) / h
            + (-(3.0 * a * a - 1.0) * self.m[i] + (3.0 * b * b - 1.0) * self.m[i + 1]) * h / 6.0
    }

    /// Derivative at every knot.
    pub fn knot_derivatives(&self) -> Vec<f64> {
        self.x.iter().map(|&z| self.deriv(z)).collect()
    }
}

fn thomas(a: &[f64], b: &[f64], c: &[f64], r: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut rp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    rp[0] = r[0] / b[0];
    for i in 1..n {
        let den = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / den;
        rp[i] = (r[i] - a[i] * rp[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = rp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = rp[i] - cp[i] * x[i + 1];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 12, 24] {
            let (x, w) = gauss_legendre(n);
            for k in 0..2 * n {
                let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((s - exact).abs() < 1e-13, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn running_row_integrates_interpolant() {
        let g = GlRule::new(10);
        let f = |x: f64| 3.0 * x * x - 2.0 * x.powi(7) + 0.5;
        let vals: Vec<f64> = g.x.iter().map(|&x| f(x)).collect();
        for z in [-1.0, -0.3, 0.0, 0.77, 1.0] {
            let row = g.running_row(z);
            let s: f64 = row.iter().zip(&vals).map(|(r, v)| r * v).sum();
            let prim = |x: f64| x.powi(3) - 0.25 * x.powi(8) + 0.5 * x;
            assert!((s - (prim(z) - prim(-1.0))).abs() < 1e-13);
        }
    }

    #[test]
    fn adaptive_matches_closed_forms() {
        let v = integrate_adaptive(|x| x.sin(), 0.0, PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-12);
        let v = integrate_adaptive(|x| (-1.0 / (1.0 - x * x)).exp(), -1.0 + 1e-15, 1.0 - 1e-15, 1e-13);
        // reference from a 400-node Gauss-Legendre rule
        let (x, w) = gauss_legendre(400);
        let r: f64 = x.iter().zip(&w).map(|(x, w)| w * (-1.0 / (1.0 - x * x)).exp()).sum();
        assert!((v - r).abs() < 1e-12);
    }

    #[test]
    fn sphere_rule_moments() {
        let s = SphereRule::product(8);
        assert_eq!(s.len(), 128);
        let area: f64 = s.w.iter().sum();
        assert!((area - 4.0 * PI).abs() < 1e-12);
        let z4: f64 = s.dirs.iter().zip(&s.w).map(|(d, w)| w * d[2].powi(4)).sum();
        assert!((z4 - 4.0 * PI / 5.0).abs() < 1e-12);
        let x2y2: f64 = s.dirs.iter().zip(&s.w).map(|(d, w)| w * d[0] * d[0] * d[1] * d[1]).sum();
        assert!((x2y2 - 4.0 * PI / 15.0).abs() < 1e-12);
    }

    #[test]
    fn cap_rule_area() {
        let c = SphereRule::cap([1.0, 1.0, 0.0], 0.4, 6, 12);
        let area: f64 = c.w.iter().sum();
        assert!((area - 2.0 * PI * (1.0 - 0.4f64.cos())).abs() < 1e-12);
        let axis = normalize([1.0, 1.0, 0.0]);
        assert!(c.dirs.iter().all(|d| dot(*d, axis) >= 0.4f64.cos() - 1e-12));
    }

    #[test]
    fn spline_derivative_is_fourth_order_accurate_inside() {
        let f = |x: f64| (2.0 * x).sin();
        let err = |n: usize| {
            let x: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
            let y: Vec<f64> = x.iter().map(|&v| f(v)).collect();
            let s = Spline::new(&x, &y);
            x.iter()
                .zip(s.knot_derivatives())
                .map(|(&v, d)| (d - 2.0 * (2.0 * v).cos()).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(41), err(81));
        assert!(e1 < 1e-5);
        assert!(e1 / e2 > 6.0, "{e1} {e2}");
    }

    #[test]
    fn halton_ball_stays_in_ball() {
        let p = halton_ball(512, 1.5);
        assert!(p.iter().all(|q| norm(*q) <= 1.5 + 1e-12));
        assert_eq!(p.iter().filter(|q| (norm(**q) - 1.5).abs() < 1e-12).count(), 64);
    }
}
