//! Weighted norms on Q, H and C, the Carleman inequality check and the
//! tau-integration identity.
//!
//! All integrals are taken in spherical coordinates about the source,
//! restricted to a focus ball that contains the integrand's support:
//! directions in the cap subtended by the ball, then r over the chord, then
//! (for Q) t over [tau + r, T]. Each inner integrand is smooth, so plain
//! Gauss-Legendre panels are spectrally accurate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fields::{apply_l, CoefficientSet, ScalarField, Support};
use crate::geometry::{ConeRegion, SourceEvent};
use crate::jet::Jet;
use crate::quad::{dot, norm, sub, GlRule, SphereRule};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// The solid cone region tau + |x - xi| <= t <= T.
    Q,
    /// Its top slice t = T.
    H,
    /// The lateral surface t = tau + |x - xi|.
    C,
}

/// A ball in space times a time window containing the integrand's support.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Focus {
    pub center: [f64; 3],
    pub radius: f64,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl Focus {
    pub fn ball(center: [f64; 3], radius: f64, t_lo: f64, t_hi: f64) -> Focus {
        Focus { center, radius, t_lo, t_hi }
    }

    /// The declared support of a field (a ball about the origin).
    pub fn of(f: &ScalarField) -> Focus {
        let s: Support = f.support();
        Focus { center: [0.0; 3], radius: s.radius, t_lo: s.t_lo, t_hi: s.t_hi }
    }

    pub fn unbounded() -> Focus {
        Focus::of_support(Support::UNBOUNDED)
    }

    fn of_support(s: Support) -> Focus {
        Focus { center: [0.0; 3], radius: s.radius, t_lo: s.t_lo, t_hi: s.t_hi }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormQuad {
    /// Gauss-Legendre points in cos(theta); phi uses twice as many.
    pub theta: usize,
    pub r_panels: usize,
    pub r_nodes: usize,
    pub t_nodes: usize,
}

impl Default for NormQuad {
    fn default() -> Self {
        NormQuad { theta: 12, r_panels: 2, r_nodes: 12, t_nodes: 12 }
    }
}

/// A quadrature node: space-time point, weight (surface factor included)
/// and the ray direction from the source.
#[derive(Clone, Copy, Debug)]
pub struct Node {
    pub x: [f64; 3],
    pub t: f64,
    pub w: f64,
    pub theta: [f64; 3],
}

fn chord(xi: [f64; 3], w: [f64; 3], f: &Focus) -> Option<(f64, f64)> {
    if !f.radius.is_finite() {
        return Some((0.0, f64::INFINITY));
    }
    let d = sub(xi, f.center);
    let b = dot(d, w);
    let c = dot(d, d) - f.radius * f.radius;
    let disc = b * b - c;
    if disc <= 0.0 {
        return None;
    }
    let s = disc.sqrt();
    let (lo, hi) = (-b - s, -b + s);
    (hi > 0.0).then_some((lo.max(0.0), hi))
}

fn directions(xi: [f64; 3], f: &Focus, q: &NormQuad) -> SphereRule {
    let d = sub(f.center, xi);
    let dist = norm(d);
    if !f.radius.is_finite() || dist <= f.radius {
        SphereRule::product(q.theta)
    } else {
        SphereRule::cap(d, (f.radius / dist).asin(), q.theta, 2 * q.theta)
    }
}

/// Panel edges on [a, b]: `panels` equal pieces plus the given breaks.
fn edges(a: f64, b: f64, panels: usize, breaks: &[f64]) -> Vec<f64> {
    let mut e: Vec<f64> = (0..=panels).map(|k| a + (b - a) * k as f64 / panels as f64).collect();
    e.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    e.sort_by(|x, y| x.total_cmp(y));
    e.dedup();
    e
}

/// Quadrature nodes for a region of the cone through `cone.source`.
pub fn region_nodes(cone: &ConeRegion, region: Region, focus: &Focus, q: &NormQuad) -> Result<Vec<Node>> {
    let height = cone.height();
    if height <= 0.0 {
        return Err(Error::EmptyRegion(format!("tau = {} is not below T = {}", cone.source.tau, cone.horizon)));
    }
    let (xi, tau, big_t) = (cone.source.xi, cone.source.tau, cone.horizon);
    let t_lo = focus.t_lo.max(tau);
    let t_hi = focus.t_hi.min(big_t);
    if t_lo >= t_hi && region != Region::H {
        return Ok(Vec::new());
    }
    if region == Region::H && !(focus.t_lo <= big_t && big_t <= focus.t_hi) {
        return Ok(Vec::new());
    }
    let sphere = directions(xi, focus, q);
    let gr = GlRule::new(q.r_nodes);
    let gt = GlRule::new(q.t_nodes);
    let per_dir: Vec<Vec<Node>> = sphere
        .dirs
        .par_iter()
        .zip(&sphere.w)
        .map(|(&om, &wo)| {
            let mut out = Vec::new();
            let Some((r1, r2)) = chord(xi, om, focus) else { return out };
            let (r_lo, r_hi) = match region {
                Region::H => (r1, r2.min(height)),
                _ => (r1.max(t_lo - tau), r2.min(height).min(t_hi - tau)),
            };
            if r_hi <= r_lo {
                return out;
            }
            let br = [t_lo - tau, t_hi - tau];
            let e = edges(r_lo, r_hi, q.r_panels, if region == Region::H { &[] } else { &br });
            for p in e.windows(2) {
                for (r, wr) in gr.on(p[0], p[1]) {
                    let x = [xi[0] + r * om[0], xi[1] + r * om[1], xi[2] + r * om[2]];
                    let base = wo * wr * r * r;
                    match region {
                        Region::H => out.push(Node { x, t: big_t, w: base, theta: om }),
                        Region::C => out.push(Node { x, t: tau + r, w: std::f64::consts::SQRT_2 * base, theta: om }),
                        Region::Q => {
                            let (a, b) = ((tau + r).max(t_lo), t_hi);
                            if b > a {
                                for (t, wt) in gt.on(a, b) {
                                    out.push(Node { x, t, w: base * wt, theta: om });
                                }
                            }
                        }
                    }
                }
            }
            out
        })
        .collect();
    Ok(per_dir.into_iter().flatten().collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormResult {
    pub region: Region,
    pub sigma: f64,
    pub order: usize,
    pub value: f64,
    pub nodes: usize,
}

/// Squared gradient entering the order-1 norm on a region: the full
/// space-time gradient on Q, the spatial one on H and the tangential one
/// on C.
fn grad_sq(region: Region, g: &[f64; 4], theta: [f64; 3]) -> f64 {
    let gx = g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
    match region {
        Region::Q => gx + g[3] * g[3],
        Region::H => gx,
        Region::C => {
            let gr = theta[0] * g[0] + theta[1] * g[1] + theta[2] * g[2];
            0.5 * (g[3] + gr).powi(2) + gx - gr * gr
        }
    }
}

/// ||f||_{order, region, sigma}.
pub fn weighted_norm(f: &ScalarField, cone: &ConeRegion, region: Region, sigma: f64, order: usize) -> Result<WeightedNormResult> {
    weighted_norm_with(f, cone, region, sigma, order, &Focus::of(f), &NormQuad::default())
}

pub fn weighted_norm_with(
    f: &ScalarField,
    cone: &ConeRegion,
    region: Region,
    sigma: f64,
    order: usize,
    focus: &Focus,
    q: &NormQuad,
) -> Result<WeightedNormResult> {
    if order > 1 {
        return Err(Error::Usage(format!("weighted norms are defined for order 0 and 1, got {order}")));
    }
    let nodes = region_nodes(cone, region, focus, q)?;
    let terms: Vec<f64> = nodes
        .par_iter()
        .map(|n| {
            let wt = n.w * (2.0 * sigma * n.t).exp();
            if order == 0 {
                let v = f.value(n.x, n.t);
                wt * v * v
            } else {
                let (v, g) = f.d1(n.x, n.t);
                wt * (grad_sq(region, &g, n.theta) + sigma * sigma * v * v)
            }
        })
        .collect();
    let sq: f64 = terms.iter().sum();
    Ok(WeightedNormResult { region, sigma, order, value: sq.max(0.0).sqrt(), nodes: nodes.len() })
}

/// One sigma of a Carleman check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarlemanRow {
    pub sigma: f64,
    /// sigma ||w||^2_{1, Q, sigma}
    pub lhs_interior: f64,
    /// sigma ||w||^2_{1, C, sigma}
    pub lhs_cone: f64,
    /// ||L w||^2_{0, Q, sigma}
    pub rhs_interior: f64,
    /// sigma int_H e^{2 sigma t} (|grad_{x,t} w|^2 + sigma^2 w^2)
    pub rhs_hyperplane: f64,
}

impl CarlemanRow {
    pub fn lhs(&self) -> f64 {
        self.lhs_interior + self.lhs_cone
    }

    pub fn rhs(&self) -> f64 {
        self.rhs_interior + self.rhs_hyperplane
    }

    /// LHS / RHS, or None when both sides vanish.
    pub fn ratio(&self) -> Option<f64> {
        let (l, r) = (self.lhs(), self.rhs());
        if r > 0.0 {
            Some(l / r)
        } else if l == 0.0 {
            None
        } else {
            Some(f64::INFINITY)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarlemanReport {
    pub rows: Vec<CarlemanRow>,
}

impl CarlemanReport {
    /// The smallest constant that makes LHS <= C RHS on every row.
    pub fn fitted_constant(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.ratio()).reduce(f64::max)
    }
}

/// Per-node data, independent of sigma.
struct Sampled {
    t: Vec<f64>,
    w: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Sampled {
    /// sum w e^{2 sigma t} (a + sigma^2 b)
    fn sum(&self, sigma: f64) -> f64 {
        let mut s = 0.0;
        for i in 0..self.t.len() {
            s += self.w[i] * (2.0 * sigma * self.t[i]).exp() * (self.a[i] + sigma * sigma * self.b[i]);
        }
        s
    }
}

fn sample(nodes: &[Node], f: impl Fn(&Node) -> (f64, f64) + Sync + Send) -> Sampled {
    let vals: Vec<(f64, f64)> = nodes.par_iter().map(f).collect();
    Sampled {
        t: nodes.iter().map(|n| n.t).collect(),
        w: nodes.iter().map(|n| n.w).collect(),
        a: vals.iter().map(|v| v.0).collect(),
        b: vals.iter().map(|v| v.1).collect(),
    }
}

/// All four Carleman terms for a test field `w` on Q_{xi, tau} and every
/// sigma in `sigmas`.
pub fn carleman_check(
    cs: &CoefficientSet,
    cone: &ConeRegion,
    w: &ScalarField,
    sigmas: &[f64],
    focus: &Focus,
    q: &NormQuad,
) -> Result<CarlemanReport> {
    let nq = region_nodes(cone, Region::Q, focus, q)?;
    let nc = region_nodes(cone, Region::C, focus, q)?;
    let nh = region_nodes(cone, Region::H, focus, q)?;
    let mut err = None;
    let lw: Vec<f64> = nq
        .par_iter()
        .map(|n| apply_l(cs, w, n.x, n.t))
        .collect::<Vec<Result<f64>>>()
        .into_iter()
        .map(|r| r.unwrap_or_else(|e| {
            err.get_or_insert(e);
            0.0
        }))
        .collect();
    if let Some(e) = err {
        return Err(e);
    }
    let sq = sample(&nq, |n| {
        let (v, g) = w.d1(n.x, n.t);
        (grad_sq(Region::Q, &g, n.theta), v * v)
    });
    let sc = sample(&nc, |n| {
        let (v, g) = w.d1(n.x, n.t);
        (grad_sq(Region::C, &g, n.theta), v * v)
    });
    let sh = sample(&nh, |n| {
        let (v, g) = w.d1(n.x, n.t);
        (grad_sq(Region::Q, &g, n.theta), v * v)
    });
    let sl = Sampled { t: sq.t.clone(), w: sq.w.clone(), a: lw.iter().map(|v| v * v).collect(), b: vec![0.0; lw.len()] };
    let rows = sigmas
        .iter()
        .map(|&s| CarlemanRow {
            sigma: s,
            lhs_interior: s * sq.sum(s),
            lhs_cone: s * sc.sum(s),
            rhs_interior: sl.sum(s),
            rhs_hyperplane: s * sh.sum(s),
        })
        .collect();
    Ok(CarlemanReport { rows })
}

/// A test field of the Carleman suite together with its focus ball.
#[derive(Clone, Debug)]
pub struct SuiteMember {
    pub name: String,
    pub field: ScalarField,
    pub focus: Focus,
}

/// 20 bumps and 5 oscillatory bumps bump * cos(k . x), |k| up to 8 pi,
/// centred inside Q_{xi, tau}. Some touch H or C.
pub fn carleman_suite(cone: &ConeRegion, seed: u64) -> Vec<SuiteMember> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (xi, tau, big_t) = (cone.source.xi, cone.source.tau, cone.horizon);
    let height = cone.height();
    let mut out = Vec::with_capacity(25);
    let center = |rng: &mut ChaCha8Rng| -> ([f64; 4], f64, f64) {
        let rx = height * rng.gen_range(0.08..0.2);
        let rt = height * rng.gen_range(0.08..0.2);
        let t = rng.gen_range(tau + 0.35 * height..big_t + 0.5 * rt);
        let reach = (t - tau).min(height);
        let r = reach * rng.gen_range(0.3..1.0f64).cbrt();
        let om = random_unit(rng);
        ([xi[0] + r * om[0], xi[1] + r * om[1], xi[2] + r * om[2], t], rx, rt)
    };
    for i in 0..20 {
        let (c, rx, rt) = center(&mut rng);
        let amp = rng.gen_range(0.5..2.0);
        out.push(SuiteMember {
            name: format!("bump-{i}"),
            field: ScalarField::bump(amp, c, rx, rt),
            focus: Focus::ball([c[0], c[1], c[2]], rx, c[3] - rt, c[3] + rt),
        });
    }
    let pi = std::f64::consts::PI;
    for (i, kmag) in [pi, 2.0 * pi, 4.0 * pi, 6.0 * pi, 8.0 * pi].into_iter().enumerate() {
        let (c, rx, rt) = center(&mut rng);
        let dir = random_unit(&mut rng);
        let k = [kmag * dir[0], kmag * dir[1], kmag * dir[2]];
        let bump = ScalarField::bump(1.0, c, rx, rt);
        let osc = ScalarField::func(
            move |p: &[Jet; 4]| {
                let phase = &(&p[0].scale(k[0]) + &p[1].scale(k[1])) + &p[2].scale(k[2]);
                phase.sin_cos().1
            },
            Support::UNBOUNDED,
            crate::jet::MAX_ORDER,
        );
        out.push(SuiteMember {
            name: format!("oscillatory-{i}"),
            field: bump.mul(&osc),
            focus: Focus::ball([c[0], c[1], c[2]], rx, c[3] - rt, c[3] + rt),
        });
    }
    out
}

fn random_unit(rng: &mut impl Rng) -> [f64; 3] {
    loop {
        let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let n = norm(v);
        if n > 1e-3 && n <= 1.0 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// Outcome of the suite sweep: constant fitted at the first sigma and the
/// rows that exceed it at larger sigma.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub sigma0: f64,
    pub constant: f64,
    pub ratios: Vec<(String, Vec<f64>)>,
    pub violations: Vec<(String, f64, f64)>,
}

pub const DEFAULT_SIGMAS: [f64; 5] = [4.0, 8.0, 16.0, 32.0, 64.0];

/// Fits C* = max over the suite of LHS/RHS at sigmas[0] and counts the
/// members and sigmas > sigmas[0] with LHS > C* RHS.
pub fn carleman_suite_check(cs: &CoefficientSet, cone: &ConeRegion, suite: &[SuiteMember], sigmas: &[f64], q: &NormQuad) -> Result<SuiteResult> {
    if sigmas.is_empty() {
        return Err(Error::Usage("empty sigma sweep".into()));
    }
    let mut ratios = Vec::with_capacity(suite.len());
    for m in suite {
        let rep = carleman_check(cs, cone, &m.field, sigmas, &m.focus, q)?;
        ratios.push((m.name.clone(), rep.rows.iter().map(|r| r.ratio().unwrap_or(0.0)).collect::<Vec<f64>>()));
    }
    let constant = ratios.iter().map(|(_, r)| r[0]).fold(0.0, f64::max);
    let mut violations = Vec::new();
    for (name, r) in &ratios {
        for (k, &v) in r.iter().enumerate().skip(1) {
            if v > constant {
                violations.push((name.clone(), sigmas[k], v));
            }
        }
    }
    Ok(SuiteResult { sigma0: sigmas[0], constant, ratios, violations })
}

/// Both sides of the tau-integration identity
/// int dtau ||f||^2_{0, C_{xi,tau}, sigma} = sqrt(2) ||f||^2_{0, R^3 x R, sigma}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityResult {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    /// False when the tau window misses cones that meet the support.
    pub covered: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityQuad {
    pub tau_panels: usize,
    pub tau_nodes: usize,
    pub cone: NormQuad,
    pub volume: NormQuad,
}

impl Default for IdentityQuad {
    fn default() -> Self {
        IdentityQuad {
            tau_panels: 8,
            tau_nodes: 8,
            cone: NormQuad { theta: 10, r_panels: 1, r_nodes: 12, t_nodes: 1 },
            volume: NormQuad { theta: 10, r_panels: 2, r_nodes: 10, t_nodes: 12 },
        }
    }
}

/// The identity for `f` supported in `focus`, with tau over `window`.
pub fn tau_integral_identity(f: &ScalarField, xi: [f64; 3], sigma: f64, window: (f64, f64), focus: &Focus, q: &IdentityQuad) -> Result<IdentityResult> {
    if !(focus.radius.is_finite() && focus.t_lo.is_finite() && focus.t_hi.is_finite()) {
        return Err(Error::Usage("the tau identity needs a bounded support".into()));
    }
    let d = norm(sub(focus.center, xi));
    if d <= focus.radius {
        return Err(Error::Precondition("the source lies inside the support".into()));
    }
    let need = (focus.t_lo - d - focus.radius, focus.t_hi - (d - focus.radius));
    let covered = window.0 <= need.0 && window.1 >= need.1;
    // Cones only ever need to reach t_hi, so the horizon is placed there.
    let horizon = focus.t_hi;
    let gl = GlRule::new(q.tau_nodes);
    let mut taus = Vec::new();
    for e in edges(window.0, window.1, q.tau_panels, &[need.0, need.1]).windows(2) {
        taus.extend(gl.on(e[0], e[1]));
    }
    let per_tau: Vec<Result<f64>> = taus
        .par_iter()
        .map(|&(tau, _)| {
            if tau >= horizon {
                return Ok(0.0);
            }
            let cone = ConeRegion::new(SourceEvent::new(xi, tau), horizon);
            Ok(weighted_norm_with(f, &cone, Region::C, sigma, 0, focus, &q.cone)?.value.powi(2))
        })
        .collect();
    let mut lhs = 0.0;
    for (v, (_, w)) in per_tau.into_iter().zip(&taus) {
        lhs += w * v?;
    }
    let vol = volume_norm_sq(f, sigma, focus, &q.volume);
    let rhs = std::f64::consts::SQRT_2 * vol;
    let gap = if rhs > 0.0 { (lhs - rhs).abs() / rhs } else { lhs.abs() };
    Ok(IdentityResult { lhs, rhs, gap, covered })
}

/// int e^{2 sigma t} f^2 dx dt over the focus ball, in spherical
/// coordinates about its centre.
fn volume_norm_sq(f: &ScalarField, sigma: f64, focus: &Focus, q: &NormQuad) -> f64 {
    let sphere = SphereRule::product(q.theta);
    let gr = GlRule::new(q.r_nodes);
    let gt = GlRule::new(q.t_nodes);
    let mut nodes = Vec::new();
    for (om, wo) in sphere.dirs.iter().zip(&sphere.w) {
        for e in edges(0.0, focus.radius, q.r_panels, &[]).windows(2) {
            for (r, wr) in gr.on(e[0], e[1]) {
                let x = [focus.center[0] + r * om[0], focus.center[1] + r * om[1], focus.center[2] + r * om[2]];
                for (t, wt) in gt.on(focus.t_lo, focus.t_hi) {
                    nodes.push((x, t, wo * wr * r * r * wt));
                }
            }
        }
    }
    let vals: Vec<f64> = nodes
        .par_iter()
        .map(|&(x, t, w)| {
            let v = f.value(x, t);
            w * (2.0 * sigma * t).exp() * v * v
        })
        .collect();
    vals.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, SQRT_2};

    fn cone(tau: f64) -> ConeRegion {
        ConeRegion::new(SourceEvent::new([2.0, 0.0, 0.0], tau), 1.0)
    }

    fn one() -> ScalarField {
        ScalarField::func(|p: &[Jet; 4]| Jet::constant(1.0, p[0].order()), Support::UNBOUNDED, 16)
    }

    #[test]
    fn constant_on_h_gives_ball_volume() {
        let r = weighted_norm(&one(), &cone(0.0), Region::H, 0.0, 0).unwrap();
        assert!((r.value.powi(2) - 4.0 * PI / 3.0).abs() < 1e-10);
    }

    #[test]
    fn constant_on_c_matches_radial_integral() {
        let (tau, s) = (-0.5, 1.5);
        let r = weighted_norm(&one(), &cone(tau), Region::C, s, 0).unwrap();
        // sqrt 2 int_0^h e^{2 s (tau + r)} 4 pi r^2 dr in closed form
        let h = 1.0 - tau;
        let k = 2.0 * s;
        let prim = |r: f64| (k * r).exp() * (r * r / k - 2.0 * r / (k * k) + 2.0 / (k * k * k));
        let exact = SQRT_2 * 4.0 * PI * (k * tau).exp() * (prim(h) - prim(0.0));
        assert!((r.value.powi(2) - exact).abs() < 1e-9 * exact, "{} {exact}", r.value.powi(2));
    }

    #[test]
    fn zero_field_and_empty_region() {
        assert_eq!(weighted_norm(&ScalarField::zero(), &cone(0.0), Region::Q, 3.0, 1).unwrap().value, 0.0);
        assert!(matches!(weighted_norm(&one(), &cone(1.0), Region::Q, 0.0, 0), Err(Error::EmptyRegion(_))));
    }

    #[test]
    fn q_volume_of_constant_is_cone_volume() {
        let r = weighted_norm(&one(), &cone(0.0), Region::Q, 0.0, 0).unwrap();
        assert!((r.value.powi(2) - PI / 3.0).abs() < 1e-10);
    }

    #[test]
    fn zero_test_field_has_undefined_ratio() {
        let c = cone(-1.0);
        let rep = carleman_check(&CoefficientSet::zero(), &c, &ScalarField::zero(), &[4.0], &Focus::unbounded(), &NormQuad::default()).unwrap();
        assert_eq!(rep.rows[0].ratio(), None);
    }

    #[test]
    fn interior_bump_has_no_hyperplane_term() {
        let c = cone(-1.0);
        let w = ScalarField::bump(1.0, [0.5, 0.0, 0.0, 0.2], 0.3, 0.3);
        let f = Focus::ball([0.5, 0.0, 0.0], 0.3, -0.1, 0.5);
        let rep = carleman_check(&CoefficientSet::zero(), &c, &w, &DEFAULT_SIGMAS, &f, &NormQuad::default()).unwrap();
        for r in &rep.rows {
            assert_eq!(r.rhs_hyperplane, 0.0);
            assert!(r.rhs_interior > 0.0 && r.lhs() > 0.0);
        }
    }

    #[test]
    fn tau_identity_closes_for_a_bump() {
        let f = ScalarField::bump(1.0, [0.1, 0.2, 0.0, 0.5], 0.6, 0.4);
        let focus = Focus::ball([0.1, 0.2, 0.0], 0.6, 0.1, 0.9);
        let xi = [2.0, 0.0, 0.0];
        for s in [0.0, 5.0] {
            let r = tau_integral_identity(&f, xi, s, (-3.0, 0.0), &focus, &IdentityQuad::default()).unwrap();
            assert!(r.covered);
            assert!(r.gap < 1e-3, "sigma {s}: {r:?}");
        }
    }
}
