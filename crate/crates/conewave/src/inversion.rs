//! Reconstruction from cone traces and empirical stability ratios.

use nalgebra::{Matrix4, SMatrix, Vector4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fields::{CoefficientSet, ScalarField, Support};
use crate::forward::{self, GridSpec, SmoothTrace};
use crate::geometry::{unit_direction, SourceEvent};
use crate::quad::{dot, halton_ball, norm, GlRule, Spline, SphereRule};
use crate::transport::{self, RayQuad};
use crate::{Error, Result};

/// Samples of a field on the cone through (xi, tau): `values[d][k]` at
/// xi + rs[k] dirs[d], time tau + rs[k].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeTrace {
    pub xi: [f64; 3],
    pub tau: f64,
    pub dirs: Vec<[f64; 3]>,
    pub rs: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl ConeTrace {
    fn check(&self) -> Result<()> {
        if self.rs.len() < 4 {
            return Err(Error::Data("cone traces need at least 4 radii per ray".into()));
        }
        if self.rs[0] <= 0.0 || self.rs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Data("cone-trace radii must be positive and increasing".into()));
        }
        if self.values.len() != self.dirs.len() || self.values.iter().any(|v| v.len() != self.rs.len()) {
            return Err(Error::Data("cone-trace values do not match the (direction, radius) layout".into()));
        }
        Ok(())
    }

    /// Sample `f(x, t)` on the layout of `self`.
    pub fn map_layout(&self, f: impl Fn([f64; 3], f64) -> f64 + Sync) -> Vec<Vec<f64>> {
        self.dirs
            .par_iter()
            .map(|w| self.rs.iter().map(|&r| f(point(self.xi, *w, r), self.tau + r)).collect())
            .collect()
    }
}

fn point(xi: [f64; 3], w: [f64; 3], r: f64) -> [f64; 3] {
    [xi[0] + r * w[0], xi[1] + r * w[1], xi[2] + r * w[2]]
}

/// (a + theta . b) along the rays of a cone.
pub type RayAttenuationProfile = ConeTrace;

/// u on the cone through (xi, tau) from exact alpha: u = alpha - 1/r.
pub fn synthesize_u_trace(cs: &CoefficientSet, xi: [f64; 3], tau: f64, dirs: &[[f64; 3]], rs: &[f64]) -> Result<ConeTrace> {
    let rq = RayQuad::default();
    let values = dirs
        .par_iter()
        .map(|&w| Ok(transport::ray_values(cs, xi, w, tau, rs, 0, &rq)?.iter().zip(rs).map(|(j, r)| j.alpha.value() - 1.0 / r).collect()))
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(ConeTrace { xi, tau, dirs: dirs.to_vec(), rs: rs.to_vec(), values })
}

/// (a + theta . b)(xi + r w, tau + r) = d/dr log(1 + r u) along each ray,
/// by cubic-spline differentiation.
pub fn recover_ray_attenuation(u: &ConeTrace) -> Result<RayAttenuationProfile> {
    u.check()?;
    let mut values = Vec::with_capacity(u.dirs.len());
    for (d, row) in u.values.iter().enumerate() {
        let mut logs = Vec::with_capacity(row.len());
        for (k, (&r, &v)) in u.rs.iter().zip(row).enumerate() {
            let ra = 1.0 + r * v;
            if ra <= 0.0 || !ra.is_finite() {
                return Err(Error::Data(format!("1 + r u = {ra} is not positive on ray {d} at sample {k}")));
            }
            logs.push(ra.ln());
        }
        if logs.iter().all(|&l| l == 0.0) {
            values.push(vec![0.0; row.len()]);
        } else {
            values.push(Spline::new(&u.rs, &logs).knot_derivatives());
        }
    }
    Ok(ConeTrace { values, ..u.clone() })
}

/// Pointwise (a, b) from the values p_i = (a + theta_i . b)(x, t) of at
/// least four sources.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbRecovery {
    pub a: Vec<f64>,
    pub b: Vec<[f64; 3]>,
    pub residual: Vec<f64>,
    pub min_singular_value: f64,
}

pub const DEFAULT_CONDITION_THRESHOLD: f64 = 1e-9;

pub fn recover_ab(locations: &[[f64; 3]], points: &[([f64; 3], f64)], values: &[Vec<f64>], threshold: f64) -> Result<AbRecovery> {
    if locations.len() < 4 {
        return Err(Error::Precondition(format!("{} source locations leave (a, b) underdetermined; 4 are needed", locations.len())));
    }
    if values.len() != points.len() || values.iter().any(|v| v.len() != locations.len()) {
        return Err(Error::Data("one value per (point, source) pair is required".into()));
    }
    let solved: Vec<Result<([f64; 4], f64, f64)>> = points
        .par_iter()
        .zip(values)
        .map(|(&(x, _), p)| {
            let mut rows = Vec::with_capacity(4 * locations.len());
            for &xi in locations {
                let (th, _) = unit_direction(x, xi)?;
                rows.extend([1.0, th[0], th[1], th[2]]);
            }
            let m = nalgebra::DMatrix::from_row_slice(locations.len(), 4, &rows);
            let rhs = nalgebra::DVector::from_column_slice(p);
            let svd = m.clone().svd(true, true);
            let smin = svd.singular_values.min();
            if smin <= threshold {
                return Err(Error::Conditioning(format!("direction matrix at x = {x:?} has singular value {smin:e}")));
            }
            let z = svd.solve(&rhs, 0.0).map_err(|e| Error::Conditioning(e.to_string()))?;
            let res = (&m * &z - &rhs).norm();
            Ok(([z[0], z[1], z[2], z[3]], res, smin))
        })
        .collect();
    let mut out = AbRecovery { a: vec![], b: vec![], residual: vec![], min_singular_value: f64::INFINITY };
    for s in solved {
        let (z, res, smin) = s?;
        out.a.push(z[0]);
        out.b.push([z[1], z[2], z[3]]);
        out.residual.push(res);
        out.min_singular_value = out.min_singular_value.min(smin);
    }
    Ok(out)
}

/// Exact-data input for `recover_ab`: for every point (x, t) and source
/// xi_i, u is synthesised on the ray of the cone tau_i = t - |x - xi_i|
/// through x at `n_r` radii spanning the coefficient ball, and the
/// profile a + theta_i . b, the r derivative of a spline through
/// log(1 + r u), is read off at r = |x - xi_i|.
pub fn ab_data_from_alpha(cs: &CoefficientSet, locations: &[[f64; 3]], points: &[([f64; 3], f64)], n_r: usize) -> Result<Vec<Vec<f64>>> {
    let radius = cs.bounds().radius.max(norm(points.iter().fold([0.0; 3], |m, p| if norm(p.0) > norm(m) { p.0 } else { m })));
    points
        .par_iter()
        .map(|&(x, t)| {
            locations
                .iter()
                .map(|&xi| {
                    let (w, r) = unit_direction(x, xi)?;
                    let d = norm(xi);
                    let lo = (d - radius - 0.05).max(1e-3);
                    let hi = d + radius + 0.05;
                    let rs: Vec<f64> = (0..n_r).map(|k| lo + (hi - lo) * k as f64 / (n_r - 1) as f64).collect();
                    let tr = synthesize_u_trace(cs, xi, t - r, &[w], &rs)?;
                    let logs: Vec<f64> = rs.iter().zip(&tr.values[0]).map(|(r, u)| (1.0 + r * u).ln()).collect();
                    Ok(Spline::new(&rs, &logs).deriv(r))
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QMode {
    /// Two experiments with the same (a, b): the trace is v - v' and the
    /// result q - q'.
    Relative,
    /// A single experiment: the trace is v and the result q.
    Absolute,
}

/// Floor on r alpha below which the q solve is refused.
pub const ALPHA_FLOOR: f64 = 1e-8;

/// q on the cone from a v trace and known (a, b).
///
/// Relative: qbar = -2 T vbar / alpha. Absolute: 2 T v = -L alpha on the
/// cone and L alpha = G + (q - a^2 + |b|^2) alpha with G the gauge part of
/// the L alpha decomposition, so q = (-2 T v - G) / alpha + a^2 - |b|^2.
/// T v is d/dr v - (a + theta . b) v + v / r along the ray.
pub fn recover_q(v: &ConeTrace, ab: &CoefficientSet, mode: QMode) -> Result<ConeTrace> {
    v.check()?;
    let rq = RayQuad::default();
    let ab = CoefficientSet::new(ab.a.clone(), ab.b.clone(), ScalarField::zero());
    let rows: Vec<Result<Vec<f64>>> = v
        .dirs
        .par_iter()
        .zip(&v.values)
        .map(|(&w, vals)| {
            let ag: Vec<(f64, f64)> = match mode {
                QMode::Absolute => transport::l_alpha_gauge_along_ray(&ab, v.xi, w, v.tau, &v.rs, &rq)?,
                QMode::Relative => transport::ray_values(&ab, v.xi, w, v.tau, &v.rs, 0, &rq)?.iter().map(|j| (j.alpha.value(), 0.0)).collect(),
            };
            let dv = Spline::new(&v.rs, vals).knot_derivatives();
            let mut out = Vec::with_capacity(vals.len());
            for k in 0..vals.len() {
                let r = v.rs[k];
                let (al, g) = ag[k];
                if r * al < ALPHA_FLOOR {
                    return Err(Error::Conditioning(format!("r alpha = {:e} below the floor at r = {r}", r * al)));
                }
                let x = point(v.xi, w, r);
                let t = v.tau + r;
                let vals5 = ab.values(x, t);
                let bv = [vals5[1], vals5[2], vals5[3]];
                let at = vals5[0] + dot(w, bv);
                let tv = dv[k] - at * vals[k] + vals[k] / r;
                out.push(match mode {
                    QMode::Relative => -2.0 * tv / al,
                    QMode::Absolute => (-2.0 * tv - g) / al + vals5[0] * vals5[0] - dot(bv, bv),
                });
            }
            Ok(out)
        })
        .collect();
    Ok(ConeTrace { values: rows.into_iter().collect::<Result<_>>()?, ..v.clone() })
}

/// Relative L2 difference over all samples, sqrt(sum (x - y)^2 / sum y^2).
pub fn relative_l2(x: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        for (p, q) in a.iter().zip(b) {
            num += (p - q) * (p - q);
            den += q * q;
        }
    }
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}

/// Quadrature over a ball about the origin times a time window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolumeQuad {
    pub theta: usize,
    pub r_nodes: usize,
    pub t_nodes: usize,
}

impl Default for VolumeQuad {
    fn default() -> Self {
        VolumeQuad { theta: 10, r_nodes: 20, t_nodes: 20 }
    }
}

/// sqrt(int |f|^2 dx dt) over the support, f vector valued.
pub fn space_time_l2<const N: usize>(f: impl Fn([f64; 3], f64) -> [f64; N] + Sync, support: Support, q: &VolumeQuad) -> f64 {
    if support.is_empty() || !support.radius.is_finite() || !support.t_lo.is_finite() || !support.t_hi.is_finite() {
        return 0.0;
    }
    let sphere = SphereRule::product(q.theta);
    let gr = GlRule::new(q.r_nodes);
    let gt = GlRule::new(q.t_nodes);
    let rs: Vec<(f64, f64)> = gr.on(0.0, support.radius).collect();
    let ts: Vec<(f64, f64)> = gt.on(support.t_lo, support.t_hi).collect();
    let per_dir: Vec<f64> = sphere
        .dirs
        .par_iter()
        .zip(&sphere.w)
        .map(|(om, wo)| {
            let mut s = 0.0;
            for &(r, wr) in &rs {
                let x = [r * om[0], r * om[1], r * om[2]];
                for &(t, wt) in &ts {
                    let v = f(x, t);
                    s += wo * wr * r * r * wt * v.iter().map(|c| c * c).sum::<f64>();
                }
            }
            s
        })
        .collect();
    per_dir.iter().sum::<f64>().sqrt()
}

/// Squared Sobolev norm of order <= 2 of grid values on a node set (H or
/// the whole box). Derivatives are centred differences where both
/// neighbours belong to the set, one-sided where only one does.
pub fn grid_norm_sq(grid: &GridSpec, nodes: &[usize], vals: &[f64], order: usize) -> f64 {
    let s = grid.side();
    let h = grid.h();
    let stride = [s * s, s, 1];
    let get = |idx: usize| nodes.binary_search(&idx).ok().map(|k| vals[k]);
    let mut sum = 0.0;
    for (k, &idx) in nodes.iter().enumerate() {
        let f = vals[k];
        let mut acc = f * f;
        if order >= 1 {
            for st in stride {
                let p = if idx + st < grid.len() { get(idx + st) } else { None };
                let m = if idx >= st { get(idx - st) } else { None };
                let d = match (p, m) {
                    (Some(p), Some(m)) => (p - m) / (2.0 * h),
                    (Some(p), None) => (p - f) / h,
                    (None, Some(m)) => (f - m) / h,
                    _ => 0.0,
                };
                acc += d * d;
            }
        }
        if order >= 2 {
            for (i, &si) in stride.iter().enumerate() {
                for (j, &sj) in stride.iter().enumerate() {
                    let v = if i == j {
                        match (get(idx + si), idx.checked_sub(si).and_then(get)) {
                            (Some(p), Some(m)) => (p - 2.0 * f + m) / (h * h),
                            _ => 0.0,
                        }
                    } else {
                        let pp = get(idx + si + sj);
                        let mm = idx.checked_sub(si + sj).and_then(get);
                        let pm = (idx + si).checked_sub(sj).and_then(get);
                        let mp = (idx + sj).checked_sub(si).and_then(get);
                        match (pp, mm, pm, mp) {
                            (Some(a), Some(b), Some(c), Some(d)) => (a + b - c - d) / (4.0 * h * h),
                            _ => 0.0,
                        }
                    };
                    acc += v * v;
                }
            }
        }
        sum += acc;
    }
    sum * h * h * h
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// q from v traces of one source, (a, b) shared.
    Q,
    /// (a, b) from u traces of four sources, q shared.
    Ab,
    /// curl(a, b) and c from u, v (and psi) traces.
    Abc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilitySetup {
    pub theorem: Theorem,
    pub sources: Vec<[f64; 3]>,
    pub taus: Vec<f64>,
    pub grid: GridSpec,
    pub n: usize,
    /// Include the psi traces in the abc data norm.
    pub include_psi: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub amplitude: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub theorem: Theorem,
    pub rows: Vec<StabilityRow>,
}

impl StabilityReport {
    /// max ratio / min ratio over rows with a nonzero difference.
    pub fn spread(&self) -> f64 {
        let r: Vec<f64> = self.rows.iter().map(|r| r.ratio).filter(|r| r.is_finite() && *r > 0.0).collect();
        if r.is_empty() {
            return f64::NAN;
        }
        r.iter().cloned().fold(0.0, f64::max) / r.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Traces of one coefficient set for every source and tau.
struct Data {
    u: Vec<Vec<Option<SmoothTrace>>>,
    v: Vec<Vec<Option<SmoothTrace>>>,
    psi: Option<forward::FdtdResult>,
}

fn collect(cs: &CoefficientSet, s: &StabilitySetup) -> Result<Data> {
    let need_u = s.theorem != Theorem::Q;
    let need_v = s.theorem != Theorem::Ab;
    let mut u = Vec::new();
    let mut v = Vec::new();
    for &xi in &s.sources {
        let mut ur = Vec::new();
        let mut vr = Vec::new();
        for &tau in &s.taus {
            let src = SourceEvent::new(xi, tau);
            ur.push(if need_u { Some(forward::forward_u(cs, src, s.n, &s.grid)?) } else { None });
            vr.push(if need_v { Some(forward::forward_v(cs, src, s.n, &s.grid)?) } else { None });
        }
        u.push(ur);
        v.push(vr);
    }
    let psi = if s.theorem == Theorem::Abc && s.include_psi { Some(forward::solve_psi(cs, &s.grid)?) } else { None };
    Ok(Data { u, v, psi })
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Trapezoid weights on the tau grid.
fn trapezoid(taus: &[f64]) -> Vec<f64> {
    let n = taus.len();
    let mut w = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let h = taus[k + 1] - taus[k];
        w[k] += 0.5 * h;
        w[k + 1] += 0.5 * h;
    }
    if n == 1 {
        w[0] = 1.0;
    }
    w
}

fn data_norm(s: &StabilitySetup, a: &Data, b: &Data) -> f64 {
    let g = &s.grid;
    let wt = trapezoid(&s.taus);
    let mut total = 0.0;
    for i in 0..s.sources.len() {
        for (k, w) in wt.iter().enumerate() {
            let mut term = 0.0;
            if let (Some(x), Some(y)) = (&a.u[i][k], &b.u[i][k]) {
                let (o_u, o_ut) = if s.theorem == Theorem::Abc { (2, 1) } else { (1, 0) };
                term += grid_norm_sq(g, &x.nodes, &diff(&x.f, &y.f), o_u).sqrt();
                term += grid_norm_sq(g, &x.nodes, &diff(&x.f_t, &y.f_t), o_ut).sqrt();
                if s.theorem == Theorem::Abc {
                    term += grid_norm_sq(g, &x.nodes, &diff(&x.f_tt, &y.f_tt), 0).sqrt();
                }
            }
            if let (Some(x), Some(y)) = (&a.v[i][k], &b.v[i][k]) {
                term += grid_norm_sq(g, &x.nodes, &diff(&x.f, &y.f), 1).sqrt();
                term += grid_norm_sq(g, &x.nodes, &diff(&x.f_t, &y.f_t), 0).sqrt();
            }
            total += w * term;
        }
    }
    if let (Some(p), Some(q)) = (&a.psi, &b.psi) {
        let all: Vec<usize> = (0..g.len()).collect();
        total += grid_norm_sq(g, &all, &diff(&p.w, &q.w), 2).sqrt();
        total += grid_norm_sq(g, &all, &diff(&p.w_t, &q.w_t), 1).sqrt();
        total += grid_norm_sq(g, &all, &diff(&p.w_tt, &q.w_tt), 0).sqrt();
    }
    total
}

fn coefficient_norm(theorem: Theorem, cs: &CoefficientSet, other: &CoefficientSet) -> f64 {
    let support = cs.bounds().union(&other.bounds());
    let q = VolumeQuad::default();
    match theorem {
        Theorem::Q => space_time_l2(|x, t| [cs.q_value(x, t) - other.q_value(x, t)], support, &q),
        Theorem::Ab => space_time_l2(
            |x, t| {
                let (p, o) = (cs.values(x, t), other.values(x, t));
                [p[0] - o[0], p[1] - o[1], p[2] - o[2], p[3] - o[3]]
            },
            support,
            &q,
        ),
        Theorem::Abc => space_time_l2(
            |x, t| {
                let (p, o) = (cs.curl(x, t), other.curl(x, t));
                [p[0] - o[0], p[1] - o[1], p[2] - o[2], p[3] - o[3], p[4] - o[4], p[5] - o[5], cs.c.value(x, t) - other.c.value(x, t)]
            },
            support,
            &q,
        ),
    }
}

/// Compares fields on a deterministic sample of their joint support.
fn same_on_sample(f: impl Fn([f64; 3], f64) -> [f64; 4], support: Support) -> bool {
    if support.is_empty() {
        return true;
    }
    let r = if support.radius.is_finite() { support.radius } else { 2.0 };
    let (lo, hi) = if support.t_lo.is_finite() && support.t_hi.is_finite() { (support.t_lo, support.t_hi) } else { (0.0, 1.0) };
    halton_ball(256, r).iter().enumerate().all(|(k, &x)| {
        let t = lo + (hi - lo) * ((k as f64 + 0.5) / 256.0);
        let v = f(x, t);
        v.iter().all(|d| d.abs() <= 1e-14)
    })
}

fn check_hypothesis(theorem: Theorem, cs: &CoefficientSet, other: &CoefficientSet) -> Result<()> {
    let support = cs.bounds().union(&other.bounds());
    match theorem {
        Theorem::Q => {
            let ok = same_on_sample(
                |x, t| {
                    let (p, o) = (cs.values(x, t), other.values(x, t));
                    [p[0] - o[0], p[1] - o[1], p[2] - o[2], p[3] - o[3]]
                },
                support,
            );
            if !ok {
                return Err(Error::Usage("q mode needs both coefficient sets to share (a, b)".into()));
            }
        }
        Theorem::Ab => {
            let ok = same_on_sample(|x, t| [cs.q_value(x, t) - other.q_value(x, t), 0.0, 0.0, 0.0], support);
            if !ok {
                return Err(Error::Usage("ab mode needs both coefficient sets to share q".into()));
            }
        }
        Theorem::Abc => {}
    }
    Ok(())
}

/// LHS (coefficient difference) and RHS (data difference) of the chosen
/// theorem for `cs` against each perturbed set, labelled by amplitude.
pub fn stability_report(cs: &CoefficientSet, perturbed: &[(f64, CoefficientSet)], setup: &StabilitySetup) -> Result<StabilityReport> {
    if setup.sources.is_empty() || setup.taus.is_empty() {
        return Err(Error::Usage("stability needs at least one source and one tau".into()));
    }
    if setup.taus.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Usage("the tau grid must be increasing".into()));
    }
    for (_, o) in perturbed {
        check_hypothesis(setup.theorem, cs, o)?;
    }
    let base = collect(cs, setup)?;
    let mut rows = Vec::with_capacity(perturbed.len());
    for (amp, o) in perturbed {
        let d = collect(o, setup)?;
        let lhs = coefficient_norm(setup.theorem, cs, o);
        let rhs = data_norm(setup, &base, &d);
        let ratio = if rhs > 0.0 { lhs / rhs } else if lhs == 0.0 { 0.0 } else { f64::INFINITY };
        rows.push(StabilityRow { amplitude: *amp, lhs, rhs, ratio });
    }
    Ok(StabilityReport { theorem: setup.theorem, rows })
}

/// (a', b') with c' chosen so that q' = q.
pub fn with_q_preserved(cs: &CoefficientSet, a: ScalarField, b: [ScalarField; 3]) -> CoefficientSet {
    // q = c - a_t + div b + a^2 - |b|^2
    let part = |a: &ScalarField, b: &[ScalarField; 3]| {
        let mut terms = vec![(-1.0, a.deriv(3)), (1.0, a.mul(a))];
        for i in 0..3 {
            terms.push((1.0, b[i].deriv(i)));
            terms.push((-1.0, b[i].mul(&b[i])));
        }
        ScalarField::lin(terms)
    };
    let c = ScalarField::lin(vec![(1.0, cs.c.clone()), (1.0, part(&cs.a, &cs.b)), (-1.0, part(&a, &b))]);
    CoefficientSet::new(a, b, c)
}

/// 4x4 direction matrix rows [1, theta_i(x)] as an nalgebra matrix.
pub fn direction_matrix(x: [f64; 3], locations: &[[f64; 3]; 4]) -> Result<Matrix4<f64>> {
    let m = crate::geometry::diverse_matrix(x, locations)?;
    Ok(SMatrix::from_fn(|i, j| m[i][j]))
}

/// Solve M(x)^T z = p for z = (a, b) given four exact values.
pub fn solve_point(x: [f64; 3], locations: &[[f64; 3]; 4], p: [f64; 4]) -> Result<[f64; 4]> {
    let m = direction_matrix(x, locations)?.transpose();
    let z = m.lu().solve(&Vector4::from(p)).ok_or_else(|| Error::Conditioning(format!("singular direction matrix at {x:?}")))?;
    Ok([z[0], z[1], z[2], z[3]])
}
