//! Forward solutions U, V for a point source and their traces on t = T.
//!
//! Only smooth parts are gridded. For a source event (xi, tau) the smooth
//! part w (u or v) is split as w = e + P on t >= tau + r, where
//!
//!   e(x, t) = sum_k c_k(x) s^k / k!,   s = t - tau - r,
//!
//! with c_k(x) the amplitudes evaluated on the cone, c_k(x) = a_k(x, tau + r)
//! (or b_k). Since T is tangential to the cone, P vanishes on the cone and
//! P H is the zero-data solution of L (P H) = -(L e + M(1/r)) H (the M(1/r)
//! term only for u), which is solved with the leapfrog scheme.

pub mod dataset;
pub mod grid;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use dataset::{SourceTraces, TraceDataset, TraceRow};
pub use grid::{fdtd_solve, l2, FdtdResult, GridSpec, Resolution, SpaceOrder};

use crate::fields::CoefficientSet;
use crate::geometry::SourceEvent;
use crate::quad::{norm, sub};
use crate::transport::{self, heaviside_amplitudes, delta_amplitudes, RayQuad};
use crate::{Error, Result};

/// Which smooth part is being assembled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Part {
    /// u in U = H / r + u H.
    U,
    /// v in V = alpha delta + v H.
    V,
}

fn check_cone(tau: f64, xi: [f64; 3], x: [f64; 3], t: f64) -> Result<(f64, f64)> {
    let r = norm(sub(x, xi));
    let s = t - tau - r;
    // points on the cone up to round-off count as on it
    if s < -1e-12 * (1.0 + t.abs() + tau.abs() + r) {
        return Err(Error::Domain(format!("(x, t) = ({x:?}, {t}) lies outside the cone region of tau = {tau}")));
    }
    Ok((r, s.max(0.0)))
}

fn powers(s: f64, n: usize) -> Vec<f64> {
    let mut e = vec![1.0; n + 1];
    for k in 1..=n {
        e[k] = e[k - 1] * s / k as f64;
    }
    e
}

/// Truncated expansion sum_0^N a_k(x, t) (t - tau - r)^k / k!.
pub fn expand_u(cs: &CoefficientSet, xi: [f64; 3], tau: f64, n: usize, x: [f64; 3], t: f64) -> Result<f64> {
    let (_, s) = check_cone(tau, xi, x, t)?;
    let a = heaviside_amplitudes(cs, xi, n)?.values(x, t)?;
    Ok(a.iter().zip(powers(s, n)).map(|(a, e)| a * e).sum())
}

/// Truncated expansion sum_0^N b_k(x, t) (t - tau - r)^k / k!.
pub fn expand_v(cs: &CoefficientSet, xi: [f64; 3], tau: f64, n: usize, x: [f64; 3], t: f64) -> Result<f64> {
    let (_, s) = check_cone(tau, xi, x, t)?;
    let (_, seq) = delta_amplitudes(cs, xi, n)?;
    let b = seq.values(x, t)?;
    Ok(b.iter().zip(powers(s, n)).map(|(b, e)| b * e).sum())
}

/// Smooth part sampled on H = {t = T, |x - xi| <= T - tau} at grid nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothTrace {
    pub source: SourceEvent,
    pub nodes: Vec<usize>,
    pub x: Vec<[f64; 3]>,
    pub f: Vec<f64>,
    pub f_t: Vec<f64>,
    pub f_tt: Vec<f64>,
}

impl SmoothTrace {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Cone amplitudes c_k with their gradients and Laplacians.
struct TableNode {
    idx: usize,
    r: f64,
    th: [f64; 3],
    c: Vec<f64>,
    g: Vec<[f64; 3]>,
    lap: Vec<f64>,
    coef: bool,
}

/// c_k and its first and second x-derivatives at one node.
#[derive(Clone, Copy, Default)]
struct TableEntry {
    c: f64,
    g: [f64; 3],
    lap: f64,
}

/// Amplitudes on the cone at every node within `reach` of the source.
///
/// c_k(x) = a_k(x, tau + r) is the amplitude in optical coordinates at
/// fixed t0 = tau, so its x-derivatives are the y-derivatives of the
/// optical ray jets. The bump profiles have large high derivatives near
/// their support edges, which rules out differencing the tables.
fn cone_tables(cs: &CoefficientSet, part: Part, src: SourceEvent, n: usize, grid: &GridSpec, reach: f64, rq: &RayQuad) -> Result<Vec<Vec<TableEntry>>> {
    let levels = match part {
        Part::U => n,
        Part::V => n + 1,
    };
    let cap = cs.bounds().radius + grid.horizon + 2.0 * grid.h();
    let pts = grid.points();
    let entry = |j: &crate::jet::Jet| TableEntry {
        c: j.value(),
        g: [j.coeff([1, 0, 0, 0]), j.coeff([0, 1, 0, 0]), j.coeff([0, 0, 1, 0])],
        lap: 2.0 * (j.coeff([2, 0, 0, 0]) + j.coeff([0, 2, 0, 0]) + j.coeff([0, 0, 2, 0])),
    };
    let vals: Vec<Result<Vec<TableEntry>>> = pts
        .par_iter()
        .map(|&p| {
            let d = sub(p, src.xi);
            let r = norm(d);
            if r > reach || r < 1e-12 || norm(p) > cap {
                return Ok(vec![TableEntry::default(); n + 1]);
            }
            let w = [d[0] / r, d[1] / r, d[2] / r];
            let rj = transport::ray_values_jets(cs, src.xi, w, src.tau, &[r], 2, levels, rq)?.remove(0);
            let mut all: Vec<TableEntry> = Vec::with_capacity(levels + 1);
            // 1/r as an optical jet, to subtract from alpha
            let y: [crate::jet::Jet; 3] = std::array::from_fn(|i| crate::jet::Jet::variable(i, d[i], 2));
            let rinv = (y[0].square() + y[1].square() + y[2].square()).sqrt().recip();
            all.push(entry(&(&rj.alpha - &rinv)));
            all.extend(rj.amps.iter().map(entry));
            Ok(match part {
                Part::U => all,
                Part::V => all[1..].to_vec(),
            })
        })
        .collect();
    let mut out = vec![vec![TableEntry::default(); grid.len()]; n + 1];
    for (i, v) in vals.into_iter().enumerate() {
        for (k, c) in v?.into_iter().enumerate() {
            out[k][i] = c;
        }
    }
    Ok(out)
}

/// Default ray quadrature for grid tables.
pub fn table_quad() -> RayQuad {
    RayQuad::fast()
}

fn assemble(cs: &CoefficientSet, part: Part, src: SourceEvent, n: usize, grid: &GridSpec) -> Result<SmoothTrace> {
    grid.validate()?;
    let bounds = cs.bounds();
    if !bounds.is_empty() {
        src.check_admissible(bounds.radius, 0.0)?;
    }
    let height = grid.horizon - src.tau;
    let h = grid.h();
    let s = grid.side();
    let mut trace = SmoothTrace { source: src, nodes: vec![], x: vec![], f: vec![], f_t: vec![], f_tt: vec![] };
    if height <= 0.0 {
        return Ok(trace);
    }
    let tables = if cs.is_zero() {
        vec![vec![TableEntry::default(); grid.len()]; n + 1]
    } else {
        cone_tables(cs, part, src, n, grid, height + 2.5 * h, &table_quad())?
    };
    let in_coef = |p: [f64; 3]| !bounds.is_empty() && norm(p) < bounds.radius;
    let mut nodes = Vec::new();
    for i in 1..s - 1 {
        for j in 1..s - 1 {
            for k in 1..s - 1 {
                let idx = grid.index(i, j, k);
                let p = grid.point(idx);
                let d = sub(p, src.xi);
                let r = norm(d);
                if r > height || r < 1e-12 {
                    continue;
                }
                let nb = [idx, idx + s * s, idx - s * s, idx + s, idx - s, idx + 1, idx - 1];
                let nonzero = (0..=n).any(|k| nb.iter().any(|&m| tables[k][m].c != 0.0));
                let coef = in_coef(p) && part == Part::U || in_coef(p) && nonzero;
                if !nonzero && !coef {
                    continue;
                }
                let c: Vec<f64> = (0..=n).map(|k| tables[k][idx].c).collect();
                let g: Vec<[f64; 3]> = (0..=n).map(|k| tables[k][idx].g).collect();
                let lap: Vec<f64> = (0..=n).map(|k| tables[k][idx].lap).collect();
                nodes.push(TableNode { idx, r, th: [d[0] / r, d[1] / r, d[2] / r], c, g, lap, coef: in_coef(p) });
            }
        }
    }
    let p_sol = if nodes.is_empty() {
        None
    } else {
        let rmin = nodes.iter().map(|t| t.r).fold(f64::INFINITY, f64::min);
        let t0 = (src.tau + rmin).max(bounds.t_lo).min(grid.horizon);
        let rhs = |t: f64, f: &mut [f64]| {
            let vals: Vec<f64> = nodes.par_iter().map(|nd| source_term(cs, part, src, n, nd, t)).collect();
            f.fill(0.0);
            for (nd, v) in nodes.iter().zip(vals) {
                f[nd.idx] = v;
            }
        };
        Some(fdtd_solve(cs, &rhs, grid, t0)?)
    };
    for idx in 0..grid.len() {
        let p = grid.point(idx);
        let r = norm(sub(p, src.xi));
        if r > height {
            continue;
        }
        let e = powers(height - r, n + 2);
        let (mut f, mut ft, mut ftt) = (0.0, 0.0, 0.0);
        for k in 0..=n {
            let c = tables[k][idx].c;
            f += c * e[k];
            if k >= 1 {
                ft += c * e[k - 1];
            }
            if k >= 2 {
                ftt += c * e[k - 2];
            }
        }
        if let Some(ps) = &p_sol {
            f += ps.w[idx];
            ft += ps.w_t[idx];
            ftt += ps.w_tt[idx];
        }
        trace.nodes.push(idx);
        trace.x.push(p);
        trace.f.push(f);
        trace.f_t.push(ft);
        trace.f_tt.push(ftt);
    }
    Ok(trace)
}

/// -(L e + M(1/r)) at a table node (the M(1/r) term for u only), zero
/// before the cone.
fn source_term(cs: &CoefficientSet, part: Part, src: SourceEvent, n: usize, nd: &TableNode, t: f64) -> f64 {
    let s = t - src.tau - nd.r;
    if s < 0.0 {
        return 0.0;
    }
    let e = powers(s, n);
    let (mut ce, mut ce1, mut lap, mut tg1) = (0.0, 0.0, 0.0, 0.0);
    let mut ge = [0.0; 3];
    for k in 0..=n {
        ce += nd.c[k] * e[k];
        lap += nd.lap[k] * e[k];
        for d in 0..3 {
            ge[d] += nd.g[k][d] * e[k];
        }
        if k >= 1 {
            ce1 += nd.c[k] * e[k - 1];
            tg1 += (0..3).map(|d| nd.th[d] * nd.g[k][d]).sum::<f64>() * e[k - 1];
        }
    }
    let mut lu = -lap + 2.0 * tg1 + 2.0 * ce1 / nd.r;
    if nd.coef {
        let p = [src.xi[0] + nd.r * nd.th[0], src.xi[1] + nd.r * nd.th[1], src.xi[2] + nd.r * nd.th[2]];
        let b = cs.bounds();
        if t >= b.t_lo && t <= b.t_hi {
            let v = cs.values(p, t);
            let bv = [v[1], v[2], v[3]];
            lu += -2.0 * v[0] * ce1 + v[4] * ce;
            for d in 0..3 {
                lu += 2.0 * bv[d] * (ge[d] - nd.th[d] * ce1);
            }
            if part == Part::U {
                let bt: f64 = (0..3).map(|d| bv[d] * nd.th[d]).sum();
                lu += -2.0 * bt / (nd.r * nd.r) + v[4] / nd.r;
            }
        }
    }
    -lu
}

/// Smooth part u of U on the slice t = T.
pub fn forward_u(cs: &CoefficientSet, src: SourceEvent, n: usize, grid: &GridSpec) -> Result<SmoothTrace> {
    assemble(cs, Part::U, src, n, grid)
}

/// Smooth part v of V on the slice t = T.
pub fn forward_v(cs: &CoefficientSet, src: SourceEvent, n: usize, grid: &GridSpec) -> Result<SmoothTrace> {
    assemble(cs, Part::V, src, n, grid)
}

/// v on the cone through (xi, tau): along each direction, samples of
/// v(xi + r w, tau + r) = b_0 at the radii `rs`.
pub fn cone_trace_v(cs: &CoefficientSet, src: SourceEvent, dirs: &[[f64; 3]], rs: &[f64], rq: &RayQuad) -> Result<Vec<Vec<f64>>> {
    let b = cs.bounds();
    if !b.is_empty() {
        src.check_admissible(b.radius, 0.0)?;
    }
    dirs.par_iter()
        .map(|&w| Ok(transport::ray_values(cs, src.xi, w, src.tau, rs, 1, rq)?.iter().map(|j| j.amps[0].value()).collect()))
        .collect()
}

/// u on the cone through (xi, tau): a_0 = alpha - 1/r along each direction.
pub fn cone_trace_u(cs: &CoefficientSet, src: SourceEvent, dirs: &[[f64; 3]], rs: &[f64]) -> Result<Vec<Vec<f64>>> {
    let b = cs.bounds();
    if !b.is_empty() {
        src.check_admissible(b.radius, 0.0)?;
    }
    dirs.par_iter()
        .map(|&w| {
            rs.iter()
                .map(|&r| {
                    let x = [src.xi[0] + r * w[0], src.xi[1] + r * w[1], src.xi[2] + r * w[2]];
                    Ok(transport::alpha(cs, src.xi, x, src.tau + r)? - 1.0 / r)
                })
                .collect()
        })
        .collect()
}

/// The forward map: traces of (u, u_t, u_tt, v, v_t) for every source
/// and activation time.
pub fn forward_map(cs: &CoefficientSet, sources: &[[f64; 3]], taus: &[f64], grid: &GridSpec, n: usize) -> Result<TraceDataset> {
    let mut out = Vec::with_capacity(sources.len());
    for &xi in sources {
        let mut rows = Vec::new();
        for &tau in taus {
            let src = SourceEvent::new(xi, tau);
            let u = forward_u(cs, src, n, grid)?;
            let v = forward_v(cs, src, n, grid)?;
            for i in 0..u.len() {
                rows.push(TraceRow {
                    tau,
                    x: u.x[i],
                    u: u.f[i],
                    u_t: u.f_t[i],
                    u_tt: u.f_tt[i],
                    v: v.f[i],
                    v_t: v.f_t[i],
                });
            }
        }
        out.push(SourceTraces { xi, rows });
    }
    Ok(TraceDataset { grid: *grid, n, preset_hash: preset_hash(cs), sources: out })
}

/// SHA-256 of the coefficient preset, or "unrepresentable" for fields that
/// have no preset form.
pub fn preset_hash(cs: &CoefficientSet) -> String {
    match crate::fields::CoefficientPreset::from_set(cs) {
        Some(p) => crate::io::sha256_hex(serde_json::to_string(&p).unwrap_or_default().as_bytes()),
        None => "unrepresentable".into(),
    }
}

/// psi with box psi = c - a_t + div b, zero for t < 0, and its time
/// derivatives at t = T on the grid.
pub fn solve_psi(cs: &CoefficientSet, grid: &GridSpec) -> Result<FdtdResult> {
    let b = cs.bounds();
    let pts = grid.points();
    let active: Vec<usize> = if b.is_empty() { vec![] } else { (0..grid.len()).filter(|&i| norm(pts[i]) < b.radius).collect() };
    let rhs = |t: f64, f: &mut [f64]| {
        f.fill(0.0);
        if t < b.t_lo || t > b.t_hi {
            return;
        }
        let vals: Vec<f64> = active
            .par_iter()
            .map(|&i| {
                let p = pts[i];
                cs.c.value(p, t) - cs.a.d1(p, t).1[3] + (0..3).map(|d| cs.b[d].d1(p, t).1[d]).sum::<f64>()
            })
            .collect();
        for (&i, v) in active.iter().zip(vals) {
            f[i] = v;
        }
    };
    let t0 = if b.t_lo.is_finite() { b.t_lo.min(grid.horizon) } else { 0.0 };
    fdtd_solve(&CoefficientSet::zero(), &rhs, grid, t0)
}

/// Independent path for u: solve L W = 4 pi H(t - tau) g(x - xi) with a
/// Gaussian g of width `width` for cs and for zero coefficients on the
/// same grid, and return W_cs - W_0 on H.
pub fn mollified_u(cs: &CoefficientSet, src: SourceEvent, grid: &GridSpec, width: f64) -> Result<SmoothTrace> {
    let need = norm(src.xi) + grid.horizon + 1.0;
    if grid.l < need {
        return Err(Error::Config(format!("mollified solve needs a box half-width >= {need}, got {}", grid.l)));
    }
    let pts = grid.points();
    let norm_c = 1.0 / (std::f64::consts::PI.powf(1.5) * width.powi(3));
    let g: Vec<f64> = pts
        .iter()
        .map(|&p| {
            let d = sub(p, src.xi);
            let q = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) / (width * width);
            if q > 40.0 {
                0.0
            } else {
                4.0 * std::f64::consts::PI * norm_c * (-q).exp()
            }
        })
        .collect();
    let rhs = |t: f64, f: &mut [f64]| {
        if t >= src.tau {
            f.copy_from_slice(&g);
        } else {
            f.fill(0.0);
        }
    };
    let t0 = src.tau.min(grid.horizon);
    let w1 = fdtd_solve(cs, &rhs, grid, t0)?;
    let w0 = fdtd_solve(&CoefficientSet::zero(), &rhs, grid, t0)?;
    let height = grid.horizon - src.tau;
    let mut tr = SmoothTrace { source: src, nodes: vec![], x: vec![], f: vec![], f_t: vec![], f_tt: vec![] };
    for (i, &p) in pts.iter().enumerate() {
        if norm(sub(p, src.xi)) <= height {
            tr.nodes.push(i);
            tr.x.push(p);
            tr.f.push(w1.w[i] - w0.w[i]);
            tr.f_t.push(w1.w_t[i] - w0.w_t[i]);
            tr.f_tt.push(w1.w_tt[i] - w0.w_tt[i]);
        }
    }
    Ok(tr)
}

/// Comparison of V with -dU/dtau: relative L2 gap between v and a centred
/// tau-difference of u on the common nodes of H.
pub fn v_versus_u_tau(cs: &CoefficientSet, src: SourceEvent, n: usize, grid: &GridSpec, dtau: f64) -> Result<f64> {
    let v = forward_v(cs, src, n, grid)?;
    let up = forward_u(cs, SourceEvent::new(src.xi, src.tau + dtau), n, grid)?;
    let um = forward_u(cs, SourceEvent::new(src.xi, src.tau - dtau), n, grid)?;
    let get = |tr: &SmoothTrace, idx: usize| tr.nodes.binary_search(&idx).ok().map(|k| tr.f[k]);
    let (mut num, mut den) = (0.0, 0.0);
    for (k, &idx) in v.nodes.iter().enumerate() {
        if let (Some(a), Some(b)) = (get(&up, idx), get(&um, idx)) {
            let d = -(a - b) / (2.0 * dtau);
            num += (v.f[k] - d).powi(2);
            den += v.f[k].powi(2);
        }
    }
    Ok(if den > 0.0 { (num / den).sqrt() } else { num.sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::ScalarField;

    fn small_set() -> CoefficientSet {
        CoefficientSet::new(
            ScalarField::bump(0.3, [0.0, 0.0, 0.0, 0.5], 0.7, 0.45),
            [ScalarField::bump(0.2, [0.1, 0.0, 0.0, 0.5], 0.6, 0.45), ScalarField::zero(), ScalarField::zero()],
            ScalarField::bump(0.5, [0.0, 0.1, 0.0, 0.5], 0.6, 0.45),
        )
    }

    #[test]
    fn zero_coefficients_give_zero_smooth_parts() {
        let g = GridSpec::for_support(1.0, 1.0, 12);
        let u = forward_u(&CoefficientSet::zero(), SourceEvent::new([2.0, 0.0, 0.0], -1.0), 0, &g).unwrap();
        assert!(!u.is_empty() && u.f.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn expansion_on_the_cone_is_alpha_minus_inverse_r() {
        let cs = small_set();
        let xi = [2.0, 0.0, 0.0];
        let x = [-0.3, 0.2, 0.0];
        let tau = 0.5 - norm(sub(x, xi));
        let t = tau + norm(sub(x, xi));
        let e = expand_u(&cs, xi, tau, 2, x, t).unwrap();
        let a = transport::alpha(&cs, xi, x, t).unwrap() - 1.0 / norm(sub(x, xi));
        assert!((e - a).abs() < 1e-7, "{e} {a}");
        assert!(expand_u(&cs, xi, tau, 2, x, t - 0.1).is_err());
    }

    #[test]
    fn traces_vanish_for_late_sources() {
        let cs = small_set();
        let xi = [2.0, 0.0, 0.0];
        let g = GridSpec::for_support(1.0, 1.0, 12);
        let u = forward_u(&cs, SourceEvent::new(xi, 1.0 + 1.0 - 2.0 + 0.05), 0, &g).unwrap();
        assert!(u.f.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn u_is_tau_constant_for_early_sources() {
        let cs = small_set();
        let xi = [2.0, 0.0, 0.0];
        let g = GridSpec::for_support(1.0, 1.0, 12);
        let a = forward_u(&cs, SourceEvent::new(xi, -3.1), 0, &g).unwrap();
        let b = forward_u(&cs, SourceEvent::new(xi, -3.6), 0, &g).unwrap();
        assert!(a.f.iter().any(|&v| v != 0.0));
        for (k, &idx) in a.nodes.iter().enumerate() {
            let j = b.nodes.binary_search(&idx).unwrap();
            assert_eq!(a.f[k], b.f[j]);
        }
    }
}

