//! The attenuation amplitude alpha, the transport operator
//! T = d_t + theta . grad - (a + theta . b) + 1/r, its solver, and the
//! progressing-wave amplitude recursions.
//!
//! Ray quantities are computed in optical coordinates y = x - xi,
//! t0 = t - |y|. A ray from the source is then the segment s -> (s w, t0),
//! d_t + theta . grad becomes the radial derivative in y, and the solution
//! of T f = g with zero data at the source is
//!
//!   f(y, t0) = alpha(y, t0) * int_0^1 |y| (g / alpha)(sigma y, t0) d sigma.
//!
//! Taylor jets of the integral in (y, t0) at y = s' w follow from running
//! integrals of the jets of the integrand along the ray: the coefficient of
//! a monomial of y-degree d is s'^-(d+1) int_0^s' s^d c(s) ds.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::fields::{CoefficientSet, PointJet, ScalarField, Support};
use crate::geometry::{spherical_laplacian_of_jet, unit_direction};
use crate::jet::{self, Jet};
use crate::quad::{self, dot, norm, sub, GlRule};
use crate::{Error, Result};

/// Absolute tolerance of scalar ray integrals.
pub const RAY_TOL: f64 = 1e-10;

/// Composite Gauss-Legendre panels used for ray jets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RayQuad {
    /// Panel length inside the coefficient support, as a fraction of the
    /// smallest bump radius.
    pub panel: f64,
    /// Nodes per panel for value integrals; jets of order m use
    /// `nodes + 2 m` (at most 40) since their integrands carry m more
    /// derivatives of the coefficients.
    pub nodes: usize,
}

impl Default for RayQuad {
    fn default() -> Self {
        RayQuad { panel: 0.05, nodes: 12 }
    }
}

impl RayQuad {
    pub fn nodes_for(&self, order: usize) -> usize {
        (self.nodes + 2 * order).min(40)
    }

    /// Coarser panels for bulk grid tables. Quadrature error here must stay
    /// below the data differences the stability report divides by.
    pub fn fast() -> RayQuad {
        RayQuad { panel: 0.1, nodes: 12 }
    }
}

fn gl_rule(n: usize) -> Arc<GlRule> {
    static CACHE: OnceLock<std::sync::Mutex<Vec<Arc<GlRule>>>> = OnceLock::new();
    let m = CACHE.get_or_init(Default::default);
    let mut v = m.lock().unwrap();
    if let Some(r) = v.iter().find(|r| r.len() == n) {
        return r.clone();
    }
    let r = Arc::new(GlRule::new(n));
    v.push(r.clone());
    r
}

/// y-degree of every jet coefficient up to the maximum order.
fn ydeg() -> &'static [usize] {
    static D: OnceLock<Vec<usize>> = OnceLock::new();
    D.get_or_init(|| {
        (0..jet::ncoef(jet::MAX_ORDER))
            .map(|k| {
                let e = jet::exponents(k);
                (e[0] + e[1] + e[2]) as usize
            })
            .collect()
    })
}

/// Jets (in optical coordinates, about a node) of the geometry and the
/// coefficients.
struct NodeData {
    r: Jet,
    rinv: Jet,
    om: [Jet; 3],
    a: Jet,
    b: [Jet; 3],
    q: Jet,
}

/// Jets of ray quantities at an output point, in optical coordinates.
#[derive(Clone, Debug)]
pub struct RayJets {
    /// Ray integral of a + theta . b.
    pub i: Jet,
    pub alpha: Jet,
    /// a_1, ..., a_L.
    pub amps: Vec<Jet>,
}

struct RayGrid {
    s: Vec<f64>,
    /// (start, end, first node index)
    panels: Vec<(f64, f64, usize)>,
    rule: Arc<GlRule>,
}

fn ray_grid(cs: &CoefficientSet, xi: [f64; 3], w: [f64; 3], t0: f64, s_end: f64, rq: &RayQuad, order: usize) -> Option<RayGrid> {
    let (s_in, s_out) = cs.ray_window(xi, w, t0)?;
    if s_in >= s_end {
        return None;
    }
    let mut br: Vec<f64> = cs
        .ray_breaks(xi, w, t0)
        .into_iter()
        .chain([s_out])
        .filter(|&b| b > s_in && b < s_end)
        .collect();
    br.push(s_in);
    br.push(s_end);
    br.sort_by(|a, b| a.partial_cmp(b).unwrap());
    br.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let rule = gl_rule(rq.nodes_for(order));
    let panel = rq.panel * cs.feature_scale().min(1.0);
    let mut s = Vec::new();
    let mut panels = Vec::new();
    for seg in br.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let len = if a >= s_out - 1e-12 { 3.0 * panel } else { panel };
        let k = ((b - a) / len).ceil().max(1.0) as usize;
        for p in 0..k {
            let pa = a + (b - a) * p as f64 / k as f64;
            let pb = a + (b - a) * (p + 1) as f64 / k as f64;
            panels.push((pa, pb, s.len()));
            s.extend(rule.on(pa, pb).map(|(x, _)| x));
        }
    }
    if panels.is_empty() {
        return None;
    }
    Some(RayGrid { s, panels, rule })
}

fn optical_inputs(xi: [f64; 3], y: [f64; 3], t0: f64, order: usize) -> ([Jet; 4], Jet, [Jet; 3]) {
    let yj: [Jet; 3] = std::array::from_fn(|i| Jet::variable(i, y[i], order));
    let r = (yj[0].square() + yj[1].square() + yj[2].square()).sqrt();
    let tj = Jet::variable(3, t0, order) + &r;
    let rinv = r.recip();
    let om: [Jet; 3] = std::array::from_fn(|i| yj[i].times(&rinv));
    let p = [yj[0].add_scalar(xi[0]), yj[1].add_scalar(xi[1]), yj[2].add_scalar(xi[2]), tj];
    (p, r, om)
}

fn node_data(cs: &CoefficientSet, xi: [f64; 3], y: [f64; 3], t0: f64, order: usize) -> NodeData {
    let (p, r, om) = optical_inputs(xi, y, t0, order);
    let a = cs.a.compose_unchecked(&p);
    let b: [Jet; 3] = std::array::from_fn(|i| cs.b[i].compose_unchecked(&p));
    let c = cs.c.compose_unchecked(&p);
    // q = c - a_t + sum d_{x_i} b_i + a^2 - |b|^2, with d_t = d_t0 and
    // d_{x_i} = d_{y_i} - omega_i d_t0
    let q = if order == 0 {
        Jet::constant(cs.q_value([p[0].value(), p[1].value(), p[2].value()], p[3].value()), 0)
    } else {
        let m = order - 1;
        let mut q = c.truncate(m) - a.d(3) + a.square().truncate(m);
        for i in 0..3 {
            q = q + b[i].d(i) - om[i].truncate(m).times(&b[i].d(3)) - b[i].square().truncate(m);
        }
        q
    };
    let rinv = r.recip();
    NodeData { r, rinv, om, a, b, q }
}

impl NodeData {
    fn atilde(&self) -> Jet {
        let mut t = self.a.clone();
        for i in 0..3 {
            t = t + self.om[i].times(&self.b[i]);
        }
        t
    }

    /// L f for an optical jet f; the result has order f.order() - 2.
    fn apply_l(&self, f: &Jet) -> Jet {
        let n = f.order();
        assert!(n >= 2);
        let m = n - 2;
        let ft = f.d(3);
        let ftt = ft.truncate(n - 1);
        let mut out = self.rinv.truncate(m).times(&ft.truncate(m)).scale(2.0);
        let mut grad_part = Jet::zero(n - 1);
        for i in 0..3 {
            let fi = f.d(i);
            out = out - fi.d(i);
            out = out + self.om[i].truncate(m).times(&fi.d(3)).scale(2.0);
            grad_part = grad_part + self.b[i].truncate(n - 1).times(&(fi - self.om[i].truncate(n - 1).times(&ftt)));
        }
        out = out - self.a.truncate(m).times(&ft.truncate(m)).scale(2.0);
        out = out + grad_part.truncate(m).scale(2.0);
        out + self.q.truncate(m).times(&f.truncate(m))
    }
}

/// Level sources for the ray recursion.
enum Source<'a> {
    /// a_k from 2 T a_k = -L a_{k-1} with a_0 = alpha - 1/r (first step uses L alpha).
    Amplitudes(usize),
    /// A single solve T f = g for a given field g.
    Given(&'a ScalarField),
}

/// Running-integral transform: for node jets h, the jets of
/// int_0^1 h(sigma y) d sigma at every node and at each output point.
fn cumulative(grid: &RayGrid, h: &[Jet], outs: &[f64]) -> (Vec<Jet>, Vec<Jet>) {
    let o = h[0].order();
    let nc = jet::ncoef(o);
    let yd = &ydeg()[..nc];
    let n = grid.rule.len();
    let maxd = o;
    let run: Vec<Vec<f64>> = grid.rule.x.iter().map(|&z| grid.rule.running_row(z)).collect();
    let mut acc = vec![0.0; nc];
    let mut at_nodes = Vec::with_capacity(grid.s.len());
    let mut at_outs = vec![Jet::zero(o); outs.len()];
    let mut oi = 0;
    // outputs before the first node get zero
    while oi < outs.len() && outs[oi] <= grid.panels[0].0 {
        oi += 1;
    }
    let mut hw = vec![vec![0.0; nc]; n];
    for &(pa, pb, first) in &grid.panels {
        let hl = 0.5 * (pb - pa);
        for l in 0..n {
            let s = grid.s[first + l];
            let mut pw = [1.0; jet::MAX_ORDER + 2];
            for d in 1..=maxd + 1 {
                pw[d] = pw[d - 1] * s;
            }
            let c = h[first + l].coeffs();
            for k in 0..nc {
                hw[l][k] = pw[yd[k]] * c[k];
            }
        }
        let emit = |row: &[f64], s: f64, acc: &[f64]| {
            let mut v = vec![0.0; nc];
            let mut pw = [1.0; jet::MAX_ORDER + 2];
            for d in 1..=maxd + 1 {
                pw[d] = pw[d - 1] * s;
            }
            for k in 0..nc {
                let mut j = 0.0;
                for l in 0..n {
                    j += row[l] * hw[l][k];
                }
                v[k] = (acc[k] + hl * j) / pw[yd[k] + 1];
            }
            Jet::from_coeffs(o, &v)
        };
        for (i, row) in run.iter().enumerate() {
            at_nodes.push(emit(row, grid.s[first + i], &acc));
        }
        while oi < outs.len() && outs[oi] <= pb {
            let z = (2.0 * outs[oi] - pa - pb) / (pb - pa);
            at_outs[oi] = emit(&grid.rule.running_row(z), outs[oi], &acc);
            oi += 1;
        }
        for k in 0..nc {
            let mut j = 0.0;
            for l in 0..n {
                j += grid.rule.w[l] * hw[l][k];
            }
            acc[k] += hl * j;
        }
    }
    while oi < outs.len() {
        let s = outs[oi];
        let v: Vec<f64> = (0..nc).map(|k| acc[k] / s.powi(yd[k] as i32 + 1)).collect();
        at_outs[oi] = Jet::from_coeffs(o, &v);
        oi += 1;
    }
    (at_nodes, at_outs)
}

/// Ray jets at output distances `outs` (ascending, > 0) along direction
/// `w` on the cone with vertex (xi, t0). Output jets have order `m`.
fn ray_jets(
    cs: &CoefficientSet,
    xi: [f64; 3],
    w: [f64; 3],
    t0: f64,
    outs: &[f64],
    m: usize,
    source: Source<'_>,
    rq: &RayQuad,
) -> Result<Vec<RayJets>> {
    let levels = match source {
        Source::Amplitudes(l) => l,
        Source::Given(_) => 1,
    };
    let extra = match source {
        Source::Amplitudes(_) => 2 * levels,
        Source::Given(_) => 0,
    };
    let ord = m + extra;
    let cap = cs.smoothness();
    if ord > cap || ord > jet::MAX_ORDER {
        return Err(Error::Capability(format!(
            "ray jets of order {ord} (output order {m}, {levels} levels) exceed coefficient smoothness {cap}"
        )));
    }
    if let Source::Given(g) = source {
        if m > g.smoothness() {
            return Err(Error::Capability(format!("source term has smoothness {} < {m}", g.smoothness())));
        }
    }
    let s_end = outs.iter().cloned().fold(0.0, f64::max);
    let trivial = |s: f64| {
        let y = [s * w[0], s * w[1], s * w[2]];
        let (_, r, _) = optical_inputs(xi, y, t0, m);
        RayJets { i: Jet::zero(m), alpha: r.recip(), amps: vec![Jet::zero(m); levels] }
    };
    let grid = match ray_grid(cs, xi, w, t0, s_end, rq, ord) {
        Some(g) => g,
        None => return Ok(outs.iter().map(|&s| trivial(s)).collect()),
    };
    let nodes: Vec<NodeData> = grid
        .s
        .iter()
        .map(|&s| node_data(cs, xi, [s * w[0], s * w[1], s * w[2]], t0, ord))
        .collect();
    let at: Vec<Jet> = nodes.iter().map(|n| n.atilde()).collect();
    let (gi_nodes, gi_outs) = cumulative(&grid, &at, outs);
    let alpha: Vec<Jet> = nodes
        .iter()
        .zip(&gi_nodes)
        .map(|(n, g)| n.r.times(g).exp().times(&n.rinv))
        .collect();
    let out_geo: Vec<(Jet, Jet)> = outs
        .iter()
        .map(|&s| {
            let (_, r, _) = optical_inputs(xi, [s * w[0], s * w[1], s * w[2]], t0, m);
            let rinv = r.recip();
            (r, rinv)
        })
        .collect();
    let mut res: Vec<RayJets> = out_geo
        .iter()
        .zip(&gi_outs)
        .map(|((r, rinv), g)| {
            let i = r.times(&g.truncate(m));
            let alpha = i.exp().times(rinv);
            RayJets { i, alpha, amps: Vec::with_capacity(levels) }
        })
        .collect();
    let mut prev: Vec<Jet> = alpha.clone();
    for k in 1..=levels {
        let h: Vec<Jet> = match source {
            Source::Amplitudes(_) => nodes
                .iter()
                .zip(&prev)
                .zip(&alpha)
                .map(|((n, f), al)| {
                    let g = n.apply_l(f).scale(-0.5);
                    g.div(&al.truncate(g.order()))
                })
                .collect(),
            Source::Given(g) => grid
                .s
                .iter()
                .zip(&alpha)
                .map(|(&s, al)| {
                    let (p, _, _) = optical_inputs(xi, [s * w[0], s * w[1], s * w[2]], t0, m);
                    g.compose_unchecked(&p).div(&al.truncate(m))
                })
                .collect(),
        };
        let (gn, go) = cumulative(&grid, &h, outs);
        if k < levels {
            prev = nodes
                .iter()
                .zip(&gn)
                .zip(&alpha)
                .map(|((n, g), al)| al.truncate(g.order()).times(&n.r.truncate(g.order()).times(g)))
                .collect();
        }
        for (rj, (g, (r, _))) in res.iter_mut().zip(go.iter().zip(&out_geo)) {
            let v = rj.alpha.times(&r.times(&g.truncate(m)));
            rj.amps.push(v);
        }
    }
    Ok(res)
}

/// Convert an optical jet at (x, t) into a physical jet.
pub fn optical_to_physical(j: &Jet, xi: [f64; 3], x: [f64; 3], t: f64) -> Jet {
    let m = j.order();
    if m == 0 {
        return j.clone();
    }
    let p = Jet::point([x[0], x[1], x[2], t], m);
    let y: [Jet; 3] = std::array::from_fn(|i| p[i].add_scalar(-xi[i]));
    let r = (y[0].square() + y[1].square() + y[2].square()).sqrt();
    let t0 = &p[3] - &r;
    j.compose(&[y[0].clone(), y[1].clone(), y[2].clone(), t0])
}

fn ray_of(x: [f64; 3], t: f64, xi: [f64; 3]) -> Result<([f64; 3], f64, f64)> {
    let (w, r) = unit_direction(x, xi)?;
    Ok((w, r, t - r))
}

/// Physical jets at (x, t): ray integral, alpha and L amplitude levels.
pub fn point_jets(cs: &CoefficientSet, xi: [f64; 3], x: [f64; 3], t: f64, m: usize, levels: usize, rq: &RayQuad) -> Result<RayJets> {
    let (w, r, t0) = ray_of(x, t, xi)?;
    let rj = ray_jets(cs, xi, w, t0, &[r], m, Source::Amplitudes(levels), rq)?.remove(0);
    Ok(RayJets {
        i: optical_to_physical(&rj.i, xi, x, t),
        alpha: optical_to_physical(&rj.alpha, xi, x, t),
        amps: rj.amps.iter().map(|a| optical_to_physical(a, xi, x, t)).collect(),
    })
}

/// Values of alpha and of a_1..a_L along one ray of the cone with vertex
/// (xi, t0), at distances `rs` (ascending).
pub fn ray_values(cs: &CoefficientSet, xi: [f64; 3], w: [f64; 3], t0: f64, rs: &[f64], levels: usize, rq: &RayQuad) -> Result<Vec<RayJets>> {
    ray_jets(cs, xi, w, t0, rs, 0, Source::Amplitudes(levels), rq)
}

/// Like `ray_values` but returning optical jets of order `m`.
pub fn ray_values_jets(
    cs: &CoefficientSet,
    xi: [f64; 3],
    w: [f64; 3],
    t0: f64,
    rs: &[f64],
    m: usize,
    levels: usize,
    rq: &RayQuad,
) -> Result<Vec<RayJets>> {
    ray_jets(cs, xi, w, t0, rs, m, Source::Amplitudes(levels), rq)
}

fn check_source(cs: &CoefficientSet, xi: [f64; 3]) -> Result<()> {
    let s = cs.bounds();
    if !s.is_empty() && norm(xi) <= s.radius {
        return Err(Error::Domain(format!(
            "source {xi:?} lies within the coefficient ball of radius {}",
            s.radius
        )));
    }
    Ok(())
}

/// Scalar ray integral of a + theta . b from the source to (x, t).
pub fn ray_integral(cs: &CoefficientSet, xi: [f64; 3], x: [f64; 3], t: f64) -> Result<f64> {
    let (w, r, t0) = ray_of(x, t, xi)?;
    let Some((lo, hi)) = cs.ray_window(xi, w, t0) else { return Ok(0.0) };
    let hi = hi.min(r);
    if lo >= hi {
        return Ok(0.0);
    }
    let f = |s: f64| {
        let p = [xi[0] + s * w[0], xi[1] + s * w[1], xi[2] + s * w[2]];
        let tt = t0 + s;
        cs.a.value(p, tt) + w[0] * cs.b[0].value(p, tt) + w[1] * cs.b[1].value(p, tt) + w[2] * cs.b[2].value(p, tt)
    };
    Ok(quad::integrate_split(f, lo, hi, &cs.ray_breaks(xi, w, t0), RAY_TOL))
}

/// alpha(x, t; xi) = exp(int_0^r (a + theta . b)(x - s theta, t - s) ds) / r.
pub fn alpha(cs: &CoefficientSet, xi: [f64; 3], x: [f64; 3], t: f64) -> Result<f64> {
    let r = norm(sub(x, xi));
    Ok(ray_integral(cs, xi, x, t)?.exp() / r)
}

/// T f = f_t + theta . grad f - (a + theta . b) f + f / r.
pub fn apply_t(cs: &CoefficientSet, xi: [f64; 3], f: &ScalarField, x: [f64; 3], t: f64) -> Result<f64> {
    let j = f.jet(x, t, 1)?;
    t_of_jet(cs, xi, &j, x, t)
}

/// T applied to a physical jet of order >= 1.
pub fn t_of_jet(cs: &CoefficientSet, xi: [f64; 3], j: &Jet, x: [f64; 3], t: f64) -> Result<f64> {
    let (w, r) = unit_direction(x, xi)?;
    let c = j.coeffs();
    let at = cs.a.value(x, t) + (0..3).map(|i| w[i] * cs.b[i].value(x, t)).sum::<f64>();
    Ok(c[4] + w[0] * c[1] + w[1] * c[2] + w[2] * c[3] - at * c[0] + c[0] / r)
}

/// alpha as a field (values by adaptive quadrature, derivatives from ray jets).
#[derive(Clone)]
pub struct AttenuationField {
    cs: CoefficientSet,
    xi: [f64; 3],
    rq: RayQuad,
}

impl AttenuationField {
    pub fn new(cs: &CoefficientSet, xi: [f64; 3]) -> Result<AttenuationField> {
        check_source(cs, xi)?;
        Ok(AttenuationField { cs: cs.clone(), xi, rq: RayQuad::default() })
    }

    pub fn with_quad(mut self, rq: RayQuad) -> Self {
        self.rq = rq;
        self
    }

    pub fn value(&self, x: [f64; 3], t: f64) -> Result<f64> {
        alpha(&self.cs, self.xi, x, t)
    }

    pub fn jet(&self, x: [f64; 3], t: f64, order: usize) -> Result<Jet> {
        Ok(point_jets(&self.cs, self.xi, x, t, order, 0, &self.rq)?.alpha)
    }

    pub fn field(&self) -> ScalarField {
        ScalarField::from_point_jet(Arc::new(self.clone()), Support::UNBOUNDED, self.cs.smoothness())
    }
}

impl PointJet for AttenuationField {
    fn jet_at(&self, x: [f64; 3], t: f64, order: usize) -> Jet {
        self.jet(x, t, order).unwrap_or_else(|_| Jet::constant(f64::NAN, order))
    }

    fn value(&self, x: [f64; 3], t: f64) -> f64 {
        AttenuationField::value(self, x, t).unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmplitudeKind {
    /// a_k of the Heaviside expansion of U.
    Heaviside,
    /// b_k of the expansion of V; b_k = a_{k+1}.
    Delta,
}

/// Progressing-wave amplitudes as evaluable fields.
#[derive(Clone)]
pub struct AmplitudeSequence {
    pub kind: AmplitudeKind,
    pub n: usize,
    pub xi: [f64; 3],
    cs: CoefficientSet,
    rq: RayQuad,
}

impl std::fmt::Debug for AmplitudeSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AmplitudeSequence").field("kind", &self.kind).field("n", &self.n).field("xi", &self.xi).finish()
    }
}

impl AmplitudeSequence {
    pub fn with_quad(mut self, rq: RayQuad) -> Self {
        self.rq = rq;
        self
    }

    fn level(&self, k: usize) -> usize {
        match self.kind {
            AmplitudeKind::Heaviside => k,
            AmplitudeKind::Delta => k + 1,
        }
    }

    /// Physical jet of member k at (x, t).
    pub fn jet(&self, k: usize, x: [f64; 3], t: f64, order: usize) -> Result<Jet> {
        if k > self.n {
            return Err(Error::Usage(format!("member {k} requested from a sequence of order {}", self.n)));
        }
        let l = self.level(k);
        let rj = point_jets(&self.cs, self.xi, x, t, order, l, &self.rq)?;
        Ok(if l == 0 {
            let y = Jet::point([x[0], x[1], x[2], t], order);
            let yy = (y[0].add_scalar(-self.xi[0]).square()
                + y[1].add_scalar(-self.xi[1]).square()
                + y[2].add_scalar(-self.xi[2]).square())
            .sqrt();
            rj.alpha - yy.recip()
        } else {
            rj.amps[l - 1].clone()
        })
    }

    pub fn value(&self, k: usize, x: [f64; 3], t: f64) -> Result<f64> {
        Ok(self.jet(k, x, t, 0)?.value())
    }

    /// All members at (x, t) from a single ray pass.
    pub fn values(&self, x: [f64; 3], t: f64) -> Result<Vec<f64>> {
        let top = self.level(self.n);
        let rj = point_jets(&self.cs, self.xi, x, t, 0, top, &self.rq)?;
        let r = norm(sub(x, self.xi));
        let mut all = vec![rj.alpha.value() - 1.0 / r];
        all.extend(rj.amps.iter().map(|a| a.value()));
        Ok(match self.kind {
            AmplitudeKind::Heaviside => all,
            AmplitudeKind::Delta => all[1..].to_vec(),
        })
    }

    pub fn member(&self, k: usize) -> ScalarField {
        let cap = self.cs.smoothness().saturating_sub(2 * self.level(k));
        ScalarField::from_point_jet(Arc::new(Member { seq: self.clone(), k }), Support::UNBOUNDED, cap)
    }
}

struct Member {
    seq: AmplitudeSequence,
    k: usize,
}

impl PointJet for Member {
    fn jet_at(&self, x: [f64; 3], t: f64, order: usize) -> Jet {
        self.seq.jet(self.k, x, t, order).unwrap_or_else(|_| Jet::constant(f64::NAN, order))
    }
}

fn check_levels(cs: &CoefficientSet, levels: usize) -> Result<()> {
    if 2 * levels > cs.smoothness() {
        return Err(Error::Capability(format!(
            "{levels} amplitude levels need {} derivatives, coefficients provide {}",
            2 * levels,
            cs.smoothness()
        )));
    }
    Ok(())
}

/// a_0 = alpha - 1/r, 2 T a_1 = -(L a_0 + M(1/r)), 2 T a_k = -L a_{k-1}.
pub fn heaviside_amplitudes(cs: &CoefficientSet, xi: [f64; 3], n: usize) -> Result<AmplitudeSequence> {
    check_source(cs, xi)?;
    check_levels(cs, n)?;
    Ok(AmplitudeSequence { kind: AmplitudeKind::Heaviside, n, xi, cs: cs.clone(), rq: RayQuad::default() })
}

/// The delta coefficient f = alpha - 1/r and b_0..b_N with
/// T b_0 = -L alpha / 2, T b_k = -L b_{k-1} / 2.
pub fn delta_amplitudes(cs: &CoefficientSet, xi: [f64; 3], n: usize) -> Result<(ScalarField, AmplitudeSequence)> {
    check_source(cs, xi)?;
    check_levels(cs, n + 1)?;
    let seq = AmplitudeSequence { kind: AmplitudeKind::Delta, n, xi, cs: cs.clone(), rq: RayQuad::default() };
    let h = heaviside_amplitudes(cs, xi, 0)?;
    Ok((h.member(0), seq))
}

struct TransportSolution {
    cs: CoefficientSet,
    xi: [f64; 3],
    g: ScalarField,
    rq: RayQuad,
}

impl TransportSolution {
    fn eval(&self, x: [f64; 3], t: f64, order: usize) -> Result<Jet> {
        let (w, r, t0) = ray_of(x, t, self.xi)?;
        // the solution vanishes until the ray meets supp g
        let start = match self.g.ray_window(self.xi, w, t0) {
            None => return Ok(Jet::zero(order)),
            Some((lo, _)) => lo,
        };
        if start >= r {
            return Ok(Jet::zero(order));
        }
        let window_cs = combined_window(&self.cs, &self.g);
        let rj = ray_jets(&window_cs, self.xi, w, t0, &[r], order, Source::Given(&self.g), &self.rq)?.remove(0);
        Ok(optical_to_physical(&rj.amps[0], self.xi, x, t))
    }
}

/// Coefficient set with the a, b of `cs` and c replaced by g, so that ray
/// windows and breakpoints cover both supports. Only a and b enter a
/// transport solve.
fn combined_window(cs: &CoefficientSet, g: &ScalarField) -> CoefficientSet {
    CoefficientSet::new(cs.a.clone(), cs.b.clone(), g.clone())
}

impl PointJet for TransportSolution {
    fn jet_at(&self, x: [f64; 3], t: f64, order: usize) -> Jet {
        self.eval(x, t, order).unwrap_or_else(|_| Jet::constant(f64::NAN, order))
    }
}

/// f with T f = g and f = 0 near the source axis:
/// f(r theta, t0 + r) = alpha int_0^r (g / alpha)(s theta, t0 + s) ds.
pub fn solve_transport(cs: &CoefficientSet, xi: [f64; 3], g: &ScalarField) -> Result<ScalarField> {
    check_source(cs, xi)?;
    if g.is_zero() {
        return Ok(ScalarField::zero());
    }
    let gs = g.support();
    if !(gs.radius.is_finite() && norm(xi) > gs.radius) {
        return Err(Error::Precondition(format!(
            "source term must vanish near the source axis; its support radius {} reaches xi = {xi:?}",
            gs.radius
        )));
    }
    let sol = TransportSolution { cs: cs.clone(), xi, g: g.clone(), rq: RayQuad::default() };
    let p = cs.smoothness().min(g.smoothness());
    Ok(ScalarField::from_point_jet(Arc::new(sol), Support::UNBOUNDED, p))
}

/// Right-hand side of the L alpha decomposition
///   alpha (d_t - theta . grad)(a + theta . b) - Delta_S alpha + 2 b_perp . grad alpha
///   - (|b_perp|^2 + 2 theta . b / r) alpha + (c - a_t + div b) alpha,
/// returned as (full value, part without the last term).
pub fn l_alpha_parts(cs: &CoefficientSet, xi: [f64; 3], x: [f64; 3], t: f64) -> Result<(f64, f64)> {
    let (w, r) = unit_direction(x, xi)?;
    let aj = point_jets(cs, xi, x, t, 2, 0, &RayQuad::default())?.alpha;
    Ok(l_alpha_from_jet(cs, &aj, xi, x, t, w, r))
}

pub(crate) fn l_alpha_from_jet(cs: &CoefficientSet, aj: &Jet, xi: [f64; 3], x: [f64; 3], t: f64, w: [f64; 3], r: f64) -> (f64, f64) {
    let al = aj.value();
    let ga = [aj.coeffs()[1], aj.coeffs()[2], aj.coeffs()[3]];
    let (_, da) = cs.a.d1(x, t);
    let bd: Vec<(f64, [f64; 4])> = cs.b.iter().map(|f| f.d1(x, t)).collect();
    let b = [bd[0].0, bd[1].0, bd[2].0];
    let tb = dot(w, b);
    // (d_t - theta . grad)(a + theta . b); theta . grad theta = 0
    let mut dt_part = da[3] - (0..3).map(|i| w[i] * da[i]).sum::<f64>();
    for j in 0..3 {
        dt_part += w[j] * bd[j].1[3];
        for i in 0..3 {
            dt_part -= w[i] * w[j] * bd[j].1[i];
        }
    }
    let bperp = [b[0] - tb * w[0], b[1] - tb * w[1], b[2] - tb * w[2]];
    let ds = spherical_laplacian_of_jet(aj, sub(x, xi));
    let gauge = al * dt_part - ds + 2.0 * dot(bperp, ga) - (dot(bperp, bperp) + 2.0 * tb / r) * al;
    let divb: f64 = (0..3).map(|i| bd[i].1[i]).sum();
    let zeroth = cs.c.value(x, t) - da[3] + divb;
    (gauge + zeroth * al, gauge)
}

/// alpha and the gauge part of L alpha (see `l_alpha_parts`) at the
/// points xi + r w, t0 + r of one ray, in a single pass.
pub fn l_alpha_gauge_along_ray(cs: &CoefficientSet, xi: [f64; 3], w: [f64; 3], t0: f64, rs: &[f64], rq: &RayQuad) -> Result<Vec<(f64, f64)>> {
    let jets = ray_values_jets(cs, xi, w, t0, rs, 2, 0, rq)?;
    Ok(rs
        .iter()
        .zip(jets)
        .map(|(&r, rj)| {
            let x = [xi[0] + r * w[0], xi[1] + r * w[1], xi[2] + r * w[2]];
            let aj = optical_to_physical(&rj.alpha, xi, x, t0 + r);
            (aj.value(), l_alpha_from_jet(cs, &aj, xi, x, t0 + r, w, r).1)
        })
        .collect())
}

/// The decomposed form of L alpha at (x, t).
pub fn l_alpha_decomposed(cs: &CoefficientSet, xi: [f64; 3], x: [f64; 3], t: f64) -> Result<f64> {
    Ok(l_alpha_parts(cs, xi, x, t)?.0)
}

/// L alpha evaluated directly from second-order jets of alpha.
pub fn l_alpha_direct(cs: &CoefficientSet, xi: [f64; 3], x: [f64; 3], t: f64) -> Result<f64> {
    let aj = point_jets(cs, xi, x, t, 2, 0, &RayQuad::default())?.alpha;
    Ok(crate::fields::l_of_jet(cs, &aj, x, t))
}

struct GaugePhi {
    cs: CoefficientSet,
    xi: [f64; 3],
}

impl PointJet for GaugePhi {
    fn jet_at(&self, x: [f64; 3], t: f64, order: usize) -> Jet {
        if norm(sub(x, self.xi)) == 0.0 {
            return Jet::zero(order);
        }
        match point_jets(&self.cs, self.xi, x, t, order, 0, &RayQuad::default()) {
            Ok(rj) => rj.i.scale(-1.0),
            Err(_) => Jet::constant(f64::NAN, order),
        }
    }

    fn value(&self, x: [f64; 3], t: f64) -> f64 {
        if norm(sub(x, self.xi)) == 0.0 {
            return 0.0;
        }
        -ray_integral(&self.cs, self.xi, x, t).unwrap_or(f64::NAN)
    }
}

/// phi(x, t) = -int_0^{|x - xi4|} (a + theta_4 . b)(x - s theta_4, t - s) ds.
pub fn gauge_phi(cs: &CoefficientSet, xi4: [f64; 3]) -> Result<ScalarField> {
    let ab = CoefficientSet::new(cs.a.clone(), cs.b.clone(), ScalarField::zero());
    if !ab.has_ab() {
        return Ok(ScalarField::zero());
    }
    let s = ab.bounds();
    if norm(xi4) <= s.radius {
        return Err(Error::Domain(format!(
            "xi4 = {xi4:?} lies inside the support cylinder of (a, b) (radius {})",
            s.radius
        )));
    }
    Ok(ScalarField::from_point_jet(Arc::new(GaugePhi { cs: ab.clone(), xi: xi4 }), Support::UNBOUNDED, ab.smoothness()))
}
