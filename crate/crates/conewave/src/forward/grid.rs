//! Uniform box grids and the explicit leapfrog solver for
//! w_tt - Delta w - 2 a w_t + 2 b . grad w + q w = F with zero data.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fields::CoefficientSet;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Resolution {
    Coarse,
    #[default]
    Default,
    Fine,
}

impl Resolution {
    /// Cells per box side for the forward pipelines.
    pub fn cells(self) -> usize {
        match self {
            Resolution::Coarse => 24,
            Resolution::Default => 32,
            Resolution::Fine => 48,
        }
    }

    pub fn parse(s: &str) -> Result<Resolution> {
        match s {
            "coarse" => Ok(Resolution::Coarse),
            "default" => Ok(Resolution::Default),
            "fine" => Ok(Resolution::Fine),
            _ => Err(Error::Config(format!("unknown resolution {s:?} (coarse, default, fine)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum SpaceOrder {
    #[default]
    #[serde(rename = "2")]
    Second,
    #[serde(rename = "4")]
    Fourth,
}

/// The box [-l, l]^3 with `n` cells per side, stepped to `horizon`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub l: f64,
    pub n: usize,
    pub horizon: f64,
    /// Fraction of the stability limit used for the time step.
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Explicit time step; overrides `cfl` and must satisfy the limit.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub order: SpaceOrder,
}

fn default_cfl() -> f64 {
    0.9
}

impl GridSpec {
    pub fn new(l: f64, n: usize, horizon: f64) -> GridSpec {
        GridSpec { l, n, horizon, cfl: 0.9, dt: None, order: SpaceOrder::Second }
    }

    /// Box just large enough for smooth parts generated by coefficients in
    /// the ball of radius `radius`: l = radius + horizon + margin cells.
    pub fn for_support(radius: f64, horizon: f64, n: usize) -> GridSpec {
        let margin = 3.0;
        let l = (radius + horizon) / (1.0 - 2.0 * margin / n as f64);
        GridSpec::new(l, n, horizon)
    }

    pub fn with_order(mut self, order: SpaceOrder) -> GridSpec {
        self.order = order;
        self
    }

    pub fn h(&self) -> f64 {
        2.0 * self.l / self.n as f64
    }

    /// Nodes per side.
    pub fn side(&self) -> usize {
        self.n + 1
    }

    pub fn len(&self) -> usize {
        self.side().pow(3)
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Largest stable step of the scheme divided by h.
    fn limit(&self) -> f64 {
        match self.order {
            SpaceOrder::Second => 1.0 / 3f64.sqrt(),
            SpaceOrder::Fourth => 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l > 0.0) || self.n < 8 || !(self.horizon.is_finite()) {
            return Err(Error::Config(format!("grid needs l > 0 and n >= 8, got l = {}, n = {}", self.l, self.n)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Config(format!("CFL safety factor {} outside (0, 1]", self.cfl)));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || dt > self.limit() * self.h() {
                return Err(Error::Config(format!(
                    "CFL violation: dt = {dt} exceeds the stability limit {} for h = {}",
                    self.limit() * self.h(),
                    self.h()
                )));
            }
        }
        Ok(())
    }

    /// Number of steps and step size covering [t0, horizon].
    pub fn steps_from(&self, t0: f64) -> (usize, f64) {
        let span = self.horizon - t0;
        let dt = self.dt.unwrap_or(self.cfl * self.limit() * self.h());
        let n = (span / dt).ceil().max(1.0) as usize;
        (n, span / n as f64)
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.l + i as f64 * self.h()
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.side() + j) * self.side() + k
    }

    pub fn point(&self, idx: usize) -> [f64; 3] {
        let s = self.side();
        [self.coord(idx / (s * s)), self.coord((idx / s) % s), self.coord(idx % s)]
    }

    /// All node coordinates in index order.
    pub fn points(&self) -> Vec<[f64; 3]> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Width of the frozen boundary layer.
    fn rim(&self) -> usize {
        match self.order {
            SpaceOrder::Second => 1,
            SpaceOrder::Fourth => 2,
        }
    }

    /// Trilinear interpolation of a node field; zero outside the box.
    pub fn interpolate(&self, f: &[f64], x: [f64; 3]) -> f64 {
        let h = self.h();
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for d in 0..3 {
            let z = (x[d] + self.l) / h;
            if z < 0.0 || z > self.n as f64 {
                return 0.0;
            }
            let i = (z.floor() as usize).min(self.n - 1);
            base[d] = i;
            frac[d] = z - i as f64;
        }
        let mut v = 0.0;
        for c in 0..8 {
            let o = [(c >> 2) & 1, (c >> 1) & 1, c & 1];
            let wgt: f64 = (0..3).map(|d| if o[d] == 1 { frac[d] } else { 1.0 - frac[d] }).product();
            v += wgt * f[self.index(base[0] + o[0], base[1] + o[1], base[2] + o[2])];
        }
        v
    }
}

/// Time-T state of a solve.
#[derive(Clone, Debug)]
pub struct FdtdResult {
    pub w: Vec<f64>,
    pub w_t: Vec<f64>,
    pub w_tt: Vec<f64>,
    pub steps: usize,
    pub dt: f64,
}

/// Precomputed coefficient samples at the nodes inside the coefficient ball.
struct CoefNodes {
    idx: Vec<usize>,
    slot: Vec<u32>,
    pts: Vec<[f64; 3]>,
}

impl CoefNodes {
    fn new(cs: &CoefficientSet, g: &GridSpec) -> CoefNodes {
        let mut slot = vec![u32::MAX; g.len()];
        let mut idx = Vec::new();
        let mut pts = Vec::new();
        let b = cs.bounds();
        if !cs.is_zero() && !b.is_empty() {
            for i in 0..g.len() {
                let p = g.point(i);
                if b.radius.is_infinite() || crate::quad::norm(p) < b.radius {
                    slot[i] = idx.len() as u32;
                    idx.push(i);
                    pts.push(p);
                }
            }
        }
        CoefNodes { idx, slot, pts }
    }

    fn sample(&self, cs: &CoefficientSet, t: f64, out: &mut Vec<[f64; 5]>) {
        let b = cs.bounds();
        out.clear();
        if self.idx.is_empty() || t < b.t_lo || t > b.t_hi {
            return;
        }
        *out = self.pts.par_iter().map(|&p| cs.values(p, t)).collect();
    }
}

/// Solves w_tt - Delta w - 2 a w_t + 2 b . grad w + q w = F on the box
/// with zero walls and zero data at `t0`. `rhs(t, out)` writes F(., t) at
/// every node. Returns w, w_t, w_tt at the horizon.
pub fn fdtd_solve(
    cs: &CoefficientSet,
    rhs: &(dyn Fn(f64, &mut [f64]) + Sync),
    grid: &GridSpec,
    t0: f64,
) -> Result<FdtdResult> {
    grid.validate()?;
    let n = grid.len();
    let (steps, dt) = grid.steps_from(t0);
    let coef = CoefNodes::new(cs, grid);
    let mut cvals = Vec::new();
    let mut f = vec![0.0; n];
    let mut prev = vec![0.0; n];
    rhs(t0, &mut f);
    // w(t0 + dt) = dt^2 / 2 F(t0) from zero data
    let mut cur: Vec<f64> = f.iter().map(|v| 0.5 * dt * dt * v).collect();
    freeze_rim(grid, &mut cur);
    let mut next = vec![0.0; n];
    // one step past the horizon for centred w_t and w_tt
    for s in 1..=steps {
        let t = t0 + s as f64 * dt;
        rhs(t, &mut f);
        coef.sample(cs, t, &mut cvals);
        step(grid, &coef, &cvals, &f, &prev, &cur, &mut next, dt);
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    // now prev = w(T), cur = w(T + dt), next = w(T - dt)
    let w = prev;
    let w_t: Vec<f64> = cur.iter().zip(&next).map(|(p, m)| (p - m) / (2.0 * dt)).collect();
    let w_tt: Vec<f64> = (0..n).map(|i| (cur[i] - 2.0 * w[i] + next[i]) / (dt * dt)).collect();
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singularity("leapfrog solution became non-finite".into()));
    }
    Ok(FdtdResult { w, w_t, w_tt, steps, dt })
}

fn freeze_rim(g: &GridSpec, w: &mut [f64]) {
    let s = g.side();
    let r = g.rim();
    for i in 0..s {
        for j in 0..s {
            for k in 0..s {
                if i < r || j < r || k < r || i >= s - r || j >= s - r || k >= s - r {
                    w[g.index(i, j, k)] = 0.0;
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn step(
    g: &GridSpec,
    coef: &CoefNodes,
    cvals: &[[f64; 5]],
    f: &[f64],
    prev: &[f64],
    cur: &[f64],
    next: &mut [f64],
    dt: f64,
) {
    let s = g.side();
    let r = g.rim();
    let h = g.h();
    let ih2 = 1.0 / (h * h);
    let strides = [s * s, s, 1];
    let fourth = g.order == SpaceOrder::Fourth;
    next.par_chunks_mut(s * s).enumerate().for_each(|(i, slab)| {
        if i < r || i >= s - r {
            slab.iter_mut().for_each(|v| *v = 0.0);
            return;
        }
        for j in 0..s {
            for k in 0..s {
                let local = j * s + k;
                if j < r || k < r || j >= s - r || k >= s - r {
                    slab[local] = 0.0;
                    continue;
                }
                let c = i * s * s + local;
                let w0 = cur[c];
                let mut lap = 0.0;
                let mut grad = [0.0; 3];
                for (d, &st) in strides.iter().enumerate() {
                    let (p1, m1) = (cur[c + st], cur[c - st]);
                    if fourth {
                        let (p2, m2) = (cur[c + 2 * st], cur[c - 2 * st]);
                        lap += (-p2 + 16.0 * p1 - 30.0 * w0 + 16.0 * m1 - m2) / 12.0;
                        grad[d] = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
                    } else {
                        lap += p1 - 2.0 * w0 + m1;
                        grad[d] = (p1 - m1) / (2.0 * h);
                    }
                }
                lap *= ih2;
                let (mut a, mut extra) = (0.0, 0.0);
                if !cvals.is_empty() {
                    let sl = coef.slot[c];
                    if sl != u32::MAX {
                        let v = cvals[sl as usize];
                        a = v[0];
                        extra = 2.0 * (v[1] * grad[0] + v[2] * grad[1] + v[3] * grad[2]) + v[4] * w0;
                    }
                }
                let rhs = dt * dt * (f[c] + lap - extra) + 2.0 * w0 - prev[c] - a * dt * prev[c];
                slab[local] = rhs / (1.0 - a * dt);
            }
        }
    });
}

/// Discrete L2 norm over the nodes selected by `mask`.
pub fn l2(g: &GridSpec, f: &[f64], mask: impl Fn(usize) -> bool) -> f64 {
    let h3 = g.h().powi(3);
    let s: f64 = (0..f.len()).filter(|&i| mask(i)).map(|i| f[i] * f[i]).sum();
    (s * h3).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{apply_l, ScalarField};

    #[test]
    fn zero_source_gives_zero() {
        let g = GridSpec::new(1.0, 16, 0.5);
        let r = fdtd_solve(&CoefficientSet::zero(), &|_, f: &mut [f64]| f.fill(0.0), &g, 0.0).unwrap();
        assert!(r.w.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cfl_violation_is_a_config_error() {
        let mut g = GridSpec::new(1.0, 16, 0.5);
        g.dt = Some(g.h());
        let e = fdtd_solve(&CoefficientSet::zero(), &|_, f: &mut [f64]| f.fill(0.0), &g, 0.0).unwrap_err();
        assert!(matches!(e, Error::Config(_)));
    }

    fn mms_error(n: usize, order: SpaceOrder) -> f64 {
        let cs = CoefficientSet::new(
            ScalarField::bump(0.4, [0.1, 0.0, 0.0, 0.5], 0.6, 0.45),
            [ScalarField::bump(0.3, [0.0, 0.1, 0.0, 0.5], 0.6, 0.45), ScalarField::zero(), ScalarField::zero()],
            ScalarField::bump(0.5, [0.0, 0.0, 0.1, 0.5], 0.6, 0.45),
        );
        let ws = ScalarField::bump(1.0, [0.05, -0.05, 0.0, 0.7], 0.55, 0.55);
        let g = GridSpec::new(1.0, n, 1.0).with_order(order);
        let pts = g.points();
        let rhs = |t: f64, f: &mut [f64]| {
            f.par_iter_mut().zip(&pts).for_each(|(v, &p)| {
                *v = if ws.support().contains(p, t) { apply_l(&cs, &ws, p, t).unwrap() } else { 0.0 };
            })
        };
        let r = fdtd_solve(&cs, &rhs, &g, 0.0).unwrap();
        let err: Vec<f64> = pts.iter().zip(&r.w).map(|(&p, w)| w - ws.value(p, 1.0)).collect();
        l2(&g, &err, |_| true)
    }

    #[test]
    fn manufactured_solution_converges_at_second_order() {
        let e: Vec<f64> = [12, 24].iter().map(|&n| mms_error(n, SpaceOrder::Second)).collect();
        let slope = (e[0] / e[1]).log2();
        assert!(slope > 1.6, "{e:?} slope {slope}");
    }
}
