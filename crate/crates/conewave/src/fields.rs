//! Smooth coefficient fields on space-time with derivatives of any order up
//! to the jet engine limit, plus the operators built from them.
//!
//! Coordinates are ordered `(x1, x2, x3, t)` everywhere.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::jet::{Jet, MAX_ORDER};
use crate::{Error, Result};

/// Default derivative cap for fields that do not declare one.
pub const DEFAULT_SMOOTHNESS: usize = 6;

/// Spatial ball about the origin times a closed time window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub radius: f64,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl Support {
    pub const UNBOUNDED: Support =
        Support { radius: f64::INFINITY, t_lo: f64::NEG_INFINITY, t_hi: f64::INFINITY };
    pub const EMPTY: Support = Support { radius: 0.0, t_lo: f64::INFINITY, t_hi: f64::NEG_INFINITY };

    pub fn new(radius: f64, t_lo: f64, t_hi: f64) -> Support {
        Support { radius, t_lo, t_hi }
    }

    pub fn is_empty(&self) -> bool {
        self.radius <= 0.0 || self.t_lo > self.t_hi
    }

    /// Open interior test: points on the boundary count as outside.
    pub fn contains(&self, x: [f64; 3], t: f64) -> bool {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        r2 < self.radius * self.radius && t >= self.t_lo && t <= self.t_hi
    }

    pub fn union(&self, o: &Support) -> Support {
        if self.is_empty() {
            return *o;
        }
        if o.is_empty() {
            return *self;
        }
        Support {
            radius: self.radius.max(o.radius),
            t_lo: self.t_lo.min(o.t_lo),
            t_hi: self.t_hi.max(o.t_hi),
        }
    }

    pub fn within(&self, o: &Support) -> bool {
        self.is_empty()
            || (self.radius <= o.radius + 1e-12 && self.t_lo >= o.t_lo - 1e-12 && self.t_hi <= o.t_hi + 1e-12)
    }

    /// Parameter interval on the ray s -> (xi + s w, t0 + s), s >= 0, where
    /// the ray can be inside the support.
    pub fn ray_window(&self, xi: [f64; 3], w: [f64; 3], t0: f64) -> Option<(f64, f64)> {
        if self.is_empty() {
            return None;
        }
        let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
        if self.radius.is_finite() {
            let (s1, s2) = sphere_hits(xi, w, [0.0; 3], self.radius)?;
            lo = lo.max(s1);
            hi = hi.min(s2);
        }
        lo = lo.max(self.t_lo - t0);
        hi = hi.min(self.t_hi - t0);
        (hi > lo).then_some((lo, hi))
    }
}

/// Roots of |p + s w - c| = rad, if the line meets the sphere.
fn sphere_hits(p: [f64; 3], w: [f64; 3], c: [f64; 3], rad: f64) -> Option<(f64, f64)> {
    let d = [p[0] - c[0], p[1] - c[1], p[2] - c[2]];
    let bq = w[0] * d[0] + w[1] * d[1] + w[2] * d[2];
    let cq = d[0] * d[0] + d[1] * d[1] + d[2] * d[2] - rad * rad;
    let disc = bq * bq - cq;
    if disc <= 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    Some((-bq - sq, -bq + sq))
}

/// A * beta(|x - c| / rx) * beta((t - ct) / rt) with beta(s) = exp(1 - 1/(1 - s^2)).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    pub amplitude: f64,
    pub center: [f64; 4],
    pub rx: f64,
    pub rt: f64,
}

// beta as a function of rho = s^2, with its first two rho-derivatives
fn beta_rho(rho: f64) -> (f64, f64, f64) {
    if rho >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let u = 1.0 / (1.0 - rho);
    let b = (1.0 - u).exp();
    let u2 = u * u;
    (b, -u2 * b, b * (u2 * u2 - 2.0 * u2 * u))
}

fn beta_jet(rho: &Jet) -> Jet {
    let w = rho.scale(-1.0).add_scalar(1.0).recip();
    w.scale(-1.0).add_scalar(1.0).exp()
}

impl Bump {
    pub fn new(amplitude: f64, center: [f64; 4], rx: f64, rt: f64) -> Bump {
        Bump { amplitude, center, rx, rt }
    }

    pub fn support(&self) -> Support {
        let c = self.center;
        Support {
            radius: (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt() + self.rx,
            t_lo: c[3] - self.rt,
            t_hi: c[3] + self.rt,
        }
    }

    fn rhos(&self, x: [f64; 3], t: f64) -> (f64, f64) {
        let c = self.center;
        let d2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) + (x[2] - c[2]).powi(2);
        (d2 / (self.rx * self.rx), ((t - c[3]) / self.rt).powi(2))
    }

    pub fn value(&self, x: [f64; 3], t: f64) -> f64 {
        let (rx, rt) = self.rhos(x, t);
        if rx >= 1.0 || rt >= 1.0 {
            return 0.0;
        }
        self.amplitude * beta_rho(rx).0 * beta_rho(rt).0
    }

    /// Value, gradient and Hessian in (x1, x2, x3, t).
    pub fn d2(&self, x: [f64; 3], t: f64) -> (f64, [f64; 4], [[f64; 4]; 4]) {
        let (rho, sig) = self.rhos(x, t);
        if rho >= 1.0 || sig >= 1.0 {
            return (0.0, [0.0; 4], [[0.0; 4]; 4]);
        }
        let (bx, bx1, bx2) = beta_rho(rho);
        let (bt, bt1, bt2) = beta_rho(sig);
        let a = self.amplitude;
        let c = self.center;
        let ix2 = 1.0 / (self.rx * self.rx);
        let it2 = 1.0 / (self.rt * self.rt);
        let rg = [2.0 * (x[0] - c[0]) * ix2, 2.0 * (x[1] - c[1]) * ix2, 2.0 * (x[2] - c[2]) * ix2];
        let sg = 2.0 * (t - c[3]) * it2;
        let mut g = [0.0; 4];
        let mut h = [[0.0; 4]; 4];
        for i in 0..3 {
            g[i] = a * bx1 * rg[i] * bt;
            for j in 0..3 {
                let diag = if i == j { 2.0 * ix2 } else { 0.0 };
                h[i][j] = a * bt * (bx2 * rg[i] * rg[j] + bx1 * diag);
            }
            h[i][3] = a * bx1 * rg[i] * bt1 * sg;
            h[3][i] = h[i][3];
        }
        g[3] = a * bx * bt1 * sg;
        h[3][3] = a * bx * (bt2 * sg * sg + bt1 * 2.0 * it2);
        (a * bx * bt, g, h)
    }

    pub fn jet(&self, p: &[Jet; 4]) -> Jet {
        let m = p[0].order();
        let xv = [p[0].value(), p[1].value(), p[2].value()];
        let (rho, sig) = self.rhos(xv, p[3].value());
        if rho >= 1.0 || sig >= 1.0 {
            return Jet::zero(m);
        }
        let c = self.center;
        let mut r = Jet::zero(m);
        for i in 0..3 {
            r = &r + &p[i].add_scalar(-c[i]).square();
        }
        let r = r.scale(1.0 / (self.rx * self.rx));
        let s = p[3].add_scalar(-c[3]).scale(1.0 / self.rt).square();
        beta_jet(&r).times(&beta_jet(&s)).scale(self.amplitude)
    }

    /// Ray parameters where s -> (xi + s w, t0 + s) crosses the bump's
    /// support boundary.
    pub fn ray_breaks(&self, xi: [f64; 3], w: [f64; 3], t0: f64, out: &mut Vec<f64>) {
        let c = [self.center[0], self.center[1], self.center[2]];
        if let Some((s1, s2)) = sphere_hits(xi, w, c, self.rx) {
            out.push(s1);
            out.push(s2);
        }
        out.push(self.center[3] - self.rt - t0);
        out.push(self.center[3] + self.rt - t0);
    }

    /// Interval of s on which the ray is inside this bump's support.
    pub fn ray_window(&self, xi: [f64; 3], w: [f64; 3], t0: f64) -> Option<(f64, f64)> {
        let c = [self.center[0], self.center[1], self.center[2]];
        let (s1, s2) = sphere_hits(xi, w, c, self.rx)?;
        let lo = s1.max(self.center[3] - self.rt - t0).max(0.0);
        let hi = s2.min(self.center[3] + self.rt - t0);
        (hi > lo).then_some((lo, hi))
    }
}

/// Physical-point jet provider for fields defined by some external
/// procedure (ray integrals and the like).
pub trait PointJet: Send + Sync {
    /// Taylor jet of the field at `(x, t)` in the physical variables.
    fn jet_at(&self, x: [f64; 3], t: f64, order: usize) -> Jet;

    fn value(&self, x: [f64; 3], t: f64) -> f64 {
        self.jet_at(x, t, 0).value()
    }
}

type JetFn = dyn Fn(&[Jet; 4]) -> Jet + Send + Sync;

#[derive(Clone)]
enum Kind {
    Zero,
    Bumps(Arc<Vec<Bump>>),
    Func(Arc<JetFn>),
    Point(Arc<dyn PointJet>),
    Lin(Arc<Vec<(f64, ScalarField)>>),
    Prod(Arc<Vec<ScalarField>>),
    Deriv(Arc<ScalarField>, usize),
}

/// A smooth scalar field on R^3 x R, zero outside its declared support.
#[derive(Clone)]
pub struct ScalarField {
    kind: Kind,
    support: Support,
    smoothness: usize,
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let k = match &self.kind {
            Kind::Zero => "zero".to_string(),
            Kind::Bumps(b) => format!("bumps({})", b.len()),
            Kind::Func(_) => "func".into(),
            Kind::Point(_) => "point".into(),
            Kind::Lin(v) => format!("lin({})", v.len()),
            Kind::Prod(v) => format!("prod({})", v.len()),
            Kind::Deriv(_, v) => format!("deriv({v})"),
        };
        f.debug_struct("ScalarField")
            .field("kind", &k)
            .field("support", &self.support)
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

impl Default for ScalarField {
    fn default() -> Self {
        ScalarField::zero()
    }
}

impl ScalarField {
    pub fn zero() -> ScalarField {
        ScalarField { kind: Kind::Zero, support: Support::EMPTY, smoothness: MAX_ORDER }
    }

    pub fn bump(amplitude: f64, center: [f64; 4], rx: f64, rt: f64) -> ScalarField {
        ScalarField::bumps(vec![Bump::new(amplitude, center, rx, rt)])
    }

    pub fn bumps(bumps: Vec<Bump>) -> ScalarField {
        let bumps: Vec<Bump> = bumps.into_iter().filter(|b| b.amplitude != 0.0).collect();
        if bumps.is_empty() {
            return ScalarField::zero();
        }
        let support = bumps.iter().fold(Support::EMPTY, |s, b| s.union(&b.support()));
        ScalarField { kind: Kind::Bumps(Arc::new(bumps)), support, smoothness: MAX_ORDER }
    }

    /// A field given by jet arithmetic. `f` must be exactly zero (with all
    /// derivatives) outside `support`.
    pub fn func(
        f: impl Fn(&[Jet; 4]) -> Jet + Send + Sync + 'static,
        support: Support,
        smoothness: usize,
    ) -> ScalarField {
        ScalarField { kind: Kind::Func(Arc::new(f)), support, smoothness: smoothness.min(MAX_ORDER) }
    }

    pub fn from_point_jet(p: Arc<dyn PointJet>, support: Support, smoothness: usize) -> ScalarField {
        ScalarField { kind: Kind::Point(p), support, smoothness: smoothness.min(MAX_ORDER) }
    }

    pub fn lin(terms: Vec<(f64, ScalarField)>) -> ScalarField {
        let terms: Vec<(f64, ScalarField)> =
            terms.into_iter().filter(|(w, f)| *w != 0.0 && !f.is_zero()).collect();
        match terms.len() {
            0 => ScalarField::zero(),
            1 if terms[0].0 == 1.0 => terms[0].1.clone(),
            _ => {
                let support = terms.iter().fold(Support::EMPTY, |s, (_, f)| s.union(&f.support));
                let smoothness = terms.iter().map(|(_, f)| f.smoothness).min().unwrap();
                ScalarField { kind: Kind::Lin(Arc::new(terms)), support, smoothness }
            }
        }
    }

    pub fn prod(factors: Vec<ScalarField>) -> ScalarField {
        if factors.iter().any(|f| f.is_zero()) || factors.is_empty() {
            return ScalarField::zero();
        }
        if factors.len() == 1 {
            return factors[0].clone();
        }
        let mut support = factors[0].support;
        for f in &factors[1..] {
            support = Support {
                radius: support.radius.min(f.support.radius),
                t_lo: support.t_lo.max(f.support.t_lo),
                t_hi: support.t_hi.min(f.support.t_hi),
            };
        }
        let smoothness = factors.iter().map(|f| f.smoothness).min().unwrap();
        ScalarField { kind: Kind::Prod(Arc::new(factors)), support, smoothness }
    }

    /// Partial derivative with respect to coordinate `var` (3 is time).
    pub fn deriv(&self, var: usize) -> ScalarField {
        assert!(var < 4);
        if self.is_zero() {
            return ScalarField::zero();
        }
        ScalarField {
            kind: Kind::Deriv(Arc::new(self.clone()), var),
            support: self.support,
            smoothness: self.smoothness.saturating_sub(1),
        }
    }

    pub fn add(&self, o: &ScalarField) -> ScalarField {
        ScalarField::lin(vec![(1.0, self.clone()), (1.0, o.clone())])
    }

    pub fn sub(&self, o: &ScalarField) -> ScalarField {
        ScalarField::lin(vec![(1.0, self.clone()), (-1.0, o.clone())])
    }

    pub fn scale(&self, s: f64) -> ScalarField {
        ScalarField::lin(vec![(s, self.clone())])
    }

    pub fn mul(&self, o: &ScalarField) -> ScalarField {
        ScalarField::prod(vec![self.clone(), o.clone()])
    }

    pub fn with_support(mut self, support: Support) -> ScalarField {
        self.support = support;
        self
    }

    pub fn with_smoothness(mut self, p: usize) -> ScalarField {
        self.smoothness = p.min(MAX_ORDER);
        self
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn smoothness(&self) -> usize {
        self.smoothness
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, Kind::Zero)
    }

    pub fn as_bumps(&self) -> Option<&[Bump]> {
        match &self.kind {
            Kind::Bumps(b) => Some(b),
            _ => None,
        }
    }

    fn check_order(&self, order: usize) -> Result<()> {
        if order > self.smoothness {
            return Err(Error::Capability(format!(
                "derivative order {order} requested from a field of smoothness {}",
                self.smoothness
            )));
        }
        Ok(())
    }

    /// Taylor jet of the field at a physical point.
    pub fn jet(&self, x: [f64; 3], t: f64, order: usize) -> Result<Jet> {
        self.check_order(order)?;
        Ok(self.jet_unchecked(x, t, order))
    }

    pub(crate) fn jet_unchecked(&self, x: [f64; 3], t: f64, order: usize) -> Jet {
        if !self.support.contains(x, t) {
            return Jet::zero(order);
        }
        match &self.kind {
            Kind::Zero => Jet::zero(order),
            Kind::Deriv(f, v) => f.jet_unchecked(x, t, order + 1).d(*v),
            Kind::Point(p) => p.jet_at(x, t, order),
            Kind::Lin(terms) => {
                let mut acc = Jet::zero(order);
                for (w, f) in terms.iter() {
                    acc = acc.axpy(*w, &f.jet_unchecked(x, t, order));
                }
                acc
            }
            Kind::Prod(fs) => {
                let mut acc = fs[0].jet_unchecked(x, t, order);
                for f in &fs[1..] {
                    acc = acc.times(&f.jet_unchecked(x, t, order));
                }
                acc
            }
            _ => self.compose_unchecked(&Jet::point([x[0], x[1], x[2], t], order)),
        }
    }

    /// The field evaluated on jet-valued inputs, i.e. composed with a map
    /// into space-time. The caller is responsible for the order cap.
    pub(crate) fn compose_unchecked(&self, p: &[Jet; 4]) -> Jet {
        let m = p.iter().map(|j| j.order()).min().unwrap();
        let x = [p[0].value(), p[1].value(), p[2].value()];
        let t = p[3].value();
        if !self.support.contains(x, t) {
            return Jet::zero(m);
        }
        match &self.kind {
            Kind::Zero => Jet::zero(m),
            Kind::Bumps(bs) => {
                let mut acc = bs[0].jet(p);
                for b in &bs[1..] {
                    acc = &acc + &b.jet(p);
                }
                acc
            }
            Kind::Func(f) => f(p),
            Kind::Lin(terms) => {
                let mut acc = Jet::zero(m);
                for (w, f) in terms.iter() {
                    acc = acc.axpy(*w, &f.compose_unchecked(p));
                }
                acc
            }
            Kind::Prod(fs) => {
                let mut acc = fs[0].compose_unchecked(p);
                for f in &fs[1..] {
                    acc = acc.times(&f.compose_unchecked(p));
                }
                acc
            }
            Kind::Deriv(..) | Kind::Point(_) => self.jet_unchecked(x, t, m).compose(p),
        }
    }

    /// Checked composition with jet-valued inputs.
    pub fn compose(&self, p: &[Jet; 4]) -> Result<Jet> {
        self.check_order(p[0].order())?;
        Ok(self.compose_unchecked(p))
    }

    /// The partial derivative with multi-index `alpha` over (x1, x2, x3, t).
    pub fn partial(&self, x: [f64; 3], t: f64, alpha: [usize; 4]) -> Result<f64> {
        let k: usize = alpha.iter().sum();
        Ok(self.jet(x, t, k)?.partial(alpha))
    }

    pub fn value(&self, x: [f64; 3], t: f64) -> f64 {
        if !self.support.contains(x, t) {
            return 0.0;
        }
        match &self.kind {
            Kind::Zero => 0.0,
            Kind::Bumps(bs) => bs.iter().map(|b| b.value(x, t)).sum(),
            Kind::Lin(terms) => terms.iter().map(|(w, f)| w * f.value(x, t)).sum(),
            Kind::Prod(fs) => fs.iter().map(|f| f.value(x, t)).product(),
            Kind::Point(p) => p.value(x, t),
            Kind::Deriv(f, v) if f.as_bumps().is_some() => f.d1(x, t).1[*v],
            _ => self.jet_unchecked(x, t, 0).value(),
        }
    }

    /// Value and gradient in (x1, x2, x3, t).
    pub fn d1(&self, x: [f64; 3], t: f64) -> (f64, [f64; 4]) {
        if !self.support.contains(x, t) {
            return (0.0, [0.0; 4]);
        }
        match &self.kind {
            Kind::Zero => (0.0, [0.0; 4]),
            Kind::Bumps(_) | Kind::Lin(_) | Kind::Prod(_) => {
                let (v, g, _) = self.d2_inner(x, t, false);
                (v, g)
            }
            Kind::Deriv(f, v) if f.as_bumps().is_some() => {
                let (_, g, h) = f.d2(x, t);
                (g[*v], h[*v])
            }
            _ => {
                let j = self.jet_unchecked(x, t, 1);
                let c = j.coeffs();
                (c[0], [c[1], c[2], c[3], c[4]])
            }
        }
    }

    /// Value, gradient and Hessian in (x1, x2, x3, t).
    pub fn d2(&self, x: [f64; 3], t: f64) -> (f64, [f64; 4], [[f64; 4]; 4]) {
        if !self.support.contains(x, t) {
            return (0.0, [0.0; 4], [[0.0; 4]; 4]);
        }
        self.d2_inner(x, t, true)
    }

    fn d2_inner(&self, x: [f64; 3], t: f64, hess: bool) -> (f64, [f64; 4], [[f64; 4]; 4]) {
        match &self.kind {
            Kind::Zero => (0.0, [0.0; 4], [[0.0; 4]; 4]),
            Kind::Bumps(bs) => {
                let mut acc = (0.0, [0.0; 4], [[0.0; 4]; 4]);
                for b in bs.iter() {
                    let (v, g, h) = b.d2(x, t);
                    acc.0 += v;
                    for i in 0..4 {
                        acc.1[i] += g[i];
                        for j in 0..4 {
                            acc.2[i][j] += h[i][j];
                        }
                    }
                }
                acc
            }
            Kind::Lin(terms) => {
                let mut acc = (0.0, [0.0; 4], [[0.0; 4]; 4]);
                for (w, f) in terms.iter() {
                    let (v, g, h) = f.d2(x, t);
                    acc.0 += w * v;
                    for i in 0..4 {
                        acc.1[i] += w * g[i];
                        for j in 0..4 {
                            acc.2[i][j] += w * h[i][j];
                        }
                    }
                }
                acc
            }
            Kind::Prod(fs) => {
                let mut acc = fs[0].d2(x, t);
                for f in &fs[1..] {
                    let (v, g, h) = f.d2(x, t);
                    let (av, ag, ah) = acc;
                    let mut ng = [0.0; 4];
                    let mut nh = [[0.0; 4]; 4];
                    for i in 0..4 {
                        ng[i] = av * g[i] + ag[i] * v;
                        for j in 0..4 {
                            nh[i][j] = av * h[i][j] + ah[i][j] * v + ag[i] * g[j] + ag[j] * g[i];
                        }
                    }
                    acc = (av * v, ng, nh);
                }
                acc
            }
            _ => {
                let j = self.jet_unchecked(x, t, if hess { 2 } else { 1 });
                let v = j.value();
                let g = std::array::from_fn(|i| j.coeffs()[1 + i]);
                let mut h = [[0.0; 4]; 4];
                if hess {
                    for i in 0..4 {
                        for k in 0..4 {
                            let mut e = [0usize; 4];
                            e[i] += 1;
                            e[k] += 1;
                            h[i][k] = j.partial(e);
                        }
                    }
                }
                (v, g, h)
            }
        }
    }

    /// Every ray parameter at which the ray s -> (xi + s w, t0 + s) may
    /// cross a boundary of a piece of this field's support.
    pub fn ray_breaks(&self, xi: [f64; 3], w: [f64; 3], t0: f64, out: &mut Vec<f64>) {
        match &self.kind {
            Kind::Zero => {}
            Kind::Bumps(bs) => bs.iter().for_each(|b| b.ray_breaks(xi, w, t0, out)),
            Kind::Lin(terms) => terms.iter().for_each(|(_, f)| f.ray_breaks(xi, w, t0, out)),
            Kind::Prod(fs) => fs.iter().for_each(|f| f.ray_breaks(xi, w, t0, out)),
            Kind::Deriv(f, _) => f.ray_breaks(xi, w, t0, out),
            _ => {
                let s = self.support;
                if s.radius.is_finite() {
                    if let Some((a, b)) = sphere_hits(xi, w, [0.0; 3], s.radius) {
                        out.push(a);
                        out.push(b);
                    }
                }
                if s.t_lo.is_finite() {
                    out.push(s.t_lo - t0);
                }
                if s.t_hi.is_finite() {
                    out.push(s.t_hi - t0);
                }
            }
        }
    }

    /// Smallest length over which the field varies appreciably: the least
    /// bump radius, or 1 for fields given as functions.
    pub fn feature_scale(&self) -> f64 {
        match &self.kind {
            Kind::Zero => f64::INFINITY,
            Kind::Bumps(bs) => bs.iter().map(|b| b.rx.min(b.rt)).fold(f64::INFINITY, f64::min),
            Kind::Lin(terms) => terms.iter().map(|(_, f)| f.feature_scale()).fold(f64::INFINITY, f64::min),
            Kind::Prod(fs) => fs.iter().map(|f| f.feature_scale()).fold(f64::INFINITY, f64::min),
            Kind::Deriv(f, _) => f.feature_scale(),
            _ => 1.0,
        }
    }

    /// Smallest interval of s >= 0 outside which the ray misses the support.
    pub fn ray_window(&self, xi: [f64; 3], w: [f64; 3], t0: f64) -> Option<(f64, f64)> {
        match &self.kind {
            Kind::Zero => None,
            Kind::Bumps(bs) => bs
                .iter()
                .filter_map(|b| b.ray_window(xi, w, t0))
                .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1))),
            Kind::Lin(terms) => terms
                .iter()
                .filter_map(|(_, f)| f.ray_window(xi, w, t0))
                .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1))),
            Kind::Deriv(f, _) => f.ray_window(xi, w, t0),
            _ => self.support.ray_window(xi, w, t0),
        }
    }
}

/// Coefficients (a, b, c) of the operator together with the derived
/// potential q = c - a_t + div b + a^2 - |b|^2.
#[derive(Clone, Debug)]
pub struct CoefficientSet {
    pub a: ScalarField,
    pub b: [ScalarField; 3],
    pub c: ScalarField,
    q: ScalarField,
    bounds: Support,
}

impl CoefficientSet {
    /// Builds the set; `bounds` defaults to the union of component supports.
    pub fn new(a: ScalarField, b: [ScalarField; 3], c: ScalarField) -> CoefficientSet {
        let bounds = [&a, &b[0], &b[1], &b[2], &c]
            .iter()
            .fold(Support::EMPTY, |s, f| s.union(&f.support()));
        let q = build_q(&a, &b, &c);
        CoefficientSet { a, b, c, q, bounds }
    }

    pub fn zero() -> CoefficientSet {
        CoefficientSet::new(ScalarField::zero(), Default::default(), ScalarField::zero())
    }

    /// Declare the containing ball-times-interval; every component support
    /// must lie inside it.
    pub fn with_bounds(mut self, bounds: Support) -> Result<CoefficientSet> {
        for (name, f) in self.named() {
            if !f.support().within(&bounds) {
                return Err(Error::Domain(format!(
                    "support of {name} ({:?}) is not inside the declared bounds {:?}",
                    f.support(),
                    bounds
                )));
            }
        }
        self.bounds = bounds;
        Ok(self)
    }

    pub fn bounds(&self) -> Support {
        self.bounds
    }

    pub fn q(&self) -> &ScalarField {
        &self.q
    }

    pub fn named(&self) -> [(&'static str, &ScalarField); 5] {
        [("a", &self.a), ("b1", &self.b[0]), ("b2", &self.b[1]), ("b3", &self.b[2]), ("c", &self.c)]
    }

    pub fn is_zero(&self) -> bool {
        self.named().iter().all(|(_, f)| f.is_zero())
    }

    pub fn has_ab(&self) -> bool {
        !(self.a.is_zero() && self.b.iter().all(|f| f.is_zero()))
    }

    /// Smallest declared smoothness among a, b and c.
    pub fn smoothness(&self) -> usize {
        self.named().iter().map(|(_, f)| f.smoothness()).min().unwrap()
    }

    /// Ray parameters of support crossings for all components.
    pub fn ray_breaks(&self, xi: [f64; 3], w: [f64; 3], t0: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for (_, f) in self.named() {
            f.ray_breaks(xi, w, t0, &mut out);
        }
        out
    }

    pub fn feature_scale(&self) -> f64 {
        self.named().iter().map(|(_, f)| f.feature_scale()).fold(f64::INFINITY, f64::min)
    }

    pub fn ray_window(&self, xi: [f64; 3], w: [f64; 3], t0: f64) -> Option<(f64, f64)> {
        self.named()
            .iter()
            .filter_map(|(_, f)| f.ray_window(xi, w, t0))
            .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1)))
    }

    /// Same (a, b) with a different c.
    pub fn with_c(&self, c: ScalarField) -> CoefficientSet {
        CoefficientSet { q: build_q(&self.a, &self.b, &c), c, ..self.clone() }
    }

    /// Values of (a, b1, b2, b3, q) at a point.
    pub fn values(&self, x: [f64; 3], t: f64) -> [f64; 5] {
        [
            self.a.value(x, t),
            self.b[0].value(x, t),
            self.b[1].value(x, t),
            self.b[2].value(x, t),
            self.q_value(x, t),
        ]
    }

    /// q from closed-form first derivatives of the components.
    pub fn q_value(&self, x: [f64; 3], t: f64) -> f64 {
        let (a, ga) = self.a.d1(x, t);
        let mut q = self.c.value(x, t) - ga[3] + a * a;
        for i in 0..3 {
            let (bi, gb) = self.b[i].d1(x, t);
            q += gb[i] - bi * bi;
        }
        q
    }

    /// Values and (x, t) gradients of (a, b1, b2, b3, q); q's gradient uses
    /// second derivatives of a and b.
    pub fn grads(&self, x: [f64; 3], t: f64) -> [(f64, [f64; 4]); 5] {
        let (a, ga, ha) = self.a.d2(x, t);
        let (c, gc) = self.c.d1(x, t);
        let mut q = c - ga[3] + a * a;
        let mut gq: [f64; 4] = std::array::from_fn(|k| gc[k] - ha[3][k] + 2.0 * a * ga[k]);
        let mut bs = [(0.0, [0.0; 4]); 3];
        for i in 0..3 {
            let (bi, gb, hb) = self.b[i].d2(x, t);
            q += gb[i] - bi * bi;
            for k in 0..4 {
                gq[k] += hb[i][k] - 2.0 * bi * gb[k];
            }
            bs[i] = (bi, gb);
        }
        [(a, ga), bs[0], bs[1], bs[2], (q, gq)]
    }

    /// The six components of the exterior derivative of a dt + b . dx:
    /// d_i b_j - d_j b_i for (i,j) = (1,2), (1,3), (2,3), then d_t b_i - d_i a.
    pub fn curl(&self, x: [f64; 3], t: f64) -> [f64; 6] {
        let (_, ga) = self.a.d1(x, t);
        let gb: Vec<[f64; 4]> = self.b.iter().map(|f| f.d1(x, t).1).collect();
        [
            gb[1][0] - gb[0][1],
            gb[2][0] - gb[0][2],
            gb[2][1] - gb[1][2],
            gb[0][3] - ga[0],
            gb[1][3] - ga[1],
            gb[2][3] - ga[2],
        ]
    }

    /// Seeded random set of single bumps in the ball of radius `radius`
    /// and time window [0, horizon]; `scale` bounds the amplitudes.
    pub fn random_bumps(rng: &mut impl Rng, radius: f64, horizon: f64, scale: f64) -> CoefficientSet {
        let mut f = || random_bump(rng, radius, horizon, scale);
        let a = f();
        let b = [f(), f(), f()];
        let c = f();
        CoefficientSet::new(a, b, c)
    }
}

/// A single bump with support inside B(radius) x [0, horizon].
pub fn random_bump(rng: &mut impl Rng, radius: f64, horizon: f64, scale: f64) -> ScalarField {
    let rx = radius * rng.gen_range(0.3..0.6);
    let reach = radius - rx;
    let c = loop {
        let p: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-reach..reach));
        if p.iter().map(|v| v * v).sum::<f64>() < reach * reach {
            break p;
        }
    };
    let rt = horizon * rng.gen_range(0.25..0.5);
    let ct = rng.gen_range(rt..horizon - rt);
    let amp = scale * rng.gen_range(-1.0..1.0);
    ScalarField::bump(amp, [c[0], c[1], c[2], ct], rx, rt)
}

fn build_q(a: &ScalarField, b: &[ScalarField; 3], c: &ScalarField) -> ScalarField {
    let mut terms = vec![(1.0, c.clone()), (-1.0, a.deriv(3)), (1.0, a.mul(a))];
    for (i, bi) in b.iter().enumerate() {
        terms.push((1.0, bi.deriv(i)));
        terms.push((-1.0, bi.mul(bi)));
    }
    ScalarField::lin(terms)
}

/// q and its derivatives up to `order`.
pub fn q_from_abc(cs: &CoefficientSet, order: usize) -> Result<ScalarField> {
    let need = order + 1;
    for (name, f) in cs.named() {
        if name != "c" && f.smoothness() < need {
            return Err(Error::Capability(format!(
                "q to order {order} needs {name} to order {need}, field has smoothness {}",
                f.smoothness()
            )));
        }
    }
    if cs.c.smoothness() < order {
        return Err(Error::Capability(format!(
            "q to order {order} needs c to order {order}, field has smoothness {}",
            cs.c.smoothness()
        )));
    }
    Ok(cs.q.clone())
}

/// (-2 a f_t + 2 b . grad f + q f)(x, t).
pub fn apply_m(cs: &CoefficientSet, f: &ScalarField, x: [f64; 3], t: f64) -> Result<f64> {
    let j = f.jet(x, t, 1)?;
    Ok(m_of_jet(cs, &j, x, t))
}

fn m_of_jet(cs: &CoefficientSet, j: &Jet, x: [f64; 3], t: f64) -> f64 {
    if !cs.bounds.contains(x, t) {
        return 0.0;
    }
    let [a, b1, b2, b3, q] = cs.values(x, t);
    let c = j.coeffs();
    -2.0 * a * c[4] + 2.0 * (b1 * c[1] + b2 * c[2] + b3 * c[3]) + q * c[0]
}

/// (box + M) f at (x, t), box = d_t^2 - Laplacian.
pub fn apply_l(cs: &CoefficientSet, f: &ScalarField, x: [f64; 3], t: f64) -> Result<f64> {
    let j = f.jet(x, t, 2)?;
    Ok(l_of_jet(cs, &j, x, t))
}

/// L applied to a second-order physical jet of some function at (x, t).
pub fn l_of_jet(cs: &CoefficientSet, j: &Jet, x: [f64; 3], t: f64) -> f64 {
    let wave = 2.0 * (j.coeff([0, 0, 0, 2]) - j.coeff([2, 0, 0, 0]) - j.coeff([0, 2, 0, 0]) - j.coeff([0, 0, 2, 0]));
    wave + m_of_jet(cs, j, x, t)
}

/// (a + phi_t, b + grad phi, c), requiring phi's support inside the set's
/// declared bounds.
pub fn gauge_transform(cs: &CoefficientSet, phi: &ScalarField) -> Result<CoefficientSet> {
    if !phi.support().within(&cs.bounds) {
        return Err(Error::Domain(format!(
            "gauge function support {:?} exceeds coefficient bounds {:?}",
            phi.support(),
            cs.bounds
        )));
    }
    Ok(gauge_transform_within(cs, phi, cs.bounds))
}

/// Gauge transform with an explicit, possibly larger, containing region
/// (used when phi is a ray integral reaching past the coefficient ball).
pub fn gauge_transform_within(cs: &CoefficientSet, phi: &ScalarField, bounds: Support) -> CoefficientSet {
    if phi.is_zero() {
        return cs.clone();
    }
    let a = cs.a.add(&phi.deriv(3));
    let b = std::array::from_fn(|i| cs.b[i].add(&phi.deriv(i)));
    let mut out = CoefficientSet::new(a, b, cs.c.clone());
    out.bounds = bounds.union(&cs.bounds);
    out
}

/// Fields of the operator represented in configuration documents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldPreset {
    Zero,
    Bump {
        amplitude: f64,
        center: [f64; 4],
        radii: [f64; 2],
    },
    SumOfBumps {
        bumps: Vec<BumpPreset>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpPreset {
    pub amplitude: f64,
    pub center: [f64; 4],
    pub radii: [f64; 2],
}

impl Default for FieldPreset {
    fn default() -> Self {
        FieldPreset::Zero
    }
}

impl BumpPreset {
    fn build(&self) -> Result<Bump> {
        let [rx, rt] = self.radii;
        if !(rx > 0.0 && rt > 0.0) || !self.amplitude.is_finite() || self.center.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config(format!("bump radii must be positive and values finite: {self:?}")));
        }
        Ok(Bump::new(self.amplitude, self.center, rx, rt))
    }
}

impl FieldPreset {
    pub fn build(&self) -> Result<ScalarField> {
        Ok(match self {
            FieldPreset::Zero => ScalarField::zero(),
            FieldPreset::Bump { amplitude, center, radii } => {
                ScalarField::bumps(vec![BumpPreset { amplitude: *amplitude, center: *center, radii: *radii }.build()?])
            }
            FieldPreset::SumOfBumps { bumps } => {
                ScalarField::bumps(bumps.iter().map(|b| b.build()).collect::<Result<_>>()?)
            }
        })
    }

    pub fn from_field(f: &ScalarField) -> Option<FieldPreset> {
        if f.is_zero() {
            return Some(FieldPreset::Zero);
        }
        let bs = f.as_bumps()?;
        let conv = |b: &Bump| BumpPreset { amplitude: b.amplitude, center: b.center, radii: [b.rx, b.rt] };
        Some(if bs.len() == 1 {
            let p = conv(&bs[0]);
            FieldPreset::Bump { amplitude: p.amplitude, center: p.center, radii: p.radii }
        } else {
            FieldPreset::SumOfBumps { bumps: bs.iter().map(conv).collect() }
        })
    }
}

/// A coefficient set in configuration form.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientPreset {
    #[serde(default)]
    pub a: FieldPreset,
    #[serde(default)]
    pub b: [FieldPreset; 3],
    #[serde(default)]
    pub c: FieldPreset,
}

impl CoefficientPreset {
    pub fn build(&self) -> Result<CoefficientSet> {
        Ok(CoefficientSet::new(
            self.a.build()?,
            [self.b[0].build()?, self.b[1].build()?, self.b[2].build()?],
            self.c.build()?,
        ))
    }

    pub fn from_set(cs: &CoefficientSet) -> Option<CoefficientPreset> {
        Some(CoefficientPreset {
            a: FieldPreset::from_field(&cs.a)?,
            b: [
                FieldPreset::from_field(&cs.b[0])?,
                FieldPreset::from_field(&cs.b[1])?,
                FieldPreset::from_field(&cs.b[2])?,
            ],
            c: FieldPreset::from_field(&cs.c)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_bump() -> ScalarField {
        ScalarField::bump(0.7, [0.1, -0.2, 0.05, 0.5], 0.6, 0.4)
    }

    #[test]
    fn bump_closed_forms_match_jets() {
        let f = sample_bump();
        let (x, t) = ([0.3, -0.1, 0.2], 0.62);
        let (v, g, h) = f.d2(x, t);
        let j = f.jet(x, t, 2).unwrap();
        assert!((v - j.value()).abs() < 1e-15);
        for i in 0..4 {
            assert!((g[i] - j.coeffs()[1 + i]).abs() < 1e-13);
            for k in 0..4 {
                let mut e = [0; 4];
                e[i] += 1;
                e[k] += 1;
                assert!((h[i][k] - j.partial(e)).abs() < 1e-12, "{i}{k}");
            }
        }
    }

    #[test]
    fn bump_derivatives_match_finite_differences() {
        let f = sample_bump();
        let (x, t) = ([0.25, -0.05, 0.1], 0.55);
        let j = f.jet(x, t, 3).unwrap();
        let h = 1e-4;
        // d^3/dx1 dx2 dt by central differences of the closed-form Hessian entry
        let hx = |dx: f64| f.d2([x[0] + dx, x[1], x[2]], t).2[1][3];
        let fd = (hx(h) - hx(-h)) / (2.0 * h);
        assert!((fd - j.partial([1, 1, 0, 1])).abs() < 1e-6);
    }

    #[test]
    fn zero_outside_declared_support() {
        let f = sample_bump();
        assert_eq!(f.value([0.1, -0.2, 0.66], 0.5), 0.0);
        assert_eq!(f.value([0.1, -0.2, 0.05], 0.95), 0.0);
        assert!(f.jet([0.0, 0.0, 2.0], 0.5, 4).unwrap().is_zero());
    }

    #[test]
    fn mixed_partials_commute() {
        let f = sample_bump().mul(&ScalarField::bump(1.0, [0.0, 0.0, 0.0, 0.5], 0.9, 0.5));
        let j = f.jet([0.2, 0.1, -0.1], 0.45, 3).unwrap();
        let g = f.deriv(3).deriv(0).jet([0.2, 0.1, -0.1], 0.45, 0).unwrap();
        let h = f.deriv(0).deriv(3).jet([0.2, 0.1, -0.1], 0.45, 0).unwrap();
        assert!((g.value() - h.value()).abs() < 1e-14);
        assert!((g.value() - j.partial([1, 0, 0, 1])).abs() < 1e-13);
    }

    #[test]
    fn capability_error_beyond_smoothness() {
        let f = ScalarField::func(|p| p[3].square(), Support::UNBOUNDED, 6);
        assert!(matches!(f.jet([0.0; 3], 1.0, 7), Err(Error::Capability(_))));
        assert!(f.jet([0.0; 3], 1.0, 6).is_ok());
    }

    #[test]
    fn q_matches_direct_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cs = CoefficientSet::random_bumps(&mut rng, 1.0, 1.0, 0.5);
        for (x, t) in [([0.1, 0.2, -0.1], 0.4), ([-0.3, 0.0, 0.2], 0.7)] {
            let direct = cs.q().jet(x, t, 0).unwrap().value();
            assert!((direct - cs.q_value(x, t)).abs() < 1e-12);
            let g = cs.grads(x, t)[4];
            let jq = cs.q().jet(x, t, 1).unwrap();
            for k in 0..4 {
                assert!((g.1[k] - jq.coeffs()[1 + k]).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn apply_l_trivial_cases() {
        let cs = CoefficientSet::zero();
        let t2 = ScalarField::func(|p| p[3].square(), Support::UNBOUNDED, 6);
        assert!((apply_l(&cs, &t2, [0.3, 0.1, 0.0], 0.7).unwrap() - 2.0).abs() < 1e-14);
        let inv_r = ScalarField::func(
            |p| (p[0].square() + p[1].square() + p[2].square()).sqrt().recip(),
            Support::UNBOUNDED,
            6,
        );
        assert!(apply_l(&cs, &inv_r, [0.3, -0.4, 1.2], 0.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn preset_json_round_trip_and_unknown_keys() {
        let doc = r#"{"a":{"kind":"bump","amplitude":0.3,"center":[0,0,0,0.5],"radii":[0.5,0.25]},
                      "c":{"kind":"sum-of-bumps","bumps":[{"amplitude":1,"center":[0.1,0,0,0.5],"radii":[0.4,0.3]}]}}"#;
        let p: CoefficientPreset = serde_json::from_str(doc).unwrap();
        let cs = p.build().unwrap();
        assert!(!cs.a.is_zero() && cs.b[0].is_zero());
        let back = CoefficientPreset::from_set(&cs).unwrap();
        assert_eq!(back.a, p.a);
        let bad = r#"{"a":{"kind":"bump","amplitude":0.3,"center":[0,0,0,0.5],"radii":[0.5,0.25],"oops":1}}"#;
        assert!(serde_json::from_str::<CoefficientPreset>(bad).is_err());
        assert!(serde_json::from_str::<CoefficientPreset>(r#"{"d":{"kind":"zero"}}"#).is_err());
    }

    #[test]
    fn bounds_are_enforced() {
        let cs = CoefficientSet::new(sample_bump(), Default::default(), ScalarField::zero());
        assert!(cs.clone().with_bounds(Support::new(1.0, 0.0, 1.0)).is_ok());
        assert!(cs.with_bounds(Support::new(0.5, 0.0, 1.0)).is_err());
    }

    #[test]
    fn ray_window_covers_bump() {
        let f = sample_bump();
        let xi = [2.0, 0.0, 0.0];
        let w = [-1.0, 0.0, 0.0];
        let (lo, hi) = f.ray_window(xi, w, -2.0).unwrap();
        // the ray passes (0.1, 0, 0) at s = 1.9 and t = -0.1 which is outside the time window
        for k in 0..200 {
            let s = 4.0 * k as f64 / 200.0;
            let x = [2.0 - s, 0.0, 0.0];
            if f.value(x, -2.0 + s) != 0.0 {
                assert!(s >= lo && s <= hi);
            }
        }
    }
}
