//! Truncated multivariate Taylor polynomials in four variables.
//!
//! A `Jet` of order m stores the Taylor coefficients of a smooth function
//! about a base point, for all monomials of total degree <= m, in graded
//! order. Graded order makes truncation a prefix operation and lets the
//! nonlinear recurrences (exp, recip, sqrt, ...) run in one sweep over
//! degrees.

use smallvec::SmallVec;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

pub const NVAR: usize = 4;
pub const MAX_ORDER: usize = 16;

type Coeffs = SmallVec<[f64; 15]>;

struct Layout {
    exps: Vec<[u8; NVAR]>,
    deg: Vec<u8>,
    count: Vec<usize>,
    lookup: Vec<u32>,
    pair_start: Vec<u32>,
    pairs: Vec<[u16; 2]>,
    deriv: [Vec<(u16, f64)>; NVAR],
}

const BASE: usize = MAX_ORDER + 1;

fn key(e: &[u8; NVAR]) -> usize {
    ((e[0] as usize * BASE + e[1] as usize) * BASE + e[2] as usize) * BASE + e[3] as usize
}

fn layout() -> &'static Layout {
    static L: OnceLock<Layout> = OnceLock::new();
    L.get_or_init(build_layout)
}

fn build_layout() -> Layout {
    let mut exps = Vec::new();
    let mut deg = Vec::new();
    let mut count = Vec::new();
    for d in 0..=MAX_ORDER {
        for e0 in (0..=d).rev() {
            for e1 in (0..=d - e0).rev() {
                for e2 in (0..=d - e0 - e1).rev() {
                    let e3 = d - e0 - e1 - e2;
                    exps.push([e0 as u8, e1 as u8, e2 as u8, e3 as u8]);
                    deg.push(d as u8);
                }
            }
        }
        count.push(exps.len());
    }
    let mut lookup = vec![u32::MAX; BASE.pow(4)];
    for (i, e) in exps.iter().enumerate() {
        lookup[key(e)] = i as u32;
    }
    let n = exps.len();
    let mut pair_start = Vec::with_capacity(n + 1);
    let mut pairs = Vec::new();
    for k in 0..n {
        pair_start.push(pairs.len() as u32);
        let ek = exps[k];
        let dk = deg[k] as usize;
        for i in 0..count[dk] {
            let ei = exps[i];
            if (0..NVAR).all(|v| ei[v] <= ek[v]) {
                let ej = [ek[0] - ei[0], ek[1] - ei[1], ek[2] - ei[2], ek[3] - ei[3]];
                pairs.push([i as u16, lookup[key(&ej)] as u16]);
            }
        }
    }
    pair_start.push(pairs.len() as u32);
    let deriv = std::array::from_fn(|v| {
        (0..count[MAX_ORDER - 1])
            .map(|k| {
                let mut e = exps[k];
                e[v] += 1;
                (lookup[key(&e)] as u16, e[v] as f64)
            })
            .collect()
    });
    Layout { exps, deg, count, lookup, pair_start, pairs, deriv }
}

/// Number of coefficients of a jet of order `m`.
pub fn ncoef(m: usize) -> usize {
    layout().count[m]
}

/// Exponent vector of coefficient `k`.
pub fn exponents(k: usize) -> [u8; NVAR] {
    layout().exps[k]
}

/// Index of the coefficient with the given exponents.
pub fn index_of(e: [usize; NVAR]) -> usize {
    let e8 = [e[0] as u8, e[1] as u8, e[2] as u8, e[3] as u8];
    layout().lookup[key(&e8)] as usize
}

/// Total degree of coefficient `k`.
pub fn degree(k: usize) -> usize {
    layout().deg[k] as usize
}

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    order: usize,
    c: Coeffs,
}

impl Jet {
    pub fn zero(order: usize) -> Jet {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        Jet { order, c: SmallVec::from_elem(0.0, ncoef(order)) }
    }

    pub fn constant(v: f64, order: usize) -> Jet {
        let mut j = Jet::zero(order);
        j.c[0] = v;
        j
    }

    /// The coordinate function `var` expanded about `at`.
    pub fn variable(var: usize, at: f64, order: usize) -> Jet {
        let mut j = Jet::constant(at, order);
        if order > 0 {
            j.c[1 + var] = 1.0;
        }
        j
    }

    /// Identity inputs for a base point (x1, x2, x3, t).
    pub fn point(p: [f64; 4], order: usize) -> [Jet; 4] {
        std::array::from_fn(|v| Jet::variable(v, p[v], order))
    }

    pub fn from_coeffs(order: usize, coeffs: &[f64]) -> Jet {
        assert_eq!(coeffs.len(), ncoef(order));
        Jet { order, c: SmallVec::from_slice(coeffs) }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.c
    }

    pub fn coeff(&self, e: [usize; NVAR]) -> f64 {
        let k = index_of(e);
        if k < self.c.len() {
            self.c[k]
        } else {
            0.0
        }
    }

    /// Partial derivative value at the base point for multi-index `e`.
    pub fn partial(&self, e: [usize; NVAR]) -> f64 {
        let f: f64 = e.iter().map(|&k| (1..=k).product::<usize>() as f64).product();
        self.coeff(e) * f
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&v| v == 0.0)
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order);
        Jet { order, c: SmallVec::from_slice(&self.c[..ncoef(order)]) }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { order: self.order, c: self.c.iter().map(|v| v * s).collect() }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut r = self.clone();
        r.c[0] += s;
        r
    }

    /// `self + s * other` on the common order.
    pub fn axpy(&self, s: f64, other: &Jet) -> Jet {
        let m = self.order.min(other.order);
        let n = ncoef(m);
        Jet { order: m, c: (0..n).map(|k| self.c[k] + s * other.c[k]).collect() }
    }

    fn zip(&self, o: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        let m = self.order.min(o.order);
        let n = ncoef(m);
        Jet { order: m, c: (0..n).map(|k| f(self.c[k], o.c[k])).collect() }
    }

    pub fn times(&self, o: &Jet) -> Jet {
        let m = self.order.min(o.order);
        if m == 0 {
            return Jet::constant(self.c[0] * o.c[0], 0);
        }
        let l = layout();
        let n = l.count[m];
        let mut c: Coeffs = SmallVec::from_elem(0.0, n);
        let (a, b) = (&self.c[..], &o.c[..]);
        for (k, ck) in c.iter_mut().enumerate() {
            let (s, e) = (l.pair_start[k] as usize, l.pair_start[k + 1] as usize);
            let mut acc = 0.0;
            for p in &l.pairs[s..e] {
                acc += a[p[0] as usize] * b[p[1] as usize];
            }
            *ck = acc;
        }
        Jet { order: m, c }
    }

    pub fn square(&self) -> Jet {
        self.times(self)
    }

    pub fn recip(&self) -> Jet {
        let g0 = self.c[0];
        let l = layout();
        let n = self.c.len();
        let mut f: Coeffs = SmallVec::from_elem(0.0, n);
        f[0] = 1.0 / g0;
        for k in 1..n {
            let (s, e) = (l.pair_start[k] as usize + 1, l.pair_start[k + 1] as usize);
            let mut acc = 0.0;
            for p in &l.pairs[s..e] {
                acc += self.c[p[0] as usize] * f[p[1] as usize];
            }
            f[k] = -acc / g0;
        }
        Jet { order: self.order, c: f }
    }

    pub fn div(&self, g: &Jet) -> Jet {
        let m = self.order.min(g.order);
        let l = layout();
        let n = l.count[m];
        let g0 = g.c[0];
        let mut f: Coeffs = SmallVec::from_elem(0.0, n);
        f[0] = self.c[0] / g0;
        for k in 1..n {
            let (s, e) = (l.pair_start[k] as usize + 1, l.pair_start[k + 1] as usize);
            let mut acc = 0.0;
            for p in &l.pairs[s..e] {
                acc += g.c[p[0] as usize] * f[p[1] as usize];
            }
            f[k] = (self.c[k] - acc) / g0;
        }
        Jet { order: m, c: f }
    }

    pub fn exp(&self) -> Jet {
        let l = layout();
        let n = self.c.len();
        let mut f: Coeffs = SmallVec::from_elem(0.0, n);
        f[0] = self.c[0].exp();
        for k in 1..n {
            let (s, e) = (l.pair_start[k] as usize + 1, l.pair_start[k + 1] as usize);
            let mut acc = 0.0;
            for p in &l.pairs[s..e] {
                let i = p[0] as usize;
                acc += l.deg[i] as f64 * self.c[i] * f[p[1] as usize];
            }
            f[k] = acc / l.deg[k] as f64;
        }
        Jet { order: self.order, c: f }
    }

    pub fn ln(&self) -> Jet {
        let l = layout();
        let n = self.c.len();
        let g0 = self.c[0];
        let mut f: Coeffs = SmallVec::from_elem(0.0, n);
        f[0] = g0.ln();
        for k in 1..n {
            let (s, e) = (l.pair_start[k] as usize + 1, l.pair_start[k + 1] as usize);
            let mut acc = 0.0;
            for p in &l.pairs[s..e] {
                let j = p[1] as usize;
                acc += self.c[p[0] as usize] * l.deg[j] as f64 * f[j];
            }
            let dk = l.deg[k] as f64;
            f[k] = (dk * self.c[k] - acc) / (g0 * dk);
        }
        Jet { order: self.order, c: f }
    }

    pub fn sqrt(&self) -> Jet {
        let l = layout();
        let n = self.c.len();
        let mut f: Coeffs = SmallVec::from_elem(0.0, n);
        f[0] = self.c[0].sqrt();
        for k in 1..n {
            let (s, e) = (l.pair_start[k] as usize + 1, l.pair_start[k + 1] as usize - 1);
            let mut acc = 0.0;
            for p in &l.pairs[s..e] {
                acc += f[p[0] as usize] * f[p[1] as usize];
            }
            f[k] = (self.c[k] - acc) / (2.0 * f[0]);
        }
        Jet { order: self.order, c: f }
    }

    pub fn sin_cos(&self) -> (Jet, Jet) {
        // Coupled Euler recurrences: E s = c E g, E c = -s E g.
        let l = layout();
        let n = self.c.len();
        let mut s: Coeffs = SmallVec::from_elem(0.0, n);
        let mut c: Coeffs = SmallVec::from_elem(0.0, n);
        s[0] = self.c[0].sin();
        c[0] = self.c[0].cos();
        for k in 1..n {
            let (a, e) = (l.pair_start[k] as usize + 1, l.pair_start[k + 1] as usize);
            let (mut as_, mut ac) = (0.0, 0.0);
            for p in &l.pairs[a..e] {
                let i = p[0] as usize;
                let w = l.deg[i] as f64 * self.c[i];
                as_ += w * c[p[1] as usize];
                ac -= w * s[p[1] as usize];
            }
            let dk = l.deg[k] as f64;
            s[k] = as_ / dk;
            c[k] = ac / dk;
        }
        (Jet { order: self.order, c: s }, Jet { order: self.order, c })
    }

    /// Partial derivative with respect to `var`; the order drops by one.
    pub fn d(&self, var: usize) -> Jet {
        assert!(self.order > 0, "cannot differentiate an order-0 jet");
        let l = layout();
        let n = l.count[self.order - 1];
        Jet {
            order: self.order - 1,
            c: l.deriv[var][..n].iter().map(|&(src, f)| f * self.c[src as usize]).collect(),
        }
    }

    /// Substitute `inputs` (jets about a common base point) for the four
    /// variables of `self`. The constant terms of `inputs` are taken to be
    /// the base point of `self`.
    pub fn compose(&self, inputs: &[Jet; NVAR]) -> Jet {
        let mo = inputs.iter().map(|j| j.order).min().unwrap();
        let m = mo.min(self.order);
        let nil: Vec<Jet> = inputs
            .iter()
            .map(|j| {
                let mut t = j.truncate(m);
                t.c[0] = 0.0;
                t
            })
            .collect();
        let pw: Vec<Vec<Jet>> = nil
            .iter()
            .map(|z| {
                let mut v = vec![Jet::constant(1.0, m)];
                for e in 1..=m {
                    let nx = v[e - 1].times(z);
                    v.push(nx);
                }
                v
            })
            .collect();
        let mut out = Jet::zero(m);
        for e0 in 0..=m {
            for e1 in 0..=m - e0 {
                let p01 = pw[0][e0].times(&pw[1][e1]);
                for e2 in 0..=m - e0 - e1 {
                    let mut inner = Jet::zero(m);
                    let mut any = false;
                    for e3 in 0..=m - e0 - e1 - e2 {
                        let cf = self.coeff([e0, e1, e2, e3]);
                        if cf != 0.0 {
                            inner = inner.axpy(cf, &pw[3][e3]);
                            any = true;
                        }
                    }
                    if any {
                        let p = p01.times(&pw[2][e2]).times(&inner);
                        out = &out + &p;
                    }
                }
            }
        }
        out
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident, $body:expr) => {
        impl $tr<&Jet> for &Jet {
            type Output = Jet;
            fn $f(self, o: &Jet) -> Jet {
                $body(self, o)
            }
        }
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $f(self, o: Jet) -> Jet {
                $body(&self, &o)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $f(self, o: &Jet) -> Jet {
                $body(&self, o)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $f(self, o: Jet) -> Jet {
                $body(self, &o)
            }
        }
    };
}

binop!(Add, add, |a: &Jet, b: &Jet| a.zip(b, |x, y| x + y));
binop!(Sub, sub, |a: &Jet, b: &Jet| a.zip(b, |x, y| x - y));
binop!(Mul, mul, |a: &Jet, b: &Jet| Jet::times(a, b));

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        self.scale(s)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        self.scale(s)
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, s: f64) -> Jet {
        self.add_scalar(s)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, s: f64) -> Jet {
        self.add_scalar(s)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn layout_counts_match_binomials() {
        for m in 0..=MAX_ORDER {
            let expect = (m + 1) * (m + 2) * (m + 3) * (m + 4) / 24;
            assert_eq!(ncoef(m), expect);
        }
    }

    #[test]
    fn product_of_polynomials() {
        // (1 + x + 2y)(3 - t) = 3 + 3x + 6y - t - xt - 2yt
        let x = Jet::variable(0, 0.0, 3);
        let y = Jet::variable(1, 0.0, 3);
        let t = Jet::variable(3, 0.0, 3);
        let p = (&(&x + &(&y * 2.0)) + 1.0) * (&(-&t) + 3.0);
        assert_eq!(p.coeff([0, 0, 0, 0]), 3.0);
        assert_eq!(p.coeff([1, 0, 0, 0]), 3.0);
        assert_eq!(p.coeff([0, 1, 0, 0]), 6.0);
        assert_eq!(p.coeff([1, 0, 0, 1]), -1.0);
        assert_eq!(p.coeff([0, 1, 0, 1]), -2.0);
        assert_eq!(p.coeff([2, 0, 0, 0]), 0.0);
    }

    #[test]
    fn exp_ln_recip_sqrt_match_one_variable_series() {
        let m = 8;
        let x = Jet::variable(2, 0.3, m);
        let e = x.exp();
        let r = x.recip();
        let s = x.sqrt();
        let l = x.ln();
        let mut fact = 1.0;
        for k in 0..=m {
            if k > 0 {
                fact *= k as f64;
            }
            assert!(close(e.partial([0, 0, k, 0]), 0.3f64.exp(), 1e-13));
            let dr = (-1f64).powi(k as i32) * fact / 0.3f64.powi(k as i32 + 1);
            assert!(close(r.partial([0, 0, k, 0]), dr, 1e-12));
            if k >= 1 {
                let dl = (-1f64).powi(k as i32 - 1) * (fact / k as f64) / 0.3f64.powi(k as i32);
                assert!(close(l.partial([0, 0, k, 0]), dl, 1e-12));
            }
        }
        assert!(close(s.partial([0, 0, 1, 0]), 0.5 / 0.3f64.sqrt(), 1e-14));
        assert!(close(s.partial([0, 0, 2, 0]), -0.25 * 0.3f64.powf(-1.5), 1e-13));
    }

    #[test]
    fn sin_cos_derivatives() {
        let x = Jet::variable(0, 0.7, 5);
        let y = Jet::variable(3, -0.2, 5);
        let (s, c) = (&x * &y).sin_cos();
        // d/dx sin(xy) = y cos(xy); d2/dxdy = cos(xy) - xy sin(xy)
        let xy = 0.7 * -0.2f64;
        assert!(close(s.partial([1, 0, 0, 0]), -0.2 * xy.cos(), 1e-14));
        assert!(close(s.partial([1, 0, 0, 1]), xy.cos() - xy * xy.sin(), 1e-13));
        assert!(close(c.partial([0, 0, 0, 2]), -0.49 * xy.cos(), 1e-13));
    }

    #[test]
    fn derivative_shifts_coefficients() {
        let p = Jet::point([0.5, -1.0, 2.0, 0.25], 4);
        let f = p[0].times(&p[1]).times(&p[3]).times(&p[3]);
        let df = f.d(3);
        assert_eq!(df.order(), 3);
        assert!(close(df.value(), 2.0 * 0.5 * -1.0 * 0.25, 1e-15));
        assert!(close(df.partial([1, 1, 0, 1]), 2.0, 1e-15));
    }

    #[test]
    fn composition_matches_direct_evaluation() {
        let m = 5;
        let outer_in = Jet::point([0.4, 0.1, -0.3, 0.2], m);
        let outer = (&outer_in[0] * &outer_in[3] + &outer_in[1].square()).exp();
        let base = Jet::point([1.0, 2.0, 0.5, -0.5], m);
        let inner: [Jet; 4] = [
            (&base[0] * &base[1]) + (0.4 - 2.0),
            base[2].sin_cos().0 + (0.1 - 0.5f64.sin()),
            (&base[3] * 2.0) + 0.7,
            base[0].add_scalar(-0.8),
        ];
        let via_compose = outer.compose(&inner);
        let direct = (&inner[0] * &inner[3] + inner[1].square()).exp();
        for (a, b) in via_compose.coeffs().iter().zip(direct.coeffs()) {
            assert!(close(*a, *b, 1e-12), "{a} vs {b}");
        }
    }

    #[test]
    fn division_inverts_multiplication() {
        let p = Jet::point([0.3, 0.2, 0.1, 0.9], 6);
        let g = (&p[0] + &p[3]).exp() + 1.0;
        let u = &p[1] * &p[2] + 2.0;
        let q = u.div(&g);
        let back = q.times(&g);
        for (a, b) in back.coeffs().iter().zip(u.coeffs()) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
