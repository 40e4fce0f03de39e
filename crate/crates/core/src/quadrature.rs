//! Adaptive Gauss–Kronrod quadrature in one variable and nested over iterated bounds.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
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

/// Kronrod estimate and `|Kronrod − Gauss|` on `[a, b]`.
pub fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Cell {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Cell {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Cell {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.partial_cmp(&o.err).unwrap_or(Ordering::Equal)
    }
}

/// Quadrature settings: absolute tolerance and subdivision budget per integral.
#[derive(Clone, Copy, Debug)]
pub struct Settings {
    pub tol: f64,
    pub max_cells: usize,
}

impl Settings {
    pub fn new(tol: f64) -> Settings {
        Settings { tol, max_cells: 400 }
    }
}

/// `∫_a^b f` on a finite interval with global error control.
pub fn adaptive(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, s: Settings) -> Result<(f64, f64)> {
    if a >= b {
        return Ok((0.0, 0.0));
    }
    let mut heap = BinaryHeap::new();
    let (v, e) = gk15(f, a, b);
    heap.push(Cell { a, b, value: v, err: e });
    let (mut total, mut err) = (v, e);
    let mut cells = 1;
    while err > s.tol {
        if cells >= s.max_cells {
            return Err(Error::ToleranceNotMet(err));
        }
        let c = heap.pop().expect("nonempty");
        let m = 0.5 * (c.a + c.b);
        if m <= c.a || m >= c.b {
            return Err(Error::ToleranceNotMet(err));
        }
        let (v1, e1) = gk15(f, c.a, m);
        let (v2, e2) = gk15(f, m, c.b);
        total += v1 + v2 - c.value;
        err += e1 + e2 - c.err;
        heap.push(Cell { a: c.a, b: m, value: v1, err: e1 });
        heap.push(Cell { a: m, b: c.b, value: v2, err: e2 });
        cells += 1;
        if err < 0.0 {
            err = heap.iter().map(|c| c.err).sum();
        }
    }
    let _ = total;
    let sum: f64 = heap.iter().map(|c| c.value).sum();
    Ok((sum, err))
}

/// Interval endpoint, possibly infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum End {
    Fin(f64),
    NegInf,
    PosInf,
}

/// `∫_a^b f` where either end may be infinite, via `x = a + t/(1−t)` style maps.
pub fn integrate_1d(f: &mut dyn FnMut(f64) -> f64, a: End, b: End, s: Settings) -> Result<(f64, f64)> {
    match (a, b) {
        (End::Fin(a), End::Fin(b)) => adaptive(f, a, b, s),
        (End::Fin(a), End::PosInf) => {
            let mut g = |t: f64| {
                let w = 1.0 - t;
                let x = a + t / w;
                let v = f(x);
                if v == 0.0 {
                    0.0
                } else {
                    v / (w * w)
                }
            };
            adaptive(&mut g, 0.0, 1.0, s)
        }
        (End::NegInf, End::Fin(b)) => {
            let mut g = |t: f64| {
                let w = 1.0 - t;
                let v = f(b - t / w);
                if v == 0.0 {
                    0.0
                } else {
                    v / (w * w)
                }
            };
            adaptive(&mut g, 0.0, 1.0, s)
        }
        (End::NegInf, End::PosInf) => {
            let (v1, e1) = integrate_1d(f, End::NegInf, End::Fin(0.0), s)?;
            let (v2, e2) = integrate_1d(f, End::Fin(0.0), End::PosInf, s)?;
            Ok((v1 + v2, e1 + e2))
        }
        _ => Ok((0.0, 0.0)),
    }
}

/// `∫ f` over `{x : lo_k(x_<k) ≤ x_k ≤ hi_k(x_<k)}` by nested one-dimensional quadrature.
pub fn nested(
    dim: usize,
    bounds: &dyn Fn(usize, &[f64]) -> (End, End),
    f: &dyn Fn(&[f64]) -> f64,
    s: Settings,
) -> Result<f64> {
    let mut x = Vec::with_capacity(dim);
    let mut failure: Option<Error> = None;
    let v = level(dim, 0, bounds, f, s, &mut x, &mut failure);
    match failure {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

fn level(
    dim: usize,
    k: usize,
    bounds: &dyn Fn(usize, &[f64]) -> (End, End),
    f: &dyn Fn(&[f64]) -> f64,
    s: Settings,
    x: &mut Vec<f64>,
    failure: &mut Option<Error>,
) -> f64 {
    if k == dim {
        return f(x);
    }
    let (a, b) = bounds(k, x);
    if let (End::Fin(a), End::Fin(b)) = (a, b) {
        if a >= b {
            return 0.0;
        }
    }
    // inner integrals get a share of the tolerance scaled by the outer length
    let len = match (a, b) {
        (End::Fin(a), End::Fin(b)) => (b - a).max(1.0),
        _ => 4.0,
    };
    let inner = Settings { tol: s.tol / (4.0 * len), max_cells: s.max_cells };
    let mut g = |t: f64| {
        if failure.is_some() {
            return 0.0;
        }
        x.push(t);
        let v = level(dim, k + 1, bounds, f, inner, x, failure);
        x.pop();
        v
    };
    match integrate_1d(&mut g, a, b, s) {
        Ok((v, _)) => v,
        Err(e) => {
            if failure.is_none() {
                *failure = Some(e);
            }
            0.0
        }
    }
}
