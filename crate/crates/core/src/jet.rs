//! Truncated Taylor series used to differentiate the standard bump and step profiles.

use alloc::vec;
use alloc::vec::Vec;

/// Coefficients `c_k` of `Σ c_k ε^k`, truncated at a fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet(pub Vec<f64>);

impl Jet {
    pub fn variable(x0: f64, order: usize) -> Jet {
        let mut c = vec![0.0; order + 1];
        c[0] = x0;
        if order > 0 {
            c[1] = 1.0;
        }
        Jet(c)
    }

    pub fn constant(v: f64, order: usize) -> Jet {
        let mut c = vec![0.0; order + 1];
        c[0] = v;
        Jet(c)
    }

    fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn add(&self, o: &Jet) -> Jet {
        Jet(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet(self.0.iter().map(|a| a * s).collect())
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let n = self.order();
        let mut c = vec![0.0; n + 1];
        for i in 0..=n {
            for j in 0..=n - i {
                c[i + j] += self.0[i] * o.0[j];
            }
        }
        Jet(c)
    }

    pub fn recip(&self) -> Jet {
        let n = self.order();
        let a0 = self.0[0];
        let mut r = vec![0.0; n + 1];
        r[0] = 1.0 / a0;
        for k in 1..=n {
            let mut s = 0.0;
            for j in 1..=k {
                s += self.0[j] * r[k - j];
            }
            r[k] = -s / a0;
        }
        Jet(r)
    }

    pub fn exp(&self) -> Jet {
        let n = self.order();
        let mut e = vec![0.0; n + 1];
        e[0] = libm::exp(self.0[0]);
        // e' = a' e  ⇒  k e_k = Σ j a_j e_{k−j}
        for k in 1..=n {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.0[j] * e[k - j];
            }
            e[k] = s / k as f64;
        }
        Jet(e)
    }

    /// `k`-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        let mut f = 1.0;
        for i in 2..=k {
            f *= i as f64;
        }
        self.0[k] * f
    }
}

/// Below this argument `exp(−1/x)` and all its low derivatives underflow.
const CUTOFF: f64 = 2.0e-3;

/// Jet of `g(x) = exp(−1/x)` (zero for `x ≤ 0`).
fn g_jet(x: &Jet) -> Jet {
    if x.0[0] <= CUTOFF {
        return Jet::constant(0.0, x.order());
    }
    x.recip().scale(-1.0).exp()
}

/// `k`-th derivative of `b(t) = exp(−1/(1−t²))` on `|t| < 1`, zero outside.
pub fn bump_derivative(t: f64, k: usize) -> f64 {
    let s = 1.0 - t * t;
    if s <= CUTOFF {
        return 0.0;
    }
    match k {
        0 => return libm::exp(-1.0 / s),
        1 => return libm::exp(-1.0 / s) * (-2.0 * t / (s * s)),
        _ => {}
    }
    let tj = Jet::variable(t, k);
    let one_minus = Jet::constant(1.0, k).add(&tj.mul(&tj).scale(-1.0));
    g_jet(&one_minus).derivative(k)
}

/// `k`-th derivative of the smooth step `h(s) = g(s)/(g(s)+g(1−s))`.
pub fn step_derivative(s: f64, k: usize) -> f64 {
    if s <= CUTOFF {
        return 0.0;
    }
    if s >= 1.0 - CUTOFF {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let sj = Jet::variable(s, k);
    let a = g_jet(&sj);
    let b = g_jet(&Jet::constant(1.0, k).add(&sj.scale(-1.0)));
    a.mul(&a.add(&b).recip()).derivative(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite_difference(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-5;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn bump_derivatives_match_differences() {
        for &t in &[-0.7, -0.2, 0.0, 0.3, 0.85] {
            for k in 0..4 {
                let fd = finite_difference(|x| bump_derivative(x, k), t);
                let d = bump_derivative(t, k + 1);
                assert!((fd - d).abs() < 1e-5 * (1.0 + d.abs()), "t={t} k={k}: {fd} vs {d}");
            }
        }
    }

    #[test]
    fn step_is_monotone_and_symmetric() {
        for &s in &[0.1, 0.25, 0.5, 0.7, 0.95] {
            let v = step_derivative(s, 0);
            assert!((v + step_derivative(1.0 - s, 0) - 1.0).abs() < 1e-14);
            assert!(step_derivative(s, 1) > 0.0);
            let fd = finite_difference(|x| step_derivative(x, 1), s);
            assert!((fd - step_derivative(s, 2)).abs() < 1e-4);
        }
        assert_eq!(step_derivative(-1.0, 0), 0.0);
        assert_eq!(step_derivative(2.0, 0), 1.0);
    }
}
