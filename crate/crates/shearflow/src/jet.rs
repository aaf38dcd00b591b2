//! Truncated Taylor series for exact corner derivatives.

use std::ops::{Add, Mul, Neg, Sub};

pub const ORDER: usize = 8;

/// f(x₀ + h) ≈ Σₖ cₖ hᵏ for k < ORDER.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub c: [f64; ORDER],
}

impl Jet {
    pub fn zero() -> Self {
        Self { c: [0.0; ORDER] }
    }

    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; ORDER];
        c[0] = v;
        Self { c }
    }

    /// Builds a jet from derivative values f, f′, f″, ….
    pub fn from_derivatives(d: &[f64]) -> Self {
        let mut c = [0.0; ORDER];
        let mut fact = 1.0;
        for (k, slot) in c.iter_mut().enumerate().take(d.len()) {
            if k > 0 {
                fact *= k as f64;
            }
            *slot = d[k] / fact;
        }
        Self { c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// k-th derivative at the expansion point.
    pub fn derivative_at(&self, k: usize) -> f64 {
        if k >= ORDER {
            return 0.0;
        }
        let fact: f64 = (1..=k).map(|v| v as f64).product();
        self.c[k] * fact
    }

    pub fn deriv(&self) -> Self {
        let mut c = [0.0; ORDER];
        for k in 0..ORDER - 1 {
            c[k] = (k + 1) as f64 * self.c[k + 1];
        }
        Self { c }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { c: self.c.map(|v| v * s) }
    }

    pub fn recip(&self) -> Self {
        let a0 = self.c[0];
        let mut r = [0.0; ORDER];
        r[0] = 1.0 / a0;
        for k in 1..ORDER {
            let s: f64 = (1..=k).map(|j| self.c[j] * r[k - j]).sum();
            r[k] = -s / a0;
        }
        Self { c: r }
    }

    pub fn div(&self, other: &Self) -> Self {
        *self * other.recip()
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut c = self.c;
        c.iter_mut().zip(o.c).for_each(|(a, b)| *a += b);
        Jet { c }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut c = [0.0; ORDER];
        for i in 0..ORDER {
            for j in 0..ORDER - i {
                c[i + j] += self.c[i] * o.c[j];
            }
        }
        Jet { c }
    }
}
