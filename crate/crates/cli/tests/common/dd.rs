//! Double-double arithmetic (about 32 significant digits) implementing the
//! library's scalar trait, so losses can be evaluated well below f64 noise.

use std::ops::{Add, Div, Mul, Neg, Sub};

use hyperkern::diff::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DD {
    pub hi: f64,
    pub lo: f64,
}

const LN2: DD = DD {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl DD {
    pub fn new(x: f64) -> Self {
        DD { hi: x, lo: 0.0 }
    }

    fn norm(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        DD { hi, lo }
    }

    fn scale(self, s: f64) -> Self {
        DD {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

impl Add for DD {
    type Output = DD;
    fn add(self, b: DD) -> DD {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        DD::norm(s, e + f)
    }
}

impl Neg for DD {
    type Output = DD;
    fn neg(self) -> DD {
        DD {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for DD {
    type Output = DD;
    fn sub(self, b: DD) -> DD {
        self + (-b)
    }
}

impl Mul for DD {
    type Output = DD;
    fn mul(self, b: DD) -> DD {
        let p = self.hi * b.hi;
        let e = self.hi.mul_add(b.hi, -p) + (self.hi * b.lo + self.lo * b.hi);
        DD::norm(p, e)
    }
}

impl Div for DD {
    type Output = DD;
    fn div(self, b: DD) -> DD {
        let q1 = self.hi / b.hi;
        let r = self - b * DD::new(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * DD::new(q2);
        let q3 = r.hi / b.hi;
        DD::norm(q1, q2) + DD::new(q3)
    }
}

macro_rules! scalar_ops {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr<f64> for DD {
            type Output = DD;
            fn $f(self, b: f64) -> DD {
                $tr::$f(self, DD::new(b))
            }
        }
    )*};
}
scalar_ops!(Add add, Sub sub, Mul mul, Div div);

impl Real for DD {
    fn from_f64(x: f64) -> Self {
        DD::new(x)
    }

    fn value(self) -> f64 {
        self.to_f64()
    }

    fn exp(self) -> Self {
        if self.hi > 709.0 {
            return DD::new(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return DD::new(0.0);
        }
        let k = (self.hi / LN2.hi).round();
        // r in [-ln2/2, ln2/2], then divided by 2^10 so the series converges fast.
        let r = (self - LN2 * DD::new(k)).scale(1.0 / 1024.0);
        let mut term = DD::new(1.0);
        let mut sum = DD::new(1.0);
        for n in 1..=20 {
            term = term * r / (n as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-34 {
                break;
            }
        }
        for _ in 0..10 {
            sum = sum * sum;
        }
        sum.scale(2f64.powi(k as i32))
    }

    fn ln(self) -> Self {
        let mut y = DD::new(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp() - 1.0;
        }
        y
    }

    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return DD::new(0.0);
        }
        let y = DD::new(self.hi.sqrt());
        y + (self - y * y) / (y * 2.0)
    }

    fn tanh(self) -> Self {
        if self.hi < 0.0 {
            return -(-self).tanh();
        }
        if self.hi > 40.0 {
            return DD::new(1.0);
        }
        let e = (self * 2.0).exp();
        (e - 1.0) / (e + 1.0)
    }

    fn powi(self, n: i32) -> Self {
        let mut base = self;
        let mut k = n.unsigned_abs();
        let mut acc = DD::new(1.0);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        if n < 0 {
            DD::new(1.0) / acc
        } else {
            acc
        }
    }
}

/// Panics unless the elementary functions reach well beyond f64 accuracy.
pub fn self_check() {
    {
        let third = DD::new(1.0) / DD::new(3.0);
        assert!((third * 3.0 - 1.0).hi.abs() < 1e-31);
        let e = DD::new(1.0).exp();
        // e = 2.718281828459045 + 1.4456468917292502e-16
        let err = (e - DD { hi: std::f64::consts::E, lo: 1.4456468917292502e-16 }).hi.abs();
        assert!(err < 1e-28, "exp error {err:e}");
        let err = (e.ln() - 1.0).hi.abs();
        assert!(err < 1e-28, "ln error {err:e}");
        let two = DD::new(2.0).sqrt();
        assert!((two * two - 2.0).hi.abs() < 1e-30);
        let t = DD::new(0.5).tanh();
        assert!((t.to_f64() - 0.5f64.tanh()).abs() < 1e-16);
        assert!((DD::new(1.1).powi(-3) * DD::new(1.1).powi(3) - 1.0).hi.abs() < 1e-30);
    }
}
