//! Minimal double-double arithmetic.
//!
//! A `Dd` is an unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`, giving
//! roughly 32 significant decimal digits. It is used in exactly two places
//! where plain `f64` runs out of headroom:
//!
//! * the Maclaurin window of the Airy kernel, where `Ai = c1*f - c2*g`
//!   cancels catastrophically for moderate arguments, and
//! * the reduction of the oscillatory phase `zeta` modulo `2*pi` on the
//!   negative axis, where phase error translates directly into band-edge
//!   error.
//!
//! Only the operations those two call sites need are implemented.

/// Double-double number: value is `hi + lo`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

/// Error-free sum: returns `(s, e)` with `a + b = s + e` exactly.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Error-free sum assuming `|a| >= |b|`.
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// Error-free product via fused multiply-add.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    /// Ai(0) = 3^(-2/3)/Gamma(2/3).
    pub const C1: Dd = Dd {
        hi: 0.3550280538878172,
        lo: 2.05233632436212e-17,
    };
    /// -Ai'(0) = 3^(-1/3)/Gamma(1/3).
    pub const C2: Dd = Dd {
        hi: 0.2588194037928068,
        lo: -2.522243111610832e-17,
    };
    pub const SQRT3: Dd = Dd {
        hi: 1.7320508075688772,
        lo: 1.0035084221806903e-16,
    };
    pub const PI: Dd = Dd {
        hi: 3.141592653589793,
        lo: 1.2246467991473532e-16,
    };
    pub const TWO_PI: Dd = Dd {
        hi: 6.283185307179586,
        lo: 2.4492935982947064e-16,
    };
    pub const FRAC_PI_4: Dd = Dd {
        hi: 0.7853981633974483,
        lo: 3.061616997868383e-17,
    };

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            self.neg()
        } else {
            self
        }
    }

    pub fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn sub(self, other: Dd) -> Dd {
        self.add(other.neg())
    }

    pub fn mul(self, other: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, other.hi);
        let e = e + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, other: f64) -> Dd {
        let (p, e) = two_prod(self.hi, other);
        let e = e + self.lo * other;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    /// Division by a plain double (one Newton correction on the quotient).
    pub fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let (p, e) = two_prod(q1, d);
        let r = ((self.hi - p) - e) + self.lo;
        let q2 = r / d;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }

    /// Square root (requires a non-negative value).
    pub fn sqrt(self) -> Dd {
        if self.hi == 0.0 {
            return Dd::ZERO;
        }
        let s = self.hi.sqrt();
        // One correction step: s + (x - s^2) / (2 s).
        let (p, e) = two_prod(s, s);
        let diff = ((self.hi - p) - e) + self.lo;
        let corr = diff / (2.0 * s);
        let (hi, lo) = quick_two_sum(s, corr);
        Dd { hi, lo }
    }

    /// Reduce `self` modulo 2*pi into roughly [-pi, pi], keeping double-double
    /// accuracy in the reduced angle. The multiple of 2*pi is bounded by the
    /// size of `hi`, which stays below 2^52 for every argument this crate
    /// produces.
    pub fn rem_two_pi(self) -> Dd {
        let k = (self.hi / Dd::TWO_PI.hi).round();
        if k == 0.0 {
            return self;
        }
        self.sub(Dd::TWO_PI.mul_f64(k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn representation_holds() {
        let a = Dd::from_f64(1.0).div_f64(3.0);
        // 1/3 in double-double: hi is the f64 rounding, lo the residual.
        assert!(a.lo.abs() > 0.0 && a.lo.abs() < f64::EPSILON);
        let b = a.mul_f64(3.0);
        assert!((b.to_f64() - 1.0).abs() < 1e-30);
    }

    #[test]
    fn mul_and_sqrt_agree() {
        let x = Dd::from_f64(2.0).sqrt();
        let y = x.mul(x);
        assert!((y.hi - 2.0).abs() < 1e-15);
        assert!((y.to_f64() - 2.0).abs() < 1e-30);
    }

    #[test]
    fn pi_constant_consistent() {
        // TWO_PI == 2 * PI exactly in the representation.
        let two_pi = Dd::PI.mul_f64(2.0);
        assert_eq!(two_pi.hi, Dd::TWO_PI.hi);
        assert!((two_pi.lo - Dd::TWO_PI.lo).abs() < 1e-31);
    }

    #[test]
    fn phase_reduction() {
        // 1000.25 * 2pi + 0.3 reduces to ~0.3 + pi/2 region checks.
        let big = Dd::TWO_PI.mul_f64(12345.0).add(Dd::from_f64(0.375));
        let r = big.rem_two_pi();
        assert!((r.to_f64() - 0.375).abs() < 1e-28);
    }
}
