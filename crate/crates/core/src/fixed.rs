//! Signed fixed-point numbers with 128 fractional bits.
//!
//! A [`Fixed`] is `int + frac / 2^128` with `int: i64` and `frac: u128`, so the
//! fractional part is always non-negative and the representation is unique.
//! Addition, subtraction and multiplication by integers are exact; overflow of
//! the integer part panics instead of wrapping.
//!
//! Values taken modulo one live on the torus `u128 = ℤ/2^128`, where integer
//! multiplication is plain wrapping multiplication. The hot loops in this crate
//! work there directly.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::ToPrimitive;

pub const FRAC_BITS: u32 = 128;
const HALF_TURN: u128 = 1 << 127;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Fixed {
    int: i64,
    frac: u128,
}

impl Fixed {
    pub const ZERO: Fixed = Fixed { int: 0, frac: 0 };
    pub const ONE: Fixed = Fixed { int: 1, frac: 0 };
    pub const HALF: Fixed = Fixed {
        int: 0,
        frac: HALF_TURN,
    };

    pub const fn from_parts(int: i64, frac: u128) -> Self {
        Fixed { int, frac }
    }

    pub const fn from_int(n: i64) -> Self {
        Fixed { int: n, frac: 0 }
    }

    /// A point of the torus `[0, 1)`.
    pub const fn from_frac(frac: u128) -> Self {
        Fixed { int: 0, frac }
    }

    pub fn int_part(self) -> i64 {
        self.int
    }

    /// Fractional part `{x} ∈ [0, 1)` as a torus element.
    pub fn frac(self) -> u128 {
        self.frac
    }

    pub fn floor(self) -> i64 {
        self.int
    }

    pub fn is_integer(self) -> bool {
        self.frac == 0
    }

    /// Exact value of `num / den` rounded to the nearest multiple of `2^-128`.
    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let scaled = (BigInt::from(num) << FRAC_BITS) * 2 + BigInt::from(den);
        let den2 = BigInt::from(den) * 2;
        // floor((2 num 2^128 + den) / (2 den)) = round-half-up of num 2^128 / den
        let q = floor_div(&scaled, &den2);
        Self::from_scaled(&q).expect("ratio out of range")
    }

    /// Exact conversion; every finite f64 of moderate size is a dyadic rational.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite input");
        let floor = x.floor();
        let rest = x - floor;
        let int = floor as i64;
        // rest ∈ [0,1) has at most 53 significant bits, all above 2^-1074; the
        // ones below 2^-128 are dropped.
        let frac = (rest * 2f64.powi(64)).floor();
        let hi = frac as u128;
        let lo_part = rest * 2f64.powi(64) - frac;
        let lo = (lo_part * 2f64.powi(64)) as u128;
        Fixed {
            int,
            frac: (hi << 64) | lo,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.int as f64 + self.frac as f64 * 2f64.powi(-128)
    }

    /// The value multiplied by `2^128`, as an exact integer.
    pub fn to_scaled(self) -> BigInt {
        (BigInt::from(self.int) << FRAC_BITS) + BigInt::from(self.frac)
    }

    pub fn from_scaled(v: &BigInt) -> Option<Self> {
        let int = floor_shift(v, FRAC_BITS);
        let frac = v - (&int << FRAC_BITS);
        Some(Fixed {
            int: int.to_i64()?,
            frac: frac.to_u128()?,
        })
    }

    pub fn abs(self) -> Self {
        if self.int < 0 {
            -self
        } else {
            self
        }
    }

    pub fn is_negative(self) -> bool {
        self.int < 0
    }

    /// Distance to the nearest integer, `‖x‖ ∈ [0, 1/2]`.
    pub fn dist(self) -> Fixed {
        Fixed::from_frac(torus_dist(self.frac))
    }

    /// Nearest integer, ties rounded away from zero.
    pub fn round_half_away(self) -> i64 {
        match self.frac.cmp(&HALF_TURN) {
            Ordering::Less => self.int,
            Ordering::Greater => self.int + 1,
            Ordering::Equal => {
                if self.int >= 0 {
                    self.int + 1
                } else {
                    self.int
                }
            }
        }
    }

    /// Exact product with an integer; panics if the integer part overflows.
    pub fn mul_int(self, k: i64) -> Fixed {
        self.checked_mul_int(k).expect("fixed-point overflow")
    }

    pub fn checked_mul_int(self, k: i64) -> Option<Fixed> {
        let m = k.unsigned_abs();
        let lo = (self.frac & u64::MAX as u128) * m as u128;
        let hi = (self.frac >> 64) * m as u128;
        let (low128, carry) = lo.overflowing_add(hi << 64);
        let high = (hi >> 64) + carry as u128;
        let int = self
            .int
            .checked_mul(i64::try_from(m).ok()?)?
            .checked_add(i64::try_from(high).ok()?)?;
        let r = Fixed { int, frac: low128 };
        Some(if k < 0 { r.checked_neg()? } else { r })
    }

    pub fn checked_neg(self) -> Option<Fixed> {
        if self.frac == 0 {
            Some(Fixed {
                int: self.int.checked_neg()?,
                frac: 0,
            })
        } else {
            Some(Fixed {
                int: self.int.checked_neg()?.checked_sub(1)?,
                frac: self.frac.wrapping_neg(),
            })
        }
    }

    pub fn checked_add(self, o: Fixed) -> Option<Fixed> {
        let (frac, c) = self.frac.overflowing_add(o.frac);
        Some(Fixed {
            int: self.int.checked_add(o.int)?.checked_add(c as i64)?,
            frac,
        })
    }

    /// Product scaled by `2^256`, exact.
    pub fn mul_exact(self, o: Fixed) -> BigInt {
        self.to_scaled() * o.to_scaled()
    }

    /// Product rounded down to 128 fractional bits.
    pub fn mul_floor(self, o: Fixed) -> Fixed {
        let p = self.mul_exact(o);
        Fixed::from_scaled(&floor_shift(&p, FRAC_BITS)).expect("fixed-point overflow")
    }

    /// Decimal rendering with `digits` fractional digits (truncated).
    pub fn to_decimal(self, digits: usize) -> String {
        let neg = self.is_negative();
        let a = self.abs();
        let mut out = format!("{}{}.", if neg { "-" } else { "" }, a.int);
        let mut f = BigInt::from(a.frac);
        for _ in 0..digits {
            f *= 10;
            let d = &f >> FRAC_BITS;
            out.push(char::from(b'0' + d.to_u8().unwrap_or(0)));
            f -= d << FRAC_BITS;
        }
        out
    }
}

impl PartialOrd for Fixed {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fixed {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.int, self.frac).cmp(&(other.int, other.frac))
    }
}

impl Add for Fixed {
    type Output = Fixed;
    fn add(self, o: Fixed) -> Fixed {
        self.checked_add(o).expect("fixed-point overflow")
    }
}

impl AddAssign for Fixed {
    fn add_assign(&mut self, o: Fixed) {
        *self = *self + o;
    }
}

impl Neg for Fixed {
    type Output = Fixed;
    fn neg(self) -> Fixed {
        self.checked_neg().expect("fixed-point overflow")
    }
}

impl Sub for Fixed {
    type Output = Fixed;
    fn sub(self, o: Fixed) -> Fixed {
        self + (-o)
    }
}

impl SubAssign for Fixed {
    fn sub_assign(&mut self, o: Fixed) {
        *self = *self - o;
    }
}

impl fmt::Debug for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fixed({})", self.to_decimal(24))
    }
}

impl fmt::Display for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(38);
        f.write_str(&self.to_decimal(digits))
    }
}

/// `‖t‖` for a torus element `t`, as a torus element in `[0, 2^127]`.
#[inline]
pub fn torus_dist(t: u128) -> u128 {
    if t <= HALF_TURN {
        t
    } else {
        t.wrapping_neg()
    }
}

/// Integer multiple of a torus element, exact modulo one.
#[inline]
pub fn torus_mul(k: i128, t: u128) -> u128 {
    (k as u128).wrapping_mul(t)
}

#[inline]
pub fn torus_to_f64(t: u128) -> f64 {
    t as f64 * 2f64.powi(-128)
}

pub(crate) fn floor_shift(v: &BigInt, bits: u32) -> BigInt {
    // `>>` on negative BigInt rounds toward negative infinity.
    v >> bits
}

pub(crate) fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    use num_integer::Integer;
    a.div_floor(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_and_rounding() {
        let q = Fixed::from_ratio(1, 4);
        assert_eq!(q.frac(), 1u128 << 126);
        assert_eq!(Fixed::from_ratio(-1, 2).int_part(), -1);
        assert_eq!(Fixed::from_ratio(-1, 2).frac(), 1u128 << 127);
        assert_eq!(Fixed::from_ratio(5, 2).round_half_away(), 3);
        assert_eq!(Fixed::from_ratio(-5, 2).round_half_away(), -3);
        assert_eq!(Fixed::from_ratio(-7, 3).round_half_away(), -2);
    }

    #[test]
    fn mul_int_matches_bigint() {
        let x = Fixed::from_parts(3, 0x1234_5678_9abc_def0_fedc_ba98_7654_3210);
        for k in [-1_000_003i64, -7, -1, 0, 1, 2, 99_991, 1 << 40] {
            let got = x.mul_int(k).to_scaled();
            assert_eq!(got, x.to_scaled() * k);
        }
    }

    #[test]
    fn dist_and_negation() {
        let x = Fixed::from_ratio(9, 10);
        assert!((x.dist().to_f64() - 0.1).abs() < 1e-15);
        assert_eq!((-x).to_scaled(), -x.to_scaled());
        assert_eq!(Fixed::from_int(-2).dist(), Fixed::ZERO);
        assert_eq!(Fixed::HALF.dist(), Fixed::HALF);
    }

    #[test]
    fn from_f64_is_exact_for_dyadics() {
        assert_eq!(Fixed::from_f64(-2.75), Fixed::from_ratio(-11, 4));
        assert_eq!(Fixed::from_f64(0.3).to_f64(), 0.3);
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(Fixed::from_ratio(1, 8).to_decimal(4), "0.1250");
        assert_eq!(Fixed::from_ratio(-3, 2).to_decimal(2), "-1.50");
    }
}
