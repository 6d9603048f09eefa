//! Arbitrary-precision binary fixed-point reals.
//!
//! A [`HiReal`] is `mant / 2^prec` with a `BigInt` mantissa. This is all the
//! high-precision machinery the crate needs: preset constants, the ω-coordinate
//! conversion, theta/Poisson cross-checks and 256-bit re-verification. Absolute
//! error of every elementary function is a small multiple of `2^-prec`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::fixed::{Fixed, FRAC_BITS};

const GUARD: u32 = 64;

#[derive(Clone, PartialEq, Eq)]
pub struct HiReal {
    mant: BigInt,
    prec: u32,
}

fn round_shift(v: &BigInt, bits: u32) -> BigInt {
    if bits == 0 {
        return v.clone();
    }
    // floor((v + 2^(bits-1)) / 2^bits) without building the half
    ((v >> (bits - 1)) + 1u32) >> 1
}

impl HiReal {
    pub fn from_mantissa(mant: BigInt, prec: u32) -> Self {
        HiReal { mant, prec }
    }

    pub fn zero(prec: u32) -> Self {
        HiReal {
            mant: BigInt::zero(),
            prec,
        }
    }

    pub fn from_int(n: i64, prec: u32) -> Self {
        HiReal {
            mant: BigInt::from(n) << prec,
            prec,
        }
    }

    pub fn from_ratio(num: i64, den: i64, prec: u32) -> Self {
        let n = BigInt::from(num) << prec;
        HiReal {
            mant: div_round(&n, &BigInt::from(den)),
            prec,
        }
    }

    pub fn from_fixed(x: Fixed, prec: u32) -> Self {
        HiReal::from_mantissa(x.to_scaled(), FRAC_BITS).with_prec(prec)
    }

    pub fn from_f64(x: f64, prec: u32) -> Self {
        assert!(x.is_finite());
        // x = m 2^e exactly with integer m
        let (m, e) = decompose_f64(x);
        let mant = if e as i64 + prec as i64 >= 0 {
            BigInt::from(m) << (e + prec as i32) as u32
        } else {
            round_shift(&BigInt::from(m), (-(e + prec as i32)) as u32)
        };
        HiReal { mant, prec }
    }

    /// Parses `[-]digits[.digits][e[-]digits]`; returns the value and the
    /// number of significant decimal digits supplied.
    pub fn parse_decimal(s: &str, prec: u32) -> Result<(Self, usize)> {
        let bad = || Error::InvalidInput(format!("not a decimal number: `{s}`"));
        let s = s.trim();
        let (neg, body) = match s.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (num_part, exp_part) = match body.find(['e', 'E']) {
            Some(i) => (&body[..i], Some(&body[i + 1..])),
            None => (body, None),
        };
        let (ip, fp) = match num_part.find('.') {
            Some(i) => (&num_part[..i], &num_part[i + 1..]),
            None => (num_part, ""),
        };
        if ip.is_empty() && fp.is_empty() {
            return Err(bad());
        }
        if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: String = format!("{ip}{fp}");
        let sig = digits.trim_start_matches('0').len();
        let mut int = BigInt::parse_bytes(digits.as_bytes(), 10).ok_or_else(bad)?;
        let mut exp10: i64 = -(fp.len() as i64);
        if let Some(e) = exp_part {
            exp10 += e.parse::<i64>().map_err(|_| bad())?;
        }
        if neg {
            int = -int;
        }
        let mant = if exp10 >= 0 {
            (int * BigInt::from(10u32).pow(exp10 as u32)) << prec
        } else {
            let den = BigInt::from(10u32).pow((-exp10) as u32);
            div_round(&(int << prec), &den)
        };
        Ok((HiReal { mant, prec }, sig))
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    /// Re-expresses at another precision (rounding to nearest when reducing).
    pub fn with_prec(&self, prec: u32) -> Self {
        let mant = match prec.cmp(&self.prec) {
            Ordering::Equal => self.mant.clone(),
            Ordering::Greater => &self.mant << (prec - self.prec),
            Ordering::Less => round_shift(&self.mant, self.prec - prec),
        };
        HiReal { mant, prec }
    }

    fn aligned(&self, o: &HiReal) -> (BigInt, BigInt, u32) {
        let p = self.prec.max(o.prec);
        (
            self.with_prec(p).mant,
            o.with_prec(p).mant,
            p,
        )
    }

    pub fn add(&self, o: &HiReal) -> HiReal {
        if self.prec == o.prec {
            return HiReal { mant: &self.mant + &o.mant, prec: self.prec };
        }
        let (a, b, p) = self.aligned(o);
        HiReal { mant: a + b, prec: p }
    }

    pub fn sub(&self, o: &HiReal) -> HiReal {
        if self.prec == o.prec {
            return HiReal { mant: &self.mant - &o.mant, prec: self.prec };
        }
        let (a, b, p) = self.aligned(o);
        HiReal { mant: a - b, prec: p }
    }

    pub fn neg(&self) -> HiReal {
        HiReal {
            mant: -&self.mant,
            prec: self.prec,
        }
    }

    pub fn mul(&self, o: &HiReal) -> HiReal {
        if self.prec == o.prec {
            return HiReal { mant: round_shift(&(&self.mant * &o.mant), self.prec), prec: self.prec };
        }
        let (a, b, p) = self.aligned(o);
        HiReal {
            mant: round_shift(&(a * b), p),
            prec: p,
        }
    }

    pub fn div(&self, o: &HiReal) -> HiReal {
        let (a, b, p) = self.aligned(o);
        assert!(!b.is_zero(), "division by zero");
        HiReal {
            mant: div_round(&(a << p), &b),
            prec: p,
        }
    }

    pub fn mul_int(&self, k: i64) -> HiReal {
        HiReal {
            mant: &self.mant * k,
            prec: self.prec,
        }
    }

    pub fn mul_big(&self, k: &BigInt) -> HiReal {
        HiReal {
            mant: &self.mant * k,
            prec: self.prec,
        }
    }

    pub fn div_int(&self, k: i64) -> HiReal {
        HiReal {
            mant: div_round(&self.mant, &BigInt::from(k)),
            prec: self.prec,
        }
    }

    pub fn mul_pow2(&self, e: i32) -> HiReal {
        let mant = if e >= 0 {
            &self.mant << e as u32
        } else {
            round_shift(&self.mant, (-e) as u32)
        };
        HiReal {
            mant,
            prec: self.prec,
        }
    }

    pub fn abs(&self) -> HiReal {
        HiReal {
            mant: self.mant.abs(),
            prec: self.prec,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn floor(&self) -> BigInt {
        &self.mant >> self.prec
    }

    /// Nearest integer, ties away from zero.
    pub fn round(&self) -> BigInt {
        let half = BigInt::one() << (self.prec - 1);
        if self.mant.is_negative() {
            -((-&self.mant + half) >> self.prec)
        } else {
            (&self.mant + half) >> self.prec
        }
    }

    /// Fractional part in `[0, 1)`.
    pub fn fract(&self) -> HiReal {
        let f = &self.mant - (self.floor() << self.prec);
        HiReal {
            mant: f,
            prec: self.prec,
        }
    }

    /// Distance to the nearest integer.
    pub fn dist_to_int(&self) -> HiReal {
        let f = self.fract();
        let one = BigInt::one() << self.prec;
        let other = &one - &f.mant;
        HiReal {
            mant: f.mant.clone().min(other),
            prec: self.prec,
        }
    }

    pub fn sqrt(&self) -> HiReal {
        assert!(!self.mant.is_negative(), "sqrt of negative");
        HiReal {
            mant: (&self.mant << self.prec).sqrt(),
            prec: self.prec,
        }
    }

    pub fn to_f64(&self) -> f64 {
        // Keep 64 significant bits, then scale.
        let bits = self.mant.bits() as i64;
        let drop = (bits - 64).max(0) as u32;
        let top = (&self.mant >> drop).to_f64().unwrap_or(f64::NAN);
        let mut e = drop as i32 - self.prec as i32;
        let mut v = top;
        // scale in steps so that intermediate powers stay normal
        while e < -1000 {
            v *= 2f64.powi(-1000);
            e += 1000;
        }
        while e > 1000 {
            v *= 2f64.powi(1000);
            e -= 1000;
        }
        v * 2f64.powi(e)
    }

    /// Rounds to the nearest multiple of `2^-128`.
    pub fn to_fixed(&self) -> Result<Fixed> {
        let m = self.with_prec(FRAC_BITS).mant;
        Fixed::from_scaled(&m).ok_or(Error::Overflow)
    }

    pub fn pi(prec: u32) -> HiReal {
        let p = prec + GUARD;
        let a = atan_inv(5, p) * 16u32 - atan_inv(239, p) * 4u32;
        HiReal { mant: a, prec: p }.with_prec(prec)
    }

    pub fn ln2(prec: u32) -> HiReal {
        let p = prec + GUARD;
        // ln 2 = sum_{k>=1} 1/(k 2^k)
        let mut s = BigInt::zero();
        let mut k = 1u32;
        loop {
            if k > p {
                break;
            }
            let term = (BigInt::one() << (p - k)) / BigInt::from(k);
            if term.is_zero() {
                break;
            }
            s += term;
            k += 1;
        }
        HiReal { mant: s, prec: p }.with_prec(prec)
    }

    pub fn e(prec: u32) -> HiReal {
        HiReal::from_int(1, prec).exp()
    }

    /// Euler–Mascheroni constant via the Brent–McMillan recurrence.
    pub fn euler_gamma(prec: u32) -> HiReal {
        let p = prec + GUARD;
        // error is O(e^{-4n}); n = 2^j with 4n > p ln 2
        let mut j = 1u32;
        while (1u64 << j) as f64 * 4.0 < p as f64 * std::f64::consts::LN_2 + 8.0 {
            j += 1;
        }
        let n = BigInt::one() << j;
        let n2 = &n * &n;
        let ln_n = HiReal::ln2(p).mul_int(j as i64).mant;
        let one = BigInt::one() << p;
        let mut a = -ln_n;
        let mut b = one.clone();
        let mut u = a.clone();
        let mut v = b.clone();
        let mut k: u64 = 1;
        loop {
            let kk = BigInt::from(k);
            b = (&b * &n2) / (&kk * &kk);
            a = ((&a * &n2) / &kk + &b) / &kk;
            u += &a;
            v += &b;
            if k > (1u64 << j) && a.is_zero() && b.is_zero() {
                break;
            }
            k += 1;
        }
        HiReal {
            mant: div_round(&(u << p), &v),
            prec: p,
        }
        .with_prec(prec)
    }

    pub fn exp(&self) -> HiReal {
        let p = self.prec + GUARD;
        let x = self.with_prec(p);
        let ln2 = HiReal::ln2(p);
        let n = x.div(&ln2).round();
        let n_i = n.to_i64().expect("exp argument too large");
        let r = x.sub(&ln2.mul_big(&n));
        // halve further for faster Taylor convergence
        const SQ: u32 = 8;
        let r = r.mul_pow2(-(SQ as i32));
        let one = BigInt::one() << p;
        let mut term = one.clone();
        let mut sum = one.clone();
        let mut k = 1i64;
        loop {
            term = round_shift(&(&term * &r.mant), p) / BigInt::from(k);
            if term.is_zero() {
                break;
            }
            sum += &term;
            k += 1;
        }
        let mut y = HiReal { mant: sum, prec: p };
        for _ in 0..SQ {
            y = y.mul(&y);
        }
        y.mul_pow2(n_i as i32).with_prec(self.prec)
    }

    /// `(sin x, cos x)`.
    pub fn sin_cos(&self) -> (HiReal, HiReal) {
        let p = self.prec + GUARD;
        let x = self.with_prec(p);
        let half_pi = HiReal::pi(p).mul_pow2(-1);
        let k = x.div(&half_pi).round();
        let r = x.sub(&half_pi.mul_big(&k));
        let quadrant = k.mod_floor(&BigInt::from(4)).to_u8().unwrap();
        let r2 = round_shift(&(&r.mant * &r.mant), p);
        // sin r = r - r^3/3! + ..., cos r = 1 - r^2/2! + ...
        let mut s = r.mant.clone();
        let mut t = r.mant.clone();
        let mut n = 1i64;
        loop {
            t = -round_shift(&(&t * &r2), p) / BigInt::from((n + 1) * (n + 2));
            if t.is_zero() {
                break;
            }
            s += &t;
            n += 2;
        }
        let one = BigInt::one() << p;
        let mut c = one.clone();
        let mut t = one;
        let mut n = 0i64;
        loop {
            t = -round_shift(&(&t * &r2), p) / BigInt::from((n + 1) * (n + 2));
            if t.is_zero() {
                break;
            }
            c += &t;
            n += 2;
        }
        let (s, c) = match quadrant {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        };
        (
            HiReal { mant: s, prec: p }.with_prec(self.prec),
            HiReal { mant: c, prec: p }.with_prec(self.prec),
        )
    }

    pub fn cos(&self) -> HiReal {
        self.sin_cos().1
    }

    pub fn to_decimal(&self, digits: usize) -> String {
        let neg = self.mant.is_negative();
        let a = self.abs();
        let ip = a.floor();
        let mut f = &a.mant - (&ip << a.prec);
        let mut out = format!("{}{}.", if neg { "-" } else { "" }, ip);
        for _ in 0..digits {
            f *= 10;
            let d = &f >> a.prec;
            out.push(char::from(b'0' + d.to_u8().unwrap_or(0)));
            f -= d << a.prec;
        }
        out
    }
}

impl PartialOrd for HiReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let (a, b, _) = self.aligned(other);
        Some(a.cmp(&b))
    }
}

impl fmt::Debug for HiReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HiReal({}, prec={})", self.to_decimal(30), self.prec)
    }
}

/// Integer division rounded to nearest, ties upward.
fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    // a/b = q + r/b with r/b in [0, 1)
    let (q, r): (BigInt, BigInt) = a.div_mod_floor(b);
    let twice: BigInt = r * 2;
    if twice.abs() >= b.abs() {
        q + 1
    } else {
        q
    }
}

/// `atan(1/k) 2^p`.
fn atan_inv(k: u32, p: u32) -> BigInt {
    let k2 = BigInt::from(k) * k;
    let mut power = (BigInt::one() << p) / BigInt::from(k);
    let mut sum = power.clone();
    let mut n = 1u64;
    loop {
        power /= &k2;
        if power.is_zero() {
            break;
        }
        let term = &power / BigInt::from(2 * n + 1);
        if n % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        n += 1;
    }
    sum
}

fn decompose_f64(x: f64) -> (i64, i32) {
    if x == 0.0 {
        return (0, 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 0 { 1 } else { -1 };
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & 0xf_ffff_ffff_ffff;
    let (m, e) = if exp == 0 {
        (frac as i64, -1074)
    } else {
        ((frac | (1 << 52)) as i64, exp - 1075)
    };
    (sign * m, e)
}
