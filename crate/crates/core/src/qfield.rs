//! The nine imaginary quadratic fields of class number one and their rings
//! of integers `ℤ[ω]`.
//!
//! Elements are written `n₁ + n₂ω` with `ω = √d` when `d ≡ 2, 3 (mod 4)` and
//! `ω = (1 + √d)/2` when `d ≡ 1 (mod 4)`. In both cases `ω² = ξ₁ + ξ₂ω`.
//! Points of `ℂ` are handled through their ω-coordinates
//! `ϱ = Re_ω ϱ + (Im_ω ϱ) ω`, stored as 128-bit fixed point.

use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed::{torus_dist, torus_mul, Fixed, FRAC_BITS};
use crate::hiprec::HiReal;

pub const HEEGNER: [i64; 9] = [-1, -2, -3, -7, -11, -19, -43, -67, -163];

/// Precision required of rectangular inputs to [`FieldCtx::rect_to_omega`].
pub const MIN_INPUT_BITS: u32 = 160;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaKind {
    SqrtD,
    HalfPlus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldCtx {
    pub d: i64,
    pub omega_kind: OmegaKind,
    /// `2 Re ω`.
    pub trace_t: i64,
    pub xi1: i64,
    pub xi2: i64,
    pub unit_count: u32,
    /// `N(ω) = -ξ₁`.
    pub norm_omega: i64,
    /// `Im ω = √|d| / im_den`.
    pub im_den: i64,
    pub im_omega: Fixed,
    pub re_omega: Fixed,
}

impl FieldCtx {
    pub fn new(d: i64) -> Result<Self> {
        if d >= 0 || !squarefree(d.unsigned_abs()) {
            return Err(Error::NotNegativeSquarefree(d));
        }
        if !HEEGNER.contains(&d) {
            return Err(Error::NotClassNumberOne(d));
        }
        let abs_d = -d;
        let (kind, t, xi1, xi2, den) = if d.rem_euclid(4) == 1 {
            (OmegaKind::HalfPlus, 1, (d - 1) / 4, 1, 2)
        } else {
            (OmegaKind::SqrtD, 0, d, 0, 1)
        };
        let root = (BigInt::from(abs_d) << (2 * FRAC_BITS)).sqrt() / den;
        let im_omega = Fixed::from_scaled(&root).expect("Im ω fits");
        let unit_count = match d {
            -1 => 4,
            -3 => 6,
            _ => 2,
        };
        Ok(FieldCtx {
            d,
            omega_kind: kind,
            trace_t: t,
            xi1,
            xi2,
            unit_count,
            norm_omega: -xi1,
            im_den: den,
            im_omega,
            re_omega: if t == 1 { Fixed::HALF } else { Fixed::ZERO },
        })
    }

    pub fn all() -> Vec<FieldCtx> {
        HEEGNER.iter().map(|&d| FieldCtx::new(d).unwrap()).collect()
    }

    pub fn abs_d(&self) -> i64 {
        -self.d
    }

    pub fn im_omega_f64(&self) -> f64 {
        (self.abs_d() as f64).sqrt() / self.im_den as f64
    }

    pub fn re_omega_f64(&self) -> f64 {
        self.trace_t as f64 / 2.0
    }

    /// `Im ω` to `prec` fractional bits.
    pub fn im_omega_hi(&self, prec: u32) -> HiReal {
        HiReal::from_int(self.abs_d(), prec)
            .sqrt()
            .div_int(self.im_den)
    }

    /// Area of the fundamental parallelogram `Λ`.
    pub fn area_lambda(&self) -> f64 {
        self.im_omega_f64()
    }

    /// Approximation constant `√6 · area(Λ) / π`: every irrational α has infinitely many `a/q` with `|α - a/q| ≤ C/N(q)`.
    pub fn gintner_c(&self) -> f64 {
        6f64.sqrt() / std::f64::consts::PI * self.area_lambda()
    }

    /// `|ω|`.
    pub fn abs_omega(&self) -> f64 {
        (self.norm_omega as f64).sqrt()
    }

    /// The matrix taking ω-coordinates to rectangular ones.
    pub fn basis_matrix(&self) -> [[f64; 2]; 2] {
        [[1.0, self.re_omega_f64()], [0.0, self.im_omega_f64()]]
    }

    pub fn omega(&self) -> RingElt {
        RingElt::new(0, 1)
    }

    pub fn norm(&self, n: RingElt) -> u64 {
        self.checked_norm(n).expect("norm overflows u64")
    }

    pub fn checked_norm(&self, n: RingElt) -> Option<u64> {
        let (a, b) = (n.n1 as i128, n.n2 as i128);
        let v = a
            .checked_mul(a)?
            .checked_add(self.trace_t as i128 * a.checked_mul(b)?)?
            .checked_add((self.norm_omega as i128).checked_mul(b.checked_mul(b)?)?)?;
        u64::try_from(v).ok()
    }

    pub fn conj(&self, n: RingElt) -> RingElt {
        RingElt::new(n.n1 + self.trace_t * n.n2, -n.n2)
    }

    pub fn mul(&self, m: RingElt, n: RingElt) -> RingElt {
        self.checked_mul(m, n).expect("ring product overflows i64")
    }

    pub fn checked_mul(&self, m: RingElt, n: RingElt) -> Result<RingElt> {
        let (m1, m2, n1, n2) = (m.n1 as i128, m.n2 as i128, n.n1 as i128, n.n2 as i128);
        let m2n2 = m2 * n2;
        let a = m1 * n1 + self.xi1 as i128 * m2n2;
        let b = m1 * n2 + m2 * n1 + self.xi2 as i128 * m2n2;
        Ok(RingElt::new(
            i64::try_from(a).map_err(|_| Error::Overflow)?,
            i64::try_from(b).map_err(|_| Error::Overflow)?,
        ))
    }

    /// `m / n` when it lies in the ring.
    pub fn try_div(&self, m: RingElt, n: RingElt) -> Result<RingElt> {
        if n.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let c = self.conj(n);
        let (m1, m2, c1, c2) = (m.n1 as i128, m.n2 as i128, c.n1 as i128, c.n2 as i128);
        let m2c2 = m2 * c2;
        let a = m1 * c1 + self.xi1 as i128 * m2c2;
        let b = m1 * c2 + m2 * c1 + self.xi2 as i128 * m2c2;
        let nn = self.norm(n) as i128;
        if a % nn != 0 || b % nn != 0 {
            return Err(Error::NotDivisible);
        }
        Ok(RingElt::new((a / nn) as i64, (b / nn) as i64))
    }

    pub fn divides(&self, n: RingElt, m: RingElt) -> bool {
        !n.is_zero() && self.try_div(m, n).is_ok()
    }

    /// `n^k`.
    pub fn pow(&self, n: RingElt, k: u32) -> RingElt {
        (0..k).fold(RingElt::ONE, |acc, _| self.mul(acc, n))
    }

    pub fn is_unit(&self, n: RingElt) -> bool {
        self.norm(n) == 1
    }

    /// All units, starting with 1 and proceeding counter-clockwise.
    pub fn units(&self) -> Vec<RingElt> {
        match self.unit_count {
            4 => vec![
                RingElt::new(1, 0),
                RingElt::new(0, 1),
                RingElt::new(-1, 0),
                RingElt::new(0, -1),
            ],
            6 => {
                let w = RingElt::new(0, 1);
                let mut v = vec![RingElt::ONE];
                for _ in 1..6 {
                    v.push(self.mul(*v.last().unwrap(), w));
                }
                v
            }
            _ => vec![RingElt::new(1, 0), RingElt::new(-1, 0)],
        }
    }

    /// `Re_ω(ℓρ) = ℓ₁ Re_ω ρ + ξ₁ ℓ₂ Im_ω ρ`.
    pub fn re_omega_of_product(&self, l: RingElt, rho: &AlphaCoords) -> Fixed {
        rho.re.mul_int(l.n1) + rho.im.mul_int(self.xi1 * l.n2)
    }

    /// `Im_ω(ℓρ) = ℓ₂ Re_ω ρ + (ℓ₁ + ℓ₂ξ₂) Im_ω ρ`.
    pub fn im_omega_of_product(&self, l: RingElt, rho: &AlphaCoords) -> Fixed {
        rho.re.mul_int(l.n2) + rho.im.mul_int(l.n1 + l.n2 * self.xi2)
    }

    /// ω-coordinates of `ℓρ` reduced mod 1, exact.
    #[inline]
    pub fn product_frac(&self, l: RingElt, rho: &AlphaCoords) -> (u128, u128) {
        let (a, b) = (rho.re.frac(), rho.im.frac());
        let (l1, l2) = (l.n1 as i128, l.n2 as i128);
        let re = torus_mul(l1, a).wrapping_add(torus_mul(self.xi1 as i128 * l2, b));
        let im = torus_mul(l2, a).wrapping_add(torus_mul(l1 + l2 * self.xi2 as i128, b));
        (re, im)
    }

    /// `‖ℓρ‖_ω` as a torus element in `[0, 2^127]`.
    #[inline]
    pub fn dist_of_product(&self, l: RingElt, rho: &AlphaCoords) -> u128 {
        let (re, im) = self.product_frac(l, rho);
        torus_dist(re).max(torus_dist(im))
    }

    pub fn dist_omega(&self, z: &AlphaCoords) -> Fixed {
        z.re.dist().max(z.im.dist())
    }

    /// ω-coordinates of a point given by rectangular coordinates. Inputs must
    /// carry at least [`MIN_INPUT_BITS`] fractional bits; the result is within
    /// `2^-100` of the true coordinates.
    pub fn rect_to_omega(&self, re: &HiReal, im: &HiReal) -> Result<AlphaCoords> {
        let got = re.prec().min(im.prec());
        if got < MIN_INPUT_BITS {
            return Err(Error::PrecisionLoss {
                got,
                need: MIN_INPUT_BITS,
            });
        }
        let p = got.max(256);
        let y = im.with_prec(p).div(&self.im_omega_hi(p));
        let x = re.with_prec(p).sub(&y.mul_int(self.trace_t).div_int(2));
        Ok(AlphaCoords {
            re: x.to_fixed()?,
            im: y.to_fixed()?,
        })
    }

    /// Rectangular coordinates of `z` to `prec` bits.
    pub fn omega_to_rect(&self, z: &AlphaCoords, prec: u32) -> (HiReal, HiReal) {
        let im_w = HiReal::from_fixed(z.im, prec);
        let re = HiReal::from_fixed(z.re, prec).add(&im_w.mul_int(self.trace_t).div_int(2));
        let im = im_w.mul(&self.im_omega_hi(prec));
        (re, im)
    }

    /// Rectangular coordinates of a ring element, in floating point.
    pub fn to_complex(&self, n: RingElt) -> (f64, f64) {
        (
            n.n1 as f64 + n.n2 as f64 * self.re_omega_f64(),
            n.n2 as f64 * self.im_omega_f64(),
        )
    }
}

impl fmt::Display for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q(sqrt({}))", self.d)
    }
}

fn squarefree(n: u64) -> bool {
    let mut k = 2u64;
    while k * k <= n {
        if n % (k * k) == 0 {
            return false;
        }
        k += 1;
    }
    n != 0
}

/// `n₁ + n₂ω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct RingElt {
    pub n1: i64,
    pub n2: i64,
}

impl RingElt {
    pub const ZERO: RingElt = RingElt { n1: 0, n2: 0 };
    pub const ONE: RingElt = RingElt { n1: 1, n2: 0 };

    pub const fn new(n1: i64, n2: i64) -> Self {
        RingElt { n1, n2 }
    }

    pub const fn int(n: i64) -> Self {
        RingElt { n1: n, n2: 0 }
    }

    pub fn is_zero(self) -> bool {
        self.n1 == 0 && self.n2 == 0
    }

    pub fn add(self, o: RingElt) -> RingElt {
        RingElt::new(self.n1 + o.n1, self.n2 + o.n2)
    }

    pub fn sub(self, o: RingElt) -> RingElt {
        RingElt::new(self.n1 - o.n1, self.n2 - o.n2)
    }

    pub fn neg(self) -> RingElt {
        RingElt::new(-self.n1, -self.n2)
    }

    pub fn scale(self, k: i64) -> RingElt {
        RingElt::new(self.n1 * k, self.n2 * k)
    }
}

impl fmt::Display for RingElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.n1, self.n2) {
            (a, 0) => write!(f, "{a}"),
            (0, b) => write!(f, "{b}w"),
            (a, b) if b < 0 => write!(f, "{a}{b}w"),
            (a, b) => write!(f, "{a}+{b}w"),
        }
    }
}

/// ω-coordinates `(Re_ω ϱ, Im_ω ϱ)` of a complex number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct AlphaCoords {
    pub re: Fixed,
    pub im: Fixed,
}

impl AlphaCoords {
    pub fn new(re: Fixed, im: Fixed) -> Self {
        AlphaCoords { re, im }
    }

    pub fn from_f64(re: f64, im: f64) -> Self {
        AlphaCoords::new(Fixed::from_f64(re), Fixed::from_f64(im))
    }

    pub fn from_ratios(re: (i64, i64), im: (i64, i64)) -> Self {
        AlphaCoords::new(Fixed::from_ratio(re.0, re.1), Fixed::from_ratio(im.0, im.1))
    }

    /// Translation by a ring element.
    pub fn shift(&self, n: RingElt) -> AlphaCoords {
        AlphaCoords::new(self.re + Fixed::from_int(n.n1), self.im + Fixed::from_int(n.n2))
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

/// Named targets, given by rectangular coordinates.
pub const PRESETS: [&str; 3] = ["e_pi", "sqrt2_sqrt3", "log2_gamma"];

const PRESET_BITS: u32 = 320;

/// Rectangular coordinates of a named preset.
pub fn preset_rect(name: &str) -> Option<(HiReal, HiReal)> {
    let p = PRESET_BITS;
    Some(match name {
        "e_pi" => (HiReal::e(p), HiReal::pi(p)),
        "sqrt2_sqrt3" => (HiReal::from_int(2, p).sqrt(), HiReal::from_int(3, p).sqrt()),
        "log2_gamma" => (HiReal::ln2(p), HiReal::euler_gamma(p)),
        _ => return None,
    })
}

/// Parses a target: a preset name or `re,im` in decimal.
pub fn parse_alpha(f: &FieldCtx, spec: &str) -> Result<AlphaCoords> {
    let (re, im) = alpha_rect(spec)?;
    f.rect_to_omega(&re, &im)
}

/// Rectangular coordinates of a target specification.
pub fn alpha_rect(spec: &str) -> Result<(HiReal, HiReal)> {
    if let Some(v) = preset_rect(spec.trim()) {
        return Ok(v);
    }
    let (a, b) = spec
        .split_once(',')
        .ok_or_else(|| Error::InvalidInput(format!("alpha `{spec}` is neither a preset nor `re,im`")))?;
    let (re, _) = HiReal::parse_decimal(a, PRESET_BITS)?;
    let (im, _) = HiReal::parse_decimal(b, PRESET_BITS)?;
    Ok((re, im))
}
