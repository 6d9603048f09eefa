//! Enumeration, sieving and factorization in `ℤ[ω]`.
//!
//! Every nonzero element has exactly one associate in the sector
//! `0 ≤ arg < 2π/u` (`u` the number of units); that associate is the
//! canonical representative of its class. Prime tables and factorizations
//! only ever contain canonical representatives.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qfield::{FieldCtx, RingElt};

/// Largest norm bound accepted by [`sieve_primes`].
pub const SIEVE_GUARD: u64 = 1 << 34;

/// Whether `n` lies in the canonical sector. Exact sign tests.
pub fn is_canonical(f: &FieldCtx, n: RingElt) -> bool {
    match f.unit_count {
        // For d = -1 and d = -3 the sector is the cone spanned by 1 and ω,
        // with the ray through ω excluded.
        4 | 6 => n.n1 > 0 && n.n2 >= 0,
        _ => n.n2 > 0 || (n.n2 == 0 && n.n1 > 0),
    }
}

/// The canonical associate of `n` together with the unit `u` with `u n` canonical.
pub fn canonical_with_unit(f: &FieldCtx, n: RingElt) -> Result<(RingElt, RingElt)> {
    if n.is_zero() {
        return Err(Error::ZeroElement);
    }
    for u in f.units() {
        let m = f.mul(u, n);
        if is_canonical(f, m) {
            return Ok((m, u));
        }
    }
    unreachable!("no associate of {n} in the canonical sector")
}

pub fn canonical_associate(f: &FieldCtx, n: RingElt) -> Result<RingElt> {
    canonical_with_unit(f, n).map(|(m, _)| m)
}

/// Total order used throughout: norm, then `(n₂, n₁)`.
pub fn order_key(f: &FieldCtx, n: RingElt) -> (u64, i64, i64) {
    (f.norm(n), n.n2, n.n1)
}

/// `Δ` with `4N(n₁ + n₂ω) = (2n₁ + t n₂)² + Δ n₂²`.
fn disc(f: &FieldCtx) -> i64 {
    4 * f.norm_omega - f.trace_t * f.trace_t
}

/// Largest `|n₂|` occurring among elements of norm at most `x`.
pub fn n2_max(f: &FieldCtx, x: u64) -> i64 {
    let q = (4 * x as u128) / disc(f) as u128;
    isqrt_u128(q) as i64
}

/// The `n₁`-range of row `n₂` inside the ball `N ≤ x`, if nonempty.
pub fn row_range(f: &FieldCtx, x: u64, n2: i64) -> Option<(i64, i64)> {
    let rest = 4 * x as i128 - disc(f) as i128 * (n2 as i128) * (n2 as i128);
    if rest < 0 {
        return None;
    }
    let s = isqrt_u128(rest as u128) as i64;
    let tn = f.trace_t * n2;
    let lo = (-s - tn).div_euclid(2) + ((-s - tn).rem_euclid(2) != 0) as i64;
    let hi = (s - tn).div_euclid(2);
    (lo <= hi).then_some((lo, hi))
}

/// Calls `visit` on every element with `N(n) ≤ x` (zero included), row by row
/// in increasing `n₂` then `n₁`.
pub fn for_each_in_ball(f: &FieldCtx, x: u64, mut visit: impl FnMut(RingElt)) {
    let m = n2_max(f, x);
    for n2 in -m..=m {
        if let Some((lo, hi)) = row_range(f, x, n2) {
            for n1 in lo..=hi {
                visit(RingElt::new(n1, n2));
            }
        }
    }
}

/// Number of elements with `N(n) ≤ x`, zero included.
pub fn count_in_ball(f: &FieldCtx, x: u64) -> u64 {
    let m = n2_max(f, x);
    (-m..=m)
        .filter_map(|n2| row_range(f, x, n2))
        .map(|(lo, hi)| (hi - lo + 1) as u64)
        .sum()
}

/// Canonical representatives with `0 < N(n) ≤ x`, by norm then `(n₂, n₁)`.
pub fn enumerate_by_norm(f: &FieldCtx, x: u64) -> impl Iterator<Item = RingElt> {
    let mut v = Vec::new();
    for_each_canonical(f, x, |n| v.push(n));
    v.sort_by_key(|&n| order_key(f, n));
    v.into_iter()
}

fn for_each_canonical(f: &FieldCtx, x: u64, mut visit: impl FnMut(RingElt)) {
    let m = n2_max(f, x);
    for n2 in 0..=m {
        if let Some((lo, hi)) = canonical_row(f, x, n2) {
            for n1 in lo..=hi {
                visit(RingElt::new(n1, n2));
            }
        }
    }
}

fn canonical_row(f: &FieldCtx, x: u64, n2: i64) -> Option<(i64, i64)> {
    let (lo, hi) = row_range(f, x, n2)?;
    let lo = if f.unit_count > 2 || n2 == 0 { lo.max(1) } else { lo };
    (lo <= hi).then_some((lo, hi))
}

/// Bitset over the canonical part of the ball `N ≤ x`.
#[derive(Debug, Clone)]
struct Grid {
    row_lo: Vec<i64>,
    row_hi: Vec<i64>,
    row_start: Vec<usize>,
    bits: Vec<u64>,
}

impl Grid {
    fn new(f: &FieldCtx, x: u64) -> Grid {
        let m = n2_max(f, x);
        let (mut row_lo, mut row_hi, mut row_start) = (Vec::new(), Vec::new(), Vec::new());
        let mut total = 0usize;
        for n2 in 0..=m {
            let (lo, hi) = canonical_row(f, x, n2).unwrap_or((1, 0));
            row_lo.push(lo);
            row_hi.push(hi);
            row_start.push(total);
            total += (hi - lo + 1).max(0) as usize;
        }
        Grid {
            row_lo,
            row_hi,
            row_start,
            bits: vec![0; total.div_ceil(64)],
        }
    }

    fn index(&self, n: RingElt) -> Option<usize> {
        let r = usize::try_from(n.n2).ok()?;
        if r >= self.row_lo.len() || n.n1 < self.row_lo[r] || n.n1 > self.row_hi[r] {
            return None;
        }
        Some(self.row_start[r] + (n.n1 - self.row_lo[r]) as usize)
    }

    fn set(&mut self, i: usize) {
        self.bits[i / 64] |= 1 << (i % 64);
    }

    fn get(&self, i: usize) -> bool {
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }
}

/// Canonical prime elements up to a norm bound.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    pub field: FieldCtx,
    pub norm_bound: u64,
    /// `(p, N(p))` sorted by norm, then `(n₂, n₁)`.
    pub primes: Vec<(RingElt, u64)>,
    composite: Grid,
}

impl PrimeTable {
    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Primality of a canonical element inside the table's range.
    pub fn is_prime(&self, n: RingElt) -> Option<bool> {
        let nn = self.field.checked_norm(n)?;
        if nn > self.norm_bound || !is_canonical(&self.field, n) {
            return None;
        }
        if nn < 2 {
            return Some(false);
        }
        self.composite.index(n).map(|i| !self.composite.get(i))
    }

    /// Number of prime classes with norm at most `y`.
    pub fn count_up_to(&self, y: u64) -> usize {
        self.primes.partition_point(|&(_, n)| n <= y)
    }

    /// Primes with `lo ≤ N(p) < hi`.
    pub fn in_range(&self, lo: u64, hi: u64) -> &[(RingElt, u64)] {
        let a = self.primes.partition_point(|&(_, n)| n < lo);
        let b = self.primes.partition_point(|&(_, n)| n < hi);
        &self.primes[a..b]
    }
}

/// Eratosthenes on the lattice: every product `p k` with `N(p) ≤ √x` prime and
/// `N(k) ≥ 2` is marked composite in canonical form.
pub fn sieve_primes(f: &FieldCtx, x: u64) -> Result<PrimeTable> {
    if x > SIEVE_GUARD {
        return Err(Error::BoundTooLarge(x));
    }
    let small = if x >= 4 {
        sieve_primes(f, isqrt_u128(x as u128) as u64)?.primes
    } else {
        Vec::new()
    };
    let mut grid = Grid::new(f, x);
    let units = f.units();
    for &(p, np) in &small {
        let kmax = x / np;
        for_each_canonical(f, kmax, |k| {
            if f.norm(k) < 2 {
                return;
            }
            let c = f.mul(p, k);
            for &u in &units {
                let cu = f.mul(u, c);
                if is_canonical(f, cu) {
                    if let Some(i) = grid.index(cu) {
                        grid.set(i);
                    }
                    break;
                }
            }
        });
    }
    let mut primes = Vec::new();
    for_each_canonical(f, x, |n| {
        let nn = f.norm(n);
        if nn >= 2 && !grid.get(grid.index(n).unwrap()) {
            primes.push((n, nn));
        }
    });
    primes.sort_by_key(|&(n, nn)| (nn, n.n2, n.n1));
    Ok(PrimeTable {
        field: f.clone(),
        norm_bound: x,
        primes,
        composite: grid,
    })
}

pub fn prime_ideal_count(f: &FieldCtx, x: u64) -> Result<usize> {
    if x < 2 {
        return Ok(0);
    }
    Ok(sieve_primes(f, x)?.len())
}

/// `unit · Π pᵢ^{aᵢ}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Factorization {
    pub unit: RingElt,
    pub factors: Vec<(RingElt, u32)>,
}

impl Factorization {
    pub fn reassemble(&self, f: &FieldCtx) -> RingElt {
        self.factors
            .iter()
            .fold(self.unit, |acc, &(p, a)| f.mul(acc, f.pow(p, a)))
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, a)| a == 1)
    }

    pub fn omega_count(&self) -> usize {
        self.factors.len()
    }
}

/// Canonical primes of norm `p` or, when `p` is inert, `[p]` itself.
pub fn primes_above(f: &FieldCtx, p: u64) -> Vec<RingElt> {
    let dd = disc(f) as i128;
    let four_p = 4 * p as i128;
    let bmax = 2 * ((p as f64 / f.abs_d() as f64).sqrt().ceil() as i64) + 1;
    let mut out: Vec<RingElt> = Vec::new();
    for n2 in 0..=bmax {
        let rest = four_p - dd * (n2 as i128) * (n2 as i128);
        if rest < 0 {
            break;
        }
        let s = isqrt_u128(rest as u128) as i128;
        if s * s != rest {
            continue;
        }
        let tn = (f.trace_t * n2) as i128;
        for sgn in [1i128, -1] {
            let num = sgn * s - tn;
            if num.rem_euclid(2) == 0 {
                let n = RingElt::new((num / 2) as i64, n2);
                if n.is_zero() {
                    continue;
                }
                let c = canonical_associate(f, n).unwrap();
                if !out.contains(&c) {
                    out.push(c);
                }
            }
        }
    }
    if out.is_empty() {
        out.push(RingElt::int(p as i64));
    }
    out.sort_by_key(|&n| order_key(f, n));
    out
}

pub fn factor(f: &FieldCtx, n: RingElt) -> Result<Factorization> {
    if n.is_zero() {
        return Err(Error::ZeroElement);
    }
    let mut rem = n;
    let mut factors = Vec::new();
    for (p, _) in factor_u64(f.norm(n)) {
        for pi in primes_above(f, p) {
            let mut a = 0;
            while let Ok(q) = f.try_div(rem, pi) {
                rem = q;
                a += 1;
            }
            if a > 0 {
                factors.push((pi, a));
            }
        }
    }
    debug_assert!(f.is_unit(rem));
    factors.sort_by_key(|&(p, _)| order_key(f, p));
    Ok(Factorization { unit: rem, factors })
}

pub fn is_prime(f: &FieldCtx, n: RingElt) -> bool {
    match factor(f, n) {
        Ok(fa) => fa.factors.len() == 1 && fa.factors[0].1 == 1,
        Err(_) => false,
    }
}

pub fn moebius(f: &FieldCtx, n: RingElt) -> Result<i32> {
    let fa = factor(f, n)?;
    Ok(if !fa.is_squarefree() {
        0
    } else if fa.factors.len() % 2 == 0 {
        1
    } else {
        -1
    })
}

/// Number of ways to write `(n)` as an ordered product of `k` ideals.
pub fn d_k(f: &FieldCtx, n: RingElt, k: u32) -> Result<u64> {
    if k < 2 {
        return Err(Error::ParamOutOfRange(format!("d_k needs k >= 2, got {k}")));
    }
    let fa = factor(f, n)?;
    Ok(fa
        .factors
        .iter()
        .map(|&(_, a)| binomial((a + k - 1) as u64, (k - 1) as u64))
        .product())
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Canonical generator of the ideal `(a, b)`.
pub fn gcd(f: &FieldCtx, a: RingElt, b: RingElt) -> Result<RingElt> {
    match (a.is_zero(), b.is_zero()) {
        (true, true) => return Err(Error::BothZero),
        (true, false) => return canonical_associate(f, b),
        (false, true) => return canonical_associate(f, a),
        _ => {}
    }
    let (small, other) = if f.norm(a) <= f.norm(b) { (a, b) } else { (b, a) };
    let mut g = RingElt::ONE;
    let mut rest = other;
    for (p, e) in factor(f, small)?.factors {
        for _ in 0..e {
            match f.try_div(rest, p) {
                Ok(q) => {
                    rest = q;
                    g = f.mul(g, p);
                }
                Err(_) => break,
            }
        }
    }
    canonical_associate(f, g)
}

pub fn isqrt_u128(n: u128) -> u128 {
    if n == 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// Prime factorization of a rational integer: trial division, then Pollard rho.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut p = 2u64;
    while p <= 1_000_000 && p * p <= n {
        if n % p == 0 {
            let mut a = 0;
            while n % p == 0 {
                n /= p;
                a += 1;
            }
            out.push((p, a));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        let mut stack = vec![n];
        let mut big = Vec::new();
        while let Some(m) = stack.pop() {
            if m == 1 {
                continue;
            }
            if is_prime_u64(m) {
                big.push(m);
            } else {
                let d = pollard_rho(m);
                stack.push(d);
                stack.push(m / d);
            }
        }
        big.sort_unstable();
        for q in big {
            match out.last_mut() {
                Some((r, a)) if *r == q => *a += 1,
                _ => out.push((q, 1)),
            }
        }
    }
    out
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = num_integer::gcd(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}
