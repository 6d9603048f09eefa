//! Sifted sums, inclusion-exclusion over squarefree divisors, the
//! Buchstab-type decomposition by ordered prime tuples, and the split of the
//! sieve difference into Type I and Type II parts.
//!
//! Weights are tabulated on a ball `N(r) ≤ R` as `i128` multiples of
//! `2^-scale_bits`, so every identity here is checked exactly.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{d_k, factor_u64, n2_max, primes_above, row_range, sieve_primes};
use crate::error::{Error, Result};
use crate::qfield::{FieldCtx, RingElt};
use crate::smooth::{weight_eval, SmoothWeights};

/// Scaled sums can exceed 64 bits, which JSON numbers cannot carry.
fn as_decimal<S: serde::Serializer>(v: &i128, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// Largest supported weight support.
pub const MAX_SUPPORT: u64 = 1 << 22;

/// A weight tabulated on `N(r) ≤ support`, zero outside.
#[derive(Debug, Clone)]
pub struct WeightTable {
    pub field: FieldCtx,
    pub support: u64,
    pub scale_bits: u32,
    m: i64,
    rows: Vec<(i64, Vec<i128>)>,
}

impl WeightTable {
    pub fn from_fn(f: &FieldCtx, support: u64, scale_bits: u32, g: impl Fn(RingElt) -> i128 + Sync) -> Result<Self> {
        if support > MAX_SUPPORT {
            return Err(Error::SupportUnbounded);
        }
        let m = n2_max(f, support);
        let rows = (-m..=m)
            .into_par_iter()
            .map(|n2| match row_range(f, support, n2) {
                Some((lo, hi)) => (lo, (lo..=hi).map(|n1| g(RingElt::new(n1, n2))).collect()),
                None => (0, Vec::new()),
            })
            .collect();
        Ok(WeightTable {
            field: f.clone(),
            support,
            scale_bits,
            m,
            rows,
        })
    }

    /// Rounds a real weight to the nearest multiple of `2^-scale_bits`.
    pub fn from_real(f: &FieldCtx, support: u64, scale_bits: u32, g: impl Fn(RingElt) -> f64 + Sync) -> Result<Self> {
        let s = 2f64.powi(scale_bits as i32);
        Self::from_fn(f, support, scale_bits, |r| (g(r) * s).round() as i128)
    }

    pub fn zero(f: &FieldCtx, support: u64) -> Self {
        Self::from_fn(f, support, 0, |_| 0).expect("support in range")
    }

    pub fn get(&self, r: RingElt) -> i128 {
        if r.n2.abs() > self.m {
            return 0;
        }
        let (lo, row) = &self.rows[(r.n2 + self.m) as usize];
        let i = r.n1 - lo;
        if i < 0 || i as usize >= row.len() {
            0
        } else {
            row[i as usize]
        }
    }

    pub fn to_f64(&self, v: i128) -> f64 {
        v as f64 / 2f64.powi(self.scale_bits as i32)
    }

    /// Every element of the support with its value.
    pub fn entries(&self) -> impl Iterator<Item = (RingElt, i128)> + '_ {
        self.rows.iter().enumerate().flat_map(move |(k, (lo, row))| {
            let n2 = k as i64 - self.m;
            row.iter()
                .enumerate()
                .map(move |(i, &v)| (RingElt::new(lo + i as i64, n2), v))
        })
    }

    pub fn is_associate_invariant(&self) -> bool {
        let units = self.field.units();
        self.entries()
            .all(|(r, v)| units.iter().all(|&u| self.get(self.field.mul(u, r)) == v))
    }

    /// `(self - other)` entrywise; both must share field, support and scale.
    pub fn sub(&self, other: &WeightTable) -> WeightTable {
        assert_eq!(self.support, other.support);
        assert_eq!(self.scale_bits, other.scale_bits);
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|((lo, a), (_, b))| (*lo, a.iter().zip(b).map(|(x, y)| x - y).collect()))
            .collect();
        WeightTable {
            field: self.field.clone(),
            support: self.support,
            scale_bits: self.scale_bits,
            m: self.m,
            rows,
        }
    }
}

/// Norm of the prime ideal above the rational prime `p`.
fn ideal_norm_above(f: &FieldCtx, p: u64) -> u64 {
    let v = primes_above(f, p);
    f.norm(v[0])
}

/// `S(ω, z) = Σ_{r ≠ 0, p | r ⇒ N(p) ≥ z} ω(r)`.
pub fn sifted_sum(f: &FieldCtx, w: &WeightTable, z: u64) -> i128 {
    let mut cache: HashMap<u64, u64> = HashMap::new();
    let mut total = 0i128;
    for (r, v) in w.entries() {
        if v == 0 || r.is_zero() {
            continue;
        }
        let rough = factor_u64(f.norm(r)).into_iter().all(|(p, _)| {
            let q = *cache.entry(p).or_insert_with(|| ideal_norm_above(f, p));
            q >= z
        });
        if rough {
            total += v;
        }
    }
    total
}

/// Canonical primes of norm below `z`, in the order `≺`.
pub fn small_primes(f: &FieldCtx, z: u64) -> Result<Vec<(RingElt, u64)>> {
    if z < 3 {
        return Ok(Vec::new());
    }
    Ok(sieve_primes(f, z - 1)?.primes)
}

/// `Σ_{n ≠ 0} ω(mn)`.
fn multiples_sum(f: &FieldCtx, w: &WeightTable, m: RingElt, nm: u64) -> i128 {
    let lim = w.support / nm;
    let mut s = 0i128;
    crate::arith::for_each_in_ball(f, lim, |n| {
        if !n.is_zero() {
            s += w.get(f.mul(m, n));
        }
    });
    s
}

/// Calls `visit(m, N(m), μ(m))` for every squarefree product of distinct
/// primes from `primes` with `N(m) ≤ bound`, the unit `1` included.
fn for_each_squarefree(
    f: &FieldCtx,
    primes: &[(RingElt, u64)],
    bound: u64,
    visit: &mut impl FnMut(RingElt, u64, i32),
) {
    fn rec(
        f: &FieldCtx,
        primes: &[(RingElt, u64)],
        bound: u64,
        m: RingElt,
        nm: u64,
        mu: i32,
        upto: usize,
        visit: &mut impl FnMut(RingElt, u64, i32),
    ) {
        visit(m, nm, mu);
        for j in 0..upto {
            let (p, np) = primes[j];
            if nm.saturating_mul(np) <= bound {
                rec(f, primes, bound, f.mul(m, p), nm * np, -mu, j, visit);
            }
        }
    }
    rec(f, primes, bound, RingElt::ONE, 1, 1, primes.len(), visit);
}

#[derive(Debug, Clone, Serialize)]
pub struct LegendreCheck {
    #[serde(serialize_with = "as_decimal")]
    pub lhs: i128,
    #[serde(serialize_with = "as_decimal")]
    pub rhs: i128,
    pub equal: bool,
    pub divisors: usize,
}

/// Sifted sum against `Σ_{m | P(z)} μ(m) Σ_{n ≠ 0} ω(mn)`.
pub fn legendre_identity_check(f: &FieldCtx, w: &WeightTable, z: u64) -> Result<LegendreCheck> {
    let lhs = sifted_sum(f, w, z);
    let primes = small_primes(f, z)?;
    let mut ms = Vec::new();
    for_each_squarefree(f, &primes, w.support, &mut |m, nm, mu| ms.push((m, nm, mu)));
    let rhs: i128 = ms
        .par_iter()
        .map(|&(m, nm, mu)| mu as i128 * multiples_sum(f, w, m, nm))
        .sum();
    Ok(LegendreCheck {
        lhs,
        rhs,
        equal: lhs == rhs,
        divisors: ms.len(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SieveConfig {
    pub x: u64,
    /// Sifting limit: primes with `N(p) < z` are removed.
    pub z: u64,
    pub kappa: f64,
    pub mu: f64,
    pub m_big: u64,
    pub support: u64,
}

impl SieveConfig {
    /// `z = ⌈x^κ⌉` so that `N(p) < z` exactly when `N(p) < x^κ`.
    pub fn new(x: u64, kappa: f64, mu: f64, m_big: u64, support: u64) -> Result<Self> {
        let z = (x as f64).powf(kappa).ceil() as u64;
        Self::with_z(x, z, kappa, mu, m_big, support)
    }

    pub fn with_z(x: u64, z: u64, kappa: f64, mu: f64, m_big: u64, support: u64) -> Result<Self> {
        if x < 3 {
            return Err(Error::ParamOutOfRange("x must be at least 3".into()));
        }
        if !(kappa > 0.0 && kappa <= 0.5) {
            return Err(Error::ParamOutOfRange(format!("kappa = {kappa} outside (0, 1/2]")));
        }
        if !(mu > 0.0 && mu < 1.0) {
            return Err(Error::ParamOutOfRange(format!("mu = {mu} outside (0, 1)")));
        }
        if !((m_big as f64) > (x as f64).powf(mu) && m_big <= x) {
            return Err(Error::ParamOutOfRange(format!("M = {m_big} outside (x^mu, x]")));
        }
        if support > MAX_SUPPORT {
            return Err(Error::SupportUnbounded);
        }
        Ok(SieveConfig {
            x,
            z,
            kappa,
            mu,
            m_big,
            support,
        })
    }

    pub fn x_mu(&self) -> f64 {
        (self.x as f64).powf(self.mu)
    }

    /// `⌊log x / log 2⌋ + 1`.
    pub fn default_levels(&self) -> u32 {
        (self.x as f64).log2().floor() as u32 + 1
    }

    /// Beyond this level no tuple has product norm `≤ x^μ`.
    pub fn forced_level(&self) -> u32 {
        (self.mu * (self.x as f64).log2()).floor() as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NodeKind {
    P,
    Q,
}

/// A tuple `p₁ ≻ p₂ ≻ … ≻ p_s` of the decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionNode {
    pub s: u32,
    pub tuple: Vec<RingElt>,
    pub norm: u64,
    pub kind: NodeKind,
}

/// All tuples of levels `1..=t`.
pub fn decomposition_nodes(f: &FieldCtx, cfg: &SieveConfig, t: u32) -> Result<Vec<DecompositionNode>> {
    let primes = small_primes(f, cfg.z)?;
    let xm = cfg.x_mu();
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<usize>, u64)> = vec![(Vec::new(), 1)];
    while let Some((idx, nm)) = stack.pop() {
        let s = idx.len() as u32 + 1;
        let upto = idx.last().copied().unwrap_or(primes.len());
        for j in 0..upto {
            let n = nm.saturating_mul(primes[j].1);
            let mut tuple: Vec<usize> = idx.clone();
            tuple.push(j);
            let kind = if n as f64 > xm { NodeKind::P } else { NodeKind::Q };
            out.push(DecompositionNode {
                s,
                tuple: tuple.iter().map(|&k| primes[k].0).collect(),
                norm: n,
                kind,
            });
            if kind == NodeKind::Q && s < t {
                stack.push((tuple, n));
            }
        }
    }
    out.sort_by(|a, b| (a.s, &a.tuple).cmp(&(b.s, &b.tuple)));
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelTerm {
    pub s: u32,
    pub p_tuples: u64,
    pub q_tuples: u64,
    /// `Σ_{𝒫_s} Σ_{d | Π(p_s)} μ(d) g(p₁⋯p_s d)`.
    #[serde(serialize_with = "as_decimal")]
    pub term: i128,
}

#[derive(Debug, Clone, Serialize)]
pub struct BuchstabReport {
    pub levels: Vec<LevelTerm>,
    pub t: u32,
    pub forced_level: u32,
    /// `Σ_{m | P(z)} μ(m) g(m)` evaluated directly.
    #[serde(serialize_with = "as_decimal")]
    pub direct: i128,
    /// `Σ_{s ≤ t} (-1)^s term_s`.
    #[serde(serialize_with = "as_decimal")]
    pub truncated: i128,
    /// `Σ_{𝒬_t} Σ_{d | Π(p_t)} μ(d) g(p₁⋯p_t d)`.
    #[serde(serialize_with = "as_decimal")]
    pub residual: i128,
    /// `direct - truncated`.
    #[serde(serialize_with = "as_decimal")]
    pub identity_gap: i128,
    /// `direct - truncated - (-1)^t residual`; zero for every `t`.
    #[serde(serialize_with = "as_decimal")]
    pub full_gap: i128,
    /// No `𝒬_s` tuple exists for `s` above the forced level.
    pub q_empty_beyond_forced: bool,
}

/// `Σ_{d | Π(p_upto)} μ(d) g(m d)` where `Π(p_j)` multiplies the primes before index `j`.
fn mobius_tail(f: &FieldCtx, primes: &[(RingElt, u64)], g: &WeightTable, m: RingElt, nm: u64, upto: usize) -> i128 {
    let mut s = g.get(m);
    for j in 0..upto {
        let (p, np) = primes[j];
        let n = nm.saturating_mul(np);
        if n <= g.support {
            s -= mobius_tail(f, primes, g, f.mul(m, p), n, j);
        }
    }
    s
}

/// Decomposes `Σ_{m | P(z)} μ(m) g(m)` by the largest prime factors and checks
/// the identity against the direct sum. `t` defaults to `⌊log₂ x⌋ + 1`.
pub fn buchstab_decompose(f: &FieldCtx, cfg: &SieveConfig, g: &WeightTable, t: Option<u32>) -> Result<BuchstabReport> {
    let xm = cfg.x_mu();
    if let Some((r, _)) = g.entries().find(|&(r, v)| v != 0 && (f.norm(r) as f64) <= xm) {
        return Err(Error::GNotVanishing(format!("g({r}) is nonzero but N = {} <= x^mu", f.norm(r))));
    }
    let t = t.unwrap_or_else(|| cfg.default_levels()).max(1);
    let primes = small_primes(f, cfg.z)?;
    let direct = mobius_tail(f, &primes, g, RingElt::ONE, 1, primes.len());

    let mut levels: Vec<LevelTerm> = (1..=t)
        .map(|s| LevelTerm {
            s,
            p_tuples: 0,
            q_tuples: 0,
            term: 0,
        })
        .collect();
    let mut residual = 0i128;
    // (product, norm, index of last prime, level of the next prime)
    let mut stack: Vec<(RingElt, u64, usize, u32)> = vec![(RingElt::ONE, 1, primes.len(), 1)];
    while let Some((m, nm, upto, s)) = stack.pop() {
        let lv = &mut levels[s as usize - 1];
        for j in 0..upto {
            let (p, np) = primes[j];
            let n = nm.saturating_mul(np);
            let mp = f.mul(m, p);
            if n as f64 > xm {
                lv.p_tuples += 1;
                if n <= g.support {
                    lv.term += mobius_tail(f, &primes, g, mp, n, j);
                }
            } else {
                lv.q_tuples += 1;
                if s < t {
                    stack.push((mp, n, j, s + 1));
                } else {
                    residual += mobius_tail(f, &primes, g, mp, n, j);
                }
            }
        }
    }
    let truncated: i128 = levels
        .iter()
        .map(|l| if l.s % 2 == 0 { l.term } else { -l.term })
        .sum();
    let identity_gap = direct - truncated;
    let signed_res = if t % 2 == 0 { residual } else { -residual };
    let forced = cfg.forced_level();
    Ok(BuchstabReport {
        q_empty_beyond_forced: levels.iter().filter(|l| l.s > forced).all(|l| l.q_tuples == 0),
        levels,
        t,
        forced_level: forced,
        direct,
        truncated,
        residual,
        identity_gap,
        full_gap: identity_gap - signed_res,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TypeSplit {
    #[serde(serialize_with = "as_decimal")]
    pub s_i: i128,
    #[serde(serialize_with = "as_decimal")]
    pub s_ii: i128,
    /// `S(w, z) - S(w̃, z)`.
    #[serde(serialize_with = "as_decimal")]
    pub difference: i128,
    pub total_check: bool,
    pub scale_bits: u32,
}

/// `Δ(m) = Σ_{n ≠ 0} (w - w̃)(mn)` for every `m | P(z)` with `N(m) ≤ R`.
fn delta_terms(f: &FieldCtx, cfg: &SieveConfig, diff: &WeightTable) -> Result<Vec<(u64, i32, i128)>> {
    let primes = small_primes(f, cfg.z)?;
    let mut ms = Vec::new();
    for_each_squarefree(f, &primes, diff.support, &mut |m, nm, mu| ms.push((m, nm, mu)));
    Ok(ms
        .par_iter()
        .map(|&(m, nm, mu)| (nm, mu, multiples_sum(f, diff, m, nm)))
        .collect())
}

/// `S(w,z) - S(w̃,z) = S_I + S_II` split at `N(m) < M`.
pub fn type_split(f: &FieldCtx, cfg: &SieveConfig, w: &WeightTable, wt: &WeightTable) -> Result<TypeSplit> {
    let diff = w.sub(wt);
    let terms = delta_terms(f, cfg, &diff)?;
    let (mut s_i, mut s_ii) = (0i128, 0i128);
    for (nm, mu, d) in terms {
        if nm < cfg.m_big {
            s_i += mu as i128 * d;
        } else {
            s_ii += mu as i128 * d;
        }
    }
    let difference = sifted_sum(f, w, cfg.z) - sifted_sum(f, wt, cfg.z);
    Ok(TypeSplit {
        s_i,
        s_ii,
        difference,
        total_check: s_i + s_ii == difference,
        scale_bits: w.scale_bits,
    })
}

/// Tables of `w` and of `w̃` averaged over the units, on `N(r) ≤ support`.
pub fn smooth_weight_tables(sw: &SmoothWeights, support: u64, scale_bits: u32) -> Result<(WeightTable, WeightTable)> {
    let f = &sw.field;
    let units = f.units();
    let w = WeightTable::from_real(f, support, scale_bits, |r| weight_eval(sw, r).w)?;
    let wt = WeightTable::from_real(f, support, scale_bits, |r| {
        units.iter().map(|&u| weight_eval(sw, f.mul(u, r)).wtilde).sum::<f64>() / units.len() as f64
    })?;
    Ok((w, wt))
}

#[derive(Debug, Clone, Serialize)]
pub struct SmokeReport {
    pub difference: f64,
    pub type_i: f64,
    pub type_ii: f64,
    pub y: f64,
    pub x_big: f64,
    /// `|S(w,z) - S(w̃,z)| / (Y (log xX)³)`.
    pub ratio: f64,
}

/// Observed Type I and Type II discrepancies with `a_m = μ(m)[m | P(z)]`,
/// `b_n = 1`, compared with the sieve difference.
pub fn sieve_discrepancy_smoke(f: &FieldCtx, cfg: &SieveConfig, w: &WeightTable, wt: &WeightTable) -> Result<SmokeReport> {
    let diff = w.sub(wt);
    let terms = delta_terms(f, cfg, &diff)?;
    let lo = cfg.x_mu();
    let hi = (cfg.x as f64).powf(cfg.mu + cfg.kappa);
    let (mut t1, mut t2) = (0i128, 0i128);
    for &(nm, mu, d) in &terms {
        if nm < cfg.m_big {
            t1 += mu as i128 * d;
        }
        if (nm as f64) > lo && (nm as f64) < hi {
            t2 += mu as i128 * d;
        }
    }
    let split = type_split(f, cfg, w, wt)?;
    let mut x_big = 1.0f64;
    for (r, v) in w.entries().chain(wt.entries()) {
        if v != 0 && !r.is_zero() {
            let d4 = d_k(f, r, 4)? as f64;
            x_big = x_big.max(d4 * w.to_f64(v).abs());
        }
    }
    let y = w.to_f64(t1).abs().max(w.to_f64(t2).abs());
    let difference = w.to_f64(split.difference);
    let lg = ((cfg.x as f64) * x_big).ln();
    Ok(SmokeReport {
        difference,
        type_i: w.to_f64(t1),
        type_ii: w.to_f64(t2),
        y,
        x_big,
        ratio: if y > 0.0 { difference.abs() / (y * lg.powi(3)) } else { f64::NAN },
    })
}

/// A randomized identity-check instance: a configuration, two weights for
/// the Type I/II split and a function `g` vanishing on `N(r) ≤ x^μ`.
#[derive(Debug, Clone)]
pub struct DeskInstance {
    pub cfg: SieveConfig,
    pub w: WeightTable,
    pub wt: WeightTable,
    pub g: WeightTable,
}

/// Draws an instance with `x ≤ 2^12`, `z ≤ 64` and support at most `max_support`.
/// Weights depend only on the associate class; with `fixed_point` they are
/// multiples of `2^-64` in `[-1, 1]`, otherwise small integers.
pub fn desk_instance(f: &FieldCtx, seed: u64, fixed_point: bool, max_support: u64) -> Result<DeskInstance> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ (f.d as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let x: u64 = rng.random_range(256..=4096);
    let lx = (x as f64).ln();
    let kappa_max = (64f64.ln() / lx).min(0.5);
    let kappa = rng.random_range(0.2 * kappa_max..=kappa_max);
    let mu = rng.random_range(0.1..0.5);
    let lo_m = (x as f64).powf(mu).floor() as u64 + 1;
    let m_big = rng.random_range(lo_m..=(4 * lo_m).min(x));
    let support = rng.random_range((max_support / 4).max(16)..=max_support);
    let cfg = SieveConfig::new(x, kappa, mu, m_big, support)?;
    random_weights(f, cfg, rng.random(), fixed_point)
}

/// Random associate-invariant weights for a given configuration.
pub fn random_weights(f: &FieldCtx, cfg: SieveConfig, seed: u64, fixed_point: bool) -> Result<DeskInstance> {
    let support = cfg.support;
    let (k1, k2, k3) = (splitmix(seed), splitmix(seed ^ 1), splitmix(seed ^ 2));
    let xm = cfg.x_mu();
    let value = |key: u64, r: RingElt| -> i128 {
        if r.is_zero() {
            return 0;
        }
        let c = crate::arith::canonical_associate(f, r).expect("nonzero");
        let h = splitmix(key ^ splitmix(c.n1 as u64 ^ splitmix(c.n2 as u64)));
        if fixed_point {
            // uniform in [-1, 1) at 2^-64 resolution
            (h as i64 as i128) * 2
        } else {
            (h % 11) as i128 - 5
        }
    };
    let bits = if fixed_point { 64 } else { 0 };
    let w = WeightTable::from_fn(f, support, bits, |r| value(k1, r))?;
    let wt = WeightTable::from_fn(f, support, bits, |r| value(k2, r))?;
    let g = WeightTable::from_fn(f, support, bits, |r| {
        if (f.norm(r) as f64) <= xm {
            0
        } else {
            value(k3, r)
        }
    })?;
    Ok(DeskInstance { cfg, w, wt, g })
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub config: SieveConfig,
    pub legendre: LegendreCheck,
    pub buchstab: BuchstabReport,
    pub split: TypeSplit,
    pub pass: bool,
}

/// Runs the three exact identities on an instance.
pub fn check_identities(f: &FieldCtx, inst: &DeskInstance) -> Result<IdentityReport> {
    let legendre = legendre_identity_check(f, &inst.w, inst.cfg.z)?;
    let buchstab = buchstab_decompose(f, &inst.cfg, &inst.g, None)?;
    let split = type_split(f, &inst.cfg, &inst.w, &inst.wt)?;
    let pass = legendre.equal
        && buchstab.identity_gap == 0
        && buchstab.full_gap == 0
        && buchstab.q_empty_beyond_forced
        && split.total_check;
    Ok(IdentityReport {
        config: inst.cfg.clone(),
        legendre,
        buchstab,
        split,
        pass,
    })
}
