//! Desk-scale experiments: the weighted prime count in a small box around
//! `α`, the search for primes with unusually small `‖pα‖_ω`, the prime ideal
//! count against `li(x)`, and report serialization.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::arith::{order_key, prime_ideal_count, sieve_primes};
use crate::dioph::{gintner_search, Approximation};
use crate::error::{Error, Result};
use crate::fixed::{torus_dist, torus_to_f64, Fixed};
use crate::hiprec::HiReal;
use crate::qfield::{alpha_rect, parse_alpha, AlphaCoords, FieldCtx, RingElt};
use crate::special::li;

pub const ARTIFACT_VERSION: &str = concat!("heegner-", env!("CARGO_PKG_VERSION"));

/// Default upper limit for `x` in the main count.
pub const DEFAULT_CAP: u64 = 10_000_000;

/// Precision of the independent re-check of search hits.
pub const RECHECK_BITS: u32 = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub n1: i64,
    pub n2: i64,
    pub norm: u64,
    pub dist: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub verified: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment_id: String,
    pub field_d: i64,
    pub alpha_spec: String,
    pub params: BTreeMap<String, Value>,
    pub counts: BTreeMap<String, Value>,
    pub ratios: BTreeMap<String, f64>,
    pub records: Vec<Record>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub runtime_seconds: Option<f64>,
    pub seed: u64,
    pub artifact_version: String,
    pub warnings: Vec<String>,
}

impl ExperimentReport {
    pub fn new(id: &str, f: &FieldCtx, alpha_spec: &str, seed: u64) -> Self {
        ExperimentReport {
            experiment_id: id.to_string(),
            field_d: f.d,
            alpha_spec: alpha_spec.to_string(),
            params: BTreeMap::new(),
            counts: BTreeMap::new(),
            ratios: BTreeMap::new(),
            records: Vec::new(),
            runtime_seconds: None,
            seed,
            artifact_version: ARTIFACT_VERSION.to_string(),
            warnings: Vec::new(),
        }
    }

    pub fn param(mut self, k: &str, v: impl Into<Value>) -> Self {
        self.params.insert(k.to_string(), v.into());
        self
    }

    pub fn count(mut self, k: &str, v: impl Into<Value>) -> Self {
        self.counts.insert(k.to_string(), v.into());
        self
    }

    pub fn ratio(mut self, k: &str, v: f64) -> Self {
        self.ratios.insert(k.to_string(), v);
        self
    }

    pub fn count_u64(&self, k: &str) -> Option<u64> {
        self.counts.get(k).and_then(Value::as_u64)
    }
}

fn record(f: &FieldCtx, p: RingElt, dist: u128) -> Record {
    Record {
        n1: p.n1,
        n2: p.n2,
        norm: f.norm(p),
        dist: torus_to_f64(dist),
        bound: None,
        verified: None,
    }
}

/// The approximation with the largest `N(q) ≤ target`.
pub fn approximation_near(f: &FieldCtx, alpha: &AlphaCoords, target: u64) -> Result<Approximation> {
    gintner_search(f, alpha, target, None)?
        .into_iter()
        .max_by_key(|a| order_key(f, a.q))
        .ok_or(Error::NoApproximationFound(target))
}

/// `x = min(N(q)^{28/5}, cap)`.
pub fn main_count_x(norm_q: u64, cap: u64) -> u64 {
    let x = (norm_q as f64).powf(5.6);
    if x >= cap as f64 {
        cap
    } else {
        x.floor() as u64
    }
}

/// `hit` and `prime` counts of prime elements with `x/2 ≤ N(p) < x`, every
/// associate counted, for each `δ`; a prime is a hit when `‖pα‖_ω < δ`.
pub fn hit_counts(f: &FieldCtx, alpha: &AlphaCoords, x: u64, deltas: &[Fixed]) -> Result<(Vec<u64>, u64, Vec<Record>)> {
    let table = sieve_primes(f, x)?;
    let primes = table.in_range(x.div_ceil(2), x);
    let units = f.units();
    let dts: Vec<u128> = deltas.iter().map(|d| d.frac()).collect();
    let half = deltas.iter().map(|&d| d == Fixed::HALF).collect::<Vec<_>>();
    let (hits, best) = primes
        .par_chunks(4096)
        .map(|chunk| {
            let mut h = vec![0u64; dts.len()];
            let mut best: Vec<(u128, RingElt)> = Vec::new();
            for &(p, _) in chunk {
                for &u in &units {
                    let pu = f.mul(u, p);
                    let d = f.dist_of_product(pu, alpha);
                    for (k, &dt) in dts.iter().enumerate() {
                        // ‖·‖_ω never exceeds 1/2, so δ = 1/2 admits everything
                        if d < dt || half[k] {
                            h[k] += 1;
                        }
                    }
                    best.push((d, pu));
                    if best.len() > 64 {
                        best.sort_by_key(|&(d, p)| (d, order_key(f, p), p));
                        best.truncate(16);
                    }
                }
            }
            (h, best)
        })
        .reduce(
            || (vec![0u64; dts.len()], Vec::new()),
            |(mut a, mut ba), (b, bb)| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                ba.extend(bb);
                (a, ba)
            },
        );
    let mut best = best;
    best.sort_by_key(|&(d, p)| (d, order_key(f, p), p));
    best.truncate(16);
    let records = best.into_iter().map(|(d, p)| record(f, p, d)).collect();
    Ok((hits, primes.len() as u64 * units.len() as u64, records))
}

/// Count of primes with `‖pα‖_ω < δ` in `[x/2, x)` against `4δ²·(prime count)`.
pub fn run_main_count(
    f: &FieldCtx,
    alpha_spec: &str,
    q_norm_target: u64,
    delta: Fixed,
    cap: u64,
) -> Result<ExperimentReport> {
    let alpha = parse_alpha(f, alpha_spec)?;
    check_delta(delta)?;
    let approx = approximation_near(f, &alpha, q_norm_target)?;
    let x = main_count_x(approx.norm_q, cap);
    if x < 4 {
        return Err(Error::ParamOutOfRange(format!("x = {x} too small")));
    }
    let (hits, prime_count, records) = hit_counts(f, &alpha, x, &[delta])?;
    let dl = delta.to_f64();
    let expected = 4.0 * dl * dl * prime_count as f64;
    let hit = hits[0];
    let mut rep = ExperimentReport::new("main-count", f, alpha_spec, 0)
        .param("q", format!("{}", approx.q))
        .param("norm_q", approx.norm_q)
        .param("x", x)
        .param("cap", cap)
        .param("capped", x == cap)
        .param("delta", dl)
        .count("hit_count", hit)
        .count("prime_count", prime_count)
        .count("expected", expected)
        .ratio("hit_over_expected", hit as f64 / expected)
        .ratio("deviation", (hit as f64 / expected - 1.0).abs());
    let floor = (x as f64).powf(-1.0 / 28.0);
    if dl < floor {
        rep.warnings
            .push(format!("delta {dl} is below x^(-1/28) = {floor:.6} at x = {x}"));
    }
    rep.records = records;
    Ok(rep)
}

fn check_delta(delta: Fixed) -> Result<()> {
    if !(delta > Fixed::ZERO && delta <= Fixed::HALF) {
        return Err(Error::ParamOutOfRange(format!("delta = {} outside (0, 1/2]", delta.to_f64())));
    }
    Ok(())
}

/// `points` values of `δ` stepping down from `1/2` by factors of `√2`,
/// stopping early at `x^{-1/28}` when that lies below `1/2`.
pub fn delta_grid(x: u64, points: usize) -> Vec<f64> {
    let floor = (x as f64).powf(-1.0 / 28.0);
    let mut d = 0.5f64;
    let mut out = Vec::new();
    while out.len() < points {
        out.push(d);
        d /= std::f64::consts::SQRT_2;
        if floor < 0.5 && d < floor {
            break;
        }
    }
    out
}

/// Main count over a grid of `δ`; one record per grid point is placed in
/// `counts` and the sweep pairs `(δ, hit/expected)` in `ratios`.
pub fn run_delta_sweep(
    f: &FieldCtx,
    alpha_spec: &str,
    q_norm_target: u64,
    deltas: &[f64],
    cap: u64,
) -> Result<(ExperimentReport, Vec<(f64, f64)>)> {
    let alpha = parse_alpha(f, alpha_spec)?;
    let approx = approximation_near(f, &alpha, q_norm_target)?;
    let x = main_count_x(approx.norm_q, cap);
    let fx: Vec<Fixed> = deltas.iter().map(|&d| Fixed::from_f64(d)).collect();
    for &d in &fx {
        check_delta(d)?;
    }
    let (hits, prime_count, _) = hit_counts(f, &alpha, x, &fx)?;
    let mut rep = ExperimentReport::new("delta-sweep", f, alpha_spec, 0)
        .param("norm_q", approx.norm_q)
        .param("x", x)
        .count("prime_count", prime_count);
    let mut sweep = Vec::new();
    for (k, &d) in fx.iter().enumerate() {
        let dl = d.to_f64();
        let r = hits[k] as f64 / (4.0 * dl * dl * prime_count as f64);
        rep.counts.insert(format!("hit_count[{k}]"), hits[k].into());
        rep.ratios.insert(format!("ratio[{k}]"), r);
        sweep.push((dl, r));
    }
    Ok((rep, sweep))
}

/// `‖pα‖_ω` recomputed from rectangular coordinates at `bits` precision.
pub fn dist_hi(f: &FieldCtx, re: &HiReal, im: &HiReal, p: RingElt, bits: u32) -> HiReal {
    // Re p = n₁ + n₂ t/2 is a half-integer, Im p = n₂ Im ω
    let pr = HiReal::from_int(2 * p.n1 + f.trace_t * p.n2, bits).mul_pow2(-1);
    let pi = f.im_omega_hi(bits).mul_int(p.n2);
    let (re, im) = (re.with_prec(bits), im.with_prec(bits));
    let zr = pr.mul(&re).sub(&pi.mul(&im));
    let zi = pr.mul(&im).add(&pi.mul(&re));
    let y = zi.div(&f.im_omega_hi(bits));
    let x = zr.sub(&y.mul_int(f.trace_t).mul_pow2(-1));
    let a = x.dist_to_int();
    let b = y.dist_to_int();
    if a > b {
        a
    } else {
        b
    }
}

/// Prime elements with `‖pα‖_ω ≤ N(p)^{-θ}` and `N(p) ≤ x_max`, sorted by
/// norm; each hit is re-checked from the rectangular target at 256 bits.
pub fn search_good_primes(f: &FieldCtx, alpha_spec: &str, x_max: u64, theta: f64) -> Result<ExperimentReport> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::ParamOutOfRange(format!("theta = {theta} outside [0, 1]")));
    }
    let alpha = parse_alpha(f, alpha_spec)?;
    let (re, im) = alpha_rect(alpha_spec)?;
    let table = sieve_primes(f, x_max)?;
    let units = f.units();
    let mut found: Vec<(RingElt, u128, f64)> = table
        .primes
        .par_iter()
        .flat_map_iter(|&(p, np)| {
            let bound = (np as f64).powf(-theta);
            let units = &units;
            units.iter().filter_map(move |&u| {
                let pu = f.mul(u, p);
                let d = f.dist_of_product(pu, &alpha);
                (torus_to_f64(d) <= bound).then_some((pu, d, bound))
            })
        })
        .collect();
    found.sort_by_key(|&(p, _, _)| order_key(f, p));
    let mut records = Vec::with_capacity(found.len());
    for (p, d, bound) in found {
        let hi = dist_hi(f, &re, &im, p, RECHECK_BITS);
        let ok = hi <= HiReal::from_f64(bound, RECHECK_BITS);
        let mut r = record(f, p, d);
        r.bound = Some(bound);
        r.verified = Some(ok);
        records.push(r);
    }
    let verified = records.iter().filter(|r| r.verified == Some(true)).count();
    let mut rep = ExperimentReport::new("search", f, alpha_spec, 0)
        .param("x_max", x_max)
        .param("theta", theta)
        .count("hits", records.len() as u64)
        .count("verified", verified as u64)
        .count("prime_elements", table.len() as u64 * units.len() as u64);
    rep.records = records;
    Ok(rep)
}

/// Prime ideal count up to `x` against `li(x)`.
pub fn landau_check(f: &FieldCtx, x: u64) -> Result<ExperimentReport> {
    let count = prime_ideal_count(f, x)?;
    let mut rep = ExperimentReport::new("landau", f, "", 0)
        .param("x", x)
        .count("prime_ideal_count", count as u64);
    if x >= 3 {
        let l = li(x as f64);
        rep = rep
            .ratio("li", l)
            .ratio("deviation", (count as f64 / l - 1.0).abs());
    }
    if x < 1000 {
        rep.warnings.push("small x: no tolerance applies".into());
    }
    Ok(rep)
}

/// Tolerance on `|count/li(x) - 1|` used by the checks, if any.
pub fn landau_tolerance(x: u64) -> Option<f64> {
    if x >= 1_000_000 {
        Some(0.005)
    } else if x >= 1000 {
        Some(0.15)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

/// JSON with sorted keys or CSV with one row per record.
pub fn emit_report(report: &ExperimentReport, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let v = serde_json::to_value(report).map_err(|e| Error::InvalidInput(e.to_string()))?;
            let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::InvalidInput(e.to_string()))?;
            s.push('\n');
            Ok(s.into_bytes())
        }
        Format::Csv => {
            let mut s = String::from("experiment_id,field_d,n1,n2,norm,dist,bound,verified\n");
            for r in &report.records {
                s.push_str(&format!(
                    "{},{},{},{},{},{:e},{},{}\n",
                    report.experiment_id,
                    report.field_d,
                    r.n1,
                    r.n2,
                    r.norm,
                    r.dist,
                    r.bound.map(|b| format!("{b:e}")).unwrap_or_default(),
                    r.verified.map(|b| b.to_string()).unwrap_or_default(),
                ));
            }
            Ok(s.into_bytes())
        }
    }
}

/// Two whitespace-separated columns, one line per point.
pub fn plot_data(points: &[(f64, f64)]) -> String {
    points.iter().map(|(a, b)| format!("{a:.12e} {b:.12e}\n")).collect()
}

/// `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("config line {}: expected key=value", i + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// Runs `job`, returning its value and the elapsed wall time in seconds.
pub fn timed<T>(job: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let v = job();
    (v, t.elapsed().as_secs_f64())
}

/// `‖nα‖_ω` as a double, for reporting.
pub fn dist_f64(f: &FieldCtx, n: RingElt, alpha: &AlphaCoords) -> f64 {
    torus_to_f64(torus_dist(f.dist_of_product(n, alpha)))
}
