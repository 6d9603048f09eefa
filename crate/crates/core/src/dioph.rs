//! Approximation of α by quotients `a/q` of ring elements, and the lower
//! bounds for `‖nα‖_ω` that follow from a good approximation.

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{canonical_with_unit, enumerate_by_norm, gcd, n2_max, order_key, row_range};
use crate::error::{Error, Result};
use crate::expsum::BoundReport;
use crate::fixed::{torus_dist, Fixed};
use crate::qfield::{AlphaCoords, FieldCtx, RingElt};

/// Residuals below this many bits count as an exact hit.
const RATIONAL_BITS: u32 = 100;
/// Slack `2^-80` in the perturbed lower bound, as a torus offset.
const SLACK: u128 = 1 << 48;

/// `α = a/q + γ` with `|γ| ≤ C/N(q)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Approximation {
    pub a: RingElt,
    pub q: RingElt,
    pub norm_q: u64,
    /// `|α - a/q|²`.
    pub gamma_abs_sq: f64,
    pub c: f64,
}

impl Approximation {
    pub fn gamma_abs(&self) -> f64 {
        self.gamma_abs_sq.sqrt()
    }

    /// `C / N(q)`.
    pub fn allowance(&self) -> f64 {
        self.c / self.norm_q as f64
    }
}

/// `|z|²` for a point given in ω-coordinates.
fn abs_sq(f: &FieldCtx, r1: f64, r2: f64) -> f64 {
    r1 * r1 + f.trace_t as f64 * r1 * r2 + f.norm_omega as f64 * r2 * r2
}

/// For every canonical `q` with `N(q) ≤ qmax`, rounds `qα` to the nearest ring
/// element `a`, reduces `a/q` to lowest terms and keeps the pairs with
/// `a/q ∉ O` and `|α - a/q| ≤ C/N(q)`. `c` defaults to `FieldCtx::gintner_c`.
pub fn gintner_search(
    f: &FieldCtx,
    alpha: &AlphaCoords,
    qmax: u64,
    c: Option<f64>,
) -> Result<Vec<Approximation>> {
    let c = c.unwrap_or_else(|| f.gintner_c());
    let tiny = Fixed::from_frac(1u128 << (128 - RATIONAL_BITS));
    let mut out: Vec<Approximation> = Vec::new();
    for q in enumerate_by_norm(f, qmax) {
        let x = f.re_omega_of_product(q, alpha);
        let y = f.im_omega_of_product(q, alpha);
        let a = RingElt::new(x.round_half_away(), y.round_half_away());
        let r1 = x - Fixed::from_int(a.n1);
        let r2 = y - Fixed::from_int(a.n2);
        if r1.abs() < tiny && r2.abs() < tiny {
            return Err(Error::AlphaLooksRational(f.norm(q)));
        }
        let g = gcd(f, a, q)?;
        let (a, q) = (f.try_div(a, g)?, f.try_div(q, g)?);
        if f.is_unit(q) {
            continue;
        }
        let (q, u) = canonical_with_unit(f, q)?;
        let a = f.mul(a, u);
        let nq = f.norm(q);
        // |qα - a|² is unchanged by the unit and scales by 1/N(g) when g is removed
        let g_norm = f.norm(g) as f64;
        let gamma_abs_sq = abs_sq(f, r1.to_f64(), r2.to_f64()) / g_norm / nq as f64;
        if gamma_abs_sq * (nq as f64).powi(2) > c * c {
            continue;
        }
        if out.iter().any(|o| o.a == a && o.q == q) {
            continue;
        }
        out.push(Approximation {
            a,
            q,
            norm_q: nq,
            gamma_abs_sq,
            c,
        });
    }
    out.sort_by_key(|o| order_key(f, o.q));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StaticViolation {
    pub q: RingElt,
    pub a: RingElt,
}

/// `‖a/q‖_ω ≥ 1/(2|qω|)` for every canonical `q` with `2 ≤ N(q) ≤ qmax` and
/// every residue `a` with `a/q ∉ O`. Exact in integers.
pub fn check_lower_bound_static(f: &FieldCtx, qmax: u64) -> Vec<StaticViolation> {
    let qs: Vec<RingElt> = enumerate_by_norm(f, qmax).filter(|&q| f.norm(q) >= 2).collect();
    qs.par_iter()
        .flat_map_iter(|&q| static_violations(f, q))
        .collect()
}

fn static_violations(f: &FieldCtx, q: RingElt) -> Vec<StaticViolation> {
    let n = f.norm(q) as i128;
    // qO has a basis (A, 0), (B, C) with C = gcd(q₂, q₁ + ξ₂q₂) and AC = N(q),
    // so i + jω with 0 ≤ i < A, 0 ≤ j < C runs over O/qO.
    let cc = num_integer::gcd(q.n2, q.n1 + f.xi2 * q.n2).abs() as i128;
    let aa = n / cc;
    let qc = f.conj(q);
    let mut out = Vec::new();
    for i in 0..aa {
        for j in 0..cc {
            if i == 0 && j == 0 {
                continue;
            }
            let a = RingElt::new(i as i64, j as i64);
            // a/q = a conj(q) / N(q)
            let b = f.mul(a, qc);
            let d1 = (b.n1 as i128).rem_euclid(n);
            let d2 = (b.n2 as i128).rem_euclid(n);
            if d1 == 0 && d2 == 0 {
                continue;
            }
            let m = d1.min(n - d1).max(d2.min(n - d2));
            if 4 * m * m * (f.norm_omega as i128) < n {
                out.push(StaticViolation { q, a });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbedViolation {
    pub n: RingElt,
    pub dist: f64,
    pub bound: f64,
}

/// Largest `N(n)` allowed by `|n| ≤ |q| / (12 C |ω|²)`.
pub fn perturbed_norm_limit(f: &FieldCtx, approx: &Approximation) -> u64 {
    let r = approx.norm_q as f64 / (144.0 * approx.c * approx.c * (f.norm_omega as f64).powi(2));
    r.floor() as u64
}

/// `‖nα‖_ω ≥ 1/(4|qω|) - 2^-80` for all `n` with `|n| ≤ |q|/(12C|ω|²)`,
/// `N(n) ≤ nmax` and `q ∤ na`.
pub fn check_lower_bound_perturbed(
    f: &FieldCtx,
    alpha: &AlphaCoords,
    approx: &Approximation,
    nmax: u64,
) -> Vec<PerturbedViolation> {
    let lim = perturbed_norm_limit(f, approx).min(nmax);
    let scale = BigUint::from(16u32) * approx.norm_q * f.norm_omega as u64;
    let one = BigUint::from(1u32) << 256;
    let bound = 1.0 / (4.0 * (approx.norm_q as f64 * f.norm_omega as f64).sqrt());
    let mut out = Vec::new();
    crate::arith::for_each_in_ball(f, lim, |n| {
        if n.is_zero() || f.divides(approx.q, f.mul(n, approx.a)) {
            return;
        }
        let d = f.dist_of_product(n, alpha);
        let dd = BigUint::from(d.saturating_add(SLACK));
        if &dd * &dd * &scale < one {
            out.push(PerturbedViolation {
                n,
                dist: crate::fixed::torus_to_f64(d),
                bound,
            });
        }
    });
    out
}

/// `#{n : 0 < N(n) ≤ x, ‖nα‖_ω ≤ Δ}` over all elements.
pub fn h_alpha_count(f: &FieldCtx, alpha: &AlphaCoords, x: u64, delta: Fixed) -> u64 {
    h_alpha_count_range(f, alpha, 1, x, delta)
}

/// The same count over the annulus `lo ≤ N(n) ≤ x`.
pub fn h_alpha_count_range(f: &FieldCtx, alpha: &AlphaCoords, lo: u64, x: u64, delta: Fixed) -> u64 {
    assert!(delta > Fixed::ZERO && delta <= Fixed::HALF, "delta must lie in (0, 1/2]");
    if x == 0 {
        return 0;
    }
    let dt = delta.frac();
    let m = n2_max(f, x);
    (-m..=m)
        .into_par_iter()
        .map(|n2| {
            let Some((a, b)) = row_range(f, x, n2) else {
                return 0;
            };
            let mut c = 0u64;
            for n1 in a..=b {
                let n = RingElt::new(n1, n2);
                if n.is_zero() || f.norm(n) < lo {
                    continue;
                }
                let (re, im) = f.product_frac(n, alpha);
                if torus_dist(re) <= dt && torus_dist(im) <= dt {
                    c += 1;
                }
            }
            c
        })
        .sum()
}

/// The count together with `(1 + x/N(q))(1 + Δ² N(q))`.
pub fn h_alpha_report(
    f: &FieldCtx,
    alpha: &AlphaCoords,
    x: u64,
    delta: Fixed,
    approx: &Approximation,
) -> (u64, BoundReport) {
    let count = h_alpha_count(f, alpha, x, delta);
    let nq = approx.norm_q as f64;
    let dl = delta.to_f64();
    let rhs = (1.0 + x as f64 / nq) * (1.0 + dl * dl * nq);
    let rep = BoundReport::new(count as f64, rhs)
        .param("d", f.d)
        .param("x", x)
        .param("delta", dl)
        .param("norm_q", approx.norm_q)
        .param("vanishing_regime", {
            let lim = perturbed_norm_limit(f, approx);
            dl < 1.0 / (4.0 * (nq * f.norm_omega as f64).sqrt()) && x <= lim
        });
    (count, rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfield::parse_alpha;

    #[test]
    fn gintner_example() {
        let f = FieldCtx::new(-1).unwrap();
        let alpha = parse_alpha(&f, "sqrt2_sqrt3").unwrap();
        let v = gintner_search(&f, &alpha, 2, None).unwrap();
        let hit = v.iter().find(|o| o.q == RingElt::new(1, 1)).expect("q = 1+w");
        assert_eq!(hit.a, RingElt::new(0, 3));
        assert!((hit.gamma_abs() - 0.2476).abs() < 1e-3);
        assert!((hit.allowance() - 0.3898).abs() < 1e-3);
        assert!(v.iter().all(|o| o.norm_q >= 2));
    }

    #[test]
    fn rational_alpha_detected() {
        let f = FieldCtx::new(-1).unwrap();
        let alpha = AlphaCoords::from_ratios((1, 2), (1, 2));
        assert!(matches!(
            gintner_search(&f, &alpha, 20, None),
            Err(Error::AlphaLooksRational(_))
        ));
    }

    #[test]
    fn static_bound_small() {
        for d in [-1, -3] {
            let f = FieldCtx::new(d).unwrap();
            assert!(check_lower_bound_static(&f, 50).is_empty());
        }
    }

    #[test]
    fn h_alpha_full_ball() {
        let f = FieldCtx::new(-1).unwrap();
        let alpha = AlphaCoords::from_f64(0.3, 0.7);
        assert_eq!(h_alpha_count(&f, &alpha, 10, Fixed::HALF), 36);
        assert_eq!(h_alpha_count(&f, &alpha, 0, Fixed::HALF), 0);
    }
}
