//! Smoothing devices: the saw-tooth Fourier approximation, the expansion of
//! the indicator of `‖yα‖_ω < δ`, Gaussian weights and theta kernels, the
//! Poisson transform of the weighted lattice sum, the frequency cutoff and the
//! Perron-type truncated integral.

use std::f64::consts::{LN_2, PI};

use num_bigint::BigInt;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{n2_max, row_range};
use crate::error::{Error, Result};
use crate::fixed::{torus_dist, Fixed, FRAC_BITS};
use crate::hiprec::HiReal;
use crate::qfield::{AlphaCoords, FieldCtx, RingElt};
use crate::special::si;

/// Bits below which theta and lattice tails are dropped.
pub const TAIL_BITS: u32 = 120;

/// `ψ(t) = t - ⌊t⌋ - 1/2`.
pub fn psi(t: f64) -> f64 {
    t - t.floor() - 0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sawtooth {
    pub approx: f64,
    pub exact: f64,
    pub err: f64,
}

/// `Σ_{1≤|j|<J} (2πij)^{-1} e(-jx) = -Σ_{1≤j<J} sin(2πjx)/(πj)` against `ψ(x)`.
pub fn sawtooth_approx(x: f64, j: u32) -> Result<Sawtooth> {
    if j == 0 {
        return Err(Error::ParamOutOfRange("J must be at least 1".into()));
    }
    let frac = x - x.floor();
    let mut approx = 0.0;
    for k in 1..j {
        let k = k as f64;
        approx -= (2.0 * PI * k * frac).sin() / (PI * k);
    }
    let exact = psi(x);
    Ok(Sawtooth {
        approx,
        exact,
        err: (approx - exact).abs(),
    })
}

/// `min{log 2J, 1/(J‖x‖)}`.
pub fn sawtooth_scale(x: f64, j: u32) -> f64 {
    let d = (x - x.round()).abs();
    let a = (2.0 * j as f64).ln();
    if d == 0.0 {
        a
    } else {
        a.min(1.0 / (j as f64 * d))
    }
}

/// Scale `x`, `N = x^{1-ε}`, cutoff `δ` and the point `α` of the smoothed
/// weights `w` and `w̃`.
#[derive(Debug, Clone)]
pub struct SmoothWeights {
    pub field: FieldCtx,
    pub alpha: AlphaCoords,
    pub x: u64,
    pub epsilon: f64,
    pub delta: Fixed,
    pub n_scale: f64,
}

impl SmoothWeights {
    pub fn new(field: FieldCtx, alpha: AlphaCoords, x: u64, epsilon: f64, delta: Fixed) -> Result<Self> {
        if x < 2 {
            return Err(Error::ParamOutOfRange("x must be at least 2".into()));
        }
        if !(epsilon > 0.0 && epsilon <= 0.5) {
            return Err(Error::ParamOutOfRange(format!("epsilon = {epsilon} outside (0, 1/2]")));
        }
        let dl = delta.to_f64();
        if !(delta > Fixed::ZERO && delta <= Fixed::HALF) || dl.ln() < -1000.0 * (x as f64).ln() {
            return Err(Error::ParamOutOfRange(format!("delta = {dl} outside [x^-1000, 1/2]")));
        }
        let n_scale = (x as f64).powf(1.0 - epsilon);
        Ok(SmoothWeights {
            field,
            alpha,
            x,
            epsilon,
            delta,
            n_scale,
        })
    }

    pub fn delta_f64(&self) -> f64 {
        self.delta.to_f64()
    }

    /// `f_N(z) = exp(-π|z|²/N)`.
    pub fn f_n(&self, z: RingElt) -> f64 {
        (-PI * self.field.norm(z) as f64 / self.n_scale).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndicatorExpansion {
    pub lhs: u8,
    pub rhs: f64,
    /// Some coordinate of `yα` lies in `±δ + Z`.
    pub boundary: bool,
    /// `rhs - lhs` computed exactly; zero off the boundary.
    pub defect: f64,
}

/// `ψ(a) - ψ(b)` for torus points, as an exact fixed-point number.
fn psi_diff(a: u128, b: u128) -> Fixed {
    Fixed::from_frac(a) - Fixed::from_frac(b)
}

/// `[‖yα‖_ω < δ]` against `Π_k (2δ + ψ(-x_k - δ) - ψ(-x_k + δ))`, all in exact
/// fixed point.
pub fn indicator_expansion(f: &FieldCtx, w: &SmoothWeights, y: RingElt) -> IndicatorExpansion {
    let (x1, x2) = f.product_frac(y, &w.alpha);
    let dt = w.delta.frac();
    let two_delta = w.delta + w.delta;
    let factor = |xk: u128| {
        let neg = 0u128.wrapping_sub(xk);
        two_delta + psi_diff(neg.wrapping_sub(dt), neg.wrapping_add(dt))
    };
    let (p1, p2) = (factor(x1), factor(x2));
    let prod = p1.mul_exact(p2);
    let scale = BigInt::from(1) << (2 * FRAC_BITS);
    let in_set = torus_dist(x1) < dt && torus_dist(x2) < dt;
    let lhs = in_set as u8;
    let on_edge = |xk: u128| xk == dt || xk == 0u128.wrapping_sub(dt);
    let defect_big = &prod - BigInt::from(lhs) * &scale;
    let rhs = big_ratio(&prod, 2 * FRAC_BITS);
    IndicatorExpansion {
        lhs,
        rhs,
        boundary: on_edge(x1) || on_edge(x2),
        defect: big_ratio(&defect_big, 2 * FRAC_BITS),
    }
}

fn big_ratio(v: &BigInt, bits: u32) -> f64 {
    HiReal::from_mantissa(v.clone(), bits).to_f64()
}

/// `W_δ(ϑ) = Σ_n exp(-π(ϑ-n)²/δ²)` in double precision.
pub fn w_delta(theta: f64, delta: f64) -> f64 {
    let t = theta - theta.floor();
    // exp(-π k² / δ²) < 2^-120 once k > δ √(120 ln 2 / π)
    let k = (delta * (TAIL_BITS as f64 * LN_2 / PI).sqrt()).ceil() as i64 + 1;
    let mut s = 0.0;
    for n in -k..=k + 1 {
        let u = t - n as f64;
        s += (-PI * u * u / (delta * delta)).exp();
    }
    s
}

/// `1 + 3 exp(-π/δ²)`, the largest value `W_δ` can take for `δ ≤ 1/2`.
pub fn w_delta_ceiling(delta: f64) -> f64 {
    1.0 + 3.0 * (-PI / (delta * delta)).exp()
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaPair {
    pub direct: f64,
    pub dual: f64,
    pub rel_diff: f64,
    pub prec_bits: u32,
    pub direct_decimal: String,
}

/// `W_δ(ϑ)` summed directly and as `δ Σ_j exp(-πδ²j²) e(jϑ)`, in high
/// precision so the comparison is meaningful even when `W_δ(ϑ)` is tiny.
pub fn theta_wdelta(theta: f64, delta: f64) -> Result<ThetaPair> {
    if !(delta > 0.0 && delta <= 0.5) || !theta.is_finite() {
        return Err(Error::ParamOutOfRange(format!("delta = {delta} outside (0, 1/2]")));
    }
    let t = theta - theta.floor();
    let dist = t.min(1.0 - t);
    let decay_bits = (PI * dist * dist / (delta * delta) / LN_2).ceil() as u32;
    let prec = 96 + decay_bits + TAIL_BITS;
    let p = prec + 32;
    let pi = HiReal::pi(p);
    let th = HiReal::from_f64(theta, p);
    let dl = HiReal::from_f64(delta, p);
    let d2 = dl.mul(&dl);
    let budget = (p + 8) as f64 * LN_2 / PI;

    let k = (delta * budget.sqrt()).ceil() as i64 + 2;
    let base = theta.floor() as i64;
    let mut direct = HiReal::zero(p);
    for n in base - k..=base + k + 1 {
        let u = th.sub(&HiReal::from_int(n, p));
        direct = direct.add(&pi.mul(&u.mul(&u)).div(&d2).neg().exp());
    }

    let jmax = (budget.sqrt() / delta).ceil() as i64 + 2;
    let q = pi.mul(&d2).neg().exp();
    let (s1, c1) = pi.mul_int(2).mul(&th).sin_cos();
    // q^{j²} via q^{(j+1)²} = q^{j²} q^{2j+1}; e(jϑ) by angle addition
    let mut qj = HiReal::from_int(1, p);
    let mut step = q.clone();
    let q2 = q.mul(&q);
    let (mut cj, mut sj) = (HiReal::from_int(1, p), HiReal::zero(p));
    let mut acc = HiReal::zero(p);
    for _ in 1..=jmax {
        qj = qj.mul(&step);
        step = step.mul(&q2);
        let c = cj.mul(&c1).sub(&sj.mul(&s1));
        let s = sj.mul(&c1).add(&cj.mul(&s1));
        cj = c;
        sj = s;
        acc = acc.add(&qj.mul(&cj));
    }
    let dual = dl.mul(&HiReal::from_int(1, p).add(&acc.mul_int(2)));
    let rel = direct.sub(&dual).abs().div(&direct.abs()).to_f64();
    Ok(ThetaPair {
        direct: direct.to_f64(),
        dual: dual.to_f64(),
        rel_diff: rel,
        prec_bits: p,
        direct_decimal: direct.to_decimal(40),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Proximity {
    Near,
    Far,
}

#[derive(Debug, Clone, Serialize)]
pub struct LatticeSum {
    pub direct: Complex64,
    /// Largest single term of the dual side.
    pub sigma0: f64,
    /// The remaining dual terms.
    pub sigma_star: f64,
    pub poisson: f64,
    pub rel_diff: f64,
    pub class: Proximity,
    /// `|direct| / R`.
    pub c_always: f64,
    /// `|direct| / (R e^{-x_eps})`.
    pub c_far: f64,
    pub prec_bits: u32,
    pub terms_direct: u64,
    pub terms_dual: u64,
}

/// Working precision for [`gauss_lattice_sum`]: the sum can be as small as
/// `exp(-0.6 π R)`, and both sides must resolve it to about 40 bits.
pub fn lattice_prec(r: f64) -> u32 {
    256 + (PI * r * 0.75 / LN_2).ceil() as u32
}

/// `Σ_m exp(-πN(m)/R) e(Im_ω(mϑ))` summed over the lattice and through its
/// Poisson dual
/// `(R/Im ω) Σ_{n∈Z²} exp(-πR[(n₁-I)² + (n₂-P-(n₁-I)Re ω)²/(Im ω)²])`
/// with `I = Im_ω ϑ`, `P = Re_ω ϑ + ξ₂ Im_ω ϑ`.
pub fn gauss_lattice_sum(f: &FieldCtx, r: f64, theta: &AlphaCoords, x_eps: f64) -> Result<LatticeSum> {
    if !(r >= 1.0) || !r.is_finite() {
        return Err(Error::ParamOutOfRange(format!("R = {r} must be at least 1")));
    }
    let p = lattice_prec(r);
    let pi = HiReal::pi(p);
    let rh = HiReal::from_f64(r, p);
    let budget = (p + 16) as f64 * LN_2;

    // direct side: rows of constant n₂, geometric recurrences along n₁
    let nmax = (budget * r / PI).ceil() as u64;
    let m = n2_max(f, nmax);
    // every weight and phase is an integer power of one of these
    let e1 = pi.div(&rh).neg().exp();
    let e1_inv = pi.div(&rh).exp();
    let q2 = e1.mul(&e1);
    let two_pi = pi.mul_int(2);
    let rot_1 = angle_of(&two_pi, f.product_frac(RingElt::new(1, 0), theta).1, p).sin_cos();
    let rot_w = angle_of(&two_pi, f.product_frac(RingElt::new(0, 1), theta).1, p).sin_cos();
    let (s_step, c_step) = rot_1.clone();
    let rows: Vec<(HiReal, HiReal, u64)> = (-m..=m)
        .into_par_iter()
        .map(|n2| {
            let Some((lo, hi)) = row_range(f, nmax, n2) else {
                return (HiReal::zero(p), HiReal::zero(p), 0);
            };
            // walk outwards from the centre of the row so the recurrences only shrink
            let centre = (-(f.trace_t * n2) as f64 / 2.0).round() as i64;
            let centre = centre.clamp(lo, hi);
            let start = RingElt::new(centre, n2);
            let w0 = pow_real(&e1, f.norm(start));
            let (s0, c0) = rot_mul(&rot_pow(&rot_1, centre, p), &rot_pow(&rot_w, n2, p));
            let (mut re, mut im) = (HiReal::zero(p), HiReal::zero(p));
            for dir in [1i64, -1] {
                let (mut w, mut s, mut c) = (w0.clone(), s0.clone(), c0.clone());
                let first = if dir == 1 { centre } else { centre - 1 };
                if dir == -1 {
                    if centre == lo {
                        continue;
                    }
                    // step to centre - 1
                    let k = 2 * centre - 1 + f.trace_t * n2;
                    w = w.mul(&if k >= 0 { pow_real(&e1_inv, k as u64) } else { pow_real(&e1, (-k) as u64) });
                    let cn = c.mul(&c_step).add(&s.mul(&s_step));
                    s = s.mul(&c_step).sub(&c.mul(&s_step));
                    c = cn;
                }
                // exponent step from n₁ to n₁ + dir is exp(-π k / R)
                let k = if dir == 1 {
                    2 * first + 1 + f.trace_t * n2
                } else {
                    -(2 * first - 1 + f.trace_t * n2)
                };
                let mut ratio = if k >= 0 { pow_real(&e1, k as u64) } else { pow_real(&e1_inv, (-k) as u64) };
                let sd = if dir == 1 { s_step.clone() } else { s_step.neg() };
                let mut n1 = first;
                while n1 >= lo && n1 <= hi {
                    re = re.add(&w.mul(&c));
                    im = im.add(&w.mul(&s));
                    w = w.mul(&ratio);
                    ratio = ratio.mul(&q2);
                    let cn = c.mul(&c_step).sub(&s.mul(&sd));
                    s = s.mul(&c_step).add(&c.mul(&sd));
                    c = cn;
                    n1 += dir;
                }
            }
            (re, im, (hi - lo + 1) as u64)
        })
        .collect();
    let mut dre = HiReal::zero(p);
    let mut dim = HiReal::zero(p);
    let mut terms_direct = 0;
    for (a, b, n) in rows {
        dre = dre.add(&a);
        dim = dim.add(&b);
        terms_direct += n;
    }

    // dual side
    let im_w = f.im_omega_hi(p);
    let i_hi = HiReal::from_fixed(theta.im, p);
    let p_hi = HiReal::from_fixed(theta.re, p).add(&i_hi.mul_int(f.xi2));
    let (i_f, p_f) = (theta.im.to_f64(), theta.re.to_f64() + f.xi2 as f64 * theta.im.to_f64());
    let (re_w, im_wf) = (f.re_omega_f64(), f.im_omega_f64());
    let lim = budget / (PI * r);
    let span1 = lim.sqrt() + 1.0;
    let mut pts = Vec::new();
    for n1 in (i_f - span1).floor() as i64..=(i_f + span1).ceil() as i64 {
        let u1 = n1 as f64 - i_f;
        let rest = (lim - u1 * u1).max(0.0).sqrt() * im_wf + 1.0;
        let centre = p_f + u1 * re_w;
        for n2 in (centre - rest).floor() as i64..=(centre + rest).ceil() as i64 {
            pts.push((n1, n2));
        }
    }
    let pr = pi.mul(&rh);
    let im2 = im_w.mul(&im_w);
    let terms: Vec<HiReal> = pts
        .par_iter()
        .map(|&(n1, n2)| {
            let u1 = HiReal::from_int(n1, p).sub(&i_hi);
            let v = HiReal::from_int(n2, p)
                .sub(&p_hi)
                .sub(&u1.mul_int(f.trace_t).mul_pow2(-1));
            let e = u1.mul(&u1).add(&v.mul(&v).div(&im2));
            pr.mul(&e).neg().exp()
        })
        .collect();
    let scale = rh.div(&im_w);
    let mut total = HiReal::zero(p);
    let mut best = HiReal::zero(p);
    for t in &terms {
        total = total.add(t);
        if *t > best {
            best = t.clone();
        }
    }
    let poisson = total.mul(&scale);
    let sigma0 = best.mul(&scale);
    let sigma_star = poisson.sub(&sigma0);
    // squaring a residual of a few ulps would underflow the working precision
    let diff = dre.sub(&poisson).to_f64().hypot(dim.to_f64());
    let rel_diff = diff / poisson.to_f64();

    let direct = Complex64::new(dre.to_f64(), dim.to_f64());
    let dist = f.dist_omega(theta).to_f64();
    let class = if dist < x_eps / r.sqrt() {
        Proximity::Near
    } else {
        Proximity::Far
    };
    Ok(LatticeSum {
        direct,
        sigma0: sigma0.to_f64(),
        sigma_star: sigma_star.to_f64(),
        poisson: poisson.to_f64(),
        rel_diff,
        class,
        c_always: direct.norm() / r,
        c_far: direct.norm() / (r * (-x_eps).exp()),
        prec_bits: p,
        terms_direct,
        terms_dual: terms.len() as u64,
    })
}

fn pow_real(b: &HiReal, mut k: u64) -> HiReal {
    let mut acc = HiReal::from_int(1, b.prec());
    let mut base = b.clone();
    while k > 0 {
        if k & 1 == 1 {
            acc = acc.mul(&base);
        }
        k >>= 1;
        if k > 0 {
            base = base.mul(&base);
        }
    }
    acc
}

/// Product of two unit complex numbers stored as `(sin, cos)`.
fn rot_mul(a: &(HiReal, HiReal), b: &(HiReal, HiReal)) -> (HiReal, HiReal) {
    let s = a.0.mul(&b.1).add(&a.1.mul(&b.0));
    let c = a.1.mul(&b.1).sub(&a.0.mul(&b.0));
    (s, c)
}

fn rot_pow(r: &(HiReal, HiReal), k: i64, p: u32) -> (HiReal, HiReal) {
    let mut acc = (HiReal::zero(p), HiReal::from_int(1, p));
    let mut base = if k < 0 { (r.0.neg(), r.1.clone()) } else { r.clone() };
    let mut k = k.unsigned_abs();
    while k > 0 {
        if k & 1 == 1 {
            acc = rot_mul(&acc, &base);
        }
        k >>= 1;
        if k > 0 {
            base = rot_mul(&base, &base);
        }
    }
    acc
}

fn angle_of(two_pi: &HiReal, t: u128, p: u32) -> HiReal {
    two_pi.mul(&HiReal::from_mantissa(BigInt::from(t), FRAC_BITS).with_prec(p))
}

/// `(1 + |Re ω|) / Im ω`.
pub fn cutoff_constant(f: &FieldCtx) -> f64 {
    (1.0 + f.re_omega_f64().abs()) / f.im_omega_f64()
}

/// `Σ_{max|jᵢ| > K} exp(-πδ²(j₁² + j₂²))` with `K = c δ^{-1} x^{ε/2}`.
pub fn smooth_cutoff_tail(f: &FieldCtx, w: &SmoothWeights) -> f64 {
    cutoff_tail_raw(f, w.delta_f64(), w.x as f64, w.epsilon)
}

/// [`smooth_cutoff_tail`] without the range checks on `ε`.
pub fn cutoff_tail_raw(f: &FieldCtx, delta: f64, x: f64, epsilon: f64) -> f64 {
    let k = (cutoff_constant(f) / delta * x.powf(epsilon / 2.0)).floor() as i64;
    let a = PI * delta * delta;
    let g = |j: i64| (-a * (j * j) as f64).exp();
    // one-dimensional inner sum and tail
    let inner: f64 = (-k..=k).map(g).sum();
    let mut tail = 0.0;
    let mut j = k + 1;
    loop {
        let t = g(j);
        tail += 2.0 * t;
        if t == 0.0 || t < tail * 1e-18 {
            break;
        }
        j += 1;
    }
    2.0 * inner * tail + tail * tail
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerronValue {
    pub integral: f64,
    pub imag: f64,
    pub err_bound: f64,
    pub target: f64,
    /// `(Si((ρ+γ)T) + Si((ρ-γ)T)) / π`.
    pub closed_form: f64,
}

const PERRON_TOL: f64 = 1e-8;

/// `(1/π) ∫_{-T}^{T} e^{iγt} sin(ρt)/t dt` by adaptive Simpson, compared
/// with `[γ < ρ]` and the bound `4 / (T|γ-ρ|)`.
pub fn perron_indicator(gamma: f64, rho: f64, t: f64) -> Result<PerronValue> {
    if gamma == rho {
        return Err(Error::EqualArguments);
    }
    if !(gamma > 0.0 && rho > 0.0 && t >= 1.0) || !(gamma.is_finite() && rho.is_finite() && t.is_finite()) {
        return Err(Error::ParamOutOfRange("need gamma, rho > 0 and T >= 1".into()));
    }
    let sinc = |x: f64| {
        if x.abs() < 1e-3 {
            let x2 = x * x;
            1.0 - x2 / 6.0 + x2 * x2 / 120.0
        } else {
            x.sin() / x
        }
    };
    // sin(ρt)/t = ρ sinc(ρt)
    let re = |u: f64| (gamma * u).cos() * rho * sinc(rho * u);
    let im = |u: f64| (gamma * u).sin() * rho * sinc(rho * u);
    // panels no wider than a quarter period of the fastest oscillation
    let width = PI / (2.0 * (gamma + rho));
    let panels = (t / width).ceil().max(1.0) as usize;
    let h = t / panels as f64;
    let tol = PERRON_TOL / panels as f64;
    let mut pos_re = 0.0;
    let mut pos_im = 0.0;
    let mut neg_im = 0.0;
    for i in 0..panels {
        let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
        pos_re += simpson(&re, a, b, tol);
        pos_im += simpson(&im, a, b, tol);
        neg_im += simpson(&im, -b, -a, tol);
    }
    let integral = 2.0 * pos_re / PI;
    let imag = (pos_im + neg_im) / PI;
    let closed_form = (si((rho + gamma) * t) + si((rho - gamma) * t)) / PI;
    Ok(PerronValue {
        integral,
        imag,
        err_bound: 4.0 / (t * (gamma - rho).abs()),
        target: if gamma < rho { 1.0 } else { 0.0 },
        closed_form,
    })
}

fn simpson<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (g(a), g(m), g(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(g, a, b, fa, fm, fb, whole, tol, 40)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    g: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (g(lm), g(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(g, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_rec(g, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightValue {
    pub w: f64,
    pub wtilde: f64,
}

/// `w(z) = δ² f_N(z)` and `w̃(z) = f_N(z) W_δ(Im_ω(zα)) W_δ(Re_ω(zα) + ξ₂ Im_ω(zα))`.
pub fn weight_eval(w: &SmoothWeights, z: RingElt) -> WeightValue {
    let f = &w.field;
    let fz = w.f_n(z);
    let dl = w.delta_f64();
    let (re, im) = f.product_frac(z, &w.alpha);
    let a = frac_f64(im);
    let b = frac_f64(re.wrapping_add(crate::fixed::torus_mul(f.xi2 as i128, im)));
    WeightValue {
        w: dl * dl * fz,
        wtilde: fz * w_delta(a, dl) * w_delta(b, dl),
    }
}

fn frac_f64(t: u128) -> f64 {
    (t >> 64) as f64 / 2f64.powi(64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sawtooth_values() {
        assert_eq!(sawtooth_approx(0.5, 10).unwrap().exact, 0.0);
        assert!(sawtooth_approx(0.5, 10).unwrap().approx.abs() < 1e-12);
        assert_eq!(sawtooth_approx(0.25, 10).unwrap().exact, -0.25);
        let s = sawtooth_approx(0.3, 100).unwrap();
        assert!(s.err <= 2.0 * sawtooth_scale(0.3, 100));
        assert!(sawtooth_approx(0.3, 0).is_err());
    }

    #[test]
    fn theta_examples() {
        let a = theta_wdelta(0.0, 0.1).unwrap();
        assert!((a.direct - 1.0).abs() < 1e-15);
        let b = theta_wdelta(0.5, 0.1).unwrap();
        let expect = 2.0 * (-25.0 * PI).exp();
        assert!((b.direct / expect - 1.0).abs() < 1e-12);
        assert!(b.rel_diff < 1e-12 && a.rel_diff < 1e-12);
    }

    #[test]
    fn lattice_self_dual_point() {
        let f = FieldCtx::new(-1).unwrap();
        let s = gauss_lattice_sum(&f, 1.0, &AlphaCoords::from_f64(0.0, 0.0), 1.0).unwrap();
        assert!((s.direct.re - 1.180_340_599_016_096_2).abs() < 1e-12, "{:?}", s);
        assert!(s.rel_diff < 1e-9);
        let far = gauss_lattice_sum(&f, 100.0, &AlphaCoords::from_ratios((1, 2), (1, 2)), 2.0).unwrap();
        assert_eq!(far.class, Proximity::Far);
        assert!(far.rel_diff < 1e-9, "{}", far.rel_diff);
    }

    #[test]
    fn perron_examples() {
        let a = perron_indicator(1.0, 2.0, 100.0).unwrap();
        assert!((a.integral - 1.0).abs() <= 0.04);
        assert!((a.integral - a.closed_form).abs() < 1e-7);
        let b = perron_indicator(2.0, 1.0, 100.0).unwrap();
        assert!(b.integral.abs() <= 0.04);
        assert!(b.imag.abs() < 1e-8);
        assert!(matches!(perron_indicator(1.0, 1.0, 5.0), Err(Error::EqualArguments)));
    }

    #[test]
    fn weights_at_origin() {
        let f = FieldCtx::new(-1).unwrap();
        let w = SmoothWeights::new(f, AlphaCoords::from_f64(0.3, 0.7), 10_000, 0.1, Fixed::from_ratio(3, 10))
            .unwrap();
        let v = weight_eval(&w, RingElt::ZERO);
        assert!((v.w - 0.09).abs() < 1e-15);
        assert!((v.wtilde - w_delta(0.0, 0.3).powi(2)).abs() < 1e-15);
    }
}
