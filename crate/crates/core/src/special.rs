//! Sine integral and logarithmic integral in double precision.

use std::f64::consts::FRAC_PI_2;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `Si(x) = ∫_0^x sin(t)/t dt`.
pub fn si(x: f64) -> f64 {
    if x < 0.0 {
        return -si(-x);
    }
    if x <= 4.0 {
        // Σ (-1)^k x^{2k+1} / ((2k+1)(2k+1)!)
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut k = 0.0;
        loop {
            k += 1.0;
            term *= -x2 / ((2.0 * k) * (2.0 * k + 1.0));
            let t = term / (2.0 * k + 1.0);
            sum += t;
            if t.abs() < 1e-17 * sum.abs() {
                return sum;
            }
        }
    }
    // E1(ix) by a continued fraction (modified Lentz); Si = π/2 + Im E1(ix).
    let (mut b_re, b_im) = (1.0, x);
    let (mut c_re, mut c_im) = (1.0 / f64::MIN_POSITIVE, 0.0);
    let (mut d_re, mut d_im) = inv(b_re, b_im);
    let (mut h_re, mut h_im) = (d_re, d_im);
    let mut i = 1.0;
    loop {
        let a = -i * i;
        b_re += 2.0;
        // d = 1 / (a d + b)
        let (t_re, t_im) = (a * d_re + b_re, a * d_im + b_im);
        (d_re, d_im) = inv(t_re, t_im);
        // c = b + a / c
        let (ac_re, ac_im) = {
            let (r, s) = inv(c_re, c_im);
            (a * r, a * s)
        };
        c_re = b_re + ac_re;
        c_im = b_im + ac_im;
        let (del_re, del_im) = (c_re * d_re - c_im * d_im, c_re * d_im + c_im * d_re);
        (h_re, h_im) = (h_re * del_re - h_im * del_im, h_re * del_im + h_im * del_re);
        if (del_re - 1.0).abs() + del_im.abs() < 1e-16 {
            break;
        }
        i += 1.0;
        if i > 10_000.0 {
            break;
        }
    }
    // E1(ix) = h · (cos x - i sin x)
    let (s, c) = x.sin_cos();
    let e_im = h_im * c - h_re * s;
    FRAC_PI_2 + e_im
}

fn inv(re: f64, im: f64) -> (f64, f64) {
    let n = re * re + im * im;
    (re / n, -im / n)
}

/// `li(x) = PV ∫_0^x dt / log t` by Ramanujan's series, `x > 1`.
pub fn li(x: f64) -> f64 {
    assert!(x > 1.0, "li needs x > 1");
    let l = x.ln();
    let mut sum = 0.0;
    let mut fact_pow = 1.0; // l^n / (n! 2^{n-1})
    let mut inner = 0.0; // Σ_{k=0}^{⌊(n-1)/2⌋} 1/(2k+1)
    for n in 1..200 {
        let nf = n as f64;
        fact_pow *= l / nf;
        if n > 1 {
            fact_pow /= 2.0;
        }
        if (n - 1) % 2 == 0 {
            inner += 1.0 / nf;
        }
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        let t = sign * fact_pow * inner;
        sum += t;
        if t.abs() < 1e-17 * sum.abs() && n > 2 * l as i32 {
            break;
        }
    }
    EULER_GAMMA + l.ln() + x.sqrt() * sum
}

/// `Li(x) = li(x) - li(2)`.
pub fn li_offset(x: f64) -> f64 {
    li(x) - li(2.0)
}
