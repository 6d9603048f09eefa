//! One test per acceptance criterion. Each prints a single `criterion N: PASS|FAIL` line
//! with the measured quantities (`cargo test --test acceptance -- --nocapture`).

use std::process::Command;
use std::time::Instant;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use heegner::dioph::{check_lower_bound_perturbed, check_lower_bound_static, gintner_search, h_alpha_count, perturbed_norm_limit};
use heegner::expsum::{ell_of, lin_bound, lin_sum, lin_sum_ball_fast, verify_bilinear_bound, BilinearParams, BoundKind};
use heegner::fixed::torus_mul;
use heegner::hsieve::{check_identities, desk_instance};
use heegner::lab::{approximation_near, landau_check, run_main_count, search_good_primes};
use heegner::qfield::{parse_alpha, PRESETS};
use heegner::smooth::{gauss_lattice_sum, perron_indicator, sawtooth_approx, sawtooth_scale, theta_wdelta};
use heegner::{AlphaCoords, FieldCtx, Fixed, RingElt};

fn report(n: u32, pass: bool, detail: String) {
    println!("criterion {n}: {} {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {detail}");
}

fn random_alpha(rng: &mut ChaCha8Rng) -> AlphaCoords {
    AlphaCoords::new(
        Fixed::from_frac(rng.random::<u128>()),
        Fixed::from_frac(rng.random::<u128>()),
    )
}

/// Near `a₁/q₁ + (a₂/q₂)ω` with `q ≤ 12`, offset by `10^-u`, `1 < u < 7`.
fn near_rational_alpha(rng: &mut ChaCha8Rng) -> AlphaCoords {
    let mut coord = || {
        let q: i64 = rng.random_range(1..=12);
        let a = rng.random_range(0..q);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        Fixed::from_ratio(a, q) + Fixed::from_f64(sign * 10f64.powf(-rng.random_range(1.0..7.0)))
    };
    let re = coord();
    AlphaCoords::new(re, coord())
}

fn random_elt(rng: &mut ChaCha8Rng, bound: i64) -> RingElt {
    RingElt::new(rng.random_range(-bound..=bound), rng.random_range(-bound..=bound))
}

fn scaled(x: Fixed) -> BigInt {
    x.to_scaled()
}

#[test]
fn criterion_01_exact_identities() {
    let t0 = Instant::now();
    let mut bad = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for f in FieldCtx::all() {
        for k in 0..50u64 {
            // Im_ω(lρ) = l₁r₂ + l₂r₁ + ξ₂l₂r₂ and Re_ω(lρ) = l₁r₁ + ξ₁l₂r₂, exactly
            let l = random_elt(&mut rng, 1000);
            let rho = random_alpha(&mut rng);
            let (r1, r2) = (scaled(rho.re), scaled(rho.im));
            let (l1, l2) = (BigInt::from(l.n1), BigInt::from(l.n2));
            let im = &l1 * &r2 + &l2 * &r1 + BigInt::from(f.xi2) * &l2 * &r2;
            let re = &l1 * &r1 + BigInt::from(f.xi1) * &l2 * &r2;
            if scaled(f.im_omega_of_product(l, &rho)) != im || scaled(f.re_omega_of_product(l, &rho)) != re {
                bad.push(format!("d={} product coordinates l={l}", f.d));
            }

            // e(Im_ω(ℓ mn α)) = e(-(j₁ Re_ω(mnα) + j₂ Im_ω(mnα)))
            let (j1, j2) = (rng.random_range(-20..=20i64), rng.random_range(-20..=20i64));
            let ell = ell_of(&f, j1, j2);
            let mn = f.mul(random_elt(&mut rng, 300), random_elt(&mut rng, 300));
            let (re_mn, im_mn) = f.product_frac(mn, &rho);
            let lhs = f.product_frac(f.mul(ell, mn), &rho).1;
            let rhs = torus_mul(-j1 as i128, re_mn).wrapping_add(torus_mul(-j2 as i128, im_mn));
            if lhs != rhs {
                bad.push(format!("d={} phase j=({j1},{j2})", f.d));
            }

            let inst = desk_instance(&f, k, k % 2 == 1, 3000).unwrap();
            let rep = check_identities(&f, &inst).unwrap();
            if !rep.pass {
                bad.push(format!("d={} sieve seed={k}", f.d));
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    report(
        1,
        bad.is_empty() && secs < 120.0,
        format!("450 instances, {} failures {:?}, {secs:.1}s", bad.len(), bad.first()),
    );
}

#[test]
fn criterion_02_poisson_closed_form() {
    let t0 = Instant::now();
    let f1 = FieldCtx::new(-1).unwrap();
    let spot = gauss_lattice_sum(&f1, 1.0, &AlphaCoords::default(), 1.0).unwrap();
    let spot_ok = (spot.direct.re - 1.180_340_599_016_096).abs() < 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut thetas = vec![AlphaCoords::default(), AlphaCoords::from_ratios((1, 2), (1, 2))];
    while thetas.len() < 20 {
        thetas.push(random_alpha(&mut rng));
    }
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for f in FieldCtx::all() {
        for r in [1.0, 4.0, 25.0, 100.0] {
            for th in &thetas {
                let s = gauss_lattice_sum(&f, r, th, 1.0).unwrap();
                worst = worst.max(s.rel_diff);
                count += 1;
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    report(
        2,
        spot_ok && worst <= 1e-9 && secs < 60.0,
        format!(
            "{count} sums, worst rel diff {worst:.2e}, spot {:.15}, {secs:.1}s",
            spot.direct.re
        ),
    );
}

#[test]
fn criterion_03_theta_duality() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let theta = if k == 0 { 0.5 } else { rng.random_range(0.0..1.0) };
        let delta = rng.random_range(0.05..=0.5);
        worst = worst.max(theta_wdelta(theta, delta).unwrap().rel_diff);
    }
    report(3, worst <= 1e-12, format!("50 points, worst rel diff {worst:.2e}"));
}

#[test]
fn criterion_04_static_lower_bound() {
    let t0 = Instant::now();
    let violations: usize = FieldCtx::all()
        .iter()
        .map(|f| check_lower_bound_static(f, 300).len())
        .sum();
    let secs = t0.elapsed().as_secs_f64();
    report(
        4,
        violations == 0 && secs < 60.0,
        format!("N(q) <= 300, nine fields, {violations} violations, {secs:.1}s"),
    );
}

#[test]
fn criterion_05_vanishing_clause() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut violations = 0usize;
    let mut nonvacuous = 0usize;
    let mut total = 0usize;
    for f in FieldCtx::all() {
        let mut approxs = Vec::new();
        let mut targets: Vec<AlphaCoords> = PRESETS.iter().map(|p| parse_alpha(&f, p).unwrap()).collect();
        while approxs.len() < 20 {
            let alpha = targets.pop().unwrap_or_else(|| random_alpha(&mut rng));
            for a in gintner_search(&f, &alpha, 10_000, None).unwrap() {
                if approxs.len() < 20 {
                    approxs.push((alpha, a));
                }
            }
        }
        for (alpha, a) in &approxs {
            total += 1;
            let lim = perturbed_norm_limit(&f, a);
            violations += check_lower_bound_perturbed(&f, alpha, a, lim).len();
            if lim >= 1 {
                nonvacuous += 1;
                // just below 1/(4|qω|): no n with N(n) ≤ lim may land that close
                let bound = 1.0 / (4.0 * ((a.norm_q * f.norm_omega as u64) as f64).sqrt());
                let h = h_alpha_count(&f, alpha, lim, Fixed::from_f64(bound * (1.0 - 1e-9)));
                violations += h as usize;
            }
        }
    }
    report(
        5,
        violations == 0,
        format!("{total} approximations ({nonvacuous} with a nonempty range), {violations} violations"),
    );
}

#[test]
fn criterion_06_linear_sum_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let mut disagree: f64 = 0.0;
    for f in FieldCtx::all() {
        for k in 0..1000 {
            let alpha = if k % 2 == 0 {
                random_alpha(&mut rng)
            } else {
                near_rational_alpha(&mut rng)
            };
            let y = rng.random_range(1..=100_000u64);
            let s = lin_sum_ball_fast(&f, &alpha, y);
            if k % 50 == 0 {
                let (direct, _) = lin_sum(&f, &alpha, 0, y).unwrap();
                disagree = disagree.max((direct - s).norm() / (1.0 + direct.norm()));
            }
            worst = worst.max(s.norm() / lin_bound(&f, &alpha, y));
        }
    }
    report(
        6,
        worst <= 32.0 && disagree < 1e-9,
        format!("9000 samples, worst |S|/bound {worst:.3} (limit 32), fast-vs-direct {disagree:.1e}"),
    );
}

#[test]
fn criterion_07_landau() {
    let mut worst: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    for f in FieldCtx::all() {
        let t0 = Instant::now();
        let rep = landau_check(&f, 1_000_000).unwrap();
        slowest = slowest.max(t0.elapsed().as_secs_f64());
        worst = worst.max(rep.ratios["deviation"]);
    }
    report(
        7,
        worst <= 0.005 && slowest < 30.0,
        format!("x = 10^6, worst |count/li - 1| {worst:.5}, slowest field {slowest:.2}s"),
    );
}

#[test]
fn criterion_08_bilinear_trend() {
    let mut lines = Vec::new();
    let mut pass = true;
    for d in [-1, -3, -7] {
        let f = FieldCtx::new(d).unwrap();
        let alpha = parse_alpha(&f, "sqrt2_sqrt3").unwrap();
        let approx = approximation_near(&f, &alpha, 10).unwrap();
        for kind in [BoundKind::Type1, BoundKind::Type2, BoundKind::Gsum] {
            let mut ratios: Vec<f64> = (10..=16)
                .map(|e| {
                    let p = BilinearParams::preset(alpha, approx.clone(), 1 << e, 0);
                    verify_bilinear_bound(&f, kind, &p).unwrap().ratio
                })
                .collect();
            ratios.sort_by(f64::total_cmp);
            let (max, med) = (ratios[6], ratios[3]);
            pass &= max <= 4.0 * med;
            lines.push(format!("d={d} {kind:?} max/median {:.3}", max / med));
        }
    }
    report(8, pass, lines.join(", "));
}

#[test]
fn criterion_09_main_count() {
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for d in [-1, -3] {
        let f = FieldCtx::new(d).unwrap();
        for delta in [Fixed::from_ratio(1, 5), Fixed::from_ratio(3, 10)] {
            let rep = run_main_count(&f, "sqrt2_sqrt3", 30, delta, 10_000_000).unwrap();
            let dev = rep.ratios["deviation"];
            worst = worst.max(dev);
            lines.push(format!("d={d} N(q)={} δ={:.1} dev {dev:.4}", rep.params["norm_q"], delta.to_f64()));
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    report(
        9,
        worst <= 0.15 && secs < 300.0,
        format!("{}, {secs:.1}s", lines.join(", ")),
    );
}

#[test]
fn criterion_10_good_prime_search() {
    let mut pass = true;
    let mut lines = Vec::new();
    for d in [-1, -3] {
        let f = FieldCtx::new(d).unwrap();
        for preset in PRESETS {
            let rep = search_good_primes(&f, preset, 1_000_000, 0.125).unwrap();
            let hits = rep.records.len();
            let verified = rep.records.iter().filter(|r| r.verified == Some(true)).count();
            pass &= verified >= 3 && verified == hits;
            lines.push(format!("d={d} {preset}: {verified}/{hits}"));
        }
    }
    report(10, pass, format!("verified/hits {}", lines.join(", ")));
}

#[test]
fn criterion_11_approximation_constants() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut saw_worst: f64 = 0.0;
    for k in 0..10_000 {
        let x = rng.random_range(-2.0..2.0);
        let j = [10u32, 100, 1000][k % 3];
        let s = sawtooth_approx(x, j).unwrap();
        saw_worst = saw_worst.max(s.err / sawtooth_scale(x, j));
    }
    let mut perron_worst: f64 = 0.0;
    let mut n = 0;
    while n < 1000 {
        let gamma: f64 = rng.random_range(0.01..5.0);
        let rho: f64 = rng.random_range(0.01..5.0);
        let t = rng.random_range(1.0..200.0);
        if (gamma - rho).abs() < 1e-6 {
            continue;
        }
        let v = perron_indicator(gamma, rho, t).unwrap();
        perron_worst = perron_worst.max((v.integral - v.target).abs() * t * (gamma - rho).abs());
        n += 1;
    }
    report(
        11,
        saw_worst <= 2.0 && perron_worst <= 4.0,
        format!("sawtooth err/min-bound {saw_worst:.3} (limit 2), Perron err·T|γ-ρ| {perron_worst:.3} (limit 4)"),
    );
}

fn run_cli(args: &[&str]) -> (Vec<u8>, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_heegner"))
        .args(args)
        .output()
        .expect("binary runs");
    (out.stdout, out.status.code().unwrap_or(-1))
}

#[test]
fn criterion_12_determinism() {
    let runs: [&[&str]; 8] = [
        &["experiment", "main-count", "--d", "-3", "--q-norm", "20", "--cap", "1000000", "--seed", "9"],
        &["experiment", "main-count", "--sweep", "--points", "4", "--q-norm", "10", "--seed", "9"],
        &["experiment", "search", "--d", "-1", "--x-max", "100000", "--alpha", "e_pi", "--seed", "9"],
        &["experiment", "search", "--x-max", "100000", "--format", "csv", "--seed", "9"],
        &["experiment", "landau", "--d", "-7", "--x", "100000", "--seed", "9"],
        &["sieve", "check", "--d", "-2", "--x", "2000", "--seed", "9"],
        &["expsum", "verify", "--params", "kind=type2", "x=2048", "--seed", "9"],
        &["expsum", "bilinear", "--params", "kind=type1", "x=1024", "a=random", "--seed", "9"],
    ];
    let mut differing = Vec::new();
    for args in runs {
        let (a, ca) = run_cli(args);
        let (b, cb) = run_cli(args);
        if a != b || ca != cb || ca != 0 || a.is_empty() {
            differing.push(args.join(" "));
        }
    }
    report(
        12,
        differing.is_empty(),
        format!("{} invocations run twice, {} differ {:?}", runs.len(), differing.len(), differing),
    );
}
