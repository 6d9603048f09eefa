//! Worked examples, one module per area.

use heegner::arith::*;
use heegner::dioph::*;
use heegner::expsum::*;
use heegner::hsieve::*;
use heegner::lab::*;
use heegner::qfield::parse_alpha;
use heegner::smooth::*;
use heegner::{AlphaCoords, Error, FieldCtx, Fixed, HiReal, RingElt};

fn field(d: i64) -> FieldCtx {
    FieldCtx::new(d).unwrap()
}

fn r(a: i64, b: i64) -> RingElt {
    RingElt::new(a, b)
}

mod qfield {
    use super::*;

    #[test]
    fn heegner_list_and_constants() {
        for f in FieldCtx::all() {
            assert!(f.trace_t == 0 || f.trace_t == 1);
            assert!(f.im_omega_f64() >= 3f64.sqrt() / 2.0 - 1e-15);
            let u = match f.d {
                -1 => 4,
                -3 => 6,
                _ => 2,
            };
            assert_eq!(f.unit_count, u);
            if f.trace_t == 0 {
                assert_eq!((f.xi1, f.xi2), (f.d, 0));
            } else {
                assert_eq!((f.xi1, f.xi2), ((f.d - 1) / 4, 1));
            }
        }
        let f = field(-1);
        assert!((f.gintner_c() - 0.779_70).abs() < 1e-5);
        assert_eq!(FieldCtx::new(-5), Err(Error::NotClassNumberOne(-5)));
        assert!(FieldCtx::new(-4).is_err());
        assert!(FieldCtx::new(5).is_err());
    }

    #[test]
    fn norm_mul_divide() {
        assert_eq!(field(-1).norm(r(3, 2)), 13);
        assert_eq!(field(-3).norm(r(1, 1)), 3);
        for f in FieldCtx::all() {
            assert_eq!(f.norm(RingElt::ZERO), 0);
            assert_eq!(f.mul(r(7, -3), RingElt::ONE), r(7, -3));
        }
        let f3 = field(-3);
        assert_eq!(f3.mul(f3.omega(), f3.omega()), r(-1, 1));
        let f1 = field(-1);
        assert_eq!(f1.mul(r(1, 1), r(1, -1)), r(2, 0));
        assert_eq!(f1.try_div(r(5, 0), r(2, 1)), Ok(r(2, -1)));
        assert_eq!(f1.try_div(r(3, 0), r(1, 1)), Err(Error::NotDivisible));
        let f7 = field(-7);
        assert_eq!(f7.try_div(r(2, 0), f7.omega()), Ok(r(1, -1)));
    }

    #[test]
    fn metric_examples() {
        let f = field(-1);
        assert_eq!(f.dist_omega(&AlphaCoords::from_ratios((1, 2), (1, 2))), Fixed::HALF);
        assert_eq!(f.dist_omega(&AlphaCoords::from_ratios((1, 4), (9, 10))), Fixed::from_ratio(1, 4));
        assert_eq!(f.dist_omega(&AlphaCoords::from_ratios((3, 1), (-2, 1))), Fixed::ZERO);
    }

    #[test]
    fn product_coordinates() {
        let rho = AlphaCoords::from_ratios((3, 10), (2, 5));
        let f1 = field(-1);
        assert_eq!(f1.im_omega_of_product(f1.omega(), &rho), Fixed::from_ratio(3, 10));
        let f3 = field(-3);
        assert_eq!(f3.im_omega_of_product(f3.omega(), &rho), Fixed::from_ratio(7, 10));
        for f in FieldCtx::all() {
            assert_eq!(f.im_omega_of_product(RingElt::ONE, &rho), rho.im);
        }
    }

    #[test]
    fn rectangular_conversion() {
        let p = 200;
        let f1 = field(-1);
        let z = f1
            .rect_to_omega(&HiReal::from_ratio(3, 2, p), &HiReal::from_ratio(5, 2, p))
            .unwrap();
        assert_eq!(z, AlphaCoords::from_ratios((3, 2), (5, 2)));
        let f3 = field(-3);
        let half = HiReal::from_ratio(1, 2, p);
        let im = HiReal::from_int(3, p).sqrt().mul_pow2(-1);
        let z = f3.rect_to_omega(&half, &im).unwrap();
        assert!(z.re.abs() < Fixed::from_f64(1e-30));
        assert!((z.im - Fixed::ONE).abs() < Fixed::from_f64(1e-30));
        let z = f3.rect_to_omega(&HiReal::from_int(1, p), &HiReal::zero(p)).unwrap();
        assert_eq!(z, AlphaCoords::from_ratios((1, 1), (0, 1)));
    }
}

mod arith {
    use super::*;

    #[test]
    fn canonical_forms() {
        let f1 = field(-1);
        assert_eq!(canonical_associate(&f1, r(-3, 0)), Ok(r(3, 0)));
        assert_eq!(canonical_associate(&f1, r(1, -1)), Ok(r(1, 1)));
        let f3 = field(-3);
        assert_eq!(canonical_associate(&f3, f3.omega()), Ok(RingElt::ONE));
    }

    #[test]
    fn enumeration() {
        let f = field(-1);
        let v: Vec<_> = enumerate_by_norm(&f, 2).collect();
        assert_eq!(v, vec![r(1, 0), r(1, 1)]);
        let norms: Vec<u64> = enumerate_by_norm(&f, 10).map(|n| f.norm(n)).collect();
        assert_eq!(norms, vec![1, 2, 4, 5, 5, 8, 9, 10, 10]);
        assert_eq!(enumerate_by_norm(&f, 0).count(), 0);
    }

    #[test]
    fn primes() {
        let f = field(-1);
        let t = sieve_primes(&f, 30).unwrap();
        let norms: Vec<u64> = t.primes.iter().map(|p| p.1).collect();
        assert_eq!(norms, vec![2, 5, 5, 9, 13, 13, 17, 17, 29, 29]);
        assert_eq!(sieve_primes(&f, 2).unwrap().primes, vec![(r(1, 1), 2)]);
        let f3 = field(-3);
        let t3 = sieve_primes(&f3, 3).unwrap();
        assert_eq!(t3.primes.len(), 1);
        assert_eq!(t3.primes[0].1, 3);
        assert_eq!(prime_ideal_count(&f, 30), Ok(10));
        assert_eq!(prime_ideal_count(&f, 2), Ok(1));
        assert_eq!(prime_ideal_count(&f, 1), Ok(0));
    }

    #[test]
    fn factorizations() {
        let f = field(-1);
        let ten = factor(&f, r(10, 0)).unwrap();
        assert_eq!(ten.reassemble(&f), r(10, 0));
        let norms: u64 = ten.factors.iter().map(|&(p, a)| f.norm(p).pow(a)).product();
        assert_eq!(norms, 100);
        let three = factor(&f, r(3, 0)).unwrap();
        assert_eq!((three.unit, three.factors), (RingElt::ONE, vec![(r(3, 0), 1)]));
        let unit = factor(&f, r(0, 1)).unwrap();
        assert!(unit.factors.is_empty());
        assert_eq!(moebius(&f, r(0, 1)), Ok(1));
        assert_eq!(moebius(&f, r(1, 1)), Ok(-1));
        assert_eq!(moebius(&f, r(2, 0)), Ok(0));
        assert_eq!(d_k(&f, r(2, 0), 2), Ok(3));
        assert_eq!(d_k(&f, r(2, 1), 4), Ok(4));
        assert_eq!(gcd(&f, r(1, 3), r(1, -3)), Ok(r(1, 1)));
        assert_eq!(gcd(&f, r(6, 4), RingElt::ZERO), canonical_associate(&f, r(6, 4)));
        assert_eq!(gcd(&f, r(2, 1), r(2, -1)), Ok(RingElt::ONE));
    }
}

mod dioph {
    use super::*;

    #[test]
    fn gintner_sqrt2_sqrt3() {
        let f = field(-1);
        let alpha = parse_alpha(&f, "sqrt2_sqrt3").unwrap();
        let list = gintner_search(&f, &alpha, 2, None).unwrap();
        let a = list.iter().find(|a| a.q == r(1, 1)).expect("q = 1+ω");
        assert_eq!(a.a, r(0, 3));
        assert!((a.gamma_abs() - 0.2476).abs() < 1e-3);
        assert!(a.gamma_abs() <= a.allowance());
        let all = gintner_search(&f, &alpha, 500, None).unwrap();
        assert!(all.iter().all(|a| !f.is_unit(a.q)));
        assert!(all.iter().all(|a| a.gamma_abs_sq * (a.norm_q as f64).powi(2) <= a.c * a.c));
    }

    #[test]
    fn rational_target() {
        // (1+2i)/(3+i) = (1+i)/2
        let f = field(-1);
        let alpha = AlphaCoords::from_ratios((1, 2), (1, 2));
        assert!(matches!(gintner_search(&f, &alpha, 10, None), Err(Error::AlphaLooksRational(_))));
    }

    #[test]
    fn static_bound() {
        assert!(check_lower_bound_static(&field(-1), 50).is_empty());
        assert!(check_lower_bound_static(&field(-3), 50).is_empty());
    }

    #[test]
    fn counts() {
        let f = field(-1);
        let alpha = parse_alpha(&f, "e_pi").unwrap();
        assert_eq!(h_alpha_count(&f, &alpha, 10, Fixed::HALF), 36);
        assert_eq!(h_alpha_count(&f, &alpha, 0, Fixed::HALF), 0);
        let approx = approximation_near(&f, &alpha, 30).unwrap();
        assert!(check_lower_bound_perturbed(&f, &alpha, &approx, 1).is_empty());
    }
}

mod expsum {
    use super::*;

    #[test]
    fn linear_sums() {
        let f = field(-1);
        let (s, _) = lin_sum(&f, &AlphaCoords::default(), 0, 10).unwrap();
        assert!((s.re - 37.0).abs() < 1e-12);
        let (s, _) = lin_sum(&f, &AlphaCoords::from_ratios((1, 2), (1, 2)), 0, 2).unwrap();
        assert!((s.re - 1.0).abs() < 1e-12 && s.im.abs() < 1e-12);
        assert!(lin_sum(&f, &AlphaCoords::default(), 5, 3).is_err());
    }

    #[test]
    fn clipped_weights() {
        let f = field(-1);
        let alpha = AlphaCoords::from_ratios((1, 4), (1, 3));
        assert_eq!(e_weight(&f, &AlphaCoords::default(), r(3, 1), 7.0), 7.0);
        assert_eq!(e_weight(&f, &alpha, RingElt::ONE, 10.0), 3.0);
        assert_eq!(e_weight(&f, &AlphaCoords::from_ratios((1, 2), (1, 2)), RingElt::ONE, 2.0), 2.0);
        let big = parse_alpha(&f, "sqrt2_sqrt3").unwrap();
        let approx = approximation_near(&f, &big, 30).unwrap();
        let (s, r1, _) = avg_sum(&f, &big, 1, 1000, 100.0, &approx).unwrap();
        assert!(s.is_finite() && r1.ratio.is_finite());
        let (s, _, _) = avg_sum(&f, &big, 5, 5, 100.0, &approx).unwrap();
        assert_eq!(s, 0.0);
        assert!(avg_sum(&f, &big, 1, 10, 1.5, &approx).is_err());
    }

    #[test]
    fn index_sets() {
        let f = field(-1);
        assert_eq!(ell_of(&f, 1, 0), r(0, -1));
        assert_eq!(ell_of(&f, 0, 1), r(-1, 0));
        assert_eq!(index_set(&f, 2, 2).len(), 8);
        assert!(index_set(&f, 1, 1).is_empty());
        for g in FieldCtx::all() {
            for (a, b) in [(1, 3), (4, 2), (6, 6)] {
                assert!(index_set(&g, a, b).check(&g));
            }
        }
    }

    #[test]
    fn bilinear_degenerate() {
        let f = field(-1);
        let alpha = parse_alpha(&f, "sqrt2_sqrt3").unwrap();
        let range = RangeSpec::TypeI { x: 1024, m_max: 32.0 };
        let z = bilinear_f(&f, &alpha, 2, 2, &range, ACoef::Zero, BCoef::Ones).unwrap();
        assert_eq!(z.value, 0.0);
        let e = bilinear_f(&f, &alpha, 1, 1, &range, ACoef::Ones, BCoef::Ones).unwrap();
        assert_eq!(e.value, 0.0);
        let v = bilinear_f(&f, &alpha, 2, 2, &range, ACoef::Ones, BCoef::Ones).unwrap();
        assert!(v.value.is_finite() && v.value > 0.0);
        // μ + κ > 1 still has a nonempty m-range
        let wide = RangeSpec::TypeII { x: 1024, mu: 0.6, kappa: 0.5 };
        assert!(bilinear_f(&f, &alpha, 2, 2, &wide, ACoef::Ones, BCoef::Ones).is_ok());
    }

    #[test]
    fn g_sum_degenerate() {
        let f = field(-1);
        let alpha = parse_alpha(&f, "sqrt2_sqrt3").unwrap();
        assert!(g_sum(&f, &alpha, 1024, 1, 0.5).is_finite());
        let approx = approximation_near(&f, &alpha, 10).unwrap();
        let mut p = BilinearParams::preset(alpha, approx, 1 << 10, 0);
        p.m_max = 1024.0;
        let rep = verify_bilinear_bound(&f, BoundKind::Type1, &p).unwrap();
        assert!(rep.ratio.is_finite());
    }
}

mod smooth {
    use super::*;

    #[test]
    fn sawtooth() {
        assert_eq!(psi(0.5), 0.0);
        assert_eq!(psi(0.25), -0.25);
        let s = sawtooth_approx(0.3, 100).unwrap();
        assert!(s.err <= 2.0 * (200f64.ln()).min(1.0 / 30.0));
        let coarse = sawtooth_approx(0.37, 10).unwrap().err;
        let fine = sawtooth_approx(0.37, 10_000).unwrap().err;
        assert!(fine < coarse);
    }

    #[test]
    fn indicator_cases() {
        let f = field(-1);
        let delta = Fixed::from_ratio(1, 4);
        // yα lands exactly on the lattice: far inside
        let w = SmoothWeights::new(f.clone(), AlphaCoords::from_ratios((1, 8), (1, 8)), 1000, 0.25, delta).unwrap();
        let inside = indicator_expansion(&f, &w, RingElt::ONE);
        assert_eq!((inside.lhs, inside.boundary, inside.defect), (1, false, 0.0));
        assert_eq!(inside.rhs, 1.0);
        let w = SmoothWeights::new(f.clone(), AlphaCoords::from_ratios((1, 2), (1, 2)), 1000, 0.25, delta).unwrap();
        let outside = indicator_expansion(&f, &w, RingElt::ONE);
        assert_eq!((outside.lhs, outside.boundary, outside.rhs), (0, false, 0.0));
        let w = SmoothWeights::new(f.clone(), AlphaCoords::from_ratios((1, 4), (0, 1)), 1000, 0.25, delta).unwrap();
        assert!(indicator_expansion(&f, &w, RingElt::ONE).boundary);
    }

    #[test]
    fn theta_values() {
        let a = theta_wdelta(0.0, 0.1).unwrap();
        assert!((a.direct - 1.0).abs() < 1e-15);
        let b = theta_wdelta(0.5, 0.1).unwrap();
        let two = 2.0 * (-25.0 * std::f64::consts::PI).exp();
        assert!((b.direct / two - 1.0).abs() < 1e-9);
    }

    #[test]
    fn lattice_values() {
        let f = field(-1);
        let s = gauss_lattice_sum(&f, 1.0, &AlphaCoords::default(), 1.0).unwrap();
        assert!((s.direct.re - 1.180_34).abs() < 1e-5 && (s.poisson - s.direct.re).abs() < 1e-12);
        let shifted = gauss_lattice_sum(&f, 1.0, &AlphaCoords::from_ratios((2, 1), (-3, 1)), 1.0).unwrap();
        assert!((shifted.direct - s.direct).norm() < 1e-12);
        let far = gauss_lattice_sum(&f, 100.0, &AlphaCoords::from_ratios((1, 2), (1, 2)), 2.0).unwrap();
        assert_eq!(far.class, Proximity::Far);
        assert!(far.direct.norm() <= 100.0 * (-2f64).exp());
    }

    #[test]
    fn cutoff_tails() {
        let f = field(-1);
        // at ε = 0.1 the truncation is still coarse (about 1e-4); the bound needs ε = 0.5
        let coarse = cutoff_tail_raw(&f, 0.3, 1e4, 0.1);
        assert!(coarse > 1e-20 && coarse < 1e-3);
        let tail = cutoff_tail_raw(&f, 0.3, 1e4, 0.5);
        assert!(tail <= 0.09 * 1e-40, "{tail}");
        assert!(cutoff_tail_raw(&f, 0.5, 1e2, 0.25).is_finite());
        assert!(cutoff_tail_raw(&f, 0.3, 1e4, 0.0).is_finite());
    }

    #[test]
    fn perron() {
        let v = perron_indicator(1.0, 2.0, 100.0).unwrap();
        assert!((v.integral - 1.0).abs() <= 0.04);
        let v = perron_indicator(2.0, 1.0, 100.0).unwrap();
        assert!(v.integral.abs() <= 0.04);
        assert_eq!(perron_indicator(1.0, 1.0, 10.0), Err(Error::EqualArguments));
    }

    #[test]
    fn weights() {
        let f = field(-1);
        let delta = Fixed::from_ratio(1, 10);
        let w = SmoothWeights::new(f.clone(), AlphaCoords::from_ratios((1, 3), (1, 5)), 10_000, 0.25, delta).unwrap();
        let at0 = weight_eval(&w, RingElt::ZERO);
        assert!((at0.w - 0.01).abs() < 1e-15);
        assert!((at0.wtilde - 1.0).abs() < 1e-12);
        let far = weight_eval(&w, r(10_000, 0));
        assert!(far.w < 1e-300 && far.wtilde < 1e-300);
        // zα ∈ O for z = 15
        let z = r(15, 0);
        let v = weight_eval(&w, z);
        assert!((v.wtilde - w.f_n(z) * w_delta(0.0, 0.1).powi(2)).abs() < 1e-15);
    }
}

mod hsieve {
    use super::*;

    #[test]
    fn sifted_examples() {
        let f = field(-1);
        let w = WeightTable::from_fn(&f, 20, 0, |_| 1).unwrap();
        assert_eq!(sifted_sum(&f, &w, 4), 32);
        assert_eq!(sifted_sum(&f, &w, 2), w.entries().filter(|(r, _)| !r.is_zero()).count() as i128);
        assert_eq!(sifted_sum(&f, &WeightTable::zero(&f, 20), 4), 0);
        assert!(legendre_identity_check(&f, &w, 4).unwrap().equal);
        // z beyond every support norm: only the units survive
        let all = legendre_identity_check(&f, &w, 100).unwrap();
        assert!(all.equal);
        assert_eq!(all.lhs, 4);
    }

    #[test]
    fn gaussian_legendre() {
        let f = field(-3);
        let w = WeightTable::from_real(&f, 400, 64, |r| 0.09 * (-(f.norm(r) as f64) / 100.0).exp()).unwrap();
        let c = legendre_identity_check(&f, &w, 30).unwrap();
        assert!(c.equal);
        assert!((w.to_f64(c.lhs - c.rhs)).abs() <= 2f64.powi(-40));
    }

    #[test]
    fn split_examples() {
        let f = field(-1);
        let cfg = SieveConfig::with_z(4096, 64, 0.5, 0.3, 100, 400).unwrap();
        let w = WeightTable::from_fn(&f, 400, 0, |r| (f.norm(r) % 5) as i128).unwrap();
        let same = type_split(&f, &cfg, &w, &w).unwrap();
        assert_eq!((same.s_i, same.s_ii), (0, 0));
        let other = WeightTable::from_fn(&f, 400, 0, |r| (f.norm(r) % 3) as i128).unwrap();
        let cfg_big_m = SieveConfig::with_z(4096, 64, 0.5, 0.3, 401, 400).unwrap();
        let s = type_split(&f, &cfg_big_m, &w, &other).unwrap();
        assert_eq!(s.s_ii, 0);
        assert!(s.total_check);
    }

    #[test]
    fn smooth_desk_instance() {
        let f = field(-1);
        let alpha = parse_alpha(&f, "sqrt2_sqrt3").unwrap();
        let sw = SmoothWeights::new(f.clone(), alpha, 4096, 0.25, Fixed::from_ratio(3, 10)).unwrap();
        let (w, wt) = smooth_weight_tables(&sw, 3000, 64).unwrap();
        let cfg = SieveConfig::new(4096, 0.5, 5.0 / 14.0, 64, 3000).unwrap();
        assert!(type_split(&f, &cfg, &w, &wt).unwrap().total_check);
        let smoke = sieve_discrepancy_smoke(&f, &cfg, &w, &wt).unwrap();
        assert!(smoke.x_big >= 1.0 && smoke.difference.is_finite());
        assert!(smoke.y == 0.0 || smoke.ratio.is_finite());
    }
}

mod lab {
    use super::*;

    #[test]
    fn main_count_examples() {
        let f = field(-1);
        let rep = run_main_count(&f, "sqrt2_sqrt3", 20, Fixed::HALF, 100_000).unwrap();
        assert_eq!(rep.ratios["deviation"], 0.0);
        let expected = rep.counts["expected"].as_f64().unwrap();
        assert_eq!(expected, rep.count_u64("prime_count").unwrap() as f64);
        let low = run_main_count(&f, "sqrt2_sqrt3", 20, Fixed::from_ratio(1, 5), 100_000).unwrap();
        assert!(!low.warnings.is_empty());
    }

    #[test]
    fn search_examples() {
        let f = field(-1);
        let all = search_good_primes(&f, "sqrt2_sqrt3", 1000, 0.0).unwrap();
        assert_eq!(all.count_u64("hits"), all.count_u64("prime_elements"));
        let strict = search_good_primes(&f, "sqrt2_sqrt3", 1_000_000, 0.5).unwrap();
        let loose = search_good_primes(&f, "sqrt2_sqrt3", 1_000_000, 0.125).unwrap();
        assert!(strict.records.len() * 1000 < loose.records.len());
        assert!(strict.records.iter().all(|r| r.verified == Some(true)));
    }

    #[test]
    fn landau_examples() {
        let f = field(-1);
        let big = landau_check(&f, 1_000_000).unwrap();
        assert!(big.ratios["deviation"] <= 0.005);
        assert!((big.ratios["li"] - 78_627.5).abs() < 0.1);
        for g in FieldCtx::all() {
            let small = landau_check(&g, 10).unwrap();
            assert!(!small.warnings.is_empty());
            assert_eq!(landau_tolerance(10), None);
        }
    }

    #[test]
    fn emitters() {
        let f = field(-1);
        let rep = search_good_primes(&f, "e_pi", 500, 0.1).unwrap();
        let json = emit_report(&rep, Format::Json).unwrap();
        let back: ExperimentReport = serde_json::from_slice(&json).unwrap();
        assert_eq!(emit_report(&back, Format::Json).unwrap(), json);
        let csv = emit_report(&rep, Format::Csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), rep.records.len() + 1);
        let pts: Vec<(f64, f64)> = (0..5).map(|k| (0.5 / (k + 1) as f64, 1.0)).collect();
        assert_eq!(plot_data(&pts).lines().count(), 5);
        assert_eq!("xml".parse::<Format>(), Err(Error::UnknownFormat("xml".into())));
    }
}
