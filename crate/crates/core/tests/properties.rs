use proptest::prelude::*;

use qpcocycle::cocycle::{conjugate, degree, fibered_product, l_operator, MapExpr, QpCocycle, Sl2Map};
use qpcocycle::continued_fractions::{basis_matrix, int_mul, CfExpansion};
use qpcocycle::sl2_geometry::{
    ad_action, commutator_defect, minkowski_norm, quad_form, sl2_to_su11, AlgebraVector, Mat2R, C64,
};

fn unimodular() -> impl Strategy<Value = Mat2R> {
    (-3.0f64..3.0, -1.5f64..1.5, -3.0f64..3.0)
        .prop_map(|(a, s, b)| Mat2R::rotation(a) * Mat2R::diag(s.exp()) * Mat2R::rotation(b))
}

fn algebra() -> impl Strategy<Value = AlgebraVector> {
    (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0).prop_map(|(x, y, z)| AlgebraVector::new(x, y, z))
}

/// Future-cone vector with `z ≥ (1 + δ)·√(x² + y²)`, `δ ≥ 0.01`.
fn cone_vector() -> impl Strategy<Value = AlgebraVector> {
    (0.0f64..2.0, 0.0f64..std::f64::consts::TAU, 0.01f64..2.0)
        .prop_map(|(r, phi, d)| AlgebraVector::new(r * phi.cos(), r * phi.sin(), (1.0 + d) * r + 1e-3))
}

/// Small real trig coefficients in the `(k, [a, b, c, d])` convention.
fn trig_coeffs(max_k: i64, size: f64) -> impl Strategy<Value = Vec<(i64, [f64; 4])>> {
    prop::collection::vec(((-max_k..=max_k), prop::array::uniform4(-size..size)), 1..4)
}

fn quotients(len: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(1i64..=6, len)
}

/// Irrational-looking frequency from a random quotient prefix followed by
/// ones, so later convergents stay well-conditioned.
fn frequency() -> impl Strategy<Value = f64> {
    quotients(4).prop_map(|mut a| {
        a.extend(std::iter::repeat_n(1, 30));
        CfExpansion::from_partial_quotients(&a).unwrap().alpha
    })
}

fn circle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

mod geometry {
    use super::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn quadratic_form_is_ad_invariant(a in unimodular(), v in algebra()) {
            let w = ad_action(&a, &v).unwrap();
            let scale = v.norm().powi(2).max(w.norm().powi(2)).max(1e-300);
            prop_assert!((quad_form(&w) - quad_form(&v)).abs() <= 1e-10 * scale);
        }

        #[test]
        fn anti_cauchy_schwarz_and_acs_identity(v in cone_vector(), w in cone_vector()) {
            let d = commutator_defect(&v, &w).unwrap();
            let scale = v.norm() * w.norm();
            prop_assert!(d.anti_cs_gap >= -1e-12 * scale.max(1.0));
            prop_assert!(d.acs_residual.abs() <= 1e-10 * (scale * scale).max(1e-300));
            prop_assert!(d.bracket_norm <= d.bound + 1e-10);
        }

        #[test]
        fn anti_minkowski_superadditivity(v in cone_vector(), w in cone_vector()) {
            let sum = minkowski_norm(&(v + w)).unwrap();
            let parts = minkowski_norm(&v).unwrap() + minkowski_norm(&w).unwrap();
            prop_assert!(sum >= parts - 1e-12 * (v.norm() + w.norm()));
        }

        #[test]
        fn su11_conversion_is_a_homomorphism(a in unimodular(), b in unimodular()) {
            let lhs = sl2_to_su11(&(a * b));
            let rhs = sl2_to_su11(&a) * sl2_to_su11(&b);
            let scale = a.op_norm() * b.op_norm();
            prop_assert!((lhs - rhs).max_abs() <= 1e-12 * scale);
        }
    }
}

mod cocycle {
    use super::*;

    fn smooth_map(coeffs: Vec<(i64, [f64; 4])>, grid: usize) -> Sl2Map {
        Sl2Map::with_grid(MapExpr::ExpTrig { coeffs }, grid).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn fibered_products_compose(
            coeffs in trig_coeffs(3, 0.4),
            alpha in frequency(),
            n in -40i64..40,
            m in -40i64..40,
            theta in 0.0f64..1.0,
        ) {
            let c = QpCocycle::new(alpha, smooth_map(coeffs, 256));
            let whole = fibered_product(&c, n + m, theta);
            let split = fibered_product(&c, n, theta + m as f64 * alpha) * fibered_product(&c, m, theta);
            let scale = fibered_product(&c, n, theta + m as f64 * alpha).op_norm() * fibered_product(&c, m, theta).op_norm();
            prop_assert!((whole - split).max_abs() <= 1e-9 * scale);
        }

        #[test]
        fn degree_survives_small_noise(r in -3i64..=3, coeffs in trig_coeffs(4, 2e-4)) {
            let expr = MapExpr::Product { factors: vec![MapExpr::RotPath { r: r as f64 }, MapExpr::ExpTrig { coeffs }] };
            let m = Sl2Map::with_grid(expr, 1024).unwrap();
            prop_assert_eq!(degree(&m).unwrap(), r);
        }

        #[test]
        fn l_operator_of_inverse(coeffs in trig_coeffs(3, 0.4)) {
            let u = smooth_map(coeffs, 512);
            let lu = l_operator(&u).unwrap();
            let linv = l_operator(&u.inverse()).unwrap();
            for j in 0..u.grid_len() {
                let expected = -lu[j].ad(&u.samples()[j].inv_unimodular());
                prop_assert!((linv[j] - expected).norm() <= 1e-7 * (1.0 + lu[j].norm()));
            }
        }

        #[test]
        fn conjugation_preserves_degree(r in -2i64..=2, coeffs in trig_coeffs(3, 0.3), alpha in frequency()) {
            let c = QpCocycle::new(alpha, Sl2Map::with_grid(MapExpr::RotPath { r: r as f64 }, 1024).unwrap());
            let b = smooth_map(coeffs, 1024);
            prop_assert_eq!(degree(&conjugate(&b, &c).map).unwrap(), r);
        }
    }
}

mod invariants {
    use super::*;
    use qpcocycle::cocycle::boundedness_probe;
    use qpcocycle::families::conjugated_rotation_on;
    use qpcocycle::invariants::{fibered_rotation_number, lyapunov_exponent};

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn rotation_number_is_conjugacy_invariant(psi in 0.05f64..0.45, amp in 0.0f64..0.3, alpha in frequency()) {
            let base = QpCocycle::new(alpha, Sl2Map::constant(Mat2R::rotation_turns(psi)));
            let conj = conjugated_rotation_on(alpha, psi, amp, 1024).unwrap();
            let r0 = fibered_rotation_number(&base, 100_000, 0.0, 0.0).unwrap().value;
            let r1 = fibered_rotation_number(&conj, 100_000, 0.0, 0.0).unwrap().value;
            prop_assert!(circle_gap(r0, r1) <= 3e-4, "{} vs {}", r0, r1);
        }

        #[test]
        fn rotation_number_shifts_under_e_r(psi in 0.05f64..0.45, r in -2i64..=2, alpha in frequency()) {
            let c = QpCocycle::new(alpha, Sl2Map::constant(Mat2R::rotation_turns(psi)));
            let e = Sl2Map::with_grid(MapExpr::RotPath { r: r as f64 }, 1024).unwrap();
            let shifted = conjugate(&e, &c);
            let rho = fibered_rotation_number(&shifted, 100_000, 0.0, 0.0).unwrap().value;
            prop_assert!(circle_gap(rho, psi + r as f64 * alpha) <= 3e-4, "{} vs {}", rho, psi + r as f64 * alpha);
        }

        #[test]
        fn forward_and_backward_lyapunov_agree(s in 0.2f64..1.5, coeffs in trig_coeffs(2, 0.3), alpha in frequency()) {
            let c = QpCocycle::new(alpha, Sl2Map::constant(Mat2R::diag(s.exp())));
            let b = Sl2Map::with_grid(MapExpr::ExpTrig { coeffs }, 512).unwrap();
            let l = lyapunov_exponent(&conjugate(&b, &c), 10_000, 16);
            prop_assert!(l.residual <= 1e-3);
            prop_assert!((l.mean - s).abs() <= 1e-3);
        }

        #[test]
        fn bounded_products_cap_the_exponent(psi in 0.05f64..0.45, amp in 0.0f64..0.3, alpha in frequency()) {
            let c = conjugated_rotation_on(alpha, psi, amp, 128).unwrap();
            let (sup, _) = boundedness_probe(&c, 10_000).unwrap();
            let n = 5_000;
            let l = lyapunov_exponent(&c, n, 8);
            prop_assert!(l.mean <= sup.ln() / n as f64 + 1e-6);
        }
    }
}

mod continued_fractions {
    use super::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn convergent_identities(a in quotients(30)) {
            let cf = CfExpansion::from_partial_quotients(&a).unwrap();
            for k in 1..=cf.depth() as i64 {
                let ak = cf.a(k as usize) as i128;
                prop_assert_eq!(cf.q(k), ak * cf.q(k - 1) + cf.q(k - 2));
                prop_assert_eq!(cf.p(k), ak * cf.p(k - 1) + cf.p(k - 2));
                let sign = if k % 2 == 0 { 1 } else { -1 };
                prop_assert_eq!(cf.p(k) * cf.q(k - 1) - cf.p(k - 1) * cf.q(k), -sign);
            }
        }

        #[test]
        fn beta_recursion_and_bounds(a in quotients(30)) {
            let cf = CfExpansion::from_partial_quotients(&a).unwrap();
            for k in 1..cf.depth() as i64 {
                let lhs = cf.beta(k - 2);
                let rhs = cf.a(k as usize) as f64 * cf.beta(k - 1) + cf.beta(k);
                prop_assert!((lhs - rhs).abs() <= 1e-14 * lhs, "k = {}: {} vs {}", k, lhs, rhs);
                if k + 2 <= cf.depth() as i64 {
                    let (q0, q1) = (cf.q(k) as f64, cf.q(k + 1) as f64);
                    prop_assert!(1.0 / (q1 + q0) < cf.beta(k) && cf.beta(k) < 1.0 / q1);
                }
            }
        }

        #[test]
        fn basis_matrices_compose(a in quotients(24), j in 0usize..6, s in 0usize..5, t in 0usize..5) {
            let cf = CfExpansion::from_partial_quotients(&a).unwrap();
            let l = j + 2 * s;
            let k = l + 2 * t;
            let direct = basis_matrix(&cf, k, j).unwrap();
            let composed = int_mul(&basis_matrix(&cf, k, l).unwrap(), &basis_matrix(&cf, l, j).unwrap());
            prop_assert_eq!(direct, composed);
        }
    }
}

mod renormalization {
    use super::*;
    use qpcocycle::continued_fractions::expand;
    use qpcocycle::families::{conjugated_rotation_on, conjugator};
    use qpcocycle::renormalization::renormalize;
    use std::sync::Arc;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(4))]

        #[test]
        fn frequencies_follow_the_expansion(psi in 0.05f64..0.45, amp in 0.0f64..0.2, alpha in frequency()) {
            let c = conjugated_rotation_on(alpha, psi, amp, 512).unwrap();
            let cf = Arc::new(expand(alpha, 10).unwrap());
            for s in renormalize(&c, cf, 5, 0.0).unwrap() {
                prop_assert!(s.frequency_defect() <= 1e-12);
            }
        }

        #[test]
        fn generators_are_powers_and_stay_bounded(psi in 0.05f64..0.45, amp in 0.0f64..0.2, alpha in frequency()) {
            let c = conjugated_rotation_on(alpha, psi, amp, 512).unwrap();
            let b = Sl2Map::with_grid(conjugator(amp), 4096).unwrap();
            let cap = b.sup_norm().powi(2) * (1.0 + 1e-6);
            let cf = Arc::new(expand(alpha, 10).unwrap());
            for s in renormalize(&c, cf, 6, 0.0).unwrap() {
                let (eu, ev) = s.exponents();
                for j in 0..16 {
                    let t = (j as f64 + 0.3) / 16.0;
                    let u = s.pair.gen1.eval(t);
                    prop_assert!((u - fibered_product(&c, eu, t)).max_abs() <= 1e-9 * u.op_norm());
                    let v = s.pair.gen2.eval(t);
                    prop_assert!((v - fibered_product(&c, ev, t)).max_abs() <= 1e-9 * v.op_norm());
                    prop_assert!(v.op_norm() <= cap, "k = {}: {} > {}", s.k, v.op_norm(), cap);
                }
            }
        }
    }
}

mod monitors {
    use super::*;
    use qpcocycle::cone_monitors::{cone_recursion, decompose_eta0, integrated_bracket_bound, integrated_quantities, monotone_gaps, Field};
    use qpcocycle::config::Settings;
    use qpcocycle::continued_fractions::expand;
    use qpcocycle::families::conjugated_rotation_on;

    fn cone_field(n: usize) -> impl Strategy<Value = Field> {
        (0.05f64..1.0, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..6.3, 1i64..4).prop_map(move |(d, r0, r1, ph, k)| {
            (0..n)
                .map(|j| {
                    let t = j as f64 / n as f64;
                    let r = r0 + r1 * (std::f64::consts::TAU * k as f64 * t).sin().abs();
                    let phi = ph + std::f64::consts::TAU * t;
                    AlgebraVector::new(r * phi.cos(), r * phi.sin(), (1.0 + d) * r + 0.01)
                })
                .collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn integrated_bracket_bound_holds(f1 in cone_field(64), f2 in cone_field(64), f3 in cone_field(64)) {
            let delta = [&f1, &f2, &f3]
                .iter()
                .flat_map(|f| f.iter())
                .map(|v| v.z / v.x.hypot(v.y).max(1e-300) - 1.0)
                .fold(f64::INFINITY, f64::min)
                .min(1.0);
            let (lhs, rhs) = integrated_bracket_bound(&[f1, f2, f3], delta);
            prop_assert!(lhs <= rhs + 1e-6, "{} > {}", lhs, rhs);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(4))]

        #[test]
        fn ubar_is_monotone_on_bounded_families(psi in 0.1f64..0.4, amp in 0.02f64..0.2) {
            let alpha = (5f64.sqrt() - 1.0) / 2.0;
            let cf = expand(alpha, 12).unwrap();
            let c = conjugated_rotation_on(alpha, psi, amp, 256).unwrap();
            let dec = decompose_eta0(&c, Settings::default().cone_margin).unwrap();
            let rec = cone_recursion(&dec, &c, &cf, 4).unwrap();
            let qs: Vec<_> = rec.levels.iter().map(|l| integrated_quantities(l, &cf)).collect();
            for g in monotone_gaps(&qs) {
                prop_assert!(g.plus >= -1e-8 && g.minus >= -1e-8, "{:?}", g);
            }
        }
    }
}

mod complex_rotation {
    use super::*;
    use qpcocycle::complex_rotation::{
        holomorphicity_residual, lemma_l1_gap, refined_section, section_from, zeta_at, ComplexParam,
    };
    use qpcocycle::families::conjugated_rotation_on;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(4))]

        #[test]
        fn zeta_has_nonnegative_real_part(psi in 0.1f64..0.4, amp in 0.0f64..0.2, r in 0.3f64..0.95, beta in -3.0f64..3.0) {
            let alpha = (5f64.sqrt() - 1.0) / 2.0;
            let c = conjugated_rotation_on(alpha, psi, amp, 256).unwrap();
            let z = zeta_at(&c, ComplexParam::polar(r, beta).unwrap(), 512, 1e-10).unwrap();
            prop_assert!(z.re >= -1e-8);
        }

        #[test]
        fn zeta_is_holomorphic(psi in 0.1f64..0.4, amp in 0.0f64..0.2, r in 0.3f64..0.9, beta in -3.0f64..3.0) {
            let alpha = (5f64.sqrt() - 1.0) / 2.0;
            let c = conjugated_rotation_on(alpha, psi, amp, 256).unwrap();
            let res = holomorphicity_residual(&c, ComplexParam::polar(r, beta).unwrap(), 1e-4, 512, 1e-11).unwrap();
            prop_assert!(res <= 1e-4, "{}", res);
        }

        #[test]
        fn sections_are_equivariant_and_close(psi in 0.1f64..0.4, amp in 0.0f64..0.2, r in 0.3f64..0.9, beta in -3.0f64..3.0, w in 0.0f64..0.9, ph in 0.0f64..6.3) {
            let alpha = (5f64.sqrt() - 1.0) / 2.0;
            let c = conjugated_rotation_on(alpha, psi, amp, 256).unwrap();
            let z = ComplexParam::polar(r, beta).unwrap();
            let tol = 1e-6;
            let s = refined_section(&c, z, 512, tol, 1 << 14).unwrap();
            prop_assert!(s.equivariance <= 10.0 * tol, "{}", s.equivariance);
            let init = vec![C64::from_polar(w, ph); s.len()];
            let s2 = section_from(&c, z, init, tol).unwrap();
            prop_assert!(lemma_l1_gap(&c, z, &s, &s2).unwrap() < 0.5 + 1e-9);
        }
    }
}

mod reducibility {
    use super::*;
    use qpcocycle::config::Settings;
    use qpcocycle::invariants::fibered_rotation_number;
    use qpcocycle::reducibility::{
        hyperbolic_neighbor, kam_reduce_local, neighbor_cone_test, normal_form_step, solve_translation_cohomology,
        solve_twisted_cohomology, Su11Poly, TrigPoly,
    };
    use qpcocycle::sl2_geometry::Su11Vector;

    fn trig_poly(order: usize) -> impl Strategy<Value = TrigPoly> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2 * order + 1).prop_map(move |v| {
            let modes: Vec<(i64, C64)> =
                v.iter().enumerate().map(|(j, &(re, im))| (j as i64 - order as i64, C64::new(re, im))).collect();
            TrigPoly::from_modes(order, &modes)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn trig_poly_sample_round_trip(p in trig_poly(6), m in 13usize..40) {
            let q = TrigPoly::from_samples(&p.samples(m), 6).unwrap();
            for k in -6..=6 {
                prop_assert!((q.coeff(k) - p.coeff(k)).norm() <= 1e-12);
            }
        }

        #[test]
        fn real_trig_round_trip(p in trig_poly(5)) {
            let re = p.real_part();
            let back = TrigPoly::from_trig(&re.to_trig());
            for k in -5..=5 {
                prop_assert!((back.coeff(k) - re.coeff(k)).norm() <= 1e-14);
            }
        }

        #[test]
        fn translation_solution_by_substitution(f in trig_poly(8), alpha in frequency(), theta in 0.0f64..1.0) {
            let sol = solve_translation_cohomology(&f, alpha, 8).unwrap();
            let lhs = sol.y.eval(theta + alpha) - sol.y.eval(theta);
            let rhs = f.eval(theta) - f.coeff(0);
            prop_assert!((lhs - rhs).norm() <= 1e-7 * sol.amplification.max(1.0));
            prop_assert!(sol.residual <= 1e-7 * sol.amplification.max(1.0));
        }

        #[test]
        fn twisted_solution_by_substitution(g in trig_poly(8), alpha in frequency(), r in 1i64..3, theta in 0.0f64..1.0) {
            let sol = solve_twisted_cohomology(&g, alpha, r, 8).unwrap();
            let e = C64::from_polar(1.0, -4.0 * std::f64::consts::PI * r as f64 * theta);
            let lhs = e * sol.nu.eval(theta + alpha) - sol.nu.eval(theta);
            let rhs = sol.band.eval(theta) - g.eval(theta);
            prop_assert!((lhs - rhs).norm() <= 1e-7 * sol.amplification);
            for k in sol.band.modes().map(|(k, _)| k) {
                prop_assert!((-(2 * r - 1)..=0).contains(&k) || sol.band.coeff(k).norm() == 0.0);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn normal_form_identity_is_exact(modes in prop::collection::vec((-4i64..=4, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 1..4), size in 1e-5f64..1e-3) {
            let alpha = (5f64.sqrt() - 1.0) / 2.0;
            let m = 256;
            let mut t = TrigPoly::zero(4);
            let mut nu = TrigPoly::zero(4);
            for &(k, a, b, c) in &modes {
                t.set_coeff(k, t.coeff(k) + C64::new(a, 0.0) * size);
                t.set_coeff(-k, t.coeff(-k) + C64::new(a, 0.0) * size);
                nu.set_coeff(k, nu.coeff(k) + C64::new(b, c) * size);
            }
            let u: Vec<Su11Vector> = Su11Poly { t: t.real_part(), nu }.samples(m);
            let settings = Settings { normal_form_eps0: 1e9, ..Settings::default() };
            let out = normal_form_step(&u, alpha, 1, 16, &settings).unwrap();
            prop_assert!(out.identity_residual <= 1e-12, "{}", out.identity_residual);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(4))]

        #[test]
        fn kam_preserves_rotation_number(psi in 0.1f64..0.4, coeffs in trig_coeffs(3, 5e-5)) {
            let alpha = (5f64.sqrt() - 1.0) / 2.0;
            let expr = MapExpr::Product {
                factors: vec![MapExpr::Const { m: Mat2R::rotation_turns(psi) }, MapExpr::ExpTrig { coeffs }],
            };
            let c = QpCocycle::new(alpha, Sl2Map::with_grid(expr, 2048).unwrap());
            let out = kam_reduce_local(&c, 8, &Settings::default());
            prop_assume!(out.is_ok());
            let out = out.unwrap();
            let deg = degree(&out.conjugacy).unwrap();
            let rho = fibered_rotation_number(&c, 100_000, 0.0, 0.0).unwrap().value;
            let expected = out.angle + deg as f64 * alpha;
            prop_assert!(circle_gap(rho, expected) <= 3e-4, "{} vs {}", rho, expected);
        }

        #[test]
        fn hyperbolic_neighbor_is_cone_certified(psi in 0.05f64..0.45, eps in 0.05f64..0.2) {
            let alpha = (5f64.sqrt() - 1.0) / 2.0;
            let nb = hyperbolic_neighbor(&Mat2R::rotation_turns(psi), alpha, eps, 2, 2048).unwrap();
            prop_assert!(nb.distance <= eps);
            prop_assert!(neighbor_cone_test(&nb, alpha, 256) < 1.0);
        }
    }
}
